pub mod clause;
pub mod cli;
pub mod frontend;
pub mod index;
pub mod query;
pub mod saturate;
pub mod signature;
pub mod term;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/library.md")]
    mod library {}
    #[doc = include_str!("../../../book/src/input.md")]
    mod input {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
}
