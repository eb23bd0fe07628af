//! Shared generators and oracles. The oracles use their own term types and
//! evaluation so that they do not inherit bugs from the library.
#![allow(dead_code)]

pub mod diseq;
pub mod forward;
pub mod ground;
pub mod nat;
pub mod props;
pub mod strategies;

use std::path::PathBuf;

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}
