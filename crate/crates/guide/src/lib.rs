//! Compiles the book chapters so every Rust listing in them runs as a
//! doc-test. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/networks.md")]
pub mod networks {}
#[doc = include_str!("../../../book/src/scaling.md")]
pub mod scaling {}
#[doc = include_str!("../../../book/src/compact.md")]
pub mod compact {}
#[doc = include_str!("../../../book/src/dynamic-trees.md")]
pub mod dynamic_trees {}
#[doc = include_str!("../../../book/src/transform.md")]
pub mod transform {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
