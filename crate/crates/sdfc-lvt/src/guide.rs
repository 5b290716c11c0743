//! The book's chapters attached as doc-tests: every fenced Rust block in
//! `book/src/*.md` compiles and runs under `cargo test --doc`, keeping
//! the guide in lockstep with the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/signal-model.md")]
pub mod signal_model {}

#[doc = include_str!("../../../book/src/subband-conjugate.md")]
pub mod subband_conjugate {}

#[doc = include_str!("../../../book/src/keystone.md")]
pub mod keystone_chapter {}

#[doc = include_str!("../../../book/src/lvt.md")]
pub mod lvt_chapter {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}

#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis_chapter {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli_chapter {}
