//! The guide's chapters, compiled so that every Rust snippet in them runs
//! as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/images.md")]
pub mod images {}

#[doc = include_str!("../../../book/src/modifiers.md")]
pub mod modifiers {}

#[doc = include_str!("../../../book/src/randomness.md")]
pub mod randomness {}

#[doc = include_str!("../../../book/src/similarity.md")]
pub mod similarity {}

#[doc = include_str!("../../../book/src/suites.md")]
pub mod suites {}

#[doc = include_str!("../../../book/src/protocol.md")]
pub mod protocol {}

#[doc = include_str!("../../../book/src/running.md")]
pub mod running {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
