//! The guide in `book/` as doc-tests: each chapter becomes a module so a
//! failing example points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/losses.md")]
pub mod losses {}
#[doc = include_str!("../../../book/src/pooling.md")]
pub mod pooling {}
#[doc = include_str!("../../../book/src/fitting.md")]
pub mod fitting {}
#[doc = include_str!("../../../book/src/scr.md")]
pub mod scr {}
#[doc = include_str!("../../../book/src/standard_formula.md")]
pub mod standard_formula {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
