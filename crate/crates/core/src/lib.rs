//! Metamorphic testing for computer-vision systems.
//!
//! Starting from a small labelled *initial* suite, the crate derives two
//! follow-up suites by applying image modifiers:
//!
//! * the **similar** suite keeps each source's expected output, because the
//!   modification should not change what a correct system sees;
//! * the **severe** suite expects an error, because the modification destroys
//!   the information needed to answer.
//!
//! Each follow-up case is scored against its source with SSIM, sent to the
//! system under test (in process or through a line-delimited JSON protocol),
//! and judged pass or fail.
//!
//! ```
//! use vmt_core::image::Image;
//! use vmt_core::modifiers::{apply, Modification, Operator};
//! use vmt_core::diff::{mssim, SsimParams};
//!
//! let img = Image::from_fn(32, 32, |x, y| [(x * 8) as u8, (y * 8) as u8, 128]);
//! let brighter = apply(&Modification::of(Operator::Brightness { factor: 0.1 }), &img).unwrap();
//! let s = mssim(&img, &brighter, &SsimParams::default()).unwrap().mean;
//! assert!(s > 0.9 && s < 1.0);
//! ```

pub mod bbox;
pub mod corpus;
pub mod diff;
pub mod image;
pub mod modifiers;
pub mod report;
pub mod rng;
pub mod runner;
pub mod suite;
pub mod sut;

pub use bbox::BBox;
pub use diff::{mse, mssim, SsimParams, SsimResult};
pub use image::{load_image, save_image, Image};
pub use modifiers::{apply, Modification, Operator};
pub use report::{export_report, ReportFormat};
pub use runner::{run_suite, ReportRow, RunOptions, RunSummary};
pub use suite::{generate_suites, load_suite, save_suite, TestCase, TestSuite};
pub use sut::{compare_outputs, Sut, SutOutput, Verdict};
