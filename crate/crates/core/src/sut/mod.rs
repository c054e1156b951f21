//! The system under test: what it answers, how answers are judged, and how
//! it is driven.
//!
//! A system under test is a total function from images to [`SutOutput`].
//! Analysis results ([`SutOutput::Classification`], [`SutOutput::Detections`])
//! and behavioral outcomes ([`SutOutput::Error`]) share one codomain, so a
//! crash or a timeout is an answer like any other, not a harness failure.

mod adapter;
mod mock;
pub mod protocol;

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::suite::{ExpectedBox, ExpectedOutput, Task};

pub use adapter::{SutAdapter, DEFAULT_TIMEOUT_MS};
pub use mock::{mock_classify, mock_detect, mock_handler, MockSut};

/// Default IoU needed for an actual box to match an expected one.
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    pub score: f64,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SutOutput {
    Classification { label: String },
    Detections { items: Vec<Detection> },
    /// An error message, crash or timeout. Harness-detected failures carry
    /// a `crash:`, `protocol:` or `timeout:` prefix.
    Error { message: String },
}

impl SutOutput {
    pub fn error(message: impl Into<String>) -> Self {
        SutOutput::Error {
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, SutOutput::Error { .. })
    }
}

impl fmt::Display for SutOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SutOutput::Classification { label } => f.write_str(label),
            SutOutput::Detections { items } if items.is_empty() => f.write_str("none"),
            SutOutput::Detections { items } => {
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}@{}", d.label, d.bbox)?;
                }
                Ok(())
            }
            SutOutput::Error { message } => write!(f, "err({message})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SutError {
    #[error("expected output does not fit a {task} task")]
    TaskMismatch { task: Task },
}

/// Anything that can answer queries for images on disk.
pub trait Sut {
    fn query(&mut self, image: &Path, task: Task) -> SutOutput;
}

impl<S: Sut + ?Sized> Sut for Box<S> {
    fn query(&mut self, image: &Path, task: Task) -> SutOutput {
        (**self).query(image, task)
    }
}

/// Judges an actual output against the expectation.
///
/// * classification: labels must be equal strings;
/// * detections: greedy highest-IoU matching must pair every expected box
///   with a distinct same-label actual box at `IoU >= iou_threshold`, leaving
///   no actual box unmatched;
/// * err: any [`SutOutput::Error`] passes.
///
/// A different kind of answer than expected fails.
pub fn compare_outputs(
    expected: &ExpectedOutput,
    actual: &SutOutput,
    task: Task,
    iou_threshold: f64,
) -> Result<Verdict, SutError> {
    if !expected.fits(task) {
        return Err(SutError::TaskMismatch { task });
    }
    let pass = match (expected, actual) {
        (ExpectedOutput::Err, actual) => actual.is_error(),
        (ExpectedOutput::Classification { label }, SutOutput::Classification { label: got }) => {
            label == got
        }
        (ExpectedOutput::Detections { boxes }, SutOutput::Detections { items }) => {
            detections_match(boxes, items, iou_threshold)
        }
        _ => false,
    };
    Ok(Verdict::from_bool(pass))
}

fn detections_match(expected: &[ExpectedBox], actual: &[Detection], threshold: f64) -> bool {
    if expected.len() != actual.len() {
        return false;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, e) in expected.iter().enumerate() {
        for (j, a) in actual.iter().enumerate() {
            if e.label == a.label {
                let iou = e.bbox.iou(&a.bbox);
                if iou >= threshold {
                    pairs.push((iou, i, j));
                }
            }
        }
    }
    // Highest IoU first, ties by expected order, then by the actual box's
    // own geometry so the outcome never depends on the actual list's order.
    pairs.sort_by(|&(iou_a, ea, ja), &(iou_b, eb, jb)| {
        iou_b
            .total_cmp(&iou_a)
            .then(ea.cmp(&eb))
            .then_with(|| intrinsic_cmp(&actual[ja], &actual[jb]))
    });
    let mut expected_used = vec![false; expected.len()];
    let mut actual_used = vec![false; actual.len()];
    let mut matched = 0;
    for (_, i, j) in pairs {
        if !expected_used[i] && !actual_used[j] {
            expected_used[i] = true;
            actual_used[j] = true;
            matched += 1;
        }
    }
    matched == expected.len()
}

fn intrinsic_cmp(a: &Detection, b: &Detection) -> Ordering {
    let (ka, kb) = (a.bbox.sort_key(), b.bbox.sort_key());
    ka.iter()
        .zip(&kb)
        .fold(Ordering::Equal, |acc, (x, y)| acc.then(x.total_cmp(y)))
        .then(b.score.total_cmp(&a.score))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expected_box(label: &str, b: [f64; 4]) -> ExpectedBox {
        ExpectedBox {
            label: label.into(),
            bbox: b.into(),
        }
    }

    fn det(label: &str, b: [f64; 4]) -> Detection {
        Detection {
            label: label.into(),
            score: 1.0,
            bbox: b.into(),
        }
    }

    #[test]
    fn box_matching_examples() {
        let expected = ExpectedOutput::Detections {
            boxes: vec![expected_box("car", [0.0, 0.0, 10.0, 10.0])],
        };
        let same = SutOutput::Detections {
            items: vec![det("car", [0.0, 0.0, 10.0, 10.0])],
        };
        let shifted = SutOutput::Detections {
            items: vec![det("car", [5.0, 0.0, 10.0, 10.0])],
        };
        let relabeled = SutOutput::Detections {
            items: vec![det("boat", [0.0, 0.0, 10.0, 10.0])],
        };
        let cmp = |a| compare_outputs(&expected, a, Task::Detection, 0.5).unwrap();
        assert_eq!(cmp(&same), Verdict::Pass);
        assert_eq!(cmp(&shifted), Verdict::Fail);
        assert_eq!(cmp(&relabeled), Verdict::Fail);
        assert_eq!(
            compare_outputs(&expected, &shifted, Task::Detection, 0.3).unwrap(),
            Verdict::Pass
        );
    }

    #[test]
    fn extra_or_missing_boxes_fail() {
        let expected = ExpectedOutput::Detections {
            boxes: vec![expected_box("a", [0.0, 0.0, 4.0, 4.0])],
        };
        let extra = SutOutput::Detections {
            items: vec![det("a", [0.0, 0.0, 4.0, 4.0]), det("a", [10.0, 10.0, 4.0, 4.0])],
        };
        let none = SutOutput::Detections { items: vec![] };
        assert_eq!(compare_outputs(&expected, &extra, Task::Detection, 0.5).unwrap(), Verdict::Fail);
        assert_eq!(compare_outputs(&expected, &none, Task::Detection, 0.5).unwrap(), Verdict::Fail);
        let empty = ExpectedOutput::Detections { boxes: vec![] };
        assert_eq!(compare_outputs(&empty, &none, Task::Detection, 0.5).unwrap(), Verdict::Pass);
    }

    #[test]
    fn greedy_prefers_highest_iou() {
        let expected = ExpectedOutput::Detections {
            boxes: vec![
                expected_box("a", [0.0, 0.0, 10.0, 10.0]),
                expected_box("a", [2.0, 0.0, 10.0, 10.0]),
            ],
        };
        let actual = SutOutput::Detections {
            items: vec![det("a", [2.0, 0.0, 10.0, 10.0]), det("a", [0.0, 0.0, 10.0, 10.0])],
        };
        assert_eq!(compare_outputs(&expected, &actual, Task::Detection, 0.5).unwrap(), Verdict::Pass);
    }

    #[test]
    fn err_semantics_and_kinds() {
        let err = ExpectedOutput::Err;
        assert_eq!(
            compare_outputs(&err, &SutOutput::error("anything"), Task::Detection, 0.5).unwrap(),
            Verdict::Pass
        );
        assert_eq!(
            compare_outputs(&err, &SutOutput::Detections { items: vec![] }, Task::Detection, 0.5).unwrap(),
            Verdict::Fail
        );
        let cat = ExpectedOutput::Classification { label: "cat".into() };
        let c = |l: &str| SutOutput::Classification { label: l.into() };
        assert_eq!(compare_outputs(&cat, &c("cat"), Task::Classification, 0.5).unwrap(), Verdict::Pass);
        assert_eq!(compare_outputs(&cat, &c("Cat"), Task::Classification, 0.5).unwrap(), Verdict::Fail);
        assert_eq!(
            compare_outputs(&cat, &SutOutput::error("x"), Task::Classification, 0.5).unwrap(),
            Verdict::Fail
        );
        assert!(matches!(
            compare_outputs(&cat, &c("cat"), Task::Detection, 0.5),
            Err(SutError::TaskMismatch { .. })
        ));
    }

    #[test]
    fn summaries() {
        assert_eq!(SutOutput::error("dark_frame").to_string(), "err(dark_frame)");
        assert_eq!(SutOutput::Detections { items: vec![] }.to_string(), "none");
        let two = SutOutput::Detections {
            items: vec![det("red", [1.0, 2.0, 3.0, 4.0]), det("blue", [0.0, 0.0, 5.0, 5.0])],
        };
        assert_eq!(two.to_string(), "red@[1,2,3,4]; blue@[0,0,5,5]");
    }
}
