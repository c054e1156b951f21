//! A tiny synthetic detection corpus: colored boxes on white.
//!
//! Useful for trying the tool end to end with the built-in mock detector,
//! which finds saturated red, green and blue blobs.

use std::path::Path;

use crate::bbox::BBox;
use crate::image::{save_image, Image};
use crate::suite::{save_suite, ExpectedBox, ExpectedOutput, SuiteError, SuiteKind, Task, TestCase, TestSuite};

pub const SIZE: u32 = 64;
pub const BOX: u32 = 24;
const COLORS: [(&str, [u8; 3]); 3] = [("red", [255, 0, 0]), ("green", [0, 255, 0]), ("blue", [0, 0, 255])];

/// Case `i`: a 24×24 box, colored red, green, blue in turn, on a 64×64 white
/// image. Positions differ per case.
pub fn box_case(i: usize) -> (Image, ExpectedBox) {
    let (label, color) = COLORS[i % COLORS.len()];
    let x = 6 + 7 * (i as u32 % 5);
    let y = 30 - 5 * (i as u32 % 5);
    let img = Image::from_fn(SIZE, SIZE, |px, py| {
        if (x..x + BOX).contains(&px) && (y..y + BOX).contains(&py) {
            color
        } else {
            [255, 255, 255]
        }
    });
    let expected = ExpectedBox {
        label: label.to_string(),
        bbox: BBox::new(x as f64, y as f64, BOX as f64, BOX as f64),
    };
    (img, expected)
}

/// Writes `n` box images to `dir/images/` and the initial detection suite to
/// `dir/initial.json`, returning the suite.
pub fn write_box_corpus(dir: impl AsRef<Path>, n: usize) -> Result<TestSuite, SuiteError> {
    let dir = dir.as_ref();
    let mut cases = Vec::with_capacity(n);
    for i in 0..n {
        let (img, expected) = box_case(i);
        let id = format!("box{i}");
        let image = dir.join("images").join(format!("{id}.png"));
        save_image(&img, &image).map_err(|source| SuiteError::Image {
            case: id.clone(),
            source,
        })?;
        cases.push(TestCase {
            id,
            image,
            expected: ExpectedOutput::Detections { boxes: vec![expected] },
            provenance: None,
        });
    }
    let suite = TestSuite::new(SuiteKind::Initial, Task::Detection, cases);
    save_suite(&suite, dir.join("initial.json"))?;
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::load_suite;
    use crate::sut::{mock_detect, SutOutput};

    #[test]
    fn mock_sees_every_box() {
        for i in 0..6 {
            let (img, expected) = box_case(i);
            let SutOutput::Detections { items } = mock_detect(&img) else {
                panic!("case {i}")
            };
            assert_eq!(items.len(), 1);
            assert_eq!(items[0].label, expected.label);
            assert_eq!(items[0].bbox, expected.bbox);
        }
    }

    #[test]
    fn written_corpus_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let suite = write_box_corpus(dir.path(), 5).unwrap();
        let back = load_suite(dir.path().join("initial.json")).unwrap();
        assert_eq!(back.cases.len(), 5);
        assert_eq!(back.cases[4].expected, suite.cases[4].expected);
        assert_eq!(back.cases[4].image.canonicalize().unwrap(), suite.cases[4].image.canonicalize().unwrap());
    }
}
