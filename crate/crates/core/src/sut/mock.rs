//! A deterministic color-blob detector used as a self-contained system under
//! test.
//!
//! * Frames with mean luminance below 10 are rejected with `dark_frame`.
//! * Otherwise pixels whose dominant channel is at least 200 while the other
//!   two are at most 80 form red, green and blue masks. 4-connected
//!   components of at least 25 pixels become detections with score 1.0 and a
//!   tight bounding box, ordered by label, then top, then left.
//! * For classification the label of the largest component is returned, or
//!   `background` when there is none.

use std::collections::VecDeque;
use std::path::Path;

use super::protocol::Request;
use super::{Detection, Sut, SutOutput};
use crate::bbox::BBox;
use crate::image::{load_image, Image};
use crate::suite::Task;

const DARK_FRAME_LUMA: f64 = 10.0;
const DOMINANT_MIN: u8 = 200;
const OTHERS_MAX: u8 = 80;
const MIN_AREA: usize = 25;
const LABELS: [&str; 3] = ["blue", "green", "red"];

fn channel_for(label: &str) -> usize {
    match label {
        "red" => 0,
        "green" => 1,
        _ => 2,
    }
}

pub fn mock_detect(img: &Image) -> SutOutput {
    if img.mean_luminance() < DARK_FRAME_LUMA {
        return SutOutput::error("dark_frame");
    }
    let mut items: Vec<(Detection, usize)> = Vec::new();
    for label in LABELS {
        let ch = channel_for(label);
        let mask: Vec<bool> = img
            .pixels()
            .iter()
            .map(|p| {
                p[ch] >= DOMINANT_MIN && (0..3).filter(|&c| c != ch).all(|c| p[c] <= OTHERS_MAX)
            })
            .collect();
        for (bbox, area) in components(&mask, img.width() as usize, img.height() as usize) {
            if area >= MIN_AREA {
                items.push((
                    Detection {
                        label: label.to_string(),
                        score: 1.0,
                        bbox,
                    },
                    area,
                ));
            }
        }
    }
    items.sort_by(|(a, _), (b, _)| {
        a.label
            .cmp(&b.label)
            .then(a.bbox.y.total_cmp(&b.bbox.y))
            .then(a.bbox.x.total_cmp(&b.bbox.x))
    });
    SutOutput::Detections {
        items: items.into_iter().map(|(d, _)| d).collect(),
    }
}

/// Classification view of [`mock_detect`]: the largest blob's color.
pub fn mock_classify(img: &Image) -> SutOutput {
    match mock_detect(img) {
        SutOutput::Detections { items } => {
            let label = items
                .iter()
                .fold(None::<&Detection>, |best, d| match best {
                    Some(b) if b.bbox.area() >= d.bbox.area() => Some(b),
                    _ => Some(d),
                })
                .map_or("background", |d| d.label.as_str());
            SutOutput::Classification {
                label: label.to_string(),
            }
        }
        other => other,
    }
}

// Bounding boxes and pixel counts of the 4-connected components of `mask`.
fn components(mask: &[bool], w: usize, h: usize) -> Vec<(BBox, usize)> {
    let mut seen = vec![false; mask.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut area = 0;
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            area += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            let mut visit = |j: usize| {
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        let bbox = BBox::new(x0 as f64, y0 as f64, (x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64);
        out.push((bbox, area));
    }
    out
}

/// Answers a protocol request with the mock detector, reading the image
/// from disk.
pub fn mock_handler(req: &Request) -> SutOutput {
    match load_image(&req.image_path) {
        Ok(img) => match req.task {
            Task::Detection => mock_detect(&img),
            Task::Classification => mock_classify(&img),
        },
        Err(e) => SutOutput::error(format!("io: {e}")),
    }
}

/// In-process [`Sut`] backed by the mock detector.
#[derive(Debug, Default, Clone, Copy)]
pub struct MockSut;

impl Sut for MockSut {
    fn query(&mut self, image: &Path, task: Task) -> SutOutput {
        mock_handler(&Request {
            id: 0,
            image_path: image.to_string_lossy().into_owned(),
            task,
        })
    }
}
