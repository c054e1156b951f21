//! Weather and lighting effects: fog, rain, snow, sun flare and shadows.
//!
//! All effects draw from one [`SeededRng`] seeded with the modification seed
//! and are exact identities at intensity 0.

use std::f64::consts::TAU;

use crate::image::{luma, Image};
use crate::rng::SeededRng;

use super::color::clamp_round;
use super::consts::*;
use super::{blur, ModifyError, WeatherKind};

pub fn weather(
    img: &Image,
    kind: WeatherKind,
    intensity: f64,
    seed: u64,
) -> Result<Image, ModifyError> {
    if !(intensity.is_finite() && (0.0..=1.0).contains(&intensity)) {
        return Err(ModifyError::param(
            "intensity",
            format!("{intensity} is outside [0, 1]"),
        ));
    }
    if intensity == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = SeededRng::new(seed);
    Ok(match kind {
        WeatherKind::Fog => {
            let mask = FogMask::seeded(&mut rng);
            fog_with_mask(img, intensity, &mask)
        }
        WeatherKind::Snow => snow(img, intensity, &mut rng),
        WeatherKind::Rain => rain(img, intensity, &mut rng),
        WeatherKind::Sun => sun(img, intensity, &mut rng),
        WeatherKind::Shadow => shadow(img, intensity, &mut rng),
    })
}

/// Smooth value noise in `[0, 1]`: a square lattice of samples stretched
/// over the image and interpolated bilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct FogMask {
    side: usize,
    lattice: Vec<f64>,
}

impl FogMask {
    pub fn seeded(rng: &mut SeededRng) -> Self {
        let side = FOG_LATTICE;
        Self {
            side,
            lattice: (0..side * side).map(|_| rng.unit()).collect(),
        }
    }

    /// A mask with the same value everywhere.
    pub fn constant(value: f64) -> Self {
        Self {
            side: 2,
            lattice: vec![value.clamp(0.0, 1.0); 4],
        }
    }

    /// Mask value at pixel `(x, y)` of a `width x height` image.
    pub fn sample(&self, x: u32, y: u32, width: u32, height: u32) -> f64 {
        let cells = (self.side - 1) as f64;
        let to_lattice = |p: u32, extent: u32| {
            if extent <= 1 {
                0.0
            } else {
                f64::from(p) / f64::from(extent - 1) * cells
            }
        };
        let (u, v) = (to_lattice(x, width), to_lattice(y, height));
        let i0 = (u.floor() as usize).min(self.side - 2);
        let j0 = (v.floor() as usize).min(self.side - 2);
        let (tu, tv) = (u - i0 as f64, v - j0 as f64);
        let at = |i: usize, j: usize| self.lattice[j * self.side + i];
        (1.0 - tu) * (1.0 - tv) * at(i0, j0)
            + tu * (1.0 - tv) * at(i0 + 1, j0)
            + (1.0 - tu) * tv * at(i0, j0 + 1)
            + tu * tv * at(i0 + 1, j0 + 1)
    }
}

/// `c -> c + (255 - c) * intensity * mask(x, y)`.
pub fn fog_with_mask(img: &Image, intensity: f64, mask: &FogMask) -> Image {
    let (w, h) = (img.width(), img.height());
    Image::from_fn(w, h, |x, y| {
        let k = intensity * mask.sample(x, y, w, h);
        img.get(x, y)
            .map(|c| clamp_round(f64::from(c) + (255.0 - f64::from(c)) * k))
    })
}

fn snow(img: &Image, intensity: f64, rng: &mut SeededRng) -> Image {
    let mut out = img.clone();
    for px in out.pixels_mut() {
        if luma(*px) > SNOW_LUMA_THRESHOLD {
            *px = px.map(|c| clamp_round(f64::from(c) + (255.0 - f64::from(c)) * intensity));
        }
    }
    let (w, h) = (img.width(), img.height());
    let dots = (intensity * f64::from(w) * f64::from(h) / SNOW_PIXELS_PER_DOT).floor() as usize;
    let r = SNOW_DOT_RADIUS;
    for _ in 0..dots {
        let cx = rng.below(u64::from(w)) as i64;
        let cy = rng.below(u64::from(h)) as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                if let Some((x, y)) = in_bounds(cx + dx, cy + dy, w, h) {
                    out.set(x, y, [255, 255, 255]);
                }
            }
        }
    }
    out
}

fn rain(img: &Image, intensity: f64, rng: &mut SeededRng) -> Image {
    let (w, h) = (img.width(), img.height());
    let streaks = (intensity * f64::from(w) * f64::from(h) / RAIN_PIXELS_PER_STREAK).floor() as usize;
    let angle = RAIN_ANGLE_DEG.to_radians();
    let (dx, dy) = (angle.sin(), angle.cos());
    let steps = RAIN_LENGTH as usize;

    let mut out = img.clone();
    let mut cells: Vec<(u32, u32)> = Vec::with_capacity(steps + 1);
    for _ in 0..streaks {
        let x0 = rng.range(0.0, f64::from(w));
        let y0 = rng.range(0.0, f64::from(h));
        cells.clear();
        for t in 0..=steps {
            let t = t as f64;
            let px = (x0 + t * dx).floor() as i64;
            let py = (y0 + t * dy).floor() as i64;
            if let Some(cell) = in_bounds(px, py, w, h) {
                cells.push(cell);
            }
        }
        // blend each covered pixel once per streak
        cells.sort_unstable();
        cells.dedup();
        for &(x, y) in &cells {
            let src = out.get(x, y);
            let mut px = [0u8; 3];
            for ch in 0..3 {
                px[ch] = clamp_round(
                    f64::from(src[ch]) * (1.0 - RAIN_ALPHA) + f64::from(RAIN_COLOR[ch]) * RAIN_ALPHA,
                );
            }
            out.set(x, y, px);
        }
    }
    blur(&out, RAIN_BLUR_STRENGTH).expect("rain blur strength is in range")
}

fn sun(img: &Image, intensity: f64, rng: &mut SeededRng) -> Image {
    let (w, h) = (img.width(), img.height());
    let cx = rng.range(0.0, f64::from(w));
    let cy = rng.range(0.0, f64::from(h) / 3.0);
    let radius = SUN_RADIUS_FRACTION * f64::from(w.min(h));
    Image::from_fn(w, h, |x, y| {
        let d = (f64::from(x) - cx).hypot(f64::from(y) - cy);
        let gain = SUN_MAX_GAIN * intensity * (1.0 - d / radius).max(0.0);
        img.get(x, y).map(|c| clamp_round(f64::from(c) + gain))
    })
}

fn shadow(img: &Image, intensity: f64, rng: &mut SeededRng) -> Image {
    let (w, h) = (img.width(), img.height());
    let count = 1 + (intensity * SHADOW_EXTRA_QUADS).floor() as usize;
    let quads: Vec<[(f64, f64); 4]> = (0..count)
        .map(|_| random_convex_quad(rng, f64::from(w), f64::from(h)))
        .collect();
    let scale = 1.0 - SHADOW_DARKEN * intensity;
    Image::from_fn(w, h, |x, y| {
        let p = (f64::from(x) + 0.5, f64::from(y) + 0.5);
        let src = img.get(x, y);
        if quads.iter().any(|q| inside_convex(q, p)) {
            src.map(|c| clamp_round(f64::from(c) * scale))
        } else {
            src
        }
    })
}

// Four points on a seeded ellipse, ordered by angle, are in convex position.
fn random_convex_quad(rng: &mut SeededRng, w: f64, h: f64) -> [(f64, f64); 4] {
    let cx = rng.range(0.0, w);
    let cy = rng.range(0.0, h);
    let rx = rng.range(SHADOW_EXTENT.0, SHADOW_EXTENT.1) * w;
    let ry = rng.range(SHADOW_EXTENT.0, SHADOW_EXTENT.1) * h;
    // one angle per quadrant keeps the quad from collapsing into a sliver
    let mut quad = [(0.0, 0.0); 4];
    for (k, v) in quad.iter_mut().enumerate() {
        let theta = (k as f64 + rng.unit()) * (TAU / 4.0);
        *v = (cx + rx * theta.cos(), cy + ry * theta.sin());
    }
    quad
}

fn inside_convex(quad: &[(f64, f64); 4], (px, py): (f64, f64)) -> bool {
    let mut sign = 0.0f64;
    for i in 0..4 {
        let (ax, ay) = quad[i];
        let (bx, by) = quad[(i + 1) % 4];
        let cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
        if cross == 0.0 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}

fn in_bounds(x: i64, y: i64, w: u32, h: u32) -> Option<(u32, u32)> {
    (x >= 0 && y >= 0 && x < i64::from(w) && y < i64::from(h)).then_some((x as u32, y as u32))
}
