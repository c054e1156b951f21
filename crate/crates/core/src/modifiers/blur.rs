use crate::image::Image;

use super::consts::{BLUR_RADIUS_SIGMAS, BLUR_SIGMA_PER_STRENGTH};
use super::ModifyError;

/// Normalized 1-D Gaussian taps of length `2 * ceil(3 * sigma) + 1`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (BLUR_RADIUS_SIGMAS * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / denom).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Mirror-reflects `i` into `0..n` without repeating the edge sample
/// (`-1 -> 1`, `n -> n - 2`).
#[inline]
pub fn reflect_index(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64 - 1);
    let m = i.rem_euclid(period);
    if m >= n as i64 {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Separable Gaussian blur with `sigma = 10 * strength`, mirror borders and
/// a single rounding at the end. Strength 0 returns the input unchanged.
pub fn blur(img: &Image, strength: f64) -> Result<Image, ModifyError> {
    if !(strength.is_finite() && (0.0..=1.0).contains(&strength)) {
        return Err(ModifyError::param(
            "strength",
            format!("{strength} is outside [0, 1]"),
        ));
    }
    if strength == 0.0 {
        return Ok(img.clone());
    }
    let taps = gaussian_kernel(BLUR_SIGMA_PER_STRENGTH * strength);
    let r = (taps.len() / 2) as i64;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let src = img.pixels();

    let mut horizontal = vec![[0.0f64; 3]; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, &t) in taps.iter().enumerate() {
                let px = row[reflect_index(x as i64 + k as i64 - r, w)];
                for ch in 0..3 {
                    acc[ch] += t * f64::from(px[ch]);
                }
            }
            horizontal[y * w + x] = acc;
        }
    }

    let mut out = img.clone();
    let dst = out.pixels_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, &t) in taps.iter().enumerate() {
                let px = horizontal[reflect_index(y as i64 + k as i64 - r, h) * w + x];
                for ch in 0..3 {
                    acc[ch] += t * px[ch];
                }
            }
            dst[y * w + x] = acc.map(super::color::clamp_round);
        }
    }
    Ok(out)
}
