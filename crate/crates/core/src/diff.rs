//! Image similarity: mean structural similarity (SSIM) and mean squared error.
//!
//! SSIM runs on BT.601 luminance with a normalized Gaussian window
//! (11x11, sigma 1.5 by default) evaluated only at fully interior window
//! positions. For each position:
//!
//! ```text
//! mu_x  = sum w*x            sigma_x^2 = sum w*x^2 - mu_x^2
//! mu_y  = sum w*y            sigma_y^2 = sum w*y^2 - mu_y^2
//! sigma_xy = sum w*x*y - mu_x*mu_y
//!
//! ssim = (2 mu_x mu_y + C1)(2 sigma_xy + C2) / ((mu_x^2 + mu_y^2 + C1)(sigma_x^2 + sigma_y^2 + C2))
//! C1 = (k1 L)^2, C2 = (k2 L)^2
//! ```
//!
//! The reported mean is the raw arithmetic mean of the map and can be
//! negative for anti-correlated images.

use serde::{Deserialize, Serialize};

use crate::image::{luminance, Image, LumaPlane};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("image {width}x{height} is smaller than the {window}x{window} SSIM window")]
    ImageTooSmall { width: u32, height: u32, window: usize },
    #[error("invalid SSIM parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<(), DiffError> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(DiffError::InvalidParams(format!(
                "window must be odd and >= 3, got {}",
                self.window
            )));
        }
        let positive = [
            ("sigma", self.sigma),
            ("k1", self.k1),
            ("k2", self.k2),
            ("dynamic_range", self.dynamic_range),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(DiffError::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    /// One axis of the separable window; the 2-D window is its outer product.
    pub fn taps(&self) -> Vec<f64> {
        let center = (self.window / 2) as f64;
        let mut taps: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - center;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= sum);
        taps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsimResult {
    pub mean: f64,
    /// Number of window positions per row (`width - window + 1`).
    pub map_width: usize,
    pub map_height: usize,
    /// Row-major per-position SSIM values.
    pub map: Vec<f64>,
}

impl SsimResult {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.map[y * self.map_width + x]
    }
}

/// Mean SSIM and its per-window map between two equally sized images.
pub fn mssim(a: &Image, b: &Image, params: &SsimParams) -> Result<SsimResult, DiffError> {
    if !a.same_dimensions(b) {
        return Err(DiffError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    mssim_planes(&luminance(a), &luminance(b), params)
}

/// [`mssim`] on precomputed luminance planes.
pub fn mssim_planes(a: &LumaPlane, b: &LumaPlane, params: &SsimParams) -> Result<SsimResult, DiffError> {
    params.validate()?;
    if a.width != b.width || a.height != b.height {
        return Err(DiffError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    let (w, h) = (a.width as usize, a.height as usize);
    let win = params.window;
    if w < win || h < win {
        return Err(DiffError::ImageTooSmall {
            width: a.width,
            height: a.height,
            window: win,
        });
    }
    let taps = params.taps();
    let (c1, c2) = (params.c1(), params.c2());
    let (mw, mh) = (w - win + 1, h - win + 1);

    // Horizontal pass over the five moment planes, valid columns only.
    let mut rows = vec![[0.0f64; 5]; h * mw];
    for y in 0..h {
        let ra = &a.values[y * w..(y + 1) * w];
        let rb = &b.values[y * w..(y + 1) * w];
        for x in 0..mw {
            let mut acc = [0.0; 5];
            for (k, &t) in taps.iter().enumerate() {
                let (va, vb) = (ra[x + k], rb[x + k]);
                acc[0] += t * va;
                acc[1] += t * vb;
                acc[2] += t * va * va;
                acc[3] += t * vb * vb;
                acc[4] += t * va * vb;
            }
            rows[y * mw + x] = acc;
        }
    }

    let mut map = Vec::with_capacity(mw * mh);
    for y in 0..mh {
        for x in 0..mw {
            let mut m = [0.0; 5];
            for (k, &t) in taps.iter().enumerate() {
                let r = &rows[(y + k) * mw + x];
                for i in 0..5 {
                    m[i] += t * r[i];
                }
            }
            let (mu_a, mu_b) = (m[0], m[1]);
            let var_a = m[2] - mu_a * mu_a;
            let var_b = m[3] - mu_b * mu_b;
            let cov = m[4] - mu_a * mu_b;
            let s = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            map.push(s.clamp(-1.0, 1.0));
        }
    }
    let mean = map.iter().sum::<f64>() / map.len() as f64;
    Ok(SsimResult {
        mean,
        map_width: mw,
        map_height: mh,
        map,
    })
}

/// Mean of `(a - b)^2` over every pixel and all three channels.
pub fn mse(a: &Image, b: &Image) -> Result<f64, DiffError> {
    if !a.same_dimensions(b) {
        return Err(DiffError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .flat_map(|(p, q)| (0..3).map(move |ch| f64::from(p[ch]) - f64::from(q[ch])))
        .map(|d| d * d)
        .sum();
    Ok(sum / (3 * a.pixel_count()) as f64)
}
