use crate::image::Image;

use super::{AffineParams, Axis, ModifyError};

/// Mirrors the image about its vertical (`Horizontal`) or horizontal
/// (`Vertical`) center line.
pub fn flip(img: &Image, axis: Axis) -> Image {
    let (w, h) = (img.width(), img.height());
    Image::from_fn(w, h, |x, y| match axis {
        Axis::Horizontal => img.get(w - 1 - x, y),
        Axis::Vertical => img.get(x, h - 1 - y),
    })
}

/// Warps `img` by the forward map in `params`.
///
/// Each output pixel is pulled from the inverse-mapped source position with
/// bilinear interpolation. Positions outside `[0, w-1] x [0, h-1]` are black.
pub fn affine_warp(img: &Image, params: &AffineParams) -> Result<Image, ModifyError> {
    params.validate()?;
    if params.is_identity() {
        return Ok(img.clone());
    }
    let det = params.determinant();
    // inverse of the linear part
    let (ia, ib, id, ie) = (params.e / det, -params.b / det, -params.d / det, params.a / det);
    let (w, h) = (img.width(), img.height());
    let (max_x, max_y) = (f64::from(w - 1), f64::from(h - 1));

    Ok(Image::from_fn(w, h, |x, y| {
        let (tx, ty) = (f64::from(x) - params.c, f64::from(y) - params.f);
        let sx = ia * tx + ib * ty;
        let sy = id * tx + ie * ty;
        if !(0.0..=max_x).contains(&sx) || !(0.0..=max_y).contains(&sy) {
            return [0, 0, 0];
        }
        bilinear(img, sx, sy)
    }))
}

fn bilinear(img: &Image, sx: f64, sy: f64) -> [u8; 3] {
    let x0 = sx.floor();
    let y0 = sy.floor();
    let (fx, fy) = (sx - x0, sy - y0);
    let (x0, y0) = (x0 as u32, y0 as u32);
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let (p00, p10, p01, p11) = (img.get(x0, y0), img.get(x1, y0), img.get(x0, y1), img.get(x1, y1));
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let v = (1.0 - fx) * (1.0 - fy) * f64::from(p00[ch])
            + fx * (1.0 - fy) * f64::from(p10[ch])
            + (1.0 - fx) * fy * f64::from(p01[ch])
            + fx * fy * f64::from(p11[ch]);
        out[ch] = super::color::clamp_round(v);
    }
    out
}
