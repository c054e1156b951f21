use crate::image::Image;
use crate::rng::SeededRng;

use super::ModifyError;

/// `c -> 255 - c` on every channel.
pub fn invert(img: &Image) -> Image {
    map_channels(img, |c| 255 - c)
}

/// Scales every channel by `1 + factor`, rounding and clamping to `[0, 255]`.
/// Negative factors darken, positive ones brighten.
pub fn brightness(img: &Image, factor: f64) -> Result<Image, ModifyError> {
    if !(factor.is_finite() && (-1.0..=1.0).contains(&factor)) {
        return Err(ModifyError::param("factor", format!("{factor} is outside [-1, 1]")));
    }
    if factor == 0.0 {
        return Ok(img.clone());
    }
    let gain = 1.0 + factor;
    Ok(map_channels(img, |c| clamp_round(f64::from(c) * gain)))
}

/// Sets exactly `count` distinct, seeded pixel positions to black.
pub fn pixel_noise(img: &Image, count: u64, seed: u64) -> Result<Image, ModifyError> {
    let n = img.pixel_count();
    if count > n as u64 {
        return Err(ModifyError::param(
            "count",
            format!("{count} exceeds the image's {n} pixels"),
        ));
    }
    let mut out = img.clone();
    let mut rng = SeededRng::new(seed);
    for i in rng.sample_distinct(n, count as usize) {
        out.pixels_mut()[i] = [0, 0, 0];
    }
    Ok(out)
}

/// An all-black image of the same size, as seen through a camera whose
/// light source has failed.
pub fn blackout(img: &Image) -> Image {
    Image::filled(img.width(), img.height(), [0, 0, 0])
}

pub(crate) fn map_channels(img: &Image, f: impl Fn(u8) -> u8) -> Image {
    let mut out = img.clone();
    for px in out.pixels_mut() {
        *px = px.map(&f);
    }
    out
}

#[inline]
pub(crate) fn clamp_round(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_single_pixel() {
        let img = Image::new(1, 1, vec![[0, 128, 255]]).unwrap();
        assert_eq!(invert(&img).pixels(), &[[255, 127, 0]]);
    }

    #[test]
    fn invert_mean_luminance() {
        let img = crate::rng::random_image(17, 9, 4);
        let diff = invert(&img).mean_luminance() - (255.0 - img.mean_luminance());
        assert!(diff.abs() < 1e-9, "{diff}");
    }

    #[test]
    fn brightness_examples() {
        let img = Image::new(2, 1, vec![[100, 100, 100], [200, 200, 200]]).unwrap();
        assert_eq!(brightness(&img, -0.5).unwrap().pixels()[0], [50; 3]);
        assert_eq!(brightness(&img, 0.5).unwrap().pixels()[1], [255; 3]);
        assert_eq!(brightness(&img, 0.0).unwrap(), img);
        assert!(brightness(&img, 1.5).is_err());
        assert!(brightness(&img, f64::NAN).is_err());
    }

    #[test]
    fn pixel_noise_counts() {
        let white = Image::filled(16, 16, [255; 3]);
        let out = pixel_noise(&white, 10, 3).unwrap();
        let black = out.pixels().iter().filter(|p| **p == [0, 0, 0]).count();
        let untouched = out.pixels().iter().filter(|p| **p == [255; 3]).count();
        assert_eq!((black, untouched), (10, 246));

        assert_eq!(pixel_noise(&white, 0, 3).unwrap(), white);
        assert_eq!(pixel_noise(&white, 256, 3).unwrap(), blackout(&white));
        assert!(pixel_noise(&white, 257, 3).is_err());
    }
}
