//! 8-bit RGB rasters, luminance planes and lossless file I/O.
//!
//! Every operator and metric in this crate works on [`Image`]. Files are read
//! from PNG (8/16-bit, gray/RGB, with or without alpha, palette) or binary PPM
//! (`P6`) and always written as 8-bit RGB PNG.

use std::fs::{self, File};
use std::io::{BufWriter, Cursor};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image: {0}")]
    CorruptImage(String),
    #[error("invalid dimensions {width}x{height} for {len} pixels")]
    InvalidDimensions { width: u32, height: u32, len: usize },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// An owned 8-bit RGB raster in row-major order.
///
/// The pixel buffer always holds exactly `width * height` triples and both
/// dimensions are nonzero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || pixels.len() != width as usize * height as usize {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// An image filled with a single color.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        Self {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<[u8; 3]> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.index(x, y);
        self.pixels[i] = rgb;
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }

    pub fn same_dimensions(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Mean of the BT.601 luminance over all pixels.
    pub fn mean_luminance(&self) -> f64 {
        let sum: f64 = self.pixels.iter().map(|&p| luma(p)).sum();
        sum / self.pixels.len() as f64
    }

    /// Raw row-major RGB bytes.
    pub fn as_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }
}

/// A single-channel real-valued plane with the dimensions of its source image.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaPlane {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f64>,
}

impl LumaPlane {
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }
}

#[inline]
pub fn luma([r, g, b]: [u8; 3]) -> f64 {
    LUMA_WEIGHTS[0] * f64::from(r) + LUMA_WEIGHTS[1] * f64::from(g) + LUMA_WEIGHTS[2] * f64::from(b)
}

/// Unrounded BT.601 luminance of every pixel.
pub fn luminance(img: &Image) -> LumaPlane {
    LumaPlane {
        width: img.width,
        height: img.height,
        values: img.pixels.iter().map(|&p| luma(p)).collect(),
    }
}

/// Reads a PNG or binary PPM (`P6`) file.
///
/// 16-bit channels are reduced with an integer division by 257. Alpha is
/// composited over black and then dropped. Grayscale expands to `R = G = B`.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => ImageError::FileNotFound(path.to_path_buf()),
        _ => ImageError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    decode_image(&bytes)
}

/// Decodes PNG or `P6` bytes; see [`load_image`].
pub fn decode_image(bytes: &[u8]) -> Result<Image, ImageError> {
    let format = if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        ImageFormat::Png
    } else if bytes.starts_with(b"P6") {
        ImageFormat::Pnm
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        return Err(ImageError::UnsupportedFormat(format!(
            "netpbm variant P{} (only binary P6 is accepted)",
            bytes[1] as char
        )));
    } else {
        return Err(ImageError::UnsupportedFormat(
            "expected PNG or binary PPM (P6)".into(),
        ));
    };
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ImageError::CorruptImage(e.to_string()))?;
    from_dynamic(decoded)
}

fn from_dynamic(img: DynamicImage) -> Result<Image, ImageError> {
    let (width, height) = (img.width(), img.height());
    let pixels: Vec<[u8; 3]> = match img {
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| p.0).collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| {
                let [r, g, b, a] = p.0;
                [over_black_8(r, a), over_black_8(g, a), over_black_8(b, a)]
            })
            .collect(),
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| [p.0[0]; 3]).collect(),
        DynamicImage::ImageLumaA8(buf) => buf
            .pixels()
            .map(|p| [over_black_8(p.0[0], p.0[1]); 3])
            .collect(),
        DynamicImage::ImageRgb16(buf) => buf.pixels().map(|p| p.0.map(narrow_16)).collect(),
        DynamicImage::ImageRgba16(buf) => buf
            .pixels()
            .map(|p| {
                let [r, g, b, a] = p.0;
                [
                    narrow_16(over_black_16(r, a)),
                    narrow_16(over_black_16(g, a)),
                    narrow_16(over_black_16(b, a)),
                ]
            })
            .collect(),
        DynamicImage::ImageLuma16(buf) => buf.pixels().map(|p| [narrow_16(p.0[0]); 3]).collect(),
        DynamicImage::ImageLumaA16(buf) => buf
            .pixels()
            .map(|p| [narrow_16(over_black_16(p.0[0], p.0[1])); 3])
            .collect(),
        other => {
            return Err(ImageError::UnsupportedFormat(format!(
                "pixel layout {:?}",
                other.color()
            )))
        }
    };
    Image::new(width, height, pixels)
}

#[inline]
fn narrow_16(v: u16) -> u8 {
    (v / 257) as u8
}

// Rounded integer compositing over black: round(c * a / max).
#[inline]
fn over_black_8(c: u8, a: u8) -> u8 {
    ((u32::from(c) * u32::from(a) + 127) / 255) as u8
}

#[inline]
fn over_black_16(c: u16, a: u16) -> u16 {
    ((u64::from(c) * u64::from(a) + 32767) / 65535) as u16
}

/// Writes `img` as an 8-bit RGB PNG, creating the parent directory if needed.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let io_err = |source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let bytes = encode_png(img)?;
    let file = File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    std::io::Write::write_all(&mut writer, &bytes).map_err(io_err)?;
    std::io::Write::flush(&mut writer).map_err(io_err)
}

/// Encodes `img` as 8-bit RGB PNG bytes.
pub fn encode_png(img: &Image) -> Result<Vec<u8>, ImageError> {
    let mut out = Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut out,
        &img.as_rgb_bytes(),
        img.width,
        img.height,
        image::ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .map_err(|e| ImageError::CorruptImage(format!("PNG encoding failed: {e}")))?;
    Ok(out.into_inner())
}
