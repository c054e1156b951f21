//! Tunable constants for the modification operators and the default
//! similarity table. Operator code reads these; nothing else hard-codes them.

/// Gaussian sigma per unit of blur strength.
pub const BLUR_SIGMA_PER_STRENGTH: f64 = 10.0;
/// Kernel radius in sigmas (`r = ceil(BLUR_RADIUS_SIGMAS * sigma)`).
pub const BLUR_RADIUS_SIGMAS: f64 = 3.0;

/// Side length of the fog value-noise lattice.
pub const FOG_LATTICE: usize = 9;

/// Snow only whitens pixels brighter than this luma.
pub const SNOW_LUMA_THRESHOLD: f64 = 140.0;
/// One snow dot per this many pixels at intensity 1.
pub const SNOW_PIXELS_PER_DOT: f64 = 200.0;
pub const SNOW_DOT_RADIUS: i64 = 1;

/// One rain streak per this many pixels at intensity 1.
pub const RAIN_PIXELS_PER_STREAK: f64 = 150.0;
/// Streak angle from vertical, degrees; negative leans left going down.
pub const RAIN_ANGLE_DEG: f64 = -20.0;
pub const RAIN_LENGTH: f64 = 10.0;
pub const RAIN_COLOR: [u8; 3] = [200, 200, 200];
pub const RAIN_ALPHA: f64 = 0.5;
/// Blur strength applied after the streaks are drawn.
pub const RAIN_BLUR_STRENGTH: f64 = 0.05;

/// Maximum additive flare at intensity 1.
pub const SUN_MAX_GAIN: f64 = 200.0;
/// Flare radius as a fraction of `min(width, height)`.
pub const SUN_RADIUS_FRACTION: f64 = 0.4;

/// Quads at intensity `i`: `1 + floor(i * SHADOW_EXTRA_QUADS)`.
pub const SHADOW_EXTRA_QUADS: f64 = 3.0;
/// Darkening at intensity 1: channels are scaled by `1 - SHADOW_DARKEN * i`.
pub const SHADOW_DARKEN: f64 = 0.5;
/// Quad half-extent range as a fraction of the image side.
pub const SHADOW_EXTENT: (f64, f64) = (0.15, 0.4);

/// Minimum `|det|` of an affine map's linear part.
pub const AFFINE_MIN_DET: f64 = 1e-9;

// Default similarity table. A modification without an explicit `sim` flag is
// classified by these limits.
pub const SIM_MAX_BRIGHTNESS: f64 = 0.5;
pub const SIM_MAX_BLUR: f64 = 0.3;
/// Fraction of pixels `pixel_noise` may blacken and still count as similar.
pub const SIM_MAX_NOISE_FRACTION: f64 = 0.01;
pub const SIM_MAX_WEATHER: f64 = 0.7;
