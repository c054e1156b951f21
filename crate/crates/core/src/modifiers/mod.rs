//! Seeded, deterministic image modification operators.
//!
//! A [`Modification`] couples an [`Operator`] (with its parameters) with a
//! seed and an optional similarity flag. [`apply`] is a pure function of the
//! modification and the input image: the same pair always yields the same
//! bytes, and the output always has the input's dimensions.
//!
//! On the wire a modification is a JSON object:
//!
//! ```json
//! {"op": "blur", "params": {"strength": 0.3}, "seed": 0, "sim": true}
//! ```
//!
//! `seed` defaults to 0 and `sim` may be omitted, in which case the default
//! similarity table in [`consts`] decides.

mod blur;
mod color;
pub mod consts;
mod geometry;
mod weather;

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::image::Image;

pub use blur::{blur, gaussian_kernel, reflect_index};
pub use color::{blackout, brightness, invert, pixel_noise};
pub use geometry::{affine_warp, flip};
pub use weather::{fog_with_mask, weather, FogMask};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModifyError {
    /// `field` is a JSON-pointer fragment relative to the modification
    /// object, e.g. `params/strength`.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParams { field: String, message: String },
    #[error("degenerate affine transform (|det| = {det:e})")]
    DegenerateTransform { det: f64 },
}

impl ModifyError {
    pub(crate) fn param(field: &str, message: impl Into<String>) -> Self {
        ModifyError::InvalidParams {
            field: format!("params/{field}"),
            message: message.into(),
        }
    }

    /// The offending field as a relative JSON pointer fragment.
    pub fn field(&self) -> &str {
        match self {
            ModifyError::InvalidParams { field, .. } => field,
            ModifyError::DegenerateTransform { .. } => "params",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeatherKind {
    Fog,
    Rain,
    Snow,
    Sun,
    Shadow,
}

impl WeatherKind {
    pub const ALL: [WeatherKind; 5] = [
        WeatherKind::Fog,
        WeatherKind::Rain,
        WeatherKind::Snow,
        WeatherKind::Sun,
        WeatherKind::Shadow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeatherKind::Fog => "fog",
            WeatherKind::Rain => "rain",
            WeatherKind::Snow => "snow",
            WeatherKind::Sun => "sun",
            WeatherKind::Shadow => "shadow",
        }
    }
}

/// The forward map `(x, y) -> (a*x + b*y + c, d*x + e*y + f)` in pixel
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl AffineParams {
    pub const IDENTITY: AffineParams = AffineParams {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        e: 1.0,
        f: 0.0,
    };

    pub fn translation(dx: f64, dy: f64) -> Self {
        AffineParams {
            c: dx,
            f: dy,
            ..Self::IDENTITY
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.e - self.b * self.d
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn validate(&self) -> Result<(), ModifyError> {
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
        ] {
            if !v.is_finite() {
                return Err(ModifyError::param(name, "must be finite"));
            }
        }
        let det = self.determinant();
        if det.abs() <= consts::AFFINE_MIN_DET {
            return Err(ModifyError::DegenerateTransform { det });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Invert,
    Flip { axis: Axis },
    Blur { strength: f64 },
    Brightness { factor: f64 },
    PixelNoise { count: u64 },
    Affine(AffineParams),
    Weather { kind: WeatherKind, intensity: f64 },
    Blackout,
}

impl Operator {
    pub const NAMES: [&'static str; 8] = [
        "invert",
        "flip",
        "blur",
        "brightness",
        "pixel_noise",
        "affine",
        "weather",
        "blackout",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Operator::Invert => "invert",
            Operator::Flip { .. } => "flip",
            Operator::Blur { .. } => "blur",
            Operator::Brightness { .. } => "brightness",
            Operator::PixelNoise { .. } => "pixel_noise",
            Operator::Affine(_) => "affine",
            Operator::Weather { .. } => "weather",
            Operator::Blackout => "blackout",
        }
    }

    /// Flip and affine move pixels around. Their generated cases keep the
    /// source's expected output unchanged, so reports mark them.
    pub fn is_geometric(&self) -> bool {
        matches!(self, Operator::Flip { .. } | Operator::Affine(_))
    }

    /// Whether the output depends on the seed.
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Operator::PixelNoise { .. } | Operator::Weather { .. })
    }

    /// Range checks that do not need the image.
    pub fn validate(&self) -> Result<(), ModifyError> {
        match *self {
            Operator::Blur { strength } => check_range("strength", strength, 0.0, 1.0),
            Operator::Brightness { factor } => check_range("factor", factor, -1.0, 1.0),
            Operator::Weather { intensity, .. } => check_range("intensity", intensity, 0.0, 1.0),
            Operator::Affine(p) => p.validate(),
            Operator::Invert | Operator::Flip { .. } | Operator::PixelNoise { .. } | Operator::Blackout => {
                Ok(())
            }
        }
    }

    /// The default similarity classification for an image of `pixel_count`
    /// pixels.
    pub fn default_sim(&self, pixel_count: usize) -> bool {
        use consts::*;
        match *self {
            Operator::Brightness { factor } => factor.abs() <= SIM_MAX_BRIGHTNESS,
            Operator::Blur { strength } => strength <= SIM_MAX_BLUR,
            Operator::PixelNoise { count } => {
                count as f64 <= SIM_MAX_NOISE_FRACTION * pixel_count as f64
            }
            Operator::Weather { intensity, .. } => intensity <= SIM_MAX_WEATHER,
            Operator::Affine(p) => p.is_identity(),
            Operator::Invert | Operator::Flip { .. } | Operator::Blackout => false,
        }
    }

    /// The `params` object of the wire form.
    pub fn params_json(&self) -> Map<String, Value> {
        let mut m = Map::new();
        match self {
            Operator::Invert | Operator::Blackout => {}
            Operator::Flip { axis } => {
                m.insert("axis".into(), serde_json::to_value(axis).unwrap());
            }
            Operator::Blur { strength } => {
                m.insert("strength".into(), (*strength).into());
            }
            Operator::Brightness { factor } => {
                m.insert("factor".into(), (*factor).into());
            }
            Operator::PixelNoise { count } => {
                m.insert("count".into(), (*count).into());
            }
            Operator::Affine(p) => {
                for (k, v) in [("a", p.a), ("b", p.b), ("c", p.c), ("d", p.d), ("e", p.e), ("f", p.f)] {
                    m.insert(k.into(), v.into());
                }
            }
            Operator::Weather { kind, intensity } => {
                m.insert("kind".into(), kind.name().into());
                m.insert("intensity".into(), (*intensity).into());
            }
        }
        m
    }

    /// Parses the `op` name and `params` object of the wire form. Unknown
    /// parameter names are rejected.
    pub fn from_json(op: &str, params: &Map<String, Value>) -> Result<Self, ModifyError> {
        let mut p = Params::new(params);
        let operator = match op {
            "invert" => Operator::Invert,
            "blackout" => Operator::Blackout,
            "flip" => Operator::Flip {
                axis: match p.string("axis")? {
                    "horizontal" => Axis::Horizontal,
                    "vertical" => Axis::Vertical,
                    other => {
                        return Err(ModifyError::param(
                            "axis",
                            format!("expected \"horizontal\" or \"vertical\", got {other:?}"),
                        ))
                    }
                },
            },
            "blur" => Operator::Blur {
                strength: p.number("strength")?,
            },
            "brightness" => Operator::Brightness {
                factor: p.number("factor")?,
            },
            "pixel_noise" => Operator::PixelNoise {
                count: p.count("count")?,
            },
            "affine" => Operator::Affine(AffineParams {
                a: p.number("a")?,
                b: p.number("b")?,
                c: p.number("c")?,
                d: p.number("d")?,
                e: p.number("e")?,
                f: p.number("f")?,
            }),
            "weather" => {
                let kind = match p.string("kind")? {
                    "fog" => WeatherKind::Fog,
                    "rain" => WeatherKind::Rain,
                    "snow" => WeatherKind::Snow,
                    "sun" => WeatherKind::Sun,
                    "shadow" => WeatherKind::Shadow,
                    other => {
                        return Err(ModifyError::param(
                            "kind",
                            format!("expected one of fog, rain, snow, sun, shadow; got {other:?}"),
                        ))
                    }
                };
                Operator::Weather {
                    kind,
                    intensity: p.number("intensity")?,
                }
            }
            other => {
                return Err(ModifyError::InvalidParams {
                    field: "op".into(),
                    message: format!("unknown operator {other:?}; expected one of {}", Self::NAMES.join(", ")),
                })
            }
        };
        p.finish()?;
        operator.validate()?;
        Ok(operator)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name(), Value::Object(self.params_json()))
    }
}

fn check_range(field: &str, v: f64, lo: f64, hi: f64) -> Result<(), ModifyError> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(ModifyError::param(field, format!("{v} is outside [{lo}, {hi}]")))
    }
}

// Tracks which keys of a params object have been consumed.
struct Params<'a> {
    map: &'a Map<String, Value>,
    seen: Vec<&'static str>,
}

impl<'a> Params<'a> {
    fn new(map: &'a Map<String, Value>) -> Self {
        Self { map, seen: Vec::new() }
    }

    fn get(&mut self, key: &'static str) -> Result<&'a Value, ModifyError> {
        self.seen.push(key);
        self.map
            .get(key)
            .ok_or_else(|| ModifyError::param(key, "missing"))
    }

    fn number(&mut self, key: &'static str) -> Result<f64, ModifyError> {
        self.get(key)?
            .as_f64()
            .ok_or_else(|| ModifyError::param(key, "expected a number"))
    }

    fn count(&mut self, key: &'static str) -> Result<u64, ModifyError> {
        self.get(key)?
            .as_u64()
            .ok_or_else(|| ModifyError::param(key, "expected a nonnegative integer"))
    }

    fn string(&mut self, key: &'static str) -> Result<&'a str, ModifyError> {
        self.get(key)?
            .as_str()
            .ok_or_else(|| ModifyError::param(key, "expected a string"))
    }

    fn finish(self) -> Result<(), ModifyError> {
        match self.map.keys().find(|k| !self.seen.contains(&k.as_str())) {
            Some(extra) => Err(ModifyError::InvalidParams {
                field: format!("params/{extra}"),
                message: "unknown parameter".into(),
            }),
            None => Ok(()),
        }
    }
}

/// An operator instance plus its seed and optional similarity flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireModification", into = "WireModification")]
pub struct Modification {
    pub operator: Operator,
    pub seed: u64,
    /// Explicit classification; `None` defers to the default table.
    pub sim: Option<bool>,
}

impl Modification {
    pub fn new(operator: Operator, seed: u64, sim: Option<bool>) -> Result<Self, ModifyError> {
        let m = Self { operator, seed, sim };
        m.validate()?;
        Ok(m)
    }

    /// Shorthand for deterministic operators with the default classification.
    pub fn of(operator: Operator) -> Self {
        Self {
            operator,
            seed: 0,
            sim: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sim(mut self, sim: bool) -> Self {
        self.sim = Some(sim);
        self
    }

    pub fn validate(&self) -> Result<(), ModifyError> {
        self.operator.validate()?;
        if matches!(self.operator, Operator::Blackout) && self.sim == Some(true) {
            return Err(ModifyError::InvalidParams {
                field: "sim".into(),
                message: "blackout is never a similarity-preserving modification".into(),
            });
        }
        Ok(())
    }

    /// Effective classification for an image with `pixel_count` pixels.
    pub fn is_similar(&self, pixel_count: usize) -> bool {
        self.sim
            .unwrap_or_else(|| self.operator.default_sim(pixel_count))
    }

    /// A copy with the classification fixed for an image of `pixel_count`
    /// pixels.
    pub fn resolved(&self, pixel_count: usize) -> Self {
        Self {
            sim: Some(self.is_similar(pixel_count)),
            ..self.clone()
        }
    }

    /// Parses the wire form from an already-decoded JSON value.
    pub fn from_json(value: &Value) -> Result<Self, ModifyError> {
        let wire: WireModification =
            serde_json::from_value(value.clone()).map_err(|e| ModifyError::InvalidParams {
                field: String::new(),
                message: e.to_string(),
            })?;
        Self::try_from(wire)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(WireModification::from(self.clone())).unwrap()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireModification {
    op: String,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sim: Option<bool>,
}

impl TryFrom<WireModification> for Modification {
    type Error = ModifyError;

    fn try_from(w: WireModification) -> Result<Self, ModifyError> {
        let operator = Operator::from_json(&w.op, &w.params)?;
        Modification::new(operator, w.seed, w.sim)
    }
}

impl From<Modification> for WireModification {
    fn from(m: Modification) -> Self {
        WireModification {
            op: m.operator.name().to_string(),
            params: m.operator.params_json(),
            seed: m.seed,
            sim: m.sim,
        }
    }
}

/// Applies `m` to `img`.
pub fn apply(m: &Modification, img: &Image) -> Result<Image, ModifyError> {
    m.validate()?;
    match m.operator {
        Operator::Invert => Ok(invert(img)),
        Operator::Flip { axis } => Ok(flip(img, axis)),
        Operator::Blur { strength } => blur(img, strength),
        Operator::Brightness { factor } => brightness(img, factor),
        Operator::PixelNoise { count } => pixel_noise(img, count, m.seed),
        Operator::Affine(p) => affine_warp(img, &p),
        Operator::Weather { kind, intensity } => weather(img, kind, intensity, m.seed),
        Operator::Blackout => Ok(blackout(img)),
    }
}
