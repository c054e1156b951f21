//! Test cases, suites, their JSON manifests, and metamorphic suite
//! generation.
//!
//! Given an initial suite of `(image, expected)` pairs and a list of
//! modifications, [`generate_suites`] produces two suites:
//!
//! * **similar**: `(m(I), x)` for every case `(I, x)` and every modification
//!   `m` classified as similarity-preserving, and
//! * **severe**: `(m(I), err)` for every case and every other modification.
//!
//! # Manifest format
//!
//! ```json
//! {
//!   "schema": 1,
//!   "kind": "initial" | "similar" | "severe",
//!   "task": "classification" | "detection",
//!   "cases": [
//!     {
//!       "id": "cat-1",
//!       "image": "images/cat-1.png",
//!       "expected": {"type": "classification", "label": "cat"},
//!       "provenance": {
//!         "source_id": "...",
//!         "source_image": "...",
//!         "modification": {"op": "...", "params": {}, "seed": 0, "sim": true}
//!       }
//!     }
//!   ]
//! }
//! ```
//!
//! `expected` is one of `{"type": "classification", "label": s}`,
//! `{"type": "detections", "boxes": [{"label": s, "bbox": [x, y, w, h]}]}` or
//! `{"type": "err"}`. Relative paths resolve against the manifest's
//! directory. `provenance` is present exactly on generated cases.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bbox::BBox;
use crate::image::{load_image, save_image, ImageError};
use crate::modifiers::{apply, Modification, ModifyError};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("schema violation at `{pointer}`: {message}")]
    SchemaViolation { pointer: String, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("modification list is empty")]
    EmptyModificationList,
    #[error("modification #{index}: {source}")]
    InvalidModification {
        index: usize,
        #[source]
        source: ModifyError,
    },
    #[error("suite generation needs an initial suite, got a {0} suite")]
    NotInitial(SuiteKind),
    #[error("case `{case}`: {source}")]
    Image {
        case: String,
        #[source]
        source: ImageError,
    },
    #[error("case `{case}`: {source}")]
    Modify {
        case: String,
        #[source]
        source: ModifyError,
    },
    #[error("generated case id `{0}` is not unique")]
    DuplicateGeneratedId(String),
}

impl SuiteError {
    fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        SuiteError::SchemaViolation {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Detection,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Detection => "detection",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Initial,
    Similar,
    Severe,
}

impl SuiteKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteKind::Initial => "initial",
            SuiteKind::Similar => "similar",
            SuiteKind::Severe => "severe",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedBox {
    pub label: String,
    pub bbox: BBox,
}

/// What a test case expects the system under test to answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ExpectedOutput {
    Classification { label: String },
    Detections { boxes: Vec<ExpectedBox> },
    /// The system must signal a problem (error message or crash).
    Err,
}

impl ExpectedOutput {
    pub fn is_err(&self) -> bool {
        matches!(self, ExpectedOutput::Err)
    }

    /// Whether this expectation can appear in a suite for `task`.
    pub fn fits(&self, task: Task) -> bool {
        matches!(
            (self, task),
            (ExpectedOutput::Err, _)
                | (ExpectedOutput::Classification { .. }, Task::Classification)
                | (ExpectedOutput::Detections { .. }, Task::Detection)
        )
    }
}

impl fmt::Display for ExpectedOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectedOutput::Classification { label } => f.write_str(label),
            ExpectedOutput::Detections { boxes } if boxes.is_empty() => f.write_str("none"),
            ExpectedOutput::Detections { boxes } => {
                for (i, b) in boxes.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}@{}", b.label, b.bbox)?;
                }
                Ok(())
            }
            ExpectedOutput::Err => f.write_str("err"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source_id: String,
    pub source_image: PathBuf,
    pub modification: Modification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub id: String,
    pub image: PathBuf,
    pub expected: ExpectedOutput,
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSuite {
    pub kind: SuiteKind,
    pub task: Task,
    pub cases: Vec<TestCase>,
}

impl TestSuite {
    pub fn new(kind: SuiteKind, task: Task, cases: Vec<TestCase>) -> Self {
        Self { kind, task, cases }
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// Checks the structural invariants, reporting the first violation with
    /// a JSON pointer into the manifest form.
    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.kind == SuiteKind::Initial && self.cases.is_empty() {
            return Err(SuiteError::schema("/cases", "an initial suite must not be empty"));
        }
        let mut ids = HashSet::new();
        for (i, case) in self.cases.iter().enumerate() {
            let at = |field: &str| format!("/cases/{i}/{field}");
            if case.id.is_empty() {
                return Err(SuiteError::schema(at("id"), "id must not be empty"));
            }
            if !ids.insert(case.id.as_str()) {
                return Err(SuiteError::schema(at("id"), format!("duplicate id `{}`", case.id)));
            }
            if !case.expected.fits(self.task) {
                return Err(SuiteError::schema(
                    at("expected/type"),
                    format!("expectation does not fit a {} suite", self.task),
                ));
            }
            if let ExpectedOutput::Detections { boxes } = &case.expected {
                if let Some(j) = boxes.iter().position(|b| !b.bbox.is_valid()) {
                    return Err(SuiteError::schema(
                        at(&format!("expected/boxes/{j}/bbox")),
                        "bbox needs x, y >= 0 and w, h > 0",
                    ));
                }
            }
            match self.kind {
                SuiteKind::Severe if !case.expected.is_err() => {
                    return Err(SuiteError::schema(at("expected"), "severe cases must expect err"))
                }
                SuiteKind::Similar | SuiteKind::Initial if case.expected.is_err() => {
                    return Err(SuiteError::schema(
                        at("expected"),
                        format!("{} cases cannot expect err", self.kind),
                    ))
                }
                _ => {}
            }
            match (self.kind, &case.provenance) {
                (SuiteKind::Initial, Some(_)) => {
                    return Err(SuiteError::schema(
                        at("provenance"),
                        "initial cases carry no provenance",
                    ))
                }
                (SuiteKind::Similar | SuiteKind::Severe, None) => {
                    return Err(SuiteError::schema(
                        at("provenance"),
                        "generated cases need provenance",
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Reads and validates a suite manifest. Relative image paths are resolved
/// against the manifest's directory.
pub fn load_suite(path: impl AsRef<Path>) -> Result<TestSuite, SuiteError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_suite(&text, base)
}

/// Parses manifest text, resolving relative paths against `base`.
pub fn parse_suite(text: &str, base: &Path) -> Result<TestSuite, SuiteError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| SuiteError::schema("", format!("invalid JSON: {e}")))?;
    let obj = as_object(&root, "")?;
    check_keys(obj, "", &["schema", "kind", "task", "cases"])?;

    match obj.get("schema").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(SuiteError::schema("/schema", format!("unsupported schema version {v}"))),
        None => return Err(SuiteError::schema("/schema", "expected schema version 1")),
    }
    let kind = match get_str(obj, "", "kind")? {
        "initial" => SuiteKind::Initial,
        "similar" => SuiteKind::Similar,
        "severe" => SuiteKind::Severe,
        other => return Err(SuiteError::schema("/kind", format!("unknown suite kind {other:?}"))),
    };
    let task = match get_str(obj, "", "task")? {
        "classification" => Task::Classification,
        "detection" => Task::Detection,
        other => return Err(SuiteError::schema("/task", format!("unknown task {other:?}"))),
    };
    let cases = obj
        .get("cases")
        .and_then(Value::as_array)
        .ok_or_else(|| SuiteError::schema("/cases", "expected an array"))?;
    let cases = cases
        .iter()
        .enumerate()
        .map(|(i, v)| parse_case(v, &format!("/cases/{i}"), base))
        .collect::<Result<Vec<_>, _>>()?;

    let suite = TestSuite { kind, task, cases };
    suite.validate()?;
    Ok(suite)
}

fn parse_case(v: &Value, at: &str, base: &Path) -> Result<TestCase, SuiteError> {
    let obj = as_object(v, at)?;
    check_keys(obj, at, &["id", "image", "expected", "provenance"])?;
    let id = get_str(obj, at, "id")?.to_string();
    let image = resolve(base, get_str(obj, at, "image")?);
    let expected = parse_expected(
        obj.get("expected")
            .ok_or_else(|| SuiteError::schema(format!("{at}/expected"), "missing"))?,
        &format!("{at}/expected"),
    )?;
    let provenance = match obj.get("provenance") {
        None | Some(Value::Null) => None,
        Some(p) => {
            let pat = format!("{at}/provenance");
            let pobj = as_object(p, &pat)?;
            check_keys(pobj, &pat, &["source_id", "source_image", "modification"])?;
            let mat = format!("{pat}/modification");
            let modification = Modification::from_json(
                pobj.get("modification")
                    .ok_or_else(|| SuiteError::schema(&mat, "missing"))?,
            )
            .map_err(|e| modify_schema_error(&mat, e))?;
            Some(Provenance {
                source_id: get_str(pobj, &pat, "source_id")?.to_string(),
                source_image: resolve(base, get_str(pobj, &pat, "source_image")?),
                modification,
            })
        }
    };
    Ok(TestCase {
        id,
        image,
        expected,
        provenance,
    })
}

fn parse_expected(v: &Value, at: &str) -> Result<ExpectedOutput, SuiteError> {
    let obj = as_object(v, at)?;
    match get_str(obj, at, "type")? {
        "classification" => {
            check_keys(obj, at, &["type", "label"])?;
            Ok(ExpectedOutput::Classification {
                label: get_str(obj, at, "label")?.to_string(),
            })
        }
        "detections" => {
            check_keys(obj, at, &["type", "boxes"])?;
            let boxes = obj
                .get("boxes")
                .and_then(Value::as_array)
                .ok_or_else(|| SuiteError::schema(format!("{at}/boxes"), "expected an array"))?;
            let boxes = boxes
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let bat = format!("{at}/boxes/{j}");
                    let bobj = as_object(b, &bat)?;
                    check_keys(bobj, &bat, &["label", "bbox"])?;
                    let label = get_str(bobj, &bat, "label")?.to_string();
                    let bbox = parse_bbox(bobj.get("bbox"), &format!("{bat}/bbox"))?;
                    Ok(ExpectedBox { label, bbox })
                })
                .collect::<Result<Vec<_>, SuiteError>>()?;
            Ok(ExpectedOutput::Detections { boxes })
        }
        "err" => {
            check_keys(obj, at, &["type"])?;
            Ok(ExpectedOutput::Err)
        }
        other => Err(SuiteError::schema(
            format!("{at}/type"),
            format!("expected classification, detections or err; got {other:?}"),
        )),
    }
}

fn parse_bbox(v: Option<&Value>, at: &str) -> Result<BBox, SuiteError> {
    let nums: Option<Vec<f64>> = v
        .and_then(Value::as_array)
        .map(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .unwrap_or(None);
    match nums.as_deref() {
        Some(&[x, y, w, h]) => {
            let b = BBox::new(x, y, w, h);
            if b.is_valid() {
                Ok(b)
            } else {
                Err(SuiteError::schema(at, "bbox needs x, y >= 0 and w, h > 0"))
            }
        }
        _ => Err(SuiteError::schema(at, "expected [x, y, w, h]")),
    }
}

fn modify_schema_error(at: &str, e: ModifyError) -> SuiteError {
    let field = e.field();
    let pointer = if field.is_empty() {
        at.to_string()
    } else {
        format!("{at}/{field}")
    };
    SuiteError::schema(pointer, e.to_string())
}

fn as_object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, SuiteError> {
    v.as_object()
        .ok_or_else(|| SuiteError::schema(at, "expected an object"))
}

fn get_str<'a>(obj: &'a Map<String, Value>, at: &str, key: &str) -> Result<&'a str, SuiteError> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(SuiteError::schema(format!("{at}/{key}"), "expected a string")),
        None => Err(SuiteError::schema(format!("{at}/{key}"), "missing")),
    }
}

fn check_keys(obj: &Map<String, Value>, at: &str, allowed: &[&str]) -> Result<(), SuiteError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(SuiteError::schema(format!("{at}/{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

// `p` relative to `base` (possibly through `..`), so that a manifest and
// its images can move together. Falls back to `p` as given.
fn relativize(base: &Path, p: &Path) -> String {
    let base = if base.as_os_str().is_empty() { Path::new(".") } else { base };
    let full = |q: &Path| q.canonicalize().or_else(|_| std::path::absolute(q));
    match (full(base), full(p)) {
        (Ok(b), Ok(q)) => pathdiff::diff_paths(&q, &b).unwrap_or_else(|| p.to_path_buf()),
        _ => p.to_path_buf(),
    }
    .to_string_lossy()
    .into_owned()
}

#[derive(Serialize)]
struct ManifestOut<'a> {
    schema: u64,
    kind: SuiteKind,
    task: Task,
    cases: Vec<CaseOut<'a>>,
}

#[derive(Serialize)]
struct CaseOut<'a> {
    id: &'a str,
    image: String,
    expected: &'a ExpectedOutput,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<ProvenanceOut<'a>>,
}

#[derive(Serialize)]
struct ProvenanceOut<'a> {
    source_id: &'a str,
    source_image: String,
    modification: Value,
}

/// Renders the manifest text with paths under `base` written relative to it.
pub fn suite_to_json(suite: &TestSuite, base: &Path) -> String {
    let out = ManifestOut {
        schema: SCHEMA_VERSION,
        kind: suite.kind,
        task: suite.task,
        cases: suite
            .cases
            .iter()
            .map(|c| CaseOut {
                id: &c.id,
                image: relativize(base, &c.image),
                expected: &c.expected,
                provenance: c.provenance.as_ref().map(|p| ProvenanceOut {
                    source_id: &p.source_id,
                    source_image: relativize(base, &p.source_image),
                    modification: p.modification.to_json(),
                }),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("manifest serializes");
    text.push('\n');
    text
}

/// Writes `suite` as a manifest at `path`.
pub fn save_suite(suite: &TestSuite, path: impl AsRef<Path>) -> Result<(), SuiteError> {
    let path = path.as_ref();
    let io = |source| SuiteError::Io {
        path: path.to_path_buf(),
        source,
    };
    let base = path.parent().unwrap_or(Path::new(""));
    if !base.as_os_str().is_empty() {
        fs::create_dir_all(base).map_err(io)?;
    }
    fs::write(path, suite_to_json(suite, base)).map_err(io)
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Output file stem for each modification: `{op}__{seed}`, plus `__m{index}`
/// when several modifications share an operator and seed.
fn modification_stems(mods: &[Modification]) -> Vec<String> {
    let mut counts: HashMap<(&str, u64), usize> = HashMap::new();
    for m in mods {
        *counts.entry((m.operator.name(), m.seed)).or_default() += 1;
    }
    mods.iter()
        .enumerate()
        .map(|(j, m)| {
            let stem = format!("{}__{}", m.operator.name(), m.seed);
            if counts[&(m.operator.name(), m.seed)] > 1 {
                format!("{stem}__m{j}")
            } else {
                stem
            }
        })
        .collect()
}

/// Derives the similar and severe suites from `initial`.
///
/// Every modified image is written to `out_dir` as
/// `{source_id}__{op}__{seed}.png`; the case id is the file stem. Case order
/// is initial order, then modification order. Either result may be empty
/// (for example when every modification is severe).
pub fn generate_suites(
    initial: &TestSuite,
    mods: &[Modification],
    out_dir: impl AsRef<Path>,
) -> Result<(TestSuite, TestSuite), SuiteError> {
    if initial.kind != SuiteKind::Initial {
        return Err(SuiteError::NotInitial(initial.kind));
    }
    initial.validate()?;
    if mods.is_empty() {
        return Err(SuiteError::EmptyModificationList);
    }
    for (index, m) in mods.iter().enumerate() {
        m.validate()
            .map_err(|source| SuiteError::InvalidModification { index, source })?;
    }
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|source| SuiteError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let out_dir = out_dir.canonicalize().map_err(|source| SuiteError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let stems = modification_stems(mods);
    let mut similar = Vec::new();
    let mut severe = Vec::new();
    let mut ids = HashSet::new();
    for case in &initial.cases {
        let source = load_image(&case.image).map_err(|source| SuiteError::Image {
            case: case.id.clone(),
            source,
        })?;
        for (m, stem) in mods.iter().zip(&stems) {
            let id = format!("{}__{stem}", sanitize(&case.id));
            if !ids.insert(id.clone()) {
                return Err(SuiteError::DuplicateGeneratedId(id));
            }
            let modified = apply(m, &source).map_err(|source| SuiteError::Modify {
                case: case.id.clone(),
                source,
            })?;
            let image = out_dir.join(format!("{id}.png"));
            save_image(&modified, &image).map_err(|source| SuiteError::Image {
                case: case.id.clone(),
                source,
            })?;
            let resolved = m.resolved(source.pixel_count());
            let is_similar = resolved.sim == Some(true);
            let generated = TestCase {
                id,
                image,
                expected: if is_similar {
                    case.expected.clone()
                } else {
                    ExpectedOutput::Err
                },
                provenance: Some(Provenance {
                    source_id: case.id.clone(),
                    source_image: case.image.clone(),
                    modification: resolved,
                }),
            };
            if is_similar {
                similar.push(generated);
            } else {
                severe.push(generated);
            }
        }
    }
    Ok((
        TestSuite::new(SuiteKind::Similar, initial.task, similar),
        TestSuite::new(SuiteKind::Severe, initial.task, severe),
    ))
}

/// Parses a JSON array of modifications, reporting errors as JSON pointers.
pub fn parse_modifications(text: &str) -> Result<Vec<Modification>, SuiteError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| SuiteError::schema("", format!("invalid JSON: {e}")))?;
    let items = root
        .as_array()
        .ok_or_else(|| SuiteError::schema("", "expected an array of modifications"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| Modification::from_json(v).map_err(|e| modify_schema_error(&format!("/{i}"), e)))
        .collect()
}

pub fn load_modifications(path: impl AsRef<Path>) -> Result<Vec<Modification>, SuiteError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_modifications(&text)
}
