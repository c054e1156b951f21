//! Executes a suite against a system under test and tabulates the results.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::diff::{mse, mssim, DiffError, SsimParams};
use crate::image::{load_image, ImageError};
use crate::suite::{TestCase, TestSuite};
use crate::sut::{compare_outputs, Sut, SutError, Verdict, DEFAULT_IOU_THRESHOLD};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("case `{case}`: image not found: {}", path.display())]
    MissingImage { case: String, path: PathBuf },
    #[error("case `{case}`: {source}")]
    Image {
        case: String,
        #[source]
        source: ImageError,
    },
    #[error("case `{case}`: {source}")]
    Metric {
        case: String,
        #[source]
        source: DiffError,
    },
    #[error("case `{case}`: {source}")]
    Compare {
        case: String,
        #[source]
        source: SutError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Number of concurrent workers, each with its own system-under-test
    /// instance. Zero is treated as one.
    pub workers: usize,
    pub ssim: SsimParams,
    pub iou_threshold: f64,
    /// Also compute MSE against the source image.
    pub mse: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            ssim: SsimParams::default(),
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            mse: false,
        }
    }
}

/// One executed test case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub test_id: String,
    /// `None` for initial cases.
    pub source_id: Option<String>,
    pub op: Option<String>,
    /// Operator parameters as compact JSON.
    pub params: Option<String>,
    /// Flip and affine keep the source expectation although pixels moved.
    pub geometric: bool,
    pub sim: Option<bool>,
    /// SSIM of the tested image against its source; present exactly for
    /// generated cases.
    pub ssim: Option<f64>,
    pub mse: Option<f64>,
    pub expected: String,
    pub actual: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorStats {
    pub total: usize,
    pub passed: usize,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Keyed by operator name; initial cases are counted under `initial`.
    pub per_operator: BTreeMap<String, OperatorStats>,
    /// Not serialized, so that report files stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunSummary {
    pub fn from_rows(rows: &[ReportRow], wall_time: Duration) -> Self {
        let mut per_operator: BTreeMap<String, OperatorStats> = BTreeMap::new();
        for row in rows {
            let key = row.op.clone().unwrap_or_else(|| "initial".into());
            let s = per_operator.entry(key).or_insert(OperatorStats {
                total: 0,
                passed: 0,
                pass_rate: 0.0,
            });
            s.total += 1;
            s.passed += usize::from(row.verdict == Verdict::Pass);
        }
        for s in per_operator.values_mut() {
            s.pass_rate = s.passed as f64 / s.total as f64;
        }
        let passed = rows.iter().filter(|r| r.verdict == Verdict::Pass).count();
        Self {
            total: rows.len(),
            passed,
            failed: rows.len() - passed,
            per_operator,
            wall_time,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Runs every case of `suite` once.
///
/// `make_sut` is called once per worker. Missing image files are reported
/// before any query is sent. Rows come back sorted by test id, whatever the
/// worker count.
pub fn run_suite<F, S>(
    suite: &TestSuite,
    make_sut: F,
    opts: &RunOptions,
) -> Result<(Vec<ReportRow>, RunSummary), RunError>
where
    F: Fn() -> S + Sync,
    S: Sut,
{
    let start = Instant::now();
    for case in &suite.cases {
        let mut paths = vec![&case.image];
        if let Some(p) = &case.provenance {
            paths.push(&p.source_image);
        }
        if let Some(missing) = paths.into_iter().find(|p| !p.is_file()) {
            return Err(RunError::MissingImage {
                case: case.id.clone(),
                path: missing.clone(),
            });
        }
    }

    let workers = opts.workers.max(1).min(suite.cases.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ReportRow, RunError>>>> =
        Mutex::new((0..suite.cases.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut sut = make_sut();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(case) = suite.cases.get(i) else { break };
                    let row = run_case(case, suite, &mut sut, opts);
                    results.lock().expect("no worker panicked")[i] = Some(row);
                }
            });
        }
    });

    let mut rows = results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every case was run"))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| a.test_id.cmp(&b.test_id));
    let summary = RunSummary::from_rows(&rows, start.elapsed());
    Ok((rows, summary))
}

fn run_case<S: Sut>(
    case: &TestCase,
    suite: &TestSuite,
    sut: &mut S,
    opts: &RunOptions,
) -> Result<ReportRow, RunError> {
    let actual = sut.query(&case.image, suite.task);
    let verdict = compare_outputs(&case.expected, &actual, suite.task, opts.iou_threshold)
        .map_err(|source| RunError::Compare {
            case: case.id.clone(),
            source,
        })?;

    let mut row = ReportRow {
        test_id: case.id.clone(),
        source_id: None,
        op: None,
        params: None,
        geometric: false,
        sim: None,
        ssim: None,
        mse: None,
        expected: case.expected.to_string(),
        actual: actual.to_string(),
        verdict,
    };
    if let Some(prov) = &case.provenance {
        let image_err = |source| RunError::Image {
            case: case.id.clone(),
            source,
        };
        let tested = load_image(&case.image).map_err(image_err)?;
        let source = load_image(&prov.source_image).map_err(image_err)?;
        let metric_err = |source| RunError::Metric {
            case: case.id.clone(),
            source,
        };
        let op = &prov.modification.operator;
        row.source_id = Some(prov.source_id.clone());
        row.op = Some(op.name().to_string());
        row.params = Some(serde_json::Value::Object(op.params_json()).to_string());
        row.geometric = op.is_geometric();
        row.sim = Some(prov.modification.is_similar(source.pixel_count()));
        row.ssim = Some(mssim(&source, &tested, &opts.ssim).map_err(metric_err)?.mean);
        if opts.mse {
            row.mse = Some(mse(&source, &tested).map_err(metric_err)?);
        }
    }
    Ok(row)
}
