use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use vmt_core::corpus::write_box_corpus;
use vmt_core::modifiers::{Modification, Operator};
use vmt_core::report::{from_json, to_csv, to_json};
use vmt_core::runner::{run_suite, RunError, RunOptions};
use vmt_core::suite::{generate_suites, Task, TestSuite};
use vmt_core::sut::{MockSut, Sut, SutOutput, Verdict};

struct Fixture {
    _dir: tempfile::TempDir,
    similar: TestSuite,
    severe: TestSuite,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let initial = write_box_corpus(dir.path().join("initial"), 5).unwrap();
    let mods = [
        Modification::of(Operator::Brightness { factor: 0.1 }),
        Modification::of(Operator::Blackout),
        Modification::of(Operator::Invert),
    ];
    let (similar, severe) = generate_suites(&initial, &mods, dir.path().join("out")).unwrap();
    Fixture {
        _dir: dir,
        similar,
        severe,
    }
}

// Records every query and answers like the mock.
#[derive(Clone, Default)]
struct Recording(Arc<Mutex<Vec<PathBuf>>>);

impl Sut for Recording {
    fn query(&mut self, image: &Path, task: Task) -> SutOutput {
        self.0.lock().unwrap().push(image.to_path_buf());
        MockSut.query(image, task)
    }
}

#[test]
fn mock_end_to_end() {
    let f = fixture();
    let opts = RunOptions::default();

    let (rows, summary) = run_suite(&f.similar, || MockSut, &opts).unwrap();
    assert_eq!((summary.total, summary.passed), (5, 5));
    assert!(rows.iter().all(|r| r.op.as_deref() == Some("brightness")));

    let (rows, summary) = run_suite(&f.severe, || MockSut, &opts).unwrap();
    assert_eq!(summary.total, 10);
    assert_eq!(summary.per_operator["blackout"].passed, 5);
    assert_eq!(summary.per_operator["invert"].passed, 0);
    assert_eq!(summary.failed, 5);
    for r in rows.iter().filter(|r| r.op.as_deref() == Some("invert")) {
        // inverted boxes are cyan/magenta/yellow: no detections, no error
        assert_eq!(r.actual, "none");
        assert_eq!(r.expected, "err");
        assert_eq!(r.verdict, Verdict::Fail);
    }
    for r in rows.iter().filter(|r| r.op.as_deref() == Some("blackout")) {
        assert_eq!(r.actual, "err(dark_frame)");
    }
}

#[test]
fn rows_carry_metrics_and_are_sorted() {
    let f = fixture();
    let opts = RunOptions {
        mse: true,
        ..RunOptions::default()
    };
    let (rows, summary) = run_suite(&f.severe, || MockSut, &opts).unwrap();
    assert!(rows.windows(2).all(|w| w[0].test_id < w[1].test_id));
    assert_eq!(summary.passed + summary.failed, summary.total);
    assert_eq!(summary.passed, rows.iter().filter(|r| r.verdict == Verdict::Pass).count());
    for r in &rows {
        let ssim = r.ssim.unwrap();
        assert!((-1.0..1.0).contains(&ssim));
        assert!(r.mse.unwrap() > 0.0);
        assert_eq!(r.sim, Some(false));
    }
}

#[test]
fn every_case_is_queried_once_whatever_the_worker_count() {
    let f = fixture();
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let rec = Recording::default();
        let opts = RunOptions {
            workers,
            ..RunOptions::default()
        };
        let (rows, summary) = run_suite(&f.severe, || rec.clone(), &opts).unwrap();
        let mut queried = rec.0.lock().unwrap().clone();
        queried.sort();
        let mut expected: Vec<PathBuf> = f.severe.cases.iter().map(|c| c.image.clone()).collect();
        expected.sort();
        assert_eq!(queried, expected);
        outputs.push((to_csv(&rows), to_json(&rows, &summary)));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn missing_images_fail_before_any_query() {
    let f = fixture();
    let mut suite = f.severe.clone();
    suite.cases[3].image = PathBuf::from("/nonexistent/x.png");
    let rec = Recording::default();
    let err = run_suite(&suite, || rec.clone(), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, RunError::MissingImage { ref case, .. } if *case == suite.cases[3].id));
    assert!(rec.0.lock().unwrap().is_empty());
}

#[test]
fn json_report_reloads() {
    let f = fixture();
    let (rows, summary) = run_suite(&f.severe, || MockSut, &RunOptions::default()).unwrap();
    let (back, back_summary) = from_json(&to_json(&rows, &summary)).unwrap();
    assert_eq!(back, rows);
    assert_eq!(back_summary.per_operator, summary.per_operator);
}

#[cfg(unix)]
#[test]
fn crashing_adapter_becomes_rows_not_an_abort() {
    use vmt_core::sut::SutAdapter;
    let f = fixture();
    let make = || SutAdapter::new(vec!["sh".into(), "-c".into(), "exit 1".into()]);
    let (rows, summary) = run_suite(&f.similar, make, &RunOptions::default()).unwrap();
    assert_eq!(summary.failed, 5);
    assert!(rows.iter().all(|r| r.actual.starts_with("err(crash:")), "{:?}", rows[0].actual);
    // a crash is an error outcome, which is what severe cases expect
    let (_, summary) = run_suite(&f.severe, make, &RunOptions::default()).unwrap();
    assert_eq!(summary.passed, 10);
}
