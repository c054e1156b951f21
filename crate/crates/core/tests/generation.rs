use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use vmt_core::corpus::write_box_corpus;
use vmt_core::modifiers::{Axis, Modification, Operator, WeatherKind};
use vmt_core::suite::{
    generate_suites, load_suite, save_suite, ExpectedOutput, SuiteError, SuiteKind, TestSuite,
};

fn mods_3_sim_2_severe() -> Vec<Modification> {
    vec![
        Modification::of(Operator::Brightness { factor: 0.1 }),
        Modification::of(Operator::Blur { strength: 0.1 }),
        Modification::of(Operator::Weather {
            kind: WeatherKind::Rain,
            intensity: 0.3,
        })
        .with_seed(11),
        Modification::of(Operator::Invert),
        Modification::of(Operator::Blackout),
    ]
}

fn canonical(suite: &TestSuite) -> TestSuite {
    let mut s = suite.clone();
    for c in &mut s.cases {
        c.image = c.image.canonicalize().unwrap();
        if let Some(p) = &mut c.provenance {
            p.source_image = p.source_image.canonicalize().unwrap();
        }
    }
    s
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(tree(&path).into_iter().map(|(k, v)| (Path::new(path.file_name().unwrap()).join(k), v)));
        } else {
            out.insert(PathBuf::from(path.file_name().unwrap()), fs::read(&path).unwrap());
        }
    }
    out
}

#[test]
fn cardinalities_follow_the_suite_formulas() {
    let dir = tempfile::tempdir().unwrap();
    let initial = write_box_corpus(dir.path().join("initial"), 5).unwrap();
    let mods = mods_3_sim_2_severe();
    let (similar, severe) = generate_suites(&initial, &mods, dir.path().join("out")).unwrap();
    assert_eq!((similar.len(), severe.len()), (15, 10));
    assert_eq!(similar.kind, SuiteKind::Similar);
    assert_eq!(severe.kind, SuiteKind::Severe);

    let by_id: BTreeMap<&str, &ExpectedOutput> =
        initial.cases.iter().map(|c| (c.id.as_str(), &c.expected)).collect();
    for c in &similar.cases {
        let p = c.provenance.as_ref().unwrap();
        assert_eq!(&c.expected, by_id[p.source_id.as_str()]);
        assert_eq!(p.modification.sim, Some(true));
        assert!(c.image.is_file());
    }
    for c in &severe.cases {
        assert_eq!(c.expected, ExpectedOutput::Err);
        assert_eq!(c.provenance.as_ref().unwrap().modification.sim, Some(false));
    }
    let ids: HashSet<&str> = similar.cases.iter().chain(&severe.cases).map(|c| c.id.as_str()).collect();
    assert_eq!(ids.len(), 25);
    assert!(ids.contains("box3__brightness__0"));
    assert!(ids.contains("box3__weather__11"));
}

#[test]
fn explicit_sim_flags_override_the_default_table() {
    let dir = tempfile::tempdir().unwrap();
    let initial = write_box_corpus(dir.path().join("initial"), 2).unwrap();
    let mods = vec![
        Modification::of(Operator::Flip { axis: Axis::Horizontal }).with_sim(true),
        Modification::of(Operator::Brightness { factor: 0.2 }).with_sim(false),
    ];
    let (similar, severe) = generate_suites(&initial, &mods, dir.path().join("out")).unwrap();
    assert!(similar.cases.iter().all(|c| c.id.contains("flip")));
    assert!(severe.cases.iter().all(|c| c.id.contains("brightness")));
    // flip keeps the source expectation even though the box moved
    assert_eq!(similar.cases[0].expected, initial.cases[0].expected);
}

#[test]
fn all_severe_mods_leave_similar_empty() {
    let dir = tempfile::tempdir().unwrap();
    let initial = write_box_corpus(dir.path().join("initial"), 3).unwrap();
    let (similar, severe) =
        generate_suites(&initial, &[Modification::of(Operator::Blackout)], dir.path().join("out")).unwrap();
    assert!(similar.is_empty());
    assert_eq!(severe.len(), 3);
    // an empty generated suite still saves and loads
    save_suite(&similar, dir.path().join("out/similar.json")).unwrap();
    assert!(load_suite(dir.path().join("out/similar.json")).unwrap().is_empty());
}

#[test]
fn empty_modification_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let initial = write_box_corpus(dir.path().join("initial"), 1).unwrap();
    assert!(matches!(
        generate_suites(&initial, &[], dir.path().join("out")),
        Err(SuiteError::EmptyModificationList)
    ));
}

#[test]
fn manifests_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let initial = write_box_corpus(dir.path().join("initial"), 25).unwrap();
    let reloaded = load_suite(dir.path().join("initial/initial.json")).unwrap();
    assert_eq!(canonical(&reloaded), canonical(&initial));

    let (similar, severe) = generate_suites(&initial, &mods_3_sim_2_severe(), dir.path().join("out")).unwrap();
    for (suite, name) in [(&similar, "similar.json"), (&severe, "severe.json")] {
        let path = dir.path().join("out").join(name);
        save_suite(suite, &path).unwrap();
        assert_eq!(canonical(&load_suite(&path).unwrap()), canonical(suite));
    }
    // source images are referenced relative to the manifest
    let text = fs::read_to_string(dir.path().join("out/similar.json")).unwrap();
    assert!(text.contains("\"source_image\": \"../initial/images/box0.png\""), "{text}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let initial = write_box_corpus(dir.path().join("initial"), 5).unwrap();
    let mut mods = mods_3_sim_2_severe();
    mods.push(Modification::of(Operator::PixelNoise { count: 30 }).with_seed(5));
    mods.push(Modification::of(Operator::Weather { kind: WeatherKind::Shadow, intensity: 0.8 }).with_seed(6));
    for out in ["a", "b"] {
        let out_dir = dir.path().join(out);
        let (similar, severe) = generate_suites(&initial, &mods, &out_dir).unwrap();
        save_suite(&similar, out_dir.join("similar.json")).unwrap();
        save_suite(&severe, out_dir.join("severe.json")).unwrap();
    }
    let (a, b) = (tree(&dir.path().join("a")), tree(&dir.path().join("b")));
    assert_eq!(a.len(), 5 * 7 + 2);
    assert_eq!(a, b);
}
