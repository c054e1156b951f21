// Golden protocol transcript: loading, fixtures and line matching.

use std::path::{Path, PathBuf};

use vmt_core::corpus::box_case;
use vmt_core::image::{save_image, Image};

pub struct Exchange {
    pub request: String,
    pub response: String,
}

pub fn transcript_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data/protocol/mock_transcript.txt")
}

/// Reads the transcript, substituting `{DIR}` with `dir`.
pub fn load(dir: &Path) -> Vec<Exchange> {
    let text = std::fs::read_to_string(transcript_path()).unwrap();
    let dir = dir.to_str().unwrap();
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
        if let Some(req) = line.strip_prefix("> ") {
            assert!(pending.is_none(), "two requests in a row: {line}");
            pending = Some(req.replace("{DIR}", dir));
        } else if let Some(resp) = line.strip_prefix("< ") {
            let request = pending.take().expect("response without request");
            out.push(Exchange {
                request,
                response: resp.to_string(),
            });
        } else {
            panic!("bad transcript line: {line}");
        }
    }
    assert!(pending.is_none());
    out
}

/// Writes the images the transcript refers to.
pub fn write_fixtures(dir: &Path) {
    for (i, name) in ["red", "green", "blue"].iter().enumerate() {
        save_image(&box_case(i).0, dir.join(format!("{name}.png"))).unwrap();
    }
    let pair = Image::from_fn(64, 64, |x, y| {
        if (40..50).contains(&x) && (4..14).contains(&y) {
            [0, 0, 255]
        } else if (2..10).contains(&x) && (40..45).contains(&y) {
            [255, 0, 0]
        } else {
            [255; 3]
        }
    });
    save_image(&pair, dir.join("pair.png")).unwrap();
    save_image(&Image::filled(64, 64, [255; 3]), dir.join("white.png")).unwrap();
    save_image(&Image::filled(64, 64, [0; 3]), dir.join("black.png")).unwrap();
    let speck = Image::from_fn(64, 64, |x, y| if x < 4 && y < 4 { [255, 0, 0] } else { [255; 3] });
    save_image(&speck, dir.join("speck.png")).unwrap();
    std::fs::write(dir.join("corrupt.png"), b"\x89PNG\r\n\x1a\ntruncated").unwrap();
}

/// Exact match, except that each `<*>` in `pattern` matches any text.
pub fn matches(pattern: &str, line: &str) -> bool {
    let parts: Vec<&str> = pattern.split("<*>").collect();
    if parts.len() == 1 {
        return pattern == line;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !line.starts_with(first) || !line[first.len()..].ends_with(last) {
        return false;
    }
    let mut rest = &line[first.len()..line.len() - last.len()];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(i) => rest = &rest[i + mid.len()..],
            None => return false,
        }
    }
    true
}

/// Compares `output` (one response per line) against the transcript.
pub fn check(exchanges: &[Exchange], output: &str) {
    let lines: Vec<&str> = output.lines().collect();
    assert_eq!(lines.len(), exchanges.len(), "one response per request:\n{output}");
    for (ex, got) in exchanges.iter().zip(lines) {
        assert!(
            matches(&ex.response, got),
            "request {}\n  expected {}\n  got      {}",
            ex.request,
            ex.response,
            got
        );
    }
}
