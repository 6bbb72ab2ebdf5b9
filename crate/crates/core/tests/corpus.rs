//! Replays the checked-in fuzz corpus through the parsers with the same
//! properties the fuzz targets assert.

use std::path::PathBuf;

use etaspec::io::{format_matrix, parse_config, parse_config_with, parse_matrix, parse_override};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("config_parse") {
        if let Ok(cfg) = parse_config(&text) {
            accepted += 1;
            let _ = cfg.resolved_tolerances();
            assert!(!cfg.resolved_thresholds().is_empty(), "{}", path.display());
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn matrix_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("matrix_file_parse") {
        if let Ok(m) = parse_matrix(&text) {
            accepted += 1;
            assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m, "{}", path.display());
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn override_seeds() {
    for (_, text) in seeds("override_parse") {
        let specs: Vec<String> = text.lines().map(str::to_string).collect();
        for s in &specs {
            let _ = parse_override(s);
        }
        let _ = parse_config_with("", &specs);
    }
}
