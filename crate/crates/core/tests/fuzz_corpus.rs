//! Replays the checked-in fuzz corpus through the parsers on stable Rust.

use std::fs;
use std::path::PathBuf;

use thermal_pulses::input::{parse_builtin, parse_grid, parse_spectrum_source, SpectrumSource, MAX_GRID_POINTS};
use thermal_pulses::spectra::Spectrum;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, String::from_utf8_lossy(&fs::read(&path).unwrap()).into_owned())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn spectrum_json_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("spectrum_json") {
        if let Ok(s) = Spectrum::from_json(&text) {
            assert_eq!(Spectrum::from_json(&s.to_json()).unwrap(), s, "{name}");
            accepted += 1;
        }
    }
    assert!(accepted >= 2);
}

#[test]
fn spectrum_source_seeds() {
    for (name, text) in seeds("spectrum_source") {
        let _ = parse_builtin(&text);
        match parse_spectrum_source(&text) {
            Ok(SpectrumSource::Builtin(b)) => {
                b.build(5, 1.0).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
            Ok(SpectrumSource::File(path)) => assert_eq!(path.to_string_lossy(), text),
            Err(_) => assert_eq!(name, "duplicate_key"),
        }
    }
}

#[test]
fn grid_seeds() {
    for (name, text) in seeds("grid") {
        match parse_grid(&text) {
            Ok(grid) => {
                assert!(!grid.is_empty() && grid.len() <= MAX_GRID_POINTS, "{name}");
                assert!(grid.iter().all(|x| x.is_finite()));
            }
            Err(_) => assert_eq!(name, "short"),
        }
    }
}
