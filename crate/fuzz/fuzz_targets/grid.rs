#![no_main]

use libfuzzer_sys::fuzz_target;
use thermal_pulses::input::{parse_grid, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(grid) = parse_grid(&text) {
        assert!(!grid.is_empty() && grid.len() <= MAX_GRID_POINTS);
        assert!(grid.iter().all(|x| x.is_finite()));
    }
});
