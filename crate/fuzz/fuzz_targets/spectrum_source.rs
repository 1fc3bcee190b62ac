#![no_main]

use libfuzzer_sys::fuzz_target;
use thermal_pulses::input::{parse_builtin, parse_spectrum_source, SpectrumSource};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = parse_builtin(&text);
    if let Ok(SpectrumSource::Builtin(builtin)) = parse_spectrum_source(&text) {
        let _ = builtin.build(5, 1.0);
    }
});
