#![no_main]

use libfuzzer_sys::fuzz_target;
use thermal_pulses::spectra::Spectrum;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spectrum) = Spectrum::from_json(text) {
        let back = Spectrum::from_json(&spectrum.to_json()).expect("serialized spectrum parses");
        assert_eq!(back, spectrum);
    }
});
