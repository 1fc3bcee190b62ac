//! Per-frequency-mode occupation spectra.
//!
//! A [`Spectrum`] stores the mean photon numbers `n_m` of `N = 2q + 1`
//! frequency modes `m = -q..=q` in a periodic box of length `L`. Values are
//! stored at offset `m + q`. Every thermal state in the crate is a product of
//! single-mode thermal states with these means.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spectra whose values differ by less than this are treated as flat.
pub const FLAT_TOLERANCE: f64 = 1e-14;

pub(crate) fn check_mode_count(n_modes: usize) -> Result<usize> {
    if n_modes == 0 || n_modes.is_multiple_of(2) {
        return Err(Error::InvalidModeCount(n_modes));
    }
    Ok(n_modes / 2)
}

fn check_length(length: f64) -> Result<()> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidLength(length));
    }
    Ok(())
}

fn check_occupation(n: f64) -> Result<()> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::NegativeOccupation(n));
    }
    Ok(())
}

/// Mean photon numbers of a discrete set of frequency modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr", into = "SpectrumRepr")]
pub struct Spectrum {
    q: usize,
    length: f64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    q: usize,
    #[serde(rename = "L")]
    length: f64,
    values: Vec<f64>,
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;

    fn try_from(repr: SpectrumRepr) -> Result<Self> {
        let expected = repr
            .q
            .checked_mul(2)
            .and_then(|v| v.checked_add(1))
            .ok_or_else(|| Error::InvalidParameter(format!("q = {} is too large", repr.q)))?;
        if repr.values.len() != expected {
            return Err(Error::ModeCountMismatch {
                expected,
                found: repr.values.len(),
            });
        }
        Spectrum::new(repr.values, repr.length)
    }
}

impl From<Spectrum> for SpectrumRepr {
    fn from(s: Spectrum) -> Self {
        SpectrumRepr {
            q: s.q,
            length: s.length,
            values: s.values,
        }
    }
}

impl Spectrum {
    /// Builds a spectrum from values ordered `m = -q, …, q`.
    pub fn new(values: Vec<f64>, length: f64) -> Result<Self> {
        let q = check_mode_count(values.len())?;
        check_length(length)?;
        for &v in &values {
            check_occupation(v)?;
        }
        Ok(Spectrum { q, length, values })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serialization is infallible")
    }

    pub fn n_modes(&self) -> usize {
        self.values.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Quantization length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Spacing `l = L / N` between neighbouring localized pulses.
    pub fn pulse_spacing(&self) -> f64 {
        self.length / self.n_modes() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Occupation of mode `m ∈ {-q, …, q}`.
    pub fn value(&self, m: i64) -> Result<f64> {
        Ok(self.values[self.offset(m)?])
    }

    pub(crate) fn offset(&self, m: i64) -> Result<usize> {
        mode_offset(m, self.q)
    }

    /// Mode indices `-q..=q` in storage order.
    pub fn mode_indices(&self) -> impl Iterator<Item = i64> {
        let q = self.q as i64;
        -q..=q
    }

    /// Wavevector `κ_m = 2πm / L`.
    pub fn kappa(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.length
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.n_modes() as f64
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_vacuum(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Returns the common occupation if every mode agrees to [`FLAT_TOLERANCE`]
    /// relative to the largest value.
    pub fn flat_value(&self) -> Option<f64> {
        let first = self.values[0];
        let scale = self.max_value().max(f64::MIN_POSITIVE);
        self.values
            .iter()
            .all(|&v| (v - first).abs() <= FLAT_TOLERANCE * scale)
            .then_some(first)
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Spectrum::new(self.values.clone(), length)
    }
}

pub(crate) fn mode_offset(m: i64, q: usize) -> Result<usize> {
    if m.unsigned_abs() as usize > q {
        return Err(Error::IndexOutOfRange { index: m, q });
    }
    Ok((m + q as i64) as usize)
}

/// Flat spectrum: every mode holds `n` photons on average.
pub fn make_flat(n_modes: usize, n: f64, length: f64) -> Result<Spectrum> {
    check_mode_count(n_modes)?;
    check_occupation(n)?;
    Spectrum::new(vec![n; n_modes], length)
}

/// Spectrum rising linearly from `n_min` at `m = -q` to `n_max` at `m = q`.
pub fn make_linear(n_modes: usize, n_min: f64, n_max: f64, length: f64) -> Result<Spectrum> {
    check_mode_count(n_modes)?;
    check_occupation(n_min)?;
    check_occupation(n_max)?;
    if n_max < n_min {
        return Err(Error::InvalidParameter(format!(
            "n_max ({n_max}) must not be below n_min ({n_min})"
        )));
    }
    if n_modes == 1 {
        return Spectrum::new(vec![n_min], length);
    }
    let step = (n_max - n_min) / (n_modes - 1) as f64;
    let mut values: Vec<f64> = (0..n_modes).map(|k| n_min + k as f64 * step).collect();
    // pin the endpoint so rounding cannot push it past n_max
    values[n_modes - 1] = n_max;
    Spectrum::new(values, length)
}

/// Default half-width of the Gaussian frequency window.
pub const GAUSSIAN_HALF_RANGE: f64 = 4.0;

/// Gaussian spectrum `r·exp(-(ω-ω₀)²)/√π` sampled on `N` equally spaced
/// frequencies spanning `[ω₀ - half_range, ω₀ + half_range]`, endpoints
/// included.
pub fn make_gaussian(
    n_modes: usize,
    r: f64,
    omega0: f64,
    half_range: f64,
    length: f64,
) -> Result<Spectrum> {
    let q = check_mode_count(n_modes)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    if !omega0.is_finite() {
        return Err(Error::InvalidParameter(format!("omega0 must be finite, got {omega0}")));
    }
    if !(half_range.is_finite() && half_range > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half_range must be positive, got {half_range}"
        )));
    }
    let values = gaussian_offsets(q, half_range)
        .map(|d| r * (-d * d).exp() / PI.sqrt())
        .collect();
    Spectrum::new(values, length)
}

/// Frequencies `ω_m = ω₀ + (m/q)·half_range` used by [`make_gaussian`].
pub fn gaussian_frequencies(q: usize, omega0: f64, half_range: f64) -> impl Iterator<Item = f64> {
    gaussian_offsets(q, half_range).map(move |d| omega0 + d)
}

fn gaussian_offsets(q: usize, half_range: f64) -> impl Iterator<Item = f64> {
    let qi = q as i64;
    (-qi..=qi).map(move |m| if q == 0 { 0.0 } else { m as f64 / q as f64 * half_range })
}

/// Bose–Einstein spectrum over equally spaced dimensionless mode parameters
/// `θ = ħω / k_B T` from `theta_min` to `theta_max`.
pub fn make_blackbody(n_modes: usize, theta_min: f64, theta_max: f64, length: f64) -> Result<Spectrum> {
    check_mode_count(n_modes)?;
    if n_modes > 1 && theta_max.partial_cmp(&theta_min) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter(format!(
            "theta_max ({theta_max}) must exceed theta_min ({theta_min})"
        )));
    }
    let thetas: Vec<f64> = if n_modes == 1 {
        vec![theta_min]
    } else {
        let step = (theta_max - theta_min) / (n_modes - 1) as f64;
        (0..n_modes).map(|k| theta_min + k as f64 * step).collect()
    };
    make_blackbody_at(&thetas, length)
}

/// Bose–Einstein occupation `1/(e^θ - 1)` at explicit mode parameters.
pub fn make_blackbody_at(thetas: &[f64], length: f64) -> Result<Spectrum> {
    let values = thetas
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "theta must be positive, got {t}"
                )));
            }
            Ok(1.0 / t.exp_m1())
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(values, length)
}

/// Power transmissions `η_m ∈ [0, 1]` of a passive band-pass filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterProfile {
    transmissions: Vec<f64>,
}

impl FilterProfile {
    pub fn new(transmissions: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = transmissions
            .iter()
            .find(|&&t| !(0.0..=1.0).contains(&t))
        {
            return Err(Error::InvalidParameter(format!(
                "transmission {bad} outside [0, 1]"
            )));
        }
        Ok(FilterProfile { transmissions })
    }

    pub fn uniform(n_modes: usize, eta: f64) -> Result<Self> {
        FilterProfile::new(vec![eta; n_modes])
    }

    /// Filter that flattens `spectrum` down to `target`: `η_m = min(1, target/n_m)`.
    /// Modes already at or below the target pass unchanged.
    pub fn compensating(spectrum: &Spectrum, target: f64) -> Result<Self> {
        check_occupation(target)?;
        let transmissions = spectrum
            .values()
            .iter()
            .map(|&n| if n > target { target / n } else { 1.0 })
            .collect();
        FilterProfile::new(transmissions)
    }

    pub fn transmissions(&self) -> &[f64] {
        &self.transmissions
    }
}

/// Sends every frequency mode through a beam splitter of transmission `η_m`
/// with a vacuum ancilla. A thermal mode stays thermal with mean `η_m·n_m`.
pub fn apply_filter(spectrum: &Spectrum, filter: &FilterProfile) -> Result<Spectrum> {
    if filter.transmissions.len() != spectrum.n_modes() {
        return Err(Error::ModeCountMismatch {
            expected: spectrum.n_modes(),
            found: filter.transmissions.len(),
        });
    }
    let values = spectrum
        .values
        .iter()
        .zip(&filter.transmissions)
        .map(|(n, eta)| n * eta)
        .collect();
    Spectrum::new(values, spectrum.length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn flat_constructor() {
        let s = make_flat(3, 0.5, 1.0).unwrap();
        assert_eq!(s.values(), &[0.5, 0.5, 0.5]);
        let vac = make_flat(1, 0.0, 1.0).unwrap();
        assert!(vac.is_vacuum());
        assert_eq!(vac.q(), 0);
        let five = make_flat(5, 0.01, 10.0).unwrap();
        assert_eq!(five.values(), &[0.01; 5]);
        assert_eq!(five.length(), 10.0);
    }

    #[test]
    fn flat_rejects_bad_input() {
        assert!(matches!(make_flat(4, 0.1, 1.0), Err(Error::InvalidModeCount(4))));
        assert!(matches!(make_flat(0, 0.1, 1.0), Err(Error::InvalidModeCount(0))));
        assert!(matches!(make_flat(3, -0.1, 1.0), Err(Error::NegativeOccupation(_))));
        assert!(matches!(make_flat(3, 0.1, 0.0), Err(Error::InvalidLength(_))));
        assert!(make_flat(3, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn linear_constructor() {
        let s = make_linear(3, 0.1, 0.3, 1.0).unwrap();
        assert_relative_eq!(s.values()[0], 0.1);
        assert_relative_eq!(s.values()[1], 0.2);
        assert_relative_eq!(s.values()[2], 0.3);
        let degenerate = make_linear(5, 0.01, 0.01, 1.0).unwrap();
        assert_eq!(degenerate.flat_value(), Some(0.01));
        assert_eq!(make_linear(1, 0.2, 0.4, 1.0).unwrap().values(), &[0.2]);
        assert!(make_linear(3, 0.3, 0.1, 1.0).is_err());
    }

    #[test]
    fn gaussian_constructor() {
        let r = 0.7;
        let s = make_gaussian(21, r, 1.5, GAUSSIAN_HALF_RANGE, 1.0).unwrap();
        assert_relative_eq!(s.value(0).unwrap(), r / PI.sqrt(), max_relative = 1e-15);
        let edge = r * (-16.0f64).exp() / PI.sqrt();
        assert_relative_eq!(s.value(10).unwrap(), edge, max_relative = 1e-12);
        assert_relative_eq!(s.value(-10).unwrap(), edge, max_relative = 1e-12);
        let single = make_gaussian(1, r, 0.0, 4.0, 1.0).unwrap();
        assert_relative_eq!(single.values()[0], r / PI.sqrt());
        assert!(make_gaussian(3, 0.0, 0.0, 4.0, 1.0).is_err());
        assert!(make_gaussian(3, -1.0, 0.0, 4.0, 1.0).is_err());
    }

    #[test]
    fn blackbody_constructor() {
        let one = make_blackbody_at(&[2f64.ln()], 1.0).unwrap();
        assert_relative_eq!(one.values()[0], 1.0, max_relative = 1e-15);
        let s = make_blackbody_at(&[2f64.ln(), 3f64.ln(), 4f64.ln()], 1.0).unwrap();
        assert_relative_eq!(s.values()[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.values()[1], 0.5, max_relative = 1e-14);
        assert_relative_eq!(s.values()[2], 1.0 / 3.0, max_relative = 1e-14);
        let bb = make_blackbody(7, 0.5, 20.0, 1.0).unwrap();
        assert!(bb.values().windows(2).all(|w| w[1] < w[0]));
        assert!(bb.values()[6] < 1e-8);
        assert!(make_blackbody(3, 0.0, 1.0, 1.0).is_err());
        assert!(make_blackbody(3, 1.0, 1.0, 1.0).is_err());
        assert!(make_blackbody_at(&[-1.0], 1.0).is_err());
    }

    #[test]
    fn filter_cases() {
        let s = make_linear(5, 0.1, 0.5, 2.0).unwrap();
        let same = apply_filter(&s, &FilterProfile::uniform(5, 1.0).unwrap()).unwrap();
        assert_eq!(same, s);
        let dark = apply_filter(&s, &FilterProfile::uniform(5, 0.0).unwrap()).unwrap();
        assert!(dark.is_vacuum());
        assert!(matches!(
            apply_filter(&s, &FilterProfile::uniform(3, 0.5).unwrap()),
            Err(Error::ModeCountMismatch { expected: 5, found: 3 })
        ));
        assert!(FilterProfile::new(vec![1.2]).is_err());
        assert!(FilterProfile::new(vec![-0.1]).is_err());
    }

    #[test]
    fn compensation_flattens_blackbody() {
        let bb = make_blackbody(11, 0.2, 3.0, 1.0).unwrap();
        let target = 0.1;
        let filt = FilterProfile::compensating(&bb, target).unwrap();
        let out = apply_filter(&bb, &filt).unwrap();
        for (&orig, &filtered) in bb.values().iter().zip(out.values()) {
            if orig >= target {
                assert_relative_eq!(filtered, target, max_relative = 1e-14);
            } else {
                assert_eq!(filtered, orig);
            }
        }
        // every mode above target => output is exactly flat
        let hot = make_blackbody(11, 0.2, 1.0, 1.0).unwrap();
        let flat = apply_filter(&hot, &FilterProfile::compensating(&hot, target).unwrap()).unwrap();
        assert!(flat.flat_value().is_some());
    }

    #[test]
    fn json_format() {
        let s = make_linear(3, 0.1, 0.3, 2.5).unwrap();
        let text = s.to_json();
        assert!(text.contains("\"q\":1"));
        assert!(text.contains("\"L\":2.5"));
        assert_eq!(Spectrum::from_json(&text).unwrap(), s);
        assert!(Spectrum::from_json(r#"{"q":1,"L":1.0,"values":[0.1,0.2]}"#).is_err());
        assert!(Spectrum::from_json(r#"{"q":0,"L":-1.0,"values":[0.1]}"#).is_err());
        assert!(Spectrum::from_json(r#"{"q":0,"L":1.0,"values":[-0.1]}"#).is_err());
    }

    #[test]
    fn mode_lookup_bounds() {
        let s = make_flat(5, 0.2, 1.0).unwrap();
        assert!(s.value(2).is_ok());
        assert!(matches!(s.value(3), Err(Error::IndexOutOfRange { index: 3, q: 2 })));
        assert_relative_eq!(s.kappa(1), 2.0 * PI);
    }

    fn odd_modes() -> impl Strategy<Value = usize> {
        (0usize..30).prop_map(|q| 2 * q + 1)
    }

    proptest! {
        #[test]
        fn linear_is_monotone_with_exact_mean(n in odd_modes(), lo in 0.0f64..2.0, d in 0.0f64..2.0) {
            let s = make_linear(n, lo, lo + d, 1.0).unwrap();
            prop_assert!(s.values().windows(2).all(|w| w[1] >= w[0]));
            let expect = if n == 1 { lo } else { (2.0 * lo + d) / 2.0 };
            prop_assert!((s.mean() - expect).abs() <= 1e-14 * (1.0 + expect));
        }

        #[test]
        fn gaussian_is_symmetric(n in odd_modes(), r in 1e-3f64..10.0, w0 in -5.0f64..5.0, h in 0.5f64..8.0) {
            let s = make_gaussian(n, r, w0, h, 1.0).unwrap();
            let q = s.q() as i64;
            for m in 0..=q {
                let a = s.value(m).unwrap();
                let b = s.value(-m).unwrap();
                prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
            }
        }

        #[test]
        fn filter_never_increases(n in odd_modes(), lo in 0.0f64..2.0, d in 0.0f64..2.0, seed in any::<u64>()) {
            let s = make_linear(n, lo, lo + d, 1.0).unwrap();
            let etas: Vec<f64> = (0..n).map(|k| ((seed.rotate_left(k as u32) % 1001) as f64) / 1000.0).collect();
            let out = apply_filter(&s, &FilterProfile::new(etas).unwrap()).unwrap();
            for (a, b) in s.values().iter().zip(out.values()) {
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn constructors_respect_invariants(n in odd_modes(), x in 0.0f64..5.0, t in 0.01f64..5.0, len in 0.1f64..100.0) {
            let all = [
                make_flat(n, x, len).unwrap(),
                make_linear(n, x, x + t, len).unwrap(),
                make_gaussian(n, t, x, 4.0, len).unwrap(),
                make_blackbody(n, t, t + 1.0, len).unwrap(),
            ];
            for s in all {
                prop_assert_eq!(s.n_modes(), 2 * s.q() + 1);
                prop_assert!(s.values().iter().all(|v| *v >= 0.0 && v.is_finite()));
                prop_assert!(s.length() > 0.0);
            }
        }
    }
}
