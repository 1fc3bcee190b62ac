//! Equivalence suites that compare closed forms against the Fock oracle.
//!
//! Every suite draws its test spectra from a seeded generator, so repeated
//! runs produce identical reports. By default each oracle state uses the
//! moment-aware cutoff of [`cutoff_for_moments`] for its own spectrum; a
//! fixed cutoff can be forced through [`SuiteOptions::cutoff`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::correlations::{g1_general, g2_general};
use crate::fidelity_robustness::{product_fidelity, thermal_fidelity_single};
use crate::fock_oracle::{
    cutoff_for_moments, g1_oracle, g2_oracle, thermal_product_state, uhlmann_fidelity,
    FockConfig, DEFAULT_GUARDRAIL, MOMENT_BUDGET,
};
use crate::spectra::{make_flat, Spectrum};
use crate::weak_limit::{as_frequency_operator, expand};
use crate::Result;

pub const DEFAULT_SEED: u64 = 0x7e57_5eed;

/// Largest per-mode occupation drawn for each mode count in the g²(0) suite,
/// chosen so the default cutoff stays inside the default guardrail.
pub const BUNCHING_CAPS: [(usize, f64); 4] = [(1, 2.0), (3, 1.0), (5, 0.1), (7, 0.01)];

pub const FIDELITY_GRID: [f64; 6] = [0.0, 0.01, 0.1, 0.5, 1.0, 2.0];

pub const WEAK_OCCUPATIONS: [f64; 7] = [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub guardrail: usize,
    pub cutoff: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: DEFAULT_SEED,
            guardrail: DEFAULT_GUARDRAIL,
            cutoff: None,
        }
    }
}

impl SuiteOptions {
    pub fn with_seed(self, seed: u64) -> Self {
        SuiteOptions { seed, ..self }
    }

    /// Oracle configuration wide enough for every spectrum in `spectra`.
    pub fn config_for_all(&self, spectra: &[&Spectrum]) -> Result<FockConfig> {
        let modes = spectra[0].n_modes();
        let cutoff = self
            .cutoff
            .unwrap_or_else(|| {
                spectra
                    .iter()
                    .map(|s| cutoff_for_moments(s, MOMENT_BUDGET))
                    .max()
                    .unwrap_or(1)
            });
        FockConfig::with_guardrail(modes, cutoff, self.guardrail)
    }

    pub fn config_for(&self, spectrum: &Spectrum) -> Result<FockConfig> {
        self.config_for_all(&[spectrum])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: usize,
    max_error: f64,
}

impl Tally {
    fn record(&mut self, error: f64, tolerance: f64) {
        self.checks += 1;
        if error.is_nan() || error > tolerance {
            self.failures += 1;
        }
        if error > self.max_error || error.is_nan() {
            self.max_error = error;
        }
    }

    fn finish(self, name: &str, tolerance: f64, detail: String) -> SuiteReport {
        SuiteReport {
            name: name.to_string(),
            passed: self.failures == 0 && self.checks > 0,
            checks: self.checks,
            failures: self.failures,
            max_error: self.max_error,
            tolerance,
            detail,
        }
    }
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        (value / reference - 1.0).abs()
    }
}

pub fn random_spectrum(rng: &mut ChaCha8Rng, n_modes: usize, cap: f64) -> Result<Spectrum> {
    let values = (0..n_modes).map(|_| rng.gen_range(0.0..cap)).collect();
    Spectrum::new(values, rng.gen_range(0.5..4.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BunchingErrors {
    pub n_modes: usize,
    pub analytic: f64,
    pub oracle: f64,
}

/// Relative deviation of g²(0) from 2 for random spectra with `N ≤ 7`,
/// analytically and in the oracle.
pub fn bunching_errors(spectra: usize, options: &SuiteOptions) -> Result<Vec<BunchingErrors>> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut out = Vec::with_capacity(spectra);
    for k in 0..spectra {
        let (n_modes, cap) = BUNCHING_CAPS[k % BUNCHING_CAPS.len()];
        let s = random_spectrum(&mut rng, n_modes, cap)?;
        let g1 = g1_general(&s, 0.0);
        let analytic = relative_error(g2_general(&s, 0.0) / (g1 * g1), 2.0);

        let rho = thermal_product_state(&s, &options.config_for(&s)?)?;
        let o1 = g1_oracle(&rho, s.length(), 0.0)?;
        let o2 = g2_oracle(&rho, s.length(), 0.0)?;
        let oracle = relative_error(o2 / (o1 * o1), 2.0);
        out.push(BunchingErrors {
            n_modes,
            analytic,
            oracle,
        });
    }
    Ok(out)
}

pub fn bunching_suite(options: &SuiteOptions) -> Result<SuiteReport> {
    let mut tally = Tally::default();
    let mut worst_analytic: f64 = 0.0;
    for e in bunching_errors(50, options)? {
        worst_analytic = worst_analytic.max(e.analytic);
        tally.record(e.analytic, 1e-12);
        tally.record(e.oracle, 1e-5);
    }
    Ok(tally.finish(
        "bunching",
        1e-5,
        format!("50 spectra, N <= 7; worst analytic deviation {worst_analytic:.3e} (tolerance 1e-12)"),
    ))
}

/// Worst relative G⁽¹⁾ and G⁽²⁾ error of the oracle against the analytic
/// formulas for random three-mode spectra with occupations below 0.3.
pub fn correlation_errors(spectra: usize, points: usize, options: &SuiteOptions) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..spectra {
        let s = random_spectrum(&mut rng, 3, 0.3)?;
        let rho = thermal_product_state(&s, &options.config_for(&s)?)?;
        for _ in 0..points {
            let z = rng.gen_range(-s.length()..s.length());
            let e1 = relative_error(g1_oracle(&rho, s.length(), z)?, g1_general(&s, z));
            let e2 = relative_error(g2_oracle(&rho, s.length(), z)?, g2_general(&s, z));
            worst.0 = worst.0.max(e1);
            worst.1 = worst.1.max(e2);
        }
    }
    Ok(worst)
}

pub fn correlation_suite(options: &SuiteOptions) -> Result<SuiteReport> {
    let (e1, e2) = correlation_errors(50, 10, options)?;
    let mut tally = Tally::default();
    tally.record(e1, 1e-6);
    tally.record(e2, 1e-6);
    let cutoff = match options.cutoff {
        Some(c) => format!("cutoff {c}"),
        None => "moment-aware cutoff".to_string(),
    };
    Ok(tally.finish(
        "correlations",
        1e-6,
        format!("50 spectra x 10 points, N = 3, {cutoff}; worst G1 {e1:.3e}, worst G2 {e2:.3e}"),
    ))
}

/// Largest entrywise gap between the rotated weak expansion and the
/// two-photon block of the flat thermal state, for each `n`.
pub fn weak_block_errors(occupations: &[f64], guardrail: usize) -> Result<Vec<f64>> {
    let cfg = FockConfig::with_guardrail(3, 2, guardrail)?;
    occupations
        .iter()
        .map(|&n| {
            let rotated = as_frequency_operator(&expand(n, 3, 2)?, 2)?;
            let thermal =
                thermal_product_state(&make_flat(3, n, 1.0)?, &cfg)?.restricted_to_total(2);
            rotated.max_abs_diff(&thermal)
        })
        .collect()
}

pub fn weak_block_suite(options: &SuiteOptions) -> Result<SuiteReport> {
    let mut tally = Tally::default();
    for e in weak_block_errors(&WEAK_OCCUPATIONS, options.guardrail)? {
        tally.record(e, 1e-12);
    }
    Ok(tally.finish(
        "weak-expansion",
        1e-12,
        format!("{} occupations, three modes, order two", WEAK_OCCUPATIONS.len()),
    ))
}

/// Closed-form single-mode fidelity against the oracle on the documented grid.
pub fn single_fidelity_errors(options: &SuiteOptions) -> Result<Vec<((f64, f64), f64)>> {
    let mut out = Vec::new();
    for &a in &FIDELITY_GRID {
        for &b in &FIDELITY_GRID {
            let s1 = make_flat(1, a, 1.0)?;
            let s2 = make_flat(1, b, 1.0)?;
            let cfg = options.config_for_all(&[&s1, &s2])?;
            let oracle = uhlmann_fidelity(
                &thermal_product_state(&s1, &cfg)?,
                &thermal_product_state(&s2, &cfg)?,
            )?;
            out.push(((a, b), (oracle - thermal_fidelity_single(a, b)?).abs()));
        }
    }
    Ok(out)
}

/// Product fidelity against the three-mode oracle for random spectra with
/// occupations below 0.5.
pub fn product_fidelity_errors(cases: usize, options: &SuiteOptions) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        let s1 = random_spectrum(&mut rng, 3, 0.5)?;
        let s2 = random_spectrum(&mut rng, 3, 0.5)?;
        let cfg = options.config_for_all(&[&s1, &s2])?;
        let oracle = uhlmann_fidelity(
            &thermal_product_state(&s1, &cfg)?,
            &thermal_product_state(&s2, &cfg)?,
        )?;
        out.push((oracle - product_fidelity(&s1, &s2)?.value).abs());
    }
    Ok(out)
}

pub fn fidelity_suite(options: &SuiteOptions) -> Result<SuiteReport> {
    let mut tally = Tally::default();
    let single = single_fidelity_errors(options)?;
    let single_worst = single.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    for (_, e) in &single {
        tally.record(*e, 1e-7);
    }
    let product = product_fidelity_errors(10, options)?;
    let product_worst = product.iter().copied().fold(0.0, f64::max);
    for e in product {
        tally.record(e, 1e-6);
    }
    Ok(tally.finish(
        "fidelity",
        1e-7,
        format!(
            "single-mode grid worst {single_worst:.3e}; three-mode products worst {product_worst:.3e} (tolerance 1e-6)"
        ),
    ))
}

/// Runs every suite. A cutoff override applies to the three-mode and
/// single-mode suites; the g²(0) suite always uses the default cutoff.
pub fn run_all(options: &SuiteOptions) -> Result<Vec<SuiteReport>> {
    let seed = options.seed;
    let default_cutoff = SuiteOptions {
        cutoff: None,
        ..*options
    };
    Ok(vec![
        bunching_suite(&default_cutoff)?,
        correlation_suite(&options.with_seed(seed.wrapping_add(1)))?,
        weak_block_suite(options)?,
        fidelity_suite(&options.with_seed(seed.wrapping_add(2)))?,
    ])
}
