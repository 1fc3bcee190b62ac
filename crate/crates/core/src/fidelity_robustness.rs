//! Closed-form fidelities between multimode thermal states and the sweeps
//! that compare structured spectra against their best flat approximation.
//!
//! Fidelities use the squared Uhlmann convention unless stated otherwise, so
//! the vacuum compared with a thermal state of mean `n` gives `1/(n+1)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::optimize::minimize_bounded;
use crate::spectra::{make_flat, make_gaussian, make_linear, Spectrum, GAUSSIAN_HALF_RANGE};
use crate::{Error, Result};

/// Default mode count for the sweeps; any odd count is accepted.
pub const DEFAULT_MODES: usize = 21;

/// The three `n_min` curves of the linear-slope study.
pub const SWEEP_N_MIN: [f64; 3] = [0.01, 0.1, 0.5];

/// Default Δn grid spans `[0, DEFAULT_RELATIVE_SPAN · n_min]`.
pub const DEFAULT_RELATIVE_SPAN: f64 = 3.0;
pub const DEFAULT_LINEAR_STEPS: usize = 61;

pub const OPTIMIZER_TOLERANCE: f64 = 1e-10;
pub const VERIFICATION_POINTS: usize = 10_000;
/// Slack allowed between the optimizer result and the verification grid.
pub const GRID_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityConvention {
    Squared,
    Amplitude,
}

impl FidelityConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            FidelityConvention::Squared => "squared",
            FidelityConvention::Amplitude => "amplitude",
        }
    }

    /// Converts a squared fidelity into this convention.
    pub fn from_squared(self, squared: f64) -> f64 {
        match self {
            FidelityConvention::Squared => squared,
            FidelityConvention::Amplitude => squared.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityResult {
    pub value: f64,
    pub convention: FidelityConvention,
    pub per_mode_factors: Vec<f64>,
}

impl FidelityResult {
    pub fn amplitude(&self) -> f64 {
        match self.convention {
            FidelityConvention::Squared => self.value.sqrt(),
            FidelityConvention::Amplitude => self.value,
        }
    }

    pub fn squared(&self) -> f64 {
        match self.convention {
            FidelityConvention::Squared => self.value,
            FidelityConvention::Amplitude => self.value * self.value,
        }
    }
}

fn check_occupation(n: f64) -> Result<()> {
    if n.is_finite() && n >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeOccupation(n))
    }
}

/// Squared fidelity of two single-mode thermal states,
/// `1/(√((1+n1)(1+n2)) − √(n1 n2))²`, evaluated without cancellation.
pub fn thermal_fidelity_single(n1: f64, n2: f64) -> Result<f64> {
    check_occupation(n1)?;
    check_occupation(n2)?;
    Ok(single_factor(n1, n2))
}

fn single_factor(n1: f64, n2: f64) -> f64 {
    if n1 == n2 {
        return 1.0;
    }
    let root = ((1.0 + n1) * (1.0 + n2)).sqrt() + (n1 * n2).sqrt();
    let ratio = root / (1.0 + (n1 + n2));
    (ratio * ratio).min(1.0)
}

fn log_factor(n1: f64, n2: f64) -> f64 {
    if n1 == n2 {
        return 0.0;
    }
    let root = ((1.0 + n1) * (1.0 + n2)).sqrt() + (n1 * n2).sqrt();
    2.0 * (root.ln() - (1.0 + (n1 + n2)).ln())
}

/// Fidelity of two product thermal states over the same frequency modes.
/// The quantization length plays no role.
pub fn product_fidelity(s1: &Spectrum, s2: &Spectrum) -> Result<FidelityResult> {
    if s1.n_modes() != s2.n_modes() {
        return Err(Error::ModeCountMismatch {
            expected: s1.n_modes(),
            found: s2.n_modes(),
        });
    }
    let per_mode_factors: Vec<f64> = s1
        .values()
        .iter()
        .zip(s2.values())
        .map(|(&a, &b)| single_factor(a, b))
        .collect();
    Ok(FidelityResult {
        value: per_mode_factors.iter().product(),
        convention: FidelityConvention::Squared,
        per_mode_factors,
    })
}

/// Squared fidelity between `spectrum` and the flat state with occupation
/// `n` on every mode.
pub fn flat_fidelity(spectrum: &Spectrum, n: f64) -> Result<f64> {
    check_occupation(n)?;
    Ok(spectrum.values().iter().map(|&v| log_factor(v, n)).sum::<f64>().exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatOptimum {
    pub n_star: f64,
    pub f_star: f64,
    pub iterations: usize,
    pub bracket: f64,
    /// Best value seen on the verification grid.
    pub grid_best: f64,
    /// True when the grid beat the first search and a local rerun was needed.
    pub refined: bool,
}

/// Finds the flat occupation that maximizes the fidelity with `spectrum`.
pub fn optimize_flat_n(spectrum: &Spectrum) -> Result<FlatOptimum> {
    if spectrum.is_vacuum() {
        return Err(Error::InvalidParameter(
            "cannot optimize a flat approximation of the vacuum".into(),
        ));
    }
    let values = spectrum.values();
    let objective = |n: f64| -> f64 { -values.iter().map(|&v| log_factor(v, n)).sum::<f64>() };
    let upper = spectrum.max_value();

    let first = minimize_bounded(objective, 0.0, upper, OPTIMIZER_TOLERANCE);
    let mut best_x = first.x;
    let mut best_value = first.value;
    let mut iterations = first.iterations;
    let mut bracket = first.bracket;

    let step = upper / (VERIFICATION_POINTS - 1) as f64;
    let (grid_index, grid_value) = (0..VERIFICATION_POINTS)
        .map(|i| (i, objective(i as f64 * step)))
        .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
    let grid_best = (-grid_value).exp();

    let mut refined = false;
    if grid_best > (-best_value).exp() + GRID_SLACK {
        refined = true;
        let lo = grid_index.saturating_sub(1) as f64 * step;
        let hi = ((grid_index + 1).min(VERIFICATION_POINTS - 1)) as f64 * step;
        let local = minimize_bounded(objective, lo, hi, OPTIMIZER_TOLERANCE);
        iterations += local.iterations;
        bracket = local.bracket;
        if local.value < best_value {
            best_x = local.x;
            best_value = local.value;
        }
        if grid_value < best_value {
            best_x = grid_index as f64 * step;
            best_value = grid_value;
        }
    }

    Ok(FlatOptimum {
        n_star: best_x,
        f_star: (-best_value).exp(),
        iterations,
        bracket,
        grid_best,
        refined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SweepParameters {
    Linear { n_min: f64 },
    Gaussian { omega0: f64, half_range: f64, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub n_modes: usize,
    pub parameters: SweepParameters,
    /// Δn for linear sweeps, r for Gaussian sweeps.
    pub coords: Vec<f64>,
    /// Squared fidelities.
    pub fidelity: Vec<f64>,
    /// Optimal flat occupation per point (Gaussian sweeps only).
    pub n_star: Option<Vec<f64>>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.fidelity.iter().map(|f| f.sqrt()).collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.fidelity.windows(2).all(|w| w[1] < w[0])
    }

    pub fn is_non_increasing(&self) -> bool {
        self.fidelity.windows(2).all(|w| w[1] <= w[0])
    }
}

fn validate_grid(grid: &[f64], allow_zero: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite grid value {bad}")));
    }
    let smallest = grid[0];
    if smallest < 0.0 || (!allow_zero && smallest == 0.0) {
        return Err(Error::InvalidGrid(format!("grid value {smallest} out of range")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Δn values `n_min · k · span/(steps−1)` for `k = 0..steps`.
pub fn default_delta_grid(n_min: f64) -> Vec<f64> {
    let steps = DEFAULT_LINEAR_STEPS;
    (0..steps)
        .map(|k| n_min * DEFAULT_RELATIVE_SPAN * k as f64 / (steps - 1) as f64)
        .collect()
}

/// Logarithmic r grid from 1e-3 to 10 with ten points per decade.
pub fn default_r_grid() -> Vec<f64> {
    (0..=40).map(|k| 10f64.powf(-3.0 + k as f64 / 10.0)).collect()
}

/// Compares `linear(n_min → n_min+Δn)` with `flat(n_min + Δn/2)` for every Δn.
pub fn sweep_linear(n_min: f64, delta_grid: &[f64], n_modes: usize) -> Result<SweepResult> {
    check_occupation(n_min)?;
    validate_grid(delta_grid, true)?;
    make_flat(n_modes, n_min, 1.0)?;
    let fidelity = delta_grid
        .par_iter()
        .map(|&dn| {
            let sloped = make_linear(n_modes, n_min, n_min + dn, 1.0)?;
            flat_fidelity(&sloped, n_min + 0.5 * dn)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepResult {
        n_modes,
        parameters: SweepParameters::Linear { n_min },
        coords: delta_grid.to_vec(),
        fidelity,
        n_star: None,
    })
}

pub fn sweep_gaussian(r_grid: &[f64], n_modes: usize) -> Result<SweepResult> {
    sweep_gaussian_with(r_grid, n_modes, 0.0, GAUSSIAN_HALF_RANGE)
}

/// Optimized flat-state fidelity for Gaussian spectra of amplitude `r`.
pub fn sweep_gaussian_with(
    r_grid: &[f64],
    n_modes: usize,
    omega0: f64,
    half_range: f64,
) -> Result<SweepResult> {
    validate_grid(r_grid, false)?;
    let optima = r_grid
        .par_iter()
        .map(|&r| optimize_flat_n(&make_gaussian(n_modes, r, omega0, half_range, 1.0)?))
        .collect::<Result<Vec<FlatOptimum>>>()?;
    Ok(SweepResult {
        n_modes,
        parameters: SweepParameters::Gaussian {
            omega0,
            half_range,
            tolerance: OPTIMIZER_TOLERANCE,
        },
        coords: r_grid.to_vec(),
        fidelity: optima.iter().map(|o| o.f_star).collect(),
        n_star: Some(optima.iter().map(|o| o.n_star).collect()),
    })
}
