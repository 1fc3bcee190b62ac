//! Equal-time intensity correlation functions of thermal light.
//!
//! The field at position `z` is `a(z) = Σ_m χ_m(z) a_m`. For a product
//! thermal state the intensity `G⁽¹⁾ = ⟨a†(z)a(z)⟩ = Σ_m n_m / L` does not
//! depend on `z`, while the two-point coherence
//! `⟨a†(z)a(0)⟩ = Σ_m n_m e^{−iκ_m z}/L` feeds the pair correlation
//! `G⁽²⁾(z) = ⟨a†(z)a†(0)a(0)a(z)⟩ = [G⁽¹⁾]² + |coherence(z)|²`.
//!
//! All formulas are `L`-periodic in `z`; positions beyond `L` are accepted.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mode_basis::omega;
use crate::spectra::Spectrum;

/// Phase `κ_m z` reduced to one period before exponentiation.
fn mode_phase(m: i64, z: f64, length: f64) -> f64 {
    let t = (z / length).rem_euclid(1.0);
    2.0 * PI * (m as f64 * t).rem_euclid(1.0)
}

/// `G⁽¹⁾(z) = Σ_m n_m / L`.
pub fn g1_general(spectrum: &Spectrum, _z: f64) -> f64 {
    spectrum.total() / spectrum.length()
}

/// Two-point coherence `⟨a†(z)a(0)⟩ = Σ_m n_m e^{−iκ_m z} / L`.
pub fn coherence(spectrum: &Spectrum, z: f64) -> Complex64 {
    let len = spectrum.length();
    spectrum
        .mode_indices()
        .zip(spectrum.values())
        .map(|(m, &n)| Complex64::from_polar(n, -mode_phase(m, z, len)))
        .sum::<Complex64>()
        / len
}

/// How [`g2_general_with`] evaluates the double sum over mode pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum G2Method {
    /// `[G⁽¹⁾]² + |coherence|²`, linear in the mode count.
    #[default]
    Wick,
    /// The literal pair sum `Σ_m 2n_m²/L² + Σ_{m₁≠m₂} n₁n₂(1 + e^{i(κ₂−κ₁)z})/L²`.
    DoubleSum,
}

/// `G⁽²⁾(z)` for a general product thermal spectrum.
pub fn g2_general(spectrum: &Spectrum, z: f64) -> f64 {
    let g1 = g1_general(spectrum, z);
    g1 * g1 + coherence(spectrum, z).norm_sqr()
}

/// `G⁽²⁾(z)` by the selected method. The double sum returns an error if its
/// imaginary residue exceeds `1e-12` relative to the real part.
pub fn g2_general_with(spectrum: &Spectrum, z: f64, method: G2Method) -> Result<f64> {
    match method {
        G2Method::Wick => Ok(g2_general(spectrum, z)),
        G2Method::DoubleSum => {
            let value = g2_double_sum(spectrum, z);
            if value.im.abs() > 1e-12 * value.re.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!(
                    "pair sum left an imaginary residue {:e}",
                    value.im
                )));
            }
            Ok(value.re)
        }
    }
}

fn g2_double_sum(spectrum: &Spectrum, z: f64) -> Complex64 {
    let len = spectrum.length();
    let l2 = len * len;
    let modes: Vec<(i64, f64)> = spectrum
        .mode_indices()
        .zip(spectrum.values().iter().copied())
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for &(m1, n1) in &modes {
        for &(m2, n2) in &modes {
            if m1 == m2 {
                acc += 2.0 * n1 * n1 / l2;
            } else {
                let phase = Complex64::from_polar(1.0, mode_phase(m2 - m1, z, len));
                acc += n1 * n2 * (1.0 + phase) / l2;
            }
        }
    }
    acc
}

/// `G⁽¹⁾ = N n / L` for a flat spectrum.
pub fn g1_flat(n: f64, n_modes: usize, length: f64) -> f64 {
    n_modes as f64 * n / length
}

/// `G⁽²⁾(z) = N²n²/L² + n²(N/L) ω(z)²` for a flat spectrum, `ω = ω_0`.
pub fn g2_flat(n: f64, n_modes: usize, length: f64, z: f64) -> f64 {
    let nf = n_modes as f64;
    let w = omega(0, z, n_modes, length);
    nf * nf * n * n / (length * length) + n * n * nf / length * w * w
}

/// Single-photon contribution `n/(n+1)^{N+1} · N/L` of the weak-limit expansion.
pub fn g1_weak(n: f64, n_modes: usize, length: f64) -> f64 {
    n / (1.0 + n).powi(n_modes as i32 + 1) * n_modes as f64 / length
}

/// Two-photon contribution `n²/(n+1)^{N+2} · (N²/L² + (N/L) ω(z)²)`.
pub fn g2_weak(n: f64, n_modes: usize, length: f64, z: f64) -> f64 {
    let nf = n_modes as f64;
    let w = omega(0, z, n_modes, length);
    n * n / (1.0 + n).powi(n_modes as i32 + 2)
        * (nf * nf / (length * length) + nf / length * w * w)
}

/// Source of a correlation curve.
#[derive(Debug, Clone)]
pub enum CorrelationModel {
    General(Spectrum),
    Flat { n: f64, n_modes: usize, length: f64 },
    Weak { n: f64, n_modes: usize, length: f64 },
}

impl CorrelationModel {
    pub fn g1(&self, z: f64) -> f64 {
        match self {
            CorrelationModel::General(s) => g1_general(s, z),
            CorrelationModel::Flat { n, n_modes, length } => g1_flat(*n, *n_modes, *length),
            CorrelationModel::Weak { n, n_modes, length } => g1_weak(*n, *n_modes, *length),
        }
    }

    pub fn g2(&self, z: f64) -> f64 {
        match self {
            CorrelationModel::General(s) => g2_general(s, z),
            CorrelationModel::Flat { n, n_modes, length } => g2_flat(*n, *n_modes, *length, z),
            CorrelationModel::Weak { n, n_modes, length } => g2_weak(*n, *n_modes, *length, z),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CorrelationModel::General(_) => Ok(()),
            CorrelationModel::Flat { n, n_modes, length }
            | CorrelationModel::Weak { n, n_modes, length } => {
                crate::spectra::make_flat(*n_modes, *n, *length).map(|_| ())
            }
        }
    }
}

/// Sampled `G⁽¹⁾`, `G⁽²⁾` and `g⁽²⁾ = G⁽²⁾(z)/(G⁽¹⁾(z)G⁽¹⁾(0))`.
/// Normalized entries are NaN where the intensities vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub zs: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub g2_normalized: Vec<f64>,
}

impl CorrelationCurve {
    pub fn len(&self) -> usize {
        self.zs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zs.is_empty()
    }
}

pub fn correlation_curve(model: &CorrelationModel, zs: &[f64]) -> Result<CorrelationCurve> {
    if zs.is_empty() {
        return Err(Error::InvalidGrid("position grid is empty".into()));
    }
    if let Some(bad) = zs.iter().find(|z| !z.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite position {bad}")));
    }
    model.validate()?;
    let g1_origin = model.g1(0.0);
    let rows: Vec<(f64, f64, f64)> = zs
        .par_iter()
        .map(|&z| {
            let g1 = model.g1(z);
            let g2 = model.g2(z);
            let denom = g1 * g1_origin;
            let norm = if denom > 0.0 { g2 / denom } else { f64::NAN };
            (g1, g2, norm)
        })
        .collect();
    Ok(CorrelationCurve {
        zs: zs.to_vec(),
        g1: rows.iter().map(|r| r.0).collect(),
        g2: rows.iter().map(|r| r.1).collect(),
        g2_normalized: rows.iter().map(|r| r.2).collect(),
    })
}
