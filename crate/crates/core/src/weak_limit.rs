//! Weak-source expansion of flat-spectrum thermal light over localized pulses.
//!
//! With `n_m = n` for every mode the localized pulses are independent thermal
//! modes, so the state is the diagonal mixture
//! `(1+n)^{−N} Σ_occ ε^{|occ|} |occ⟩⟨occ|`, `ε = n/(1+n)`, over localized
//! occupation vectors. Truncating at total photon number `max_order` keeps the
//! vacuum, the uniform single-pulse mixture at order `ε`, and so on.

use crate::error::{Error, Result};
use crate::fock_oracle::{
    diagonal_state, localized_to_frequency_map, transform_modes, DensityOperator, FockConfig,
};
use crate::mode_basis::omega;

/// Default truncation order; the lowest that carries two-photon correlations.
pub const DEFAULT_MAX_ORDER: usize = 2;

/// Largest number of terms [`expand`] will enumerate.
pub const MAX_TERMS: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct WeakTerm {
    /// Photons per localized pulse, pulse `s` at offset `s + q`.
    pub occupation: Vec<usize>,
    pub weight: f64,
}

impl WeakTerm {
    pub fn photons(&self) -> usize {
        self.occupation.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakExpansion {
    n_modes: usize,
    n: f64,
    epsilon: f64,
    prefactor: f64,
    max_order: usize,
    terms: Vec<WeakTerm>,
}

impl WeakExpansion {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.n
    }

    /// `ε = n/(1+n)`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(1+n)^{−N}`.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Terms ordered by total photon number, lexicographically within a shell.
    pub fn terms(&self) -> &[WeakTerm] {
        &self.terms
    }

    pub fn shell(&self, photons: usize) -> impl Iterator<Item = &WeakTerm> {
        self.terms.iter().filter(move |t| t.photons() == photons)
    }

    /// `ε·N`; the expansion is useful while this stays small.
    pub fn epsilon_times_modes(&self) -> f64 {
        self.epsilon * self.n_modes as f64
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of occupation vectors over `modes` pulses with total `≤ max_order`.
pub fn term_count(modes: usize, max_order: usize) -> u128 {
    (0..=max_order as u128)
        .map(|k| binomial(modes as u128 + k - 1, k))
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// Occupation vectors of `modes` pulses holding exactly `total` photons,
/// in ascending lexicographic order.
fn shell_occupations(modes: usize, total: usize) -> Vec<Vec<usize>> {
    fn fill(prefix: &mut Vec<usize>, remaining_modes: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if remaining_modes == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=left {
            prefix.push(first);
            fill(prefix, remaining_modes - 1, left - first, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(&mut Vec::with_capacity(modes), modes, total, &mut out);
    out
}

/// Expands the flat-spectrum product state to total photon number `max_order`.
pub fn expand(n: f64, n_modes: usize, max_order: usize) -> Result<WeakExpansion> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::NegativeOccupation(n));
    }
    if n_modes == 0 {
        return Err(Error::InvalidModeCount(0));
    }
    let count = term_count(n_modes, max_order);
    if count > MAX_TERMS {
        return Err(Error::InvalidParameter(format!(
            "expansion would hold {count} terms (limit {MAX_TERMS})"
        )));
    }
    let epsilon = n / (1.0 + n);
    let prefactor = (1.0 + n).powi(-(n_modes as i32));
    let mut terms = Vec::with_capacity(count as usize);
    for k in 0..=max_order {
        let weight = epsilon.powi(k as i32);
        terms.extend(
            shell_occupations(n_modes, k)
                .into_iter()
                .map(|occupation| WeakTerm { occupation, weight }),
        );
    }
    Ok(WeakExpansion {
        n_modes,
        n,
        epsilon,
        prefactor,
        max_order,
        terms,
    })
}

/// `prefactor · Σ weights`, the probability mass kept by the truncation.
pub fn truncated_trace(w: &WeakExpansion) -> f64 {
    w.prefactor * w.terms.iter().map(|t| t.weight).sum::<f64>()
}

/// `‖a(0) a(z) |occ⟩‖²` with `a(z) = Σ_s ω_s(z) c_s` on a localized Fock state.
fn pair_detection(occ: &[usize], at_z: &[f64], at_0: &[f64]) -> f64 {
    use std::collections::BTreeMap;
    let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (t, &wz) in at_z.iter().enumerate() {
        if occ[t] == 0 || wz == 0.0 {
            continue;
        }
        let mut once = occ.to_vec();
        let a1 = (once[t] as f64).sqrt();
        once[t] -= 1;
        for (s, &w0) in at_0.iter().enumerate() {
            if once[s] == 0 {
                continue;
            }
            let mut twice = once.clone();
            let a2 = (twice[s] as f64).sqrt();
            twice[s] -= 1;
            *out.entry(twice).or_insert(0.0) += w0 * wz * a1 * a2;
        }
    }
    out.values().map(|v| v * v).sum()
}

/// `G⁽¹⁾(z)` and `G⁽²⁾(z)` evaluated on the expansion's terms.
///
/// `G⁽¹⁾` sums the one-photon shell and `G⁽²⁾` the two-photon shell; these
/// are the leading contributions that the closed weak-limit formulas keep.
/// Higher shells are ignored by construction. An expansion truncated at
/// order 1 yields `G⁽²⁾ = 0`, since a single photon cannot trigger a pair
/// detection. Requires odd `N` (pulse wavefunctions) and `max_order ≥ 1`.
pub fn weak_correlations(w: &WeakExpansion, length: f64, z: f64) -> Result<(f64, f64)> {
    let q = crate::spectra::check_mode_count(w.n_modes)? as i64;
    if w.max_order < 1 {
        return Err(Error::InvalidParameter(
            "weak correlations need max_order >= 1".into(),
        ));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidLength(length));
    }
    let at_z: Vec<f64> = (-q..=q).map(|s| omega(s, z, w.n_modes, length)).collect();
    let at_0: Vec<f64> = (-q..=q).map(|s| omega(s, 0.0, w.n_modes, length)).collect();
    let g1: f64 = w
        .shell(1)
        .map(|t| {
            t.weight
                * t.occupation
                    .iter()
                    .zip(&at_z)
                    .map(|(&p, &v)| p as f64 * v * v)
                    .sum::<f64>()
        })
        .sum();
    let g2: f64 = w
        .shell(2)
        .map(|t| t.weight * pair_detection(&t.occupation, &at_z, &at_0))
        .sum();
    Ok((w.prefactor * g1, w.prefactor * g2))
}

/// Diagonal operator in the localized-pulse Fock basis.
pub fn as_density_operator(w: &WeakExpansion, cutoff: usize) -> Result<DensityOperator> {
    if cutoff < w.max_order.max(1) {
        return Err(Error::CutoffTooSmall {
            cutoff,
            required: w.max_order.max(1),
        });
    }
    let cfg = FockConfig::new(w.n_modes, cutoff)?;
    let terms: Vec<(Vec<usize>, f64)> = w
        .terms
        .iter()
        .map(|t| (t.occupation.clone(), w.prefactor * t.weight))
        .collect();
    diagonal_state(&cfg, &terms)
}

/// The expansion rewritten in the frequency-mode Fock basis.
pub fn as_frequency_operator(w: &WeakExpansion, cutoff: usize) -> Result<DensityOperator> {
    let loc = as_density_operator(w, cutoff)?;
    transform_modes(&loc, &localized_to_frequency_map(w.n_modes)?)
}
