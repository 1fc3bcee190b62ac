//! Brute-force truncated Fock-space engine.
//!
//! Every closed form elsewhere in the crate is checked against this module on
//! small instances. States live in the product basis `|p_1, …, p_N⟩` with
//! `0 ≤ p_k ≤ p_max`; basis index `Σ_k p_k (p_max+1)^k`, mode `k` at storage
//! offset `m + q`. Nothing here samples randomly or uses covariance-matrix
//! shortcuts: expectations are traces over the truncated space.

mod sparse;

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use sparse::{hermitian_eigenvalues, joint_blocks, psd_sqrt, SparseOperator};

use crate::error::{Error, Result};
use crate::mode_basis::{chi, dft_matrix};
use crate::spectra::{mode_offset, Spectrum};

/// Default upper bound on the truncated basis dimension.
pub const DEFAULT_GUARDRAIL: usize = 1 << 20;

/// Environment variable overriding [`DEFAULT_GUARDRAIL`].
pub const GUARDRAIL_ENV: &str = "THERMAL_PULSES_GUARDRAIL";

/// Per-mode tail budget used by [`cutoff_for_tail`], divided by the mode count.
pub const TAIL_BUDGET: f64 = 1e-9;

/// Eigenvalues down to `-PSD_TOLERANCE` count as numerical drift.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Guardrail from [`GUARDRAIL_ENV`], falling back to the default when unset
/// or unparsable.
pub fn guardrail_from_env() -> usize {
    std::env::var(GUARDRAIL_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARDRAIL)
}

/// Shape of a truncated multimode Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    modes: usize,
    cutoff: usize,
    dimension: usize,
}

impl FockConfig {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_guardrail(modes, cutoff, guardrail_from_env())
    }

    pub fn with_guardrail(modes: usize, cutoff: usize, guardrail: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("oracle needs at least one mode".into()));
        }
        if cutoff == 0 {
            return Err(Error::CutoffTooSmall { cutoff, required: 1 });
        }
        let dim = (cutoff as u128 + 1).checked_pow(modes as u32).unwrap_or(u128::MAX);
        if dim > guardrail as u128 {
            return Err(Error::GuardrailExceeded {
                dimension: dim,
                limit: guardrail,
            });
        }
        Ok(FockConfig {
            modes,
            cutoff,
            dimension: dim as usize,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Maximum photons per mode.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow(mode as u32)
    }

    /// Photons in `mode` for basis state `index`.
    pub fn occupation_of(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % (self.cutoff + 1)
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        (0..self.modes).map(|k| self.occupation_of(index, k)).collect()
    }

    pub fn total_photons(&self, index: usize) -> usize {
        let base = self.cutoff + 1;
        let mut rest = index;
        let mut total = 0;
        for _ in 0..self.modes {
            total += rest % base;
            rest /= base;
        }
        total
    }

    /// Basis index of an occupation vector, `None` if any entry exceeds the cutoff.
    pub fn index(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.modes || occupation.iter().any(|&p| p > self.cutoff) {
            return None;
        }
        Some(
            occupation
                .iter()
                .enumerate()
                .map(|(k, &p)| p * self.stride(k))
                .sum(),
        )
    }
}

/// Smallest cutoff with per-mode tail `(n/(n+1))^{p_max+1} < TAIL_BUDGET / N`
/// for the largest occupation in `spectrum`.
pub fn cutoff_for_tail(spectrum: &Spectrum) -> usize {
    cutoff_for_occupation(spectrum.max_value(), spectrum.n_modes())
}

pub fn cutoff_for_occupation(max_n: f64, modes: usize) -> usize {
    let ratio = max_n / (max_n + 1.0);
    if ratio == 0.0 {
        return 1;
    }
    let budget = TAIL_BUDGET / modes as f64;
    // (p+1) ln r < ln budget
    let needed = (budget.ln() / ratio.ln()).floor() as usize;
    needed.max(1)
}

/// Relative deficit budget used by [`cutoff_for_moments`].
pub const MOMENT_BUDGET: f64 = 1e-6;

/// Smallest cutoff, never below [`cutoff_for_tail`], at which the truncated
/// first and second factorial moments of every mode fall short of `n` and
/// `2n²` by a relative amount below `budget`.
///
/// The tail rule only bounds lost probability. Normalized second moments such
/// as g²(0) divide by `n²`, so for small occupations the tail rule can leave a
/// large relative error (at `p_max = 1` the truncated `⟨a†²a²⟩` is zero).
pub fn cutoff_for_moments(spectrum: &Spectrum, budget: f64) -> usize {
    let mut cutoff = cutoff_for_tail(spectrum);
    for &n in spectrum.values() {
        if n > 0.0 {
            while moment_deficit(n, cutoff) >= budget {
                cutoff += 1;
            }
        }
    }
    cutoff
}

fn moment_deficit(n: f64, cutoff: usize) -> f64 {
    let first = 1.0 - truncated_thermal_occupation(n, cutoff) / n;
    let second = 1.0 - truncated_pair_moment(n, cutoff) / (2.0 * n * n);
    first.abs().max(second.abs())
}

/// `⟨a†²a²⟩ = Σ_{p≤P} p(p−1)(1−r)r^p` of a thermal mode truncated at `P`.
pub fn truncated_pair_moment(n: f64, cutoff: usize) -> f64 {
    let r = n / (n + 1.0);
    let mut weight = 1.0 - r;
    let mut sum = 0.0;
    for p in 0..=cutoff {
        sum += (p * p.saturating_sub(1)) as f64 * weight;
        weight *= r;
    }
    sum
}

/// Trace `1 − (n/(n+1))^{p_max+1}` of a single thermal mode truncated at `p_max`.
pub fn truncated_thermal_trace(n: f64, cutoff: usize) -> f64 {
    let r = n / (n + 1.0);
    1.0 - r.powi(cutoff as i32 + 1)
}

/// Mean photon number of a truncated thermal mode:
/// `Σ_{p≤P} p(1−r)r^p = n(1 − (P+1)r^P + P r^{P+1})`, `r = n/(n+1)`.
pub fn truncated_thermal_occupation(n: f64, cutoff: usize) -> f64 {
    let r = n / (n + 1.0);
    let p = cutoff as i32;
    n * (1.0 - (p as f64 + 1.0) * r.powi(p) + p as f64 * r.powi(p + 1))
}

/// Hermitian positive semidefinite operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    config: FockConfig,
    matrix: SparseOperator,
}

impl DensityOperator {
    /// Wraps a matrix after checking hermiticity to `1e-12` and positivity to
    /// [`PSD_TOLERANCE`].
    pub fn new(config: FockConfig, matrix: SparseOperator) -> Result<Self> {
        if matrix.dim() != config.dimension() {
            return Err(Error::ConfigMismatch);
        }
        let herm = matrix.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "density operator is not Hermitian (deviation {herm:e})"
            )));
        }
        let rho = DensityOperator { config, matrix };
        let min = rho.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd(min));
        }
        Ok(rho)
    }

    pub(crate) fn new_unchecked(config: FockConfig, matrix: SparseOperator) -> Self {
        DensityOperator { config, matrix }
    }

    pub fn config(&self) -> &FockConfig {
        &self.config
    }

    pub fn matrix(&self) -> &SparseOperator {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `Tr[ρ O]`.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Complex64> {
        if op.dim() != self.config.dimension() {
            return Err(Error::ConfigMismatch);
        }
        Ok(self.matrix.trace_product(op))
    }

    /// `⟨a_k† a_k⟩` for storage mode `k`.
    pub fn mode_occupation(&self, mode: usize) -> f64 {
        (0..self.config.dimension())
            .map(|i| self.matrix.get(i, i).re * self.config.occupation_of(i, mode) as f64)
            .sum()
    }

    pub fn total_photon_expectation(&self) -> f64 {
        (0..self.config.modes()).map(|k| self.mode_occupation(k)).sum()
    }

    /// True when no entry couples states of different total photon number.
    pub fn conserves_photon_number(&self) -> bool {
        self.matrix
            .entries()
            .all(|(i, j, _)| self.config.total_photons(i) == self.config.total_photons(j))
    }

    /// Projection onto basis states holding at most `max_total` photons.
    pub fn restricted_to_total(&self, max_total: usize) -> DensityOperator {
        let cfg = self.config;
        let triplets = self
            .matrix
            .entries()
            .filter(|&(i, j, _)| cfg.total_photons(i) <= max_total && cfg.total_photons(j) <= max_total)
            .collect();
        DensityOperator::new_unchecked(cfg, SparseOperator::from_triplets(cfg.dimension(), triplets))
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64> {
        if self.config != other.config {
            return Err(Error::ConfigMismatch);
        }
        Ok(self.matrix.max_abs_diff(&other.matrix))
    }
}

/// `⊗_m Σ_p n_m^p/(n_m+1)^{p+1} |p⟩⟨p|`, truncated at the configured cutoff.
pub fn thermal_product_state(spectrum: &Spectrum, config: &FockConfig) -> Result<DensityOperator> {
    if spectrum.n_modes() != config.modes() {
        return Err(Error::ModeCountMismatch {
            expected: config.modes(),
            found: spectrum.n_modes(),
        });
    }
    let cutoff = config.cutoff();
    let weights: Vec<Vec<f64>> = spectrum
        .values()
        .iter()
        .map(|&n| {
            (0..=cutoff)
                .map(|p| n.powi(p as i32) / (n + 1.0).powi(p as i32 + 1))
                .collect()
        })
        .collect();
    let mut diag = Vec::with_capacity(config.dimension());
    for index in 0..config.dimension() {
        let w: f64 = (0..config.modes())
            .map(|k| weights[k][config.occupation_of(index, k)])
            .product();
        if w != 0.0 {
            diag.push((index, index, Complex64::new(w, 0.0)));
        }
    }
    Ok(DensityOperator::new_unchecked(
        *config,
        SparseOperator::from_triplets(config.dimension(), diag),
    ))
}

/// Truncated annihilation operator of storage mode `k`; `a|p⟩ = √p |p−1⟩`.
pub fn annihilation_at(mode: usize, config: &FockConfig) -> Result<SparseOperator> {
    if mode >= config.modes() {
        return Err(Error::IndexOutOfRange {
            index: mode as i64,
            q: config.modes().saturating_sub(1),
        });
    }
    let stride = config.stride(mode);
    let triplets = (0..config.dimension())
        .filter_map(|i| {
            let p = config.occupation_of(i, mode);
            (p > 0).then(|| (i - stride, i, Complex64::new((p as f64).sqrt(), 0.0)))
        })
        .collect();
    Ok(SparseOperator::from_triplets(config.dimension(), triplets))
}

fn q_of(config: &FockConfig) -> Result<usize> {
    crate::spectra::check_mode_count(config.modes())
}

/// Annihilation operator of frequency mode `m ∈ {-q, …, q}`.
pub fn annihilation(m: i64, config: &FockConfig) -> Result<SparseOperator> {
    annihilation_at(mode_offset(m, q_of(config)?)?, config)
}

/// Localized-pulse annihilation operator `c_s = Σ_m C_{sm} a_m`.
pub fn localized_annihilation(s: i64, config: &FockConfig) -> Result<SparseOperator> {
    let q = q_of(config)?;
    let dft = dft_matrix(config.modes())?;
    let coeffs: Vec<Complex64> = (-(q as i64)..=q as i64)
        .map(|m| dft.get(s, m))
        .collect::<Result<_>>()?;
    combination_operator(&coeffs, config)
}

fn combination_operator(coeffs: &[Complex64], config: &FockConfig) -> Result<SparseOperator> {
    let mut acc = SparseOperator::zeros(config.dimension());
    for (k, &c) in coeffs.iter().enumerate() {
        if c != Complex64::new(0.0, 0.0) {
            acc = acc.add(&annihilation_at(k, config)?.scale(c));
        }
    }
    Ok(acc)
}

/// Field operator `a(z) = Σ_m χ_m(z) a_m` as an explicit matrix.
pub fn field_operator(z: f64, length: f64, config: &FockConfig) -> Result<SparseOperator> {
    combination_operator(&field_coefficients(z, length, config)?, config)
}

fn field_coefficients(z: f64, length: f64, config: &FockConfig) -> Result<Vec<Complex64>> {
    let q = q_of(config)? as i64;
    (-q..=q).map(|m| chi(m, z, config.modes(), length)).collect()
}

type SparseVec = Vec<(usize, Complex64)>;

fn merge(mut v: SparseVec) -> SparseVec {
    v.sort_unstable_by_key(|e| e.0);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (i, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += a,
            _ => out.push((i, a)),
        }
    }
    out
}

/// Applies `Σ_k coeffs_k a_k` to a sparse state vector.
fn lower(config: &FockConfig, coeffs: &[Complex64], state: &[(usize, Complex64)]) -> SparseVec {
    let mut out = Vec::with_capacity(state.len() * coeffs.len());
    for &(idx, amp) in state {
        for (k, &c) in coeffs.iter().enumerate() {
            let p = config.occupation_of(idx, k);
            if p > 0 {
                out.push((idx - config.stride(k), amp * c * (p as f64).sqrt()));
            }
        }
    }
    merge(out)
}

/// Applies `Σ_k coeffs_k a_k†`; components pushed past the cutoff are reported
/// through the returned flag.
fn raise(config: &FockConfig, coeffs: &[Complex64], state: &[(usize, Complex64)]) -> (SparseVec, bool) {
    let mut out = Vec::with_capacity(state.len() * coeffs.len());
    let mut truncated = false;
    for &(idx, amp) in state {
        for (k, &c) in coeffs.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let p = config.occupation_of(idx, k);
            if p < config.cutoff() {
                out.push((idx + config.stride(k), amp * c * ((p + 1) as f64).sqrt()));
            } else {
                truncated = true;
            }
        }
    }
    (merge(out), truncated)
}

fn inner(a: &[(usize, Complex64)], b: &[(usize, Complex64)]) -> Complex64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = Complex64::new(0.0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1.conj() * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// `Tr[ρ B†B] = Σ_{ij} ρ_ij ⟨B j|B i⟩` with `B|k⟩` produced on demand.
fn gram_expectation<F>(rho: &DensityOperator, apply: F) -> Complex64
where
    F: Fn(usize) -> SparseVec,
{
    let mut cache: HashMap<usize, SparseVec> = HashMap::new();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, j, v) in rho.matrix.entries() {
        if i == j {
            let bi = apply(i);
            acc += v * bi.iter().map(|e| e.1.norm_sqr()).sum::<f64>();
            continue;
        }
        let bi = cache.entry(i).or_insert_with(|| apply(i)).clone();
        let bj = cache.entry(j).or_insert_with(|| apply(j));
        acc += v * inner(bj, &bi);
    }
    acc
}

fn real_part(value: Complex64, what: &str) -> Result<f64> {
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} has imaginary residue {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `Tr[ρ a†(z) a(z)]`.
pub fn g1_oracle(rho: &DensityOperator, length: f64, z: f64) -> Result<f64> {
    let cfg = rho.config;
    let field = field_coefficients(z, length, &cfg)?;
    let value = gram_expectation(rho, |k| lower(&cfg, &field, &[(k, Complex64::new(1.0, 0.0))]));
    real_part(value, "G1")
}

/// `Tr[ρ a†(z) a†(0) a(0) a(z)]`.
pub fn g2_oracle(rho: &DensityOperator, length: f64, z: f64) -> Result<f64> {
    let cfg = rho.config;
    let field_z = field_coefficients(z, length, &cfg)?;
    let field_0 = field_coefficients(0.0, length, &cfg)?;
    let value = gram_expectation(rho, |k| {
        let once = lower(&cfg, &field_z, &[(k, Complex64::new(1.0, 0.0))]);
        lower(&cfg, &field_0, &once)
    });
    real_part(value, "G2")
}

/// Squared Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
///
/// Both operators are split into the connected blocks of their joint sparsity
/// pattern and each block is diagonalized densely.
pub fn uhlmann_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.config != sigma.config {
        return Err(Error::ConfigMismatch);
    }
    let mut root_trace = 0.0;
    for block in joint_blocks(&[&rho.matrix, &sigma.matrix]) {
        let r = rho.matrix.dense_block(&block);
        if r.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            // still validate the other side
            sparse::psd_sqrt_dense(sigma.matrix.dense_block(&block), PSD_TOLERANCE)?;
            continue;
        }
        let s = sigma.matrix.dense_block(&block);
        let sqrt_r = sparse::psd_sqrt_dense(r, PSD_TOLERANCE)?;
        sparse::psd_sqrt_dense(s.clone(), PSD_TOLERANCE)?;
        let inner: DMatrix<Complex64> = &sqrt_r * s * &sqrt_r;
        let inner = (&inner + inner.adjoint()).scale(0.5);
        let eig = inner.symmetric_eigenvalues();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd(min));
        }
        root_trace += eig.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>();
    }
    Ok(root_trace * root_trace)
}

/// Re-expresses a state given in one set of modes in another related by a
/// passive number-conserving transform. `creation[(k, j)]` is the coefficient
/// of new-mode creator `j` in old-mode creator `k`:
/// `b_k† = Σ_j creation[(k, j)] a_j†`.
///
/// Every occupied basis state must hold at most `cutoff` photons in total so
/// the image is not truncated.
pub fn transform_modes(rho: &DensityOperator, creation: &DMatrix<Complex64>) -> Result<DensityOperator> {
    let cfg = rho.config;
    let n = cfg.modes();
    if creation.nrows() != n || creation.ncols() != n {
        return Err(Error::ModeCountMismatch {
            expected: n,
            found: creation.nrows(),
        });
    }
    let mut images: HashMap<usize, SparseVec> = HashMap::new();
    let mut image_of = |index: usize| -> Result<SparseVec> {
        if let Some(v) = images.get(&index) {
            return Ok(v.clone());
        }
        let total = cfg.total_photons(index);
        if total > cfg.cutoff() {
            return Err(Error::CutoffTooSmall {
                cutoff: cfg.cutoff(),
                required: total,
            });
        }
        let mut state: SparseVec = vec![(0, Complex64::new(1.0, 0.0))];
        for k in 0..n {
            let p = cfg.occupation_of(index, k);
            let row: Vec<Complex64> = (0..n).map(|j| creation[(k, j)]).collect();
            for _ in 0..p {
                state = raise(&cfg, &row, &state).0;
            }
            let norm = (1..=p).map(|v| v as f64).product::<f64>().sqrt();
            state.iter_mut().for_each(|e| e.1 /= norm);
        }
        images.insert(index, state.clone());
        Ok(state)
    };
    let mut triplets = Vec::new();
    for (i, j, v) in rho.matrix.entries() {
        let vi = image_of(i)?;
        let vj = image_of(j)?;
        for &(a, x) in &vi {
            for &(b, y) in &vj {
                triplets.push((a, b, v * x * y.conj()));
            }
        }
    }
    Ok(DensityOperator::new_unchecked(
        cfg,
        SparseOperator::from_triplets(cfg.dimension(), triplets),
    ))
}

/// Coefficients taking localized-mode creators to frequency-mode creators,
/// `c_s† = Σ_m C*_{sm} a_m†`.
pub fn localized_to_frequency_map(modes: usize) -> Result<DMatrix<Complex64>> {
    Ok(dft_matrix(modes)?.entries().map(|c| c.conj()))
}

/// Inverse of [`localized_to_frequency_map`]: `a_m† = Σ_s C_{sm} c_s†`.
pub fn frequency_to_localized_map(modes: usize) -> Result<DMatrix<Complex64>> {
    Ok(dft_matrix(modes)?.entries().transpose())
}

/// Diagonal operator built from `(occupation, weight)` pairs.
pub fn diagonal_state(config: &FockConfig, terms: &[(Vec<usize>, f64)]) -> Result<DensityOperator> {
    let mut triplets = Vec::with_capacity(terms.len());
    for (occ, w) in terms {
        let required = occ.iter().copied().max().unwrap_or(0);
        let index = config.index(occ).ok_or(Error::CutoffTooSmall {
            cutoff: config.cutoff(),
            required,
        })?;
        triplets.push((index, index, Complex64::new(*w, 0.0)));
    }
    DensityOperator::new(*config, SparseOperator::from_triplets(config.dimension(), triplets))
}
