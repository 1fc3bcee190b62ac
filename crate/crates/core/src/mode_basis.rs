//! The discrete-Fourier localized-pulse basis.
//!
//! Localized modes are `c_s = Σ_m C_{sm} a_m` with `C_{sm} = e^{2πi sm/N}/√N`.
//! Their wavefunctions `ω_s(z)` are periodic sinc peaks centred on `z = s·l`,
//! `l = L/N`. Whether the pulses are statistically independent is read off
//! the `Λ` matrix of the coherent-amplitude weight, or equivalently the
//! normal-ordered covariance `⟨c_s† c_{s'}⟩`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::{check_mode_count, mode_offset, Spectrum};

/// Below this `|sin δ|` the Dirichlet ratio switches to its Taylor series.
const TAYLOR_SWITCH: f64 = 1e-8;

/// Unitary DFT matrix `C_{sm}`, rows indexed by pulse `s`, columns by mode `m`,
/// both stored at offset `index + q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DftMatrix {
    q: usize,
    entries: DMatrix<Complex64>,
}

impl DftMatrix {
    pub fn n_modes(&self) -> usize {
        2 * self.q + 1
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `C_{sm}` for `s, m ∈ {-q, …, q}`.
    pub fn get(&self, s: i64, m: i64) -> Result<Complex64> {
        Ok(self.entries[(mode_offset(s, self.q)?, mode_offset(m, self.q)?)])
    }

    /// Localized amplitudes `γ_s = Σ_m C_{sm} α_m`.
    pub fn to_localized(&self, alphas: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(alphas.len())?;
        Ok((0..self.n_modes())
            .map(|s| (0..self.n_modes()).map(|m| self.entries[(s, m)] * alphas[m]).sum())
            .collect())
    }

    /// Inverse of [`to_localized`](Self::to_localized): `α_m = Σ_s C*_{sm} γ_s`.
    pub fn to_frequency(&self, gammas: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(gammas.len())?;
        Ok((0..self.n_modes())
            .map(|m| {
                (0..self.n_modes())
                    .map(|s| self.entries[(s, m)].conj() * gammas[s])
                    .sum()
            })
            .collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_modes() {
            return Err(Error::ModeCountMismatch {
                expected: self.n_modes(),
                found: len,
            });
        }
        Ok(())
    }

    /// Largest entry of `|C C† − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let prod = &self.entries * self.entries.adjoint();
        let n = self.n_modes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }
}

/// Builds `C_{sm} = exp(2πi·s·m/N)/√N`. The phase is reduced modulo `N`
/// before exponentiation so large indices keep full precision.
pub fn dft_matrix(n_modes: usize) -> Result<DftMatrix> {
    let q = check_mode_count(n_modes)?;
    let n = n_modes as i64;
    let norm = 1.0 / (n_modes as f64).sqrt();
    let entries = DMatrix::from_fn(n_modes, n_modes, |row, col| {
        let s = row as i64 - q as i64;
        let m = col as i64 - q as i64;
        let k = (s * m).rem_euclid(n);
        Complex64::from_polar(norm, 2.0 * PI * k as f64 / n as f64)
    });
    Ok(DftMatrix { q, entries })
}

/// Frequency-mode wavefunction `χ_m(z) = e^{iκ_m z}/√L`, `κ_m = 2πm/L`.
pub fn chi(m: i64, z: f64, n_modes: usize, length: f64) -> Result<Complex64> {
    let q = check_mode_count(n_modes)?;
    mode_offset(m, q)?;
    Ok(Complex64::from_polar(1.0 / length.sqrt(), 2.0 * PI * m as f64 * z / length))
}

/// `sin(Nx)/sin(x)` for odd `N`, exact at the removable singularities
/// `x = jπ` where it equals `N`.
pub fn dirichlet_ratio(n_modes: usize, x: f64) -> f64 {
    let nf = n_modes as f64;
    // odd N makes the ratio π-periodic, so reduce to |δ| ≤ π/2
    let delta = x - PI * (x / PI).round();
    let sd = delta.sin();
    if sd.abs() < TAYLOR_SWITCH {
        let d2 = delta * delta;
        let n2 = nf * nf;
        nf * (1.0 - (n2 - 1.0) * d2 / 6.0 + (3.0 * n2 * n2 - 10.0 * n2 + 7.0) * d2 * d2 / 360.0)
    } else {
        (nf * delta).sin() / sd
    }
}

/// Localized-pulse wavefunction
/// `ω_s(z) = sin(π(z−sl)/l) / (√(NL)·sin(π(z−sl)/L))`.
///
/// Real-valued, `L`-periodic, peaks at `√(N/L)` on `z = sl + jL`.
pub fn omega(s: i64, z: f64, n_modes: usize, length: f64) -> f64 {
    let spacing = length / n_modes as f64;
    let x = PI * (z - s as f64 * spacing) / length;
    dirichlet_ratio(n_modes, x) / (n_modes as f64 * length).sqrt()
}

/// `Σ_m C*_{sm} χ_m(z)` evaluated term by term.
pub fn omega_by_summation(dft: &DftMatrix, s: i64, z: f64, length: f64) -> Result<Complex64> {
    let n = dft.n_modes();
    let q = dft.q() as i64;
    let s_off = mode_offset(s, dft.q())?;
    (-q..=q)
        .map(|m| Ok(dft.entries[(s_off, (m + q) as usize)].conj() * chi(m, z, n, length)?))
        .sum()
}

/// Infinite-box limit `√(N/L)·sinc((z−sl)/l)` with `sinc(x) = sin(πx)/(πx)`.
pub fn omega_sinc_limit(s: i64, z: f64, n_modes: usize, length: f64) -> f64 {
    let spacing = length / n_modes as f64;
    let x = PI * (z - s as f64 * spacing) / spacing;
    let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
    (n_modes as f64 / length).sqrt() * sinc
}

/// Quadratic-form matrix `Λ_{ss'}` of the coherent-amplitude weight
/// `F({γ̄}) = exp(−Σ γ̄_s Λ_{ss'} γ̄*_{s'})`.
#[derive(Debug, Clone)]
pub struct LambdaMatrix {
    matrix: DMatrix<Complex64>,
    geometric_mean: f64,
}

impl LambdaMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `(Π_m n_m)^{1/N}`.
    pub fn geometric_mean(&self) -> f64 {
        self.geometric_mean
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows()
    }

    /// Rescaled amplitudes `γ̄_s = γ_s (Π n_m)^{−1/2N}`.
    pub fn scale_amplitudes(&self, gammas: &[Complex64]) -> Vec<Complex64> {
        let f = self.geometric_mean.sqrt().recip();
        gammas.iter().map(|g| g * f).collect()
    }

    /// `Σ_{ss'} γ̄_s Λ_{ss'} γ̄*_{s'}` (real for Hermitian `Λ`).
    pub fn quadratic_form(&self, gamma_bar: &[Complex64]) -> Result<f64> {
        let n = self.n_modes();
        if gamma_bar.len() != n {
            return Err(Error::ModeCountMismatch {
                expected: n,
                found: gamma_bar.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..n {
            for t in 0..n {
                acc += gamma_bar[s] * self.matrix[(s, t)] * gamma_bar[t].conj();
            }
        }
        Ok(acc.re)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        max_off_diagonal(&self.matrix)
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }
}

/// `Λ_{ss'} = (Π n_m)^{1/N} Σ_m C*_{sm} C_{s'm} / n_m`.
///
/// Undefined when any mode is empty; use [`localized_covariance`] there.
pub fn lambda_matrix(spectrum: &Spectrum) -> Result<LambdaMatrix> {
    if let Some(m) = spectrum
        .mode_indices()
        .zip(spectrum.values())
        .find_map(|(m, &v)| (v == 0.0).then_some(m))
    {
        return Err(Error::ZeroOccupation(m));
    }
    let n = spectrum.n_modes();
    let dft = dft_matrix(n)?;
    let values = spectrum.values();
    let geometric_mean = (values.iter().map(|v| v.ln()).sum::<f64>() / n as f64).exp();
    let weights: Vec<f64> = values.iter().map(|v| geometric_mean / v).collect();
    let matrix = mode_sum(&dft, &weights);
    Ok(LambdaMatrix {
        matrix,
        geometric_mean,
    })
}

/// `Σ_m C*_{sm} C_{s'm} w_m` for every `(s, s')`.
fn mode_sum(dft: &DftMatrix, weights: &[f64]) -> DMatrix<Complex64> {
    let n = dft.n_modes();
    let c = &dft.entries;
    DMatrix::from_fn(n, n, |s, t| {
        (0..n)
            .map(|m| c[(s, m)].conj() * c[(t, m)] * weights[m])
            .sum()
    })
}

/// Normal-ordered covariance `M_{ss'} = ⟨c_s† c_{s'}⟩ = Σ_m C*_{sm} C_{s'm} n_m`.
#[derive(Debug, Clone)]
pub struct LocalizedCovariance {
    matrix: DMatrix<Complex64>,
}

impl LocalizedCovariance {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }
}

pub fn localized_covariance(spectrum: &Spectrum) -> Result<LocalizedCovariance> {
    let dft = dft_matrix(spectrum.n_modes())?;
    Ok(LocalizedCovariance {
        matrix: mode_sum(&dft, spectrum.values()),
    })
}

/// Off-diagonal Frobenius norm over total Frobenius norm; zero exactly when
/// the localized pulses are uncorrelated at second order.
pub fn independence_measure(cov: &LocalizedCovariance) -> Result<f64> {
    let m = &cov.matrix;
    let total = m.norm_squared();
    if total == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let diag: f64 = m.diagonal().iter().map(|z| z.norm_sqr()).sum();
    Ok(((total - diag).max(0.0) / total).sqrt())
}

fn max_off_diagonal(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn hermiticity_error(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{make_flat, make_gaussian, make_linear};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dft_small_cases() {
        let one = dft_matrix(1).unwrap();
        assert_relative_eq!(one.entries()[(0, 0)].re, 1.0);
        assert_eq!(one.entries()[(0, 0)].im, 0.0);
        let three = dft_matrix(3).unwrap();
        assert!(three.unitarity_error() < 1e-14);
        for m in -1..=1 {
            let c = three.get(0, m).unwrap();
            assert_relative_eq!(c.re, 1.0 / 3f64.sqrt(), max_relative = 1e-15);
            assert!(c.im.abs() < 1e-15);
        }
        assert!(dft_matrix(4).is_err());
        assert!(dft_matrix(0).is_err());
        for n in [5, 21, 101, 255] {
            assert!(dft_matrix(n).unwrap().unitarity_error() < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn chi_values() {
        let len: f64 = 2.5;
        let lim = 1.0 / len.sqrt();
        assert_relative_eq!(chi(0, 1.234, 5, len).unwrap().re, lim);
        assert_relative_eq!(chi(2, 0.0, 5, len).unwrap().re, lim);
        let wrapped = chi(1, len, 5, len).unwrap();
        assert_relative_eq!(wrapped.re, lim, max_relative = 1e-14);
        assert!(wrapped.im.abs() < 1e-14);
        assert_relative_eq!(chi(2, 0.77, 5, len).unwrap().norm(), lim, max_relative = 1e-15);
        assert!(matches!(chi(3, 0.0, 5, len), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn omega_peaks_and_zeros() {
        let (n, len) = (7, 3.0);
        let l = len / n as f64;
        let peak = (n as f64 / len).sqrt();
        for s in -3..=3 {
            assert_relative_eq!(omega(s, s as f64 * l, n, len), peak, max_relative = 1e-15);
            assert_relative_eq!(omega(s, s as f64 * l + len, n, len), peak, max_relative = 1e-12);
            for k in 1..n as i64 {
                let z = (s + k) as f64 * l;
                assert!(omega(s, z, n, len).abs() < 1e-13, "s={s} k={k}");
            }
        }
    }

    #[test]
    fn omega_smooth_across_taylor_switch() {
        let (n, len) = (21, 1.0);
        for eps in [1e-6, 1e-8, 1e-9, 3e-9, 1e-10, 1e-12] {
            let z = eps * len / PI;
            let exact = (n as f64 * PI * z / len).sin() / (PI * z / len).sin() / (n as f64 * len).sqrt();
            assert_relative_eq!(omega(0, z, n, len), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn omega_approaches_sinc_for_large_n() {
        let (n, len) = (101, 101.0);
        let l = len / n as f64;
        let peak = (n as f64 / len).sqrt();
        let max_dev = (0..=600)
            .map(|k| -3.0 * l + k as f64 * 6.0 * l / 600.0)
            .map(|z| (omega(0, z, n, len) - omega_sinc_limit(0, z, n, len)).abs())
            .fold(0.0, f64::max);
        assert!(max_dev / peak < 0.02, "deviation {max_dev}");
    }

    #[test]
    fn orthonormal_on_the_box() {
        // composite Simpson on 64N panels
        for n in [1usize, 3, 5, 21] {
            let len = 1.7;
            let panels = 64 * n;
            let h = len / panels as f64;
            let q = (n / 2) as i64;
            for s in -q..=q {
                for t in -q..=q {
                    let f = |z: f64| omega(s, z, n, len) * omega(t, z, n, len);
                    let mut acc = f(0.0) + f(len);
                    for k in 1..panels {
                        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                        acc += w * f(k as f64 * h);
                    }
                    let integral = acc * h / 3.0;
                    let target = if s == t { 1.0 } else { 0.0 };
                    assert!((integral - target).abs() < 1e-8, "N={n} s={s} t={t}: {integral}");
                }
            }
        }
    }

    #[test]
    fn lambda_flat_is_identity() {
        for &n in &[1usize, 3, 5, 21, 101] {
            for &occ in &[1e-3, 0.1, 1.0, 10.0] {
                let lam = lambda_matrix(&make_flat(n, occ, 1.0).unwrap()).unwrap();
                assert!(lam.max_off_diagonal() < 1e-12);
                for i in 0..n {
                    assert!((lam.matrix()[(i, i)] - 1.0).norm() < 1e-12);
                }
                let cov = localized_covariance(&make_flat(n, occ, 1.0).unwrap()).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        let t = if i == j { occ } else { 0.0 };
                        assert!((cov.matrix()[(i, j)] - t).norm() < 1e-12 * occ.max(1.0));
                    }
                }
            }
        }
        let one = lambda_matrix(&make_flat(1, 0.3, 1.0).unwrap()).unwrap();
        assert_relative_eq!(one.matrix()[(0, 0)].re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn lambda_linear_matches_independent_sum() {
        let s = make_linear(3, 0.1, 0.3, 1.0).unwrap();
        let lam = lambda_matrix(&s).unwrap();
        assert!(lam.hermiticity_error() < 1e-12);
        assert!(lam.max_off_diagonal() > 1e-3);
        // direct evaluation without the DftMatrix type
        let g = (0.1f64 * 0.2 * 0.3).powf(1.0 / 3.0);
        let ns = [0.1, 0.2, 0.3];
        for a in -1i64..=1 {
            for b in -1i64..=1 {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in -1i64..=1 {
                    let phase = 2.0 * PI * ((b - a) * m) as f64 / 3.0;
                    acc += Complex64::from_polar(1.0 / 3.0, phase) / ns[(m + 1) as usize];
                }
                acc *= g;
                let got = lam.matrix()[((a + 1) as usize, (b + 1) as usize)];
                assert!((got - acc).norm() < 1e-14, "({a},{b}) {got} vs {acc}");
            }
        }
    }

    #[test]
    fn lambda_rejects_empty_modes() {
        let s = Spectrum::new(vec![0.1, 0.0, 0.2], 1.0).unwrap();
        assert!(matches!(lambda_matrix(&s), Err(Error::ZeroOccupation(0))));
    }

    #[test]
    fn gamma_representation_reproduces_frequency_weight() {
        let s = make_linear(5, 0.05, 0.9, 1.0).unwrap();
        let lam = lambda_matrix(&s).unwrap();
        let dft = dft_matrix(5).unwrap();
        let alphas: Vec<Complex64> = (0..5)
            .map(|k| Complex64::new(0.3 * k as f64 - 0.4, 0.1 + 0.05 * k as f64))
            .collect();
        let gammas = dft.to_localized(&alphas).unwrap();
        let back = dft.to_frequency(&gammas).unwrap();
        for (a, b) in alphas.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
        let form = lam.quadratic_form(&lam.scale_amplitudes(&gammas)).unwrap();
        let direct: f64 = alphas
            .iter()
            .zip(s.values())
            .map(|(a, n)| a.norm_sqr() / n)
            .sum();
        assert_relative_eq!(form, direct, max_relative = 1e-12);
    }

    #[test]
    fn covariance_cases() {
        let vac = localized_covariance(&make_flat(5, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(vac.matrix().norm(), 0.0);
        assert!(matches!(independence_measure(&vac), Err(Error::ZeroMatrix)));
        let flat = localized_covariance(&make_flat(5, 0.4, 1.0).unwrap()).unwrap();
        assert!(independence_measure(&flat).unwrap() < 1e-14);
        let s = Spectrum::new(vec![1.0, 1.0, 1e-6], 1.0).unwrap();
        let cov = localized_covariance(&s).unwrap();
        assert!(independence_measure(&cov).unwrap() > 0.1);
    }

    #[test]
    fn lambda_times_covariance_is_scaled_identity() {
        for s in [
            make_linear(5, 0.1, 2.0, 1.0).unwrap(),
            make_gaussian(7, 0.5, 0.0, 4.0, 3.0).unwrap(),
            Spectrum::new(vec![0.3, 1e-3, 5.0], 1.0).unwrap(),
        ] {
            let lam = lambda_matrix(&s).unwrap();
            let cov = localized_covariance(&s).unwrap();
            let prod = lam.matrix() * cov.matrix();
            let g = lam.geometric_mean();
            let n = s.n_modes();
            for i in 0..n {
                for j in 0..n {
                    let t = if i == j { g } else { 0.0 };
                    assert!((prod[(i, j)] - t).norm() < 1e-10 * g.max(1.0));
                }
            }
        }
    }

    fn spectrum_strategy() -> impl Strategy<Value = Spectrum> {
        (0usize..4).prop_flat_map(|q| {
            prop::collection::vec(0.0f64..3.0, 2 * q + 1)
                .prop_map(|v| Spectrum::new(v, 1.0).unwrap())
        })
    }

    proptest! {
        #[test]
        fn omega_matches_direct_sum(n in (0usize..12).prop_map(|q| 2 * q + 1), len in 0.2f64..20.0, z in -50.0f64..50.0, s_frac in 0.0f64..1.0) {
            let dft = dft_matrix(n).unwrap();
            let q = (n / 2) as i64;
            let s = ((s_frac * n as f64) as i64).min(n as i64 - 1) - q;
            let direct = omega_by_summation(&dft, s, z, len).unwrap();
            prop_assert!((direct.re - omega(s, z, n, len)).abs() < 1e-10);
            prop_assert!(direct.im.abs() < 1e-10);
        }

        #[test]
        fn omega_translates(n in (0usize..12).prop_map(|q| 2 * q + 1), z in -10.0f64..10.0, s_frac in 0.0f64..1.0) {
            let len = 2.0;
            let q = (n / 2) as i64;
            let s = ((s_frac * n as f64) as i64).min(n as i64 - 1) - q;
            let shifted = omega(0, z - s as f64 * len / n as f64, n, len);
            prop_assert!((omega(s, z, n, len) - shifted).abs() < 1e-12);
        }

        #[test]
        fn covariance_is_unitary_conjugation(s in spectrum_strategy()) {
            let cov = localized_covariance(&s).unwrap();
            prop_assert!(cov.hermiticity_error() < 1e-13);
            prop_assert!((cov.trace() - s.total()).abs() < 1e-12);
            let mut expect = s.values().to_vec();
            expect.sort_by(f64::total_cmp);
            for (a, b) in cov.eigenvalues().iter().zip(&expect) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn independence_is_scale_invariant(s in spectrum_strategy(), c in 0.01f64..100.0) {
            prop_assume!(!s.is_vacuum());
            let scaled = Spectrum::new(s.values().iter().map(|v| v * c).collect(), 1.0).unwrap();
            let a = independence_measure(&localized_covariance(&s).unwrap()).unwrap();
            let b = independence_measure(&localized_covariance(&scaled).unwrap()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
