//! Choi-Jamiolkowski states of dephasing channels and the channel
//! infidelity between an undersampled map and its ensemble limit.
//!
//! Two routes are provided. [`infidelity_closed_form`] evaluates the 2x2
//! reduction of the Uhlmann fidelity directly. [`infidelity_oracle`] builds
//! both 4x4 Choi matrices and computes `F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`
//! from generic Hermitian eigendecompositions, sharing no algebra with the
//! closed form.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::decoherence::{DecoherenceSeries, MODULUS_TOLERANCE};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Allowed negativity of the radicand `(G^2 - 1)(|G_N|^2 - 1)`.
pub const RADICAND_TOLERANCE: f64 = 1e-12;

/// 4x4 Choi matrix in the `|00>, |01>, |10>, |11>` basis (ancilla first).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    m: Matrix4<Complex64>,
}

impl ChoiState {
    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.m
    }

    /// Eigenvalues of the Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let herm = (self.m - self.m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > tol {
            return Err(Error::InvalidState(format!("Choi matrix not Hermitian ({herm})")));
        }
        let tr = self.m.trace();
        if (tr - 1.0).norm() > tol {
            return Err(Error::InvalidState(format!("Choi trace {tr}")));
        }
        let low = self.eigenvalues()[0];
        if low < -tol {
            return Err(Error::InvalidState(format!("Choi eigenvalue {low}")));
        }
        Ok(())
    }
}

fn check_modulus(g: Complex64) -> Result<()> {
    if g.norm() <= 1.0 + MODULUS_TOLERANCE {
        Ok(())
    } else {
        Err(Error::DecoherenceOutOfRange(g.norm()))
    }
}

/// `(I ⊗ E)(|Psi><Psi|)` for the dephasing channel with coherence factor `g`,
/// `|Psi> = (|00> + |11>)/sqrt 2`.
pub fn choi_state(g: Complex64) -> Result<ChoiState> {
    check_modulus(g)?;
    let half = Complex64::new(0.5, 0.0);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = half;
    m[(3, 3)] = half;
    m[(0, 3)] = 0.5 * g;
    m[(3, 0)] = 0.5 * g.conj();
    Ok(ChoiState { m })
}

/// `Delta = ½ [1 - G Re(G_N) - sqrt((G^2 - 1)(|G_N|^2 - 1))]` for a real
/// ensemble value `g` and a complex undersampled value `g_n`.
pub fn infidelity_closed_form(g: f64, g_n: Complex64) -> Result<f64> {
    check_modulus(Complex64::new(g, 0.0))?;
    check_modulus(g_n)?;
    let radicand = (g * g - 1.0) * (g_n.norm_sqr() - 1.0);
    if radicand < -RADICAND_TOLERANCE {
        return Err(Error::DecoherenceOutOfRange(g_n.norm().max(g.abs())));
    }
    let delta = 0.5 * (1.0 - g * g_n.re - radicand.max(0.0).sqrt());
    Ok(delta.clamp(0.0, 1.0))
}

fn psd_sqrt(m: &Matrix4<Complex64>) -> Result<Matrix4<Complex64>> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::Eigen)?;
    let roots = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    Ok(v * Matrix4::from_diagonal(&roots) * v.adjoint())
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` of two 4x4
/// density matrices.
pub fn uhlmann_fidelity(rho: &Matrix4<Complex64>, sigma: &Matrix4<Complex64>) -> Result<f64> {
    let root = psd_sqrt(rho)?;
    let inner = root * sigma * root;
    let inner = (inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = inner.try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::Eigen)?;
    // eigenvalues that are zero analytically come back as +-1e-17; their
    // square roots would otherwise leak ~1e-9 into the trace
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let cutoff = 64.0 * f64::EPSILON * scale;
    let tr: f64 = eig.eigenvalues.iter().filter(|&&l| l > cutoff).map(|l| l.sqrt()).sum();
    Ok(tr * tr)
}

/// `1 - F(choi(g), choi(g_n))` through full 4x4 matrix functions.
pub fn infidelity_oracle(g: f64, g_n: Complex64) -> Result<f64> {
    let a = choi_state(Complex64::new(g, 0.0))?;
    let b = choi_state(g_n)?;
    Ok(1.0 - uhlmann_fidelity(&a.m, &b.m)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfidelitySeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl InfidelitySeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(InfidelitySeries { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Uniformly weighted mean over all grid points.
    pub fn time_average(&self) -> f64 {
        crate::stats::compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// Pointwise closed-form infidelity between an ensemble series (real) and an
/// undersampled one.
pub fn infidelity_series(ensemble: &DecoherenceSeries, undersampled: &DecoherenceSeries) -> Result<InfidelitySeries> {
    ensemble.grid().ensure_matches(undersampled.grid())?;
    let values = ensemble
        .values()
        .iter()
        .zip(undersampled.values())
        .map(|(g, g_n)| infidelity_closed_form(g.re, *g_n))
        .collect::<Result<Vec<_>>>()?;
    InfidelitySeries::new(*ensemble.grid(), values)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_channel_gives_bell_projector() {
        let choi = choi_state(c(1.0, 0.0)).unwrap();
        let psi = nalgebra::Vector4::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
            * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let proj = psi * psi.adjoint();
        assert!((choi.matrix() - proj).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn fully_dephased_choi_is_diagonal() {
        let choi = choi_state(c(0.0, 0.0)).unwrap();
        let want = Matrix4::from_diagonal(&nalgebra::Vector4::new(
            c(0.5, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.5, 0.0),
        ));
        assert_eq!(choi.matrix(), &want);
    }

    #[test]
    fn imaginary_coherence_choi_is_pure() {
        let choi = choi_state(c(0.0, 1.0)).unwrap();
        assert_eq!(choi.matrix()[(0, 3)], c(0.0, 0.5));
        assert_eq!(choi.matrix()[(3, 0)], c(0.0, -0.5));
        let ev = choi.eigenvalues();
        for (got, want) in ev.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14, "{ev:?}");
        }
        choi.check(1e-12).unwrap();
    }

    #[test]
    fn out_of_range_coherence_is_rejected() {
        assert!(choi_state(c(1.0, 0.1)).is_err());
        assert!(infidelity_closed_form(1.1, c(0.0, 0.0)).is_err());
        assert!(infidelity_closed_form(0.0, c(0.9, 0.9)).is_err());
    }

    #[test]
    fn closed_form_reference_values() {
        assert_eq!(infidelity_closed_form(0.3, c(0.3, 0.0)).unwrap(), 0.0);
        assert!((infidelity_closed_form(0.0, c(1.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((infidelity_closed_form(0.0, c(0.0, -1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((infidelity_closed_form(0.5, c(0.0, 0.5)).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn oracle_reference_values() {
        assert!(infidelity_oracle(0.3, c(0.3, 0.0)).unwrap().abs() < 1e-12);
        assert!((infidelity_oracle(0.0, c(1.0, 0.0)).unwrap() - 0.5).abs() < 1e-12);
        assert!((infidelity_oracle(0.5, c(0.0, 0.5)).unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_with_closed_form_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let g: f64 = rng.random_range(-1.0..=1.0);
            let r = rng.random::<f64>().sqrt();
            let g_n = Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU));
            let diff = (infidelity_oracle(g, g_n).unwrap() - infidelity_closed_form(g, g_n).unwrap()).abs();
            worst = worst.max(diff);
        }
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn minimum_at_matching_channel() {
        for &g in &[-0.9, -0.3, 0.0, 0.25, 0.8, 1.0] {
            let at = infidelity_closed_form(g, c(g, 0.0)).unwrap();
            for k in -1000..=1000 {
                let x = k as f64 * 1e-3;
                assert!(infidelity_closed_form(g, c(x, 0.0)).unwrap() >= at);
            }
        }
    }

    proptest! {
        #[test]
        fn choi_is_a_state(r in 0.0..=1.0f64, arg in 0.0..std::f64::consts::TAU) {
            let choi = choi_state(Complex64::from_polar(r, arg)).unwrap();
            prop_assert!(choi.eigenvalues()[0] >= -1e-12);
            prop_assert!(choi.check(1e-10).is_ok());
        }

        #[test]
        fn depends_on_gn_only_through_re_and_modulus(
            g in -1.0..=1.0f64, r in 0.0..=1.0f64, arg in 0.0..std::f64::consts::TAU
        ) {
            let g_n = Complex64::from_polar(r, arg);
            let a = infidelity_closed_form(g, g_n).unwrap();
            let b = infidelity_closed_form(g, g_n.conj()).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
