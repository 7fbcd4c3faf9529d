//! Qubit density matrices and the dephasing channel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decoherence::MODULUS_TOLERANCE;
use crate::error::{Error, Result};

/// Tolerance on Hermiticity, trace and positivity of a freshly built state.
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Looser tolerance for states produced by applying a channel.
pub const CHANNEL_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// 2x2 density matrix in the `{|0>, |1>}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    m: [[Complex64; 2]; 2],
}

impl QubitState {
    /// Validates Hermiticity, unit trace and positivity at [`STATE_TOLERANCE`].
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let s = QubitState { m };
        s.check(STATE_TOLERANCE)?;
        Ok(s)
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn coherence(&self) -> Complex64 {
        self.m[0][1]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Eigenvalues in ascending order, computed from the Hermitian part.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(self.m[0][0].re, self.m[1][1].re, self.m[0][1])
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let [[a, b], [c, d]] = self.m;
        if (b - c.conj()).norm() > tol || a.im.abs() > tol || d.im.abs() > tol {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > tol {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let [low, _] = self.eigenvalues();
        if low < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {low}")));
        }
        Ok(())
    }
}

/// Eigenvalues of `[[a, b], [conj b, d]]` with `a`, `d` real.
pub(crate) fn hermitian_eigenvalues(a: f64, d: f64, b: Complex64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b.norm());
    [mean - radius, mean + radius]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// Initial state `p rho_± + (1 - p) I/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSpec {
    pub purity_p: f64,
}

impl InitialStateSpec {
    pub fn new(purity_p: f64) -> Result<Self> {
        let s = InitialStateSpec { purity_p };
        s.validate()?;
        Ok(s)
    }

    pub fn pure() -> Self {
        InitialStateSpec { purity_p: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.purity_p) {
            Ok(())
        } else {
            Err(Error::InvalidPurity(self.purity_p))
        }
    }
}

pub fn prepare_initial_state(spec: InitialStateSpec, sign: Sign) -> Result<QubitState> {
    spec.validate()?;
    let off = match sign {
        Sign::Plus => 0.5 * spec.purity_p,
        Sign::Minus => -0.5 * spec.purity_p,
    };
    let half = Complex64::new(0.5, 0.0);
    let off = Complex64::new(off, 0.0);
    QubitState::new([[half, off], [off, half]])
}

/// Applies the dephasing channel with decoherence value `g`: populations are
/// untouched and the coherence `rho_01` is multiplied by `g` (`rho_10` by its
/// conjugate). For real `g` this is
/// `(1-g)/2 Z rho Z + (1+g)/2 rho`; for complex `g` it is the average of the
/// unitary phase kicks that produced `g`.
pub fn apply_dephasing_map(g: Complex64, rho0: &QubitState) -> Result<QubitState> {
    if g.norm().is_nan() || g.norm() > 1.0 + MODULUS_TOLERANCE {
        return Err(Error::DecoherenceOutOfRange(g.norm()));
    }
    let [[a, b], [c, d]] = rho0.m;
    let out = QubitState {
        m: [[a, g * b], [g.conj() * c, d]],
    };
    out.check(CHANNEL_TOLERANCE)?;
    Ok(out)
}

/// Maximally mixed state `I/2`.
pub fn maximally_mixed() -> QubitState {
    let half = Complex64::new(0.5, 0.0);
    QubitState {
        m: [[half, ZERO], [ZERO, half]],
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &QubitState, b: &QubitState, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a.m[i][j] - b.m[i][j]).norm() <= tol))
    }

    #[test]
    fn pure_plus_state() {
        let s = prepare_initial_state(InitialStateSpec::pure(), Sign::Plus).unwrap();
        assert_eq!(s.matrix(), &[[c(0.5, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.5, 0.0)]]);
        let [lo, hi] = s.eigenvalues();
        assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_purity_is_maximally_mixed() {
        let spec = InitialStateSpec::new(0.0).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            assert_eq!(prepare_initial_state(spec, sign).unwrap(), maximally_mixed());
        }
    }

    #[test]
    fn experimental_purity_coherence() {
        let s = prepare_initial_state(InitialStateSpec::new(0.98).unwrap(), Sign::Plus).unwrap();
        assert!((s.coherence().re - 0.49).abs() < 1e-15);
        let m = prepare_initial_state(InitialStateSpec::new(0.98).unwrap(), Sign::Minus).unwrap();
        assert!((m.coherence().re + 0.49).abs() < 1e-15);
    }

    #[test]
    fn purity_range_is_enforced() {
        assert!(matches!(InitialStateSpec::new(1.2), Err(Error::InvalidPurity(_))));
        assert!(InitialStateSpec::new(-0.1).is_err());
        assert!(InitialStateSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn identity_and_full_dephasing() {
        let plus = prepare_initial_state(InitialStateSpec::pure(), Sign::Plus).unwrap();
        assert_eq!(apply_dephasing_map(c(1.0, 0.0), &plus).unwrap(), plus);
        assert_eq!(apply_dephasing_map(c(0.0, 0.0), &plus).unwrap(), maximally_mixed());
    }

    #[test]
    fn dephasing_matches_average_of_unitary_kicks() {
        // rho(t) = (U+ rho U+^dag + U- rho U-^dag)/2 with U± = exp(∓ i t Z)
        let plus = prepare_initial_state(InitialStateSpec::pure(), Sign::Plus).unwrap();
        for &t in &[0.0, 0.3, 1.0, 2.5] {
            let mut avg = [[c(0.0, 0.0); 2]; 2];
            for s in [1.0, -1.0] {
                let u = [c(0.0, -s * t).exp(), c(0.0, s * t).exp()];
                for i in 0..2 {
                    for j in 0..2 {
                        avg[i][j] += 0.5 * u[i] * plus.m[i][j] * u[j].conj();
                    }
                }
            }
            let brute = QubitState { m: avg };
            let mapped = apply_dephasing_map(c((2.0 * t).cos(), 0.0), &plus).unwrap();
            assert!(close(&brute, &mapped, 1e-15));
            assert!((mapped.coherence().re - (2.0 * t).cos() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_range_decoherence() {
        let plus = prepare_initial_state(InitialStateSpec::pure(), Sign::Plus).unwrap();
        assert!(matches!(
            apply_dephasing_map(c(0.8, 0.8), &plus),
            Err(Error::DecoherenceOutOfRange(_))
        ));
    }

    #[test]
    fn invalid_matrices_are_rejected() {
        assert!(QubitState::new([[c(0.6, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.6, 0.0)]]).is_err());
        assert!(QubitState::new([[c(0.5, 0.0), c(0.1, 0.0)], [c(0.2, 0.0), c(0.5, 0.0)]]).is_err());
        assert!(QubitState::new([[c(0.5, 0.0), c(0.7, 0.0)], [c(0.7, 0.0), c(0.5, 0.0)]]).is_err());
    }

    fn arb_state() -> impl Strategy<Value = QubitState> {
        // Bloch ball parametrization
        (0.0..=1.0f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
            let (x, y, z) = (r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos());
            QubitState {
                m: [
                    [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y)],
                    [c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)],
                ],
            }
        })
    }

    proptest! {
        #[test]
        fn channel_output_is_a_state(rho in arb_state(), r in 0.0..=1.0f64, arg in 0.0..std::f64::consts::TAU) {
            let out = apply_dephasing_map(Complex64::from_polar(r, arg), &rho).unwrap();
            prop_assert!(out.check(CHANNEL_TOLERANCE).is_ok());
            prop_assert_eq!(out.m[0][0], rho.m[0][0]);
            prop_assert_eq!(out.m[1][1], rho.m[1][1]);
        }
    }
}
