//! Accumulated phases and decoherence functions.
//!
//! A qubit coupled to a classical field through `lambda(t) sigma_z` picks up
//! the phase `phi(t) = integral of lambda` and its coherence is multiplied by
//! `exp(-2 i phi)`. Averaging that phasor over the full noise ensemble gives
//! the analytic decoherence function `G(t)`; averaging over only `N` sampled
//! trajectories gives the undersampled `G_N(t)`, which is complex in general.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise::{NoiseKind, NoiseParams, NoiseTrajectory};

/// Slack allowed on `|G| <= 1` before a series is treated as corrupted.
pub const MODULUS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    grid: TimeGrid,
    phases: Vec<f64>,
}

impl PhaseTrajectory {
    /// Wraps explicit phases; the first must be exactly zero.
    pub fn from_phases(grid: TimeGrid, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} phases for {} grid points",
                phases.len(),
                grid.len()
            )));
        }
        if phases[0] != 0.0 {
            return Err(Error::InvalidNoise(format!(
                "accumulated phase must start at 0, got {}",
                phases[0]
            )));
        }
        Ok(PhaseTrajectory { grid, phases })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// Left-endpoint Riemann sum of the noise: `phi(t_i) = dt * sum_{j<i} lambda(t_j)`.
///
/// The running sum is kept unscaled and multiplied by `dt` per point, so a
/// constant integer-valued noise integrates to `t_i` exactly.
pub fn accumulate_phase(traj: &NoiseTrajectory) -> PhaseTrajectory {
    let grid = *traj.grid();
    let mut phases = Vec::with_capacity(grid.len());
    let mut running = 0.0;
    phases.push(0.0);
    for &v in &traj.values()[..grid.n_steps()] {
        running += v;
        phases.push(running * grid.dt());
    }
    PhaseTrajectory { grid, phases }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    AnalyticRtn,
    AnalyticOu,
    Undersampled(usize),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::AnalyticRtn => f.write_str("analytic-rtn"),
            Provenance::AnalyticOu => f.write_str("analytic-ou"),
            Provenance::Undersampled(n) => write!(f, "undersampled-{n}"),
        }
    }
}

/// Complex decoherence function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceSeries {
    grid: TimeGrid,
    values: Vec<Complex64>,
    provenance: Provenance,
}

impl DecoherenceSeries {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(g) = values
            .iter()
            .find(|g| g.norm().is_nan() || g.norm() > 1.0 + MODULUS_TOLERANCE)
        {
            return Err(Error::DecoherenceOutOfRange(g.norm()));
        }
        Ok(DecoherenceSeries {
            grid,
            values,
            provenance,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `|G(t_i)|`. A sum of unit phasors can land a few ulps below 1 even
    /// when it is a single phasor, so values that close are snapped to 1.
    pub fn moduli(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|g| {
            let m = g.norm();
            if (m - 1.0).abs() <= 4.0 * f64::EPSILON {
                1.0
            } else {
                m
            }
        })
    }

    /// Real parts, for series known to be real (the analytic ones).
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|g| g.re).collect()
    }
}

/// Streaming average of `exp(-2 i phi_k(t_i))` over trajectories; avoids
/// holding all phase trajectories in memory at once.
#[derive(Debug, Clone)]
pub struct PhasorAccumulator {
    grid: TimeGrid,
    sums: Vec<Complex64>,
    count: usize,
}

impl PhasorAccumulator {
    pub fn new(grid: TimeGrid) -> Self {
        PhasorAccumulator {
            grid,
            sums: vec![Complex64::new(0.0, 0.0); grid.len()],
            count: 0,
        }
    }

    pub fn add_phases(&mut self, phases: &PhaseTrajectory) -> Result<()> {
        self.grid.ensure_matches(&phases.grid)?;
        for (s, &phi) in self.sums.iter_mut().zip(&phases.phases) {
            *s += Complex64::from_polar(1.0, -2.0 * phi);
        }
        self.count += 1;
        Ok(())
    }

    pub fn add_noise(&mut self, traj: &NoiseTrajectory) -> Result<()> {
        self.add_phases(&accumulate_phase(traj))
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(self) -> Result<DecoherenceSeries> {
        if self.count == 0 {
            return Err(Error::Empty("no trajectories accumulated"));
        }
        let n = self.count as f64;
        let values = self.sums.into_iter().map(|s| s / n).collect();
        DecoherenceSeries::new(self.grid, values, Provenance::Undersampled(self.count))
    }
}

/// `G_N(t_i) = (1/N) sum_k exp(-2 i phi_k(t_i))`.
pub fn g_undersampled(phases: &[PhaseTrajectory]) -> Result<DecoherenceSeries> {
    let first = phases.first().ok_or(Error::Empty("phase trajectory list"))?;
    let mut acc = PhasorAccumulator::new(first.grid);
    for p in phases {
        acc.add_phases(p)?;
    }
    acc.finish()
}

/// Ensemble decoherence for RTN with switching rate `gamma` and coupling
/// `nu`:
/// `G(t) = exp(-gamma t) (cosh(eta t) + (gamma/eta) sinh(eta t))`,
/// `eta = sqrt(gamma^2 - 4 nu^2)`.
///
/// For `gamma < 2 nu`, `eta` is imaginary and the trigonometric form is used;
/// at `gamma = 2 nu` the removable singularity evaluates to
/// `exp(-gamma t)(1 + gamma t)`.
pub fn rtn_decoherence(gamma: f64, nu: f64, t: f64) -> f64 {
    let disc = gamma * gamma - 4.0 * nu * nu;
    if disc > 0.0 {
        let eta = disc.sqrt();
        // (1 + g/eta) e^{(eta-g)t} + (1 - g/eta) e^{-(eta+g)t}, regrouped so
        // that small eta does not cancel catastrophically
        let bracket = 1.0 + (-2.0 * eta * t).exp() - gamma / eta * (-2.0 * eta * t).exp_m1();
        0.5 * ((eta - gamma) * t).exp() * bracket
    } else if disc < 0.0 {
        let omega = (-disc).sqrt();
        (-gamma * t).exp() * ((omega * t).cos() + gamma * (omega * t).sin() / omega)
    } else {
        (-gamma * t).exp() * (1.0 + gamma * t)
    }
}

/// `beta(t) = (exp(-2 gamma t) + 2 gamma t - 1) / (2 gamma^2)`.
pub fn ou_beta(gamma: f64, t: f64) -> f64 {
    let x = 2.0 * gamma * t;
    let numer = if x < 1e-3 {
        // series of exp(-x) + x - 1
        x * x * (0.5 - x / 6.0 + x * x / 24.0)
    } else {
        (-x).exp_m1() + x
    };
    numer / (2.0 * gamma * gamma)
}

/// Ensemble decoherence for the OU process: `G(t) = exp(-2 nu^2 beta(t))`.
pub fn ou_decoherence(gamma: f64, nu: f64, t: f64) -> f64 {
    (-2.0 * nu * nu * ou_beta(gamma, t)).exp()
}

fn real_series(grid: &TimeGrid, provenance: Provenance, f: impl Fn(f64) -> f64) -> DecoherenceSeries {
    let values = grid.times().map(|t| Complex64::new(f(t), 0.0)).collect();
    DecoherenceSeries {
        grid: *grid,
        values,
        provenance,
    }
}

fn check_rate(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidNoise(format!("gamma must be positive, got {gamma}")))
    }
}

/// Analytic RTN decoherence function in adimensional units (`nu = 1`).
pub fn g_analytic_rtn(gamma: f64, grid: &TimeGrid) -> Result<DecoherenceSeries> {
    check_rate(gamma)?;
    Ok(real_series(grid, Provenance::AnalyticRtn, |t| {
        rtn_decoherence(gamma, 1.0, t)
    }))
}

/// Analytic OU decoherence function in adimensional units (`nu = 1`).
pub fn g_analytic_ou(gamma: f64, grid: &TimeGrid) -> Result<DecoherenceSeries> {
    check_rate(gamma)?;
    Ok(real_series(grid, Provenance::AnalyticOu, |t| {
        ou_decoherence(gamma, 1.0, t)
    }))
}

/// Ensemble decoherence function matching a noise configuration, honoring a
/// non-unit coupling.
pub fn g_analytic(params: &NoiseParams, grid: &TimeGrid) -> Result<DecoherenceSeries> {
    params.validate()?;
    let (gamma, nu) = (params.gamma, params.nu);
    Ok(match params.kind {
        NoiseKind::Rtn => real_series(grid, Provenance::AnalyticRtn, |t| rtn_decoherence(gamma, nu, t)),
        NoiseKind::Ou => real_series(grid, Provenance::AnalyticOu, |t| ou_decoherence(gamma, nu, t)),
    })
}
