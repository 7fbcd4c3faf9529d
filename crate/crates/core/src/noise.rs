//! Discretized samplers for the two classical noise processes driving the
//! qubit: random telegraph noise (RTN) and an Ornstein-Uhlenbeck (OU)
//! process. All quantities are in adimensional units where the coupling
//! `nu` is 1 and rates are measured in units of `nu`.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::seed::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Rtn,
    Ou,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Rtn => "rtn",
            NoiseKind::Ou => "ou",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial condition of the OU process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuInit {
    /// `B(0) = 0` for every realization.
    #[default]
    ZeroStart,
    /// `B(0)` drawn from the unit-variance stationary distribution.
    StationaryDraw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub kind: NoiseKind,
    pub gamma: f64,
    #[serde(default = "unit_coupling")]
    pub nu: f64,
    #[serde(default)]
    pub ou_init: OuInit,
}

fn unit_coupling() -> f64 {
    1.0
}

impl NoiseParams {
    pub fn rtn(gamma: f64) -> Self {
        NoiseParams {
            kind: NoiseKind::Rtn,
            gamma,
            nu: 1.0,
            ou_init: OuInit::ZeroStart,
        }
    }

    pub fn ou(gamma: f64, ou_init: OuInit) -> Self {
        NoiseParams {
            kind: NoiseKind::Ou,
            gamma,
            nu: 1.0,
            ou_init,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidNoise(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::InvalidNoise(format!("nu must be positive, got {}", self.nu)));
        }
        Ok(())
    }

    /// Checks the parameters against a grid, including the OU stability
    /// bound `dt < 1/(2 gamma)`.
    pub fn validate_for(&self, grid: &TimeGrid) -> Result<()> {
        self.validate()?;
        if self.kind == NoiseKind::Ou {
            let limit = 1.0 / (2.0 * self.gamma);
            if grid.dt() >= limit {
                return Err(Error::Unstable { dt: grid.dt(), limit });
            }
        }
        Ok(())
    }

    /// Per-step RTN flip probability `1 - exp(-gamma dt)`.
    pub fn flip_probability(&self, dt: f64) -> f64 {
        -(-self.gamma * dt).exp_m1()
    }
}

/// One sampled realization of a noise process on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    grid: TimeGrid,
    kind: NoiseKind,
    values: Vec<f64>,
}

impl NoiseTrajectory {
    /// Wraps explicit values, mostly useful for tests and replaying recorded
    /// noise. RTN values must all be `±nu` for some `nu > 0`.
    pub fn from_values(grid: TimeGrid, kind: NoiseKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidNoise(format!("non-finite noise value {v}")));
        }
        if kind == NoiseKind::Rtn {
            let nu = values[0].abs();
            if nu == 0.0 || values.iter().any(|v| v.abs() != nu) {
                return Err(Error::InvalidNoise(
                    "RTN values must all have the same nonzero magnitude".into(),
                ));
            }
        }
        Ok(NoiseTrajectory { grid, kind, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Samples random telegraph noise: the initial value is `±nu` with equal
/// probability and at every step the sign flips with probability
/// `1 - exp(-gamma dt)`.
pub fn sample_rtn(params: &NoiseParams, grid: &TimeGrid, seed: SeedSpec) -> Result<NoiseTrajectory> {
    if params.kind != NoiseKind::Rtn {
        return Err(Error::WrongNoiseKind {
            expected: "rtn",
            found: params.kind.name(),
        });
    }
    params.validate()?;
    if grid.n_steps() == 0 {
        return Err(Error::InvalidGrid("grid needs at least one step".into()));
    }
    let mut rng = seed.rng()?;
    let flip = params.flip_probability(grid.dt());
    let mut value = if rng.random::<bool>() { params.nu } else { -params.nu };
    let mut values = Vec::with_capacity(grid.len());
    values.push(value);
    for _ in 0..grid.n_steps() {
        if rng.random::<f64>() < flip {
            value = -value;
        }
        values.push(value);
    }
    Ok(NoiseTrajectory {
        grid: *grid,
        kind: NoiseKind::Rtn,
        values,
    })
}

/// Samples the OU process through the recursion
/// `B(t + dt) = (1 - 2 gamma dt) B(t) + 2 sqrt(gamma) dW`, with
/// `dW ~ N(0, dt)`, and returns `nu * B`.
///
/// The stationary variance of this recursion is `1 / (1 - gamma dt)` and its
/// autocorrelation decays as `exp(-2 gamma tau)`.
pub fn sample_ou(params: &NoiseParams, grid: &TimeGrid, seed: SeedSpec) -> Result<NoiseTrajectory> {
    if params.kind != NoiseKind::Ou {
        return Err(Error::WrongNoiseKind {
            expected: "ou",
            found: params.kind.name(),
        });
    }
    params.validate_for(grid)?;
    let mut rng = seed.rng()?;
    let dt = grid.dt();
    let decay = 1.0 - 2.0 * params.gamma * dt;
    let kick = 2.0 * params.gamma.sqrt() * dt.sqrt();
    let mut b = match params.ou_init {
        OuInit::ZeroStart => 0.0,
        OuInit::StationaryDraw => rng.sample::<f64, _>(StandardNormal),
    };
    let mut values = Vec::with_capacity(grid.len());
    values.push(params.nu * b);
    for _ in 0..grid.n_steps() {
        let z: f64 = rng.sample(StandardNormal);
        b = decay * b + kick * z;
        values.push(params.nu * b);
    }
    Ok(NoiseTrajectory {
        grid: *grid,
        kind: NoiseKind::Ou,
        values,
    })
}

/// Dispatches on `params.kind`.
pub fn sample(params: &NoiseParams, grid: &TimeGrid, seed: SeedSpec) -> Result<NoiseTrajectory> {
    match params.kind {
        NoiseKind::Rtn => sample_rtn(params, grid, seed),
        NoiseKind::Ou => sample_ou(params, grid, seed),
    }
}

/// Number of sign changes between consecutive grid points of an RTN
/// trajectory.
pub fn jump_count(traj: &NoiseTrajectory) -> Result<usize> {
    if traj.kind != NoiseKind::Rtn {
        return Err(Error::WrongNoiseKind {
            expected: "rtn",
            found: traj.kind.name(),
        });
    }
    Ok(traj.values.windows(2).filter(|w| w[0] != w[1]).count())
}

/// Ensemble mean and (population) variance of the trajectories at grid
/// index `i`.
pub fn ensemble_moments(trajs: &[NoiseTrajectory], i: usize) -> (f64, f64) {
    let n = trajs.len() as f64;
    let mean = trajs.iter().map(|t| t.values[i]).sum::<f64>() / n;
    let var = trajs.iter().map(|t| (t.values[i] - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Normalized lag autocorrelation `<x(t) x(t + lag)> / <x(t)^2>`, averaged
/// over the ensemble and over all start points `t`.
pub fn lag_autocorrelation(trajs: &[NoiseTrajectory], lag: usize) -> f64 {
    let mut cross = 0.0;
    let mut power = 0.0;
    for t in trajs {
        let v = &t.values;
        for i in 0..v.len().saturating_sub(lag) {
            cross += v[i] * v[i + lag];
            power += v[i] * v[i];
        }
    }
    cross / power
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_max: f64, dt: f64) -> TimeGrid {
        TimeGrid::new(t_max, dt).unwrap()
    }

    #[test]
    fn flip_probability_at_default_step() {
        let p = NoiseParams::rtn(4.0).flip_probability(0.001);
        // 1 - exp(-0.004), evaluated to 40 digits
        assert!((p - 0.003_992_010_656_008_528).abs() < 1e-15);
    }

    #[test]
    fn rtn_values_are_plus_minus_nu() {
        let g = grid(8.0, 0.001);
        let t = sample_rtn(&NoiseParams::rtn(4.0), &g, SeedSpec::new(1, 0, 0)).unwrap();
        assert_eq!(t.values().len(), 8001);
        assert!(t.values().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn vanishing_rate_gives_constant_rtn() {
        let g = grid(8.0, 0.001);
        let t = sample_rtn(&NoiseParams::rtn(1e-300), &g, SeedSpec::new(2, 0, 0)).unwrap();
        assert_eq!(jump_count(&t).unwrap(), 0);
        assert!(t.values().iter().all(|&v| v == t.values()[0]));
    }

    #[test]
    fn both_initial_signs_occur() {
        let g = grid(0.01, 0.001);
        let p = NoiseParams::rtn(4.0);
        let plus = (0..1000)
            .filter(|&k| sample_rtn(&p, &g, SeedSpec::new(3, 0, k)).unwrap().values()[0] > 0.0)
            .count();
        // Binomial(1000, 1/2): 4 sigma is about 63
        assert!((plus as i64 - 500).abs() < 63, "plus = {plus}");
    }

    #[test]
    fn ou_zero_start_begins_at_zero() {
        let g = grid(1.0, 0.001);
        let t = sample_ou(&NoiseParams::ou(4.0, OuInit::ZeroStart), &g, SeedSpec::new(1, 0, 0)).unwrap();
        assert_eq!(t.values()[0], 0.0);
        assert_ne!(t.values()[1], 0.0);
    }

    #[test]
    fn ou_stability_guard() {
        let g = grid(8.0, 0.2);
        let err = sample_ou(&NoiseParams::ou(4.0, OuInit::ZeroStart), &g, SeedSpec::new(1, 0, 0)).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
        assert!(err.is_usage());
        // exactly at the bound is also rejected
        let g = grid(1.0, 0.125);
        assert!(sample_ou(&NoiseParams::ou(4.0, OuInit::ZeroStart), &g, SeedSpec::new(1, 0, 0)).is_err());
    }

    #[test]
    fn samplers_reject_wrong_kind() {
        let g = grid(1.0, 0.01);
        let s = SeedSpec::new(0, 0, 0);
        assert!(matches!(
            sample_rtn(&NoiseParams::ou(4.0, OuInit::ZeroStart), &g, s),
            Err(Error::WrongNoiseKind { .. })
        ));
        assert!(matches!(
            sample_ou(&NoiseParams::rtn(4.0), &g, s),
            Err(Error::WrongNoiseKind { .. })
        ));
        let ou = sample_ou(&NoiseParams::ou(4.0, OuInit::ZeroStart), &g, s).unwrap();
        assert!(jump_count(&ou).is_err());
    }

    #[test]
    fn rejects_bad_rate() {
        let g = grid(1.0, 0.01);
        assert!(sample_rtn(&NoiseParams::rtn(0.0), &g, SeedSpec::new(0, 0, 0)).is_err());
        assert!(sample_rtn(&NoiseParams::rtn(f64::NAN), &g, SeedSpec::new(0, 0, 0)).is_err());
    }

    #[test]
    fn jump_count_by_definition() {
        let g = TimeGrid::with_steps(10, 0.1).unwrap();
        let constant = NoiseTrajectory::from_values(g, NoiseKind::Rtn, vec![1.0; 11]).unwrap();
        assert_eq!(jump_count(&constant).unwrap(), 0);
        let alternating: Vec<f64> = (0..11).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let alt = NoiseTrajectory::from_values(g, NoiseKind::Rtn, alternating).unwrap();
        assert_eq!(jump_count(&alt).unwrap(), 10);
    }

    #[test]
    fn from_values_validates() {
        let g = TimeGrid::with_steps(2, 0.1).unwrap();
        assert!(NoiseTrajectory::from_values(g, NoiseKind::Rtn, vec![1.0, 0.5, 1.0]).is_err());
        assert!(NoiseTrajectory::from_values(g, NoiseKind::Ou, vec![1.0, 0.5]).is_err());
        assert!(NoiseTrajectory::from_values(g, NoiseKind::Ou, vec![1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn sampling_is_order_independent() {
        let g = grid(2.0, 0.01);
        let p = NoiseParams::ou(4.0, OuInit::StationaryDraw);
        let forward: Vec<_> = (0..8)
            .map(|k| sample(&p, &g, SeedSpec::new(9, 2, k)).unwrap())
            .collect();
        let backward: Vec<_> = (0..8)
            .rev()
            .map(|k| sample(&p, &g, SeedSpec::new(9, 2, k)).unwrap())
            .collect();
        for (a, b) in forward.iter().zip(backward.iter().rev()) {
            assert_eq!(a, b);
        }
    }
}
