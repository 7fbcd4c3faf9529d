use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_i = i * dt` for `i = 0..=n_steps`, in adimensional
/// units (time measured in units of the inverse coupling).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct TimeGrid {
    t_max: f64,
    dt: f64,
    n_steps: usize,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    t_max: f64,
    dt: f64,
}

impl TryFrom<GridRepr> for TimeGrid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        TimeGrid::new(r.t_max, r.dt)
    }
}

impl From<TimeGrid> for GridRepr {
    fn from(g: TimeGrid) -> Self {
        GridRepr {
            t_max: g.t_max,
            dt: g.dt,
        }
    }
}

impl TimeGrid {
    /// Builds a grid covering `[0, t_max]` with step `dt`.
    ///
    /// `t_max / dt` must be an integer up to a relative error of 1e-9; the
    /// stored `t_max` is then recomputed as `n_steps * dt`.
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        let ratio = t_max / dt;
        let n_steps = ratio.round();
        if (ratio - n_steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "t_max = {t_max} is not a multiple of dt = {dt}"
            )));
        }
        Self::with_steps(n_steps as usize, dt)
    }

    pub fn with_steps(n_steps: usize, dt: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidGrid("grid needs at least one step".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        Ok(TimeGrid {
            t_max: n_steps as f64 * dt,
            dt,
            n_steps,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// Index of the first grid point with `t_i >= t` (clamped to the grid).
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let i = (t / self.dt - 1e-9).ceil().max(0.0) as usize;
        i.min(self.n_steps)
    }

    /// Grids are considered identical when they have the same number of
    /// steps and the same step up to rounding.
    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.n_steps == other.n_steps && (self.dt - other.dt).abs() <= 1e-12 * self.dt
    }

    pub(crate) fn ensure_matches(&self, other: &TimeGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({} steps, dt {}) vs ({} steps, dt {})",
                self.n_steps, self.dt, other.n_steps, other.dt
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_8001_points() {
        let g = TimeGrid::new(8.0, 0.001).unwrap();
        assert_eq!(g.n_steps(), 8000);
        assert_eq!(g.len(), 8001);
        assert_eq!(g.time(0), 0.0);
        assert!((g.time(8000) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 0.1).is_err());
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, -0.1).is_err());
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::with_steps(0, 0.1).is_err());
    }

    #[test]
    fn index_lookup() {
        let g = TimeGrid::new(8.0, 0.01).unwrap();
        assert_eq!(g.index_at_or_after(4.0), 400);
        assert_eq!(g.index_at_or_after(0.0), 0);
        assert_eq!(g.index_at_or_after(100.0), 800);
    }
}
