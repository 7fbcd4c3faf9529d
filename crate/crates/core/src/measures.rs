//! Trace distance and the BLP non-Markovianity measure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decoherence::DecoherenceSeries;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::state::{hermitian_eigenvalues, InitialStateSpec, QubitState};

/// Increments at or below this are treated as numerical noise, not revivals.
pub const BLP_TOLERANCE: f64 = 1e-12;

/// `D = ½ ||rho1 - rho2||_1`, from the closed-form eigenvalues of the 2x2
/// Hermitian difference.
pub fn trace_distance(rho1: &QubitState, rho2: &QubitState) -> f64 {
    let (a, b) = (rho1.matrix(), rho2.matrix());
    let [l1, l2] = hermitian_eigenvalues(a[0][0].re - b[0][0].re, a[1][1].re - b[1][1].re, a[0][1] - b[0][1]);
    0.5 * (l1.abs() + l2.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceDistanceSeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TraceDistanceSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(d) = values.iter().find(|d| !(-1e-12..=1.0 + 1e-12).contains(*d)) {
            return Err(Error::InvalidState(format!("trace distance {d} outside [0, 1]")));
        }
        Ok(TraceDistanceSeries { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Time at which the distance first starts to grow, if it ever does.
    pub fn first_revival(&self) -> Option<f64> {
        self.values
            .windows(2)
            .position(|w| w[1] - w[0] > BLP_TOLERANCE)
            .map(|i| self.grid.time(i))
    }
}

/// Distance between the evolved `|+>` and `|->` states (mixed with the
/// identity at purity `p`): `D(t) = p |G(t)|`.
pub fn optimal_pair_distance(g: &DecoherenceSeries, spec: InitialStateSpec) -> Result<TraceDistanceSeries> {
    spec.validate()?;
    let values = g.moduli().map(|m| spec.purity_p * m.min(1.0)).collect();
    TraceDistanceSeries::new(*g.grid(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlpConvention {
    /// Integrates `dD/dt + |dD/dt|`: twice the total increase of `D`.
    #[default]
    PaperLiteral,
    /// Integrates `dD/dt` over the intervals where it is positive.
    Conventional,
}

impl fmt::Display for BlpConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlpConvention::PaperLiteral => "paper_literal",
            BlpConvention::Conventional => "conventional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlpMeasure {
    pub value: f64,
    pub convention: BlpConvention,
}

/// Sum of the positive increments of `D` between consecutive samples,
/// doubled under [`BlpConvention::PaperLiteral`].
pub fn blp_measure(d: &TraceDistanceSeries, convention: BlpConvention) -> BlpMeasure {
    let rise: f64 = d
        .values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&inc| inc > BLP_TOLERANCE)
        .fold(0.0, |acc, inc| acc + inc);
    let value = match convention {
        BlpConvention::PaperLiteral => 2.0 * rise,
        BlpConvention::Conventional => rise,
    };
    BlpMeasure { value, convention }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;
    use crate::decoherence::{g_analytic_ou, g_undersampled, PhaseTrajectory, Provenance};
    use crate::state::{apply_dephasing_map, prepare_initial_state, Sign};

    fn pair(p: f64) -> (QubitState, QubitState) {
        let spec = InitialStateSpec::new(p).unwrap();
        (
            prepare_initial_state(spec, Sign::Plus).unwrap(),
            prepare_initial_state(spec, Sign::Minus).unwrap(),
        )
    }

    #[test]
    fn orthogonal_and_identical_states() {
        let (plus, minus) = pair(1.0);
        assert!((trace_distance(&plus, &minus) - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&plus, &plus), 0.0);
        assert_eq!(trace_distance(&minus, &plus), trace_distance(&plus, &minus));
    }

    #[test]
    fn half_dephased_pair() {
        let (plus, minus) = pair(1.0);
        let g = Complex64::new(0.5, 0.0);
        let d = trace_distance(
            &apply_dephasing_map(g, &plus).unwrap(),
            &apply_dephasing_map(g, &minus).unwrap(),
        );
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn optimal_pair_reproduces_ou_curve() {
        let grid = TimeGrid::new(8.0, 0.01).unwrap();
        let g = g_analytic_ou(4.0, &grid).unwrap();
        let d = optimal_pair_distance(&g, InitialStateSpec::pure()).unwrap();
        assert_eq!(d.values(), g.real_parts().as_slice());
        let scaled = optimal_pair_distance(&g, InitialStateSpec::new(0.98).unwrap()).unwrap();
        assert_eq!(scaled.values()[0], 0.98);
    }

    fn cosine_distance(grid: TimeGrid) -> TraceDistanceSeries {
        let up = PhaseTrajectory::from_phases(grid, grid.times().collect()).unwrap();
        let down = PhaseTrajectory::from_phases(grid, grid.times().map(|t| -t).collect()).unwrap();
        let g = g_undersampled(&[up, down]).unwrap();
        optimal_pair_distance(&g, InitialStateSpec::pure()).unwrap()
    }

    #[test]
    fn two_opposite_phases_give_abs_cosine() {
        let grid = TimeGrid::new(8.0, 0.001).unwrap();
        let d = cosine_distance(grid);
        for (i, v) in d.values().iter().enumerate() {
            assert!((v - (2.0 * grid.time(i)).cos().abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn blp_of_abs_cosine_counts_five_rises() {
        let grid = TimeGrid::new(8.0, 0.001).unwrap();
        let d = cosine_distance(grid);
        // five rises from 0 to 1; sampling can miss each extremum by at most
        // dt * max slope = 0.002
        let tol = 5.0 * 2.0 * grid.dt() * 2.0;
        let literal = blp_measure(&d, BlpConvention::PaperLiteral).value;
        let conventional = blp_measure(&d, BlpConvention::Conventional).value;
        assert!((literal - 10.0).abs() < 2.0 * tol, "{literal}");
        assert!((conventional - 5.0).abs() < tol, "{conventional}");
    }

    #[test]
    fn blp_is_zero_for_monotone_and_constant_series() {
        let grid = TimeGrid::new(8.0, 0.01).unwrap();
        let decreasing = TraceDistanceSeries::new(grid, grid.times().map(|t| (-t).exp()).collect()).unwrap();
        assert_eq!(blp_measure(&decreasing, BlpConvention::PaperLiteral).value, 0.0);
        let flat = TraceDistanceSeries::new(grid, vec![0.98; grid.len()]).unwrap();
        assert_eq!(blp_measure(&flat, BlpConvention::PaperLiteral).value, 0.0);
        assert_eq!(flat.first_revival(), None);
    }

    #[test]
    fn sub_tolerance_wiggles_are_ignored() {
        let grid = TimeGrid::with_steps(4, 0.1).unwrap();
        let d = TraceDistanceSeries::new(grid, vec![0.5, 0.5 + 5e-13, 0.5, 0.5 + 5e-13, 0.5]).unwrap();
        assert_eq!(blp_measure(&d, BlpConvention::Conventional).value, 0.0);
    }

    #[test]
    fn distance_series_validates_range() {
        let grid = TimeGrid::with_steps(1, 0.1).unwrap();
        assert!(TraceDistanceSeries::new(grid, vec![1.0, 1.1]).is_err());
        assert!(TraceDistanceSeries::new(grid, vec![1.0]).is_err());
    }

    fn arb_distance() -> impl Strategy<Value = TraceDistanceSeries> {
        prop::collection::vec(0.0..=1.0f64, 2..200).prop_map(|v| {
            let grid = TimeGrid::with_steps(v.len() - 1, 0.01).unwrap();
            TraceDistanceSeries::new(grid, v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn literal_is_twice_conventional(d in arb_distance()) {
            let lit = blp_measure(&d, BlpConvention::PaperLiteral).value;
            let conv = blp_measure(&d, BlpConvention::Conventional).value;
            prop_assert!(conv >= 0.0);
            prop_assert_eq!(lit, 2.0 * conv);
            let rising = d.values().windows(2).any(|w| w[1] - w[0] > BLP_TOLERANCE);
            prop_assert_eq!(conv > 0.0, rising);
        }

        #[test]
        fn optimal_pair_matches_explicit_evolution(
            p in 0.0..=1.0f64,
            phases in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 20), 1..6),
        ) {
            let grid = TimeGrid::with_steps(19, 0.05).unwrap();
            let values: Vec<Complex64> = (0..20)
                .map(|i| phases.iter().map(|row| Complex64::from_polar(1.0, row[i])).sum::<Complex64>()
                    / phases.len() as f64)
                .collect();
            let g = DecoherenceSeries::new(grid, values, Provenance::Undersampled(phases.len())).unwrap();
            let spec = InitialStateSpec::new(p).unwrap();
            let d = optimal_pair_distance(&g, spec).unwrap();
            let (plus, minus) = pair(p);
            for (gv, dv) in g.values().iter().zip(d.values()) {
                let explicit = trace_distance(
                    &apply_dephasing_map(*gv, &plus).unwrap(),
                    &apply_dephasing_map(*gv, &minus).unwrap(),
                );
                prop_assert!((explicit - dv).abs() <= 1e-12);
            }
        }
    }
}
