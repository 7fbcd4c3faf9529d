//! Ensemble decoherence functions in the fast and slow RTN regimes and for OU.
//!
//! cargo run --release --example analytic_decoherence

use undersampling::decoherence::{g_analytic_ou, g_analytic_rtn, ou_beta};
use undersampling::measures::{blp_measure, optimal_pair_distance, BlpConvention};
use undersampling::state::InitialStateSpec;
use undersampling::{Result, TimeGrid};

fn main() -> Result<()> {
    let grid = TimeGrid::new(8.0, 0.001)?;
    let fast = g_analytic_rtn(4.0, &grid)?;
    let slow = g_analytic_rtn(1.0, &grid)?;
    let ou = g_analytic_ou(4.0, &grid)?;

    println!("{:>5} {:>10} {:>10} {:>10}", "t", "rtn g=4", "rtn g=1", "ou g=4");
    for i in (0..grid.len()).step_by(1000) {
        println!(
            "{:>5.1} {:>10.6} {:>10.6} {:>10.6}",
            grid.time(i),
            fast.values()[i].re,
            slow.values()[i].re,
            ou.values()[i].re
        );
    }
    println!("beta(1) for OU at gamma = 4: {:.8}", ou_beta(4.0, 1.0));

    let pure = InitialStateSpec::pure();
    for (label, g) in [("rtn gamma=4", &fast), ("rtn gamma=1", &slow), ("ou gamma=4", &ou)] {
        let d = optimal_pair_distance(g, pure)?;
        println!(
            "{label}: BLP {:.6}, first revival {:?}",
            blp_measure(&d, BlpConvention::PaperLiteral).value,
            d.first_revival()
        );
    }
    Ok(())
}
