//! Channel infidelity between an undersampled map and its ensemble limit,
//! by the closed form and by the Choi-state fidelity oracle.
//!
//! cargo run --release --example choi_infidelity

use num_complex::Complex64;
use undersampling::choi::{choi_state, infidelity_closed_form, infidelity_oracle, infidelity_series};
use undersampling::decoherence::{g_analytic, PhasorAccumulator};
use undersampling::noise::sample;
use undersampling::{NoiseParams, OuInit, Result, SeedSpec, TimeGrid};

fn main() -> Result<()> {
    for (g, g_n) in [
        (0.5, Complex64::new(0.0, 0.5)),
        (0.0, Complex64::new(1.0, 0.0)),
        (0.3, Complex64::new(0.25, -0.1)),
    ] {
        println!(
            "g = {g}, g_n = {g_n}: closed form {:.12}, oracle {:.12}",
            infidelity_closed_form(g, g_n)?,
            infidelity_oracle(g, g_n)?
        );
    }
    println!(
        "Choi eigenvalues at g = i: {:?}",
        choi_state(Complex64::i())?.eigenvalues()
    );

    let grid = TimeGrid::new(8.0, 0.01)?;
    let noise = NoiseParams::ou(4.0, OuInit::ZeroStart);
    let ensemble = g_analytic(&noise, &grid)?;
    for n in [2u64, 16, 64] {
        let mut acc = PhasorAccumulator::new(grid);
        for k in 0..n {
            acc.add_noise(&sample(&noise, &grid, SeedSpec::new(4, 0, k))?)?;
        }
        let delta = infidelity_series(&ensemble, &acc.finish()?)?;
        println!("N = {n:>2}: time-averaged infidelity {:.5}", delta.time_average());
    }
    Ok(())
}
