//! Root-mean-square error of G_N against the ensemble G, and its log-log
//! slope in N.
//!
//! cargo run --release --example convergence

use undersampling::harness::{decoherence_rms_error, RunOptions};
use undersampling::stats::linear_fit;
use undersampling::{NoiseParams, OuInit, Result, TimeGrid};

fn main() -> Result<()> {
    let grid = TimeGrid::new(8.0, 0.01)?;
    let ns = [4usize, 16, 64, 256, 1024];
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    for noise in [NoiseParams::rtn(4.0), NoiseParams::ou(4.0, OuInit::StationaryDraw)] {
        let mut y = Vec::new();
        for &n in &ns {
            let e = decoherence_rms_error(&noise, &grid, n, 200, 5, RunOptions::default())?;
            println!("{} N = {n:>4}: max rms |G_N - G| = {e:.5}", noise.kind);
            y.push(e.ln());
        }
        println!("{} slope: {:.3}", noise.kind, linear_fit(&x, &y).0);
    }
    Ok(())
}
