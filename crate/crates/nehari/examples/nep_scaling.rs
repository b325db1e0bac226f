//! Scaling laws of the nonlinear eigenvalue model: both extreme parameters
//! follow mu^((gamma-2)/(q-2)) exactly, and coupling mu = lambda produces two
//! crossing values with closed forms.
//!
//! ```bash
//! cargo run --release --example nep_scaling
//! ```

use nehari::extremal::{maximize_lambda, nep_crossings, nep_scaling_constants, OptimizerOptions};
use nehari::model::{Grid, ModelSpec};

fn main() -> nehari::Result<()> {
    let grid = Grid::unit_interval(100)?;
    let (gamma, q) = (4.0, 3.0);
    let opts = OptimizerOptions {
        seed: 21,
        ..OptimizerOptions::default()
    };

    let base = ModelSpec::nep(gamma, q, 1.0, grid)?;
    let scaling = nep_scaling_constants(&base, &opts)?;
    println!("mu-free quotient supremum M = {:.9e}", scaling.m_sup);
    println!("power-law exponent (gamma-2)/(q-2) = {}\n", (gamma - 2.0) / (q - 2.0));

    println!(
        "{:>6} {:>18} {:>18} {:>10}",
        "mu", "lambda0* (direct)", "lambda0* (law)", "rel diff"
    );
    for mu in [0.5, 1.0, 2.0, 4.0] {
        let spec = ModelSpec::nep(gamma, q, mu, grid)?;
        let direct = maximize_lambda(&spec, &opts)?.lambda0_star;
        let law = scaling.lambda0_star(mu);
        println!(
            "{mu:>6} {direct:>18.9e} {law:>18.9e} {:>10.2e}",
            (direct - law).abs() / law
        );
    }

    let cross = nep_crossings(&scaling)?;
    println!("\ncoupling mu = lambda:");
    println!("  mu0      = {:.9e}  (solves mu = lambda*(mu); no nonzero solutions below it)", cross.mu0);
    println!("  lambda_* = {:.9e}  (solves mu = lambda0*(mu); global minimizer regime above it)", cross.lambda_star_cross);
    println!(
        "  fixed-point residuals: {:.1e}, {:.1e}",
        (scaling.lambda_star(cross.mu0) - cross.mu0).abs() / cross.mu0,
        (scaling.lambda0_star(cross.lambda_star_cross) - cross.lambda_star_cross).abs()
            / cross.lambda_star_cross
    );
    Ok(())
}
