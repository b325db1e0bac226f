//! The Kirchhoff extreme parameter computed twice: once by ascending the
//! general Rayleigh quotient, once through the Sobolev-quotient shortcut that
//! the structure T = P^2/a^2 enables. Both routes must agree, and the mesh
//! refinement study shows the O(h^2) approach to the continuum value.
//!
//! ```bash
//! cargo run --release --example extremal_two_routes
//! ```

use nehari::extremal::{maximize_lambda, sobolev_route_lambda_star, OptimizerOptions};
use nehari::model::{Grid, ModelSpec};

fn main() -> nehari::Result<()> {
    let opts = OptimizerOptions {
        seed: 7,
        ..OptimizerOptions::default()
    };
    println!("{:>6} {:>22} {:>22} {:>12} {:>8}", "n", "lambda* (ascent)", "lambda* (sobolev)", "rel diff", "iters");
    let mut stars = Vec::new();
    for n in [50, 100, 200, 400] {
        let spec = ModelSpec::kirchhoff(1.0, 3.0, Grid::unit_interval(n)?)?;
        let report = maximize_lambda(&spec, &opts)?;
        let via_sobolev = sobolev_route_lambda_star(&spec, &opts)?;
        let rel = (report.lambda_star - via_sobolev).abs() / report.lambda_star;
        println!(
            "{n:>6} {:>22.15e} {:>22.15e} {rel:>12.2e} {:>8}",
            report.lambda_star, via_sobolev, report.iterations
        );
        stars.push(report.lambda_star);
    }
    println!("\nsuccessive differences (expect ~4x shrink per doubling, O(h^2)):");
    for w in stars.windows(2) {
        println!("  {:+.3e}", w[1] - w[0]);
    }
    Ok(())
}
