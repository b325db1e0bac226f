//! Runtime verification of the structural hypotheses on both model backends:
//! positivity, exact homogeneity, Euler identities, gradient consistency, and
//! the sampled coercivity/embedding/compatibility constants.
//!
//! ```bash
//! cargo run --example hypothesis_check
//! ```

use nehari::model::{verify_hypotheses, Grid, ModelSpec};

fn main() -> nehari::Result<()> {
    let models = [
        ModelSpec::kirchhoff(1.0, 3.0, Grid::unit_interval(200)?)?,
        ModelSpec::kirchhoff(2.0, 2.5, Grid::unit_square(16)?)?,
        ModelSpec::nep(4.0, 3.0, 1.0, Grid::unit_interval(200)?)?,
        ModelSpec::nep(3.5, 2.5, 0.7, Grid::unit_square(16)?)?,
    ];
    for spec in models {
        let (constants, report) = verify_hypotheses(&spec, 300, 2024)?;
        println!("{}", spec.id());
        println!("  samples                 {}", report.samples);
        println!("  coercivity  C1          {:.6e}", constants.c1);
        println!("  embedding   C2          {:.6e}", constants.c2);
        println!("  compat quotient bound   {:.6e}", constants.c_e3);
        println!("  max homogeneity error   {:.2e}", report.max_homogeneity_err);
        println!("  max Euler error         {:.2e}", report.max_euler_err);
        println!("  max gradient error      {:.2e}", report.max_gradient_err);
    }
    println!("all hypotheses hold; the discrete functionals are exactly homogeneous.");
    Ok(())
}
