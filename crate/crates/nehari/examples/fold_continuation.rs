//! Continuation of both branches into the fold at lambda*: the energies merge
//! and P approaches the degenerate value, both matching their closed forms.
//!
//! ```bash
//! cargo run --release --example fold_continuation
//! ```

use nehari::bifurcation::n0_degenerate_solve;
use nehari::extremal::{maximize_lambda, OptimizerOptions};
use nehari::model::{Grid, ModelSpec};

fn main() -> nehari::Result<()> {
    let spec = ModelSpec::kirchhoff(1.0, 3.0, Grid::unit_interval(150)?)?;
    let opts = OptimizerOptions {
        seed: 13,
        ..OptimizerOptions::default()
    };
    let ext = maximize_lambda(&spec, &opts)?;
    let fold = n0_degenerate_solve(&spec, &ext, &opts)?;

    println!("model {}, lambda* = {:.9e}", spec.id(), fold.lambda_star);
    println!(
        "closed forms at the fold: energy {:.9e}, P {:.9e}\n",
        fold.energy_limit_predicted, fold.p_limit_predicted
    );
    println!(
        "{:>3} {:>16} {:>16} {:>16} {:>12} {:>12}",
        "k", "lambda/lambda*", "E+", "E-", "gap", "P- rel err"
    );
    for s in &fold.steps {
        println!(
            "{:>3} {:>16.12} {:>16.8e} {:>16.8e} {:>12.2e} {:>12.2e}",
            s.k,
            s.lambda / fold.lambda_star,
            s.energy_plus,
            s.energy_minus,
            (s.energy_plus - s.energy_minus).abs() / s.energy_minus,
            (s.p_minus - fold.p_limit_predicted).abs() / fold.p_limit_predicted
        );
    }
    let last = fold.steps.last().unwrap();
    println!(
        "\nfinal step: energy within {:.2}% of the closed form, P within {:.2}%",
        100.0 * (last.energy_minus - fold.energy_limit_predicted).abs() / fold.energy_limit_predicted,
        100.0 * (last.p_minus - fold.p_limit_predicted).abs() / fold.p_limit_predicted
    );
    Ok(())
}
