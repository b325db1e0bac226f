//! Full bifurcation diagram of the Kirchhoff model: sweep lambda through both
//! thresholds and past the fold, write the diagram CSV plus per-branch
//! gnuplot data, and summarize the regimes.
//!
//! ```bash
//! cargo run --release --example bifurcation_diagram
//! gnuplot -e "plot 'diagram_example_plus.dat' w l, 'diagram_example_minus.dat' w l; pause -1"
//! ```

use std::io::Write;

use nehari::bifurcation::{nonexistence_probe, sweep, SweepConfig};
use nehari::extremal::{maximize_lambda, OptimizerOptions};
use nehari::io::format_float;
use nehari::model::{Grid, ModelSpec};

fn main() -> nehari::Result<()> {
    let spec = ModelSpec::kirchhoff(1.0, 3.0, Grid::unit_interval(150)?)?;
    let opts = OptimizerOptions {
        seed: 9,
        ..OptimizerOptions::default()
    };
    let ext = maximize_lambda(&spec, &opts)?;
    let config = SweepConfig::new(spec, opts);
    let diagram = sweep(&config, &ext)?;

    let mut csv = std::io::BufWriter::new(std::fs::File::create("diagram_example.csv")?);
    writeln!(csv, "lambda,energy_plus,energy_minus,exists")?;
    let mut plus = std::io::BufWriter::new(std::fs::File::create("diagram_example_plus.dat")?);
    let mut minus = std::io::BufWriter::new(std::fs::File::create("diagram_example_minus.dat")?);
    for r in &diagram.records {
        let fmt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{}",
            format_float(r.lambda),
            fmt(r.plus.map(|b| b.energy)),
            fmt(r.minus.map(|b| b.energy)),
            r.exists
        )?;
        if let Some(b) = r.plus {
            writeln!(plus, "{} {}", format_float(r.lambda), format_float(b.energy))?;
        }
        if let Some(b) = r.minus {
            writeln!(minus, "{} {}", format_float(r.lambda), format_float(b.energy))?;
        }
    }

    println!("model {}", config.model.id());
    println!("lambda0* = {:.6e}  (plus-branch energy changes sign here)", diagram.lambda0_star);
    println!("lambda*  = {:.6e}  (branches fold here)", diagram.lambda_star);
    if let Some((lo, hi)) = diagram.lambda_b_bracket {
        println!("turning point bracket at grid resolution: ({lo:.6e}, {hi:.6e})");
    }
    if let (Some(pred), Some(obs)) = (diagram.limit_energy_predicted, diagram.limit_energy_observed) {
        println!("fold energy: closed form {pred:.6e}, last observed {obs:.6e}");
    }
    let probe = nonexistence_probe(&config.model, 1.05 * ext.lambda_star, 200, 9, Some(&ext.maximizer))?;
    println!(
        "past the fold (1.05 lambda*): {} of {} sampled rays admit no Nehari point",
        probe.case_iii, probe.directions
    );
    println!("wrote diagram_example.csv, diagram_example_plus.dat, diagram_example_minus.dat");
    Ok(())
}
