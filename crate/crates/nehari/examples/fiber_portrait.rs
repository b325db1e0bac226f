//! Portrait of one fiber family: sweep lambda through the two thresholds and
//! watch the critical points appear, merge and vanish.
//!
//! ```bash
//! cargo run --example fiber_portrait
//! ```

use nehari::fiber::{
    classify_fiber, eval_fiber, rayleigh_values, DegeneracyTolerance, Exponents, FiberCase,
    FiberCoefficients,
};

fn main() -> nehari::Result<()> {
    let exps = Exponents::new(2.0, 3.0, 4.0)?;
    let (a, b, c) = (1.0, 1.0, 1.0);
    let rv = rayleigh_values(a, b, c, &exps)?;
    println!("unit coefficients, exponents (p, q, gamma) = (2, 3, 4)");
    println!("zero-energy parameter lambda0(u) = {:.6} (touch at t0 = {:.3})", rv.lambda0_u, rv.t0_u);
    println!("degenerate parameter  lambda(u)  = {:.6} (fold at t  = {:.3})", rv.lambda_u, rv.t_u);
    println!("ratio lambda/lambda0 = {:.6} = (q/gamma)(q/p)^((gamma-q)/(q-p))\n", rv.lambda_u / rv.lambda0_u);

    println!("{:>10} {:>6} {:>12} {:>12} {:>14} {:>14}", "lambda", "case", "t_minus", "t_plus", "phi(t_minus)", "phi(t_plus)");
    for frac in [0.3, 0.6, 0.8, 0.888889, 0.95, 1.0, 1.05, 1.2] {
        let lambda = frac * rv.lambda_u;
        let coeffs = FiberCoefficients::new(a, b, c, lambda, exps)?;
        let cls = classify_fiber(&coeffs, DegeneracyTolerance::default())?;
        match cls.case {
            FiberCase::I { t_minus, t_plus } => {
                println!(
                    "{lambda:>10.6} {:>6} {t_minus:>12.6} {t_plus:>12.6} {:>14.6} {:>14.6}",
                    "I",
                    eval_fiber(&coeffs, t_minus)?,
                    eval_fiber(&coeffs, t_plus)?,
                );
            }
            FiberCase::II { t_deg } => {
                println!(
                    "{lambda:>10.6} {:>6} {t_deg:>12.6} {t_deg:>12.6} {:>14.6} {:>14.6}",
                    "II",
                    eval_fiber(&coeffs, t_deg)?,
                    eval_fiber(&coeffs, t_deg)?,
                );
            }
            FiberCase::III => {
                println!("{lambda:>10.6} {:>6} {:>12} {:>12} {:>14} {:>14}", "III", "-", "-", "-", "-");
            }
        }
    }
    println!("\nbelow lambda(u) the fiber has a maximum/minimum pair; at lambda(u)");
    println!("they merge into one degenerate point; above it the map is monotone.");
    println!("the local minimum value crosses zero exactly at lambda0(u) = {:.6}.", rv.lambda0_u);
    Ok(())
}
