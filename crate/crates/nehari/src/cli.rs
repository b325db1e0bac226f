//! Command-line surface: `fiber`, `extremal`, `solve`, `sweep`, `check`.
//!
//! Every run writes CSV files stamped with the manifest hash plus a
//! human-readable summary on stdout, and exits 0 on success, 2 on validation
//! errors, 3 on non-convergence, 4 on hypothesis violations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bifurcation::{nonexistence_probe, sweep, DiagramReport};
use crate::error::Result;
use crate::extremal::{maximize_lambda, nep_crossings, nep_scaling_constants, ExtremalReport};
use crate::fiber::{
    classify_fiber, DegeneracyTolerance, Exponents, FiberCase, FiberCoefficients, rayleigh_values,
};
use crate::io::config::{grid_spec_summary, parse_config, ParsedConfig};
use crate::io::manifest::RunManifest;
use crate::io::{format_float, write_csv, write_grid_function};
use crate::model::{verify_hypotheses, ModelSpec};
use crate::solver::{minimize_branch, verify_solution, BranchId, SolveHints};

const AFTER_HELP: &str = "\
Config file format (plain text, key = value):

  [model]
  model = kirchhoff | nep     (default kirchhoff)
  a = 1.0                     (kirchhoff stiffness, requires a > 0)
  q = 3.0                     (kirchhoff: 2 < q < 4; nep: 2 < q < gamma)
  gamma = 4.0, mu = 1.0       (nep only)
  dim = 1 | 2, n = 200, side = 1.0

  [optimizer]
  max_iter = 5000, grad_tol = 1e-9, restarts = 8, seed = 0,
  init_step = 1.0, shrink = 0.5, armijo = 1e-4, threads = 1

  [sweep]
  grid = geometric | linear | explicit   (default geometric)
  count = 64, lo = 0.05, hi = 1.10       (bounds in multiples of lambda*)
  lambdas = 0.1,0.2,...                  (explicit grid)
  margin = 0.10, warm_start = true

Inline overrides: --set section.key=value (repeatable). The default worker
thread count can also be set through the NEHARI_THREADS environment variable;
--threads wins over it. Exit codes: 0 ok, 2 validation error, 3
non-convergence, 4 hypothesis violation.";

#[derive(Parser)]
#[command(name = "nehari", version, about = "Fiber maps, extremal parameters and Nehari branch solvers on Dirichlet grids", after_long_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one fiber map and report its closed-form Rayleigh data
    Fiber(FiberArgs),
    /// Estimate the extreme parameters lambda0* and lambda* for a model
    Extremal(ExtremalArgs),
    /// Solve one branch at a fixed lambda
    Solve(SolveArgs),
    /// Sweep lambda and emit the bifurcation diagram
    Sweep(SweepArgs),
    /// Verify the structural hypotheses on random samples
    Check(CheckArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the config file (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline override, section.key=value (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for independent restarts
    #[arg(long)]
    threads: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ParsedConfig> {
        let mut cfg = parse_config(self.config.as_deref(), &self.set)?;
        let threads = self
            .threads
            .or_else(|| {
                std::env::var("NEHARI_THREADS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or(cfg.optimizer.threads);
        cfg.optimizer.threads = threads;
        cfg.sweep.solver_opts.threads = threads;
        Ok(cfg)
    }
}

#[derive(Args)]
struct FiberArgs {
    #[arg(long = "A")]
    a: f64,
    #[arg(long = "B")]
    b: f64,
    #[arg(long = "C")]
    c: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    lambda: f64,
    /// Degeneracy band relative to A
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output CSV path
    #[arg(long, default_value = "fiber.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ExtremalArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output CSV path
    #[arg(long, default_value = "extremal.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    lambda: f64,
    /// plus or minus
    #[arg(long)]
    branch: BranchId,
    /// Overrides [optimizer] seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path for the report row
    #[arg(long, default_value = "solve.csv")]
    out: PathBuf,
    /// Output CSV path for the solution field
    #[arg(long, default_value = "solve_field.csv")]
    field: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output CSV path for the diagram
    #[arg(long, default_value = "diagram.csv")]
    out: PathBuf,
    /// Additionally emit two-column (lambda, energy) data files per branch
    #[arg(long)]
    gnuplot: bool,
    /// Directions for the non-existence probe past lambda*
    #[arg(long, default_value_t = 200)]
    probe_directions: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Random samples
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Output CSV path
    #[arg(long, default_value = "check.csv")]
    out: PathBuf,
}

impl clap::builder::ValueParserFactory for BranchId {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<BranchId>().map_err(|e| e.to_string()))
    }
}

/// Entry point used by the binary; parses arguments, runs, maps errors to
/// the exit-code contract.
pub fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fiber(args) => run_fiber(args),
        Command::Extremal(args) => run_extremal(args),
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Check(args) => run_check(args),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest");
    PathBuf::from(s)
}

fn finish_manifest(mut manifest: RunManifest, outputs: &[&Path]) -> Result<()> {
    for o in outputs {
        manifest.add_output(o);
    }
    manifest.write(&manifest_path(outputs[0]))?;
    Ok(())
}

fn run_fiber(args: FiberArgs) -> Result<()> {
    let exps = Exponents::new(args.p, args.q, args.gamma)?;
    let coeffs = FiberCoefficients::new(args.a, args.b, args.c, args.lambda, exps)?;
    let cls = classify_fiber(&coeffs, DegeneracyTolerance(args.tol))?;
    let rv = rayleigh_values(args.a, args.b, args.c, &exps)?;

    let snapshot = format!(
        "A = {}\nB = {}\nC = {}\nlambda = {}\np = {}\nq = {}\ngamma = {}\ntol = {}\n",
        args.a, args.b, args.c, args.lambda, args.p, args.q, args.gamma, args.tol
    );
    let manifest = RunManifest::new("fiber", snapshot, 0);
    let hash = manifest.hash_hex();

    let (case, t_minus, t_plus, t_deg) = match cls.case {
        FiberCase::I { t_minus, t_plus } => ("I", Some(t_minus), Some(t_plus), None),
        FiberCase::II { t_deg } => ("II", None, None, Some(t_deg)),
        FiberCase::III => ("III", None, None, None),
    };
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    let header = "case,t_minus,t_plus,t_deg,margin,lambda_u,lambda0_u,t_u,t0_u";
    let row = format!(
        "{case},{},{},{},{},{},{},{},{}",
        opt(t_minus),
        opt(t_plus),
        opt(t_deg),
        format_float(cls.margin),
        format_float(rv.lambda_u),
        format_float(rv.lambda0_u),
        format_float(rv.t_u),
        format_float(rv.t0_u)
    );
    write_csv(&args.out, &hash, &[], header, &[row])?;
    finish_manifest(manifest, &[&args.out])?;

    println!("fiber case {case} at lambda = {}", args.lambda);
    match cls.case {
        FiberCase::I { t_minus, t_plus } => {
            println!("  roots: t_minus = {t_minus:.6}, t_plus = {t_plus:.6}");
        }
        FiberCase::II { t_deg } => println!("  degenerate point: t = {t_deg:.6}"),
        FiberCase::III => println!("  no critical points along this ray"),
    }
    println!(
        "  ray thresholds: lambda(u) = {:.6e}, lambda0(u) = {:.6e}",
        rv.lambda_u, rv.lambda0_u
    );
    println!("  wrote {}", args.out.display());
    Ok(())
}

fn extremal_csv_row(model: &ModelSpec, report: &ExtremalReport, seed: u64) -> (String, String) {
    let header = "model,lambda0_star,lambda_star,ratio_residual,iterations,seed";
    let row = format!(
        "{},{},{},{},{},{}",
        model.id(),
        format_float(report.lambda0_star),
        format_float(report.lambda_star),
        format_float(report.ratio_residual),
        report.iterations,
        seed
    );
    (header.to_string(), row)
}

fn run_extremal(args: ExtremalArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let manifest = RunManifest::new("extremal", cfg.snapshot.clone(), cfg.optimizer.seed);
    let hash = manifest.hash_hex();

    let report = maximize_lambda(&cfg.model, &cfg.optimizer)?;
    let (header, row) = extremal_csv_row(&cfg.model, &report, cfg.optimizer.seed);
    write_csv(&args.out, &hash, &[], &header, &[row])?;
    finish_manifest(manifest, &[&args.out])?;

    println!("model {}", cfg.model.id());
    println!(
        "  lambda0* = {:.12e}\n  lambda*  = {:.12e}",
        report.lambda0_star, report.lambda_star
    );
    println!(
        "  ratio residual {:.3e}, {} iterations, converged = {}",
        report.ratio_residual, report.iterations, report.converged
    );
    if let ModelSpec::Nep { mu, .. } = cfg.model {
        let scaling = nep_scaling_constants(&cfg.model, &cfg.optimizer)?;
        let crossings = nep_crossings(&scaling)?;
        println!(
            "  scaling: M = {:.6e}, lambda0*(mu)/mu^s coeff = {:.6e}, lambda*(mu)/mu^s coeff = {:.6e} (mu = {mu})",
            scaling.m_sup,
            scaling.lambda0_coeff * scaling.m_sup,
            scaling.lambda_coeff * scaling.m_sup
        );
        println!(
            "  crossings: mu0 = {:.6e} < lambda_* = {:.6e}",
            crossings.mu0, crossings.lambda_star_cross
        );
    }
    println!("  wrote {}", args.out.display());
    Ok(())
}

fn run_solve(args: SolveArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let mut opts = cfg.optimizer;
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let snapshot = format!(
        "{}lambda = {}\nbranch = {}\n",
        cfg.snapshot,
        args.lambda,
        args.branch.as_str()
    );
    let manifest = RunManifest::new("solve", snapshot, opts.seed);
    let hash = manifest.hash_hex();

    let extremal = maximize_lambda(&cfg.model, &opts)?;
    let hints = SolveHints {
        extremal: Some(&extremal),
        warm_start: None,
    };
    let report = minimize_branch(&cfg.model, args.lambda, args.branch, &opts, hints)?;
    let (constants, _) = verify_hypotheses(&cfg.model, 100, opts.seed)?;
    let diag = verify_solution(&cfg.model, &report, &constants)?;

    let header = "lambda,branch,energy,residual,nehari_residual,second_order_sign,p_val,t_val,q_val,h1_norm,iterations,converged";
    let row = format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        format_float(report.lambda),
        report.branch.as_str(),
        format_float(report.energy),
        format_float(report.residual),
        format_float(report.nehari_residual),
        format_float(report.second_order_sign),
        format_float(report.p_val),
        format_float(report.t_val),
        format_float(report.q_val),
        format_float(diag.h1_norm),
        report.iterations,
        report.converged
    );
    let comments = vec![format!(
        "model={} lambda0_star={} lambda_star={} seed={}",
        cfg.model.id(),
        format_float(extremal.lambda0_star),
        format_float(extremal.lambda_star),
        opts.seed
    )];
    write_csv(&args.out, &hash, &comments, header, &[row])?;
    write_grid_function(&args.field, &hash, &report.solution)?;
    finish_manifest(manifest, &[&args.out, &args.field])?;

    println!(
        "{} branch at lambda = {:.6e} ({} of lambda*)",
        report.branch.as_str(),
        report.lambda,
        format_ratio(report.lambda, extremal.lambda_star)
    );
    println!(
        "  energy = {:.12e}, residual = {:.3e}, nehari residual = {:.3e}",
        report.energy, report.residual, report.nehari_residual
    );
    println!(
        "  phi''(1) = {:.3e}, |u|_H1 = {:.6e} (lower bound {:.6e})",
        report.second_order_sign, diag.h1_norm, diag.norm_lower_bound
    );
    println!("  wrote {} and {}", args.out.display(), args.field.display());
    Ok(())
}

fn format_ratio(lambda: f64, lambda_star: f64) -> String {
    format!("{:.3}%", 100.0 * lambda / lambda_star)
}

fn diagram_rows(diagram: &DiagramReport) -> Vec<String> {
    let opt_field = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    diagram
        .records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                format_float(r.lambda),
                opt_field(r.plus.map(|b| b.energy)),
                opt_field(r.minus.map(|b| b.energy)),
                opt_field(r.plus.map(|b| b.p_val)),
                opt_field(r.minus.map(|b| b.p_val)),
                opt_field(r.plus.map(|b| b.residual)),
                opt_field(r.minus.map(|b| b.residual)),
                r.exists,
                r.fiber_case_at_maximizer.as_str()
            )
        })
        .collect()
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let manifest = RunManifest::new("sweep", cfg.snapshot.clone(), cfg.optimizer.seed);
    let hash = manifest.hash_hex();

    let extremal = maximize_lambda(&cfg.model, &cfg.optimizer)?;
    let diagram = sweep(&cfg.sweep, &extremal)?;

    let header = "lambda,energy_plus,energy_minus,p_plus,p_minus,residual_plus,residual_minus,exists,fiber_case";
    let comments = vec![format!(
        "model={} lambda0_star={} lambda_star={} seed={} grid={}",
        cfg.model.id(),
        format_float(diagram.lambda0_star),
        format_float(diagram.lambda_star),
        cfg.optimizer.seed,
        grid_spec_summary(&cfg.sweep.lambda_grid)
    )];
    write_csv(&args.out, &hash, &comments, header, &diagram_rows(&diagram))?;

    let mut outputs: Vec<PathBuf> = vec![args.out.clone()];
    if args.gnuplot {
        let stem = args.out.with_extension("");
        for (branch, pick) in [
            ("plus", 0usize),
            ("minus", 1usize),
        ] {
            let path = PathBuf::from(format!("{}_{branch}.dat", stem.display()));
            let rows: Vec<String> = diagram
                .records
                .iter()
                .filter_map(|r| {
                    let b = if pick == 0 { r.plus } else { r.minus };
                    b.map(|b| format!("{} {}", format_float(r.lambda), format_float(b.energy)))
                })
                .collect();
            let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
            use std::io::Write;
            writeln!(out, "# manifest {hash}")?;
            for row in rows {
                writeln!(out, "{row}")?;
            }
            outputs.push(path);
        }
    }

    // Certify the empty region just past lambda*.
    let probe = nonexistence_probe(
        &cfg.model,
        1.05 * extremal.lambda_star,
        args.probe_directions,
        cfg.optimizer.seed,
        Some(&extremal.maximizer),
    )?;

    let refs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
    finish_manifest(manifest, &refs)?;

    println!("model {}", cfg.model.id());
    println!(
        "  lambda0* = {:.6e}, lambda* = {:.6e}",
        diagram.lambda0_star, diagram.lambda_star
    );
    match diagram.lambda_b_bracket {
        Some((lo, hi)) => println!("  turning point bracket: ({lo:.6e}, {hi:.6e})"),
        None => println!("  no existing parameter found on the grid"),
    }
    if let (Some(pred), Some(obs)) = (diagram.limit_energy_predicted, diagram.limit_energy_observed)
    {
        println!(
            "  limit energy: predicted {:.6e}, observed {:.6e} ({:+.2}%)",
            pred,
            obs,
            100.0 * (obs - pred) / pred
        );
    }
    println!(
        "  non-existence probe at 1.05 lambda*: case III fraction {:.3} over {} rays",
        probe.case_iii_fraction, probe.directions
    );
    for o in &outputs {
        println!("  wrote {}", o.display());
    }
    Ok(())
}

fn run_check(args: CheckArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let manifest = RunManifest::new("check", cfg.snapshot.clone(), cfg.optimizer.seed);
    let hash = manifest.hash_hex();

    let (constants, report) = verify_hypotheses(&cfg.model, args.samples, cfg.optimizer.seed)?;

    let header =
        "model,samples,c1,c2,c_e3,max_homogeneity_err,max_euler_err,max_gradient_err,seed";
    let row = format!(
        "{},{},{},{},{},{},{},{},{}",
        cfg.model.id(),
        report.samples,
        format_float(constants.c1),
        format_float(constants.c2),
        format_float(constants.c_e3),
        format_float(report.max_homogeneity_err),
        format_float(report.max_euler_err),
        format_float(report.max_gradient_err),
        cfg.optimizer.seed
    );
    write_csv(&args.out, &hash, &[], header, &[row])?;
    finish_manifest(manifest, &[&args.out])?;

    println!("model {}: hypotheses hold on {} samples", cfg.model.id(), report.samples);
    println!(
        "  C1 = {:.6e}, C2 = {:.6e}, compatibility quotient <= {:.6e}",
        constants.c1, constants.c2, constants.c_e3
    );
    println!(
        "  max errors: homogeneity {:.2e}, Euler {:.2e}, gradient {:.2e}",
        report.max_homogeneity_err, report.max_euler_err, report.max_gradient_err
    );
    println!("  wrote {}", args.out.display());
    Ok(())
}
