//! Parameter sweeps, the empirical turning point, non-existence probes and
//! fold continuation.
//!
//! A sweep walks a `lambda` grid, solving both branches at each point with
//! warm starts from the previous solutions, and assembles the data behind a
//! bifurcation diagram: branch energies, existence flags, the last parameter
//! at which anything converged (the empirical turning point, reported as a
//! bracket at grid resolution, never as a point estimate), and — for models
//! with the structural identity `T = C3 P^(gamma/p)` — the closed-form limit
//! energy the merged branches must approach.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extremal::ExtremalReport;
use crate::fiber::{classify_fiber, DegeneracyTolerance, FiberCase};
use crate::model::{sample_field, GridFunction, ModelSpec};
use crate::optim::OptimizerOptions;
use crate::solver::{
    minimize_branch, n0_degenerate_p, n0_energy_ceiling, BranchId, SolveHints, SolveReport,
};

/// Lambda grid of a sweep; bounds are multiples of the `lambda*` estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaGrid {
    Explicit(Vec<f64>),
    Geometric {
        count: usize,
        lo_mult: f64,
        hi_mult: f64,
    },
    Linear {
        count: usize,
        lo_mult: f64,
        hi_mult: f64,
    },
}

impl LambdaGrid {
    fn materialize(&self, lambda_star: f64) -> Result<Vec<f64>> {
        let grid = match self {
            LambdaGrid::Explicit(v) => v.clone(),
            LambdaGrid::Geometric {
                count,
                lo_mult,
                hi_mult,
            } => {
                check_bounds(*count, *lo_mult, *hi_mult)?;
                let (lo, hi) = (lo_mult * lambda_star, hi_mult * lambda_star);
                let ratio = (hi / lo).powf(1.0 / (*count as f64 - 1.0));
                (0..*count).map(|k| lo * ratio.powi(k as i32)).collect()
            }
            LambdaGrid::Linear {
                count,
                lo_mult,
                hi_mult,
            } => {
                check_bounds(*count, *lo_mult, *hi_mult)?;
                let (lo, hi) = (lo_mult * lambda_star, hi_mult * lambda_star);
                let step = (hi - lo) / (*count as f64 - 1.0);
                (0..*count).map(|k| lo + step * k as f64).collect()
            }
        };
        if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|&l| l <= 0.0) {
            return Err(Error::Config(
                "lambda grid must be positive and strictly ascending".into(),
            ));
        }
        Ok(grid)
    }
}

fn check_bounds(count: usize, lo: f64, hi: f64) -> Result<()> {
    if count < 2 || !(0.0 < lo && lo < hi) {
        return Err(Error::Config(format!(
            "grid spec requires count >= 2 and 0 < lo < hi, got count={count}, lo={lo}, hi={hi}"
        )));
    }
    Ok(())
}

/// Sweep configuration. The default grid resolves both the zero-energy sign
/// change and the turning region: 64 geometric points on
/// `[0.05, 1 + margin] * lambda*` with `margin = 0.10`.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub model: ModelSpec,
    pub lambda_grid: LambdaGrid,
    pub solver_opts: OptimizerOptions,
    /// Relative overshoot past `lambda*` in the default grid.
    pub margin: f64,
    /// Warm-start each parameter from the previous solutions (sequential).
    pub warm_start: bool,
}

impl SweepConfig {
    pub fn new(model: ModelSpec, solver_opts: OptimizerOptions) -> Self {
        let margin = 0.10;
        Self {
            model,
            lambda_grid: LambdaGrid::Geometric {
                count: 64,
                lo_mult: 0.05,
                hi_mult: 1.0 + margin,
            },
            solver_opts,
            margin,
            warm_start: true,
        }
    }
}

/// Compact per-branch summary inside a record.
#[derive(Debug, Clone, Copy)]
pub struct BranchSummary {
    pub energy: f64,
    pub p_val: f64,
    pub residual: f64,
}

impl From<&SolveReport> for BranchSummary {
    fn from(r: &SolveReport) -> Self {
        BranchSummary {
            energy: r.energy,
            p_val: r.p_val,
            residual: r.residual,
        }
    }
}

/// Fiber shape tag for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberCaseTag {
    I,
    II,
    III,
}

impl FiberCaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FiberCaseTag::I => "I",
            FiberCaseTag::II => "II",
            FiberCaseTag::III => "III",
        }
    }
}

impl From<&FiberCase> for FiberCaseTag {
    fn from(c: &FiberCase) -> Self {
        match c {
            FiberCase::I { .. } => FiberCaseTag::I,
            FiberCase::II { .. } => FiberCaseTag::II,
            FiberCase::III => FiberCaseTag::III,
        }
    }
}

/// One sweep point.
#[derive(Debug, Clone)]
pub struct BifurcationRecord {
    pub lambda: f64,
    pub plus: Option<BranchSummary>,
    pub minus: Option<BranchSummary>,
    pub exists: bool,
    pub fiber_case_at_maximizer: FiberCaseTag,
}

/// Assembled sweep output.
#[derive(Debug, Clone)]
pub struct DiagramReport {
    pub lambda0_star: f64,
    pub lambda_star: f64,
    /// Largest grid parameter at which a branch converged.
    pub lambda_b_empirical: Option<f64>,
    /// `(last existing, first non-existing)` grid bracket around the turning
    /// point; the upper end is infinite when nothing beyond existed.
    pub lambda_b_bracket: Option<(f64, f64)>,
    /// Closed-form limit energy at `lambda*`, present when the model carries
    /// the structural identity.
    pub limit_energy_predicted: Option<f64>,
    /// Minus-branch energy at the largest existing parameter.
    pub limit_energy_observed: Option<f64>,
    pub records: Vec<BifurcationRecord>,
}

fn classify_at_maximizer(
    spec: &ModelSpec,
    maximizer: &GridFunction,
    lambda: f64,
) -> Result<FiberCaseTag> {
    let me = spec.eval_triple(maximizer)?;
    let coeffs = me.fiber_coefficients(lambda, spec.exponents())?;
    let cls = classify_fiber(&coeffs, DegeneracyTolerance::default())?;
    Ok(FiberCaseTag::from(&cls.case))
}

/// Runs both branches across the grid and assembles the diagram.
///
/// Individual parameter failures are recorded, not fatal; the sweep is
/// sequential by contract when warm starts are on.
pub fn sweep(config: &SweepConfig, extremal: &ExtremalReport) -> Result<DiagramReport> {
    let spec = &config.model;
    let grid = config.lambda_grid.materialize(extremal.lambda_star)?;
    let exps = spec.exponents();

    let mut records = Vec::with_capacity(grid.len());
    let mut warm_plus: Option<GridFunction> = None;
    let mut warm_minus: Option<GridFunction> = None;
    let mut lambda_b = None;
    let mut first_gap_after_b = None;
    let mut limit_energy_observed = None;

    for &lambda in &grid {
        let solve = &mut |branch: BranchId, warm: &mut Option<GridFunction>| {
            let hints = SolveHints {
                extremal: Some(extremal),
                warm_start: if config.warm_start { warm.as_ref() } else { None },
            };
            match minimize_branch(spec, lambda, branch, &config.solver_opts, hints) {
                Ok(report) => {
                    *warm = Some(report.solution.clone());
                    Some(report)
                }
                Err(_) => {
                    *warm = None;
                    None
                }
            }
        };
        let plus = solve(BranchId::Plus, &mut warm_plus);
        let minus = solve(BranchId::Minus, &mut warm_minus);
        let exists = plus.is_some() || minus.is_some();
        if exists {
            lambda_b = Some(lambda);
            first_gap_after_b = None;
            if let Some(m) = &minus {
                limit_energy_observed = Some(m.energy);
            }
        } else if first_gap_after_b.is_none() {
            first_gap_after_b = Some(lambda);
        }
        records.push(BifurcationRecord {
            lambda,
            plus: plus.as_ref().map(BranchSummary::from),
            minus: minus.as_ref().map(BranchSummary::from),
            exists,
            fiber_case_at_maximizer: classify_at_maximizer(spec, &extremal.maximizer, lambda)?,
        });
    }

    let limit_energy_predicted = spec
        .structural_constant()
        .map(|c3| n0_energy_ceiling(&exps, c3, extremal.lambda_star));
    let lambda_b_bracket =
        lambda_b.map(|b| (b, first_gap_after_b.unwrap_or(f64::INFINITY)));

    Ok(DiagramReport {
        lambda0_star: extremal.lambda0_star,
        lambda_star: extremal.lambda_star,
        lambda_b_empirical: lambda_b,
        lambda_b_bracket,
        limit_energy_predicted,
        limit_energy_observed,
        records,
    })
}

/// Outcome of a non-existence probe at one parameter.
#[derive(Debug, Clone, Copy)]
pub struct ProbeReport {
    pub lambda: f64,
    pub directions: usize,
    pub case_i: usize,
    pub case_ii: usize,
    pub case_iii: usize,
    /// Fraction of sampled rays with no Nehari point. 1.0 certifies that the
    /// Nehari set misses every sampled ray — the computable shadow of
    /// non-existence past `lambda*`.
    pub case_iii_fraction: f64,
    /// Classification of the maximizer ray, when one was supplied.
    pub maximizer_case: Option<FiberCaseTag>,
}

/// Classifies the fibers of random rays (plus the maximizer ray) at `lambda`.
pub fn nonexistence_probe(
    spec: &ModelSpec,
    lambda: f64,
    directions: usize,
    seed: u64,
    maximizer: Option<&GridFunction>,
) -> Result<ProbeReport> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidModel(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let grid = spec.grid();
    let exps = spec.exponents();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; 3];
    let mut tally = |u: &GridFunction| -> Result<FiberCaseTag> {
        let me = spec.eval_triple(u)?;
        let coeffs = me.fiber_coefficients(lambda, exps)?;
        let cls = classify_fiber(&coeffs, DegeneracyTolerance::default())?;
        let tag = FiberCaseTag::from(&cls.case);
        match tag {
            FiberCaseTag::I => counts[0] += 1,
            FiberCaseTag::II => counts[1] += 1,
            FiberCaseTag::III => counts[2] += 1,
        }
        Ok(tag)
    };
    for _ in 0..directions {
        let u = sample_field(grid, &mut rng);
        tally(&u)?;
    }
    let maximizer_case = match maximizer {
        Some(m) => Some(tally(m)?),
        None => None,
    };
    let total = directions + maximizer.map_or(0, |_| 1);
    Ok(ProbeReport {
        lambda,
        directions: total,
        case_i: counts[0],
        case_ii: counts[1],
        case_iii: counts[2],
        case_iii_fraction: counts[2] as f64 / total as f64,
        maximizer_case,
    })
}

/// One step of the fold continuation.
#[derive(Debug, Clone, Copy)]
pub struct FoldStep {
    pub k: usize,
    pub lambda: f64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub p_minus: f64,
}

/// Continuation of both branches into the fold at `lambda*`.
#[derive(Debug, Clone)]
pub struct FoldReport {
    pub lambda_star: f64,
    pub steps: Vec<FoldStep>,
    /// Closed-form `P` limit on the degenerate component at `lambda*`.
    pub p_limit_predicted: f64,
    /// Closed-form limit energy at `lambda*`.
    pub energy_limit_predicted: f64,
    /// Relative gap `|E+ - E-| / E-` at the last step.
    pub merged_gap: f64,
    /// The minus-branch report of the last step.
    pub last_minus: SolveReport,
}

/// Continues the branches toward `lambda*` along `lambda_k = lambda* (1 - 2^-k)`,
/// `k = 1..=20`, warm-starting every step, and checks the approach to the
/// closed-form fold values.
///
/// Requires the structural identity `T = C3 P^(gamma/p)`; it is verified on
/// random samples before the continuation starts. Losing convergence before
/// `k = 5` is a continuation failure.
pub fn n0_degenerate_solve(
    spec: &ModelSpec,
    extremal: &ExtremalReport,
    opts: &OptimizerOptions,
) -> Result<FoldReport> {
    let Some(c3) = spec.structural_constant() else {
        return Err(Error::InvalidModel(
            "fold continuation requires the structural identity T = C3 P^(gamma/p)".into(),
        ));
    };
    // Confirm the identity numerically before trusting the closed forms.
    let exps = spec.exponents();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x5eed));
    for _ in 0..5 {
        let u = sample_field(spec.grid(), &mut rng);
        let me = spec.eval_triple(&u)?;
        let predicted = c3 * me.p_val.powf(exps.gamma() / exps.p());
        if (me.t_val - predicted).abs() > 1e-12 * me.t_val.max(predicted) {
            return Err(Error::InvalidModel(format!(
                "structural identity violated: T = {:e} vs C3 P^(g/p) = {predicted:e}",
                me.t_val
            )));
        }
    }

    let lambda_star = extremal.lambda_star;
    let mut steps = Vec::new();
    let mut warm_plus: Option<GridFunction> = None;
    let mut warm_minus: Option<GridFunction> = None;
    let mut last_minus: Option<SolveReport> = None;

    for k in 1..=20usize {
        let lambda = lambda_star * (1.0 - 2f64.powi(-(k as i32)));
        let hints_minus = SolveHints {
            extremal: Some(extremal),
            warm_start: warm_minus.as_ref(),
        };
        let minus = match minimize_branch(spec, lambda, BranchId::Minus, opts, hints_minus) {
            Ok(r) => r,
            Err(_) if k > 5 => break,
            Err(_) => return Err(Error::ContinuationFailure { step: k }),
        };
        let hints_plus = SolveHints {
            extremal: Some(extremal),
            warm_start: warm_plus.as_ref(),
        };
        let plus = match minimize_branch(spec, lambda, BranchId::Plus, opts, hints_plus) {
            Ok(r) => r,
            Err(_) if k > 5 => break,
            Err(_) => return Err(Error::ContinuationFailure { step: k }),
        };
        warm_minus = Some(minus.solution.clone());
        warm_plus = Some(plus.solution.clone());
        steps.push(FoldStep {
            k,
            lambda,
            energy_plus: plus.energy,
            energy_minus: minus.energy,
            p_minus: minus.p_val,
        });
        last_minus = Some(minus);
    }

    let last_minus = last_minus.ok_or(Error::ContinuationFailure { step: 1 })?;
    let last = *steps.last().expect("at least one step recorded");
    let merged_gap = (last.energy_plus - last.energy_minus).abs() / last.energy_minus.abs();
    Ok(FoldReport {
        lambda_star,
        steps,
        p_limit_predicted: n0_degenerate_p(&exps, c3, lambda_star),
        energy_limit_predicted: n0_energy_ceiling(&exps, c3, lambda_star),
        merged_gap,
        last_minus,
    })
}
