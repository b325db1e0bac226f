//! Branch solutions at fixed `lambda` by fibering reduction.
//!
//! A direction `v` on the unit sphere whose fiber is case I carries exactly
//! two Nehari points: the local-maximum scale `t_minus v` (second fiber
//! derivative negative) and the local-minimum scale `t_plus v` (positive).
//! Scaling onto a root and minimizing the resulting reduced energy over
//! directions yields the two branches: the plus branch holds the energy
//! minimizer `u_lambda`, the minus branch the ground state over the
//! negative-curvature Nehari component, reported here as the proxy for the
//! second (min-max) solution and never conflated with a path-minimax level.
//!
//! Because the fiber root is itself a critical point of the fiber, the
//! reduced gradient collapses to the full energy gradient at the projected
//! point scaled by the root (no root-derivative terms), and homogeneity turns
//! one triple evaluation per direction into both the value and the gradient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extremal::ExtremalReport;
use crate::fiber::{classify_fiber, eval_fiber_derivatives, DegeneracyTolerance, FiberCase};
use crate::model::{
    h1_norm, principal_eigenvector, sample_field, GridFunction, ModelConstants, ModelEval,
    ModelSpec,
};
use crate::optim::{best_outcome, minimize_on_sphere, EvalPoint, OptimizerOptions};

/// Which Nehari component a solve targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchId {
    /// Positive second fiber derivative: the `u_lambda` branch.
    Plus,
    /// Negative second fiber derivative: the ground state over the negative
    /// component, standing in for the min-max solution.
    Minus,
}

impl BranchId {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchId::Plus => "plus",
            BranchId::Minus => "minus",
        }
    }
}

impl std::str::FromStr for BranchId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(BranchId::Plus),
            "minus" | "-" => Ok(BranchId::Minus),
            other => Err(Error::Config(format!(
                "unknown branch '{other}', expected plus or minus"
            ))),
        }
    }
}

/// A converged (or best-effort) branch solution with its certificates.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub lambda: f64,
    pub branch: BranchId,
    /// The scaled solution on the Nehari set.
    pub solution: GridFunction,
    pub energy: f64,
    /// Scale-normalized full-space gradient norm of the energy.
    pub residual: f64,
    /// `|P + lambda T - Q| / Q` at the solution.
    pub nehari_residual: f64,
    /// Second fiber derivative at unit scale along the solution ray.
    pub second_order_sign: f64,
    pub converged: bool,
    pub p_val: f64,
    pub t_val: f64,
    pub q_val: f64,
    pub iterations: usize,
}

/// Optional context that sharpens a solve: the extremal report supplies the
/// maximizer ray (the only surviving case-I direction near `lambda*`) and the
/// zero-energy threshold for the sign check on the plus branch; a warm start
/// carries the previous solution of a sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveHints<'a> {
    pub extremal: Option<&'a ExtremalReport>,
    pub warm_start: Option<&'a GridFunction>,
}

/// Scales `u` onto the Nehari set along its own ray.
///
/// Returns the scaled function and the fiber root used. Case III rays admit
/// no projection; case II is reported as a degenerate direction.
pub fn project_to_nehari(
    spec: &ModelSpec,
    u: &GridFunction,
    lambda: f64,
    branch: BranchId,
) -> Result<(GridFunction, f64)> {
    if u.is_zero() {
        return Err(Error::InvalidModel(
            "cannot project the zero field onto the Nehari set".into(),
        ));
    }
    let me = spec.eval_triple(u)?;
    let coeffs = me.fiber_coefficients(lambda, spec.exponents())?;
    let cls = classify_fiber(&coeffs, DegeneracyTolerance::default())?;
    match cls.case {
        FiberCase::I { t_minus, t_plus } => {
            let t = match branch {
                BranchId::Plus => t_plus,
                BranchId::Minus => t_minus,
            };
            Ok((u.scaled(t), t))
        }
        FiberCase::II { .. } => Err(Error::DegenerateDirection { lambda }),
        FiberCase::III => Err(Error::NoProjection { lambda }),
    }
}

/// Reduced branch energy and gradient at a direction `v`.
///
/// With `t` the branch root of the fiber through `v`,
/// `J(v) = Phi_lambda(t v)` and, by the envelope property and homogeneity,
/// `grad J(v) = (t^p/p) gradP + (lambda t^gamma/gamma) gradT - (t^q/q) gradQ`
/// evaluated at `v`. Errors mirror [`project_to_nehari`].
pub fn reduced_energy_and_gradient(
    spec: &ModelSpec,
    lambda: f64,
    branch: BranchId,
    v: &GridFunction,
) -> Result<(f64, Vec<f64>)> {
    let me = spec.eval_triple(v)?;
    match reduced_eval(spec, lambda, branch, &me) {
        Some((value, grad, _)) => Ok((value, grad)),
        None => Err(Error::NoProjection { lambda }),
    }
}

/// Shared kernel: returns `(J, grad J, gradient scale)` or `None` off the
/// case-I cone.
fn reduced_eval(
    spec: &ModelSpec,
    lambda: f64,
    branch: BranchId,
    me: &ModelEval,
) -> Option<(f64, Vec<f64>, f64)> {
    let exps = spec.exponents();
    let coeffs = me.fiber_coefficients(lambda, exps).ok()?;
    let cls = classify_fiber(&coeffs, DegeneracyTolerance::default()).ok()?;
    let FiberCase::I { t_minus, t_plus } = cls.case else {
        return None;
    };
    let t = match branch {
        BranchId::Plus => t_plus,
        BranchId::Minus => t_minus,
    };
    let (p, q, g) = (exps.p(), exps.q(), exps.gamma());
    let (wp, wt, wq) = (t.powf(p) / p, lambda * t.powf(g) / g, t.powf(q) / q);
    let value = wp * me.p_val + wt * me.t_val - wq * me.q_val;
    let mut np = 0.0;
    let mut nt = 0.0;
    let mut nq = 0.0;
    let grad: Vec<f64> = me
        .grad_p
        .iter()
        .zip(&me.grad_t)
        .zip(&me.grad_q)
        .map(|((gp, gt), gq)| {
            np += (wp * gp) * (wp * gp);
            nt += (wt * gt) * (wt * gt);
            nq += (wq * gq) * (wq * gq);
            wp * gp + wt * gt - wq * gq
        })
        .collect();
    let scale = np.sqrt().max(nt.sqrt()).max(nq.sqrt());
    if !value.is_finite() || scale == 0.0 {
        return None;
    }
    Some((value, grad, scale))
}

/// Relative full-space residual of the energy gradient at `u`, measured
/// against the largest constituent term.
fn full_residual(me: &ModelEval, lambda: f64, spec: &ModelSpec) -> f64 {
    let exps = spec.exponents();
    let grad = me.energy_gradient(lambda, &exps);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = (norm(&me.grad_p) / exps.p())
        .max(lambda * norm(&me.grad_t) / exps.gamma())
        .max(norm(&me.grad_q) / exps.q());
    if scale == 0.0 {
        return f64::INFINITY;
    }
    norm(&grad) / scale
}

fn build_report(
    spec: &ModelSpec,
    lambda: f64,
    branch: BranchId,
    direction: &[f64],
    iterations: usize,
    sphere_converged: bool,
) -> Result<SolveReport> {
    let grid = *spec.grid();
    let v = GridFunction::new(grid, direction.to_vec())?;
    let (solution, _t) = project_to_nehari(spec, &v, lambda, branch)?;
    let me = spec.eval_triple(&solution)?;
    let exps = spec.exponents();
    let energy = me.energy(lambda, &exps);
    let residual = full_residual(&me, lambda, spec);
    let nehari_residual = me.nehari_residual(lambda);
    let coeffs = me.fiber_coefficients(lambda, exps)?;
    let (_, second) = eval_fiber_derivatives(&coeffs, 1.0)?;
    let sign_ok = match branch {
        BranchId::Plus => second > 0.0,
        BranchId::Minus => second < 0.0,
    };
    let converged = sphere_converged && nehari_residual <= 1e-8 && residual <= 1e-6 && sign_ok;
    Ok(SolveReport {
        lambda,
        branch,
        solution,
        energy,
        residual,
        nehari_residual,
        second_order_sign: second,
        converged,
        p_val: me.p_val,
        t_val: me.t_val,
        q_val: me.q_val,
        iterations,
    })
}

/// Minimizes the reduced branch energy over unit-sphere directions.
///
/// Start directions, in order: the warm start, the extremal maximizer (the
/// case-I cone shrinks onto it as `lambda` approaches `lambda*`), the
/// principal eigenvector, then seeded random fields up to `opts.restarts`.
/// Random directions falling outside the case-I cone are resampled up to 50
/// times before the branch is declared empty. On the plus branch below the
/// zero-energy threshold the winner must attain a nonpositive energy
/// (the global-minimizer regime); otherwise the solve reports non-convergence.
pub fn minimize_branch(
    spec: &ModelSpec,
    lambda: f64,
    branch: BranchId,
    opts: &OptimizerOptions,
    hints: SolveHints<'_>,
) -> Result<SolveReport> {
    opts.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidModel(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let grid = *spec.grid();
    let feasible = |v: &GridFunction| {
        spec.eval_triple(v)
            .ok()
            .and_then(|me| reduced_eval(spec, lambda, branch, &me))
            .is_some()
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = hints.warm_start {
        if !w.is_zero() && feasible(w) {
            starts.push(w.values().to_vec());
        }
    }
    if let Some(ext) = hints.extremal {
        if feasible(&ext.maximizer) {
            starts.push(ext.maximizer.values().to_vec());
        }
    }
    let eig = principal_eigenvector(&grid);
    if feasible(&eig) {
        starts.push(eig.values().to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut resamples = 0;
    while starts.len() < opts.restarts && resamples < 50 {
        let cand = sample_field(&grid, &mut rng);
        resamples += 1;
        if feasible(&cand) {
            starts.push(cand.values().to_vec());
        }
    }
    if starts.is_empty() {
        return Err(Error::EmptyBranch { lambda });
    }

    let eval = |v: &[f64]| {
        let u = GridFunction::new(grid, v.to_vec()).ok()?;
        let me = spec.eval_triple(&u).ok()?;
        let (value, grad, scale) = reduced_eval(spec, lambda, branch, &me)?;
        Some(EvalPoint { value, grad, scale })
    };
    // Sequential over starts: the list is ordered by strength, and the winner
    // is picked by (converged, value, index) exactly as in the extremal runs.
    let outcomes: Vec<_> = starts
        .iter()
        .map(|s| minimize_on_sphere(&grid, eval, s, opts))
        .collect();
    let Some((_, best)) = best_outcome(&outcomes) else {
        return Err(Error::EmptyBranch { lambda });
    };

    let mut report = build_report(
        spec,
        lambda,
        branch,
        &best.point,
        best.iterations,
        best.converged,
    )?;

    // Below the zero-energy threshold the plus branch is the global minimizer
    // and its energy cannot be positive.
    if report.converged && branch == BranchId::Plus {
        if let Some(ext) = hints.extremal {
            if lambda <= ext.lambda0_star * (1.0 - 1e-9) {
                let scale = report.p_val / 2.0 + lambda * report.t_val + report.q_val;
                if report.energy > 1e-9 * scale {
                    report.converged = false;
                }
            }
        }
    }

    if report.converged {
        Ok(report)
    } else {
        Err(Error::SolveNonConvergence {
            lambda,
            best: Box::new(report),
        })
    }
}

/// Per-check outcome of [`verify_solution`].
#[derive(Debug, Clone)]
pub struct SolutionDiagnostics {
    pub residual: f64,
    pub nehari_residual: f64,
    pub second_order_sign: f64,
    pub h1_norm: f64,
    pub norm_lower_bound: f64,
    /// `P` threshold separating the branches when `T = C3 P^(gamma/p)`.
    pub degenerate_p: Option<f64>,
    /// Energy ceiling on the minus branch in the structural case.
    pub n0_ceiling: Option<f64>,
}

/// Degenerate-component value of `P` for triples with `T = C3 P^(gamma/p)`:
/// the two scalar Nehari identities force
/// `P = ((q-p) / ((gamma-q) C3 lambda))^(p/(gamma-p))` there, with the plus
/// branch strictly above and the minus branch strictly below.
pub fn n0_degenerate_p(exps: &crate::fiber::Exponents, c3: f64, lambda: f64) -> f64 {
    let (p, q, g) = (exps.p(), exps.q(), exps.gamma());
    ((q - p) / ((g - q) * c3 * lambda)).powf(p / (g - p))
}

/// Energy shared by every degenerate Nehari point in the structural case:
/// `((g-p)/(pqg)) (q-p)^(g/(g-p)) / (g-q)^(p/(g-p)) * (C3 lambda)^(-p/(g-p))`.
pub fn n0_energy_ceiling(exps: &crate::fiber::Exponents, c3: f64, lambda: f64) -> f64 {
    let (p, q, g) = (exps.p(), exps.q(), exps.gamma());
    (g - p) / (p * q * g) * (q - p).powf(g / (g - p)) / (g - q).powf(p / (g - p))
        * (c3 * lambda).powf(-p / (g - p))
}

/// Re-derives every certificate of a converged report from scratch.
///
/// The sampled constants are refined by the candidate itself before the norm
/// lower bound is applied (any field is a legitimate sample for the
/// coercivity and embedding constants), which keeps the certificate sound
/// when random sampling underestimates the embedding constant.
pub fn verify_solution(
    spec: &ModelSpec,
    report: &SolveReport,
    constants: &ModelConstants,
) -> Result<SolutionDiagnostics> {
    if !report.converged {
        return Err(Error::VerificationFailure {
            check: "converged",
            detail: "report is not converged".into(),
        });
    }
    if report.solution.is_zero() {
        return Err(Error::VerificationFailure {
            check: "nonzero",
            detail: "the zero field is not a Nehari point".into(),
        });
    }
    let me = spec.eval_triple(&report.solution)?;
    let exps = spec.exponents();
    let lambda = report.lambda;

    let nehari_residual = me.nehari_residual(lambda);
    if nehari_residual > 1e-8 {
        return Err(Error::VerificationFailure {
            check: "nehari_identity",
            detail: format!("relative residual {nehari_residual:e}"),
        });
    }
    let residual = full_residual(&me, lambda, spec);
    if residual > 1e-6 {
        return Err(Error::VerificationFailure {
            check: "energy_gradient",
            detail: format!("relative residual {residual:e}"),
        });
    }
    let coeffs = me.fiber_coefficients(lambda, exps)?;
    let (_, second) = eval_fiber_derivatives(&coeffs, 1.0)?;
    let sign_ok = match report.branch {
        BranchId::Plus => second > 0.0,
        BranchId::Minus => second < 0.0,
    };
    if !sign_ok {
        return Err(Error::VerificationFailure {
            check: "second_order_sign",
            detail: format!(
                "phi''(1) = {second:e} on branch {}",
                report.branch.as_str()
            ),
        });
    }

    let norm = h1_norm(&report.solution);
    let (p, q) = (exps.p(), exps.q());
    let c1 = constants.c1.min(me.p_val / norm.powf(p));
    let c2 = constants.c2.max(me.q_val / norm.powf(q));
    let bound = (c1 / c2).powf(1.0 / (q - p));
    if norm < bound * (1.0 - 1e-9) {
        return Err(Error::VerificationFailure {
            check: "norm_lower_bound",
            detail: format!("|u| = {norm:e} below bound {bound:e}"),
        });
    }

    let mut degenerate_p = None;
    let mut n0_ceiling = None;
    if let Some(c3) = spec.structural_constant() {
        let p_deg = n0_degenerate_p(&exps, c3, lambda);
        let ok = match report.branch {
            BranchId::Plus => me.p_val > p_deg * (1.0 - 1e-12),
            BranchId::Minus => me.p_val < p_deg * (1.0 + 1e-12),
        };
        if !ok {
            return Err(Error::VerificationFailure {
                check: "branch_p_threshold",
                detail: format!(
                    "P = {:e} on the wrong side of {:e} for branch {}",
                    me.p_val,
                    p_deg,
                    report.branch.as_str()
                ),
            });
        }
        degenerate_p = Some(p_deg);
        let ceiling = n0_energy_ceiling(&exps, c3, lambda);
        if report.branch == BranchId::Minus && report.energy > ceiling * (1.0 + 1e-12) {
            return Err(Error::VerificationFailure {
                check: "n0_energy_ceiling",
                detail: format!("energy {:e} above ceiling {ceiling:e}", report.energy),
            });
        }
        n0_ceiling = Some(ceiling);
    }

    Ok(SolutionDiagnostics {
        residual,
        nehari_residual,
        second_order_sign: second,
        h1_norm: norm,
        norm_lower_bound: bound,
        degenerate_p,
        n0_ceiling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::maximize_lambda;
    use crate::model::{verify_hypotheses, Grid};

    fn opts() -> OptimizerOptions {
        OptimizerOptions {
            restarts: 4,
            seed: 5,
            ..OptimizerOptions::default()
        }
    }

    fn kirchhoff_setup(n: usize) -> (ModelSpec, ExtremalReport) {
        let grid = Grid::unit_interval(n).unwrap();
        let spec = ModelSpec::kirchhoff(1.0, 3.0, grid).unwrap();
        let ext = maximize_lambda(&spec, &opts()).unwrap();
        (spec, ext)
    }

    #[test]
    fn projection_lands_on_the_nehari_set() {
        let (spec, ext) = kirchhoff_setup(40);
        let lambda = 0.4 * ext.lambda_star;
        for branch in [BranchId::Plus, BranchId::Minus] {
            let (proj, t) = project_to_nehari(&spec, &ext.maximizer, lambda, branch).unwrap();
            assert!(t > 0.0);
            let me = spec.eval_triple(&proj).unwrap();
            assert!(me.nehari_residual(lambda) <= 1e-10);
        }
        // Ray dependence only: scaling the input does not move the projection.
        let (p1, _) = project_to_nehari(&spec, &ext.maximizer, lambda, BranchId::Plus).unwrap();
        let (p2, _) =
            project_to_nehari(&spec, &ext.maximizer.scaled(7.5), lambda, BranchId::Plus).unwrap();
        for (a, b) in p1.values().iter().zip(p2.values()) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
        }
        // A projected point projects to itself (unit root).
        let (_, t) = project_to_nehari(&spec, &p1, lambda, BranchId::Plus).unwrap();
        assert!((t - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn projection_fails_past_the_ray_threshold() {
        let (spec, ext) = kirchhoff_setup(30);
        let err = project_to_nehari(
            &spec,
            &ext.maximizer,
            ext.lambda_star * 1.05,
            BranchId::Plus,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoProjection { .. }));
        assert!(matches!(
            project_to_nehari(
                &spec,
                &GridFunction::zeros(*spec.grid()),
                0.1,
                BranchId::Plus
            ),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn branch_energies_have_the_advertised_signs() {
        let (spec, ext) = kirchhoff_setup(50);
        let hints = SolveHints {
            extremal: Some(&ext),
            warm_start: None,
        };
        // Below the zero-energy threshold: global minimizer negative, minus positive.
        let lambda = 0.5 * ext.lambda0_star;
        let plus = minimize_branch(&spec, lambda, BranchId::Plus, &opts(), hints).unwrap();
        let minus = minimize_branch(&spec, lambda, BranchId::Minus, &opts(), hints).unwrap();
        assert!(plus.energy < 0.0, "plus energy {}", plus.energy);
        assert!(minus.energy > 0.0, "minus energy {}", minus.energy);
        assert!(plus.energy < minus.energy);
        assert!(plus.second_order_sign > 0.0);
        assert!(minus.second_order_sign < 0.0);

        // Between the thresholds: both positive, ordered.
        let lambda = 0.5 * (ext.lambda0_star + ext.lambda_star);
        let plus = minimize_branch(&spec, lambda, BranchId::Plus, &opts(), hints).unwrap();
        let minus = minimize_branch(&spec, lambda, BranchId::Minus, &opts(), hints).unwrap();
        assert!(0.0 < plus.energy && plus.energy < minus.energy);
    }

    #[test]
    fn plus_energy_vanishes_at_the_zero_energy_threshold() {
        let (spec, ext) = kirchhoff_setup(50);
        let hints = SolveHints {
            extremal: Some(&ext),
            warm_start: None,
        };
        let plus =
            minimize_branch(&spec, ext.lambda0_star, BranchId::Plus, &opts(), hints).unwrap();
        let minus =
            minimize_branch(&spec, ext.lambda0_star, BranchId::Minus, &opts(), hints).unwrap();
        assert!(
            plus.energy.abs() <= 1e-6 * minus.energy.abs(),
            "plus {} vs minus {}",
            plus.energy,
            minus.energy
        );
    }

    #[test]
    fn converged_reports_verify() {
        let (spec, ext) = kirchhoff_setup(40);
        let (constants, _) = verify_hypotheses(&spec, 50, 3).unwrap();
        let hints = SolveHints {
            extremal: Some(&ext),
            warm_start: None,
        };
        for branch in [BranchId::Plus, BranchId::Minus] {
            for frac in [0.3, 0.7, 0.95] {
                let lambda = frac * ext.lambda_star;
                let report = minimize_branch(&spec, lambda, branch, &opts(), hints).unwrap();
                let diag = verify_solution(&spec, &report, &constants).unwrap();
                assert!(diag.nehari_residual <= 1e-8);
                assert!(diag.residual <= 1e-6);
                assert!(diag.h1_norm >= diag.norm_lower_bound * (1.0 - 1e-9));
                // Kirchhoff is structural: the branch thresholds must be set.
                assert!(diag.degenerate_p.is_some());
            }
        }
    }

    #[test]
    fn zero_field_rejected_by_verification() {
        let (spec, _) = kirchhoff_setup(20);
        let (constants, _) = verify_hypotheses(&spec, 20, 3).unwrap();
        let fake = SolveReport {
            lambda: 0.1,
            branch: BranchId::Plus,
            solution: GridFunction::zeros(*spec.grid()),
            energy: 0.0,
            residual: 0.0,
            nehari_residual: 0.0,
            second_order_sign: 1.0,
            converged: true,
            p_val: 0.0,
            t_val: 0.0,
            q_val: 0.0,
            iterations: 0,
        };
        assert!(matches!(
            verify_solution(&spec, &fake, &constants),
            Err(Error::VerificationFailure {
                check: "nonzero",
                ..
            })
        ));
    }

    #[test]
    fn empty_branch_past_lambda_star() {
        let (spec, ext) = kirchhoff_setup(30);
        let hints = SolveHints {
            extremal: Some(&ext),
            warm_start: None,
        };
        let err = minimize_branch(
            &spec,
            1.05 * ext.lambda_star,
            BranchId::Plus,
            &opts(),
            hints,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyBranch { .. }), "{err:?}");
    }

    #[test]
    fn reduced_gradient_matches_finite_differences() {
        let (spec, ext) = kirchhoff_setup(40);
        let lambda = 0.6 * ext.lambda_star;
        let grid = *spec.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // A generic case-I direction away from any critical point.
        let mut v = ext.maximizer.clone();
        let noise = sample_field(&grid, &mut rng);
        let nn = h1_norm(&noise);
        for (x, n) in v.values_mut().iter_mut().zip(noise.values()) {
            *x += 0.1 * n / nn;
        }
        let v = v.scaled(1.0 / h1_norm(&v));
        for branch in [BranchId::Plus, BranchId::Minus] {
            let (_, grad) = reduced_energy_and_gradient(&spec, lambda, branch, &v).unwrap();
            for _ in 0..5 {
                let dir = sample_field(&grid, &mut rng);
                let dir = dir.scaled(1.0 / h1_norm(&dir));
                let an: f64 = grad.iter().zip(dir.values()).map(|(g, d)| g * d).sum();
                let eps = 1e-6;
                let mut vp = v.clone();
                let mut vm = v.clone();
                for ((a, b), d) in vp
                    .values_mut()
                    .iter_mut()
                    .zip(vm.values_mut())
                    .zip(dir.values())
                {
                    *a += eps * d;
                    *b -= eps * d;
                }
                let (jp, _) = reduced_energy_and_gradient(&spec, lambda, branch, &vp).unwrap();
                let (jm, _) = reduced_energy_and_gradient(&spec, lambda, branch, &vm).unwrap();
                let fd = (jp - jm) / (2.0 * eps);
                assert!(
                    (fd - an).abs() <= 1e-5 * an.abs().max(1e-10),
                    "branch {:?}: fd {fd} vs analytic {an}",
                    branch
                );
            }
        }
    }

    #[test]
    fn gradient_flow_oracle_returns_to_the_plus_solution() {
        // Damped full-space gradient flow on the energy, started from the plus
        // solution perturbed by small noise, must settle at the same energy.
        // This descends the raw energy directly and never touches the fibering
        // machinery.
        let (spec, ext) = kirchhoff_setup(40);
        let lambda = 0.4 * ext.lambda0_star;
        let hints = SolveHints {
            extremal: Some(&ext),
            warm_start: None,
        };
        let plus = minimize_branch(&spec, lambda, BranchId::Plus, &opts(), hints).unwrap();
        let exps = spec.exponents();

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let noise = sample_field(spec.grid(), &mut rng);
        let nn = h1_norm(&noise);
        let mut u = plus.solution.clone();
        for (x, d) in u.values_mut().iter_mut().zip(noise.values()) {
            *x += 1e-3 * d / nn;
        }

        let mut tau = 1e-3;
        let mut energy = {
            let me = spec.eval_triple(&u).unwrap();
            me.energy(lambda, &exps)
        };
        for _ in 0..20000 {
            let me = spec.eval_triple(&u).unwrap();
            let grad = me.energy_gradient(lambda, &exps);
            let gn: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gn < 1e-12 {
                break;
            }
            let trial_vals: Vec<f64> = u
                .values()
                .iter()
                .zip(&grad)
                .map(|(x, g)| x - tau * g)
                .collect();
            let trial = GridFunction::new(*spec.grid(), trial_vals).unwrap();
            let te = spec.eval_triple(&trial).unwrap().energy(lambda, &exps);
            if te < energy {
                u = trial;
                energy = te;
                tau *= 1.1;
            } else {
                tau *= 0.5;
                if tau < 1e-18 {
                    break;
                }
            }
        }
        assert!(
            (energy - plus.energy).abs() <= 1e-6 * plus.energy.abs(),
            "flow energy {energy} vs branch energy {}",
            plus.energy
        );
    }
}
