//! Extreme parameters by maximizing the nonlinear Rayleigh quotients.
//!
//! The maps `u -> lambda(u)` and `u -> lambda0(u)` built from a model triple
//! are 0-homogeneous and smooth away from zero, so their suprema over
//! nonzero fields — the extreme parameters `lambda*` and `lambda0*` — are
//! computed by projected gradient ascent on the H^1 unit sphere with
//! multistart. Both suprema are attained at the same maximizer, which this
//! module reports together with the residual of the exact ratio law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fiber::{rayleigh_lambda, rayleigh_lambda0};
use crate::model::{h1_norm, principal_eigenvector, sample_field, GridFunction, ModelSpec};
use crate::optim::{best_outcome, multistart, EvalPoint, SphereOutcome};

pub use crate::optim::OptimizerOptions;

/// Outcome of an extremal-parameter run.
#[derive(Debug, Clone)]
pub struct ExtremalReport {
    pub lambda_star: f64,
    pub lambda0_star: f64,
    /// Common maximizer, unit H^1 norm, nonnegative mean sign.
    pub maximizer: GridFunction,
    pub restarts_used: usize,
    /// Iterations of the winning restart.
    pub iterations: usize,
    pub converged: bool,
    /// `|lambda*/lambda0* - C(p,q,gamma)| / C(p,q,gamma)`.
    pub ratio_residual: f64,
}

/// Which 0-homogeneous quotient an ascent drives.
#[derive(Clone, Copy)]
enum Quotient {
    /// Degenerate-parameter quotient `lambda(u)`.
    Lambda,
    /// Zero-energy quotient `lambda0(u)`.
    Lambda0,
    /// Sobolev-type `S(u) = Q / P^(q/2)` (Kirchhoff route).
    Sobolev,
    /// `M(u) = Qf^((g-2)/(q-2)) / (Tf * D^((g-q)/(q-2)))` with the plain
    /// `int |u|^q` in the numerator (nonlinear eigenvalue route).
    MuFree,
}

fn quotient_eval(spec: &ModelSpec, which: Quotient, v: &[f64]) -> Option<EvalPoint> {
    let grid = *spec.grid();
    let u = GridFunction::new(grid, v.to_vec()).ok()?;
    if u.is_zero() {
        return None;
    }
    let me = spec.eval_triple(&u).ok()?;
    if !(me.p_val > 0.0 && me.t_val > 0.0 && me.q_val > 0.0) {
        return None;
    }
    let e = spec.exponents();
    let (p, q, g) = (e.p(), e.q(), e.gamma());
    // Each quotient is K * Q^cq * T^ct * P^cp with constant K > 0; its
    // logarithmic gradient is cq gQ/Q + ct gT/T + cp gP/P.
    let (value, cq, ct, cp) = match which {
        Quotient::Lambda => (
            rayleigh_lambda(me.p_val, me.t_val, me.q_val, &e).ok()?,
            (g - p) / (q - p),
            -1.0,
            -(g - q) / (q - p),
        ),
        Quotient::Lambda0 => (
            rayleigh_lambda0(me.p_val, me.t_val, me.q_val, &e).ok()?,
            (g - p) / (q - p),
            -1.0,
            -(g - q) / (q - p),
        ),
        Quotient::Sobolev => {
            let s = me.q_val / me.p_val.powf(q / 2.0);
            (s, 1.0, 0.0, -q / 2.0)
        }
        Quotient::MuFree => {
            let ModelSpec::Nep { mu, .. } = spec else {
                return None;
            };
            let qf = me.q_val / mu;
            let m = qf.powf((g - 2.0) / (q - 2.0))
                / (me.t_val * me.p_val.powf((g - q) / (q - 2.0)));
            (m, (g - 2.0) / (q - 2.0), -1.0, -(g - q) / (q - 2.0))
        }
    };
    if !value.is_finite() {
        return None;
    }
    let grad: Vec<f64> = me
        .grad_q
        .iter()
        .zip(&me.grad_t)
        .zip(&me.grad_p)
        .map(|((gq, gt), gp)| {
            -value * (cq * gq / me.q_val + ct * gt / me.t_val + cp * gp / me.p_val)
        })
        .collect();
    Some(EvalPoint {
        value: -value, // engine minimizes
        grad,
        scale: value,
    })
}

fn ascent_starts(spec: &ModelSpec, opts: &OptimizerOptions) -> Vec<Vec<f64>> {
    let grid = spec.grid();
    let mut starts = Vec::with_capacity(opts.restarts);
    starts.push(principal_eigenvector(grid).values().to_vec());
    for r in 1..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        starts.push(sample_field(grid, &mut rng).values().to_vec());
    }
    starts
}

fn run_ascent(
    spec: &ModelSpec,
    which: Quotient,
    opts: &OptimizerOptions,
) -> Result<(GridFunction, f64, usize, bool)> {
    opts.validate()?;
    let grid = *spec.grid();
    let starts = ascent_starts(spec, opts);
    let eval = |v: &[f64]| quotient_eval(spec, which, v);
    let outcomes = multistart(&grid, eval, &starts, opts);
    let Some((_, best)) = best_outcome(&outcomes) else {
        return Err(Error::InvalidModel(
            "no start direction was feasible for the ascent".into(),
        ));
    };
    let best: &SphereOutcome = best;
    let mut u = GridFunction::new(grid, best.point.clone())?;
    // Maximizers are determined up to sign; normalize to nonnegative mean.
    if u.values().iter().sum::<f64>() < 0.0 {
        u = u.scaled(-1.0);
    }
    let norm = h1_norm(&u);
    if norm > 0.0 {
        u = u.scaled(1.0 / norm);
    }
    Ok((u, -best.value, best.iterations, best.converged))
}

fn report_at(spec: &ModelSpec, u: GridFunction, iterations: usize, converged: bool, restarts: usize) -> Result<ExtremalReport> {
    let me = spec.eval_triple(&u)?;
    let e = spec.exponents();
    let lambda_star = rayleigh_lambda(me.p_val, me.t_val, me.q_val, &e)?;
    let lambda0_star = rayleigh_lambda0(me.p_val, me.t_val, me.q_val, &e)?;
    let c = e.ratio_constant();
    let ratio_residual = (lambda_star / lambda0_star - c).abs() / c;
    Ok(ExtremalReport {
        lambda_star,
        lambda0_star,
        maximizer: u,
        restarts_used: restarts,
        iterations,
        converged,
        ratio_residual,
    })
}

/// Estimates `lambda* = sup lambda(u)` (and `lambda0*` at the same maximizer)
/// by multistart projected gradient ascent on the unit sphere.
///
/// Restart 0 starts from the principal Dirichlet eigenvector, the rest from
/// seeded random fields; outcomes reduce by restart index, so the report is
/// deterministic for fixed `(seed, restarts)` regardless of thread count.
pub fn maximize_lambda(spec: &ModelSpec, opts: &OptimizerOptions) -> Result<ExtremalReport> {
    let (u, _, iterations, converged) = run_ascent(spec, Quotient::Lambda, opts)?;
    let report = report_at(spec, u, iterations, converged, opts.restarts)?;
    if !converged {
        let best_lambda = report.lambda_star;
        return Err(Error::ExtremalNonConvergence {
            best_lambda,
            best: Box::new(report),
        });
    }
    Ok(report)
}

/// Same ascent driven by the zero-energy quotient `lambda0(u)`.
///
/// Exists mainly to confirm that both quotients share their maximizer; the
/// report fields mean the same as for [`maximize_lambda`].
pub fn maximize_lambda0(spec: &ModelSpec, opts: &OptimizerOptions) -> Result<ExtremalReport> {
    let (u, _, iterations, converged) = run_ascent(spec, Quotient::Lambda0, opts)?;
    let report = report_at(spec, u, iterations, converged, opts.restarts)?;
    if !converged {
        let best_lambda = report.lambda_star;
        return Err(Error::ExtremalNonConvergence {
            best_lambda,
            best: Box::new(report),
        });
    }
    Ok(report)
}

/// Second, independent route to the Kirchhoff `lambda*`.
///
/// With `T = P^2 / a^2` (exponents p = 2, gamma = 4) the quotient collapses:
/// substituting into the closed form gives
///
/// ```text
/// lambda(u) = ((q-2)/2) ((4-q)/2)^((4-q)/(q-2)) * Q^(2/(q-2)) / (T P^((4-q)/(q-2)))
///           = ((q-2)/2) ((4-q)/2)^((4-q)/(q-2)) * a^2 * S(u)^(2/(q-2)),
/// ```
///
/// where `S(u) = Q / P^(q/2)` (the exponent of `P` collects to
/// `2 + (4-q)/(q-2) = q/(q-2)`). `lambda(u)` is strictly increasing in
/// `S(u)`, so maximizing the Sobolev-type quotient `S` and mapping through
/// the formula recovers the same supremum.
pub fn sobolev_route_lambda_star(spec: &ModelSpec, opts: &OptimizerOptions) -> Result<f64> {
    let ModelSpec::Kirchhoff { a, q, .. } = spec else {
        return Err(Error::InvalidModel(
            "the Sobolev route requires the Kirchhoff model".into(),
        ));
    };
    let (u, s_max, _, converged) = run_ascent(spec, Quotient::Sobolev, opts)?;
    if !converged {
        let report = report_at(spec, u, 0, false, opts.restarts)?;
        let best_lambda = report.lambda_star;
        return Err(Error::ExtremalNonConvergence {
            best_lambda,
            best: Box::new(report),
        });
    }
    let coeff = (q - 2.0) / 2.0 * ((4.0 - q) / 2.0).powf((4.0 - q) / (q - 2.0));
    Ok(coeff * a * a * s_max.powf(2.0 / (q - 2.0)))
}

/// Scaling data of the nonlinear eigenvalue model: the supremum `M` of the
/// mu-free quotient plus the two closed-form prefactors, so that
/// `lambda0*(mu) = lambda0_coeff * M * mu^((g-2)/(q-2))` and likewise for
/// `lambda*(mu)`.
#[derive(Debug, Clone)]
pub struct NepScaling {
    pub m_sup: f64,
    pub lambda0_coeff: f64,
    pub lambda_coeff: f64,
    pub gamma: f64,
    pub q: f64,
    pub maximizer: GridFunction,
}

impl NepScaling {
    pub fn lambda0_star(&self, mu: f64) -> f64 {
        self.lambda0_coeff * self.m_sup * mu.powf((self.gamma - 2.0) / (self.q - 2.0))
    }

    pub fn lambda_star(&self, mu: f64) -> f64 {
        self.lambda_coeff * self.m_sup * mu.powf((self.gamma - 2.0) / (self.q - 2.0))
    }
}

/// Computes the nonlinear-eigenvalue scaling constants by normalized ascent
/// of the mu-free quotient.
pub fn nep_scaling_constants(spec: &ModelSpec, opts: &OptimizerOptions) -> Result<NepScaling> {
    let ModelSpec::Nep { gamma, q, .. } = *spec else {
        return Err(Error::InvalidModel(
            "scaling constants require the nonlinear eigenvalue model".into(),
        ));
    };
    let (u, m_sup, _, converged) = run_ascent(spec, Quotient::MuFree, opts)?;
    if !converged {
        let report = report_at(spec, u, 0, false, opts.restarts)?;
        let best_lambda = report.lambda_star;
        return Err(Error::ExtremalNonConvergence {
            best_lambda,
            best: Box::new(report),
        });
    }
    let e = (gamma - q) / (q - 2.0);
    let lambda0_coeff =
        gamma / q * (q - 2.0) / (gamma - 2.0) * (2.0 / q * (gamma - q) / (gamma - 2.0)).powf(e);
    let lambda_coeff = (q - 2.0) / (gamma - 2.0) * ((gamma - q) / (gamma - 2.0)).powf(e);
    Ok(NepScaling {
        m_sup,
        lambda0_coeff,
        lambda_coeff,
        gamma,
        q,
        maximizer: u,
    })
}

/// Fixed points of the two power laws when the equation couples `mu` to
/// itself: `mu0` solves `mu = lambda*(mu)` and `lambda_star_cross` solves
/// `mu = lambda0*(mu)`.
#[derive(Debug, Clone, Copy)]
pub struct NepCrossings {
    pub mu0: f64,
    pub lambda_star_cross: f64,
}

/// Solves `mu = K mu^((g-2)/(q-2))` in closed form for both laws.
///
/// The exponent exceeds 1, so each crossing is `K^(-(q-2)/(g-q))`; the
/// `lambda*` law has the larger prefactor and therefore the smaller crossing,
/// giving `mu0 < lambda_star_cross`.
pub fn nep_crossings(scaling: &NepScaling) -> Result<NepCrossings> {
    let s = (scaling.gamma - 2.0) / (scaling.q - 2.0);
    if !(s.is_finite() && s > 1.0) {
        return Err(Error::InvalidModel(format!(
            "crossing exponent must exceed 1, got {s}"
        )));
    }
    let expo = -(scaling.q - 2.0) / (scaling.gamma - scaling.q);
    let mu0 = (scaling.lambda_coeff * scaling.m_sup).powf(expo);
    let lambda_star_cross = (scaling.lambda0_coeff * scaling.m_sup).powf(expo);
    if !(mu0.is_finite() && lambda_star_cross.is_finite()) {
        return Err(Error::NonFinite("nep crossings"));
    }
    debug_assert!(mu0 < lambda_star_cross);
    Ok(NepCrossings {
        mu0,
        lambda_star_cross,
    })
}
