//! Discretized homogeneous functional triples on Dirichlet grids.
//!
//! Two model backends share one interface: a Kirchhoff-type triple
//! `P = a * D(u)`, `T = D(u)^2`, `Q = int |u|^q` and a nonlinear-eigenvalue
//! triple `P = D(u)`, `T = int |u|^gamma`, `Q = mu * int |u|^q`, where `D` is
//! the discrete Dirichlet energy (first-order differences, homogeneous ghost
//! nodes) and integrals use the nodal rule with weight `h^dim`. Both choices
//! make every functional an exactly homogeneous polynomial in the nodal
//! values, so the scalar fiber analysis of [`crate::fiber`] applies verbatim
//! to the discrete problem.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fiber::{Exponents, FiberCoefficients};

/// Spatial dimension of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridDim {
    One,
    Two,
}

impl GridDim {
    pub fn as_usize(self) -> usize {
        match self {
            GridDim::One => 1,
            GridDim::Two => 2,
        }
    }
}

/// Uniform Dirichlet grid on an interval or square of side `side`
/// with `n` interior points per axis and mesh width `h = side / (n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: GridDim,
    n: usize,
    side: f64,
    h: f64,
}

impl Grid {
    pub fn new(dim: GridDim, n: usize, side: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("n must be >= 2, got {n}")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "side must be finite and positive, got {side}"
            )));
        }
        Ok(Self {
            dim,
            n,
            side,
            h: side / (n as f64 + 1.0),
        })
    }

    /// Unit interval with `n` interior points.
    pub fn unit_interval(n: usize) -> Result<Self> {
        Self::new(GridDim::One, n, 1.0)
    }

    /// Unit square with `n x n` interior points.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(GridDim::Two, n, 1.0)
    }

    pub fn dim(&self) -> GridDim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior unknowns: `n` in 1D, `n^2` in 2D.
    pub fn unknowns(&self) -> usize {
        match self.dim {
            GridDim::One => self.n,
            GridDim::Two => self.n * self.n,
        }
    }

    /// Quadrature weight `h^dim` of the nodal rule.
    pub fn weight(&self) -> f64 {
        match self.dim {
            GridDim::One => self.h,
            GridDim::Two => self.h * self.h,
        }
    }

    /// Coordinates of interior node `k` (row-major in 2D).
    pub fn coords(&self, k: usize) -> (f64, f64) {
        match self.dim {
            GridDim::One => ((k as f64 + 1.0) * self.h, 0.0),
            GridDim::Two => {
                let i = k / self.n;
                let j = k % self.n;
                ((j as f64 + 1.0) * self.h, (i as f64 + 1.0) * self.h)
            }
        }
    }
}

/// A discretized field: nodal values over the interior of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.unknowns() {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match grid unknowns {}",
                values.len(),
                grid.unknowns()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid function values"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.unknowns();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples a function of the node coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.unknowns())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| t * v).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Discrete Dirichlet energy `D(u) = int |grad u|^2` via first-order
/// differences with zero ghost values on the boundary.
pub(crate) fn dirichlet_energy(grid: &Grid, v: &[f64]) -> f64 {
    let n = grid.n;
    match grid.dim {
        GridDim::One => {
            let mut acc = 0.0;
            let mut prev = 0.0;
            for &x in v {
                let d = x - prev;
                acc += d * d;
                prev = x;
            }
            acc += prev * prev; // last gap to the right boundary
            acc / grid.h
        }
        GridDim::Two => {
            // In 2D the h factors cancel: ((du)/h)^2 * h^2 = (du)^2.
            let at = |i: isize, j: isize| -> f64 {
                if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                    0.0
                } else {
                    v[i as usize * n + j as usize]
                }
            };
            let mut acc = 0.0;
            for i in 0..=n as isize {
                for j in 0..n as isize {
                    // vertical edges between rows i-1 and i
                    let d = at(i, j) - at(i - 1, j);
                    acc += d * d;
                    // horizontal edges between cols i-1 and i (transposed roles)
                    let d = at(j, i) - at(j, i - 1);
                    acc += d * d;
                }
            }
            acc
        }
    }
}

/// Gradient of [`dirichlet_energy`] with respect to the nodal values.
///
/// Doubles as the normal direction of the `D(u) = 1` sphere.
pub(crate) fn dirichlet_energy_grad(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let n = grid.n;
    match grid.dim {
        GridDim::One => {
            let mut g = vec![0.0; n];
            for k in 0..n {
                let left = if k == 0 { 0.0 } else { v[k - 1] };
                let right = if k + 1 == n { 0.0 } else { v[k + 1] };
                g[k] = 2.0 / grid.h * (2.0 * v[k] - left - right);
            }
            g
        }
        GridDim::Two => {
            let at = |i: isize, j: isize| -> f64 {
                if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                    0.0
                } else {
                    v[i as usize * n + j as usize]
                }
            };
            let mut g = vec![0.0; n * n];
            for i in 0..n as isize {
                for j in 0..n as isize {
                    let nb = at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1);
                    g[i as usize * n + j as usize] = 2.0 * (4.0 * at(i, j) - nb);
                }
            }
            g
        }
    }
}

fn power_integral(grid: &Grid, v: &[f64], s: f64) -> f64 {
    let w = grid.weight();
    w * v.iter().map(|&x| x.abs().powf(s)).sum::<f64>()
}

fn power_integral_grad(grid: &Grid, v: &[f64], s: f64) -> Vec<f64> {
    let w = grid.weight();
    v.iter()
        .map(|&x| {
            if x == 0.0 {
                0.0
            } else {
                w * s * x.abs().powf(s - 2.0) * x
            }
        })
        .collect()
}

/// Discrete H^1_0 seminorm `sqrt(D(u))`; a norm under Dirichlet conditions.
pub fn h1_norm(u: &GridFunction) -> f64 {
    dirichlet_energy(&u.grid, &u.values).sqrt()
}

/// Model backend: which homogeneous triple lives on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// `P = a D(u)`, `T = D(u)^2`, `Q = int |u|^q`; exponents `(2, q, 4)`.
    Kirchhoff { a: f64, q: f64, grid: Grid },
    /// `P = D(u)`, `T = int |u|^gamma`, `Q = mu int |u|^q`; exponents `(2, q, gamma)`.
    Nep {
        gamma: f64,
        q: f64,
        mu: f64,
        grid: Grid,
    },
}

impl ModelSpec {
    pub fn kirchhoff(a: f64, q: f64, grid: Grid) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidModel(format!("requires a > 0, got {a}")));
        }
        if !(2.0 < q && q < 4.0) {
            return Err(Error::InvalidModel(format!(
                "kirchhoff requires 2 < q < 4, got q = {q}"
            )));
        }
        Ok(ModelSpec::Kirchhoff { a, q, grid })
    }

    pub fn nep(gamma: f64, q: f64, mu: f64, grid: Grid) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidModel(format!("requires mu > 0, got {mu}")));
        }
        if !(2.0 < q && q < gamma) {
            return Err(Error::InvalidModel(format!(
                "nep requires 2 < q < gamma, got q = {q}, gamma = {gamma}"
            )));
        }
        Ok(ModelSpec::Nep { gamma, q, mu, grid })
    }

    pub fn grid(&self) -> &Grid {
        match self {
            ModelSpec::Kirchhoff { grid, .. } => grid,
            ModelSpec::Nep { grid, .. } => grid,
        }
    }

    pub fn exponents(&self) -> Exponents {
        match self {
            ModelSpec::Kirchhoff { q, .. } => Exponents::new(2.0, *q, 4.0)
                .expect("kirchhoff exponents validated at construction"),
            ModelSpec::Nep { gamma, q, .. } => Exponents::new(2.0, *q, *gamma)
                .expect("nep exponents validated at construction"),
        }
    }

    /// `C3` such that `T = C3 * P^(gamma/p)` holds identically, when it does.
    ///
    /// The Kirchhoff triple has `T = D^2 = (P/a)^2`, so `C3 = 1/a^2`; the
    /// nonlinear eigenvalue triple has no such structure.
    pub fn structural_constant(&self) -> Option<f64> {
        match self {
            ModelSpec::Kirchhoff { a, .. } => Some(1.0 / (a * a)),
            ModelSpec::Nep { .. } => None,
        }
    }

    /// Short identifier used in CSV headers and run manifests. Comma-free so
    /// it can sit in a CSV field unquoted.
    pub fn id(&self) -> String {
        match self {
            ModelSpec::Kirchhoff { a, q, grid } => format!(
                "kirchhoff(a={a};q={q};dim={};n={})",
                grid.dim().as_usize(),
                grid.n()
            ),
            ModelSpec::Nep { gamma, q, mu, grid } => format!(
                "nep(gamma={gamma};q={q};mu={mu};dim={};n={})",
                grid.dim().as_usize(),
                grid.n()
            ),
        }
    }

    /// Values and gradients of `(P, T, Q)` at `u`.
    pub fn eval_triple(&self, u: &GridFunction) -> Result<ModelEval> {
        if *u.grid() != *self.grid() {
            return Err(Error::InvalidGrid(
                "grid function does not live on the model grid".into(),
            ));
        }
        let grid = self.grid();
        let v = u.values();
        let eval = match *self {
            ModelSpec::Kirchhoff { a, q, .. } => {
                let d = dirichlet_energy(grid, v);
                let gd = dirichlet_energy_grad(grid, v);
                let q_val = power_integral(grid, v, q);
                let grad_q = power_integral_grad(grid, v, q);
                ModelEval {
                    p_val: a * d,
                    t_val: d * d,
                    q_val,
                    grad_p: gd.iter().map(|g| a * g).collect(),
                    grad_t: gd.iter().map(|g| 2.0 * d * g).collect(),
                    grad_q,
                }
            }
            ModelSpec::Nep { gamma, q, mu, .. } => {
                let d = dirichlet_energy(grid, v);
                let gd = dirichlet_energy_grad(grid, v);
                let t_val = power_integral(grid, v, gamma);
                let grad_t = power_integral_grad(grid, v, gamma);
                let q_plain = power_integral(grid, v, q);
                let grad_q = power_integral_grad(grid, v, q)
                    .into_iter()
                    .map(|g| mu * g)
                    .collect();
                ModelEval {
                    p_val: d,
                    t_val,
                    q_val: mu * q_plain,
                    grad_p: gd,
                    grad_t,
                    grad_q,
                }
            }
        };
        if ![eval.p_val, eval.t_val, eval.q_val]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("model triple"));
        }
        Ok(eval)
    }
}

/// Values and nodal gradients of the functional triple at one field.
#[derive(Debug, Clone)]
pub struct ModelEval {
    pub p_val: f64,
    pub t_val: f64,
    pub q_val: f64,
    pub grad_p: Vec<f64>,
    pub grad_t: Vec<f64>,
    pub grad_q: Vec<f64>,
}

impl ModelEval {
    /// Scalar fiber coefficients `(P, T, Q, lambda)` of the ray through `u`.
    pub fn fiber_coefficients(&self, lambda: f64, exps: Exponents) -> Result<FiberCoefficients> {
        FiberCoefficients::new(self.p_val, self.t_val, self.q_val, lambda, exps)
    }

    /// Energy `P/p + lambda T/gamma - Q/q`.
    pub fn energy(&self, lambda: f64, exps: &Exponents) -> f64 {
        self.p_val / exps.p() + lambda * self.t_val / exps.gamma() - self.q_val / exps.q()
    }

    /// Full-space energy gradient `gradP/p + lambda gradT/gamma - gradQ/q`.
    pub fn energy_gradient(&self, lambda: f64, exps: &Exponents) -> Vec<f64> {
        let (p, q, g) = (exps.p(), exps.q(), exps.gamma());
        self.grad_p
            .iter()
            .zip(&self.grad_t)
            .zip(&self.grad_q)
            .map(|((gp, gt), gq)| gp / p + lambda * gt / g - gq / q)
            .collect()
    }

    /// `|P + lambda T - Q| / Q`, zero exactly on the Nehari set.
    pub fn nehari_residual(&self, lambda: f64) -> f64 {
        (self.p_val + lambda * self.t_val - self.q_val).abs() / self.q_val
    }
}

/// Sampled hypothesis constants: coercivity `C1`, embedding `C2` and the
/// largest observed compatibility quotient `Q^((g-p)/(q-p)) / (T P^((g-q)/(q-p)))`.
#[derive(Debug, Clone, Copy)]
pub struct ModelConstants {
    pub c1: f64,
    pub c2: f64,
    pub c_e3: f64,
}

/// Summary statistics from a hypothesis verification run.
#[derive(Debug, Clone, Copy)]
pub struct HypothesisReport {
    pub samples: usize,
    pub max_homogeneity_err: f64,
    pub max_euler_err: f64,
    pub max_gradient_err: f64,
    pub constants: ModelConstants,
}

/// Random interior field: i.i.d. uniform(-1, 1) nodal values smoothed by one
/// damped Jacobi sweep. Covers both rough and smooth directions.
pub fn sample_field(grid: &Grid, rng: &mut ChaCha8Rng) -> GridFunction {
    let n = grid.n();
    let raw: Vec<f64> = (0..grid.unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let smoothed = match grid.dim() {
        GridDim::One => (0..n)
            .map(|k| {
                let left = if k == 0 { 0.0 } else { raw[k - 1] };
                let right = if k + 1 == n { 0.0 } else { raw[k + 1] };
                0.5 * raw[k] + 0.25 * (left + right)
            })
            .collect(),
        GridDim::Two => {
            let at = |i: isize, j: isize| -> f64 {
                if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                    0.0
                } else {
                    raw[i as usize * n + j as usize]
                }
            };
            (0..n * n)
                .map(|k| {
                    let i = (k / n) as isize;
                    let j = (k % n) as isize;
                    let nb = at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1);
                    0.5 * at(i, j) + 0.125 * nb
                })
                .collect()
        }
    };
    GridFunction::new(*grid, smoothed).expect("smoothed sample is finite")
}

/// Principal Dirichlet eigenvector estimate: power iteration with the shifted
/// stencil `sigma I - A` (sigma past the top of the spectrum), 50 sweeps from
/// the all-ones field. Smooth, positive, and a strong warm start for every
/// ascent in this crate.
pub fn principal_eigenvector(grid: &Grid) -> GridFunction {
    let sigma = 4.0 * grid.dim().as_usize() as f64 / (grid.h() * grid.h());
    let scale = 2.0 * grid.weight(); // dirichlet_energy_grad = 2 h^dim A u
    let mut v = vec![1.0; grid.unknowns()];
    for _ in 0..50 {
        let g = dirichlet_energy_grad(grid, &v);
        let mut w: Vec<f64> = v
            .iter()
            .zip(&g)
            .map(|(x, gk)| sigma * x - gk / scale)
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for x in &mut w {
            *x /= norm;
        }
        v = w;
    }
    let u = GridFunction::new(*grid, v).expect("power iteration stays finite");
    let norm = h1_norm(&u);
    u.scaled(1.0 / norm)
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks positivity, exact homogeneity, the compatibility quotient and
/// gradient consistency on `samples` random fields, and fits the constants
/// `C1 = min P / |u|^p`, `C2 = max Q / |u|^q`.
///
/// The first violated hypothesis aborts the run with a
/// [`Error::HypothesisViolation`] naming it.
pub fn verify_hypotheses(
    spec: &ModelSpec,
    samples: usize,
    seed: u64,
) -> Result<(ModelConstants, HypothesisReport)> {
    use rand::SeedableRng;
    if samples == 0 {
        return Err(Error::InvalidModel("samples must be >= 1".into()));
    }
    let grid = *spec.grid();
    let exps = spec.exponents();
    let (p, q, g) = (exps.p(), exps.q(), exps.gamma());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    let mut c_e3 = 0.0f64;
    let mut max_hom = 0.0f64;
    let mut max_euler = 0.0f64;
    let mut max_grad = 0.0f64;

    for _ in 0..samples {
        let u = sample_field(&grid, &mut rng);
        let me = spec.eval_triple(&u)?;

        // (E1): strict positivity away from zero.
        if !(me.p_val > 0.0 && me.t_val > 0.0 && me.q_val > 0.0) {
            return Err(Error::HypothesisViolation {
                name: "E1",
                detail: format!(
                    "non-positive functional at a nonzero field: P={}, T={}, Q={}",
                    me.p_val, me.t_val, me.q_val
                ),
            });
        }

        // (H): exact discrete homogeneity at t in {1/2, 2}.
        for t in [0.5, 2.0] {
            let mt = spec.eval_triple(&u.scaled(t))?;
            for (got, want, which) in [
                (mt.p_val, t.powf(p) * me.p_val, "P"),
                (mt.t_val, t.powf(g) * me.t_val, "T"),
                (mt.q_val, t.powf(q) * me.q_val, "Q"),
            ] {
                let rel = (got - want).abs() / want;
                max_hom = max_hom.max(rel);
                if rel > 1e-10 {
                    return Err(Error::HypothesisViolation {
                        name: "H",
                        detail: format!("{which}(t u) != t^s {which}(u): relative error {rel:e}"),
                    });
                }
            }
        }

        // Euler identities grad F . u = s F(u).
        for (grad, s, val, which) in [
            (&me.grad_p, p, me.p_val, "P"),
            (&me.grad_t, g, me.t_val, "T"),
            (&me.grad_q, q, me.q_val, "Q"),
        ] {
            let rel = (dot(grad, u.values()) - s * val).abs() / (s * val);
            max_euler = max_euler.max(rel);
            if rel > 1e-10 {
                return Err(Error::HypothesisViolation {
                    name: "H",
                    detail: format!("Euler identity failed for {which}: relative error {rel:e}"),
                });
            }
        }

        // (E3) quotient; bounded over the sample set.
        let quot = me.q_val.powf((g - p) / (q - p)) / (me.t_val * me.p_val.powf((g - q) / (q - p)));
        if !quot.is_finite() {
            return Err(Error::HypothesisViolation {
                name: "E3",
                detail: "compatibility quotient is not finite".into(),
            });
        }
        c_e3 = c_e3.max(quot);

        // (E2) constants from the sample.
        let norm = h1_norm(&u);
        c1 = c1.min(me.p_val / norm.powf(p));
        c2 = c2.max(me.q_val / norm.powf(q));

        // Gradient check: directional derivatives against central differences
        // on 5 random directions, step 1e-5 * |u|.
        for _ in 0..5 {
            let dir = sample_field(&grid, &mut rng);
            let dn = l2(dir.values());
            let step = 1e-5 * norm / dn;
            let mut plus = u.clone();
            let mut minus = u.clone();
            for ((vp, vm), d) in plus
                .values_mut()
                .iter_mut()
                .zip(minus.values_mut())
                .zip(dir.values())
            {
                *vp += step * d;
                *vm -= step * d;
            }
            let ep = spec.eval_triple(&plus)?;
            let em = spec.eval_triple(&minus)?;
            for (grad, fp, fm, val) in [
                (&me.grad_p, ep.p_val, em.p_val, me.p_val),
                (&me.grad_t, ep.t_val, em.t_val, me.t_val),
                (&me.grad_q, ep.q_val, em.q_val, me.q_val),
            ] {
                let fd = (fp - fm) / (2.0 * step);
                let an = dot(grad, dir.values());
                let scale = an.abs().max(val / norm * dn).max(f64::MIN_POSITIVE);
                let rel = (fd - an).abs() / scale;
                max_grad = max_grad.max(rel);
                if rel > 1e-6 {
                    return Err(Error::HypothesisViolation {
                        name: "H",
                        detail: format!(
                            "gradient mismatch: finite difference {fd:e} vs assembled {an:e}"
                        ),
                    });
                }
            }
        }
    }

    let constants = ModelConstants { c1, c2, c_e3 };
    Ok((
        constants,
        HypothesisReport {
            samples,
            max_homogeneity_err: max_hom,
            max_euler_err: max_euler,
            max_gradient_err: max_grad,
            constants,
        },
    ))
}
