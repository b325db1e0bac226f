//! Projected gradient descent on the discrete H^1_0 unit sphere.
//!
//! Every objective in this crate (Rayleigh quotients, reduced branch
//! energies) is 0-homogeneous, so optimizing over rays reduces to the unit
//! sphere `D(u) = 1`. Descent runs in the H^1 metric: the nodal gradient is
//! preconditioned by the inverse stiffness operator (exact tridiagonal solve
//! in 1D, sine-eigenbasis solve in 2D), which makes the iteration count
//! mesh-independent. For a 0-homogeneous objective the Euclidean identity
//! `grad F . u = 0` means the Sobolev gradient is automatically H^1-orthogonal
//! to `u`, i.e. tangent to the sphere, and a sphere-critical point has
//! vanishing full gradient (the multiplier dies against Euler's identity) —
//! so a tight tangential tolerance certifies a genuine critical point.
//! A Barzilai-Borwein trial step is polished by an Armijo backtracking line
//! search that tolerates objective differences at rounding-noise level.

use crate::model::{dirichlet_energy, dirichlet_energy_grad, Grid, GridDim};

/// Options shared by every ascent and descent in the crate.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerOptions {
    pub max_iter: usize,
    /// Relative tangential-gradient tolerance.
    pub grad_tol: f64,
    /// Number of start directions per solve.
    pub restarts: usize,
    pub seed: u64,
    /// First-iteration trial displacement on the sphere.
    pub init_step: f64,
    /// Line-search shrink factor, in (0, 1).
    pub shrink: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Worker threads for independent restarts (1 = sequential).
    pub threads: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            grad_tol: 1e-9,
            restarts: 8,
            seed: 0,
            init_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            threads: 1,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        if self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::Config(
                "max_iter and restarts must be positive".into(),
            ));
        }
        if !(self.grad_tol > 0.0 && self.init_step > 0.0 && self.armijo > 0.0) {
            return Err(Error::Config(
                "grad_tol, init_step and armijo must be positive".into(),
            ));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config("shrink must lie in (0, 1)".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        Ok(())
    }
}

/// One objective evaluation: value, nodal gradient, and a positive scale the
/// gradient norm is measured against for convergence.
pub(crate) struct EvalPoint {
    pub value: f64,
    pub grad: Vec<f64>,
    pub scale: f64,
}

/// Result of one sphere descent.
#[derive(Debug, Clone)]
pub(crate) struct SphereOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    /// Final tangential gradient norm relative to the scale.
    #[allow(dead_code)] // diagnostic, read by tests and debug output
    pub rel_grad: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize_h1(grid: &Grid, v: &mut [f64]) -> bool {
    let norm = dirichlet_energy(grid, v).sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

/// Exact solver for the stiffness operator `K` defined by
/// `dirichlet_energy_grad = 2 K u`: tridiagonal elimination in 1D, separable
/// sine-eigenbasis solve in 2D. Applying `K^{-1}` to Euclidean gradients turns
/// the descent into a Sobolev-gradient iteration with mesh-independent
/// conditioning.
pub(crate) struct StiffnessSolver {
    grid: Grid,
    /// 2D only: the symmetric sine modes, row-major `n x n`.
    modes: Vec<f64>,
    /// 2D only: eigenvalues of the 1D second-difference stencil.
    eigs: Vec<f64>,
}

impl StiffnessSolver {
    pub fn new(grid: &Grid) -> Self {
        match grid.dim() {
            GridDim::One => Self {
                grid: *grid,
                modes: Vec::new(),
                eigs: Vec::new(),
            },
            GridDim::Two => {
                let n = grid.n();
                let step = std::f64::consts::PI / (n as f64 + 1.0);
                let mut modes = vec![0.0; n * n];
                for j in 0..n {
                    for k in 0..n {
                        modes[j * n + k] = ((j + 1) as f64 * (k + 1) as f64 * step).sin();
                    }
                }
                let eigs = (0..n)
                    .map(|j| {
                        let s = ((j + 1) as f64 * step / 2.0).sin();
                        4.0 * s * s
                    })
                    .collect();
                Self {
                    grid: *grid,
                    modes,
                    eigs,
                }
            }
        }
    }

    /// Solves `K s = g`.
    pub fn solve(&self, g: &[f64]) -> Vec<f64> {
        match self.grid.dim() {
            GridDim::One => {
                // K = (1/h) tridiag(-1, 2, -1); Thomas elimination.
                let n = self.grid.n();
                let h = self.grid.h();
                let mut c = vec![0.0; n]; // scratch superdiagonal
                let mut s = vec![0.0; n];
                let (a, b) = (-1.0 / h, 2.0 / h);
                c[0] = a / b;
                s[0] = g[0] / b;
                for i in 1..n {
                    let m = b - a * c[i - 1];
                    c[i] = a / m;
                    s[i] = (g[i] - a * s[i - 1]) / m;
                }
                for i in (0..n - 1).rev() {
                    let next = s[i + 1];
                    s[i] -= c[i] * next;
                }
                s
            }
            GridDim::Two => {
                // K = A (x) I + I (x) A with A the h-free second-difference
                // stencil; diagonalize both factors by the sine basis.
                let n = self.grid.n();
                let coeff = self.sine_transform(g, n);
                let mut scaled = vec![0.0; n * n];
                let norm = 2.0 / (n as f64 + 1.0);
                for i in 0..n {
                    for j in 0..n {
                        scaled[i * n + j] =
                            coeff[i * n + j] / (self.eigs[i] + self.eigs[j]) * norm * norm;
                    }
                }
                self.sine_transform(&scaled, n)
            }
        }
    }

    /// Applies `S x S` with the symmetric sine-mode matrix.
    fn sine_transform(&self, x: &[f64], n: usize) -> Vec<f64> {
        let s = &self.modes;
        let mut tmp = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += s[i * n + k] * x[k * n + j];
                }
                tmp[i * n + j] = acc;
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += tmp[i * n + k] * s[k * n + j];
                }
                out[i * n + j] = acc;
            }
        }
        out
    }
}

/// Minimizes a 0-homogeneous objective over the H^1 unit sphere.
///
/// `eval` returns `None` where the objective is undefined (e.g. the ray
/// admits no Nehari projection); such trial points are rejected by the line
/// search. Returns `None` when the start itself is infeasible.
pub(crate) fn minimize_on_sphere<F>(
    grid: &Grid,
    eval: F,
    start: &[f64],
    opts: &OptimizerOptions,
) -> Option<SphereOutcome>
where
    F: Fn(&[f64]) -> Option<EvalPoint>,
{
    let solver = StiffnessSolver::new(grid);
    minimize_on_sphere_with(grid, &solver, eval, start, opts)
}

pub(crate) fn minimize_on_sphere_with<F>(
    grid: &Grid,
    solver: &StiffnessSolver,
    eval: F,
    start: &[f64],
    opts: &OptimizerOptions,
) -> Option<SphereOutcome>
where
    F: Fn(&[f64]) -> Option<EvalPoint>,
{
    let mut u = start.to_vec();
    if !normalize_h1(grid, &mut u) {
        return None;
    }
    let mut e = eval(&u)?;
    // Sobolev gradient; tangent to the sphere since grad . u = 0.
    let mut sg = solver.solve(&e.grad);
    // H^1 norm^2 of the Sobolev gradient equals grad . sg.
    let mut gn2 = dot(&e.grad, &sg).max(0.0);

    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // previous (u, sg)
    let mut last_step = 0.0f64;
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..opts.max_iter {
        iterations = it;
        if gn2.sqrt() <= opts.grad_tol * e.scale {
            converged = true;
            break;
        }

        // Trial step: Barzilai-Borwein in the H^1 metric when history is
        // available, otherwise a displacement of size init_step on the sphere.
        let mut alpha = match &prev {
            Some((u_prev, sg_prev)) => {
                let s: Vec<f64> = u.iter().zip(u_prev).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = sg.iter().zip(sg_prev).map(|(a, b)| a - b).collect();
                // <s, y>_H1 via the stiffness form: K s . y = gradD(s)/2 . y.
                let ks = dirichlet_energy_grad(grid, &s);
                let sy = 0.5 * dot(&ks, &y);
                if sy > 0.0 {
                    let ss = dirichlet_energy(grid, &s);
                    (ss / sy).clamp(1e-12, 1e12)
                } else {
                    (last_step / opts.shrink).min(1e12)
                }
            }
            None => opts.init_step / gn2.sqrt().max(1e-300),
        };

        // Near an optimum the decrease demanded by the Armijo test drops below
        // the rounding noise of the objective; accepting within that noise lets
        // the Barzilai-Borwein steps keep contracting the gradient.
        let noise = 8.0 * f64::EPSILON * e.value.abs().max(e.scale);

        let mut accepted = false;
        for _ in 0..80 {
            let mut trial: Vec<f64> = u.iter().zip(&sg).map(|(x, s)| x - alpha * s).collect();
            if !normalize_h1(grid, &mut trial) {
                alpha *= opts.shrink;
                continue;
            }
            if let Some(et) = eval(&trial) {
                if et.value <= e.value - opts.armijo * alpha * gn2 + noise {
                    let sg_new = solver.solve(&et.grad);
                    let gn2_new = dot(&et.grad, &sg_new).max(0.0);
                    prev = Some((std::mem::take(&mut u), std::mem::replace(&mut sg, sg_new)));
                    u = trial;
                    e = et;
                    gn2 = gn2_new;
                    last_step = alpha;
                    accepted = true;
                    break;
                }
            }
            alpha *= opts.shrink;
        }
        if !accepted {
            // Line search stalled: either at numerical floor or boxed in by an
            // infeasible region. Report the best point found.
            converged = gn2.sqrt() <= 10.0 * opts.grad_tol * e.scale;
            break;
        }
    }
    if gn2.sqrt() <= opts.grad_tol * e.scale {
        converged = true;
    }

    Some(SphereOutcome {
        point: u,
        value: e.value,
        rel_grad: if e.scale > 0.0 {
            gn2.sqrt() / e.scale
        } else {
            gn2.sqrt()
        },
        iterations,
        converged,
    })
}

/// Runs one descent per start direction, optionally on `opts.threads` worker
/// threads. Results come back indexed by start, so the reduction order (and
/// therefore every report) is independent of thread scheduling.
pub(crate) fn multistart<F>(
    grid: &Grid,
    eval: F,
    starts: &[Vec<f64>],
    opts: &OptimizerOptions,
) -> Vec<Option<SphereOutcome>>
where
    F: Fn(&[f64]) -> Option<EvalPoint> + Sync,
{
    let threads = opts.threads.min(starts.len().max(1));
    if threads <= 1 {
        let solver = StiffnessSolver::new(grid);
        return starts
            .iter()
            .map(|s| minimize_on_sphere_with(grid, &solver, &eval, s, opts))
            .collect();
    }
    let mut results: Vec<Option<SphereOutcome>> = vec![None; starts.len()];
    let eval_ref = &eval;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let indices: Vec<usize> = (t..starts.len()).step_by(threads).collect();
            let starts_ref = &starts;
            handles.push(scope.spawn(move || {
                let solver = StiffnessSolver::new(grid);
                indices
                    .into_iter()
                    .map(|i| {
                        (
                            i,
                            minimize_on_sphere_with(grid, &solver, eval_ref, &starts_ref[i], opts),
                        )
                    })
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            for (i, out) in h.join().expect("restart worker panicked") {
                results[i] = out;
            }
        }
    });
    results
}

/// Picks the best converged outcome (smallest value), falling back to the best
/// outcome overall. Ties resolve to the lower start index.
pub(crate) fn best_outcome(outcomes: &[Option<SphereOutcome>]) -> Option<(usize, &SphereOutcome)> {
    let mut best: Option<(usize, &SphereOutcome)> = None;
    for (i, o) in outcomes.iter().enumerate() {
        let Some(o) = o else { continue };
        best = match best {
            None => Some((i, o)),
            Some((_, b)) => {
                let better = (o.converged && !b.converged)
                    || (o.converged == b.converged && o.value < b.value);
                if better {
                    Some((i, o))
                } else {
                    best
                }
            }
        };
    }
    best
}
