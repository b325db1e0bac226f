//! Exact scalar analysis of one-dimensional fiber maps.
//!
//! For coefficients `A, B, C > 0`, a parameter `lambda > 0` and exponents
//! `1 < p < q < gamma`, the fiber map is the three-term power function
//!
//! ```text
//! phi(t) = (A/p) t^p + (lambda B / gamma) t^gamma - (C/q) t^q,   t > 0.
//! ```
//!
//! Dividing `phi'(t)` by `t^(p-1)` gives the reduced derivative
//! `h(t) = A + lambda B t^(gamma-p) - C t^(q-p)`, which has a unique interior
//! minimum. The sign of `h` at that minimum decides the shape of `phi`:
//! two critical points (case I), one degenerate critical point (case II),
//! or strictly increasing (case III). The parameter values at which the
//! degenerate and zero-energy configurations occur have closed forms — the
//! nonlinear Rayleigh quotients [`rayleigh_lambda`] and [`rayleigh_lambda0`] —
//! and everything downstream (extremal parameters, branch solvers, sweeps)
//! reduces to this module.

use crate::error::{Error, Result};

/// Homogeneity exponents `(p, q, gamma)` with `1 < p < q < gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    p: f64,
    q: f64,
    gamma: f64,
}

impl Exponents {
    pub fn new(p: f64, q: f64, gamma: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidExponents("exponents must be finite".into()));
        }
        if !(1.0 < p && p < q && q < gamma) {
            return Err(Error::InvalidExponents(format!(
                "requires 1 < p < q < gamma, got p={p}, q={q}, gamma={gamma}"
            )));
        }
        Ok(Self { p, q, gamma })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Ratio constant `(q/gamma) * (q/p)^((gamma-q)/(q-p))`, always > 1.
    ///
    /// This is the exact factor between the degenerate and zero-energy
    /// Rayleigh quotients: `rayleigh_lambda = ratio_constant * rayleigh_lambda0`
    /// for every coefficient triple.
    pub fn ratio_constant(&self) -> f64 {
        let e = (self.gamma - self.q) / (self.q - self.p);
        (self.q / self.gamma) * (self.q / self.p).powf(e)
    }
}

/// One fiber map: scalars `(A, B, C, lambda)` plus the exponent triple.
#[derive(Debug, Clone, Copy)]
pub struct FiberCoefficients {
    a: f64,
    b: f64,
    c: f64,
    lambda: f64,
    exps: Exponents,
}

impl FiberCoefficients {
    pub fn new(a: f64, b: f64, c: f64, lambda: f64, exps: Exponents) -> Result<Self> {
        for (name, v) in [("A", a), ("B", b), ("C", c), ("lambda", lambda)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidCoefficients(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            lambda,
            exps,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn exponents(&self) -> Exponents {
        self.exps
    }

    /// Same coefficients at a different parameter.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.c, lambda, self.exps)
    }

    /// Reduced derivative `h(t) = A + lambda B t^(gamma-p) - C t^(q-p)`.
    fn reduced(&self, t: f64) -> f64 {
        let e = self.exps;
        self.a + self.lambda * self.b * t.powf(e.gamma - e.p) - self.c * t.powf(e.q - e.p)
    }

    fn reduced_deriv(&self, t: f64) -> f64 {
        let e = self.exps;
        self.lambda * self.b * (e.gamma - e.p) * t.powf(e.gamma - e.p - 1.0)
            - self.c * (e.q - e.p) * t.powf(e.q - e.p - 1.0)
    }

    /// Location of the unique interior minimum of `h`.
    fn reduced_min_location(&self) -> f64 {
        let e = self.exps;
        ((e.q - e.p) * self.c / ((e.gamma - e.p) * self.lambda * self.b))
            .powf(1.0 / (e.gamma - e.q))
    }
}

/// How close `h` may get to zero at its minimum (relative to `A`) before the
/// fiber is declared degenerate. Case II is measure-zero; floating arithmetic
/// cannot hit the exact boundary, so classification uses this band.
#[derive(Debug, Clone, Copy)]
pub struct DegeneracyTolerance(pub f64);

impl Default for DegeneracyTolerance {
    fn default() -> Self {
        DegeneracyTolerance(1e-10)
    }
}

/// The three fiber shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberCase {
    /// Two critical points: local maximum at `t_minus`, local minimum at `t_plus`.
    I { t_minus: f64, t_plus: f64 },
    /// One degenerate critical point (`phi' = phi'' = 0` there).
    II { t_deg: f64 },
    /// Strictly increasing, no critical points.
    III,
}

/// Classification outcome plus the signed margin `h(t_m)` used for the call.
#[derive(Debug, Clone, Copy)]
pub struct FiberClassification {
    pub case: FiberCase,
    /// Value of the reduced derivative at its interior minimum. Negative in
    /// case I, near zero in case II, positive in case III.
    pub margin: f64,
}

/// Evaluates `phi(t)`.
pub fn eval_fiber(coeffs: &FiberCoefficients, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidCoefficients(format!("t must be > 0, got {t}")));
    }
    let e = coeffs.exps;
    let v = coeffs.a / e.p * t.powf(e.p) + coeffs.lambda * coeffs.b / e.gamma * t.powf(e.gamma)
        - coeffs.c / e.q * t.powf(e.q);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { t })
    }
}

/// Evaluates `(phi'(t), phi''(t))`.
pub fn eval_fiber_derivatives(coeffs: &FiberCoefficients, t: f64) -> Result<(f64, f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidCoefficients(format!("t must be > 0, got {t}")));
    }
    let e = coeffs.exps;
    let d1 = coeffs.a * t.powf(e.p - 1.0) + coeffs.lambda * coeffs.b * t.powf(e.gamma - 1.0)
        - coeffs.c * t.powf(e.q - 1.0);
    let d2 = coeffs.a * (e.p - 1.0) * t.powf(e.p - 2.0)
        + coeffs.lambda * coeffs.b * (e.gamma - 1.0) * t.powf(e.gamma - 2.0)
        - coeffs.c * (e.q - 1.0) * t.powf(e.q - 2.0);
    if d1.is_finite() && d2.is_finite() {
        Ok((d1, d2))
    } else {
        Err(Error::Overflow { t })
    }
}

/// Classifies the fiber shape and, in case I, locates both roots of `h`.
///
/// Roots are bracketed on either side of the interior minimum `t_m`, the upper
/// bracket found by doubling until `h > 0` (capped at `2^60 * t_m`), then
/// refined by bisection and a Newton polish to relative tolerance 1e-14.
pub fn classify_fiber(
    coeffs: &FiberCoefficients,
    tol: DegeneracyTolerance,
) -> Result<FiberClassification> {
    let t_m = coeffs.reduced_min_location();
    if !t_m.is_finite() || t_m <= 0.0 {
        return Err(Error::InvalidExponents(format!(
            "reduced minimum location is not finite (t_m = {t_m})"
        )));
    }
    let margin = coeffs.reduced(t_m);
    if !margin.is_finite() {
        return Err(Error::Overflow { t: t_m });
    }
    let band = tol.0 * coeffs.a;
    if margin.abs() <= band {
        return Ok(FiberClassification {
            case: FiberCase::II { t_deg: t_m },
            margin,
        });
    }
    if margin > 0.0 {
        return Ok(FiberClassification {
            case: FiberCase::III,
            margin,
        });
    }

    // Case I. Left bracket: h -> A > 0 as t -> 0; h(t) > 0 is guaranteed once
    // C t^(q-p) < A, so half of min(t_m, (A/C)^(1/(q-p))) always works.
    let e = coeffs.exps;
    let t_a = (coeffs.a / coeffs.c).powf(1.0 / (e.q - e.p));
    let lo = 0.5 * t_m.min(t_a);
    let t_minus = refine_root(coeffs, lo, t_m)?;

    // Right bracket: h -> +inf since gamma > q; double until positive.
    let mut hi = 2.0 * t_m;
    let mut doublings = 0;
    while coeffs.reduced(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::BracketCap);
        }
        if !hi.is_finite() {
            return Err(Error::Overflow { t: hi });
        }
    }
    let t_plus = refine_root(coeffs, t_m, hi)?;

    Ok(FiberClassification {
        case: FiberCase::I { t_minus, t_plus },
        margin,
    })
}

/// Bisection to width 1e-8 relative, then Newton to 1e-14 relative, staying
/// inside the bracket.
fn refine_root(coeffs: &FiberCoefficients, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f_lo = coeffs.reduced(lo);
    debug_assert!(f_lo > 0.0 || coeffs.reduced(hi) > 0.0);
    // Keep the bracket oriented so the sign of f(lo) is known.
    let lo_positive = f_lo > 0.0;
    while (hi - lo) > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        let fm = coeffs.reduced(mid);
        if !fm.is_finite() {
            return Err(Error::Overflow { t: mid });
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..64 {
        let f = coeffs.reduced(t);
        let df = coeffs.reduced_deriv(t);
        if df == 0.0 || !f.is_finite() || !df.is_finite() {
            break;
        }
        let mut next = t - f / df;
        if next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (coeffs.reduced(next) > 0.0) == lo_positive {
            lo = next;
        } else {
            hi = next;
        }
        let delta = (next - t).abs();
        t = next;
        if delta <= 1e-14 * t {
            break;
        }
    }
    Ok(t)
}

/// Closed-form degenerate parameter
/// `lambda(A,B,C) = ((q-p)/(g-p)) ((g-q)/(g-p))^((g-q)/(q-p)) C^((g-p)/(q-p)) / (B A^((g-q)/(q-p)))`,
/// the unique `lambda` at which the fiber has a critical point with vanishing
/// second derivative.
pub fn rayleigh_lambda(a: f64, b: f64, c: f64, exps: &Exponents) -> Result<f64> {
    let (p, q, g) = (exps.p, exps.q, exps.gamma);
    let beta = (g - q) / (q - p);
    let alpha = (g - p) / (q - p);
    let v = (q - p) / (g - p) * ((g - q) / (g - p)).powf(beta) * c.powf(alpha)
        / (b * a.powf(beta));
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::NonFinite("rayleigh_lambda"))
    }
}

/// Closed-form zero-energy parameter
/// `lambda0(A,B,C) = (g/q)((q-p)/(g-p)) ((p/q)(g-q)/(g-p))^((g-q)/(q-p)) C^((g-p)/(q-p)) / (B A^((g-q)/(q-p)))`,
/// the unique `lambda` at which the fiber has a zero-energy critical point.
pub fn rayleigh_lambda0(a: f64, b: f64, c: f64, exps: &Exponents) -> Result<f64> {
    let (p, q, g) = (exps.p, exps.q, exps.gamma);
    let beta = (g - q) / (q - p);
    let alpha = (g - p) / (q - p);
    let v = (g / q) * (q - p) / (g - p) * ((p / q) * (g - q) / (g - p)).powf(beta)
        * c.powf(alpha)
        / (b * a.powf(beta));
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::NonFinite("rayleigh_lambda0"))
    }
}

/// Degenerate scale `t(A,B,C;lambda) = ((1/lambda)((q-p)/(g-p))(C/B))^(1/(g-q))`.
///
/// At `lambda = rayleigh_lambda` this is where `phi' = phi'' = 0`.
pub fn rayleigh_t(b: f64, c: f64, lambda: f64, exps: &Exponents) -> Result<f64> {
    let (p, q, g) = (exps.p, exps.q, exps.gamma);
    let v = ((q - p) / (g - p) * c / (lambda * b)).powf(1.0 / (g - q));
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::NonFinite("rayleigh_t"))
    }
}

/// Zero-energy scale `t0(A,B,C;lambda) = ((1/lambda)(g/q)((q-p)/(g-p))(C/B))^(1/(g-q))`.
///
/// At `lambda = rayleigh_lambda0` this is where `phi = phi' = 0`.
pub fn rayleigh_t0(b: f64, c: f64, lambda: f64, exps: &Exponents) -> Result<f64> {
    let (p, q, g) = (exps.p, exps.q, exps.gamma);
    let v = ((g / q) * (q - p) / (g - p) * c / (lambda * b)).powf(1.0 / (g - q));
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::NonFinite("rayleigh_t0"))
    }
}

/// The closed-form Rayleigh data of one coefficient triple: both extreme
/// parameters and the scales at which they are attained.
#[derive(Debug, Clone, Copy)]
pub struct RayleighValues {
    pub lambda_u: f64,
    pub lambda0_u: f64,
    /// Degenerate scale evaluated at `lambda = lambda_u`.
    pub t_u: f64,
    /// Zero-energy scale evaluated at `lambda = lambda0_u`.
    pub t0_u: f64,
}

pub fn rayleigh_values(a: f64, b: f64, c: f64, exps: &Exponents) -> Result<RayleighValues> {
    let lambda_u = rayleigh_lambda(a, b, c, exps)?;
    let lambda0_u = rayleigh_lambda0(a, b, c, exps)?;
    Ok(RayleighValues {
        lambda_u,
        lambda0_u,
        t_u: rayleigh_t(b, c, lambda_u, exps)?,
        t0_u: rayleigh_t0(b, c, lambda0_u, exps)?,
    })
}
