use serde::{Deserialize, Serialize};

use crate::defaults::AUDIT_POINTS;
use crate::error::{Error, Result};
use crate::model::Issue;
use crate::scalar::{clamp, Scalar};

/// Speed law `F`: drivers move at `F(gap)` where `gap` is the delayed
/// distance to the driver ahead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocityProfile<T> {
    /// `k + beta (x - gap)^2 + alpha (x - gap)` on `[0, 2 gap]`, constant outside.
    Quadratic { k: T, beta: T, alpha: T, gap: T },
    /// `slope * clamp(x, lo, hi)`.
    LinearClamped { slope: T, lo: T, hi: T },
    /// Piecewise linear through `(xs, values)`, constant outside the nodes.
    /// `c_f` and `f_sup` are declared and trusted only after an audit.
    Tabulated {
        xs: Vec<T>,
        values: Vec<T>,
        c_f: T,
        f_sup: T,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        audit_points: Option<usize>,
    },
}

/// Lipschitz constant and sup bound of a speed law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzData<T> {
    pub c_f: T,
    pub f_sup: T,
}

impl<T: Scalar> VelocityProfile<T> {
    pub fn quadratic(k: T, beta: T, alpha: T, gap: T) -> Result<Self> {
        let v = VelocityProfile::Quadratic { k, beta, alpha, gap };
        v.check()?;
        Ok(v)
    }

    pub fn linear_clamped(slope: T, lo: T, hi: T) -> Result<Self> {
        let v = VelocityProfile::LinearClamped { slope, lo, hi };
        v.check()?;
        Ok(v)
    }

    pub fn tabulated(xs: Vec<T>, values: Vec<T>, c_f: T, f_sup: T) -> Result<Self> {
        let v = VelocityProfile::Tabulated { xs, values, c_f, f_sup, audit_points: None };
        v.check()?;
        Ok(v)
    }

    /// Structural invariants (the monotonicity/Lipschitz audit of tabulated
    /// laws is part of [`lipschitz_data`](Self::lipschitz_data)).
    pub fn issues(&self, at: &str) -> Vec<Issue> {
        let mut out = Vec::new();
        let mut bad = |field: &str, msg: String| out.push(Issue::new(format!("{at}.{field}"), msg));
        match self {
            VelocityProfile::Quadratic { k, beta, alpha, gap } => {
                for (name, v) in [("k", k), ("beta", beta), ("alpha", alpha), ("gap", gap)] {
                    if !(v.is_finite() && *v > T::zero()) {
                        bad(name, format!("must be finite and positive, got {v}"));
                    }
                }
                let bound = T::lit(4.0) * *beta * *gap;
                if !(*alpha > bound) {
                    bad("alpha", format!("alpha > 4 beta gap violated: {alpha} <= {bound}"));
                }
            }
            VelocityProfile::LinearClamped { slope, lo, hi } => {
                if !(slope.is_finite() && *slope >= T::zero()) {
                    bad("slope", format!("must be finite and nonnegative, got {slope}"));
                }
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    bad("lo", format!("need finite lo <= hi, got [{lo}, {hi}]"));
                }
            }
            VelocityProfile::Tabulated { xs, values, c_f, f_sup, audit_points } => {
                if xs.len() < 2 || xs.len() != values.len() {
                    bad("xs", format!("need >= 2 nodes and matching values ({} vs {})", xs.len(), values.len()));
                }
                if xs.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                    bad("values", "non-finite node".into());
                }
                if let Some(w) = xs.windows(2).position(|w| !(w[0] < w[1])) {
                    bad("xs", format!("not strictly increasing at node {w}"));
                }
                if !(c_f.is_finite() && *c_f >= T::zero()) {
                    bad("c_f", format!("must be finite and nonnegative, got {c_f}"));
                }
                if !(f_sup.is_finite() && *f_sup >= T::zero()) {
                    bad("f_sup", format!("must be finite and nonnegative, got {f_sup}"));
                }
                if matches!(audit_points, Some(n) if *n < 2) {
                    bad("audit_points", "need at least 2 audit points".into());
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        match self.issues("velocity").into_iter().next() {
            Some(issue) => Err(Error::Validation(issue.to_string())),
            None => Ok(()),
        }
    }

    /// `F(gap)`; rejects non-finite gaps.
    pub fn eval(&self, gap: T) -> Result<T> {
        if !gap.is_finite() {
            return Err(Error::Domain(format!("non-finite gap {gap}")));
        }
        Ok(self.speed(gap))
    }

    /// `F(gap)` without the finiteness check; the integrator's inner loop.
    #[inline]
    pub fn speed(&self, gap: T) -> T {
        match self {
            VelocityProfile::Quadratic { k, beta, alpha, gap: l } => {
                let d = clamp(gap, T::zero(), *l + *l) - *l;
                *k + *beta * d * d + *alpha * d
            }
            VelocityProfile::LinearClamped { slope, lo, hi } => *slope * clamp(gap, *lo, *hi),
            VelocityProfile::Tabulated { xs, values, .. } => piecewise_linear(xs, values, gap),
        }
    }

    /// `C_F` and `F_sup`. Closed form for the analytic kinds; for tabulated
    /// laws the declared constants after a sample audit.
    pub fn lipschitz_data(&self) -> Result<LipschitzData<T>> {
        self.check()?;
        match self {
            VelocityProfile::Quadratic { k, beta, alpha, gap } => Ok(LipschitzData {
                // |F'| = |2 beta (x - gap) + alpha| peaks at x = 2 gap
                c_f: *alpha + T::lit(2.0) * *beta * *gap,
                f_sup: *k + *beta * *gap * *gap + *alpha * *gap,
            }),
            VelocityProfile::LinearClamped { slope, lo, hi } => Ok(LipschitzData {
                c_f: if lo < hi { *slope } else { T::zero() },
                f_sup: *slope * lo.abs().max(hi.abs()),
            }),
            VelocityProfile::Tabulated { c_f, f_sup, audit_points, .. } => {
                self.audit(audit_points.unwrap_or(AUDIT_POINTS), *c_f, *f_sup)?;
                Ok(LipschitzData { c_f: *c_f, f_sup: *f_sup })
            }
        }
    }

    fn audit(&self, points: usize, c_f: T, f_sup: T) -> Result<()> {
        let VelocityProfile::Tabulated { xs, .. } = self else {
            return Ok(());
        };
        let tol = |scale: T| T::lit(1e-12) * (T::one() + scale.abs());
        let fail = |x1: T, x2: T, what: &str| {
            Err(Error::Validation(format!("velocity audit: {what} violated between x1 = {x1} and x2 = {x2}")))
        };
        // node segments carry the exact slopes of a piecewise linear law
        let mut pairs: Vec<(T, T)> = xs.windows(2).map(|w| (w[0], w[1])).collect();
        let first = xs[0];
        let last = xs[xs.len() - 1];
        let pad = (last - first) * T::lit(0.25);
        let (a, b) = (first - pad, last + pad);
        let h = (b - a) / T::of_usize(points - 1);
        let grid: Vec<T> = (0..points).map(|k| a + h * T::of_usize(k)).collect();
        pairs.extend(grid.windows(2).map(|w| (w[0], w[1])));
        for (x1, x2) in pairs {
            let (f1, f2) = (self.speed(x1), self.speed(x2));
            if f2 < f1 - tol(f1) {
                return fail(x1, x2, "monotonicity");
            }
            if (f2 - f1).abs() > c_f * (x2 - x1) + tol(f1) {
                return fail(x1, x2, "Lipschitz bound");
            }
            if f1.abs() > f_sup + tol(f_sup) || f2.abs() > f_sup + tol(f_sup) {
                return fail(x1, x2, "sup bound");
            }
        }
        Ok(())
    }
}

pub(crate) fn piecewise_linear<T: Scalar>(xs: &[T], values: &[T], x: T) -> T {
    let n = xs.len();
    if x <= xs[0] {
        return values[0];
    }
    if x >= xs[n - 1] {
        return values[n - 1];
    }
    let k = xs.partition_point(|v| *v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    values[k - 1] + w * (values[k] - values[k - 1])
}
