//! Admissible spacing functions `rho`: positive, nondecreasing on
//! `[0, tau]` with `1 + C_F rho(tau) int_0^s rho < rho(s)` for every lag `s`.
//!
//! Such a function exists iff `tau < 1 / (e C_F)`. Constant functions only
//! exist below `1 / (4 C_F)`. Above that, the exponential family
//! `rho(s) = lambda exp(lambda gamma0 C_F s)` with
//! `gamma0 = lambda exp(lambda gamma0 C_F tau)` covers the whole range.

use serde::{Deserialize, Serialize};

use crate::defaults::MIN_CERTIFICATE_POINTS;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RhoKind<T> {
    Constant { value: T },
    Exponential { lambda: T, gamma0: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoFunction<T> {
    #[serde(flatten)]
    pub kind: RhoKind<T>,
    /// Horizon of validity (the maximal reaction time).
    pub tau: T,
    pub c_f: T,
}

impl<T: Scalar> RhoFunction<T> {
    pub fn constant(value: T, tau: T, c_f: T) -> Self {
        RhoFunction { kind: RhoKind::Constant { value }, tau, c_f }
    }

    pub fn eval(&self, lag: T) -> T {
        match self.kind {
            RhoKind::Constant { value } => value,
            RhoKind::Exponential { lambda, gamma0 } => lambda * (lambda * gamma0 * self.c_f * lag).exp(),
        }
    }

    /// `int_0^lag rho(s) ds` in closed form.
    pub fn integral(&self, lag: T) -> T {
        match self.kind {
            RhoKind::Constant { value } => value * lag,
            RhoKind::Exponential { lambda, gamma0 } => {
                let rate = gamma0 * self.c_f;
                (lambda * rate * lag).exp_m1() / rate
            }
        }
    }

    /// `rho(tau)`, the coefficient of the certified decay rate `C_F rho(tau)`.
    pub fn at_horizon(&self) -> T {
        self.eval(self.tau)
    }
}

/// `1 / (e C_F)`.
pub fn homogenization_threshold<T: Scalar>(c_f: T) -> Result<T> {
    if !(c_f > T::zero() && c_f.is_finite()) {
        return Err(Error::Domain(format!("C_F must be positive and finite, got {c_f}")));
    }
    Ok(T::one() / (T::E() * c_f))
}

/// `1 / (4 C_F)`.
pub fn constant_rho_threshold<T: Scalar>(c_f: T) -> Result<T> {
    if !(c_f > T::zero() && c_f.is_finite()) {
        return Err(Error::Domain(format!("C_F must be positive and finite, got {c_f}")));
    }
    Ok(T::one() / (T::lit(4.0) * c_f))
}

/// Open interval of admissible constants: the roots of `C_F tau x^2 - x + 1`,
/// `None` when that quadratic has no negative part.
pub fn constant_rho_interval<T: Scalar>(c_f: T, tau: T) -> Result<Option<(T, T)>> {
    constant_rho_threshold(c_f)?;
    if !(tau > T::zero()) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let a = c_f * tau;
    let disc = T::one() - T::lit(4.0) * a;
    if disc <= T::zero() {
        return Ok(None);
    }
    let s = disc.sqrt();
    let two_a = a + a;
    Ok(Some(((T::one() - s) / two_a, (T::one() + s) / two_a)))
}

/// Builds the exponential spacing function for `lambda` in
/// `(1, sqrt(1 / (e tau C_F)))`. `gamma0` is the smallest root of
/// `ln g - lambda g tau C_F = ln lambda`, found by bisection on
/// `[lambda, 1 / (lambda tau C_F)]` where the left side increases.
/// Without `lambda`, the geometric midpoint of the range is used.
pub fn construct_rho<T: Scalar>(tau: T, c_f: T, lambda: Option<T>) -> Result<RhoFunction<T>> {
    let threshold = homogenization_threshold(c_f)?;
    if !(tau > T::zero() && tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be positive and finite, got {tau}")));
    }
    if tau >= threshold {
        return Err(Error::Infeasible(format!(
            "no admissible spacing function: tau = {tau} >= 1/(e C_F) = {threshold}"
        )));
    }
    let upper = (T::one() / (T::E() * tau * c_f)).sqrt();
    let lambda = lambda.unwrap_or_else(|| upper.sqrt());
    if !(lambda > T::one() && lambda < upper) {
        return Err(Error::Domain(format!("lambda = {lambda} outside (1, {upper})")));
    }

    let slope = lambda * tau * c_f;
    let h = |g: T| g.ln() - slope * g - lambda.ln();
    let mut lo = lambda;
    let mut hi = T::one() / slope;
    if !(h(lo) < T::zero() && h(hi) > T::zero()) {
        return Err(Error::Infeasible(format!(
            "fixed point gamma0 = lambda exp(lambda gamma0 C_F tau) not bracketed for lambda = {lambda}"
        )));
    }
    for _ in 0..200 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma0 = if h(hi).abs() < h(lo).abs() { hi } else { lo };
    Ok(RhoFunction { kind: RhoKind::Exponential { lambda, gamma0 }, tau, c_f })
}

/// Outcome of checking the spacing inequality on a lag grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub tau: T,
    #[serde(rename = "C_F")]
    pub c_f: T,
    #[serde(flatten)]
    pub kind: RhoKind<T>,
    /// `min_s rho(s) - 1 - C_F rho(tau) int_0^s rho` over the grid.
    pub min_margin: T,
    /// Lag where the minimum margin occurs.
    pub witness: T,
    pub holds: bool,
}

/// Checks the spacing inequality on a uniform grid of `points` lags in
/// `[0, tau]`, with zero tolerance on the margin.
pub fn verify_condrho<T: Scalar>(rho: &RhoFunction<T>, points: usize) -> Result<Certificate<T>> {
    if points < MIN_CERTIFICATE_POINTS {
        return Err(Error::Config(format!(
            "certificate grid of {points} points is coarser than {MIN_CERTIFICATE_POINTS}"
        )));
    }
    let top = rho.at_horizon();
    let mut min_margin = T::infinity();
    let mut witness = T::zero();
    for k in 0..points {
        let lag = if k + 1 == points { rho.tau } else { rho.tau * T::of_usize(k) / T::of_usize(points - 1) };
        let margin = rho.eval(lag) - (T::one() + rho.c_f * top * rho.integral(lag));
        if margin < min_margin || margin.is_nan() {
            min_margin = margin;
            witness = lag;
        }
    }
    Ok(Certificate { tau: rho.tau, c_f: rho.c_f, kind: rho.kind, min_margin, witness, holds: min_margin > T::zero() })
}
