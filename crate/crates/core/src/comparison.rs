//! Strict comparison audits between two solutions `v >= u`, order audits of
//! a single run, and the order-disruption pair.
//!
//! Micro solutions are compared as fields on the driver lattice,
//! `u(i, t) = X_i(t)`; off-grid times use the same linear interpolation as
//! the integrator.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dde::{integrate, TrajectorySet};
use crate::defaults::{CERTIFICATE_POINTS, DT_OVER_TAU, LAG_POINTS};
use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::model::{DelayProfile, DisruptionCopy, InitialHistory, Scenario, Truncation, VelocityProfile};
use crate::scalar::Scalar;
use crate::thresholds::{verify_condrho, Certificate, RhoFunction};

/// Where and with which constants the comparison is asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonWindow<T> {
    pub delta: T,
    pub t0: T,
    /// Half-width of the core `[x0 - R, x0 + R]`; `None` means the whole line.
    pub radius: Option<T>,
    pub x0: T,
    pub horizon: T,
    pub rho: RhoFunction<T>,
}

impl<T: Scalar> ComparisonWindow<T> {
    /// Whole-line window.
    pub fn unbounded(delta: T, t0: T, horizon: T, rho: RhoFunction<T>) -> Self {
        ComparisonWindow { delta, t0, radius: None, x0: T::zero(), horizon, rho }
    }

    fn check(&self) -> Result<()> {
        if !(self.delta > T::zero()) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.t0 >= T::zero() && self.t0 < self.horizon) {
            return Err(Error::Config(format!("t0 = {} must lie in [0, {})", self.t0, self.horizon)));
        }
        if let Some(r) = self.radius {
            if !(r >= T::zero()) {
                return Err(Error::Config(format!("radius must be nonnegative, got {r}")));
            }
        }
        Ok(())
    }

    /// `delta exp(-C_F rho(tau) (t - t0))`.
    pub fn lower_bound(&self, t: T) -> T {
        self.delta * (-self.rho.c_f * self.rho.at_horizon() * (t - self.t0)).exp()
    }

    fn in_core(&self, x: T) -> bool {
        self.radius.is_none_or(|r| (x - self.x0).abs() <= r + tol::<T>())
    }

    fn in_annulus(&self, x: T) -> bool {
        self.radius.is_some_and(|r| {
            let d = (x - self.x0).abs();
            d >= r - tol::<T>() && d <= r + T::one() + tol::<T>()
        })
    }
}

fn tol<T: Scalar>() -> T {
    T::lit(1e-9)
}

/// A node where an inequality fails, or where the worst margin sits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness<T> {
    pub x: T,
    pub t: T,
    /// Lag `tau'` for the delayed spacing condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag: Option<T>,
    /// Margin of the failed inequality (negative).
    pub margin: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    /// `v >= u` on the annulus around the core.
    pub boundary: bool,
    /// `delta <= d(x, t - s) <= rho(s) d(x, t)` on the initial core.
    pub initial_spacing: bool,
    /// The spacing function is admissible.
    pub rho: bool,
}

impl HypothesisFlags {
    pub fn all(&self) -> bool {
        self.boundary && self.initial_spacing && self.rho
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingCheck<T> {
    pub flags: HypothesisFlags,
    pub boundary_witness: Option<Witness<T>>,
    pub spacing_witness: Option<Witness<T>>,
    pub certificate: Certificate<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport<T> {
    pub hypothesis_ok: HypothesisFlags,
    /// Only meaningful when every hypothesis holds.
    pub conclusion_ok: bool,
    /// `min (v - u - delta exp(-C_F rho(tau)(t - t0)))` over the core.
    pub min_slack: T,
    pub first_violation: Option<Witness<T>>,
    pub spacing: SpacingCheck<T>,
}

impl<T: Scalar> AuditReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_grids<T: Scalar>(v: &FieldGrid<T>, u: &FieldGrid<T>) -> Result<()> {
    if !v.aligned_with(u) {
        return Err(Error::Config("the two fields are not sampled on a common grid".into()));
    }
    if v.nx == 0 || v.nt == 0 {
        return Err(Error::Config("empty field".into()));
    }
    Ok(())
}

fn covers<T: Scalar>(f: &FieldGrid<T>, from: T, to: T, what: &str) -> Result<()> {
    let eps = tol::<T>() * (T::one() + f.dt.abs());
    if f.t0 > from + eps || f.t_end() < to - eps {
        return Err(Error::Config(format!(
            "{what} needs the fields on [{from}, {to}], they cover [{}, {}]",
            f.t0,
            f.t_end()
        )));
    }
    Ok(())
}

/// Earliest of two witnesses in lexicographic `(t, x)` order.
fn earliest<T: Scalar>(a: Option<Witness<T>>, b: Option<Witness<T>>) -> Option<Witness<T>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if (b.t, b.x) < (a.t, a.x) { b } else { a }),
        (a, b) => a.or(b),
    }
}

fn rows_between<T: Scalar>(f: &FieldGrid<T>, from: T, to: T, open_end: bool) -> Vec<usize> {
    let eps = tol::<T>() * f.dt.abs().max(T::lit(1e-300));
    (0..f.nt)
        .filter(|&n| {
            let t = f.t(n);
            t >= from - eps && if open_end { t < to - eps } else { t <= to + eps }
        })
        .collect()
}

/// Checks the boundary and initial-spacing hypotheses and certifies `rho`.
pub fn check_spacing_hypothesis<T: Scalar>(
    v: &FieldGrid<T>,
    u: &FieldGrid<T>,
    w: &ComparisonWindow<T>,
) -> Result<SpacingCheck<T>> {
    w.check()?;
    check_grids(v, u)?;
    let tau = w.rho.tau;
    if let Some(r) = w.radius {
        let (lo, hi) = (w.x0 - r - T::one(), w.x0 + r + T::one());
        if u.x0 > lo + tol::<T>() || u.x_end() < hi - tol::<T>() {
            return Err(Error::Config(format!(
                "fields must cover [{lo}, {hi}] in space, they cover [{}, {}]",
                u.x0,
                u.x_end()
            )));
        }
    }
    covers(u, w.t0 - tau - tau, w.t0, "the initial spacing condition")?;

    let diff = |j: usize, n: usize| v.at(j, n) - u.at(j, n);
    let core: Vec<usize> = (0..u.nx).filter(|&j| w.in_core(u.x(j))).collect();
    let ring: Vec<usize> = (0..u.nx).filter(|&j| w.in_annulus(u.x(j))).collect();

    let boundary_rows = rows_between(u, w.t0 - tau, w.horizon, true);
    let boundary_witness = boundary_rows
        .par_iter()
        .map(|&n| {
            ring.iter().find_map(|&j| {
                let d = diff(j, n);
                (!(d >= T::zero())).then(|| Witness { x: u.x(j), t: u.t(n), lag: None, margin: d })
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .find_map(|o| o);

    let lags: Vec<T> = (0..LAG_POINTS)
        .map(|k| if k + 1 == LAG_POINTS { tau } else { tau * T::of_usize(k) / T::of_usize(LAG_POINTS - 1) })
        .collect();
    let spacing_rows = rows_between(u, w.t0 - tau, w.t0, false);
    let spacing_witness = spacing_rows
        .par_iter()
        .map(|&n| {
            let t = u.t(n);
            for &j in &core {
                let now = diff(j, n);
                for &lag in &lags {
                    let (Some(a), Some(b)) = (v.sample_time(j, t - lag), u.sample_time(j, t - lag)) else {
                        continue;
                    };
                    let past = a - b;
                    let margin = (past - w.delta).min(w.rho.eval(lag) * now - past);
                    if !(margin >= T::zero()) {
                        return Some(Witness { x: u.x(j), t, lag: Some(lag), margin });
                    }
                }
            }
            None
        })
        .collect::<Vec<_>>()
        .into_iter()
        .find_map(|o| o);

    let certificate = verify_condrho(&w.rho, CERTIFICATE_POINTS)?;
    Ok(SpacingCheck {
        flags: HypothesisFlags {
            boundary: boundary_witness.is_none(),
            initial_spacing: spacing_witness.is_none(),
            rho: certificate.holds,
        },
        boundary_witness,
        spacing_witness,
        certificate,
    })
}

/// Checks `v - u >= delta exp(-C_F rho(tau)(t - t0))` on every core node of
/// `[t0, T)`, alongside the hypotheses. Nodes past the end of the fields are
/// not audited.
pub fn verify_conclusion<T: Scalar>(
    v: &FieldGrid<T>,
    u: &FieldGrid<T>,
    w: &ComparisonWindow<T>,
) -> Result<AuditReport<T>> {
    let spacing = check_spacing_hypothesis(v, u, w)?;
    let core: Vec<usize> = (0..u.nx).filter(|&j| w.in_core(u.x(j))).collect();
    let rows = rows_between(u, w.t0, w.horizon, true);
    if core.is_empty() || rows.is_empty() {
        return Err(Error::Config("the window contains no node of the fields".into()));
    }
    let per_row: Vec<(T, Option<Witness<T>>)> = rows
        .par_iter()
        .map(|&n| {
            let t = u.t(n);
            let bound = w.lower_bound(t);
            let mut worst = T::infinity();
            let mut first = None;
            for &j in &core {
                let slack = v.at(j, n) - u.at(j, n) - bound;
                if slack < worst || slack.is_nan() {
                    worst = slack;
                }
                if first.is_none() && !(slack >= T::zero()) {
                    first = Some(Witness { x: u.x(j), t, lag: None, margin: slack });
                }
            }
            (worst, first)
        })
        .collect();
    let mut min_slack = T::infinity();
    let mut first_violation = None;
    for (worst, first) in per_row {
        if worst < min_slack || worst.is_nan() {
            min_slack = worst;
        }
        first_violation = earliest(first_violation, first);
    }
    Ok(AuditReport {
        hypothesis_ok: spacing.flags,
        conclusion_ok: first_violation.is_none(),
        min_slack,
        first_violation,
        spacing,
    })
}

/// `v(x, t) = X_{x+1}(t)` and `u(x, t) = X_x(t)` for drivers
/// `first..first + count`, both indexed by `x`, on steps `n_from..=n_to`.
pub fn neighbour_fields<T: Scalar>(
    ts: &TrajectorySet<T>,
    first: i64,
    count: usize,
    n_from: i64,
    n_to: i64,
    stride: usize,
) -> Result<(FieldGrid<T>, FieldGrid<T>)> {
    let u = ts.field(first, count, n_from, n_to, stride)?;
    let mut v = ts.field(first + 1, count, n_from, n_to, stride)?;
    v.x0 = u.x0;
    Ok((v, u))
}

/// A sample where two positions expected in strict order are not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing<T> {
    pub i: i64,
    pub t: T,
    /// Leading minus trailing position (nonpositive).
    pub gap: T,
}

fn first_crossing<T: Scalar>(
    drivers: &[i64],
    steps: std::ops::RangeInclusive<i64>,
    dt: T,
    gap: impl Fn(i64, i64) -> Option<T> + Sync,
) -> Vec<Crossing<T>> {
    drivers
        .par_iter()
        .filter_map(|&i| {
            steps.clone().find_map(|n| {
                let g = gap(i, n)?;
                (!(g > T::zero())).then(|| Crossing { i, t: dt * T::of_i64(n), gap: g })
            })
        })
        .collect()
}

fn earliest_crossing<T: Scalar>(mut all: Vec<Crossing<T>>) -> Option<Crossing<T>> {
    all.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap_or(std::cmp::Ordering::Equal).then(a.i.cmp(&b.i)));
    all.into_iter().next()
}

fn audited_drivers<T: Scalar>(ts: &TrajectorySet<T>) -> Vec<i64> {
    let r = ts.drivers();
    if ts.is_periodic() {
        r.collect()
    } else {
        (*r.start()..*r.end()).collect()
    }
}

/// First sample in `[0, T]` of every driver pair with `X_{i+1} <= X_i`, one
/// per driver, ordered by `(t, i)`. In cone mode only pairs inside the
/// output range are audited.
pub fn order_violations<T: Scalar>(ts: &TrajectorySet<T>) -> Vec<Crossing<T>> {
    let mut all = first_crossing(&audited_drivers(ts), 0..=ts.committed_steps() as i64, ts.dt(), |i, n| {
        Some(ts.at_step(i + 1, n)? - ts.at_step(i, n)?)
    });
    all.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap_or(std::cmp::Ordering::Equal).then(a.i.cmp(&b.i)));
    all
}

/// Earliest `(t, i)` with `X_{i+1}(t) <= X_i(t)`, if any.
pub fn order_conservation_audit<T: Scalar>(ts: &TrajectorySet<T>) -> Option<Crossing<T>> {
    earliest_crossing(order_violations(ts))
}

/// Earliest `(t, i)` where the `lower` run catches up with the `upper` one
/// (`upper_i(t) - lower_i(t) <= 0`) on their common output drivers.
pub fn paired_order_audit<T: Scalar>(
    upper: &TrajectorySet<T>,
    lower: &TrajectorySet<T>,
) -> Result<Option<Crossing<T>>> {
    if upper.dt() != lower.dt() {
        return Err(Error::Config("paired runs must share their time step".into()));
    }
    let (a, b) = (upper.drivers(), lower.drivers());
    let drivers: Vec<i64> = (*a.start().max(b.start())..=*a.end().min(b.end())).collect();
    let last = upper.committed_steps().min(lower.committed_steps()) as i64;
    Ok(earliest_crossing(first_crossing(&drivers, 0..=last, upper.dt(), |i, n| {
        Some(upper.at_step(i, n)? - lower.at_step(i, n)?)
    })))
}

/// CSV `i,t,gap`.
pub fn write_violations_csv<T: Scalar, W: Write>(rows: &[Crossing<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "i,t,gap")?;
    for c in rows {
        writeln!(w, "{},{:.16e},{:.16e}", c.i, c.t, c.gap)?;
    }
    Ok(())
}

/// `(Y_j - X_j)(tau)` for the order-disruption pair:
/// `n0 tau / (n0 + 1) - 1 / (n0 + 1) - (1 - exp(-n0 tau)) / (n0 + 1)`.
pub fn disruption_closed_form<T: Scalar>(n0: u32, tau: T) -> Result<T> {
    if n0 == 0 {
        return Err(Error::Domain("n0 must be a positive integer".into()));
    }
    let n = T::of_usize(n0 as usize);
    if !(tau > T::lit(2.0) / n) {
        return Err(Error::Domain(format!(
            "the order-disruption pair requires tau > 2 / n0 = {}, got {tau}",
            T::lit(2.0) / n
        )));
    }
    let share = T::one() / (n + T::one());
    Ok(n * tau * share - share - (-(n * tau)).exp_m1().neg() * share)
}

/// The two order-disruption runs over `[0, tau]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisruptionPair<T> {
    pub upper: TrajectorySet<T>,
    pub lower: TrajectorySet<T>,
    pub driver: i64,
    /// `lower_j(tau) - upper_j(tau)`; positive when the order is disrupted.
    pub overtake: T,
}

/// The order-disruption scenario for one copy: speed law `F(d) = d` clamped
/// to `[0, 1]`, reaction time `tau`, driver `j = 0` computed up to `tau`.
pub fn disruption_scenario<T: Scalar>(n0: u32, tau: T, copy: DisruptionCopy, dt: Option<T>) -> Scenario<T> {
    Scenario {
        velocity: VelocityProfile::LinearClamped { slope: T::one(), lo: T::zero(), hi: T::one() },
        delay: DelayProfile::constant(tau),
        initial: InitialHistory::OrderDisruption { n0, j: 0, copy },
        truncation: Truncation::Cone { first: 0, last: 0, horizon: tau },
        horizon: tau,
        dt: Some(dt.unwrap_or_else(|| T::lit(DT_OVER_TAU) * tau)),
        epsilons: None,
        expect: None,
    }
}

/// Integrates both copies of the order-disruption pair up to `tau`.
pub fn order_disruption_pair<T: Scalar>(n0: u32, tau: T, dt: Option<T>) -> Result<DisruptionPair<T>> {
    let upper = integrate(&disruption_scenario(n0, tau, DisruptionCopy::Upper, dt))?;
    let lower = integrate(&disruption_scenario(n0, tau, DisruptionCopy::Lower, dt))?;
    let overtake = lower.lookup(0, tau)? - upper.lookup(0, tau)?;
    Ok(DisruptionPair { upper, lower, driver: 0, overtake })
}
