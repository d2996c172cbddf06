use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Issue;
use crate::scalar::Scalar;

/// Which of the two independent copies of the road an order-disruption
/// history describes. `Upper` starts strictly ahead of `Lower`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisruptionCopy {
    Upper,
    Lower,
}

/// Driver positions on the initial window `[-2 tau, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialHistory<T> {
    /// Drivers at rest, `x_i(t) = i * gap`.
    Linear { gap: T },
    /// `x_i(t) = i * gap + (-1)^i (amplitude / 2) sin(2 alpha t)`.
    AlternatingSine { gap: T, amplitude: T, alpha: T },
    /// Two drivers `j, j + 1` whose pairing with the other copy breaks order
    /// although the copies start at least `1 / (n0 + 1)` apart; all other
    /// drivers are equally spaced fillers.
    OrderDisruption { n0: u32, j: i64, copy: DisruptionCopy },
    /// Macroscopic data `u0(x, t) = gap * x + amplitude * sin(2 pi x / wavelength)`,
    /// seen at scale `epsilon` as `x_i(t) = u0(i epsilon, t epsilon) / epsilon`.
    PerturbedLinear { gap: T, amplitude: T, wavelength: T },
    /// Sampled positions: `positions[d][n]` is driver `first_driver + d`
    /// at time `t_start + n * dt`, linearly interpolated in time.
    Table { t_start: T, dt: T, first_driver: i64, positions: Vec<Vec<T>> },
}

impl<T: Scalar> InitialHistory<T> {
    /// Position of driver `i` at time `t <= 0` at scale `epsilon`.
    /// `None` when a table does not cover `(i, t)`.
    pub fn position_at_scale(&self, i: i64, t: T, epsilon: T) -> Option<T> {
        let fi = T::of_i64(i);
        match self {
            InitialHistory::Linear { gap } => Some(*gap * fi),
            InitialHistory::AlternatingSine { gap, amplitude, alpha } => {
                let sign = if i.rem_euclid(2) == 0 { T::one() } else { -T::one() };
                Some(fi * *gap + sign * *amplitude * T::lit(0.5) * (T::lit(2.0) * *alpha * t).sin())
            }
            InitialHistory::OrderDisruption { n0, j, copy } => {
                let n = T::of_i64(*n0 as i64);
                let share = T::one() / (n + T::one());
                let rising = n * share * (n * t).exp();
                let fj = T::of_i64(*j);
                Some(match (copy, i - j) {
                    (DisruptionCopy::Lower, 0) => fj - T::one() + rising,
                    (DisruptionCopy::Lower, 1) => fj + rising,
                    (DisruptionCopy::Lower, _) => fi - share,
                    (DisruptionCopy::Upper, 0) => fj,
                    (DisruptionCopy::Upper, 1) => fj + rising + share,
                    (DisruptionCopy::Upper, _) => fi,
                })
            }
            InitialHistory::PerturbedLinear { .. } => self.macro_slice(fi * epsilon).map(|u| u / epsilon),
            InitialHistory::Table { t_start, dt, first_driver, positions } => {
                let d = i.checked_sub(*first_driver)?;
                let row = positions.get(usize::try_from(d).ok()?)?;
                let pos = (t - *t_start) / *dt;
                let last = T::of_usize(row.len().checked_sub(1)?);
                let tol = T::lit(1e-9);
                if pos < -tol || pos > last + tol {
                    return None;
                }
                let pos = pos.max(T::zero()).min(last);
                let k = pos.floor().to_usize()?.min(row.len() - 1);
                let w = pos - T::of_usize(k);
                if w == T::zero() || k + 1 == row.len() {
                    Some(row[k])
                } else {
                    Some(row[k] + w * (row[k + 1] - row[k]))
                }
            }
        }
    }

    /// Position of driver `i` at time `t` at scale one.
    pub fn position(&self, i: i64, t: T) -> Option<T> {
        self.position_at_scale(i, t, T::one())
    }

    /// `x_i(t)` with the window check `t in [-2 tau, 0]`.
    pub fn eval_initial(&self, i: i64, t: T, tau: T) -> Result<T> {
        let tol = T::lit(1e-12) * (T::one() + tau);
        let lo = -(tau + tau);
        if !(t >= lo - tol && t <= tol) {
            return Err(Error::Range(format!("t = {t} outside the initial window [{lo}, 0]")));
        }
        self.position(i, t).ok_or_else(|| Error::Range(format!("no initial data for driver {i} at t = {t}")))
    }

    /// Macroscopic initial slice `u0(x, 0)` for the families that have one.
    pub fn macro_slice(&self, x: T) -> Option<T> {
        match self {
            InitialHistory::Linear { gap } | InitialHistory::AlternatingSine { gap, .. } => Some(*gap * x),
            InitialHistory::PerturbedLinear { gap, amplitude, wavelength } => {
                Some(*gap * x + *amplitude * (T::TAU() * x / *wavelength).sin())
            }
            _ => None,
        }
    }

    /// Space-time Lipschitz bound `L_lip` of the data (max of the bounds on
    /// neighbour increments and on time derivatives).
    pub fn lipschitz_bound(&self) -> T {
        match self {
            InitialHistory::Linear { gap } => gap.abs(),
            InitialHistory::AlternatingSine { gap, amplitude, alpha } => {
                (gap.abs() + amplitude.abs()).max(amplitude.abs() * alpha.abs())
            }
            InitialHistory::OrderDisruption { n0, .. } => {
                let n = T::of_i64(*n0 as i64);
                T::lit(2.0).max(n * n / (n + T::one()))
            }
            InitialHistory::PerturbedLinear { gap, amplitude, wavelength } => {
                gap.abs() + T::TAU() * amplitude.abs() / wavelength.abs()
            }
            InitialHistory::Table { dt, positions, .. } => {
                let mut l = T::zero();
                for row in positions {
                    for w in row.windows(2) {
                        l = l.max((w[1] - w[0]).abs() / *dt);
                    }
                }
                for pair in positions.windows(2) {
                    for (a, b) in pair[0].iter().zip(pair[1].iter()) {
                        l = l.max((*b - *a).abs());
                    }
                }
                l
            }
        }
    }

    /// `(N, P)` such that `x_{i+N} = x_i + P` at scale `epsilon`, when the
    /// family has such a closure.
    pub fn periodic_closure(&self, epsilon: T) -> Option<(usize, T)> {
        match self {
            InitialHistory::Linear { gap } => Some((1, *gap)),
            InitialHistory::AlternatingSine { gap, .. } => Some((2, *gap + *gap)),
            InitialHistory::PerturbedLinear { gap, wavelength, .. } => {
                let n = crate::scalar::near_integer(*wavelength / epsilon)?;
                (n > 0).then(|| (n as usize, *gap * T::of_i64(n)))
            }
            _ => None,
        }
    }

    pub fn issues(&self, at: &str, tau: T) -> Vec<Issue> {
        let mut out = Vec::new();
        let mut bad = |field: &str, msg: String| out.push(Issue::new(format!("{at}.{field}"), msg));
        let finite = |v: &T| v.is_finite();
        match self {
            InitialHistory::Linear { gap } => {
                if !finite(gap) {
                    bad("gap", "must be finite".into());
                }
            }
            InitialHistory::AlternatingSine { gap, amplitude, alpha } => {
                if !(finite(gap) && *gap > T::zero()) {
                    bad("gap", format!("must be finite and positive, got {gap}"));
                }
                if !(finite(alpha) && *alpha > T::zero()) {
                    bad("alpha", format!("must be finite and positive, got {alpha}"));
                }
                if !(*amplitude > T::zero() && *amplitude < *gap * T::lit(0.5)) {
                    bad("amplitude", format!("0 < amplitude < gap / 2 violated: amplitude = {amplitude}, gap = {gap}"));
                }
            }
            InitialHistory::OrderDisruption { n0, .. } => {
                if *n0 == 0 {
                    bad("n0", "must be a positive integer".into());
                }
            }
            InitialHistory::PerturbedLinear { gap, amplitude, wavelength } => {
                if !(finite(gap) && finite(amplitude)) {
                    bad("gap", "gap and amplitude must be finite".into());
                }
                if !(finite(wavelength) && *wavelength > T::zero()) {
                    bad("wavelength", format!("must be finite and positive, got {wavelength}"));
                }
            }
            InitialHistory::Table { t_start, dt, positions, .. } => {
                if !(finite(dt) && *dt > T::zero()) {
                    bad("dt", format!("must be finite and positive, got {dt}"));
                } else {
                    if positions.is_empty() {
                        bad("positions", "no drivers".into());
                    }
                    let len = positions.first().map_or(0, Vec::len);
                    if positions.iter().any(|r| r.len() != len) {
                        bad("positions", "rows differ in length".into());
                    }
                    if let Some((d, _)) = positions.iter().enumerate().find(|(_, r)| r.iter().any(|v| !v.is_finite())) {
                        bad(&format!("positions[{d}]"), "non-finite sample".into());
                    }
                    let end = *t_start + *dt * T::of_usize(len.saturating_sub(1));
                    let tol = T::lit(1e-9) * (T::one() + tau);
                    if *t_start > -(tau + tau) + tol || end < -tol {
                        bad(
                            "t_start",
                            format!("table [{t_start}, {end}] does not cover the window [{}, 0]", -(tau + tau)),
                        );
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn alternating_sine_values() {
        let h = InitialHistory::AlternatingSine { gap: 1.0, amplitude: 0.4, alpha: 3.0 };
        assert_eq!(h.eval_initial(0, 0.0, PI / 12.0).unwrap(), 0.0);
        assert_relative_eq!(h.eval_initial(1, -PI / 12.0, PI / 12.0).unwrap(), 1.2, epsilon = 1e-14);
        assert!(matches!(h.eval_initial(0, 0.1, PI / 12.0), Err(Error::Range(_))));
        assert!(matches!(h.eval_initial(0, -0.6, PI / 12.0), Err(Error::Range(_))));
        for k in 0..50 {
            let t = -0.5 * k as f64 / 49.0;
            for i in -3..3 {
                let d = h.position(i + 2, t).unwrap() - h.position(i, t).unwrap();
                assert_relative_eq!(d, 2.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn order_disruption_values() {
        let y = InitialHistory::<f64>::OrderDisruption { n0: 1, j: 3, copy: DisruptionCopy::Lower };
        let x = InitialHistory::<f64>::OrderDisruption { n0: 1, j: 3, copy: DisruptionCopy::Upper };
        assert_eq!(y.eval_initial(3, 0.0, 2.5).unwrap(), 2.5);
        assert_eq!(x.eval_initial(3, 0.0, 2.5).unwrap(), 3.0);
        for k in 0..=40 {
            let t = -2.5 * k as f64 / 40.0;
            for i in -2..8 {
                let gap = x.position(i, t).unwrap() - y.position(i, t).unwrap();
                assert!(gap >= 0.5 - 1e-15, "copies too close at ({i}, {t})");
                assert!(y.position(i + 1, t).unwrap() > y.position(i, t).unwrap());
                assert!(x.position(i + 1, t).unwrap() > x.position(i, t).unwrap());
            }
        }
    }

    #[test]
    fn table_interpolates_and_rejects_outside() {
        let h = InitialHistory::Table { t_start: -1.0, dt: 0.5, first_driver: 2, positions: vec![vec![0.0, 1.0, 2.0]] };
        assert_eq!(h.position(2, -0.75), Some(0.5));
        assert_eq!(h.position(2, 0.0), Some(2.0));
        assert_eq!(h.position(3, 0.0), None);
        assert_eq!(h.position(2, 0.5), None);
        assert!(h.issues("initial", 0.5).is_empty());
        assert_eq!(h.issues("initial", 1.0).len(), 1);
    }

    #[test]
    fn amplitude_constraint() {
        let h = InitialHistory::AlternatingSine { gap: 1.0, amplitude: 0.6, alpha: 3.0 };
        let issues = h.issues("initial", 0.2);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("gap / 2"));
    }

    #[test]
    fn perturbed_linear_scaling_and_closure() {
        let h = InitialHistory::PerturbedLinear { gap: 1.0, amplitude: 0.05, wavelength: 2.0 };
        let eps = 0.025;
        let x = 0.375;
        let i = 15;
        assert_relative_eq!(
            h.position_at_scale(i, -0.1, eps).unwrap() * eps,
            h.macro_slice(x).unwrap(),
            epsilon = 1e-15
        );
        assert_eq!(h.periodic_closure(0.0125).map(|c| c.0), Some(160));
        assert_eq!(h.periodic_closure(0.3), None);
    }
}
