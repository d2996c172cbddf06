//! Rescaled micro fields `u^eps(x, s) = eps X_{floor(x / eps)}(s / eps)`,
//! convergence studies against the macro solution, and the oscillating
//! counter-example whose mean speed exceeds `F(L)` by `beta A^2 / 2`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dde::{integrate_system, Layout, MicroSystem, TrajectorySet};
use crate::defaults::{CONVERGENCE_TOL, QUADRATURE_TOL, STALL_EPSILONS, STALL_FLOOR_FACTOR, STALL_SPREAD, STUDY_ROWS};
use crate::error::{Error, Result};
use crate::field::{grid_pos, sup_error, FieldGrid, Region};
use crate::macro_hj::solve_for_region;
use crate::model::{DelayProfile, InitialHistory, Scenario, Truncation, VelocityProfile};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converging,
    Stalled,
    /// Neither trend is established by the errors at hand.
    Inconclusive,
}

impl Verdict {
    /// Classifies a sequence of sup errors taken at decreasing scales.
    pub fn classify<T: Scalar>(errors: &[T]) -> Verdict {
        let quad = T::lit(QUADRATURE_TOL);
        let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
        let last = errors.last().copied().unwrap_or(T::infinity());
        if (decreasing && last <= T::lit(CONVERGENCE_TOL)) || errors.iter().all(|e| *e <= quad) {
            return Verdict::Converging;
        }
        if errors.len() >= 3 {
            let tail = &errors[errors.len() - 3..];
            let floor = T::lit(STALL_FLOOR_FACTOR) * quad;
            let close = |a: T, b: T| (a - b).abs() < T::lit(STALL_SPREAD) * a.max(b);
            if tail.iter().all(|e| *e > floor)
                && close(tail[0], tail[1])
                && close(tail[0], tail[2])
                && close(tail[1], tail[2])
            {
                return Verdict::Stalled;
            }
        }
        Verdict::Inconclusive
    }
}

/// `u^eps` on the grid points `(i eps, n dt eps)` of a region.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonField<T> {
    pub epsilon: T,
    pub first_driver: i64,
    /// Micro step index of the first row and micro steps between rows.
    pub first_step: i64,
    pub stride: usize,
    /// `x = i eps`, `t = s`.
    pub field: FieldGrid<T>,
}

impl<T: Scalar> EpsilonField<T> {
    /// `u^eps(x, s)` at a stored row, with the floor rule in `x`.
    pub fn at(&self, x: T, s: T) -> Option<T> {
        let i = (x / self.epsilon).floor().to_i64()?;
        let j = usize::try_from(i - self.first_driver).ok()?;
        let n = grid_pos(s, self.field.t0, self.field.dt);
        (n == n.round()).then_some(())?;
        let n = n.to_usize()?;
        (j < self.field.nx && n < self.field.nt).then(|| self.field.at(j, n))
    }
}

/// Samples `u^eps` at every grid point `i eps` of `region` and on at most
/// `rows` micro sample times in `[t0, t1]`.
pub fn rescale_field_rows<T: Scalar>(
    ts: &TrajectorySet<T>,
    epsilon: T,
    region: &Region<T>,
    rows: usize,
) -> Result<EpsilonField<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let need = region.t1 / epsilon;
    if ts.committed_until() < need * (T::one() - T::lit(1e-12)) {
        return Err(Error::Config(format!(
            "region up to s = {} needs the micro run up to t = {need}, it reaches {}",
            region.t1,
            ts.committed_until()
        )));
    }
    let first = grid_pos(region.x0, T::zero(), epsilon).ceil().to_i64().unwrap_or(0);
    let last = grid_pos(region.x1, T::zero(), epsilon).floor().to_i64().unwrap_or(-1);
    if last < first {
        return Err(Error::Config(format!("no grid point i eps in [{}, {}]", region.x0, region.x1)));
    }
    let micro = ts.dt() * epsilon;
    let n0 = grid_pos(region.t0, T::zero(), micro).ceil().to_i64().unwrap_or(0);
    let n1 = grid_pos(region.t1, T::zero(), micro).floor().to_i64().unwrap_or(-1).min(ts.committed_steps() as i64);
    if n1 < n0 {
        return Err(Error::Config("region contains no micro sample time".into()));
    }
    let span = (n1 - n0) as usize;
    let stride = span.div_ceil(rows.max(2) - 1).max(1);
    let n1 = n0 + (span / stride * stride) as i64;
    let count = (last - first + 1) as usize;
    let micro_field = ts.field(first, count, n0, n1, stride)?;
    let field = FieldGrid {
        x0: T::of_i64(first) * epsilon,
        dx: epsilon,
        nx: count,
        t0: micro_field.t0 * epsilon,
        dt: micro_field.dt * epsilon,
        nt: micro_field.nt,
        values: micro_field.values.iter().map(|x| epsilon * *x).collect(),
    };
    Ok(EpsilonField { epsilon, first_driver: first, first_step: n0, stride, field })
}

pub fn rescale_field<T: Scalar>(ts: &TrajectorySet<T>, epsilon: T, region: &Region<T>) -> Result<EpsilonField<T>> {
    rescale_field_rows(ts, epsilon, region, STUDY_ROWS)
}

/// The micro system of a scenario at scale `epsilon`: periodic when the
/// initial family closes at that scale, otherwise the dependency cone of
/// the region's drivers.
pub fn micro_system<T: Scalar>(s: &Scenario<T>, epsilon: T, region: &Region<T>) -> Result<MicroSystem<T>> {
    s.checked()?;
    let layout = match s.initial.periodic_closure(epsilon) {
        Some((drivers, period)) => Layout::Periodic { drivers, period },
        None => Layout::Cone {
            first: (region.x0 / epsilon).floor().to_i64().unwrap_or(0),
            last: (region.x1 / epsilon).ceil().to_i64().unwrap_or(0),
        },
    };
    Ok(MicroSystem {
        velocity: s.velocity.clone(),
        delay: s.delay.clone(),
        initial: s.initial.clone(),
        epsilon,
        dt: s.step(),
        layout,
    })
}

/// Macro solution from the scenario's initial slice on a grid covering `region`.
pub fn macro_reference<T: Scalar>(s: &Scenario<T>, region: &Region<T>) -> Result<FieldGrid<T>> {
    if s.initial.macro_slice(T::zero()).is_none() {
        return Err(Error::Config("the initial family has no macroscopic slice".into()));
    }
    solve_for_region(&s.velocity, |x| s.initial.macro_slice(x).unwrap_or(T::nan()), region)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord<T> {
    pub region: Region<T>,
    pub epsilons: Vec<T>,
    pub errors: Vec<T>,
    pub verdict: Verdict,
    /// Mean speed of driver 0 over the region's time span at the finest
    /// scale, for the oscillating family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<T>,
}

impl<T: Scalar> ConvergenceRecord<T> {
    /// CSV `epsilon,sup_error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "epsilon,sup_error")?;
        for (e, err) in self.epsilons.iter().zip(&self.errors) {
            writeln!(w, "{e:.16e},{err:.16e}")?;
        }
        Ok(())
    }
}

/// Sup error of `u^eps` against `macro_field` on the grid points of `region`
/// for every scale of the scenario, computed in parallel.
pub fn convergence_study<T: Scalar>(
    s: &Scenario<T>,
    macro_field: &FieldGrid<T>,
    region: &Region<T>,
) -> Result<ConvergenceRecord<T>> {
    let epsilons = s.scales();
    if epsilons.len() < 3 {
        return Err(Error::Config(format!("a convergence study needs at least 3 scales, got {}", epsilons.len())));
    }
    if let Some(k) = epsilons.windows(2).position(|w| !(w[1] < w[0])) {
        return Err(Error::Config(format!("scales must be strictly decreasing (index {})", k + 1)));
    }
    s.checked()?;
    let runs: Vec<Result<(T, Option<T>)>> = epsilons
        .par_iter()
        .map(|&eps| {
            let system = micro_system(s, eps, region)?;
            let ts = integrate_system(system, region.t1 / eps)?;
            let field = rescale_field(&ts, eps, region)?;
            let err = sup_error(&field.field, macro_field, region)?;
            let drift = if matches!(s.initial, InitialHistory::AlternatingSine { .. }) {
                let (a, b) = (ts.lookup(0, region.t0 / eps)?, ts.lookup(0, region.t1 / eps)?);
                Some(eps * (b - a) / (region.t1 - region.t0))
            } else {
                None
            };
            Ok((err, drift))
        })
        .collect();
    let mut errors = Vec::with_capacity(runs.len());
    let mut drift = None;
    for r in runs {
        let (e, d) = r?;
        errors.push(e);
        drift = d;
    }
    Ok(ConvergenceRecord { region: *region, verdict: Verdict::classify(&errors), epsilons, errors, drift })
}

/// Parameters of the oscillating counter-example: quadratic speed law
/// around the spacing `gap`, alternating sine data of amplitude
/// `amplitude`, reaction time `pi / (4 alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationParams<T> {
    pub k: T,
    pub beta: T,
    pub alpha: T,
    pub gap: T,
    pub amplitude: T,
}

impl<T: Scalar> Default for OscillationParams<T> {
    fn default() -> Self {
        OscillationParams { k: T::one(), beta: T::lit(0.5), alpha: T::lit(3.0), gap: T::one(), amplitude: T::lit(0.4) }
    }
}

impl<T: Scalar> OscillationParams<T> {
    pub fn tau(&self) -> T {
        T::PI() / (T::lit(4.0) * self.alpha)
    }

    pub fn velocity(&self) -> VelocityProfile<T> {
        VelocityProfile::Quadratic { k: self.k, beta: self.beta, alpha: self.alpha, gap: self.gap }
    }

    /// Limit of the drift quotient, `F(L) + beta A^2 / 2`.
    pub fn limit_drift(&self) -> T {
        self.k + self.beta * self.amplitude * self.amplitude * T::lit(0.5)
    }

    /// Two periodic drivers up to `horizon`, step `tau / 1000`.
    pub fn scenario(&self, horizon: T) -> Scenario<T> {
        let tau = self.tau();
        Scenario {
            velocity: self.velocity(),
            delay: DelayProfile::constant(tau),
            initial: InitialHistory::AlternatingSine { gap: self.gap, amplitude: self.amplitude, alpha: self.alpha },
            truncation: Truncation::Periodic { drivers: 2, period: self.gap + self.gap },
            horizon,
            dt: None,
            epsilons: Some(STALL_EPSILONS.iter().map(|e| T::lit(*e)).collect()),
            expect: None,
        }
    }

    /// Recovers the parameters from a scenario of the oscillating family.
    pub fn from_scenario(s: &Scenario<T>) -> Result<Self> {
        let (
            VelocityProfile::Quadratic { k, beta, alpha, gap },
            InitialHistory::AlternatingSine { gap: spacing, amplitude, alpha: freq },
            DelayProfile::Constant { tau },
        ) = (&s.velocity, &s.initial, &s.delay)
        else {
            return Err(Error::Config(
                "the drift needs a quadratic speed law, alternating-sine data and a constant reaction time".into(),
            ));
        };
        let p = OscillationParams { k: *k, beta: *beta, alpha: *alpha, gap: *gap, amplitude: *amplitude };
        if spacing != gap || freq != alpha {
            return Err(Error::Config("speed law and initial data disagree on the spacing or the frequency".into()));
        }
        if !same_time(*tau, p.tau()) {
            return Err(Error::Config(format!("the reaction time must be pi / (4 alpha) = {}, got {tau}", p.tau())));
        }
        Ok(p)
    }
}

fn same_time<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-12) * (T::one() + b.abs())
}

/// `(u^eps(0, s + h) - u^eps(0, s)) / h` for the oscillating family.
pub fn counterexample_drift<T: Scalar>(s: &Scenario<T>, epsilon: T, s_time: T, h: T) -> Result<T> {
    let p = OscillationParams::from_scenario(s)?;
    if !(epsilon > T::zero() && s_time > T::zero() && h > T::zero()) {
        return Err(Error::Domain("epsilon, s and h must be positive".into()));
    }
    let mut scenario = s.clone();
    scenario.truncation = Truncation::Periodic { drivers: 2, period: p.gap + p.gap };
    if p.amplitude == T::zero() {
        // equally spaced drivers, outside the oscillating family proper
        scenario.initial = InitialHistory::Linear { gap: p.gap };
    }
    scenario.epsilons = None;
    let system = MicroSystem::from_scenario(&scenario)?;
    let ts = integrate_system(system, (s_time + h) / epsilon)?;
    let a = ts.lookup(0, s_time / epsilon)?;
    let b = ts.lookup(0, (s_time + h) / epsilon)?;
    Ok(epsilon * (b - a) / h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord<T> {
    pub epsilon: T,
    pub s: T,
    pub h: T,
    pub quotient: T,
}

/// Drift quotients at several scales, computed in parallel.
pub fn drift_study<T: Scalar>(s: &Scenario<T>, epsilons: &[T], s_time: T, h: T) -> Result<Vec<DriftRecord<T>>> {
    epsilons
        .par_iter()
        .map(|&epsilon| {
            let quotient = counterexample_drift(s, epsilon, s_time, h)?;
            Ok(DriftRecord { epsilon, s: s_time, h, quotient })
        })
        .collect()
}

/// CSV `epsilon,s,h,quotient`.
pub fn write_drift_csv<T: Scalar, W: Write>(rows: &[DriftRecord<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "epsilon,s,h,quotient")?;
    for r in rows {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", r.epsilon, r.s, r.h, r.quotient)?;
    }
    Ok(())
}

/// Closed-form gap `X_{i+1}(t) - X_i(t) = L + A (-1)^{i+1} sin(2 alpha t)`,
/// valid when the reaction time is `pi / (4 alpha)`.
pub fn oscillation_oracle<T: Scalar>(p: &OscillationParams<T>, tau: T, i: i64, t: T) -> Result<T> {
    if !same_time(tau, p.tau()) {
        return Err(Error::Domain(format!("the closed-form gap needs tau = pi / (4 alpha) = {}, got {tau}", p.tau())));
    }
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    let sign = if i.rem_euclid(2) == 0 { -T::one() } else { T::one() };
    Ok(p.gap + sign * p.amplitude * (T::lit(2.0) * p.alpha * t).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dde::integrate;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn stationary(tau: f64) -> Scenario<f64> {
        Scenario {
            velocity: VelocityProfile::Quadratic { k: 1.0, beta: 0.5, alpha: 3.0, gap: 1.0 },
            delay: DelayProfile::constant(tau),
            initial: InitialHistory::Linear { gap: 1.0 },
            truncation: Truncation::Periodic { drivers: 1, period: 1.0 },
            horizon: 1.0,
            dt: Some(tau / 100.0),
            epsilons: Some(vec![0.1, 0.05, 0.025]),
            expect: None,
        }
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(Verdict::classify(&[0.1, 0.05, 0.009]), Verdict::Converging);
        assert_eq!(Verdict::classify(&[0.1, 0.05, 0.02]), Verdict::Inconclusive);
        assert_eq!(Verdict::classify(&[1e-12, 3e-12, 2e-12]), Verdict::Converging);
        assert_eq!(Verdict::classify(&[0.05, 0.042, 0.041, 0.0405]), Verdict::Stalled);
        assert_eq!(Verdict::classify(&[0.05, 0.045, 0.0425]), Verdict::Inconclusive);
        assert_eq!(Verdict::classify(&[5e-9, 5e-9, 5e-9]), Verdict::Inconclusive);
    }

    #[test]
    fn stationary_field_is_exact_at_grid_points() {
        let s = stationary(0.3);
        let region = Region::new(-1.0, 1.0, 0.0, 1.0);
        for eps in [0.1, 0.05] {
            let ts = integrate_system(micro_system(&s, eps, &region).unwrap(), 1.0 / eps).unwrap();
            let f = rescale_field(&ts, eps, &region).unwrap();
            for n in 0..f.field.nt {
                for j in 0..f.field.nx {
                    let (x, t) = (f.field.x(j), f.field.t(n));
                    assert!((f.field.at(j, n) - (x + t)).abs() < 1e-12);
                }
            }
            assert_eq!(f.at(0.5 * eps, f.field.t(3)), Some(f.field.at(f.field.nx / 2, 3)));
        }
    }

    #[test]
    fn definitional_identity() {
        let p = OscillationParams::<f64>::default();
        let ts = integrate(&p.scenario(60.0)).unwrap();
        let eps = 0.05;
        let f = rescale_field(&ts, eps, &Region::new(-0.5, 0.5, 0.0, 2.9)).unwrap();
        for n in 0..f.field.nt {
            let step = f.first_step + (n * f.stride) as i64;
            for j in 0..f.field.nx {
                let i = f.first_driver + j as i64;
                assert_eq!(f.field.at(j, n), eps * ts.at_step(i, step).unwrap());
            }
        }
    }

    #[test]
    fn horizon_shortfall() {
        let p = OscillationParams::<f64>::default();
        let ts = integrate(&p.scenario(5.0)).unwrap();
        let err = rescale_field(&ts, 0.1, &Region::new(-1.0, 1.0, 0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("t = 10"), "{err}");
    }

    #[test]
    fn frozen_drivers_rescale_to_eps_c() {
        let mut s = stationary(0.5);
        s.velocity = VelocityProfile::Tabulated {
            xs: vec![0.0, 1.0],
            values: vec![0.0, 0.0],
            c_f: 0.0,
            f_sup: 0.0,
            audit_points: None,
        };
        let region = Region::new(0.0, 0.0, 0.0, 1.0);
        let eps = 0.1;
        let ts = integrate_system(micro_system(&s, eps, &region).unwrap(), 10.0).unwrap();
        let f = rescale_field(&ts, eps, &region).unwrap();
        assert!(f.field.values.iter().all(|v| *v == 0.0));
        let region = Region::new(0.3, 0.3, 0.0, 1.0);
        let f = rescale_field(&ts, eps, &region).unwrap();
        assert!(f.field.values.iter().all(|v| *v == eps * 3.0));
    }

    #[test]
    fn stationary_study_converges() {
        let s = stationary(0.5);
        let region = Region::new(-1.0, 1.0, 0.0, 1.0);
        let macro_field = macro_reference(&s, &region).unwrap();
        let r = convergence_study(&s, &macro_field, &region).unwrap();
        assert!(r.errors.iter().all(|e| *e <= 1e-10), "{:?}", r.errors);
        assert_eq!(r.verdict, Verdict::Converging);
        assert!(r.drift.is_none());
        let mut short = s.clone();
        short.epsilons = Some(vec![0.1, 0.05]);
        assert!(matches!(convergence_study(&short, &macro_field, &region), Err(Error::Config(_))));
    }

    fn drift_oracle(p: &OscillationParams<f64>, eps: f64, s: f64, h: f64) -> f64 {
        let (a, b) = (p.alpha * s / eps, p.alpha * (s + h) / eps);
        let a2 = p.amplitude * p.amplitude;
        p.limit_drift()
            + p.beta * a2 * eps / (8.0 * p.alpha * h) * ((4.0 * b).sin() - (4.0 * a).sin())
            + p.amplitude * eps / (2.0 * h) * ((2.0 * b).sin() - (2.0 * a).sin())
    }

    #[test]
    fn drift_matches_antiderivative() {
        let p = OscillationParams::default();
        let s = p.scenario(1.0);
        for eps in [0.1, 0.01] {
            let q = counterexample_drift(&s, eps, 1.0, 0.5).unwrap();
            assert!((q - drift_oracle(&p, eps, 1.0, 0.5)).abs() < 1e-5, "eps {eps}: {q}");
            assert!((q - 1.04).abs() <= eps / 0.5 * (0.2 + 0.01) * 2.0);
        }
    }

    #[test]
    fn drift_without_amplitude_is_the_macro_speed() {
        let p = OscillationParams { amplitude: 0.0, ..OscillationParams::default() };
        let q = counterexample_drift(&p.scenario(1.0), 0.01, 1.0, 0.5).unwrap();
        assert_relative_eq!(q, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn drift_rejects_other_families() {
        let s = stationary(0.5);
        assert!(matches!(counterexample_drift(&s, 0.1, 1.0, 0.5), Err(Error::Config(_))));
        let mut s = OscillationParams::<f64>::default().scenario(1.0);
        s.delay = DelayProfile::constant(0.3);
        assert!(matches!(counterexample_drift(&s, 0.1, 1.0, 0.5), Err(Error::Config(_))));
    }

    #[test]
    fn oracle_values() {
        let p = OscillationParams::<f64>::default();
        let tau = p.tau();
        assert_relative_eq!(oscillation_oracle(&p, tau, 0, PI / 12.0).unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(oscillation_oracle(&p, tau, 5, 0.0).unwrap(), 1.0);
        for t in [0.1, 0.7, 2.3] {
            let sum = oscillation_oracle(&p, tau, 4, t).unwrap() + oscillation_oracle(&p, tau, 5, t).unwrap();
            assert_relative_eq!(sum, 2.0, epsilon = 1e-15);
        }
        assert!(matches!(oscillation_oracle(&p, 0.3, 0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(oscillation_oracle(&p, tau, 0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn scale_consistency_of_gaps() {
        // gaps depend on micro time only: G_eps(s) = G_{eps/2}(s/2)
        let s = OscillationParams::<f64>::default().scenario(1.0);
        let gaps = |eps: f64, horizon: f64| {
            let region = Region::new(0.0, eps, 0.0, horizon);
            let ts = integrate_system(micro_system(&s, eps, &region).unwrap(), horizon / eps).unwrap();
            let f = rescale_field_rows(&ts, eps, &region, 301).unwrap().field;
            (0..f.nt).map(|n| (f.at(1, n) - f.at(0, n)) / eps).collect::<Vec<_>>()
        };
        let (coarse, fine) = (gaps(0.1, 2.0), gaps(0.05, 1.0));
        assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.iter().zip(&fine) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rescaled_fields_are_lipschitz() {
        let s = Scenario {
            velocity: VelocityProfile::Quadratic { k: 1.0, beta: 0.1, alpha: 1.0, gap: 1.0 },
            delay: DelayProfile::constant(0.25),
            initial: InitialHistory::PerturbedLinear { gap: 1.0, amplitude: 0.05, wavelength: 2.0 },
            truncation: Truncation::Periodic { drivers: 1, period: 1.0 },
            horizon: 1.0,
            dt: Some(0.0025),
            epsilons: None,
            expect: None,
        };
        let region = Region::new(-1.0, 1.0, 0.0, 1.0);
        let eps: f64 = 0.05;
        let lip = s.velocity.lipschitz_data().unwrap();
        let l_lip = s.initial.lipschitz_bound();
        let ts = integrate_system(micro_system(&s, eps, &region).unwrap(), 1.0 / eps).unwrap();
        let f: FieldGrid<f64> = rescale_field_rows(&ts, eps, &region, 201).unwrap().field;
        for n in 0..f.nt {
            for j in 0..f.nx - 1 {
                assert!((f.at(j + 1, n) - f.at(j, n)).abs() <= (2.0 * l_lip + 1e-9) * eps);
                if n + 1 < f.nt {
                    assert!((f.at(j, n + 1) - f.at(j, n)).abs() <= lip.f_sup * f.dt + 1e-9);
                }
            }
        }
    }
}
