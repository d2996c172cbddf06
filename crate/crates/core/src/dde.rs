//! Method-of-steps integrator for the delayed pursuit system
//!
//! ```text
//! X_i'(t) = F(X_{i+1}(t - tau_i) - X_i(t - tau_i)),   X_i = x_i^0 on [-2 tau, 0].
//! ```
//!
//! On every interval `(k xi, (k + 1) xi]` the right-hand side only reads
//! history that is already committed, so each driver is a plain quadrature
//! of a known function. The quadrature is the composite trapezoid rule on
//! the `dt` grid; delayed times falling between samples are linearly
//! interpolated, and delayed times in the initial window use the initial
//! data directly.
//!
//! The infinite chain is truncated either periodically (`x_{i+N} = x_i + P`)
//! or by dependency cone: drivers `a..=b` on `[0, T]` need exactly the
//! drivers `a..=b + ceil(T / xi)`, each extra driver being needed on one
//! interval less.

use std::io::{self, Write};
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{grid_pos, FieldGrid};
use crate::model::{DelayProfile, InitialHistory, Scenario, Truncation, VelocityProfile};
use crate::scalar::{steps_to, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Layout<T> {
    Periodic { drivers: usize, period: T },
    Cone { first: i64, last: i64 },
}

/// Everything the integrator needs for one micro run at scale `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroSystem<T> {
    pub velocity: VelocityProfile<T>,
    pub delay: DelayProfile<T>,
    pub initial: InitialHistory<T>,
    /// Scale at which the initial data and reaction times are read:
    /// `x_i^0(t) = u0(i eps, t eps) / eps`, `tau_i = tau0(i eps)`.
    pub epsilon: T,
    pub dt: T,
    pub layout: Layout<T>,
}

impl<T: Scalar> MicroSystem<T> {
    /// The scenario as given, at scale one.
    pub fn from_scenario(s: &Scenario<T>) -> Result<Self> {
        s.checked()?;
        let layout = match &s.truncation {
            Truncation::Periodic { drivers, period } => Layout::Periodic { drivers: *drivers, period: *period },
            Truncation::Cone { first, last, .. } => Layout::Cone { first: *first, last: *last },
        };
        Ok(MicroSystem {
            velocity: s.velocity.clone(),
            delay: s.delay.clone(),
            initial: s.initial.clone(),
            epsilon: T::one(),
            dt: s.step(),
            layout,
        })
    }

    fn reaction_time(&self, i: i64) -> T {
        self.delay.reaction_time(T::of_i64(i) * self.epsilon)
    }

    /// Initial position with the periodic closure applied.
    fn history(&self, i: i64, t: T) -> Option<T> {
        match self.layout {
            Layout::Periodic { drivers, period } => {
                let n = drivers as i64;
                let (q, r) = (i.div_euclid(n), i.rem_euclid(n));
                let base = self.initial.position_at_scale(r, t, self.epsilon)?;
                Some(if q == 0 { base } else { base + period * T::of_i64(q) })
            }
            Layout::Cone { .. } => self.initial.position_at_scale(i, t, self.epsilon),
        }
    }

    fn validate(&self) -> Result<()> {
        self.velocity.check()?;
        if let Some(issue) = self.delay.issues("delay").into_iter().next() {
            return Err(Error::Validation(issue.to_string()));
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.dt)));
        }
        if self.dt > self.delay.xi() * (T::one() + T::lit(1e-9)) {
            return Err(Error::Config(format!(
                "time step {} exceeds the minimal reaction time {}",
                self.dt,
                self.delay.xi()
            )));
        }
        match self.layout {
            Layout::Periodic { drivers, period } if drivers == 0 || !period.is_finite() => {
                Err(Error::Config("periodic closure needs at least one driver and a finite period".into()))
            }
            Layout::Cone { first, last } if first > last => {
                Err(Error::Config(format!("empty driver range [{first}, {last}]")))
            }
            _ => Ok(()),
        }
    }
}

/// Reaction time of one driver measured in steps: `whole + frac`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Lag<T> {
    tau: T,
    whole: usize,
    frac: T,
}

impl<T: Scalar> Lag<T> {
    fn new(tau: T, dt: T) -> Self {
        let r = tau / dt;
        let mut whole = r.floor();
        let mut frac = r - whole;
        let snap = T::lit(1e-9);
        if frac < snap {
            frac = T::zero();
        } else if frac > T::one() - snap {
            whole = whole + T::one();
            frac = T::zero();
        }
        Lag { tau, whole: whole.to_usize().unwrap_or(0), frac }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Track<T> {
    driver: i64,
    lag: Lag<T>,
    /// `samples[back + n]` is the position at `n dt`, `n >= -back`.
    samples: Vec<T>,
}

/// Sampled trajectories `X_i` on `[-back dt, committed_until]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet<T> {
    system: MicroSystem<T>,
    back: usize,
    /// Steps per method-of-steps interval, `floor(xi / dt)`.
    block: usize,
    /// Committed steps of the output drivers.
    steps: usize,
    tracks: Vec<Track<T>>,
}

/// Integrates a scenario at scale one up to its horizon.
pub fn integrate<T: Scalar>(s: &Scenario<T>) -> Result<TrajectorySet<T>> {
    let system = MicroSystem::from_scenario(s)?;
    integrate_system(system, s.horizon)
}

/// Integrates an explicit micro system up to `horizon`.
pub fn integrate_system<T: Scalar>(system: MicroSystem<T>, horizon: T) -> Result<TrajectorySet<T>> {
    let mut ts = TrajectorySet::new(system)?;
    ts.extend(horizon)?;
    Ok(ts)
}

impl<T: Scalar> TrajectorySet<T> {
    fn new(system: MicroSystem<T>) -> Result<Self> {
        system.validate()?;
        let dt = system.dt;
        let tau = system.delay.tau();
        let back = steps_to(tau + tau, dt);
        let block = Lag::new(system.delay.xi(), dt).whole.max(1);
        let mut ts = TrajectorySet { system, back, block, steps: 0, tracks: Vec::new() };
        match ts.system.layout {
            Layout::Periodic { drivers, .. } => {
                for i in 0..drivers as i64 {
                    ts.push_track(i)?;
                }
            }
            Layout::Cone { first, last } => {
                for i in first..=last {
                    ts.push_track(i)?;
                }
            }
        }
        Ok(ts)
    }

    fn push_track(&mut self, driver: i64) -> Result<()> {
        let dt = self.system.dt;
        let lag = Lag::new(self.system.reaction_time(driver), dt);
        let mut samples = Vec::with_capacity(self.back + 1);
        for n in -(self.back as i64)..=0 {
            let t = dt * T::of_i64(n);
            let x = self.system.history(driver, t).ok_or_else(|| self.coverage_error(driver))?;
            if !x.is_finite() {
                return Err(Error::Numeric(format!("non-finite initial data at driver {driver}, t = {t}")));
            }
            samples.push(x);
        }
        self.tracks.push(Track { driver, lag, samples });
        Ok(())
    }

    fn coverage_error(&self, driver: i64) -> Error {
        match self.system.layout {
            Layout::Cone { first, last } => {
                let extra = self.steps.div_ceil(self.block) as i64;
                Error::Config(format!(
                    "initial data missing for driver {driver}: the dependency cone of drivers [{first}, {last}] \
                     needs initial data for drivers [{first}, {}]",
                    last + extra + 1
                ))
            }
            Layout::Periodic { drivers, .. } => Error::Config(format!(
                "initial data missing for driver {driver}: periodic closure needs drivers [0, {}] on [-2 tau, 0]",
                drivers - 1
            )),
        }
    }

    pub fn system(&self) -> &MicroSystem<T> {
        &self.system
    }

    pub fn dt(&self) -> T {
        self.system.dt
    }

    pub fn committed_steps(&self) -> usize {
        self.steps
    }

    /// Time up to which the output drivers are final.
    pub fn committed_until(&self) -> T {
        self.system.dt * T::of_usize(self.steps)
    }

    /// First stored sample time (at or before `-2 tau`).
    pub fn window_start(&self) -> T {
        -self.system.dt * T::of_usize(self.back)
    }

    pub fn history_steps(&self) -> usize {
        self.back
    }

    /// Length `xi` of a method-of-steps interval, in steps.
    pub fn interval_steps(&self) -> usize {
        self.block
    }

    /// Drivers integrated up to `committed_until`.
    pub fn drivers(&self) -> RangeInclusive<i64> {
        match self.system.layout {
            Layout::Periodic { drivers, .. } => 0..=drivers as i64 - 1,
            Layout::Cone { first, last } => first..=last,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.system.layout, Layout::Periodic { .. })
    }

    fn committed(&self, track: &Track<T>) -> usize {
        track.samples.len() - self.back - 1
    }

    fn target(&self, track: &Track<T>, total: usize) -> usize {
        match self.system.layout {
            Layout::Periodic { .. } => total,
            Layout::Cone { last, .. } => {
                let beyond = (track.driver - last).max(0) as usize;
                total.saturating_sub(beyond * self.block)
            }
        }
    }

    /// Continues the integration up to `horizon`; bitwise identical to a
    /// single run straight to `horizon`.
    pub fn extend(&mut self, horizon: T) -> Result<()> {
        let total = steps_to(horizon, self.system.dt);
        if total <= self.steps {
            return Ok(());
        }
        if let Layout::Cone { first, last } = self.system.layout {
            let needed = last + total.div_ceil(self.block) as i64;
            if let InitialHistory::Table { first_driver, positions, .. } = &self.system.initial {
                let have_last = first_driver + positions.len() as i64 - 1;
                let want_last = needed + 1;
                if *first_driver > first || have_last < want_last {
                    return Err(Error::Config(format!(
                        "dependency cone of drivers [{first}, {last}] up to t = {horizon} needs initial data \
                         for drivers [{first}, {want_last}], table holds [{first_driver}, {have_last}]"
                    )));
                }
            }
            let mut next = self.tracks.last().map_or(first, |t| t.driver + 1);
            while next <= needed {
                self.push_track(next)?;
                next += 1;
            }
        }

        let mut start = 0;
        while start < total {
            let end = (start + self.block).min(total);
            let work: Vec<(usize, usize, usize)> = self
                .tracks
                .iter()
                .enumerate()
                .filter_map(|(k, tr)| {
                    let from = self.committed(tr);
                    let to = self.target(tr, total).min(end);
                    (from < to).then_some((k, from, to))
                })
                .collect();
            if !work.is_empty() {
                let this = &*self;
                let segments: Vec<Result<Vec<T>, (usize, Error)>> = if work.len() > 1 {
                    work.par_iter().map(|&(k, from, to)| this.segment(k, from, to)).collect()
                } else {
                    work.iter().map(|&(k, from, to)| this.segment(k, from, to)).collect()
                };
                let mut failure: Option<(usize, i64, Error)> = None;
                for (&(k, _, _), seg) in work.iter().zip(&segments) {
                    if let Err((n, e)) = seg {
                        let key = (*n, self.tracks[k].driver);
                        if failure.as_ref().is_none_or(|f| key < (f.0, f.1)) {
                            failure = Some((key.0, key.1, e.clone()));
                        }
                    }
                }
                if let Some((_, _, e)) = failure {
                    return Err(e);
                }
                for (&(k, _, _), seg) in work.iter().zip(segments) {
                    self.tracks[k].samples.extend(seg.expect("checked above"));
                }
            }
            start = end;
        }
        self.steps = total;
        Ok(())
    }

    /// Trapezoid quadrature of one driver over steps `from..to`, reading
    /// committed history only.
    fn segment(&self, k: usize, from: usize, to: usize) -> Result<Vec<T>, (usize, Error)> {
        let half = self.system.dt * T::lit(0.5);
        let track = &self.tracks[k];
        let mut x = track.samples[self.back + from];
        let mut rate = self.rate(k, from).map_err(|e| (from, e))?;
        let mut out = Vec::with_capacity(to - from);
        for n in from..to {
            let next = self.rate(k, n + 1).map_err(|e| (n + 1, e))?;
            x = x + half * (rate + next);
            if !x.is_finite() {
                let t = self.system.dt * T::of_usize(n + 1);
                return Err((
                    n + 1,
                    Error::Numeric(format!("non-finite position at driver {}, t = {t}", track.driver)),
                ));
            }
            out.push(x);
            rate = next;
        }
        Ok(out)
    }

    /// `F(X_{i+1}(t - tau_i) - X_i(t - tau_i))` at `t = n dt`.
    #[inline]
    fn rate(&self, k: usize, n: usize) -> Result<T> {
        let track = &self.tracks[k];
        let lag = track.lag;
        let (own, ahead) = if n <= lag.whole {
            let t = (self.system.dt * T::of_usize(n) - lag.tau).min(T::zero());
            let own = self.system.history(track.driver, t);
            let ahead = self.system.history(track.driver + 1, t);
            match (own, ahead) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(self.coverage_error(track.driver + 1)),
            }
        } else {
            let idx = self.back + n - lag.whole;
            if lag.frac == T::zero() {
                (track.samples[idx], self.ahead_sample(k, idx))
            } else {
                let w = T::one() - lag.frac;
                let (a0, a1) = (track.samples[idx - 1], track.samples[idx]);
                let (b0, b1) = (self.ahead_sample(k, idx - 1), self.ahead_sample(k, idx));
                (a0 + w * (a1 - a0), b0 + w * (b1 - b0))
            }
        };
        Ok(self.system.velocity.speed(ahead - own))
    }

    #[inline]
    fn ahead_sample(&self, k: usize, idx: usize) -> T {
        match self.system.layout {
            Layout::Periodic { period, .. } if k + 1 == self.tracks.len() => self.tracks[0].samples[idx] + period,
            _ => self.tracks[k + 1].samples[idx],
        }
    }

    /// Stored sample of driver `i` at step `n` (periodic closure applied),
    /// `None` when not computed.
    pub fn at_step(&self, i: i64, n: i64) -> Option<T> {
        let idx = usize::try_from(n + self.back as i64).ok()?;
        match self.system.layout {
            Layout::Periodic { drivers, period } => {
                let m = drivers as i64;
                let (q, r) = (i.div_euclid(m), i.rem_euclid(m));
                let tr = &self.tracks[r as usize];
                let v = *tr.samples.get(idx)?;
                Some(if q == 0 { v } else { v + period * T::of_i64(q) })
            }
            Layout::Cone { first, .. } => {
                let tr = self.tracks.get(usize::try_from(i - first).ok()?)?;
                tr.samples.get(idx).copied()
            }
        }
    }

    /// `X_i(t)`, linear between samples and exact on them. Never extrapolates.
    pub fn lookup(&self, i: i64, t: T) -> Result<T> {
        let dt = self.system.dt;
        let pos = grid_pos(t, T::zero(), dt);
        let lo = pos.floor();
        let n = lo.to_i64().ok_or_else(|| Error::Range(format!("t = {t} not representable")))?;
        let w = pos - lo;
        let missing = || {
            if t > self.committed_until() || t < self.window_start() {
                Error::Range(format!(
                    "t = {t} outside the stored range [{}, {}]",
                    self.window_start(),
                    self.committed_until()
                ))
            } else {
                Error::Range(format!("driver {i} not computed at t = {t}"))
            }
        };
        let a = self.at_step(i, n).ok_or_else(missing)?;
        if w == T::zero() {
            return Ok(a);
        }
        let b = self.at_step(i, n + 1).ok_or_else(missing)?;
        Ok(a + w * (b - a))
    }

    /// Gaps `X_{i+1} - X_i` at the stored samples in `[from, to]`.
    pub fn gap_series(&self, i: i64, from: T, to: T) -> Result<GapSeries<T>> {
        if !self.is_periodic()
            && (i + 1 > *self.drivers().end() || i < *self.drivers().start())
            && (self.at_step(i + 1, 0).is_none() || self.at_step(i, 0).is_none())
        {
            return Err(Error::Config(format!("driver {} ahead of {i} is not part of the run", i + 1)));
        }
        let dt = self.system.dt;
        let n0 = grid_pos(from, T::zero(), dt).ceil().to_i64().unwrap_or(i64::MAX);
        let n1 = grid_pos(to, T::zero(), dt).floor().to_i64().unwrap_or(i64::MIN);
        if n0 < -(self.back as i64) || n1 > self.steps as i64 {
            return Err(Error::Range(format!(
                "gap range [{from}, {to}] outside the stored range [{}, {}]",
                self.window_start(),
                self.committed_until()
            )));
        }
        let mut times = Vec::new();
        let mut gaps = Vec::new();
        for n in n0..=n1 {
            let (a, b) = match (self.at_step(i, n), self.at_step(i + 1, n)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Config(format!(
                        "driver {} ahead of {i} not computed at t = {}",
                        i + 1,
                        dt * T::of_i64(n)
                    )))
                }
            };
            times.push(dt * T::of_i64(n));
            gaps.push(b - a);
        }
        Ok(GapSeries { driver: i, times, gaps })
    }

    /// Field `u(i, t) = X_i(t)` for drivers `first..first + count` on the
    /// stored samples between steps `n_from` and `n_to`, every `stride`.
    pub fn field(&self, first: i64, count: usize, n_from: i64, n_to: i64, stride: usize) -> Result<FieldGrid<T>> {
        let stride = stride.max(1) as i64;
        if n_to < n_from {
            return Err(Error::Config(format!("empty step range [{n_from}, {n_to}]")));
        }
        let nt = ((n_to - n_from) / stride + 1) as usize;
        let mut values = Vec::with_capacity(nt * count);
        for r in 0..nt as i64 {
            let n = n_from + r * stride;
            for d in 0..count as i64 {
                values.push(
                    self.at_step(first + d, n)
                        .ok_or_else(|| Error::Range(format!("driver {} not stored at step {n}", first + d)))?,
                );
            }
        }
        let dt = self.system.dt;
        Ok(FieldGrid {
            x0: T::of_i64(first),
            dx: T::one(),
            nx: count,
            t0: dt * T::of_i64(n_from),
            dt: dt * T::of_i64(stride),
            nt,
            values,
        })
    }

    /// CSV `t,i,x`, row-major by time then driver, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,i,x")?;
        let dt = self.system.dt;
        for n in -(self.back as i64)..=self.steps as i64 {
            let t = dt * T::of_i64(n);
            for i in self.drivers() {
                if let Some(x) = self.at_step(i, n) {
                    writeln!(w, "{t:.16e},{i},{x:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Samples of `X_{i+1} - X_i`. Positivity is reported by the order audit,
/// never enforced.
#[derive(Clone, Debug, PartialEq)]
pub struct GapSeries<T> {
    pub driver: i64,
    pub times: Vec<T>,
    pub gaps: Vec<T>,
}

impl<T: Scalar> GapSeries<T> {
    /// First sample where the gap is not positive.
    pub fn first_crossing(&self) -> Option<(T, T)> {
        self.times.iter().zip(&self.gaps).find(|(_, g)| **g <= T::zero()).map(|(t, g)| (*t, *g))
    }
}
