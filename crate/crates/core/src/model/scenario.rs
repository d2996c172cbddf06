use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{DelayProfile, InitialHistory, Issue, VelocityProfile};
use crate::scalar::{near_integer, Scalar};

/// How the infinite chain of drivers is reduced to a finite computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Truncation<T> {
    /// `drivers` unknowns closed by `x_{i+N} = x_i + period`.
    Periodic { drivers: usize, period: T },
    /// Drivers `first..=last` computed exactly up to `horizon` from the
    /// initial data of their dependency cone.
    Cone { first: i64, last: i64, horizon: T },
}

/// Claims a scenario makes about its own outcome; the driver exits with an
/// audit failure when a claim does not hold.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<crate::homogenization::Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_preserved: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario<T> {
    pub velocity: VelocityProfile<T>,
    pub delay: DelayProfile<T>,
    pub initial: InitialHistory<T>,
    pub truncation: Truncation<T>,
    /// Horizon `T` of a micro run.
    pub horizon: T,
    /// Micro time step; defaults to a fixed fraction of `tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

impl<T: Scalar> Scenario<T> {
    pub fn step(&self) -> T {
        self.dt.unwrap_or_else(|| T::lit(defaults::DT_OVER_TAU) * self.delay.tau())
    }

    pub fn scales(&self) -> Vec<T> {
        self.epsilons.clone().unwrap_or_else(|| defaults::EPSILONS.iter().map(|e| T::lit(*e)).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("scenario JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Fails with every violated invariant when the scenario is invalid.
    pub fn checked(&self) -> Result<&Self> {
        let report = validate_scenario(self);
        if report.valid {
            Ok(self)
        } else {
            let msg: Vec<String> = report.issues.iter().map(ToString::to_string).collect();
            Err(Error::Validation(msg.join("; ")))
        }
    }
}

/// Where `tau` sits relative to the homogenization threshold `1 / (e C_F)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInfo {
    pub c_f: f64,
    pub tau: f64,
    pub threshold: Option<f64>,
    pub below_threshold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub issues: Vec<Issue>,
    pub threshold: Option<ThresholdInfo>,
}

/// Checks every scenario invariant and lists all violations; never clamps.
pub fn validate_scenario<T: Scalar>(s: &Scenario<T>) -> ValidationReport {
    let mut issues = s.velocity.issues("velocity");
    issues.extend(s.delay.issues("delay"));
    let delay_ok = issues.iter().all(|i| !i.field.starts_with("delay"));
    let tau = if delay_ok { s.delay.tau() } else { T::zero() };
    issues.extend(s.initial.issues("initial", tau));

    if !(s.horizon.is_finite() && s.horizon > T::zero()) {
        issues.push(Issue::new("horizon", format!("must be finite and positive, got {}", s.horizon)));
    }
    let dt = s.step();
    if !(dt.is_finite() && dt > T::zero()) {
        issues.push(Issue::new("dt", format!("must be finite and positive, got {dt}")));
    } else if delay_ok {
        let xi = s.delay.xi();
        if dt > xi {
            issues.push(Issue::new("dt", format!("dt = {dt} exceeds the minimal reaction time {xi}")));
        } else if near_integer(xi / dt).is_none() {
            issues.push(Issue::new("dt", format!("dt = {dt} does not divide the minimal reaction time {xi}")));
        }
    }
    if let Some(eps) = &s.epsilons {
        if let Some(k) = eps.iter().position(|e| !(e.is_finite() && *e > T::zero())) {
            issues.push(Issue::new(format!("epsilons[{k}]"), "must be finite and positive"));
        }
        if let Some(k) = eps.windows(2).position(|w| !(w[1] < w[0])) {
            issues.push(Issue::new(format!("epsilons[{}]", k + 1), "scales must be strictly decreasing"));
        }
    }

    match &s.truncation {
        Truncation::Periodic { drivers, period } => {
            if *drivers == 0 {
                issues.push(Issue::new("truncation.drivers", "need at least one driver"));
            } else if !period.is_finite() {
                issues.push(Issue::new("truncation.period", "must be finite"));
            } else if delay_ok && issues.iter().all(|i| !i.field.starts_with("initial")) {
                if let Some(issue) = periodic_mismatch(&s.initial, *drivers, *period, tau) {
                    issues.push(issue);
                }
            }
        }
        Truncation::Cone { first, last, horizon } => {
            if first > last {
                issues.push(Issue::new("truncation.first", format!("empty driver range [{first}, {last}]")));
            }
            if !(*horizon >= s.horizon) {
                issues.push(Issue::new(
                    "truncation.horizon",
                    format!("cone horizon {horizon} shorter than the run horizon {}", s.horizon),
                ));
            }
        }
    }

    let threshold = s.velocity.lipschitz_data().ok().filter(|_| delay_ok).map(|lip| {
        let th = crate::thresholds::homogenization_threshold(lip.c_f).ok();
        ThresholdInfo {
            c_f: lip.c_f.as_f64(),
            tau: tau.as_f64(),
            threshold: th.map(Scalar::as_f64),
            below_threshold: th.is_some_and(|th| tau < th),
        }
    });
    if issues.iter().all(|i| !i.field.starts_with("velocity")) {
        if let Err(e) = s.velocity.lipschitz_data() {
            issues.push(Issue::new("velocity", e.to_string()));
        }
    }

    ValidationReport { valid: issues.is_empty(), issues, threshold }
}

fn periodic_mismatch<T: Scalar>(h: &InitialHistory<T>, n: usize, period: T, tau: T) -> Option<Issue> {
    let samples = 65;
    for d in 0..n as i64 {
        for k in 0..samples {
            let t = -(tau + tau) * T::of_usize(k) / T::of_usize(samples - 1);
            let (Some(a), Some(b)) = (h.position(d, t), h.position(d + n as i64, t)) else {
                // tables holding exactly one period cannot be cross-checked
                continue;
            };
            let tol = T::lit(1e-9) * (T::one() + a.abs() + b.abs());
            if ((b - a) - period).abs() > tol {
                return Some(Issue::new(
                    "truncation.period",
                    format!("x_{{i+{n}}} - x_i = {} != {period} at i = {d}, t = {t}", b - a),
                ));
            }
        }
    }
    None
}
