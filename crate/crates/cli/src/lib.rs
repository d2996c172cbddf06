//! Command-line orchestration for `pursuit-core`: loads a scenario, runs one
//! verb, writes its CSV/JSON artifacts and a JSON run summary.
//!
//! Exit codes: `0` success, `1` invalid input, `2` failed audit or claim.

#![allow(clippy::result_large_err)]

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use pursuit_core::comparison::{neighbour_fields, order_violations, write_violations_csv};
use pursuit_core::defaults::{CERTIFICATE_POINTS, DRIFT_EPSILONS, DRIFT_TIME, DRIFT_TOLERANCE, DRIFT_WINDOW};
use pursuit_core::homogenization::{drift_study, macro_reference, write_drift_csv};
use pursuit_core::model::{Issue, Truncation};
use pursuit_core::thresholds::constant_rho_interval;
use pursuit_core::{
    constant_rho_threshold, construct_rho, convergence_study, homogenization_threshold, integrate, validate_scenario,
    verify_conclusion, verify_condrho, ComparisonWindow, Error, OscillationParams64, Region64, Scenario64,
    TrajectorySet64,
};

/// Largest number of stored rows fed to a comparison audit.
const AUDIT_ROWS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Simulate,
    Threshold,
    Compare,
    Homogenize,
    Counterexample,
    Validate,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Simulate => "simulate",
            Verb::Threshold => "threshold",
            Verb::Compare => "compare",
            Verb::Homogenize => "homogenize",
            Verb::Counterexample => "counterexample",
            Verb::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub region: Option<Region64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    pub verb: Verb,
    pub scenario: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Overrides,
    /// `threshold` only.
    pub c_f: Option<f64>,
    pub tau: Option<f64>,
}

impl Command {
    pub fn new(verb: Verb, out: impl Into<PathBuf>) -> Self {
        Command { verb, scenario: None, out: out.into(), overrides: Overrides::default(), c_f: None, tau: None }
    }
}

/// Machine-readable failure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub issues: Vec<Issue>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl Failure {
    fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            kind: kind.into(),
            message: message.into(),
            path: None,
            field: None,
            issues: Vec::new(),
            exit_code: 1,
        }
    }

    fn audit(message: impl Into<String>) -> Self {
        Failure { exit_code: 2, ..Failure::input("audit", message) }
    }

    fn at(mut self, path: &Path) -> Self {
        self.path = Some(path.display().to_string());
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit_code = match e {
            Error::Numeric(_) | Error::Range(_) => 2,
            _ => 1,
        };
        Failure { exit_code, ..Failure::input(e.kind(), e.to_string()) }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input("io", e.to_string())
    }
}

/// One executed verb.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunOutcome {
    pub verb: String,
    pub status: String,
    pub exit_code: i32,
    pub artifacts: Vec<String>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Failure>,
}

/// `{"runs": [...]}` in execution order.
pub fn emit_report(runs: &[RunOutcome]) -> String {
    #[derive(Serialize)]
    struct Report<'a> {
        runs: &'a [RunOutcome],
    }
    serde_json::to_string_pretty(&Report { runs }).expect("report serializes")
}

struct Done {
    result: Value,
    claim: Option<Failure>,
}

struct Out<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Out<'_> {
    fn file(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| Failure::from(e).at(&path))?);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| Failure::from(e).at(&path))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).expect("artifact serializes");
        self.file(name, |w| writeln!(w, "{text}"))
    }
}

/// Executes `cmd`; artifacts and, on failure, `error.json` land in `cmd.out`.
pub fn run(cmd: &Command) -> RunOutcome {
    let mut out = Out { dir: &cmd.out, written: Vec::new() };
    let attempt =
        fs::create_dir_all(&cmd.out).map_err(|e| Failure::from(e).at(&cmd.out)).and_then(|_| dispatch(cmd, &mut out));
    let (result, error) = match attempt {
        Ok(done) => (done.result, done.claim),
        Err(f) => (Value::Null, Some(f)),
    };
    if let Some(f) = &error {
        // best effort: the summary carries the same content
        let _ = out.json("error.json", f);
    }
    let exit_code = error.as_ref().map_or(0, |f| f.exit_code);
    let status = match exit_code {
        0 => "ok",
        1 => "invalid",
        _ => "failed",
    };
    RunOutcome { verb: cmd.verb.name().into(), status: status.into(), exit_code, artifacts: out.written, result, error }
}

fn dispatch(cmd: &Command, out: &mut Out) -> Result<Done, Failure> {
    match cmd.verb {
        Verb::Validate => validate(cmd, out),
        Verb::Simulate => simulate(cmd, out),
        Verb::Threshold => threshold(cmd, out),
        Verb::Compare => compare(cmd, out),
        Verb::Homogenize => homogenize(cmd, out),
        Verb::Counterexample => counterexample(cmd, out),
    }
}

fn done(result: Value) -> Done {
    Done { result, claim: None }
}

/// Parses the scenario file and applies the overrides, without validating.
fn parse(cmd: &Command) -> Result<Scenario64, Failure> {
    let path = cmd
        .scenario
        .as_deref()
        .ok_or_else(|| Failure::input("usage", format!("`{}` needs --scenario <path>", cmd.verb.name())))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::input("io", e.to_string()).at(path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let mut s: Scenario64 = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Failure { field: Some(field), ..Failure::input("parse", e.inner().to_string()).at(path) }
    })?;
    if let Some(dt) = cmd.overrides.dt {
        s.dt = Some(dt);
    }
    if let Some(eps) = &cmd.overrides.epsilons {
        s.epsilons = Some(eps.clone());
    }
    Ok(s)
}

fn load(cmd: &Command) -> Result<Scenario64, Failure> {
    let s = parse(cmd)?;
    let report = validate_scenario(&s);
    if report.valid {
        return Ok(s);
    }
    let path = cmd.scenario.as_deref().unwrap_or(Path::new(""));
    let first = report.issues.first().map(|i| i.field.clone());
    let message = report.issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
    Err(Failure { field: first, issues: report.issues, ..Failure::input("validation", message).at(path) })
}

fn validate(cmd: &Command, out: &mut Out) -> Result<Done, Failure> {
    let s = parse(cmd)?;
    let report = validate_scenario(&s);
    out.json("validation.json", &report)?;
    let claim = if report.valid { None } else { load(cmd).err() };
    Ok(Done { result: serde_json::to_value(&report).expect("report serializes"), claim })
}

fn order_claim(s: &Scenario64, preserved: bool) -> Option<Failure> {
    let want = s.expect.as_ref()?.order_preserved?;
    (want != preserved).then(|| Failure::audit(format!("order preserved = {preserved}, the scenario claims {want}")))
}

fn simulate(cmd: &Command, out: &mut Out) -> Result<Done, Failure> {
    let s = load(cmd)?;
    let ts = integrate(&s)?;
    let violations = order_violations(&ts);
    out.file("trajectories.csv", |w| ts.write_csv(w))?;
    out.file("violations.csv", |w| write_violations_csv(&violations, w))?;
    out.file("scenario.json", |w| writeln!(w, "{}", s.to_json()))?;
    let preserved = violations.is_empty();
    let result = json!({
        "dt": ts.dt(),
        "committed_until": ts.committed_until(),
        "drivers": [ts.drivers().start(), ts.drivers().end()],
        "order_preserved": preserved,
        "first_violation": violations.first(),
    });
    Ok(Done { result, claim: order_claim(&s, preserved) })
}

fn threshold(cmd: &Command, out: &mut Out) -> Result<Done, Failure> {
    let scenario = if cmd.scenario.is_some() { Some(load(cmd)?) } else { None };
    let c_f = match (cmd.c_f, &scenario) {
        (Some(c), _) => c,
        (None, Some(s)) => s.velocity.lipschitz_data()?.c_f,
        (None, None) => return Err(Failure::input("usage", "`threshold` needs --cf <value> or --scenario <path>")),
    };
    let tau = cmd.tau.or_else(|| scenario.as_ref().map(|s| s.delay.tau()));
    let mut result = json!({
        "C_F": c_f,
        "homogenization": homogenization_threshold(c_f)?,
        "constant_rho": constant_rho_threshold(c_f)?,
    });
    if let Some(tau) = tau {
        let interval = constant_rho_interval(c_f, tau)?;
        let certificate = match construct_rho(tau, c_f, None) {
            Ok(rho) => {
                let cert = verify_condrho(&rho, CERTIFICATE_POINTS)?;
                out.json("certificate.json", &cert)?;
                Some(cert)
            }
            Err(Error::Infeasible(_)) => None,
            Err(e) => return Err(e.into()),
        };
        result["tau"] = json!(tau);
        result["feasible"] = json!(certificate.is_some());
        result["constant_rho_interval"] = json!(interval);
        result["certificate"] = json!(certificate);
    }
    Ok(done(result))
}

/// Stride dividing the history length that keeps the audit under
/// [`AUDIT_ROWS`] rows.
fn audit_stride(ts: &TrajectorySet64) -> usize {
    let (back, total) = (ts.history_steps(), ts.history_steps() + ts.committed_steps());
    (1..=back.max(1)).find(|k| back % k == 0 && total / k <= AUDIT_ROWS).unwrap_or(back.max(1))
}

fn compare(cmd: &Command, out: &mut Out) -> Result<Done, Failure> {
    let s = load(cmd)?;
    let ts = integrate(&s)?;
    let violations = order_violations(&ts);
    out.file("violations.csv", |w| write_violations_csv(&violations, w))?;
    let preserved = violations.is_empty();

    let (first, count) = match s.truncation {
        Truncation::Periodic { drivers, .. } => (0, drivers),
        Truncation::Cone { first, last, .. } => (first, (last - first) as usize),
    };
    let c_f = s.velocity.lipschitz_data()?.c_f;
    let tau = s.delay.tau();
    let mut result = json!({
        "order_preserved": preserved,
        "first_violation": violations.first(),
    });
    let mut claim = order_claim(&s, preserved);

    let rho = match construct_rho(tau, c_f, None) {
        Ok(rho) => Some(rho),
        Err(Error::Infeasible(msg)) => {
            result["audit"] = json!({ "skipped": msg });
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let (Some(rho), true) = (rho, count > 0) {
        let stride = audit_stride(&ts);
        let back = ts.history_steps() as i64;
        let n_to = -back + (ts.committed_steps() as i64 + back) / stride as i64 * stride as i64;
        let (v, u) = neighbour_fields(&ts, first, count, -back, n_to, stride)?;
        let row0 = back as usize / stride;
        let delta = (0..count).map(|j| v.at(j, row0) - u.at(j, row0)).fold(f64::INFINITY, f64::min);
        if delta > 0.0 {
            out.json("certificate.json", &verify_condrho(&rho, CERTIFICATE_POINTS)?)?;
            let window = ComparisonWindow::unbounded(delta, 0.0, u.t_end(), rho);
            let report = verify_conclusion(&v, &u, &window)?;
            out.file("audit.json", |w| writeln!(w, "{}", report.to_json()))?;
            if report.hypothesis_ok.all() && !report.conclusion_ok && claim.is_none() {
                claim = Some(Failure::audit(format!(
                    "hypotheses hold but the lower bound fails at {:?}",
                    report.first_violation
                )));
            }
            result["audit"] = serde_json::to_value(&report).expect("report serializes");
        } else {
            result["audit"] = json!({ "skipped": format!("initial spacing {delta} is not positive") });
        }
    }
    Ok(Done { result, claim })
}

fn homogenize(cmd: &Command, out: &mut Out) -> Result<Done, Failure> {
    let s = load(cmd)?;
    let region = cmd.overrides.region.unwrap_or_else(Region64::default_region);
    let reference = macro_reference(&s, &region)?;
    let record = convergence_study(&s, &reference, &region)?;
    out.file("convergence.csv", |w| record.write_csv(w))?;
    out.json("convergence.json", &record)?;
    let claim = s.expect.as_ref().and_then(|e| e.verdict).and_then(|want| {
        (want != record.verdict)
            .then(|| Failure::audit(format!("verdict {:?}, the scenario claims {want:?}", record.verdict)))
    });
    Ok(Done { result: serde_json::to_value(&record).expect("record serializes"), claim })
}

fn counterexample(cmd: &Command, out: &mut Out) -> Result<Done, Failure> {
    let mut s = if cmd.scenario.is_some() { load(cmd)? } else { OscillationParams64::default().scenario(1.0) };
    if let Some(dt) = cmd.overrides.dt {
        s.dt = Some(dt);
        s.checked()?;
    }
    let p = OscillationParams64::from_scenario(&s)?;
    let epsilons = cmd.overrides.epsilons.clone().unwrap_or_else(|| DRIFT_EPSILONS.to_vec());
    let rows = drift_study(&s, &epsilons, DRIFT_TIME, DRIFT_WINDOW)?;
    out.file("drift.csv", |w| write_drift_csv(&rows, w))?;
    let limit = p.limit_drift();
    let last = rows.last().map_or(f64::NAN, |r| r.quotient);
    let within = (last - limit).abs() <= DRIFT_TOLERANCE;
    let result = json!({
        "params": p,
        "limit": limit,
        "tolerance": DRIFT_TOLERANCE,
        "within_tolerance": within,
        "rows": rows,
    });
    let claim = (!within)
        .then(|| Failure::audit(format!("finest drift quotient {last} is not within {DRIFT_TOLERANCE} of {limit}")));
    Ok(Done { result, claim })
}

/// `x0,x1,t0,t1` with `x0 < x1` and `t0 < t1`.
pub fn parse_region(text: &str) -> Result<Region64, String> {
    let v = parse_numbers(text)?;
    let [x0, x1, t0, t1] = v[..] else {
        return Err(format!("expected x0,x1,t0,t1, got {} values", v.len()));
    };
    if !(x0 < x1 && t0 < t1) {
        return Err(format!("empty region [{x0}, {x1}] x [{t0}, {t1}]"));
    }
    Ok(Region64::new(x0, x1, t0, t1))
}

/// Comma-separated positive scales.
pub fn parse_epsilons(text: &str) -> Result<Vec<f64>, String> {
    let v = parse_numbers(text)?;
    if let Some(e) = v.iter().find(|e| **e <= 0.0) {
        return Err(format!("scale {e} is not positive"));
    }
    Ok(v)
}

pub fn parse_positive(text: &str) -> Result<f64, String> {
    match text.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a finite positive number")),
        Err(e) => Err(format!("`{text}`: {e}")),
    }
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|e| format!("`{}`: {e}", p.trim()))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{}` is not finite", p.trim()))
            }
        })
        .collect()
}
