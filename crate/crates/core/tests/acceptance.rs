//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one PASS/FAIL line.
//!
//! `cargo test -p pursuit-core --test acceptance`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::E;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pursuit_core::comparison::{neighbour_fields, order_disruption_pair, verify_conclusion, ComparisonWindow};
use pursuit_core::dde::{integrate, integrate_system};
use pursuit_core::homogenization::{
    convergence_study, counterexample_drift, macro_reference, micro_system, oscillation_oracle, rescale_field_rows,
    OscillationParams, Verdict,
};
use pursuit_core::macro_hj::{solve_for_region, solve_hj, HjGrid};
use pursuit_core::scalar::dyadic_floor;
use pursuit_core::thresholds::{constant_rho_interval, construct_rho, verify_condrho, RhoFunction};
use pursuit_core::{
    check_spacing_hypothesis, disruption_closed_form, DelayProfile, Error, FieldGrid, InitialHistory, Region, Scenario,
    Truncation, VelocityProfile,
};

type Outcome = Result<String, String>;
type Pair = (FieldGrid<f64>, FieldGrid<f64>, ComparisonWindow<f64>);
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("runtime {took:?} exceeds {limit:?}"))?;
    Ok(took)
}

fn err(e: Error) -> String {
    e.to_string()
}

fn gap_error(dt_over_tau: f64) -> Result<f64, String> {
    let p = OscillationParams::<f64>::default();
    let tau = p.tau();
    let mut s = p.scenario(10.0 * tau);
    s.dt = Some(dt_over_tau * tau);
    let ts = integrate(&s).map_err(err)?;
    let g = ts.gap_series(0, 0.0, 10.0 * tau).map_err(err)?;
    let mut worst: f64 = 0.0;
    for (t, gap) in g.times.iter().zip(&g.gaps) {
        worst = worst.max((gap - oscillation_oracle(&p, tau, 0, *t).map_err(err)?).abs());
    }
    Ok(worst)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let coarse = gap_error(1e-3)?;
    let fine = gap_error(5e-4)?;
    let took = within(start, Duration::from_secs(5))?;
    let ratio = coarse / fine;
    ensure(coarse <= 1e-5, || format!("sup gap error {coarse:.3e} > 1e-5"))?;
    ensure((3.5..=4.5).contains(&ratio), || format!("refinement ratio {ratio:.3} outside [3.5, 4.5]"))?;
    Ok(format!("error {coarse:.3e}, ratio {ratio:.3}, {took:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let s = Scenario {
        velocity: VelocityProfile::Quadratic { k: 1.0, beta: 0.5, alpha: 3.0, gap: 1.0 },
        delay: DelayProfile::constant(0.5),
        initial: InitialHistory::Linear { gap: 1.0 },
        truncation: Truncation::Periodic { drivers: 1, period: 1.0 },
        horizon: 1.0,
        dt: None,
        epsilons: None,
        expect: None,
    };
    let region = Region::new(-1.0, 1.0, 0.0, 1.0);
    let mut worst: f64 = 0.0;
    for eps in [0.1, 0.05, 0.025] {
        let ts = integrate_system(micro_system(&s, eps, &region).map_err(err)?, 1.0 / eps).map_err(err)?;
        let f: FieldGrid<f64> = rescale_field_rows(&ts, eps, &region, usize::MAX).map_err(err)?.field;
        for n in 0..f.nt {
            for j in 0..f.nx {
                worst = worst.max((f.at(j, n) - (f.x(j) + f.t(n))).abs());
            }
        }
    }
    let took = within(start, Duration::from_secs(5))?;
    ensure(worst <= 1e-10, || format!("sup error {worst:.3e} > 1e-10"))?;
    Ok(format!("sup error {worst:.3e}, {took:?}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_margin = f64::INFINITY;
    for k in 0..100 {
        let c_f = 10f64.powf(rng.gen_range(-1.0..1.0));
        let product = rng.gen_range(0.01..=0.99);
        let tau = product / (E * c_f);
        let rho = construct_rho(tau, c_f, None).map_err(|e| format!("feasible case {k}: {e}"))?;
        let cert = verify_condrho(&rho, 257).map_err(err)?;
        ensure(cert.holds, || format!("case {k} (tau {tau}, C_F {c_f}): margin {}", cert.min_margin))?;
        min_margin = min_margin.min(cert.min_margin);
    }
    for k in 0..100 {
        let c_f = 10f64.powf(rng.gen_range(-1.0..1.0));
        let product = rng.gen_range(1.0..3.0);
        let tau = product / (E * c_f);
        match construct_rho(tau, c_f, None) {
            Err(Error::Infeasible(_)) => {}
            other => return Err(format!("infeasible case {k} (tau {tau}, C_F {c_f}) gave {other:?}")),
        }
    }
    Ok(format!("100 certified (min margin {min_margin:.3e}), 100 infeasible"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut feasible = 0;
    for k in 0..100 {
        let c_f = rng.gen_range(0.5..4.0);
        let tau = rng.gen_range(0.01..0.4) / c_f;
        let rho = rng.gen_range(1.0..6.0);
        let certified = verify_condrho(&RhoFunction::constant(rho, tau, c_f), 257).map_err(err)?.holds;
        let inside = constant_rho_interval(c_f, tau).map_err(err)?.is_some_and(|(lo, hi)| lo < rho && rho < hi);
        ensure(certified == inside, || {
            format!("case {k} (C_F {c_f}, tau {tau}, rho {rho}): certificate {certified}, discriminant {inside}")
        })?;
        feasible += usize::from(inside);
    }
    Ok(format!("100 decisions agree ({feasible} feasible)"))
}

fn criterion_5() -> Outcome {
    let mut details = Vec::new();
    for (n0, tau) in [(1, 2.5), (2, 1.5)] {
        let pair = order_disruption_pair::<f64>(n0, tau, None).map_err(err)?;
        let exact = disruption_closed_form(n0, tau).map_err(err)?;
        let dt = pair.upper.dt();
        let diff = (pair.overtake - exact).abs();
        ensure(diff <= 10.0 * dt * dt, || {
            format!(
                "(n0 {n0}, tau {tau}): simulated {} vs closed form {exact}, diff {diff:.3e} > {:.3e}",
                pair.overtake,
                10.0 * dt * dt
            )
        })?;
        ensure(pair.overtake > 0.0, || format!("(n0 {n0}, tau {tau}): order not disrupted"))?;
        details.push(format!("({n0}, {tau}): {:.10} vs {exact:.10}", pair.overtake));
    }
    Ok(details.join("; "))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let p = OscillationParams::<f64>::default();
    let s = p.scenario(1.0);
    let q = counterexample_drift(&s, 1e-3, 1.0, 0.5).map_err(err)?;
    ensure((q - 1.04).abs() <= 5e-3, || format!("drift quotient {q} not within 5e-3 of 1.04"))?;

    let macro_field = solve_for_region(&s.velocity, |x| x, &Region::new(-1.0, 1.0, 0.0, 1.5)).map_err(err)?;
    let (a, b) = (macro_field.sample(0.0, 1.0), macro_field.sample(0.0, 1.5));
    let macro_q = match (a, b) {
        (Some(a), Some(b)) => (b - a) / 0.5,
        _ => return Err("macro field does not cover (0, 1.5)".into()),
    };
    ensure(macro_q == 1.0, || format!("macro quotient {macro_q} != 1"))?;

    let region = Region::default_region();
    let reference = macro_reference(&s, &region).map_err(err)?;
    let study = convergence_study(&s, &reference, &region).map_err(err)?;
    ensure(study.verdict == Verdict::Stalled, || format!("verdict {:?}, errors {:?}", study.verdict, study.errors))?;
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!("quotient {q:.6}, macro {macro_q}, errors {:.4?} stalled, {took:?}", study.errors))
}

fn criterion_7() -> Outcome {
    let velocity = VelocityProfile::Quadratic { k: 1.0, beta: 0.1, alpha: 1.0, gap: 1.0 };
    let c_f = velocity.lipschitz_data().map_err(err)?.c_f;
    let tau = 0.9 / (E * c_f);
    let s = Scenario {
        velocity,
        delay: DelayProfile::constant(tau),
        initial: InitialHistory::PerturbedLinear { gap: 1.0, amplitude: 0.05, wavelength: 2.0 },
        truncation: Truncation::Cone { first: 0, last: 0, horizon: 1.0 },
        horizon: 1.0,
        dt: Some(tau / 100.0),
        epsilons: Some(vec![0.1, 0.05, 0.025, 0.0125]),
        expect: None,
    };
    let region = Region::default_region();
    let rho = construct_rho(tau, c_f, None).map_err(err)?;

    for eps in s.scales() {
        let ts = integrate_system(micro_system(&s, eps, &region).map_err(err)?, region.t1 / eps).map_err(err)?;
        let count = *ts.drivers().end() as usize + 1;
        let back = ts.history_steps() as i64;
        let stride = 10;
        let n_to = -back + (ts.committed_steps() as i64 + back) / stride * stride;
        let (v, u) = neighbour_fields(&ts, 0, count, -back, n_to, stride as usize).map_err(err)?;
        let row0 = (back / stride) as usize;
        let delta = (0..count).map(|j| v.at(j, row0) - u.at(j, row0)).fold(f64::INFINITY, f64::min);
        let window = ComparisonWindow::unbounded(delta, 0.0, u.t_end(), rho);
        let check = check_spacing_hypothesis(&v, &u, &window).map_err(err)?;
        ensure(check.flags.all(), || format!("eps {eps}: spacing hypothesis not certified: {check:?}"))?;
    }

    let reference = macro_reference(&s, &region).map_err(err)?;
    let study = convergence_study(&s, &reference, &region).map_err(err)?;
    let errors = &study.errors;
    ensure(errors.windows(2).all(|w| w[1] < w[0]), || format!("errors not strictly decreasing: {errors:?}"))?;
    let last = *errors.last().unwrap_or(&f64::INFINITY);
    ensure(last <= 1e-2, || format!("final error {last:.3e} > 1e-2"))?;
    Ok(format!("spacing certified at every scale, errors {:.3?}", errors))
}

/// Two periodic runs with ordered initial data at a time-independent
/// separation, plus their comparison window.
fn admissible_pair(rng: &mut ChaCha8Rng) -> Result<Pair, String> {
    let velocity = if rng.gen_bool(0.5) {
        let gap = rng.gen_range(0.5..1.5);
        let beta = rng.gen_range(0.0..0.5);
        VelocityProfile::Quadratic {
            k: rng.gen_range(0.0..2.0),
            beta,
            alpha: 4.0 * beta * gap + rng.gen_range(0.1..2.0),
            gap,
        }
    } else {
        VelocityProfile::LinearClamped { slope: rng.gen_range(0.2..3.0), lo: 0.0, hi: rng.gen_range(0.5..3.0) }
    };
    let c_f = velocity.lipschitz_data().map_err(err)?.c_f;
    let tau = rng.gen_range(0.3..0.9) / (E * c_f);
    let rho = construct_rho(tau, c_f, None).map_err(err)?;
    let drivers: usize = rng.gen_range(3..=6);
    let spacing = rng.gen_range(0.5..1.5);
    let delta = rng.gen_range(0.05..0.3);
    let samples = 41;
    let table_dt = 2.0 * tau / (samples - 1) as f64;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for i in 0..drivers {
        let (a, w, phase) = (rng.gen_range(0.0..0.1) * spacing, rng.gen_range(0.5..5.0), rng.gen_range(0.0..6.3));
        let sep = rng.gen_range(delta..2.0 * delta);
        let row: Vec<f64> = (0..samples)
            .map(|n| {
                let t = -2.0 * tau + table_dt * n as f64;
                i as f64 * spacing + a * (w * t + phase).sin()
            })
            .collect();
        upper.push(row.iter().map(|x| x + sep).collect::<Vec<_>>());
        lower.push(row);
    }
    let horizon = 5.0;
    let run = |positions: Vec<Vec<f64>>| -> Result<FieldGrid<f64>, String> {
        let s = Scenario {
            velocity: velocity.clone(),
            delay: DelayProfile::constant(tau),
            initial: InitialHistory::Table { t_start: -2.0 * tau, dt: table_dt, first_driver: 0, positions },
            truncation: Truncation::Periodic { drivers, period: drivers as f64 * spacing },
            horizon,
            dt: Some(tau / 100.0),
            epsilons: None,
            expect: None,
        };
        let ts = integrate(&s).map_err(err)?;
        let back = ts.history_steps() as i64;
        ts.field(0, drivers, -back, ts.committed_steps() as i64, 1).map_err(err)
    };
    let (v, u) = (run(upper)?, run(lower)?);
    Ok((v, u, ComparisonWindow::unbounded(delta, 0.0, horizon, rho)))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_slack = f64::INFINITY;
    let mut controls = Vec::new();
    for k in 0..50 {
        let (v, u, w) = admissible_pair(&mut rng)?;
        let report = verify_conclusion(&v, &u, &w).map_err(err)?;
        ensure(report.hypothesis_ok.all(), || format!("configuration {k}: hypotheses fail: {:?}", report.spacing))?;
        ensure(report.conclusion_ok, || {
            format!("configuration {k}: conclusion fails at {:?}", report.first_violation)
        })?;
        min_slack = min_slack.min(report.min_slack);
        if controls.len() < 10 {
            controls.push((v, u, w));
        }
    }
    for (k, (mut v, u, w)) in controls.into_iter().enumerate() {
        let first_row = (0..u.nt).find(|&n| u.t(n) > 1e-9).unwrap_or(0);
        let n = rng.gen_range(first_row..u.nt - 1);
        let j = rng.gen_range(0..u.nx);
        v.values[n * v.nx + j] = u.at(j, n) + 0.5 * w.lower_bound(u.t(n));
        let report = verify_conclusion(&v, &u, &w).map_err(err)?;
        ensure(report.hypothesis_ok.all() && !report.conclusion_ok, || format!("control {k}: violation missed"))?;
        let wit = report.first_violation.ok_or("no witness")?;
        ensure(wit.x == u.x(j) && wit.t == u.t(n), || {
            format!("control {k}: witness ({}, {}) instead of ({}, {})", wit.x, wit.t, u.x(j), u.t(n))
        })?;
    }
    Ok(format!("50 conclusions hold (min slack {min_slack:.3e}), 10 violations located"))
}

fn random_velocity(rng: &mut ChaCha8Rng) -> VelocityProfile<f64> {
    if rng.gen_bool(0.5) {
        let gap = rng.gen_range(0.5..1.5);
        let beta = rng.gen_range(0.0..0.5);
        VelocityProfile::Quadratic {
            k: rng.gen_range(0.0..2.0),
            beta,
            alpha: 4.0 * beta * gap + rng.gen_range(0.1..2.0),
            gap,
        }
    } else {
        VelocityProfile::LinearClamped { slope: rng.gen_range(0.2..3.0), lo: -1.0, hi: rng.gen_range(0.5..3.0) }
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_const: f64 = 0.0;
    for k in 0..100 {
        let velocity = random_velocity(&mut rng);
        let c_f = velocity.lipschitz_data().map_err(err)?.c_f;
        let nx = rng.gen_range(50..200);
        let dx = 2f64.powi(-rng.gen_range(3..8));
        let dt = dyadic_floor(dx / c_f);
        let steps = rng.gen_range(20..200);
        let grid = HjGrid { x0: -1.0, dx, nx, dt, steps, store_every: 1, edge_slope: Some(1.0) };
        let mut u0 = vec![0.0];
        for _ in 1..nx {
            let last = *u0.last().unwrap_or(&0.0);
            u0.push(last + dx * rng.gen_range(-1.0..2.5));
        }
        let v0: Vec<f64> = u0.iter().map(|x| x + rng.gen_range(1e-6..1e-2)).collect();
        let (u, v) = (solve_hj(&velocity, &u0, &grid).map_err(err)?, solve_hj(&velocity, &v0, &grid).map_err(err)?);
        if let Some(i) = u.values.iter().zip(&v.values).position(|(a, b)| !(b > a)) {
            return Err(format!("pair {k}: order lost at node {} of row {}", i % nx, i / nx));
        }

        let c = rng.gen_range(-10.0..10.0);
        let shifted: Vec<f64> = u0.iter().map(|x| x + c).collect();
        let w = solve_hj(&velocity, &shifted, &grid).map_err(err)?;
        let scale = u.values.iter().fold(c.abs(), |m, x| m.max(x.abs()));
        for (a, b) in u.values.iter().zip(&w.values) {
            let d = (b - a - c).abs();
            worst_const = worst_const.max(d / scale);
        }

        let moved: Vec<f64> = (0..nx).map(|j| if j + 1 < nx { u0[j + 1] } else { u0[j] + dx }).collect();
        let m = solve_hj(&velocity, &moved, &grid).map_err(err)?;
        for n in 0..u.nt {
            for j in 0..nx.saturating_sub(n + 2) {
                ensure(m.at(j, n) == u.at(j + 1, n), || format!("pair {k}: translation broken at ({j}, {n})"))?;
            }
        }
    }
    ensure(worst_const <= 1e-12, || format!("constant shift off by {worst_const:.3e} (relative)"))?;
    Ok(format!("100 pairs ordered, constant shift within {worst_const:.2e} relative, translations bitwise"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oscillation oracle", criterion_1),
        ("stationary exactness", criterion_2),
        ("threshold iff", criterion_3),
        ("constant spacing threshold", criterion_4),
        ("order disruption", criterion_5),
        ("counter-example drift", criterion_6),
        ("below-threshold convergence", criterion_7),
        ("comparison principle suite", criterion_8),
        ("macro discrete comparison", criterion_9),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                println!("criterion {} {name}: FAIL ({why})", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
