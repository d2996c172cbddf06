use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pursuit_cli::{emit_report, parse_epsilons, parse_positive, parse_region, run, Command, Overrides, Verb};
use pursuit_core::Region64;

#[derive(Clone, Debug)]
struct Scales(Vec<f64>);

#[derive(Parser, Debug)]
#[command(name = "pursuit", version, about = "Delayed pursuit experiments")]
struct Cli {
    #[command(subcommand)]
    verb: VerbArg,
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory for artifacts and `report.json`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Micro time step.
    #[arg(long, global = true, value_parser = parse_positive)]
    dt: Option<f64>,
    /// Comma-separated scales.
    #[arg(long, global = true, value_parser = |s: &str| parse_epsilons(s).map(Scales))]
    eps: Option<Scales>,
    /// Comparison region `x0,x1,t0,t1`.
    #[arg(long, global = true, value_parser = parse_region, allow_hyphen_values = true)]
    region: Option<Region64>,
}

#[derive(Subcommand, Debug)]
enum VerbArg {
    /// Integrate the micro system and audit the order.
    Simulate,
    /// Thresholds for a Lipschitz constant, with a certificate when `--tau` is given.
    Threshold {
        #[arg(long, value_parser = parse_positive)]
        cf: Option<f64>,
        #[arg(long, value_parser = parse_positive)]
        tau: Option<f64>,
    },
    /// Strict comparison audit between neighbouring drivers.
    Compare,
    /// Convergence study of the rescaled micro solution.
    Homogenize,
    /// Drift quotients of the oscillating counter-example.
    Counterexample,
    /// Check a scenario without running it.
    Validate,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (verb, c_f, tau) = match cli.verb {
        VerbArg::Simulate => (Verb::Simulate, None, None),
        VerbArg::Threshold { cf, tau } => (Verb::Threshold, cf, tau),
        VerbArg::Compare => (Verb::Compare, None, None),
        VerbArg::Homogenize => (Verb::Homogenize, None, None),
        VerbArg::Counterexample => (Verb::Counterexample, None, None),
        VerbArg::Validate => (Verb::Validate, None, None),
    };
    let cmd = Command {
        verb,
        scenario: cli.scenario,
        out: cli.out,
        overrides: Overrides { dt: cli.dt, epsilons: cli.eps.map(|s| s.0), region: cli.region },
        c_f,
        tau,
    };
    let outcome = run(&cmd);
    let report = emit_report(std::slice::from_ref(&outcome));
    if let Err(e) = std::fs::write(cmd.out.join("report.json"), format!("{report}\n")) {
        eprintln!("cannot write report.json: {e}");
    }
    println!("{report}");
    ExitCode::from(outcome.exit_code as u8)
}
