use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use turnover::adoption::{binding_check, scale_monotonicity_scan, ScaleProblem};
use turnover::checks::{run_checks, Suite};
use turnover::figures::{emit_figure_data, FigureId};
use turnover::microsim::{simulate_within_form, SimSpec};
use turnover::model::codification_margin;
use turnover::repair::{optimize_repair, RepairConclusion};
use turnover::solve::linspace;
use turnover::sweep::{run_sweep, SweepSpec};
use turnover::thresholds::{
    intensity_cutoff, lambda_crit, s_flip, s_flip_bisection, s_std_crit_and_gap, surface_check, x_crit,
    x_crit_binding, Crossing,
};
use turnover::{load_scenario, ModelError, Scenario};

const EXIT_CONFIG: u8 = 1;
const EXIT_CHECK: u8 = 2;
const EXIT_NO_CROSSING: u8 = 3;

#[derive(Parser)]
#[command(name = "turnover", version, about = "Failure-channel, threshold and adoption solver for scenario files")]
struct Cli {
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for output files; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate both failure channels at a design point.
    Eval {
        #[arg(long)]
        x: Option<f64>,
        /// Codification; defaults to the feasibility minimum S(x).
        #[arg(long)]
        s: Option<f64>,
    },
    /// Solve threshold quantities.
    Threshold {
        #[arg(long, value_enum, default_value_t = ThresholdKind::All)]
        kind: ThresholdKind,
    },
    /// Optimize adopted scale along the binding path.
    Adopt {
        #[arg(long)]
        lambda: Option<f64>,
        /// Also scan this many pressures across the figure range.
        #[arg(long)]
        scan: Option<usize>,
    },
    /// Solve the post-crisis unwinding problem.
    Repair,
    /// Monte Carlo check of the within-form success probability.
    Simulate {
        #[arg(long)]
        replications: Option<u64>,
    },
    /// Sweep one scenario parameter and write a CSV table.
    Sweep {
        /// Dotted scenario key, e.g. adoption.lambda.
        #[arg(long)]
        param: String,
        /// Evenly spaced grid `lo:hi:n`.
        #[arg(long, conflicts_with = "values")]
        grid: Option<String>,
        /// Explicit comma-separated grid values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Comma-separated output names.
        #[arg(long, value_delimiter = ',', required = true)]
        outputs: Vec<String>,
    },
    /// Write figure data as CSV files.
    Figure {
        /// fig1, fig2, figB1 or all.
        id: String,
    },
    /// Run a named check suite and print a JSON report.
    Check {
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThresholdKind {
    All,
    XCrit,
    XCritBinding,
    SFlip,
    LambdaCrit,
    Gap,
}

enum Failure {
    Error(ModelError),
    Checks,
    NoCrossing(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NoCrossing(m) => Failure::NoCrossing(m),
            other => Failure::Error(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Checks) => ExitCode::from(EXIT_CHECK),
        Err(Failure::NoCrossing(m)) => {
            eprintln!("no crossing: {m}");
            ExitCode::from(EXIT_NO_CROSSING)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| ModelError::Resource(e.to_string()))?;
    }
    let mut scenario = match &cli.scenario {
        Some(p) => load_scenario(p)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Eval { x, s } => eval(&mut scenario, x, s, out),
        Command::Threshold { kind } => threshold(&scenario, kind, out),
        Command::Adopt { lambda, scan } => adopt(&mut scenario, lambda, scan, out),
        Command::Repair => repair(&scenario, out),
        Command::Simulate { replications } => simulate(&scenario, replications, out),
        Command::Sweep { param, grid, values, outputs } => sweep(&scenario, param, grid, values, outputs, out),
        Command::Figure { id } => figure(&scenario, &id, out),
        Command::Check { suite } => check(&scenario, &suite, out),
    }
}

fn emit(out: Option<&Path>, file_name: &str, text: &str) -> CliResult<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(ModelError::from)?;
            let path = dir.join(file_name);
            fs::write(&path, text).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
            println!("{}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, file_name: &str, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json value");
    text.push('\n');
    emit(out, file_name, &text)
}

fn eval(sc: &mut Scenario, x: Option<f64>, s: Option<f64>, out: Option<&Path>) -> CliResult<()> {
    if let Some(x) = x {
        sc.point.x = x;
    }
    if s.is_some() {
        sc.point.s = s;
    }
    sc.validate()?;
    let m = sc.model()?;
    let (x, s) = sc.point()?;
    let fp = m.failure_partials(x, s);
    let cm = codification_margin(x, s, &m.intensity, &m.safeguards, &m.config.overt);
    let check = surface_check(
        &turnover::model::Architecture::new(x, s),
        &m.intensity,
        &m.config.variant,
        &sc.target,
    );
    let value = json!({
        "scenario": sc.name,
        "x": x,
        "s": s,
        "feasible": s >= turnover::families::feasibility_s(x, m.econ())? - 1e-12,
        "mu0": m.intensity.mu0,
        "eta": m.intensity.eta,
        "mu": m.mu(x, s),
        "pwf": m.pwf(x, s),
        "search_pwf": m.search_pwf(x, s)?,
        "F0": m.f0(x, s),
        "F": m.failure(x, s),
        "dF_dx": fp.dx,
        "dF_ds": fp.ds,
        "knife_edge": fp.knife_edge,
        "h": cm.h,
        "margin": check.margin,
        "exploitable": check.exploitable,
    });
    emit_json(out, "eval.json", &value)
}

fn crossing_json(c: &Crossing) -> serde_json::Value {
    serde_json::to_value(c).expect("crossing serializes")
}

fn threshold(sc: &Scenario, kind: ThresholdKind, out: Option<&Path>) -> CliResult<()> {
    let m = sc.model()?;
    let (x, s) = sc.point()?;
    let ip = m.intensity;
    let (r, overt) = (m.safeguards, m.config.overt);
    let want = |k: ThresholdKind| kind == ThresholdKind::All || kind == k;
    let strict = kind != ThresholdKind::All;
    let mut report = serde_json::Map::new();
    report.insert("scenario".into(), json!(sc.name));
    report.insert("p_bar".into(), json!(sc.target.p_bar));
    report.insert("tau".into(), json!(intensity_cutoff(&sc.target, m.k())));

    if want(ThresholdKind::XCrit) {
        match x_crit(&sc.target, &ip, s) {
            Ok(v) => {
                report.insert("x_crit".into(), json!({ "s": s, "value": v }));
            }
            Err(e) if !strict => {
                report.insert("x_crit".into(), json!({ "status": "none", "reason": e.to_string() }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if want(ThresholdKind::XCritBinding) {
        let c = x_crit_binding(&sc.target, &ip, m.econ(), &m.config.variant)?;
        if strict {
            if let Crossing::None { reason } = &c {
                return Err(Failure::NoCrossing(reason.clone()));
            }
        }
        report.insert("x_crit_binding".into(), crossing_json(&c));
    }
    if want(ThresholdKind::SFlip) {
        let closed = s_flip(x, &ip, &r, &overt);
        let bis = s_flip_bisection(x, &ip, &r, &overt);
        if strict && closed.is_none() {
            return Err(Failure::NoCrossing(format!("h keeps one sign on [0,1] at x={x}")));
        }
        report.insert("s_flip".into(), json!({ "x": x, "closed_form": closed, "bisection": bis }));
    }
    if want(ThresholdKind::LambdaCrit) {
        let p = ScaleProblem::from_scenario(sc)?;
        match lambda_crit(&p, &sc.target, sc.figures.lambda_lo, sc.figures.lambda_hi) {
            Ok(c) => {
                if strict {
                    if let Crossing::None { reason } = &c {
                        return Err(Failure::NoCrossing(reason.clone()));
                    }
                }
                report.insert("lambda_crit".into(), crossing_json(&c));
            }
            Err(e @ ModelError::AssumptionViolation(_)) if !strict => {
                report.insert("lambda_crit".into(), json!({ "status": "unsolved", "reason": e.to_string() }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if want(ThresholdKind::Gap) {
        match &sc.repair {
            Some(cfg) => {
                let st = cfg.inherited;
                let gap = s_std_crit_and_gap(st.x_h, &ip, &sc.target, st.s_std_h)?;
                if strict && gap.saturated {
                    return Err(Failure::NoCrossing("baseline intensity alone exceeds the cutoff".into()));
                }
                report.insert("gap".into(), serde_json::to_value(gap).expect("serializes"));
            }
            None if strict => {
                return Err(ModelError::config("repair", "the gap needs a [repair] section").into());
            }
            None => {}
        }
    }
    emit_json(out, "threshold.json", &serde_json::Value::Object(report))
}

fn adopt(sc: &mut Scenario, lambda: Option<f64>, scan: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    if let Some(l) = lambda {
        sc.adoption.lambda = l;
    }
    sc.validate()?;
    let p = ScaleProblem::from_scenario(sc)?;
    let opt = p.optimize(sc.adoption.lambda)?;
    let binding = binding_check(opt.x_star, sc)?;
    let mut value = json!({ "scenario": sc.name, "optimum": opt, "binding_check": binding });
    if let Some(n) = scan {
        let grid = linspace(sc.figures.lambda_lo, sc.figures.lambda_hi, n.max(2));
        value["scan"] = serde_json::to_value(scale_monotonicity_scan(sc, &grid)?).expect("serializes");
    }
    emit_json(out, "adopt.json", &value)
}

fn repair(sc: &Scenario, out: Option<&Path>) -> CliResult<()> {
    let rep = optimize_repair(sc)?;
    emit_json(out, "repair.json", &json!({ "scenario": sc.name, "report": rep }))?;
    if rep.conclusion == RepairConclusion::SaturatedBaseline {
        return Err(Failure::NoCrossing("baseline intensity alone exceeds the cutoff".into()));
    }
    Ok(())
}

fn simulate(sc: &Scenario, replications: Option<u64>, out: Option<&Path>) -> CliResult<()> {
    let mut spec = match sc.sim_spec() {
        Some(s) => s,
        None => {
            let m = sc.model()?;
            let (x, s) = sc.point()?;
            SimSpec::from_search(&m.search_params(x, s), m.intensity.mu0, m.k(), 1_000_000, sc.seed)?
        }
    };
    if let Some(n) = replications {
        spec.replications = n;
    }
    let res = simulate_within_form(&spec)?;
    emit_json(out, "simulate.json", &json!({ "scenario": sc.name, "spec": spec, "seed": spec.seed, "result": res }))
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || Failure::Error(ModelError::config("grid", format!("expected lo:hi:n, got `{text}`")));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(linspace(lo, hi, n))
}

fn sweep(
    sc: &Scenario,
    param: String,
    grid: Option<String>,
    values: Option<Vec<f64>>,
    outputs: Vec<String>,
    out: Option<&Path>,
) -> CliResult<()> {
    let grid = match (grid, values) {
        (Some(g), _) => parse_grid(&g)?,
        (None, Some(v)) => v,
        (None, None) => return Err(ModelError::config("grid", "pass --grid lo:hi:n or --values").into()),
    };
    let spec = SweepSpec { parameter_path: param, grid, outputs };
    let table = run_sweep(sc, &spec)?;
    let file_name = format!("sweep_{}.csv", spec.parameter_path.replace('.', "_"));
    emit(out, &file_name, &table.to_csv())
}

fn figure(sc: &Scenario, id: &str, out: Option<&Path>) -> CliResult<()> {
    let ids: Vec<FigureId> = if id == "all" { FigureId::ALL.to_vec() } else { vec![id.parse()?] };
    let dir = out.unwrap_or(Path::new("."));
    for id in ids {
        for f in emit_figure_data(sc, id)? {
            emit(Some(dir), &f.file_name, &f.table.to_csv())?;
        }
    }
    Ok(())
}

fn check(sc: &Scenario, suite: &str, out: Option<&Path>) -> CliResult<()> {
    let suite: Suite = suite.parse()?;
    let report = run_checks(sc, suite)?;
    emit_json(out, &format!("check_{suite}.json"), &serde_json::to_value(&report).expect("serializes"))?;
    if report.passed {
        Ok(())
    } else {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("FAIL {}/{}: measured {} > tolerance {}", c.suite, c.name, c.measured, c.tolerance);
        }
        Err(Failure::Checks)
    }
}
