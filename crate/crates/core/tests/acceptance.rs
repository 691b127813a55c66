//! Acceptance run: one PASS/FAIL line per criterion, with the measured value,
//! its tolerance and the wall-clock time against the budget.
//!
//! Run with `cargo test -p turnover-core --test acceptance`.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use turnover::adoption::{scan_with, ScaleProblem};
use turnover::checks::{run_checks, Suite};
use turnover::families::{
    derive_intensity, IntensityForm, IntensityParams, OvertConfig, SafeguardResponseConfig, Safeguards,
    VariantConfig,
};
use turnover::figures::{emit_figure_data, FigureId, FIG_B1_P_BAR};
use turnover::microsim::{fixed_mean_regimes, poisson_approx_error, simulate_within_form, SimSpec};
use turnover::model::{codification_margin, pwf, total_failure, total_failure_max, Architecture, Model};
use turnover::repair::{optimize_repair, RepairConclusion};
use turnover::scenario::load_scenario;
use turnover::solve::linspace;
use turnover::sweep::CsvTable;
use turnover::thresholds::{
    intensity_cutoff, lambda_crit, s_flip, s_flip_bisection, surface_check, x_crit, Crossing, ThresholdTarget,
};
use turnover::Scenario;

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_response(r: &mut ChaCha8Rng) -> SafeguardResponseConfig {
    let q0 = r.random_range(0.0..1.0);
    SafeguardResponseConfig {
        m_bar: r.random_range(0.1..2.0),
        a_m: r.random_range(0.1..3.0),
        m_floor: r.random_range(0.01..0.5),
        kappa_floor: r.random_range(0.05..1.0),
        a_k: r.random_range(0.1..3.0),
        q0,
        q1: r.random_range(0.1..2.0),
        q_cap: q0 + r.random_range(0.1..2.0),
        theta: r.random_range(0.1..2.0),
        theta0: r.random_range(0.1..2.0),
    }
}

fn random_safeguards(r: &mut ChaCha8Rng) -> Safeguards {
    Safeguards { r_m: r.random_range(0.0..3.0), r_kappa: r.random_range(0.0..3.0), r_q: r.random_range(0.0..3.0) }
}

fn threshold_identity() -> Outcome {
    let mut r = rng(1);
    let (mut worst, mut flips) = (0.0f64, 0);
    let draws = 1000;
    for _ in 0..draws {
        let target = ThresholdTarget::new(r.random_range(0.05..0.95)).unwrap();
        let tau = intensity_cutoff(&target, 1);
        let ip = IntensityParams { mu0: r.random_range(0.0..0.9) * tau, eta: r.random_range(0.1..5.0) };
        let s = r.random_range(0.05..1.0);
        let xc = x_crit(&target, &ip, s).unwrap();
        worst = worst.max((pwf(ip.mu0 + ip.eta * xc * s) - target.p_bar).abs());
        let v = VariantConfig::default();
        let below = surface_check(&Architecture::new(xc - 1e-6, s), &ip, &v, &target);
        let above = surface_check(&Architecture::new(xc + 1e-6, s), &ip, &v, &target);
        if !below.exploitable && above.exploitable {
            flips += 1;
        }
    }
    outcome(
        worst <= 1e-9 && flips == draws,
        format!("max |pwf(x_crit)-p_bar| = {worst:.2e} (tol 1e-9); flag flips {flips}/{draws}"),
    )
}

fn scale_safeguard_monotonicity() -> Outcome {
    let mut r = rng(2);
    let draws = 1000;
    let mut violations = 0;
    for _ in 0..draws {
        let response = random_response(&mut r);
        let safeguards = random_safeguards(&mut r);
        let mut m = Model::new(Default::default(), safeguards, None, Default::default(), r.random_range(1.0..20.0)).unwrap();
        m.config.response = response;
        let m = m.with_safeguards(safeguards).unwrap();
        let x = r.random_range(0.01..0.99);
        let s = r.random_range(0.01..0.99);
        let d = 1e-3;
        let both = |m: &Model, x: f64, s: f64| (m.pwf(x, s), m.search_pwf(x, s).unwrap());
        let base = both(&m, x, s);
        let mut ok = true;
        let up_x = both(&m, x + d, s);
        let up_s = both(&m, x, s + d);
        ok &= up_x.0 > base.0 && up_x.1 > base.1;
        ok &= up_s.0 > base.0 && up_s.1 > base.1;
        for j in 0..3 {
            let more = m.with_safeguards(safeguards.with_component(j, safeguards.component(j) + 0.1)).unwrap();
            let v = both(&more, x, s);
            ok &= v.0 <= base.0 && v.1 <= base.1;
        }
        if !ok {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} ordering violations in {draws} draws (Poisson and search forms, x, s, r_m, r_kappa, r_q)"),
    )
}

fn codification_one_crossing() -> Outcome {
    let mut r = rng(3);
    let draws = 1000;
    let grid = linspace(0.0, 1.0, 10_000);
    let (mut bad_patterns, mut worst_flip) = (0, 0.0f64);
    for _ in 0..draws {
        let overt = OvertConfig {
            f0: r.random_range(0.01..0.99),
            b: r.random_range(0.1..6.0),
            c_m: r.random_range(0.0..1.0),
            c_k: r.random_range(0.0..1.0),
            c_q: r.random_range(0.0..1.0),
            a_x: 0.0,
        };
        let safeguards = random_safeguards(&mut r);
        let ip = derive_intensity(&safeguards, &SafeguardResponseConfig::default()).unwrap();
        let x = r.random_range(1e-3..1.0);
        let mut seen_pos = false;
        for &s in &grid {
            let h = codification_margin(x, s, &ip, &safeguards, &overt).h;
            if h > 0.0 {
                seen_pos = true;
            } else if h < 0.0 && seen_pos {
                bad_patterns += 1;
                break;
            }
        }
        match (s_flip(x, &ip, &safeguards, &overt), s_flip_bisection(x, &ip, &safeguards, &overt)) {
            (Some(a), Some(b)) => worst_flip = worst_flip.max((a - b.value).abs()),
            (None, None) => {}
            _ => worst_flip = f64::INFINITY,
        }
    }
    let worked = OvertConfig { f0: 0.8, b: 2.0, c_m: 0.0, c_k: 0.0, c_q: 0.0, a_x: 0.0 };
    let ip = IntensityParams { mu0: 0.0, eta: 1.0 };
    let r0 = Safeguards::default();
    let closed = s_flip(1.0, &ip, &r0, &worked).unwrap();
    let bis = s_flip_bisection(1.0, &ip, &r0, &worked).unwrap().value;
    let worked_err = (closed - 0.437_734_368_676_949_9).abs().max((closed - bis).abs());
    outcome(
        bad_patterns == 0 && worst_flip <= 1e-8 && worked_err <= 1e-8,
        format!(
            "{bad_patterns} non-(-)*(+)* patterns in {draws} draws; closed vs bisection max {worst_flip:.2e}; worked s_flip {closed:.6} err {worked_err:.2e} (tol 1e-8)"
        ),
    )
}

fn pressure_crossing() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();

    let deg = scenario("degenerate");
    let p = ScaleProblem::from_scenario(&deg).unwrap();
    let closed = (intensity_cutoff(&deg.target, 1) / 2.0).sqrt();
    match lambda_crit(&p, &deg.target, deg.figures.lambda_lo, deg.figures.lambda_hi) {
        Ok(Crossing::At(r)) => {
            let err = (r.value - closed).abs();
            ok &= err <= 1e-6;
            parts.push(format!("degenerate lambda_crit {:.9} err {err:.1e}", r.value));
        }
        other => {
            ok = false;
            parts.push(format!("degenerate: {other:?}"));
        }
    }

    let full = scenario("modernization");
    let p = ScaleProblem::from_scenario(&full).unwrap();
    match lambda_crit(&p, &full.target, full.figures.lambda_lo, full.figures.lambda_hi) {
        Ok(Crossing::At(r)) => {
            let resid = (p.optimize(r.value).unwrap().zeta - full.target.p_bar).abs();
            let above = linspace(r.value, full.figures.lambda_hi, 21)
                .into_iter()
                .skip(1)
                .all(|l| p.optimize(l).unwrap().zeta >= full.target.p_bar);
            ok &= resid <= 1e-6 && above;
            parts.push(format!("full lambda_crit {:.6} |zeta-p_bar| {resid:.1e}, zeta>=p_bar above: {above}", r.value));
        }
        other => {
            ok = false;
            parts.push(format!("full: {other:?}"));
        }
    }

    for sc in [&deg, &full] {
        let p = ScaleProblem::from_scenario(sc).unwrap();
        let grid = linspace(sc.figures.lambda_lo, sc.figures.lambda_hi, 40);
        let scan = scan_with(&p, &sc.target, &grid).unwrap();
        let x_bar = p.model.econ().x_bar;
        let strict = scan
            .rows
            .windows(2)
            .filter(|w| w[0].x_star < x_bar && w[1].x_star < x_bar)
            .all(|w| w[1].x_star > w[0].x_star + 1e-9);
        ok &= scan.concave && strict && scan.x_star_monotone;
        parts.push(format!("{}: concave {}, x* strictly increasing {strict}", sc.name, scan.concave));
    }
    outcome(ok, parts.join("; "))
}

fn derivative_suite() -> Outcome {
    let base = scenario("baseline");
    let mut variants = vec![base.clone()];
    let mut amb = base.clone();
    amb.name = "ambiguity".into();
    amb.families.variant = VariantConfig { form: IntensityForm::Ambiguity, omega_rate: 0.7, ..Default::default() };
    variants.push(amb);
    let mut nl = base.clone();
    nl.name = "nonlinear".into();
    nl.families.variant = VariantConfig { form: IntensityForm::Nonlinear, alpha: 1.5, beta: 2.0, ..Default::default() };
    variants.push(nl);
    let mut k2 = base.clone();
    k2.name = "k2".into();
    k2.families.variant.k = 2;
    variants.push(k2);
    let mut mx = base.clone();
    mx.name = "max".into();
    mx.model.aggregator = turnover::model::Aggregator::Max;
    variants.push(mx);

    let (mut worst, mut failed) = (0.0f64, Vec::new());
    for sc in &variants {
        let rep = run_checks(sc, Suite::Derivatives).unwrap();
        for c in &rep.checks {
            worst = worst.max(c.measured);
            if !c.passed {
                failed.push(format!("{}/{}", sc.name, c.name));
            }
        }
    }
    outcome(
        failed.is_empty(),
        format!(
            "{} variants x 1000 points; worst |a-fd|/(1e-6|fd|+1e-9) = {worst:.3} (tol 1){}",
            variants.len(),
            if failed.is_empty() { String::new() } else { format!("; failed {failed:?}") }
        ),
    )
}

fn repair_worked() -> Outcome {
    let rep = optimize_repair(&scenario("repair_worked")).unwrap();
    let u_err = (rep.u_star - 0.032).abs();
    let g_err = (rep.g_h - 0.491_854_634_062_922_5).abs();
    let ok = u_err <= 1e-3
        && g_err <= 1e-6
        && rep.conclusion == RepairConclusion::IncompleteUnwinding
        && rep.pwf_post > 0.6;
    outcome(
        ok,
        format!(
            "u* {:.6} (|u*-0.032| {u_err:.1e}, tol 1e-3); g_H {:.6} err {g_err:.1e}; {:?}; pwf_post {:.4}",
            rep.u_star, rep.g_h, rep.conclusion, rep.pwf_post
        ),
    )
}

fn microfoundation() -> Outcome {
    let a = simulate_within_form(&SimSpec {
        n_interfaces: 10,
        attempts_per_interface: 3,
        p_attempt: 0.05,
        mu0: 0.0,
        k_required: 1,
        replications: 1_000_000,
        seed: 1,
        ..SimSpec::default()
    })
    .unwrap();
    let b = simulate_within_form(&SimSpec {
        n_interfaces: 0,
        attempts_per_interface: 3,
        p_attempt: 0.05,
        mu0: 0.9,
        k_required: 2,
        replications: 1_000_000,
        seed: 2,
        ..SimSpec::default()
    })
    .unwrap();
    let exact_a = (a.estimate - 0.785_361_236_057_062_4).abs() / a.std_error;
    let exact_b = (b.estimate - 0.227_517_646_492_861_74).abs() / b.std_error;
    let rows = poisson_approx_error(&fixed_mean_regimes(1.5, &[0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 1e-4]));
    let shrinks = rows.windows(2).all(|w| w[1].abs_gap < w[0].abs_gap);
    outcome(
        exact_a <= 3.0 && exact_b <= 3.0 && shrinks,
        format!(
            "binomial est {:.6} ({exact_a:.2} SE); k=2 est {:.6} ({exact_b:.2} SE); gap {:.2e} -> {:.2e} monotone {shrinks}",
            a.estimate,
            b.estimate,
            rows[0].abs_gap,
            rows[rows.len() - 1].abs_gap
        ),
    )
}

fn max_residual(t: &CsvTable, cols: &[&str]) -> f64 {
    cols.iter()
        .flat_map(|c| t.column(c).unwrap_or_else(|| panic!("missing column {c}")))
        .fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

fn figure_reproduction() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["degenerate", "codification_flip", "modernization"] {
        let sc = scenario(name);
        let m = sc.model().unwrap();
        for id in FigureId::ALL {
            for f in emit_figure_data(&sc, id).unwrap() {
                let t = &f.table;
                let r = match f.file_name.as_str() {
                    "fig1_locus.csv" => {
                        // Recompute the defining equation independently of the emitted residual.
                        let own = t
                            .rows
                            .iter()
                            .map(|row| (m.pwf(row[0], row[1]) - sc.target.p_bar).abs())
                            .fold(0.0, f64::max);
                        own.max(max_residual(t, &["residual"]))
                    }
                    "fig1_crossing.csv" if t.rows.is_empty() => 0.0,
                    "fig1_crossing.csv" => max_residual(t, &["residual", "zeta_residual"]),
                    "fig2_flip.csv" if t.rows.is_empty() => 0.0,
                    "fig2_flip.csv" => max_residual(t, &["h_residual", "bisection_residual"]),
                    "figB1_loci.csv" => {
                        let tau = intensity_cutoff(&ThresholdTarget::new(FIG_B1_P_BAR).unwrap(), 1);
                        let own = t
                            .rows
                            .iter()
                            .map(|row| {
                                let b = Safeguards { r_m: row[1], r_kappa: row[2], r_q: row[3] };
                                let mb = m.with_safeguards(b).unwrap();
                                let nu = mb.search_params(row[4], row[5]).nu().unwrap();
                                (mb.intensity.mu0 + mb.n_scale * row[4] * nu - tau).abs()
                            })
                            .fold(0.0, f64::max);
                        if t.rows.is_empty() {
                            ok = false;
                            notes.push(format!("{name}: empty figB1"));
                        }
                        own.max(max_residual(t, &["residual"]))
                    }
                    _ => 0.0,
                };
                worst = worst.max(r);
            }
        }
    }

    let bin = env!("CARGO_BIN_EXE_turnover");
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/modernization.toml");
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, jobs) in dirs.iter().zip(["1", "4"]) {
        let st = Command::new(bin)
            .args(["--scenario", path.to_str().unwrap(), "--seed", "5", "--jobs", jobs, "--out"])
            .arg(d.path())
            .args(["figure", "all"])
            .output()
            .unwrap();
        ok &= st.status.success();
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let identical = !names.is_empty()
        && names.iter().all(|n| std::fs::read(dirs[0].path().join(n)).ok() == std::fs::read(dirs[1].path().join(n)).ok());
    ok &= worst <= 1e-8 && identical;
    outcome(
        ok,
        format!(
            "max locus residual {worst:.2e} (tol 1e-8); figB1 at p_bar={FIG_B1_P_BAR}; {} files byte-identical across runs: {identical}{}",
            names.len(),
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }
        ),
    )
}

fn max_aggregator() -> Outcome {
    let mut r = rng(9);
    let pairs = 10_000;
    let (mut dominance, mut monotone) = (0, 0);
    for _ in 0..pairs {
        let (p, f) = (r.random_range(0.0..=1.0), r.random_range(0.0..=1.0));
        if total_failure_max(p, f) > total_failure(p, f) {
            dominance += 1;
        }
        let (dp, df) = (r.random_range(0.0..=1.0 - p), r.random_range(0.0..=1.0 - f));
        let up = total_failure_max(p + dp, f) >= total_failure_max(p, f)
            && total_failure_max(p, f + df) >= total_failure_max(p, f)
            && total_failure(p + dp, f) >= total_failure(p, f)
            && total_failure(p, f + df) >= total_failure(p, f);
        if !up {
            monotone += 1;
        }
    }
    outcome(
        dominance == 0 && monotone == 0,
        format!("{pairs} pairs: {dominance} dominance violations, {monotone} monotonicity violations"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("threshold identity", Duration::from_secs(1), threshold_identity),
        ("scale and safeguard monotonicity", Duration::from_secs(5), scale_safeguard_monotonicity),
        ("codification one-crossing", Duration::from_secs(30), codification_one_crossing),
        ("pressure crossing", Duration::from_secs(60), pressure_crossing),
        ("derivative suite", Duration::from_secs(10), derivative_suite),
        ("post-crisis repair", Duration::from_secs(5), repair_worked),
        ("microfoundation oracle", Duration::from_secs(30), microfoundation),
        ("figure reproduction", Duration::from_secs(60), figure_reproduction),
        ("max aggregator", Duration::from_secs(1), max_aggregator),
    ];
    let mut all = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = run();
        let elapsed = t0.elapsed();
        let in_time = elapsed <= *budget;
        let passed = o.passed && in_time;
        all &= passed;
        println!(
            "criterion {} {:<34} {}  {:.3}s/{}s  {}",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
