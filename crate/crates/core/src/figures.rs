//! Data behind the three reference figures, as CSV tables.
//!
//! * `fig1`: the threshold locus `{(x, s): p_wf = p̄}`, the binding path
//!   `s = S(x)`, the adoption path `x*(λ)` and the crossing point.
//! * `fig2`: the codification margin and its two components over `s`, with
//!   the flip point.
//! * `figB1`: search-form threshold loci at `p̄ = 0.60`, one per safeguard
//!   bundle.
//!
//! Every locus row carries its own residual column.

use std::fmt;
use std::str::FromStr;

use crate::adoption::{scan_with, ScaleProblem};
use crate::error::{ModelError, Result};
use crate::families::feasibility_s;
use crate::model::{codification_margin, Model};
use crate::scenario::Scenario;
use crate::solve::{bisect, linspace, DEFAULT_MAX_ITER};
use crate::sweep::{provenance, CsvTable};
use crate::thresholds::{intensity_cutoff, lambda_crit, Crossing, s_flip, s_flip_bisection, x_crit_binding, ThresholdTarget};

/// Concern level of the search-form locus figure.
pub const FIG_B1_P_BAR: f64 = 0.60;

const LOCUS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    FigB1,
}

impl FigureId {
    pub const ALL: [FigureId; 3] = [FigureId::Fig1, FigureId::Fig2, FigureId::FigB1];
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::FigB1 => "figB1",
        })
    }
}

impl FromStr for FigureId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            "figB1" => Ok(FigureId::FigB1),
            _ => Err(ModelError::config("figure", format!("unknown figure `{s}`; expected fig1, fig2 or figB1"))),
        }
    }
}

/// One output file of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureFile {
    pub file_name: String,
    pub table: CsvTable,
}

fn file(name: &str, comment: String, columns: &[&str], rows: Vec<Vec<f64>>) -> FigureFile {
    FigureFile {
        file_name: name.to_string(),
        table: CsvTable {
            comment,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        },
    }
}

pub fn emit_figure_data(scenario: &Scenario, id: FigureId) -> Result<Vec<FigureFile>> {
    match id {
        FigureId::Fig1 => fig1(scenario),
        FigureId::Fig2 => fig2(scenario),
        FigureId::FigB1 => fig_b1(scenario),
    }
}

/// Codification at which `p_wf(x, ·)` reaches `p̄`, when it does so in `[0, 1]`.
fn threshold_s(model: &Model, target: &ThresholdTarget, x: f64) -> Option<(f64, f64)> {
    let g = |s: f64| model.pwf(x, s) - target.p_bar;
    if !(g(0.0) < 0.0 && g(1.0) >= 0.0) {
        return None;
    }
    let r = bisect(g, 0.0, 1.0, LOCUS_TOL, DEFAULT_MAX_ITER).ok()?;
    Some((r.value, r.residual))
}

fn fig1(scenario: &Scenario) -> Result<Vec<FigureFile>> {
    let model = scenario.model()?;
    let target = scenario.target;
    let econ = *model.econ();
    let cfg = &scenario.figures;
    let head = provenance(scenario);

    let xs = linspace(0.0, econ.x_bar, cfg.grid_points);
    let locus: Vec<Vec<f64>> = xs
        .iter()
        .filter_map(|&x| threshold_s(&model, &target, x).map(|(s, res)| vec![x, s, res]))
        .collect();
    let mut binding = Vec::with_capacity(xs.len());
    for &x in &xs {
        let s = feasibility_s(x, &econ)?;
        binding.push(vec![x, s, model.pwf(x, s)]);
    }

    let problem = ScaleProblem::from_scenario(scenario)?;
    let lambdas = linspace(cfg.lambda_lo, cfg.lambda_hi, cfg.grid_points);
    let scan = scan_with(&problem, &target, &lambdas)?;
    let path: Vec<Vec<f64>> = scan.rows.iter().map(|r| vec![r.lambda, r.x_star, r.s_star, r.zeta]).collect();

    let mut notes = Vec::new();
    let mut crossing = Vec::new();
    let x_cross = match x_crit_binding(&target, &model.intensity, &econ, &model.config.variant)? {
        c @ Crossing::At(_) => c.value(),
        Crossing::None { reason } => {
            notes.push(format!("no binding-path crossing: {reason}"));
            None
        }
    };
    let l_cross = match lambda_crit(&problem, &target, cfg.lambda_lo, cfg.lambda_hi) {
        Ok(Crossing::At(r)) => Some(r.value),
        Ok(Crossing::None { reason }) => {
            notes.push(format!("no pressure crossing: {reason}"));
            None
        }
        Err(ModelError::AssumptionViolation(m)) => {
            notes.push(format!("pressure crossing not solved: {m}"));
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(x) = x_cross {
        let s = feasibility_s(x, &econ)?;
        let (lambda, zeta) = match l_cross {
            Some(l) => (l, problem.optimize(l)?.zeta),
            None => (f64::NAN, f64::NAN),
        };
        crossing.push(vec![x, s, model.pwf(x, s) - target.p_bar, lambda, zeta - target.p_bar]);
    }
    let note = if notes.is_empty() { String::new() } else { format!("\nnote: {}", notes.join("; ")) };

    Ok(vec![
        file(
            "fig1_locus.csv",
            format!("{head}\nthreshold locus p_wf(x,s)=p_bar={}; residual=p_wf-p_bar", target.p_bar),
            &["x", "s", "residual"],
            locus,
        ),
        file(
            "fig1_binding.csv",
            format!("{head}\nbinding path s=S(x) with within-form success"),
            &["x", "s", "pwf"],
            binding,
        ),
        file(
            "fig1_path.csv",
            format!("{head}\nadopted scale x*(lambda) on the binding path; zeta=p_wf at the optimum"),
            &["lambda", "x_star", "s_star", "zeta"],
            path,
        ),
        file(
            "fig1_crossing.csv",
            format!("{head}\ncrossing of the binding path with the threshold; residuals are p_wf-p_bar and zeta-p_bar{note}"),
            &["x_crit", "s_crit", "residual", "lambda_crit", "zeta_residual"],
            crossing,
        ),
    ])
}

fn fig2(scenario: &Scenario) -> Result<Vec<FigureFile>> {
    let model = scenario.model()?;
    let x = scenario.point.x;
    let ip = model.intensity;
    let (r, overt) = (model.safeguards, model.config.overt);
    let head = provenance(scenario);
    let rows: Vec<Vec<f64>> = linspace(0.0, 1.0, scenario.figures.grid_points)
        .into_iter()
        .map(|s| {
            let op = crate::families::overt_partials(x, s, &r, &overt);
            let cm = codification_margin(x, s, &ip, &r, &overt);
            vec![s, -op.ds, (1.0 - op.f0) * ip.eta * x, cm.h, cm.df_ds]
        })
        .collect();
    let mut flip = Vec::new();
    let mut note = String::new();
    match (s_flip(x, &ip, &r, &overt), s_flip_bisection(x, &ip, &r, &overt)) {
        (Some(closed), Some(bis)) => {
            let h = codification_margin(x, closed, &ip, &r, &overt).h;
            flip.push(vec![closed, h, bis.value, bis.residual]);
        }
        _ => note = "\nnote: h does not change sign on [0,1]; no flip point".into(),
    }
    Ok(vec![
        file(
            "fig2_margin.csv",
            format!("{head}\ncodification margin at x={x}: h = F0_s + (1-F0)*eta*x"),
            &["s", "neg_F0_s", "within_cost", "h", "dF_ds"],
            rows,
        ),
        file(
            "fig2_flip.csv",
            format!("{head}\nflip point: closed form with h residual, and bisection with h residual{note}"),
            &["s_flip", "h_residual", "s_flip_bisection", "bisection_residual"],
            flip,
        ),
    ])
}

fn fig_b1(scenario: &Scenario) -> Result<Vec<FigureFile>> {
    let bundles = &scenario.figures.safeguard_bundles;
    if bundles.len() < 2 {
        return Err(ModelError::config(
            "figures.safeguard_bundles",
            format!("figB1 compares at least 2 safeguard bundles (got {})", bundles.len()),
        ));
    }
    let base = scenario.model()?;
    let target = ThresholdTarget::new(FIG_B1_P_BAR)?;
    let tau = intensity_cutoff(&target, 1);
    let head = provenance(scenario);
    let xs = linspace(0.0, base.econ().x_bar, scenario.figures.grid_points);
    let mut rows = Vec::new();
    for (j, bundle) in bundles.iter().enumerate() {
        let m = base.with_safeguards(*bundle)?;
        let level = |x: f64, s: f64| -> f64 {
            let nu = m.search_params(x, s).nu().unwrap_or(f64::INFINITY);
            m.intensity.mu0 + m.n_scale * x * nu - tau
        };
        for &x in &xs {
            if !(level(x, 0.0) < 0.0 && level(x, 1.0) >= 0.0) {
                continue;
            }
            let r = bisect(|s| level(x, s), 0.0, 1.0, LOCUS_TOL, DEFAULT_MAX_ITER)?;
            rows.push(vec![j as f64, bundle.r_m, bundle.r_kappa, bundle.r_q, x, r.value, r.residual]);
        }
    }
    Ok(vec![file(
        "figB1_loci.csv",
        format!("{head}\nsearch-form loci mu0+N(x)*nu(s;r)=tau(p_bar={FIG_B1_P_BAR}); residual in intensity units"),
        &["bundle", "r_m", "r_kappa", "r_q", "x", "s", "residual"],
        rows,
    )])
}
