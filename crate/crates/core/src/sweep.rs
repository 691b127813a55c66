//! One-parameter sweeps over a scenario, written as CSV.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adoption::ScaleProblem;
use crate::error::{ModelError, Result};
use crate::model::codification_margin;
use crate::repair::RepairProblem;
use crate::scenario::Scenario;
use crate::thresholds::{intensity_cutoff, s_std_crit_and_gap, x_crit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted key into the scenario, e.g. `adoption.lambda` or
    /// `figures.safeguard_bundles.0.r_q`.
    pub parameter_path: String,
    pub grid: Vec<f64>,
    pub outputs: Vec<String>,
}

/// Name, unit and meaning of every sweepable output.
pub const OUTPUTS: &[(&str, &str, &str)] = &[
    ("mu0", "intensity", "baseline within-form intensity"),
    ("eta", "intensity", "standardized within-form intensity"),
    ("mu", "intensity", "within-form intensity at the point"),
    ("pwf", "probability", "within-form success at the point"),
    ("search_pwf", "probability", "search-form within-form success at the point"),
    ("F0", "probability", "overt-channel success at the point"),
    ("F", "probability", "total failure at the point"),
    ("margin", "intensity", "mu minus the cutoff for p_bar"),
    ("dF_dx", "probability/scale", "partial of F in x"),
    ("dF_ds", "probability/codification", "partial of F in s"),
    ("neg_F0_s", "probability/codification", "deterrence gain -dF0/ds"),
    ("within_cost", "intensity/codification", "(1-F0)*eta*x"),
    ("h", "intensity/codification", "codification margin F0_s+(1-F0)*eta*x"),
    ("x_crit", "scale", "critical scale at the point's s"),
    ("objective", "utility", "adoption objective at the point"),
    ("x_star", "scale", "adopted scale on the binding path"),
    ("s_star", "codification", "codification at the adopted scale"),
    ("u_star", "utility", "adoption objective at the optimum"),
    ("zeta", "probability", "within-form success at the adopted point"),
    ("s_std_crit", "codification", "largest safe insider-facing standardization"),
    ("g_h", "codification", "inherited standardization gap"),
    ("repair_u", "codification", "optimal post-crisis unwinding"),
    ("pwf_post", "probability", "within-form success after unwinding"),
];

fn unit_of(name: &str) -> Option<&'static str> {
    OUTPUTS.iter().find(|(n, _, _)| *n == name).map(|(_, u, _)| *u)
}

fn valid_names() -> String {
    OUTPUTS.iter().map(|(n, _, _)| *n).collect::<Vec<_>>().join(", ")
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.outputs.is_empty() {
            return Err(ModelError::config(
                "sweep.outputs",
                format!("outputs must name at least one of: {}", valid_names()),
            ));
        }
        for o in &self.outputs {
            if unit_of(o).is_none() {
                return Err(ModelError::config(
                    "sweep.outputs",
                    format!("unknown output `{o}`; valid names: {}", valid_names()),
                ));
            }
        }
        if self.grid.is_empty() {
            return Err(ModelError::config("sweep.grid", "grid must be nonempty"));
        }
        if let Some(v) = self.grid.iter().find(|v| !v.is_finite()) {
            return Err(ModelError::config("sweep.grid", format!("grid value {v} is not finite")));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::config("sweep.grid", "grid must be strictly ascending"));
        }
        Ok(())
    }
}

/// Copy of `scenario` with the number at `path` replaced by `value` and the
/// result revalidated.
pub fn set_parameter(scenario: &Scenario, path: &str, value: f64) -> Result<Scenario> {
    let unresolved = |why: String| ModelError::config(path, why);
    let mut root = serde_json::to_value(scenario).map_err(|e| unresolved(e.to_string()))?;
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(unresolved("empty path segment".into()));
    }
    let mut node = &mut root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if !map.contains_key(*seg) {
                    return Err(unresolved(format!("`{seg}` is not a scenario key here")));
                }
                map.get_mut(*seg).expect("checked")
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| unresolved(format!("`{seg}` is not a list index")))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .ok_or_else(|| unresolved(format!("index {idx} out of range (len {len})")))?
            }
            Value::Null => {
                return Err(unresolved(format!(
                    "section `{}` is absent from the scenario; add it to sweep its fields",
                    segments[..i].join(".")
                )))
            }
            _ => return Err(unresolved(format!("`{}` is not a table", segments[..i].join(".")))),
        };
        if last && !matches!(node, Value::Number(_) | Value::Null) {
            return Err(unresolved("path does not name a numeric parameter".into()));
        }
    }
    *node = if value.fract() == 0.0 && value >= 0.0 && value < 9.0e15 && node.is_u64() {
        Value::from(value as u64)
    } else {
        Value::from(value)
    };
    let sc: Scenario = serde_json::from_value(root).map_err(|e| unresolved(e.to_string()))?;
    sc.validate()?;
    Ok(sc)
}

/// Values of the named outputs for one scenario.
pub fn evaluate_outputs(scenario: &Scenario, outputs: &[String]) -> Result<Vec<f64>> {
    let model = scenario.model()?;
    let (x, s) = scenario.point()?;
    let ip = model.intensity;
    let op = crate::families::overt_partials(x, s, &model.safeguards, &model.config.overt);
    let mut adoption = None;
    let mut repair = None;
    let mut out = Vec::with_capacity(outputs.len());
    for name in outputs {
        let v = match name.as_str() {
            "mu0" => ip.mu0,
            "eta" => ip.eta,
            "mu" => model.mu(x, s),
            "pwf" => model.pwf(x, s),
            "search_pwf" => model.search_pwf(x, s)?,
            "F0" => op.f0,
            "F" => model.failure(x, s),
            "margin" => model.mu(x, s) - intensity_cutoff(&scenario.target, model.k()),
            "dF_dx" => model.failure_partials(x, s).dx,
            "dF_ds" => model.failure_partials(x, s).ds,
            "neg_F0_s" => -op.ds,
            "within_cost" => (1.0 - op.f0) * ip.eta * x,
            "h" => codification_margin(x, s, &ip, &model.safeguards, &model.config.overt).h,
            "x_crit" => x_crit(&scenario.target, &ip, s)?,
            "objective" => ScaleProblem::from_scenario(scenario)?.objective_at(scenario.adoption.lambda, x, s)?,
            "x_star" | "s_star" | "u_star" | "zeta" => {
                if adoption.is_none() {
                    adoption = Some(ScaleProblem::from_scenario(scenario)?.optimize(scenario.adoption.lambda)?);
                }
                let a = adoption.as_ref().expect("set above");
                match name.as_str() {
                    "x_star" => a.x_star,
                    "s_star" => a.s_star,
                    "u_star" => a.u_star,
                    _ => a.zeta,
                }
            }
            "s_std_crit" | "g_h" => {
                let st = scenario
                    .repair
                    .ok_or_else(|| ModelError::config("repair", format!("output `{name}` needs a [repair] section")))?
                    .inherited;
                let gap = s_std_crit_and_gap(st.x_h, &ip, &scenario.target, st.s_std_h)?;
                if name == "g_h" {
                    gap.g_h
                } else {
                    gap.s_std_crit
                }
            }
            "repair_u" | "pwf_post" => {
                if repair.is_none() {
                    repair = Some(RepairProblem::from_scenario(scenario)?.optimize()?);
                }
                let r = repair.as_ref().expect("set above");
                if name == "repair_u" {
                    r.u_star
                } else {
                    r.pwf_post
                }
            }
            other => {
                return Err(ModelError::config(
                    "sweep.outputs",
                    format!("unknown output `{other}`; valid names: {}", valid_names()),
                ))
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// A numeric table with a provenance comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Full-precision rendering: 17 significant digits, `nan` for missing.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for line in self.comment.lines() {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Provenance line shared by every emitted table.
pub fn provenance(scenario: &Scenario) -> String {
    format!("scenario={} sha256={}", scenario.name, scenario.content_hash())
}

pub fn run_sweep(scenario: &Scenario, sweep: &SweepSpec) -> Result<CsvTable> {
    sweep.validate()?;
    // Resolve the path once up front so a bad key fails before any work.
    set_parameter(scenario, &sweep.parameter_path, sweep.grid[0])?;
    let rows = sweep
        .grid
        .par_iter()
        .map(|&v| {
            let sc = set_parameter(scenario, &sweep.parameter_path, v)?;
            let mut row = vec![v];
            row.extend(evaluate_outputs(&sc, &sweep.outputs)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let units: Vec<String> = sweep
        .outputs
        .iter()
        .map(|o| format!("{o}={}", unit_of(o).expect("validated")))
        .collect();
    let mut columns = vec![sweep.parameter_path.clone()];
    columns.extend(sweep.outputs.iter().cloned());
    Ok(CsvTable {
        comment: format!("{}\nunits: {}", provenance(scenario), units.join(" ")),
        columns,
        rows,
    })
}
