//! Post-crisis unwinding: a democratic government inherits scale,
//! auditability and insider-facing standardization from a high-pressure
//! episode and can only pay to lower standardization by `u`.
//!
//! ```text
//! W(u) = B(x_H, s_aud,H, s_std,H - u; λ_L) - K(u; x_H) - δΩ F(x_H, s_std,H - u, s_aud,H, r)
//! K(u; x) = ½ κ (1 + φ x) u²
//! ```
//!
//! Installed scale and auditability are sunk.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::families::{self, overt_vulnerability, IntensityParams};
use crate::model::{pwf, split_failure, split_partials, Model, SplitArchitecture};
use crate::scenario::Scenario;
use crate::solve::{linspace, Tolerances};
use crate::thresholds::{s_std_crit_and_gap, ThresholdTarget};

/// Grid resolution of the supremum in the cost-dominance hypothesis.
pub const SUP_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InheritedState {
    pub x_h: f64,
    pub s_aud_h: f64,
    pub s_std_h: f64,
}

impl Default for InheritedState {
    fn default() -> Self {
        InheritedState { x_h: 1.0, s_aud_h: 0.5, s_std_h: 0.9 }
    }
}

impl InheritedState {
    pub fn validate(&self, prefix: &str, x_bar: f64) -> Result<()> {
        families::require(
            self.x_h.is_finite() && self.x_h >= 0.0 && self.x_h <= x_bar,
            families::key(prefix, "x_h"),
            format!("x_h must lie in [0, x_bar={x_bar}] (got {})", self.x_h),
        )?;
        for (name, v) in [("s_aud_h", self.s_aud_h), ("s_std_h", self.s_std_h)] {
            families::require(
                v.is_finite() && (0.0..=1.0).contains(&v),
                families::key(prefix, name),
                format!("{name} must lie in [0,1] (got {v})"),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepairConfig {
    pub kappa_cost: f64,
    pub phi_cost: f64,
    /// Pressure after the crisis subsides.
    pub lambda_l: f64,
    /// Marginal ordinary value of insider-facing standardization.
    pub b_sstd_weight: f64,
    pub inherited: InheritedState,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            kappa_cost: 5.0,
            phi_cost: 1.0,
            lambda_l: 0.5,
            b_sstd_weight: 0.0,
            inherited: InheritedState::default(),
        }
    }
}

impl RepairConfig {
    pub fn validate(&self, prefix: &str, x_bar: f64) -> Result<()> {
        families::require_finite_pos(prefix, "kappa_cost", self.kappa_cost)?;
        families::require_finite_pos(prefix, "phi_cost", self.phi_cost)?;
        families::require_finite_pos(prefix, "lambda_l", self.lambda_l)?;
        families::require_finite_nonneg(prefix, "b_sstd_weight", self.b_sstd_weight)?;
        self.inherited.validate(&families::key(prefix, "inherited"), x_bar)
    }

    pub fn cost(&self, u: f64, x: f64) -> f64 {
        0.5 * self.kappa_cost * (1.0 + self.phi_cost * x) * u * u
    }

    /// `K_u(u; x)`.
    pub fn marginal_cost(&self, u: f64, x: f64) -> f64 {
        self.kappa_cost * (1.0 + self.phi_cost * x) * u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairConclusion {
    IncompleteUnwinding,
    FullUnwinding,
    NoRepair,
    SaturatedBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisFlags {
    /// `Δ(0) > K_u(0)`.
    pub positive_marginal_at_zero: bool,
    /// `K_u(g_H) > sup Δ` over the below-threshold range.
    pub cost_dominates_below_threshold: bool,
    /// `g_H > 0`.
    pub above_threshold_inherited: bool,
}

impl HypothesisFlags {
    pub fn all(&self) -> bool {
        self.positive_marginal_at_zero && self.cost_dominates_below_threshold && self.above_threshold_inherited
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairReport {
    pub u_star: f64,
    pub w_star: f64,
    pub s_std_post: f64,
    pub s_std_crit: f64,
    pub g_h: f64,
    pub pwf_post: f64,
    pub marginal_at_zero: f64,
    pub marginal_cost_at_gap: f64,
    pub sup_marginal_below_threshold: f64,
    pub hypothesis_flags: HypothesisFlags,
    pub conclusion: RepairConclusion,
}

/// The repair problem at a fixed inherited state.
#[derive(Debug, Clone)]
pub struct RepairProblem {
    pub model: Model,
    pub config: RepairConfig,
    pub loss_weight: f64,
    pub target: ThresholdTarget,
    pub tolerances: Tolerances,
}

impl RepairProblem {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let config = scenario
            .repair
            .ok_or_else(|| ModelError::config("repair", "scenario has no [repair] section"))?;
        Ok(RepairProblem {
            model: scenario.model()?,
            config,
            loss_weight: scenario.adoption.expected_loss_weight(),
            target: scenario.target,
            tolerances: scenario.tolerances,
        })
    }

    fn state(&self) -> &InheritedState {
        &self.config.inherited
    }

    fn ip(&self) -> &IntensityParams {
        &self.model.intensity
    }

    fn split_at(&self, s_std: f64) -> SplitArchitecture {
        let st = self.state();
        SplitArchitecture { x: st.x_h, s_std, s_aud: st.s_aud_h }
    }

    fn check_u(&self, u: f64) -> Result<()> {
        if u.is_finite() && u >= 0.0 && u <= self.state().s_std_h {
            Ok(())
        } else {
            Err(ModelError::Domain { name: "u", value: u, domain: "[0, s_std_h]" })
        }
    }

    /// Ordinary value net of operating cost at the post-repair state.
    pub fn ordinary_value(&self, s_std: f64) -> f64 {
        let st = self.state();
        let econ = self.model.econ();
        self.config.lambda_l * econ.value(st.x_h, st.s_aud_h) - econ.cost(st.x_h, st.s_aud_h)
            + self.config.b_sstd_weight * s_std
    }

    pub fn failure(&self, s_std: f64) -> f64 {
        split_failure(&self.split_at(s_std), self.ip(), &self.model.safeguards, &self.model.config.overt)
    }

    pub fn objective(&self, u: f64) -> Result<f64> {
        self.check_u(u)?;
        let s_std = self.state().s_std_h - u;
        Ok(self.ordinary_value(s_std) - self.config.cost(u, self.state().x_h) - self.loss_weight * self.failure(s_std))
    }

    /// `Δ` at insider-facing standardization `s_std`.
    pub fn marginal_benefit_at(&self, s_std: f64) -> f64 {
        let d = split_partials(&self.split_at(s_std), self.ip(), &self.model.safeguards, &self.model.config.overt);
        self.loss_weight * d.d_sstd - self.config.b_sstd_weight
    }

    pub fn marginal_benefit(&self, u: f64) -> Result<f64> {
        self.check_u(u)?;
        Ok(self.marginal_benefit_at(self.state().s_std_h - u))
    }

    pub fn optimize(&self) -> Result<RepairReport> {
        let st = *self.state();
        let gap = s_std_crit_and_gap(st.x_h, self.ip(), &self.target, st.s_std_h)?;
        let upper = st.s_std_h;
        let f = |u: f64| self.objective(u.clamp(0.0, upper)).unwrap_or(f64::NEG_INFINITY);
        let d = |u: f64| self.marginal_benefit_at(upper - u) - self.config.marginal_cost(u, st.x_h);
        let res = self.tolerances.maximizer().run(f, Some(d), 0.0, upper);
        let u_star = res.argmax;

        let marginal_at_zero = self.marginal_benefit_at(upper);
        let marginal_cost_at_gap = self.config.marginal_cost(gap.g_h, st.x_h);
        let sup_marginal_below_threshold = linspace(0.0, gap.s_std_crit, SUP_GRID_POINTS)
            .into_iter()
            .map(|s| self.marginal_benefit_at(s))
            .fold(f64::NEG_INFINITY, f64::max);
        let flags = HypothesisFlags {
            positive_marginal_at_zero: marginal_at_zero > self.config.marginal_cost(0.0, st.x_h),
            cost_dominates_below_threshold: marginal_cost_at_gap > sup_marginal_below_threshold,
            above_threshold_inherited: gap.g_h > 0.0,
        };

        let s_std_post = upper - u_star;
        let pwf_post = pwf(self.ip().mu0 + self.ip().eta * st.x_h * s_std_post);
        let conclusion = if gap.saturated {
            RepairConclusion::SaturatedBaseline
        } else if u_star <= 0.0 {
            RepairConclusion::NoRepair
        } else if u_star < gap.g_h && pwf_post > self.target.p_bar {
            RepairConclusion::IncompleteUnwinding
        } else {
            RepairConclusion::FullUnwinding
        };
        Ok(RepairReport {
            u_star,
            w_star: res.max,
            s_std_post,
            s_std_crit: gap.s_std_crit,
            g_h: gap.g_h,
            pwf_post,
            marginal_at_zero,
            marginal_cost_at_gap,
            sup_marginal_below_threshold,
            hypothesis_flags: flags,
            conclusion,
        })
    }

    /// Overt-channel probability at the inherited auditability.
    pub fn inherited_f0(&self) -> f64 {
        let st = self.state();
        overt_vulnerability(st.x_h, st.s_aud_h, &self.model.safeguards, &self.model.config.overt)
    }
}

pub fn repair_objective(u: f64, scenario: &Scenario) -> Result<f64> {
    RepairProblem::from_scenario(scenario)?.objective(u)
}

pub fn marginal_benefit(u: f64, scenario: &Scenario) -> Result<f64> {
    RepairProblem::from_scenario(scenario)?.marginal_benefit(u)
}

pub fn optimize_repair(scenario: &Scenario) -> Result<RepairReport> {
    RepairProblem::from_scenario(scenario)?.optimize()
}
