//! Adoption-stage choice of scale along the binding codification path,
//! the binding-codification check, and the scalar-safeguard joint-choice
//! illustration.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::families::{self, feasibility_s};
use crate::model::Model;
use crate::scenario::Scenario;
use crate::solve::{bisect, linspace, Tolerances, DEFAULT_MAX_ITER};
use crate::thresholds::ThresholdTarget;

/// Slack allowed when testing `s >= S(x)`.
const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdoptionParams {
    /// Modernization pressure.
    pub lambda: f64,
    /// Probability of autocratic turnover.
    pub delta: f64,
    /// Loss from democratic failure.
    pub omega: f64,
}

impl Default for AdoptionParams {
    fn default() -> Self {
        AdoptionParams {
            lambda: 1.0,
            delta: 0.2,
            omega: 1.0,
        }
    }
}

impl AdoptionParams {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        families::require_finite_pos(prefix, "lambda", self.lambda)?;
        families::require(
            self.delta.is_finite() && self.delta > 0.0 && self.delta < 1.0,
            families::key(prefix, "delta"),
            format!("delta must lie in (0,1) (got {})", self.delta),
        )?;
        families::require_finite_nonneg(prefix, "omega", self.omega)
    }

    /// Weight `δΩ` on failure in the objective.
    pub fn expected_loss_weight(&self) -> f64 {
        self.delta * self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleDiagnostics {
    /// Set when the maximizer sits at `0` or `x_bar`.
    pub boundary: Option<Boundary>,
    pub unimodal: bool,
    pub local_maxima: usize,
    /// Every second difference of the binding-path objective on the scan
    /// grid is negative.
    pub concave: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleOptimum {
    pub lambda: f64,
    pub x_star: f64,
    pub s_star: f64,
    pub u_star: f64,
    /// Within-form success at the adopted point.
    pub zeta: f64,
    pub diagnostics: ScaleDiagnostics,
}

/// The adoption problem for a fixed model, with pressure left free.
#[derive(Debug, Clone)]
pub struct ScaleProblem {
    pub model: Model,
    pub params: AdoptionParams,
    pub tolerances: Tolerances,
}

impl ScaleProblem {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        Ok(ScaleProblem {
            model: scenario.model()?,
            params: scenario.adoption,
            tolerances: scenario.tolerances,
        })
    }

    /// `λG - C - δΩF` at `(x, s)` under pressure `lambda`.
    pub fn objective_at(&self, lambda: f64, x: f64, s: f64) -> Result<f64> {
        let econ = self.model.econ();
        let required = feasibility_s(x, econ)?;
        if s < required - FEASIBILITY_SLACK {
            return Err(ModelError::Infeasible {
                s,
                required,
                shortfall: required - s,
            });
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(ModelError::Domain { name: "s", value: s, domain: "[0, 1]" });
        }
        Ok(lambda * econ.value(x, s) - econ.cost(x, s)
            - self.params.expected_loss_weight() * self.model.failure(x, s))
    }

    pub fn binding_objective(&self, lambda: f64, x: f64) -> Result<f64> {
        let s = feasibility_s(x, self.model.econ())?;
        self.objective_at(lambda, x, s)
    }

    /// Total derivative of the binding-path objective in `x`.
    pub fn binding_slope(&self, lambda: f64, x: f64) -> Result<f64> {
        let econ = self.model.econ();
        let s = feasibility_s(x, econ)?;
        let slope = econ.feasibility_slope(x)?;
        let (g_x, g_s, c_x, c_s) = econ.partials(x, s);
        let along = |dx: f64, ds: f64| dx + if slope == 0.0 { 0.0 } else { ds * slope };
        Ok(lambda * along(g_x, g_s) - along(c_x, c_s)
            - self.params.expected_loss_weight() * self.model.binding_failure_slope(x)?)
    }

    /// Maximizer of the objective along `s = S(x)`.
    pub fn optimize(&self, lambda: f64) -> Result<ScaleOptimum> {
        let x_bar = self.model.econ().x_bar;
        let f = |x: f64| self.binding_objective(lambda, x).unwrap_or(f64::NEG_INFINITY);
        let d = |x: f64| self.binding_slope(lambda, x).unwrap_or(f64::NAN);
        let res = self.tolerances.maximizer().run(f, Some(d), 0.0, x_bar);

        let grid = linspace(0.0, x_bar, self.tolerances.optimizer_grid.max(3));
        let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        let concave = values
            .windows(3)
            .all(|w| w[2] - 2.0 * w[1] + w[0] < 0.0);

        let x_star = res.argmax;
        let boundary = if x_star <= 0.0 {
            Some(Boundary::Lower)
        } else if x_star >= x_bar {
            Some(Boundary::Upper)
        } else {
            None
        };
        let s_star = feasibility_s(x_star, self.model.econ())?;
        Ok(ScaleOptimum {
            lambda,
            x_star,
            s_star,
            u_star: res.max,
            zeta: self.model.pwf(x_star, s_star),
            diagnostics: ScaleDiagnostics {
                boundary,
                unimodal: res.scan.local_maxima == 1,
                local_maxima: res.scan.local_maxima,
                concave,
            },
        })
    }
}

pub fn adoption_objective(x: f64, s: f64, scenario: &Scenario) -> Result<f64> {
    let p = ScaleProblem::from_scenario(scenario)?;
    p.objective_at(p.params.lambda, x, s)
}

pub fn optimize_scale(scenario: &Scenario) -> Result<ScaleOptimum> {
    let p = ScaleProblem::from_scenario(scenario)?;
    p.optimize(p.params.lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingCondition {
    /// `λG_s - C_s ≤ 0`
    NonpositiveNetValue,
    /// `F_s ≥ 0`
    RiskIncreasingCodification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BindingViolation {
    pub s: f64,
    pub condition: BindingCondition,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingCheck {
    pub binds: bool,
    pub violations: Vec<BindingViolation>,
}

pub const BINDING_GRID_POINTS: usize = 101;

/// Checks on `[S(x), 1]` the two conditions under which the objective is
/// nonincreasing in `s`, so codification binds at `S(x)`.
pub fn binding_check(x: f64, scenario: &Scenario) -> Result<BindingCheck> {
    let p = ScaleProblem::from_scenario(scenario)?;
    binding_check_for(&p, p.params.lambda, x)
}

pub fn binding_check_for(p: &ScaleProblem, lambda: f64, x: f64) -> Result<BindingCheck> {
    let econ = p.model.econ();
    let s_min = feasibility_s(x, econ)?;
    let mut violations = Vec::new();
    for s in linspace(s_min, 1.0, BINDING_GRID_POINTS) {
        let (_, g_s, _, c_s) = econ.partials(x, s);
        let net = lambda * g_s - c_s;
        if net > 1e-12 {
            violations.push(BindingViolation { s, condition: BindingCondition::NonpositiveNetValue, value: net });
        }
        let f_s = p.model.failure_partials(x, s).ds;
        if f_s < -1e-12 {
            violations.push(BindingViolation {
                s,
                condition: BindingCondition::RiskIncreasingCodification,
                value: f_s,
            });
        }
    }
    Ok(BindingCheck { binds: violations.is_empty(), violations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub x_star: f64,
    pub s_star: f64,
    pub zeta: f64,
    pub exploitable: bool,
    pub concave: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Every row's objective passed the concavity pre-check.
    pub concave: bool,
    pub x_star_monotone: bool,
    pub zeta_monotone: bool,
}

/// `x*(λ)` and `ζ(λ)` over an ascending grid of pressures.
pub fn scale_monotonicity_scan(scenario: &Scenario, lambda_grid: &[f64]) -> Result<ScanReport> {
    let p = ScaleProblem::from_scenario(scenario)?;
    scan_with(&p, &scenario.target, lambda_grid)
}

pub fn scan_with(p: &ScaleProblem, target: &ThresholdTarget, lambda_grid: &[f64]) -> Result<ScanReport> {
    if lambda_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ModelError::config("lambda_grid", "lambda grid must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let opt = p.optimize(lambda)?;
        rows.push(ScanRow {
            lambda,
            x_star: opt.x_star,
            s_star: opt.s_star,
            zeta: opt.zeta,
            exploitable: opt.zeta > target.p_bar,
            concave: opt.diagnostics.concave,
        });
    }
    let weakly = |f: fn(&ScanRow) -> f64| rows.windows(2).all(|w| f(&w[1]) >= f(&w[0]) - 1e-9);
    Ok(ScanReport {
        concave: rows.iter().all(|r| r.concave),
        x_star_monotone: weakly(|r| r.x_star),
        zeta_monotone: weakly(|r| r.zeta),
        rows,
    })
}

/// Scalar-safeguard joint-choice illustration with codification fixed at one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IllustrationConfig {
    /// Capacity friction of safeguarding a larger system.
    pub chi: f64,
    pub alpha_loss: f64,
    pub gamma_loss: f64,
    pub eta_bar: f64,
    pub rho_decay: f64,
    /// Curvature of the safeguard cost `B(r) = ½ k r²`.
    pub k_cost: f64,
}

impl Default for IllustrationConfig {
    fn default() -> Self {
        IllustrationConfig {
            chi: 0.1,
            alpha_loss: 0.5,
            gamma_loss: 1.0,
            eta_bar: 1.0,
            rho_decay: 1.0,
            k_cost: 1.0,
        }
    }
}

impl IllustrationConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        families::require_finite_nonneg(prefix, "chi", self.chi)?;
        families::require_finite_pos(prefix, "alpha_loss", self.alpha_loss)?;
        families::require_finite_pos(prefix, "gamma_loss", self.gamma_loss)?;
        families::require_finite_pos(prefix, "eta_bar", self.eta_bar)?;
        families::require_finite_pos(prefix, "rho_decay", self.rho_decay)?;
        families::require_finite_pos(prefix, "k_cost", self.k_cost)
    }

    pub fn eta(&self, r: f64) -> f64 {
        self.eta_bar * (-self.rho_decay * r).exp()
    }

    /// The joint objective `U(x, r)`, evaluated literally. Its failure index
    /// `αx - γr + η(r)x` is a local approximation and may go negative.
    pub fn objective(&self, x: f64, r: f64, lambda: f64, delta: f64) -> f64 {
        lambda * x - 0.5 * x * x - self.chi * r * x
            - delta * (self.alpha_loss * x - self.gamma_loss * r + self.eta(r) * x)
            - 0.5 * self.k_cost * r * r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorScale {
    pub x: f64,
    /// The unconstrained candidate was negative and has been set to zero.
    pub clipped: bool,
}

/// `x^u(r) = λ - χr - δα - δη(r)`, clipped at zero.
pub fn illustration_interior_scale(r: f64, cfg: &IllustrationConfig, lambda: f64, delta: f64) -> InteriorScale {
    let x = lambda - cfg.chi * r - delta * cfg.alpha_loss - delta * cfg.eta(r);
    if x < 0.0 {
        InteriorScale { x: 0.0, clipped: true }
    } else {
        InteriorScale { x, clipped: false }
    }
}

/// Marginal cost minus marginal benefit of safeguards:
/// `B'(r) + χx - δγ - δx(-η'(r))`.
pub fn illustration_safeguard_foc(r: f64, x: f64, cfg: &IllustrationConfig, delta: f64) -> f64 {
    let benefit = delta * cfg.gamma_loss + delta * x * cfg.rho_decay * cfg.eta(r);
    cfg.k_cost * r + cfg.chi * x - benefit
}

/// Root of [`illustration_safeguard_foc`] in `r ≥ 0`, or `0` when the
/// marginal cost already exceeds the benefit at `r = 0`.
pub fn illustration_safeguard_optimum(x: f64, cfg: &IllustrationConfig, delta: f64) -> Result<f64> {
    let foc = |r: f64| illustration_safeguard_foc(r, x, cfg, delta);
    if foc(0.0) >= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while foc(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(ModelError::NoCrossing("safeguard first-order condition never turns positive".into()));
        }
    }
    Ok(bisect(foc, 0.0, hi, 1e-13, DEFAULT_MAX_ITER)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{EconConfig, IntensityParams, OvertConfig};
    use approx::assert_relative_eq;

    /// `G = x`, `C = ½x²`, `S(x) = x`, `μ0 = 0`, `η = 2`, `F0 ≡ 0`.
    pub(crate) fn simple_scenario(lambda: f64, delta: f64, omega: f64) -> Scenario {
        let mut sc = Scenario::default();
        sc.families.econ = EconConfig { g_x: 1.0, g_s: 0.0, c_x: 1.0, c_s: 0.0, x_bar: 1.0, gamma_s: 1.0 };
        sc.families.overt = OvertConfig { f0: 0.0, ..OvertConfig::default() };
        sc.intensity = Some(IntensityParams { mu0: 0.0, eta: 2.0 });
        sc.adoption = AdoptionParams { lambda, delta, omega };
        sc
    }

    #[test]
    fn objective_examples() {
        let sc = simple_scenario(1.0, 0.2, 0.0);
        assert_relative_eq!(adoption_objective(0.5, 0.5, &sc).unwrap(), 0.375, epsilon = 1e-15);
        let sc = simple_scenario(0.8, 0.5, 2.0);
        assert_relative_eq!(adoption_objective(0.5, 0.5, &sc).unwrap(), -0.118_469_340_287_366_55, epsilon = 1e-15);

        let sc = Scenario::default();
        let m = sc.model().unwrap();
        let expected = -sc.adoption.expected_loss_weight()
            * (1.0 - (1.0 - m.f0(0.0, 0.0)) * (-m.intensity.mu0).exp());
        assert_relative_eq!(adoption_objective(0.0, 0.0, &sc).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn infeasible_carries_shortfall() {
        let sc = simple_scenario(1.0, 0.2, 1.0);
        match adoption_objective(0.6, 0.4, &sc) {
            Err(ModelError::Infeasible { shortfall, .. }) => assert_relative_eq!(shortfall, 0.2, epsilon = 1e-15),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_optimum_is_pressure() {
        for (lambda, expect) in [(0.5, 0.5), (0.3, 0.3), (2.0, 1.0)] {
            let sc = simple_scenario(lambda, 0.2, 0.0);
            let opt = optimize_scale(&sc).unwrap();
            assert!((opt.x_star - expect).abs() < 1e-8, "lambda {lambda}: {}", opt.x_star);
        }
        let opt = optimize_scale(&simple_scenario(2.0, 0.2, 0.0)).unwrap();
        assert_eq!(opt.diagnostics.boundary, Some(Boundary::Upper));
    }

    #[test]
    fn optimizer_matches_dense_grid() {
        let sc = simple_scenario(0.8, 0.5, 2.0);
        let opt = optimize_scale(&sc).unwrap();
        let p = ScaleProblem::from_scenario(&sc).unwrap();
        let n = 1_000_000;
        let (mut bx, mut bv) = (0.0, f64::NEG_INFINITY);
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let v = p.binding_objective(0.8, x).unwrap();
            if v > bv {
                bv = v;
                bx = x;
            }
        }
        assert!((opt.x_star - bx).abs() <= 1e-6, "{} vs {}", opt.x_star, bx);
        assert!(opt.u_star >= bv - 1e-10);
    }

    #[test]
    fn binding_check_examples() {
        let mut sc = simple_scenario(1.0, 0.2, 1.0);
        sc.families.econ.c_s = 1.0;
        sc.families.overt = OvertConfig { f0: 0.4, b: 0.0, ..OvertConfig::default() };
        assert!(binding_check(0.4, &sc).unwrap().binds);

        sc.families.econ.g_s = 5.0;
        sc.families.econ.c_s = 0.0;
        let c = binding_check(0.4, &sc).unwrap();
        assert!(!c.binds);
        assert!(c.violations.iter().any(|v| v.condition == BindingCondition::NonpositiveNetValue));

        let mut sc = simple_scenario(1.0, 0.2, 1.0);
        sc.families.econ.c_s = 1.0;
        sc.families.overt = OvertConfig { f0: 0.8, b: 2.0, c_m: 0.0, c_k: 0.0, c_q: 0.0, a_x: 0.0 };
        sc.intensity = Some(IntensityParams { mu0: 0.0, eta: 2.5 });
        // ηx = 1 at x = 0.4, so h < 0 below the flip at s ≈ 0.4377.
        let c = binding_check(0.4, &sc).unwrap();
        assert!(!c.binds);
        assert!(c
            .violations
            .iter()
            .all(|v| v.condition == BindingCondition::RiskIncreasingCodification && v.s < 0.4378));
    }

    #[test]
    fn scan_degenerate_is_clipped_identity() {
        let sc = simple_scenario(1.0, 0.2, 0.0);
        let grid = linspace(0.1, 1.5, 15);
        let rep = scale_monotonicity_scan(&sc, &grid).unwrap();
        for row in &rep.rows {
            assert!((row.x_star - row.lambda.min(1.0)).abs() < 1e-8);
            let m = sc.model().unwrap();
            assert_eq!(row.zeta, m.pwf(row.x_star, row.s_star));
        }
        assert!(rep.x_star_monotone && rep.zeta_monotone);
        assert!(scale_monotonicity_scan(&sc, &[0.5, 0.4]).is_err());
    }

    #[test]
    fn illustration_examples() {
        let cfg = IllustrationConfig { chi: 0.1, alpha_loss: 0.5, gamma_loss: 1.0, eta_bar: 1.0, rho_decay: 1.0, k_cost: 1.0 };
        let xu = illustration_interior_scale(1.0, &cfg, 1.0, 0.2);
        assert_relative_eq!(xu.x, 0.726_424_111_765_711_6, epsilon = 1e-15);
        let free = IllustrationConfig { chi: 0.0, ..cfg };
        assert_relative_eq!(illustration_interior_scale(0.0, &free, 1.0, 0.2).x, 1.0 - 0.1 - 0.2, epsilon = 1e-15);
        assert!(illustration_interior_scale(0.0, &cfg, 0.1, 0.2).clipped);

        let h = 1e-6;
        let fd = (illustration_interior_scale(1.0, &cfg, 1.0 + h, 0.2).x
            - illustration_interior_scale(1.0, &cfg, 1.0 - h, 0.2).x)
            / (2.0 * h);
        assert_relative_eq!(fd, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn safeguard_foc_examples() {
        let cfg = IllustrationConfig { chi: 0.0, alpha_loss: 0.5, gamma_loss: 1.0, eta_bar: 1.0, rho_decay: 1.0, k_cost: 1.0 };
        assert_relative_eq!(illustration_safeguard_foc(0.7, 0.0, &cfg, 0.2), 0.7 - 0.2, epsilon = 1e-15);
        assert_relative_eq!(illustration_safeguard_optimum(0.0, &cfg, 0.2).unwrap(), 0.2, epsilon = 1e-12);
        let r = illustration_safeguard_optimum(1.0, &cfg, 0.2).unwrap();
        assert_relative_eq!(r, 0.342_060_978_073_021_2, epsilon = 1e-12);
        // Marginal benefit falls in r.
        let benefit = |r: f64| 0.2 * 1.0 + 0.2 * 1.0 * cfg.rho_decay * cfg.eta(r);
        assert!(benefit(0.5) < benefit(0.1));
        // The literal objective peaks at the interior FOC root in r.
        let u = |r: f64| cfg.objective(1.0, r, 1.0, 0.2);
        assert!(u(r) > u(r - 1e-3) && u(r) > u(r + 1e-3));
    }
}
