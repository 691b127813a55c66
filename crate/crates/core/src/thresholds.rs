//! Critical boundaries: the alignment-surface cutoff, critical scale, the
//! codification flip, the modernization-pressure crossing and the
//! post-crisis repair gap.
//!
//! Every boundary reduces to a one-dimensional search along a stated path.
//! Bisections use the deterministic midpoint rule, at most 200 iterations
//! and an argument tolerance of `1e-10` unless noted.

use serde::{Deserialize, Serialize};

use crate::adoption::ScaleProblem;
use crate::error::{ModelError, Result};
use crate::families::{self, feasibility_s, EconConfig, IntensityParams, OvertConfig, Safeguards, VariantConfig};
use crate::model::{codification_margin, poisson_intensity, pwf, pwf_k, Architecture};
use crate::solve::{bisect, bisect_first_nonneg, linspace, RootResult, DEFAULT_MAX_ITER};

/// The concern level `p̄ ∈ (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdTarget {
    pub p_bar: f64,
}

impl Default for ThresholdTarget {
    fn default() -> Self {
        ThresholdTarget { p_bar: 0.6 }
    }
}

impl ThresholdTarget {
    pub fn new(p_bar: f64) -> Result<Self> {
        let t = ThresholdTarget { p_bar };
        t.validate("target")?;
        Ok(t)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        families::require(
            self.p_bar.is_finite() && self.p_bar > 0.0 && self.p_bar < 1.0,
            families::key(prefix, "p_bar"),
            format!("p_bar must lie in (0,1) (got {})", self.p_bar),
        )
    }
}

/// Result of a boundary search that may legitimately find nothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Crossing {
    At(RootResult),
    None { reason: String },
}

impl Crossing {
    pub fn value(&self) -> Option<f64> {
        match self {
            Crossing::At(r) => Some(r.value),
            Crossing::None { .. } => None,
        }
    }

    fn none(reason: impl Into<String>) -> Self {
        Crossing::None { reason: reason.into() }
    }
}

/// Smallest intensity at which at least `k` arrivals occur with
/// probability `p̄`. Closed form `-ln(1-p̄)` for `k = 1`.
pub fn intensity_cutoff(target: &ThresholdTarget, k: u32) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let p = target.p_bar;
    if k == 1 {
        return -(-p).ln_1p();
    }
    let mut hi = k as f64;
    while pwf_k(hi, k) < p {
        hi *= 2.0;
    }
    bisect_first_nonneg(|mu| pwf_k(mu, k) - p, 0.0, hi, 1e-14, 400)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceCheck {
    pub exploitable: bool,
    /// `μ - τ(p̄)`; the boundary `margin = 0` counts as not exploitable.
    pub margin: f64,
}

pub fn surface_check(
    a: &Architecture,
    ip: &IntensityParams,
    variant: &VariantConfig,
    target: &ThresholdTarget,
) -> SurfaceCheck {
    let margin = poisson_intensity(a, ip, variant) - intensity_cutoff(target, variant.k);
    SurfaceCheck { exploitable: margin > 0.0, margin }
}

/// Critical scale at fixed codification: `max{0, (τ - μ0)/(η s)}`.
pub fn x_crit(target: &ThresholdTarget, ip: &IntensityParams, s: f64) -> Result<f64> {
    let slope = ip.eta * s;
    if !(slope > 0.0) {
        return Err(ModelError::NoCrossing(
            "eta*s = 0: the within-form term cannot grow with scale".into(),
        ));
    }
    Ok(((intensity_cutoff(target, 1) - ip.mu0) / slope).max(0.0))
}

/// Infimum of scales at which within-form success along the binding path
/// `s = S(x)` reaches `p̄`.
pub fn x_crit_binding(
    target: &ThresholdTarget,
    ip: &IntensityParams,
    econ: &EconConfig,
    variant: &VariantConfig,
) -> Result<Crossing> {
    let tau = intensity_cutoff(target, variant.k);
    let gap = |x: f64| -> f64 {
        let s = feasibility_s(x, econ).expect("x within [0, x_bar]");
        poisson_intensity(&Architecture::new(x, s), ip, variant) - tau
    };
    let grid = linspace(0.0, econ.x_bar, 257);
    let Some(first) = grid.iter().position(|&x| gap(x) >= 0.0) else {
        return Ok(Crossing::none(format!(
            "p_wf(x_bar, 1) < p_bar = {}",
            target.p_bar
        )));
    };
    let pwf_at = |x: f64| pwf_k(gap(x) + tau, variant.k);
    if first == 0 {
        return Ok(Crossing::At(RootResult {
            value: 0.0,
            residual: pwf_at(0.0) - target.p_bar,
            iterations: 0,
            bracket: (0.0, 0.0),
        }));
    }
    let (lo, hi) = (grid[first - 1], grid[first]);
    let x = bisect_first_nonneg(gap, lo, hi, 1e-14, DEFAULT_MAX_ITER);
    Ok(Crossing::At(RootResult {
        value: x,
        residual: pwf_at(x) - target.p_bar,
        iterations: 0,
        bracket: (lo, hi),
    }))
}

/// Closed-form codification flip for the exponential overt family,
/// `s_flip = ln((ηx + b) F̄ / (ηx)) / b`, returned only when it lies in
/// `(0, 1)` and `h` changes sign there.
pub fn s_flip(
    x: f64,
    ip: &IntensityParams,
    safeguards: &Safeguards,
    overt: &OvertConfig,
) -> Option<f64> {
    let within = ip.eta * x;
    let baseline = overt.baseline(x, safeguards);
    if !(x > 0.0 && within > 0.0 && overt.b > 0.0 && baseline > 0.0) {
        return None;
    }
    let h = |s: f64| codification_margin(x, s, ip, safeguards, overt).h;
    if !(h(0.0) < 0.0 && h(1.0) > 0.0) {
        return None;
    }
    let s = ((within + overt.b) * baseline / within).ln() / overt.b;
    (s > 0.0 && s < 1.0).then_some(s)
}

/// Generic flip point by bisection on `h` over `[0, 1]`.
pub fn s_flip_bisection(
    x: f64,
    ip: &IntensityParams,
    safeguards: &Safeguards,
    overt: &OvertConfig,
) -> Option<RootResult> {
    if x <= 0.0 {
        return None;
    }
    let h = |s: f64| codification_margin(x, s, ip, safeguards, overt).h;
    if !(h(0.0) < 0.0 && h(1.0) > 0.0) {
        return None;
    }
    bisect(h, 0.0, 1.0, 1e-13, DEFAULT_MAX_ITER).ok()
}

/// Points of the `λ` monotonicity pre-check.
pub const ZETA_GRID_POINTS: usize = 64;

/// Modernization pressure at which binding-path within-form success first
/// reaches `p̄`. Existence is guaranteed on a bracket where `ζ` crosses, not
/// uniqueness; any crossing satisfies the cutoff property, and the solver
/// returns the first one.
pub fn lambda_crit(problem: &ScaleProblem, target: &ThresholdTarget, lambda_lo: f64, lambda_hi: f64) -> Result<Crossing> {
    if !(lambda_lo < lambda_hi) {
        return Err(ModelError::config(
            "figures.lambda_lo",
            format!("lambda bracket [{lambda_lo}, {lambda_hi}] is empty"),
        ));
    }
    let zeta = |lambda: f64| -> Result<f64> { Ok(problem.optimize(lambda)?.zeta) };
    let grid = linspace(lambda_lo, lambda_hi, ZETA_GRID_POINTS);
    let mut values = Vec::with_capacity(grid.len());
    for &l in &grid {
        values.push(zeta(l)?);
    }
    for i in 1..grid.len() {
        if values[i] < values[i - 1] - 1e-9 {
            return Err(ModelError::AssumptionViolation(format!(
                "zeta decreases between lambda={} (zeta={}) and lambda={} (zeta={})",
                grid[i - 1], values[i - 1], grid[i], values[i]
            )));
        }
    }
    let p = target.p_bar;
    if values[0] >= p {
        return Ok(Crossing::none(format!("zeta(lambda_lo)={} already at or above p_bar={p}", values[0])));
    }
    let Some(first) = values.iter().position(|&z| z >= p) else {
        return Ok(Crossing::none(format!(
            "zeta(lambda_hi)={} stays below p_bar={p}",
            values[values.len() - 1]
        )));
    };
    let (lo, hi) = (grid[first - 1], grid[first]);
    let mut err = None;
    let lambda = bisect_first_nonneg(
        |l| match zeta(l) {
            Ok(z) => z - p,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-12,
        DEFAULT_MAX_ITER,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Crossing::At(RootResult {
        value: lambda,
        residual: zeta(lambda)? - p,
        iterations: 0,
        bracket: (lo, hi),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardizationGap {
    /// Largest insider-facing standardization keeping `p_wf ≤ p̄`.
    pub s_std_crit: f64,
    /// Unwinding needed to return below the threshold.
    pub g_h: f64,
    /// Baseline intensity alone is at or above the cutoff.
    pub saturated: bool,
}

pub fn s_std_crit_and_gap(
    x: f64,
    ip: &IntensityParams,
    target: &ThresholdTarget,
    s_std_h: f64,
) -> Result<StandardizationGap> {
    if !(x > 0.0 && ip.eta > 0.0) {
        return Err(ModelError::Domain {
            name: "eta*x",
            value: ip.eta * x,
            domain: "(0, inf)",
        });
    }
    let tau = intensity_cutoff(target, 1);
    let s_std_crit = ((tau - ip.mu0) / (ip.eta * x)).clamp(0.0, 1.0);
    Ok(StandardizationGap {
        s_std_crit,
        g_h: (s_std_h - s_std_crit).max(0.0),
        saturated: ip.mu0 >= tau,
    })
}

/// `pwf(μ) > p̄` stated directly, for cross-checking [`surface_check`].
pub fn exceeds_target(mu: f64, target: &ThresholdTarget) -> bool {
    pwf(mu) > target.p_bar
}
