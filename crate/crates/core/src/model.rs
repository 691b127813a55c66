//! Closed-form probability engine.
//!
//! Within-form success is the probability that at least `k` effective moves
//! arrive in the consolidation window. In the search form the count comes from
//! `N(x)` interfaces probed `M` times each, every probe succeeding and
//! persisting with probability `ρψ`; in the Poisson benchmark it is a single
//! intensity `μ = μ0 + η x s`. Overt abuse succeeds independently with
//! probability `F0`, so total failure is `1 - (1 - F0)(1 - p_wf)`.
//!
//! The free functions below are the benchmark formulas with the exact
//! signatures used in the proofs. [`Model`] bundles a configuration and a
//! safeguard level and evaluates the configured variant (intensity form,
//! `k`, aggregator) together with its partial derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::families::{
    self, ambiguity_weight, derive_intensity, feasibility_s, nonlinear_index,
    nonlinear_index_partials, overt_partials, EconConfig, IntensityForm, IntensityParams,
    OvertConfig, OvertPartials, SafeguardResponseConfig, Safeguards, VariantConfig,
};

/// A point in design space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub x: f64,
    pub s: f64,
}

impl Architecture {
    pub fn new(x: f64, s: f64) -> Self {
        Architecture { x, s }
    }

    pub fn is_feasible(&self, econ: &EconConfig) -> bool {
        match feasibility_s(self.x, econ) {
            Ok(req) => (0.0..=1.0).contains(&self.s) && self.s >= req,
            Err(_) => false,
        }
    }
}

/// Codification split into insider-facing standardization and
/// oversight-facing auditability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitArchitecture {
    pub x: f64,
    pub s_std: f64,
    pub s_aud: f64,
}

/// Interface-level search environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Number of routinized interfaces `N(x)`.
    pub n_interfaces: f64,
    /// Attempts per interface `M(r_m)`.
    pub attempts: f64,
    /// Per-attempt probability of a passing, erosive move.
    pub rho: f64,
    /// Probability the move persists through the window.
    pub psi: f64,
}

impl SearchParams {
    /// Search environment implied by a configuration at `(x, s)`: `N = n_scale·x`,
    /// `M = M(r_m)`, `ρ = s·κ(r_κ)`, `ψ = ψ(q(r_q))`.
    pub fn at(
        x: f64,
        s: f64,
        safeguards: &Safeguards,
        response: &SafeguardResponseConfig,
        n_scale: f64,
    ) -> Self {
        SearchParams {
            n_interfaces: n_scale * x,
            attempts: response.throughput(safeguards.r_m),
            rho: s * response.coupling(safeguards.r_kappa),
            psi: response.persistence(response.remedy_hazard(safeguards.r_q)),
        }
    }

    fn check(&self) -> Result<f64> {
        let p = self.rho * self.psi;
        if !(self.n_interfaces >= 0.0 && self.attempts >= 0.0) {
            return Err(ModelError::Degenerate(format!(
                "interface count {} and attempts {} must be nonnegative",
                self.n_interfaces, self.attempts
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::Degenerate(format!(
                "rho*psi = {p} is not a probability"
            )));
        }
        if p >= 1.0 && self.attempts > 0.0 {
            return Err(ModelError::Degenerate(
                "rho*psi = 1 makes per-interface success certain".into(),
            ));
        }
        Ok(p)
    }

    /// `ν = -ln(1 - π) = -M ln(1 - ρψ)`.
    pub fn nu(&self) -> Result<f64> {
        let p = self.check()?;
        if self.attempts == 0.0 {
            return Ok(0.0);
        }
        Ok(-self.attempts * (-p).ln_1p())
    }
}

/// Score thresholds and logging depth that operationalize a review gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationalizationProtocol {
    pub tau_l: f64,
    pub tau_h: f64,
    pub ell: f64,
}

impl OperationalizationProtocol {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        for (name, v) in [("tau_l", self.tau_l), ("tau_h", self.tau_h)] {
            families::require(
                v.is_finite() && (0.0..=1.0).contains(&v),
                families::key(prefix, name),
                format!("{name} must lie in [0,1] (got {v})"),
            )?;
        }
        families::require(
            self.tau_l <= self.tau_h,
            families::key(prefix, "tau_l"),
            format!("tau_l={} must not exceed tau_h={}", self.tau_l, self.tau_h),
        )?;
        families::require_finite_nonneg(prefix, "ell", self.ell)
    }
}

/// Per-interface probability of at least one surviving erosive move.
pub fn per_interface_pi(p: &SearchParams) -> Result<f64> {
    let q = p.check()?;
    if p.attempts == 0.0 || q == 0.0 {
        return Ok(0.0);
    }
    Ok(-(p.attempts * (-q).ln_1p()).exp_m1())
}

/// Success somewhere in the stack: `1 - exp(-(μ0 + N ν))`.
pub fn search_pwf(p: &SearchParams, mu0: f64) -> Result<f64> {
    let nu = p.nu()?;
    let mu = mu0 + p.n_interfaces * nu;
    if !mu.is_finite() {
        return Err(ModelError::Degenerate(format!("search intensity {mu} is not finite")));
    }
    Ok(pwf(mu))
}

/// Within-form intensity of the configured single-index form.
pub fn poisson_intensity(a: &Architecture, ip: &IntensityParams, variant: &VariantConfig) -> f64 {
    let index = match variant.form {
        IntensityForm::Benchmark => a.x * a.s,
        IntensityForm::Ambiguity => a.x * a.s * ambiguity_weight(a.s, variant),
        IntensityForm::Nonlinear => nonlinear_index(a.x, a.s, variant),
    };
    ip.mu0 + ip.eta * index
}

/// `(∂μ/∂x, ∂μ/∂s)`.
pub fn intensity_partials(
    a: &Architecture,
    ip: &IntensityParams,
    variant: &VariantConfig,
) -> (f64, f64) {
    match variant.form {
        IntensityForm::Benchmark => (ip.eta * a.s, ip.eta * a.x),
        IntensityForm::Ambiguity => {
            let w = ambiguity_weight(a.s, variant);
            (
                ip.eta * a.s * w,
                ip.eta * a.x * w * (1.0 - variant.omega_rate * a.s),
            )
        }
        IntensityForm::Nonlinear => {
            let (dx, ds) = nonlinear_index_partials(a.x, a.s, variant);
            (ip.eta * dx, ip.eta * ds)
        }
    }
}

/// Poisson within-form success `1 - exp(-μ)`.
pub fn pwf(mu: f64) -> f64 {
    -(-mu).exp_m1()
}

/// Probability of at least `k` Poisson(μ) arrivals.
pub fn pwf_k(mu: f64, k: u32) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    if k == 1 {
        return pwf(mu);
    }
    if mu <= 0.0 {
        return 0.0;
    }
    let kf = k as f64;
    if mu < kf {
        // Upper tail directly; terms decrease from j = k on.
        let mut term = (-mu).exp();
        for j in 1..=k {
            term *= mu / j as f64;
        }
        let mut sum = 0.0;
        let mut j = k;
        while term > 0.0 && term > 1e-18 * sum && j < k + 10_000 {
            sum += term;
            j += 1;
            term *= mu / j as f64;
        }
        sum.min(1.0)
    } else {
        let mut term = (-mu).exp();
        let mut lower = 0.0;
        for j in 0..k {
            if j > 0 {
                term *= mu / j as f64;
            }
            lower += term;
        }
        (1.0 - lower).max(0.0)
    }
}

/// `d pwf_k / dμ = e^{-μ} μ^{k-1} / (k-1)!`, the Poisson mass at `k - 1`.
pub fn pwf_k_density(mu: f64, k: u32) -> f64 {
    let mut term = (-mu).exp();
    for j in 1..k {
        term *= mu / j as f64;
    }
    term
}

/// Two independent channels: `1 - (1 - f0)(1 - pwf)`.
pub fn total_failure(pwf_val: f64, f0: f64) -> f64 {
    pwf_val + (1.0 - pwf_val) * f0
}

/// Choice-based aggregation: the successor uses the better channel.
pub fn total_failure_max(pwf_val: f64, f0: f64) -> f64 {
    pwf_val.max(f0)
}

/// Branch derivatives of the max aggregator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPartials {
    pub d_pwf: f64,
    pub d_f0: f64,
    /// Set on the tie `f0 == pwf`, where the aggregator is not differentiable
    /// and the within-form branch is reported.
    pub knife_edge: bool,
}

pub fn total_failure_max_partials(pwf_val: f64, f0: f64) -> MaxPartials {
    if pwf_val > f0 {
        MaxPartials { d_pwf: 1.0, d_f0: 0.0, knife_edge: false }
    } else if f0 > pwf_val {
        MaxPartials { d_pwf: 0.0, d_f0: 1.0, knife_edge: false }
    } else {
        MaxPartials { d_pwf: 1.0, d_f0: 0.0, knife_edge: true }
    }
}

fn split_pieces(
    sa: &SplitArchitecture,
    ip: &IntensityParams,
    safeguards: &Safeguards,
    overt: &OvertConfig,
) -> (f64, OvertPartials) {
    let mu = ip.mu0 + ip.eta * sa.x * sa.s_std;
    (mu, overt_partials(sa.x, sa.s_aud, safeguards, overt))
}

/// Failure with the within-form channel driven by `s_std` and the overt
/// channel by `s_aud`.
pub fn split_failure(
    sa: &SplitArchitecture,
    ip: &IntensityParams,
    safeguards: &Safeguards,
    overt: &OvertConfig,
) -> f64 {
    let (mu, op) = split_pieces(sa, ip, safeguards, overt);
    total_failure(pwf(mu), op.f0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPartials {
    /// `∂F/∂s_aud ≤ 0`.
    pub d_saud: f64,
    /// `∂F/∂s_std ≥ 0`.
    pub d_sstd: f64,
}

pub fn split_partials(
    sa: &SplitArchitecture,
    ip: &IntensityParams,
    safeguards: &Safeguards,
    overt: &OvertConfig,
) -> SplitPartials {
    let (mu, op) = split_pieces(sa, ip, safeguards, overt);
    let survive = (-mu).exp();
    SplitPartials {
        d_saud: survive * op.ds,
        d_sstd: (1.0 - op.f0) * survive * ip.eta * sa.x,
    }
}

/// Net effect of bundled codification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodificationMargin {
    /// `h(s) = F0_s + (1 - F0) η x`; shares its sign with `dF/ds`.
    pub h: f64,
    pub df_ds: f64,
}

pub fn codification_margin(
    x: f64,
    s: f64,
    ip: &IntensityParams,
    safeguards: &Safeguards,
    overt: &OvertConfig,
) -> CodificationMargin {
    let op = overt_partials(x, s, safeguards, overt);
    let h = op.ds + (1.0 - op.f0) * ip.eta * x;
    let mu = ip.mu0 + ip.eta * x * s;
    CodificationMargin { h, df_ds: (-mu).exp() * h }
}

/// Path along which scale is varied.
#[derive(Debug, Clone, Copy)]
pub enum ScalePath<'a> {
    /// Codification held at the given `s`.
    FixedCodification,
    /// Codification tracks the feasibility minimum `s = S(x)`.
    Binding(&'a EconConfig),
}

/// Derivative of benchmark total failure with respect to scale.
pub fn df_dx(
    x: f64,
    s: f64,
    ip: &IntensityParams,
    safeguards: &Safeguards,
    overt: &OvertConfig,
    path: ScalePath<'_>,
) -> Result<f64> {
    match path {
        ScalePath::FixedCodification => {
            let op = overt_partials(x, s, safeguards, overt);
            let survive = (-(ip.mu0 + ip.eta * x * s)).exp();
            Ok(survive * op.dx + (1.0 - op.f0) * survive * ip.eta * s)
        }
        ScalePath::Binding(econ) => {
            let s = feasibility_s(x, econ)?;
            let slope = econ.feasibility_slope(x)?;
            if !slope.is_finite() {
                return Err(ModelError::Degenerate(format!(
                    "S'(x) is unbounded at x={x}"
                )));
            }
            let op = overt_partials(x, s, safeguards, overt);
            let survive = (-(ip.mu0 + ip.eta * x * s)).exp();
            Ok(survive
                * (op.dx + op.ds * slope + (1.0 - op.f0) * ip.eta * (s + x * slope)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePartials {
    pub d_f0: f64,
    pub d_mu0: f64,
    pub d_eta: f64,
}

/// Partials of benchmark `F` in the channel primitives `(F0, μ0, η)`.
pub fn aggregate_partials(f0: f64, mu0: f64, eta: f64, x: f64, s: f64) -> AggregatePartials {
    let survive = (-(mu0 + eta * x * s)).exp();
    AggregatePartials {
        d_f0: survive,
        d_mu0: (1.0 - f0) * survive,
        d_eta: (1.0 - f0) * survive * x * s,
    }
}

/// Map a review protocol to `(s_std, s_aud)`: standardization rises as the
/// discretionary band narrows, auditability saturates in logging depth.
pub fn protocol_to_split(p: &OperationalizationProtocol) -> Result<(f64, f64)> {
    p.validate("protocol")?;
    let band = p.tau_h - p.tau_l;
    Ok((1.0 - band, -(-p.ell).exp_m1()))
}

/// How the two failure channels combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    /// Independent channels.
    #[default]
    Sum,
    /// Strategic substitution: only the stronger channel counts.
    Max,
}

/// Family selection plus structural options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub response: SafeguardResponseConfig,
    pub overt: OvertConfig,
    pub econ: EconConfig,
    pub variant: VariantConfig,
}

/// Partial derivatives of total failure at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailurePartials {
    pub dx: f64,
    pub ds: f64,
    pub knife_edge: bool,
}

/// A configured model at a fixed safeguard level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub safeguards: Safeguards,
    pub intensity: IntensityParams,
    pub aggregator: Aggregator,
    pub n_scale: f64,
}

impl Model {
    /// Derives `(μ0, η)` from the safeguards unless an explicit override is given.
    pub fn new(
        config: ModelConfig,
        safeguards: Safeguards,
        intensity: Option<IntensityParams>,
        aggregator: Aggregator,
        n_scale: f64,
    ) -> Result<Self> {
        let intensity = match intensity {
            Some(ip) => {
                ip.validate("intensity")?;
                ip
            }
            None => derive_intensity(&safeguards, &config.response)?,
        };
        Ok(Model {
            config,
            safeguards,
            intensity,
            aggregator,
            n_scale,
        })
    }

    pub fn econ(&self) -> &EconConfig {
        &self.config.econ
    }

    pub fn k(&self) -> u32 {
        self.config.variant.k
    }

    pub fn mu(&self, x: f64, s: f64) -> f64 {
        poisson_intensity(&Architecture::new(x, s), &self.intensity, &self.config.variant)
    }

    pub fn pwf(&self, x: f64, s: f64) -> f64 {
        pwf_k(self.mu(x, s), self.k())
    }

    pub fn f0(&self, x: f64, s: f64) -> f64 {
        families::overt_vulnerability(x, s, &self.safeguards, &self.config.overt)
    }

    pub fn aggregate(&self, pwf_val: f64, f0: f64) -> f64 {
        match self.aggregator {
            Aggregator::Sum => total_failure(pwf_val, f0),
            Aggregator::Max => total_failure_max(pwf_val, f0),
        }
    }

    pub fn failure(&self, x: f64, s: f64) -> f64 {
        self.aggregate(self.pwf(x, s), self.f0(x, s))
    }

    /// Search-form environment at `(x, s)`.
    pub fn search_params(&self, x: f64, s: f64) -> SearchParams {
        SearchParams::at(x, s, &self.safeguards, &self.config.response, self.n_scale)
    }

    pub fn search_pwf(&self, x: f64, s: f64) -> Result<f64> {
        search_pwf(&self.search_params(x, s), self.intensity.mu0)
    }

    /// `(F_x, F_s)` for the configured intensity form, `k` and aggregator.
    pub fn failure_partials(&self, x: f64, s: f64) -> FailurePartials {
        let a = Architecture::new(x, s);
        let mu = self.mu(x, s);
        let (mu_x, mu_s) = intensity_partials(&a, &self.intensity, &self.config.variant);
        let p = pwf_k(mu, self.k());
        let dp = pwf_k_density(mu, self.k());
        let op = overt_partials(x, s, &self.safeguards, &self.config.overt);
        match self.aggregator {
            Aggregator::Sum => FailurePartials {
                dx: (1.0 - p) * op.dx + (1.0 - op.f0) * dp * mu_x,
                ds: (1.0 - p) * op.ds + (1.0 - op.f0) * dp * mu_s,
                knife_edge: false,
            },
            Aggregator::Max => {
                let mp = total_failure_max_partials(p, op.f0);
                FailurePartials {
                    dx: mp.d_pwf * dp * mu_x + mp.d_f0 * op.dx,
                    ds: mp.d_pwf * dp * mu_s + mp.d_f0 * op.ds,
                    knife_edge: mp.knife_edge,
                }
            }
        }
    }

    /// Total derivative of `F(x, S(x))` in `x`.
    pub fn binding_failure_slope(&self, x: f64) -> Result<f64> {
        let s = feasibility_s(x, self.econ())?;
        let slope = self.econ().feasibility_slope(x)?;
        if !slope.is_finite() {
            return Err(ModelError::Degenerate(format!("S'(x) is unbounded at x={x}")));
        }
        let fp = self.failure_partials(x, s);
        Ok(fp.dx + if slope == 0.0 { 0.0 } else { fp.ds * slope })
    }

    /// Intensity along the binding path `s = S(x)`.
    pub fn binding_mu(&self, x: f64) -> Result<f64> {
        Ok(self.mu(x, feasibility_s(x, self.econ())?))
    }

    pub fn binding_pwf(&self, x: f64) -> Result<f64> {
        Ok(self.pwf(x, feasibility_s(x, self.econ())?))
    }

    pub fn with_safeguards(&self, safeguards: Safeguards) -> Result<Self> {
        Model::new(self.config, safeguards, None, self.aggregator, self.n_scale)
    }
}
