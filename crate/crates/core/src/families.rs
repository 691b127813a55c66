//! Parametric functional forms for every primitive the model leaves open.
//!
//! Safeguards map into within-form intensity through throughput `M(r_m)`,
//! coupling `κ(r_κ)`, remedy hazard `q(r_q)` and the persistence factors
//! `ψ(q) = exp(-θq)`, `ψ0(q) = exp(-θ0 q)`:
//!
//! ```text
//! μ0(r) = M(r_m) ψ0(q(r_q))
//! η(r)  = M(r_m) κ(r_κ) ψ(q(r_q))
//! ```
//!
//! Floors on `M` and `κ` and the cap on `q` keep both intensities bounded
//! away from zero no matter how large the safeguards get.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Upper clamp on the overt-channel baseline so that `F0 < 1` always.
pub const F0_CLAMP_EPS: f64 = 1e-9;

pub(crate) fn require(cond: bool, key: String, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::config(key, message))
    }
}

pub(crate) fn key(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

pub(crate) fn require_finite_nonneg(prefix: &str, field: &str, v: f64) -> Result<()> {
    require(
        v.is_finite() && v >= 0.0,
        key(prefix, field),
        format!("{field} must be finite and >= 0 (got {v})"),
    )
}

pub(crate) fn require_finite_pos(prefix: &str, field: &str, v: f64) -> Result<()> {
    require(
        v.is_finite() && v > 0.0,
        key(prefix, field),
        format!("{field} must be finite and > 0 (got {v})"),
    )
}

/// The slow-moving safeguard bundle `(r_m, r_κ, r_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Safeguards {
    /// Throughput safeguard.
    pub r_m: f64,
    /// Test-to-deploy decoupling.
    pub r_kappa: f64,
    /// Remedy and contestation capacity.
    pub r_q: f64,
}

impl Default for Safeguards {
    fn default() -> Self {
        Safeguards {
            r_m: 0.5,
            r_kappa: 0.5,
            r_q: 0.5,
        }
    }
}

impl Safeguards {
    pub fn new(r_m: f64, r_kappa: f64, r_q: f64) -> Result<Self> {
        let s = Safeguards { r_m, r_kappa, r_q };
        s.validate("safeguards")?;
        Ok(s)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        require_finite_nonneg(prefix, "r_m", self.r_m)?;
        require_finite_nonneg(prefix, "r_kappa", self.r_kappa)?;
        require_finite_nonneg(prefix, "r_q", self.r_q)
    }

    pub fn component(&self, j: usize) -> f64 {
        match j {
            0 => self.r_m,
            1 => self.r_kappa,
            2 => self.r_q,
            _ => panic!("safeguard index {j} out of range"),
        }
    }

    pub fn with_component(mut self, j: usize, v: f64) -> Self {
        match j {
            0 => self.r_m = v,
            1 => self.r_kappa = v,
            2 => self.r_q = v,
            _ => panic!("safeguard index {j} out of range"),
        }
        self
    }
}

/// How safeguards translate into attempts, coupling, remedy and persistence.
///
/// `theta0` defaults to `theta`; nothing pins their relative size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafeguardResponseConfig {
    pub m_bar: f64,
    pub a_m: f64,
    pub m_floor: f64,
    pub kappa_floor: f64,
    pub a_k: f64,
    pub q0: f64,
    pub q1: f64,
    pub q_cap: f64,
    pub theta: f64,
    pub theta0: f64,
}

impl Default for SafeguardResponseConfig {
    fn default() -> Self {
        SafeguardResponseConfig {
            m_bar: 0.9,
            a_m: 1.0,
            m_floor: 0.1,
            kappa_floor: 0.2,
            a_k: 1.0,
            q0: 0.5,
            q1: 1.0,
            q_cap: 2.0,
            theta: 1.0,
            theta0: 1.0,
        }
    }
}

impl SafeguardResponseConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        require_finite_nonneg(prefix, "m_bar", self.m_bar)?;
        require_finite_nonneg(prefix, "a_m", self.a_m)?;
        require_finite_pos(prefix, "m_floor", self.m_floor)?;
        require(
            self.kappa_floor.is_finite() && self.kappa_floor > 0.0 && self.kappa_floor <= 1.0,
            key(prefix, "kappa_floor"),
            format!("kappa_floor must lie in (0,1] (got {})", self.kappa_floor),
        )?;
        require_finite_nonneg(prefix, "a_k", self.a_k)?;
        require_finite_nonneg(prefix, "q0", self.q0)?;
        require_finite_nonneg(prefix, "q1", self.q1)?;
        require(
            self.q_cap.is_finite() && self.q_cap >= self.q0,
            key(prefix, "q_cap"),
            format!("q_cap must be finite and >= q0 (got {})", self.q_cap),
        )?;
        require_finite_pos(prefix, "theta", self.theta)?;
        require_finite_pos(prefix, "theta0", self.theta0)
    }

    /// Attempts per interface, `M(r_m) = m_floor + m_bar·exp(-a_m r_m)`.
    pub fn throughput(&self, r_m: f64) -> f64 {
        self.m_floor + self.m_bar * (-self.a_m * r_m).exp()
    }

    /// Test-to-deploy coupling, `κ(r_κ) ∈ [kappa_floor, 1]`.
    pub fn coupling(&self, r_kappa: f64) -> f64 {
        self.kappa_floor + (1.0 - self.kappa_floor) * (-self.a_k * r_kappa).exp()
    }

    /// Remedy hazard, linear in `r_q` and capped at `q_cap`.
    pub fn remedy_hazard(&self, r_q: f64) -> f64 {
        (self.q0 + self.q1 * r_q).min(self.q_cap)
    }

    /// Probability a standardized move survives the remedy race.
    pub fn persistence(&self, q: f64) -> f64 {
        (-self.theta * q).exp()
    }

    pub fn baseline_persistence(&self, q: f64) -> f64 {
        (-self.theta0 * q).exp()
    }

    /// Lower bound on `η(r)` over all safeguard levels.
    pub fn eta_floor(&self) -> f64 {
        self.m_floor * self.kappa_floor * self.persistence(self.q_cap)
    }

    pub fn mu0_floor(&self) -> f64 {
        self.m_floor * self.baseline_persistence(self.q_cap)
    }
}

/// Baseline and standardized within-form intensities `(μ0, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityParams {
    pub mu0: f64,
    pub eta: f64,
}

impl IntensityParams {
    pub fn new(mu0: f64, eta: f64) -> Result<Self> {
        let ip = IntensityParams { mu0, eta };
        ip.validate("intensity")?;
        Ok(ip)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        require_finite_nonneg(prefix, "mu0", self.mu0)?;
        require_finite_nonneg(prefix, "eta", self.eta)
    }
}

pub fn derive_intensity(
    safeguards: &Safeguards,
    cfg: &SafeguardResponseConfig,
) -> Result<IntensityParams> {
    cfg.validate("families.response")?;
    safeguards.validate("safeguards")?;
    let m = cfg.throughput(safeguards.r_m);
    let q = cfg.remedy_hazard(safeguards.r_q);
    Ok(IntensityParams {
        mu0: m * cfg.baseline_persistence(q),
        eta: m * cfg.coupling(safeguards.r_kappa) * cfg.persistence(q),
    })
}

/// Overt-abuse channel `F0(x,s,r) = F̄(x,r)·exp(-b s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OvertConfig {
    pub f0: f64,
    /// Codification deterrence rate.
    pub b: f64,
    pub c_m: f64,
    pub c_k: f64,
    pub c_q: f64,
    /// Scale sensitivity of the baseline. Any sign.
    pub a_x: f64,
}

impl Default for OvertConfig {
    fn default() -> Self {
        OvertConfig {
            f0: 0.3,
            b: 2.0,
            c_m: 0.5,
            c_k: 0.5,
            c_q: 0.5,
            a_x: 0.0,
        }
    }
}

impl OvertConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        require(
            self.f0.is_finite() && (0.0..1.0).contains(&self.f0),
            key(prefix, "f0"),
            format!("f0 must lie in [0,1) (got {})", self.f0),
        )?;
        require_finite_nonneg(prefix, "b", self.b)?;
        require_finite_nonneg(prefix, "c_m", self.c_m)?;
        require_finite_nonneg(prefix, "c_k", self.c_k)?;
        require_finite_nonneg(prefix, "c_q", self.c_q)?;
        require(
            self.a_x.is_finite(),
            key(prefix, "a_x"),
            "a_x must be finite",
        )
    }

    fn unclamped_baseline(&self, x: f64, r: &Safeguards) -> f64 {
        self.f0
            * (-self.c_m * r.r_m - self.c_k * r.r_kappa - self.c_q * r.r_q).exp()
            * (1.0 + self.a_x * x)
    }

    /// `F̄(x,r)`, clamped to `[0, 1-ε]`.
    pub fn baseline(&self, x: f64, r: &Safeguards) -> f64 {
        self.unclamped_baseline(x, r).clamp(0.0, 1.0 - F0_CLAMP_EPS)
    }

    /// `∂F̄/∂x`; zero wherever the clamp is active.
    pub fn baseline_dx(&self, x: f64, r: &Safeguards) -> f64 {
        let raw = self.unclamped_baseline(x, r);
        if raw <= 0.0 || raw >= 1.0 - F0_CLAMP_EPS {
            0.0
        } else {
            self.f0 * (-self.c_m * r.r_m - self.c_k * r.r_kappa - self.c_q * r.r_q).exp() * self.a_x
        }
    }
}

pub fn overt_vulnerability(x: f64, s: f64, safeguards: &Safeguards, cfg: &OvertConfig) -> f64 {
    cfg.baseline(x, safeguards) * (-cfg.b * s).exp()
}

/// First and second partials of `F0` in `s`, and the partial in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvertPartials {
    pub f0: f64,
    pub ds: f64,
    pub dss: f64,
    pub dx: f64,
}

pub fn overt_partials(x: f64, s: f64, safeguards: &Safeguards, cfg: &OvertConfig) -> OvertPartials {
    let decay = (-cfg.b * s).exp();
    let f0 = cfg.baseline(x, safeguards) * decay;
    OvertPartials {
        f0,
        ds: -cfg.b * f0,
        dss: cfg.b * cfg.b * f0,
        dx: cfg.baseline_dx(x, safeguards) * decay,
    }
}

/// Value `G`, cost `C` and the feasibility curve `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconConfig {
    pub g_x: f64,
    pub g_s: f64,
    pub c_x: f64,
    pub c_s: f64,
    pub x_bar: f64,
    pub gamma_s: f64,
}

impl Default for EconConfig {
    fn default() -> Self {
        EconConfig {
            g_x: 1.0,
            g_s: 0.0,
            c_x: 1.0,
            c_s: 0.5,
            x_bar: 1.0,
            gamma_s: 1.0,
        }
    }
}

impl EconConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        require_finite_pos(prefix, "g_x", self.g_x)?;
        require_finite_nonneg(prefix, "g_s", self.g_s)?;
        require_finite_pos(prefix, "c_x", self.c_x)?;
        require_finite_nonneg(prefix, "c_s", self.c_s)?;
        require_finite_pos(prefix, "x_bar", self.x_bar)?;
        require_finite_pos(prefix, "gamma_s", self.gamma_s)
    }

    pub fn value(&self, x: f64, s: f64) -> f64 {
        self.g_x * x + self.g_s * s
    }

    pub fn cost(&self, x: f64, s: f64) -> f64 {
        0.5 * self.c_x * x * x + 0.5 * self.c_s * s * s
    }

    /// `(G_x, G_s, C_x, C_s)` at `(x, s)`.
    pub fn partials(&self, x: f64, s: f64) -> (f64, f64, f64, f64) {
        (self.g_x, self.g_s, self.c_x * x, self.c_s * s)
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x.is_finite() && (0.0..=self.x_bar).contains(&x) {
            Ok(())
        } else {
            Err(ModelError::Domain {
                name: "x",
                value: x,
                domain: "[0, x_bar]",
            })
        }
    }

    /// `S'(x)`; infinite at the origin when `gamma_s < 1`.
    pub fn feasibility_slope(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        if self.gamma_s == 1.0 {
            return Ok(1.0 / self.x_bar);
        }
        let t = x / self.x_bar;
        Ok(self.gamma_s * t.powf(self.gamma_s - 1.0) / self.x_bar)
    }
}

/// Minimum codification `S(x) = (x / x_bar)^gamma_S` needed to run at scale `x`.
pub fn feasibility_s(x: f64, cfg: &EconConfig) -> Result<f64> {
    cfg.check_x(x)?;
    if x == cfg.x_bar {
        return Ok(1.0);
    }
    Ok((x / cfg.x_bar).powf(cfg.gamma_s))
}

pub fn value_and_cost(x: f64, s: f64, cfg: &EconConfig) -> (f64, f64) {
    (cfg.value(x, s), cfg.cost(x, s))
}

/// Which single-index form the within-form intensity takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityForm {
    /// `μ = μ0 + η x s`
    #[default]
    Benchmark,
    /// `μ = μ0 + η x s ω(s)`
    Ambiguity,
    /// `μ = μ0 + η φ(x,s)`
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariantConfig {
    pub form: IntensityForm,
    pub omega_rate: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Effective moves needed for erosion.
    pub k: u32,
}

impl Default for VariantConfig {
    fn default() -> Self {
        VariantConfig {
            form: IntensityForm::Benchmark,
            omega_rate: 0.0,
            alpha: 1.0,
            beta: 1.0,
            k: 1,
        }
    }
}

impl VariantConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        require_finite_nonneg(prefix, "omega_rate", self.omega_rate)?;
        require_finite_pos(prefix, "alpha", self.alpha)?;
        require_finite_pos(prefix, "beta", self.beta)?;
        require(self.k >= 1, key(prefix, "k"), "k must be >= 1")
    }
}

/// `ω(s) = exp(-omega_rate·s)`, the share of contested cases left ambiguous.
pub fn ambiguity_weight(s: f64, cfg: &VariantConfig) -> f64 {
    (-cfg.omega_rate * s).exp()
}

fn pow_nonneg(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else if base == 0.0 {
        0.0
    } else {
        base.powf(exponent)
    }
}

/// `φ(x,s) = x^alpha · s^beta`.
pub fn nonlinear_index(x: f64, s: f64, cfg: &VariantConfig) -> f64 {
    pow_nonneg(x, cfg.alpha) * pow_nonneg(s, cfg.beta)
}

/// Partials of `φ`. Exponents below one give an infinite slope at zero; the
/// caller sees `f64::INFINITY` there.
pub(crate) fn nonlinear_index_partials(x: f64, s: f64, cfg: &VariantConfig) -> (f64, f64) {
    let dx = cfg.alpha * pow_nonneg(x, cfg.alpha - 1.0) * pow_nonneg(s, cfg.beta);
    let ds = cfg.beta * pow_nonneg(x, cfg.alpha) * pow_nonneg(s, cfg.beta - 1.0);
    (dx, ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example_response() -> SafeguardResponseConfig {
        SafeguardResponseConfig {
            m_bar: 0.9,
            a_m: 1.0,
            m_floor: 0.1,
            kappa_floor: 0.2,
            a_k: 1.0,
            q0: 0.5,
            q1: 1.0,
            q_cap: 2.0,
            theta: 1.0,
            theta0: 1.0,
        }
    }

    #[test]
    fn intensity_at_zero_safeguards() {
        let ip = derive_intensity(&Safeguards::new(0.0, 0.0, 0.0).unwrap(), &example_response())
            .unwrap();
        assert_relative_eq!(ip.mu0, 0.606_530_659_712_633_4, epsilon = 1e-12);
        assert_relative_eq!(ip.eta, 0.606_530_659_712_633_4, epsilon = 1e-12);
    }

    #[test]
    fn eta_bounded_away_from_zero() {
        let cfg = example_response();
        let ip = derive_intensity(&Safeguards::new(1e6, 1e6, 1e6).unwrap(), &cfg).unwrap();
        let floor = cfg.m_floor * cfg.kappa_floor * (-2.0f64).exp();
        assert!(ip.eta >= floor * (1.0 - 1e-12));
        assert!(ip.mu0 >= cfg.mu0_floor() * (1.0 - 1e-12));
    }

    #[test]
    fn bad_floor_is_config_error() {
        let cfg = SafeguardResponseConfig {
            kappa_floor: 0.0,
            ..example_response()
        };
        let err = derive_intensity(&Safeguards::default(), &cfg).unwrap_err();
        assert!(matches!(err, ModelError::Config { ref key, .. } if key == "families.response.kappa_floor"));
        let cfg = SafeguardResponseConfig {
            q_cap: 0.1,
            ..example_response()
        };
        assert!(derive_intensity(&Safeguards::default(), &cfg).is_err());
    }

    #[test]
    fn intensity_weakly_decreasing_in_each_safeguard() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let cfg = SafeguardResponseConfig {
                m_bar: rng.random_range(0.0..3.0),
                a_m: rng.random_range(0.0..3.0),
                m_floor: rng.random_range(0.01..1.0),
                kappa_floor: rng.random_range(0.01..1.0),
                a_k: rng.random_range(0.0..3.0),
                q0: rng.random_range(0.0..1.0),
                q1: rng.random_range(0.0..2.0),
                q_cap: rng.random_range(1.0..3.0),
                theta: rng.random_range(0.1..2.0),
                theta0: rng.random_range(0.1..2.0),
            };
            let r = Safeguards::new(
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..3.0),
            )
            .unwrap();
            let base = derive_intensity(&r, &cfg).unwrap();
            for j in 0..3 {
                let bumped = r.with_component(j, r.component(j) + 1e-3);
                let ip = derive_intensity(&bumped, &cfg).unwrap();
                assert!(ip.mu0 <= base.mu0 + 1e-15);
                assert!(ip.eta <= base.eta + 1e-15);
                assert!(ip.mu0 > 0.0 && ip.eta > 0.0);
            }
        }
    }

    fn flat_overt(f0: f64, b: f64) -> OvertConfig {
        OvertConfig {
            f0,
            b,
            c_m: 0.0,
            c_k: 0.0,
            c_q: 0.0,
            a_x: 0.0,
        }
    }

    #[test]
    fn overt_examples() {
        let r = Safeguards::default();
        assert_eq!(overt_vulnerability(0.3, 0.0, &r, &flat_overt(0.8, 2.0)), 0.8);
        assert_relative_eq!(
            overt_vulnerability(0.9, 1.0, &r, &flat_overt(0.8, 2.0)),
            0.108_268_226_589_290_16,
            epsilon = 1e-14
        );
        let cfg = OvertConfig {
            c_m: 0.4,
            ..flat_overt(0.8, 2.0)
        };
        let lo = overt_vulnerability(0.5, 0.5, &r, &cfg);
        let hi = overt_vulnerability(0.5, 0.5, &r.with_component(0, 1.0), &cfg);
        assert!(hi < lo);
    }

    #[test]
    fn overt_clamped_below_one() {
        let cfg = OvertConfig {
            a_x: 10.0,
            ..flat_overt(0.9, 0.0)
        };
        let v = overt_vulnerability(1.0, 0.0, &Safeguards::default(), &cfg);
        assert_eq!(v, 1.0 - F0_CLAMP_EPS);
        let neg = OvertConfig {
            a_x: -10.0,
            ..flat_overt(0.9, 0.0)
        };
        assert_eq!(overt_vulnerability(1.0, 0.0, &Safeguards::default(), &neg), 0.0);
    }

    #[test]
    fn overt_convex_in_s() {
        let r = Safeguards::default();
        let cfg = OvertConfig::default();
        let h = 1e-3;
        let mut s = h;
        while s < 1.0 - h {
            let second = overt_vulnerability(0.5, s + h, &r, &cfg)
                - 2.0 * overt_vulnerability(0.5, s, &r, &cfg)
                + overt_vulnerability(0.5, s - h, &r, &cfg);
            assert!(second >= -1e-15);
            s += h;
        }
    }

    #[test]
    fn feasibility_boundaries_and_shape() {
        let cfg = EconConfig {
            gamma_s: 2.0,
            ..EconConfig::default()
        };
        assert_eq!(feasibility_s(0.0, &cfg).unwrap(), 0.0);
        assert_eq!(feasibility_s(1.0, &cfg).unwrap(), 1.0);
        assert_relative_eq!(feasibility_s(0.5, &cfg).unwrap(), 0.25);
        let odd = EconConfig {
            x_bar: 3.0,
            gamma_s: 0.7,
            ..EconConfig::default()
        };
        assert_eq!(feasibility_s(3.0, &odd).unwrap(), 1.0);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = feasibility_s(3.0 * i as f64 / 1000.0, &odd).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(matches!(
            feasibility_s(1.5, &cfg),
            Err(ModelError::Domain { .. })
        ));
        assert!(feasibility_s(-0.1, &cfg).is_err());
    }

    #[test]
    fn value_cost_examples() {
        assert_eq!(value_and_cost(0.0, 0.0, &EconConfig::default()), (0.0, 0.0));
        let cfg = EconConfig {
            g_x: 1.0,
            g_s: 0.0,
            c_x: 1.0,
            c_s: 0.0,
            ..EconConfig::default()
        };
        let (g, c) = value_and_cost(0.5, 0.3, &cfg);
        assert_relative_eq!(g, 0.5);
        assert_relative_eq!(c, 0.125, epsilon = 1e-15);
        let cfg = EconConfig {
            g_s: 0.4,
            ..EconConfig::default()
        };
        let (g0, c0) = value_and_cost(0.3, 0.5, &cfg);
        let (g1, c1) = value_and_cost(0.4, 0.5, &cfg);
        assert!(g1 > g0 && c1 > c0);
    }

    #[test]
    fn ambiguity_weight_examples() {
        let zero = VariantConfig::default();
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(ambiguity_weight(s, &zero), 1.0);
        }
        let one = VariantConfig {
            omega_rate: 1.0,
            ..VariantConfig::default()
        };
        assert_relative_eq!(ambiguity_weight(1.0, &one), 0.367_879_441_171_442_3, epsilon = 1e-15);
    }

    #[test]
    fn weighted_codification_nondecreasing_when_rate_at_most_one() {
        for rate in [0.0, 0.25, 0.5, 1.0] {
            let cfg = VariantConfig {
                omega_rate: rate,
                ..VariantConfig::default()
            };
            let n = 10_000;
            let mut prev = 0.0;
            for i in 0..=n {
                let s = i as f64 / n as f64;
                let v = s * ambiguity_weight(s, &cfg);
                assert!(v >= prev - 1e-15, "rate {rate} s {s}");
                prev = v;
            }
        }
        // Past the rate-one boundary the product turns down before s = 1.
        let fast = VariantConfig {
            omega_rate: 2.0,
            ..VariantConfig::default()
        };
        assert!(ambiguity_weight(1.0, &fast) < 0.5 * ambiguity_weight(0.5, &fast));
    }

    #[test]
    fn nonlinear_index_examples() {
        let lin = VariantConfig::default();
        assert_relative_eq!(nonlinear_index(0.5, 0.8, &lin), 0.4);
        let sq = VariantConfig {
            alpha: 2.0,
            ..VariantConfig::default()
        };
        assert_relative_eq!(nonlinear_index(0.5, 0.8, &sq), 0.2, epsilon = 1e-15);
        for s in [0.0, 0.5, 1.0] {
            assert_eq!(nonlinear_index(0.0, s, &sq), 0.0);
        }
    }
}
