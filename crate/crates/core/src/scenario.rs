//! Scenario files: one TOML document bundling families, safeguards, adoption
//! parameters, solver settings and the seed.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adoption::{AdoptionParams, IllustrationConfig};
use crate::error::{ModelError, Result};
use crate::families::{self, feasibility_s, IntensityParams, Safeguards};
use crate::microsim::SimSpec;
use crate::model::{Aggregator, Model, ModelConfig, OperationalizationProtocol};
use crate::repair::RepairConfig;
use crate::solve::Tolerances;
use crate::thresholds::ThresholdTarget;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelOptions {
    /// Interfaces per unit of scale, `N(x) = n_scale·x`.
    pub n_scale: f64,
    pub aggregator: Aggregator,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { n_scale: 10.0, aggregator: Aggregator::Sum }
    }
}

/// Design point used by `eval` and by point-valued sweep outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointConfig {
    pub x: f64,
    /// Codification; `S(x)` when absent.
    pub s: Option<f64>,
}

impl Default for PointConfig {
    fn default() -> Self {
        PointConfig { x: 0.5, s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureConfig {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Rows per emitted curve.
    pub grid_points: usize,
    /// Safeguard bundles compared in the search-form locus figure.
    pub safeguard_bundles: Vec<Safeguards>,
}

impl Default for FigureConfig {
    fn default() -> Self {
        FigureConfig {
            lambda_lo: 0.05,
            lambda_hi: 2.0,
            grid_points: 201,
            safeguard_bundles: vec![
                Safeguards { r_m: 0.0, r_kappa: 0.0, r_q: 0.0 },
                Safeguards { r_m: 0.5, r_kappa: 0.5, r_q: 0.5 },
                Safeguards { r_m: 1.5, r_kappa: 1.5, r_q: 1.5 },
            ],
        }
    }
}

impl FigureConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        families::require_finite_nonneg(prefix, "lambda_lo", self.lambda_lo)?;
        families::require(
            self.lambda_hi.is_finite() && self.lambda_hi > self.lambda_lo,
            families::key(prefix, "lambda_hi"),
            format!("lambda_hi must exceed lambda_lo={} (got {})", self.lambda_lo, self.lambda_hi),
        )?;
        families::require(
            self.grid_points >= 2,
            families::key(prefix, "grid_points"),
            "grid_points must be at least 2",
        )?;
        for (i, b) in self.safeguard_bundles.iter().enumerate() {
            b.validate(&format!("{prefix}.safeguard_bundles.{i}"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub families: ModelConfig,
    #[serde(default)]
    pub model: ModelOptions,
    #[serde(default)]
    pub safeguards: Safeguards,
    /// Explicit `(μ0, η)`; derived from the safeguards when absent.
    #[serde(default)]
    pub intensity: Option<IntensityParams>,
    #[serde(default)]
    pub adoption: AdoptionParams,
    #[serde(default)]
    pub target: ThresholdTarget,
    #[serde(default)]
    pub point: PointConfig,
    #[serde(default)]
    pub repair: Option<RepairConfig>,
    #[serde(default)]
    pub sim: Option<SimSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub figures: FigureConfig,
    #[serde(default)]
    pub protocol: Option<OperationalizationProtocol>,
    #[serde(default)]
    pub illustration: Option<IllustrationConfig>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "default".into(),
            seed: 0,
            families: ModelConfig::default(),
            model: ModelOptions::default(),
            safeguards: Safeguards::default(),
            intensity: None,
            adoption: AdoptionParams::default(),
            target: ThresholdTarget::default(),
            point: PointConfig::default(),
            repair: None,
            sim: None,
            tolerances: Tolerances::default(),
            figures: FigureConfig::default(),
            protocol: None,
            illustration: None,
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| ModelError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    /// Checks every nested invariant, reporting the first violation by its
    /// dotted key path.
    pub fn validate(&self) -> Result<()> {
        families::require(
            !self.name.trim().is_empty(),
            "name".into(),
            "name must be a nonempty identifier",
        )?;
        let f = &self.families;
        f.response.validate("families.response")?;
        f.overt.validate("families.overt")?;
        f.econ.validate("families.econ")?;
        f.variant.validate("families.variant")?;
        families::require_finite_pos("model", "n_scale", self.model.n_scale)?;
        self.safeguards.validate("safeguards")?;
        if let Some(ip) = &self.intensity {
            ip.validate("intensity")?;
        }
        self.adoption.validate("adoption")?;
        self.target.validate("target")?;
        let x_bar = f.econ.x_bar;
        families::require(
            self.point.x.is_finite() && (0.0..=x_bar).contains(&self.point.x),
            "point.x".into(),
            format!("x must lie in [0, x_bar={x_bar}] (got {})", self.point.x),
        )?;
        if let Some(s) = self.point.s {
            families::require(
                s.is_finite() && (0.0..=1.0).contains(&s),
                "point.s".into(),
                format!("s must lie in [0,1] (got {s})"),
            )?;
        }
        if let Some(r) = &self.repair {
            r.validate("repair", x_bar)?;
        }
        if let Some(sim) = &self.sim {
            sim.validate("sim")?;
        }
        self.tolerances.validate("tolerances")?;
        self.figures.validate("figures")?;
        if let Some(p) = &self.protocol {
            p.validate("protocol")?;
        }
        if let Some(i) = &self.illustration {
            i.validate("illustration")?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(
            self.families,
            self.safeguards,
            self.intensity,
            self.model.aggregator,
            self.model.n_scale,
        )
    }

    /// The configured design point, with `s` defaulting to `S(x)`.
    pub fn point(&self) -> Result<(f64, f64)> {
        let x = self.point.x;
        let s = match self.point.s {
            Some(s) => s,
            None => feasibility_s(x, &self.families.econ)?,
        };
        Ok((x, s))
    }

    /// Simulation settings carrying the scenario seed.
    pub fn sim_spec(&self) -> Option<SimSpec> {
        self.sim.map(|s| SimSpec { seed: self.seed, ..s })
    }

    /// SHA-256 of the canonical JSON rendering of the fully defaulted scenario.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_toml_str(&text, &path.display().to_string())
}
