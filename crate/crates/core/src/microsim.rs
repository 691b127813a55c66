//! Monte Carlo simulation of the interface-probing microfoundation.
//!
//! Each replication draws the number of standardized effective moves as a
//! sum of independent binomials (interfaces × attempts, per-attempt
//! probability `ρψ`) plus a Poisson(μ0) baseline count, and records success
//! when the total reaches `k`.
//!
//! Replication `i` uses its own ChaCha8 stream keyed by `(seed, i)`, so the
//! aggregate is identical for any partition of replications across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::families;
use crate::model::SearchParams;

/// Upper bound on `replications × interfaces × attempts` accepted in one call.
pub const MAX_TRIALS: u128 = 1 << 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSpec {
    pub n_interfaces: u64,
    pub attempts_per_interface: u64,
    pub p_attempt: f64,
    pub mu0: f64,
    pub k_required: u32,
    pub replications: u64,
    /// Taken from the enclosing scenario, never from the `[sim]` table.
    #[serde(skip)]
    pub seed: u64,
    /// Fractional remainder of the real interface count, simulated as one
    /// extra interface whose per-attempt probability is scaled by it.
    pub partial_interface: f64,
    /// Fractional remainder of the real attempt count, simulated as one extra
    /// attempt per interface with scaled probability.
    pub partial_attempt: f64,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            n_interfaces: 10,
            attempts_per_interface: 3,
            p_attempt: 0.05,
            mu0: 0.0,
            k_required: 1,
            replications: 1_000_000,
            seed: 0,
            partial_interface: 0.0,
            partial_attempt: 0.0,
        }
    }
}

impl SimSpec {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        families::require(
            self.p_attempt.is_finite() && (0.0..1.0).contains(&self.p_attempt),
            families::key(prefix, "p_attempt"),
            format!("p_attempt must lie in [0,1) (got {})", self.p_attempt),
        )?;
        families::require_finite_nonneg(prefix, "mu0", self.mu0)?;
        families::require(self.k_required >= 1, families::key(prefix, "k_required"), "k_required must be >= 1")?;
        families::require(
            self.replications >= 1,
            families::key(prefix, "replications"),
            "replications must be >= 1",
        )?;
        for (name, v) in [("partial_interface", self.partial_interface), ("partial_attempt", self.partial_attempt)] {
            families::require(
                v.is_finite() && (0.0..1.0).contains(&v),
                families::key(prefix, name),
                format!("{name} must lie in [0,1) (got {v})"),
            )?;
        }
        Ok(())
    }

    /// Realize real-valued `N` and `M` as counts: floor each, and carry the
    /// fractional part as one extra interface or attempt whose success
    /// probability is scaled by it. The expected move count `N·M·ρψ` is
    /// preserved exactly.
    pub fn from_search(p: &SearchParams, mu0: f64, k_required: u32, replications: u64, seed: u64) -> Result<Self> {
        let p_attempt = p.rho * p.psi;
        let spec = SimSpec {
            n_interfaces: p.n_interfaces.floor() as u64,
            attempts_per_interface: p.attempts.floor() as u64,
            p_attempt,
            mu0,
            k_required,
            replications,
            seed,
            partial_interface: p.n_interfaces.fract(),
            partial_attempt: p.attempts.fract(),
        };
        spec.validate("sim")?;
        Ok(spec)
    }

    /// Mean number of standardized effective moves per replication.
    pub fn mean_moves(&self) -> f64 {
        (self.n_interfaces as f64 + self.partial_interface)
            * (self.attempts_per_interface as f64 + self.partial_attempt)
            * self.p_attempt
    }

    /// Independent Bernoulli/binomial blocks `(trials, probability)` whose sum
    /// is the standardized move count.
    fn blocks(&self) -> Vec<(u64, f64)> {
        let (n, m, p) = (self.n_interfaces, self.attempts_per_interface, self.p_attempt);
        let (fn_, fm) = (self.partial_interface, self.partial_attempt);
        let mut out = Vec::with_capacity(4);
        // n full interfaces × m full attempts collapse into one binomial.
        out.push((n * m, p));
        if fm > 0.0 {
            out.push((n, p * fm));
        }
        if fn_ > 0.0 {
            out.push((m, p * fn_));
            if fm > 0.0 {
                out.push((1, p * fn_ * fm));
            }
        }
        out.retain(|&(t, q)| t > 0 && q > 0.0);
        out
    }

    fn check_resources(&self) -> Result<()> {
        let trials = (self.n_interfaces as u128 + 1) * (self.attempts_per_interface as u128 + 1);
        let total = trials.checked_mul(self.replications as u128);
        match total {
            Some(t) if t <= MAX_TRIALS => Ok(()),
            _ => Err(ModelError::Resource(format!(
                "replications × interfaces × attempts exceeds {MAX_TRIALS}; split the run into batches of at most {} replications",
                (MAX_TRIALS / trials).max(1)
            ))),
        }
    }

    /// Exact probability that the simulated count reaches `k_required`.
    pub fn closed_form(&self) -> f64 {
        let k = self.k_required as usize;
        if k == 1 {
            let log_none: f64 = self
                .blocks()
                .iter()
                .map(|&(t, q)| t as f64 * (-q).ln_1p())
                .sum::<f64>()
                - self.mu0;
            return -log_none.exp_m1();
        }
        // Distribution of the count truncated to {0, .., k-1}.
        let mut dist = vec![0.0; k];
        dist[0] = 1.0;
        let convolve = |dist: &[f64], pmf: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; k];
            for (i, &a) in dist.iter().enumerate() {
                for (j, &b) in pmf.iter().enumerate().take(k - i) {
                    out[i + j] += a * b;
                }
            }
            out
        };
        for (t, q) in self.blocks() {
            dist = convolve(&dist, &binomial_head(t, q, k));
        }
        if self.mu0 > 0.0 {
            dist = convolve(&dist, &poisson_head(self.mu0, k));
        }
        (1.0 - dist.iter().sum::<f64>()).clamp(0.0, 1.0)
    }
}

fn binomial_head(n: u64, p: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    let mut term = (n as f64 * (-p).ln_1p()).exp();
    for (j, slot) in out.iter_mut().enumerate() {
        if j as u64 > n {
            break;
        }
        *slot = term;
        term *= (n - j as u64) as f64 / (j + 1) as f64 * p / (1.0 - p);
    }
    out
}

fn poisson_head(mu: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    let mut term = (-mu).exp();
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = term;
        term *= mu / (j + 1) as f64;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub estimate: f64,
    pub std_error: f64,
    pub replications: u64,
    pub successes: u64,
    pub closed_form: f64,
    /// `(estimate - closed_form) / std_error`. With a zero standard error it is
    /// zero on an exact match and infinite otherwise.
    pub z_score: f64,
}

/// Stream for replication `index`: the seed keys the generator and the index
/// selects the ChaCha stream.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Samplers {
    blocks: Vec<Binomial>,
    baseline: Option<Poisson<f64>>,
    k: u64,
}

impl Samplers {
    fn new(spec: &SimSpec) -> Result<Self> {
        let blocks = spec
            .blocks()
            .into_iter()
            .map(|(t, q)| Binomial::new(t, q).map_err(|e| ModelError::Degenerate(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let baseline = if spec.mu0 > 0.0 {
            Some(Poisson::new(spec.mu0).map_err(|e| ModelError::Degenerate(e.to_string()))?)
        } else {
            None
        };
        Ok(Samplers { blocks, baseline, k: spec.k_required as u64 })
    }

    fn replicate(&self, seed: u64, index: u64) -> bool {
        let mut rng = replication_rng(seed, index);
        let mut count: u64 = self.blocks.iter().map(|b| b.sample(&mut rng)).sum();
        if let Some(p) = &self.baseline {
            count += p.sample(&mut rng) as u64;
        }
        count >= self.k
    }
}

fn finish(spec: &SimSpec, successes: u64) -> SimResult {
    let n = spec.replications as f64;
    let estimate = successes as f64 / n;
    let std_error = (estimate * (1.0 - estimate) / n).sqrt();
    let closed_form = spec.closed_form();
    let gap = estimate - closed_form;
    let z_score = if std_error > 0.0 {
        gap / std_error
    } else if gap.abs() <= 1e-15 {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    };
    SimResult {
        estimate,
        std_error,
        replications: spec.replications,
        successes,
        closed_form,
        z_score,
    }
}

/// Runs the simulation on the current rayon pool.
pub fn simulate_within_form(spec: &SimSpec) -> Result<SimResult> {
    spec.validate("sim")?;
    spec.check_resources()?;
    let samplers = Samplers::new(spec)?;
    let successes = (0..spec.replications)
        .into_par_iter()
        .filter(|&i| samplers.replicate(spec.seed, i))
        .count() as u64;
    Ok(finish(spec, successes))
}

/// Runs replications serially in the given order of contiguous chunks;
/// used to demonstrate partition invariance.
pub fn simulate_partitioned(spec: &SimSpec, chunk_bounds: &[u64]) -> Result<SimResult> {
    spec.validate("sim")?;
    spec.check_resources()?;
    let samplers = Samplers::new(spec)?;
    let mut successes = 0;
    let mut start = 0;
    for &end in chunk_bounds.iter().chain(std::iter::once(&spec.replications)) {
        let end = end.min(spec.replications);
        successes += (start..end).filter(|&i| samplers.replicate(spec.seed, i)).count() as u64;
        start = end.max(start);
    }
    Ok(finish(spec, successes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxRow {
    pub trials: u64,
    pub p_attempt: f64,
    pub mean: f64,
    pub exact_binomial: f64,
    pub poisson_benchmark: f64,
    pub abs_gap: f64,
}

/// Exact `1 - (1-p)^{nM}` against the Poisson benchmark `1 - e^{-nMp}` for
/// each `(total trials, p)` pair.
pub fn poisson_approx_error(regimes: &[(u64, f64)]) -> Vec<ApproxRow> {
    regimes
        .iter()
        .map(|&(trials, p)| {
            let exact = -(trials as f64 * (-p).ln_1p()).exp_m1();
            let mean = trials as f64 * p;
            let poisson = -(-mean).exp_m1();
            ApproxRow {
                trials,
                p_attempt: p,
                mean,
                exact_binomial: exact,
                poisson_benchmark: poisson,
                abs_gap: (exact - poisson).abs(),
            }
        })
        .collect()
}

/// Regimes at fixed mean with `p` shrinking geometrically.
pub fn fixed_mean_regimes(mean: f64, p_values: &[f64]) -> Vec<(u64, f64)> {
    p_values
        .iter()
        .map(|&p| ((mean / p).round() as u64, p))
        .collect()
}
