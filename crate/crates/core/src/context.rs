use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::cache::PeriodCache;
use crate::error::Result;
use crate::ilrs::{Budget, IlrsSpec};
use crate::modular::{PeriodInfo, DEFAULT_STATE_CAP};

/// How the index `m` from which a composed sequence is periodic is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartConvention {
    /// Use the detected preperiod for each modulus separately.
    #[default]
    PerModulus,
    /// Use `max(s, |a0|^d)` so one start serves every prime modulus.
    Uniform,
}

/// Limits for the finite-window evidence behind "positive", "strictly
/// increasing" and "tends to infinity".
#[serde_as]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceConfig {
    /// Largest window inspected.
    #[serde_as(as = "DisplayFromStr")]
    pub max_window: u64,
    /// Strictly increasing terms required at the end of the window.
    #[serde_as(as = "DisplayFromStr")]
    pub min_run: u64,
    /// Bit budget for individual evidence terms; the window stops early once
    /// terms outgrow it.
    #[serde_as(as = "DisplayFromStr")]
    pub bits: u64,
}

impl Default for EvidenceConfig {
    fn default() -> Self {
        EvidenceConfig {
            max_window: 64,
            min_run: 4,
            bits: 1 << 16,
        }
    }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub budget: Budget,
    #[serde_as(as = "DisplayFromStr")]
    pub state_cap: u64,
    /// Search bound `B` for smallest prime factors.
    #[serde_as(as = "DisplayFromStr")]
    pub factor_bound: u64,
    /// Combine periods by product instead of lcm.
    pub strict_paper: bool,
    pub start_convention: StartConvention,
    /// Working precision in bits for root isolation.
    #[serde_as(as = "DisplayFromStr")]
    pub precision: u32,
    /// Modulus comparisons use a tolerance of `2^-tolerance_bits`.
    #[serde_as(as = "DisplayFromStr")]
    pub tolerance_bits: u32,
    pub epsilon: f64,
    pub evidence: EvidenceConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            budget: Budget::default(),
            state_cap: DEFAULT_STATE_CAP,
            factor_bound: 1_000_000,
            strict_paper: false,
            start_convention: StartConvention::PerModulus,
            precision: 256,
            tolerance_bits: 64,
            epsilon: 1e-4,
            evidence: EvidenceConfig::default(),
        }
    }
}

impl Config {
    pub fn evidence_budget(&self) -> Budget {
        Budget::new(self.budget.steps, self.evidence.bits.min(self.budget.bits))
    }
}

/// Configuration plus the shared period cache.
#[derive(Debug)]
pub struct Context {
    pub config: Config,
    cache: PeriodCache,
}

impl Default for Context {
    fn default() -> Self {
        Context::new(Config::default())
    }
}

impl Context {
    pub fn new(config: Config) -> Self {
        let cache = PeriodCache::in_memory(config.state_cap);
        Context { config, cache }
    }

    pub fn with_cache_file(config: Config, path: impl AsRef<Path>) -> Result<Self> {
        let cache = PeriodCache::open(path, config.state_cap)?;
        Ok(Context { config, cache })
    }

    pub fn period(&self, spec: &IlrsSpec, q: u64) -> Result<PeriodInfo> {
        self.cache.get_or_compute(spec, q)
    }

    pub fn cache(&self) -> &PeriodCache {
        &self.cache
    }
}
