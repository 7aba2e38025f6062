use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::EvolutionError;

/// How the injection probability is chosen each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EtaMode {
    /// Refreshed from the best validation reward.
    Dynamic,
    Fixed(f64),
}

impl FromStr for EtaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "dynamic" {
            return Ok(EtaMode::Dynamic);
        }
        let v = s
            .strip_prefix("fixed:")
            .ok_or_else(|| format!("expected `dynamic` or `fixed:<p>`, got {s:?}"))?;
        let p: f64 = v.parse().map_err(|e| format!("bad probability {v:?}: {e}"))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("probability {p} outside [0, 1]"));
        }
        Ok(EtaMode::Fixed(p))
    }
}

impl fmt::Display for EtaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaMode::Dynamic => f.write_str("dynamic"),
            EtaMode::Fixed(p) => write!(f, "fixed:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub w_f: f64,
    pub w_acc: f64,
    pub p_err: f64,
    /// Apply the error penalty on every sample instead of only on errors.
    pub p_err_always: bool,
    pub eta_init: f64,
    pub eta_min: f64,
    pub r_target: f64,
    pub eta_mode: EtaMode,
    pub eps_std: f64,
    pub eps_exp: f64,
    pub beta_kl: f64,
    pub group_size: usize,
    /// Inputs (groups) per training step.
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Gradient steps per batch; every one reuses the rollout-time log-probabilities.
    pub update_epochs: usize,
    pub temperature: f64,
    /// Discount factor, kept for completeness; single-decision updates do not use it.
    pub gamma: f64,
    pub validation_interval: usize,
    pub training_steps: usize,
    pub frames: usize,
    pub retrieval_k: usize,
    pub epsilon_stab: f64,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            w_f: 0.1,
            w_acc: 1.0,
            p_err: 0.5,
            p_err_always: false,
            eta_init: 0.8,
            eta_min: 0.0,
            r_target: 1.5,
            eta_mode: EtaMode::Dynamic,
            eps_std: 0.2,
            eps_exp: 1.0,
            beta_kl: 0.01,
            group_size: 5,
            batch_size: 32,
            learning_rate: 0.01,
            update_epochs: 4,
            temperature: 1.0,
            gamma: 1.0,
            validation_interval: 5,
            training_steps: 150,
            frames: 4,
            retrieval_k: 1,
            epsilon_stab: 1e-8,
            seed: 1,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |msg: &str| Err(EvolutionError::InvalidConfig(msg.to_string()));
        if !(0.0 <= self.eta_min && self.eta_min <= self.eta_init && self.eta_init <= 1.0) {
            return bad("need 0 <= eta_min <= eta_init <= 1");
        }
        if !(0.0 < self.eps_std && self.eps_std <= self.eps_exp) {
            return bad("need 0 < eps_std <= eps_exp");
        }
        if self.eps_std >= 1.0 {
            return bad("eps_std must be below 1");
        }
        if self.group_size < 2 {
            return bad("group size must be at least 2");
        }
        if self.r_target <= 0.0 {
            return bad("r_target must be positive");
        }
        if let EtaMode::Fixed(p) = self.eta_mode {
            if !(0.0..=1.0).contains(&p) {
                return bad("fixed eta outside [0, 1]");
            }
        }
        if self.frames < 2 || self.batch_size == 0 || self.retrieval_k == 0 || self.validation_interval == 0 {
            return bad("frames >= 2, batch_size >= 1, retrieval_k >= 1 and validation_interval >= 1 required");
        }
        if !(self.temperature > 0.0 && self.learning_rate.is_finite() && self.epsilon_stab > 0.0) {
            return bad("temperature and epsilon_stab must be positive, learning rate finite");
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
