//! Linear-softmax reference policy over a discrete candidate set.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::objective::{aac_is_clipped, aac_objective};
use super::{EvolutionConfig, EvolutionError};

pub const FEATURE_DIM: usize = 8;
pub type Features = [f64; FEATURE_DIM];

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "travel_cost",
    "novelty",
    "experience_match",
    "heading_alignment",
    "is_memory",
    "query_match",
    "object_count",
    "bias",
];

/// Feature slots, for readability at call sites.
pub mod feature {
    pub const TRAVEL_COST: usize = 0;
    pub const NOVELTY: usize = 1;
    pub const EXPERIENCE_MATCH: usize = 2;
    pub const HEADING_ALIGNMENT: usize = 3;
    pub const IS_MEMORY: usize = 4;
    pub const QUERY_MATCH: usize = 5;
    pub const OBJECT_COUNT: usize = 6;
    pub const BIAS: usize = 7;
}

fn dot(w: &Features, x: &Features) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Numerically stable log-softmax of `w·x / temperature` over the candidates.
pub fn log_softmax(w: &Features, feats: &[Features], temperature: f64) -> Vec<f64> {
    let logits: Vec<f64> = feats.iter().map(|x| dot(w, x) / temperature).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

/// `KL(softmax(w) || softmax(w_ref))` over the candidate set.
pub fn kl_divergence(w: &Features, w_ref: &Features, feats: &[Features], temperature: f64) -> f64 {
    let lp = log_softmax(w, feats, temperature);
    let lq = log_softmax(w_ref, feats, temperature);
    lp.iter().zip(&lq).map(|(p, q)| p.exp() * (p - q)).sum::<f64>().max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPolicy {
    pub w: Features,
    /// Frozen reference weights for the KL penalty.
    pub w_ref: Features,
    pub temperature: f64,
}

impl LinearPolicy {
    pub fn new(w: Features, temperature: f64) -> Self {
        Self { w, w_ref: w, temperature }
    }

    pub fn zeros(temperature: f64) -> Self {
        Self::new([0.0; FEATURE_DIM], temperature)
    }

    pub fn scores(&self, feats: &[Features]) -> Vec<f64> {
        feats.iter().map(|x| dot(&self.w, x)).collect()
    }

    pub fn log_probs(&self, feats: &[Features]) -> Vec<f64> {
        log_softmax(&self.w, feats, self.temperature)
    }

    pub fn probs(&self, feats: &[Features]) -> Vec<f64> {
        self.log_probs(feats).into_iter().map(f64::exp).collect()
    }

    pub fn kl(&self, feats: &[Features]) -> f64 {
        kl_divergence(&self.w, &self.w_ref, feats, self.temperature)
    }

    /// Inverse-CDF draw from the action distribution.
    pub fn sample(&self, feats: &[Features], rng: &mut impl Rng) -> usize {
        let probs = self.probs(feats);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    /// Highest-scoring candidate; ties go to the lowest index.
    pub fn argmax(&self, feats: &[Features]) -> Option<usize> {
        let scores = self.scores(feats);
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in scores.into_iter().enumerate() {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        best.map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySample {
    pub action: usize,
    pub answer_text: String,
    pub old_log_prob: f64,
    pub reward: f64,
    pub advantage: f64,
}

/// `G` samples drawn for one input under one experience mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub task_index: usize,
    pub masked: bool,
    pub features: Vec<Features>,
    pub samples: Vec<PolicySample>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub objective: f64,
    pub mean_kl: f64,
    pub grad_norm: f64,
    /// Fraction of experience-augmented samples whose ratio was clipped.
    pub clip_frac_exp: f64,
    pub clip_frac_std: f64,
    /// Largest ratio among augmented samples with positive advantage.
    pub max_rho_exp: f64,
}

/// Objective (mean clipped surrogate minus `beta * mean KL`) and its gradient in `w`.
pub fn objective_and_gradient(
    w: &Features,
    w_ref: &Features,
    temperature: f64,
    batch: &[RolloutGroup],
    cfg: &EvolutionConfig,
) -> (f64, Features, UpdateReport) {
    let mut grad = [0.0; FEATURE_DIM];
    let mut surrogate = 0.0;
    let mut kl_total = 0.0;
    let mut n_samples = 0usize;
    let (mut n_exp, mut c_exp, mut n_std, mut c_std) = (0usize, 0usize, 0usize, 0usize);
    let mut max_rho_exp: f64 = 0.0;
    let n_groups = batch.len().max(1) as f64;

    let mut sample_grad = [0.0; FEATURE_DIM];
    for g in batch {
        let lp = log_softmax(w, &g.features, temperature);
        let lq = log_softmax(w_ref, &g.features, temperature);
        let probs: Vec<f64> = lp.iter().map(|l| l.exp()).collect();
        let mut mean_feat = [0.0; FEATURE_DIM];
        for (p, x) in probs.iter().zip(&g.features) {
            for k in 0..FEATURE_DIM {
                mean_feat[k] += p * x[k];
            }
        }
        for s in &g.samples {
            let rho = (lp[s.action] - s.old_log_prob).exp();
            surrogate += aac_objective(rho, s.advantage, g.masked, cfg);
            n_samples += 1;
            let clipped = aac_is_clipped(rho, s.advantage, g.masked, cfg);
            if g.masked {
                n_exp += 1;
                c_exp += clipped as usize;
                if s.advantage > 0.0 {
                    max_rho_exp = max_rho_exp.max(rho);
                }
            } else {
                n_std += 1;
                c_std += clipped as usize;
            }
            if !clipped {
                let x = &g.features[s.action];
                for k in 0..FEATURE_DIM {
                    sample_grad[k] += s.advantage * rho * (x[k] - mean_feat[k]) / temperature;
                }
            }
        }
        // d KL / dw = (1/T) sum_c p_c (x_c - mean) (log p_c - log q_c)
        let mut kl = 0.0;
        for (c, x) in g.features.iter().enumerate() {
            let diff = lp[c] - lq[c];
            kl += probs[c] * diff;
            for k in 0..FEATURE_DIM {
                grad[k] -= cfg.beta_kl * probs[c] * (x[k] - mean_feat[k]) * diff / temperature / n_groups;
            }
        }
        kl_total += kl;
    }
    let ns = n_samples.max(1) as f64;
    for k in 0..FEATURE_DIM {
        grad[k] += sample_grad[k] / ns;
    }
    let mean_kl = kl_total / n_groups;
    let objective = surrogate / ns - cfg.beta_kl * mean_kl;
    let frac = |c: usize, n: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let report = UpdateReport {
        objective,
        mean_kl,
        grad_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        clip_frac_exp: frac(c_exp, n_exp),
        clip_frac_std: frac(c_std, n_std),
        max_rho_exp,
    };
    (objective, grad, report)
}

/// One gradient-ascent step on the clipped, KL-regularized objective.
pub fn policy_update(
    policy: &mut LinearPolicy,
    batch: &[RolloutGroup],
    cfg: &EvolutionConfig,
) -> Result<UpdateReport, EvolutionError> {
    let (_, grad, report) = objective_and_gradient(&policy.w, &policy.w_ref, policy.temperature, batch, cfg);
    if grad.iter().any(|g| !g.is_finite()) || !report.objective.is_finite() {
        return Err(EvolutionError::NonFiniteGradient);
    }
    for (w, g) in policy.w.iter_mut().zip(grad) {
        *w += cfg.learning_rate * g;
    }
    Ok(report)
}
