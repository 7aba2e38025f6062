use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::experience::{ExperienceStore, RetrievalMode};
use crate::seed::derive_seed;

use super::dataset::{build_context, draw_mask, Context, EvolutionDataset};
use super::objective::{eta_schedule, group_advantages};
use super::policy::{policy_update, Features, LinearPolicy, PolicySample, RolloutGroup, UpdateReport};
use super::{EtaMode, EvolutionConfig, EvolutionError};

/// Stream tags for seed derivation.
const STREAM_ROLLOUT: u64 = 1;
const STREAM_VALIDATION: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub eta: f64,
    pub r_val: f64,
    pub mean_reward: f64,
    pub mean_kl: f64,
    pub clip_frac_exp: f64,
    pub clip_frac_std: f64,
    pub grad_norm: f64,
    /// Largest ratio seen on a positive-advantage augmented sample this step (not written to CSV).
    #[serde(skip)]
    pub max_rho_exp: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub rows: Vec<TraceRow>,
    /// Validation reward of the final policy.
    pub final_validation: f64,
}

impl TrainingTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EvolutionError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "step",
            "eta",
            "r_val",
            "mean_reward",
            "mean_kl",
            "clip_frac_exp",
            "clip_frac_std",
            "grad_norm",
        ])?;
        for r in &self.rows {
            w.serialize((
                r.step,
                r.eta,
                r.r_val,
                r.mean_reward,
                r.mean_kl,
                r.clip_frac_exp,
                r.clip_frac_std,
                r.grad_norm,
            ))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<TraceRow>, EvolutionError> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in r.deserialize() {
            rows.push(rec?);
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub w: Features,
    pub w_ref: Features,
    pub temperature: f64,
    pub step: usize,
    pub cfg_hash: String,
}

impl Checkpoint {
    pub fn new(policy: &LinearPolicy, step: usize, cfg: &EvolutionConfig) -> Self {
        Self {
            w: policy.w,
            w_ref: policy.w_ref,
            temperature: policy.temperature,
            step,
            cfg_hash: cfg.hash(),
        }
    }

    pub fn policy(&self) -> LinearPolicy {
        LinearPolicy {
            w: self.w,
            w_ref: self.w_ref,
            temperature: self.temperature,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EvolutionError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvolutionError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Fixed validation contexts: one per validation task and mask value.
pub fn validation_contexts(
    data: &EvolutionDataset,
    val: &[usize],
    store: &ExperienceStore,
    cfg: &EvolutionConfig,
) -> Result<Vec<Context>, EvolutionError> {
    let mut out = Vec::with_capacity(2 * val.len());
    for &i in val {
        for masked in [false, true] {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[STREAM_VALIDATION, i as u64]));
            out.push(build_context(
                &data.instances[i],
                i,
                cfg.frames,
                store,
                masked,
                cfg.retrieval_k,
                RetrievalMode::Matched,
                &mut rng,
            )?);
        }
    }
    Ok(out)
}

/// Exact expected reward of the policy, averaged over contexts.
pub fn expected_reward(policy: &LinearPolicy, contexts: &[Context]) -> f64 {
    if contexts.is_empty() {
        return 0.0;
    }
    let total: f64 = contexts
        .iter()
        .map(|c| policy.probs(&c.features).iter().zip(&c.rewards).map(|(p, r)| p * r).sum::<f64>())
        .sum();
    total / contexts.len() as f64
}

/// Samples `G` actions for one context and scores them.
pub fn rollout_group(
    policy: &LinearPolicy,
    ctx: Context,
    cfg: &EvolutionConfig,
    rng: &mut ChaCha8Rng,
) -> RolloutGroup {
    let log_probs = policy.log_probs(&ctx.features);
    let actions: Vec<usize> = (0..cfg.group_size).map(|_| policy.sample(&ctx.features, rng)).collect();
    let rewards: Vec<f64> = actions.iter().map(|&a| ctx.rewards[a]).collect();
    let adv = group_advantages(&rewards, cfg.epsilon_stab);
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let std = (rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    RolloutGroup {
        task_index: ctx.task_index,
        masked: ctx.masked,
        samples: actions
            .iter()
            .zip(rewards.iter().zip(&adv))
            .map(|(&a, (&r, &ad))| PolicySample {
                action: a,
                answer_text: ctx.answers[a].clone(),
                old_log_prob: log_probs[a],
                reward: r,
                advantage: ad,
            })
            .collect(),
        features: ctx.features,
        mean,
        std,
    }
}

/// Trains `policy` in place. `store` should hold rules from the training split only.
pub fn train(
    data: &EvolutionDataset,
    train_idx: &[usize],
    val_idx: &[usize],
    store: &ExperienceStore,
    policy: &mut LinearPolicy,
    cfg: &EvolutionConfig,
) -> Result<TrainingTrace, EvolutionError> {
    cfg.validate()?;
    if train_idx.iter().chain(val_idx).any(|&i| i >= data.instances.len()) {
        return Err(EvolutionError::InvalidConfig("split index out of range".into()));
    }
    if train_idx.iter().any(|i| val_idx.contains(i)) {
        return Err(EvolutionError::InvalidConfig("train and validation splits overlap".into()));
    }
    let val_contexts = validation_contexts(data, val_idx, store, cfg)?;
    let mut trace = TrainingTrace::default();
    if cfg.training_steps > 0 && train_idx.is_empty() {
        return Err(EvolutionError::InvalidConfig("empty training split".into()));
    }
    let mut best_val: Option<f64> = None;

    for step in 0..cfg.training_steps {
        let r_val = best_val.unwrap_or(0.0);
        let eta = match cfg.eta_mode {
            EtaMode::Fixed(p) => p,
            EtaMode::Dynamic => eta_schedule(r_val, cfg),
        };
        let mut batch = Vec::with_capacity(cfg.batch_size);
        for b in 0..cfg.batch_size {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[STREAM_ROLLOUT, step as u64, b as u64]));
            let ti = train_idx[rand::Rng::gen_range(&mut rng, 0..train_idx.len())];
            let masked = draw_mask(eta, &mut rng);
            let ctx = build_context(
                &data.instances[ti],
                ti,
                cfg.frames,
                store,
                masked,
                cfg.retrieval_k,
                RetrievalMode::Matched,
                &mut rng,
            )?;
            batch.push(rollout_group(policy, ctx, cfg, &mut rng));
        }
        let mean_reward = batch.iter().map(|g| g.mean).sum::<f64>() / batch.len() as f64;

        let mut last = UpdateReport::default();
        let (mut clip_exp, mut clip_std, mut max_rho) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..cfg.update_epochs.max(1) {
            last = policy_update(policy, &batch, cfg)?;
            clip_exp = clip_exp.max(last.clip_frac_exp);
            clip_std = clip_std.max(last.clip_frac_std);
            max_rho = max_rho.max(last.max_rho_exp);
        }

        if (step + 1) % cfg.validation_interval == 0 {
            let v = expected_reward(policy, &val_contexts);
            best_val = Some(best_val.map_or(v, |b| b.max(v)));
        }
        trace.rows.push(TraceRow {
            step,
            eta,
            r_val: best_val.unwrap_or(0.0),
            mean_reward,
            mean_kl: last.mean_kl,
            clip_frac_exp: clip_exp,
            clip_frac_std: clip_std,
            grad_norm: last.grad_norm,
            max_rho_exp: max_rho,
        });
    }
    trace.final_validation = expected_reward(policy, &val_contexts);
    Ok(trace)
}
