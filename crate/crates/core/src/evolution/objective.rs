//! Reward shaping, the injection schedule, group advantages and the clipped surrogate.

use crate::experience::tokenize;

use super::EvolutionConfig;

/// Longest common subsequence length of two token sequences.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Rouge-L F1 over lowercased word tokens (punctuation stripped), in `[0, 1]`.
pub fn rouge_l_f1(candidate: &str, reference: &str) -> f64 {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs_len(&c, &r);
    if l == 0 {
        return 0.0;
    }
    let p = l as f64 / c.len() as f64;
    let rec = l as f64 / r.len() as f64;
    2.0 * p * rec / (p + rec)
}

/// Shaped reward: format bonus plus similarity-scaled accuracy, minus an error penalty.
pub fn reward(format_ok: bool, match_ok: bool, answer: &str, truth: &str, error_flag: bool, cfg: &EvolutionConfig) -> f64 {
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let sim = if match_ok { rouge_l_f1(answer, truth) } else { 0.0 };
    let penalty = if cfg.p_err_always { 1.0 } else { ind(error_flag) };
    cfg.w_f * ind(format_ok) + cfg.w_acc * (ind(match_ok) * (1.0 + sim) - penalty * cfg.p_err)
}

/// Injection probability given the best validation reward so far.
pub fn eta_schedule(r_val: f64, cfg: &EvolutionConfig) -> f64 {
    let progress = r_val.clamp(0.0, cfg.r_target) / cfg.r_target;
    cfg.eta_min.max(cfg.eta_init * (1.0 - progress))
}

/// `(r - mean) / (population std + epsilon_stab)` within one group.
pub fn group_advantages(rewards: &[f64], epsilon_stab: f64) -> Vec<f64> {
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    rewards.iter().map(|r| (r - mean) / (sd + epsilon_stab)).collect()
}

/// Upper clip width for a sample with experience mask `m`.
pub fn eps_up(masked: bool, cfg: &EvolutionConfig) -> f64 {
    if masked {
        cfg.eps_exp
    } else {
        cfg.eps_std
    }
}

/// `min(rho * A, clip(rho, 1 - eps_std, 1 + eps_up(m)) * A)`.
pub fn aac_objective(rho: f64, advantage: f64, masked: bool, cfg: &EvolutionConfig) -> f64 {
    let clipped = rho.clamp(1.0 - cfg.eps_std, 1.0 + eps_up(masked, cfg));
    (rho * advantage).min(clipped * advantage)
}

/// True when the clipped branch is the minimum, i.e. the ratio carries no gradient.
pub fn aac_is_clipped(rho: f64, advantage: f64, masked: bool, cfg: &EvolutionConfig) -> bool {
    let clipped = rho.clamp(1.0 - cfg.eps_std, 1.0 + eps_up(masked, cfg));
    clipped * advantage < rho * advantage
}
