//! Shaped reward, experience-injection schedule, group-relative advantages,
//! asymmetric clipping and training of the reference policy.

mod config;
mod dataset;
pub mod features;
mod objective;
mod policy;
mod train;

pub use config::{EtaMode, EvolutionConfig};
pub use dataset::{
    build_context, build_dataset, draw_mask, score_answer, split_indices, Context, EvolutionDataset, Frame,
    TaskInstance, World, HARD_NEGATIVES, MATCH_THRESHOLD,
};
pub use objective::{
    aac_is_clipped, aac_objective, eps_up, eta_schedule, group_advantages, lcs_len, reward, rouge_l_f1,
};
pub use policy::{
    feature, kl_divergence, log_softmax, objective_and_gradient, policy_update, Features, LinearPolicy,
    PolicySample, RolloutGroup, UpdateReport, FEATURE_DIM, FEATURE_NAMES,
};
pub use train::{expected_reward, rollout_group, train, validation_contexts, Checkpoint, TraceRow, TrainingTrace};

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),
    #[error("task {0} has no ground-truth frame")]
    GroundTruthMissing(String),
    #[error("no grid/scene loaded for grid id {0:?}")]
    MissingWorld(String),
    #[error("pose lies outside the grid")]
    OffGrid,
    #[error("gradient is not finite")]
    NonFiniteGradient,
    #[error(transparent)]
    Experience(#[from] crate::experience::ExperienceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
