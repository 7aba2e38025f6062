//! Plan-in-sandbox navigation stack.
//!
//! The crate covers the whole pipeline on a 2D occupancy-grid sandbox:
//!
//! - [`gridworld`]: grids, exact distance fields, visibility and procedural mazes.
//! - [`planner`]: A* over the safe space, keypoint discretization, the step-limited follower.
//! - [`genesis`]: object placement, template task synthesis, rule synthesis and verification.
//! - [`experience`]: hashed embeddings and an exact top-k rule store.
//! - [`evolution`]: shaped reward, injection schedule, group advantages, asymmetric clipping
//!   and training of a linear-softmax reference policy.
//! - [`navigation`]: memory and frontier buffers and the episode loop.
//! - [`metrics`]: SR/SPL and the judge-scored variants.
//! - [`cli`]: the `sage` command-line front end.

pub mod cli;
pub mod experience;
pub mod evolution;
pub mod genesis;
pub mod gridworld;
pub mod metrics;
pub mod navigation;
pub mod planner;
pub mod seed;
