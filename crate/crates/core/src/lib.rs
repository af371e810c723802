//! Regime classification and rate-region computation for the discrete
//! memoryless cognitive interference channel.
//!
//! * [`prob`]: finite joint distributions and information measures (bits).
//! * [`channel`]: channel transition tensors, file format and canned families.
//! * [`classifier`]: regime conditions decided by global gap minimization.
//! * [`regions`]: rate regions from support-function sweeps, and comparisons.
//! * [`oracle`]: brute-force grid cross-checks.

pub mod channel;
pub mod classifier;
pub mod error;
pub mod expr;
mod functional;
pub mod geometry;
pub mod optim;
pub mod oracle;
pub mod prob;
pub mod regions;

pub use channel::{random_channel, Channel, ChannelFamily};
pub use classifier::{
    check_condition, classify, saturation_sweep, ClassificationProfile, ConditionId,
    ConditionReport, RegimeCondition, Verdict, TOL_CLASSIFY,
};
pub use error::{Error, Result};
pub use geometry::{hausdorff, region_subset, RateRegion};
pub use optim::Budget;
pub use prob::{ProbTensor, VarGroup};
pub use regions::{
    active_constraints, compute_region, weighted_sum_max, ComputedRegion, RegionId, RegionSpec,
    DEFAULT_ANGLES, TOL_REGION,
};
