//! Reverse-Bayes analysis of credibility.
//!
//! A significant result is challenged with the sceptical prior: the
//! zero-mean normal prior that would just make it non-significant. The
//! crate computes that prior from an estimate or confidence interval,
//! measures conflict with it by Box's prior-predictive tail probability, and
//! turns the conflict into p-values for intrinsic credibility (judged on the
//! study's own data) and extrinsic credibility (judged against external
//! evidence). [`nulldist`] characterizes both p-values when there is no
//! effect.
//!
//! ```
//! use ancred::{CredibilityReport, EffectEstimate, TwoByTwoTable};
//!
//! let table = TwoByTwoTable::new(102, 288, 75, 277).unwrap();
//! let internal = EffectEstimate::from_two_by_two(&table).unwrap();
//! let report = CredibilityReport::analyse(&internal, None, 0.05).unwrap();
//! assert!((report.p_intrinsic - 0.134).abs() < 1e-3);
//! ```

pub mod credibility;
pub mod effects;
pub mod error;
pub mod nulldist;
pub mod numerics;

pub use credibility::{
    box_test, compatibility_test, credibility_ratio, extrinsic_p, extrinsic_p_for,
    intrinsic_p, intrinsic_p_from_t, intrinsic_threshold, intrinsically_credible_by_variance,
    matthews_extrinsic_credible, matthews_intrinsic_threshold, sceptical_limit,
    sceptical_variance, variance_ratio, CredibilityRatio, CredibilityReport, LevelVerdict,
    ScepticalPrior, TailTest, CREDIBILITY_RATIO_BOUND,
};
pub use effects::{ConfidenceInterval, EffectEstimate, TwoByTwoTable};
pub use error::{Error, Result, TableCell};
pub use nulldist::{Histogram, NullDraw, SampleSet, SimulationConfig};
pub use numerics::{
    chi_sq1_tail, find_root_monotone, std_normal_cdf, std_normal_pdf, std_normal_quantile,
    Tolerance,
};
