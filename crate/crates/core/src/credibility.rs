//! Analysis of credibility: sceptical priors, Box prior-data conflict tests
//! and p-values for intrinsic and extrinsic credibility.
//!
//! Notation used in the docs below: an internal estimate `θ̂` with standard
//! error `σ` and statistic `t = θ̂/σ`; an external estimate `θ̂₀` with
//! `σ₀` and `t₀`; `z = z_{α/2}` the two-sided critical value at level `α`;
//! `c = σ²/σ₀²` the variance ratio.
//!
//! All verdicts assume the effect is oriented positively. Negative internal
//! results are reflected (together with the external estimate) before any
//! formula sees them, so `(L, U) = (−0.5, −0.1)` behaves exactly like
//! `(0.1, 0.5)`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::effects::{ConfidenceInterval, EffectEstimate};
use crate::error::{ensure_finite, ensure_open_unit, Error, Result};
use crate::numerics::{find_root_monotone, two_sided_critical, two_sided_tail, Tolerance};

/// Cut-point `d = 3 + 2√2` for the credibility ratio.
pub const CREDIBILITY_RATIO_BOUND: f64 = 5.828_427_124_746_19;

/// Multiplier of `z` in Matthews' intrinsic credibility rule `t = 1.272·z`.
pub const MATTHEWS_INTRINSIC_FACTOR: f64 = 1.272;

/// Zero-mean normal prior that renders an estimate just non-significant at
/// level `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScepticalPrior {
    variance: f64,
    alpha: f64,
    sceptical_limit: f64,
}

impl ScepticalPrior {
    /// Prior derived from an estimate; the variance is
    /// `τ² = σ² / (t²/z² − 1)`.
    pub fn from_estimate(est: &EffectEstimate, alpha: f64) -> Result<Self> {
        let variance = sceptical_variance(est, alpha)?;
        let z = two_sided_critical(alpha);
        Ok(Self {
            variance,
            alpha,
            sceptical_limit: z * variance.sqrt(),
        })
    }

    /// Prior derived from a significant interval at the interval's own level.
    pub fn from_ci(ci: &ConfidenceInterval) -> Result<Self> {
        let limit = sceptical_limit(ci)?;
        let alpha = ci.alpha();
        let z = two_sided_critical(alpha);
        Ok(Self {
            variance: (limit / z).powi(2),
            alpha,
            sceptical_limit: limit,
        })
    }

    /// Prior variance τ².
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Half-width `S` of the prior's equi-tailed `1 − alpha` credible interval.
    pub fn sceptical_limit(&self) -> f64 {
        self.sceptical_limit
    }

    /// The critical prior interval `[−S, S]`.
    pub fn critical_interval(&self) -> (f64, f64) {
        (-self.sceptical_limit, self.sceptical_limit)
    }
}

/// `S = (U − L)² / (4√(UL))` for an interval that excludes zero.
pub fn sceptical_limit(ci: &ConfidenceInterval) -> Result<f64> {
    let (lower, upper) = ci.positive_limits()?;
    Ok((upper - lower).powi(2) / (4.0 * (upper * lower).sqrt()))
}

/// Variance of the sceptical prior at level `alpha`.
pub fn sceptical_variance(est: &EffectEstimate, alpha: f64) -> Result<f64> {
    ensure_open_unit("alpha", alpha)?;
    let z = two_sided_critical(alpha);
    let excess = (est.t_statistic() / z).powi(2) - 1.0;
    if excess <= 0.0 {
        return Err(Error::NotSignificant {
            alpha,
            detail: format!("|t| = {} does not exceed z = {z}", est.t_statistic().abs()),
        });
    }
    Ok(est.variance() / excess)
}

/// A normal test statistic together with its two-sided tail area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailTest {
    pub statistic: f64,
    pub tail: f64,
}

impl TailTest {
    fn from_statistic(statistic: f64) -> Self {
        Self {
            statistic,
            tail: two_sided_tail(statistic),
        }
    }
}

/// Box's prior-predictive check of `external` against the sceptical prior:
/// `t_Box = θ̂₀ / √(τ² + σ₀²)` with tail `Pr(χ²(1) ≥ t_Box²)`.
///
/// Small tails signal conflict between the prior and the external data,
/// i.e. evidence for credibility.
pub fn box_test(external: &EffectEstimate, prior: &ScepticalPrior) -> TailTest {
    TailTest::from_statistic(
        external.theta_hat() / (prior.variance() + external.variance()).sqrt(),
    )
}

/// Compatibility of two studies, `(θ̂₀ − θ̂) / √(σ² + σ₀²)`.
pub fn compatibility_test(internal: &EffectEstimate, external: &EffectEstimate) -> TailTest {
    TailTest::from_statistic(
        (external.theta_hat() - internal.theta_hat())
            / (internal.variance() + external.variance()).sqrt(),
    )
}

/// Variance ratio `c = σ² / σ₀²`.
pub fn variance_ratio(internal: &EffectEstimate, external: &EffectEstimate) -> f64 {
    internal.variance() / external.variance()
}

/// p-value for extrinsic credibility.
///
/// Returns the level `alpha` at which
/// `(t₀²/z² − 1)(t²/z² − 1) = c`. The left side is strictly decreasing in
/// `z` on `(0, min(|t|, |t₀|))`, running from `+∞` down to zero, so the
/// equation has exactly one root there; it is located by bisection in `z`
/// and mapped back to `alpha = 2Φ(−z)`. The result always exceeds both
/// ordinary p-values and is symmetric in `t` and `t₀`.
pub fn extrinsic_p(t: f64, t0: f64, c: f64) -> Result<f64> {
    ensure_finite("t", t)?;
    ensure_finite("t0", t0)?;
    ensure_finite("c", c)?;
    if c <= 0.0 {
        return Err(Error::Domain(format!("variance ratio c must be positive, got {c}")));
    }
    if t == 0.0 || t0 == 0.0 {
        return Err(Error::NoSolution(
            "a zero test statistic admits no credible level".into(),
        ));
    }
    let (t2, t02) = (t * t, t0 * t0);
    let z_max = t.abs().min(t0.abs());
    let objective = |z: f64| {
        let z2 = z * z;
        (t02 / z2 - 1.0) * (t2 / z2 - 1.0) - c
    };

    let mut z_lo = 0.5 * z_max;
    while objective(z_lo) <= 0.0 {
        z_lo *= 0.5;
    }
    let tol = Tolerance::new(z_max * 1e-13, 200)?;
    let z = find_root_monotone(objective, z_lo, z_max, tol)?;
    // The root lies strictly below z_max; when the gap in alpha is smaller
    // than f64 resolution, round up to the next float above max(p, p0).
    Ok(two_sided_tail(z).max(two_sided_tail(z_max).next_up()))
}

/// [`extrinsic_p`] for two estimates, with `c` taken from their variances.
pub fn extrinsic_p_for(internal: &EffectEstimate, external: &EffectEstimate) -> Result<f64> {
    extrinsic_p(
        internal.t_statistic(),
        external.t_statistic(),
        variance_ratio(internal, external),
    )
}

/// Matthews' extrinsic check `(t₀²/z²)(t²/z² − 1) ≥ c`, equivalent to the
/// external estimate lying beyond the sceptical limit.
pub fn matthews_extrinsic_credible(t: f64, t0: f64, c: f64, alpha: f64) -> Result<bool> {
    ensure_open_unit("alpha", alpha)?;
    ensure_finite("t0", t0)?;
    ensure_finite("t", t)?;
    let z2 = two_sided_critical(alpha).powi(2);
    let excess = t * t / z2 - 1.0;
    if excess <= 0.0 {
        return Err(Error::NotSignificant {
            alpha,
            detail: format!("internal |t| = {} is not significant", t.abs()),
        });
    }
    Ok(t0 * t0 / z2 * excess >= c)
}

/// Largest two-sided p-value that is intrinsically credible at level
/// `alpha`: `2{1 − Φ(√2·z)}`.
pub fn intrinsic_threshold(alpha: f64) -> Result<f64> {
    ensure_open_unit("alpha", alpha)?;
    Ok(two_sided_tail(SQRT_2 * two_sided_critical(alpha)))
}

/// Matthews' intrinsic threshold `2{1 − Φ(1.272·z)}`.
pub fn matthews_intrinsic_threshold(alpha: f64) -> Result<f64> {
    ensure_open_unit("alpha", alpha)?;
    Ok(two_sided_tail(
        MATTHEWS_INTRINSIC_FACTOR * two_sided_critical(alpha),
    ))
}

/// p-value for intrinsic credibility, `2{1 − Φ(t/√2)}` with
/// `t = Φ⁻¹(1 − p/2)`.
pub fn intrinsic_p(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("p-value must lie in (0, 1], got {p}")));
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    Ok(intrinsic_p_from_t(two_sided_critical(p)))
}

/// Intrinsic p-value straight from a test statistic; avoids the round trip
/// through `p` which underflows for large `|t|`.
pub fn intrinsic_p_from_t(t: f64) -> f64 {
    two_sided_tail(t / SQRT_2)
}

/// Credibility ratio `U/L` (or `L/U` for negative intervals) and whether it
/// is at most `3 + 2√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibilityRatio {
    pub ratio: f64,
    pub credible: bool,
}

pub fn credibility_ratio(ci: &ConfidenceInterval) -> Result<CredibilityRatio> {
    let (lower, upper) = ci.positive_limits()?;
    let ratio = upper / lower;
    Ok(CredibilityRatio {
        ratio,
        credible: ratio <= CREDIBILITY_RATIO_BOUND,
    })
}

/// `τ² ≤ σ²`; false when the estimate is not significant at `alpha`.
pub fn intrinsically_credible_by_variance(est: &EffectEstimate, alpha: f64) -> Result<bool> {
    match sceptical_variance(est, alpha) {
        Ok(tau2) => Ok(tau2 <= est.variance()),
        Err(Error::NotSignificant { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Whether a claim holds at confidence level `level = 1 − alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelVerdict {
    pub level: f64,
    pub credible: bool,
}

/// Summary of a credibility analysis.
///
/// Optional fields serialize as `null` when they do not apply: without
/// external data there is no `p_extrinsic`; without significance at the
/// working level there is no sceptical prior and hence no `p_box` and no
/// credibility ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibilityReport {
    pub alpha: f64,
    pub p: f64,
    pub p_intrinsic: f64,
    pub p_extrinsic: Option<f64>,
    pub p_box: Option<f64>,
    pub intrinsically_credible_at: Option<LevelVerdict>,
    pub credibility_ratio: Option<f64>,
    pub ratio_credible: Option<bool>,
}

impl CredibilityReport {
    /// Analysis of an internal estimate at working level `alpha`, optionally
    /// against external evidence.
    pub fn analyse(
        internal: &EffectEstimate,
        external: Option<&EffectEstimate>,
        alpha: f64,
    ) -> Result<Self> {
        ensure_open_unit("alpha", alpha)?;
        let (internal, external) = oriented(internal, external);
        let t = internal.t_statistic();

        let p_extrinsic = match external {
            Some(ext) => match extrinsic_p_for(&internal, &ext) {
                Ok(p_e) => Some(p_e),
                Err(Error::NoSolution(_)) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };

        let prior = match ScepticalPrior::from_estimate(&internal, alpha) {
            Ok(prior) => Some(prior),
            Err(Error::NotSignificant { .. }) => None,
            Err(e) => return Err(e),
        };
        let p_box = match (external, prior) {
            (Some(ext), Some(prior)) => Some(box_test(&ext, &prior).tail),
            _ => None,
        };
        let ratio = match prior {
            Some(_) => Some(credibility_ratio(&internal.to_ci(1.0 - alpha)?)?),
            None => None,
        };

        Ok(Self {
            alpha,
            p: internal.p_value(),
            p_intrinsic: intrinsic_p_from_t(t),
            p_extrinsic,
            p_box,
            intrinsically_credible_at: Some(LevelVerdict {
                level: 1.0 - alpha,
                credible: intrinsically_credible_by_variance(&internal, alpha)?,
            }),
            credibility_ratio: ratio.map(|r| r.ratio),
            ratio_credible: ratio.map(|r| r.credible),
        })
    }

    /// Analysis from a bare two-sided p-value.
    pub fn from_p_value(p: f64, alpha: f64) -> Result<Self> {
        let p_intrinsic = intrinsic_p(p)?;
        let threshold = intrinsic_threshold(alpha)?;
        Ok(Self {
            alpha,
            p,
            p_intrinsic,
            p_extrinsic: None,
            p_box: None,
            intrinsically_credible_at: Some(LevelVerdict {
                level: 1.0 - alpha,
                credible: p <= threshold,
            }),
            credibility_ratio: None,
            ratio_credible: None,
        })
    }
}

/// Reflects both estimates when the internal one is negative.
pub(crate) fn oriented(
    internal: &EffectEstimate,
    external: Option<&EffectEstimate>,
) -> (EffectEstimate, Option<EffectEstimate>) {
    if internal.theta_hat() < 0.0 {
        (internal.reflected(), external.map(EffectEstimate::reflected))
    } else {
        (*internal, external.copied())
    }
}
