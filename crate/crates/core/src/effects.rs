//! Study results on the additive (log) scale.
//!
//! Everything downstream works with an estimate and its standard error.
//! Results reported as 2×2 event counts or as a symmetric confidence
//! interval are converted here. Ratio-scale inputs (relative risks) must be
//! log-transformed by the caller before they reach this module.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_open_unit, Error, Result, TableCell};
use crate::numerics::{two_sided_critical, two_sided_tail};

/// Point estimate and standard error of an effect on the additive scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    theta_hat: f64,
    se: f64,
}

impl EffectEstimate {
    pub fn new(theta_hat: f64, se: f64) -> Result<Self> {
        ensure_finite("theta_hat", theta_hat)?;
        ensure_finite("se", se)?;
        if se <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "standard error must be positive, got {se}"
            )));
        }
        Ok(Self { theta_hat, se })
    }

    /// Wald estimate of the log relative risk, treatment over control.
    ///
    /// No continuity correction: a zero cell is rejected.
    pub fn from_two_by_two(table: &TwoByTwoTable) -> Result<Self> {
        let cells = [
            (table.events_treat, TableCell::TreatmentEvents),
            (table.n_treat - table.events_treat, TableCell::TreatmentNonEvents),
            (table.events_ctrl, TableCell::ControlEvents),
            (table.n_ctrl - table.events_ctrl, TableCell::ControlNonEvents),
        ];
        if let Some(&(_, cell)) = cells.iter().find(|(count, _)| *count == 0) {
            return Err(Error::DegenerateTable(cell));
        }

        let a = table.events_treat as f64;
        let n1 = table.n_treat as f64;
        let b = table.events_ctrl as f64;
        let n2 = table.n_ctrl as f64;
        let theta_hat = ((a / n1) / (b / n2)).ln();
        let se = ((1.0 / a - 1.0 / n1) + (1.0 / b - 1.0 / n2)).sqrt();
        Self::new(theta_hat, se)
    }

    /// Recovers estimate and standard error from a normal-theory interval.
    pub fn from_ci(ci: &ConfidenceInterval) -> Self {
        let z = two_sided_critical(1.0 - ci.level);
        Self {
            theta_hat: 0.5 * (ci.lower + ci.upper),
            se: (ci.upper - ci.lower) / (2.0 * z),
        }
    }

    pub fn theta_hat(&self) -> f64 {
        self.theta_hat
    }

    pub fn se(&self) -> f64 {
        self.se
    }

    pub fn variance(&self) -> f64 {
        self.se * self.se
    }

    /// `theta_hat ± z·se` at the given confidence level.
    pub fn to_ci(&self, level: f64) -> Result<ConfidenceInterval> {
        ensure_open_unit("confidence level", level)?;
        let half_width = two_sided_critical(1.0 - level) * self.se;
        ConfidenceInterval::new(self.theta_hat - half_width, self.theta_hat + half_width, level)
    }

    /// Wald statistic `theta_hat / se`.
    pub fn t_statistic(&self) -> f64 {
        self.theta_hat / self.se
    }

    /// Two-sided p-value for the null of no effect.
    pub fn p_value(&self) -> f64 {
        two_sided_tail(self.t_statistic())
    }

    /// The same estimate with its sign flipped.
    pub fn reflected(&self) -> Self {
        Self {
            theta_hat: -self.theta_hat,
            se: self.se,
        }
    }
}

/// Symmetric confidence interval `[lower, upper]` at confidence `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    lower: f64,
    upper: f64,
    level: f64,
}

impl ConfidenceInterval {
    pub fn new(lower: f64, upper: f64, level: f64) -> Result<Self> {
        ensure_finite("lower", lower)?;
        ensure_finite("upper", upper)?;
        if lower >= upper {
            return Err(Error::InvalidArgument(format!(
                "interval requires lower < upper, got ({lower}, {upper})"
            )));
        }
        ensure_open_unit("confidence level", level)?;
        Ok(Self { lower, upper, level })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Confidence level `1 − alpha`.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.level
    }

    pub fn to_estimate(&self) -> EffectEstimate {
        EffectEstimate::from_ci(self)
    }

    /// True when the interval excludes zero.
    pub fn is_significant(&self) -> bool {
        self.lower * self.upper > 0.0
    }

    /// The interval in positive orientation: `(L, U)` if positive, `(−U, −L)`
    /// if negative. Fails when the interval touches or covers zero.
    pub(crate) fn positive_limits(&self) -> Result<(f64, f64)> {
        if self.lower > 0.0 {
            Ok((self.lower, self.upper))
        } else if self.upper < 0.0 {
            Ok((-self.upper, -self.lower))
        } else {
            Err(Error::NotSignificant {
                alpha: self.alpha(),
                detail: format!(
                    "interval ({}, {}) includes zero",
                    self.lower, self.upper
                ),
            })
        }
    }
}

/// Event counts of a two-arm study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoByTwoTable {
    events_treat: u64,
    n_treat: u64,
    events_ctrl: u64,
    n_ctrl: u64,
}

impl TwoByTwoTable {
    pub fn new(events_treat: u64, n_treat: u64, events_ctrl: u64, n_ctrl: u64) -> Result<Self> {
        if n_treat == 0 || n_ctrl == 0 {
            return Err(Error::InvalidArgument("group sizes must be positive".into()));
        }
        if events_treat > n_treat {
            return Err(Error::InvalidArgument(format!(
                "treatment events ({events_treat}) exceed group size ({n_treat})"
            )));
        }
        if events_ctrl > n_ctrl {
            return Err(Error::InvalidArgument(format!(
                "control events ({events_ctrl}) exceed group size ({n_ctrl})"
            )));
        }
        Ok(Self {
            events_treat,
            n_treat,
            events_ctrl,
            n_ctrl,
        })
    }

    pub fn events_treat(&self) -> u64 {
        self.events_treat
    }

    pub fn n_treat(&self) -> u64 {
        self.n_treat
    }

    pub fn events_ctrl(&self) -> u64 {
        self.events_ctrl
    }

    pub fn n_ctrl(&self) -> u64 {
        self.n_ctrl
    }

    /// Control arm becomes treatment and vice versa.
    pub fn swapped(&self) -> Self {
        Self {
            events_treat: self.events_ctrl,
            n_treat: self.n_ctrl,
            events_ctrl: self.events_treat,
            n_ctrl: self.n_treat,
        }
    }
}
