//! Study inputs: one of p-value, confidence interval, estimate with standard
//! error, or 2×2 counts, resolved to an estimate on the additive scale.

use std::str::FromStr;

use ancred::{ConfidenceInterval, EffectEstimate, TwoByTwoTable};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Interval limits are ratios (e.g. relative risks) and get log-transformed.
    Ratio,
    /// Interval limits are already on the additive (log) scale.
    Additive,
}

/// Two comma-separated numbers, `L,U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits(pub f64, pub f64);

impl FromStr for Limits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| format!("expected two comma-separated limits, got `{s}`"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad limit `{x}`: {e}"))
        };
        Ok(Limits(parse(lo)?, parse(hi)?))
    }
}

#[derive(Debug, Clone, Args)]
pub struct InternalArgs {
    /// Two-sided p-value of the study.
    #[arg(long, help_heading = "Study")]
    pub p: Option<f64>,
    /// Confidence interval `L,U`.
    #[arg(long, allow_hyphen_values = true, help_heading = "Study")]
    pub ci: Option<Limits>,
    /// Confidence level of `--ci`.
    #[arg(long, default_value_t = 0.95, help_heading = "Study")]
    pub ci_level: f64,
    /// Point estimate on the additive scale; requires `--se`.
    #[arg(long, allow_hyphen_values = true, help_heading = "Study")]
    pub estimate: Option<f64>,
    /// Standard error of `--estimate`.
    #[arg(long, help_heading = "Study")]
    pub se: Option<f64>,
    /// Events in the treatment arm.
    #[arg(long, help_heading = "Study")]
    pub events: Option<u64>,
    /// Size of the treatment arm.
    #[arg(long, help_heading = "Study")]
    pub n1: Option<u64>,
    /// Events in the control arm.
    #[arg(long, help_heading = "Study")]
    pub events0: Option<u64>,
    /// Size of the control arm.
    #[arg(long, help_heading = "Study")]
    pub n2: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExternalArgs {
    /// Two-sided p-value of the external evidence.
    #[arg(long, help_heading = "External evidence")]
    pub ext_p: Option<f64>,
    /// External confidence interval `L,U`.
    #[arg(long, allow_hyphen_values = true, help_heading = "External evidence")]
    pub ext_ci: Option<Limits>,
    /// Confidence level of `--ext-ci`.
    #[arg(long, default_value_t = 0.95, help_heading = "External evidence")]
    pub ext_ci_level: f64,
    /// External point estimate on the additive scale; requires `--ext-se`.
    #[arg(long, allow_hyphen_values = true, help_heading = "External evidence")]
    pub ext_estimate: Option<f64>,
    #[arg(long, help_heading = "External evidence")]
    pub ext_se: Option<f64>,
    #[arg(long, help_heading = "External evidence")]
    pub ext_events: Option<u64>,
    #[arg(long, help_heading = "External evidence")]
    pub ext_n1: Option<u64>,
    #[arg(long, help_heading = "External evidence")]
    pub ext_events0: Option<u64>,
    #[arg(long, help_heading = "External evidence")]
    pub ext_n2: Option<u64>,
}

/// The raw flags of one study, shared by internal and external inputs.
struct RawStudy {
    prefix: &'static str,
    p: Option<f64>,
    ci: Option<Limits>,
    ci_level: f64,
    estimate: Option<f64>,
    se: Option<f64>,
    table: [Option<u64>; 4],
}

impl From<&InternalArgs> for RawStudy {
    fn from(a: &InternalArgs) -> Self {
        Self {
            prefix: "",
            p: a.p,
            ci: a.ci,
            ci_level: a.ci_level,
            estimate: a.estimate,
            se: a.se,
            table: [a.events, a.n1, a.events0, a.n2],
        }
    }
}

impl From<&ExternalArgs> for RawStudy {
    fn from(a: &ExternalArgs) -> Self {
        Self {
            prefix: "ext-",
            p: a.ext_p,
            ci: a.ext_ci,
            ci_level: a.ext_ci_level,
            estimate: a.ext_estimate,
            se: a.ext_se,
            table: [a.ext_events, a.ext_n1, a.ext_events0, a.ext_n2],
        }
    }
}

/// A study after parsing.
#[derive(Debug, Clone)]
pub enum Study {
    PValue(f64),
    Interval {
        /// The interval on the additive scale.
        ci: ConfidenceInterval,
        estimate: EffectEstimate,
    },
    Estimate(EffectEstimate),
    Table {
        table: TwoByTwoTable,
        estimate: EffectEstimate,
    },
}

impl Study {
    pub fn resolve_internal(args: &InternalArgs, scale: Scale) -> CliResult<Self> {
        resolve(&RawStudy::from(args), scale)
    }

    pub fn resolve_external(args: &ExternalArgs, scale: Scale) -> CliResult<Self> {
        resolve(&RawStudy::from(args), scale)
    }

    pub fn form(&self) -> &'static str {
        match self {
            Study::PValue(_) => "p-value",
            Study::Interval { .. } => "interval",
            Study::Estimate(_) => "estimate",
            Study::Table { .. } => "table",
        }
    }

    pub fn estimate(&self) -> Option<EffectEstimate> {
        match self {
            Study::PValue(_) => None,
            Study::Interval { estimate, .. } | Study::Table { estimate, .. } => Some(*estimate),
            Study::Estimate(estimate) => Some(*estimate),
        }
    }

    /// Two-sided p-value.
    pub fn p_value(&self) -> f64 {
        match self {
            Study::PValue(p) => *p,
            _ => self.estimate().expect("non-p inputs carry an estimate").p_value(),
        }
    }

    /// Test statistic; a bare p-value gives a non-negative `t`.
    pub fn t_statistic(&self) -> CliResult<f64> {
        match self {
            Study::PValue(p) => Ok(-ancred::std_normal_quantile(p / 2.0)?),
            _ => Ok(self.estimate().expect("estimate").t_statistic()),
        }
    }

    /// Echo of the parsed input for the JSON envelope.
    pub fn describe(&self) -> Value {
        let mut out = json!({ "form": self.form() });
        let map = out.as_object_mut().expect("object");
        match self {
            Study::PValue(p) => {
                map.insert("p".into(), json!(p));
            }
            Study::Interval { ci, .. } => {
                map.insert(
                    "ci".into(),
                    json!({ "lower": ci.lower(), "upper": ci.upper(), "level": ci.level() }),
                );
            }
            Study::Estimate(_) => {}
            Study::Table { table, .. } => {
                map.insert("table".into(), serde_json::to_value(table).expect("table"));
            }
        }
        if let Some(est) = self.estimate() {
            map.insert(
                "estimate".into(),
                json!({ "theta_hat": est.theta_hat(), "se": est.se() }),
            );
        }
        out
    }
}

fn resolve(raw: &RawStudy, scale: Scale) -> CliResult<Study> {
    let pre = raw.prefix;
    let table_given = raw.table.iter().filter(|x| x.is_some()).count();
    let forms = [
        raw.p.is_some(),
        raw.ci.is_some(),
        raw.estimate.is_some() || raw.se.is_some(),
        table_given > 0,
    ];
    match forms.iter().filter(|&&f| f).count() {
        0 => {
            return Err(CliError::Usage(format!(
                "no {study} supplied: give one of --{pre}p, --{pre}ci, --{pre}estimate/--{pre}se \
                 or --{pre}events/--{pre}n1/--{pre}events0/--{pre}n2",
                study = if pre.is_empty() { "study" } else { "external evidence" },
            )))
        }
        1 => {}
        _ => {
            return Err(CliError::Usage(format!(
                "conflicting inputs: give exactly one of --{pre}p, --{pre}ci, \
                 --{pre}estimate/--{pre}se or the --{pre}events table"
            )))
        }
    }

    if let Some(p) = raw.p {
        if !(p > 0.0 && p <= 1.0) {
            return Err(ancred::Error::Domain(format!("p-value must lie in (0, 1], got {p}")).into());
        }
        return Ok(Study::PValue(p));
    }

    if let Some(Limits(lo, hi)) = raw.ci {
        let (lo, hi) = match scale {
            Scale::Additive => (lo, hi),
            Scale::Ratio => {
                if lo <= 0.0 || hi <= 0.0 {
                    return Err(ancred::Error::Domain(format!(
                        "ratio-scale limits must be positive, got ({lo}, {hi}); \
                         use --scale additive for log-scale input"
                    ))
                    .into());
                }
                (lo.ln(), hi.ln())
            }
        };
        let ci = ConfidenceInterval::new(lo, hi, raw.ci_level)?;
        return Ok(Study::Interval {
            ci,
            estimate: ci.to_estimate(),
        });
    }

    if raw.estimate.is_some() || raw.se.is_some() {
        let (Some(theta), Some(se)) = (raw.estimate, raw.se) else {
            return Err(CliError::Usage(format!(
                "--{pre}estimate and --{pre}se must be given together"
            )));
        };
        return Ok(Study::Estimate(EffectEstimate::new(theta, se)?));
    }

    let [Some(a), Some(n1), Some(b), Some(n2)] = raw.table else {
        return Err(CliError::Usage(format!(
            "a 2x2 table needs all of --{pre}events, --{pre}n1, --{pre}events0 and --{pre}n2"
        )));
    };
    let table = TwoByTwoTable::new(a, n1, b, n2)?;
    Ok(Study::Table {
        table,
        estimate: EffectEstimate::from_two_by_two(&table)?,
    })
}
