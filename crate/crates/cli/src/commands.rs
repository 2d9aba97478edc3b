use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use ancred::nulldist::{self, SimulationConfig, DEFAULT_BINS, DEFAULT_SHARDS};
use ancred::{
    box_test, compatibility_test, credibility_ratio, extrinsic_p, intrinsic_threshold,
    matthews_extrinsic_credible, matthews_intrinsic_threshold, variance_ratio,
    CredibilityReport, EffectEstimate, Error, ScepticalPrior, TailTest, CREDIBILITY_RATIO_BOUND,
};
use clap::Args;
use serde::Serialize;
use serde_json::json;

use crate::input::{ExternalArgs, InternalArgs, Scale, Study};
use crate::output::{num, opt4, sig4, CliError, CliResult, Csv, Envelope};

/// What a command produced, in both renderings.
pub struct Output {
    pub json: String,
    pub human: String,
}

impl Output {
    pub fn new<R: Serialize>(
        command: &'static str,
        inputs: serde_json::Value,
        results: R,
        human: String,
    ) -> Self {
        Self {
            json: Envelope::new(command, inputs, results).to_json(),
            human,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LevelArgs {
    /// Working confidence level 1 - alpha.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Scale of interval limits.
    #[arg(long, value_enum, default_value_t = Scale::Ratio)]
    pub scale: Scale,
    /// Also show ratio-scale (exponentiated) values.
    #[arg(long)]
    pub exp: bool,
}

impl LevelArgs {
    fn alpha(&self) -> CliResult<f64> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Domain(format!("--level must lie in (0, 1), got {}", self.level)).into());
        }
        Ok(1.0 - self.level)
    }

    fn inputs(&self) -> serde_json::Value {
        json!({ "level": self.level, "scale": self.scale, "exp": self.exp })
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyseArgs {
    #[command(flatten)]
    pub study: InternalArgs,
    #[command(flatten)]
    pub opts: LevelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    #[command(flatten)]
    pub study: InternalArgs,
    #[command(flatten)]
    pub opts: LevelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExtrinsicArgs {
    #[command(flatten)]
    pub study: InternalArgs,
    #[command(flatten)]
    pub external: ExternalArgs,
    #[command(flatten)]
    pub opts: LevelArgs,
    /// Variance ratio sigma^2 / sigma0^2; required when either study is a bare p-value.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Variance ratio c of the simulated studies.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c: f64,
    /// Number of simulated pairs.
    #[arg(long, default_value_t = 50_000)]
    pub n: usize,
    #[arg(long, env = "ANCRED_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Independent random streams; results depend on this, not on thread count.
    #[arg(long, default_value_t = DEFAULT_SHARDS)]
    pub shards: usize,
    /// Write the histogram CSV to this file.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Tail {
    statistic: f64,
    tail: f64,
}

impl From<TailTest> for Tail {
    fn from(t: TailTest) -> Self {
        Self {
            statistic: t.statistic,
            tail: t.tail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct PriorView {
    level: f64,
    sceptical_limit: f64,
    tau: f64,
    tau2: f64,
    critical_interval: [f64; 2],
}

impl From<&ScepticalPrior> for PriorView {
    fn from(prior: &ScepticalPrior) -> Self {
        let (lo, hi) = prior.critical_interval();
        Self {
            level: 1.0 - prior.alpha(),
            sceptical_limit: prior.sceptical_limit(),
            tau: prior.sd(),
            tau2: prior.variance(),
            critical_interval: [lo, hi],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct EstimateView {
    theta_hat: f64,
    se: f64,
    /// Interval at the working level.
    ci: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
struct RatioView {
    ratio: f64,
    bound: f64,
    credible: bool,
}

#[derive(Debug, Clone, Serialize)]
struct VarianceView {
    tau2: Option<f64>,
    sigma2: f64,
    credible: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
struct ExpView {
    estimate: Option<f64>,
    ci: Option<[f64; 2]>,
    sceptical_limit: Option<f64>,
    critical_interval: Option<[f64; 2]>,
}

impl ExpView {
    fn build(est: Option<&EstimateView>, prior: Option<&PriorView>) -> Self {
        Self {
            estimate: est.map(|e| e.theta_hat.exp()),
            ci: est.map(|e| [e.ci[0].exp(), e.ci[1].exp()]),
            sceptical_limit: prior.map(|p| p.sceptical_limit.exp()),
            critical_interval: prior
                .map(|p| [p.critical_interval[0].exp(), p.critical_interval[1].exp()]),
        }
    }
}

fn percent(level: f64) -> String {
    let pct = 100.0 * level;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}%", pct.round())
    } else {
        format!("{}%", sig4(pct))
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Prior at the working level, taken from the interval itself when the
/// study was entered as an interval at that level.
fn working_prior(study: &Study, est: &EffectEstimate, alpha: f64) -> ancred::Result<ScepticalPrior> {
    match study {
        Study::Interval { ci, .. } if (ci.alpha() - alpha).abs() < 1e-12 => ScepticalPrior::from_ci(ci),
        _ => ScepticalPrior::from_estimate(est, alpha),
    }
}

fn not_significant_reason(level: f64) -> String {
    format!("not significant at the {} level", percent(level))
}

#[derive(Debug, Serialize)]
struct AnalyseResults {
    level: f64,
    p: f64,
    p_intrinsic: f64,
    t: f64,
    estimate: Option<EstimateView>,
    sceptical_prior: Option<PriorView>,
    credibility_ratio: Option<RatioView>,
    variance_verdict: Option<VarianceView>,
    intrinsic_threshold: f64,
    matthews_intrinsic_threshold: f64,
    intrinsically_credible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    exp: Option<ExpView>,
    report: CredibilityReport,
    /// Why an optional field is null.
    absent: BTreeMap<&'static str, String>,
}

pub fn analyse(args: &AnalyseArgs) -> CliResult<Output> {
    let alpha = args.opts.alpha()?;
    let level = args.opts.level;
    let study = Study::resolve_internal(&args.study, args.opts.scale)?;
    let t = study.t_statistic()?;
    let mut absent = BTreeMap::new();

    let (report, estimate, prior, ratio, variance) = match study.estimate() {
        None => {
            let reason = "a bare p-value carries no scale".to_string();
            for key in ["estimate", "sceptical_prior", "credibility_ratio", "variance_verdict"] {
                absent.insert(key, reason.clone());
            }
            (CredibilityReport::from_p_value(study.p_value(), alpha)?, None, None, None, None)
        }
        Some(est) => {
            let report = CredibilityReport::analyse(&est, None, alpha)?;
            let ci = est.to_ci(level)?;
            let view = EstimateView {
                theta_hat: est.theta_hat(),
                se: est.se(),
                ci: [ci.lower(), ci.upper()],
            };
            let prior = match working_prior(&study, &est, alpha) {
                Ok(prior) => Some(prior),
                Err(Error::NotSignificant { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let (ratio, variance) = match &prior {
                Some(prior) => {
                    let ci = match &study {
                        Study::Interval { ci, .. } if (ci.alpha() - alpha).abs() < 1e-12 => *ci,
                        _ => ci,
                    };
                    let r = credibility_ratio(&ci)?;
                    let v = VarianceView {
                        tau2: Some(prior.variance()),
                        sigma2: est.variance(),
                        credible: prior.variance() <= est.variance(),
                    };
                    (
                        Some(RatioView {
                            ratio: r.ratio,
                            bound: CREDIBILITY_RATIO_BOUND,
                            credible: r.credible,
                        }),
                        Some(v),
                    )
                }
                None => {
                    let reason = not_significant_reason(level);
                    absent.insert("sceptical_prior", reason.clone());
                    absent.insert("credibility_ratio", reason);
                    let v = VarianceView {
                        tau2: None,
                        sigma2: est.variance(),
                        credible: false,
                    };
                    (None, Some(v))
                }
            };
            (report, Some(view), prior.as_ref().map(PriorView::from), ratio, variance)
        }
    };

    let intrinsically_credible = report
        .intrinsically_credible_at
        .map(|v| v.credible)
        .unwrap_or(false);
    let exp = args
        .opts
        .exp
        .then(|| ExpView::build(estimate.as_ref(), prior.as_ref()));
    let results = AnalyseResults {
        level,
        p: report.p,
        p_intrinsic: report.p_intrinsic,
        t,
        estimate,
        sceptical_prior: prior,
        credibility_ratio: ratio,
        variance_verdict: variance,
        intrinsic_threshold: intrinsic_threshold(alpha)?,
        matthews_intrinsic_threshold: matthews_intrinsic_threshold(alpha)?,
        intrinsically_credible,
        exp,
        report,
        absent,
    };

    let human = render_analyse(&results);
    let inputs = json!({ "study": study.describe(), "options": args.opts.inputs() });
    Ok(Output::new("analyse", inputs, results, human))
}

fn render_analyse(r: &AnalyseResults) -> String {
    let pct = percent(r.level);
    let exp = r.exp.as_ref();
    let mut s = String::new();
    if let Some(est) = &r.estimate {
        let _ = write!(s, "estimate:              {} (se {})", sig4(est.theta_hat), sig4(est.se));
        if let Some(e) = exp.and_then(|e| e.estimate) {
            let _ = write!(s, "  [exp: {}]", sig4(e));
        }
        s.push('\n');
        let _ = write!(s, "{pct} CI:{:width$}{} to {}", "", sig4(est.ci[0]), sig4(est.ci[1]), width = 19 - pct.len());
        if let Some([lo, hi]) = exp.and_then(|e| e.ci) {
            let _ = write!(s, "  [exp: {} to {}]", sig4(lo), sig4(hi));
        }
        s.push('\n');
    }
    let _ = writeln!(s, "t:                     {}", sig4(r.t));
    let _ = writeln!(s, "p:                     {}", sig4(r.p));
    let _ = writeln!(s, "p_I:                   {}", sig4(r.p_intrinsic));
    match &r.sceptical_prior {
        Some(prior) => {
            let _ = write!(s, "sceptical limit S:     {}", sig4(prior.sceptical_limit));
            if let Some(e) = exp.and_then(|e| e.sceptical_limit) {
                let _ = write!(s, "  [exp: {}]", sig4(e));
            }
            s.push('\n');
            let _ = writeln!(s, "prior sd tau:          {}", sig4(prior.tau));
            let _ = writeln!(
                s,
                "critical interval:     [{}, {}]",
                sig4(prior.critical_interval[0]),
                sig4(prior.critical_interval[1])
            );
        }
        None => {
            let reason = r.absent.get("sceptical_prior").map(String::as_str).unwrap_or("");
            let _ = writeln!(s, "sceptical prior:       n/a ({reason})");
        }
    }
    match &r.credibility_ratio {
        Some(ratio) => {
            let _ = writeln!(
                s,
                "credibility ratio:     {} (bound {}): {}",
                sig4(ratio.ratio),
                sig4(ratio.bound),
                if ratio.credible { "credible" } else { "not credible" }
            );
        }
        None => {
            let reason = r.absent.get("credibility_ratio").map(String::as_str).unwrap_or("");
            let _ = writeln!(s, "credibility ratio:     n/a ({reason})");
        }
    }
    if let Some(v) = &r.variance_verdict {
        let _ = writeln!(
            s,
            "tau^2 <= sigma^2:      {} (tau^2 {}, sigma^2 {})",
            yes_no(v.credible),
            opt4(v.tau2),
            sig4(v.sigma2)
        );
    }
    let _ = writeln!(
        s,
        "alpha_I at {pct}:{:width$}{} (Matthews {})",
        "",
        sig4(r.intrinsic_threshold),
        sig4(r.matthews_intrinsic_threshold),
        width = 11 - pct.len()
    );
    let _ = writeln!(s, "intrinsically credible at {pct}: {}", yes_no(r.intrinsically_credible));
    s
}

#[derive(Debug, Serialize)]
struct ExtrinsicResults {
    level: f64,
    t: f64,
    t0: f64,
    c: f64,
    p: f64,
    p0: f64,
    p_extrinsic: Option<f64>,
    box_test: Option<Tail>,
    sceptical_prior: Option<PriorView>,
    matthews_extrinsic_credible: Option<bool>,
    compatibility: Option<Tail>,
    report: CredibilityReport,
    absent: BTreeMap<&'static str, String>,
}

pub fn extrinsic(args: &ExtrinsicArgs) -> CliResult<Output> {
    let alpha = args.opts.alpha()?;
    let level = args.opts.level;
    let internal = Study::resolve_internal(&args.study, args.opts.scale)?;
    let external = Study::resolve_external(&args.external, args.opts.scale)?;
    let mut absent = BTreeMap::new();

    let (est, ext, c) = match (internal.estimate(), external.estimate(), args.c) {
        (Some(est), Some(ext), None) => (est, ext, variance_ratio(&est, &ext)),
        (Some(_), Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--c is implied by the two standard errors; drop it or enter a study as a p-value"
                    .into(),
            ))
        }
        (_, _, None) => {
            return Err(CliError::Usage(
                "--c is required when either study is given as a bare p-value".into(),
            ))
        }
        (est, ext, Some(c)) => {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Domain(format!("variance ratio c must be positive, got {c}")).into());
            }
            // Only t, t0 and c matter, so fix sigma0 = 1 and sigma = sqrt(c).
            // A bare p-value is taken to point the same way as the other study.
            let sign_of = |e: Option<EffectEstimate>| match e {
                Some(e) if e.theta_hat() < 0.0 => -1.0,
                _ => 1.0,
            };
            let t = match est {
                Some(e) => e.t_statistic(),
                None => sign_of(ext) * internal.t_statistic()?,
            };
            let t0 = match ext {
                Some(e) => e.t_statistic(),
                None => sign_of(est) * external.t_statistic()?,
            };
            absent.insert(
                "compatibility",
                "needs both studies on a common scale; a bare p-value has none".to_string(),
            );
            (
                EffectEstimate::new(t * c.sqrt(), c.sqrt())?,
                EffectEstimate::new(t0, 1.0)?,
                c,
            )
        }
    };

    let (t, t0) = (est.t_statistic(), ext.t_statistic());
    let p_extrinsic = match extrinsic_p(t, t0, c) {
        Ok(p) => Some(p),
        Err(Error::NoSolution(_)) => {
            absent.insert("p_extrinsic", "no solution below 1".to_string());
            None
        }
        Err(e) => return Err(e.into()),
    };

    let (oriented, oriented_ext) = if est.theta_hat() < 0.0 {
        (est.reflected(), ext.reflected())
    } else {
        (est, ext)
    };
    let prior = match working_prior(&internal, &oriented, alpha) {
        Ok(prior) => Some(prior),
        Err(Error::NotSignificant { .. }) => {
            let reason = format!("internal result {}", not_significant_reason(level));
            for key in ["box_test", "sceptical_prior", "matthews_extrinsic_credible"] {
                absent.insert(key, reason.clone());
            }
            None
        }
        Err(e) => return Err(e.into()),
    };
    let box_result = prior.as_ref().map(|p| Tail::from(box_test(&oriented_ext, p)));
    let matthews = match prior {
        Some(_) => Some(matthews_extrinsic_credible(t, t0, c, alpha)?),
        None => None,
    };
    let scale_free = absent.contains_key("compatibility");
    let compatibility = (!scale_free)
        .then(|| Tail::from(compatibility_test(&est, &ext)));

    let results = ExtrinsicResults {
        level,
        t,
        t0,
        c,
        p: internal.p_value(),
        p0: external.p_value(),
        p_extrinsic,
        box_test: box_result,
        sceptical_prior: if scale_free {
            absent.insert("sceptical_prior", "a bare p-value carries no scale".to_string());
            None
        } else {
            prior.as_ref().map(PriorView::from)
        },
        matthews_extrinsic_credible: matthews,
        compatibility,
        report: CredibilityReport::analyse(&est, Some(&ext), alpha)?,
        absent,
    };

    let human = render_extrinsic(&results);
    let inputs = json!({
        "study": internal.describe(),
        "external": external.describe(),
        "c": args.c,
        "options": args.opts.inputs(),
    });
    Ok(Output::new("extrinsic", inputs, results, human))
}

fn render_extrinsic(r: &ExtrinsicResults) -> String {
    let pct = percent(r.level);
    let reason = |key: &str| r.absent.get(key).cloned().unwrap_or_default();
    let mut s = String::new();
    let _ = writeln!(s, "t:                      {}", sig4(r.t));
    let _ = writeln!(s, "t0:                     {}", sig4(r.t0));
    let _ = writeln!(s, "c = sigma^2/sigma0^2:   {}", sig4(r.c));
    let _ = writeln!(s, "p:                      {}", sig4(r.p));
    let _ = writeln!(s, "p0:                     {}", sig4(r.p0));
    match r.p_extrinsic {
        Some(p) => {
            let _ = writeln!(s, "p_E:                    {}", sig4(p));
        }
        None => {
            let _ = writeln!(s, "p_E:                    {}", reason("p_extrinsic"));
        }
    }
    if let Some(prior) = &r.sceptical_prior {
        let _ = writeln!(
            s,
            "sceptical limit S:      {} (tau {})",
            sig4(prior.sceptical_limit),
            sig4(prior.tau)
        );
    }
    match &r.box_test {
        Some(b) => {
            let _ = writeln!(s, "t_Box at {pct}:{:w$}{}", "", sig4(b.statistic), w = 14 - pct.len());
            let _ = writeln!(s, "p_Box at {pct}:{:w$}{}", "", sig4(b.tail), w = 14 - pct.len());
        }
        _ => {
            let _ = writeln!(s, "p_Box:                  n/a ({})", reason("box_test"));
        }
    }
    match r.matthews_extrinsic_credible {
        Some(v) => {
            let _ = writeln!(
                s,
                "Matthews at {pct}:{:w$}{}",
                "",
                if v { "credible" } else { "not credible" },
                w = 11 - pct.len()
            );
        }
        None => {
            let _ = writeln!(s, "Matthews:               n/a ({})", reason("matthews_extrinsic_credible"));
        }
    }
    match &r.compatibility {
        Some(cmp) => {
            let _ = writeln!(
                s,
                "compatibility:          {} (tail {})",
                sig4(cmp.statistic),
                sig4(cmp.tail)
            );
        }
        None => {
            let _ = writeln!(s, "compatibility:          n/a ({})", reason("compatibility"));
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct PriorResults {
    #[serde(flatten)]
    prior: PriorView,
    #[serde(skip_serializing_if = "Option::is_none")]
    exp: Option<ExpView>,
}

pub fn prior(args: &PriorArgs) -> CliResult<Output> {
    let alpha = args.opts.alpha()?;
    let study = Study::resolve_internal(&args.study, args.opts.scale)?;
    let Some(est) = study.estimate() else {
        return Err(CliError::Usage(
            "the sceptical prior needs an interval, an estimate or a table, not a bare p-value".into(),
        ));
    };
    let prior = PriorView::from(&working_prior(&study, &est, alpha)?);
    let exp = args.opts.exp.then(|| ExpView::build(None, Some(&prior)));

    let mut human = String::new();
    let _ = write!(human, "sceptical limit S:  {}", sig4(prior.sceptical_limit));
    if let Some(e) = exp.as_ref().and_then(|e| e.sceptical_limit) {
        let _ = write!(human, "  [exp: {}]", sig4(e));
    }
    human.push('\n');
    let _ = writeln!(human, "tau:                {}", sig4(prior.tau));
    let _ = writeln!(human, "tau^2:              {}", sig4(prior.tau2));
    let _ = write!(
        human,
        "critical interval:  [{}, {}]",
        sig4(prior.critical_interval[0]),
        sig4(prior.critical_interval[1])
    );
    if let Some([lo, hi]) = exp.as_ref().and_then(|e| e.critical_interval) {
        let _ = write!(human, "  [exp: {} to {}]", sig4(lo), sig4(hi));
    }
    human.push('\n');

    let inputs = json!({ "study": study.describe(), "options": args.opts.inputs() });
    Ok(Output::new("prior", inputs, PriorResults { prior, exp }, human))
}

#[derive(Debug, Serialize)]
struct TailSummary {
    alpha: f64,
    empirical: f64,
    /// Limiting null tail probability `alpha²` as `c → 0`.
    limit: f64,
    /// `alpha²` plus three binomial standard errors.
    mc_bound: f64,
    within_bound: bool,
}

#[derive(Debug, Serialize)]
struct SimulateResults {
    config: SimulationConfig,
    tails: Vec<TailSummary>,
    histogram: serde_json::Value,
}

pub const SUMMARY_ALPHAS: [f64; 3] = [0.01, 0.05, 0.1];

pub fn histogram_csv(hist: &ancred::Histogram) -> Csv {
    let mut csv = Csv::new(&["bin_lo", "bin_hi", "mid", "count", "density"]);
    for bin in 0..hist.bins() {
        csv.push(vec![
            num(hist.bin_edges[bin]),
            num(hist.bin_edges[bin + 1]),
            num(hist.midpoint(bin)),
            hist.counts[bin].to_string(),
            num(hist.density(bin)),
        ]);
    }
    csv
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Output> {
    let config = SimulationConfig::new(args.n, args.c, args.seed)?.with_shards(args.shards)?;
    let set = nulldist::simulate_p_e_null(&config)?;
    let hist = set.histogram(args.bins)?;
    let csv = histogram_csv(&hist);
    let rendered = csv.render();
    if let Some(path) = &args.csv {
        std::fs::write(path, &rendered)?;
    }

    let n = config.n_samples as f64;
    let tails: Vec<_> = SUMMARY_ALPHAS
        .iter()
        .map(|&alpha| {
            let limit = alpha * alpha;
            let empirical = set.empirical_tail(alpha);
            let mc_bound = limit + 3.0 * (limit * (1.0 - limit) / n).sqrt();
            TailSummary {
                alpha,
                empirical,
                limit,
                mc_bound,
                within_bound: empirical <= mc_bound,
            }
        })
        .collect();

    let human = match &args.csv {
        None => rendered,
        Some(path) => {
            let mut s = format!("histogram written to {}\n", path.display());
            for t in &tails {
                let _ = writeln!(
                    s,
                    "Pr(p_E < {}) = {} (bound {})",
                    t.alpha,
                    sig4(t.empirical),
                    sig4(t.mc_bound)
                );
            }
            s
        }
    };
    let inputs = json!({
        "c": args.c, "n": args.n, "seed": args.seed, "bins": args.bins, "shards": args.shards,
        "csv": args.csv,
    });
    let results = SimulateResults {
        config,
        tails,
        histogram: csv.to_json(),
    };
    Ok(Output::new("simulate", inputs, results, human))
}
