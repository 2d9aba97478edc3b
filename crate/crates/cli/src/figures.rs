//! Plot-ready data tables.

use ancred::nulldist::{self, SimulationConfig, DEFAULT_BINS, DEFAULT_C_GRID, DEFAULT_SHARDS};
use ancred::{
    extrinsic_p, intrinsic_p, intrinsic_threshold, matthews_intrinsic_threshold,
    std_normal_quantile, Error,
};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::commands::Output;
use crate::output::{num, CliResult, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// alpha, alpha_i, matthews_alpha_i over alpha in (0, max-p].
    Thresholds,
    /// p, p_i over p in (0, max-p].
    Calibration,
    /// x, f_p, f_p_i: null densities of p and p_I on [0, 1].
    NullDensity,
    /// Simulated null histograms of p_E per c with overlay curves.
    NullHistograms,
    /// c, p, p0, p_e over a square grid of p-values per c.
    PeContours,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Grid resolution (default depends on the figure).
    #[arg(long)]
    pub points: Option<usize>,
    /// Largest alpha or p on the grid (default depends on the figure).
    #[arg(long)]
    pub max_p: Option<f64>,
    /// Comma-separated variance ratios.
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Vec<f64>,
    /// Samples per histogram.
    #[arg(long, default_value_t = 50_000)]
    pub n: usize,
    #[arg(long, env = "ANCRED_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = DEFAULT_SHARDS)]
    pub shards: usize,
}

impl FigureArgs {
    fn points(&self, default: usize) -> CliResult<usize> {
        match self.points.unwrap_or(default) {
            0 => Err(Error::InvalidArgument("--points must be at least 1".into()).into()),
            n => Ok(n),
        }
    }

    /// Upper end of a p-value grid; `closed` admits 1.
    fn max_p(&self, default: f64, closed: bool) -> CliResult<f64> {
        let max = self.max_p.unwrap_or(default);
        let ok = max > 0.0 && (max < 1.0 || (closed && max == 1.0));
        if !ok {
            let range = if closed { "(0, 1]" } else { "(0, 1)" };
            return Err(Error::Domain(format!("--max-p must lie in {range}, got {max}")).into());
        }
        Ok(max)
    }

    fn c_grid(&self) -> &[f64] {
        if self.c_grid.is_empty() {
            &DEFAULT_C_GRID
        } else {
            &self.c_grid
        }
    }
}

/// `k·max/points` for `k = 1..=points`.
fn grid(max: f64, points: usize) -> impl Iterator<Item = f64> {
    (1..=points).map(move |k| k as f64 / points as f64 * max)
}

fn thresholds(args: &FigureArgs) -> CliResult<Csv> {
    let points = args.points(100)?;
    let mut csv = Csv::new(&["alpha", "alpha_i", "matthews_alpha_i"]);
    for alpha in grid(args.max_p(0.1, false)?, points) {
        csv.push_numbers(&[
            alpha,
            intrinsic_threshold(alpha)?,
            matthews_intrinsic_threshold(alpha)?,
        ]);
    }
    Ok(csv)
}

fn calibration(args: &FigureArgs) -> CliResult<Csv> {
    let points = args.points(1000)?;
    let mut csv = Csv::new(&["p", "p_i"]);
    for p in grid(args.max_p(1.0, true)?, points) {
        csv.push_numbers(&[p, intrinsic_p(p)?]);
    }
    Ok(csv)
}

fn null_density(args: &FigureArgs) -> CliResult<Csv> {
    let points = args.points(1000)?;
    let mut csv = Csv::new(&["x", "f_p", "f_p_i"]);
    for k in 0..=points {
        let x = k as f64 / points as f64;
        // the density extends continuously to 0 at x = 0 and sqrt(2) at x = 1
        let f = match k {
            0 => 0.0,
            _ if k == points => std::f64::consts::SQRT_2,
            _ => nulldist::p_i_null_density(x)?,
        };
        csv.push_numbers(&[x, 1.0, f]);
    }
    Ok(csv)
}

fn null_histograms(args: &FigureArgs) -> CliResult<Csv> {
    let mut csv = Csv::new(&[
        "c", "bin_lo", "bin_hi", "mid", "count", "density", "limit_c0", "f_p_i", "uniform",
    ]);
    for &c in args.c_grid() {
        let config = SimulationConfig::new(args.n, c, args.seed)?.with_shards(args.shards)?;
        let hist = nulldist::simulate_p_e_null(&config)?.histogram(args.bins)?;
        for bin in 0..hist.bins() {
            let mid = hist.midpoint(bin);
            csv.push(vec![
                num(c),
                num(hist.bin_edges[bin]),
                num(hist.bin_edges[bin + 1]),
                num(mid),
                hist.counts[bin].to_string(),
                num(hist.density(bin)),
                num(nulldist::limiting_density_c0(mid)?),
                num(nulldist::p_i_null_density(mid)?),
                num(1.0),
            ]);
        }
    }
    Ok(csv)
}

fn pe_contours(args: &FigureArgs) -> CliResult<Csv> {
    let points = args.points(20)?;
    let max = args.max_p(0.1, false)?;
    let stats: Vec<(f64, f64)> = grid(max, points)
        .map(|p| Ok((p, -std_normal_quantile(p / 2.0)?)))
        .collect::<ancred::Result<_>>()?;
    let mut csv = Csv::new(&["c", "p", "p0", "p_e"]);
    for &c in args.c_grid() {
        for &(p, t) in &stats {
            for &(p0, t0) in &stats {
                csv.push_numbers(&[c, p, p0, extrinsic_p(t, t0, c)?]);
            }
        }
    }
    Ok(csv)
}

pub fn figure_data(args: &FigureArgs) -> CliResult<Output> {
    let csv = match args.figure {
        Figure::Thresholds => thresholds(args)?,
        Figure::Calibration => calibration(args)?,
        Figure::NullDensity => null_density(args)?,
        Figure::NullHistograms => null_histograms(args)?,
        Figure::PeContours => pe_contours(args)?,
    };
    let inputs = json!({
        "figure": args.figure,
        "points": args.points,
        "max_p": args.max_p,
        "c_grid": args.c_grid(),
        "n": args.n,
        "seed": args.seed,
        "bins": args.bins,
        "shards": args.shards,
    });
    let mut results = csv.to_json();
    results["figure"] = json!(args.figure);
    Ok(Output::new("figure-data", inputs, results, csv.render()))
}
