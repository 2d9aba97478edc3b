//! Behaviour of the credibility p-values when there is no effect.
//!
//! Under the null the ordinary p-value is uniform, which gives the intrinsic
//! p-value a closed-form density. The extrinsic p-value is studied by
//! simulation: both test statistics are drawn from N(0, 1) and pushed through
//! [`extrinsic_p`]. As `c → 0` its law approaches Be(2, 1), the law of the
//! larger of two independent uniforms.
//!
//! # Random numbers
//!
//! Draws come from ChaCha8 (`rand_chacha`). A run of `n` samples is split
//! into a fixed number of shards; shard `k` reads stream `k` of the generator
//! seeded with `seed`. Normal deviates are obtained by the inverse-CDF
//! transform of open-interval uniforms. Because the shard layout depends
//! only on `(n, shards)`, parallel and sequential runs are bit-identical and
//! runs with different `c` but the same seed share their `(t, t₀)` pairs.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::credibility::{extrinsic_p, intrinsic_p_from_t, intrinsic_threshold};
use crate::effects::EffectEstimate;
use crate::error::{ensure_finite, Error, Result};
use crate::numerics::{pdf, quantile, two_sided_critical, two_sided_tail, TWO_SQRT_PI};

/// Variance ratios used for the null histograms when none are given.
pub const DEFAULT_C_GRID: [f64; 4] = [0.001, 0.5, 1.0, 2.0];

pub const DEFAULT_BINS: usize = 40;

pub const DEFAULT_SHARDS: usize = 16;

/// Seeded stream of standard normal deviates.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        quantile(self.next_uniform())
    }
}

/// Half-open index ranges `[start, end)` of each shard.
fn shard_ranges(n: usize, shards: usize) -> Vec<(usize, usize)> {
    let shards = shards.max(1);
    (0..shards)
        .map(|k| (k * n / shards, (k + 1) * n / shards))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_samples: usize,
    pub variance_ratio_c: f64,
    pub seed: u64,
    pub shards: usize,
}

impl SimulationConfig {
    pub fn new(n_samples: usize, variance_ratio_c: f64, seed: u64) -> Result<Self> {
        let config = Self {
            n_samples,
            variance_ratio_c,
            seed,
            shards: DEFAULT_SHARDS,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_shards(mut self, shards: usize) -> Result<Self> {
        self.shards = shards;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
        }
        if self.shards == 0 {
            return Err(Error::InvalidArgument("shards must be at least 1".into()));
        }
        ensure_finite("c", self.variance_ratio_c)?;
        if self.variance_ratio_c < 0.0 {
            return Err(Error::Domain(format!(
                "variance ratio c must be >= 0, got {}",
                self.variance_ratio_c
            )));
        }
        Ok(())
    }
}

/// One simulated null pair and its extrinsic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullDraw {
    pub t: f64,
    pub t0: f64,
    pub p_extrinsic: f64,
}

impl NullDraw {
    pub fn p(&self) -> f64 {
        two_sided_tail(self.t)
    }

    pub fn p0(&self) -> f64 {
        two_sided_tail(self.t0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub config: SimulationConfig,
    pub draws: Vec<NullDraw>,
}

impl SampleSet {
    pub fn p_extrinsic(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.p_extrinsic).collect()
    }

    /// Fraction of samples with `p_E < alpha`.
    pub fn empirical_tail(&self, alpha: f64) -> f64 {
        let hits = self.draws.iter().filter(|d| d.p_extrinsic < alpha).count();
        hits as f64 / self.draws.len() as f64
    }

    pub fn histogram(&self, bins: usize) -> Result<Histogram> {
        Histogram::from_values(self.draws.iter().map(|d| d.p_extrinsic), bins)
    }
}

fn null_p_extrinsic(t: f64, t0: f64, c: f64) -> f64 {
    if c == 0.0 {
        return two_sided_tail(t).max(two_sided_tail(t0));
    }
    extrinsic_p(t, t0, c).unwrap_or(1.0)
}

fn simulate_shard(config: &SimulationConfig, shard: usize, len: usize) -> Vec<NullDraw> {
    let mut normals = NormalStream::new(config.seed, shard as u64);
    (0..len)
        .map(|_| {
            let t = normals.next_normal();
            let t0 = normals.next_normal();
            NullDraw {
                t,
                t0,
                p_extrinsic: null_p_extrinsic(t, t0, config.variance_ratio_c),
            }
        })
        .collect()
}

/// Simulates the null distribution of the extrinsic p-value, shards in
/// parallel. `c = 0` uses the limiting value `max(p, p₀)`.
pub fn simulate_p_e_null(config: &SimulationConfig) -> Result<SampleSet> {
    config.validate()?;
    let shards: Vec<Vec<NullDraw>> = shard_ranges(config.n_samples, config.shards)
        .into_par_iter()
        .enumerate()
        .map(|(k, (start, end))| simulate_shard(config, k, end - start))
        .collect();
    Ok(SampleSet {
        config: *config,
        draws: shards.into_iter().flatten().collect(),
    })
}

/// Single-threaded reference for [`simulate_p_e_null`].
pub fn simulate_p_e_null_sequential(config: &SimulationConfig) -> Result<SampleSet> {
    config.validate()?;
    let mut draws = Vec::with_capacity(config.n_samples);
    for (k, (start, end)) in shard_ranges(config.n_samples, config.shards).into_iter().enumerate() {
        draws.extend(simulate_shard(config, k, end - start));
    }
    Ok(SampleSet {
        config: *config,
        draws,
    })
}

/// Intrinsic p-values of `n` null studies.
pub fn simulate_p_i_null(n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let shards: Vec<Vec<f64>> = shard_ranges(n, DEFAULT_SHARDS)
        .into_par_iter()
        .enumerate()
        .map(|(k, (start, end))| {
            let mut normals = NormalStream::new(seed, k as u64);
            (start..end)
                .map(|_| intrinsic_p_from_t(normals.next_normal()))
                .collect()
        })
        .collect();
    Ok(shards.into_iter().flatten().collect())
}

/// Null density of the intrinsic p-value, `2√π φ(Φ⁻¹(1 − p_I/2))`.
pub fn p_i_null_density(p_i: f64) -> Result<f64> {
    if !(p_i > 0.0 && p_i < 1.0) {
        return Err(Error::Domain(format!(
            "density is defined on (0, 1), got {p_i}"
        )));
    }
    Ok(TWO_SQRT_PI * pdf(two_sided_critical(p_i)))
}

/// `Pr(p_I < alpha | H0)`.
pub fn null_tail_p_i(alpha: f64) -> Result<f64> {
    intrinsic_threshold(alpha)
}

/// Be(2, 1) density `2x`, the law of `p_E` as `c → 0`.
pub fn limiting_density_c0(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("density is defined on [0, 1], got {x}")));
    }
    Ok(2.0 * x)
}

/// Be(2, 1) distribution function `x²` on `[0, 1]`.
pub fn limiting_cdf_c0(x: f64) -> f64 {
    x.clamp(0.0, 1.0).powi(2)
}

/// Monte Carlo estimate of twice the probability that an identical second
/// study points the other way, drawing `θ̂₂ ~ N(θ̂, 2σ²)`.
pub fn replication_probability_mc(est: &EffectEstimate, n: usize, seed: u64) -> Result<f64> {
    if est.theta_hat() == 0.0 {
        return Err(Error::Domain(
            "direction of a zero estimate is undefined".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let (theta, spread) = (est.theta_hat(), std::f64::consts::SQRT_2 * est.se());
    let opposite: usize = shard_ranges(n, DEFAULT_SHARDS)
        .into_par_iter()
        .enumerate()
        .map(|(k, (start, end))| {
            let mut normals = NormalStream::new(seed, k as u64);
            (start..end)
                .filter(|_| {
                    let replicate = theta + spread * normals.next_normal();
                    replicate * theta.signum() <= 0.0
                })
                .count()
        })
        .sum();
    Ok(2.0 * opposite as f64 / n as f64)
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `values` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Equal-width histogram on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("bins must be at least 1".into()));
        }
        let mut counts = vec![0u64; bins];
        let mut total = 0u64;
        for x in values {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("histogram value {x} outside [0, 1]")));
            }
            let bin = ((x * bins as f64) as usize).min(bins - 1);
            counts[bin] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one value".into()));
        }
        let bin_edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        Ok(Self {
            bin_edges,
            counts,
            total,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Count scaled so the histogram integrates to one.
    pub fn density(&self, bin: usize) -> f64 {
        let width = self.bin_edges[bin + 1] - self.bin_edges[bin];
        self.counts[bin] as f64 / (self.total as f64 * width)
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        0.5 * (self.bin_edges[bin] + self.bin_edges[bin + 1])
    }
}
