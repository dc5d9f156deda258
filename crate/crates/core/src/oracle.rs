//! Independent checks for the analytic results: Monte-Carlo simulation of the
//! untargeted attack and exact counting for small birthday instances.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::attack::{success_probability, Population};
use crate::error::{Error, Result};
use crate::numerics::{check_open_probability, sci, BigReal, Context};

pub const GENERATOR: &str = "ChaCha20Rng (rand_chacha 0.9)";

/// Trials per RNG stream. Fixed, so results do not depend on thread count.
pub const PARTITION_TRIALS: u64 = 4096;

/// Largest pair count supported by [`SubsetCensus`].
pub const CENSUS_MAX_PAIRS: u32 = 30;

pub const SCAN_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub fmr: BigReal,
    pub pop: Population,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(fmr: BigReal, pop: Population, trials: u64, seed: u64) -> Result<Self> {
        check_open_probability("simulate_untargeted", "FMR", &fmr)?;
        if trials == 0 {
            return Err(Error::domain("simulate_untargeted", "requires trials >= 1"));
        }
        Ok(SimConfig { fmr, pop, trials, seed })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub median_rounds: u64,
    pub q1: u64,
    pub q3: u64,
    /// Fraction of trials that succeeded in the first round.
    pub empirical_success_prob: f64,
    /// `1 - (1 - f)^N` as used by the sampler.
    pub success_prob: f64,
    pub trials: u64,
    pub seed: u64,
    pub generator: &'static str,
}

/// Simulates first-success rounds of the untargeted attack on independent
/// templates: each round succeeds with `p = 1 - (1 - f)^N`, sampled by
/// inverse transform `ceil(ln U / ln(1 - p))`.
pub fn simulate_untargeted(ctx: &Context, cfg: &SimConfig) -> Result<SimReport> {
    const OP: &str = "simulate_untargeted";
    let p = success_probability(ctx, &cfg.fmr, cfg.pop)?;
    if p.is_zero() || p == 1 {
        return Err(Error::domain(
            OP,
            format!("success probability 1 - (1 - f)^N degenerates to {} at working precision", sci(&p)),
        ));
    }
    let ln_q = ctx.ln_complement_pow(&cfg.fmr, &ctx.int(cfg.pop.n_users()))?.to_f64();
    if ln_q == 0.0 || !ln_q.is_finite() {
        return Err(Error::domain(OP, "ln(1 - p) is not representable in double precision"));
    }

    let partitions = cfg.trials.div_ceil(PARTITION_TRIALS);
    let mut rounds: Vec<u64> = (0..partitions)
        .into_par_iter()
        .flat_map_iter(|part| {
            let len = PARTITION_TRIALS.min(cfg.trials - part * PARTITION_TRIALS);
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
            rng.set_stream(part);
            (0..len).map(move |_| {
                let u: f64 = rng.sample(Open01);
                ((u.ln() / ln_q).ceil() as u64).max(1)
            })
        })
        .collect();

    let first = rounds.iter().filter(|&&r| r == 1).count();
    rounds.sort_unstable();
    Ok(SimReport {
        median_rounds: nearest_rank(&rounds, 1, 2),
        q1: nearest_rank(&rounds, 1, 4),
        q3: nearest_rank(&rounds, 3, 4),
        empirical_success_prob: first as f64 / cfg.trials as f64,
        success_prob: p.to_f64(),
        trials: cfg.trials,
        seed: cfg.seed,
        generator: GENERATOR,
    })
}

/// Nearest-rank quantile `num/den` of sorted, non-empty data.
fn nearest_rank(sorted: &[u64], num: u64, den: u64) -> u64 {
    let n = sorted.len() as u64;
    let rank = (num * n).div_ceil(den).max(1);
    sorted[(rank - 1) as usize]
}

/// Probability that `draw` pairs taken without replacement from `k_pairs`
/// include at least one of the `false_pairs`: `1 - C(k-F, d) / C(k, d)`.
pub fn enumerate_birthday(k_pairs: u32, false_pairs: u32, draw: u32) -> Result<Rational> {
    const OP: &str = "enumerate_birthday";
    if k_pairs > CENSUS_MAX_PAIRS {
        return Err(Error::domain(OP, format!("requires k_pairs <= {CENSUS_MAX_PAIRS}")));
    }
    if false_pairs > k_pairs || draw > k_pairs {
        return Err(Error::domain(OP, "requires false_pairs <= k_pairs and draw <= k_pairs"));
    }
    let clean = Integer::from(Integer::binomial_u(k_pairs - false_pairs, draw));
    let all = Integer::from(Integer::binomial_u(k_pairs, draw));
    Ok(1 - Rational::from((clean, all)))
}

/// Exhaustive census of every subset of `{0, .., max_pairs - 1}`.
///
/// Pairs are labelled so that the false pairs are `{0, .., F - 1}`; a draw
/// avoids them exactly when its lowest set bit is at least `F`. Subsets are
/// tallied by (highest bit, size, lowest bit), which answers every
/// `(k, F, d)` query with `k <= max_pairs` from one pass.
pub struct SubsetCensus {
    max_pairs: u32,
    /// `counts[high][size][low]`
    counts: Vec<u64>,
}

impl SubsetCensus {
    pub fn build(max_pairs: u32) -> Result<Self> {
        if max_pairs == 0 || max_pairs > CENSUS_MAX_PAIRS {
            return Err(Error::domain("subset_census", format!("requires 1 <= k_pairs <= {CENSUS_MAX_PAIRS}")));
        }
        let dim = max_pairs as usize;
        let cells = dim * (dim + 1) * dim;
        let index = move |high: usize, size: usize, low: usize| (high * (dim + 1) + size) * dim + low;
        const CHUNK: u64 = 1 << 16;
        let total = 1u64 << max_pairs;
        let counts = (0..total.div_ceil(CHUNK))
            .into_par_iter()
            .fold(
                || vec![0u64; cells],
                |mut acc, chunk| {
                    let start = (chunk * CHUNK).max(1);
                    let end = ((chunk + 1) * CHUNK).min(total);
                    for mask in start..end {
                        let high = 63 - mask.leading_zeros() as usize;
                        let size = mask.count_ones() as usize;
                        let low = mask.trailing_zeros() as usize;
                        acc[index(high, size, low)] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; cells],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        Ok(SubsetCensus { max_pairs, counts })
    }

    fn count(&self, high: u32, size: u32, low: u32) -> u64 {
        let dim = self.max_pairs as usize;
        self.counts[(high as usize * (dim + 1) + size as usize) * dim + low as usize]
    }

    /// `(draws avoiding every false pair, all draws)` of size `draw` from
    /// `k_pairs` pairs.
    pub fn tally(&self, k_pairs: u32, false_pairs: u32, draw: u32) -> Result<(u64, u64)> {
        if k_pairs > self.max_pairs || false_pairs > k_pairs || draw > k_pairs {
            return Err(Error::domain(
                "subset_census",
                format!("requires false_pairs <= k_pairs <= {} and draw <= k_pairs", self.max_pairs),
            ));
        }
        if draw == 0 {
            return Ok((1, 1));
        }
        let mut clean = 0;
        let mut all = 0;
        for high in 0..k_pairs {
            for low in 0..=high {
                let c = self.count(high, draw, low);
                all += c;
                if low >= false_pairs {
                    clean += c;
                }
            }
        }
        Ok((clean, all))
    }

    pub fn collision_probability(&self, k_pairs: u32, false_pairs: u32, draw: u32) -> Result<Rational> {
        let (clean, all) = self.tally(k_pairs, false_pairs, draw)?;
        Ok(1 - Rational::from((clean, all)))
    }
}

/// Smallest `m` with `1 - (1 - p)^m >= 1/2`, by stepping `(1 - p)^m` one
/// round at a time.
pub fn scan_first_success_median(ctx: &Context, success_prob: &BigReal) -> Result<u64> {
    check_open_probability("scan_first_success_median", "success_prob", success_prob)?;
    let prec = ctx.precision();
    let step = Float::with_val(prec, 1 - success_prob);
    let mut remaining = ctx.one();
    for m in 1..=SCAN_CAP {
        remaining *= &step;
        if remaining <= 0.5 {
            return Ok(m);
        }
    }
    Err(Error::ScanCapExceeded { cap: SCAN_CAP })
}
