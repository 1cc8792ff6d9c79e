//! Mutual information, outage indicators, Monte Carlo estimation and
//! diversity slope fits.
//!
//! Rates are in bits. Outage means the instantaneous mutual information is
//! `<=` the target `r log2(P)` scaled by the number of slots.

use std::f64::consts::LN_2;

use nalgebra::Cholesky;
use rayon::prelude::*;

use crate::channel::{sample_channel, ChannelRealization, StreamKey};
use crate::error::{Error, Result};
use crate::scheme::{build_equivalent_channel, AmplificationGains, CMatrix, EquivalentChannel};
use crate::topology::InterferenceGraph;
use num_complex::Complex64;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Trials per work unit; the adaptive stop is only checked between rounds.
const BLOCK_TRIALS: u64 = 1024;
const ROUND_BLOCKS: u64 = 64;

/// Instantaneous rate of the transmitter -> relay k -> receiver path in bits.
pub fn subchannel_rate(h: Complex64, g: Complex64, amp: f64, power: f64) -> f64 {
    let ga2 = g.norm_sqr() * amp * amp;
    let snr = power * ga2 * h.norm_sqr() / (1.0 + ga2);
    snr.ln_1p() / LN_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubchannelRates {
    pub rates: Vec<f64>,
}

impl SubchannelRates {
    /// Per-relay rates with the unclipped amplification.
    pub fn compute(re: &ChannelRealization, power: f64) -> Self {
        let gains = AmplificationGains::no_interference(re, power);
        Self::with_gains(re, &gains, power)
    }

    pub fn with_gains(re: &ChannelRealization, gains: &AmplificationGains, power: f64) -> Self {
        let rates =
            re.h.iter()
                .zip(&re.g)
                .zip(&gains.alpha)
                .map(|((&h, &g), &a)| subchannel_rate(h, g, a, power))
                .collect();
        Self { rates }
    }

    /// `N * sum_{k<K} R_k + (N-1) R_K`: relay `K` skips the final slot.
    pub fn weighted_sum(&self, subblocks: usize) -> f64 {
        let n = subblocks as f64;
        let (last, rest) = self.rates.split_last().expect("at least one relay");
        n * rest.iter().sum::<f64>() + (n - 1.0) * last
    }
}

/// Single sub-channel outage: `R_k <= r log2 P`.
pub fn outage_subchannel(h: Complex64, g: Complex64, power: f64, r: f64) -> bool {
    let a = crate::scheme::amp_gain_no_interference(h, power);
    subchannel_rate(h, g, a, power) <= r * power.log2()
}

/// No-interference outage; inter-relay gains in `re` are ignored.
pub fn outage_no_interference(re: &ChannelRealization, subblocks: usize, power: f64, r: f64) -> bool {
    let relays = re.relays() as f64;
    let rates = SubchannelRates::compute(re, power);
    rates.weighted_sum(subblocks) <= subblocks as f64 * relays * r * power.log2()
}

/// `log2 |I + P H_T H_T^H P_N^{-1}|` via Cholesky factors.
///
/// With `P_N = L L^H` the determinant equals that of
/// `I + P (L^{-1} H_T)(L^{-1} H_T)^H`, which is Hermitian positive definite,
/// so its log-determinant is twice the sum of the log Cholesky diagonal.
pub fn general_mutual_information(ec: &EquivalentChannel, power: f64) -> Result<f64> {
    let chol = Cholesky::new(ec.p_n.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let whitened = l.solve_lower_triangular(&ec.h_t).ok_or(Error::NotPositiveDefinite)?;
    let dim = ec.dim();
    let m = CMatrix::identity(dim, dim) + (&whitened * whitened.adjoint()).scale(power);
    let chol_m = Cholesky::new(m).ok_or(Error::NotPositiveDefinite)?;
    let log_det: f64 = chol_m.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>() * 2.0;
    Ok(log_det / LN_2)
}

/// General-layout outage: mutual information `<= (NK+1) r log2 P`.
pub fn outage_general(ec: &EquivalentChannel, power: f64, r: f64) -> Result<bool> {
    let slots = (ec.dim() + 1) as f64;
    Ok(general_mutual_information(ec, power)? <= slots * r * power.log2())
}

/// Which outage event a Monte Carlo run counts.
#[derive(Debug, Clone, PartialEq)]
pub enum OutageModel {
    /// Weighted sum of sub-channel rates over the `NK`-slot layout.
    NoInterference { relays: usize, subblocks: usize },
    /// Log-det over the `NK + 1`-slot layout with clipped gains.
    General { graph: InterferenceGraph, subblocks: usize },
    /// One transmitter -> relay -> receiver path on its own.
    SingleSubchannel,
}

impl OutageModel {
    pub fn indicator(&self, key: StreamKey, power: f64, r: f64) -> Result<bool> {
        match self {
            OutageModel::NoInterference { relays, subblocks } => {
                let re = sample_channel(&InterferenceGraph::empty(*relays), key);
                Ok(outage_no_interference(&re, *subblocks, power, r))
            }
            OutageModel::General { graph, subblocks } => {
                let re = sample_channel(graph, key);
                let gains = AmplificationGains::interference_clipped(&re, power);
                let ec = build_equivalent_channel(&re, &gains, graph.relays(), *subblocks)?;
                outage_general(&ec, power, r)
            }
            OutageModel::SingleSubchannel => {
                let re = sample_channel(&InterferenceGraph::empty(1), key);
                Ok(outage_subchannel(re.h[0], re.g[0], power, r))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub power: f64,
    pub r: f64,
    pub trials: u64,
    pub outages: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
}

impl OutageEstimate {
    pub fn from_counts(power: f64, r: f64, trials: u64, outages: u64) -> Self {
        let p_hat = if trials == 0 {
            0.0
        } else {
            outages as f64 / trials as f64
        };
        Self {
            power,
            r,
            trials,
            outages,
            p_hat,
            ci95: confidence_interval(trials, outages),
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval at 95%. With no outages the upper end is the exact
/// one-sided bound `1 - 0.05^(1/n)`.
pub fn confidence_interval(trials: u64, outages: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    if outages == 0 {
        return (0.0, 1.0 - 0.05f64.powf(1.0 / n));
    }
    let p = outages as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Monte Carlo run controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloPlan {
    pub trials: u64,
    /// Stop early once this many outages are seen and a tenth of the
    /// budget is spent. `None` always runs the full budget.
    pub min_outages: Option<u64>,
    pub seed: u64,
    /// Sweep point id mixed into every trial's random stream.
    pub point: u64,
}

/// Counts outages over independent trials.
///
/// Trials are processed in fixed rounds of blocks; the stop rule is checked
/// only at round boundaries, so the result is the same for any thread count.
pub fn estimate_outage<F>(plan: &MonteCarloPlan, power: f64, r: f64, indicator: F) -> Result<OutageEstimate>
where
    F: Fn(StreamKey) -> Result<bool> + Sync,
{
    if plan.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let round = BLOCK_TRIALS * ROUND_BLOCKS;
    let mut done = 0u64;
    let mut outages = 0u64;
    while done < plan.trials {
        let end = (done + round).min(plan.trials);
        let blocks: Vec<(u64, u64)> = (done..end)
            .step_by(BLOCK_TRIALS as usize)
            .map(|s| (s, (s + BLOCK_TRIALS).min(end)))
            .collect();
        let counts: Result<u64> = blocks
            .par_iter()
            .map(|&(lo, hi)| {
                let mut c = 0u64;
                for t in lo..hi {
                    if indicator(StreamKey::new(plan.seed, plan.point, t))? {
                        c += 1;
                    }
                }
                Ok(c)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b));
        outages += counts?;
        done = end;
        if let Some(min) = plan.min_outages {
            if outages >= min && done * 10 >= plan.trials {
                break;
            }
        }
    }
    Ok(OutageEstimate::from_counts(power, r, done, outages))
}

pub fn monte_carlo_outage(model: &OutageModel, plan: &MonteCarloPlan, power: f64, r: f64) -> Result<OutageEstimate> {
    estimate_outage(plan, power, r, |key| model.indicator(key, power, r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// `(log10 P, -log10 p_hat)`
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// Least-squares slope of `-log10 p_hat` against `log10 P`. Points with
/// `p_hat = 0` are dropped.
pub fn fit_diversity_slope(estimates: &[OutageEstimate]) -> Result<SlopeFit> {
    let mut points: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| e.p_hat > 0.0 && e.power > 0.0)
        .map(|e| (e.power.log10(), -e.p_hat.log10()))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|a, b| a.0 == b.0);
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let (slope, intercept, stderr) = ols(&points);
    Ok(SlopeFit {
        points,
        slope,
        intercept,
        stderr,
    })
}

fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = if points.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}
