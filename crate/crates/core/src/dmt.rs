//! Closed-form diversity-multiplexing tradeoff curves and an LP oracle for
//! the no-interference outage region.
//!
//! The outage region is
//! `{ 0 <= r_k <= 1, N sum_{k<K} r_k + (N-1) r_K <= N K r }` and the
//! diversity is the minimum of `K - sum r_k` over it.

use crate::error::{Error, Result};

/// Largest relay count for exact vertex enumeration (`K 2^(K-1)` candidates).
pub const MAX_VERTEX_RELAYS: usize = 20;

fn check_gain(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::GainOutOfRange(r));
    }
    Ok(())
}

/// `max{0, K(1-r) - 1/N, K(1-r) - K r/(N-1)}`.
pub fn dmt_theorem1(relays: usize, subblocks: usize, r: f64) -> Result<f64> {
    check_gain(r)?;
    if relays == 0 || subblocks < 2 {
        return Err(Error::InvalidParameter(format!(
            "need K >= 1 and N >= 2 (got K={relays}, N={subblocks})"
        )));
    }
    let k = relays as f64;
    let n = subblocks as f64;
    let base = k * (1.0 - r);
    Ok(0f64.max(base - 1.0 / n).max(base - k * r / (n - 1.0)))
}

/// Lower bound for interfering relays, `max{0, K(1-r) - r/N}`.
pub fn dmt_theorem2_lower(relays: usize, subblocks: usize, r: f64) -> Result<f64> {
    check_gain(r)?;
    if relays < 2 || subblocks < 2 {
        return Err(Error::InvalidParameter(format!(
            "need K >= 2 and N >= 2 (got K={relays}, N={subblocks})"
        )));
    }
    let k = relays as f64;
    Ok((k * (1.0 - r) - r / subblocks as f64).max(0.0))
}

/// Cut-set bound of the `1 x K` uplink, `K(1-r)`.
pub fn dmt_upper_bound(relays: usize, r: f64) -> Result<f64> {
    check_gain(r)?;
    Ok(relays as f64 * (1.0 - r))
}

/// Multiplexing gains at which the closed form switches branch:
/// `1/K - 1/(NK)` and `1 - 1/(NK)`.
pub fn theorem1_breakpoints(relays: usize, subblocks: usize) -> (f64, f64) {
    let nk = (relays * subblocks) as f64;
    (1.0 / relays as f64 - 1.0 / nk, 1.0 - 1.0 / nk)
}

/// Parameters of the no-interference outage region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageRegionNI {
    pub relays: usize,
    pub subblocks: usize,
    pub r: f64,
}

impl OutageRegionNI {
    pub fn new(relays: usize, subblocks: usize, r: f64) -> Result<Self> {
        check_gain(r)?;
        if relays == 0 || subblocks < 2 {
            return Err(Error::InvalidParameter(format!(
                "need K >= 1 and N >= 2 (got K={relays}, N={subblocks})"
            )));
        }
        Ok(Self { relays, subblocks, r })
    }

    fn weight(&self, k: usize) -> f64 {
        if k + 1 == self.relays {
            self.subblocks as f64 - 1.0
        } else {
            self.subblocks as f64
        }
    }

    pub fn budget(&self) -> f64 {
        (self.subblocks * self.relays) as f64 * self.r
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.relays
            && point.iter().all(|&v| (0.0..=1.0).contains(&v))
            && self.load(point) <= self.budget() * (1.0 + 1e-12) + 1e-12
    }

    fn load(&self, point: &[f64]) -> f64 {
        point.iter().enumerate().map(|(k, &v)| self.weight(k) * v).sum()
    }

    pub fn objective(&self, point: &[f64]) -> f64 {
        self.relays as f64 - point.iter().sum::<f64>()
    }

    /// Exact minimum by enumerating the vertices of box ∩ half-space:
    /// feasible box corners, and points on box edges where the hyperplane
    /// crosses. Returns the value and a minimizer.
    pub fn minimize_vertices(&self) -> Result<(f64, Vec<f64>)> {
        let k = self.relays;
        if k > MAX_VERTEX_RELAYS {
            return Err(Error::InvalidParameter(format!(
                "vertex enumeration supports at most {MAX_VERTEX_RELAYS} relays"
            )));
        }
        let budget = self.budget();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut consider = |p: Vec<f64>| {
            if !self.contains(&p) {
                return;
            }
            let v = self.objective(&p);
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, p));
            }
        };
        for mask in 0u32..(1u32 << k) {
            let corner: Vec<f64> = (0..k).map(|j| ((mask >> j) & 1) as f64).collect();
            // corner itself
            consider(corner.clone());
            // edges leaving the corner along coordinates fixed at 0
            for free in 0..k {
                if (mask >> free) & 1 == 1 {
                    continue;
                }
                let fixed: f64 = corner
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != free)
                    .map(|(j, &v)| self.weight(j) * v)
                    .sum();
                let w = self.weight(free);
                if w <= 0.0 {
                    continue;
                }
                let t = (budget - fixed) / w;
                if (0.0..=1.0).contains(&t) {
                    let mut p = corner.clone();
                    p[free] = t;
                    consider(p);
                }
            }
        }
        best.ok_or_else(|| Error::InvalidParameter("outage region is empty".into()))
    }

    /// Dense grid search over `{0, step, 2 step, .., 1}^K`.
    pub fn minimize_grid(&self, steps_per_unit: usize) -> Result<f64> {
        if steps_per_unit == 0 {
            return Err(Error::InvalidParameter("grid needs at least one step".into()));
        }
        let k = self.relays;
        let levels = steps_per_unit + 1;
        let total = levels
            .checked_pow(k as u32)
            .filter(|&t| t <= 200_000_000)
            .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
        let step = 1.0 / steps_per_unit as f64;
        let budget = self.budget();
        let mut best = f64::INFINITY;
        let mut idx = vec![0usize; k];
        for _ in 0..total {
            let mut load = 0.0;
            let mut sum = 0.0;
            for (j, &i) in idx.iter().enumerate() {
                let v = i as f64 * step;
                load += self.weight(j) * v;
                sum += v;
            }
            if load <= budget + 1e-12 {
                best = best.min(k as f64 - sum);
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < levels {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(best)
    }
}

/// Exact LP minimum of `K - sum r_k` over the outage region.
pub fn lp_oracle_ni(relays: usize, subblocks: usize, r: f64) -> Result<f64> {
    Ok(OutageRegionNI::new(relays, subblocks, r)?.minimize_vertices()?.0)
}

/// Grid-search counterpart of [`lp_oracle_ni`]; overshoots by at most `K / steps_per_unit`.
pub fn lp_grid_ni(relays: usize, subblocks: usize, r: f64, steps_per_unit: usize) -> Result<f64> {
    OutageRegionNI::new(relays, subblocks, r)?.minimize_grid(steps_per_unit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveSource {
    Theorem1,
    Theorem2Lower,
    UpperBound,
    LpOracle,
    MonteCarloFit,
}

impl CurveSource {
    pub fn label(&self) -> &'static str {
        match self {
            CurveSource::Theorem1 => "theorem1",
            CurveSource::Theorem2Lower => "theorem2-lower",
            CurveSource::UpperBound => "upper-bound",
            CurveSource::LpOracle => "lp-oracle",
            CurveSource::MonteCarloFit => "mc-fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmtCurve {
    pub source: CurveSource,
    pub points: Vec<(f64, f64)>,
}

impl DmtCurve {
    /// Samples one of the analytic sources over `gains`.
    pub fn sample(source: CurveSource, relays: usize, subblocks: usize, gains: &[f64]) -> Result<Self> {
        let points = gains
            .iter()
            .map(|&r| {
                let d = match source {
                    CurveSource::Theorem1 => dmt_theorem1(relays, subblocks, r)?,
                    CurveSource::Theorem2Lower => dmt_theorem2_lower(relays, subblocks, r)?,
                    CurveSource::UpperBound => dmt_upper_bound(relays, r)?,
                    CurveSource::LpOracle => lp_oracle_ni(relays, subblocks, r)?,
                    CurveSource::MonteCarloFit => {
                        return Err(Error::InvalidParameter("fitted curves come from outage sweeps".into()))
                    }
                };
                Ok((r, d))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { source, points })
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12)
    }
}
