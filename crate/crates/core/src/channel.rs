//! Quasi-static Rayleigh channel draws and high-SNR exponent transforms.
//!
//! Every draw is keyed by a [`StreamKey`] so a trial's channel depends only on
//! `(master seed, sweep point, trial index)`, never on which worker ran it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::topology::{prev_relay, InterferenceGraph};

/// Squared magnitudes below this are redrawn.
pub const ZERO_GAIN_FLOOR: f64 = 1e-300;

/// Identifies one deterministic random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub point: u64,
    pub trial: u64,
}

impl StreamKey {
    pub fn new(seed: u64, point: u64, trial: u64) -> Self {
        Self { seed, point, trial }
    }

    /// ChaCha generator whose key comes from `(seed, point)` and whose stream
    /// id is the trial index.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed ^ 0x6a09_e667_f3bc_c908;
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            state = splitmix64(state ^ self.point.rotate_left(17 * i as u32 + 1));
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trial);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One block's worth of channel gains.
///
/// Entry `k - 1` of `i` is the gain *into* relay `k` from relay `prev(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub i: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn relays(&self) -> usize {
        self.h.len()
    }

    /// Builds a realization from explicit gains; all three vectors must share a length.
    pub fn new(h: Vec<Complex64>, g: Vec<Complex64>, i: Vec<Complex64>) -> Result<Self> {
        if h.is_empty() || h.len() != g.len() || h.len() != i.len() {
            return Err(Error::Dimension(format!(
                "gain vectors have lengths {}, {}, {}",
                h.len(),
                g.len(),
                i.len()
            )));
        }
        Ok(Self { h, g, i })
    }

    /// Same realization with all inter-relay gains removed.
    pub fn without_interference(&self) -> Self {
        Self {
            h: self.h.clone(),
            g: self.g.clone(),
            i: vec![Complex64::new(0.0, 0.0); self.h.len()],
        }
    }
}

/// Unit-variance circularly-symmetric complex Gaussian.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

fn fading_gain<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    loop {
        let c = complex_gaussian(rng);
        if c.norm_sqr() >= ZERO_GAIN_FLOOR {
            return c;
        }
    }
}

/// Draws `h`, `g`, `i` in that order from `rng`.
///
/// Inter-relay gains are always drawn (so `h` and `g` do not depend on the
/// graph) and then zeroed for non-interfering `(prev(k), k)` pairs.
pub fn sample_realization<R: Rng + ?Sized>(graph: &InterferenceGraph, rng: &mut R) -> ChannelRealization {
    let relays = graph.relays();
    let h: Vec<_> = (0..relays).map(|_| fading_gain(rng)).collect();
    let g: Vec<_> = (0..relays).map(|_| fading_gain(rng)).collect();
    let i = (1..=relays)
        .map(|k| {
            let draw = fading_gain(rng);
            let p = prev_relay(k, relays).expect("k in range");
            if graph.interferes(p, k) {
                draw
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    ChannelRealization { h, g, i }
}

pub fn sample_channel(graph: &InterferenceGraph, key: StreamKey) -> ChannelRealization {
    sample_realization(graph, &mut key.rng())
}

/// Gains expressed as powers of `P`: `|h_k|^2 = P^{-mu_k}` and likewise
/// `nu` for `g`, `omega` for `i`. Zero gains map to `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrExponents {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub omega: Vec<f64>,
    pub power: f64,
}

impl SnrExponents {
    /// `P^{-e}` for a single exponent, the inverse transform.
    pub fn gain_from_exponent(&self, e: f64) -> f64 {
        self.power.powf(-e)
    }
}

pub fn snr_exponent(gain_sq: f64, power: f64) -> f64 {
    if gain_sq <= 0.0 {
        f64::INFINITY
    } else {
        -gain_sq.ln() / power.ln()
    }
}

pub fn snr_exponents(re: &ChannelRealization, power: f64) -> Result<SnrExponents> {
    if power.is_nan() || power <= 1.0 {
        return Err(Error::PowerTooSmall(power));
    }
    let tx = |v: &[Complex64]| v.iter().map(|c| snr_exponent(c.norm_sqr(), power)).collect();
    Ok(SnrExponents {
        mu: tx(&re.h),
        nu: tx(&re.g),
        omega: tx(&re.i),
        power,
    })
}
