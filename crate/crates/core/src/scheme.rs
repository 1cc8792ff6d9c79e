//! Amplify-and-forward gains and the equivalent `NK x NK` channel.
//!
//! All `NK`-dimensional objects use the slot order
//! `(1,1), (1,2), .., (1,K), (2,1), .., (N,K)`: row `j` belongs to the slot in
//! which relay `j mod K + 1` listens, and to the receiver slot one later.
//! The received block satisfies `y = G Omega F (H x + n) + z`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::topology::prev_relay;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Amplitude gain with `a^2 = P / (|h|^2 P + 1)`, so the relay output power is exactly `P`.
pub fn amp_gain_no_interference(h: Complex64, power: f64) -> f64 {
    (power / (h.norm_sqr() * power + 1.0)).sqrt()
}

/// Clipped amplitude gain, `a^2 = min{1, P / (P(|h|^2 + |i|^2) + 1)}`.
///
/// The clip at 1 keeps relay noise from being boosted down the chain.
pub fn amp_gain_interference(h: Complex64, i: Complex64, power: f64) -> f64 {
    let a2 = power / (power * (h.norm_sqr() + i.norm_sqr()) + 1.0);
    a2.min(1.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainRegime {
    NoInterference,
    InterferenceClipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationGains {
    pub alpha: Vec<f64>,
    pub regime: GainRegime,
}

impl AmplificationGains {
    pub fn no_interference(re: &ChannelRealization, power: f64) -> Self {
        Self {
            alpha: re.h.iter().map(|&h| amp_gain_no_interference(h, power)).collect(),
            regime: GainRegime::NoInterference,
        }
    }

    pub fn interference_clipped(re: &ChannelRealization, power: f64) -> Self {
        Self {
            alpha: re
                .h
                .iter()
                .zip(&re.i)
                .map(|(&h, &i)| amp_gain_interference(h, i, power))
                .collect(),
            regime: GainRegime::InterferenceClipped,
        }
    }
}

fn check_dims(re: &ChannelRealization, gains: &AmplificationGains, relays: usize, subblocks: usize) -> Result<()> {
    if relays == 0 || subblocks == 0 {
        return Err(Error::Dimension("relay and sub-block counts must be positive".into()));
    }
    if re.relays() != relays || gains.alpha.len() != relays || re.g.len() != relays || re.i.len() != relays {
        return Err(Error::Dimension(format!(
            "expected {relays} relays, realization has {} and gains {}",
            re.relays(),
            gains.alpha.len()
        )));
    }
    Ok(())
}

/// Relay listening in 0-based slot row `j`.
fn relay_of(j: usize, relays: usize) -> usize {
    j % relays + 1
}

/// Propagation matrix `F` from `p_{0,k,k} = 1`, `p_{n,k,k1} = i_(k) a_(k) p_{(n),(k),k1}`.
///
/// Row `(n,k)` inherits row `((n),(k))` scaled by the gain of the
/// interference path into relay `k` (`re.i[k-1]`) times the amplification
/// of the relay that was transmitting on it (`prev(k)`). The first slot has
/// no predecessor, so its row is a unit vector.
pub fn propagation_coeffs(
    re: &ChannelRealization,
    gains: &AmplificationGains,
    relays: usize,
    subblocks: usize,
) -> Result<CMatrix> {
    check_dims(re, gains, relays, subblocks)?;
    let dim = relays * subblocks;
    let mut f = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        f[(j, j)] = ONE;
        if j == 0 {
            continue;
        }
        let k = relay_of(j, relays);
        let p = prev_relay(k, relays)?;
        let step = re.i[k - 1] * gains.alpha[p - 1];
        if step == ZERO {
            continue;
        }
        for m in 0..j {
            f[(j, m)] = step * f[(j - 1, m)];
        }
    }
    Ok(f)
}

/// The same chain with each step `a_k i_k` paired on the listening relay,
/// so that `Omega F = F_norm Omega`. Entries are bounded by 1 under clipped gains.
pub fn normalized_propagation(
    re: &ChannelRealization,
    gains: &AmplificationGains,
    relays: usize,
    subblocks: usize,
) -> Result<CMatrix> {
    check_dims(re, gains, relays, subblocks)?;
    let dim = relays * subblocks;
    let mut f = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        f[(j, j)] = ONE;
        if j == 0 {
            continue;
        }
        let k = relay_of(j, relays);
        let step = re.i[k - 1] * gains.alpha[k - 1];
        for m in 0..j {
            f[(j, m)] = step * f[(j - 1, m)];
        }
    }
    Ok(f)
}

/// `I_N (x) diag(v)` as a dense matrix.
pub fn block_diagonal(v: &[Complex64], subblocks: usize) -> CMatrix {
    let full: Vec<Complex64> = (0..subblocks).flat_map(|_| v.iter().copied()).collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(full))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    pub relays: usize,
    pub subblocks: usize,
    pub f: CMatrix,
    pub g: CMatrix,
    pub h: CMatrix,
    pub omega: CMatrix,
    /// `G Omega F H`
    pub h_t: CMatrix,
    /// `I + G Omega F F^H Omega^H G^H`
    pub p_n: CMatrix,
}

impl EquivalentChannel {
    pub fn dim(&self) -> usize {
        self.relays * self.subblocks
    }

    /// `G Omega F`, the map from relay inputs to the receiver.
    pub fn relay_to_receiver(&self) -> CMatrix {
        &self.g * &self.omega * &self.f
    }

    /// Applies `y = G Omega F (H x + n) + z` column by column (one column per symbol).
    pub fn apply(&self, x: &CMatrix, relay_noise: &CMatrix, rx_noise: &CMatrix) -> Result<CMatrix> {
        let dim = self.dim();
        for (name, m) in [("x", x), ("relay noise", relay_noise), ("receiver noise", rx_noise)] {
            if m.nrows() != dim || m.ncols() != x.ncols() {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {dim}x{}",
                    m.nrows(),
                    m.ncols(),
                    x.ncols()
                )));
            }
        }
        Ok(self.relay_to_receiver() * (&self.h * x + relay_noise) + rx_noise)
    }
}

pub fn build_equivalent_channel(
    re: &ChannelRealization,
    gains: &AmplificationGains,
    relays: usize,
    subblocks: usize,
) -> Result<EquivalentChannel> {
    let f = propagation_coeffs(re, gains, relays, subblocks)?;
    let g = block_diagonal(&re.g, subblocks);
    let h = block_diagonal(&re.h, subblocks);
    let alpha: Vec<Complex64> = gains.alpha.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let omega = block_diagonal(&alpha, subblocks);
    let gof = &g * &omega * &f;
    let h_t = &gof * &h;
    let dim = relays * subblocks;
    let p_n = CMatrix::identity(dim, dim) + &gof * gof.adjoint();
    Ok(EquivalentChannel {
        relays,
        subblocks,
        f,
        g,
        h,
        omega,
        h_t,
        p_n,
    })
}

/// Runs the general `NK + 1` slot layout one slot at a time.
///
/// `x`, `relay_noise` and `rx_noise` are `NK x T'`: row `j` of `x` and
/// `relay_noise` is what the transmitter sends and what the listening relay
/// adds in slot `j + 1`; row `j` of `rx_noise` is the receiver noise in slot
/// `j + 2`. The returned rows are the receiver slots `2 ..= NK + 1`, i.e.
/// `[y_{1,2}, y_{1,3}, .., y_{N+1,1}]`.
///
/// The listening relay hears the transmitter plus whatever `prev(k)` is
/// forwarding in the same slot, scaled by `re.i[k-1]`.
pub fn simulate_signal_level(
    re: &ChannelRealization,
    gains: &AmplificationGains,
    relays: usize,
    subblocks: usize,
    x: &CMatrix,
    relay_noise: &CMatrix,
    rx_noise: &CMatrix,
) -> Result<CMatrix> {
    check_dims(re, gains, relays, subblocks)?;
    let dim = relays * subblocks;
    let symbols = x.ncols();
    for (name, m) in [("x", x), ("relay noise", relay_noise), ("receiver noise", rx_noise)] {
        if m.nrows() != dim || m.ncols() != symbols {
            return Err(Error::Dimension(format!(
                "{name} is {}x{}, expected {dim}x{symbols}",
                m.nrows(),
                m.ncols()
            )));
        }
    }

    let mut y = CMatrix::zeros(dim, symbols);
    // what is on the air from a relay during the current slot, and who sent it
    let mut on_air: Option<(usize, Vec<Complex64>)> = None;

    for slot in 0..=dim {
        // receiver hears the forwarding relay (slots 2..=NK+1)
        if let Some((sender, signal)) = &on_air {
            let row = slot - 1;
            for s in 0..symbols {
                y[(row, s)] = re.g[sender - 1] * signal[s] + rx_noise[(row, s)];
            }
        }
        if slot == dim {
            break;
        }

        let k = relay_of(slot, relays);
        let mut heard: Vec<Complex64> = (0..symbols)
            .map(|s| re.h[k - 1] * x[(slot, s)] + relay_noise[(slot, s)])
            .collect();
        if let Some((sender, signal)) = &on_air {
            debug_assert_eq!(*sender, prev_relay(k, relays)?);
            for s in 0..symbols {
                heard[s] += re.i[k - 1] * signal[s];
            }
        }
        let a = gains.alpha[k - 1];
        on_air = Some((k, heard.into_iter().map(|v| v * a).collect()));
    }
    Ok(y)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn hermitian_max_eigenvalue(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Row-major text dump, one matrix row per line, entries as `a+bi`.
pub fn dump_matrix(name: &str, m: &CMatrix) -> String {
    let mut out = format!("# {name} {} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| {
                let v = m[(r, c)];
                format!("{}{:+}i", v.re, v.im)
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, StreamKey};
    use crate::topology::InterferenceGraph;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn no_interference_gain_examples() {
        let a = amp_gain_no_interference(c(1.0, 0.0), 100.0);
        assert!((a * a - 100.0 / 101.0).abs() < 1e-14);
        let a = amp_gain_no_interference(c(0.0, 0.0), 100.0);
        assert!((a * a - 100.0).abs() < 1e-12);
        let a = amp_gain_no_interference(c(1e8, 0.0), 100.0);
        assert!(a * a < 1e-15);
    }

    #[test]
    fn no_interference_gain_meets_power() {
        for &hs in &[0.0, 1e-3, 0.5, 1.0, 7.0] {
            for &p in &[1.0, 10.0, 1e4] {
                let a = amp_gain_no_interference(c(hs, 0.0), p);
                let out = a * a * (hs * hs * p + 1.0);
                assert!((out - p).abs() <= 1e-10 * p);
            }
        }
    }

    #[test]
    fn clipped_gain_examples() {
        let a = amp_gain_interference(c(0.0, 0.0), c(0.0, 0.0), 100.0);
        assert_eq!(a, 1.0);
        let a = amp_gain_interference(c(1.0, 0.0), c(0.0, 0.0), 100.0);
        assert!((a * a - 100.0 / 101.0).abs() < 1e-14);
        let a = amp_gain_interference(c(0.0, 0.0), c(3.0, 0.0), 1e12);
        assert!((a * a - 1.0 / 9.0).abs() < 1e-10);
        assert!(a * 3.0 <= 1.0);
    }

    #[test]
    fn f_is_identity_without_interference() {
        let re = sample_channel(&InterferenceGraph::empty(3), StreamKey::new(1, 0, 0));
        let gains = AmplificationGains::interference_clipped(&re, 100.0);
        let f = propagation_coeffs(&re, &gains, 3, 2).unwrap();
        assert_eq!(f, CMatrix::identity(6, 6));
    }

    #[test]
    fn f_single_step_by_hand() {
        let re = ChannelRealization::new(
            vec![c(0.3, 0.1), c(-0.5, 0.7)],
            vec![c(1.1, 0.0), c(0.2, -0.4)],
            vec![c(0.6, 0.2), c(-0.9, 0.3)],
        )
        .unwrap();
        let gains = AmplificationGains::interference_clipped(&re, 50.0);
        let f = propagation_coeffs(&re, &gains, 2, 1).unwrap();
        // gain into relay 2 from relay 1, scaled by relay 1's amplification
        let p = re.i[1] * gains.alpha[0];
        assert_eq!(f[(0, 0)], ONE);
        assert_eq!(f[(0, 1)], ZERO);
        assert!((f[(1, 0)] - p).norm() < 1e-15);
        assert_eq!(f[(1, 1)], ONE);
    }

    #[test]
    fn f_two_step_chain() {
        let re = ChannelRealization::new(
            vec![c(0.3, 0.1), c(-0.5, 0.7)],
            vec![c(1.1, 0.0), c(0.2, -0.4)],
            vec![c(0.6, 0.2), c(-0.9, 0.3)],
        )
        .unwrap();
        let gains = AmplificationGains::interference_clipped(&re, 50.0);
        let f = propagation_coeffs(&re, &gains, 2, 2).unwrap();
        // row (2,1) from column (1,1): into relay 2 (from 1), then into relay 1 (from 2)
        let expected = (re.i[1] * gains.alpha[0]) * (re.i[0] * gains.alpha[1]);
        assert!((f[(2, 0)] - expected).norm() < 1e-15);
    }

    #[test]
    fn normalized_f_commutes_with_omega() {
        let graph = InterferenceGraph::complete(3);
        for t in 0..20 {
            let re = sample_channel(&graph, StreamKey::new(5, 0, t));
            let gains = AmplificationGains::interference_clipped(&re, 300.0);
            let ec = build_equivalent_channel(&re, &gains, 3, 2).unwrap();
            let fn_ = normalized_propagation(&re, &gains, 3, 2).unwrap();
            let lhs = &ec.omega * &ec.f;
            let rhs = &fn_ * &ec.omega;
            assert!((lhs - rhs).norm() < 1e-12);
            assert!(fn_.iter().all(|v| v.norm() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn diagonal_channel_without_interference() {
        let re = sample_channel(&InterferenceGraph::empty(2), StreamKey::new(2, 0, 0));
        let gains = AmplificationGains::interference_clipped(&re, 100.0);
        let ec = build_equivalent_channel(&re, &gains, 2, 3).unwrap();
        for j in 0..6 {
            let k = j % 2;
            let d = re.g[k] * gains.alpha[k] * re.h[k];
            assert!((ec.h_t[(j, j)] - d).norm() < 1e-14);
            let pn = 1.0 + (re.g[k] * gains.alpha[k]).norm_sqr();
            assert!((ec.p_n[(j, j)] - c(pn, 0.0)).norm() < 1e-12);
            for m in 0..6 {
                if m != j {
                    assert_eq!(ec.h_t[(j, m)], ZERO);
                    assert!(ec.p_n[(j, m)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn p_n_is_hermitian_above_identity() {
        let graph = InterferenceGraph::complete(4);
        for t in 0..20 {
            let re = sample_channel(&graph, StreamKey::new(8, 0, t));
            let gains = AmplificationGains::interference_clipped(&re, 1e3);
            let ec = build_equivalent_channel(&re, &gains, 4, 2).unwrap();
            assert!((&ec.p_n - ec.p_n.adjoint()).norm() < 1e-12);
            assert!(hermitian_min_eigenvalue(&ec.p_n) >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn impulse_through_diagonal_channel() {
        let re = sample_channel(&InterferenceGraph::empty(3), StreamKey::new(4, 0, 0));
        let gains = AmplificationGains::interference_clipped(&re, 100.0);
        let mut x = CMatrix::zeros(6, 1);
        x[(0, 0)] = ONE;
        let zero = CMatrix::zeros(6, 1);
        let y = simulate_signal_level(&re, &gains, 3, 2, &x, &zero, &zero).unwrap();
        let expected = re.g[0] * gains.alpha[0] * re.h[0];
        assert!((y[(0, 0)] - expected).norm() < 1e-15);
        assert_eq!(y.iter().filter(|v| v.norm() > 0.0).count(), 1);
    }

    #[test]
    fn impulse_leaks_through_interference() {
        let re = sample_channel(&InterferenceGraph::complete(2), StreamKey::new(4, 1, 0));
        let gains = AmplificationGains::interference_clipped(&re, 100.0);
        let mut x = CMatrix::zeros(2, 1);
        x[(0, 0)] = ONE;
        let zero = CMatrix::zeros(2, 1);
        let y = simulate_signal_level(&re, &gains, 2, 1, &x, &zero, &zero).unwrap();
        let first = re.g[0] * gains.alpha[0] * re.h[0];
        let second = re.g[1] * gains.alpha[1] * re.i[1] * gains.alpha[0] * re.h[0];
        assert!((y[(0, 0)] - first).norm() < 1e-15);
        assert!((y[(1, 0)] - second).norm() < 1e-15);
    }

    #[test]
    fn dimension_errors() {
        let re = sample_channel(&InterferenceGraph::empty(2), StreamKey::new(4, 0, 0));
        let gains = AmplificationGains::interference_clipped(&re, 100.0);
        assert!(propagation_coeffs(&re, &gains, 3, 2).is_err());
        let x = CMatrix::zeros(3, 1);
        assert!(simulate_signal_level(&re, &gains, 2, 2, &x, &x, &x).is_err());
    }

    #[test]
    fn dump_format() {
        let m = CMatrix::from_row_slice(1, 2, &[c(1.5, -2.0), c(0.0, 0.25)]);
        assert_eq!(dump_matrix("F", &m), "# F 1 2\n1.5-2i 0+0.25i\n");
    }
}
