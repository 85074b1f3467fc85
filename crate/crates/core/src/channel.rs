//! Shannon quantities and a packetized binary symmetric channel.
//!
//! Packets carry `payload_bits` each. Every bit flips independently with
//! `bit_error_prob`; a packet with any flipped bit counts as corrupted (an
//! ideal CRC detects it). Time is `packets / symbol_rate`, where the default
//! rate makes the raw bit rate equal to `W log2(1 + gamma)`.

use std::ops::{Add, AddAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("probability {0} is outside (0, 1]")]
    InvalidProbability(f64),
    #[error("invalid channel config: {0}")]
    InvalidConfig(String),
    #[error("channel matrix is not row-stochastic: {0}")]
    NonStochasticMatrix(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Bandwidth `W` in hertz.
    pub bandwidth_w: f64,
    /// Linear SINR `gamma`.
    pub sinr_gamma: f64,
    pub payload_bits: usize,
    pub bit_error_prob: f64,
    /// Packets per second; derived from the Shannon rate when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_rate: Option<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            bandwidth_w: 1000.0,
            sinr_gamma: 3.0,
            payload_bits: 128,
            bit_error_prob: 0.0,
            symbol_rate: None,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |m: &str| Err(ChannelError::InvalidConfig(m.to_string()));
        if !(self.bandwidth_w.is_finite() && self.bandwidth_w >= 0.0) {
            return bad("bandwidth_w must be finite and nonnegative");
        }
        if !(self.sinr_gamma.is_finite() && self.sinr_gamma >= 0.0) {
            return bad("sinr_gamma must be finite and nonnegative");
        }
        if self.payload_bits < 8 {
            return bad("payload_bits must be at least 8");
        }
        if !(0.0..=0.5).contains(&self.bit_error_prob) {
            return bad("bit_error_prob must lie in [0, 0.5]");
        }
        match self.symbol_rate {
            Some(r) if !(r.is_finite() && r > 0.0) => bad("symbol_rate must be positive"),
            None if shannon_capacity(self) <= 0.0 => {
                bad("symbol_rate is required when the Shannon capacity is zero")
            }
            _ => Ok(()),
        }
    }

    /// Packets per second.
    pub fn effective_symbol_rate(&self) -> f64 {
        self.symbol_rate
            .unwrap_or_else(|| shannon_capacity(self) / self.payload_bits as f64)
    }

    /// Probability that a packet has at least one flipped bit.
    pub fn packet_error_prob(&self) -> f64 {
        1.0 - (1.0 - self.bit_error_prob).powi(self.payload_bits as i32)
    }

    pub fn packets_for(&self, bits: usize) -> u64 {
        bits.div_ceil(self.payload_bits) as u64
    }

    pub fn seconds_for(&self, packets: u64) -> f64 {
        packets as f64 / self.effective_symbol_rate()
    }
}

/// `-log2 p`.
pub fn self_information(p: f64) -> Result<f64, ChannelError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ChannelError::InvalidProbability(p));
    }
    Ok(-p.log2())
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Binary entropy `H(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// `W log2(1 + gamma)` in bits per second.
pub fn shannon_capacity(cfg: &ChannelConfig) -> f64 {
    cfg.bandwidth_w * (1.0 + cfg.sinr_gamma).log2()
}

const CAPACITY_TOL: f64 = 1e-10;
const CAPACITY_MAX_ITERS: usize = 100_000;

/// Capacity of a discrete memoryless channel `W[x][y]` in bits per use, by
/// Blahut-Arimoto iteration until the upper and lower bounds meet within
/// 1e-10.
pub fn discrete_capacity(matrix: &[Vec<f64>]) -> Result<f64, ChannelError> {
    let bad = |m: String| Err(ChannelError::NonStochasticMatrix(m));
    if matrix.is_empty() {
        return bad("no input symbols".into());
    }
    let ny = matrix[0].len();
    for (x, row) in matrix.iter().enumerate() {
        if row.len() != ny || ny == 0 {
            return bad(format!("row {x} has {} outputs, expected {ny}", row.len()));
        }
        if row.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return bad(format!("row {x} has a negative entry"));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return bad(format!("row {x} sums to {s}"));
        }
    }

    let nx = matrix.len();
    let mut r = vec![1.0 / nx as f64; nx];
    let mut d = vec![0.0; nx];
    let mut lower = 0.0;
    let mut upper = 0.0;
    for _ in 0..CAPACITY_MAX_ITERS {
        let q: Vec<f64> = (0..ny)
            .map(|y| (0..nx).map(|x| r[x] * matrix[x][y]).sum())
            .collect();
        for x in 0..nx {
            d[x] = matrix[x]
                .iter()
                .zip(&q)
                .filter(|(&w, _)| w > 0.0)
                .map(|(&w, &qy)| w * (w / qy).log2())
                .sum();
        }
        let z: f64 = (0..nx).map(|x| r[x] * d[x].exp2()).sum();
        lower = z.log2();
        upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < CAPACITY_TOL {
            break;
        }
        for x in 0..nx {
            r[x] *= d[x].exp2() / z;
        }
    }
    Ok(((lower + upper) / 2.0).max(0.0))
}

/// Binary symmetric channel matrix.
pub fn bsc(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TransmissionCost {
    pub packets: u64,
    pub bits: u64,
    pub seconds: f64,
    pub corrupted_packets: u64,
}

impl Add for TransmissionCost {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            packets: self.packets + o.packets,
            bits: self.bits + o.bits,
            seconds: self.seconds + o.seconds,
            corrupted_packets: self.corrupted_packets + o.corrupted_packets,
        }
    }
}

impl AddAssign for TransmissionCost {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Outcome of [`Channel::send_reliable`].
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub received: BitString,
    pub cost: TransmissionCost,
    /// False when some packet was still corrupted after the retry cap.
    pub delivered: bool,
}

/// A channel with its own seeded error stream.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ChannelConfig,
    rng: ChaCha8Rng,
}

impl Channel {
    pub fn new(cfg: ChannelConfig, seed: u64) -> Self {
        Self {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    fn send_packet(&mut self, chunk: &[bool]) -> (Vec<bool>, bool) {
        let p = self.cfg.bit_error_prob;
        let mut out = chunk.to_vec();
        let mut corrupted = false;
        for i in 0..self.cfg.payload_bits {
            if p > 0.0 && self.rng.gen_bool(p) {
                corrupted = true;
                if let Some(b) = out.get_mut(i) {
                    *b = !*b;
                }
            }
        }
        (out, corrupted)
    }

    fn cost(&self, packets: u64, corrupted: u64) -> TransmissionCost {
        TransmissionCost {
            packets,
            bits: packets * self.cfg.payload_bits as u64,
            seconds: self.cfg.seconds_for(packets),
            corrupted_packets: corrupted,
        }
    }

    /// One pass over the channel; the last packet is padded.
    pub fn send(&mut self, bits: &BitString) -> (BitString, TransmissionCost) {
        let mut received = Vec::with_capacity(bits.len());
        let mut packets = 0;
        let mut corrupted = 0;
        for chunk in bits.as_bools().chunks(self.cfg.payload_bits) {
            let (out, bad) = self.send_packet(chunk);
            received.extend(out);
            packets += 1;
            corrupted += u64::from(bad);
        }
        (
            BitString::from_bools(received),
            self.cost(packets, corrupted),
        )
    }

    /// Resends each corrupted packet until it arrives clean, at most
    /// `max_attempts` times per packet.
    pub fn send_reliable(&mut self, bits: &BitString, max_attempts: usize) -> Delivery {
        let mut received = Vec::with_capacity(bits.len());
        let mut packets = 0;
        let mut corrupted = 0;
        let mut delivered = true;
        for chunk in bits.as_bools().chunks(self.cfg.payload_bits) {
            let mut last = Vec::new();
            let mut ok = false;
            for _ in 0..max_attempts.max(1) {
                let (out, bad) = self.send_packet(chunk);
                packets += 1;
                corrupted += u64::from(bad);
                last = out;
                if !bad {
                    ok = true;
                    break;
                }
            }
            delivered &= ok;
            received.extend(last);
        }
        Delivery {
            received: BitString::from_bools(received),
            cost: self.cost(packets, corrupted),
            delivered,
        }
    }
}

/// Seeded single pass; see [`Channel::send`].
pub fn transmit(bits: &BitString, cfg: &ChannelConfig, seed: u64) -> (BitString, TransmissionCost) {
    Channel::new(cfg.clone(), seed).send(bits)
}

/// Packets a classical link needs to deliver `content_bits`, including the
/// expected retransmissions `1 / (1 - packet error)`, rounded up.
pub fn classical_packets_needed(content_bits: u64, cfg: &ChannelConfig) -> u64 {
    if content_bits == 0 {
        return 0;
    }
    let base = content_bits.div_ceil(cfg.payload_bits as u64);
    let success = 1.0 - cfg.packet_error_prob();
    if success <= 0.0 {
        return u64::MAX;
    }
    (base as f64 / success).ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(payload: usize, p: f64) -> ChannelConfig {
        ChannelConfig {
            payload_bits: payload,
            bit_error_prob: p,
            ..ChannelConfig::default()
        }
    }

    #[test]
    fn information_examples() {
        assert_eq!(self_information(0.5).unwrap(), 1.0);
        assert_eq!(self_information(1.0).unwrap(), 0.0);
        assert!(self_information(0.0).is_err());
        assert_eq!(entropy(&[0.25; 4]), 2.0);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert_eq!(entropy(&[0.5, 0.25, 0.25]), 1.5);
    }

    #[test]
    fn shannon_examples() {
        let c = |w, g| {
            shannon_capacity(&ChannelConfig {
                bandwidth_w: w,
                sinr_gamma: g,
                ..ChannelConfig::default()
            })
        };
        assert_eq!(c(1.0, 1.0), 1.0);
        assert_eq!(c(10.0, 3.0), 20.0);
        assert_eq!(c(5.0, 0.0), 0.0);
    }

    #[test]
    fn capacity_examples() {
        assert!((discrete_capacity(&bsc(0.0)).unwrap() - 1.0).abs() < 1e-9);
        assert!(discrete_capacity(&bsc(0.5)).unwrap().abs() < 1e-9);
        // Z-channel: capacity is log2(1 + (1-p) p^(p/(1-p))) with p = 0.5.
        let z = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        let expected = (1.0f64 + 0.5 * 0.5f64.powf(1.0)).log2();
        assert!((discrete_capacity(&z).unwrap() - expected).abs() < 1e-6);
        assert!(discrete_capacity(&[vec![0.5, 0.6]]).is_err());
    }

    #[test]
    fn packet_counts() {
        let c = cfg(100, 0.0);
        assert_eq!(classical_packets_needed(800, &c), 8);
        assert_eq!(classical_packets_needed(801, &c), 9);
        let (_, cost) = transmit(&BitString::from_bools(vec![true; 1000]), &c, 1);
        assert_eq!(cost.packets, 10);
        assert_eq!(cost.bits, 1000);
        let noisy = cfg(100, 0.001);
        // 8 / (1 - 0.0952) = 8.84 -> 9
        assert_eq!(classical_packets_needed(800, &noisy), 9);
    }

    #[test]
    fn error_free_channel_delivers_exactly() {
        let bits = BitString::from_bools((0..333).map(|i| i % 3 == 0).collect());
        let (rx, cost) = transmit(&bits, &cfg(64, 0.0), 5);
        assert_eq!(rx, bits);
        assert_eq!(cost.corrupted_packets, 0);
        assert_eq!(cost.packets, 6);
    }

    #[test]
    fn reliable_send_recovers_from_errors() {
        let bits = BitString::from_bools(vec![false; 4000]);
        let mut ch = Channel::new(cfg(100, 0.002), 3);
        let d = ch.send_reliable(&bits, 50);
        assert!(d.delivered);
        assert_eq!(d.received, bits);
        assert!(d.cost.packets > 40);
        assert_eq!(d.cost.packets - d.cost.corrupted_packets, 40);
    }
}
