//! Desk-scale simulation of the O(sqrt(n))-bit vector-in-subspace protocol:
//! pre-sampled subspace/net pairs, quantized storage, Alice's max-inner-
//! product step, Bob's projection comparison, and the two supporting
//! concentration checks (projection tail, random nets).

use crate::rng::RngStream;
use crate::sphere::{complement, sample_grassmannian, sample_unit_sphere, Subspace, UnitVector};
use crate::stats::binomial_stderr;
use crate::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    InH,
    InHPerp,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::InH => write!(f, "in-H"),
            Label::InHPerp => write!(f, "in-H-perp"),
        }
    }
}

/// Protocol parameters. The paper-scale net and list sizes are exponential
/// in sqrt(n); the desk-scale defaults cap them at feasible values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub n: usize,
    /// dimension of each shared subspace E_i (paper: floor(C1 sqrt(n)))
    pub dim_e: usize,
    /// points per net (paper: floor(e^{C2 sqrt(n)}), capped)
    pub net_size: usize,
    /// number of pre-sampled (E, N) pairs (paper: floor(e^{sqrt(n)}), capped)
    pub list_size: usize,
    /// stored-coordinate accuracy (paper: log n bits)
    pub quant_bits: u32,
}

impl ProtocolConfig {
    /// C1 = 3 for the subspace dimension, net and list sizes capped, and
    /// ceil(log2 n) quantization bits.
    pub fn desk_default(n: usize) -> Self {
        Self {
            n,
            dim_e: (3.0 * (n as f64).sqrt()).floor() as usize,
            net_size: 20_000,
            list_size: 64,
            quant_bits: (n as f64).log2().ceil() as u32,
        }
    }

    /// ceil(log2 list_size) + ceil(log2 net_size).
    pub fn bits_sent(&self) -> u32 {
        let log2_ceil = |m: usize| -> u32 {
            if m <= 1 {
                0
            } else {
                (m as f64).log2().ceil() as u32
            }
        };
        log2_ceil(self.list_size) + log2_ceil(self.net_size)
    }
}

/// One problem instance: Alice's vector, Bob's subspace, the ground truth.
#[derive(Debug, Clone)]
pub struct Instance {
    pub u: UnitVector,
    pub h: Subspace,
    pub label: Label,
}

/// A pre-sampled (E_i, N_i) pair; net points are stored quantized, as the
/// protocol requires of every shared real number.
#[derive(Debug, Clone)]
pub struct SharedPair {
    pub e: Subspace,
    /// net points in ambient coordinates, quantized
    pub net: Vec<Vec<f64>>,
}

/// Per-instance protocol transcript.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub instance_id: usize,
    pub i_hat: usize,
    pub j_hat: usize,
    pub bits_sent: u32,
    pub label: Label,
    pub answer: Label,
    pub correct: bool,
}

impl Transcript {
    /// Stable log line: `instance_id,i_hat,j_hat,bits,label,answer,correct`.
    pub fn log_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.instance_id,
            self.i_hat,
            self.j_hat,
            self.bits_sent,
            self.label,
            self.answer,
            u8::from(self.correct)
        )
    }
}

/// Round to the nearest multiple of 2^{1-bits} (grid spacing 2/2^bits over
/// [-1,1]), ties to even. Inputs beyond [-1,1] are clamped and flagged.
pub fn quantize(x: f64, bits: u32) -> (f64, bool) {
    let clamped = !(-1.0..=1.0).contains(&x);
    let x = x.clamp(-1.0, 1.0);
    let step = 2.0_f64.powi(1 - bits as i32);
    let q = (x / step).round_ties_even() * step;
    (q, clamped)
}

/// Instance with H Haar of dimension n/2 and u uniform on the subsphere of
/// H or of its complement. Odd n is rejected.
pub fn make_instance(n: usize, in_h: bool, rng: &mut RngStream) -> Result<Instance> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("n must be even, got {n}")));
    }
    let h = sample_grassmannian(n, n / 2, rng);
    let u = if in_h {
        h.sample_point(rng)
    } else {
        complement(&h).sample_point(rng)
    };
    Ok(Instance { u, h, label: if in_h { Label::InH } else { Label::InHPerp } })
}

/// The pre-sampled shared list: `list_size` independent (E_i, N_i) pairs,
/// each net holding `net_size` uniform points of the subsphere, all stored
/// coordinates quantized to `quant_bits`.
pub fn presample_shared(cfg: &ProtocolConfig, rng: &RngStream) -> Vec<SharedPair> {
    (0..cfg.list_size)
        .into_par_iter()
        .map(|i| {
            let mut s = rng.substream(i as u64);
            let e = sample_grassmannian(cfg.n, cfg.dim_e, &mut s);
            let net = (0..cfg.net_size)
                .map(|_| {
                    let p = e.sample_point(&mut s);
                    p.coords().iter().map(|&c| quantize(c, cfg.quant_bits).0).collect()
                })
                .collect();
            SharedPair { e, net }
        })
        .collect()
}

/// Alice: a uniformly random net index, then the argmax of the inner product
/// of u against that net (ties broken toward the lowest index).
pub fn alice_step(u: &UnitVector, shared: &[SharedPair], rng: &mut RngStream) -> (usize, usize) {
    assert!(!shared.is_empty());
    let i_hat = rng.index_below(shared.len());
    let net = &shared[i_hat].net;
    let mut best = f64::NEG_INFINITY;
    let mut j_hat = 0usize;
    for (j, theta) in net.iter().enumerate() {
        let ip: f64 = theta.iter().zip(u.coords()).map(|(a, b)| a * b).sum();
        if ip > best {
            best = ip;
            j_hat = j;
        }
    }
    (i_hat, j_hat)
}

/// Bob: compare the squared projections of theta onto H and its complement;
/// exact ties answer in-H-perp.
pub fn bob_step(h: &Subspace, theta: &[f64]) -> Label {
    let ph = h.projection_sq(theta);
    let total: f64 = theta.iter().map(|v| v * v).sum();
    if ph > total - ph {
        Label::InH
    } else {
        Label::InHPerp
    }
}

/// Aggregate outcome of a protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub success_rate: f64,
    pub stderr: f64,
    pub bits_sent: u32,
    /// success counts split by true label: (correct, total)
    pub in_h: (u64, u64),
    pub in_hperp: (u64, u64),
    pub transcripts: Vec<Transcript>,
}

/// Execute the derandomized protocol: one shared list for every instance.
pub fn run_protocol(
    cfg: &ProtocolConfig,
    instances: &[Instance],
    rng: &RngStream,
) -> Result<ProtocolRun> {
    for inst in instances {
        if inst.u.ambient_dim() != cfg.n {
            return Err(Error::DimensionMismatch("instance dimension != config n".into()));
        }
    }
    let shared = presample_shared(cfg, &rng.substream(0));
    let alice_root = rng.substream(1);
    let transcripts: Vec<Transcript> = instances
        .par_iter()
        .enumerate()
        .map(|(id, inst)| {
            let mut s = alice_root.substream(id as u64);
            let (i_hat, j_hat) = alice_step(&inst.u, &shared, &mut s);
            let answer = bob_step(&inst.h, &shared[i_hat].net[j_hat]);
            Transcript {
                instance_id: id,
                i_hat,
                j_hat,
                bits_sent: cfg.bits_sent(),
                label: inst.label,
                answer,
                correct: answer == inst.label,
            }
        })
        .collect();
    Ok(summarize(cfg, transcripts))
}

/// Shared-randomness variant: a fresh (E, N) pair per instance (the public
/// coin protocol, list length 1).
pub fn run_protocol_shared(
    cfg: &ProtocolConfig,
    instances: &[Instance],
    rng: &RngStream,
) -> Result<ProtocolRun> {
    let one = ProtocolConfig { list_size: 1, ..*cfg };
    let transcripts: Vec<Transcript> = instances
        .par_iter()
        .enumerate()
        .map(|(id, inst)| {
            let pair_rng = rng.substream(id as u64);
            let shared = presample_shared(&one, &pair_rng);
            let mut s = pair_rng.substream(u64::MAX);
            let (i_hat, j_hat) = alice_step(&inst.u, &shared, &mut s);
            let answer = bob_step(&inst.h, &shared[i_hat].net[j_hat]);
            Transcript {
                instance_id: id,
                i_hat,
                j_hat,
                bits_sent: one.bits_sent(),
                label: inst.label,
                answer,
                correct: answer == inst.label,
            }
        })
        .collect();
    Ok(summarize(&one, transcripts))
}

fn summarize(cfg: &ProtocolConfig, transcripts: Vec<Transcript>) -> ProtocolRun {
    let total = transcripts.len() as u64;
    let correct = transcripts.iter().filter(|t| t.correct).count() as u64;
    let mut in_h = (0u64, 0u64);
    let mut in_hperp = (0u64, 0u64);
    for t in &transcripts {
        match t.label {
            Label::InH => {
                in_h.1 += 1;
                in_h.0 += u64::from(t.correct);
            }
            Label::InHPerp => {
                in_hperp.1 += 1;
                in_hperp.0 += u64::from(t.correct);
            }
        }
    }
    ProtocolRun {
        success_rate: correct as f64 / total.max(1) as f64,
        stderr: binomial_stderr(correct, total.max(1)),
        bits_sent: cfg.bits_sent(),
        in_h,
        in_hperp,
        transcripts,
    }
}

/// Empirical frequency of ||Proj_F v|^2 - l/d| >= t over Haar draws of v
/// against the fixed frame F = span{e_1..e_l}.
pub fn projection_tail(d: usize, l: usize, t: f64, trials: usize, rng: &RngStream) -> f64 {
    assert!(l <= d);
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut s = rng.substream(i as u64);
            let v = sample_unit_sphere(d, &mut s);
            let p: f64 = v.coords()[..l].iter().map(|x| x * x).sum();
            usize::from((p - l as f64 / d as f64).abs() >= t)
        })
        .sum();
    hits as f64 / trials as f64
}

/// Whether `net_size` uniform points of S^{d-1} form a 1/2-net, audited
/// against `probes` random test points (distance 1/2 means inner product at
/// least 7/8).
pub fn half_net_trial(d: usize, net_size: usize, probes: usize, rng: &mut RngStream) -> bool {
    let net: Vec<Vec<f64>> = (0..net_size)
        .map(|_| sample_unit_sphere(d, rng).coords().to_vec())
        .collect();
    'probe: for _ in 0..probes {
        let x = sample_unit_sphere(d, rng);
        for theta in &net {
            let ip: f64 = theta.iter().zip(x.coords()).map(|(a, b)| a * b).sum();
            if ip >= 0.875 {
                continue 'probe;
            }
        }
        return false;
    }
    true
}
