//! Gauss-Legendre rules (cached by node count), a log-space variant for
//! integrands spanning hundreds of orders of magnitude, and randomized Halton
//! quasi-Monte Carlo for k >= 3 or predicate-defined sets.

use crate::rng::RngStream;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Descriptor for how a measure integral should be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    /// Gauss-Legendre node count for k = 1 (default 2048).
    pub nodes_1d: usize,
    /// per-axis node count of the tensor rule for k = 2 (default 256).
    pub nodes_2d: usize,
    /// quasi-Monte Carlo sample count for k >= 3 / predicate sets.
    pub qmc_samples: usize,
    /// randomized-shift replicates used for the QMC standard error.
    pub qmc_shifts: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self { nodes_1d: 2048, nodes_2d: 256, qmc_samples: 1 << 16, qmc_shifts: 16 }
    }
}

/// Nodes and weights on [-1, 1].
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on Legendre polynomials; standard construction.
    fn build(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi-style initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // evaluate P_n and its derivative by recurrence
                let mut p0 = 1.0;
                let mut p1 = x;
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                // n == 1 case: p1 = x, p0 = 1
                pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / pp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn with_nodes(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::build(n))).clone()
    }

    /// Integrate f over [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        half * sum
    }

    /// Integrate exp(log_f) over [a, b] where log_f may reach -1e5; the sum
    /// is accumulated relative to the running maximum, and the log of the
    /// integral is returned (-inf for an identically -inf integrand).
    pub fn integrate_log(&self, a: f64, b: f64, mut log_f: impl FnMut(f64) -> f64) -> f64 {
        if b <= a {
            return f64::NEG_INFINITY;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let logs: Vec<f64> = self.nodes.iter().map(|x| log_f(mid + half * x)).collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = logs
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| w * (l - m).exp())
            .sum();
        m + (half * sum).ln()
    }
}

/// Halton sequence point in [0,1)^k (first k primes as bases).
pub fn halton(index: usize, k: usize, out: &mut [f64]) {
    const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    assert!(k <= PRIMES.len(), "halton supports k <= 12");
    for (d, slot) in out.iter_mut().take(k).enumerate() {
        let base = PRIMES[d];
        let mut f = 1.0;
        let mut r = 0.0;
        let mut i = index + 1;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        *slot = r;
    }
}

/// Randomized (Cranley-Patterson shifted) Halton integration of `f` over the
/// cube [-1,1]^k. Returns (estimate, standard error across shifts).
pub fn qmc_integrate_cube(
    k: usize,
    samples: usize,
    shifts: usize,
    rng: &mut RngStream,
    mut f: impl FnMut(&[f64]) -> f64,
) -> (f64, f64) {
    let per_shift = (samples / shifts).max(1);
    let volume = 2f64.powi(k as i32);
    let mut means = Vec::with_capacity(shifts);
    let mut u = vec![0.0; k];
    let mut x = vec![0.0; k];
    for s in 0..shifts {
        let mut shift_rng = rng.substream(s as u64);
        let shift: Vec<f64> = (0..k).map(|_| shift_rng.uniform()).collect();
        let mut acc = 0.0;
        for i in 0..per_shift {
            halton(s * per_shift + i, k, &mut u);
            for d in 0..k {
                let t = (u[d] + shift[d]).fract();
                x[d] = 2.0 * t - 1.0;
            }
            acc += f(&x);
        }
        means.push(volume * acc / per_shift as f64);
    }
    let mean = means.iter().sum::<f64>() / shifts as f64;
    let var = if shifts > 1 {
        means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (shifts as f64 - 1.0)
    } else {
        0.0
    };
    (mean, (var / shifts as f64).sqrt())
}
