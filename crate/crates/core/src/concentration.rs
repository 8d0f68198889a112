//! The geometric-mean statistic sqrt(sigma_H(A) sigma_Hperp(A)), its reduced
//! k-dimensional integral representation, the Cauchy-Schwarz lower bound and
//! the small-ball / Laplace tail estimates.

use crate::quadrature::{qmc_integrate_cube, GaussLegendre, QuadratureRule};
use crate::rng::RngStream;
use crate::special::{log_ball_volume, log_binomial, log_coarea_constant};
use crate::spectra::{sample_lambda_u, sample_lambda_u_wishart, RotationWithSpectrum};
use crate::sphere::{
    complement, coordinate_set_measure, restricted_measure_mc, sample_grassmannian,
    AnalyticConstants, CoordinateSet, Subspace,
};
use crate::{Error, Result};
use rayon::prelude::*;

/// A bounded density f on the sphere depending on the first k coordinates,
/// with `norm_1(f) = 1`.
#[derive(Debug, Clone)]
pub enum BoundedDensity {
    /// f identically 1.
    Uniform { k: usize },
    /// f = 1_A / sigma(A) for a coordinate-determined set A of measure
    /// `measure` in S^{n-1}.
    NormalizedIndicator { set: CoordinateSet, measure: f64 },
}

impl BoundedDensity {
    /// Normalized indicator of a set; fails on zero measure.
    pub fn indicator(n: usize, set: CoordinateSet, rule: &QuadratureRule) -> Result<Self> {
        let m = coordinate_set_measure(n, &set, rule)?;
        if m.value <= 0.0 {
            return Err(Error::ZeroMeasure);
        }
        Ok(Self::NormalizedIndicator { set, measure: m.value })
    }

    pub fn k(&self) -> usize {
        match self {
            Self::Uniform { k } => *k,
            Self::NormalizedIndicator { set, .. } => set.k(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Uniform { .. } => 1.0,
            Self::NormalizedIndicator { measure, .. } => 1.0 / measure,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Uniform { .. } => 1.0,
            Self::NormalizedIndicator { set, measure } => {
                if set.contains(x) {
                    1.0 / measure
                } else {
                    0.0
                }
            }
        }
    }

    /// For k = 1 interval-backed sets: (intervals, height); None otherwise.
    fn intervals_1d(&self) -> Option<(Vec<(f64, f64)>, f64)> {
        match self {
            Self::Uniform { k: 1 } => Some((vec![(-1.0, 1.0)], 1.0)),
            Self::NormalizedIndicator { set, measure } => {
                set.intervals_1d().map(|iv| (iv, 1.0 / measure))
            }
            _ => None,
        }
    }
}

/// How a geometric-mean sample was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DirectMc,
    ReducedIntegral,
}

/// One draw of the statistic sqrt(g_H * g_Hperp).
#[derive(Debug, Clone)]
pub struct GeometricMeanSample {
    pub n: usize,
    pub k: usize,
    /// index of the stream the subspace (or spectrum) was drawn from
    pub subspace_stream: u64,
    /// normalized H-side integral, int f dsigma_H
    pub g_h: f64,
    /// normalized H-perp-side integral
    pub g_hperp: f64,
    pub statistic: f64,
    pub method: Method,
}

impl GeometricMeanSample {
    fn new(n: usize, k: usize, stream: u64, g_h: f64, g_hperp: f64, method: Method) -> Self {
        Self {
            n,
            k,
            subspace_stream: stream,
            g_h,
            g_hperp,
            statistic: (g_h * g_hperp).max(0.0).sqrt(),
            method,
        }
    }
}

/// Direct Monte Carlo: sigma_H(A)/sigma(A) and sigma_Hperp(A)/sigma(A) from
/// independent streams, geometric mean of the two ratios.
pub fn geometric_mean_direct(
    set: &CoordinateSet,
    h: &Subspace,
    samples: usize,
    rng: &mut RngStream,
    rule: &QuadratureRule,
) -> Result<GeometricMeanSample> {
    let n = h.ambient_dim();
    let sigma = coordinate_set_measure(n, set, rule)?.value;
    if sigma <= 0.0 {
        return Err(Error::ZeroMeasure);
    }
    let hp = complement(h);
    let mut s1 = rng.substream(1);
    let mut s2 = rng.substream(2);
    let (p1, _) = restricted_measure_mc(set, h, samples, &mut s1);
    let (p2, _) = restricted_measure_mc(set, &hp, samples, &mut s2);
    Ok(GeometricMeanSample::new(
        n,
        set.k(),
        rng.stream_index(),
        p1 / sigma,
        p2 / sigma,
        Method::DirectMc,
    ))
}

/// exponent (n/2 - k - 2)/2 of the half-dimension density.
fn half_density_exponent(n: usize, k: usize) -> f64 {
    (n as f64 / 2.0 - k as f64 - 2.0) / 2.0
}

/// One side of the reduced representation:
/// int_{B_k} f(M x) (1 - |x|^2)^{(n/2-k-2)/2} dx for M = U Lambda U^T or
/// M = U sqrt(I - Lambda^2) U^T.
fn reduced_side_integral(
    f: &BoundedDensity,
    lu: &RotationWithSpectrum,
    use_complement_side: bool,
    n: usize,
    rule: &QuadratureRule,
) -> f64 {
    let k = lu.k();
    let q = half_density_exponent(n, k);
    let lam = lu.spectrum.values();
    let density = |r2: f64| -> f64 {
        let b = 1.0 - r2;
        if b <= 0.0 {
            0.0
        } else {
            (q * b.ln()).exp()
        }
    };
    if k == 1 {
        // U = +-1 cancels: M x = c x with c the (single) cosine or its complement
        let c = if use_complement_side {
            (1.0 - lam[0] * lam[0]).max(0.0).sqrt()
        } else {
            lam[0]
        };
        let gl = GaussLegendre::with_nodes(rule.nodes_1d);
        if let Some((intervals, height)) = f.intervals_1d() {
            // integrate over the exact preimage of each interval under x -> c x
            let mut total = 0.0;
            for (a, b) in intervals {
                let (lo, hi) = if c > 0.0 {
                    ((a / c).max(-1.0), (b / c).min(1.0))
                } else {
                    // c = 0 maps everything to 0: f(0) over the whole ball
                    if a <= 0.0 && 0.0 <= b {
                        (-1.0, 1.0)
                    } else {
                        (0.0, -1.0)
                    }
                };
                if lo < hi {
                    total += height * gl.integrate(lo, hi, |x| density(x * x));
                }
            }
            total
        } else {
            gl.integrate(-1.0, 1.0, |x| f.eval(&[c * x]) * density(x * x))
        }
    } else {
        // map matrix M = U D U^T
        let d: Vec<f64> = lam
            .iter()
            .map(|l| {
                if use_complement_side {
                    (1.0 - l * l).max(0.0).sqrt()
                } else {
                    *l
                }
            })
            .collect();
        let u = &lu.rotation;
        let mut shift_rng = RngStream::new(0x0a1b_2c3d_4e5f_6071, (n as u64) << 8 | k as u64);
        let (est, _se) = qmc_integrate_cube(
            k,
            rule.qmc_samples,
            rule.qmc_shifts,
            &mut shift_rng,
            |x: &[f64]| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 >= 1.0 {
                    return 0.0;
                }
                let mut y = u.tr_matvec(x);
                for (yi, di) in y.iter_mut().zip(&d) {
                    *yi *= *di;
                }
                let mx = u.matvec(&y);
                f.eval(&mx) * density(r2)
            },
        );
        est
    }
}

/// The reduced-integral form of the statistic:
/// C_{n/2,k} sqrt(I_H * I_Hperp) with both integrals over B_k.
pub fn reduced_integral_statistic(
    f: &BoundedDensity,
    lu: &RotationWithSpectrum,
    n: usize,
    rule: &QuadratureRule,
) -> Result<GeometricMeanSample> {
    let k = lu.k();
    if f.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "density depends on {} coordinates, spectrum has k = {k}",
            f.k()
        )));
    }
    if lu.spectrum.is_degenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    let c = log_coarea_constant(n / 2, k)?.exp();
    let i_h = reduced_side_integral(f, lu, false, n, rule);
    let i_hp = reduced_side_integral(f, lu, true, n, rule);
    Ok(GeometricMeanSample::new(n, k, 0, c * i_h, c * i_hp, Method::ReducedIntegral))
}

/// The Cauchy-Schwarz lower bound: the single integral of f against the
/// geometric mean of the two pulled-back densities, scaled by
/// C_{n/2,k} / sqrt(prod lambda_j sqrt(1 - lambda_j^2)).
pub fn cauchy_schwarz_bound(
    f: &BoundedDensity,
    lu: &RotationWithSpectrum,
    n: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    let k = lu.k();
    if f.k() != k {
        return Err(Error::DimensionMismatch("density/spectrum k mismatch".into()));
    }
    if lu.spectrum.is_degenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    let lam = lu.spectrum.values();
    let mut log_pref = log_coarea_constant(n / 2, k)?;
    for l in lam {
        log_pref -= 0.5 * (l.ln() + 0.5 * (1.0 - l * l).ln());
    }
    let pref = log_pref.exp();
    let p4 = half_density_exponent(n, k) / 2.0; // (n/2-k-2)/4 per factor
    if k == 1 {
        let (lam1, mu1) = (lam[0], (1.0 - lam[0] * lam[0]).sqrt());
        let r = lam1.min(mu1); // support of the product density
        let gl = GaussLegendre::with_nodes(rule.nodes_1d);
        let integrand = |x: f64| -> f64 {
            let a = 1.0 - (x / lam1) * (x / lam1);
            let b = 1.0 - (x / mu1) * (x / mu1);
            if a <= 0.0 || b <= 0.0 {
                0.0
            } else {
                (p4 * (a.ln() + b.ln())).exp()
            }
        };
        let total = if let Some((intervals, height)) = f.intervals_1d() {
            let mut acc = 0.0;
            for (a, b) in intervals {
                let (lo, hi) = (a.max(-r), b.min(r));
                if lo < hi {
                    acc += height * gl.integrate(lo, hi, integrand);
                }
            }
            acc
        } else {
            gl.integrate(-r, r, |x| f.eval(&[x]) * integrand(x))
        };
        Ok(pref * total)
    } else {
        let u = &lu.rotation;
        let mut shift_rng = RngStream::new(0x0b2c_3d4e_5f60_7182, (n as u64) << 8 | k as u64);
        let (est, _se) = qmc_integrate_cube(
            k,
            rule.qmc_samples,
            rule.qmc_shifts,
            &mut shift_rng,
            |x: &[f64]| {
                let y = u.tr_matvec(x);
                // |Lambda^-1 U^T x|^2 and |(I-Lambda^2)^{-1/2} U^T x|^2
                let mut sa = 0.0;
                let mut sb = 0.0;
                for (yi, l) in y.iter().zip(lam) {
                    sa += (yi / l) * (yi / l);
                    sb += yi * yi / (1.0 - l * l);
                }
                if sa >= 1.0 || sb >= 1.0 {
                    return 0.0;
                }
                f.eval(x) * (p4 * ((1.0 - sa).ln() + (1.0 - sb).ln())).exp()
            },
        );
        Ok(pref * est)
    }
}

/// One reduced draw together with its Cauchy-Schwarz bound.
#[derive(Debug, Clone)]
pub struct ReducedDraw {
    pub sample: GeometricMeanSample,
    pub cs_bound: f64,
}

/// Which sampler produces the (Lambda, U) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSampler {
    /// Haar subspace and QR-based principal cosines (the definition).
    HaarSubspace,
    /// Wishart-ratio spectra (same law, O(n k^2) per draw).
    WishartRatio,
}

/// Independent reduced-integral draws with derived per-trial streams,
/// evaluated in parallel; results are ordered by trial index.
pub fn reduced_draws(
    f: &BoundedDensity,
    n: usize,
    k: usize,
    trials: usize,
    sampler: SpectrumSampler,
    rng: &RngStream,
    rule: &QuadratureRule,
) -> Result<Vec<ReducedDraw>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut s = rng.substream(i as u64);
            let lu = match sampler {
                SpectrumSampler::HaarSubspace => sample_lambda_u(n, k, &mut s)?,
                SpectrumSampler::WishartRatio => sample_lambda_u_wishart(n, k, &mut s)?,
            };
            let mut sample = reduced_integral_statistic(f, &lu, n, rule)?;
            sample.subspace_stream = s.stream_index();
            let cs_bound = cauchy_schwarz_bound(f, &lu, n, rule)?;
            Ok(ReducedDraw { sample, cs_bound })
        })
        .collect()
}

/// Independent direct-MC draws over Haar subspaces of dimension n/2.
pub fn direct_draws(
    set: &CoordinateSet,
    n: usize,
    trials: usize,
    samples_per_side: usize,
    rng: &RngStream,
    rule: &QuadratureRule,
) -> Result<Vec<GeometricMeanSample>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut s = rng.substream(i as u64);
            let h = sample_grassmannian(n, n / 2, &mut s);
            geometric_mean_direct(set, &h, samples_per_side, &mut s, rule)
        })
        .collect()
}

/// Frequency of the event statistic >= threshold over independent reduced
/// draws, with the sup-norm and k hypotheses enforced up front. Also reports
/// how many draws violated the Cauchy-Schwarz ordering by more than 1e-8.
#[derive(Debug, Clone)]
pub struct EventFrequency {
    pub frequency: f64,
    pub stderr: f64,
    pub cs_violations: usize,
    pub draws: Vec<ReducedDraw>,
}

#[allow(clippy::too_many_arguments)]
pub fn theorem_event_frequency(
    f: &BoundedDensity,
    n: usize,
    k: usize,
    trials: usize,
    threshold: f64,
    sampler: SpectrumSampler,
    constants: &AnalyticConstants,
    rng: &RngStream,
    rule: &QuadratureRule,
) -> Result<EventFrequency> {
    constants.require_k_bound(n, k)?;
    let budget = (constants.alpha2 * (n as f64).sqrt()).exp();
    if f.sup_norm() > budget * (1.0 + 1e-9) {
        return Err(Error::HypothesisViolation(format!(
            "sup|f| = {:.4e} exceeds exp(alpha2 sqrt(n)) = {:.4e}",
            f.sup_norm(),
            budget
        )));
    }
    let draws = reduced_draws(f, n, k, trials, sampler, rng, rule)?;
    let hits = draws.iter().filter(|d| d.sample.statistic >= threshold).count();
    let cs_violations = draws
        .iter()
        .filter(|d| d.cs_bound > d.sample.statistic + 1e-8)
        .count();
    Ok(EventFrequency {
        frequency: hits as f64 / trials as f64,
        stderr: crate::stats::binomial_stderr(hits as u64, trials as u64),
        cs_violations,
        draws,
    })
}

/// Pointwise small-ball comparison: min over probes inside rho n^{-1/4} B_k
/// of psi(x) / (1-|x|^2)^{(n-k-2)/2}, where psi is the product density of the
/// two pulled-back factors. `NotApplicable` when the spectrum leaves the
/// concentration window.
#[derive(Debug, Clone, Copy)]
pub enum SmallBallRatio {
    Ratio(f64),
    NotApplicable,
}

pub fn small_ball_ratio(
    lu: &RotationWithSpectrum,
    n: usize,
    rho: f64,
    window: f64,
    probes: &[Vec<f64>],
) -> Result<SmallBallRatio> {
    if lu.spectrum.is_degenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    let dev = crate::spectra::lambda_deviation(&lu.spectrum);
    if dev > window {
        return Ok(SmallBallRatio::NotApplicable);
    }
    let k = lu.k();
    let radius = rho * (n as f64).powf(-0.25);
    let p4 = half_density_exponent(n, k) / 2.0;
    let denom_exp = (n - k) as f64 / 2.0 - 1.0;
    let lam = lu.spectrum.values();
    let u = &lu.rotation;
    let mut min_ratio = f64::INFINITY;
    for probe in probes {
        // probes are directions; scale onto the small ball
        let x: Vec<f64> = probe.iter().map(|v| v * radius).collect();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let y = u.tr_matvec(&x);
        let mut sa = 0.0;
        let mut sb = 0.0;
        for (yi, l) in y.iter().zip(lam) {
            sa += (yi / l) * (yi / l);
            sb += yi * yi / (1.0 - l * l);
        }
        let ratio = if sa >= 1.0 || sb >= 1.0 {
            0.0
        } else {
            (p4 * ((1.0 - sa).ln() + (1.0 - sb).ln()) - denom_exp * (1.0 - r2).ln()).exp()
        };
        min_ratio = min_ratio.min(ratio);
    }
    Ok(SmallBallRatio::Ratio(min_ratio))
}

/// Probe directions for the small-ball check: the k coordinate directions
/// (both signs), 32 random boundary directions, and the center.
pub fn small_ball_probes(k: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let mut probes = vec![vec![0.0; k]];
    for i in 0..k {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; k];
            e[i] = sign;
            probes.push(e);
        }
    }
    for _ in 0..32 {
        probes.push(crate::sphere::sample_unit_sphere(k, rng).coords().to_vec());
    }
    probes
}

/// Analytic tail bound versus brute quadrature for the mass outside the
/// small ball.
#[derive(Debug, Clone)]
pub struct TailBoundReport {
    pub n: usize,
    pub k: usize,
    pub rho: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// (2 alpha1 / rho^2) exp(-alpha2 sqrt(n))
    pub analytic_bound: f64,
    /// exp(alpha2 sqrt(n)) C_{n,k} int_{|x| >= rho n^{-1/4}} (1-|x|^2)_+^{(n-k-2)/2} dx
    pub brute_value: f64,
}

pub fn laplace_tail_bound(
    n: usize,
    k: usize,
    constants: &AnalyticConstants,
    rule: &QuadratureRule,
) -> Result<TailBoundReport> {
    let (a1, a2, rho) = (constants.alpha1, constants.alpha2, constants.rho);
    let sqrt_n = (n as f64).sqrt();
    if k as f64 > a1 * sqrt_n {
        return Err(Error::HypothesisViolation(format!(
            "k <= alpha1*sqrt(n) violated: {k} > {:.4}",
            a1 * sqrt_n
        )));
    }
    if a1 > rho * rho / 6.0 {
        return Err(Error::HypothesisViolation(format!(
            "alpha1 <= rho^2/6 violated: {a1} > {:.4}",
            rho * rho / 6.0
        )));
    }
    let margin = rho * rho / 3.0 - a1 * (rho * (std::f64::consts::E / a1).sqrt()).ln();
    if 2.0 * a2 >= margin {
        return Err(Error::HypothesisViolation(format!(
            "2*alpha2 < rho^2/3 - alpha1*log(rho*sqrt(e/alpha1)) violated: {:.4} >= {:.4}",
            2.0 * a2,
            margin
        )));
    }

    let analytic_bound = 2.0 * a1 / (rho * rho) * (-a2 * sqrt_n).exp();
    let radius = rho * (n as f64).powf(-0.25);
    let brute_value = if radius >= 1.0 {
        0.0
    } else {
        // polar form: k Vol(B_k) int_a^1 r^{k-1} (1-r^2)^{(n-k-2)/2} dr,
        // accumulated in log space against the huge C_{n,k}
        let gl = GaussLegendre::with_nodes(rule.nodes_1d);
        let expo = (n - k) as f64 / 2.0 - 1.0;
        let log_radial = gl.integrate_log(radius, 1.0, |r| {
            (k as f64 - 1.0) * r.ln() + expo * (1.0 - r * r).max(f64::MIN_POSITIVE).ln()
        });
        let log_total = a2 * sqrt_n
            + log_coarea_constant(n, k)?
            + (k as f64).ln()
            + log_ball_volume(k)
            + log_radial;
        log_total.exp()
    };
    Ok(TailBoundReport {
        n,
        k,
        rho,
        alpha1: a1,
        alpha2: a2,
        analytic_bound,
        brute_value,
    })
}

/// Both sides of the constant identity C_{n,k} Vol(B_k) =
/// ((n-k)/n) binom(n/2, k/2); the binomial is the Gamma extension.
pub fn coarea_ball_identity(n: usize, k: usize) -> Result<(f64, f64)> {
    let lhs = (log_coarea_constant(n, k)? + log_ball_volume(k)).exp();
    let rhs = ((n - k) as f64 / n as f64)
        * log_binomial(n as f64 / 2.0, k as f64 / 2.0).exp();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::sphere::cap_threshold_for_measure;

    fn rule() -> QuadratureRule {
        QuadratureRule::default()
    }

    fn flat_lu(k: usize, seed: u64) -> RotationWithSpectrum {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        RotationWithSpectrum {
            spectrum: crate::spectra::SingularSpectrum::new(vec![c; k]).unwrap(),
            rotation: crate::spectra::haar_orthogonal(k, &mut RngStream::new(seed, 0)),
        }
    }

    #[test]
    fn direct_statistic_on_full_sphere_is_one() {
        let mut rng = RngStream::new(31, 0);
        let h = sample_grassmannian(24, 12, &mut rng);
        let s = geometric_mean_direct(&CoordinateSet::full(1), &h, 200, &mut rng, &rule()).unwrap();
        // both membership frequencies are exactly 1; the ratio only carries
        // the quadrature roundoff of the normalizing measure
        assert_eq!(s.g_h, s.g_hperp);
        assert!((s.statistic - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direct_statistic_hemisphere_near_one() {
        // every great subsphere cuts a hemisphere in half
        let root = RngStream::new(32, 0);
        let set = CoordinateSet::cap(0.0);
        let draws = direct_draws(&set, 40, 20, 20_000, &root, &rule()).unwrap();
        for d in &draws {
            // per-side MC se ~ sqrt(.25/20000)/0.5 ~ 0.0071; 4 se margin
            assert!((d.statistic - 1.0).abs() < 0.03, "stat {}", d.statistic);
        }
    }

    #[test]
    fn reduced_statistic_uniform_density_is_one() {
        let f = BoundedDensity::Uniform { k: 1 };
        let lu = flat_lu(1, 7);
        let s = reduced_integral_statistic(&f, &lu, 200, &rule()).unwrap();
        assert!((s.statistic - 1.0).abs() < 1e-6, "{}", s.statistic);
        // also at a random spectrum
        let mut rng = RngStream::new(33, 0);
        let lu = sample_lambda_u_wishart(200, 1, &mut rng).unwrap();
        let s = reduced_integral_statistic(&f, &lu, 200, &rule()).unwrap();
        assert!((s.statistic - 1.0).abs() < 1e-6, "{}", s.statistic);
    }

    #[test]
    fn reduced_statistic_invariants_hold() {
        let mut rng = RngStream::new(34, 0);
        let n = 100;
        let t = cap_threshold_for_measure(n, 0.05, &rule()).unwrap();
        let f = BoundedDensity::indicator(n, CoordinateSet::cap(t), &rule()).unwrap();
        for _ in 0..10 {
            let lu = sample_lambda_u_wishart(n, 1, &mut rng).unwrap();
            let s = reduced_integral_statistic(&f, &lu, n, &rule()).unwrap();
            assert!(s.statistic >= 0.0);
            assert!((s.statistic * s.statistic - s.g_h * s.g_hperp).abs() < 1e-12);
        }
    }

    /// Independent oracle for the k = 1 cap: the H-side integral equals the
    /// cap measure of the half-dimensional sphere at threshold T / lambda.
    #[test]
    fn reduced_cap_matches_subsphere_cap_oracle() {
        let n = 100;
        let t = cap_threshold_for_measure(n, 0.05, &rule()).unwrap();
        let sigma = coordinate_set_measure(n, &CoordinateSet::cap(t), &rule()).unwrap().value;
        let f = BoundedDensity::indicator(n, CoordinateSet::cap(t), &rule()).unwrap();
        let mut rng = RngStream::new(35, 0);
        for _ in 0..10 {
            let lu = sample_lambda_u_wishart(n, 1, &mut rng).unwrap();
            let lam = lu.spectrum.values()[0];
            let mu = (1.0 - lam * lam).sqrt();
            let s = reduced_integral_statistic(&f, &lu, n, &rule()).unwrap();
            let side = |thr: f64| {
                coordinate_set_measure(n / 2, &CoordinateSet::cap(thr), &rule())
                    .unwrap()
                    .value
            };
            let want = (side(t / lam) * side(t / mu)).sqrt() / sigma;
            assert!(
                (s.statistic - want).abs() < 1e-8 * want.max(1e-6) + 1e-10,
                "{} vs {}",
                s.statistic,
                want
            );
        }
    }

    #[test]
    fn reduced_statistic_flat_spectrum_closed_substitution() {
        // Lambda = I/sqrt(2): both sides coincide and equal the single
        // integral of f(x/sqrt(2)) against the half-density
        let n = 200;
        let t = cap_threshold_for_measure(n, 0.1, &rule()).unwrap();
        let sigma = coordinate_set_measure(n, &CoordinateSet::cap(t), &rule()).unwrap().value;
        let f = BoundedDensity::indicator(n, CoordinateSet::cap(t), &rule()).unwrap();
        let lu = flat_lu(1, 11);
        let s = reduced_integral_statistic(&f, &lu, n, &rule()).unwrap();
        // direct 1-d quadrature of the substituted integrand
        let c = log_coarea_constant(n / 2, 1).unwrap().exp();
        let gl = GaussLegendre::with_nodes(4096);
        let lam = std::f64::consts::FRAC_1_SQRT_2;
        let q = half_density_exponent(n, 1);
        let oracle = c / sigma * gl.integrate((t / lam).min(1.0), 1.0, |x| (1.0 - x * x).powf(q));
        assert!((s.statistic - oracle).abs() < 1e-6, "{} vs {oracle}", s.statistic);
        assert!((s.g_h - s.g_hperp).abs() < 1e-10);
    }

    #[test]
    fn cs_bound_equality_at_flat_spectrum() {
        let n = 200;
        let t = cap_threshold_for_measure(n, 0.1, &rule()).unwrap();
        let f = BoundedDensity::indicator(n, CoordinateSet::cap(t), &rule()).unwrap();
        let lu = flat_lu(1, 13);
        let s = reduced_integral_statistic(&f, &lu, n, &rule()).unwrap();
        let b = cauchy_schwarz_bound(&f, &lu, n, &rule()).unwrap();
        assert!((s.statistic - b).abs() < 1e-8, "stat {} bound {b}", s.statistic);
    }

    #[test]
    fn cs_bound_never_exceeds_statistic() {
        let n = 100;
        let t = cap_threshold_for_measure(n, 0.05, &rule()).unwrap();
        let f = BoundedDensity::indicator(n, CoordinateSet::cap(t), &rule()).unwrap();
        let mut rng = RngStream::new(36, 0);
        for _ in 0..25 {
            let lu = sample_lambda_u_wishart(n, 1, &mut rng).unwrap();
            let s = reduced_integral_statistic(&f, &lu, n, &rule()).unwrap();
            let b = cauchy_schwarz_bound(&f, &lu, n, &rule()).unwrap();
            assert!(b <= s.statistic + 1e-8, "bound {b} stat {}", s.statistic);
        }
    }

    #[test]
    fn theorem_event_uniform_density_is_certain() {
        let f = BoundedDensity::Uniform { k: 1 };
        let root = RngStream::new(37, 0);
        let constants = AnalyticConstants::default();
        let r = theorem_event_frequency(
            &f,
            100,
            1,
            20,
            0.9,
            SpectrumSampler::WishartRatio,
            &constants,
            &root,
            &rule(),
        )
        .unwrap();
        assert_eq!(r.frequency, 1.0);
        assert_eq!(r.cs_violations, 0);
    }

    #[test]
    fn theorem_event_rejects_hypothesis_violations() {
        let root = RngStream::new(38, 0);
        let constants = AnalyticConstants::default();
        // k too large
        let f = BoundedDensity::Uniform { k: 4 };
        assert!(matches!(
            theorem_event_frequency(
                &f,
                100,
                4,
                5,
                0.9,
                SpectrumSampler::WishartRatio,
                &constants,
                &root,
                &rule()
            ),
            Err(Error::HypothesisViolation(_))
        ));
        // sup-norm over budget: tiny set at small n
        let n = 100;
        let t = cap_threshold_for_measure(n, 1e-4, &rule()).unwrap();
        let f = BoundedDensity::indicator(n, CoordinateSet::cap(t), &rule()).unwrap();
        let tight = AnalyticConstants { alpha2: 0.1, ..AnalyticConstants::default() };
        assert!(matches!(
            theorem_event_frequency(
                &f,
                n,
                1,
                5,
                0.9,
                SpectrumSampler::WishartRatio,
                &tight,
                &root,
                &rule()
            ),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn small_ball_ratio_center_is_one() {
        let lu = flat_lu(2, 17);
        let probes = vec![vec![0.0, 0.0]];
        match small_ball_ratio(&lu, 4096, 0.5, 1.0, &probes).unwrap() {
            SmallBallRatio::Ratio(r) => assert!((r - 1.0).abs() < 1e-12),
            SmallBallRatio::NotApplicable => panic!("flat spectrum is inside any window"),
        }
    }

    #[test]
    fn small_ball_ratio_flat_k1_closed_form() {
        // ratio (1-2x^2)^{(n/2-3)/2} / (1-x^2)^{(n-3)/2} at x = rho n^{-1/4}
        let n = 10_000;
        let rho = 0.5;
        let lu = flat_lu(1, 19);
        let probes = vec![vec![1.0]];
        let got = match small_ball_ratio(&lu, n, rho, 1.0, &probes).unwrap() {
            SmallBallRatio::Ratio(r) => r,
            _ => panic!(),
        };
        let x = rho * (n as f64).powf(-0.25);
        let want = (1.0 - 2.0 * x * x).powf((n as f64 / 2.0 - 3.0) / 2.0)
            / (1.0 - x * x).powf((n as f64 - 3.0) / 2.0);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        assert!((0.95..=1.05).contains(&got), "{got}");
    }

    #[test]
    fn small_ball_ratio_k2_closed_form() {
        // diagonal spectrum, identity rotation: the ratio at probe x is
        // (1 - sum (x_i/l_i)^2)^p (1 - sum x_i^2/(1-l_i^2))^p / (1-|x|^2)^q
        let (n, rho) = (4096usize, 0.5f64);
        let (l1, l2) = (0.68f64, 0.73f64);
        let lu = RotationWithSpectrum {
            spectrum: crate::spectra::SingularSpectrum::new(vec![l1, l2]).unwrap(),
            rotation: Matrix::identity(2),
        };
        let dir = [0.6, 0.8];
        let got = match small_ball_ratio(&lu, n, rho, 1.0, &[dir.to_vec()]).unwrap() {
            SmallBallRatio::Ratio(r) => r,
            _ => panic!(),
        };
        let r = rho * (n as f64).powf(-0.25);
        let x = [dir[0] * r, dir[1] * r];
        let p = (n as f64 / 2.0 - 4.0) / 4.0;
        let q = (n as f64 - 4.0) / 2.0;
        let sa = (x[0] / l1).powi(2) + (x[1] / l2).powi(2);
        let sb = x[0] * x[0] / (1.0 - l1 * l1) + x[1] * x[1] / (1.0 - l2 * l2);
        let want = (1.0 - sa).powf(p) * (1.0 - sb).powf(p)
            / (1.0 - x[0] * x[0] - x[1] * x[1]).powf(q);
        assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
    }

    #[test]
    fn cs_bound_k2_equality_at_flat_spectrum() {
        // Lambda = I/sqrt(2) makes the two pulled-back densities equal, so
        // the bound and the statistic coincide up to the shared QMC noise
        let n = 64;
        let set = CoordinateSet::boxed(vec![(-0.4, 0.5), (-0.3, 0.45)]);
        // the two sides integrate different pullbacks of the same mass, so
        // their QMC errors are independent; use a fine rule
        let fine = QuadratureRule { qmc_samples: 1 << 19, ..QuadratureRule::default() };
        let f = BoundedDensity::indicator(n, set, &fine).unwrap();
        let lu = flat_lu(2, 23);
        let s = reduced_integral_statistic(&f, &lu, n, &fine).unwrap();
        let b = cauchy_schwarz_bound(&f, &lu, n, &fine).unwrap();
        assert!(
            (s.statistic - b).abs() < 2e-3 * s.statistic,
            "stat {} bound {b}",
            s.statistic
        );
    }

    #[test]
    fn cs_bound_k2_ordering() {
        let n = 64;
        let set = CoordinateSet::boxed(vec![(-0.5, 0.5), (-0.5, 0.5)]);
        let f = BoundedDensity::indicator(n, set, &rule()).unwrap();
        let mut rng = RngStream::new(24, 0);
        for _ in 0..10 {
            let lu = sample_lambda_u_wishart(n, 2, &mut rng).unwrap();
            let s = reduced_integral_statistic(&f, &lu, n, &rule()).unwrap();
            let b = cauchy_schwarz_bound(&f, &lu, n, &rule()).unwrap();
            // both sides carry QMC noise; allow a small relative slack
            assert!(b <= s.statistic * (1.0 + 5e-3) + 1e-8, "bound {b} stat {}", s.statistic);
        }
    }

    #[test]
    fn small_ball_window_gate() {
        let lu = RotationWithSpectrum {
            spectrum: crate::spectra::SingularSpectrum::new(vec![0.4]).unwrap(),
            rotation: Matrix::identity(1),
        };
        // deviation |0.4 - 0.707| = 0.307 > window 0.1
        assert!(matches!(
            small_ball_ratio(&lu, 1024, 0.5, 0.1, &[vec![1.0]]).unwrap(),
            SmallBallRatio::NotApplicable
        ));
    }

    #[test]
    fn laplace_tail_admissible_grid() {
        let constants = AnalyticConstants { alpha1: 1.0 / 24.0, alpha2: 0.01, rho: 0.5 };
        for (n, k) in [(1600, 1), (6400, 1), (6400, 3)] {
            let r = laplace_tail_bound(n, k, &constants, &rule()).unwrap();
            assert!(
                r.brute_value <= r.analytic_bound,
                "n={n} k={k}: {} > {}",
                r.brute_value,
                r.analytic_bound
            );
            assert!(r.brute_value > 0.0);
        }
    }

    #[test]
    fn laplace_tail_names_violated_constraint() {
        let rule = rule();
        // defaults violate alpha1 <= rho^2/6
        let bad = AnalyticConstants::default();
        match laplace_tail_bound(400, 1, &bad, &rule) {
            Err(Error::HypothesisViolation(msg)) => assert!(msg.contains("rho^2/6"), "{msg}"),
            other => panic!("expected violation, got {other:?}"),
        }
        // admissible constants but k too large for n = 400
        let good = AnalyticConstants { alpha1: 1.0 / 24.0, alpha2: 0.01, rho: 0.5 };
        match laplace_tail_bound(400, 1, &good, &rule) {
            Err(Error::HypothesisViolation(msg)) => {
                assert!(msg.contains("alpha1*sqrt(n)"), "{msg}")
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn laplace_radial_vanishes_when_ball_covers_everything() {
        // rho n^{-1/4} >= 1 makes the outside region empty; rho = 2.01 at
        // n = 16 satisfies every admissibility constraint and covers B_k
        let constants = AnalyticConstants { alpha1: 0.25, alpha2: 0.1, rho: 2.01 };
        let r = laplace_tail_bound(16, 1, &constants, &rule()).unwrap();
        assert_eq!(r.brute_value, 0.0);
        assert!(r.analytic_bound > 0.0);
    }

    #[test]
    fn appendix_identity_40_4() {
        let (lhs, rhs) = coarea_ball_identity(40, 4).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-8, "{lhs} vs {rhs}");
        assert!((lhs - 171.0).abs() < 1e-6, "{lhs}");
    }
}
