//! Product measures on S^{n-1} x G_{n/2} restricted to the two incidence
//! sets, the rectangle inequality, and the bit-count audit that turns
//! rectangle measures into a communication lower bound.

use crate::rng::RngStream;
use crate::spectra::principal_cosines;
use crate::sphere::{
    complement, coordinate_set_measure, restricted_measure_mc, sample_grassmannian,
    AnalyticConstants, CoordinateSet, Subspace,
};
use crate::stats::mean_stderr;
use crate::quadrature::QuadratureRule;
use crate::{Error, Result};
use rayon::prelude::*;

/// A measurable set of subspaces, decidable per sample.
#[derive(Debug, Clone)]
pub enum GrassmannSubset {
    All,
    /// Accept H when the smallest principal cosine against the frame of the
    /// first `ref_dim` coordinates lies in [lo, hi].
    SpectralWindow { ref_dim: usize, lo: f64, hi: f64 },
}

impl GrassmannSubset {
    pub fn accepts(&self, h: &Subspace) -> Result<bool> {
        match self {
            Self::All => Ok(true),
            Self::SpectralWindow { ref_dim, lo, hi } => {
                let e = Subspace::coordinate_span(h.ambient_dim(), *ref_dim);
                let s = principal_cosines(h, &e)?;
                let v = s.values()[0];
                Ok(*lo <= v && v <= *hi)
            }
        }
    }
}

/// A rectangle A x B in S^{n-1} x G_{n/2}.
#[derive(Debug, Clone)]
pub struct Rectangle {
    pub set: CoordinateSet,
    pub subset: GrassmannSubset,
}

/// Monte Carlo estimates of (mu0, mu1, mu2) with standard errors.
#[derive(Debug, Clone, Copy)]
pub struct MeasureTriple {
    pub mu0: f64,
    pub mu0_stderr: f64,
    pub mu1: f64,
    pub mu1_stderr: f64,
    pub mu2: f64,
    pub mu2_stderr: f64,
}

/// Per-draw contributions, kept so inequality checks can reuse the same
/// subspace draws on both sides.
#[derive(Debug, Clone)]
pub struct RectangleSamples {
    pub triple: MeasureTriple,
    /// (accepted, sigma_H(A), sigma_Hperp(A)) per sampled H
    pub draws: Vec<(bool, f64, f64)>,
}

/// Estimate mu0 = sigma(A) sigma_G(B), mu1 = E[1_B(H) sigma_H(A cap H)] and
/// mu2 = E[1_B(H) sigma_Hperp(A cap Hperp)] from `subspace_trials` Haar
/// draws with `point_samples` membership samples per side.
pub fn measure_rectangle(
    q: &Rectangle,
    n: usize,
    subspace_trials: usize,
    point_samples: usize,
    rng: &RngStream,
    rule: &QuadratureRule,
) -> Result<RectangleSamples> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("n must be even, got {n}")));
    }
    let sigma_a = coordinate_set_measure(n, &q.set, rule)?.value;
    let draws: Vec<(bool, f64, f64)> = (0..subspace_trials)
        .into_par_iter()
        .map(|i| {
            let mut s = rng.substream(i as u64);
            let h = sample_grassmannian(n, n / 2, &mut s);
            let accepted = q.subset.accepts(&h)?;
            if !accepted {
                return Ok((false, 0.0, 0.0));
            }
            let hp = complement(&h);
            let (p1, _) = restricted_measure_mc(&q.set, &h, point_samples, &mut s.substream(1));
            let (p2, _) = restricted_measure_mc(&q.set, &hp, point_samples, &mut s.substream(2));
            Ok((true, p1, p2))
        })
        .collect::<Result<_>>()?;

    let accepted = draws.iter().filter(|d| d.0).count();
    if accepted == 0 {
        return Err(Error::EmptyGrassmannSubset);
    }
    let acceptance = accepted as f64 / subspace_trials as f64;
    if acceptance < 1e-3 {
        return Err(Error::RejectionTooRare(acceptance));
    }
    let ind: Vec<f64> = draws.iter().map(|d| f64::from(u8::from(d.0))).collect();
    let x1: Vec<f64> = draws.iter().map(|d| if d.0 { d.1 } else { 0.0 }).collect();
    let x2: Vec<f64> = draws.iter().map(|d| if d.0 { d.2 } else { 0.0 }).collect();
    let (sigma_b, sigma_b_se) = mean_stderr(&ind);
    let (mu1, mu1_se) = mean_stderr(&x1);
    let (mu2, mu2_se) = mean_stderr(&x2);
    Ok(RectangleSamples {
        triple: MeasureTriple {
            mu0: sigma_a * sigma_b,
            mu0_stderr: sigma_a * sigma_b_se,
            mu1,
            mu1_stderr: mu1_se,
            mu2,
            mu2_stderr: mu2_se,
        },
        draws,
    })
}

/// Outcome of the rectangle inequality sqrt(mu1 mu2) >= 0.8 mu0.
#[derive(Debug, Clone, Copy)]
pub struct RectangleCheck {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub pass: bool,
    /// the within-proof Cauchy-Schwarz step: E[1_B sqrt(sigma_H sigma_Hperp)]
    pub integral_of_geometric_mean: f64,
}

/// Check sqrt(mu1 mu2) + 3 stderr >= 0.8 mu0 on fresh draws; the set must
/// depend on at most alpha1 sqrt(n) coordinates.
pub fn rectangle_inequality_check(
    q: &Rectangle,
    n: usize,
    subspace_trials: usize,
    point_samples: usize,
    constants: &AnalyticConstants,
    rng: &RngStream,
    rule: &QuadratureRule,
) -> Result<(RectangleCheck, RectangleSamples)> {
    constants.require_k_bound(n, q.set.k())?;
    let samples = measure_rectangle(q, n, subspace_trials, point_samples, rng, rule)?;
    let t = samples.triple;
    let lhs = (t.mu1 * t.mu2).max(0.0).sqrt();
    // delta method for sqrt(mu1 mu2)
    let lhs_stderr = if lhs > 0.0 {
        0.5 * ((t.mu2 / t.mu1).sqrt() * t.mu1_stderr).hypot((t.mu1 / t.mu2).sqrt() * t.mu2_stderr)
    } else {
        0.5 * (t.mu1_stderr + t.mu2_stderr)
    };
    let rhs = 0.8 * t.mu0;
    let gm: Vec<f64> = samples
        .draws
        .iter()
        .map(|d| if d.0 { (d.1 * d.2).max(0.0).sqrt() } else { 0.0 })
        .collect();
    let (img, _) = mean_stderr(&gm);
    Ok((
        RectangleCheck {
            lhs,
            lhs_stderr,
            rhs,
            pass: lhs + 3.0 * lhs_stderr >= rhs,
            integral_of_geometric_mean: img,
        },
        samples,
    ))
}

/// Caller-supplied measures of one rectangle in a protocol partition.
#[derive(Debug, Clone, Copy)]
pub struct LabeledTriple {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub answer_in_h: bool,
}

/// The audit of the lower-bound chain on a partition into labeled
/// rectangles.
#[derive(Debug, Clone)]
pub struct PartitionAudit {
    /// log2 of the rectangle count
    pub d_given: f64,
    /// per-class sum of sqrt(mu1 mu2)
    pub class_sums: [f64; 2],
    /// per-class Cauchy-Schwarz caps sqrt(sum mu1 * sum mu2)
    pub class_caps: [f64; 2],
    /// the textbook intermediate sqrt(1 * error_target)
    pub intermediate: f64,
    /// whether the given partition is consistent with a protocol of the
    /// stated error: 0.8 - 2^D C e^{-alpha2 sqrt(n)} <= 2 sqrt(error)
    pub consistent: bool,
    /// implied minimal bit count from the chain, None when even the
    /// degenerate inequality cannot hold (the no-zero-bit contradiction)
    pub implied_min_bits: Option<f64>,
}

/// Evaluate the bit-count chain. `error_target` is the protocol error mass
/// per label class; `c_const` and `alpha2` are the rectangle-inequality
/// constants; `n` the ambient dimension.
pub fn partition_audit(
    rectangles: &[LabeledTriple],
    error_target: f64,
    n: usize,
    c_const: f64,
    alpha2: f64,
) -> Result<PartitionAudit> {
    if rectangles.is_empty() {
        return Err(Error::InvalidArgument("empty partition".into()));
    }
    let total_mu0: f64 = rectangles.iter().map(|r| r.mu0).sum();
    if (total_mu0 - 1.0).abs() > 0.01 {
        return Err(Error::InvalidArgument(format!(
            "not a partition: sum mu0 = {total_mu0:.4}"
        )));
    }
    let mut class_sums = [0.0f64; 2];
    let mut class_mu1 = [0.0f64; 2];
    let mut class_mu2 = [0.0f64; 2];
    for r in rectangles {
        let c = usize::from(r.answer_in_h);
        class_sums[c] += (r.mu1 * r.mu2).max(0.0).sqrt();
        class_mu1[c] += r.mu1;
        class_mu2[c] += r.mu2;
    }
    let class_caps = [
        (class_mu1[0] * class_mu2[0]).max(0.0).sqrt(),
        (class_mu1[1] * class_mu2[1]).max(0.0).sqrt(),
    ];
    let d_given = (rectangles.len() as f64).log2();
    let eps = c_const * (-alpha2 * (n as f64).sqrt()).exp();
    let intermediate = error_target.sqrt();
    // the chain: 0.8 sum mu0 - (#rect) eps <= sum over classes of the caps,
    // each capped again by sqrt(1 * error_target)
    let consistent = 0.8 * total_mu0 - rectangles.len() as f64 * eps <= 2.0 * intermediate;
    let numerator = 0.8 - 2.0 * intermediate;
    let implied_min_bits = if numerator > 0.0 { Some((numerator / eps).log2()) } else { None };
    Ok(PartitionAudit {
        d_given,
        class_sums,
        class_caps,
        intermediate,
        consistent,
        implied_min_bits,
    })
}

/// Synthetic partition of 2^d rectangles with measures consistent with a
/// protocol of the given per-class error mass; used to exercise the audit.
pub fn synthetic_partition(d: u32, error_target: f64) -> Vec<LabeledTriple> {
    let count = 1usize << d;
    let half = (count / 2).max(1);
    let mu0 = 1.0 / count as f64;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let in_h = i < half || count == 1;
        // correct mass concentrated on the right class, error mass on the
        // other, split evenly within each class
        let (mu1, mu2) = if in_h {
            ((1.0 - error_target) / half as f64, error_target / half as f64)
        } else {
            (error_target / half as f64, (1.0 - error_target) / half as f64)
        };
        out.push(LabeledTriple { mu0, mu1, mu2, answer_in_h: in_h });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> QuadratureRule {
        QuadratureRule::default()
    }

    #[test]
    fn full_rectangle_is_all_ones() {
        let q = Rectangle { set: CoordinateSet::full(1), subset: GrassmannSubset::All };
        let r = measure_rectangle(&q, 16, 40, 100, &RngStream::new(61, 0), &rule()).unwrap();
        assert!((r.triple.mu0 - 1.0).abs() < 1e-8);
        assert_eq!(r.triple.mu1, 1.0);
        assert_eq!(r.triple.mu2, 1.0);
    }

    #[test]
    fn b_all_recovers_global_measure() {
        // mu1 = sigma(A) within 3 stderr when B is everything
        let n = 64;
        let t = crate::sphere::cap_threshold_for_measure(n, 0.15, &rule()).unwrap();
        let q = Rectangle { set: CoordinateSet::cap(t), subset: GrassmannSubset::All };
        let r = measure_rectangle(&q, n, 150, 4000, &RngStream::new(62, 0), &rule()).unwrap();
        assert!(
            (r.triple.mu1 - 0.15).abs() < 3.0 * r.triple.mu1_stderr,
            "mu1 {} se {}",
            r.triple.mu1,
            r.triple.mu1_stderr
        );
        assert!(
            (r.triple.mu2 - 0.15).abs() < 3.0 * r.triple.mu2_stderr,
            "mu2 {} se {}",
            r.triple.mu2,
            r.triple.mu2_stderr
        );
    }

    #[test]
    fn mu1_mu2_swap_under_complement_relabel() {
        // swapping the window from low to high cosine swaps the roles of H
        // and H-perp statistically; mu1 and mu2 trade places within error
        let n = 32;
        let t = crate::sphere::cap_threshold_for_measure(n, 0.2, &rule()).unwrap();
        let low = Rectangle {
            set: CoordinateSet::cap(t),
            subset: GrassmannSubset::SpectralWindow { ref_dim: 1, lo: 0.0, hi: 0.707 },
        };
        let high = Rectangle {
            set: CoordinateSet::cap(t),
            subset: GrassmannSubset::SpectralWindow { ref_dim: 1, lo: 0.707, hi: 1.0 },
        };
        let a = measure_rectangle(&low, n, 400, 2000, &RngStream::new(63, 0), &rule()).unwrap();
        let b = measure_rectangle(&high, n, 400, 2000, &RngStream::new(63, 1), &rule()).unwrap();
        let se = (a.triple.mu1_stderr + b.triple.mu2_stderr).max(1e-6);
        assert!(
            (a.triple.mu1 - b.triple.mu2).abs() < 4.0 * se,
            "mu1(low) {} vs mu2(high) {}",
            a.triple.mu1,
            b.triple.mu2
        );
    }

    #[test]
    fn empty_subset_errors() {
        let q = Rectangle {
            set: CoordinateSet::full(1),
            subset: GrassmannSubset::SpectralWindow { ref_dim: 1, lo: 0.9999999, hi: 1.0 },
        };
        assert!(matches!(
            measure_rectangle(&q, 16, 30, 50, &RngStream::new(64, 0), &rule()),
            Err(Error::EmptyGrassmannSubset)
        ));
    }

    #[test]
    fn vanishingly_rare_subset_aborts_with_diagnostic() {
        // acceptance ~4e-4 at n = 8 (lambda^2 ~ Beta(2,2) above 0.9886):
        // sampled but below the 1e-3 floor, so the run aborts loudly
        let q = Rectangle {
            set: CoordinateSet::full(1),
            subset: GrassmannSubset::SpectralWindow { ref_dim: 1, lo: 0.9943, hi: 1.0 },
        };
        match measure_rectangle(&q, 8, 20_000, 10, &RngStream::new(68, 0), &rule()) {
            Err(Error::RejectionTooRare(f)) => assert!(f > 0.0 && f < 1e-3, "{f}"),
            Err(Error::EmptyGrassmannSubset) => panic!("window too narrow for the test"),
            other => panic!("expected rare-acceptance abort, got {other:?}"),
        }
    }

    #[test]
    fn inequality_on_full_rectangle() {
        let q = Rectangle { set: CoordinateSet::full(1), subset: GrassmannSubset::All };
        // alpha1 large enough that k = 1 is admissible at n = 16
        let constants = AnalyticConstants { alpha1: 0.3, ..AnalyticConstants::default() };
        let (check, _) = rectangle_inequality_check(
            &q,
            16,
            40,
            100,
            &constants,
            &RngStream::new(65, 0),
            &rule(),
        )
        .unwrap();
        assert!((check.lhs - 1.0).abs() < 1e-12);
        assert!((check.rhs - 0.8).abs() < 1e-8);
        assert!(check.pass);
    }

    #[test]
    fn inequality_rejects_wide_sets() {
        // k = 2 at n = 16 exceeds alpha1 sqrt(n) = 0.4
        let q = Rectangle {
            set: CoordinateSet::boxed(vec![(0.0, 0.5), (0.0, 0.5)]),
            subset: GrassmannSubset::All,
        };
        assert!(matches!(
            rectangle_inequality_check(
                &q,
                16,
                10,
                50,
                &AnalyticConstants::default(),
                &RngStream::new(66, 0),
                &rule()
            ),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn cauchy_schwarz_step_holds_per_draw_set() {
        let n = 32;
        let t = crate::sphere::cap_threshold_for_measure(n, 0.2, &rule()).unwrap();
        let q = Rectangle { set: CoordinateSet::cap(t), subset: GrassmannSubset::All };
        let (check, _) = rectangle_inequality_check(
            &q,
            n,
            200,
            2000,
            &AnalyticConstants { alpha1: 0.2, ..AnalyticConstants::default() },
            &RngStream::new(67, 0),
            &rule(),
        )
        .unwrap();
        // sqrt(mu1 mu2) >= E[1_B sqrt(sigma_H sigma_Hperp)] exactly on the
        // same draws (discrete Cauchy-Schwarz)
        assert!(check.lhs + 1e-12 >= check.integral_of_geometric_mean);
    }

    #[test]
    fn audit_single_rectangle_contradiction() {
        let part = vec![LabeledTriple { mu0: 1.0, mu1: 1.0, mu2: 1.0 / 9.0, answer_in_h: true }];
        let audit = partition_audit(&part, 1.0 / 9.0, 400, 1.0, 0.5).unwrap();
        assert_eq!(audit.d_given, 0.0);
        assert!((audit.intermediate - 1.0 / 3.0).abs() < 1e-15);
        // 0.8 - eps <= 2/3 fails: a zero-bit protocol cannot exist
        assert!(!audit.consistent);
        assert!(audit.implied_min_bits.is_some());
    }

    #[test]
    fn audit_rejects_non_partition() {
        let part = vec![LabeledTriple { mu0: 0.4, mu1: 0.4, mu2: 0.1, answer_in_h: true }];
        assert!(partition_audit(&part, 1.0 / 9.0, 100, 1.0, 0.5).is_err());
    }

    #[test]
    fn audit_bound_grows_like_sqrt_n() {
        let (c, alpha2) = (1.0, 0.5);
        let part = synthetic_partition(6, 1.0 / 9.0);
        let bits: Vec<f64> = [100usize, 400, 1600]
            .iter()
            .map(|&n| {
                partition_audit(&part, 1.0 / 9.0, n, c, alpha2)
                    .unwrap()
                    .implied_min_bits
                    .unwrap()
            })
            .collect();
        // sqrt(n) doubles at each step, so increments double as well
        let d1 = bits[1] - bits[0];
        let d2 = bits[2] - bits[1];
        assert!(d1 > 0.0 && d2 > 0.0);
        assert!((d2 / d1 - 2.0).abs() < 0.05, "increments {d1} {d2}");
        // and the increment matches alpha2 sqrt(n) log2(e)
        let want = alpha2 * (400f64.sqrt() - 100f64.sqrt()) * std::f64::consts::LOG2_E;
        assert!((d1 - want).abs() < 1e-9);
    }

    #[test]
    fn synthetic_partition_chain_is_coherent() {
        let (n, c, alpha2) = (400usize, 1.0, 0.5);
        let part = synthetic_partition(4, 1.0 / 9.0);
        let audit = partition_audit(&part, 1.0 / 9.0, n, c, alpha2).unwrap();
        // per-class cap is sqrt(sum mu1 * sum mu2) = sqrt(8/81)
        assert!((audit.class_caps[1] - (8.0f64 / 81.0).sqrt()).abs() < 1e-12);
        // the sums never exceed the caps (Cauchy-Schwarz on supplied values)
        assert!(audit.class_sums[0] <= audit.class_caps[0] + 1e-12);
        assert!(audit.class_sums[1] <= audit.class_caps[1] + 1e-12);
        // 4 bits is below the implied minimum at n = 400, so the audit must
        // flag the partition as inconsistent with the claimed error
        let need = audit.implied_min_bits.unwrap();
        assert!(need > 4.0, "implied bits {need}");
        assert!(!audit.consistent);
        // a partition with more rectangles than the implied minimum passes
        let big = synthetic_partition(12, 1.0 / 9.0);
        let audit = partition_audit(&big, 1.0 / 9.0, n, c, alpha2).unwrap();
        assert!(12.0 > need);
        assert!(audit.consistent);
    }
}
