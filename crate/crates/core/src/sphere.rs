//! Uniform sampling on spheres and Grassmannians, the ball-to-sphere lift,
//! and exact measures of sets determined by the first k coordinates.

use crate::linalg::{cholesky_semidefinite, complement_basis, orthonormalize};
use crate::matrix::{gaussian_matrix, norm, Matrix};
use crate::quadrature::{qmc_integrate_cube, GaussLegendre, QuadratureRule};
use crate::rng::RngStream;
use crate::special::log_coarea_constant;
use crate::{Error, Result};
use std::sync::Arc;

/// A point of S^{n-1}.
#[derive(Debug, Clone)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes the input; errors on a (near-)zero vector.
    pub fn new(mut coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if n < 1e-300 {
            return Err(Error::DegenerateInput("zero vector".into()));
        }
        for c in coords.iter_mut() {
            *c /= n;
        }
        Ok(Self { coords })
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm_defect(&self) -> f64 {
        (norm(&self.coords) - 1.0).abs()
    }
}

/// An orthonormal n x d frame spanning a d-dimensional subspace of R^n.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    pub fn from_basis(basis: Matrix) -> Result<Self> {
        let defect = basis.orthonormality_defect();
        if defect > 1e-10 {
            return Err(Error::DegenerateInput(format!(
                "basis is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_orthonormal_unchecked(basis: Matrix) -> Self {
        Self { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Span of the first d coordinate directions.
    pub fn coordinate_span(n: usize, d: usize) -> Self {
        Self { basis: Matrix::from_fn(n, d, |i, j| if i == j { 1.0 } else { 0.0 }) }
    }

    /// Squared norm of the projection of `v` onto the subspace.
    pub fn projection_sq(&self, v: &[f64]) -> f64 {
        let c = self.basis.tr_matvec(v);
        c.iter().map(|x| x * x).sum()
    }

    /// Ambient point of S^{n-1} inside the subspace: basis * y with y uniform
    /// on S^{d-1}.
    pub fn sample_point(&self, rng: &mut RngStream) -> UnitVector {
        let d = self.dim();
        let mut y = vec![0.0; d];
        loop {
            rng.fill_gaussian(&mut y);
            if norm(&y) >= 1e-300 {
                break;
            }
        }
        let ny = norm(&y);
        for v in y.iter_mut() {
            *v /= ny;
        }
        UnitVector { coords: self.basis.matvec(&y) }
    }
}

/// Haar-uniform point of S^{n-1}: a normalized Gaussian vector.
pub fn sample_unit_sphere(n: usize, rng: &mut RngStream) -> UnitVector {
    assert!(n >= 1);
    let mut g = vec![0.0; n];
    loop {
        rng.fill_gaussian(&mut g);
        if norm(&g) >= 1e-300 {
            break;
        }
    }
    UnitVector::new(g).expect("nonzero by construction")
}

/// Haar-uniform d-dimensional subspace of R^n: QR of a Gaussian matrix with
/// the positive-diagonal sign convention.
pub fn sample_grassmannian(n: usize, d: usize, rng: &mut RngStream) -> Subspace {
    assert!(d >= 1 && d <= n);
    loop {
        let g = gaussian_matrix(n, d, rng);
        // rank deficiency has probability zero; retry on the measure-zero event
        if let Ok(q) = orthonormalize(&g) {
            return Subspace::from_orthonormal_unchecked(q);
        }
    }
}

/// Orthogonal complement of a subspace.
pub fn complement(h: &Subspace) -> Subspace {
    Subspace::from_orthonormal_unchecked(complement_basis(h.basis()))
}

/// The lift psi(x, theta) = (x, sqrt(1-|x|^2) theta) from B_k x S^{m-k-1}
/// to S^{m-1}.
pub fn lift_from_ball(x: &[f64], theta: &UnitVector) -> Result<UnitVector> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("|x| = {} exceeds 1", r2.sqrt())));
    }
    let scale = (1.0 - r2).max(0.0).sqrt();
    let mut coords = Vec::with_capacity(x.len() + theta.ambient_dim());
    coords.extend_from_slice(x);
    coords.extend(theta.coords().iter().map(|t| scale * t));
    // |x|^2 + (1-|x|^2)|theta|^2 = 1 exactly up to roundoff
    Ok(UnitVector { coords })
}

/// Membership predicate on points of the k-ball.
pub type MembershipFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A measurable subset of S^{n-1} determined by the first k coordinates.
#[derive(Clone)]
pub struct CoordinateSet {
    k: usize,
    kind: SetKind,
}

#[derive(Clone)]
pub enum SetKind {
    /// {x : x_1 >= threshold}, k = 1.
    Cap { threshold: f64 },
    /// product of k closed intervals
    Box { intervals: Vec<(f64, f64)> },
    /// union of axis boxes, membership by any-of
    BoxUnion { boxes: Vec<Vec<(f64, f64)>> },
    /// arbitrary predicate on B_k
    Predicate { f: MembershipFn },
}

impl std::fmt::Debug for CoordinateSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            SetKind::Cap { threshold } => write!(f, "Cap(T={threshold})"),
            SetKind::Box { intervals } => write!(f, "Box({intervals:?})"),
            SetKind::BoxUnion { boxes } => write!(f, "BoxUnion({} boxes)", boxes.len()),
            SetKind::Predicate { .. } => write!(f, "Predicate(k={})", self.k),
        }
    }
}

impl CoordinateSet {
    pub fn cap(threshold: f64) -> Self {
        Self { k: 1, kind: SetKind::Cap { threshold } }
    }

    pub fn boxed(intervals: Vec<(f64, f64)>) -> Self {
        assert!(!intervals.is_empty());
        Self { k: intervals.len(), kind: SetKind::Box { intervals } }
    }

    pub fn box_union(boxes: Vec<Vec<(f64, f64)>>) -> Self {
        assert!(!boxes.is_empty());
        let k = boxes[0].len();
        assert!(boxes.iter().all(|b| b.len() == k));
        Self { k, kind: SetKind::BoxUnion { boxes } }
    }

    pub fn predicate(k: usize, f: MembershipFn) -> Self {
        Self { k, kind: SetKind::Predicate { f } }
    }

    /// The whole ball, i.e. all of S^{n-1}.
    pub fn full(k: usize) -> Self {
        Self::boxed(vec![(-1.0, 1.0); k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Membership test on the first k coordinates.
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert!(x.len() >= self.k);
        match &self.kind {
            SetKind::Cap { threshold } => x[0] >= *threshold,
            SetKind::Box { intervals } => {
                intervals.iter().zip(x).all(|((a, b), v)| *a <= *v && *v <= *b)
            }
            SetKind::BoxUnion { boxes } => boxes
                .iter()
                .any(|iv| iv.iter().zip(x).all(|((a, b), v)| *a <= *v && *v <= *b)),
            SetKind::Predicate { f } => f(&x[..self.k]),
        }
    }

    /// For k = 1 cap/box kinds: the canonical disjoint interval list inside
    /// [-1, 1]. Predicate sets return None.
    pub fn intervals_1d(&self) -> Option<Vec<(f64, f64)>> {
        if self.k != 1 {
            return None;
        }
        let clip = |a: f64, b: f64| -> Option<(f64, f64)> {
            let (a, b) = (a.max(-1.0), b.min(1.0));
            (a < b).then_some((a, b))
        };
        match &self.kind {
            SetKind::Cap { threshold } => Some(clip(*threshold, 1.0).into_iter().collect()),
            SetKind::Box { intervals } => Some(clip(intervals[0].0, intervals[0].1).into_iter().collect()),
            SetKind::BoxUnion { boxes } => {
                let mut ivs: Vec<(f64, f64)> =
                    boxes.iter().filter_map(|b| clip(b[0].0, b[0].1)).collect();
                ivs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                // merge overlaps so quadrature never double counts
                let mut merged: Vec<(f64, f64)> = Vec::new();
                for (a, b) in ivs {
                    match merged.last_mut() {
                        Some(last) if a <= last.1 => last.1 = last.1.max(b),
                        _ => merged.push((a, b)),
                    }
                }
                Some(merged)
            }
            SetKind::Predicate { .. } => None,
        }
    }
}

/// Result of a measure computation: deterministic quadrature has no standard
/// error, quasi-Monte Carlo reports one. `coarse` flags a rule that may not
/// resolve the density at the requested dimension.
#[derive(Debug, Clone, Copy)]
pub struct MeasureEstimate {
    pub value: f64,
    pub stderr: f64,
    pub coarse: bool,
}

/// sigma_{n-1}(A) = C_{n,k} int_A (1 - |x|^2)^{(n-k-2)/2} dx over B_k.
///
/// k = 1 and k = 2 box-like sets use Gauss-Legendre (exact region bounds);
/// k >= 3 or predicate sets use randomized Halton QMC with a reported
/// standard error. The QMC shifts come from a fixed internal stream so the
/// value is a pure function of (n, A, rule).
pub fn coordinate_set_measure(
    n: usize,
    set: &CoordinateSet,
    rule: &QuadratureRule,
) -> Result<MeasureEstimate> {
    let k = set.k();
    if k > n - 1 {
        return Err(Error::InvalidArgument(format!("set dimension k={k} needs k <= n-1={}", n - 1)));
    }
    let log_c = log_coarea_constant(n, k)?;
    let c = log_c.exp();
    let expo = (n - k) as f64 / 2.0 - 1.0;
    let coarse_1d = rule.nodes_1d < 4 * (n as f64).sqrt().ceil() as usize;

    let density = move |r2: f64| -> f64 {
        let b = 1.0 - r2;
        if b <= 0.0 {
            0.0
        } else {
            (expo * b.ln()).exp()
        }
    };

    match (&set.kind, k) {
        (SetKind::Cap { .. } | SetKind::Box { .. } | SetKind::BoxUnion { .. }, 1) => {
            let gl = GaussLegendre::with_nodes(rule.nodes_1d);
            let mut total = 0.0;
            for (a, b) in set.intervals_1d().expect("k=1 set has intervals") {
                total += gl.integrate(a, b, |t| density(t * t));
            }
            Ok(MeasureEstimate { value: c * total, stderr: 0.0, coarse: coarse_1d })
        }
        (SetKind::Box { intervals }, 2) => {
            let gl = GaussLegendre::with_nodes(rule.nodes_2d);
            let v = tensor_box_integral(&gl, intervals, &density);
            Ok(MeasureEstimate {
                value: c * v,
                stderr: 0.0,
                coarse: rule.nodes_2d < 2 * (n as f64).sqrt().ceil() as usize,
            })
        }
        (SetKind::BoxUnion { boxes }, 2) => {
            // disjointness is the caller's responsibility for unions in k = 2
            let gl = GaussLegendre::with_nodes(rule.nodes_2d);
            let v: f64 = boxes.iter().map(|b| tensor_box_integral(&gl, b, &density)).sum();
            Ok(MeasureEstimate {
                value: c * v,
                stderr: 0.0,
                coarse: rule.nodes_2d < 2 * (n as f64).sqrt().ceil() as usize,
            })
        }
        _ => {
            // predicate kind (any k) or box-like with k >= 3
            let mut shift_rng = RngStream::new(0x5eed_0c0a_11ab_0005, (n as u64) << 8 | k as u64);
            let (est, se) = qmc_integrate_cube(k, rule.qmc_samples, rule.qmc_shifts, &mut shift_rng, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 >= 1.0 || !set.contains(x) {
                    0.0
                } else {
                    density(r2)
                }
            });
            let value = c * est;
            let stderr = c * se;
            let coarse = stderr > 0.01 * value.abs().max(1e-9);
            Ok(MeasureEstimate { value, stderr, coarse })
        }
    }
}

fn tensor_box_integral(
    gl: &GaussLegendre,
    intervals: &[(f64, f64)],
    density: &impl Fn(f64) -> f64,
) -> f64 {
    assert_eq!(intervals.len(), 2);
    let (a0, b0) = (intervals[0].0.max(-1.0), intervals[0].1.min(1.0));
    let (a1, b1) = (intervals[1].0.max(-1.0), intervals[1].1.min(1.0));
    if a0 >= b0 || a1 >= b1 {
        return 0.0;
    }
    gl.integrate(a0, b0, |x| {
        let x2 = x * x;
        gl.integrate(a1, b1, |y| density(x2 + y * y))
    })
}

/// Monte Carlo estimate of sigma_H(A intersect H): the Haar measure of A on
/// the subsphere S^{n-1} intersect H.
///
/// Only the first k ambient coordinates of a sample decide membership, so we
/// sample that marginal directly: with W the top k rows of the basis and
/// L = chol(W W^T), the coordinates are L z / sqrt(|z_active|^2 + V) with
/// z standard normal in R^k and V an independent chi-square with
/// dim(H) - rank(W) degrees of freedom. This is the exact pushforward of the
/// uniform measure on the subsphere.
pub fn restricted_measure_mc(
    set: &CoordinateSet,
    h: &Subspace,
    samples: usize,
    rng: &mut RngStream,
) -> (f64, f64) {
    assert!(samples >= 1);
    let k = set.k();
    let d = h.dim();
    let w = Matrix::from_fn(k, d, |i, j| h.basis()[(i, j)]);
    let gram = w.matmul(&w.transpose());
    let l = cholesky_semidefinite(&gram);
    let active: Vec<bool> = (0..k).map(|j| l[(j, j)] > 0.0).collect();
    let rank = active.iter().filter(|a| **a).count();
    let extra_dof = d - rank;
    let chi = (extra_dof > 0)
        .then(|| rand_distr::Gamma::new(extra_dof as f64 / 2.0, 2.0).expect("valid dof"));

    let mut z = vec![0.0; k];
    let mut x = vec![0.0; k];
    let mut hits = 0u64;
    for _ in 0..samples {
        rng.fill_gaussian(&mut z);
        let mut s = 0.0;
        for j in 0..k {
            if active[j] {
                s += z[j] * z[j];
            }
        }
        let v = chi.as_ref().map_or(0.0, |c| rng.draw(c));
        let denom = (s + v).sqrt();
        for i in 0..k {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += l[(i, j)] * z[j];
            }
            x[i] = if denom > 0.0 { acc / denom } else { 0.0 };
        }
        if set.contains(&x) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p, crate::stats::binomial_stderr(hits, samples as u64))
}

/// Cap threshold T with sigma_{n-1}({x_1 >= T}) equal to `target`, solved by
/// bisection on the quadrature measure.
pub fn cap_threshold_for_measure(n: usize, target: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(0.0 < target && target < 1.0) {
        return Err(Error::InvalidArgument(format!("cap measure target {target} not in (0,1)")));
    }
    let measure = |t: f64| -> Result<f64> {
        Ok(coordinate_set_measure(n, &CoordinateSet::cap(t), rule)?.value)
    };
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    // measure decreases in T: measure(lo) = 1, measure(hi) = 0
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if measure(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The universal constants of the analysis, exposed as configuration. The
/// defaults follow the artifact conventions: alpha1 = 0.1, rho = 0.5, and
/// alpha2 = 0.5 as the sup-norm budget exponent. Tail-bound experiments need
/// far smaller, admissible (alpha1, alpha2); `violations` reports every
/// constraint a configuration breaks so experiments can refuse or flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticConstants {
    pub alpha1: f64,
    pub alpha2: f64,
    pub rho: f64,
}

impl Default for AnalyticConstants {
    fn default() -> Self {
        Self { alpha1: 0.1, alpha2: 0.5, rho: 0.5 }
    }
}

impl AnalyticConstants {
    /// Constraint violations for a given (n, k). Empty means admissible for
    /// every statement the artifact checks.
    pub fn violations(&self, n: usize, k: usize) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0 && self.rho > 0.0) {
            v.push("constants must be positive".to_string());
        }
        let sqrt_n = (n as f64).sqrt();
        if k as f64 > self.alpha1 * sqrt_n {
            v.push(format!("k > alpha1*sqrt(n) ({} > {:.4})", k, self.alpha1 * sqrt_n));
        }
        if self.alpha1 > self.rho * self.rho / 6.0 {
            v.push(format!(
                "alpha1 > rho^2/6 ({:.4} > {:.4})",
                self.alpha1,
                self.rho * self.rho / 6.0
            ));
        }
        let margin = self.rho * self.rho / 3.0
            - self.alpha1 * (self.rho * (std::f64::consts::E / self.alpha1).sqrt()).ln();
        if 2.0 * self.alpha2 >= margin {
            v.push(format!(
                "2*alpha2 >= rho^2/3 - alpha1*log(rho*sqrt(e/alpha1)) ({:.4} >= {:.4})",
                2.0 * self.alpha2,
                margin
            ));
        }
        // Taylor window for the small-ball density expansion
        if self.rho * (n as f64).powf(-0.25) > 0.1 {
            v.push(format!(
                "rho*n^-1/4 > 1/10 ({:.4})",
                self.rho * (n as f64).powf(-0.25)
            ));
        }
        v
    }

    /// Enforce k <= alpha1 sqrt(n).
    pub fn require_k_bound(&self, n: usize, k: usize) -> Result<()> {
        let sqrt_n = (n as f64).sqrt();
        if k as f64 > self.alpha1 * sqrt_n {
            return Err(Error::HypothesisViolation(format!(
                "k > alpha1*sqrt(n) ({} > {:.4})",
                k,
                self.alpha1 * sqrt_n
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureRule;
    use crate::stats::{chi_square_test, mean_stderr};

    fn rule() -> QuadratureRule {
        QuadratureRule::default()
    }

    #[test]
    fn sphere_point_has_unit_norm() {
        let mut rng = RngStream::new(1, 0);
        for n in [1, 2, 7, 100] {
            let u = sample_unit_sphere(n, &mut rng);
            assert!(u.norm_defect() < 1e-10);
        }
    }

    #[test]
    fn sphere_n1_is_fair_sign() {
        let mut rng = RngStream::new(2, 0);
        let draws = 10_000;
        let plus = (0..draws)
            .filter(|_| sample_unit_sphere(1, &mut rng).coords()[0] > 0.0)
            .count() as f64;
        let freq = plus / draws as f64;
        assert!((freq - 0.5).abs() < 4.0 * (0.25f64 / draws as f64).sqrt(), "freq {freq}");
    }

    #[test]
    fn sphere_first_coordinate_second_moment() {
        // E x_1^2 = 1/n by symmetry
        let mut rng = RngStream::new(3, 0);
        let n = 100;
        let draws = 100_000;
        let vals: Vec<f64> = (0..draws)
            .map(|_| {
                let u = sample_unit_sphere(n, &mut rng);
                u.coords()[0] * u.coords()[0]
            })
            .collect();
        let (mean, se) = mean_stderr(&vals);
        assert!((mean - 1.0 / n as f64).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn grassmannian_full_space_is_identity_projection() {
        let mut rng = RngStream::new(4, 0);
        let h = sample_grassmannian(5, 5, &mut rng);
        let mut v = vec![0.3, -0.1, 0.4, 0.2, 0.8];
        let nv = norm(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        assert!((h.projection_sq(&v) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grassmannian_circle_angle_is_uniform() {
        let mut rng = RngStream::new(5, 0);
        let mut counts = [0u64; 8];
        for _ in 0..10_000 {
            let h = sample_grassmannian(2, 1, &mut rng);
            let (x, y) = (h.basis()[(0, 0)], h.basis()[(1, 0)]);
            let angle = y.atan2(x).rem_euclid(std::f64::consts::TAU);
            let bin = ((angle / std::f64::consts::TAU * 8.0) as usize).min(7);
            counts[bin] += 1;
        }
        let p = chi_square_test(&counts, &[1.0 / 8.0; 8]);
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn first_qr_column_uniform_on_sphere_octants() {
        // d = 4: 16 sign octants, each probability 1/16
        let mut rng = RngStream::new(6, 0);
        let mut counts = [0u64; 16];
        for _ in 0..100_000 {
            let g = gaussian_matrix(4, 4, &mut rng);
            let q = orthonormalize(&g).unwrap();
            let mut idx = 0usize;
            for i in 0..4 {
                if q[(i, 0)] > 0.0 {
                    idx |= 1 << i;
                }
            }
            counts[idx] += 1;
        }
        let p = chi_square_test(&counts, &[1.0 / 16.0; 16]);
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn complement_of_e1_in_r2() {
        let h = Subspace::coordinate_span(2, 1);
        let c = complement(&h);
        assert_eq!(c.dim(), 1);
        assert!(c.basis()[(0, 0)].abs() < 1e-12);
        assert!((c.basis()[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_is_involutive_and_dimensions_add() {
        let mut rng = RngStream::new(7, 0);
        let h = sample_grassmannian(9, 4, &mut rng);
        let hp = complement(&h);
        assert_eq!(hp.dim(), 5);
        let back = complement(&hp);
        // compare projectors P = B B^T
        let p1 = h.basis().matmul(&h.basis().transpose());
        let p2 = back.basis().matmul(&back.basis().transpose());
        let mut worst = 0.0f64;
        for i in 0..9 {
            for j in 0..9 {
                worst = worst.max((p1[(i, j)] - p2[(i, j)]).abs());
            }
        }
        assert!(worst < 1e-9, "projector difference {worst}");
    }

    #[test]
    fn lift_edge_cases() {
        let theta = UnitVector::new(vec![0.6, 0.8]).unwrap();
        let zero = lift_from_ball(&[0.0], &theta).unwrap();
        assert_eq!(zero.coords()[0], 0.0);
        assert!((zero.coords()[1] - 0.6).abs() < 1e-15);
        let edge = lift_from_ball(&[1.0], &theta).unwrap();
        assert!((edge.coords()[0] - 1.0).abs() < 1e-15);
        assert_eq!(edge.coords()[1], 0.0);
        assert!(lift_from_ball(&[1.1], &theta).is_err());
        let mid = lift_from_ball(&[0.3, -0.4], &theta).unwrap();
        assert!(mid.norm_defect() < 1e-12);
    }

    #[test]
    fn full_set_has_measure_one() {
        for (n, k) in [(10, 1), (64, 1), (64, 2), (200, 1), (33, 2)] {
            let m = coordinate_set_measure(n, &CoordinateSet::full(k), &rule()).unwrap();
            assert!((m.value - 1.0).abs() < 1e-8, "n={n} k={k}: {}", m.value);
        }
    }

    #[test]
    fn hemisphere_is_half() {
        let m = coordinate_set_measure(50, &CoordinateSet::cap(0.0), &rule()).unwrap();
        assert!((m.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn cap_measure_n3_closed_form() {
        // at n = 3 the density is flat: measure = (1-T)/2
        let m = coordinate_set_measure(3, &CoordinateSet::cap(0.4), &rule()).unwrap();
        assert!((m.value - 0.3).abs() < 1e-10, "{}", m.value);
    }

    /// Independent oracle: Simpson integration on a uniform grid, entirely
    /// separate from the Gauss-Legendre path.
    #[test]
    fn cap_measure_matches_simpson_oracle() {
        let n = 64;
        let t = 0.25;
        let c = crate::special::coarea_constant(n, 1).unwrap();
        let steps = 200_001;
        let h = (1.0 - t) / (steps - 1) as f64;
        let f = |x: f64| (1.0 - x * x).powf((n as f64 - 3.0) / 2.0);
        let mut acc = f(t) + f(1.0);
        for i in 1..steps - 1 {
            let x = t + i as f64 * h;
            acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = c * acc * h / 3.0;
        let got = coordinate_set_measure(n, &CoordinateSet::cap(t), &rule()).unwrap().value;
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
    }

    #[test]
    fn qmc_predicate_full_ball_is_one() {
        let set = CoordinateSet::predicate(3, Arc::new(|_: &[f64]| true));
        let m = coordinate_set_measure(40, &set, &rule()).unwrap();
        assert!((m.value - 1.0).abs() < 3.0 * m.stderr + 5e-3, "{} +- {}", m.value, m.stderr);
        // deterministic across calls
        let m2 = coordinate_set_measure(40, &set, &rule()).unwrap();
        assert_eq!(m.value.to_bits(), m2.value.to_bits());
    }

    #[test]
    fn restricted_mc_full_set_is_one() {
        let mut rng = RngStream::new(8, 0);
        let h = sample_grassmannian(20, 10, &mut rng);
        let (p, se) = restricted_measure_mc(&CoordinateSet::full(2), &h, 500, &mut rng);
        assert_eq!(p, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn restricted_mc_on_full_space_matches_quadrature() {
        let mut rng = RngStream::new(9, 0);
        let n = 30;
        let h = Subspace::coordinate_span(n, n);
        let set = CoordinateSet::cap(0.2);
        let want = coordinate_set_measure(n, &set, &rule()).unwrap().value;
        let (p, se) = restricted_measure_mc(&set, &h, 200_000, &mut rng);
        assert!((p - want).abs() < 3.0 * se, "{p} vs {want} (se {se})");
    }

    #[test]
    fn restricted_mc_orthogonal_coordinate_subspace() {
        // H = span{e2}: every point has x1 = 0, so a cap at T > 0 never hits
        let basis = Matrix::from_rows(&[&[0.0], &[1.0]]);
        let h = Subspace::from_basis(basis).unwrap();
        let mut rng = RngStream::new(10, 0);
        let (p, _) = restricted_measure_mc(&CoordinateSet::cap(0.1), &h, 1000, &mut rng);
        assert_eq!(p, 0.0);
        let (p, _) = restricted_measure_mc(&CoordinateSet::cap(-0.1), &h, 1000, &mut rng);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn grand_mean_over_subspaces_recovers_global_measure() {
        // E_H sigma_H(A cap H) = sigma(A) by rotation invariance
        let n = 100;
        let root = RngStream::new(11, 0);
        let set = CoordinateSet::cap(cap_threshold_for_measure(n, 0.2, &rule()).unwrap());
        let per_h: Vec<f64> = (0..200)
            .map(|i| {
                let mut s = root.substream(i);
                let h = sample_grassmannian(n, n / 2, &mut s);
                restricted_measure_mc(&set, &h, 4000, &mut s).0
            })
            .collect();
        let (mean, se) = mean_stderr(&per_h);
        assert!((mean - 0.2).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn cap_threshold_inversion() {
        let t = cap_threshold_for_measure(50, 0.5, &rule()).unwrap();
        assert!(t.abs() < 1e-10);
        let t = cap_threshold_for_measure(3, 0.3, &rule()).unwrap();
        assert!((t - 0.4).abs() < 1e-9, "{t}");
        // round trip at small measure
        let n = 400;
        let target = (-10.0f64).exp();
        let t = cap_threshold_for_measure(n, target, &rule()).unwrap();
        let back = coordinate_set_measure(n, &CoordinateSet::cap(t), &rule()).unwrap().value;
        assert!((back - target).abs() < 1e-12 * 1.0_f64.max(1.0) + 1e-9 * target, "{back} vs {target}");
    }

    #[test]
    fn membership_ignores_higher_coordinates() {
        let set = CoordinateSet::boxed(vec![(0.1, 0.5), (-0.2, 0.2)]);
        let base = [0.3, 0.0, 0.9, -0.4];
        let perturbed = [0.3, 0.0, -0.7, 0.99];
        assert_eq!(set.contains(&base), set.contains(&perturbed));
    }

    #[test]
    fn analytic_constants_default_violations() {
        let c = AnalyticConstants::default();
        // defaults break the tail-bound admissibility on purpose; they must
        // be reported, not silently accepted
        let v = c.violations(400, 1);
        assert!(v.iter().any(|s| s.contains("alpha1 > rho^2/6")));
        assert!(v.iter().any(|s| s.contains("2*alpha2 >=")));
        // an admissible tail-bound configuration reports nothing at all
        let good = AnalyticConstants { alpha1: 1.0 / 24.0, alpha2: 0.01, rho: 0.5 };
        assert!(good.violations(1600, 1).is_empty(), "{:?}", good.violations(1600, 1));
    }
}
