//! Principal angles of random subspaces against the first-k-coordinates
//! frame, the Wishart-ratio construction that has the same law, and the
//! concentration statistics built on them.

use crate::linalg::{cholesky, orthonormalize, singular_values_small, symmetric_eigen, whiten_symmetric};
use crate::matrix::{gaussian_matrix, Matrix};
use crate::rng::RngStream;
use crate::special::log_coarea_constant;
use crate::sphere::{sample_grassmannian, AnalyticConstants, Subspace};
use crate::{Error, Result};

/// Ascending principal cosines of a projection between subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if values.iter().any(|v| !(*v >= 0.0 && *v <= 1.0 + 1e-10)) {
            return Err(Error::InvalidArgument(format!(
                "principal cosines must lie in [0,1], got {values:?}"
            )));
        }
        Ok(Self { values })
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when some cosine is exactly 0 or 1 (a probability-zero event the
    /// inverse formulas cannot handle).
    pub fn is_degenerate(&self) -> bool {
        self.values.iter().any(|v| *v <= 0.0 || *v >= 1.0)
    }
}

/// The pair (Lambda, U): a spectrum and an independent Haar rotation of the
/// k-dimensional coordinate frame.
#[derive(Debug, Clone)]
pub struct RotationWithSpectrum {
    pub spectrum: SingularSpectrum,
    pub rotation: Matrix,
}

impl RotationWithSpectrum {
    pub fn k(&self) -> usize {
        self.spectrum.k()
    }
}

/// Singular values of the projection from H to E: the singular values of
/// basis(E)^T basis(H), clamped into [0, 1] and sorted ascending.
pub fn principal_cosines(h: &Subspace, e: &Subspace) -> Result<SingularSpectrum> {
    if h.ambient_dim() != e.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dims {} vs {}",
            h.ambient_dim(),
            e.ambient_dim()
        )));
    }
    if e.dim() > h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dim(E) = {} exceeds dim(H) = {}",
            e.dim(),
            h.dim()
        )));
    }
    // M = E^T H is k x d with k <= d; feed M^T (d x k) to the Gram SVD
    let m = e.basis().transpose().matmul(h.basis());
    let vals = singular_values_small(&m.transpose())?;
    SingularSpectrum::new(vals.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Haar-uniform k x k orthogonal matrix.
pub fn haar_orthogonal(k: usize, rng: &mut RngStream) -> Matrix {
    loop {
        if let Ok(q) = orthonormalize(&gaussian_matrix(k, k, rng)) {
            return q;
        }
    }
}

/// Draw H uniform of dimension n/2, take its spectrum against the first k
/// coordinates, and pair it with an independent Haar rotation.
pub fn sample_lambda_u(n: usize, k: usize, rng: &mut RngStream) -> Result<RotationWithSpectrum> {
    if k > n / 2 {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n/2 = {}", n / 2)));
    }
    let h = sample_grassmannian(n, n / 2, rng);
    let e = Subspace::coordinate_span(n, k);
    let spectrum = principal_cosines(&h, &e)?;
    let rotation = haar_orthogonal(k, rng);
    Ok(RotationWithSpectrum { spectrum, rotation })
}

/// Same law as [`sample_lambda_u`] but through the Wishart ratio, which costs
/// O(n k^2) instead of a full QR; the distributional equality is the content
/// of the Wishart proposition and is itself under test.
pub fn sample_lambda_u_wishart(
    n: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<RotationWithSpectrum> {
    let spectrum = wishart_ratio_spectrum(n, k, rng)?;
    let rotation = haar_orthogonal(k, rng);
    Ok(RotationWithSpectrum { spectrum, rotation })
}

/// Square roots of the eigenvalues of N1^T N1 (N1^T N1 + N2^T N2)^{-1} for
/// independent (n/2) x k standard Gaussian N1, N2, solved as a symmetric
/// generalized eigenproblem through the Cholesky factor of the sum.
pub fn wishart_ratio_spectrum(n: usize, k: usize, rng: &mut RngStream) -> Result<SingularSpectrum> {
    if k > n / 2 {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n/2 = {}", n / 2)));
    }
    let a = gaussian_matrix(n / 2, k, rng).gram();
    let b = gaussian_matrix(n / 2, k, rng).gram();
    let mut sum = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            sum[(i, j)] = a[(i, j)] + b[(i, j)];
        }
    }
    let l = cholesky(&sum)
        .map_err(|_| Error::DegenerateInput("singular Wishart sum matrix".into()))?;
    let c = whiten_symmetric(&a, &l);
    let (mu, _) = symmetric_eigen(&c)?;
    SingularSpectrum::new(mu.into_iter().map(|v| v.clamp(0.0, 1.0).sqrt()).collect())
}

/// The two-sided singular value interval of the Gaussian concentration
/// lemma: [sqrt(n/2) - sqrt(k) - t, sqrt(n/2) + sqrt(k) + t].
pub fn gordon_interval(n: usize, k: usize, t: f64) -> (f64, f64) {
    let center = (n as f64 / 2.0).sqrt();
    let spread = (k as f64).sqrt() + t;
    (center - spread, center + spread)
}

/// Smallest and largest singular values of an (n/2) x k Gaussian matrix,
/// drawn fresh; used to audit the Gordon interval empirically.
pub fn gaussian_singular_extremes(n: usize, k: usize, rng: &mut RngStream) -> Result<(f64, f64)> {
    let m = gaussian_matrix(n / 2, k, rng);
    let vals = singular_values_small(&m)?;
    Ok((vals[0], vals[vals.len() - 1]))
}

/// max_i |lambda_i - 1/sqrt(2)|.
pub fn lambda_deviation(spectrum: &SingularSpectrum) -> f64 {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    spectrum.values().iter().fold(0.0f64, |m, v| m.max((v - c).abs()))
}

/// Probe-based cancellation defect:
/// max over probes of | |U L^-1 U^T x|^2 + |U (I-L^2)^{-1/2} U^T x|^2 - 4|x|^2 | / |x|^2.
pub fn cancellation_defect(lu: &RotationWithSpectrum, probes: &[Vec<f64>]) -> Result<f64> {
    if lu.spectrum.is_degenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    let lam = lu.spectrum.values();
    let mut worst = 0.0f64;
    for x in probes {
        let x2: f64 = x.iter().map(|v| v * v).sum();
        if x2 == 0.0 {
            continue;
        }
        let y = lu.rotation.tr_matvec(x);
        let mut s = 0.0;
        for (yi, l) in y.iter().zip(lam) {
            let y2 = yi * yi;
            s += y2 / (l * l) + y2 / (1.0 - l * l);
        }
        worst = worst.max((s - 4.0 * x2).abs() / x2);
    }
    Ok(worst)
}

/// Exact defect: the sup over all of R^k equals the largest absolute
/// eigenvalue of U L^-2 U^T + U (I-L^2)^-1 U^T - 4 I, which by orthogonal
/// similarity is max_i |1/lambda_i^2 + 1/(1-lambda_i^2) - 4|.
pub fn cancellation_defect_exact(spectrum: &SingularSpectrum) -> Result<f64> {
    if spectrum.is_degenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(spectrum.values().iter().fold(0.0f64, |m, l| {
        let l2 = l * l;
        m.max((1.0 / l2 + 1.0 / (1.0 - l2) - 4.0).abs())
    }))
}

/// Default probe set: the k coordinate directions plus 32 random unit probes.
pub fn default_probes(k: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let mut probes = Vec::with_capacity(k + 32);
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        probes.push(e);
    }
    for _ in 0..32 {
        probes.push(crate::sphere::sample_unit_sphere(k, rng).coords().to_vec());
    }
    probes
}

/// 2^{k/2} C_{n/2,k} / C_{n,k}, evaluated through log-Gamma differences;
/// returns 1 for k = 0.
pub fn coefficient_ratio(n: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    if k >= n / 2 {
        return Err(Error::InvalidArgument(format!("need k <= n/2 - 1, got n={n} k={k}")));
    }
    let log = 0.5 * k as f64 * std::f64::consts::LN_2 + log_coarea_constant(n / 2, k)?
        - log_coarea_constant(n, k)?;
    Ok(log.exp())
}

/// Whether a spectrum satisfies
/// C_{n/2,k} sqrt(prod 1/(lambda_j sqrt(1-lambda_j^2))) >= 0.98 C_{n,k},
/// evaluated in log space.
pub fn coefficient_event(n: usize, spectrum: &SingularSpectrum) -> Result<bool> {
    if spectrum.is_degenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    let k = spectrum.k();
    let mut log_prod = 0.0;
    for l in spectrum.values() {
        log_prod += l.ln() + 0.5 * (1.0 - l * l).ln();
    }
    let lhs = log_coarea_constant(n / 2, k)? - 0.5 * log_prod;
    let rhs = 0.98f64.ln() + log_coarea_constant(n, k)?;
    Ok(lhs >= rhs)
}

/// Fraction of sampled spectra (Wishart route) satisfying the coefficient
/// event. Degenerate draws are discarded and counted separately.
pub fn coefficient_event_frequency(
    n: usize,
    k: usize,
    trials: usize,
    constants: &AnalyticConstants,
    rng: &mut RngStream,
) -> Result<(f64, usize)> {
    constants.require_k_bound(n, k)?;
    let mut hits = 0usize;
    let mut discarded = 0usize;
    for i in 0..trials {
        let mut s = rng.substream(i as u64);
        let spec = wishart_ratio_spectrum(n, k, &mut s)?;
        match coefficient_event(n, &spec) {
            Ok(true) => hits += 1,
            Ok(false) => {}
            Err(Error::DegenerateSpectrum) => discarded += 1,
            Err(e) => return Err(e),
        }
    }
    let valid = trials - discarded;
    Ok((hits as f64 / valid.max(1) as f64, discarded))
}
