//! Cross-module distributional invariants: rotation invariance, the coarea
//! change of variables against sphere Monte Carlo, the ball-to-sphere lift
//! pushforward, and the equality in law of the direct and reduced statistics.

use orthosphere::concentration::{direct_draws, reduced_draws, BoundedDensity, SpectrumSampler};
use orthosphere::linalg::orthonormalize;
use orthosphere::matrix::{gaussian_matrix, Matrix};
use orthosphere::quadrature::QuadratureRule;
use orthosphere::rng::RngStream;
use orthosphere::spectra::principal_cosines;
use orthosphere::sphere::{
    cap_threshold_for_measure, coordinate_set_measure, lift_from_ball, sample_grassmannian,
    sample_unit_sphere, CoordinateSet, Subspace, UnitVector,
};
use orthosphere::stats::{chi_square_two_sample, ks_two_sample};

fn rule() -> QuadratureRule {
    QuadratureRule::default()
}

#[test]
fn rotation_invariance_of_principal_cosines() {
    // applying a fixed rotation to Haar subspaces leaves the law of their
    // principal cosines against a fixed frame unchanged
    let (n, d, k, draws) = (40usize, 20usize, 2usize, 2000usize);
    let r = orthonormalize(&gaussian_matrix(n, n, &mut RngStream::new(70, 999))).unwrap();
    let e = Subspace::coordinate_span(n, k);
    let root = RngStream::new(70, 0);
    let mut plain = Vec::with_capacity(draws * k);
    let mut rotated = Vec::with_capacity(draws * k);
    for i in 0..draws {
        let mut s1 = root.substream(2 * i as u64);
        let mut s2 = root.substream(2 * i as u64 + 1);
        let h1 = sample_grassmannian(n, d, &mut s1);
        plain.extend_from_slice(principal_cosines(&h1, &e).unwrap().values());
        let h2 = sample_grassmannian(n, d, &mut s2);
        let rh = Subspace::from_basis(r.matmul(h2.basis())).unwrap();
        rotated.extend_from_slice(principal_cosines(&rh, &e).unwrap().values());
    }
    let ks = ks_two_sample(&plain, &rotated);
    assert!(ks < 0.06, "KS = {ks}");
}

#[test]
fn coarea_identity_against_sphere_monte_carlo() {
    // box in the first two coordinates at n = 64: quadrature equals direct
    // sphere sampling within 3 Monte Carlo standard errors
    let n = 64usize;
    let set = CoordinateSet::boxed(vec![(0.05, 0.35), (-0.1, 0.25)]);
    let quad = coordinate_set_measure(n, &set, &rule()).unwrap();
    assert_eq!(quad.stderr, 0.0);

    let samples = 1_000_000usize;
    let mut rng = RngStream::new(71, 0);
    let mut hits = 0u64;
    for _ in 0..samples {
        let u = sample_unit_sphere(n, &mut rng);
        if set.contains(&u.coords()[..2]) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = orthosphere::stats::binomial_stderr(hits, samples as u64);
    assert!(
        (quad.value - p).abs() <= 3.0 * se,
        "quadrature {} vs MC {} (3se = {})",
        quad.value,
        p,
        3.0 * se
    );
}

#[test]
fn lift_pushes_product_measure_to_uniform() {
    // sample x in B_2 with the coarea density (exact inverse-CDF for the
    // radius), lift with an independent uniform theta, and compare the law
    // of |(x1,x2)| against direct sphere sampling
    let (m, k, draws) = (30usize, 2usize, 100_000usize);
    let mut rng = RngStream::new(72, 0);
    let bins = 20usize;
    let mut lifted = vec![0u64; bins];
    let mut direct = vec![0u64; bins];
    for _ in 0..draws {
        // radial CDF: P(|x|^2 <= s) = 1 - (1-s)^{(m-k)/2} for k = 2
        let u = rng.uniform();
        let s = 1.0 - (1.0 - u).powf(2.0 / (m - k) as f64);
        let r = s.sqrt();
        let angle = std::f64::consts::TAU * rng.uniform();
        let x = [r * angle.cos(), r * angle.sin()];
        let theta = sample_unit_sphere(m - k, &mut rng);
        let p = lift_from_ball(&x, &theta).unwrap();
        debug_assert!(p.norm_defect() < 1e-12);
        let bin = ((r * bins as f64) as usize).min(bins - 1);
        lifted[bin] += 1;

        let q = sample_unit_sphere(m, &mut rng);
        let rq = (q.coords()[0] * q.coords()[0] + q.coords()[1] * q.coords()[1]).sqrt();
        let bin = ((rq * bins as f64) as usize).min(bins - 1);
        direct[bin] += 1;
    }
    let p = chi_square_two_sample(&lifted, &direct);
    assert!(p > 1e-3, "p = {p}");
}

#[test]
fn direct_and_reduced_statistics_agree_in_law_small_scale() {
    // desk copy of the equality-in-distribution check at n = 40
    let n = 40usize;
    let sigma = 0.2;
    let t = cap_threshold_for_measure(n, sigma, &rule()).unwrap();
    let set = CoordinateSet::cap(t);
    let f = BoundedDensity::indicator(n, set.clone(), &rule()).unwrap();
    let draws = 250usize;
    let direct: Vec<f64> = direct_draws(&set, n, draws, 40_000, &RngStream::new(73, 0), &rule())
        .unwrap()
        .into_iter()
        .map(|d| d.statistic)
        .collect();
    let reduced: Vec<f64> = reduced_draws(
        &f,
        n,
        1,
        draws,
        SpectrumSampler::HaarSubspace,
        &RngStream::new(73, 1),
        &rule(),
    )
    .unwrap()
    .into_iter()
    .map(|d| d.sample.statistic)
    .collect();
    let ks = ks_two_sample(&direct, &reduced);
    assert!(ks < 0.15, "KS = {ks}");
}

#[test]
fn unit_vector_rejects_zero() {
    assert!(UnitVector::new(vec![0.0, 0.0]).is_err());
    let m = Matrix::zeros(2, 2);
    assert!(m.assert_finite().is_ok());
}
