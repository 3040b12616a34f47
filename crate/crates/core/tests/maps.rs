use dynmap::c64;
use dynmap::linalg::{self, CMat, ONE, ZERO};
use dynmap::maps::{
    choi_to_map, finite_difference, finite_difference_strided, fixed_point_of_generator, fixed_point_of_map, generators_on_grid, map_to_propagator,
    memory_times, preb_compose, slippage_propagate, spectral_decomposition, unvectorize, validate_cptp, vectorize,
    SpectrumOrder, Stencil, Superoperator, KAPPA_MAX,
};
use dynmap::random;
use dynmap::Error;
use faer::Mat;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn from_action(d: usize, tau: f64, f: impl Fn(&CMat) -> CMat) -> Superoperator {
    let n = d * d;
    let mut m = Mat::<c64>::zeros(n, n);
    for c in 0..n {
        let e = Mat::from_fn(d, d, |i, j| if i + d * j == c { ONE } else { ZERO });
        let v = vectorize(&f(&e));
        for r in 0..n {
            m[(r, c)] = v[r];
        }
    }
    Superoperator::new(m, tau).unwrap()
}

/// Single mode with level spacing ω decaying at rate γ into the empty state
/// (index 0 = empty, 1 = occupied).
fn damping(gamma: f64, omega: f64, tau: f64) -> Superoperator {
    from_action(2, tau, |r| {
        let p = (-gamma * tau).exp();
        let coh = c64::cis(omega * tau) * (-0.5 * gamma * tau).exp();
        Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => r[(0, 0)] + r[(1, 1)] * (1.0 - p),
            (1, 1) => r[(1, 1)] * p,
            (0, 1) => r[(0, 1)] * coh,
            _ => r[(1, 0)] * coh.conj(),
        })
    })
}

fn damping_generator(gamma: f64, omega: f64) -> CMat {
    from_action(2, 0.0, |r| {
        let coh = c64::new(-0.5 * gamma, omega);
        Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => r[(1, 1)] * gamma,
            (1, 1) => -r[(1, 1)] * gamma,
            (0, 1) => r[(0, 1)] * coh,
            _ => r[(1, 0)] * coh.conj(),
        })
    })
    .matrix
}

fn projector(d: usize, k: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| if i == k && j == k { ONE } else { ZERO })
}

#[test]
fn vectorisation_round_trip() {
    let a = Mat::from_fn(3, 3, |i, j| c64::new(i as f64, j as f64));
    let v = vectorize(&a);
    assert_eq!(v[1 + 3 * 2], a[(1, 2)]);
    assert_eq!(unvectorize(&v, 3), a);
}

#[test]
fn identity_from_maximally_entangled_state() {
    for d in [2usize, 4] {
        let mut phi = vec![ZERO; d * d];
        for n in 0..d {
            phi[n * d + n] = c64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let rho = Mat::from_fn(d * d, d * d, |i, j| phi[i] * phi[j].conj());
        let s = choi_to_map(&rho, 0.0).unwrap();
        assert!(linalg::max_abs(&(&s.matrix - &linalg::identity(d * d))) < 1e-15);
        let choi = s.choi();
        assert!(linalg::max_abs(&(&choi - &linalg::scale(&rho, c64::new(d as f64, 0.0)))) < 1e-15);
        assert!(validate_cptp(&s).unwrap().passes(1e-12));
    }
}

#[test]
fn choi_round_trip_for_damping() {
    let s = damping(0.3, 0.2, 1.5);
    let back = choi_to_map(&linalg::scale(&s.choi(), c64::new(0.5, 0.0)), 1.5).unwrap();
    assert!(linalg::max_abs(&(&back.matrix - &s.matrix)) < 1e-15);
}

#[test]
fn replacement_map() {
    let mut rng = StdRng::seed_from_u64(1);
    let sigma = random::random_density_matrix(3, &mut rng);
    let s = from_action(3, 1.0, |r| linalg::scale(&sigma, linalg::trace(r)));
    let spec = spectral_decomposition(&s, SpectrumOrder::Modulus).unwrap();
    assert!((spec.values[0] - ONE).norm() < 1e-12);
    for v in &spec.values[1..] {
        assert!(v.norm() < 1e-12);
    }
    let fp = fixed_point_of_map(&s).unwrap();
    assert!(linalg::max_abs(&(&fp - &sigma)) < 1e-12);
    assert!(validate_cptp(&s).unwrap().passes(1e-12));
    let zero = linalg::zeros(9, 9);
    assert!(matches!(map_to_propagator(&s, &zero, KAPPA_MAX), Err(Error::SingularMap { .. })));
}

#[test]
fn transpose_is_not_completely_positive() {
    let s = from_action(2, 0.0, |r| r.transpose().to_owned());
    let rep = validate_cptp(&s).unwrap();
    assert!(rep.trace_residual < 1e-15);
    assert!((rep.choi_min_eigenvalue + 1.0).abs() < 1e-12);
    assert!(!rep.passes(1e-8));
}

#[test]
fn eigenvectors_are_biorthonormal() {
    let s = damping(0.4, 0.7, 2.0);
    let spec = spectral_decomposition(&s, SpectrumOrder::Modulus).unwrap();
    let prod = &spec.left * &spec.right;
    assert!(linalg::max_abs(&(&prod - &linalg::identity(4))) < 1e-12);
    assert!(!spec.ill_conditioned);
    assert!((spec.values[0] - ONE).norm() < 1e-12);
}

fn generator_error(delta: f64) -> f64 {
    let (g, w, t) = (0.5, 0.8, 2.0);
    let series: Vec<Superoperator> = (0..3).map(|k| damping(g, w, t + (k as f64 - 1.0) * delta)).collect();
    let (der, stencil) = finite_difference(&series, 1, delta).unwrap();
    assert_eq!(stencil, Stencil::Central);
    let (l, _) = map_to_propagator(&series[1], &der, KAPPA_MAX).unwrap();
    linalg::max_abs(&(&l.matrix - &damping_generator(g, w)))
}

#[test]
fn semigroup_generator_is_second_order() {
    let deltas = [0.08, 0.04, 0.02, 0.01];
    let errs: Vec<f64> = deltas.iter().map(|&d| generator_error(d)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} from {errs:?}");
    }
}

#[test]
fn strided_difference_matches_coarser_grid() {
    let fine: Vec<Superoperator> = (0..=12).map(|k| damping(0.5, 0.3, k as f64 * 0.05)).collect();
    let coarse: Vec<Superoperator> = (0..=4).map(|k| damping(0.5, 0.3, k as f64 * 0.15)).collect();
    for (kf, kc) in [(0, 0), (6, 2), (12, 4)] {
        let (a, sa) = finite_difference_strided(&fine, kf, 0.05, 3).unwrap();
        let (b, sb) = finite_difference(&coarse, kc, 0.15).unwrap();
        assert_eq!(sa, sb);
        assert!(linalg::max_abs(&(&a - &b)) < 1e-13);
    }
    assert_eq!(finite_difference_strided(&fine, 1, 0.05, 3).unwrap().1, Stencil::Forward);
    assert!(finite_difference_strided(&fine, 1, 0.05, 13).is_err());
}

#[test]
fn generator_series_and_fixed_points() {
    let delta = 0.1;
    let maps: Vec<Superoperator> = (0..=200).map(|k| damping(0.5, 0.3, k as f64 * delta)).collect();
    let gens = generators_on_grid(&maps, delta, KAPPA_MAX);
    assert_eq!(gens[0].stencil, Stencil::Forward);
    assert_eq!(gens[200].stencil, Stencil::Backward);
    let exact = damping_generator(0.5, 0.3);
    let mid = gens[50].generator.as_ref().unwrap();
    assert!(linalg::max_abs(&(&mid.matrix - &exact)) < 1e-2);
    let vac = projector(2, 0);
    assert!(linalg::max_abs(&(&fixed_point_of_generator(mid).unwrap() - &vac)) < 1e-10);
    assert!(linalg::max_abs(&(&fixed_point_of_map(&maps[200]).unwrap() - &vac)) < 1e-10);
    for m in &maps {
        assert!(validate_cptp(m).unwrap().passes(1e-12));
    }

    let generators: Vec<_> = gens.into_iter().map(|g| g.generator).collect();
    let eps = 1e-3;
    let mt = memory_times(&maps, &generators, &projector(2, 1), None, eps).unwrap();
    assert_eq!(mt.map, Some(0.0));
    assert_eq!(mt.generator, Some(0.0));
    // ‖Λ(τ)|1⟩⟨1| − |0⟩⟨0|‖₁ = 2e^{−γτ}.
    let want = (2.0f64 / eps).ln() / 0.5;
    let got = mt.relaxation.unwrap();
    assert!(got >= want && got < want + delta + 1e-9, "{got} vs {want}");
}

#[test]
fn unresolved_memory_time() {
    let maps: Vec<Superoperator> = (0..=10).map(|k| damping(0.5, 0.3, k as f64 * 0.1)).collect();
    let mt = memory_times(&maps, &vec![None; 11], &projector(2, 1), Some(&projector(2, 0)), 1e-3).unwrap();
    assert_eq!(mt.relaxation, None);
    assert_eq!(mt.generator, None);
}

#[test]
fn degenerate_fixed_point_reported() {
    let id = Superoperator::identity(2, 1.0);
    assert!(matches!(fixed_point_of_map(&id), Err(Error::Multiplicity(_))));
}

#[test]
fn slippage_is_exact_for_a_semigroup() {
    let (g, w) = (0.3, 0.9);
    let gen = Superoperator::new(damping_generator(g, w), 5.0).unwrap();
    let lm = damping(g, w, 5.0);
    let mut rng = StdRng::seed_from_u64(9);
    let rho0 = random::random_density_matrix(2, &mut rng);
    let taus = [5.0, 7.5, 12.0, 30.0];
    let traj = slippage_propagate(&gen, &lm, &rho0, &taus).unwrap();
    for (t, r) in taus.iter().zip(&traj) {
        let exact = damping(g, w, *t).apply(&rho0);
        assert!(linalg::trace_distance(r, &exact).unwrap() < 1e-12);
    }
    let preb = preb_compose(&lm, &rho0, 2);
    assert!(linalg::trace_distance(&preb[2], &damping(g, w, 10.0).apply(&rho0)).unwrap() < 1e-12);
    assert!(linalg::max_abs(&(&preb[0] - &rho0)) == 0.0);
}

#[test]
fn preb_converges_to_fixed_point() {
    let lm = damping(0.2, 0.4, 3.0);
    let seq = preb_compose(&lm, &projector(2, 1), 100);
    assert!(linalg::trace_distance(&seq[100], &fixed_point_of_map(&lm).unwrap()).unwrap() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_unitary_channels_are_cptp(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let u = random::haar_unitary(3, &mut rng);
        let s = from_action(3, 0.0, |r| &(&u * r) * u.adjoint());
        prop_assert!(validate_cptp(&s).unwrap().passes(1e-10));
        let spec = spectral_decomposition(&s, SpectrumOrder::Modulus).unwrap();
        for v in &spec.values {
            prop_assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }
}
