use std::f64::consts::PI;

use dynmap::c64;
use dynmap::lattice::{InteractionTerms, Ordering, Side};
use dynmap::linalg::{self, ZERO};
use dynmap::pipeline::{self, BathModel, ChainSettings, Model};
use dynmap::random;
use dynmap::spectral::{BathSpec, SpectralDensity};
use dynmap::state::DensityMatrix;
use dynmap::transport::{lb_currents, observables, principal_value, self_energy, LbProblem};
use dynmap::Error;
use faer::Mat;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn semi(gamma: f64, beta: f64, mu: f64, mode: usize) -> BathSpec {
    BathSpec::new(SpectralDensity::semi_elliptical(gamma, 1.0).unwrap(), beta, mu, mode).unwrap()
}

fn asymmetric_model() -> Model {
    Model {
        onsite: vec![0.3, -0.1],
        hopping: vec![0.25],
        interaction: InteractionTerms::default(),
        baths: vec![
            BathModel { spec: semi(0.4, 2.0, 0.3, 0), side: Side::Left, sites: None },
            BathModel { spec: semi(0.4, 5.0, -0.1, 1), side: Side::Right, sites: None },
        ],
    }
}

fn fig5_model() -> Model {
    Model {
        onsite: vec![0.0; 3],
        hopping: vec![0.02; 2],
        interaction: InteractionTerms::default(),
        baths: vec![
            BathModel { spec: semi(0.05, 1.0, 0.2, 0), side: Side::Left, sites: None },
            BathModel { spec: semi(0.05, 1.0, -0.2, 2), side: Side::Right, sites: None },
        ],
    }
}

#[test]
fn observable_examples() {
    let obs = observables(3).unwrap();
    assert_eq!(obs.densities.len(), 3);
    assert_eq!(obs.currents.len(), 2);
    let mixed = DensityMatrix::maximally_mixed(vec![dynmap::lattice::ModeRole::System(0); 3]);
    for n in &obs.densities {
        assert!((mixed.expectation(n).re - 0.5).abs() < 1e-15);
    }
    let mut rng = StdRng::seed_from_u64(4);
    let r = random::random_density_matrix(8, &mut rng);
    let real = Mat::from_fn(8, 8, |i, j| c64::new(0.5 * (r[(i, j)].re + r[(j, i)].re), 0.0));
    for j in &obs.currents {
        assert!(linalg::is_hermitian(j, 0.0));
        assert!(linalg::trace(j).norm() == 0.0);
        let v: c64 = (0..8).flat_map(|a| (0..8).map(move |b| (a, b))).map(|(a, b)| real[(a, b)] * j[(b, a)]).sum();
        assert!(v.norm() < 1e-15);
    }
}

#[test]
fn semicircle_principal_value() {
    let g = 0.05;
    let j = SpectralDensity::semi_elliptical(g, 1.0).unwrap();
    for w in [-0.9, -0.4, 0.0, 0.25, 0.7, 0.99] {
        let pv = principal_value(&j, w, 1e-13).unwrap();
        assert!((pv - 2.0 * g * w / PI).abs() < 1e-8, "ω = {w}: {pv}");
    }
    let s = self_energy(&j, 0.3, 1e-13).unwrap();
    assert!((s.im + PI * j.value(0.3)).abs() < 1e-15);
    assert!(principal_value(&j, 1.0, 1e-12).is_err());
}

#[test]
fn smoothed_flat_principal_value() {
    let j = SpectralDensity::smoothed_flat(0.2, 1.0, 100.0).unwrap();
    let pv = principal_value(&j, 0.3, 1e-13).unwrap();
    assert!((pv - 0.019854046316601352713).abs() < 1e-8, "{pv}");
    // Folding about ω: PV = ∫₀^a [𝒥(ω−u) − 𝒥(ω+u)]/u du + ∫_{ω−D}^{−a} 𝒥(ω−u)/u du with a = D − ω.
    let w = 0.3;
    let a = 1.0 - w;
    let fold = |u: f64| if u == 0.0 { 0.0 } else { (j.value(w - u) - j.value(w + u)) / u };
    let tail = |u: f64| j.value(w - u) / u;
    let br: Vec<f64> = j.breakpoints().iter().map(|b| (w - b).abs()).collect();
    let independent = dynmap::quad::integrate(&fold, 0.0, a, &br, 1e-14) + dynmap::quad::integrate(&tail, a, 1.0 + w, &br, 1e-14);
    assert!((pv - independent).abs() < 1e-8, "{pv} vs {independent}");
}

#[test]
fn transmission_is_bounded() {
    for m in [fig5_model(), asymmetric_model()] {
        let (l, r) = (&m.baths[0].spec, &m.baths[1].spec);
        let prob = LbProblem { h_sys: m.h_sys(), left: l.clone(), right: r.clone(), tol: 1e-10 };
        for k in 1..10_000 {
            let w = -1.0 + 2.0 * k as f64 / 10_000.0;
            let t = prob.transmission(w).unwrap();
            assert!((0.0..=1.0 + 1e-8).contains(&t), "τ({w}) = {t}");
        }
    }
}

#[test]
fn equal_baths_carry_no_current() {
    let h = fig5_model().h_sys();
    let c = lb_currents(&h, &semi(0.05, 1.0, 0.1, 0), &semi(0.05, 1.0, 0.1, 2), 1e-10).unwrap();
    assert!(c.particle.abs() < 1e-12 && c.energy.abs() < 1e-12);
}

#[test]
fn swapping_baths_flips_current() {
    let m = asymmetric_model();
    let (l, r) = (m.baths[0].spec.clone(), m.baths[1].spec.clone());
    let fwd = lb_currents(&m.h_sys(), &l, &r, 1e-11).unwrap();
    let mut l2 = r.clone();
    l2.coupled_mode = 0;
    let mut r2 = l.clone();
    r2.coupled_mode = 1;
    let h = m.h_sys();
    // Mirror the chain so the swapped leads see the same sites.
    let hm = Mat::from_fn(2, 2, |i, j| h[(1 - i, 1 - j)]);
    let back = lb_currents(&hm, &l2, &r2, 1e-11).unwrap();
    assert!((fwd.particle + back.particle).abs() < 1e-10 * fwd.particle.abs());
    assert!((fwd.energy + back.energy).abs() < 1e-9 * fwd.energy.abs().max(1e-12));
    assert!(fwd.particle > 0.0);
}

#[test]
fn interacting_transport_unsupported() {
    let mut m = fig5_model();
    m.interaction.density_density.push((0, 1, 0.05));
    assert!(matches!(pipeline::lb_reference(&m, 1e-10), Err(Error::UnsupportedModel(_))));
}

#[test]
fn landauer_matches_long_time_chain_current() {
    let m = asymmetric_model();
    let lb = pipeline::lb_reference(&m, 1e-11).unwrap();
    let tau = 80.0;
    let p = pipeline::prepare(&m, Ordering::Separated, tau, &ChainSettings::default()).unwrap();
    let rho = pipeline::direct_gaussian(&p, &linalg::zeros(2, 2), &[tau]).unwrap().remove(0);
    let obs = observables(2).unwrap();
    let current = m.hopping[0] * rho.expectation(&obs.currents[0]).re;
    assert!(((current - lb.particle) / lb.particle).abs() < 1e-4, "{current} vs {}", lb.particle);
}

#[test]
fn continuity_on_the_middle_site() {
    let m = fig5_model();
    let p = pipeline::prepare(&m, Ordering::Separated, 10.0, &ChainSettings::default()).unwrap();
    let mut c0 = linalg::zeros(3, 3);
    c0[(0, 0)] = c64::new(1.0, 0.0);
    c0[(2, 2)] = c64::new(0.3, 0.0);
    let (t, h) = (6.0, 1e-3);
    let rs = pipeline::direct_gaussian(&p, &c0, &[t - h, t, t + h]).unwrap();
    let obs = observables(3).unwrap();
    let dn = (rs[2].expectation(&obs.densities[1]).re - rs[0].expectation(&obs.densities[1]).re) / (2.0 * h);
    let flow = m.hopping[0] * rs[1].expectation(&obs.currents[0]).re - m.hopping[1] * rs[1].expectation(&obs.currents[1]).re;
    assert!(flow.abs() > 1e-4);
    assert!((dn - flow).abs() < 1e-8, "{dn} vs {flow}");
    assert!(rs[1].expectation(&obs.densities[0]) != ZERO);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn transmission_bound_random(e0 in -0.5f64..0.5, e1 in -0.5f64..0.5, t in 0.01f64..0.5, g in 0.01f64..0.6, w in -0.999f64..0.999) {
        let prob = LbProblem {
            h_sys: dynmap::lattice::tight_binding(&[e0, e1], &[t]),
            left: semi(g, 1.0, 0.0, 0),
            right: semi(g * 0.7, 1.0, 0.0, 1),
            tol: 1e-10,
        };
        let tr = prob.transmission(w).unwrap();
        prop_assert!((0.0..=1.0 + 1e-8).contains(&tr));
    }
}
