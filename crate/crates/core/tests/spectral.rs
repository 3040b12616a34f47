use std::f64::consts::PI;

use approx::assert_relative_eq;
use dynmap::quad;
use dynmap::spectral::*;
use dynmap::Error;
use proptest::prelude::*;

#[test]
fn fermi_factor_deep_tail_without_overflow() {
    // 1/(1 + e^{50}), evaluated in 40-digit arithmetic
    let f = fermi_factor(500.0, 0.0, 0.1);
    assert_relative_eq!(f, 1.928749847963917783e-22, max_relative = 1e-14);
    assert_eq!(fermi_factor(1e6, 0.0, 1.0), 0.0);
    assert_eq!(fermi_factor(1e6, 0.0, -1.0), 1.0);
}

#[test]
fn fermi_factor_zero_temperature_step() {
    assert_eq!(fermi_factor(f64::INFINITY, 0.2, 0.3), 0.0);
    assert_eq!(fermi_factor(f64::INFINITY, 0.2, 0.1), 1.0);
    assert_eq!(fermi_factor(f64::INFINITY, 0.2, 0.2), 0.5);
}

#[test]
fn semi_elliptical_values() {
    let sd = SpectralDensity::semi_elliptical(0.05, 1.0).unwrap();
    assert_relative_eq!(sd.evaluate(0.5).unwrap(), 0.0087746718975772828562, max_relative = 1e-14);
    assert_eq!(sd.evaluate(1.0).unwrap(), 0.0);
    assert_relative_eq!(sd.evaluate(0.0).unwrap(), 2.0 * 0.05 / (PI * PI), max_relative = 1e-15);
}

#[test]
fn smoothed_flat_centre_value() {
    let sd = SpectralDensity::smoothed_flat(0.2, 1.0, 100.0).unwrap();
    assert_relative_eq!(sd.evaluate(0.0).unwrap(), 0.031830988618379067154, max_relative = 1e-14);
}

#[test]
fn evaluation_outside_band_is_a_domain_error() {
    let sd = SpectralDensity::semi_elliptical(0.05, 1.0).unwrap();
    assert!(matches!(sd.evaluate(1.2), Err(Error::Domain(_))));
    assert!(matches!(sd.evaluate(f64::NAN), Err(Error::Domain(_))));
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(SpectralDensity::semi_elliptical(-0.1, 1.0).is_err());
    assert!(SpectralDensity::semi_elliptical(0.1, 0.0).is_err());
    assert!(SpectralDensity::smoothed_flat(0.1, 1.0, -3.0).is_err());
    assert!(SpectralDensity::tabulated(1.0, vec![(-1.0, 0.1), (0.5, 0.2)]).is_err());
    assert!(SpectralDensity::tabulated(1.0, vec![(-1.0, 0.1), (1.0, -0.2)]).is_err());
    let sd = SpectralDensity::semi_elliptical(0.1, 1.0).unwrap();
    assert!(BathSpec::new(sd.clone(), -1.0, 0.0, 0).is_err());
    assert!(BathSpec::new(sd, 1.0, 1.5, 0).is_err());
}

#[test]
fn kondo_temperature_matches_formula() {
    let tk = kondo_temperature(0.8, 0.2 / (2.0 * PI)).unwrap();
    assert_relative_eq!(tk, 0.0097523370194817780079, max_relative = 1e-13);
    assert!(kondo_temperature(0.0, 0.1).is_err());
}

#[test]
fn semi_elliptical_total_coupling_is_gamma() {
    for &(g, d) in &[(0.05, 1.0), (0.3, 2.5), (1.0, 0.7)] {
        let sd = SpectralDensity::semi_elliptical(g, d).unwrap();
        assert_relative_eq!(sd.total_coupling(), g, max_relative = 1e-8);
        let mass = quad::integrate_cosine(&|w| sd.value(w), -d, d, &[], 1e-15);
        assert_relative_eq!(mass, g * d / PI, max_relative = 1e-8);
    }
}

#[test]
fn smoothed_flat_total_coupling_has_closed_form() {
    for &(g, d, nu) in &[(0.2, 1.0, 100.0), (0.05, 1.0, 20.0), (0.1, 2.0, 50.0)] {
        let sd = SpectralDensity::smoothed_flat(g, d, nu).unwrap();
        let a = (-nu * d).exp();
        let integral = 2.0 / (nu * (1.0 - a * a)) * (nu * d + ((1.0 + a * a) / 2.0).ln());
        assert_relative_eq!(sd.total_coupling(), g * integral / (2.0 * d), max_relative = 1e-8);
    }
}

#[test]
fn tabulated_density_interpolates_and_normalises() {
    let sd = SpectralDensity::tabulated(1.0, vec![(-1.0, 0.0), (0.0, 0.1), (1.0, 0.0)]).unwrap();
    assert_relative_eq!(sd.evaluate(0.5).unwrap(), 0.05, max_relative = 1e-15);
    // triangle of area 0.1
    assert_relative_eq!(sd.gamma, 2.0 * PI * 0.1 / 2.0, max_relative = 1e-8);
}

#[test]
fn zero_temperature_branch_supports() {
    let sd = SpectralDensity::semi_elliptical(0.05, 1.0).unwrap();
    let bath = BathSpec::new(sd, f64::INFINITY, 0.2, 0).unwrap();
    let (w0, w1) = thermofield_split(&bath).unwrap();
    assert_eq!(w0.support(), (0.2, 1.0));
    assert_eq!(w1.support(), (-1.0, 0.2));
}

proptest! {
    #[test]
    fn fermi_factor_is_a_bounded_reflection(beta in 0.0f64..1e4, mu in -1.0f64..1.0, x in -2.0f64..2.0) {
        let f = fermi_factor(beta, mu, mu + x);
        prop_assert!((0.0..=1.0).contains(&f));
        let g = fermi_factor(beta, mu, mu - x);
        prop_assert!((f + g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn thermofield_branches_sum_to_density(
        gamma in 0.01f64..1.0, beta in 0.0f64..200.0, mu in -0.9f64..0.9, w in -1.0f64..1.0, flat in any::<bool>()
    ) {
        let sd = if flat {
            SpectralDensity::smoothed_flat(gamma, 1.0, 100.0).unwrap()
        } else {
            SpectralDensity::semi_elliptical(gamma, 1.0).unwrap()
        };
        let bath = BathSpec::new(sd.clone(), beta, mu, 0).unwrap();
        let (w0, w1) = thermofield_split(&bath).unwrap();
        let (a, b) = (w0.weight(w), w1.weight(w));
        prop_assert!(a >= 0.0 && b >= 0.0);
        prop_assert!((a + b - sd.value(w)).abs() <= 1e-15 * sd.value(w).max(1e-300));
    }

    #[test]
    fn semi_elliptical_normalisation_holds(gamma in 0.001f64..2.0, d in 0.1f64..10.0) {
        let sd = SpectralDensity::semi_elliptical(gamma, d).unwrap();
        prop_assert!((sd.total_coupling() - gamma).abs() <= 1e-8 * gamma);
    }
}
