use approx::assert_relative_eq;
use dynmap::chainmap::{
    bath_chains, gauss_rule, recurrence_coefficients, stieltjes, truncation_length, ChainCoefficients, DiscreteMeasure,
    StieltjesOptions,
};
use dynmap::spectral::{BathSpec, SpectralDensity, Weight};
use dynmap::Error;
use proptest::prelude::*;

struct Jacobi {
    alpha: f64,
    beta: f64,
}

impl Weight for Jacobi {
    fn weight(&self, x: f64) -> f64 {
        (1.0 - x).max(0.0).powf(self.alpha) * (1.0 + x).max(0.0).powf(self.beta)
    }
    fn support(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

fn jacobi_monic(alpha: f64, beta: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let s = 2.0 * nf + alpha + beta;
    let g = if n == 0 { (beta - alpha) / (alpha + beta + 2.0) } else { (beta * beta - alpha * alpha) / (s * (s + 2.0)) };
    let b = if n == 0 {
        0.0
    } else {
        4.0 * nf * (nf + alpha) * (nf + beta) * (nf + alpha + beta) / (s * s * (s + 1.0) * (s - 1.0))
    };
    (g, b)
}

fn opts() -> StieltjesOptions {
    StieltjesOptions::default()
}

#[test]
fn semicircle_is_constant() {
    let j = SpectralDensity::semi_elliptical(0.05, 1.0).unwrap();
    let c = recurrence_coefficients(&j, 20, opts()).unwrap();
    assert_relative_eq!(c.beta[0], 0.05 / std::f64::consts::PI, max_relative = 1e-12);
    for n in 0..20 {
        assert!(c.gamma[n].abs() < 1e-10, "γ_{n} = {}", c.gamma[n]);
        if n > 0 {
            assert!((c.beta[n] - 0.25).abs() < 1e-10, "β_{n} = {}", c.beta[n]);
        }
    }
}

#[test]
fn jacobi_closed_form() {
    let w = Jacobi { alpha: 0.5, beta: 0.0 };
    let c = recurrence_coefficients(&w, 30, opts()).unwrap();
    assert_relative_eq!(c.beta[0], 4.0 * 2f64.sqrt() / 3.0, max_relative = 1e-12);
    for n in 0..30 {
        let (g, b) = jacobi_monic(0.5, 0.0, n);
        assert!((c.gamma[n] - g).abs() < 1e-10, "γ_{n}: {} vs {g}", c.gamma[n]);
        if n > 0 {
            assert!((c.beta[n] - b).abs() < 1e-10, "β_{n}: {} vs {b}", c.beta[n]);
        }
    }
}

#[test]
fn symmetric_split_mirrors() {
    for beta in [f64::INFINITY, 10.0, 1.0] {
        let bath = BathSpec::new(SpectralDensity::semi_elliptical(0.05, 1.0).unwrap(), beta, 0.0, 0).unwrap();
        let [c0, c1] = bath_chains(&bath, 20, opts()).unwrap();
        for n in 0..20 {
            assert!((c0.gamma[n] + c1.gamma[n]).abs() < 1e-10);
            assert_relative_eq!(c0.beta[n], c1.beta[n], max_relative = 1e-10);
        }
    }
}

#[test]
fn thermal_branch_reaches_band_limits() {
    let bath = BathSpec::new(SpectralDensity::semi_elliptical(0.05, 1.0).unwrap(), 1.0, 0.0, 0).unwrap();
    let [c0, _] = bath_chains(&bath, 60, opts()).unwrap();
    assert!((c0.gamma[59] - 0.0).abs() < 1e-6);
    assert!((c0.beta[59] - 0.25).abs() < 1e-6);
}

#[test]
fn gauss_rule_reproduces_moments() {
    let bath = BathSpec::new(SpectralDensity::semi_elliptical(0.05, 1.0).unwrap(), 1.0, 0.2, 0).unwrap();
    let m = 12;
    let c: ChainCoefficients = bath_chains(&bath, m, opts()).unwrap()[0].clone();
    let (x, w) = gauss_rule(&c).unwrap();
    let branch = dynmap::spectral::thermofield_split(&bath).unwrap().0;
    for k in 0..2 * m {
        let f = |t: f64| branch.weight(t) * t.powi(k as i32);
        let exact = dynmap::quad::integrate_cosine(&f, -1.0, 1.0, &branch.breakpoints(), 1e-15);
        let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
        assert!((approx - exact).abs() < 1e-12, "moment {k}: {approx} vs {exact}");
    }
}

#[test]
fn truncation_examples() {
    let c = ChainCoefficients { gamma: vec![0.0; 10], beta: vec![0.1].into_iter().chain(std::iter::repeat(0.25).take(9)).collect() };
    assert_eq!(truncation_length(&c, 40.0, 1.5), 60);
    assert_eq!(truncation_length(&c, 0.0, 1.5), 0);
    assert_eq!(truncation_length(&c, 80.0, 1.5), 120);
}

#[test]
fn degenerate_measure_rejected() {
    let j = SpectralDensity::semi_elliptical(0.0, 1.0).unwrap();
    assert!(matches!(recurrence_coefficients(&j, 5, opts()), Err(Error::DegenerateMeasure(_))));
}

#[test]
fn too_many_coefficients_need_refinement() {
    let m = DiscreteMeasure { nodes: vec![-0.5, 0.0, 0.5], weights: vec![1.0; 3] };
    assert!(matches!(stieltjes(&m, 3, true), Err(Error::Precision(_))));
    assert!(stieltjes(&m, 1, true).is_ok());
}

#[test]
fn rescaling_bandwidth() {
    let a = BathSpec::new(SpectralDensity::semi_elliptical(0.05, 1.0).unwrap(), 10.0, 0.1, 0).unwrap();
    let b = BathSpec::new(SpectralDensity::semi_elliptical(0.05, 2.0).unwrap(), 5.0, 0.2, 0).unwrap();
    let ca = bath_chains(&a, 15, opts()).unwrap();
    let cb = bath_chains(&b, 15, opts()).unwrap();
    for k in 0..2 {
        assert_relative_eq!(cb[k].beta[0], 2.0 * ca[k].beta[0], max_relative = 1e-10);
        for n in 0..15 {
            assert!((cb[k].gamma[n] - 2.0 * ca[k].gamma[n]).abs() < 1e-10);
            if n > 0 {
                assert_relative_eq!(cb[k].beta[n], 4.0 * ca[k].beta[n], max_relative = 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn coefficients_stay_in_band(beta in 0.1f64..50.0, mu in -0.8f64..0.8, gamma in 0.01f64..1.0) {
        let bath = BathSpec::new(SpectralDensity::semi_elliptical(gamma, 1.0).unwrap(), beta, mu, 0).unwrap();
        let cs = bath_chains(&bath, 20, StieltjesOptions { grid: 4000, compensated: true }).unwrap();
        for c in &cs {
            prop_assert!(c.beta[0] > 0.0);
            for n in 0..20 {
                prop_assert!(c.gamma[n].abs() <= 1.0);
                if n > 0 {
                    prop_assert!(c.beta[n] > 0.0 && c.beta[n] <= 1.0);
                }
            }
        }
        prop_assert!((cs[0].beta[0] + cs[1].beta[0] - gamma / std::f64::consts::PI).abs() < 1e-10 * gamma);
    }
}
