//! Seeded random states for reconstruction checks.

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMat, ZERO};

fn ginibre(n: usize, rng: &mut impl Rng) -> CMat {
    Mat::from_fn(n, n, |_, _| c64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
}

/// Haar-distributed unitary (Gram–Schmidt on a Ginibre matrix).
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let mut g = ginibre(n, rng);
    for k in 0..n {
        for j in 0..k {
            let p: c64 = (0..n).map(|i| g[(i, j)].conj() * g[(i, k)]).sum();
            for i in 0..n {
                let v = g[(i, j)];
                g[(i, k)] -= p * v;
            }
        }
        let nrm = (0..n).map(|i| g[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            g[(i, k)] /= nrm;
        }
    }
    g
}

/// Correlation matrix `V diag(n) V†` with Haar `V` and uniform occupations.
pub fn random_gaussian_correlation(l: usize, rng: &mut impl Rng) -> CMat {
    let v = haar_unitary(l, rng);
    let n: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
    let vn = Mat::from_fn(l, l, |i, k| v[(i, k)] * n[k]);
    &vn * v.adjoint()
}

/// Hilbert–Schmidt random density matrix `GG†/Tr(GG†)`.
pub fn random_density_matrix(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m);
    linalg::scale(&m, c64::new(1.0 / tr.re, 0.0))
}

/// Drop coherences between even and odd occupation-parity sectors.
pub fn parity_project(rho: &CMat) -> CMat {
    Mat::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        if (i.count_ones() + j.count_ones()) % 2 == 0 {
            rho[(i, j)]
        } else {
            ZERO
        }
    })
}
