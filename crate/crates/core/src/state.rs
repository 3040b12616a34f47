//! Density matrices over a block of fermionic modes.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lattice::ModeRole;
use crate::linalg::{self, CMat};

/// A density matrix in the occupation basis of `roles` (first role = most
/// significant bit).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub rho: CMat,
    pub roles: Vec<ModeRole>,
}

impl DensityMatrix {
    pub fn new(rho: CMat, roles: Vec<ModeRole>) -> Result<Self> {
        let d = 1usize << roles.len();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Domain(format!("{}×{} matrix for {} modes", rho.nrows(), rho.ncols(), roles.len())));
        }
        Ok(Self { rho, roles })
    }

    pub fn maximally_mixed(roles: Vec<ModeRole>) -> Self {
        let d = 1usize << roles.len();
        let rho = Mat::from_fn(d, d, |i, j| if i == j { c64::new(1.0 / d as f64, 0.0) } else { linalg::ZERO });
        Self { rho, roles }
    }

    pub fn from_pure(psi: &[c64], roles: Vec<ModeRole>) -> Result<Self> {
        let d = psi.len();
        Self::new(Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj()), roles)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> c64 {
        linalg::trace(&self.rho)
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, op: &CMat) -> c64 {
        let d = self.dim();
        let mut s = linalg::ZERO;
        for i in 0..d {
            for j in 0..d {
                s += self.rho[(i, j)] * op[(j, i)];
            }
        }
        s
    }

    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        linalg::trace_distance(&self.rho, &other.rho)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (v, _) = linalg::hermitian_eigen(&self.rho)?;
        Ok(v[0])
    }

    /// Hermitian, unit trace and positive semidefinite to `tol`.
    pub fn is_physical(&self, tol: f64) -> Result<bool> {
        Ok(linalg::is_hermitian(&self.rho, tol)
            && (self.trace() - linalg::ONE).norm() <= tol
            && self.min_eigenvalue()? >= -tol)
    }
}
