//! Correlation-matrix dynamics for quadratic Hamiltonians.
//!
//! Convention: `Cᵢⱼ = ⟨d†ⱼ dᵢ⟩`. Under `H = Σ hᵢⱼ d†ᵢ dⱼ` the Heisenberg
//! operators are `d(τ) = U d` with `U = e^{−ihτ}`, so `C(τ) = U C U†`.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lattice::fock::hopping_operator;
use crate::lattice::{FockBasis, ModeLayout, ModeRole, QuadraticHamiltonian};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::state::DensityMatrix;

/// Largest block turned into a dense density matrix.
pub const MAX_RDM_MODES: usize = 12;

/// Tolerance on occupation eigenvalues outside `[0, 1]`.
pub const OCCUPATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub c: CMat,
    pub roles: Vec<ModeRole>,
}

impl CorrelationMatrix {
    pub fn n_modes(&self) -> usize {
        self.roles.len()
    }

    /// Occupation eigenvalues, ascending.
    pub fn occupations(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(&self.c)?.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !linalg::is_hermitian(&self.c, 1e-10) {
            return Err(Error::InvalidCorrelation("not Hermitian".into()));
        }
        let n = self.occupations()?;
        if n[0] < -OCCUPATION_TOL || n[n.len() - 1] > 1.0 + OCCUPATION_TOL {
            return Err(Error::InvalidCorrelation(format!("occupations span [{}, {}]", n[0], n[n.len() - 1])));
        }
        Ok(())
    }

    /// Index permutation to another layout of the same modes.
    pub fn reorder(&self, roles: &[ModeRole]) -> Result<Self> {
        let pos: Vec<usize> = roles
            .iter()
            .map(|r| {
                self.roles
                    .iter()
                    .position(|x| x == r)
                    .ok_or_else(|| Error::Config(format!("mode {r:?} missing")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { c: linalg::permute_symmetric(&self.c, &pos), roles: roles.to_vec() })
    }
}

/// Correlations of the Slater determinant `Π_i (s†ᵢ + a†ᵢ)/√2 · Π_filled c† |vac⟩`.
pub fn initial_correlation(layout: &ModeLayout) -> CorrelationMatrix {
    let n = layout.n_modes();
    let mut c = Mat::<c64>::zeros(n, n);
    let half = c64::new(0.5, 0.0);
    for (s, a) in layout.system_modes().into_iter().zip(layout.replica_modes()) {
        c[(s, s)] = half;
        c[(a, a)] = half;
        c[(s, a)] = half;
        c[(a, s)] = half;
    }
    for k in layout.filled_modes() {
        c[(k, k)] = ONE;
    }
    CorrelationMatrix { c, roles: layout.roles().to_vec() }
}

/// Product state: `c_sys` on the system, empty replicas, chains in their
/// thermofield vacuum.
pub fn product_correlation(layout: &ModeLayout, c_sys: &CMat) -> Result<CorrelationMatrix> {
    let l = layout.system_size;
    if c_sys.nrows() != l || c_sys.ncols() != l {
        return Err(Error::Config(format!("system correlations must be {l}×{l}")));
    }
    let n = layout.n_modes();
    let mut c = Mat::<c64>::zeros(n, n);
    let sys = layout.system_modes();
    for i in 0..l {
        for j in 0..l {
            c[(sys[i], sys[j])] = c_sys[(i, j)];
        }
    }
    for k in layout.filled_modes() {
        c[(k, k)] = ONE;
    }
    let out = CorrelationMatrix { c, roles: layout.roles().to_vec() };
    out.validate()?;
    Ok(out)
}

/// Cached eigendecomposition of `h` for repeated propagation.
#[derive(Clone, Debug)]
pub struct Propagator {
    energies: Vec<f64>,
    v: CMat,
}

impl Propagator {
    pub fn new(hq: &QuadraticHamiltonian) -> Result<Self> {
        let (energies, v) = linalg::hermitian_eigen(&hq.h)?;
        Ok(Self { energies, v })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Rows `rows` of `e^{−ihτ}`.
    pub fn unitary_rows(&self, rows: &[usize], tau: f64) -> CMat {
        let n = self.energies.len();
        let ph: Vec<c64> = self.energies.iter().map(|&e| c64::cis(-e * tau)).collect();
        let vr = Mat::from_fn(rows.len(), n, |i, k| self.v[(rows[i], k)] * ph[k]);
        &vr * self.v.adjoint()
    }

    /// Full `C(τ) = U C U†`.
    pub fn propagate(&self, c0: &CorrelationMatrix, tau: f64) -> CorrelationMatrix {
        let rows: Vec<usize> = (0..self.energies.len()).collect();
        CorrelationMatrix { c: self.propagate_block(&c0.c, &rows, tau), roles: c0.roles.clone() }
    }

    /// The `rows × rows` block of `C(τ)`, without forming the rest.
    pub fn propagate_block(&self, c0: &CMat, rows: &[usize], tau: f64) -> CMat {
        let u = self.unitary_rows(rows, tau);
        let w = &u * c0;
        &w * u.adjoint()
    }
}

/// `C(τ)` for a quadratic Hamiltonian.
pub fn propagate(c0: &CorrelationMatrix, hq: &QuadraticHamiltonian, tau: f64) -> Result<CorrelationMatrix> {
    Ok(Propagator::new(hq)?.propagate(c0, tau))
}

/// Sub-matrix on `roles`, which must appear consecutively and in order.
pub fn reduce_block(c: &CorrelationMatrix, roles: &[ModeRole]) -> Result<CorrelationMatrix> {
    let first = c
        .roles
        .iter()
        .position(|r| Some(r) == roles.first())
        .ok_or_else(|| Error::Config("empty or missing block".into()))?;
    if first + roles.len() > c.roles.len() || c.roles[first..first + roles.len()] != *roles {
        return Err(Error::Ordering("block is not contiguous in the current ordering; reorder first".into()));
    }
    let idx: Vec<usize> = (first..first + roles.len()).collect();
    Ok(CorrelationMatrix { c: linalg::permute_symmetric(&c.c, &idx), roles: roles.to_vec() })
}

fn check_block(c: &CorrelationMatrix) -> Result<(Vec<f64>, CMat)> {
    let m = c.n_modes();
    if m > MAX_RDM_MODES {
        return Err(Error::Capacity(format!("{m}-mode block exceeds {MAX_RDM_MODES}")));
    }
    if !linalg::is_hermitian(&c.c, 1e-10) {
        return Err(Error::InvalidCorrelation("not Hermitian".into()));
    }
    let (n, v) = linalg::hermitian_eigen(&c.c)?;
    if n[0] < -OCCUPATION_TOL || n[m - 1] > 1.0 + OCCUPATION_TOL {
        return Err(Error::InvalidCorrelation(format!("occupations span [{}, {}]", n[0], n[m - 1])));
    }
    Ok((n.into_iter().map(|x| x.clamp(0.0, 1.0)).collect(), v))
}

/// Dense density matrix of the Gaussian state with correlations `c`, built as
/// `Π_k [(1 − n_k)(1 − Ñ_k) + n_k Ñ_k]` over the eigenmodes of `c`.
pub fn gaussian_rdm(c: &CorrelationMatrix) -> Result<DensityMatrix> {
    let (n, v) = check_block(c)?;
    let m = c.n_modes();
    let basis = FockBasis::full(m)?;
    let d = basis.dim();
    let ops: Vec<Vec<CMat>> = (0..m).map(|j| (0..m).map(|i| hopping_operator(&basis, j, i)).collect()).collect();
    let mut rho = linalg::identity(d);
    for k in 0..m {
        let mut nk = Mat::<c64>::zeros(d, d);
        for j in 0..m {
            for i in 0..m {
                let coef = v[(j, k)] * v[(i, k)].conj();
                if coef.norm() == 0.0 {
                    continue;
                }
                let op = &ops[j][i];
                for col in 0..d {
                    for row in 0..d {
                        let x = op[(row, col)];
                        if x != ZERO {
                            nk[(row, col)] += coef * x;
                        }
                    }
                }
            }
        }
        let p = n[k];
        let factor = Mat::from_fn(d, d, |r, s| {
            let id = if r == s { 1.0 - p } else { 0.0 };
            c64::new(id, 0.0) + nk[(r, s)] * (2.0 * p - 1.0)
        });
        rho = &rho * &factor;
    }
    DensityMatrix::new(linalg::hermitian_part(&rho), c.roles.clone())
}

/// The same state through `det(1 − C) exp(Σᵢⱼ [ln(C(1 − C)⁻¹)]ᵢⱼ d†ᵢ dⱼ)`.
/// Requires every occupation strictly inside `(0, 1)`.
pub fn gaussian_rdm_exponential(c: &CorrelationMatrix) -> Result<DensityMatrix> {
    let (n, v) = check_block(c)?;
    if n.iter().any(|&x| x <= 1e-10 || x >= 1.0 - 1e-10) {
        return Err(Error::InvalidCorrelation("occupations must lie strictly inside (0, 1)".into()));
    }
    let m = c.n_modes();
    let a = {
        let lv = Mat::from_fn(m, m, |i, k| v[(i, k)] * (n[k] / (1.0 - n[k])).ln());
        &lv * v.adjoint()
    };
    let basis = FockBasis::full(m)?;
    let d = basis.dim();
    let mut expo = Mat::<c64>::zeros(d, d);
    for i in 0..m {
        for j in 0..m {
            expo += linalg::scale(&hopping_operator(&basis, i, j), a[(i, j)]);
        }
    }
    let det: f64 = n.iter().map(|x| 1.0 - x).product();
    let rho = linalg::hermitian_function(&expo, |x| c64::new(det * x.exp(), 0.0))?;
    DensityMatrix::new(rho, c.roles.clone())
}

/// Correlation matrix of a dense state: `Cᵢⱼ = Tr(ρ d†ⱼ dᵢ)`.
pub fn correlations_of(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    let m = rho.roles.len();
    let basis = FockBasis::full(m)?;
    let c = Mat::from_fn(m, m, |i, j| rho.expectation(&hopping_operator(&basis, j, i)));
    Ok(CorrelationMatrix { c, roles: rho.roles.clone() })
}
