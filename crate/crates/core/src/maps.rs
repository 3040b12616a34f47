//! Superoperators: dynamical maps, their time-local generators and analysis.
//!
//! Vectorisation is column stacking, `vec(ρ)[i + d·j] = ρᵢⱼ`, so that
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. A map on a `d`-dimensional system is a
//! `d² × d²` matrix.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};

/// Default condition-number ceiling for inverting a map.
pub const KAPPA_MAX: f64 = 1e10;
/// Default threshold on the eigenvector condition number above which a
/// spectrum is flagged as (nearly) defective.
pub const DEFECTIVE_COND: f64 = 1e8;
/// Minimum separation between the leading eigenvalue and the rest.
pub const FIXED_POINT_GAP: f64 = 1e-10;

/// A linear map on `d × d` matrices at time `tau`.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub matrix: CMat,
    pub d: usize,
    pub tau: f64,
}

pub fn vectorize(rho: &CMat) -> Vec<c64> {
    let d = rho.nrows();
    (0..d * d).map(|k| rho[(k % d, k / d)]).collect()
}

pub fn unvectorize(v: &[c64], d: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| v[i + d * j])
}

impl Superoperator {
    pub fn new(matrix: CMat, tau: f64) -> Result<Self> {
        let n = matrix.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || matrix.ncols() != n {
            return Err(Error::Domain(format!("{}×{} is not a superoperator shape", n, matrix.ncols())));
        }
        Ok(Self { matrix, d, tau })
    }

    pub fn identity(d: usize, tau: f64) -> Self {
        Self { matrix: linalg::identity(d * d), d, tau }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let v = vectorize(rho);
        let n = self.d * self.d;
        let out: Vec<c64> = (0..n).map(|r| (0..n).map(|c| self.matrix[(r, c)] * v[c]).sum()).collect();
        unvectorize(&out, self.d)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix, d: self.d, tau: self.tau + other.tau }
    }

    /// Choi matrix `Σᵢⱼ Λ(|i⟩⟨j|) ⊗ |i⟩⟨j|`, trace `d`.
    pub fn choi(&self) -> CMat {
        let d = self.d;
        Mat::from_fn(d * d, d * d, |r, c| {
            let (i, b) = (r / d, r % d);
            let (j, a) = (c / d, c % d);
            self.matrix[(i + d * j, b + d * a)]
        })
    }
}

/// Map from its Choi state `ρ^Λ = (Λ ⊗ I)|Φ⁺⟩⟨Φ⁺|` (system factor first):
/// `Λ[ρ₀]ᵢⱼ = d Σ_ab ρ^Λ_{(i,b),(j,a)} (ρ₀)_{ba}`.
pub fn choi_to_map(rho_lambda: &CMat, tau: f64) -> Result<Superoperator> {
    let n = rho_lambda.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || rho_lambda.ncols() != n {
        return Err(Error::Domain("Choi state must be d²×d²".into()));
    }
    let df = c64::new(d as f64, 0.0);
    let matrix = Mat::from_fn(n, n, |r, c| {
        let (i, j) = (r % d, r / d);
        let (b, a) = (c % d, c / d);
        rho_lambda[(i * d + b, j * d + a)] * df
    });
    Ok(Superoperator { matrix, d, tau })
}

/// How a derivative was estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    Central,
    Forward,
    Backward,
}

/// `dΛ/dτ` at grid index `k` of a uniformly spaced series: central in the
/// interior, first-order one-sided at the ends.
pub fn finite_difference(lambdas: &[Superoperator], k: usize, delta: f64) -> Result<(CMat, Stencil)> {
    finite_difference_strided(lambdas, k, delta, 1)
}

/// Same as [`finite_difference`] with step `stride · delta`, reaching
/// `stride` grid points to either side.
pub fn finite_difference_strided(lambdas: &[Superoperator], k: usize, delta: f64, stride: usize) -> Result<(CMat, Stencil)> {
    let n = lambdas.len();
    if n < 2 || stride == 0 || stride >= n {
        return Err(Error::Domain(format!("stride {stride} does not fit {n} maps")));
    }
    let h = stride as f64 * delta;
    let inv = |s: f64| c64::new(1.0 / s, 0.0);
    let diff = |i: usize, j: usize, w: f64| linalg::scale(&(&lambdas[i].matrix - &lambdas[j].matrix), inv(w));
    Ok(if k >= stride && k + stride < n {
        (diff(k + stride, k - stride, 2.0 * h), Stencil::Central)
    } else if k + stride < n {
        (diff(k + stride, k, h), Stencil::Forward)
    } else {
        (diff(k, k - stride, h), Stencil::Backward)
    })
}

/// `𝓛 = (dΛ/dτ) Λ⁻¹`, refused when `cond(Λ) > kappa_max`.
pub fn map_to_propagator(lambda: &Superoperator, derivative: &CMat, kappa_max: f64) -> Result<(Superoperator, f64)> {
    let cond = linalg::condition_number(&lambda.matrix)?;
    if !(cond <= kappa_max) {
        return Err(Error::SingularMap { cond });
    }
    let inv = linalg::inverse(&lambda.matrix);
    Ok((Superoperator { matrix: derivative * &inv, d: lambda.d, tau: lambda.tau }, cond))
}

/// Generator at one grid point together with its provenance.
#[derive(Clone, Debug)]
pub struct GeneratorPoint {
    pub generator: Option<Superoperator>,
    pub stencil: Stencil,
    pub condition: f64,
    pub error: Option<String>,
}

/// Generators at every grid point.
pub fn generators_on_grid(lambdas: &[Superoperator], delta: f64, kappa_max: f64) -> Vec<GeneratorPoint> {
    generators_on_grid_strided(lambdas, delta, 1, kappa_max)
}

pub fn generators_on_grid_strided(lambdas: &[Superoperator], delta: f64, stride: usize, kappa_max: f64) -> Vec<GeneratorPoint> {
    (0..lambdas.len())
        .map(|k| {
            let (der, stencil) = match finite_difference_strided(lambdas, k, delta, stride) {
                Ok(x) => x,
                Err(e) => {
                    return GeneratorPoint { generator: None, stencil: Stencil::Central, condition: f64::NAN, error: Some(e.to_string()) }
                }
            };
            match map_to_propagator(&lambdas[k], &der, kappa_max) {
                Ok((g, cond)) => GeneratorPoint { generator: Some(g), stencil, condition: cond, error: None },
                Err(e) => {
                    let condition = if let Error::SingularMap { cond } = e { cond } else { f64::NAN };
                    GeneratorPoint { generator: None, stencil, condition, error: Some(e.to_string()) }
                }
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumOrder {
    /// Descending modulus, for maps.
    Modulus,
    /// Descending real part, for generators.
    RealPart,
}

/// Eigenvalues with right eigenvectors (columns of `right`) and left
/// eigenvectors (rows of `left`), normalised so that `left · right = I`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<c64>,
    pub right: CMat,
    pub left: CMat,
    /// Condition number of the eigenvector matrix.
    pub condition: f64,
    /// Set when the eigenvector matrix is close to singular.
    pub ill_conditioned: bool,
}

impl Spectrum {
    pub fn right_vector(&self, k: usize) -> Vec<c64> {
        (0..self.right.nrows()).map(|i| self.right[(i, k)]).collect()
    }
}

pub fn spectral_decomposition(s: &Superoperator, order: SpectrumOrder) -> Result<Spectrum> {
    let e = s.matrix.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals: Vec<c64> = e.S().column_vector().iter().cloned().collect();
    let n = vals.len();
    let mut idx: Vec<usize> = (0..n).collect();
    match order {
        SpectrumOrder::Modulus => idx.sort_by(|&a, &b| vals[b].norm().total_cmp(&vals[a].norm())),
        SpectrumOrder::RealPart => idx.sort_by(|&a, &b| vals[b].re.total_cmp(&vals[a].re)),
    }
    let u = e.U();
    let right = Mat::from_fn(n, n, |i, k| u[(i, idx[k])]);
    let condition = linalg::condition_number(&right)?;
    let left = linalg::inverse(&right);
    Ok(Spectrum {
        values: idx.iter().map(|&k| vals[k]).collect(),
        right,
        left,
        condition,
        ill_conditioned: !(condition <= DEFECTIVE_COND),
    })
}

fn state_from_vector(v: &[c64], d: usize) -> Result<CMat> {
    let m = linalg::hermitian_part(&unvectorize(v, d));
    let tr = linalg::trace(&m);
    if tr.norm() < 1e-14 {
        return Err(Error::Multiplicity("eigenvector is traceless".into()));
    }
    Ok(linalg::scale(&m, ONE / tr))
}

fn leading_state(s: &Superoperator, target: c64) -> Result<CMat> {
    let e = s.matrix.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals: Vec<c64> = e.S().column_vector().iter().cloned().collect();
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| (vals[a] - target).norm().total_cmp(&(vals[b] - target).norm()));
    if idx.len() > 1 && (vals[idx[1]] - target).norm() - (vals[idx[0]] - target).norm() < FIXED_POINT_GAP {
        return Err(Error::Multiplicity(format!(
            "eigenvalues {} and {} are both nearest to {target}",
            vals[idx[0]], vals[idx[1]]
        )));
    }
    let u = e.U();
    let v: Vec<c64> = (0..vals.len()).map(|i| u[(i, idx[0])]).collect();
    state_from_vector(&v, s.d)
}

/// Eigenstate of `Λ` at eigenvalue 1, Hermitised and trace-normalised.
pub fn fixed_point_of_map(lambda: &Superoperator) -> Result<CMat> {
    leading_state(lambda, ONE)
}

/// Kernel state of `𝓛`, Hermitised and trace-normalised.
pub fn fixed_point_of_generator(generator: &Superoperator) -> Result<CMat> {
    leading_state(generator, ZERO)
}

pub fn fixed_points(lambda: &Superoperator, generator: &Superoperator) -> Result<(CMat, CMat)> {
    Ok((fixed_point_of_map(lambda)?, fixed_point_of_generator(generator)?))
}

/// The three memory times of a trajectory (in units of the grid).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MemoryTimes {
    /// Earliest τ after which `‖Λ(τ')ρ₀ − ρ∞‖ < ε`.
    pub relaxation: Option<f64>,
    /// Earliest τ after which `‖Λ(τ')ρ∞ − ρ∞‖ < ε`.
    pub map: Option<f64>,
    /// Earliest τ after which `‖𝓛(τ')ρ∞‖ < ε`.
    pub generator: Option<f64>,
}

/// Earliest grid time from which `ok` holds for all later points.
fn settle_time(taus: &[f64], ok: &[bool]) -> Option<f64> {
    let mut t = None;
    for k in (0..ok.len()).rev() {
        if ok[k] {
            t = Some(taus[k]);
        } else {
            break;
        }
    }
    t
}

/// Memory times on the grid in trace norm. `rho_inf` defaults to the map
/// fixed point at the largest τ. Points without a generator count as failing.
pub fn memory_times(
    lambdas: &[Superoperator],
    generators: &[Option<Superoperator>],
    rho0: &CMat,
    rho_inf: Option<&CMat>,
    eps: f64,
) -> Result<MemoryTimes> {
    if lambdas.is_empty() {
        return Err(Error::Domain("empty map series".into()));
    }
    let rho_inf = match rho_inf {
        Some(r) => r.clone(),
        None => fixed_point_of_map(lambdas.last().unwrap())?,
    };
    let taus: Vec<f64> = lambdas.iter().map(|l| l.tau).collect();
    let norm = |m: &CMat| linalg::trace_norm(m);
    let mut re = Vec::with_capacity(lambdas.len());
    let mut mp = Vec::with_capacity(lambdas.len());
    for l in lambdas {
        re.push(norm(&(&l.apply(rho0) - &rho_inf))? < eps);
        mp.push(norm(&(&l.apply(&rho_inf) - &rho_inf))? < eps);
    }
    let mut gn = Vec::with_capacity(generators.len());
    for g in generators {
        gn.push(match g {
            Some(g) => norm(&g.apply(&rho_inf))? < eps,
            None => false,
        });
    }
    Ok(MemoryTimes {
        relaxation: settle_time(&taus, &re),
        map: settle_time(&taus, &mp),
        generator: settle_time(&taus[..gn.len()], &gn),
    })
}

/// `e^{(τ − τ_m)𝓛_m} Λ(τ_m) ρ₀` for `τ ≥ τ_m`, through the eigendecomposition of `𝓛_m`.
#[derive(Clone, Debug)]
pub struct Slippage {
    spectrum: Spectrum,
    coeffs: Vec<c64>,
    tau_m: f64,
    d: usize,
}

impl Slippage {
    pub fn new(generator: &Superoperator, lambda_m: &Superoperator, rho0: &CMat) -> Result<Self> {
        let spectrum = spectral_decomposition(generator, SpectrumOrder::RealPart)?;
        let v = vectorize(&lambda_m.apply(rho0));
        let n = v.len();
        let coeffs = (0..n).map(|k| (0..n).map(|c| spectrum.left[(k, c)] * v[c]).sum()).collect();
        Ok(Self { spectrum, coeffs, tau_m: lambda_m.tau, d: generator.d })
    }

    pub fn state(&self, tau: f64) -> CMat {
        let t = tau - self.tau_m;
        let n = self.coeffs.len();
        let w: Vec<c64> = (0..n).map(|k| self.coeffs[k] * (self.spectrum.values[k] * t).exp()).collect();
        let v: Vec<c64> = (0..n).map(|r| (0..n).map(|k| self.spectrum.right[(r, k)] * w[k]).sum()).collect();
        unvectorize(&v, self.d)
    }

    pub fn ill_conditioned(&self) -> bool {
        self.spectrum.ill_conditioned
    }
}

pub fn slippage_propagate(generator: &Superoperator, lambda_m: &Superoperator, rho0: &CMat, taus: &[f64]) -> Result<Vec<CMat>> {
    let s = Slippage::new(generator, lambda_m, rho0)?;
    Ok(taus.iter().map(|&t| s.state(t)).collect())
}

/// `[ρ₀, Λρ₀, Λ²ρ₀, …, Λⁿρ₀]`.
pub fn preb_compose(lambda: &Superoperator, rho0: &CMat, n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(rho0.clone());
    for k in 0..n {
        let next = lambda.apply(&out[k]);
        out.push(next);
    }
    out
}

/// Residuals of complete positivity and trace preservation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    /// `max |Tr Λ(|i⟩⟨j|) − δᵢⱼ|`.
    pub trace_residual: f64,
    /// Smallest eigenvalue of the Choi matrix (trace `d`).
    pub choi_min_eigenvalue: f64,
    /// `max |C − C†|` of the Choi matrix.
    pub hermiticity_residual: f64,
}

impl CptpReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.trace_residual <= tol && self.choi_min_eigenvalue >= -tol && self.hermiticity_residual <= tol
    }
}

pub fn validate_cptp(s: &Superoperator) -> Result<CptpReport> {
    let d = s.d;
    let mut tr = 0.0f64;
    for c in 0..d * d {
        let t: c64 = (0..d).map(|i| s.matrix[(i + d * i, c)]).sum();
        let target = if c % d == c / d { ONE } else { ZERO };
        tr = tr.max((t - target).norm());
    }
    let choi = s.choi();
    let herm = linalg::max_abs(&(&choi - choi.adjoint()));
    let (ev, _) = linalg::hermitian_eigen(&choi)?;
    Ok(CptpReport { trace_residual: tr, choi_min_eigenvalue: ev[0], hermiticity_residual: herm })
}
