//! Bath spectral densities, Fermi factors and the thermofield split.
//!
//! A bath is described by `𝒥(ω)` on `[-D, D]` together with its inverse
//! temperature `β` and chemical potential `μ`. The thermofield construction
//! splits it into an empty branch `𝒥₀ = (1 − f)𝒥` and a filled branch
//! `𝒥₁ = f𝒥`, with `f(ω) = 1/(1 + e^{β(ω − μ)})`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Shape of a spectral density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityShape {
    /// `𝒥 = 2Γ/π² √(1 − (ω/D)²)`.
    SemiElliptical,
    /// `𝒥 = Γ / (2π (1 + e^{ν(ω−D)}) (1 + e^{−ν(ω+D)}))`.
    SmoothedFlat { nu: f64 },
    /// Piecewise-linear interpolation of `(ω, 𝒥)` samples covering `[-D, D]`.
    Tabulated { samples: Vec<(f64, f64)> },
}

/// A spectral density `𝒥(ω)`, supported on `[-D, D]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub shape: DensityShape,
    /// Coupling strength Γ. For tabulated data this is derived from the samples.
    pub gamma: f64,
    pub half_bandwidth: f64,
}

impl SpectralDensity {
    pub fn semi_elliptical(gamma: f64, half_bandwidth: f64) -> Result<Self> {
        Self::checked(DensityShape::SemiElliptical, gamma, half_bandwidth)
    }

    pub fn smoothed_flat(gamma: f64, half_bandwidth: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("edge sharpness must be positive, got {nu}")));
        }
        Self::checked(DensityShape::SmoothedFlat { nu }, gamma, half_bandwidth)
    }

    /// Tabulated density. Γ is set to `(1/2D) ∫ 2π𝒥`.
    pub fn tabulated(half_bandwidth: f64, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("need at least two samples".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("sample frequencies must be strictly increasing".into()));
        }
        if samples.iter().any(|s| !(s.1 >= 0.0) || !s.0.is_finite()) {
            return Err(Error::Domain("samples must be finite and non-negative".into()));
        }
        let d = half_bandwidth;
        let tol = 1e-12 * d;
        if samples[0].0 > -d + tol || samples[samples.len() - 1].0 < d - tol {
            return Err(Error::Domain("samples must cover [-D, D]".into()));
        }
        let mut sd = Self::checked(DensityShape::Tabulated { samples }, 0.0, half_bandwidth)?;
        sd.gamma = sd.total_coupling();
        Ok(sd)
    }

    fn checked(shape: DensityShape, gamma: f64, half_bandwidth: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("Γ must be non-negative, got {gamma}")));
        }
        if !(half_bandwidth > 0.0 && half_bandwidth.is_finite()) {
            return Err(Error::Domain(format!("D must be positive, got {half_bandwidth}")));
        }
        Ok(Self { shape, gamma, half_bandwidth })
    }

    /// `𝒥(ω)`; errors outside `[-D, D]`.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        let d = self.half_bandwidth;
        if !(omega.abs() <= d) {
            return Err(Error::Domain(format!("ω = {omega} outside [-{d}, {d}]")));
        }
        Ok(self.value(omega))
    }

    /// `𝒥(ω)`, zero outside the band.
    pub fn value(&self, omega: f64) -> f64 {
        let d = self.half_bandwidth;
        if !(omega.abs() <= d) {
            return 0.0;
        }
        match &self.shape {
            DensityShape::SemiElliptical => {
                let x = omega / d;
                2.0 * self.gamma / (PI * PI) * (1.0 - x * x).max(0.0).sqrt()
            }
            DensityShape::SmoothedFlat { nu } => {
                let a = 1.0 + (nu * (omega - d)).exp();
                let b = 1.0 + (-nu * (omega + d)).exp();
                self.gamma / (2.0 * PI * a * b)
            }
            DensityShape::Tabulated { samples } => interpolate(samples, omega),
        }
    }

    /// `(1/2D) ∫ 2π𝒥(ω) dω`. Equals Γ for the semi-elliptical shape; the
    /// smoothed-flat shape loses `Γ ln 2/(νD)` to its soft edges.
    pub fn total_coupling(&self) -> f64 {
        let d = self.half_bandwidth;
        let f = |w: f64| 2.0 * PI * self.value(w);
        let integral = match &self.shape {
            DensityShape::Tabulated { samples } => {
                let br: Vec<f64> = samples.iter().map(|s| s.0).collect();
                quad::integrate(&f, -d, d, &br, 1e-14)
            }
            DensityShape::SmoothedFlat { nu } => {
                let w = 8.0 / nu;
                quad::integrate(&f, -d, d, &[-d + w, 0.0, d - w], 1e-14)
            }
            DensityShape::SemiElliptical => quad::integrate_cosine(&f, -d, d, &[], 1e-15),
        };
        integral / (2.0 * d)
    }

    /// Breakpoints worth splitting quadrature panels at.
    pub fn breakpoints(&self) -> Vec<f64> {
        let d = self.half_bandwidth;
        match &self.shape {
            DensityShape::SemiElliptical => vec![],
            DensityShape::SmoothedFlat { nu } => {
                let w = (8.0 / nu).min(0.5 * d);
                vec![-d + w, d - w]
            }
            DensityShape::Tabulated { samples } => samples.iter().map(|s| s.0).collect(),
        }
    }
}

fn interpolate(samples: &[(f64, f64)], x: f64) -> f64 {
    let k = samples.partition_point(|s| s.0 <= x);
    if k == 0 {
        return samples[0].1;
    }
    if k == samples.len() {
        return samples[k - 1].1;
    }
    let (x0, y0) = samples[k - 1];
    let (x1, y1) = samples[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Fermi–Dirac occupation `1/(1 + e^{β(ω − μ)})`, evaluated without overflow.
/// `β = ∞` gives a step with `f(μ) = ½`.
pub fn fermi_factor(beta: f64, mu: f64, omega: f64) -> f64 {
    let dx = omega - mu;
    if dx == 0.0 {
        return 0.5;
    }
    if beta.is_infinite() {
        return if dx > 0.0 { 0.0 } else { 1.0 };
    }
    let x = beta * dx;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// A thermal bath attached to one system mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub density: SpectralDensity,
    /// Inverse temperature; `f64::INFINITY` for zero temperature.
    pub beta: f64,
    pub mu: f64,
    pub coupled_mode: usize,
}

impl BathSpec {
    pub fn new(density: SpectralDensity, beta: f64, mu: f64, coupled_mode: usize) -> Result<Self> {
        let b = Self { density, beta, mu, coupled_mode };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(Error::Domain(format!("β must be non-negative, got {}", self.beta)));
        }
        let d = self.density.half_bandwidth;
        if !(self.mu.abs() <= d) {
            return Err(Error::Domain(format!("|μ| = {} exceeds D = {d}", self.mu.abs())));
        }
        Ok(())
    }

    pub fn fermi(&self, omega: f64) -> f64 {
        fermi_factor(self.beta, self.mu, omega)
    }
}

/// Thermofield branch: 0 starts empty, 1 starts filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    Empty,
    Filled,
}

impl Branch {
    pub fn index(self) -> usize {
        match self {
            Branch::Empty => 0,
            Branch::Filled => 1,
        }
    }
}

/// A non-negative weight function on a finite support.
pub trait Weight: Sync {
    fn weight(&self, omega: f64) -> f64;
    /// `(a, b)` bounding the support.
    fn support(&self) -> (f64, f64);
    /// Points where the weight is non-smooth or changes rapidly.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Weight for SpectralDensity {
    fn weight(&self, omega: f64) -> f64 {
        self.value(omega)
    }
    fn support(&self) -> (f64, f64) {
        (-self.half_bandwidth, self.half_bandwidth)
    }
    fn breakpoints(&self) -> Vec<f64> {
        SpectralDensity::breakpoints(self)
    }
}

/// One thermofield branch of a bath, `(1 − f)𝒥` or `f𝒥`.
#[derive(Clone, Debug)]
pub struct BranchWeight {
    pub bath: BathSpec,
    pub branch: Branch,
}

impl Weight for BranchWeight {
    fn weight(&self, omega: f64) -> f64 {
        let f = self.bath.fermi(omega);
        let occ = match self.branch {
            Branch::Empty => 1.0 - f,
            Branch::Filled => f,
        };
        occ * self.bath.density.value(omega)
    }

    fn support(&self) -> (f64, f64) {
        let d = self.bath.density.half_bandwidth;
        if self.bath.beta.is_infinite() {
            match self.branch {
                Branch::Empty => (self.bath.mu, d),
                Branch::Filled => (-d, self.bath.mu),
            }
        } else {
            (-d, d)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.bath.density.breakpoints();
        b.push(self.bath.mu);
        b.push(0.0);
        if self.bath.beta.is_finite() && self.bath.beta > 0.0 {
            let w = 8.0 / self.bath.beta;
            b.push(self.bath.mu - w);
            b.push(self.bath.mu + w);
        }
        b
    }
}

/// Split a bath into its empty and filled thermofield branches.
pub fn thermofield_split(bath: &BathSpec) -> Result<(BranchWeight, BranchWeight)> {
    bath.validate()?;
    Ok((
        BranchWeight { bath: bath.clone(), branch: Branch::Empty },
        BranchWeight { bath: bath.clone(), branch: Branch::Filled },
    ))
}

/// Kondo temperature `√(2U𝒥₀) exp(−U/(8𝒥₀))` of the symmetric Anderson model.
pub fn kondo_temperature(u: f64, j0: f64) -> Result<f64> {
    if !(u > 0.0 && j0 > 0.0) {
        return Err(Error::Domain(format!("need U > 0 and 𝒥₀ > 0, got U = {u}, 𝒥₀ = {j0}")));
    }
    Ok((2.0 * u * j0).sqrt() * (-u / (8.0 * j0)).exp())
}
