//! System observables and the Landauer–Büttiker steady state of
//! non-interacting chains between two leads.
//!
//! With retarded self-energy `Σ(ω) = PV∫ 𝒥(ω′)/(ω − ω′) dω′ − iπ𝒥(ω)` on the
//! contacted sites and `G = (ω − h_S − Σ)⁻¹`, the transmission is
//! `τ(ω) = 4π² 𝒥_L 𝒥_R |G_{1L}|²` and
//! `⟨J_P⟩ = (1/2π)∫ τ (f_L − f_R)`, `⟨J_E⟩ = (1/2π)∫ ω τ (f_L − f_R)`.

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::fock::hopping_operator;
use crate::lattice::{many_body_operator, FockBasis, OperatorKind};
use crate::linalg::{self, CMat, I};
use crate::quad;
use crate::spectral::{BathSpec, SpectralDensity};

/// Densities `Nᵢ = s†ᵢsᵢ` and bond operators `Jᵢ = i(s†ᵢ sᵢ₊₁ − s†ᵢ₊₁ sᵢ)` on
/// the `2^L`-dimensional system space. The particle current across bond `i`
/// is `tᵢ ⟨Jᵢ⟩` for hopping `tᵢ`.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    pub densities: Vec<CMat>,
    pub currents: Vec<CMat>,
}

pub fn observables(l: usize) -> Result<ObservableSet> {
    let basis = FockBasis::full(l)?;
    let densities = (0..l).map(|i| many_body_operator(&basis, OperatorKind::Number, i)).collect::<Result<_>>()?;
    let currents = (0..l.saturating_sub(1))
        .map(|i| {
            let fwd = hopping_operator(&basis, i, i + 1);
            let bwd = hopping_operator(&basis, i + 1, i);
            linalg::scale(&(&fwd - &bwd), I)
        })
        .collect();
    Ok(ObservableSet { densities, currents })
}

/// `PV ∫ 𝒥(ω′)/(ω − ω′) dω′` over the band, by singularity subtraction.
pub fn principal_value(density: &SpectralDensity, omega: f64, tol: f64) -> Result<f64> {
    let d = density.half_bandwidth;
    if !(omega.abs() < d) {
        return Err(Error::Domain(format!("ω = {omega} must lie inside the open band")));
    }
    let j0 = density.value(omega);
    let f = |w: f64| {
        let dw = omega - w;
        if dw == 0.0 {
            0.0
        } else {
            (density.value(w) - j0) / dw
        }
    };
    let mut br = density.breakpoints();
    br.push(omega);
    let body = quad::integrate_cosine(&f, -d, d, &br, tol);
    Ok(body + j0 * ((d + omega) / (d - omega)).ln())
}

/// Retarded self-energy of a lead at ω.
pub fn self_energy(density: &SpectralDensity, omega: f64, tol: f64) -> Result<c64> {
    Ok(c64::new(principal_value(density, omega, tol)?, -PI * density.value(omega)))
}

/// Two-terminal set-up: leads attached to system modes `left.coupled_mode`
/// and `right.coupled_mode`.
#[derive(Clone, Debug)]
pub struct LbProblem {
    pub h_sys: CMat,
    pub left: BathSpec,
    pub right: BathSpec,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbCurrents {
    pub particle: f64,
    pub energy: f64,
}

impl LbProblem {
    fn band(&self) -> (f64, f64) {
        let d = self.left.density.half_bandwidth.min(self.right.density.half_bandwidth);
        (-d, d)
    }

    /// Retarded Green's function at ω.
    pub fn green(&self, omega: f64) -> Result<CMat> {
        let l = self.h_sys.nrows();
        let (ql, qr) = (self.left.coupled_mode, self.right.coupled_mode);
        if ql >= l || qr >= l {
            return Err(Error::Config("lead attached to a missing system mode".into()));
        }
        let sl = self_energy(&self.left.density, omega, self.tol)?;
        let sr = self_energy(&self.right.density, omega, self.tol)?;
        let mut a = Mat::<c64>::from_fn(l, l, |i, j| -self.h_sys[(i, j)]);
        for i in 0..l {
            a[(i, i)] += c64::new(omega, 0.0);
        }
        a[(ql, ql)] -= sl;
        a[(qr, qr)] -= sr;
        Ok(linalg::inverse(&a))
    }

    pub fn transmission(&self, omega: f64) -> Result<f64> {
        let (a, b) = self.band();
        if !(omega > a && omega < b) {
            return Ok(0.0);
        }
        let g = self.green(omega)?;
        let jl = self.left.density.value(omega);
        let jr = self.right.density.value(omega);
        Ok(4.0 * PI * PI * jl * jr * g[(self.left.coupled_mode, self.right.coupled_mode)].norm_sqr())
    }

    /// Steady-state particle and energy currents from left to right.
    pub fn currents(&self) -> Result<LbCurrents> {
        let (a, b) = self.band();
        let mut br = vec![self.left.mu, self.right.mu, 0.0];
        br.extend(self.left.density.breakpoints());
        br.extend(self.right.density.breakpoints());
        let err = std::cell::RefCell::new(None);
        let window = |w: f64| self.left.fermi(w) - self.right.fermi(w);
        let t = |w: f64| match self.transmission(w) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let particle = quad::integrate_cosine(&|w| t(w) * window(w), a, b, &br, self.tol) / (2.0 * PI);
        let energy = quad::integrate_cosine(&|w| w * t(w) * window(w), a, b, &br, self.tol) / (2.0 * PI);
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(LbCurrents { particle, energy })
    }
}

/// Landauer–Büttiker currents for `h_sys` between two leads.
pub fn lb_currents(h_sys: &CMat, left: &BathSpec, right: &BathSpec, tol: f64) -> Result<LbCurrents> {
    LbProblem { h_sys: h_sys.clone(), left: left.clone(), right: right.clone(), tol }.currents()
}
