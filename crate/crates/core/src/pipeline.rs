//! End-to-end extraction of dynamical maps on a time grid.
//!
//! A [`Model`] is resolved into chain coefficients and a mode layout
//! ([`Prepared`]); an engine then evolves the anti-correlated state and turns
//! the reduced system-plus-replica state at each grid time into `Λ(τ)`.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::chainmap::{bath_chains, truncation_length, ChainCoefficients, StieltjesOptions};
use crate::edcore::{self, Evolver};
use crate::error::{Error, Result};
use crate::gaussian::{self, CorrelationMatrix, Propagator};
use crate::lattice::{
    assemble_quadratic, build_interacting_hamiltonian, tight_binding, BathAttachment, BathChains, FockBasis,
    InteractionTerms, ModeLayout, ModeRole, Ordering, QuadraticHamiltonian, Side,
};
use crate::linalg::{self, CMat};
use crate::maps::{self, choi_to_map, CptpReport, GeneratorPoint, MemoryTimes, Superoperator};
use crate::spectral::BathSpec;
use crate::state::DensityMatrix;
use crate::transport::{self, LbCurrents};

/// Number of coefficients computed to estimate the chain's group velocity.
pub const PROBE_SITES: usize = 64;
/// Largest mode count handled by the exact-diagonalisation engine.
pub const ED_MAX_MODES: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Gaussian,
    Ed,
}

/// A bath, the side it sits on and its chain length (`None` for automatic).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathModel {
    pub spec: BathSpec,
    pub side: Side,
    pub sites: Option<usize>,
}

/// System of `onsite.len()` modes with nearest-neighbour hopping, optional
/// density-density interactions and its baths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub onsite: Vec<f64>,
    pub hopping: Vec<f64>,
    pub interaction: InteractionTerms,
    pub baths: Vec<BathModel>,
}

impl Model {
    pub fn sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn h_sys(&self) -> CMat {
        tight_binding(&self.onsite, &self.hopping)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.sites();
        if l == 0 || self.hopping.len() + 1 != l {
            return Err(Error::Config(format!("{l} sites need {} hoppings, got {}", l.saturating_sub(1), self.hopping.len())));
        }
        for b in &self.baths {
            b.spec.validate()?;
            if b.spec.coupled_mode >= l {
                return Err(Error::Config(format!("bath couples to missing mode {}", b.spec.coupled_mode)));
            }
        }
        for &(i, j, _) in &self.interaction.density_density {
            if i >= l || j >= l {
                return Err(Error::Config(format!("interaction on missing modes ({i}, {j})")));
            }
        }
        Ok(())
    }
}

/// Uniform time grid `0, δτ, …, τ_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub tau_max: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = (self.tau_max / self.dt).round() as usize;
        (0..=n).map(|k| k as f64 * self.dt).collect()
    }

    /// Index of the grid point nearest to `tau`.
    pub fn nearest(&self, tau: f64) -> usize {
        let n = (self.tau_max / self.dt).round() as usize;
        ((tau / self.dt).round().max(0.0) as usize).min(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    pub safety: f64,
    pub stieltjes: StieltjesOptions,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self { safety: 1.5, stieltjes: StieltjesOptions::default() }
    }
}

/// Everything needed to run an engine.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub model: Model,
    pub layout: ModeLayout,
    pub hamiltonian: QuadraticHamiltonian,
    pub chains: Vec<BathChains>,
}

impl Prepared {
    /// Resolved chain length of every bath.
    pub fn chain_lengths(&self) -> Vec<usize> {
        self.layout.baths.iter().map(|b| b.sites).collect()
    }
}

/// Chain coefficients for a bath, with the length chosen automatically when unset.
pub fn resolve_chains(bath: &BathModel, tau_max: f64, settings: &ChainSettings) -> Result<[ChainCoefficients; 2]> {
    match bath.sites {
        Some(m) => bath_chains(&bath.spec, m, settings.stieltjes),
        None => {
            let probe = bath_chains(&bath.spec, PROBE_SITES, settings.stieltjes)?;
            let m = probe.iter().map(|c| truncation_length(c, tau_max, settings.safety)).max().unwrap().max(1);
            if m <= PROBE_SITES {
                Ok([probe[0].truncated(m), probe[1].truncated(m)])
            } else {
                bath_chains(&bath.spec, m, settings.stieltjes)
            }
        }
    }
}

pub fn prepare(model: &Model, ordering: Ordering, tau_max: f64, settings: &ChainSettings) -> Result<Prepared> {
    model.validate()?;
    let mut chains = Vec::new();
    let mut atts = Vec::new();
    for (id, b) in model.baths.iter().enumerate() {
        let branches = resolve_chains(b, tau_max, settings)?;
        atts.push(BathAttachment { bath: id, sites: branches[0].len(), side: b.side });
        chains.push(BathChains { bath: id, coupled_mode: b.spec.coupled_mode, branches });
    }
    let layout = ModeLayout::new(model.sites(), &atts, ordering)?;
    let hamiltonian = assemble_quadratic(&layout, &model.h_sys(), &chains)?;
    Ok(Prepared { model: model.clone(), layout, hamiltonian, chains })
}

#[cfg(feature = "parallel")]
fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Maps `Λ(τ)` on a grid.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub engine: Engine,
    pub taus: Vec<f64>,
    pub maps: Vec<Superoperator>,
}

fn state_to_map(rho_ac: DensityMatrix, tau: f64) -> Result<Superoperator> {
    let l = rho_ac.roles.len() / 2;
    let separated: Vec<ModeRole> = (0..l).map(ModeRole::System).chain((0..l).map(ModeRole::Replica)).collect();
    let rho = if rho_ac.roles == separated { rho_ac } else { edcore::apply_p2_reordering(&rho_ac)? };
    let rho_l = edcore::apply_p_correction(&rho)?;
    choi_to_map(&rho_l.rho, tau)
}

/// Gaussian engine: correlation-matrix propagation of the anti-correlated state.
pub struct GaussianEngine {
    prop: Propagator,
    c0: CorrelationMatrix,
    sa: Vec<usize>,
    sa_roles: Vec<ModeRole>,
}

impl GaussianEngine {
    pub fn new(p: &Prepared) -> Result<Self> {
        if !p.model.interaction.is_quadratic() {
            return Err(Error::UnsupportedModel("the Gaussian engine needs a quadratic Hamiltonian".into()));
        }
        let prop = Propagator::new(&p.hamiltonian)?;
        let c0 = gaussian::initial_correlation(&p.layout);
        let sa_roles = p.layout.sa_roles();
        let sa = sa_roles.iter().map(|r| p.layout.index_of(*r)).collect::<Result<_>>()?;
        Ok(Self { prop, c0, sa, sa_roles })
    }

    /// Reduced `ρ^AC` on `s₁…s_L a₁…a_L` at `tau`.
    pub fn reduced_state(&self, tau: f64) -> Result<DensityMatrix> {
        let block = self.prop.propagate_block(&self.c0.c, &self.sa, tau);
        gaussian::gaussian_rdm(&CorrelationMatrix { c: block, roles: self.sa_roles.clone() })
    }

    pub fn map(&self, tau: f64) -> Result<Superoperator> {
        state_to_map(self.reduced_state(tau)?, tau)
    }
}

/// Exact-diagonalisation engine in the particle-number sector of the
/// anti-correlated state.
pub struct EdEngine {
    evolver: Evolver,
    basis: FockBasis,
    layout: ModeLayout,
    coef: Vec<c64>,
}

impl EdEngine {
    pub fn new(p: &Prepared) -> Result<Self> {
        let n = p.layout.n_modes();
        if n > ED_MAX_MODES {
            return Err(Error::Capacity(format!("{n} modes exceed the exact-diagonalisation limit of {ED_MAX_MODES}")));
        }
        let basis = FockBasis::sector(n, edcore::ac_particle_number(&p.layout))?;
        let h = build_interacting_hamiltonian(&p.hamiltonian, &p.model.interaction, &basis)?;
        let evolver = Evolver::new(&h)?;
        let psi = edcore::prepare_psi_ac(&p.layout, &basis)?;
        let coef = evolver.coefficients(&psi);
        Ok(Self { evolver, basis, layout: p.layout.clone(), coef })
    }

    /// Reduced `ρ^AC` on the system-replica block, in layout order.
    pub fn reduced_state(&self, tau: f64) -> Result<DensityMatrix> {
        let psi = self.evolver.evolve_coefficients(&self.coef, tau);
        edcore::reduce_sa(&psi, &self.basis, &self.layout)
    }

    pub fn map(&self, tau: f64) -> Result<Superoperator> {
        state_to_map(self.reduced_state(tau)?, tau)
    }
}

pub fn extract(p: &Prepared, engine: Engine, taus: &[f64]) -> Result<Extraction> {
    let maps: Vec<Result<Superoperator>> = match engine {
        Engine::Gaussian => {
            let e = GaussianEngine::new(p)?;
            par_map(taus.len(), |k| e.map(taus[k]))
        }
        Engine::Ed => {
            let e = EdEngine::new(p)?;
            par_map(taus.len(), |k| e.map(taus[k]))
        }
    };
    Ok(Extraction { engine, taus: taus.to_vec(), maps: maps.into_iter().collect::<Result<_>>()? })
}

/// Reduced system states `ρ_S(τ)` obtained by evolving `C_sys ⊕ bath vacuum`
/// directly, with no replicas involved.
pub fn direct_gaussian(p: &Prepared, c_sys: &CMat, taus: &[f64]) -> Result<Vec<DensityMatrix>> {
    if !p.model.interaction.is_quadratic() {
        return Err(Error::UnsupportedModel("the Gaussian engine needs a quadratic Hamiltonian".into()));
    }
    let prop = Propagator::new(&p.hamiltonian)?;
    let c0 = gaussian::product_correlation(&p.layout, c_sys)?;
    let sys = p.layout.system_modes();
    let roles = p.layout.system_roles();
    par_map(taus.len(), |k| {
        let block = prop.propagate_block(&c0.c, &sys, taus[k]);
        gaussian::gaussian_rdm(&CorrelationMatrix { c: block, roles: roles.clone() })
    })
    .into_iter()
    .collect()
}

/// Direct exact evolution of `ρ₀ ⊗ |0⟩⟨0|_A ⊗ Ω` in the full Fock space.
pub fn direct_ed(p: &Prepared, rho0: &CMat, taus: &[f64]) -> Result<Vec<DensityMatrix>> {
    let n = p.layout.n_modes();
    if n > ED_MAX_MODES {
        return Err(Error::Capacity(format!("{n} modes exceed the exact-diagonalisation limit")));
    }
    if p.layout.ordering != Ordering::Separated {
        return Err(Error::Ordering("direct evolution needs the separated ordering".into()));
    }
    let basis = FockBasis::full(n)?;
    let h = build_interacting_hamiltonian(&p.hamiltonian, &p.model.interaction, &basis)?;
    let ev = Evolver::new(&h)?;
    let (w, u) = linalg::hermitian_eigen(rho0)?;
    let d = rho0.nrows();
    let sys: Vec<usize> = p.layout.system_modes();
    let lo = *sys.iter().min().unwrap();
    let range = lo..lo + sys.len();
    let mut comps = Vec::new();
    for k in 0..d {
        if w[k] <= 1e-15 {
            continue;
        }
        let psi: Vec<c64> = (0..d).map(|i| u[(i, k)]).collect();
        let st = edcore::product_state(&p.layout, &basis, &psi)?;
        comps.push((w[k], ev.coefficients(&st)));
    }
    let roles = p.layout.system_roles();
    taus.iter()
        .map(|&t| {
            let mut rho = linalg::zeros(d, d);
            for (wk, coef) in &comps {
                let psi = ev.evolve_coefficients(coef, t);
                rho += linalg::scale(&edcore::partial_trace(&psi, &basis, range.clone())?, c64::new(*wk, 0.0));
            }
            DensityMatrix::new(rho, roles.clone())
        })
        .collect()
}

/// Analysis settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub epsilon: f64,
    pub kappa_max: f64,
    pub cptp_tol: f64,
    /// Finite-difference step in grid points.
    pub derivative_stride: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { epsilon: 1e-3, kappa_max: maps::KAPPA_MAX, cptp_tol: 1e-8, derivative_stride: 1 }
    }
}

/// Per-grid-point diagnostics of an extraction.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub generators: Vec<GeneratorPoint>,
    pub map_spectra: Vec<Vec<c64>>,
    pub generator_spectra: Vec<Option<Vec<c64>>>,
    pub map_fixed_points: Vec<Option<CMat>>,
    pub generator_fixed_points: Vec<Option<CMat>>,
    pub cptp: Vec<CptpReport>,
}

impl Analysis {
    pub fn cptp_ok(&self, tol: f64) -> bool {
        self.cptp.iter().all(|r| r.passes(tol))
    }
}

pub fn analyze(ex: &Extraction, opts: &AnalysisOptions) -> Result<Analysis> {
    let delta = if ex.taus.len() > 1 { ex.taus[1] - ex.taus[0] } else { 1.0 };
    let generators = maps::generators_on_grid_strided(&ex.maps, delta, opts.derivative_stride, opts.kappa_max);
    let n = ex.maps.len();
    let per: Vec<Result<_>> = par_map(n, |k| {
        let lam = &ex.maps[k];
        let ms = maps::spectral_decomposition(lam, maps::SpectrumOrder::Modulus)?.values;
        let gs = match &generators[k].generator {
            Some(g) => Some(maps::spectral_decomposition(g, maps::SpectrumOrder::RealPart)?.values),
            None => None,
        };
        let mf = if k == 0 { None } else { maps::fixed_point_of_map(lam).ok() };
        let gf = generators[k].generator.as_ref().and_then(|g| maps::fixed_point_of_generator(g).ok());
        let cp = maps::validate_cptp(lam)?;
        Ok((ms, gs, mf, gf, cp))
    });
    let mut a = Analysis {
        generators,
        map_spectra: Vec::with_capacity(n),
        generator_spectra: Vec::with_capacity(n),
        map_fixed_points: Vec::with_capacity(n),
        generator_fixed_points: Vec::with_capacity(n),
        cptp: Vec::with_capacity(n),
    };
    for r in per {
        let (ms, gs, mf, gf, cp) = r?;
        a.map_spectra.push(ms);
        a.generator_spectra.push(gs);
        a.map_fixed_points.push(mf);
        a.generator_fixed_points.push(gf);
        a.cptp.push(cp);
    }
    Ok(a)
}

/// Memory times of `ρ₀` with `ρ∞` the map fixed point at the last grid time.
pub fn memory_times(ex: &Extraction, an: &Analysis, rho0: &CMat, eps: f64) -> Result<MemoryTimes> {
    let gens: Vec<Option<Superoperator>> = an.generators.iter().map(|g| g.generator.clone()).collect();
    maps::memory_times(&ex.maps, &gens, rho0, None, eps)
}

/// Landauer–Büttiker reference for a model with exactly one left and one right bath.
pub fn lb_reference(model: &Model, tol: f64) -> Result<LbCurrents> {
    let left = model.baths.iter().find(|b| b.side == Side::Left);
    let right = model.baths.iter().find(|b| b.side == Side::Right);
    match (left, right) {
        (Some(l), Some(r)) if model.interaction.is_quadratic() => transport::lb_currents(&model.h_sys(), &l.spec, &r.spec, tol),
        _ => Err(Error::UnsupportedModel("transport needs one left and one right bath and no interactions".into())),
    }
}
