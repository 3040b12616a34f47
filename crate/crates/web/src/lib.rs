//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; the plain functions are also usable
//! (and tested) natively.

use dynmap::chainmap::{bath_chains, StieltjesOptions};
use dynmap::lattice::{tight_binding, InteractionTerms, Ordering, Side};
use dynmap::pipeline::{self, AnalysisOptions, BathModel, ChainSettings, Engine, Model, TimeGrid};
use dynmap::spectral::{BathSpec, SpectralDensity};
use dynmap::transport::LbProblem;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the map-spectrum demo accepts.
const MAX_GRID_POINTS: usize = 801;

fn density(kind: &str, gamma: f64, nu: f64) -> Result<SpectralDensity, String> {
    match kind {
        "semi-elliptical" => SpectralDensity::semi_elliptical(gamma, 1.0),
        "smoothed-flat" => SpectralDensity::smoothed_flat(gamma, 1.0, nu),
        _ => return Err(format!("unknown spectral density `{kind}`")),
    }
    .map_err(|e| e.to_string())
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct Branch {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Serialize)]
pub struct Chains {
    pub empty: Branch,
    pub filled: Branch,
}

/// Recurrence coefficients of both thermofield branches. `beta = inf` is
/// passed as any non-positive value.
pub fn chains(kind: &str, gamma: f64, beta: f64, mu: f64, nu: f64, n: usize) -> Result<Chains, String> {
    let beta = if beta <= 0.0 { f64::INFINITY } else { beta };
    let spec = BathSpec::new(density(kind, gamma, nu)?, beta, mu, 0).map_err(|e| e.to_string())?;
    let [e, f] = bath_chains(&spec, n, StieltjesOptions::default()).map_err(|e| e.to_string())?;
    Ok(Chains { empty: Branch { gamma: e.gamma, beta: e.beta }, filled: Branch { gamma: f.gamma, beta: f.beta } })
}

#[derive(Serialize)]
pub struct Transport {
    pub omega: Vec<f64>,
    pub transmission: Vec<f64>,
    pub particle_current: f64,
    pub energy_current: f64,
}

/// Tight-binding chain of `sites` modes between two semi-elliptical leads.
pub fn transport(sites: usize, hopping: f64, gamma: f64, beta: f64, bias: f64, points: usize) -> Result<Transport, String> {
    if sites == 0 || points < 2 {
        return Err("need at least one site and two frequency points".into());
    }
    let lead = |mu: f64, mode: usize| BathSpec::new(density("semi-elliptical", gamma, 0.0)?, beta, mu, mode).map_err(|e| e.to_string());
    let prob = LbProblem {
        h_sys: tight_binding(&vec![0.0; sites], &vec![hopping; sites - 1]),
        left: lead(bias / 2.0, 0)?,
        right: lead(-bias / 2.0, sites - 1)?,
        tol: 1e-9,
    };
    let omega: Vec<f64> = (0..points).map(|k| -1.0 + 2.0 * (k as f64 + 0.5) / points as f64).collect();
    let transmission = omega.iter().map(|&w| prob.transmission(w)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let c = prob.currents().map_err(|e| e.to_string())?;
    Ok(Transport { omega, transmission, particle_current: c.particle, energy_current: c.energy })
}

#[derive(Serialize)]
pub struct MapSpectra {
    pub tau: Vec<f64>,
    /// `|Λᵢ(τ)|`, descending, one row per grid point.
    pub map_moduli: Vec<Vec<f64>>,
    /// `Re 𝓛ᵢ(τ)`, descending; empty rows where the map is singular.
    pub generator_rates: Vec<Vec<f64>>,
    /// Occupation of the fixed point of `Λ(τ)` (NaN at τ = 0).
    pub fixed_point_occupation: Vec<f64>,
}

/// A single level at `energy` coupled to one semi-elliptical bath.
pub fn map_spectra(energy: f64, gamma: f64, beta: f64, mu: f64, tau_max: f64, dt: f64) -> Result<MapSpectra, String> {
    let grid = TimeGrid { tau_max, dt };
    if !(dt > 0.0) || !(tau_max >= dt) {
        return Err("the time grid is empty".into());
    }
    let taus = grid.points();
    if taus.len() > MAX_GRID_POINTS {
        return Err(format!("at most {MAX_GRID_POINTS} grid points"));
    }
    let beta = if beta <= 0.0 { f64::INFINITY } else { beta };
    let spec = BathSpec::new(density("semi-elliptical", gamma, 0.0)?, beta, mu, 0).map_err(|e| e.to_string())?;
    let model = Model {
        onsite: vec![energy],
        hopping: vec![],
        interaction: InteractionTerms::default(),
        baths: vec![BathModel { spec, side: Side::Left, sites: None }],
    };
    let run = || -> dynmap::Result<MapSpectra> {
        let p = pipeline::prepare(&model, Ordering::Separated, tau_max, &ChainSettings::default())?;
        let ex = pipeline::extract(&p, Engine::Gaussian, &taus)?;
        let an = pipeline::analyze(&ex, &AnalysisOptions::default())?;
        Ok(MapSpectra {
            map_moduli: an.map_spectra.iter().map(|s| s.iter().map(|v| v.norm()).collect()).collect(),
            generator_rates: an.generator_spectra.iter().map(|s| s.as_ref().map_or(vec![], |v| v.iter().map(|z| z.re).collect())).collect(),
            fixed_point_occupation: an.map_fixed_points.iter().map(|f| f.as_ref().map_or(f64::NAN, |r| r[(1, 1)].re)).collect(),
            tau: taus.clone(),
        })
    };
    run().map_err(|e| e.to_string())
}

fn export(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = chainCoefficients)]
pub fn chain_coefficients_js(kind: &str, gamma: f64, beta: f64, mu: f64, nu: f64, n: usize) -> Result<String, JsError> {
    export(chains(kind, gamma, beta, mu, nu, n).and_then(|c| to_json(&c)))
}

#[wasm_bindgen(js_name = landauer)]
pub fn landauer_js(sites: usize, hopping: f64, gamma: f64, beta: f64, bias: f64, points: usize) -> Result<String, JsError> {
    export(transport(sites, hopping, gamma, beta, bias, points).and_then(|t| to_json(&t)))
}

#[wasm_bindgen(js_name = mapSpectra)]
pub fn map_spectra_js(energy: f64, gamma: f64, beta: f64, mu: f64, tau_max: f64, dt: f64) -> Result<String, JsError> {
    export(map_spectra(energy, gamma, beta, mu, tau_max, dt).and_then(|m| to_json(&m)))
}
