use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dynmap::gaussian::{gaussian_rdm, CorrelationMatrix};
use dynmap::lattice::{ModeRole, Ordering};
use dynmap::linalg::{self, CMat};
use dynmap::maps::{self, preb_compose, slippage_propagate, Superoperator};
use dynmap::pipeline::{self, Engine, Prepared, TimeGrid};
use dynmap::transport::{observables, LbProblem, ObservableSet};
use dynmap::{c64, random};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use crate::bundle::{self, Bundle, Check, GridIssue, Manifest, MapKind};
use crate::config::RunConfig;

const LB_TOL: f64 = 1e-10;
const TRANSMISSION_POINTS: usize = 2001;
/// Direct exact evolution works in the full Fock space; above this it is skipped.
const DIRECT_ED_MAX_MODES: usize = 12;

fn branch_name(b: usize) -> &'static str {
    ["empty", "filled"][b]
}

pub fn chain_coeffs(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let model = cfg.model()?;
    let settings = cfg.chain_settings();
    let bundle = Bundle::create(out)?;
    let mut manifest = Manifest::new("chain-coeffs", cfg);
    for (k, bath) in model.baths.iter().enumerate() {
        let chains = pipeline::resolve_chains(bath, cfg.time.tau_max, &settings).with_context(|| format!("baths[{k}]"))?;
        for (b, c) in chains.iter().enumerate() {
            let rows: Vec<Vec<f64>> = (0..c.len()).map(|n| vec![n as f64, c.gamma[n], c.beta[n]]).collect();
            let header = ["n", "gamma", "beta"].map(String::from);
            bundle.write_series(&mut manifest, &format!("chain_bath{k}_{}", branch_name(b)), &header, &rows)?;
            manifest.chain_lengths.push(c.len());
        }
    }
    bundle.write_manifest(&manifest)?;
    Ok(manifest)
}

/// System state `ρ₀` and, when it is Gaussian, its correlation matrix.
pub fn initial_state(cfg: &RunConfig) -> Result<(CMat, CMat)> {
    let l = cfg.sites();
    let occ = cfg.initial_occupations()?.unwrap_or(vec![0.5; l]);
    let d = 1usize << l;
    let mut rho = linalg::zeros(d, d);
    for idx in 0..d {
        let w: f64 = (0..l).map(|i| if idx >> (l - 1 - i) & 1 == 1 { occ[i] } else { 1.0 - occ[i] }).product();
        rho[(idx, idx)] = c64::new(w, 0.0);
    }
    let c = faer::Mat::from_fn(l, l, |i, j| if i == j { c64::new(occ[i], 0.0) } else { c64::new(0.0, 0.0) });
    Ok((rho, c))
}

struct Observer {
    obs: ObservableSet,
    bond: Option<(usize, f64)>,
}

impl Observer {
    fn new(cfg: &RunConfig, hopping: &[f64]) -> Result<Self> {
        let obs = observables(cfg.sites())?;
        Ok(Self { obs, bond: cfg.current_bond().map(|b| (b, hopping[b])) })
    }

    fn header(&self, prefix: &str) -> Vec<String> {
        let mut h: Vec<String> = (0..self.obs.densities.len()).map(|i| format!("{prefix}density_{i}")).collect();
        if let Some((b, _)) = self.bond {
            h.push(format!("{prefix}current_{b}"));
        }
        h
    }

    /// Densities and the particle current `t_b ⟨J_b⟩`.
    fn values(&self, rho: Option<&CMat>) -> Vec<f64> {
        let n = self.obs.densities.len() + self.bond.is_some() as usize;
        let Some(rho) = rho else { return vec![f64::NAN; n] };
        let ev = |op: &CMat| linalg::trace(&(rho * op)).re;
        let mut v: Vec<f64> = self.obs.densities.iter().map(ev).collect();
        if let Some((b, t)) = self.bond {
            v.push(t * ev(&self.obs.currents[b]));
        }
        v
    }
}

pub struct Trajectories {
    pub slippage: Vec<(f64, CMat)>,
    /// `Λ(τ_m)ⁿ Λ(τ − nτ_m) ρ₀` on the grid up to `tau_end`.
    pub preb: Vec<(f64, CMat)>,
    /// `Λ(τ_m)ⁿ ρ₀` for `n = 1 ..= repetitions + 1`.
    pub stroboscopic: Vec<(f64, CMat)>,
}

/// Slippage from `𝓛(τ_g)`, `Λ(τ_g)` and refreshed-bath cycles of `Λ(τ_m)`.
fn predict_from(
    grid: &TimeGrid,
    cfg: &RunConfig,
    rho0: &CMat,
    lookup: &dyn Fn(usize, MapKind) -> Result<Option<Superoperator>>,
    manifest: &mut Manifest,
) -> Result<Trajectories> {
    let (tg, tm, tend) = cfg.predict_times();
    let taus = grid.points();
    let kg = grid.nearest(tg);
    let km = grid.nearest(tm);
    for (name, want, k) in [("tau_generator", tg, kg), ("tau_map", tm, km)] {
        if (taus[k] - want).abs() > 1e-9 {
            manifest.warn(format!("predict.{name} = {want} is not on the grid; using the nearest point {}", taus[k]));
        }
    }
    if km == 0 {
        bail!("predict.tau_map: the refresh time must be positive on the grid");
    }
    let lg = lookup(kg, MapKind::Map)?.ok_or_else(|| anyhow!("no map at τ = {}", taus[kg]))?;
    let gen = lookup(kg, MapKind::Generator)?
        .ok_or_else(|| anyhow!("the generator at τ = {} is unavailable (singular map)", taus[kg]))?;
    let n_slip = ((tend - taus[kg]) / grid.dt + 1e-9).floor().max(0.0) as usize;
    let slip_t: Vec<f64> = (0..=n_slip).map(|j| taus[kg] + j as f64 * grid.dt).collect();
    let slip = slippage_propagate(&gen, &lg, rho0, &slip_t)?;
    let lm = lookup(km, MapKind::Map)?.ok_or_else(|| anyhow!("no map at τ = {}", taus[km]))?;
    let reps = cfg.predict.repetitions.unwrap_or(((tend / taus[km] + 1e-9).floor() as usize).saturating_sub(1));
    let strobe = preb_compose(&lm, rho0, reps + 1);
    let n_end = ((tend / grid.dt) + 1e-9).floor() as usize;
    let mut preb = Vec::with_capacity(n_end + 1);
    for k in 0..=n_end {
        let (n, r) = (k / km, k % km);
        let short = lookup(r, MapKind::Map)?.ok_or_else(|| anyhow!("no map at τ = {}", taus[r]))?;
        let mut rho = short.apply(rho0);
        for _ in 0..n {
            rho = lm.apply(&rho);
        }
        preb.push((k as f64 * grid.dt, rho));
    }
    Ok(Trajectories {
        slippage: slip_t.into_iter().zip(slip).collect(),
        preb,
        stroboscopic: strobe.into_iter().enumerate().skip(1).map(|(j, r)| (j as f64 * taus[km], r)).collect(),
    })
}

fn write_trajectory(
    bundle: &Bundle,
    manifest: &mut Manifest,
    name: &str,
    observer: &Observer,
    traj: &[(f64, CMat)],
    direct: Option<(&TimeGrid, &[CMat])>,
) -> Result<()> {
    let mut header = vec!["tau".to_string()];
    header.extend(observer.header(""));
    header.push("trace_distance_to_direct".into());
    let mut rows = Vec::new();
    for (t, rho) in traj {
        let mut r = vec![*t];
        r.extend(observer.values(Some(rho)));
        let dist = direct.and_then(|(g, states)| {
            let k = g.nearest(*t);
            ((g.points()[k] - t).abs() < 1e-9 && k < states.len()).then(|| linalg::trace_distance(rho, &states[k]).unwrap_or(f64::NAN))
        });
        r.push(dist.unwrap_or(f64::NAN));
        rows.push(r);
    }
    bundle.write_series(manifest, name, &header, &rows)
}

fn direct_states(p: &Prepared, cfg: &RunConfig, rho0: &CMat, c0: &CMat, taus: &[f64], manifest: &mut Manifest) -> Result<Option<Vec<CMat>>> {
    let states = match cfg.engine {
        Engine::Gaussian => pipeline::direct_gaussian(p, c0, taus)?,
        Engine::Ed => {
            if p.layout.ordering != Ordering::Separated || p.layout.n_modes() > DIRECT_ED_MAX_MODES {
                manifest.warn(format!(
                    "direct exact evolution skipped (needs the separated ordering and at most {DIRECT_ED_MAX_MODES} modes)"
                ));
                return Ok(None);
            }
            pipeline::direct_ed(p, rho0, taus)?
        }
    };
    Ok(Some(states.into_iter().map(|s| s.rho).collect()))
}

#[derive(Serialize)]
struct LbSummary {
    particle_current: f64,
    energy_current: f64,
    bond: usize,
    map_fixed_point_current: Option<f64>,
    generator_fixed_point_current: Option<f64>,
}

pub fn extract(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let model = cfg.model()?;
    let grid = cfg.grid();
    let taus = grid.points();
    let p = pipeline::prepare(&model, cfg.system.ordering, grid.tau_max, &cfg.chain_settings())?;
    cfg.check_capacity(p.layout.n_modes())?;
    let bundle = Bundle::create(out)?;
    let mut manifest = Manifest::new("extract", cfg);
    manifest.chain_lengths = p.chain_lengths();
    manifest.n_modes = p.layout.n_modes();
    manifest.taus = taus.clone();

    let ex = pipeline::extract(&p, cfg.engine, &taus)?;
    let an = pipeline::analyze(&ex, &cfg.analysis_options())?;
    let d2 = ex.maps[0].matrix.nrows();

    if cfg.analysis.write_maps {
        for (k, lam) in ex.maps.iter().enumerate() {
            bundle.write_map(&mut manifest, k, lam, MapKind::Map)?;
            if let Some(g) = &an.generators[k].generator {
                bundle.write_map(&mut manifest, k, g, MapKind::Generator)?;
            }
        }
    }
    for (k, g) in an.generators.iter().enumerate() {
        if let Some(e) = &g.error {
            manifest.singular_points.push(GridIssue { index: k, tau: taus[k], message: e.clone() });
        }
    }

    let mut header = vec!["tau".to_string()];
    header.extend((0..d2).map(|i| format!("abs_{i}")));
    let rows: Vec<Vec<f64>> = taus
        .iter()
        .zip(&an.map_spectra)
        .map(|(t, s)| std::iter::once(*t).chain(s.iter().map(|v| v.norm())).collect())
        .collect();
    bundle.write_series(&mut manifest, "spectrum_map", &header, &rows)?;

    let mut header = vec!["tau".to_string()];
    for i in 0..d2 {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    let rows: Vec<Vec<f64>> = taus
        .iter()
        .zip(&an.generator_spectra)
        .map(|(t, s)| {
            let mut r = vec![*t];
            match s {
                Some(vals) => vals.iter().for_each(|v| r.extend([v.re, v.im])),
                None => r.extend(vec![f64::NAN; 2 * d2]),
            }
            r
        })
        .collect();
    bundle.write_series(&mut manifest, "spectrum_generator", &header, &rows)?;

    let observer = Observer::new(cfg, &model.hopping)?;
    let mut header = vec!["tau".to_string()];
    header.extend(observer.header("map_"));
    header.extend(observer.header("generator_"));
    let rows: Vec<Vec<f64>> = (0..taus.len())
        .map(|k| {
            let mut r = vec![taus[k]];
            r.extend(observer.values(an.map_fixed_points[k].as_ref()));
            r.extend(observer.values(an.generator_fixed_points[k].as_ref()));
            r
        })
        .collect();
    bundle.write_series(&mut manifest, "fixed_points", &header, &rows)?;

    let header = ["tau", "trace_residual", "choi_min_eigenvalue", "hermiticity_residual", "condition"].map(String::from);
    let rows: Vec<Vec<f64>> = (0..taus.len())
        .map(|k| {
            let c = &an.cptp[k];
            vec![taus[k], c.trace_residual, c.choi_min_eigenvalue, c.hermiticity_residual, an.generators[k].condition]
        })
        .collect();
    bundle.write_series(&mut manifest, "cptp", &header, &rows)?;

    let tol = cfg.analysis.cptp_tol;
    let tr = an.cptp.iter().map(|c| c.trace_residual).fold(0.0, f64::max);
    let ev = an.cptp.iter().map(|c| c.choi_min_eigenvalue).fold(f64::INFINITY, f64::min);
    manifest.checks.push(Check { name: "trace_preservation".into(), passed: tr < tol, value: tr, tolerance: tol });
    manifest.checks.push(Check { name: "complete_positivity".into(), passed: ev > -tol, value: ev, tolerance: tol });

    let (rho0, c0) = initial_state(cfg)?;
    if cfg.analysis.memory_times {
        manifest.record("memory_times", pipeline::memory_times(&ex, &an, &rho0, cfg.analysis.epsilon)?);
    }

    if cfg.engine == Engine::Gaussian {
        match (pipeline::lb_reference(&model, LB_TOL), cfg.current_bond()) {
            (Ok(lb), Some(b)) => {
                let last = taus.len() - 1;
                let current = |fp: &Option<CMat>| fp.as_ref().map(|r| observer.values(Some(r))[observer.obs.densities.len()]);
                manifest.record(
                    "landauer",
                    LbSummary {
                        particle_current: lb.particle,
                        energy_current: lb.energy,
                        bond: b,
                        map_fixed_point_current: current(&an.map_fixed_points[last]),
                        generator_fixed_point_current: current(&an.generator_fixed_points[last]),
                    },
                );
            }
            (Err(e), _) => manifest.warn(format!("no Landauer comparison: {e}")),
            _ => {}
        }
    }

    reconstruction_checks(&p, cfg, &ex.maps, &taus, &mut manifest)?;

    let direct = direct_states(&p, cfg, &rho0, &c0, &taus, &mut manifest)?;
    if let Some(states) = &direct {
        let traj: Vec<(f64, CMat)> = taus.iter().copied().zip(states.iter().cloned()).collect();
        write_trajectory(&bundle, &mut manifest, "trajectory_direct", &observer, &traj, None)?;
    }
    let lookup = |k: usize, kind: MapKind| -> Result<Option<Superoperator>> {
        Ok(match kind {
            MapKind::Map => Some(ex.maps[k].clone()),
            MapKind::Generator => an.generators[k].generator.clone(),
        })
    };
    match predict_from(&grid, cfg, &rho0, &lookup, &mut manifest) {
        Ok(traj) => {
            let dref = direct.as_deref().map(|s| (&grid, s));
            write_trajectory(&bundle, &mut manifest, "trajectory_slippage", &observer, &traj.slippage, dref)?;
            write_trajectory(&bundle, &mut manifest, "trajectory_preb", &observer, &traj.preb, dref)?;
            write_trajectory(&bundle, &mut manifest, "trajectory_preb_stroboscopic", &observer, &traj.stroboscopic, dref)?;
        }
        Err(e) => manifest.warn(format!("no predicted trajectories: {e:#}")),
    }

    bundle.write_manifest(&manifest)?;
    Ok(manifest)
}

fn reconstruction_checks(p: &Prepared, cfg: &RunConfig, lambdas: &[Superoperator], taus: &[f64], manifest: &mut Manifest) -> Result<()> {
    let n = cfg.analysis.reconstruction_checks;
    if n == 0 {
        return Ok(());
    }
    let l = cfg.sites();
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (rho0, direct) = match cfg.engine {
            Engine::Gaussian => {
                let c = random::random_gaussian_correlation(l, &mut rng);
                let roles: Vec<ModeRole> = (0..l).map(ModeRole::System).collect();
                let rho0 = gaussian_rdm(&CorrelationMatrix { c: c.clone(), roles })?.rho;
                (rho0, pipeline::direct_gaussian(p, &c, taus)?)
            }
            Engine::Ed => {
                if p.layout.ordering != Ordering::Separated || p.layout.n_modes() > DIRECT_ED_MAX_MODES {
                    manifest.warn("reconstruction checks skipped for this exact-diagonalisation layout".into());
                    return Ok(());
                }
                let rho0 = random::parity_project(&random::random_density_matrix(1 << l, &mut rng));
                let direct = pipeline::direct_ed(p, &rho0, taus)?;
                (rho0, direct)
            }
        };
        for (lam, d) in lambdas.iter().zip(&direct) {
            worst = worst.max(linalg::trace_distance(&lam.apply(&rho0), &d.rho)?);
        }
    }
    let tol = cfg.analysis.reconstruction_tol;
    manifest.checks.push(Check { name: "reconstruction".into(), passed: worst <= tol, value: worst, tolerance: tol });
    Ok(())
}

pub fn predict(cfg: &RunConfig, bundle_dir: &Path, out: &Path) -> Result<Manifest> {
    let source = bundle::load_manifest(bundle_dir)?;
    let grid = source.config.as_ref().ok_or_else(|| anyhow!("bundle manifest has no config"))?.grid();
    if source.maps.is_empty() {
        bail!("bundle {} holds no maps (was it written with analysis.write_maps = false?)", bundle_dir.display());
    }
    let mut manifest = Manifest::new("predict", cfg);
    manifest.taus = source.taus.clone();
    let lookup = |k: usize, kind: MapKind| -> Result<Option<Superoperator>> {
        match source.maps.iter().find(|e| e.index == k && e.kind == kind) {
            Some(e) => Ok(Some(bundle::load_map(bundle_dir, e)?)),
            None => Ok(None),
        }
    };
    let (rho0, _) = initial_state(cfg)?;
    let d = rho0.nrows();
    if let Some(e) = source.maps.first() {
        let s = bundle::load_map(bundle_dir, e)?;
        if s.d != d {
            bail!("initial state has dimension {d}, the bundle maps act on dimension {}", s.d);
        }
    }
    let traj = predict_from(&grid, cfg, &rho0, &lookup, &mut manifest)?;
    let hopping = cfg.model()?.hopping;
    let observer = Observer::new(cfg, &hopping)?;
    let bundle = Bundle::create(out)?;
    write_trajectory(&bundle, &mut manifest, "trajectory_slippage", &observer, &traj.slippage, None)?;
    write_trajectory(&bundle, &mut manifest, "trajectory_preb", &observer, &traj.preb, None)?;
    write_trajectory(&bundle, &mut manifest, "trajectory_preb_stroboscopic", &observer, &traj.stroboscopic, None)?;
    bundle.write_manifest(&manifest)?;
    Ok(manifest)
}

pub fn lb(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let model = cfg.model()?;
    let lb = pipeline::lb_reference(&model, LB_TOL)?;
    let left = model.baths.iter().find(|b| b.side == dynmap::lattice::Side::Left).unwrap();
    let right = model.baths.iter().find(|b| b.side == dynmap::lattice::Side::Right).unwrap();
    let prob = LbProblem { h_sys: model.h_sys(), left: left.spec.clone(), right: right.spec.clone(), tol: LB_TOL };
    let dl = left.spec.density.half_bandwidth.min(right.spec.density.half_bandwidth);
    let bundle = Bundle::create(out)?;
    let mut manifest = Manifest::new("lb", cfg);
    let mut rows = Vec::with_capacity(TRANSMISSION_POINTS);
    for k in 0..TRANSMISSION_POINTS {
        // Open interval: the lead self-energies are singular at the band edges.
        let w = -dl + 2.0 * dl * (k as f64 + 0.5) / TRANSMISSION_POINTS as f64;
        rows.push(vec![w, prob.transmission(w)?]);
    }
    bundle.write_series(&mut manifest, "transmission", &["omega".into(), "transmission".into()], &rows)?;
    manifest.record("particle_current", lb.particle);
    manifest.record("energy_current", lb.energy);
    bundle.write_manifest(&manifest)?;
    Ok(manifest)
}

/// Re-checks every stored map of a bundle.
pub fn validate_bundle(dir: &Path, tol: f64) -> Result<Manifest> {
    let source = bundle::load_manifest(dir)?;
    let mut manifest = Manifest { command: "validate".into(), config: source.config.clone(), ..Manifest::default() };
    let mut tr: f64 = 0.0;
    let mut ev = f64::INFINITY;
    let mut count = 0;
    for e in source.maps.iter().filter(|e| e.kind == MapKind::Map) {
        let s = bundle::load_map(dir, e)?;
        if (s.tau - source.taus[e.index]).abs() > 1e-12 {
            bail!("{}: τ = {} does not match the grid value {}", e.file, s.tau, source.taus[e.index]);
        }
        let r = maps::validate_cptp(&s)?;
        tr = tr.max(r.trace_residual);
        ev = ev.min(r.choi_min_eigenvalue);
        count += 1;
    }
    manifest.checks.push(Check { name: "trace_preservation".into(), passed: tr < tol, value: tr, tolerance: tol });
    manifest.checks.push(Check { name: "complete_positivity".into(), passed: ev > -tol, value: ev, tolerance: tol });
    manifest.record("maps_checked", count);
    Ok(manifest)
}

/// Resolves chain lengths and the engine capacity without running anything.
pub fn validate_config(cfg: &RunConfig) -> Result<Manifest> {
    let model = cfg.model()?;
    let p = pipeline::prepare(&model, cfg.system.ordering, cfg.time.tau_max, &cfg.chain_settings())?;
    cfg.check_capacity(p.layout.n_modes())?;
    let mut manifest = Manifest::new("validate", cfg);
    manifest.chain_lengths = p.chain_lengths();
    manifest.n_modes = p.layout.n_modes();
    Ok(manifest)
}
