use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use dynmap::lattice::{InteractionTerms, Ordering, Side};
use dynmap::pipeline::{AnalysisOptions, BathModel, ChainSettings, Engine, Model, TimeGrid, ED_MAX_MODES};
use dynmap::spectral::{BathSpec, SpectralDensity};
use serde::{Deserialize, Serialize};

pub const PRESETS: [(&str, &str); 3] = [
    ("fermi-chain-fig5", include_str!("../../../presets/fermi-chain-fig5.toml")),
    ("siam-eq", include_str!("../../../presets/siam-eq.toml")),
    ("siam-hot", include_str!("../../../presets/siam-hot.toml")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    FermiChain,
    Siam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub model: SystemKind,
    /// Number of chain sites (the SIAM always has two modes).
    #[serde(default)]
    pub sites: Option<usize>,
    /// Uniform hopping `t_c`.
    #[serde(default)]
    pub hopping: f64,
    /// On-site energies; defaults to zero for chains and `−U/2` for the SIAM.
    #[serde(default)]
    pub onsite: Option<Vec<f64>>,
    /// Nearest-neighbour (chain) or on-site (SIAM) density-density strength.
    #[serde(default)]
    pub interaction: f64,
    #[serde(default = "default_ordering")]
    pub ordering: Ordering,
}

fn default_ordering() -> Ordering {
    Ordering::Separated
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathKind {
    SemiElliptical,
    SmoothedFlat,
}

/// `"auto"` or a fixed number of chain sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sites {
    Fixed(usize),
    Named(String),
}

impl Default for Sites {
    fn default() -> Self {
        Sites::Named("auto".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub kind: BathKind,
    pub side: Side,
    /// Coupled system mode; defaults to the first (left) or last (right) mode.
    #[serde(default)]
    pub mode: Option<usize>,
    pub gamma: f64,
    /// Inverse temperature; `inf` (or `"inf"`) for zero temperature.
    #[serde(with = "beta_codec")]
    pub beta: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "one")]
    pub bandwidth: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default)]
    pub sites: Sites,
}

/// JSON has no infinity, so infinite β travels as the string `"inf"`.
mod beta_codec {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{t}\""))),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_nu() -> f64 {
    100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub tau_max: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_grid")]
    pub quadrature_grid: usize,
}

fn default_safety() -> f64 {
    ChainSettings::default().safety
}

fn default_grid() -> usize {
    ChainSettings::default().stieltjes.grid
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { safety: default_safety(), quadrature_grid: default_grid() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    Trace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "default_norm")]
    pub norm: Norm,
    #[serde(default = "default_kappa")]
    pub kappa_max: f64,
    /// Finite-difference step; defaults to `dt` and must be a multiple of it.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_cptp_tol")]
    pub cptp_tol: f64,
    /// Bond whose current is reported; defaults to the last bond of a chain.
    #[serde(default)]
    pub current_bond: Option<usize>,
    #[serde(default = "yes")]
    pub memory_times: bool,
    /// Random states used to check `Λ[ρ₀]` against direct evolution.
    #[serde(default = "default_checks")]
    pub reconstruction_checks: usize,
    #[serde(default = "default_recon_tol")]
    pub reconstruction_tol: f64,
    #[serde(default = "yes")]
    pub write_maps: bool,
}

fn default_eps() -> f64 {
    AnalysisOptions::default().epsilon
}
fn default_norm() -> Norm {
    Norm::Trace
}
fn default_kappa() -> f64 {
    AnalysisOptions::default().kappa_max
}
fn default_cptp_tol() -> f64 {
    AnalysisOptions::default().cptp_tol
}
fn yes() -> bool {
    true
}
fn default_checks() -> usize {
    2
}
fn default_recon_tol() -> f64 {
    1e-6
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        toml::from_str("").expect("analysis defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    /// `totally-mixed`, `vacuum` or `spin-up`.
    Named(String),
    /// Occupation probability of every system mode.
    Occupations(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    #[serde(default = "default_initial")]
    pub initial_state: InitialState,
    /// Generator memory time; defaults to a third of `tau_max`.
    #[serde(default)]
    pub tau_generator: Option<f64>,
    /// PReB refresh time; defaults to two thirds of `tau_max`.
    #[serde(default)]
    pub tau_map: Option<f64>,
    /// End of the predicted trajectory; defaults to `tau_max`.
    #[serde(default)]
    pub tau_end: Option<f64>,
    /// Extra PReB cycles after the first; defaults to filling `tau_end`.
    #[serde(default)]
    pub repetitions: Option<usize>,
}

fn default_initial() -> InitialState {
    InitialState::Named("totally-mixed".into())
}

impl Default for PredictConfig {
    fn default() -> Self {
        toml::from_str("").expect("predict defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub baths: Vec<BathConfig>,
    pub time: TimeConfig,
    #[serde(default)]
    pub chains: ChainConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub predict: PredictConfig,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_engine() -> Engine {
    Engine::Gaussian
}

fn default_output() -> PathBuf {
    PathBuf::from("run")
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow!("{origin}: {e}"))?;
        cfg.check().with_context(|| format!("{origin}: invalid configuration"))?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| anyhow!("unknown preset `{name}` (available: {})", preset_names()))?;
        Self::parse(text, &format!("preset {name}"))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid { tau_max: self.time.tau_max, dt: self.time.dt }
    }

    pub fn sites(&self) -> usize {
        match self.system.model {
            SystemKind::FermiChain => self.system.sites.unwrap_or(0),
            SystemKind::Siam => 2,
        }
    }

    pub fn chain_settings(&self) -> ChainSettings {
        let mut s = ChainSettings { safety: self.chains.safety, ..ChainSettings::default() };
        s.stieltjes.grid = self.chains.quadrature_grid;
        s
    }

    pub fn derivative_stride(&self) -> usize {
        self.analysis.delta.map_or(1, |d| (d / self.time.dt).round() as usize)
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            epsilon: self.analysis.epsilon,
            kappa_max: self.analysis.kappa_max,
            cptp_tol: self.analysis.cptp_tol,
            derivative_stride: self.derivative_stride(),
        }
    }

    /// The SIAM's two modes are spin states, so it reports no current unless asked.
    pub fn current_bond(&self) -> Option<usize> {
        let l = self.sites();
        match self.system.model {
            _ if l < 2 => None,
            SystemKind::Siam => self.analysis.current_bond,
            SystemKind::FermiChain => Some(self.analysis.current_bond.unwrap_or(l - 2)),
        }
    }

    pub fn model(&self) -> Result<Model> {
        let l = self.sites();
        let u = self.system.interaction;
        let (default_onsite, hopping, interaction) = match self.system.model {
            SystemKind::FermiChain => (
                vec![0.0; l],
                vec![self.system.hopping; l.saturating_sub(1)],
                InteractionTerms {
                    density_density: if u != 0.0 { (0..l.saturating_sub(1)).map(|i| (i, i + 1, u)).collect() } else { vec![] },
                    onsite: vec![],
                },
            ),
            SystemKind::Siam => (
                vec![-u / 2.0; 2],
                vec![self.system.hopping],
                InteractionTerms { density_density: if u != 0.0 { vec![(0, 1, u)] } else { vec![] }, onsite: vec![] },
            ),
        };
        let onsite = self.system.onsite.clone().unwrap_or(default_onsite);
        let mut baths = Vec::new();
        for (k, b) in self.baths.iter().enumerate() {
            let density = match b.kind {
                BathKind::SemiElliptical => SpectralDensity::semi_elliptical(b.gamma, b.bandwidth),
                BathKind::SmoothedFlat => SpectralDensity::smoothed_flat(b.gamma, b.bandwidth, b.nu),
            }
            .with_context(|| format!("baths[{k}]"))?;
            let mode = b.mode.unwrap_or(if b.side == Side::Left { 0 } else { l.saturating_sub(1) });
            let spec = BathSpec::new(density, b.beta, b.mu, mode).with_context(|| format!("baths[{k}]"))?;
            let sites = match &b.sites {
                Sites::Fixed(m) => Some(*m),
                Sites::Named(s) if s == "auto" => None,
                Sites::Named(s) => bail!("baths[{k}].sites: expected \"auto\" or an integer, got \"{s}\""),
            };
            baths.push(BathModel { spec, side: b.side, sites });
        }
        let model = Model { onsite, hopping, interaction, baths };
        model.validate().context("system")?;
        Ok(model)
    }

    /// Field-level checks that do not need chain coefficients.
    pub fn check(&self) -> Result<()> {
        if self.system.model == SystemKind::FermiChain && self.system.sites.unwrap_or(0) == 0 {
            bail!("system.sites: a fermi-chain needs at least one site");
        }
        if self.system.model == SystemKind::Siam && self.system.sites.is_some_and(|s| s != 2) {
            bail!("system.sites: the siam has exactly two modes");
        }
        if let Some(o) = &self.system.onsite {
            if o.len() != self.sites() {
                bail!("system.onsite: expected {} values, got {}", self.sites(), o.len());
            }
        }
        if !(self.time.dt > 0.0) {
            bail!("time.dt: must be positive, got {}", self.time.dt);
        }
        if !(self.time.tau_max >= self.time.dt) {
            bail!("time.tau_max: the grid is empty (tau_max = {} < dt = {})", self.time.tau_max, self.time.dt);
        }
        if let Some(d) = self.analysis.delta {
            let s = d / self.time.dt;
            if !(s >= 0.5) || (s - s.round()).abs() > 1e-9 {
                bail!("analysis.delta: must be a positive multiple of time.dt, got {d}");
            }
        }
        if !(self.analysis.epsilon > 0.0) {
            bail!("analysis.epsilon: must be positive");
        }
        if let (Some(b), l) = (self.analysis.current_bond, self.sites()) {
            if b + 1 >= l {
                bail!("analysis.current_bond: bond {b} does not exist for {l} sites");
            }
        }
        if self.engine == Engine::Gaussian && self.system.interaction != 0.0 {
            bail!("engine: the gaussian engine needs system.interaction = 0 (use engine = \"ed\")");
        }
        if !(self.chains.safety > 0.0) || self.chains.quadrature_grid < 2 {
            bail!("chains: safety must be positive and quadrature_grid at least 2");
        }
        self.initial_occupations()?;
        for (name, v) in [("tau_generator", self.predict.tau_generator), ("tau_map", self.predict.tau_map), ("tau_end", self.predict.tau_end)] {
            if v.is_some_and(|t| !(t >= 0.0)) {
                bail!("predict.{name}: must be non-negative");
            }
        }
        if self.predict.tau_map.is_some_and(|t| t == 0.0) {
            bail!("predict.tau_map: must be positive");
        }
        self.model()?;
        Ok(())
    }

    /// Checks that need the resolved chain lengths.
    pub fn check_capacity(&self, n_modes: usize) -> Result<()> {
        if self.engine == Engine::Ed && n_modes > ED_MAX_MODES {
            bail!("engine: the ed engine handles at most {ED_MAX_MODES} modes, this run needs {n_modes}; fix baths[*].sites");
        }
        Ok(())
    }

    /// `None` for the totally mixed state.
    pub fn initial_occupations(&self) -> Result<Option<Vec<f64>>> {
        let l = self.sites();
        let occ = match &self.predict.initial_state {
            InitialState::Named(n) => match n.as_str() {
                "totally-mixed" => return Ok(None),
                "vacuum" => vec![0.0; l],
                "spin-up" if self.system.model == SystemKind::Siam => vec![1.0, 0.0],
                _ => bail!("predict.initial_state: unknown state `{n}`"),
            },
            InitialState::Occupations(v) => v.clone(),
        };
        if occ.len() != l || occ.iter().any(|p| !(0.0..=1.0).contains(p)) {
            bail!("predict.initial_state: expected {l} occupation probabilities in [0, 1]");
        }
        Ok(Some(occ))
    }

    pub fn predict_times(&self) -> (f64, f64, f64) {
        let t = self.time.tau_max;
        (
            self.predict.tau_generator.unwrap_or(t / 3.0),
            self.predict.tau_map.unwrap_or(2.0 * t / 3.0),
            self.predict.tau_end.unwrap_or(t),
        )
    }
}

pub fn preset_names() -> String {
    PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}
