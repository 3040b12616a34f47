//! On-disk layout of a run: `manifest.json`, `series/*.csv`, `maps/*.bin`.
//!
//! Map files hold a 32-byte little-endian header followed by the `d² × d²`
//! superoperator in row-major order, each entry stored as `(re, im)` f64 pairs:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `DYNMAPSO`                        |
//! | 8      | 4    | format version (u32)                    |
//! | 12     | 4    | system Hilbert-space dimension d (u32)  |
//! | 16     | 8    | τ (f64)                                 |
//! | 24     | 4    | kind: 0 = map Λ, 1 = generator 𝓛 (u32)  |
//! | 28     | 4    | reserved, zero                          |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dynmap::c64;
use dynmap::maps::Superoperator;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAP_MAGIC: &[u8; 8] = b"DYNMAPSO";
pub const MAP_VERSION: u32 = 1;
const HEADER: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Map = 0,
    Generator = 1,
}

pub fn encode_map(s: &Superoperator, kind: MapKind) -> Vec<u8> {
    let n = s.matrix.nrows();
    let mut out = Vec::with_capacity(HEADER + 16 * n * n);
    out.extend_from_slice(MAP_MAGIC);
    out.extend_from_slice(&MAP_VERSION.to_le_bytes());
    out.extend_from_slice(&(s.d as u32).to_le_bytes());
    out.extend_from_slice(&s.tau.to_le_bytes());
    out.extend_from_slice(&(kind as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            let z = s.matrix[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_map(bytes: &[u8]) -> Result<(Superoperator, MapKind)> {
    if bytes.len() < HEADER || &bytes[..8] != MAP_MAGIC {
        bail!("not a map file");
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != MAP_VERSION {
        bail!("map format version {version}, expected {MAP_VERSION}");
    }
    let d = u32_at(12) as usize;
    let tau = f64_at(16);
    let kind = match u32_at(24) {
        0 => MapKind::Map,
        1 => MapKind::Generator,
        k => bail!("unknown map kind {k}"),
    };
    let n = d * d;
    if bytes.len() != HEADER + 16 * n * n {
        bail!("map file has {} bytes, expected {}", bytes.len(), HEADER + 16 * n * n);
    }
    let m = Mat::from_fn(n, n, |i, j| {
        let o = HEADER + 16 * (i * n + j);
        c64::new(f64_at(o), f64_at(o + 8))
    });
    Ok((Superoperator::new(m, tau)?, kind))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapEntry {
    pub index: usize,
    pub tau: f64,
    pub kind: MapKind,
    pub file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridIssue {
    pub index: usize,
    pub tau: f64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub config: Option<RunConfig>,
    pub chain_lengths: Vec<usize>,
    pub n_modes: usize,
    pub taus: Vec<f64>,
    pub maps: Vec<MapEntry>,
    pub singular_points: Vec<GridIssue>,
    pub series: Vec<String>,
    pub checks: Vec<Check>,
    pub results: serde_json::Map<String, serde_json::Value>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: Some(config.clone()),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("serialisable result"));
    }

    pub fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }
}

/// Output directory of one run.
pub struct Bundle {
    pub root: PathBuf,
}

impl Bundle {
    pub fn create(root: &Path) -> Result<Self> {
        for sub in ["series", "maps"] {
            fs::create_dir_all(root.join(sub)).with_context(|| format!("creating {}", root.join(sub).display()))?;
        }
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn write_series(&self, manifest: &mut Manifest, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
        let rel = format!("series/{name}.csv");
        let mut w = csv::Writer::from_path(self.root.join(&rel)).with_context(|| format!("writing {rel}"))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| format_value(*v)))?;
        }
        w.flush()?;
        manifest.series.push(rel);
        Ok(())
    }

    pub fn write_map(&self, manifest: &mut Manifest, index: usize, s: &Superoperator, kind: MapKind) -> Result<()> {
        let stem = match kind {
            MapKind::Map => "lambda",
            MapKind::Generator => "generator",
        };
        let rel = format!("maps/{stem}_{index:05}.bin");
        fs::write(self.root.join(&rel), encode_map(s, kind)).with_context(|| format!("writing {rel}"))?;
        manifest.maps.push(MapEntry { index, tau: s.tau, kind, file: rel });
        Ok(())
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let mut f = fs::File::create(self.root.join("manifest.json"))?;
        serde_json::to_writer_pretty(&mut f, manifest)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Shortest round-trip representation; `nan` for missing values.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

pub fn load_manifest(root: &Path) -> Result<Manifest> {
    let path = root.join("manifest.json");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let raw: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    match raw.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => bail!("{}: schema version {v}, this build reads version {SCHEMA_VERSION}", path.display()),
        None => bail!("{}: missing schema_version", path.display()),
    }
    Ok(serde_json::from_value(raw)?)
}

pub fn load_map(root: &Path, entry: &MapEntry) -> Result<Superoperator> {
    let bytes = fs::read(root.join(&entry.file)).with_context(|| format!("reading {}", entry.file))?;
    let (s, kind) = decode_map(&bytes).with_context(|| entry.file.clone())?;
    if kind != entry.kind {
        bail!("{}: kind {:?} does not match the manifest", entry.file, kind);
    }
    Ok(s)
}
