//! Mode layouts and the single-particle Hamiltonian of system, replicas and
//! thermofield chains.
//!
//! Two orderings are supported.
//!
//! * Separated: left-side chains (empty branch, then filled branch, head
//!   first), then `s₁…s_L`, then `a₁…a_L`, then right-side chains (empty,
//!   filled). A lone bath is always placed after the replica block.
//! * Interleaved: left chains interleaved tail-first
//!   (`c_{L1,M}, c_{L0,M}, …, c_{L1,1}, c_{L0,1}`), then `s₁, a₁, …, s_L, a_L`,
//!   then right chains interleaved head-first (`c_{R0,1}, c_{R1,1}, …`).

use std::collections::HashMap;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::chainmap::ChainCoefficients;
use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, CMat};
use crate::spectral::Branch;

pub mod fock;

pub use fock::{build_interacting_hamiltonian, many_body_operator, FockBasis, OperatorKind};

/// Where a bath sits relative to the system block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    Separated,
    Interleaved,
}

/// Physical meaning of a single-particle mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeRole {
    System(usize),
    Replica(usize),
    /// Site `site` (0 = head) of branch `branch` of bath `bath`.
    Chain { bath: usize, branch: Branch, site: usize },
}

/// A bath chain pair (both branches, `m` sites each) placed on one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BathAttachment {
    pub bath: usize,
    pub sites: usize,
    pub side: Side,
}

/// Ordered list of mode roles with reverse lookup.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeLayout {
    pub system_size: usize,
    pub ordering: Ordering,
    pub baths: Vec<BathAttachment>,
    roles: Vec<ModeRole>,
    index: HashMap<ModeRole, usize>,
}

impl ModeLayout {
    /// Layout for `l` system modes, `l` replicas and the given baths.
    pub fn new(l: usize, baths: &[BathAttachment], ordering: Ordering) -> Result<Self> {
        if l == 0 {
            return Err(Error::Domain("system needs at least one mode".into()));
        }
        let lefts: Vec<_> = baths.iter().filter(|b| b.side == Side::Left).collect();
        let rights: Vec<_> = baths.iter().filter(|b| b.side == Side::Right).collect();
        if lefts.len() > 1 || rights.len() > 1 {
            return Err(Error::Config("at most one bath per side".into()));
        }
        if baths.iter().any(|b| b.sites == 0) {
            return Err(Error::Domain("chains need at least one site".into()));
        }
        let mut ids: Vec<usize> = baths.iter().map(|b| b.bath).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != baths.len() {
            return Err(Error::Config("duplicate bath id".into()));
        }

        let mut roles = Vec::new();
        let chain = |b: &BathAttachment, br: Branch, site: usize| ModeRole::Chain { bath: b.bath, branch: br, site };
        let sa_sep = |roles: &mut Vec<ModeRole>| {
            roles.extend((0..l).map(ModeRole::System));
            roles.extend((0..l).map(ModeRole::Replica));
        };
        match ordering {
            Ordering::Separated => {
                let (before, after): (Vec<&BathAttachment>, Vec<&BathAttachment>) = if baths.len() == 2 {
                    (lefts.clone(), rights.clone())
                } else {
                    (vec![], baths.iter().collect())
                };
                for b in before {
                    for br in [Branch::Empty, Branch::Filled] {
                        roles.extend((0..b.sites).map(|s| chain(b, br, s)));
                    }
                }
                sa_sep(&mut roles);
                for b in after {
                    for br in [Branch::Empty, Branch::Filled] {
                        roles.extend((0..b.sites).map(|s| chain(b, br, s)));
                    }
                }
            }
            Ordering::Interleaved => {
                for b in &lefts {
                    for s in (0..b.sites).rev() {
                        roles.push(chain(b, Branch::Filled, s));
                        roles.push(chain(b, Branch::Empty, s));
                    }
                }
                for i in 0..l {
                    roles.push(ModeRole::System(i));
                    roles.push(ModeRole::Replica(i));
                }
                for b in &rights {
                    for s in 0..b.sites {
                        roles.push(chain(b, Branch::Empty, s));
                        roles.push(chain(b, Branch::Filled, s));
                    }
                }
            }
        }
        let index = roles.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        Ok(Self { system_size: l, ordering, baths: baths.to_vec(), roles, index })
    }

    pub fn n_modes(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[ModeRole] {
        &self.roles
    }

    pub fn index_of(&self, role: ModeRole) -> Result<usize> {
        self.index.get(&role).copied().ok_or_else(|| Error::Config(format!("mode {role:?} not in layout")))
    }

    pub fn system_modes(&self) -> Vec<usize> {
        (0..self.system_size).map(|i| self.index[&ModeRole::System(i)]).collect()
    }

    pub fn replica_modes(&self) -> Vec<usize> {
        (0..self.system_size).map(|i| self.index[&ModeRole::Replica(i)]).collect()
    }

    /// System and replica roles in separated order `s₁…s_L a₁…a_L`.
    pub fn sa_roles(&self) -> Vec<ModeRole> {
        let l = self.system_size;
        (0..l).map(ModeRole::System).chain((0..l).map(ModeRole::Replica)).collect()
    }

    pub fn system_roles(&self) -> Vec<ModeRole> {
        (0..self.system_size).map(ModeRole::System).collect()
    }

    /// Index range of the system-plus-replica block, which is contiguous in both orderings.
    pub fn sa_range(&self) -> std::ops::Range<usize> {
        let idx: Vec<usize> = self.system_modes().into_iter().chain(self.replica_modes()).collect();
        let lo = *idx.iter().min().unwrap();
        lo..lo + idx.len()
    }

    /// Chain modes that start occupied.
    pub fn filled_modes(&self) -> Vec<usize> {
        (0..self.n_modes())
            .filter(|&i| matches!(self.roles[i], ModeRole::Chain { branch: Branch::Filled, .. }))
            .collect()
    }

    /// Same modes in separated ordering.
    pub fn separated(&self) -> Result<Self> {
        Self::new(self.system_size, &self.baths, Ordering::Separated)
    }
}

/// Chain coefficients for one bath and the system mode it couples to.
#[derive(Clone, Debug)]
pub struct BathChains {
    pub bath: usize,
    pub coupled_mode: usize,
    pub branches: [ChainCoefficients; 2],
}

/// `H = Σᵢⱼ hᵢⱼ d†ᵢ dⱼ` over the modes of a layout.
#[derive(Clone, Debug)]
pub struct QuadraticHamiltonian {
    pub h: CMat,
    pub layout: ModeLayout,
}

/// Assemble `h` for the system block `h_sys` (`L × L`, Hermitian), the chains
/// and decoupled replicas.
pub fn assemble_quadratic(layout: &ModeLayout, h_sys: &CMat, chains: &[BathChains]) -> Result<QuadraticHamiltonian> {
    let l = layout.system_size;
    if h_sys.nrows() != l || h_sys.ncols() != l {
        return Err(Error::Config(format!("system block must be {l}×{l}")));
    }
    if !is_hermitian(h_sys, 1e-12) {
        return Err(Error::Domain("system Hamiltonian is not Hermitian".into()));
    }
    let n = layout.n_modes();
    let mut h = Mat::<c64>::zeros(n, n);
    let sys = layout.system_modes();
    for i in 0..l {
        for j in 0..l {
            h[(sys[i], sys[j])] = h_sys[(i, j)];
        }
    }
    for att in &layout.baths {
        let bc = chains
            .iter()
            .find(|c| c.bath == att.bath)
            .ok_or_else(|| Error::Config(format!("no chain coefficients for bath {}", att.bath)))?;
        if bc.coupled_mode >= l {
            return Err(Error::Config(format!("bath {} couples to missing mode {}", bc.bath, bc.coupled_mode)));
        }
        let q = sys[bc.coupled_mode];
        for br in [Branch::Empty, Branch::Filled] {
            let co = &bc.branches[br.index()];
            if co.len() < att.sites {
                return Err(Error::Config(format!("bath {} has {} coefficients, layout needs {}", att.bath, co.len(), att.sites)));
            }
            let idx: Vec<usize> = (0..att.sites)
                .map(|s| layout.index_of(ModeRole::Chain { bath: att.bath, branch: br, site: s }))
                .collect::<Result<_>>()?;
            let head = c64::new(co.head_coupling(), 0.0);
            h[(q, idx[0])] += head;
            h[(idx[0], q)] += head;
            for s in 0..att.sites {
                h[(idx[s], idx[s])] += c64::new(co.gamma[s], 0.0);
                if s + 1 < att.sites {
                    let t = c64::new(co.beta[s + 1].sqrt(), 0.0);
                    h[(idx[s], idx[s + 1])] += t;
                    h[(idx[s + 1], idx[s])] += t;
                }
            }
        }
    }
    Ok(QuadraticHamiltonian { h, layout: layout.clone() })
}

/// Non-quadratic system terms: `Σ Uᵢⱼ nᵢ nⱼ` plus on-site energies `Σ εᵢ nᵢ`,
/// indexed by system mode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerms {
    pub density_density: Vec<(usize, usize, f64)>,
    pub onsite: Vec<(usize, f64)>,
}

impl InteractionTerms {
    pub fn is_quadratic(&self) -> bool {
        self.density_density.iter().all(|t| t.2 == 0.0)
    }
}

/// Tight-binding system block with uniform hopping and on-site energies.
pub fn tight_binding(onsite: &[f64], hopping: &[f64]) -> CMat {
    let l = onsite.len();
    Mat::from_fn(l, l, |i, j| {
        if i == j {
            c64::new(onsite[i], 0.0)
        } else if j == i + 1 {
            c64::new(hopping[i], 0.0)
        } else if i == j + 1 {
            c64::new(hopping[j], 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}
