//! Occupation-number bases and many-body operators.
//!
//! Mode `i` of an `N`-mode layout is bit `N − 1 − i` of the basis label, so
//! the first mode is the most significant bit and a block of consecutive
//! modes forms a contiguous tensor factor. Creation operators carry the
//! Jordan–Wigner sign `(−1)^{#occupied modes with smaller index}`.

use std::collections::HashMap;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lattice::{InteractionTerms, QuadraticHamiltonian};
use crate::linalg::CMat;

/// Largest mode count for which dense many-body objects are built.
pub const MAX_DENSE_MODES: usize = 14;

/// Either the full Fock space or a fixed particle-number sector.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n_modes: usize,
    particles: Option<usize>,
    states: Vec<u64>,
    lookup: HashMap<u64, usize>,
}

impl FockBasis {
    pub fn full(n_modes: usize) -> Result<Self> {
        if n_modes > MAX_DENSE_MODES {
            return Err(Error::Capacity(format!("{n_modes} modes exceed the dense cap of {MAX_DENSE_MODES}")));
        }
        let states: Vec<u64> = (0..1u64 << n_modes).collect();
        Ok(Self { n_modes, particles: None, states, lookup: HashMap::new() })
    }

    pub fn sector(n_modes: usize, particles: usize) -> Result<Self> {
        if n_modes > MAX_DENSE_MODES {
            return Err(Error::Capacity(format!("{n_modes} modes exceed the dense cap of {MAX_DENSE_MODES}")));
        }
        if particles > n_modes {
            return Err(Error::Domain(format!("{particles} particles in {n_modes} modes")));
        }
        let states: Vec<u64> = (0..1u64 << n_modes).filter(|s| s.count_ones() as usize == particles).collect();
        let lookup = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Self { n_modes, particles: Some(particles), states, lookup })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn particles(&self) -> Option<usize> {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> u64 {
        self.states[idx]
    }

    pub fn index_of(&self, bits: u64) -> Option<usize> {
        match self.particles {
            None => (bits < (1u64 << self.n_modes)).then_some(bits as usize),
            Some(_) => self.lookup.get(&bits).copied(),
        }
    }

    pub fn mask(&self, mode: usize) -> u64 {
        1u64 << (self.n_modes - 1 - mode)
    }

    pub fn occupied(&self, bits: u64, mode: usize) -> bool {
        bits & self.mask(mode) != 0
    }

    /// `c_k |bits⟩ = sign |bits'⟩`.
    pub fn annihilate(&self, bits: u64, mode: usize) -> Option<(u64, f64)> {
        let m = self.mask(mode);
        (bits & m != 0).then(|| (bits & !m, self.jw_sign(bits, mode)))
    }

    /// `c†_k |bits⟩ = sign |bits'⟩`.
    pub fn create(&self, bits: u64, mode: usize) -> Option<(u64, f64)> {
        let m = self.mask(mode);
        (bits & m == 0).then(|| (bits | m, self.jw_sign(bits, mode)))
    }

    fn jw_sign(&self, bits: u64, mode: usize) -> f64 {
        let higher = bits >> (self.n_modes - mode);
        if higher.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `d†ᵢ dⱼ |bits⟩`.
    pub fn hop(&self, bits: u64, i: usize, j: usize) -> Option<(u64, f64)> {
        let (b1, s1) = self.annihilate(bits, j)?;
        let (b2, s2) = self.create(b1, i)?;
        Some((b2, s1 * s2))
    }
}

/// Elementary single-mode and bilinear operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Creation,
    Annihilation,
    Number,
}

/// Dense matrix of an elementary operator on mode `k` in `basis`.
/// Creation and annihilation need the full Fock space.
pub fn many_body_operator(basis: &FockBasis, kind: OperatorKind, k: usize) -> Result<CMat> {
    if k >= basis.n_modes() {
        return Err(Error::Domain(format!("mode {k} out of range")));
    }
    if kind != OperatorKind::Number && basis.particles().is_some() {
        return Err(Error::Config("creation/annihilation leave a fixed-number sector".into()));
    }
    let d = basis.dim();
    let mut m = Mat::<c64>::zeros(d, d);
    for (col, &s) in basis.states().iter().enumerate() {
        let out = match kind {
            OperatorKind::Creation => basis.create(s, k),
            OperatorKind::Annihilation => basis.annihilate(s, k),
            OperatorKind::Number => basis.occupied(s, k).then_some((s, 1.0)),
        };
        if let Some((t, sign)) = out {
            let row = basis.index_of(t).expect("target in basis");
            m[(row, col)] = c64::new(sign, 0.0);
        }
    }
    Ok(m)
}

/// Dense `d†ᵢ dⱼ` in `basis`.
pub fn hopping_operator(basis: &FockBasis, i: usize, j: usize) -> CMat {
    let d = basis.dim();
    let mut m = Mat::<c64>::zeros(d, d);
    for (col, &s) in basis.states().iter().enumerate() {
        if let Some((t, sign)) = basis.hop(s, i, j) {
            if let Some(row) = basis.index_of(t) {
                m[(row, col)] += c64::new(sign, 0.0);
            }
        }
    }
    m
}

/// Many-body Hamiltonian `Σ hᵢⱼ d†ᵢ dⱼ + Σ Uᵢⱼ nᵢ nⱼ + Σ εᵢ nᵢ` in `basis`.
/// Interaction indices refer to system modes.
pub fn build_interacting_hamiltonian(hq: &QuadraticHamiltonian, terms: &InteractionTerms, basis: &FockBasis) -> Result<CMat> {
    let n = hq.layout.n_modes();
    if basis.n_modes() != n {
        return Err(Error::Config(format!("basis has {} modes, layout {n}", basis.n_modes())));
    }
    let sys = hq.layout.system_modes();
    let map = |i: usize| {
        sys.get(i).copied().ok_or_else(|| Error::Config(format!("interaction on missing system mode {i}")))
    };
    let dd: Vec<(usize, usize, f64)> = terms
        .density_density
        .iter()
        .map(|&(i, j, u)| Ok((map(i)?, map(j)?, u)))
        .collect::<Result<_>>()?;
    let on: Vec<(usize, f64)> = terms.onsite.iter().map(|&(i, e)| Ok((map(i)?, e))).collect::<Result<_>>()?;

    let mut nz = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = hq.h[(i, j)];
            if v.norm() > 0.0 {
                nz.push((i, j, v));
            }
        }
    }
    let d = basis.dim();
    let mut h = Mat::<c64>::zeros(d, d);
    for (col, &s) in basis.states().iter().enumerate() {
        for &(i, j, v) in &nz {
            if let Some((t, sign)) = basis.hop(s, i, j) {
                let row = basis.index_of(t).expect("number-conserving term stays in basis");
                h[(row, col)] += v * sign;
            }
        }
        let mut diag = 0.0;
        for &(i, j, u) in &dd {
            if basis.occupied(s, i) && basis.occupied(s, j) {
                diag += u;
            }
        }
        for &(i, e) in &on {
            if basis.occupied(s, i) {
                diag += e;
            }
        }
        h[(col, col)] += c64::new(diag, 0.0);
    }
    Ok(h)
}
