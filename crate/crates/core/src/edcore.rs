//! Exact diagonalisation in the occupation basis.
//!
//! States live in a [`FockBasis`] (full space or one particle-number sector).
//! The Hamiltonian is diagonalised once and reused for every time point.

use std::collections::HashMap;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::lattice::{FockBasis, ModeLayout, ModeRole};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::state::DensityMatrix;

/// Amplitudes in the order of a [`FockBasis`].
#[derive(Clone, Debug)]
pub struct ManyBodyState {
    pub amps: Vec<c64>,
}

impl ManyBodyState {
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sparse state keyed by occupation bits, used to build product states.
#[derive(Clone, Debug)]
pub struct SparseState {
    pub n_modes: usize,
    pub amps: HashMap<u64, c64>,
}

impl SparseState {
    pub fn vacuum(n_modes: usize) -> Self {
        Self { n_modes, amps: HashMap::from([(0u64, ONE)]) }
    }

    /// Apply `Σ_k coef_k c†_{mode_k}`.
    pub fn create(&self, terms: &[(usize, c64)]) -> Self {
        let mut out: HashMap<u64, c64> = HashMap::new();
        for (&bits, &a) in &self.amps {
            for &(mode, coef) in terms {
                let m = 1u64 << (self.n_modes - 1 - mode);
                if bits & m != 0 {
                    continue;
                }
                let sign = if (bits >> (self.n_modes - mode)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                *out.entry(bits | m).or_insert(ZERO) += a * coef * sign;
            }
        }
        out.retain(|_, v| v.norm() > 0.0);
        Self { n_modes: self.n_modes, amps: out }
    }

    pub fn into_basis(self, basis: &FockBasis) -> Result<ManyBodyState> {
        if basis.n_modes() != self.n_modes {
            return Err(Error::Config("basis and state mode counts differ".into()));
        }
        let mut amps = vec![ZERO; basis.dim()];
        for (bits, a) in self.amps {
            let idx = basis
                .index_of(bits)
                .ok_or_else(|| Error::Config("state leaves the chosen basis sector".into()))?;
            amps[idx] = a;
        }
        Ok(ManyBodyState { amps })
    }
}

/// Particle number of the anti-correlated initial state.
pub fn ac_particle_number(layout: &ModeLayout) -> usize {
    layout.system_size + layout.filled_modes().len()
}

/// `Π_{i=1..L} (s†ᵢ + a†ᵢ)/√2 · Π_filled c† |vac⟩`, with the filled product
/// taken in ascending mode order.
pub fn ac_state_sparse(layout: &ModeLayout) -> SparseState {
    let n = layout.n_modes();
    let mut st = SparseState::vacuum(n);
    for k in layout.filled_modes().into_iter().rev() {
        st = st.create(&[(k, ONE)]);
    }
    let r = c64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for (s, a) in layout.system_modes().into_iter().zip(layout.replica_modes()).rev() {
        st = st.create(&[(s, r), (a, r)]);
    }
    st
}

pub fn prepare_psi_ac(layout: &ModeLayout, basis: &FockBasis) -> Result<ManyBodyState> {
    ac_state_sparse(layout).into_basis(basis)
}

/// `ψ_sys` on the system modes, empty replicas, chains in their vacuum.
/// The system factor is placed by its occupation bits.
pub fn product_state(layout: &ModeLayout, basis: &FockBasis, psi_sys: &[c64]) -> Result<ManyBodyState> {
    let l = layout.system_size;
    if psi_sys.len() != 1 << l {
        return Err(Error::Config(format!("system state must have {} components", 1 << l)));
    }
    let n = layout.n_modes();
    let filled: u64 = layout.filled_modes().iter().map(|&k| 1u64 << (n - 1 - k)).sum();
    let sys = layout.system_modes();
    let mut amps = vec![ZERO; basis.dim()];
    for (sigma, &a) in psi_sys.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let mut bits = filled;
        for (i, &m) in sys.iter().enumerate() {
            if sigma >> (l - 1 - i) & 1 == 1 {
                bits |= 1u64 << (n - 1 - m);
            }
        }
        let idx = basis.index_of(bits).ok_or_else(|| Error::Config("product state leaves the basis".into()))?;
        amps[idx] = a;
    }
    Ok(ManyBodyState { amps })
}

/// Cached eigendecomposition of a many-body Hamiltonian.
#[derive(Clone, Debug)]
pub struct Evolver {
    energies: Vec<f64>,
    v: CMat,
}

impl Evolver {
    pub fn new(h: &CMat) -> Result<Self> {
        let (energies, v) = linalg::hermitian_eigen(h)?;
        Ok(Self { energies, v })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Coefficients `V†ψ` in the eigenbasis.
    pub fn coefficients(&self, psi: &ManyBodyState) -> Vec<c64> {
        let d = self.dim();
        (0..d).map(|k| (0..d).map(|i| self.v[(i, k)].conj() * psi.amps[i]).sum()).collect()
    }

    /// `e^{−iHτ} ψ` from precomputed eigenbasis coefficients.
    pub fn evolve_coefficients(&self, coef: &[c64], tau: f64) -> ManyBodyState {
        let d = self.dim();
        let ph: Vec<c64> = (0..d).map(|k| coef[k] * c64::cis(-self.energies[k] * tau)).collect();
        let amps = (0..d).map(|i| (0..d).map(|k| self.v[(i, k)] * ph[k]).sum()).collect();
        ManyBodyState { amps }
    }

    pub fn evolve(&self, psi: &ManyBodyState, tau: f64) -> ManyBodyState {
        self.evolve_coefficients(&self.coefficients(psi), tau)
    }
}

/// `e^{−iHτ} ψ`.
pub fn evolve(psi: &ManyBodyState, h: &CMat, tau: f64) -> Result<ManyBodyState> {
    Ok(Evolver::new(h)?.evolve(psi, tau))
}

/// Reduced density matrix on the contiguous mode range `keep`.
pub fn partial_trace(psi: &ManyBodyState, basis: &FockBasis, keep: std::ops::Range<usize>) -> Result<CMat> {
    let n = basis.n_modes();
    if keep.end > n || keep.is_empty() {
        return Err(Error::Ordering(format!("block {keep:?} not inside {n} modes")));
    }
    let width = keep.len();
    let shift = n - keep.end;
    let sub_mask = ((1u64 << width) - 1) << shift;
    let mut groups: HashMap<u64, Vec<(usize, c64)>> = HashMap::new();
    for (i, &a) in psi.amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let bits = basis.state(i);
        groups.entry(bits & !sub_mask).or_default().push((((bits & sub_mask) >> shift) as usize, a));
    }
    let d = 1usize << width;
    let mut rho = Mat::<c64>::zeros(d, d);
    for g in groups.values() {
        for &(r, ar) in g {
            for &(c, ac) in g {
                rho[(r, c)] += ar * ac.conj();
            }
        }
    }
    Ok(rho)
}

/// Reduced state on the system-plus-replica block of a layout, in the
/// layout's own order of those modes.
pub fn reduce_sa(psi: &ManyBodyState, basis: &FockBasis, layout: &ModeLayout) -> Result<DensityMatrix> {
    let range = layout.sa_range();
    let roles = layout.roles()[range.clone()].to_vec();
    DensityMatrix::new(partial_trace(psi, basis, range)?, roles)
}

/// Signs `φ(n)` with `Ψ_SA = 2^{−L/2} Σₙ φ(n) |n⟩_S |n̄⟩_A`, indexed by the
/// system occupation label.
pub fn ac_phases(l: usize) -> Vec<f64> {
    let layout = ModeLayout::new(l, &[], crate::lattice::Ordering::Separated).expect("valid layout");
    let st = ac_state_sparse(&layout);
    let d = 1usize << l;
    let norm = (d as f64).sqrt();
    (0..d)
        .map(|n| {
            let bits = ((n as u64) << l) | (!(n as u64) & (d as u64 - 1));
            st.amps.get(&bits).map(|a| (a.re * norm).round()).unwrap_or(0.0)
        })
        .collect()
}

/// Replica-only unitary `I_S ⊗ P_A` with `P_A |n̄⟩ = φ(n)* |n⟩`, which maps
/// the anti-correlated pair state onto `|Φ⁺⟩ = 2^{−L/2} Σₙ |n⟩|n⟩`.
pub fn p_correction(l: usize) -> CMat {
    let d = 1usize << l;
    let phi = ac_phases(l);
    let mut pa = Mat::<c64>::zeros(d, d);
    for n in 0..d {
        pa[(n, !n & (d - 1))] = c64::new(phi[n], 0.0);
    }
    linalg::kron(&linalg::identity(d), &pa)
}

fn conjugate(u: &CMat, rho: &CMat) -> CMat {
    let t = u * rho;
    &t * u.adjoint()
}

/// `ρ^Λ = P ρ^AC P†` on the separated block `s₁…s_L a₁…a_L`.
pub fn apply_p_correction(rho_ac: &DensityMatrix) -> Result<DensityMatrix> {
    let m = rho_ac.roles.len();
    let l = m / 2;
    let expect: Vec<ModeRole> = (0..l).map(ModeRole::System).chain((0..l).map(ModeRole::Replica)).collect();
    if m % 2 != 0 || rho_ac.roles != expect {
        return Err(Error::Ordering("P correction expects the separated s…a… block".into()));
    }
    DensityMatrix::new(conjugate(&p_correction(l), &rho_ac.rho), expect)
}

/// Fermionic permutation `P₂` taking the interleaved block `s₁ a₁ … s_L a_L`
/// to `s₁ … s_L a₁ … a_L`, composed of adjacent swaps with phase
/// `(−1)^{nᵢ nᵢ₊₁}`.
pub fn p2_reordering(l: usize) -> CMat {
    let m = 2 * l;
    let d = 1usize << m;
    let mut order: Vec<usize> = (0..l).flat_map(|i| [i, l + i]).collect();
    let mut u = linalg::identity(d);
    loop {
        let Some(p) = (0..m.saturating_sub(1)).find(|&p| order[p] > order[p + 1]) else { break };
        order.swap(p, p + 1);
        let (hi, lo) = (m - 1 - p, m - 2 - p);
        let swap = Mat::from_fn(d, d, |r, c| {
            let (bh, bl) = ((c >> hi) & 1, (c >> lo) & 1);
            let target = (c & !(1 << hi) & !(1 << lo)) | (bl << hi) | (bh << lo);
            if r == target {
                c64::new(if bh & bl == 1 { -1.0 } else { 1.0 }, 0.0)
            } else {
                ZERO
            }
        });
        u = &swap * &u;
    }
    u
}

/// Reorder an interleaved system-plus-replica state into separated order.
pub fn apply_p2_reordering(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let m = rho.roles.len();
    let l = m / 2;
    let expect: Vec<ModeRole> = (0..l).flat_map(|i| [ModeRole::System(i), ModeRole::Replica(i)]).collect();
    if m % 2 != 0 || rho.roles != expect {
        return Err(Error::Ordering("P₂ expects the interleaved s a … block".into()));
    }
    let roles = (0..l).map(ModeRole::System).chain((0..l).map(ModeRole::Replica)).collect();
    DensityMatrix::new(conjugate(&p2_reordering(l), &rho.rho), roles)
}
