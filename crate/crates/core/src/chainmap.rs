//! Orthogonal-polynomial chain mapping.
//!
//! A weight `w(ω)` on `[a, b]` is replaced by a semi-infinite tight-binding
//! chain whose on-site energies `γₙ` and squared bonds `βₙ` are the
//! three-term recurrence coefficients of the monic polynomials orthogonal
//! under `w`. `β₀ = ∫w` sets the coupling `√β₀` of the chain head to the
//! system mode.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::spectral::{thermofield_split, BathSpec, Branch, Weight};

/// Recurrence coefficients of one chain. `gamma[n]` is the on-site energy of
/// site `n`, `beta[0]` the total mass and `beta[n]` (n ≥ 1) the squared bond
/// between sites `n − 1` and `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCoefficients {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ChainCoefficients {
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// Coupling of the head site to the system mode.
    pub fn head_coupling(&self) -> f64 {
        self.beta[0].sqrt()
    }

    /// Bond amplitudes `√βₙ`, n = 1..M−1.
    pub fn hoppings(&self) -> Vec<f64> {
        self.beta[1..].iter().map(|b| b.sqrt()).collect()
    }

    pub fn truncated(&self, m: usize) -> Self {
        Self { gamma: self.gamma[..m].to_vec(), beta: self.beta[..m].to_vec() }
    }
}

/// Options for the discretised Stieltjes procedure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StieltjesOptions {
    /// Quadrature nodes per smooth panel.
    pub grid: usize,
    /// Use compensated summation for the inner products.
    pub compensated: bool,
}

impl Default for StieltjesOptions {
    fn default() -> Self {
        Self { grid: 20_000, compensated: true }
    }
}

/// A finite positive measure `Σ wₖ δ(x − xₖ)`.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Discretise `weight` on `[a, b]`, with panels split at `breaks`.
    pub fn from_weight(weight: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], grid: usize) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (pa, pb) in quad::panels(a, b, breaks) {
            quad::cosine_panel(weight, pa, pb, grid, &mut nodes, &mut weights);
        }
        Self { nodes, weights }
    }
}

fn dot(a: impl Iterator<Item = f64>, compensated: bool) -> f64 {
    if !compensated {
        return a.sum();
    }
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in a {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Stieltjes procedure on a discrete measure, carried out on orthonormal
/// polynomial values at the nodes.
pub fn stieltjes(measure: &DiscreteMeasure, m: usize, compensated: bool) -> Result<ChainCoefficients> {
    if m == 0 {
        return Err(Error::Domain("chain length must be positive".into()));
    }
    let (x, w) = (&measure.nodes, &measure.weights);
    let k = x.len();
    if m > k / 2 {
        return Err(Error::Precision(format!("{m} coefficients requested from {k} nodes; refine the grid")));
    }
    let total = dot(w.iter().cloned(), compensated);
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateMeasure(format!("total mass {total}")));
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let half_width = 0.5 * (hi - lo);

    let mut gamma = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    beta.push(total);
    let mut q_prev = vec![0.0; k];
    let mut q = vec![1.0 / total.sqrt(); k];
    let mut sqrt_b = 0.0;
    for n in 0..m {
        let g = dot((0..k).map(|i| w[i] * x[i] * q[i] * q[i]), compensated);
        gamma.push(g);
        if n + 1 == m {
            break;
        }
        let r: Vec<f64> = (0..k).map(|i| (x[i] - g) * q[i] - sqrt_b * q_prev[i]).collect();
        let nb = dot((0..k).map(|i| w[i] * r[i] * r[i]), compensated);
        if !(nb > 0.0) || !nb.is_finite() || nb > half_width * half_width * (1.0 + 1e-8) {
            return Err(Error::Precision(format!("β_{} = {nb} is not admissible; refine the grid", n + 1)));
        }
        sqrt_b = nb.sqrt();
        beta.push(nb);
        q_prev = q;
        q = r.into_iter().map(|v| v / sqrt_b).collect();
    }
    Ok(ChainCoefficients { gamma, beta })
}

/// First `m` recurrence coefficients of a weight.
pub fn recurrence_coefficients(weight: &dyn Weight, m: usize, opts: StieltjesOptions) -> Result<ChainCoefficients> {
    let (a, b) = weight.support();
    if !(b > a) {
        return Err(Error::DegenerateMeasure(format!("empty support [{a}, {b}]")));
    }
    let f = |x: f64| weight.weight(x);
    let measure = DiscreteMeasure::from_weight(&f, a, b, &weight.breakpoints(), opts.grid);
    let scale = b - a;
    let total: f64 = measure.weights.iter().sum();
    if measure.weights.is_empty() || !(total > f64::MIN_POSITIVE * scale) {
        return Err(Error::DegenerateMeasure(format!("vanishing mass on [{a}, {b}]")));
    }
    stieltjes(&measure, m, opts.compensated)
}

/// Chain coefficients of both thermofield branches of a bath.
pub fn bath_chains(bath: &BathSpec, m: usize, opts: StieltjesOptions) -> Result<[ChainCoefficients; 2]> {
    let (w0, w1) = thermofield_split(bath)?;
    Ok([recurrence_coefficients(&w0, m, opts)?, recurrence_coefficients(&w1, m, opts)?])
}

/// Chain coefficients of one branch.
pub fn branch_chain(bath: &BathSpec, branch: Branch, m: usize, opts: StieltjesOptions) -> Result<ChainCoefficients> {
    let (w0, w1) = thermofield_split(bath)?;
    let w = if branch == Branch::Empty { w0 } else { w1 };
    recurrence_coefficients(&w, m, opts)
}

/// Chain length needed so that a signal travelling at the chain's maximal
/// group velocity `2 max √βₙ` does not return within `τ_max`.
pub fn truncation_length(coeffs: &ChainCoefficients, tau_max: f64, safety: f64) -> usize {
    let v = if coeffs.beta.len() > 1 {
        2.0 * coeffs.beta[1..].iter().cloned().fold(0.0, f64::max).sqrt()
    } else {
        2.0 * coeffs.beta[0].sqrt()
    };
    (safety * tau_max * v).ceil() as usize
}

/// Gauss quadrature rule `(nodes, weights)` of the truncated Jacobi matrix,
/// exact for polynomials of degree ≤ 2M − 1 under the original weight.
pub fn gauss_rule(coeffs: &ChainCoefficients) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = coeffs.len();
    let j = Mat::<f64>::from_fn(m, m, |i, k| {
        if i == k {
            coeffs.gamma[i]
        } else if i == k + 1 {
            coeffs.beta[i].sqrt()
        } else if k == i + 1 {
            coeffs.beta[k].sqrt()
        } else {
            0.0
        }
    });
    let e = j.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let nodes: Vec<f64> = e.S().column_vector().iter().cloned().collect();
    let u = e.U();
    let weights = (0..m).map(|k| coeffs.beta[0] * u[(0, k)] * u[(0, k)]).collect();
    Ok((nodes, weights))
}
