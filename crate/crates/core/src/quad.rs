//! Gauss–Legendre rules, adaptive integration and the panel discretisation used
//! to turn a continuous weight into a discrete measure.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Order of the fixed rule used inside every sub-panel.
pub const PANEL_ORDER: usize = 32;

/// Discretise the weight `f` on `[a, b]` with `n` points.
///
/// The panel is mapped through `x = a + (b − a)(1 − cos θ)/2`, which removes
/// square-root endpoint behaviour, and `θ ∈ [0, π]` is covered by a composite
/// Gauss–Legendre rule. Zero-weight nodes are dropped.
pub fn cosine_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let sub = n.div_ceil(PANEL_ORDER).max(1);
    let h = PI / sub as f64;
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    for s in 0..sub {
        let t0 = s as f64 * h;
        for (xi, wi) in gx.iter().zip(&gw) {
            let th = t0 + 0.5 * h * (xi + 1.0);
            let x = c - r * th.cos();
            let jac = r * th.sin() * 0.5 * h;
            let v = f(x) * jac * wi;
            if v > 0.0 {
                nodes.push(x);
                weights.push(v);
            }
        }
    }
}

/// Split `[a, b]` at the interior breakpoints, sorted and deduplicated.
pub fn panels(a: f64, b: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().cloned().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    pts.extend(inner);
    pts.push(b);
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn fixed(f: &dyn Fn(f64) -> f64, a: f64, b: f64, gx: &[f64], gw: &[f64]) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    gx.iter().zip(gw).map(|(x, w)| w * f(c + r * x)).sum::<f64>() * r
}

/// Adaptive Gauss–Legendre integration by bisection, splitting at `breaks`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let (gx, gw) = gauss_legendre(20);
    let mut total = 0.0;
    for (pa, pb) in panels(a, b, breaks) {
        let whole = fixed(f, pa, pb, &gx, &gw);
        total += adapt(f, pa, pb, whole, tol, 0, &gx, &gw);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: usize, gx: &[f64], gw: &[f64]) -> f64 {
    let m = 0.5 * (a + b);
    let l = fixed(f, a, m, gx, gw);
    let r = fixed(f, m, b, gx, gw);
    let sum = l + r;
    if depth >= 40 || (sum - whole).abs() <= tol.max(1e-15 * sum.abs()) {
        return sum;
    }
    adapt(f, a, m, l, 0.5 * tol, depth + 1, gx, gw) + adapt(f, m, b, r, 0.5 * tol, depth + 1, gx, gw)
}

/// Integrate `f` on `[a, b]` through the cosine substitution, which handles
/// square-root endpoints with geometric convergence.
pub fn integrate_cosine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut total = 0.0;
    for (pa, pb) in panels(a, b, breaks) {
        let (c, r) = (0.5 * (pa + pb), 0.5 * (pb - pa));
        let g = |th: f64| f(c - r * th.cos()) * r * th.sin();
        total += integrate(&g, 0.0, PI, &[], tol);
    }
    total
}
