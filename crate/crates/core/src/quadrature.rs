//! Quadrature rules: Gauss–Legendre on intervals, collapsed (Duffy) product
//! rules on the reference triangle, and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};

/// Largest polynomial degree for which a triangle rule can be requested.
pub const MAX_TRIANGLE_DEGREE: usize = 40;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (pn, pn1) = legendre_pair(n, x);
            let dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (pn, pn1) = legendre_pair(n, x);
        let dp = nf * (x * pn - pn1) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Returns `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|w| 0.5 * w).collect(),
    )
}

/// Quadrature rule on the reference triangle with vertices (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(λ0, λ1, λ2)` of each point.
    pub points: Vec<[f64; 3]>,
    /// Positive weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// Reference coordinates `(ξ, η) = (λ1, λ2)` of point `i`.
    pub fn reference_point(&self, i: usize) -> [f64; 2] {
        [self.points[i][1], self.points[i][2]]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Collapsed Gauss product rule exact for polynomials of total degree `degree`.
///
/// The square `[0,1]²` is mapped onto the triangle by `(u, v) ↦ (u, v(1-u))`.
/// A monomial `x^a y^b` becomes `u^a (1-u)^(b+1) v^b`, so `n = ⌈(degree+2)/2⌉`
/// Gauss points per direction suffice.
pub fn quadrature_rule(degree: usize) -> Result<QuadratureRule> {
    if degree == 0 || degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::Domain(format!(
            "triangle quadrature degree must lie in 1..={MAX_TRIANGLE_DEGREE}, got {degree}"
        )));
    }
    let n = (degree + 3) / 2;
    let (nodes, weights) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut w = Vec::with_capacity(n * n);
    for (u, wu) in nodes.iter().zip(&weights) {
        for (v, wv) in nodes.iter().zip(&weights) {
            let x = *u;
            let y = v * (1.0 - u);
            points.push([1.0 - x - y, x, y]);
            w.push(wu * wv * (1.0 - u));
        }
    }
    Ok(QuadratureRule { points, weights: w, degree })
}

// Kronrod 15-point nodes (non-negative half) and weights, with the embedded
// 7-point Gauss weights for the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel on `[a, b]`: returns (Kronrod estimate, |K15 - G7|).
fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Panels with the largest error estimate are bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MAX_PANELS: usize = 4000;
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Solver("non-finite integrand in adaptive quadrature".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Solver(format!(
                "adaptive quadrature did not reach tolerance (error estimate {err:.3e}, integral {total:.3e})"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}
