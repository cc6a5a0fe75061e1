//! Discrete operators of the backward Euler Galerkin scheme.
//!
//! Element contributions are summed sequentially in element order onto the
//! space's sparsity pattern, so identical inputs give bitwise-identical output.

use crate::error::Result;
use crate::fespace::{DensityField, FeSpace, MAX_LOCAL_DOFS};
use crate::law::GeneralizedPolynomial;
use crate::quadrature::gauss_legendre_unit;
use crate::sparse::CsrMatrix;

pub use crate::sparse::CsrMatrix as SparseMatrix;

/// Gauss points per boundary facet.
pub const BOUNDARY_QUAD_POINTS: usize = 4;

const LOCAL_BLOCK: usize = MAX_LOCAL_DOFS * MAX_LOCAL_DOFS;

/// Sums element blocks produced by `local` onto the space's pattern.
fn assemble_on_pattern<F>(space: &FeSpace, mut local: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, &mut [f64; LOCAL_BLOCK]) -> Result<()>,
{
    let mut values = vec![0.0; space.pattern().nnz()];
    let n = space.local_dofs();
    let mut block = [0.0; LOCAL_BLOCK];
    for t in 0..space.element_count() {
        block.fill(0.0);
        local(t, &mut block)?;
        for (k, &slot) in space.cell_slots(t).iter().enumerate().take(n * n) {
            values[slot] += block[k];
        }
    }
    Ok(values)
}

/// Physical gradients of the local basis at tabulation point `q` of element `t`.
#[inline]
fn basis_gradients(space: &FeSpace, t: usize, q: usize) -> [[f64; 2]; MAX_LOCAL_DOFS] {
    let geo = space.geometry(t);
    let g = &space.tabulation().gradients[q];
    let mut out = [[0.0; 2]; MAX_LOCAL_DOFS];
    for a in 0..space.local_dofs() {
        out[a] = geo.physical_gradient(g[a]);
    }
    out
}

pub(crate) fn mass_values(space: &FeSpace) -> Vec<f64> {
    let n = space.local_dofs();
    let tab = space.tabulation();
    assemble_on_pattern(space, |t, block| {
        let det = space.geometry(t).det;
        for q in 0..tab.rule.len() {
            let w = tab.rule.weights[q] * det;
            let v = &tab.values[q];
            for a in 0..n {
                for b in 0..n {
                    block[a * n + b] += w * v[a] * v[b];
                }
            }
        }
        Ok(())
    })
    .expect("mass assembly is infallible")
}

/// `Mᵢⱼ = (φⱼ, φᵢ)`.
pub fn mass_matrix(space: &FeSpace) -> SparseMatrix {
    CsrMatrix::from_pattern(space.pattern(), mass_values(space), true).pruned()
}

/// Frozen-coefficient stiffness values `(K(|∇ρ*|)∇φⱼ, ∇φᵢ)` on the space's pattern.
pub(crate) fn picard_values(space: &FeSpace, law: &GeneralizedPolynomial, frozen: &DensityField) -> Result<Vec<f64>> {
    let n = space.local_dofs();
    let tab = space.tabulation();
    assemble_on_pattern(space, |t, block| {
        let det = space.geometry(t).det;
        for q in 0..tab.rule.len() {
            let (_, g) = frozen.combine(t, &tab.values[q], &tab.gradients[q]);
            let k = law.eval_k(g[0].hypot(g[1]))?;
            let w = tab.rule.weights[q] * det * k;
            let dphi = basis_gradients(space, t, q);
            for a in 0..n {
                for b in 0..n {
                    block[a * n + b] += w * (dphi[a][0] * dphi[b][0] + dphi[a][1] * dphi[b][1]);
                }
            }
        }
        Ok(())
    })
}

/// `Aᵢⱼ = (K(|∇ρ*|)∇φⱼ, ∇φᵢ)` with `K` frozen at `frozen`.
pub fn picard_matrix(space: &FeSpace, law: &GeneralizedPolynomial, frozen: &DensityField) -> Result<SparseMatrix> {
    Ok(CsrMatrix::from_pattern(space.pattern(), picard_values(space, law, frozen)?, true).pruned())
}

/// Jacobian of the nonlinear stiffness: `(D(∇ρ)∇φⱼ, ∇φᵢ)` with
/// `D(y) = K(|y|) I + K'(|y|)|y| ŷŷᵀ`, symmetric positive definite.
pub(crate) fn newton_values(space: &FeSpace, law: &GeneralizedPolynomial, field: &DensityField) -> Result<Vec<f64>> {
    let n = space.local_dofs();
    let tab = space.tabulation();
    assemble_on_pattern(space, |t, block| {
        let det = space.geometry(t).det;
        for q in 0..tab.rule.len() {
            let (_, g) = field.combine(t, &tab.values[q], &tab.gradients[q]);
            let norm = g[0].hypot(g[1]);
            let (k, kpx) = law.eval_k_and_k_prime_xi(norm)?;
            let u = if norm > 0.0 { [g[0] / norm, g[1] / norm] } else { [0.0, 0.0] };
            let d = [
                [k + kpx * u[0] * u[0], kpx * u[0] * u[1]],
                [kpx * u[1] * u[0], k + kpx * u[1] * u[1]],
            ];
            let w = tab.rule.weights[q] * det;
            let dphi = basis_gradients(space, t, q);
            for b in 0..n {
                let db = [
                    d[0][0] * dphi[b][0] + d[0][1] * dphi[b][1],
                    d[1][0] * dphi[b][0] + d[1][1] * dphi[b][1],
                ];
                for a in 0..n {
                    block[a * n + b] += w * (dphi[a][0] * db[0] + dphi[a][1] * db[1]);
                }
            }
        }
        Ok(())
    })
}

pub fn newton_matrix(space: &FeSpace, law: &GeneralizedPolynomial, field: &DensityField) -> Result<SparseMatrix> {
    Ok(CsrMatrix::from_pattern(space.pattern(), newton_values(space, law, field)?, true).pruned())
}

/// `rᵢ = (K(|∇ρ|)∇ρ, ∇φᵢ)`.
pub fn stiffness_apply(space: &FeSpace, law: &GeneralizedPolynomial, field: &DensityField) -> Result<Vec<f64>> {
    let n = space.local_dofs();
    let tab = space.tabulation();
    let mut out = vec![0.0; space.dof_count()];
    for t in 0..space.element_count() {
        let det = space.geometry(t).det;
        let dofs = space.cell_dofs(t);
        let mut local = [0.0; MAX_LOCAL_DOFS];
        for q in 0..tab.rule.len() {
            let (_, g) = field.combine(t, &tab.values[q], &tab.gradients[q]);
            let k = law.eval_k(g[0].hypot(g[1]))?;
            let w = tab.rule.weights[q] * det * k;
            let dphi = basis_gradients(space, t, q);
            for a in 0..n {
                local[a] += w * (g[0] * dphi[a][0] + g[1] * dphi[a][1]);
            }
        }
        for a in 0..n {
            out[dofs[a]] += local[a];
        }
    }
    Ok(out)
}

/// `bᵢ = (f(·, t), φᵢ)`.
pub fn volume_load(space: &FeSpace, f: impl Fn([f64; 2], f64) -> f64, t: f64) -> Vec<f64> {
    let n = space.local_dofs();
    let tab = space.tabulation();
    let mut out = vec![0.0; space.dof_count()];
    for e in 0..space.element_count() {
        let geo = space.geometry(e);
        let dofs = space.cell_dofs(e);
        let mut local = [0.0; MAX_LOCAL_DOFS];
        for q in 0..tab.rule.len() {
            let x = geo.map(tab.rule.reference_point(q));
            let w = tab.rule.weights[q] * geo.det * f(x, t);
            for a in 0..n {
                local[a] += w * tab.values[q][a];
            }
        }
        for a in 0..n {
            out[dofs[a]] += local[a];
        }
    }
    out
}

/// Trace of the basis along a facet, parametrized from its first to second vertex.
fn edge_basis(order: usize, s: f64) -> [f64; 3] {
    if order == 1 {
        [1.0 - s, s, 0.0]
    } else {
        [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)]
    }
}

/// `cᵢ = ⟨ψ(·, t), φᵢ⟩` over the boundary; `psi` also receives the outward normal of
/// the facet, so data defined edge by edge can be selected.
pub fn boundary_load(space: &FeSpace, psi: impl Fn([f64; 2], f64, [f64; 2]) -> f64, t: f64) -> Vec<f64> {
    let mesh = space.mesh();
    let (nodes, weights) = gauss_legendre_unit(BOUNDARY_QUAD_POINTS);
    let mut out = vec![0.0; space.dof_count()];
    for facet in mesh.boundary_facets() {
        let [a, b] = facet.vertices.map(|v| mesh.vertices()[v]);
        let length = mesh.facet_length(facet);
        let local = space.edge_local_dofs(facet.local_edge);
        let dofs = space.cell_dofs(facet.triangle);
        for (s, w) in nodes.iter().zip(&weights) {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let val = w * length * psi(x, t, facet.normal);
            let phi = edge_basis(space.order(), *s);
            for (k, &l) in local.iter().enumerate() {
                out[dofs[l]] += val * phi[k];
            }
        }
    }
    out
}
