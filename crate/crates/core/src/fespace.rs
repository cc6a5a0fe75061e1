//! Continuous Lagrange spaces of order 1 and 2 on a [`Mesh`].

use std::collections::HashMap;
use std::sync::Arc;

use crate::assembly;
use crate::error::{Error, Result};
use crate::mesh::{local_edge_vertices, Mesh};
pub use crate::quadrature::{quadrature_rule, QuadratureRule};
use crate::sparse::{linear_solve, SparsityPattern};

/// Maximum local dofs per triangle (order 2).
pub const MAX_LOCAL_DOFS: usize = 6;

/// Relative residual used for L² projections.
pub const PROJECTION_TOL: f64 = 1e-13;

/// Reference basis values and gradients at `(ξ, η)`.
///
/// Local numbering: vertices 0, 1, 2, then (order 2) the midpoints of the edges
/// (0,1), (1,2), (2,0).
pub fn reference_basis(order: usize, p: [f64; 2]) -> ([f64; MAX_LOCAL_DOFS], [[f64; 2]; MAX_LOCAL_DOFS]) {
    let [x, y] = p;
    let l = [1.0 - x - y, x, y];
    let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut v = [0.0; MAX_LOCAL_DOFS];
    let mut g = [[0.0; 2]; MAX_LOCAL_DOFS];
    match order {
        1 => {
            v[..3].copy_from_slice(&l);
            g[..3].copy_from_slice(&dl);
        }
        2 => {
            for i in 0..3 {
                v[i] = l[i] * (2.0 * l[i] - 1.0);
                let c = 4.0 * l[i] - 1.0;
                g[i] = [c * dl[i][0], c * dl[i][1]];
            }
            for e in 0..3 {
                let (a, b) = (e, (e + 1) % 3);
                v[3 + e] = 4.0 * l[a] * l[b];
                g[3 + e] = [
                    4.0 * (l[b] * dl[a][0] + l[a] * dl[b][0]),
                    4.0 * (l[b] * dl[a][1] + l[a] * dl[b][1]),
                ];
            }
        }
        _ => unreachable!("order validated at construction"),
    }
    (v, g)
}

/// Affine map from the reference triangle onto a mesh triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: [f64; 2],
    /// Columns are the edge vectors `p1 - p0`, `p2 - p0`.
    pub jacobian: [[f64; 2]; 2],
    /// `J^{-T}`, mapping reference gradients to physical ones.
    pub inverse_transpose: [[f64; 2]; 2],
    /// `|det J|` (twice the triangle area).
    pub det: f64,
}

impl ElementGeometry {
    fn new(p: [[f64; 2]; 3]) -> Self {
        let j = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inverse_transpose = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        Self { origin: p[0], jacobian: j, inverse_transpose, det: det.abs() }
    }

    pub fn map(&self, r: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * r[0] + j[0][1] * r[1],
            self.origin[1] + j[1][0] * r[0] + j[1][1] * r[1],
        ]
    }

    #[inline]
    pub fn physical_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inverse_transpose;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }
}

/// Basis values and reference gradients tabulated at the points of a rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub rule: QuadratureRule,
    pub values: Vec<[f64; MAX_LOCAL_DOFS]>,
    pub gradients: Vec<[[f64; 2]; MAX_LOCAL_DOFS]>,
}

impl Tabulation {
    pub fn new(order: usize, rule: QuadratureRule) -> Self {
        let (values, gradients) = (0..rule.len()).map(|q| reference_basis(order, rule.reference_point(q))).unzip();
        Self { rule, values, gradients }
    }
}

/// H¹-conforming Lagrange space of order `r ∈ {1, 2}`.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Mesh,
    order: usize,
    dof_count: usize,
    cell_dofs: Vec<[usize; MAX_LOCAL_DOFS]>,
    dof_coords: Vec<[f64; 2]>,
    geometry: Vec<ElementGeometry>,
    tabulation: Tabulation,
    pattern: SparsityPattern,
    cell_slots: Vec<[usize; MAX_LOCAL_DOFS * MAX_LOCAL_DOFS]>,
}

impl FeSpace {
    /// Builds the space with the default quadrature degree `2r + 2`.
    pub fn new(mesh: Mesh, order: usize) -> Result<Self> {
        Self::with_quadrature_degree(mesh, order, 2 * order + 2)
    }

    pub fn with_quadrature_degree(mesh: Mesh, order: usize, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::Domain(format!("Lagrange order must be 1 or 2, got {order}")));
        }
        let nv = mesh.vertices().len();
        let mut dof_coords = mesh.vertices().to_vec();
        let mut cell_dofs = Vec::with_capacity(mesh.triangles().len());
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in mesh.triangles() {
            let mut dofs = [usize::MAX; MAX_LOCAL_DOFS];
            dofs[..3].copy_from_slice(tri);
            if order == 2 {
                for e in 0..3 {
                    let [a, b] = local_edge_vertices(tri, e);
                    let key = (a.min(b), a.max(b));
                    let next = nv + edge_ids.len();
                    let id = *edge_ids.entry(key).or_insert_with(|| {
                        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                        dof_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                        next
                    });
                    dofs[3 + e] = id;
                }
            }
            cell_dofs.push(dofs);
        }
        let dof_count = dof_coords.len();
        let geometry = (0..mesh.triangles().len()).map(|t| ElementGeometry::new(mesh.triangle_coords(t))).collect();
        let nloc = local_dof_count(order);
        let pattern = SparsityPattern::from_groups(dof_count, cell_dofs.iter().map(|d| &d[..nloc]));
        let cell_slots = cell_dofs
            .iter()
            .map(|d| {
                let mut slots = [usize::MAX; MAX_LOCAL_DOFS * MAX_LOCAL_DOFS];
                for a in 0..nloc {
                    for b in 0..nloc {
                        slots[a * nloc + b] = pattern.slot(d[a], d[b]).expect("pattern covers element couplings");
                    }
                }
                slots
            })
            .collect();
        let tabulation = Tabulation::new(order, quadrature_rule(degree)?);
        Ok(Self {
            mesh,
            order,
            dof_count,
            cell_dofs,
            dof_coords,
            geometry,
            tabulation,
            pattern,
            cell_slots,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn local_dofs(&self) -> usize {
        local_dof_count(self.order)
    }

    pub fn element_count(&self) -> usize {
        self.cell_dofs.len()
    }

    /// Global dofs of element `t` in local order.
    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        &self.cell_dofs[t][..self.local_dofs()]
    }

    pub fn dof_coords(&self) -> &[[f64; 2]] {
        &self.dof_coords
    }

    pub fn geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    /// Tabulation at the default quadrature rule.
    pub fn tabulation(&self) -> &Tabulation {
        &self.tabulation
    }

    pub fn quadrature_degree(&self) -> usize {
        self.tabulation.rule.degree
    }

    /// Tabulation at a rule of another degree.
    pub fn tabulate(&self, degree: usize) -> Result<Tabulation> {
        Ok(Tabulation::new(self.order, quadrature_rule(degree)?))
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    /// CSR slots of the local `nloc × nloc` block of element `t`, row-major.
    pub(crate) fn cell_slots(&self, t: usize) -> &[usize] {
        let n = self.local_dofs();
        &self.cell_slots[t][..n * n]
    }

    /// Local dofs lying on local edge `e`: its two vertices, then its midpoint for order 2.
    pub fn edge_local_dofs(&self, e: usize) -> &'static [usize] {
        const P1: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
        const P2: [[usize; 3]; 3] = [[0, 1, 3], [1, 2, 4], [2, 0, 5]];
        if self.order == 1 {
            &P1[e]
        } else {
            &P2[e]
        }
    }
}

fn local_dof_count(order: usize) -> usize {
    if order == 1 {
        3
    } else {
        6
    }
}

/// Coefficient vector of a finite element function.
#[derive(Debug, Clone)]
pub struct DensityField {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl DensityField {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dof_count() {
            return Err(Error::Domain(format!(
                "field has {} coefficients but the space has {} dofs",
                coeffs.len(),
                space.dof_count()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn constant(space: Arc<FeSpace>, c: f64) -> Self {
        let n = space.dof_count();
        Self { space, coeffs: vec![c; n] }
    }

    /// Nodal interpolant of `w`.
    pub fn interpolate(space: Arc<FeSpace>, w: impl Fn([f64; 2]) -> f64) -> Self {
        let coeffs = space.dof_coords().iter().map(|&x| w(x)).collect();
        Self { space, coeffs }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value and physical gradient at reference point `local_point` of element `t`.
    pub fn evaluate(&self, t: usize, local_point: [f64; 2]) -> (f64, [f64; 2]) {
        let (v, g) = reference_basis(self.space.order(), local_point);
        self.combine(t, &v, &g)
    }

    /// Value and gradient from pre-tabulated reference basis data.
    #[inline]
    pub(crate) fn combine(&self, t: usize, v: &[f64; MAX_LOCAL_DOFS], g: &[[f64; 2]; MAX_LOCAL_DOFS]) -> (f64, [f64; 2]) {
        let dofs = self.space.cell_dofs(t);
        let mut value = 0.0;
        let mut rg = [0.0; 2];
        for (a, &d) in dofs.iter().enumerate() {
            let c = self.coeffs[d];
            value += c * v[a];
            rg[0] += c * g[a][0];
            rg[1] += c * g[a][1];
        }
        (value, self.space.geometry(t).physical_gradient(rg))
    }
}

/// L² projection `πw`: solves `M c = b` with `bᵢ = (w, φᵢ)`.
pub fn l2_project(space: &Arc<FeSpace>, w: impl Fn([f64; 2]) -> f64) -> Result<DensityField> {
    let mass = assembly::mass_matrix(space);
    let rhs = assembly::volume_load(space, |x, _| w(x), 0.0);
    let coeffs = linear_solve(&mass, &rhs, PROJECTION_TOL)?;
    DensityField::new(space.clone(), coeffs)
}
