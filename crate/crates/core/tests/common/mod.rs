//! Dense brute-force oracles shared by the integration tests.
//!
//! Basis functions are written in barycentric form and gradients are taken from
//! the physical vertex coordinates, so nothing here reuses the library's reference
//! element, Jacobians, sparsity pattern or root solver. Only the quadrature points
//! are shared: the nonlinear integrands cannot be matched to 1e-12 otherwise.

#![allow(dead_code)]

use std::sync::Arc;

use forchheimer::fespace::{quadrature_rule, FeSpace};
use forchheimer::mesh::Mesh;
use nalgebra::{DMatrix, DVector};

pub fn space(n: usize, r: usize) -> Arc<FeSpace> {
    Arc::new(FeSpace::new(Mesh::unit_square(n).unwrap(), r).unwrap())
}

/// Closed-form kernel of `g(s) = 1 + s`.
pub fn kernel(xi: f64) -> f64 {
    2.0 / (1.0 + (1.0 + 4.0 * xi).sqrt())
}

/// Barycentric data of one triangle.
pub struct Tri {
    pub p: [[f64; 2]; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl Tri {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let grad_lambda = [
            [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
            [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
            [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
        ];
        Self { p, area: 0.5 * det.abs(), grad_lambda }
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        [
            l[0] * self.p[0][0] + l[1] * self.p[1][0] + l[2] * self.p[2][0],
            l[0] * self.p[0][1] + l[1] * self.p[1][1] + l[2] * self.p[2][1],
        ]
    }

    /// Values and physical gradients of the local basis at barycentric point `l`.
    pub fn basis(&self, order: usize, l: [f64; 3]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let gl = &self.grad_lambda;
        let mut v = Vec::new();
        let mut g = Vec::new();
        if order == 1 {
            for a in 0..3 {
                v.push(l[a]);
                g.push(gl[a]);
            }
        } else {
            for a in 0..3 {
                v.push(l[a] * (2.0 * l[a] - 1.0));
                let c = 4.0 * l[a] - 1.0;
                g.push([c * gl[a][0], c * gl[a][1]]);
            }
            for e in 0..3 {
                let (a, b) = (e, (e + 1) % 3);
                v.push(4.0 * l[a] * l[b]);
                g.push([
                    4.0 * (l[a] * gl[b][0] + l[b] * gl[a][0]),
                    4.0 * (l[a] * gl[b][1] + l[b] * gl[a][1]),
                ]);
            }
        }
        (v, g)
    }
}

fn triangles(space: &FeSpace) -> Vec<Tri> {
    (0..space.element_count()).map(|t| Tri::new(space.mesh().triangle_coords(t))).collect()
}

fn rule(space: &FeSpace) -> (Vec<[f64; 3]>, Vec<f64>) {
    rule_of_degree(space.quadrature_degree())
}

fn rule_of_degree(degree: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let r = quadrature_rule(degree).unwrap();
    (r.points, r.weights)
}

/// Dense mass matrix.
pub fn dense_mass(space: &FeSpace) -> DMatrix<f64> {
    let n = space.dof_count();
    let mut m = DMatrix::zeros(n, n);
    let (pts, wts) = rule(space);
    for (t, tri) in triangles(space).iter().enumerate() {
        let dofs = space.cell_dofs(t);
        for (l, w) in pts.iter().zip(&wts) {
            let (v, _) = tri.basis(space.order(), *l);
            for a in 0..dofs.len() {
                for b in 0..dofs.len() {
                    m[(dofs[a], dofs[b])] += 2.0 * tri.area * w * v[a] * v[b];
                }
            }
        }
    }
    m
}

/// Gradient of the field with coefficients `c` at barycentric point `l` of triangle `t`.
pub fn field_gradient(space: &FeSpace, tri: &Tri, t: usize, c: &[f64], l: [f64; 3]) -> [f64; 2] {
    let (_, g) = tri.basis(space.order(), l);
    let mut out = [0.0; 2];
    for (a, &d) in space.cell_dofs(t).iter().enumerate() {
        out[0] += c[d] * g[a][0];
        out[1] += c[d] * g[a][1];
    }
    out
}

/// Dense `A(c)` with the two-term kernel frozen at the field `c`.
pub fn dense_picard(space: &FeSpace, c: &[f64]) -> DMatrix<f64> {
    let n = space.dof_count();
    let mut a = DMatrix::zeros(n, n);
    let (pts, wts) = rule(space);
    for (t, tri) in triangles(space).iter().enumerate() {
        let dofs = space.cell_dofs(t);
        for (l, w) in pts.iter().zip(&wts) {
            let gr = field_gradient(space, tri, t, c, *l);
            let k = kernel(gr[0].hypot(gr[1]));
            let (_, g) = tri.basis(space.order(), *l);
            for i in 0..dofs.len() {
                for j in 0..dofs.len() {
                    a[(dofs[i], dofs[j])] += 2.0 * tri.area * w * k * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
    }
    a
}

/// Dense volume load of `f(·, t)` with the space's quadrature degree.
pub fn dense_volume_load(space: &FeSpace, f: &dyn Fn([f64; 2], f64) -> f64, t: f64) -> DVector<f64> {
    dense_volume_load_with_degree(space, f, t, space.quadrature_degree())
}

pub fn dense_volume_load_with_degree(space: &FeSpace, f: &dyn Fn([f64; 2], f64) -> f64, t: f64, degree: usize) -> DVector<f64> {
    let mut b = DVector::zeros(space.dof_count());
    let (pts, wts) = rule_of_degree(degree);
    for (e, tri) in triangles(space).iter().enumerate() {
        let dofs = space.cell_dofs(e);
        for (l, w) in pts.iter().zip(&wts) {
            let (v, _) = tri.basis(space.order(), *l);
            let fx = f(tri.point(*l), t);
            for a in 0..dofs.len() {
                b[dofs[a]] += 2.0 * tri.area * w * fx * v[a];
            }
        }
    }
    b
}

/// Four-point Gauss rule on [0, 1].
pub const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Dense boundary load `⟨ψ(·, t), φᵢ⟩`. Boundary edges are found by counting
/// edge uses, and each edge dof is evaluated through the full 2D basis.
pub fn dense_boundary_load(space: &FeSpace, psi: &dyn Fn([f64; 2], f64, [f64; 2]) -> f64, t: f64) -> DVector<f64> {
    use std::collections::HashMap;
    let mesh = space.mesh();
    let mut uses: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in mesh.triangles() {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut c = DVector::zeros(space.dof_count());
    for (t_idx, tri) in mesh.triangles().iter().enumerate() {
        let geo = Tri::new(mesh.triangle_coords(t_idx));
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if uses[&(a.min(b), a.max(b))] != 1 {
                continue;
            }
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let length = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
            for (s, w) in GAUSS4 {
                let mut l = [0.0; 3];
                l[e] = 1.0 - s;
                l[(e + 1) % 3] = s;
                let x = geo.point(l);
                let (v, _) = geo.basis(space.order(), l);
                let val = w * length * psi(x, t, normal);
                for (k, &d) in space.cell_dofs(t_idx).iter().enumerate() {
                    c[d] += val * v[k];
                }
            }
        }
    }
    c
}

/// One backward Euler step by dense fixed-point iteration, converged to `1e-14`.
pub fn dense_step(
    space: &FeSpace,
    prev: &[f64],
    t: f64,
    dt: f64,
    f: &dyn Fn([f64; 2], f64) -> f64,
    psi: &dyn Fn([f64; 2], f64, [f64; 2]) -> f64,
) -> Vec<f64> {
    let m = dense_mass(space) / dt;
    let rhs = &m * DVector::from_column_slice(prev) + dense_volume_load(space, f, t) - dense_boundary_load(space, psi, t);
    let mut c = DVector::from_column_slice(prev);
    for _ in 0..500 {
        let system = &m + dense_picard(space, c.as_slice());
        let next = system.lu().solve(&rhs).expect("nonsingular");
        let change = (&next - &c).amax();
        c = next;
        if change < 1e-14 {
            break;
        }
    }
    c.as_slice().to_vec()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
