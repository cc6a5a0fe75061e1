//! Structured triangulation of the unit square.

use std::collections::HashSet;
use std::io::Write;

use crate::error::{Error, Result};

/// A boundary edge with its owning triangle and outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFacet {
    /// Edge endpoints, in the counter-clockwise order of the owning triangle.
    pub vertices: [usize; 2],
    pub triangle: usize,
    /// Local edge index in the owning triangle: 0 = (v0,v1), 1 = (v1,v2), 2 = (v2,v0).
    pub local_edge: usize,
    pub normal: [f64; 2],
}

/// Conforming triangulation of `[0,1]²` built from an `N×N` grid of squares.
#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_facets: Vec<BoundaryFacet>,
}

/// Vertex pair of local edge `e` of a triangle.
pub fn local_edge_vertices(tri: &[usize; 3], e: usize) -> [usize; 2] {
    [tri[e], tri[(e + 1) % 3]]
}

impl Mesh {
    /// Splits each grid cell along its lower-left to upper-right diagonal.
    ///
    /// Vertex `(i, j)` sits at `(i/N, j/N)` with index `j(N+1) + i`. Cell `(i, j)` owns
    /// triangles `2(jN+i)` (below the diagonal) and `2(jN+i)+1` (above it), both
    /// counter-clockwise.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("mesh subdivision count N must be at least 1".into()));
        }
        let stride = n + 1;
        let nf = n as f64;
        let mut vertices = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / nf, j as f64 / nf]);
            }
        }
        let vid = |i: usize, j: usize| j * stride + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let lower = |i: usize, j: usize| 2 * (j * n + i);
        let mut boundary_facets = Vec::with_capacity(4 * n);
        let mut push = |triangle: usize, local_edge: usize, normal: [f64; 2]| {
            let vertices = local_edge_vertices(&triangles[triangle], local_edge);
            boundary_facets.push(BoundaryFacet { vertices, triangle, local_edge, normal });
        };
        for i in 0..n {
            push(lower(i, 0), 0, [0.0, -1.0]);
        }
        for j in 0..n {
            push(lower(n - 1, j), 1, [1.0, 0.0]);
        }
        for i in (0..n).rev() {
            push(lower(i, n - 1) + 1, 1, [0.0, 1.0]);
        }
        for j in (0..n).rev() {
            push(lower(0, j) + 1, 2, [-1.0, 0.0]);
        }
        Ok(Self { n, vertices, triangles, boundary_facets })
    }

    /// Subdivisions per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    /// Signed area (positive for counter-clockwise triangles).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_coords(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.triangle_coords(t);
        (0..3)
            .map(|e| {
                let (a, b) = (p[e], p[(e + 1) % 3]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Mesh size `h = max diameter = √2 / N`.
    pub fn h(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    pub fn facet_length(&self, f: &BoundaryFacet) -> f64 {
        let [a, b] = f.vertices.map(|v| self.vertices[v]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        let mut edges = HashSet::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let [a, b] = local_edge_vertices(tri, e);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// Writes `v x y` lines followed by `t i j k` lines.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn counts() {
        let m = Mesh::unit_square(1).unwrap();
        assert_eq!((m.triangles().len(), m.vertices().len(), m.boundary_facets().len()), (2, 4, 4));
        let m = Mesh::unit_square(4).unwrap();
        assert_eq!((m.triangles().len(), m.vertices().len(), m.boundary_facets().len()), (32, 25, 16));
        assert!(matches!(Mesh::unit_square(0), Err(Error::Domain(_))));
    }

    #[test]
    fn area_orientation_and_size() {
        for n in [1, 3, 8] {
            let m = Mesh::unit_square(n).unwrap();
            let total: f64 = (0..m.triangles().len()).map(|t| m.signed_area(t)).sum();
            assert!((total - 1.0).abs() < 1e-14);
            assert!((0..m.triangles().len()).all(|t| m.signed_area(t) > 0.0));
            assert!((m.h() - 2f64.sqrt() / n as f64).abs() < 1e-15);
            let dmin = (0..m.triangles().len()).map(|t| m.diameter(t)).fold(f64::INFINITY, f64::min);
            assert!((m.h() / dmin - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_relation_and_conformity() {
        for n in [1, 2, 5] {
            let m = Mesh::unit_square(n).unwrap();
            let (v, e, f) = (m.vertices().len() as i64, m.edge_count() as i64, m.triangles().len() as i64);
            assert_eq!(v - e + f, 1);
            let mut uses: HashMap<(usize, usize), usize> = HashMap::new();
            for tri in m.triangles() {
                for k in 0..3 {
                    let [a, b] = local_edge_vertices(tri, k);
                    *uses.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
            let boundary = uses.values().filter(|&&c| c == 1).count();
            assert!(uses.values().all(|&c| c == 1 || c == 2));
            assert_eq!(boundary, 4 * n);
        }
    }

    #[test]
    fn boundary_facets_and_normals() {
        let m = Mesh::unit_square(4).unwrap();
        let total: f64 = m.boundary_facets().iter().map(|f| m.facet_length(f)).sum();
        assert!((total - 4.0).abs() < 1e-14);
        for f in m.boundary_facets() {
            assert!((m.facet_length(f) - 0.25).abs() < 1e-15);
            let [a, b] = f.vertices.map(|v| m.vertices()[v]);
            let n = f.normal;
            assert_eq!(n[0].abs() + n[1].abs(), 1.0);
            // The facet lies on the side its normal points to.
            if n == [-1.0, 0.0] {
                assert!(a[0] == 0.0 && b[0] == 0.0);
            }
            if n == [1.0, 0.0] {
                assert!(a[0] == 1.0 && b[0] == 1.0);
            }
            if n == [0.0, -1.0] {
                assert!(a[1] == 0.0 && b[1] == 0.0);
            }
            if n == [0.0, 1.0] {
                assert!(a[1] == 1.0 && b[1] == 1.0);
            }
            // Counter-clockwise traversal keeps the outward normal on the right.
            let tangent = [b[0] - a[0], b[1] - a[1]];
            assert!(tangent[1] * n[0] - tangent[0] * n[1] > 0.0);
        }
        let m1 = Mesh::unit_square(1).unwrap();
        assert!(m1.boundary_facets().iter().all(|f| (m1.facet_length(f) - 1.0).abs() < 1e-15));
    }

    #[test]
    fn dump_format() {
        let m = Mesh::unit_square(1).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "v 0 0");
        assert_eq!(lines[3], "v 1 1");
        assert_eq!(lines[4], "t 0 1 3");
        assert_eq!(lines[5], "t 0 3 2");
    }
}
