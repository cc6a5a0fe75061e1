//! Compressed sparse row matrices and a Jacobi-preconditioned conjugate gradient solver.

use crate::error::{Error, Result};

/// Row-compressed sparsity structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Pattern of the union of dense blocks over each index group.
    pub fn from_groups<'a, I>(n: usize, groups: I) -> Self
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for g in groups {
            for &i in g {
                rows[i].extend_from_slice(g);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx }
    }

    /// Storage slot of `(i, j)`, if structurally present.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }
}

/// Square sparse matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl CsrMatrix {
    /// Compresses `(row, col, value)` triplets. Duplicates are summed in input
    /// order and exact zeros are dropped.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)], symmetric: bool) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut current: Option<(usize, usize, f64)> = None;
        let mut flush = |entry: (usize, usize, f64), col_idx: &mut Vec<usize>, values: &mut Vec<f64>| {
            if entry.2 != 0.0 {
                row_ptr[entry.0 + 1] += 1;
                col_idx.push(entry.1);
                values.push(entry.2);
            }
        };
        for k in order {
            let (i, j, v) = triplets[k];
            assert!(i < n && j < n, "triplet ({i}, {j}) outside a {n}x{n} matrix");
            match current {
                Some((ci, cj, cv)) if ci == i && cj == j => current = Some((ci, cj, cv + v)),
                Some(entry) => {
                    flush(entry, &mut col_idx, &mut values);
                    current = Some((i, j, v));
                }
                None => current = Some((i, j, v)),
            }
        }
        if let Some(entry) = current {
            flush(entry, &mut col_idx, &mut values);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, values, symmetric }
    }

    /// Wraps values laid out on `pattern`.
    pub fn from_pattern(pattern: &SparsityPattern, values: Vec<f64>, symmetric: bool) -> Self {
        assert_eq!(values.len(), pattern.nnz());
        Self {
            n: pattern.n,
            row_ptr: pattern.row_ptr.clone(),
            col_idx: pattern.col_idx.clone(),
            values,
            symmetric,
        }
    }

    /// Drops exact zeros.
    pub fn pruned(self) -> Self {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        row_ptr.push(0);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[k] != 0.0 {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n: self.n, row_ptr, col_idx, values, symmetric: self.symmetric }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Whether the matrix was built as symmetric.
    pub fn is_flagged_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.entries() {
            d[i][j] = v;
        }
        d
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.entries().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max)
    }
}

/// Iteration statistics of a linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for SPD `A` to relative residual `tol`, starting from zero.
pub fn linear_solve(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    linear_solve_from(a, b, &mut x, tol)?;
    Ok(x)
}

/// Jacobi-preconditioned conjugate gradients from the initial guess in `x`.
///
/// Stops once the true residual satisfies `‖b - A x‖ ≤ tol·‖b‖`. The iteration
/// cap is `10·n`.
pub fn linear_solve_from(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64) -> Result<LinearSolveStats> {
    let n = a.dim();
    if b.len() != n || x.len() != n {
        return Err(Error::Domain(format!(
            "linear system of size {n} given vectors of length {} and {}",
            b.len(),
            x.len()
        )));
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(LinearSolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Solver("matrix has a non-positive diagonal entry; not SPD".into()));
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let max_iters = 10 * n.max(1);
    let target = tol * b_norm;

    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    // Restart from the true residual whenever the recursive one claims convergence.
    loop {
        a.mul_vec_into(x, &mut ap);
        for i in 0..n {
            r[i] = b[i] - ap[i];
        }
        let true_res = norm(&r);
        if true_res <= target {
            return Ok(LinearSolveStats { iterations, relative_residual: true_res / b_norm });
        }
        if iterations >= max_iters {
            return Err(Error::Solver(format!(
                "conjugate gradients stalled at relative residual {:.3e} after {iterations} iterations (tol {tol:.1e})",
                true_res / b_norm
            )));
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let start = iterations;
        while iterations < max_iters {
            a.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Solver(format!(
                    "conjugate gradients breakdown (p.Ap = {pap:.3e}); matrix not SPD"
                )));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            if norm(&r) <= 0.5 * target {
                break;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if iterations == start {
            return Err(Error::Solver("conjugate gradients made no progress".into()));
        }
    }
}
