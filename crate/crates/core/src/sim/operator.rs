//! Divergence-form discrete sub-Laplacian and the conjugate-gradient solve.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridField};
use crate::error::{LabError, Result};

/// Square sparse matrix in compressed row form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseOperator {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub symmetric: bool,
    /// Coefficient of the optional `-eps D_tau^T D_tau` augmentation.
    pub tau_regularization: f64,
}

impl SparseOperator {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut s = 0.0;
            for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[e] * x[self.cols[e]];
            }
            *out = s;
        });
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// `max |A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                worst = worst.max((self.vals[e] - self.get(self.cols[e], r)).abs());
            }
        }
        worst
    }

    /// `x^T A x / x^T x`.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        let ax = self.apply(x);
        dot(x, &ax) / dot(x, x)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One row of a first-order difference operator: `(unknown, coefficient)`.
type DiffRow = Vec<(usize, f64)>;

fn push_entry(row: &mut DiffRow, idx: Option<usize>, c: f64) {
    if let Some(i) = idx {
        if c != 0.0 {
            row.push((i, c));
        }
    }
}

/// Rows of the forward-difference discretizations of `X = d_x + 2y d_tau` and
/// `Y = d_y - 2x d_tau`, plus `sqrt(eps) d_tau` when `eps > 0`.
fn difference_rows(grid: &Grid, eps: f64) -> Vec<DiffRow> {
    let [nx, ny, nt] = grid.counts;
    let (hx, hy, ht) = (grid.spacing(0), grid.spacing(1), grid.spacing(2));
    let mut rows = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nt - 1 {
                let (x, y) = (grid.coord(0, i), grid.coord(1, j));
                if i + 1 < nx {
                    let bx = 2.0 * y / ht;
                    let mut r = DiffRow::new();
                    push_entry(&mut r, grid.index(i, j, k), -1.0 / hx - bx);
                    push_entry(&mut r, grid.index(i + 1, j, k), 1.0 / hx);
                    push_entry(&mut r, grid.index(i, j, k + 1), bx);
                    rows.push(r);
                }
                if j + 1 < ny {
                    let by = -2.0 * x / ht;
                    let mut r = DiffRow::new();
                    push_entry(&mut r, grid.index(i, j, k), -1.0 / hy - by);
                    push_entry(&mut r, grid.index(i, j + 1, k), 1.0 / hy);
                    push_entry(&mut r, grid.index(i, j, k + 1), by);
                    rows.push(r);
                }
                if eps > 0.0 {
                    let c = eps.sqrt() / ht;
                    let mut r = DiffRow::new();
                    push_entry(&mut r, grid.index(i, j, k), -c);
                    push_entry(&mut r, grid.index(i, j, k + 1), c);
                    rows.push(r);
                }
            }
        }
    }
    rows.retain(|r| !r.is_empty());
    rows
}

/// `L_h = -sum (D_X^T D_X + D_Y^T D_Y)` with zero Dirichlet closure; with
/// `eps > 0` the term `-eps D_tau^T D_tau` is added.
///
/// Only the upper triangle is accumulated and then mirrored, so
/// `L_h[i][j] == L_h[j][i]` holds bit for bit.
pub fn assemble_sublaplacian(grid: &Grid, tau_regularization: f64) -> Result<SparseOperator> {
    if !(tau_regularization >= 0.0) || !tau_regularization.is_finite() {
        return Err(LabError::param(
            "tau regularization must be finite and nonnegative",
        ));
    }
    let dim = grid.dim();
    let mut upper: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); dim];
    for row in difference_rows(grid, tau_regularization) {
        for &(a, va) in &row {
            for &(b, vb) in &row {
                if a <= b {
                    *upper[a].entry(b).or_insert(0.0) -= va * vb;
                }
            }
        }
    }
    let mut full: Vec<BTreeMap<usize, f64>> = upper.clone();
    for (a, row) in upper.iter().enumerate() {
        for (&b, &v) in row {
            if b != a {
                full[b].insert(a, v);
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in full {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseOperator {
        dim,
        row_ptr,
        cols,
        vals,
        symmetric: true,
        tau_regularization,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - (-L) x|| / ||b||` at exit.
    pub relative_residual: f64,
}

/// Solves `(-L) x = b` by Jacobi-preconditioned conjugate gradients.
pub fn solve_linear(
    op: &SparseOperator,
    rhs: &GridField,
    tol: f64,
    max_iter: usize,
) -> Result<(GridField, SolveStats)> {
    solve_linear_from(op, rhs, None, tol, max_iter)
}

/// As [`solve_linear`], starting from `guess` when given.
pub fn solve_linear_from(
    op: &SparseOperator,
    rhs: &GridField,
    guess: Option<&GridField>,
    tol: f64,
    max_iter: usize,
) -> Result<(GridField, SolveStats)> {
    if !op.symmetric {
        return Err(LabError::Indefinite("operator is not symmetric".into()));
    }
    if rhs.values.len() != op.dim {
        return Err(LabError::DimensionMismatch {
            expected: op.dim,
            found: rhs.values.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(LabError::param("solver tolerance must be positive"));
    }
    let b = &rhs.values;
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((
            GridField::zeros(rhs.grid),
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = op
        .diagonal()
        .iter()
        .map(|d| {
            if -d > 0.0 {
                Ok(-1.0 / d)
            } else {
                Err(LabError::Indefinite(format!(
                    "nonpositive diagonal entry {}",
                    -d
                )))
            }
        })
        .collect::<Result<_>>()?;

    let neg_apply = |x: &[f64], out: &mut [f64]| {
        op.apply_into(x, out);
        out.iter_mut().for_each(|v| *v = -*v);
    };
    let dim = op.dim;
    let mut x = match guess {
        Some(g) if g.values.len() == dim => g.values.clone(),
        _ => vec![0.0; dim],
    };
    let mut r = vec![0.0; dim];
    neg_apply(&x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; dim];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    loop {
        let rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= tol {
            return Ok((
                GridField {
                    grid: rhs.grid,
                    values: x,
                },
                SolveStats {
                    iterations,
                    relative_residual: rel,
                },
            ));
        }
        if iterations >= max_iter || !rel.is_finite() {
            return Err(LabError::SolverFailure {
                iterations,
                residual: rel,
            });
        }
        neg_apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(LabError::Indefinite(format!(
                "p^T (-L) p = {pap} at iteration {iterations}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..dim {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..dim {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid {
        Grid::new([1.0, 1.0, 1.0], [n, n, n]).unwrap()
    }

    #[test]
    fn exactly_symmetric() {
        for eps in [0.0, 0.1] {
            let op = assemble_sublaplacian(&grid(9), eps).unwrap();
            assert_eq!(op.asymmetry(), 0.0);
        }
    }

    #[test]
    fn negative_definite_on_random_fields() {
        let op = assemble_sublaplacian(&grid(9), 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x: Vec<f64> = (0..op.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(op.rayleigh(&x) < 0.0);
        }
    }

    #[test]
    fn quadratic_in_horizontal_variables_gives_four() {
        let g = Grid::new([2.0, 2.0, 2.0], [16, 16, 16]).unwrap();
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let f = g.sample(|[x, y, _]| x * x + y * y);
        let lf = op.apply(&f.values);
        for idx in 0..g.dim() {
            let (i, j, k) = g.node(idx);
            if (3..13).contains(&i) && (3..13).contains(&j) && (3..13).contains(&k) {
                assert!((lf[idx] - 4.0).abs() < 1e-9, "{}", lf[idx]);
            }
        }
    }

    #[test]
    fn constants_annihilated_away_from_boundary() {
        let g = grid(12);
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let lf = op.apply(&g.sample(|_| 1.0).values);
        for idx in 0..g.dim() {
            let (i, j, k) = g.node(idx);
            if (2..10).contains(&i) && (2..10).contains(&j) && (2..10).contains(&k) {
                assert!(lf[idx].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_rhs_needs_no_iterations() {
        let g = grid(7);
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let (x, st) = solve_linear(&op, &GridField::zeros(g), 1e-10, 100).unwrap();
        assert_eq!(st.iterations, 0);
        assert!(x.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn manufactured_solution_recovered() {
        let g = grid(11);
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let w = g.sample(|[x, y, t]| (x + 0.3 * y * y - t).sin());
        let rhs = GridField {
            grid: g,
            values: op.apply(&w.values).iter().map(|v| -v).collect(),
        };
        let (x, st) = solve_linear(&op, &rhs, 1e-12, 10 * op.dim).unwrap();
        assert!(st.iterations > 0);
        let err = x
            .values
            .iter()
            .zip(&w.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let g = grid(11);
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let rhs = g.sample(|[x, _, _]| x);
        assert!(matches!(
            solve_linear(&op, &rhs, 1e-12, 2),
            Err(LabError::SolverFailure { iterations: 2, .. })
        ));
    }

    #[test]
    fn indefinite_operator_detected() {
        let g = grid(5);
        let mut op = assemble_sublaplacian(&g, 0.0).unwrap();
        op.vals.iter_mut().for_each(|v| *v = -*v);
        let rhs = g.sample(|_| 1.0);
        assert!(matches!(
            solve_linear(&op, &rhs, 1e-10, 100),
            Err(LabError::Indefinite(_))
        ));
    }
}
