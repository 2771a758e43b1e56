//! Sparse saddle-point systems: triplet assembly and direct solves.
//!
//! Factorization is delegated to faer's sparse LU with partial pivoting,
//! followed by a few steps of iterative refinement and a residual check.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

use crate::error::{Error, Result};

/// Relative residual required of every solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SparseSystem {
    dim: usize,
    /// Compressed columns: `col_ptr[j]..col_ptr[j+1]` index `row_idx`/`values`.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Sums duplicate `(row, col, value)` entries and `(row, value)` load
    /// contributions into a compressed matrix.
    pub fn assemble(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
        loads: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in entries {
            check_index(r, dim)?;
            check_index(c, dim)?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "matrix entry",
                    value: v,
                });
            }
            trip.push((r, c, v));
        }
        let mut rhs = vec![0.0; dim];
        for (r, v) in loads {
            check_index(r, dim)?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "load entry",
                    value: v,
                });
            }
            rhs[r] += v;
        }
        // stable sort keeps the summation order deterministic
        trip.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; dim + 1];
        let mut row_idx = Vec::with_capacity(trip.len());
        let mut values: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for j in 0..dim {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(SparseSystem {
            dim,
            col_ptr,
            row_idx,
            values,
            rhs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates the stored `(row, col, value)` entries column by column.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        match self.row_idx[range.clone()].binary_search(&r) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
        }
        y
    }

    /// True if the sparsity pattern and values are symmetric up to `tol`
    /// relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        self.entries()
            .all(|(r, c, v)| (v - self.get(c, r)).abs() <= tol * scale)
    }

    /// Replaces row and column `dof` by the identity so the unknown is fixed to zero.
    pub fn pin(&mut self, dof: usize) -> Result<()> {
        check_index(dof, self.dim)?;
        for c in 0..self.dim {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                if r == dof || c == dof {
                    self.values[k] = if r == c { 1.0 } else { 0.0 };
                }
            }
        }
        if self.get(dof, dof) != 1.0 {
            // the diagonal was structurally absent
            let entries: Vec<_> = self.entries().chain([(dof, dof, 1.0)]).collect();
            let rhs = std::mem::take(&mut self.rhs);
            *self = SparseSystem::assemble(self.dim, entries, [])?;
            self.rhs = rhs;
        }
        self.rhs[dof] = 0.0;
        Ok(())
    }

    /// `‖Ax - b‖ / max(‖b‖, tiny)`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let r = norm2(ax.iter().zip(&self.rhs).map(|(a, b)| a - b));
        let b = norm2(self.rhs.iter().copied());
        if b > 0.0 {
            r / b
        } else {
            r
        }
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let trip: Vec<_> = self.entries().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &trip).map_err(|e| Error::Singular {
            pivot: 0,
            detail: format!("{e:?}"),
        })
    }
}

fn check_index(i: usize, len: usize) -> Result<()> {
    if i < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, len })
    }
}

fn norm2(it: impl Iterator<Item = f64>) -> f64 {
    it.map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves `Ax = b` by sparse LU with iterative refinement.
///
/// Structural singularity is reported with the offending column; numerical
/// breakdown with the first non-finite solution entry.
pub fn solve(system: &SparseSystem) -> Result<Vec<f64>> {
    let n = system.dim;
    if n == 0 {
        return Ok(Vec::new());
    }
    if system.rhs.iter().all(|&v| v == 0.0) {
        // still factor so singular systems are reported
        factor(system)?;
        return Ok(vec![0.0; n]);
    }
    let lu = factor(system)?;
    let solve_with = |b: &[f64]| -> Vec<f64> {
        let b = Col::<f64>::from_fn(n, |i| b[i]);
        let x = lu.solve(&b);
        (0..n).map(|i| x[i]).collect()
    };
    let mut x = solve_with(&system.rhs);
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Singular {
            pivot: i,
            detail: "numerically singular factorization".into(),
        });
    }
    let mut res = system.relative_residual(&x);
    for _ in 0..3 {
        if res <= 1e-14 {
            break;
        }
        let ax = system.matvec(&x);
        let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = solve_with(&r);
        let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let cres = system.relative_residual(&cand);
        if !(cres < res) {
            break;
        }
        x = cand;
        res = cres;
    }
    if !(res <= RESIDUAL_TOL) {
        return Err(Error::Residual {
            residual: res,
            tolerance: RESIDUAL_TOL,
        });
    }
    Ok(x)
}

fn factor(system: &SparseSystem) -> Result<faer::sparse::linalg::solvers::Lu<usize, f64>> {
    let a = system.to_faer()?;
    a.sp_lu().map_err(|e| match e {
        faer::sparse::linalg::LuError::SymbolicSingular { index } => Error::Singular {
            pivot: index,
            detail: "structurally singular".into(),
        },
        other => Error::Singular {
            pivot: 0,
            detail: format!("{other:?}"),
        },
    })
}
