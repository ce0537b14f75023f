//! Dense decompositions used throughout the crate.
//!
//! Thin wrappers over `nalgebra` that fix the conventions the set calculus
//! relies on: singular values and eigenvalues are always sorted in
//! descending order, and decompositions of empty matrices are well defined.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative singular-value cutoff used when callers have no better choice.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Asymmetry tolerated by [`sym_eig`] before it refuses the input.
pub const SYMMETRY_TOL: f64 = 1e-8;

const SVD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: Matrix,
    /// Descending.
    pub sigma: Vector,
    /// `cols x k` with orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        &self.u * Matrix::from_diagonal(&self.sigma) * self.v.transpose()
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let Some(&top) = self.sigma.as_slice().first() else {
            return 0;
        };
        self.sigma.iter().filter(|&&s| s > rel_tol * top).count()
    }
}

pub fn svd(m: &Matrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            sigma: Vector::zeros(0),
            v: Matrix::zeros(cols, 0),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("svd input has non-finite entries".into()));
    }
    let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical("svd did not converge".into()))?;
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));

    let sigma = Vector::from_iterator(k, order.iter().map(|&i| dec.singular_values[i]));
    let u = Matrix::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>());
    let v = Matrix::from_columns(
        &order
            .iter()
            .map(|&i| v_t.row(i).transpose())
            .collect::<Vec<_>>(),
    );
    Ok(Svd { u, sigma, v })
}

/// Moore-Penrose pseudoinverse, truncating singular values below `tol * sigma_1`.
///
/// Never fails: if the decomposition does not converge the pseudoinverse is
/// taken from the normal equations instead.
pub fn pinv(m: &Matrix, tol: f64) -> Matrix {
    let (rows, cols) = m.shape();
    let dec = match svd(m) {
        Ok(dec) => dec,
        Err(_) => return pinv_normal_equations(m),
    };
    let Some(&top) = dec.sigma.as_slice().first() else {
        return Matrix::zeros(cols, rows);
    };
    let cutoff = tol.max(0.0) * top;
    let mut out = Matrix::zeros(cols, rows);
    for (i, &s) in dec.sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += dec.v.column(i) * dec.u.column(i).transpose() / s;
        }
    }
    out
}

fn pinv_normal_equations(m: &Matrix) -> Matrix {
    let gram = m * m.transpose();
    match gram.clone().try_inverse() {
        Some(inv) => m.transpose() * inv,
        None => Matrix::zeros(m.ncols(), m.nrows()),
    }
}

#[derive(Debug, Clone)]
pub struct SymEig {
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: Matrix,
    /// Descending.
    pub values: Vector,
}

pub fn sym_eig(s: &Matrix) -> Result<SymEig> {
    let n = s.nrows();
    Error::check_dim("sym_eig", n, s.ncols())?;
    if n == 0 {
        return Ok(SymEig {
            vectors: Matrix::zeros(0, 0),
            values: Vector::zeros(0),
        });
    }
    let scale = s.amax().max(1.0);
    let asymmetry = (s - s.transpose()).amax();
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let sym = (s + s.transpose()) * 0.5;
    if sym.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("sym_eig input has non-finite entries".into()));
    }
    let dec = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[b].total_cmp(&dec.eigenvalues[a]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| dec.eigenvalues[i]));
    let vectors = Matrix::from_columns(
        &order
            .iter()
            .map(|&i| dec.eigenvectors.column(i))
            .collect::<Vec<_>>(),
    );
    Ok(SymEig { vectors, values })
}

/// `||P^T P - I||_F`.
pub fn orthogonality_residual(p: &Matrix) -> f64 {
    let n = p.ncols();
    (p.transpose() * p - Matrix::identity(n, n)).norm()
}

pub fn check_orthogonal(p: &Matrix, tol: f64) -> Result<()> {
    if !p.is_square() {
        return Err(Error::dim("orthogonality check", p.nrows(), p.ncols()));
    }
    let residual = orthogonality_residual(p);
    if residual.is_finite() && residual <= tol {
        Ok(())
    } else {
        Err(Error::NotOrthogonal { residual })
    }
}

/// `S^{-1/2}` for a symmetric positive definite `S`.
pub fn inv_sqrt_spd(s: &Matrix) -> Result<Matrix> {
    let eig = sym_eig(s)?;
    if eig.values.iter().any(|&l| l <= 0.0) {
        return Err(Error::Numerical("matrix is not positive definite".into()));
    }
    let d = Matrix::from_diagonal(&eig.values.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.vectors * d * eig.vectors.transpose())
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Matrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// `[a b]`; both must have the same row count.
pub fn hstack(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut out = Matrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `[a; b]`; both must have the same column count.
pub fn vstack(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.ncols(), b.ncols());
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Row-major constructor that checks the entry count.
pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Matrix> {
    Error::check_dim("matrix entries", rows * cols, entries.len())?;
    Ok(Matrix::from_row_slice(rows, cols, entries))
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    for row in rows {
        Error::check_dim("matrix row length", c, row.len())?;
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}
