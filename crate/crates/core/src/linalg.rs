//! Small dense linear-algebra helpers on `f64` / `Complex<f64>` matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `(A + A*) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn asymmetry(a: &CMat) -> f64 {
    (a - a.adjoint()).iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.norm()))
}

/// Eigenvalues ascending, with matching eigenvector columns.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    hermitian_eigen(a).0
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// Lower Cholesky factor of a Hermitian matrix; `None` unless every pivot is
/// strictly positive. (The complex Cholesky in nalgebra takes square roots of
/// negative pivots instead of failing.)
pub fn hermitian_cholesky(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = c(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Count of singular values above `tol · σ₁`.
pub fn numerical_rank(sv: &[f64], tol: f64) -> usize {
    match sv.first() {
        Some(&s1) if s1 > 0.0 => sv.iter().filter(|&&s| s > tol * s1).count(),
        _ => 0,
    }
}

/// Real basis of the `k × k` Hermitian matrices: `E_ii`, then for each
/// `i < j` the real and imaginary off-diagonal generators.
pub fn hermitian_basis(k: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        let mut e = CMat::zeros(k, k);
        e[(i, i)] = c(1.0, 0.0);
        out.push(e);
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let mut re = CMat::zeros(k, k);
            re[(i, j)] = c(1.0, 0.0);
            re[(j, i)] = c(1.0, 0.0);
            out.push(re);
            let mut im = CMat::zeros(k, k);
            im[(i, j)] = c(0.0, 1.0);
            im[(j, i)] = c(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

/// Coordinates of a Hermitian matrix in [`hermitian_basis`].
pub fn hermitian_coords(a: &CMat) -> Vec<f64> {
    let k = a.nrows();
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        out.push(a[(i, i)].re);
    }
    for i in 0..k {
        for j in (i + 1)..k {
            out.push(a[(i, j)].re);
            out.push(a[(i, j)].im);
        }
    }
    out
}

/// Real and imaginary parts of every entry, row-major.
pub fn flatten_complex(a: &CMat) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * a.len());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.push(a[(i, j)].re);
            out.push(a[(i, j)].im);
        }
    }
    out
}

/// Solution set of `A x = b`: a least-squares particular solution, a basis of
/// the null space (columns), and the residual `‖A x₀ − b‖`. Singular values
/// below `tol · σ₁` count as zero.
pub struct AffineSolution {
    pub particular: RVec,
    pub null_basis: RMat,
    pub residual: f64,
}

pub fn solve_affine(a: &RMat, b: &RVec, tol: f64) -> AffineSolution {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return AffineSolution {
            particular: RVec::zeros(0),
            null_basis: RMat::zeros(0, 0),
            residual: b.norm(),
        };
    }
    // pad so the thin SVD carries a full right basis
    let padded_rows = rows.max(cols);
    let mut ap = RMat::zeros(padded_rows, cols);
    ap.view_mut((0, 0), (rows, cols)).copy_from(a);
    let mut bp = RVec::zeros(padded_rows);
    bp.rows_mut(0, rows).copy_from(b);

    let svd = ap.svd(true, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let u = svd.u.as_ref().expect("requested U");
    let s1 = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let cut = tol * s1;
    let mut particular = RVec::zeros(cols);
    let mut null_cols = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let v = v_t.row(k).transpose();
        if s > cut && s > 0.0 {
            let coef = u.column(k).dot(&bp) / s;
            particular += v * coef;
        } else {
            null_cols.push(v);
        }
    }
    let null_basis = if null_cols.is_empty() {
        RMat::zeros(cols, 0)
    } else {
        RMat::from_columns(&null_cols)
    };
    let residual = (a * &particular - b).norm();
    AffineSolution {
        particular,
        null_basis,
        residual,
    }
}

/// Orthonormal basis (columns) of the span of the given columns, keeping
/// directions with singular value above `tol · σ₁`.
pub fn orthonormal_span(a: &CMat, tol: f64) -> CMat {
    if a.ncols() == 0 || a.nrows() == 0 {
        return CMat::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s1 = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let keep: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol * s1 && s > 0.0)
        .map(|(k, _)| u.column(k).into_owned())
        .collect();
    if keep.is_empty() {
        CMat::zeros(a.nrows(), 0)
    } else {
        CMat::from_columns(&keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_basis_round_trip() {
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(1.0, 0.5),
                c(0.0, -1.0),
                c(1.0, -0.5),
                c(-1.0, 0.0),
                c(0.3, 0.2),
                c(0.0, 1.0),
                c(0.3, -0.2),
                c(4.0, 0.0),
            ],
        );
        let coords = hermitian_coords(&a);
        let basis = hermitian_basis(3);
        let mut back = CMat::zeros(3, 3);
        for (x, b) in coords.iter().zip(&basis) {
            back += b.scale(*x);
        }
        assert!(max_abs(&(back - &a)) < 1e-15);
    }

    #[test]
    fn eigen_sorted() {
        let a = CMat::from_diagonal(&DVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let (vals, vecs) = hermitian_eigen(&a);
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        let check = &a * vecs.column(0) - vecs.column(0).scale(-1.0);
        assert!(check.norm() < 1e-14);
    }

    #[test]
    fn affine_solution() {
        // x + y = 2, underdetermined
        let a = RMat::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = RVec::from_vec(vec![2.0]);
        let sol = solve_affine(&a, &b, 1e-12);
        assert!(sol.residual < 1e-14);
        assert_eq!(sol.null_basis.ncols(), 1);
        let n = sol.null_basis.column(0);
        assert!((n[0] + n[1]).abs() < 1e-14);

        // inconsistent
        let a = RMat::from_row_slice(2, 1, &[1.0, 1.0]);
        let b = RVec::from_vec(vec![0.0, 1.0]);
        assert!(solve_affine(&a, &b, 1e-12).residual > 0.5);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CMat::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(-0.1, 0.0)]));
        assert!(hermitian_cholesky(&a).is_none());
        let b = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let l = hermitian_cholesky(&b).unwrap();
        assert!(max_abs(&(&l * l.adjoint() - &b)) < 1e-15);
    }

    #[test]
    fn rank_counts() {
        assert_eq!(numerical_rank(&[1.0, 1e-3, 1e-9], 1e-7), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], 1e-7), 0);
        assert_eq!(numerical_rank(&[], 1e-7), 0);
    }
}
