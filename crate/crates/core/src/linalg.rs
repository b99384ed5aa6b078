//! Small dense helpers shared by the numerical modules.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type Vector = DVector<f64>;

/// LU factorization with a pivot-growth singularity check.
pub struct Lu<T: ComplexField<RealField = f64>> {
    lu: nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<T: ComplexField<RealField = f64>> Lu<T> {
    pub fn new(a: &DMatrix<T>, what: &'static str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("{what} must be square")));
        }
        let n = a.nrows();
        let lu = a.clone().lu();
        let u = lu.u();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for i in 0..n {
            let d = u[(i, i)].clone().abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if n > 0 && (!(lo > (n as f64) * f64::EPSILON * hi) || !hi.is_finite()) {
            return Err(Error::Singular(what));
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, b: &DMatrix<T>) -> DMatrix<T> {
        self.lu.solve(b).expect("checked non-singular at factorization")
    }

    pub fn inverse(&self) -> DMatrix<T> {
        self.lu.try_inverse().expect("checked non-singular at factorization")
    }
}

pub fn solve(a: &Mat, b: &Mat, what: &'static str) -> Result<Mat> {
    Ok(Lu::new(a, what)?.solve(b))
}

pub fn inverse(a: &Mat, what: &'static str) -> Result<Mat> {
    Ok(Lu::new(a, what)?.inverse())
}

pub fn to_complex(a: &Mat) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn block2x2(a11: &Mat, a12: &Mat, a21: &Mat, a22: &Mat) -> Mat {
    let (r1, c1) = a11.shape();
    let (r2, c2) = a22.shape();
    let mut out = Mat::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a11);
    out.view_mut((0, c1), (r1, c2)).copy_from(a12);
    out.view_mut((r1, 0), (r2, c1)).copy_from(a21);
    out.view_mut((r1, c1), (r2, c2)).copy_from(a22);
    out
}

pub fn vstack(top: &Mat, bottom: &Mat) -> Mat {
    assert_eq!(top.ncols(), bottom.ncols());
    let mut out = Mat::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    out
}

pub fn hstack(left: &Mat, right: &Mat) -> Mat {
    assert_eq!(left.nrows(), right.nrows());
    let mut out = Mat::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    block2x2(
        a,
        &Mat::zeros(a.nrows(), b.ncols()),
        &Mat::zeros(b.nrows(), a.ncols()),
        b,
    )
}

/// Maximum absolute column sum.
pub fn norm1<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.clone().abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn symmetrize(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub fn all_finite<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> bool {
    a.iter().all(|x| x.clone().is_finite())
}

/// Symmetric eigen-decomposition with eigenvalues sorted descending.
pub fn sym_eig(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let eig = symmetrize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_singular_value(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Symmetric positive definite check through the smallest eigenvalue.
pub fn is_spd(a: &Mat) -> bool {
    if !a.is_square() || a.is_empty() {
        return false;
    }
    let scale = a.norm();
    if (a - a.transpose()).norm() > 1e-12 * scale {
        return false;
    }
    let (vals, _) = sym_eig(a);
    vals.last().is_some_and(|&l| l > 1e-14 * scale)
}

/// Orthonormal basis of the column span, dropping directions whose singular
/// value falls below `rel_tol` times the largest one.
pub fn orthonormal_basis(a: &Mat, rel_tol: f64) -> Mat {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Mat::zeros(rows, 0);
    }
    // thin QR first so the SVD only sees a square-ish factor
    let (q, r) = if cols > rows {
        (Mat::identity(rows, rows), a.clone())
    } else {
        let qr = a.clone().qr();
        (qr.q(), qr.r())
    };
    let svd = r.svd(true, false);
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Mat::zeros(rows, 0);
    }
    let u = svd.u.expect("requested");
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rel_tol * smax).collect();
    let mut basis = Mat::zeros(q.ncols(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    q * basis
}

pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
                .collect()
        }
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Largest singular value of a complex matrix.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.ncols() == 1 || a.nrows() == 1 {
        return a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_flags_singular_matrix() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Lu::new(&a, "a"), Err(Error::Singular("a"))));
    }

    #[test]
    fn orthonormal_basis_drops_duplicates() {
        let a = Mat::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let q = orthonormal_basis(&a, 1e-12);
        assert_eq!(q.ncols(), 2);
        assert!((q.transpose() * &q - Mat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn sym_eig_sorts_descending() {
        let a = Mat::from_diagonal(&Vector::from_vec(vec![1.0, 3.0, 2.0]));
        let (v, _) = sym_eig(&a);
        assert_eq!(v, vec![3.0, 2.0, 1.0]);
    }
}
