use crate::error::{Error, Result};
use crate::linalg::{symmetrize, Lu, Mat};

/// Largest order the vectorized oracle accepts.
pub const ORACLE_LIMIT: usize = 60;

/// Solves `A X E^T + E X A^T + RHS = 0` through the `N^2 x N^2` system
/// `(E kron A + A kron E) vec(X) = -vec(RHS)`. Meant for verification only.
pub fn solve_lyap_dense_oracle(a: &Mat, e: &Mat, rhs: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n > ORACLE_LIMIT {
        return Err(Error::DimensionTooLarge {
            n,
            limit: ORACLE_LIMIT,
        });
    }
    if !a.is_square() || e.shape() != (n, n) || rhs.shape() != (n, n) {
        return Err(Error::DimensionMismatch("oracle needs matching square matrices".into()));
    }
    let op = e.kronecker(a) + a.kronecker(e);
    let lu = Lu::new(&op, "Lyapunov operator").map_err(|_| Error::SingularOperator)?;
    // column-major storage makes this reshape the vec operator
    let v = Mat::from_column_slice(n * n, 1, (-rhs).as_slice());
    let x = lu.solve(&v);
    Ok(symmetrize(&Mat::from_column_slice(n, n, x.as_slice())))
}
