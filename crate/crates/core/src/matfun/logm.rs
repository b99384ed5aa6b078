use nalgebra::Schur;
use num_complex::Complex64;

use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::linalg::{self, to_complex, CMat, Mat};

/// Square roots are taken until `||T - I||_1` drops below this.
const SQRT_THRESHOLD: f64 = 0.25;
const MAX_SQRTS: usize = 100;
const LOG_NODES: usize = 8;

/// Complex Schur form `A = Q T Q^H` with upper triangular `T`.
pub(crate) fn complex_schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 200 * n.max(10))
        .ok_or(Error::NotConverged { iterations: 200 * n.max(10) })?;
    let (q, mut t) = schur.unpack();
    let scale = t.norm().max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in j + 1..n {
            if t[(i, j)].norm() > 1e-10 * scale {
                return Err(Error::NotConverged { iterations: 200 * n.max(10) });
            }
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

/// Principal square root of an upper triangular matrix.
fn sqrt_upper(t: &CMat) -> CMat {
    let n = t.nrows();
    let mut u = CMat::zeros(n, n);
    for j in 0..n {
        u[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= u[(i, k)] * u[(k, j)];
            }
            u[(i, j)] = s / (u[(i, i)] + u[(j, j)]);
        }
    }
    u
}

/// `log(I + X)` for upper triangular `X` with small norm, by Gauss-Legendre
/// quadrature of `int_0^1 X (I + t X)^-1 dt`.
fn log1p_upper(x: &CMat) -> CMat {
    let n = x.nrows();
    let (nodes, weights) = gauss_legendre(LOG_NODES);
    let eye = CMat::identity(n, n);
    let mut out = CMat::zeros(n, n);
    for (node, weight) in nodes.iter().zip(&weights) {
        // map [-1, 1] to [0, 1]
        let t = 0.5 * (node + 1.0);
        let w = 0.5 * weight;
        let lhs = &eye + x * Complex64::new(t, 0.0);
        let term = lhs
            .solve_upper_triangular(x)
            .expect("I + tX is nonsingular for ||X|| < 1");
        out += term * Complex64::new(w, 0.0);
    }
    out
}

/// Principal matrix logarithm by inverse scaling and squaring on the
/// complex Schur form.
pub fn logm_principal(a: &CMat) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("logm needs a square matrix".into()));
    }
    if !linalg::all_finite(a) {
        return Err(Error::NonFinite("logm argument"));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let (q, mut t) = complex_schur(a)?;
    let scale = (0..n).map(|i| t[(i, i)].norm()).fold(0.0, f64::max);
    for i in 0..n {
        let z = t[(i, i)];
        if z.norm() == 0.0 || (z.re <= 0.0 && z.im.abs() <= 1e-14 * scale) {
            return Err(Error::BranchCutViolation);
        }
    }
    let eye = CMat::identity(n, n);
    let mut roots = 0;
    while linalg::norm1(&(&t - &eye)) >= SQRT_THRESHOLD {
        if roots == MAX_SQRTS {
            return Err(Error::NotConverged { iterations: MAX_SQRTS });
        }
        t = sqrt_upper(&t);
        roots += 1;
    }
    let log_t = log1p_upper(&(&t - &eye)) * Complex64::new(2f64.powi(roots as i32), 0.0);
    Ok(&q * log_t * q.adjoint())
}

pub fn logm_real(a: &Mat) -> Result<CMat> {
    logm_principal(&to_complex(a))
}
