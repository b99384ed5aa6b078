use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{self, Lu, Mat};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the [13/13] Padé
/// approximant.
pub fn expm_generic<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch("expm needs a square matrix".into()));
    }
    if !linalg::all_finite(a) {
        return Err(Error::NonFinite("expm argument"));
    }
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = linalg::norm1(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * T::from_real(0.5f64.powi(s));
    let b = |i: usize| T::from_real(PADE13[i]);
    let eye = DMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &eye * b(1);
    let u = &a * inner_u;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &eye * b(0);

    let lu = Lu::new(&(&v - &u), "Pade denominator")?;
    let mut r = lu.solve(&(&v + &u));
    for _ in 0..s {
        r = &r * &r;
    }
    if !linalg::all_finite(&r) {
        return Err(Error::NonFinite("matrix exponential"));
    }
    Ok(r)
}

pub fn expm(a: &Mat) -> Result<Mat> {
    expm_generic(a)
}
