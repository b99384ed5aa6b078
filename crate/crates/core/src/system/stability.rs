use num_complex::Complex64;

use super::{first_companion, FirstOrderRealization, JChoice, SecondOrderSystem, StateSpace};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

pub const DEFAULT_DENSE_LIMIT: usize = 5000;

/// Models with a regular pencil `lambda E - A`.
pub trait Pencil {
    fn pencil_order(&self) -> usize;
    /// `E^-1 A`, whose eigenvalues are the finite pencil eigenvalues.
    fn reduced_operator(&self) -> Result<Mat>;
}

impl Pencil for StateSpace {
    fn pencil_order(&self) -> usize {
        self.order()
    }

    fn reduced_operator(&self) -> Result<Mat> {
        linalg::solve(&self.e, &self.a, "E")
    }
}

impl Pencil for FirstOrderRealization {
    fn pencil_order(&self) -> usize {
        self.ss.order()
    }

    fn reduced_operator(&self) -> Result<Mat> {
        self.ss.reduced_operator()
    }
}

impl Pencil for SecondOrderSystem {
    fn pencil_order(&self) -> usize {
        2 * self.order()
    }

    fn reduced_operator(&self) -> Result<Mat> {
        first_companion(self, &JChoice::Identity)?.reduced_operator()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub is_c_stable: bool,
    pub max_real_part: f64,
    pub eigenvalues: Vec<Complex64>,
    /// Eigenvalues with `|Re| <= 1e-12` times the spectral scale.
    pub marginal: Vec<Complex64>,
}

pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !linalg::all_finite(a) {
        return Err(Error::NonFinite("pencil"));
    }
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 200 * n.max(10))
        .ok_or(Error::NotConverged { iterations: 200 * n })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of `lambda E - A` (companion linearization for second-order
/// models) and a strict left half-plane test. `limit` caps the dense
/// dimension, defaulting to [`DEFAULT_DENSE_LIMIT`].
pub fn check_stability<P: Pencil + ?Sized>(model: &P, limit: Option<usize>) -> Result<StabilityReport> {
    let limit = limit.unwrap_or(DEFAULT_DENSE_LIMIT);
    let n = model.pencil_order();
    if n > limit {
        return Err(Error::DimensionTooLarge { n, limit });
    }
    let eigs = eigenvalues(&model.reduced_operator()?)?;
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_real_part = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let marginal = eigs
        .iter()
        .copied()
        .filter(|z| z.re.abs() <= 1e-12 * scale)
        .collect();
    Ok(StabilityReport {
        is_c_stable: max_real_part < 0.0,
        max_real_part,
        eigenvalues: eigs,
        marginal,
    })
}
