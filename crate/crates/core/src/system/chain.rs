use serde::{Deserialize, Serialize};

use super::SecondOrderSystem;
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Parameters of the single chain oscillator.
///
/// Neighbouring masses are coupled by springs `coupling_stiffness` and
/// dampers `coupling_damping`; every mass is additionally tied to the ground
/// through `ground_stiffness_*` / `ground_damping_*`, with separate values
/// for the two outermost masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub mass: f64,
    pub coupling_stiffness: f64,
    pub coupling_damping: f64,
    pub ground_stiffness_end: f64,
    pub ground_stiffness_interior: f64,
    pub ground_damping_end: f64,
    pub ground_damping_interior: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            mass: 100.0,
            coupling_stiffness: 2.0,
            coupling_damping: 5.0,
            ground_stiffness_end: 4.0,
            ground_stiffness_interior: 2.0,
            ground_damping_end: 10.0,
            ground_damping_interior: 5.0,
        }
    }
}

fn tridiagonal(n: usize, coupling: f64, ground_end: f64, ground_interior: f64) -> Mat {
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        let ground = if i == 0 || i == n - 1 {
            ground_end
        } else {
            ground_interior
        };
        // k_0 = k_n = 0: the outer masses have a single neighbour
        let left = if i > 0 { coupling } else { 0.0 };
        let right = if i + 1 < n { coupling } else { 0.0 };
        a[(i, i)] = ground + left + right;
        if i + 1 < n {
            a[(i, i + 1)] = -coupling;
            a[(i + 1, i)] = -coupling;
        }
    }
    a
}

/// Chain of `n_masses` masses with input at the first mass and position
/// outputs at masses `1`, `2` and `n - 1`.
pub fn generate_chain(n_masses: usize, params: &ChainParams) -> Result<SecondOrderSystem> {
    if n_masses < 2 {
        return Err(Error::InvalidParams(format!(
            "chain needs at least 2 masses, got {n_masses}"
        )));
    }
    let values = [
        params.mass,
        params.coupling_stiffness,
        params.coupling_damping,
        params.ground_stiffness_end,
        params.ground_stiffness_interior,
        params.ground_damping_end,
        params.ground_damping_interior,
    ];
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParams(
            "masses, stiffnesses and dampings must be positive".into(),
        ));
    }
    let n = n_masses;
    let m = Mat::identity(n, n) * params.mass;
    let k = tridiagonal(
        n,
        params.coupling_stiffness,
        params.ground_stiffness_end,
        params.ground_stiffness_interior,
    );
    let e = tridiagonal(
        n,
        params.coupling_damping,
        params.ground_damping_end,
        params.ground_damping_interior,
    );
    let mut bu = Mat::zeros(n, 1);
    bu[(0, 0)] = 1.0;
    let mut cp = Mat::zeros(3, n);
    cp[(0, 0)] = 1.0;
    cp[(1, 1)] = 1.0;
    cp[(2, n - 2)] = 1.0;
    let cv = Mat::zeros(3, n);
    SecondOrderSystem::new(m, e, k, bu, cp, cv)
}
