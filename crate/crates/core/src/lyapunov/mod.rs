//! Generalized Lyapunov equations `A X E^T + E X A^T + G S G^T = 0` with
//! low-rank, possibly indefinite right-hand sides.

mod oracle;
mod projection;
mod sign;

use crate::error::{Error, Result};
use crate::linalg::{block_diag, hstack, sym_eig, Mat};

pub use oracle::{solve_lyap_dense_oracle, ORACLE_LIMIT};
pub use projection::{default_frequency_shifts, default_time_shifts, solve_lyap_projection};
pub use sign::{solve_lyap_sign, solve_lyap_sign_dual, SignOptions};

pub const DEFAULT_COMPRESSION_TOL: f64 = 1e-14;

/// `X = Z Y Z^T` with a small symmetric core `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianFactor {
    pub z: Mat,
    pub y: Mat,
}

impl GramianFactor {
    pub fn new(z: Mat, y: Mat) -> Result<Self> {
        if y.shape() != (z.ncols(), z.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "core is {:?} for a factor with {} columns",
                y.shape(),
                z.ncols()
            )));
        }
        if (&y - y.transpose()).norm() > 1e-14 * y.norm().max(1.0) {
            return Err(Error::InvalidParams("factor core must be symmetric".into()));
        }
        Ok(Self { z, y })
    }

    /// Plain factor `X = Z Z^T`.
    pub fn from_root(z: Mat) -> Self {
        let k = z.ncols();
        Self {
            z,
            y: Mat::identity(k, k),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            z: Mat::zeros(n, 0),
            y: Mat::zeros(0, 0),
        }
    }

    pub fn order(&self) -> usize {
        self.z.nrows()
    }

    pub fn rank(&self) -> usize {
        self.z.ncols()
    }

    pub fn gramian(&self) -> Mat {
        &self.z * &self.y * self.z.transpose()
    }

    pub fn trace(&self) -> f64 {
        (&self.y * (self.z.transpose() * &self.z)).trace()
    }

    /// Root factor `R` with `R R^T` equal to the represented matrix after
    /// clipping negative core eigenvalues to zero.
    pub fn root(&self) -> Mat {
        let k = self.rank();
        let is_diagonal = (0..k).all(|j| (0..k).all(|i| i == j || self.y[(i, j)] == 0.0));
        if is_diagonal {
            let mut r = self.z.clone();
            for j in 0..k {
                let w = self.y[(j, j)].max(0.0).sqrt();
                r.column_mut(j).scale_mut(w);
            }
            return r;
        }
        let (vals, vecs) = sym_eig(&self.y);
        let mut r = &self.z * vecs;
        for (j, v) in vals.iter().enumerate() {
            r.column_mut(j).scale_mut(v.max(0.0).sqrt());
        }
        r
    }

    /// Smallest core eigenvalue relative to the largest magnitude; negative
    /// values flag an indefinite factor.
    pub fn min_relative_eigenvalue(&self) -> f64 {
        let (vals, _) = sym_eig(&self.y);
        let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        vals.last().copied().unwrap_or(0.0) / scale
    }
}

/// Right-hand side `G S G^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndefiniteRhs {
    pub g: Mat,
    pub s: Mat,
}

impl IndefiniteRhs {
    pub fn new(g: Mat, s: Mat) -> Result<Self> {
        GramianFactor::new(g, s).map(|f| Self { g: f.z, s: f.y })
    }

    /// `G G^T`.
    pub fn definite(g: Mat) -> Self {
        let q = g.ncols();
        Self {
            g,
            s: Mat::identity(q, q),
        }
    }

    /// `A B^T + B A^T` as `[A, B] [0 I; I 0] [A, B]^T`.
    pub fn symmetric_sum(a: &Mat, b: &Mat) -> Self {
        let q = a.ncols();
        let eye = Mat::identity(q, q);
        let zero = Mat::zeros(q, q);
        Self {
            g: hstack(a, b),
            s: crate::linalg::block2x2(&zero, &eye, &eye, &zero),
        }
    }

    /// `A A^T - B B^T`.
    pub fn difference(a: &Mat, b: &Mat) -> Self {
        Self {
            g: hstack(a, b),
            s: block_diag(&Mat::identity(a.ncols(), a.ncols()), &(-Mat::identity(b.ncols(), b.ncols()))),
        }
    }

    pub fn full(&self) -> Mat {
        &self.g * &self.s * self.g.transpose()
    }
}

/// Rank-revealing recompression of `Z Y Z^T`: thin QR of `Z`, eigen-
/// decomposition of `R Y R^T`, and removal of eigenvalues below
/// `tol * max |eig|`. The result has a diagonal core.
pub fn ldl_compress(factor: &GramianFactor, tol: f64) -> GramianFactor {
    let n = factor.order();
    if factor.rank() == 0 {
        return GramianFactor::zero(n);
    }
    let qr = factor.z.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let core = &r * &factor.y * r.transpose();
    let (vals, vecs) = sym_eig(&core);
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return GramianFactor::zero(n);
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() > tol * scale).collect();
    let mut basis = Mat::zeros(vecs.nrows(), keep.len());
    let mut y = Mat::zeros(keep.len(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &vecs.column(src));
        y[(dst, dst)] = vals[src];
    }
    GramianFactor { z: q * basis, y }
}
