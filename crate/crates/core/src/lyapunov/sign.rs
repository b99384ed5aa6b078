use super::{ldl_compress, GramianFactor, IndefiniteRhs, DEFAULT_COMPRESSION_TOL};
use crate::error::{Error, Result};
use crate::linalg::{block_diag, hstack, Lu, Mat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignOptions {
    /// Stop once `||A_k + E||_F <= tol ||E||_F`.
    pub tol: f64,
    pub max_iter: usize,
    pub compression_tol: f64,
}

impl Default for SignOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            compression_tol: DEFAULT_COMPRESSION_TOL,
        }
    }
}

struct Side {
    g: Mat,
    s: Mat,
}

impl Side {
    fn grow(&mut self, extra: Mat, c: f64, tol: f64) {
        let g = hstack(&self.g, &extra);
        let s = block_diag(&(&self.s / (2.0 * c)), &(&self.s * (0.5 * c)));
        let f = ldl_compress(&GramianFactor { z: g, y: s }, tol);
        self.g = f.z;
        self.s = f.y;
    }
}

fn check_dims(a: &Mat, e: &Mat, g: &Mat) -> Result<()> {
    let n = a.nrows();
    if !a.is_square() || e.shape() != (n, n) || g.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "A {:?}, E {:?}, right-hand side factor {:?}",
            a.shape(),
            e.shape(),
            g.shape()
        )));
    }
    Ok(())
}

fn iterate(
    a: &Mat,
    e: &Mat,
    mut sides: Vec<(Side, bool)>,
    opts: &SignOptions,
) -> Result<Vec<GramianFactor>> {
    let e_norm = e.norm();
    let mut ak = a.clone();
    let mut prev_err = f64::INFINITY;
    let mut iterations = 0;
    loop {
        let err = (&ak + e).norm() / e_norm;
        if !err.is_finite() || err > 1e12 {
            return Err(Error::UnstablePencil);
        }
        if err <= opts.tol {
            break;
        }
        // rounding can keep the error slightly above a tight tolerance
        if err < opts.tol.sqrt() && err > 0.5 * prev_err {
            break;
        }
        if iterations == opts.max_iter {
            return Err(Error::NotConverged { iterations });
        }
        let ainv = Lu::new(&ak, "A_k").map_err(|_| Error::UnstablePencil)?.inverse();
        let e_ainv = e * &ainv;
        let e_ainv_e = &e_ainv * e;
        let c = (ak.norm() / e_ainv_e.norm()).sqrt();
        for (side, transposed) in sides.iter_mut() {
            let extra = if *transposed {
                // (C_k A_k^-1 E)^T = E^T A_k^-T C_k^T
                (&ainv * e).transpose() * &side.g
            } else {
                &e_ainv * &side.g
            };
            side.grow(extra, c, opts.compression_tol);
        }
        let next = &ak / (2.0 * c) + e_ainv_e * (0.5 * c);
        let step = (&next - &ak).norm();
        let settled = step <= 1e-10 * ak.norm();
        ak = next;
        iterations += 1;
        if settled && (&ak + e).norm() / e_norm > opts.tol.sqrt() {
            // converged to a sign function other than -I: eigenvalues in the
            // right half-plane
            return Err(Error::UnstablePencil);
        }
        prev_err = err;
    }
    let e_lu = Lu::new(e, "E")?;
    let et_lu = Lu::new(&e.transpose(), "E^T")?;
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Ok(sides
        .into_iter()
        .map(|(side, transposed)| {
            let z = if transposed {
                et_lu.solve(&side.g)
            } else {
                e_lu.solve(&side.g)
            } * scale;
            GramianFactor { z, y: side.s }
        })
        .collect())
}

/// Factored sign-function iteration for both
/// `A X1 E^T + E X1 A^T + B Q B^T = 0` and
/// `A^T X2 E + E^T X2 A + C^T R C = 0` sharing one iteration on `A_k`.
/// `obs.g` holds `C^T`.
pub fn solve_lyap_sign_dual(
    a: &Mat,
    e: &Mat,
    ctrl: &IndefiniteRhs,
    obs: &IndefiniteRhs,
    opts: &SignOptions,
) -> Result<(GramianFactor, GramianFactor)> {
    check_dims(a, e, &ctrl.g)?;
    check_dims(a, e, &obs.g)?;
    let sides = vec![
        (
            Side {
                g: ctrl.g.clone(),
                s: ctrl.s.clone(),
            },
            false,
        ),
        (
            Side {
                g: obs.g.clone(),
                s: obs.s.clone(),
            },
            true,
        ),
    ];
    let mut out = iterate(a, e, sides, opts)?;
    let o = out.pop().expect("two sides");
    let c = out.pop().expect("two sides");
    Ok((c, o))
}

/// Single controllability-type equation `A X E^T + E X A^T + G S G^T = 0`.
pub fn solve_lyap_sign(a: &Mat, e: &Mat, rhs: &IndefiniteRhs, opts: &SignOptions) -> Result<GramianFactor> {
    check_dims(a, e, &rhs.g)?;
    let side = Side {
        g: rhs.g.clone(),
        s: rhs.s.clone(),
    };
    Ok(iterate(a, e, vec![(side, false)], opts)?.pop().expect("one side"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::solve_lyap_dense_oracle;
    use crate::system::random_state_space;

    fn rel(a: &Mat, b: &Mat) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn scalar_solution() {
        let s = |x: f64| Mat::from_element(1, 1, x);
        let x = solve_lyap_sign(&s(-2.0), &s(1.0), &IndefiniteRhs::definite(s(2.0)), &SignOptions::default())
            .unwrap();
        assert!((x.gramian()[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero_factor() {
        let ss = random_state_space(6, 1, 1, 0);
        let x = solve_lyap_sign(&ss.a, &ss.e, &IndefiniteRhs::definite(Mat::zeros(6, 1)), &SignOptions::default())
            .unwrap();
        assert_eq!(x.rank(), 0);
        assert_eq!(x.gramian(), Mat::zeros(6, 6));
    }

    #[test]
    fn indefinite_dual_solve_matches_oracle() {
        for seed in 0..5 {
            let ss = random_state_space(20, 2, 2, seed);
            let ctrl = IndefiniteRhs::difference(&ss.b, &(&ss.b * 0.3 + Mat::from_element(20, 2, 0.1)));
            let ct = ss.c.transpose();
            let obs = IndefiniteRhs::symmetric_sum(&ct, &(&ct * 0.5));
            let (x1, x2) = solve_lyap_sign_dual(&ss.a, &ss.e, &ctrl, &obs, &SignOptions::default()).unwrap();
            let p = solve_lyap_dense_oracle(&ss.a, &ss.e, &ctrl.full()).unwrap();
            let q = solve_lyap_dense_oracle(&ss.a.transpose(), &ss.e.transpose(), &obs.full()).unwrap();
            assert!(rel(&x1.gramian(), &p) < 1e-8, "seed {seed}");
            assert!(rel(&x2.gramian(), &q) < 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn definite_rhs_gives_psd_core() {
        let ss = random_state_space(15, 2, 1, 9);
        let x = solve_lyap_sign(&ss.a, &ss.e, &IndefiniteRhs::definite(ss.b.clone()), &SignOptions::default())
            .unwrap();
        assert!(x.min_relative_eigenvalue() >= -1e-12);
    }

    #[test]
    fn unstable_pencil_is_detected() {
        let ss = random_state_space(6, 1, 1, 4);
        let a = -&ss.a;
        let r = solve_lyap_sign(&a, &ss.e, &IndefiniteRhs::definite(ss.b.clone()), &SignOptions::default());
        assert_eq!(r, Err(Error::UnstablePencil));
    }

    #[test]
    fn residual_within_tolerance() {
        let ss = random_state_space(25, 3, 2, 21);
        let rhs = IndefiniteRhs::definite(ss.b.clone());
        let x = solve_lyap_sign(&ss.a, &ss.e, &rhs, &SignOptions::default()).unwrap().gramian();
        let res = &ss.a * &x * ss.e.transpose() + &ss.e * &x * ss.a.transpose() + rhs.full();
        let scale = 2.0 * ss.a.norm() * x.norm() * ss.e.norm() + rhs.full().norm();
        assert!(res.norm() <= 10.0 * 1e-12 * scale);
    }
}
