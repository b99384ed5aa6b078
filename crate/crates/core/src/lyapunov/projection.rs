use num_complex::Complex64;

use super::{solve_lyap_sign, GramianFactor, IndefiniteRhs, SignOptions};
use crate::error::{Error, Result};
use crate::linalg::{logspace, to_complex, CMat, Lu, Mat, Vector};
use crate::matfun::{FrequencyBand, TimeWindow};
use crate::system::{check_stability, StateSpace};

const MAX_SWEEPS: usize = 200;
const DROP_TOL: f64 = 1e-10;

/// Log-spaced shifts `j w` on the band, with the lower edge lifted to
/// `1e-3` times the upper one.
pub fn default_frequency_shifts(band: &FrequencyBand, count: usize) -> Vec<Complex64> {
    let hi = band.highest();
    let lo = band.lowest().max(hi * 1e-3);
    logspace(lo, hi, count.max(1))
        .into_iter()
        .map(|w| Complex64::new(0.0, w))
        .collect()
}

/// Log-spaced shifts `j w` for `w` in `[1 / tf, 10 N / tf]`.
pub fn default_time_shifts(window: &TimeWindow, order: usize, count: usize) -> Vec<Complex64> {
    let tf = window.tf();
    logspace(1.0 / tf, 10.0 * order as f64 / tf, count.max(1))
        .into_iter()
        .map(|w| Complex64::new(0.0, w))
        .collect()
}

struct Basis {
    v: Mat,
}

impl Basis {
    /// Gram-Schmidt (twice) against the current basis; returns how many
    /// columns were added.
    fn extend(&mut self, cols: &Mat) -> usize {
        let n = self.v.nrows();
        let mut added = 0;
        for j in 0..cols.ncols() {
            if self.v.ncols() == n {
                break;
            }
            let mut w: Vector = cols.column(j).into_owned();
            let original = w.norm();
            if original == 0.0 {
                continue;
            }
            for _ in 0..2 {
                let h = self.v.transpose() * &w;
                w -= &self.v * h;
            }
            let norm = w.norm();
            if norm > DROP_TOL * original {
                let k = self.v.ncols();
                self.v = self.v.clone().insert_column(k, 0.0);
                self.v.set_column(k, &(w / norm));
                added += 1;
            }
        }
        added
    }
}

fn split(w: &CMat) -> Mat {
    let (n, m) = w.shape();
    let mut out = Mat::zeros(n, 2 * m);
    for j in 0..m {
        for i in 0..n {
            out[(i, 2 * j)] = w[(i, j)].re;
            out[(i, 2 * j + 1)] = w[(i, j)].im;
        }
    }
    out
}

/// Galerkin projection solver for `A X E^T + E X A^T + G S G^T = 0` on a
/// rational Krylov space built from `(sigma E - A)^-1 B`-type solves.
///
/// `rhs` builds the right-hand side for a given (projected) realization, so
/// limited right-hand sides are re-evaluated on the small projected
/// matrices. Shifts come in conjugate pairs; only one of each pair is used
/// since real and imaginary parts both enter the basis. Convergence is
/// declared when the trace of the represented Gramian changes by at most
/// `tol` relatively between enlargements, or when the basis spans the
/// whole space.
pub fn solve_lyap_projection(
    ss: &StateSpace,
    rhs: &dyn Fn(&StateSpace) -> Result<IndefiniteRhs>,
    shifts: &[Complex64],
    tol: f64,
) -> Result<GramianFactor> {
    let n = ss.order();
    let mut poles: Vec<Complex64> = Vec::new();
    for &s in shifts {
        let s = if s.im < 0.0 { s.conj() } else { s };
        if !poles.iter().any(|p| (p - s).norm() <= 1e-14 * s.norm().max(1.0)) {
            poles.push(s);
        }
    }
    if poles.is_empty() {
        return Err(Error::InvalidParams("projection needs at least one shift".into()));
    }
    let ce = to_complex(&ss.e);
    let ca = to_complex(&ss.a);
    let mut factorizations = Vec::with_capacity(poles.len());
    for &s in &poles {
        let lu = Lu::new(&(&ce * s - &ca), "sigma E - A")
            .map_err(|_| Error::SingularShiftedSystem { re: s.re, im: s.im })?;
        factorizations.push(lu);
    }
    let b = to_complex(&ss.b);
    let mut last: Vec<Option<CMat>> = vec![None; poles.len()];
    let mut basis = Basis { v: Mat::zeros(n, 0) };
    let mut previous_trace: Option<f64> = None;
    let opts = SignOptions::default();

    for _ in 0..MAX_SWEEPS {
        let mut added = 0;
        for (i, lu) in factorizations.iter().enumerate() {
            let source = match &last[i] {
                None => b.clone(),
                Some(w) => &ce * w,
            };
            let mut w = lu.solve(&source);
            let scale = w.norm();
            if scale > 0.0 {
                w /= Complex64::new(scale, 0.0);
            }
            added += basis.extend(&split(&w));
            last[i] = Some(w);
        }
        let v = &basis.v;
        let projected = StateSpace {
            e: v.transpose() * &ss.e * v,
            a: v.transpose() * &ss.a * v,
            b: v.transpose() * &ss.b,
            c: &ss.c * v,
        };
        if !check_stability(&projected, None)?.is_c_stable {
            return Err(Error::UnstableProjection);
        }
        let small_rhs = rhs(&projected)?;
        let small = solve_lyap_sign(&projected.a, &projected.e, &small_rhs, &opts)?;
        let factor = GramianFactor {
            z: v * &small.z,
            y: small.y,
        };
        let trace = factor.trace();
        let exact = v.ncols() == n || added == 0;
        let settled = previous_trace.is_some_and(|t| (trace - t).abs() <= tol * trace.abs());
        if exact || settled {
            return Ok(factor);
        }
        previous_trace = Some(trace);
    }
    Err(Error::NotConverged {
        iterations: MAX_SWEEPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::solve_lyap_dense_oracle;
    use crate::matfun::{freq_limited_rhs, LimitedRhs};
    use crate::system::random_state_space;

    fn infinite(ss: &StateSpace) -> Result<IndefiniteRhs> {
        Ok(IndefiniteRhs::definite(ss.b.clone()))
    }

    fn band_rhs(band: FrequencyBand) -> impl Fn(&StateSpace) -> Result<IndefiniteRhs> {
        move |ss: &StateSpace| match freq_limited_rhs(ss, &band)? {
            LimitedRhs::Frequency { b_omega, .. } => Ok(IndefiniteRhs::symmetric_sum(&b_omega, &ss.b)),
            LimitedRhs::Time { .. } => unreachable!(),
        }
    }

    #[test]
    fn full_space_is_exact() {
        let ss = random_state_space(10, 1, 1, 2);
        let shifts: Vec<_> = logspace(0.1, 10.0, 12).into_iter().map(|w| Complex64::new(0.0, w)).collect();
        let x = solve_lyap_projection(&ss, &infinite, &shifts, 0.0).unwrap();
        let p = solve_lyap_dense_oracle(&ss.a, &ss.e, &(&ss.b * ss.b.transpose())).unwrap();
        assert!((x.gramian() - &p).norm() <= 1e-10 * p.norm());
    }

    #[test]
    fn scalar_band_value() {
        let s = |x: f64| Mat::from_element(1, 1, x);
        let ss = StateSpace::new(s(1.0), s(-1.0), s(1.0), s(1.0)).unwrap();
        let band = FrequencyBand::single(1.0, 2.0).unwrap();
        let shifts = default_frequency_shifts(&band, 4);
        let x = solve_lyap_projection(&ss, &band_rhs(band), &shifts, 1e-10).unwrap();
        assert!((x.gramian()[(0, 0)] - 0.1024163823).abs() < 1e-10);
    }

    #[test]
    fn pole_as_shift_is_rejected() {
        let s = |x: f64| Mat::from_element(1, 1, x);
        let ss = StateSpace::new(s(1.0), s(-1.0), s(1.0), s(1.0)).unwrap();
        let r = solve_lyap_projection(&ss, &infinite, &[Complex64::new(-1.0, 0.0)], 1e-8);
        assert!(matches!(r, Err(Error::SingularShiftedSystem { .. })));
    }

    #[test]
    fn default_shifts_cover_band() {
        let band = FrequencyBand::single(0.0, 100.0).unwrap();
        let s = default_frequency_shifts(&band, 5);
        assert!((s[0].im - 0.1).abs() < 1e-12 && (s[4].im - 100.0).abs() < 1e-10);
        let w = TimeWindow::new(0.0, 20.0).unwrap();
        let t = default_time_shifts(&w, 10, 3);
        assert!((t[0].im - 0.05).abs() < 1e-14 && (t[2].im - 5.0).abs() < 1e-12);
    }
}
