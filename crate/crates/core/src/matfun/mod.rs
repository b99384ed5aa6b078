//! Dense matrix functions and the right-hand sides of the frequency- and
//! time-limited Lyapunov equations.

mod expm;
mod logm;
mod quadrature;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{to_complex, CMat, Lu, Mat};
use crate::system::{check_stability, StateSpace};

pub use expm::{expm, expm_generic};
pub use logm::{logm_principal, logm_real};
pub use quadrature::{composite_gauss_legendre, gauss_legendre, quadrature_gramian};

/// Union of frequency intervals in rad/s, implicitly mirrored onto the
/// negative axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyBand {
    intervals: Vec<(f64, f64)>,
}

impl FrequencyBand {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidBand("no intervals".into()));
        }
        for &(lo, hi) in &intervals {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::InvalidBand(format!(
                    "interval [{lo}, {hi}] needs 0 <= low < high"
                )));
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in intervals.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(Error::InvalidBand(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    /// Band given in Hz, stored in rad/s.
    pub fn from_hz(intervals: &[(f64, f64)]) -> Result<Self> {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self::new(intervals.iter().map(|&(a, b)| (two_pi * a, two_pi * b)).collect())
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn lowest(&self) -> f64 {
        self.intervals[0].0
    }

    pub fn highest(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].1
    }

    /// Whether `|omega|` lies in one of the closed intervals.
    pub fn contains(&self, omega: f64) -> bool {
        let w = omega.abs();
        self.intervals.iter().any(|&(lo, hi)| lo <= w && w <= hi)
    }
}

/// Time interval `[t0, tf]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow {
    t0: f64,
    tf: f64,
}

impl TimeWindow {
    pub fn new(t0: f64, tf: f64) -> Result<Self> {
        if !(t0 >= 0.0 && tf > t0 && tf.is_finite()) {
            return Err(Error::InvalidWindow(format!("[{t0}, {tf}] needs 0 <= t0 < tf")));
        }
        Ok(Self { t0, tf })
    }

    /// Single window spanning the smallest and largest time points of a
    /// union of windows.
    pub fn enclosing(windows: &[TimeWindow]) -> Result<Self> {
        let t0 = windows.iter().map(|w| w.t0).fold(f64::INFINITY, f64::min);
        let tf = windows.iter().map(|w| w.tf).fold(f64::NEG_INFINITY, f64::max);
        if windows.is_empty() {
            return Err(Error::InvalidWindow("no windows".into()));
        }
        Self::new(t0, tf)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t0 <= t && t <= self.tf
    }
}

/// Right-hand side ingredients of the limited Lyapunov equations.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitedRhs {
    Frequency {
        b_omega: Mat,
        c_omega: Mat,
    },
    Time {
        b_t0: Mat,
        b_tf: Mat,
        c_t0: Mat,
        c_tf: Mat,
    },
}

/// Which of the two equivalent orderings of the `F_Omega` formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FOmegaVariant {
    /// `Re((j/pi) ln(prod (A + j w1 E)^-1 (A + j w2 E))) E^-1`
    #[default]
    Left,
    /// `E^-1 Re((j/pi) ln(prod (A + j w2 E)(A + j w1 E)^-1))`
    Right,
}

fn shifted(ce: &CMat, ca: &CMat, omega: f64) -> CMat {
    ca + ce * Complex64::new(0.0, omega)
}

/// `Re((j/pi) L) = -Im(L) / pi`
fn real_of_j_over_pi(l: &CMat) -> Mat {
    l.map(|z| -z.im / std::f64::consts::PI)
}

/// The matrix function `F_Omega` whose products with `E` and `B`/`C` give
/// the frequency-limited right-hand sides.
pub fn f_omega(ss: &StateSpace, band: &FrequencyBand, variant: FOmegaVariant) -> Result<Mat> {
    let n = ss.order();
    let e_lu = Lu::new(&ss.e, "E")?;
    let ce = to_complex(&ss.e);
    let ca = to_complex(&ss.a);
    let eye = CMat::identity(n, n);

    let arg = match band.intervals() {
        [(lo, hi)] if *lo == 0.0 => {
            // symmetric band [-w, w]
            let w = Complex64::new(0.0, *hi);
            match variant {
                FOmegaVariant::Left => -to_complex(&e_lu.solve(&ss.a)) - &eye * w,
                FOmegaVariant::Right => {
                    let ae_inv = e_lu_solve_right(&e_lu, &ss.a);
                    -to_complex(&ae_inv) - &eye * w
                }
            }
        }
        intervals => {
            let mut prod = eye.clone();
            for &(lo, hi) in intervals {
                let low = shifted(&ce, &ca, lo);
                let high = shifted(&ce, &ca, hi);
                let on_axis = |_| Error::UnstableRealization;
                prod = match variant {
                    FOmegaVariant::Left => {
                        prod * Lu::new(&low, "A + j w E").map_err(on_axis)?.solve(&high)
                    }
                    FOmegaVariant::Right => {
                        // high low^-1 = (low^-T high^T)^T
                        let lt = Lu::new(&low.transpose(), "A + j w E").map_err(on_axis)?;
                        prod * lt.solve(&high.transpose()).transpose()
                    }
                };
            }
            prod
        }
    };
    let l = logm_principal(&arg)?;
    let f = real_of_j_over_pi(&l);
    Ok(match variant {
        FOmegaVariant::Left => e_lu_solve_right(&e_lu, &f),
        FOmegaVariant::Right => e_lu.solve(&f),
    })
}

/// `X E^-1` given the factorization of `E`.
fn e_lu_solve_right(e_lu: &Lu<f64>, x: &Mat) -> Mat {
    let e_inv = e_lu.inverse();
    x * e_inv
}

fn ensure_stable(ss: &StateSpace) -> Result<()> {
    if check_stability(ss, None)?.is_c_stable {
        Ok(())
    } else {
        Err(Error::UnstableRealization)
    }
}

/// `B_Omega = E F B` and `C_Omega = C F E`.
pub fn freq_limited_rhs(ss: &StateSpace, band: &FrequencyBand) -> Result<LimitedRhs> {
    ensure_stable(ss)?;
    let f = f_omega(ss, band, FOmegaVariant::Left)?;
    let b_omega = &ss.e * (&f * &ss.b);
    let c_omega = (&ss.c * &f) * &ss.e;
    Ok(LimitedRhs::Frequency { b_omega, c_omega })
}

/// `B_t = exp(A E^-1 t) B` and `C_t = C exp(E^-1 A t)` at both window ends.
pub fn time_limited_rhs(ss: &StateSpace, window: &TimeWindow) -> Result<LimitedRhs> {
    let e_lu = Lu::new(&ss.e, "E")?;
    let einv_a = e_lu.solve(&ss.a);
    let a_einv = e_lu_solve_right(&e_lu, &ss.a);
    let at = |t: f64| -> Result<(Mat, Mat)> {
        if t == 0.0 {
            return Ok((ss.b.clone(), ss.c.clone()));
        }
        let bt = expm(&(&a_einv * t))? * &ss.b;
        let ct = &ss.c * expm(&(&einv_a * t))?;
        Ok((bt, ct))
    };
    let (b_t0, c_t0) = at(window.t0())?;
    let (b_tf, c_tf) = at(window.tf())?;
    Ok(LimitedRhs::Time {
        b_t0,
        b_tf,
        c_t0,
        c_tf,
    })
}
