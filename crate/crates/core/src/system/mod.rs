//! Second-order systems `M x'' + E x' + K x = B_u u`, `y = C_p x + C_v x'`,
//! and their first-order realizations.

mod chain;
mod random;
mod simulate;
mod stability;

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, block2x2, hstack, to_complex, vstack, CMat, Lu, Mat};
use crate::lyapunov::GramianFactor;

pub use chain::{generate_chain, ChainParams};
pub use random::{random_second_order, random_state_space};
pub use simulate::{simulate, simulate_state_space, Signal, TimeGrid, Trajectory};
pub use stability::{check_stability, Pencil, StabilityReport, DEFAULT_DENSE_LIMIT};

/// Validated second-order system.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderSystem {
    pub m: Mat,
    pub e: Mat,
    pub k: Mat,
    pub bu: Mat,
    pub cp: Mat,
    pub cv: Mat,
}

impl SecondOrderSystem {
    /// Checks dimensions, finiteness and invertibility of `M`.
    pub fn new(m: Mat, e: Mat, k: Mat, bu: Mat, cp: Mat, cv: Mat) -> Result<Self> {
        let n = m.nrows();
        let sq = |a: &Mat, name: &str| -> Result<()> {
            if a.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {:?}, expected ({n}, {n})",
                    a.shape()
                )));
            }
            Ok(())
        };
        if n == 0 {
            return Err(Error::DimensionMismatch("empty system".into()));
        }
        sq(&m, "M")?;
        sq(&e, "E")?;
        sq(&k, "K")?;
        if bu.nrows() != n || bu.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "B_u is {:?}, expected ({n}, m >= 1)",
                bu.shape()
            )));
        }
        let p = cp.nrows();
        if p == 0 || cp.ncols() != n || cv.shape() != (p, n) {
            return Err(Error::DimensionMismatch(format!(
                "C_p is {:?} and C_v is {:?}, expected (p, {n})",
                cp.shape(),
                cv.shape()
            )));
        }
        for (a, name) in [
            (&m, "M"),
            (&e, "E"),
            (&k, "K"),
            (&bu, "B_u"),
            (&cp, "C_p"),
            (&cv, "C_v"),
        ] {
            if !linalg::all_finite(a) {
                return Err(Error::NonFinite(name));
            }
        }
        let smin = linalg::min_singular_value(&m);
        if !(smin > 1e-14 * m.norm()) {
            return Err(Error::SingularMass);
        }
        Ok(Self { m, e, k, bu, cp, cv })
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.bu.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.cp.nrows()
    }

    pub fn is_symmetric(&self) -> bool {
        let sym = |a: &Mat| (a - a.transpose()).norm() <= 1e-12 * a.norm().max(1.0);
        sym(&self.m) && sym(&self.e) && sym(&self.k)
    }
}

/// Free-form spelling of [`make_second_order`].
pub fn make_second_order(
    m: Mat,
    e: Mat,
    k: Mat,
    bu: Mat,
    cp: Mat,
    cv: Mat,
) -> Result<SecondOrderSystem> {
    SecondOrderSystem::new(m, e, k, bu, cp, cv)
}

/// Generalized state-space system `E q' = A q + B u`, `y = C q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub e: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
}

impl StateSpace {
    pub fn new(e: Mat, a: Mat, b: Mat, c: Mat) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || e.shape() != (n, n) || b.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "E {:?}, A {:?}, B {:?}, C {:?}",
                e.shape(),
                a.shape(),
                b.shape(),
                c.shape()
            )));
        }
        Ok(Self { e, a, b, c })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Dual system `(E^T, A^T, C^T, B^T)`; its controllability Gramians are
    /// the observability Gramians of `self`.
    pub fn dual(&self) -> StateSpace {
        StateSpace {
            e: self.e.transpose(),
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
        }
    }
}

/// Choice of the free block `J` in the first companion form.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum JChoice {
    #[default]
    Identity,
    NegativeStiffness,
    Custom(Mat),
}

impl JChoice {
    pub fn resolve(&self, sys: &SecondOrderSystem) -> Result<Mat> {
        let n = sys.order();
        let j = match self {
            JChoice::Identity => Mat::identity(n, n),
            JChoice::NegativeStiffness => -&sys.k,
            JChoice::Custom(j) => {
                if j.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!(
                        "J is {:?}, expected ({n}, {n})",
                        j.shape()
                    )));
                }
                j.clone()
            }
        };
        if !(linalg::min_singular_value(&j) > 1e-14 * j.norm()) {
            return Err(Error::SingularJ);
        }
        Ok(j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RealizationKind {
    Companion { j: Mat },
    StrictlyDissipative { gamma: f64 },
}

/// First-order realization of a second-order system with state `[x; x']`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderRealization {
    pub ss: StateSpace,
    pub kind: RealizationKind,
}

impl std::ops::Deref for FirstOrderRealization {
    type Target = StateSpace;

    fn deref(&self) -> &StateSpace {
        &self.ss
    }
}

/// First companion form with `E = diag(J, M)`, `A = [0 J; -K -E]`.
pub fn first_companion(sys: &SecondOrderSystem, j: &JChoice) -> Result<FirstOrderRealization> {
    let j = j.resolve(sys)?;
    let n = sys.order();
    let zero = Mat::zeros(n, n);
    let e = block2x2(&j, &zero, &zero, &sys.m);
    let a = block2x2(&zero, &j, &(-&sys.k), &(-&sys.e));
    let b = vstack(&Mat::zeros(n, sys.inputs()), &sys.bu);
    let c = hstack(&sys.cp, &sys.cv);
    Ok(FirstOrderRealization {
        ss: StateSpace { e, a, b, c },
        kind: RealizationKind::Companion { j },
    })
}

/// Upper bound `lambda_min(E (M + E K^-1 E / 4)^-1)` on the dissipative
/// realization parameter. Requires symmetric positive definite `M`, `E`, `K`.
pub fn dissipative_gamma_bound(sys: &SecondOrderSystem) -> Result<f64> {
    for (a, name) in [(&sys.m, "M"), (&sys.e, "E"), (&sys.k, "K")] {
        if !linalg::is_spd(a) {
            return Err(Error::NotSpd(name));
        }
    }
    let kinv_e = linalg::solve(&sys.k, &sys.e, "K")?;
    let s = linalg::symmetrize(&(&sys.m + (&sys.e * kinv_e) * 0.25));
    // generalized symmetric problem E x = lambda S x through S = L L^T
    let chol = Cholesky::new(s).ok_or(Error::NotSpd("M + E K^-1 E / 4"))?;
    let l = chol.l();
    let linv_e = l
        .solve_lower_triangular(&sys.e)
        .ok_or(Error::Singular("Cholesky factor"))?;
    let reduced = l
        .solve_lower_triangular(&linv_e.transpose())
        .ok_or(Error::Singular("Cholesky factor"))?;
    let (vals, _) = linalg::sym_eig(&reduced);
    Ok(*vals.last().expect("non-empty"))
}

/// Strictly dissipative realization with symmetric positive definite `E`
/// and negative definite `A + A^T`. Defaults to half the admissible bound.
pub fn strictly_dissipative(
    sys: &SecondOrderSystem,
    gamma: Option<f64>,
) -> Result<FirstOrderRealization> {
    let bound = dissipative_gamma_bound(sys)?;
    let gamma = gamma.unwrap_or(0.5 * bound);
    if !(gamma > 0.0 && gamma < bound) {
        return Err(Error::GammaOutOfRange { gamma, bound });
    }
    let (m, e, k) = (&sys.m, &sys.e, &sys.k);
    let ecal = block2x2(k, &(m * gamma), &(m * gamma), m);
    let acal = block2x2(&(k * -gamma), &(k - e * gamma), &(-k), &(m * gamma - e));
    let bcal = vstack(&(&sys.bu * gamma), &sys.bu);
    let ccal = hstack(&sys.cp, &sys.cv);

    let (ev, _) = linalg::sym_eig(&ecal);
    let (av, _) = linalg::sym_eig(&(&acal + acal.transpose()));
    let tol_e = 1e-10 * ecal.norm();
    let tol_a = 1e-10 * (&acal + acal.transpose()).norm();
    if !(ev.last().copied().unwrap_or(0.0) > tol_e && av[0] < -tol_a) {
        return Err(Error::GammaOutOfRange { gamma, bound });
    }
    Ok(FirstOrderRealization {
        ss: StateSpace {
            e: ecal,
            a: acal,
            b: bcal,
            c: ccal,
        },
        kind: RealizationKind::StrictlyDissipative { gamma },
    })
}

/// Anything with a rational transfer matrix.
pub trait TransferFunction {
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;
    fn transfer(&self, s: Complex64) -> Result<CMat>;
}

/// `H(s)` for second-order or first-order models.
pub fn eval_transfer<T: TransferFunction + ?Sized>(model: &T, s: Complex64) -> Result<CMat> {
    model.transfer(s)
}

fn singular_at(s: Complex64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Singular(_) => Error::SingularAtFrequency { re: s.re, im: s.im },
        other => other,
    }
}

impl TransferFunction for SecondOrderSystem {
    fn inputs(&self) -> usize {
        self.bu.ncols()
    }

    fn outputs(&self) -> usize {
        self.cp.nrows()
    }

    fn transfer(&self, s: Complex64) -> Result<CMat> {
        let pencil = to_complex(&self.m) * (s * s) + to_complex(&self.e) * s + to_complex(&self.k);
        let lu = Lu::new(&pencil, "s^2 M + s E + K").map_err(singular_at(s))?;
        let x = lu.solve(&to_complex(&self.bu));
        let out = to_complex(&self.cv) * s + to_complex(&self.cp);
        Ok(out * x)
    }
}

impl TransferFunction for StateSpace {
    fn inputs(&self) -> usize {
        self.b.ncols()
    }

    fn outputs(&self) -> usize {
        self.c.nrows()
    }

    fn transfer(&self, s: Complex64) -> Result<CMat> {
        let pencil = to_complex(&self.e) * s - to_complex(&self.a);
        let lu = Lu::new(&pencil, "sE - A").map_err(singular_at(s))?;
        Ok(to_complex(&self.c) * lu.solve(&to_complex(&self.b)))
    }
}

impl TransferFunction for FirstOrderRealization {
    fn inputs(&self) -> usize {
        self.ss.inputs()
    }

    fn outputs(&self) -> usize {
        self.ss.outputs()
    }

    fn transfer(&self, s: Complex64) -> Result<CMat> {
        self.ss.transfer(s)
    }
}

/// Maps an observability factor computed on the strictly dissipative
/// realization to the companion form with block `j`: `Q = T^T Q~ T` with
/// `T = [K J^-1, gamma I; gamma M J^-1, I]`. Controllability factors are
/// realization independent and need no transformation.
pub fn gramian_backtransform(
    q_tilde: &GramianFactor,
    sys: &SecondOrderSystem,
    gamma: f64,
    j: &Mat,
) -> Result<GramianFactor> {
    let n = sys.order();
    if q_tilde.z.nrows() != 2 * n || j.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "factor has {} rows for a system of order {n}",
            q_tilde.z.nrows()
        )));
    }
    let jinv = linalg::inverse(j, "J")?;
    let eye = Mat::identity(n, n);
    let t = block2x2(&(&sys.k * &jinv), &(&eye * gamma), &((&sys.m * &jinv) * gamma), &eye);
    Ok(GramianFactor {
        z: t.transpose() * &q_tilde.z,
        y: q_tilde.y.clone(),
    })
}
