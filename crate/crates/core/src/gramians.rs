//! Infinite, frequency-limited, time-limited and modified Gramian pairs of
//! first-order realizations, their position/velocity partitioning and the
//! second-order characteristic values.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Mat};
use crate::lyapunov::{
    default_frequency_shifts, default_time_shifts, solve_lyap_projection, solve_lyap_sign_dual,
    GramianFactor, IndefiniteRhs, SignOptions,
};
use crate::matfun::{freq_limited_rhs, time_limited_rhs, FrequencyBand, LimitedRhs, TimeWindow};
use crate::system::{FirstOrderRealization, RealizationKind, SecondOrderSystem, StateSpace};

/// Relative cutoff for the eigenvalues of an indefinite right-hand side.
const RHS_EIG_CUTOFF: f64 = 1e-12;
const DEFAULT_SHIFT_COUNT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GramianFlavor {
    Infinite,
    FrequencyLimited(FrequencyBand),
    TimeLimited(TimeWindow),
    ModifiedFrequency(FrequencyBand),
    ModifiedTime(TimeWindow),
}

/// Frequency band or time window for the limited Gramians.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitedDomain {
    Frequency(FrequencyBand),
    Time(TimeWindow),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GramianSolver {
    /// Factored sign-function iteration on the full realization.
    DenseSign(SignOptions),
    /// Galerkin projection on a rational Krylov space; default shifts are
    /// derived from the band or window when `shifts` is `None`.
    Projection {
        shifts: Option<Vec<Complex64>>,
        tol: f64,
    },
}

impl Default for GramianSolver {
    fn default() -> Self {
        GramianSolver::DenseSign(SignOptions::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramianPair {
    pub controllability: GramianFactor,
    pub observability: GramianFactor,
    pub flavor: GramianFlavor,
    pub realization_kind: RealizationKind,
}

/// Definite replacement `U_1 |eta|^{1/2}` of an indefinite right-hand side
/// `G S G^T = U diag(eta) U^T`.
pub fn make_definite(rhs: &IndefiniteRhs) -> IndefiniteRhs {
    let n = rhs.g.nrows();
    if rhs.g.ncols() == 0 {
        return IndefiniteRhs::definite(Mat::zeros(n, 0));
    }
    let qr = rhs.g.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let (vals, vecs) = sym_eig(&(&r * &rhs.s * r.transpose()));
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len())
        .filter(|&i| scale > 0.0 && vals[i].abs() > RHS_EIG_CUTOFF * scale)
        .collect();
    let mut u = Mat::zeros(vecs.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        u.set_column(dst, &(vecs.column(src) * vals[src].abs().sqrt()));
    }
    IndefiniteRhs::definite(q * u)
}

/// Controllability and observability right-hand sides of `ss` for the
/// given flavor. The observability factor holds `C^T`-shaped columns.
pub fn rhs_pair(ss: &StateSpace, flavor: &GramianFlavor) -> Result<(IndefiniteRhs, IndefiniteRhs)> {
    let ct = ss.c.transpose();
    let limited = |rhs: LimitedRhs| match rhs {
        LimitedRhs::Frequency { b_omega, c_omega } => (
            IndefiniteRhs::symmetric_sum(&b_omega, &ss.b),
            IndefiniteRhs::symmetric_sum(&c_omega.transpose(), &ct),
        ),
        LimitedRhs::Time {
            b_t0,
            b_tf,
            c_t0,
            c_tf,
        } => (
            IndefiniteRhs::difference(&b_t0, &b_tf),
            IndefiniteRhs::difference(&c_t0.transpose(), &c_tf.transpose()),
        ),
    };
    Ok(match flavor {
        GramianFlavor::Infinite => (IndefiniteRhs::definite(ss.b.clone()), IndefiniteRhs::definite(ct)),
        GramianFlavor::FrequencyLimited(band) => limited(freq_limited_rhs(ss, band)?),
        GramianFlavor::TimeLimited(window) => limited(time_limited_rhs(ss, window)?),
        GramianFlavor::ModifiedFrequency(band) => {
            let (c, o) = limited(freq_limited_rhs(ss, band)?);
            (make_definite(&c), make_definite(&o))
        }
        GramianFlavor::ModifiedTime(window) => {
            let (c, o) = limited(time_limited_rhs(ss, window)?);
            (make_definite(&c), make_definite(&o))
        }
    })
}

fn default_shifts(flavor: &GramianFlavor, ss: &StateSpace) -> Vec<Complex64> {
    match flavor {
        GramianFlavor::FrequencyLimited(band) | GramianFlavor::ModifiedFrequency(band) => {
            default_frequency_shifts(band, DEFAULT_SHIFT_COUNT)
        }
        GramianFlavor::TimeLimited(window) | GramianFlavor::ModifiedTime(window) => {
            default_time_shifts(window, ss.order(), DEFAULT_SHIFT_COUNT)
        }
        GramianFlavor::Infinite => {
            // spread over the spectral range of the pencil
            let scale = ss.a.norm() / ss.e.norm().max(f64::MIN_POSITIVE);
            crate::linalg::logspace(scale * 1e-4, scale, DEFAULT_SHIFT_COUNT)
                .into_iter()
                .map(|w| Complex64::new(0.0, w))
                .collect()
        }
    }
}

/// Gramian pair of a realization for any flavor and solver.
pub fn compute_gramians(
    real: &FirstOrderRealization,
    flavor: &GramianFlavor,
    solver: &GramianSolver,
) -> Result<GramianPair> {
    let ss = &real.ss;
    let (controllability, observability) = match solver {
        GramianSolver::DenseSign(opts) => {
            let (ctrl, obs) = rhs_pair(ss, flavor)?;
            solve_lyap_sign_dual(&ss.a, &ss.e, &ctrl, &obs, opts)?
        }
        GramianSolver::Projection { shifts, tol } => {
            let shifts = shifts.clone().unwrap_or_else(|| default_shifts(flavor, ss));
            // the controllability side of the dual system is the
            // observability side of the original one
            let builder = |small: &StateSpace| rhs_pair(small, flavor).map(|(c, _)| c);
            let p = solve_lyap_projection(ss, &builder, &shifts, *tol)?;
            let q = solve_lyap_projection(&ss.dual(), &builder, &shifts, *tol)?;
            (p, q)
        }
    };
    Ok(GramianPair {
        controllability,
        observability,
        flavor: flavor.clone(),
        realization_kind: real.kind.clone(),
    })
}

pub fn infinite_gramians(real: &FirstOrderRealization) -> Result<GramianPair> {
    compute_gramians(real, &GramianFlavor::Infinite, &GramianSolver::default())
}

pub fn frequency_limited_gramians(real: &FirstOrderRealization, band: &FrequencyBand) -> Result<GramianPair> {
    compute_gramians(
        real,
        &GramianFlavor::FrequencyLimited(band.clone()),
        &GramianSolver::default(),
    )
}

pub fn time_limited_gramians(real: &FirstOrderRealization, window: &TimeWindow) -> Result<GramianPair> {
    compute_gramians(real, &GramianFlavor::TimeLimited(*window), &GramianSolver::default())
}

pub fn modified_gramians(real: &FirstOrderRealization, domain: &LimitedDomain) -> Result<GramianPair> {
    let flavor = match domain {
        LimitedDomain::Frequency(band) => GramianFlavor::ModifiedFrequency(band.clone()),
        LimitedDomain::Time(window) => GramianFlavor::ModifiedTime(*window),
    };
    compute_gramians(real, &flavor, &GramianSolver::default())
}

/// Root factors split into position and velocity rows:
/// `P = [R_p; R_v][R_p; R_v]^T`, `Q = [L_p; L_v][L_p; L_v]^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedFactors {
    pub rp: Mat,
    pub rv: Mat,
    pub lp: Mat,
    pub lv: Mat,
}

fn split_rows(r: &Mat, n: usize) -> (Mat, Mat) {
    let k = r.ncols();
    (r.view((0, 0), (n, k)).into_owned(), r.view((n, 0), (n, k)).into_owned())
}

/// Converts both factors to root form (negative core eigenvalues, which can
/// only stem from rounding for these Gramians, are clipped) and splits the
/// rows at `n`.
pub fn partition(pair: &GramianPair, n: usize) -> Result<PartitionedFactors> {
    for f in [&pair.controllability, &pair.observability] {
        if f.order() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "factor of order {} cannot be split at {n}",
                f.order()
            )));
        }
    }
    let (rp, rv) = split_rows(&pair.controllability.root(), n);
    let (lp, lv) = split_rows(&pair.observability.root(), n);
    Ok(PartitionedFactors { rp, rv, lp, lv })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CharacteristicKind {
    /// `L_p^T J R_p`
    Position,
    /// `L_v^T M R_p`
    PositionVelocity,
    /// `L_p^T J R_v`
    VelocityPosition,
    /// `L_v^T M R_v`
    Velocity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicValues {
    pub kind: CharacteristicKind,
    pub sigma: Vec<f64>,
}

/// The product whose singular values define `kind`.
pub fn balanced_product(
    pf: &PartitionedFactors,
    sys: &SecondOrderSystem,
    j: &Mat,
    kind: CharacteristicKind,
) -> Result<Mat> {
    let n = sys.order();
    for (f, name) in [(&pf.rp, "R_p"), (&pf.rv, "R_v"), (&pf.lp, "L_p"), (&pf.lv, "L_v")] {
        if f.nrows() != n {
            return Err(Error::DimensionMismatch(format!("{name} has {} rows, expected {n}", f.nrows())));
        }
    }
    if j.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("J is {:?}", j.shape())));
    }
    Ok(match kind {
        CharacteristicKind::Position => pf.lp.transpose() * j * &pf.rp,
        CharacteristicKind::PositionVelocity => pf.lv.transpose() * &sys.m * &pf.rp,
        CharacteristicKind::VelocityPosition => pf.lp.transpose() * j * &pf.rv,
        CharacteristicKind::Velocity => pf.lv.transpose() * &sys.m * &pf.rv,
    })
}

pub fn characteristic_values(
    pf: &PartitionedFactors,
    sys: &SecondOrderSystem,
    j: &Mat,
    kind: CharacteristicKind,
) -> Result<CharacteristicValues> {
    let product = balanced_product(pf, sys, j, kind)?;
    let sigma = if product.is_empty() {
        Vec::new()
    } else {
        let mut s: Vec<f64> = product.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    Ok(CharacteristicValues { kind, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::solve_lyap_dense_oracle;
    use crate::system::{first_companion, random_second_order, JChoice};

    fn unit_oscillator() -> SecondOrderSystem {
        let s = |x: f64| Mat::from_element(1, 1, x);
        SecondOrderSystem::new(s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(0.0)).unwrap()
    }

    fn scalar_realization(a: f64) -> FirstOrderRealization {
        let s = |x: f64| Mat::from_element(1, 1, x);
        FirstOrderRealization {
            ss: StateSpace::new(s(1.0), s(a), s(1.0), s(1.0)).unwrap(),
            kind: RealizationKind::Companion { j: s(1.0) },
        }
    }

    #[test]
    fn unit_oscillator_partitioned_gramians() {
        let sys = unit_oscillator();
        let real = first_companion(&sys, &JChoice::Identity).unwrap();
        let pair = infinite_gramians(&real).unwrap();
        let p = pair.controllability.gramian();
        let q = pair.observability.gramian();
        // hand solution of the 2x2 Lyapunov equations
        assert!((p - Mat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5])).norm() < 1e-12);
        assert!((q - Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.5])).norm() < 1e-12);

        let pf = partition(&pair, 1).unwrap();
        assert!(((&pf.rp * pf.rp.transpose())[(0, 0)] - 0.5).abs() < 1e-12);
        assert!(((&pf.lp * pf.lp.transpose())[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(((&pf.lv * pf.lv.transpose())[(0, 0)] - 0.5).abs() < 1e-12);

        let j = Mat::identity(1, 1);
        let val = |kind| characteristic_values(&pf, &sys, &j, kind).unwrap().sigma[0];
        assert!((val(CharacteristicKind::Position) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((val(CharacteristicKind::Velocity) - 0.5).abs() < 1e-12);
        assert!((val(CharacteristicKind::PositionVelocity) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_input_gives_zero_gramian() {
        let mut sys = unit_oscillator();
        sys.bu = Mat::zeros(1, 1);
        let pair = infinite_gramians(&first_companion(&sys, &JChoice::Identity).unwrap()).unwrap();
        assert_eq!(pair.controllability.gramian(), Mat::zeros(2, 2));
        let pf = partition(&pair, 1).unwrap();
        let cv = characteristic_values(&pf, &sys, &Mat::identity(1, 1), CharacteristicKind::Position).unwrap();
        assert!(cv.sigma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn scalar_limited_gramians() {
        let real = scalar_realization(-1.0);
        let band = FrequencyBand::single(1.0, 2.0).unwrap();
        let fl = frequency_limited_gramians(&real, &band).unwrap();
        assert!((fl.controllability.gramian()[(0, 0)] - 0.1024163823).abs() < 1e-10);
        assert!((fl.observability.gramian()[(0, 0)] - 0.1024163823).abs() < 1e-10);

        let tl = time_limited_gramians(&real, &TimeWindow::new(0.0, 1.0).unwrap()).unwrap();
        assert!((tl.controllability.gramian()[(0, 0)] - 0.4323323584).abs() < 1e-10);

        let tl = time_limited_gramians(&real, &TimeWindow::new(1.0, 2.0).unwrap()).unwrap();
        let exact = ((-2f64).exp() - (-4f64).exp()) / 2.0;
        assert!((tl.controllability.gramian()[(0, 0)] - exact).abs() < 1e-12);
    }

    #[test]
    fn long_window_recovers_infinite_gramian() {
        let real = scalar_realization(-1.0);
        let tl = time_limited_gramians(&real, &TimeWindow::new(0.0, 50.0).unwrap()).unwrap();
        assert!((tl.controllability.gramian()[(0, 0)] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn modified_scalar_gramian() {
        let real = scalar_realization(-1.0);
        let band = FrequencyBand::single(1.0, 2.0).unwrap();
        let f = (2f64.atan() - 1f64.atan()) / std::f64::consts::PI;
        let pair = modified_gramians(&real, &LimitedDomain::Frequency(band)).unwrap();
        // the scalar right-hand side 2 f is already definite
        assert!((pair.controllability.gramian()[(0, 0)] - f).abs() < 1e-12);
    }

    #[test]
    fn modified_matches_unmodified_for_definite_rhs() {
        let rhs = IndefiniteRhs::definite(Mat::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, 0.0, 3.0]));
        let d = make_definite(&rhs);
        assert!((d.full() - rhs.full()).norm() < 1e-12 * rhs.full().norm());
    }

    #[test]
    fn characteristic_values_match_eigenvalues_of_products() {
        for seed in 0..3 {
            let sys = random_second_order(5, 1, 2, seed);
            let real = first_companion(&sys, &JChoice::Identity).unwrap();
            let pair = infinite_gramians(&real).unwrap();
            let pf = partition(&pair, 5).unwrap();
            let j = Mat::identity(5, 5);
            let sigma = characteristic_values(&pf, &sys, &j, CharacteristicKind::Position).unwrap().sigma;
            let pp = &pf.rp * pf.rp.transpose();
            let qp = &pf.lp * pf.lp.transpose();
            let prod = pp * j.transpose() * qp * &j;
            let mut eig: Vec<f64> = prod
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re.max(0.0).sqrt())
                .collect();
            eig.sort_by(|a, b| b.total_cmp(a));
            for (s, e) in sigma.iter().zip(&eig) {
                assert!((s - e).abs() <= 1e-10 * sigma[0], "seed {seed}: {s} vs {e}");
            }
        }
    }

    #[test]
    fn partition_stacks_back_exactly() {
        let z = Mat::identity(4, 4);
        let pair = GramianPair {
            controllability: GramianFactor::from_root(z.clone()),
            observability: GramianFactor::from_root(z.clone()),
            flavor: GramianFlavor::Infinite,
            realization_kind: RealizationKind::StrictlyDissipative { gamma: 0.1 },
        };
        let pf = partition(&pair, 2).unwrap();
        assert_eq!(crate::linalg::vstack(&pf.rp, &pf.rv), z);
        assert_eq!(pf.rp, z.view((0, 0), (2, 4)).into_owned());
        assert!(partition(&pair, 3).is_err());
    }

    #[test]
    fn dense_and_projection_solvers_agree() {
        let sys = random_second_order(6, 1, 1, 4);
        let real = first_companion(&sys, &JChoice::Identity).unwrap();
        let band = FrequencyBand::single(0.2, 2.0).unwrap();
        let flavor = GramianFlavor::FrequencyLimited(band);
        let dense = compute_gramians(&real, &flavor, &GramianSolver::default()).unwrap();
        let proj = compute_gramians(
            &real,
            &flavor,
            &GramianSolver::Projection {
                shifts: None,
                tol: 1e-12,
            },
        )
        .unwrap();
        let p = dense.controllability.gramian();
        assert!((proj.controllability.gramian() - &p).norm() <= 1e-8 * p.norm());
        let q = solve_lyap_dense_oracle(
            &real.a.transpose(),
            &real.e.transpose(),
            &rhs_pair(&real, &flavor).unwrap().1.full(),
        )
        .unwrap();
        assert!((proj.observability.gramian() - &q).norm() <= 1e-8 * q.norm());
    }
}
