//! Truncation order selection, the eight second-order balancing formulas,
//! projection of second-order systems, and first-order square-root
//! balanced truncation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramians::{
    balanced_product, CharacteristicKind, CharacteristicValues, GramianFlavor, GramianPair,
    PartitionedFactors,
};
use crate::linalg::{Lu, Mat};
use crate::system::{SecondOrderSystem, StateSpace};

/// Singular values below this fraction of the largest one cannot be
/// balanced.
const RANK_TOL: f64 = 1e-14;
const MAX_CONDITION_S: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalancingFormula {
    P,
    Pm,
    Pv,
    Vp,
    Vpm,
    V,
    Fv,
    So,
}

impl BalancingFormula {
    pub const ALL: [BalancingFormula; 8] = [
        BalancingFormula::P,
        BalancingFormula::Pm,
        BalancingFormula::Pv,
        BalancingFormula::Vp,
        BalancingFormula::Vpm,
        BalancingFormula::V,
        BalancingFormula::Fv,
        BalancingFormula::So,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BalancingFormula::P => "p",
            BalancingFormula::Pm => "pm",
            BalancingFormula::Pv => "pv",
            BalancingFormula::Vp => "vp",
            BalancingFormula::Vpm => "vpm",
            BalancingFormula::V => "v",
            BalancingFormula::Fv => "fv",
            BalancingFormula::So => "so",
        }
    }
}

impl fmt::Display for BalancingFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BalancingFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown balancing formula '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderSpec {
    /// Smallest `r` with `sum_{k>r} sigma_k <= tol * sigma_1`.
    Tol(f64),
    Fixed(usize),
}

impl Default for OrderSpec {
    fn default() -> Self {
        OrderSpec::Tol(1e-4)
    }
}

pub fn select_order(sigma: &[f64], spec: &OrderSpec) -> Result<usize> {
    if sigma.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    match *spec {
        OrderSpec::Fixed(r) => {
            if r == 0 || r > sigma.len() {
                return Err(Error::InvalidParams(format!(
                    "fixed order {r} outside 1..={}",
                    sigma.len()
                )));
            }
            Ok(r)
        }
        OrderSpec::Tol(tol) => {
            if !(tol > 0.0) {
                return Err(Error::InvalidParams(format!("tolerance {tol} must be positive")));
            }
            let bound = tol * sigma[0];
            let mut tail = 0.0;
            let mut r = sigma.len();
            // walk from the back while the discarded tail stays admissible
            while r > 1 {
                let next = tail + sigma[r - 1];
                if next > bound {
                    break;
                }
                tail = next;
                r -= 1;
            }
            Ok(r)
        }
    }
}

pub fn truncated_sum(sigma: &[f64], r: usize) -> f64 {
    sigma.iter().skip(r).sum()
}

struct Svd {
    u: Mat,
    sigma: Vec<f64>,
    v: Mat,
}

/// SVD with singular values sorted descending.
fn svd(a: &Mat) -> Svd {
    let k = a.nrows().min(a.ncols());
    if k == 0 {
        return Svd {
            u: Mat::zeros(a.nrows(), 0),
            sigma: Vec::new(),
            v: Mat::zeros(a.ncols(), 0),
        };
    }
    let s = a.clone().svd(true, true);
    let u = s.u.expect("requested");
    let v = s.v_t.expect("requested").transpose();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s.singular_values[j].total_cmp(&s.singular_values[i]));
    let mut su = Mat::zeros(u.nrows(), k);
    let mut sv = Mat::zeros(v.nrows(), k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v.column(src));
    }
    Svd {
        u: su,
        sigma: order.iter().map(|&i| s.singular_values[i]).collect(),
        v: sv,
    }
}

/// `X[:, ..r] diag(sigma[..r])^{-1/2}`
fn scaled(x: &Mat, sigma: &[f64], r: usize) -> Mat {
    let mut out = x.columns(0, r).into_owned();
    for j in 0..r {
        out.column_mut(j).scale_mut(1.0 / sigma[j].sqrt());
    }
    out
}

fn check_rank(sigma: &[f64], r: usize) -> Result<()> {
    if r == 0 || r > sigma.len() {
        return Err(Error::RankDeficient { r });
    }
    if !(sigma[r - 1] > RANK_TOL * sigma[0]) {
        return Err(Error::RankDeficient { r });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projectors {
    /// `M^ = W^T M T` and so on.
    TwoSided { w: Mat, t: Mat },
    /// Position and velocity projectors recombined through `S = W_p^T J T_v`.
    SecondOrder { wp: Mat, wv: Mat, tp: Mat, tv: Mat },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancingResult {
    pub formula: BalancingFormula,
    pub projectors: Projectors,
    /// Values the order was selected from; the position values for `so`.
    pub sigma: CharacteristicValues,
    /// Velocity values, only for `so`.
    pub sigma_velocity: Option<CharacteristicValues>,
    pub r: usize,
    pub truncated_sum: f64,
}

/// Projectors of one row of the second-order balancing table.
pub fn second_order_projectors(
    pf: &PartitionedFactors,
    sys: &SecondOrderSystem,
    j: &Mat,
    formula: BalancingFormula,
    order: &OrderSpec,
) -> Result<BalancingResult> {
    use CharacteristicKind::*;
    let product = |kind| balanced_product(pf, sys, j, kind);
    // M^-T J^T L_p
    let left_mass = || -> Result<Mat> {
        let lu = Lu::new(&sys.m.transpose(), "M").map_err(|_| Error::SingularMass)?;
        Ok(lu.solve(&(j.transpose() * &pf.lp)))
    };
    let finish = |kind, s: &Svd, r: usize, projectors| BalancingResult {
        formula,
        projectors,
        sigma: CharacteristicValues {
            kind,
            sigma: s.sigma.clone(),
        },
        sigma_velocity: None,
        r,
        truncated_sum: truncated_sum(&s.sigma, r),
    };

    match formula {
        BalancingFormula::So => {
            let sp = svd(&product(Position)?);
            let sv = svd(&product(Velocity)?);
            let r = match order {
                OrderSpec::Fixed(_) => select_order(&sp.sigma, order)?,
                OrderSpec::Tol(_) => {
                    let r = select_order(&sp.sigma, order)?.max(select_order(&sv.sigma, order)?);
                    r.min(sp.sigma.len()).min(sv.sigma.len())
                }
            };
            check_rank(&sp.sigma, r)?;
            check_rank(&sv.sigma, r)?;
            let projectors = Projectors::SecondOrder {
                wp: &pf.lp * scaled(&sp.u, &sp.sigma, r),
                tp: &pf.rp * scaled(&sp.v, &sp.sigma, r),
                wv: &pf.lv * scaled(&sv.u, &sv.sigma, r),
                tv: &pf.rv * scaled(&sv.v, &sv.sigma, r),
            };
            let mut result = finish(Position, &sp, r, projectors);
            result.sigma_velocity = Some(CharacteristicValues {
                kind: Velocity,
                sigma: sv.sigma,
            });
            Ok(result)
        }
        _ => {
            // (product giving sigma and V, product giving U)
            let (main_kind, u_kind) = match formula {
                BalancingFormula::V => (Velocity, None),
                BalancingFormula::Fv => (Position, None),
                BalancingFormula::Vpm => (VelocityPosition, None),
                BalancingFormula::Pm => (Position, None),
                BalancingFormula::Pv => (PositionVelocity, None),
                BalancingFormula::Vp => (VelocityPosition, Some(PositionVelocity)),
                BalancingFormula::P => (Position, Some(Velocity)),
                BalancingFormula::So => unreachable!(),
            };
            let main = svd(&product(main_kind)?);
            let r = select_order(&main.sigma, order)?;
            check_rank(&main.sigma, r)?;
            let u = match u_kind {
                Some(kind) => {
                    let other = svd(&product(kind)?);
                    if other.u.ncols() < r {
                        return Err(Error::RankDeficient { r });
                    }
                    other.u
                }
                None => main.u.clone(),
            };
            let right_source = match formula {
                BalancingFormula::V | BalancingFormula::Vpm | BalancingFormula::Vp => &pf.rv,
                _ => &pf.rp,
            };
            let t = right_source * scaled(&main.v, &main.sigma, r);
            let w = match formula {
                BalancingFormula::Fv => t.clone(),
                BalancingFormula::Pm | BalancingFormula::Vpm => left_mass()? * scaled(&u, &main.sigma, r),
                _ => &pf.lv * scaled(&u, &main.sigma, r),
            };
            Ok(finish(main_kind, &main, r, Projectors::TwoSided { w, t }))
        }
    }
}

/// Where a reduced model came from.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Provenance {
    pub formula: Option<BalancingFormula>,
    pub flavor: Option<GramianFlavor>,
    pub alpha: f64,
    pub realization: Option<String>,
    pub solver: Option<String>,
    pub r: usize,
    pub sigma_truncated_sum: f64,
    pub prereduced_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub system: SecondOrderSystem,
    pub provenance: Provenance,
}

fn check_projector(x: &Mat, n: usize, name: &str) -> Result<()> {
    if x.nrows() != n || x.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {:?}, expected ({n}, r >= 1)",
            x.shape()
        )));
    }
    Ok(())
}

/// `M^ = W^T M T`, `E^ = W^T E T`, `K^ = W^T K T`, `B^ = W^T B_u`,
/// `C^_p = C_p T`, `C^_v = C_v T`.
pub fn apply_projection(sys: &SecondOrderSystem, w: &Mat, t: &Mat) -> Result<ReducedModel> {
    let n = sys.order();
    check_projector(w, n, "W")?;
    check_projector(t, n, "T")?;
    if w.ncols() != t.ncols() {
        return Err(Error::DimensionMismatch("W and T differ in width".into()));
    }
    let wt = w.transpose();
    let system = SecondOrderSystem::new(
        &wt * &sys.m * t,
        &wt * &sys.e * t,
        &wt * &sys.k * t,
        &wt * &sys.bu,
        &sys.cp * t,
        &sys.cv * t,
    )?;
    Ok(ReducedModel {
        provenance: Provenance {
            r: t.ncols(),
            ..Provenance::default()
        },
        system,
    })
}

/// Second-order structure recovered from position and velocity projectors
/// with `S = W_p^T J T_v`.
pub fn so_reconstruct(
    sys: &SecondOrderSystem,
    wp: &Mat,
    wv: &Mat,
    tp: &Mat,
    tv: &Mat,
    j: &Mat,
) -> Result<ReducedModel> {
    let n = sys.order();
    for (x, name) in [(wp, "W_p"), (wv, "W_v"), (tp, "T_p"), (tv, "T_v")] {
        check_projector(x, n, name)?;
    }
    let r = tp.ncols();
    if [wp, wv, tv].iter().any(|x| x.ncols() != r) {
        return Err(Error::DimensionMismatch("projector widths differ".into()));
    }
    let s = wp.transpose() * j * tv;
    let sv = s.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION_S) {
        return Err(Error::SingularS { cond });
    }
    let s_lu = Lu::new(&s.transpose(), "S").map_err(|_| Error::SingularS { cond })?;
    // X S^-1 = (S^-T X^T)^T
    let right_inv = |x: &Mat| s_lu.solve(&x.transpose()).transpose();
    let wvt = wv.transpose();
    let system = SecondOrderSystem::new(
        right_inv(&(&s * (&wvt * &sys.m * tv))),
        right_inv(&(&s * (&wvt * &sys.e * tv))),
        &s * (&wvt * &sys.k * tp),
        &s * (&wvt * &sys.bu),
        &sys.cp * tp,
        right_inv(&(&sys.cv * tv)),
    )?;
    Ok(ReducedModel {
        provenance: Provenance {
            r,
            ..Provenance::default()
        },
        system,
    })
}

/// Reduced model for a balancing result.
pub fn reduce_with_projectors(sys: &SecondOrderSystem, result: &BalancingResult, j: &Mat) -> Result<ReducedModel> {
    let mut rom = match &result.projectors {
        Projectors::TwoSided { w, t } => apply_projection(sys, w, t)?,
        Projectors::SecondOrder { wp, wv, tp, tv } => so_reconstruct(sys, wp, wv, tp, tv, j)?,
    };
    rom.provenance.formula = Some(result.formula);
    rom.provenance.sigma_truncated_sum = result.truncated_sum;
    Ok(rom)
}

/// First-order reduced model from square-root balanced truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderBt {
    pub rom: StateSpace,
    pub sigma: Vec<f64>,
    pub r: usize,
    /// `2 sum_{k>r} sigma_k`
    pub error_bound: f64,
}

pub fn first_order_bt(real: &StateSpace, pair: &GramianPair, order: &OrderSpec) -> Result<FirstOrderBt> {
    let r_fac = pair.controllability.root();
    let l_fac = pair.observability.root();
    if r_fac.nrows() != real.order() || l_fac.nrows() != real.order() {
        return Err(Error::DimensionMismatch("Gramian factors do not match the realization".into()));
    }
    let s = svd(&(l_fac.transpose() * &real.e * &r_fac));
    let r = select_order(&s.sigma, order)?;
    check_rank(&s.sigma, r)?;
    let t = &r_fac * scaled(&s.v, &s.sigma, r);
    let w = &l_fac * scaled(&s.u, &s.sigma, r);
    let wt = w.transpose();
    let rom = StateSpace {
        e: &wt * &real.e * &t,
        a: &wt * &real.a * &t,
        b: &wt * &real.b,
        c: &real.c * &t,
    };
    Ok(FirstOrderBt {
        rom,
        error_bound: 2.0 * truncated_sum(&s.sigma, r),
        sigma: s.sigma,
        r,
    })
}
