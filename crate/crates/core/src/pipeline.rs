//! End-to-end reduction: alpha-shifts, interpolatory pre-reduction,
//! Gramian computation, balancing and error reports.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balancing::{
    reduce_with_projectors, second_order_projectors, BalancingFormula, BalancingResult, OrderSpec, ReducedModel,
};
use crate::error::{Error, Result};
use crate::gramians::{compute_gramians, partition, GramianFlavor, GramianPair, GramianSolver, PartitionedFactors};
use crate::linalg::{logspace, orthonormal_basis, spectral_norm, to_complex, CMat, Lu, Mat};
use crate::matfun::{FrequencyBand, TimeWindow};
use crate::system::{
    check_stability, first_companion, gramian_backtransform, simulate, strictly_dissipative, JChoice,
    RealizationKind, SecondOrderSystem, Signal, TimeGrid, Trajectory, TransferFunction,
};

/// Directions below this fraction of the largest one are dropped from the
/// pre-reduction basis.
pub const DEFAULT_PREREDUCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyUnit {
    #[default]
    Hz,
    #[serde(alias = "rad")]
    RadS,
}

impl FrequencyUnit {
    pub fn to_rad_s(self, f: f64) -> f64 {
        match self {
            FrequencyUnit::Hz => 2.0 * std::f64::consts::PI * f,
            FrequencyUnit::RadS => f,
        }
    }
}

/// `E~ = E + 2 alpha M`, `K~ = K + alpha E + alpha^2 M`, `C~_p = C_p + alpha C_v`,
/// i.e. the system evaluated at `s + alpha`.
pub fn alpha_shift(sys: &SecondOrderSystem, alpha: f64) -> SecondOrderSystem {
    SecondOrderSystem {
        m: sys.m.clone(),
        e: &sys.e + &sys.m * (2.0 * alpha),
        k: &sys.k + &sys.e * alpha + &sys.m * (alpha * alpha),
        bu: sys.bu.clone(),
        cp: &sys.cp + &sys.cv * alpha,
        cv: sys.cv.clone(),
    }
}

/// Undoes [`alpha_shift`] on a reduced model.
pub fn alpha_backsubstitute(mut rom: ReducedModel, alpha: f64) -> ReducedModel {
    let s = &mut rom.system;
    let k = &s.k - &s.e * alpha + &s.m * (alpha * alpha);
    let e = &s.e - &s.m * (2.0 * alpha);
    s.cp = &s.cp - &s.cv * alpha;
    s.k = k;
    s.e = e;
    rom.provenance.alpha = alpha;
    rom
}

/// Angular frequencies `j w` log-spaced on `[wmin, wmax]`.
pub fn log_spaced_points(wmin: f64, wmax: f64, count: usize) -> Vec<Complex64> {
    logspace(wmin, wmax, count)
        .into_iter()
        .map(|w| Complex64::new(0.0, w))
        .collect()
}

fn shifted_pencil(sys: &SecondOrderSystem, s: Complex64) -> CMat {
    to_complex(&sys.m) * (s * s) + to_complex(&sys.e) * s + to_complex(&sys.k)
}

/// Interpolatory one-sided pre-reduction. The basis spans the real and
/// imaginary parts of `(s^2 M + s E + K)^-1 B_u` and
/// `(s^2 M + s E + K)^-H (C_p + s C_v)^H` for all sample points; conjugate
/// points add nothing new and are folded.
pub fn hybrid_prereduce(sys: &SecondOrderSystem, points: &[Complex64], tol: f64) -> Result<SecondOrderSystem> {
    if points.is_empty() {
        return Err(Error::InvalidParams("pre-reduction needs sample points".into()));
    }
    let mut folded: Vec<Complex64> = Vec::new();
    for &s in points {
        let s = if s.im < 0.0 { s.conj() } else { s };
        if !folded.iter().any(|p| (p - s).norm() <= 1e-14 * s.norm().max(1.0)) {
            folded.push(s);
        }
    }
    let blocks: Vec<Mat> = folded
        .par_iter()
        .map(|&s| -> Result<Mat> {
            let pencil = shifted_pencil(sys, s);
            let singular = |_| Error::SingularShiftedSystem { re: s.re, im: s.im };
            let x = Lu::new(&pencil, "s^2 M + s E + K").map_err(singular)?.solve(&to_complex(&sys.bu));
            let out = (to_complex(&sys.cv) * s + to_complex(&sys.cp)).adjoint();
            let y = Lu::new(&pencil.adjoint(), "(s^2 M + s E + K)^H")
                .map_err(singular)?
                .solve(&out);
            let dirs = [x, y];
            let cols: usize = dirs.iter().map(|d| d.ncols()).sum();
            let mut block = Mat::zeros(sys.order(), 2 * cols);
            let mut k = 0;
            for d in &dirs {
                for j in 0..d.ncols() {
                    let scale = d.column(j).norm().max(f64::MIN_POSITIVE);
                    block.set_column(k, &(d.column(j).map(|z| z.re) / scale));
                    block.set_column(k + 1, &(d.column(j).map(|z| z.im) / scale));
                    k += 2;
                }
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut stacked = Mat::zeros(sys.order(), total);
    let mut at = 0;
    for b in &blocks {
        stacked.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    let v = orthonormal_basis(&stacked, tol);
    if v.ncols() == 0 {
        return Err(Error::InvalidParams("pre-reduction basis is empty".into()));
    }
    let vt = v.transpose();
    SecondOrderSystem::new(
        &vt * &sys.m * &v,
        &vt * &sys.e * &v,
        &vt * &sys.k * &v,
        &vt * &sys.bu,
        &sys.cp * &v,
        &sys.cv * &v,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Bt,
    Flbt,
    Tlbt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RealizationChoice {
    Companion(JChoice),
    /// `gamma = None` picks half the admissible bound.
    StrictlyDissipative { gamma: Option<f64> },
}

impl Default for RealizationChoice {
    fn default() -> Self {
        RealizationChoice::Companion(JChoice::Identity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub points: Vec<Complex64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReductionConfig {
    pub method: Method,
    pub formula: BalancingFormula,
    pub band: Option<FrequencyBand>,
    pub window: Option<TimeWindow>,
    pub alpha: f64,
    pub realization: RealizationChoice,
    pub solver: GramianSolver,
    /// Use the definite (modified) right-hand sides for limited methods.
    pub modified: bool,
    pub hybrid: Option<HybridConfig>,
    pub order: OrderSpec,
}

impl Default for BalancingFormula {
    fn default() -> Self {
        BalancingFormula::P
    }
}

impl ReductionConfig {
    pub fn flavor(&self) -> Result<GramianFlavor> {
        Ok(match self.method {
            Method::Bt => GramianFlavor::Infinite,
            Method::Flbt => {
                let band = self
                    .band
                    .clone()
                    .ok_or_else(|| Error::InvalidParams("frequency-limited reduction needs 'band'".into()))?;
                if self.modified {
                    GramianFlavor::ModifiedFrequency(band)
                } else {
                    GramianFlavor::FrequencyLimited(band)
                }
            }
            Method::Tlbt => {
                let window = self
                    .window
                    .ok_or_else(|| Error::InvalidParams("time-limited reduction needs 'window'".into()))?;
                if self.modified {
                    GramianFlavor::ModifiedTime(window)
                } else {
                    GramianFlavor::TimeLimited(window)
                }
            }
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParams(format!("alpha {} must be non-negative", self.alpha)));
        }
        if let Some(h) = &self.hybrid {
            if !(h.tol > 0.0) {
                return Err(Error::InvalidParams("hybrid tolerance must be positive".into()));
            }
        }
        self.flavor().map(|_| ())
    }
}

/// Gramians and their partition for a configuration; shared by all
/// formulas.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Shifted and pre-reduced system the projectors act on.
    pub system: SecondOrderSystem,
    pub j: Mat,
    pub pair: GramianPair,
    pub factors: PartitionedFactors,
    pub alpha: f64,
    pub realization: String,
    pub solver: String,
    pub prereduced_order: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub rom: ReducedModel,
    pub balancing: BalancingResult,
    /// Unstable reduced models are flagged, not rejected.
    pub stable: bool,
}

fn describe_solver(solver: &GramianSolver) -> String {
    match solver {
        GramianSolver::DenseSign(_) => "dense_sign".into(),
        GramianSolver::Projection { .. } => "projection".into(),
    }
}

/// Gramian pair in companion coordinates with block `j`, computed on the
/// strictly dissipative realization.
fn dissipative_pair(
    sys: &SecondOrderSystem,
    gamma: Option<f64>,
    j: &Mat,
    flavor: &GramianFlavor,
    solver: &GramianSolver,
) -> Result<(GramianPair, f64)> {
    let real = strictly_dissipative(sys, gamma)?;
    let RealizationKind::StrictlyDissipative { gamma } = real.kind else {
        unreachable!("strictly_dissipative builds a dissipative realization")
    };
    let mut pair = compute_gramians(&real, flavor, solver)?;
    pair.observability = gramian_backtransform(&pair.observability, sys, gamma, j)?;
    pair.realization_kind = RealizationKind::Companion { j: j.clone() };
    Ok((pair, gamma))
}

pub fn prepare(sys: &SecondOrderSystem, config: &ReductionConfig) -> Result<Prepared> {
    config.validate()?;
    let flavor = config.flavor()?;
    let mut work = if config.alpha > 0.0 {
        alpha_shift(sys, config.alpha)
    } else {
        sys.clone()
    };
    let mut prereduced_order = None;
    if let Some(h) = &config.hybrid {
        work = hybrid_prereduce(&work, &h.points, h.tol)?;
        prereduced_order = Some(work.order());
    }

    let (pair, j, realization) = match &config.realization {
        RealizationChoice::Companion(choice) => {
            let real = first_companion(&work, choice)?;
            let RealizationKind::Companion { j } = real.kind.clone() else {
                unreachable!("first_companion builds a companion realization")
            };
            match compute_gramians(&real, &flavor, &config.solver) {
                Ok(pair) => (pair, j, "companion".to_string()),
                // Galerkin projection of the companion form need not be
                // stable; the dissipative form always is
                Err(Error::UnstableProjection) => {
                    let (pair, gamma) = dissipative_pair(&work, None, &j, &flavor, &config.solver)
                        .map_err(|_| Error::UnstableProjection)?;
                    (pair, j, format!("strictly_dissipative(gamma={gamma}) after unstable projection"))
                }
                Err(e) => return Err(e),
            }
        }
        RealizationChoice::StrictlyDissipative { gamma } => {
            let j = Mat::identity(work.order(), work.order());
            let (pair, gamma) = dissipative_pair(&work, *gamma, &j, &flavor, &config.solver)?;
            (pair, j, format!("strictly_dissipative(gamma={gamma})"))
        }
    };
    let factors = partition(&pair, work.order())?;
    Ok(Prepared {
        system: work,
        j,
        pair,
        factors,
        alpha: config.alpha,
        realization,
        solver: describe_solver(&config.solver),
        prereduced_order,
    })
}

impl Prepared {
    pub fn reduce(&self, formula: BalancingFormula, order: &OrderSpec) -> Result<Reduction> {
        let balancing = second_order_projectors(&self.factors, &self.system, &self.j, formula, order)?;
        let mut rom = reduce_with_projectors(&self.system, &balancing, &self.j)?;
        if self.alpha > 0.0 {
            rom = alpha_backsubstitute(rom, self.alpha);
        }
        let p = &mut rom.provenance;
        p.flavor = Some(self.pair.flavor.clone());
        p.realization = Some(self.realization.clone());
        p.solver = Some(self.solver.clone());
        p.prereduced_order = self.prereduced_order;
        let stable = check_stability(&rom.system, None)?.is_c_stable;
        Ok(Reduction { rom, balancing, stable })
    }
}

pub fn reduce(sys: &SecondOrderSystem, config: &ReductionConfig) -> Result<Reduction> {
    prepare(sys, config)?.reduce(config.formula, &config.order)
}

/// Point-wise and maximal errors of a reduced model over a frequency or
/// time grid. Entries that could not be evaluated, and relative entries
/// with a vanishing reference, are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub grid: Vec<f64>,
    pub reference_norm: Vec<Option<f64>>,
    pub pointwise_abs: Vec<Option<f64>>,
    pub pointwise_rel: Vec<Option<f64>>,
    pub global_max_abs: f64,
    pub global_max_rel: f64,
    /// Maxima over the grid points inside the band or window; zero if no
    /// grid point falls inside.
    pub local_max_abs: f64,
    pub local_max_rel: f64,
    pub rom_order: usize,
    pub rom_stable: bool,
}

fn max_where(values: &[Option<f64>], keep: impl Fn(usize) -> bool) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(i, _)| keep(i))
        .filter_map(|(_, v)| *v)
        .fold(0.0, f64::max)
}

fn assemble(
    grid: Vec<f64>,
    reference_norm: Vec<Option<f64>>,
    pointwise_abs: Vec<Option<f64>>,
    pointwise_rel: Vec<Option<f64>>,
    local: impl Fn(f64) -> bool,
    rom: &SecondOrderSystem,
) -> Result<ErrorReport> {
    let inside = |i: usize| local(grid[i]);
    Ok(ErrorReport {
        global_max_abs: max_where(&pointwise_abs, |_| true),
        global_max_rel: max_where(&pointwise_rel, |_| true),
        local_max_abs: max_where(&pointwise_abs, inside),
        local_max_rel: max_where(&pointwise_rel, inside),
        rom_order: rom.order(),
        rom_stable: check_stability(rom, None)?.is_c_stable,
        grid,
        reference_norm,
        pointwise_abs,
        pointwise_rel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    /// rad/s
    pub wmin: f64,
    pub wmax: f64,
    pub points: usize,
}

impl FrequencySweep {
    pub fn new(wmin: f64, wmax: f64, points: usize) -> Result<Self> {
        if !(wmin > 0.0 && wmax > wmin && wmax.is_finite() && points >= 2) {
            return Err(Error::InvalidParams(format!(
                "sweep needs 0 < wmin < wmax and at least 2 points, got [{wmin}, {wmax}] with {points}"
            )));
        }
        Ok(Self { wmin, wmax, points })
    }

    pub fn grid(&self) -> Vec<f64> {
        logspace(self.wmin, self.wmax, self.points)
    }
}

/// Transfer function values of a model on a frequency grid (rad/s);
/// `None` where the model is singular.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledResponse {
    pub grid: Vec<f64>,
    pub values: Vec<Option<CMat>>,
    pub inputs: usize,
    pub outputs: usize,
}

pub fn sample_response(sys: &SecondOrderSystem, grid: &[f64]) -> Result<SampledResponse> {
    let values = grid
        .par_iter()
        .map(|&w| match sys.transfer(Complex64::new(0.0, w)) {
            Ok(h) => Ok(Some(h)),
            Err(Error::SingularAtFrequency { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(SampledResponse {
        grid: grid.to_vec(),
        values,
        inputs: sys.inputs(),
        outputs: sys.outputs(),
    })
}

/// Errors of `rom` against a sampled reference; local maxima over the band.
pub fn compare_response(
    reference: &SampledResponse,
    rom: &SecondOrderSystem,
    band: Option<&FrequencyBand>,
) -> Result<ErrorReport> {
    if reference.inputs != rom.inputs() || reference.outputs != rom.outputs() {
        return Err(Error::DimensionMismatch("models differ in inputs or outputs".into()));
    }
    let approx = sample_response(rom, &reference.grid)?;
    let pairs: Vec<Option<(f64, f64)>> = reference
        .values
        .iter()
        .zip(&approx.values)
        .map(|(h, g)| match (h, g) {
            (Some(h), Some(g)) => Some((spectral_norm(h), spectral_norm(&(h - g)))),
            _ => None,
        })
        .collect();
    let norms = pairs.iter().map(|x| x.map(|(r, _)| r)).collect();
    let abs = pairs.iter().map(|x| x.map(|(_, a)| a)).collect();
    let rel = pairs
        .iter()
        .map(|x| x.and_then(|(r, a)| (r > 0.0).then(|| a / r)))
        .collect();
    assemble(
        reference.grid.clone(),
        norms,
        abs,
        rel,
        |w| band.is_none_or(|b| b.contains(w)),
        rom,
    )
}

/// `||H(jw) - H^(jw)||_2` on a log grid; local maxima over the band.
/// Points where either model is singular are skipped.
pub fn frequency_error_report(
    orig: &SecondOrderSystem,
    rom: &SecondOrderSystem,
    sweep: &FrequencySweep,
    band: Option<&FrequencyBand>,
) -> Result<ErrorReport> {
    compare_response(&sample_response(orig, &sweep.grid())?, rom, band)
}

/// Relative entries are omitted where `||y(t)|| < REL_FLOOR * max ||y||`.
pub const REL_FLOOR: f64 = 1e-14;

/// Errors of `approx` against a reference trajectory on the same grid;
/// local maxima over the window.
pub fn compare_trajectories(
    reference: &Trajectory,
    approx: &Trajectory,
    window: Option<&TimeWindow>,
    rom: &SecondOrderSystem,
) -> Result<ErrorReport> {
    if reference.times != approx.times {
        return Err(Error::DimensionMismatch("trajectories use different time grids".into()));
    }
    let norms: Vec<f64> = reference.outputs.iter().map(|v| v.norm()).collect();
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let mut abs = Vec::with_capacity(norms.len());
    for (a, b) in reference.outputs.iter().zip(&approx.outputs) {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch("trajectories differ in outputs".into()));
        }
        abs.push(Some((a - b).norm()));
    }
    let rel = abs
        .iter()
        .zip(&norms)
        .map(|(a, &r)| {
            let a = a.expect("always evaluated");
            (peak > 0.0 && r >= REL_FLOOR * peak).then(|| a / r)
        })
        .collect();
    assemble(
        reference.times.clone(),
        norms.into_iter().map(Some).collect(),
        abs,
        rel,
        |t| window.is_none_or(|w| w.contains(t)),
        rom,
    )
}

/// `||y(t) - y^(t)||_2` for both models driven by `signal` from rest; local
/// maxima over the window.
pub fn time_error_report(
    orig: &SecondOrderSystem,
    rom: &SecondOrderSystem,
    signal: &Signal,
    grid: &TimeGrid,
    window: Option<&TimeWindow>,
) -> Result<ErrorReport> {
    if orig.inputs() != rom.inputs() || orig.outputs() != rom.outputs() {
        return Err(Error::DimensionMismatch("models differ in inputs or outputs".into()));
    }
    let (y, yr) = rayon::join(|| simulate(orig, signal, grid), || simulate(rom, signal, grid));
    compare_trajectories(&y?, &yr?, window, rom)
}
