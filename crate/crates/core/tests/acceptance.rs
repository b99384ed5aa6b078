//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use solimbt::balancing::{first_order_bt, select_order, BalancingFormula, OrderSpec};
use solimbt::gramians::{
    compute_gramians, frequency_limited_gramians, infinite_gramians, modified_gramians, time_limited_gramians,
    GramianFlavor, GramianSolver, LimitedDomain,
};
use solimbt::linalg::{logspace, spectral_norm, sym_eig, Mat};
use solimbt::lyapunov::{
    solve_lyap_dense_oracle, solve_lyap_sign_dual, GramianFactor, IndefiniteRhs, SignOptions,
};
use solimbt::matfun::{quadrature_gramian, FrequencyBand, TimeWindow};
use solimbt::pipeline::{
    alpha_backsubstitute, alpha_shift, compare_response, compare_trajectories, hybrid_prereduce, log_spaced_points,
    prepare, sample_response, ErrorReport, FrequencySweep, HybridConfig, Method, ReductionConfig,
    DEFAULT_PREREDUCE_TOL,
};
use solimbt::balancing::apply_projection;
use solimbt::system::{
    first_companion, generate_chain, gramian_backtransform, random_second_order, random_state_space, simulate,
    strictly_dissipative, ChainParams, FirstOrderRealization, JChoice, RealizationKind, SecondOrderSystem, Signal,
    StateSpace, TimeGrid, TransferFunction,
};

type Check = Result<(bool, String), String>;

fn rel(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm()
}

fn realization(ss: StateSpace) -> FirstOrderRealization {
    let n = ss.order();
    FirstOrderRealization {
        ss,
        kind: RealizationKind::Companion {
            j: Mat::identity(n, n),
        },
    }
}

fn scalar_lag() -> FirstOrderRealization {
    let s = |x: f64| Mat::from_element(1, 1, x);
    realization(StateSpace::new(s(1.0), s(-1.0), s(1.0), s(1.0)).unwrap())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Smallest eigenvalue of the symmetric part relative to the scale.
fn min_rel_eig(a: &Mat, scale: f64) -> f64 {
    let (vals, _) = sym_eig(&((a + a.transpose()) * 0.5));
    vals.last().copied().unwrap_or(0.0) / scale
}

fn tau() -> f64 {
    2.0 * std::f64::consts::PI
}

fn chain_band() -> FrequencyBand {
    FrequencyBand::single(tau(), 100.0 * tau()).unwrap()
}

fn c1_scalar_frequency() -> Check {
    let t = Instant::now();
    let band = FrequencyBand::single(1.0, 2.0).map_err(err)?;
    let pair = frequency_limited_gramians(&scalar_lag(), &band).map_err(err)?;
    let expected = (2f64.atan() - 1f64.atan()) / std::f64::consts::PI;
    let e = (pair.controllability.gramian()[(0, 0)] - expected)
        .abs()
        .max((pair.observability.gramian()[(0, 0)] - expected).abs());
    let secs = t.elapsed().as_secs_f64();
    Ok((
        e <= 1e-10 && secs < 1.0,
        format!("P_Omega={expected:.10}, |err|={e:.1e} (tol 1e-10), {secs:.3} s (limit 1 s)"),
    ))
}

fn c2_scalar_time() -> Check {
    let t = Instant::now();
    let window = TimeWindow::new(0.0, 1.0).map_err(err)?;
    let pair = time_limited_gramians(&scalar_lag(), &window).map_err(err)?;
    let expected = (1.0 - (-2f64).exp()) / 2.0;
    let e = (pair.controllability.gramian()[(0, 0)] - expected)
        .abs()
        .max((pair.observability.gramian()[(0, 0)] - expected).abs());
    let secs = t.elapsed().as_secs_f64();
    Ok((
        e <= 1e-10 && secs < 1.0,
        format!("P_T={expected:.10}, |err|={e:.1e} (tol 1e-10), {secs:.3} s (limit 1 s)"),
    ))
}

fn c3_limit_recovery() -> Check {
    let band = FrequencyBand::single(0.0, 1e6).map_err(err)?;
    let window = TimeWindow::new(0.0, 50.0).map_err(err)?;
    let (mut worst_f, mut worst_t) = (0.0f64, 0.0f64);
    for seed in 0..10 {
        let real = realization(random_state_space(10, 2, 2, 100 + seed));
        let inf = infinite_gramians(&real).map_err(err)?;
        let fl = frequency_limited_gramians(&real, &band).map_err(err)?;
        let tl = time_limited_gramians(&real, &window).map_err(err)?;
        let (p, q) = (inf.controllability.gramian(), inf.observability.gramian());
        worst_f = worst_f
            .max(rel(&fl.controllability.gramian(), &p))
            .max(rel(&fl.observability.gramian(), &q));
        worst_t = worst_t
            .max(rel(&tl.controllability.gramian(), &p))
            .max(rel(&tl.observability.gramian(), &q));
    }
    Ok((
        worst_f <= 1e-3 && worst_t <= 1e-10,
        format!("band [0,1e6]: {worst_f:.1e} (tol 1e-3), window [0,50]: {worst_t:.1e} (tol 1e-10), 10 systems"),
    ))
}

fn c4_oracle() -> Check {
    let (mut worst_err, mut worst_res) = (0.0f64, 0.0f64);
    for seed in 0..20u64 {
        let n = 5 + (seed as usize * 7) % 36;
        let ss = random_state_space(n, 2, 3, 200 + seed);
        let ctrl = IndefiniteRhs::difference(&ss.b, &(&ss.b * 0.4 + Mat::from_element(n, 2, 0.05)));
        let ct = ss.c.transpose();
        let obs = IndefiniteRhs::symmetric_sum(&ct, &(&ct * -0.7));
        let (x1, x2) = solve_lyap_sign_dual(&ss.a, &ss.e, &ctrl, &obs, &SignOptions::default()).map_err(err)?;
        let at = ss.a.transpose();
        let et = ss.e.transpose();
        for (x, a, e, rhs) in [
            (x1.gramian(), &ss.a, &ss.e, ctrl.full()),
            (x2.gramian(), &at, &et, obs.full()),
        ] {
            let oracle = solve_lyap_dense_oracle(a, e, &rhs).map_err(err)?;
            worst_err = worst_err.max(rel(&x, &oracle));
            let res = a * &x * e.transpose() + e * &x * a.transpose() + &rhs;
            let scale = 2.0 * a.norm() * x.norm() * e.norm() + rhs.norm();
            worst_res = worst_res.max(res.norm() / scale);
        }
    }
    Ok((
        worst_err <= 1e-8 && worst_res <= 1e-10,
        format!("rel error {worst_err:.1e} (tol 1e-8), scaled residual {worst_res:.1e} (tol 1e-10), 20 systems N<=40"),
    ))
}

fn c5_quadrature() -> Check {
    let band = FrequencyBand::single(0.5, 2.0).map_err(err)?;
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let n = 10 + seed as usize;
        let real = realization(random_state_space(n, 2, 2, 300 + seed));
        let z = quadrature_gramian(&real.ss, &band, 2000).map_err(err)?;
        let quad = &z * z.transpose();
        let p = frequency_limited_gramians(&real, &band).map_err(err)?.controllability.gramian();
        worst = worst.max(rel(&p, &quad));
    }
    Ok((worst <= 1e-6, format!("rel Frobenius {worst:.1e} (tol 1e-6), 10 systems N=10..19, 2000 nodes")))
}

struct ChainFl {
    sys: SecondOrderSystem,
    reference: solimbt::pipeline::SampledResponse,
    full: Vec<(BalancingFormula, ErrorReport, bool)>,
}

fn chain_sweep() -> FrequencySweep {
    FrequencySweep::new(tau() * 1e-4, tau() * 1e4, 400).unwrap()
}

fn run_chain_fl() -> Result<ChainFl, String> {
    let sys = generate_chain(300, &ChainParams::default()).map_err(err)?;
    let band = chain_band();
    let reference = sample_response(&sys, &chain_sweep().grid()).map_err(err)?;
    let config = ReductionConfig {
        method: Method::Flbt,
        band: Some(band.clone()),
        ..Default::default()
    };
    let prepared = prepare(&sys, &config).map_err(err)?;
    let mut full = Vec::new();
    for f in BalancingFormula::ALL {
        let red = prepared.reduce(f, &config.order).map_err(|e| format!("{f}: {e}"))?;
        let rep = compare_response(&reference, &red.rom.system, Some(&band)).map_err(err)?;
        full.push((f, rep, red.stable));
    }
    Ok(ChainFl { sys, reference, full })
}

fn c6_chain_flbt(data: &Result<ChainFl, String>, elapsed: Duration) -> Check {
    let data = data.as_ref().map_err(Clone::clone)?;
    let mut ok = elapsed.as_secs_f64() <= 600.0;
    let mut parts = Vec::new();
    for (f, rep, stable) in &data.full {
        if *stable {
            ok &= rep.local_max_rel <= 1e-2 && rep.local_max_rel <= 0.1 * rep.global_max_rel;
        }
        parts.push(format!(
            "{f}:r={}{} loc {:.2e}/glob {:.2e}",
            rep.rom_order,
            if *stable { "" } else { "(unstable)" },
            rep.local_max_rel,
            rep.global_max_rel
        ));
    }
    Ok((
        ok,
        format!(
            "n=300, {}; local rel <= 1e-2 and <= 0.1 x global; {:.0} s (limit 600 s)",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    ))
}

fn c7_chain_tlbt() -> Check {
    let sys = generate_chain(300, &ChainParams::default()).map_err(err)?;
    let window = TimeWindow::new(0.0, 20.0).map_err(err)?;
    let config = ReductionConfig {
        method: Method::Tlbt,
        window: Some(window),
        ..Default::default()
    };
    let prepared = prepare(&sys, &config).map_err(err)?;
    let grid = TimeGrid::new(0.0, 100.0, 0.01).map_err(err)?;
    let inputs = [
        (
            "u_step",
            Signal::Step {
                amplitude: 1.0,
                onset: 5.0,
            },
        ),
        (
            "u_sin",
            Signal::Sin {
                amplitude: 1.0,
                omega: 1.0,
                onset: 5.0,
                offset: None,
            },
        ),
    ];
    let mut refs = Vec::new();
    for (_, u) in &inputs {
        refs.push(simulate(&sys, u, &grid).map_err(err)?);
    }
    let mut ok = true;
    let mut orders = Vec::new();
    let mut p_step = f64::NAN;
    for f in BalancingFormula::ALL {
        let red = prepared.reduce(f, &config.order).map_err(|e| format!("{f}: {e}"))?;
        ok &= red.balancing.r <= 10;
        orders.push(format!("{f}:{}", red.balancing.r));
        if !red.stable {
            orders.push("(unstable)".into());
            continue;
        }
        for ((name, u), y) in inputs.iter().zip(&refs) {
            let yr = simulate(&red.rom.system, u, &grid).map_err(err)?;
            let rep = compare_trajectories(y, &yr, Some(&window), &red.rom.system).map_err(err)?;
            ok &= rep.local_max_abs <= rep.global_max_abs;
            if f == BalancingFormula::P && *name == "u_step" {
                p_step = rep.local_max_abs;
            }
        }
    }
    Ok((
        ok,
        format!(
            "orders {} (limit 10); local abs <= global abs for u_step and u_sin; formula p u_step local abs {p_step:.3e}",
            orders.join(" ")
        ),
    ))
}

fn c8_bt_bound() -> Check {
    let mut worst_ratio = 0.0f64;
    for seed in 0..10u64 {
        let real = realization(random_state_space(20, 2, 2, 400 + seed));
        let pair = infinite_gramians(&real).map_err(err)?;
        let bt = first_order_bt(&real.ss, &pair, &OrderSpec::Fixed(4)).map_err(err)?;
        let mut worst = 0.0f64;
        for w in logspace(1e-3, 1e3, 500) {
            let s = Complex64::new(0.0, w);
            let h = real.ss.transfer(s).map_err(err)?;
            let g = bt.rom.transfer(s).map_err(err)?;
            worst = worst.max(spectral_norm(&(h - g)));
        }
        worst_ratio = worst_ratio.max(worst / bt.error_bound);
    }
    Ok((
        worst_ratio <= 1.0,
        format!("max sampled error / (2 sum_(k>4) sigma_k) = {worst_ratio:.3} (must be <= 1), 10 systems N=20, 500 points"),
    ))
}

fn c9_realizations() -> Check {
    let sys = generate_chain(50, &ChainParams::default()).map_err(err)?;
    let comp = first_companion(&sys, &JChoice::Identity).map_err(err)?;
    let diss = strictly_dissipative(&sys, None).map_err(err)?;
    let mut worst_tf = 0.0f64;
    for w in logspace(1e-3, 1e2, 50) {
        let s = Complex64::new(0.0, w);
        let a = comp.transfer(s).map_err(err)?;
        let b = diss.transfer(s).map_err(err)?;
        worst_tf = worst_tf.max(spectral_norm(&(&a - &b)) / spectral_norm(&a));
    }
    let small = generate_chain(5, &ChainParams::default()).map_err(err)?;
    let comp = first_companion(&small, &JChoice::Identity).map_err(err)?;
    let diss = strictly_dissipative(&small, None).map_err(err)?;
    let RealizationKind::StrictlyDissipative { gamma } = diss.kind else {
        return Err("dissipative realization expected".into());
    };
    let obs = |ss: &StateSpace| solve_lyap_dense_oracle(&ss.a.transpose(), &ss.e.transpose(), &(ss.c.transpose() * &ss.c));
    let q_comp = obs(&comp.ss).map_err(err)?;
    let q_diss = obs(&diss.ss).map_err(err)?;
    let n2 = q_diss.nrows();
    let back = gramian_backtransform(
        &GramianFactor {
            z: Mat::identity(n2, n2),
            y: q_diss,
        },
        &small,
        gamma,
        &Mat::identity(5, 5),
    )
    .map_err(err)?;
    let worst_q = rel(&back.gramian(), &q_comp);
    Ok((
        worst_tf <= 1e-6 && worst_q <= 1e-8,
        format!("transfer rel {worst_tf:.1e} (tol 1e-6, n=50, 50 points); back-transformed Q rel {worst_q:.1e} (tol 1e-8, n=5, oracle)"),
    ))
}

fn c10_exactness() -> Check {
    let sys = generate_chain(5, &ChainParams::default()).map_err(err)?;
    let prepared = prepare(&sys, &ReductionConfig::default()).map_err(err)?;
    let points: Vec<Complex64> = logspace(1e-3, 10.0, 10)
        .into_iter()
        .flat_map(|w| [Complex64::new(0.0, w), Complex64::new(0.1, w)])
        .collect();
    let mut worst = 0.0f64;
    for f in BalancingFormula::ALL {
        let red = prepared.reduce(f, &OrderSpec::Fixed(5)).map_err(|e| format!("{f}: {e}"))?;
        for &s in &points {
            let h = sys.transfer(s).map_err(err)?;
            let g = red.rom.system.transfer(s).map_err(err)?;
            worst = worst.max(spectral_norm(&(&h - &g)) / spectral_norm(&h));
        }
    }
    Ok((worst <= 1e-8, format!("max rel error {worst:.1e} over 8 formulas x 20 points (tol 1e-8)")))
}

fn c11_alpha() -> Check {
    let sys = generate_chain(50, &ChainParams::default()).map_err(err)?;
    let eye = Mat::identity(50, 50);
    let alpha = 0.01;
    let rom = apply_projection(&alpha_shift(&sys, alpha), &eye, &eye).map_err(err)?;
    let back = alpha_backsubstitute(rom, alpha).system;
    let identity_err = [
        (&back.m, &sys.m),
        (&back.e, &sys.e),
        (&back.k, &sys.k),
        (&back.bu, &sys.bu),
        (&back.cp, &sys.cp),
        (&back.cv, &sys.cv),
    ]
    .iter()
    .map(|(a, b)| (*a - *b).norm() / b.norm().max(1.0))
    .fold(0.0, f64::max);

    let band = chain_band();
    let sweep = chain_sweep();
    let reference = sample_response(&sys, &sweep.grid()).map_err(err)?;
    let mut errors = Vec::new();
    for a in [0.0, alpha] {
        let config = ReductionConfig {
            method: Method::Flbt,
            band: Some(band.clone()),
            formula: BalancingFormula::Pv,
            alpha: a,
            ..Default::default()
        };
        let red = prepare(&sys, &config)
            .and_then(|p| p.reduce(config.formula, &config.order))
            .map_err(err)?;
        let rep = compare_response(&reference, &red.rom.system, Some(&band)).map_err(err)?;
        errors.push((red.balancing.r, rep.local_max_abs));
    }
    let (r0, e0) = errors[0];
    let (r1, e1) = errors[1];
    Ok((
        identity_err <= 1e-14 && e1.is_finite() && e1 <= 2.0 * e0,
        format!(
            "round trip {identity_err:.1e} (tol 1e-14); n=50 pv in-band abs error alpha=0: {e0:.3e} (r={r0}), alpha=0.01: {e1:.3e} (r={r1}), ratio {:.2} (limit 2)",
            e1 / e0
        ),
    ))
}

fn c12_hybrid(data: &Result<ChainFl, String>) -> Check {
    let data = data.as_ref().map_err(Clone::clone)?;
    let band = chain_band();
    let mut ok = true;
    let mut notes = Vec::new();
    for (label, lo, hi) in [("band", tau(), 100.0 * tau()), ("global", tau() * 1e-4, tau() * 1e4)] {
        let points = log_spaced_points(lo, hi, 200);
        let pre = hybrid_prereduce(&data.sys, &points, DEFAULT_PREREDUCE_TOL).map_err(err)?;
        let mut interp = 0.0f64;
        for &s in &points {
            let h = data.sys.transfer(s).map_err(err)?;
            let g = pre.transfer(s).map_err(err)?;
            interp = interp.max(spectral_norm(&(&h - &g)) / spectral_norm(&h));
        }
        ok &= interp <= 1e-6;
        let config = ReductionConfig {
            method: Method::Flbt,
            band: Some(band.clone()),
            hybrid: Some(HybridConfig {
                points,
                tol: DEFAULT_PREREDUCE_TOL,
            }),
            ..Default::default()
        };
        let prepared = prepare(&data.sys, &config).map_err(err)?;
        let mut worst = 0.0f64;
        for (f, full, _) in &data.full {
            let red = prepared.reduce(*f, &config.order).map_err(|e| format!("{f}: {e}"))?;
            let rep = compare_response(&data.reference, &red.rom.system, Some(&band)).map_err(err)?;
            for (h, g) in [
                (rep.local_max_abs, full.local_max_abs),
                (rep.global_max_abs, full.global_max_abs),
                (rep.local_max_rel, full.local_max_rel),
                (rep.global_max_rel, full.global_max_rel),
            ] {
                worst = worst.max(h / g);
            }
        }
        ok &= worst <= 10.0;
        notes.push(format!(
            "{label} sampling: intermediate order {}, interpolation {interp:.1e}, worst error ratio {worst:.2}",
            pre.order()
        ));
    }
    Ok((ok, format!("{} (tol 1e-6, ratio limit 10)", notes.join("; "))))
}

fn c13_modified() -> Check {
    let mut worst = f64::INFINITY;
    let band = FrequencyBand::single(0.2, 1.5).map_err(err)?;
    let window = TimeWindow::new(0.0, 3.0).map_err(err)?;
    for seed in 0..5u64 {
        let sys = random_second_order(6, 2, 2, 500 + seed);
        let real = first_companion(&sys, &JChoice::Identity).map_err(err)?;
        for (domain, flavor) in [
            (LimitedDomain::Frequency(band.clone()), GramianFlavor::FrequencyLimited(band.clone())),
            (LimitedDomain::Time(window), GramianFlavor::TimeLimited(window)),
        ] {
            let m = modified_gramians(&real, &domain).map_err(err)?;
            let p = compute_gramians(&real, &flavor, &GramianSolver::default()).map_err(err)?;
            for (a, b) in [
                (m.controllability.gramian(), p.controllability.gramian()),
                (m.observability.gramian(), p.observability.gramian()),
            ] {
                let scale = sym_eig(&a).0[0].max(f64::MIN_POSITIVE);
                worst = worst.min(min_rel_eig(&(&a - &b), scale));
            }
        }
    }
    let sys = generate_chain(20, &ChainParams::default()).map_err(err)?;
    let mut produced = 0;
    for (method, band, window) in [
        (Method::Flbt, Some(FrequencyBand::single(0.0, 0.05).map_err(err)?), None),
        (Method::Tlbt, None, Some(TimeWindow::new(0.0, 20.0).map_err(err)?)),
    ] {
        let config = ReductionConfig {
            method,
            band,
            window,
            modified: true,
            ..Default::default()
        };
        let prepared = prepare(&sys, &config).map_err(err)?;
        for f in BalancingFormula::ALL {
            prepared.reduce(f, &config.order).map_err(|e| format!("{method:?} {f}: {e}"))?;
            produced += 1;
        }
    }
    Ok((
        worst >= -1e-10 && produced == 16,
        format!("min eig of P_mod - P_limited relative {worst:.1e} (tol -1e-10, 5 systems, band and window); {produced}/16 ROMs"),
    ))
}

fn c14_properties(elapsed_budget: Instant) -> Check {
    let tol = 1e-8;
    let mut worst_add = 0.0f64;
    let mut worst_split = 0.0f64;
    let mut worst_dom = f64::INFINITY;
    let mut systems = vec![scalar_lag()];
    for seed in 0..5u64 {
        systems.push(realization(random_state_space(10, 2, 2, 600 + seed)));
    }
    let (b1, b2) = ((0.1, 0.8), (1.3, 4.0));
    let union = FrequencyBand::new(vec![b1, b2]).map_err(err)?;
    let w = |a, b| TimeWindow::new(a, b).map_err(err);
    for real in &systems {
        let p = |band: FrequencyBand| {
            frequency_limited_gramians(real, &band).map(|g| (g.controllability.gramian(), g.observability.gramian()))
        };
        let (pu, qu) = p(union.clone()).map_err(err)?;
        let (p1, q1) = p(FrequencyBand::single(b1.0, b1.1).map_err(err)?).map_err(err)?;
        let (p2, q2) = p(FrequencyBand::single(b2.0, b2.1).map_err(err)?).map_err(err)?;
        worst_add = worst_add.max(rel(&(&p1 + &p2), &pu)).max(rel(&(&q1 + &q2), &qu));

        let t = |win: TimeWindow| {
            time_limited_gramians(real, &win).map(|g| (g.controllability.gramian(), g.observability.gramian()))
        };
        let (pw, qw) = t(w(0.5, 4.0)?).map_err(err)?;
        let (pa, qa) = t(w(0.5, 1.7)?).map_err(err)?;
        let (pb, qb) = t(w(1.7, 4.0)?).map_err(err)?;
        worst_split = worst_split.max(rel(&(&pa + &pb), &pw)).max(rel(&(&qa + &qb), &qw));

        let inf = infinite_gramians(real).map_err(err)?;
        let (pi, qi) = (inf.controllability.gramian(), inf.observability.gramian());
        for (big, small) in [(&pi, &pu), (&qi, &qu), (&pi, &pw), (&qi, &qw)] {
            let scale = sym_eig(big).0[0];
            worst_dom = worst_dom.min(min_rel_eig(&(big - small), scale));
        }
    }
    // monotone order selection over seeded spectra
    let mut monotone = true;
    for seed in 0..200u64 {
        let mut sigma: Vec<f64> = (0..25)
            .map(|k| {
                let x = ((seed * 31 + k * 17) % 97) as f64 / 97.0;
                10f64.powf(-12.0 * x)
            })
            .collect();
        sigma.sort_by(|a, b| b.total_cmp(a));
        let mut last = 0;
        for tol_exp in (1..=12).map(|e| 10f64.powi(-e)) {
            let r = select_order(&sigma, &OrderSpec::Tol(tol_exp)).map_err(err)?;
            monotone &= r >= last;
            last = r;
        }
    }
    let secs = elapsed_budget.elapsed().as_secs_f64();
    Ok((
        worst_add <= tol && worst_split <= tol && worst_dom >= -tol && monotone && secs <= 300.0,
        format!(
            "additivity {worst_add:.1e}, window splitting {worst_split:.1e}, domination min eig {worst_dom:.1e} (tol 1e-8), order selection monotone: {monotone}; {secs:.1} s (limit 300 s)"
        ),
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, t: Instant, outcome: Check| {
        let secs = t.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} {id:>2} {name}: {detail} [{secs:.2} s]",
            if pass { "PASS" } else { "FAIL" }
        );
    };

    let t = Instant::now();
    report(1, "scalar frequency-limited Gramian", t, c1_scalar_frequency());
    let t = Instant::now();
    report(2, "scalar time-limited Gramian", t, c2_scalar_time());
    let t = Instant::now();
    report(3, "limit recovery", t, c3_limit_recovery());
    let t = Instant::now();
    report(4, "sign solver vs Kronecker oracle", t, c4_oracle());
    let t = Instant::now();
    report(5, "quadrature cross-check", t, c5_quadrature());
    let t = Instant::now();
    let chain = run_chain_fl();
    let elapsed = t.elapsed();
    report(6, "chain frequency-limited regression", t, c6_chain_flbt(&chain, elapsed));
    let t = Instant::now();
    report(7, "chain time-limited regression", t, c7_chain_tlbt());
    let t = Instant::now();
    report(8, "first-order BT error bound", t, c8_bt_bound());
    let t = Instant::now();
    report(9, "realization equivalence", t, c9_realizations());
    let t = Instant::now();
    report(10, "exactness at full order", t, c10_exactness());
    let t = Instant::now();
    report(11, "alpha-shift algebra", t, c11_alpha());
    let t = Instant::now();
    report(12, "hybrid pipeline", t, c12_hybrid(&chain));
    let t = Instant::now();
    report(13, "modified Gramians", t, c13_modified());
    let t = Instant::now();
    report(14, "property suites", t, c14_properties(t));

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 14 criteria passed");
}
