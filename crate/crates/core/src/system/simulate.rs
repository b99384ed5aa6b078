use serde::{Deserialize, Serialize};

use super::{first_companion, JChoice, SecondOrderSystem, StateSpace};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Vector};

/// Input signal applied identically to every input channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signal {
    Zero,
    /// `amplitude` for `t >= onset`, zero before.
    Step { amplitude: f64, onset: f64 },
    /// `amplitude * sin(omega t)` on `[onset, offset)`.
    Sin {
        amplitude: f64,
        omega: f64,
        onset: f64,
        offset: Option<f64>,
    },
    /// Piecewise linear interpolation of sampled values, held constant
    /// outside the sample range.
    Samples { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl Signal {
    /// Mean of the signal over `[a, b]`; exact for steps and sines so that
    /// jumps between grid points do not degrade the integrator's order.
    pub fn mean_over(&self, a: f64, b: f64, inputs: usize) -> Vector {
        let h = b - a;
        match self {
            Signal::Zero => Vector::zeros(inputs),
            Signal::Step { amplitude, onset } => {
                let on = (b - onset.max(a)).clamp(0.0, h);
                Vector::from_element(inputs, amplitude * on / h)
            }
            Signal::Sin {
                amplitude,
                omega,
                onset,
                offset,
            } => {
                let lo = onset.max(a);
                let hi = offset.map_or(b, |off| off.min(b));
                let integral = if hi <= lo {
                    0.0
                } else if *omega == 0.0 {
                    0.0
                } else {
                    ((omega * lo).cos() - (omega * hi).cos()) / omega
                };
                Vector::from_element(inputs, amplitude * integral / h)
            }
            Signal::Samples { .. } => (self.value(a, inputs) + self.value(b, inputs)) * 0.5,
        }
    }

    pub fn value(&self, t: f64, inputs: usize) -> Vector {
        match self {
            Signal::Zero => Vector::zeros(inputs),
            Signal::Step { amplitude, onset } => {
                Vector::from_element(inputs, if t >= *onset { *amplitude } else { 0.0 })
            }
            Signal::Sin {
                amplitude,
                omega,
                onset,
                offset,
            } => {
                let on = t >= *onset && offset.is_none_or(|off| t < off);
                Vector::from_element(inputs, if on { amplitude * (omega * t).sin() } else { 0.0 })
            }
            Signal::Samples { times, values } => {
                if times.is_empty() {
                    return Vector::zeros(inputs);
                }
                let pick = |i: usize| Vector::from_fn(inputs, |r, _| values[i].get(r).copied().unwrap_or(0.0));
                let idx = times.partition_point(|&x| x <= t);
                if idx == 0 {
                    pick(0)
                } else if idx == times.len() {
                    pick(times.len() - 1)
                } else {
                    let (t0, t1) = (times[idx - 1], times[idx]);
                    let w = (t - t0) / (t1 - t0);
                    pick(idx - 1) * (1.0 - w) + pick(idx) * w
                }
            }
        }
    }
}

/// Uniform time grid `t0, t0 + dt, ..., tf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && tf > t0 && t0.is_finite() && tf.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "time grid needs t0 < tf and dt > 0, got [{t0}, {tf}] with dt {dt}"
            )));
        }
        Ok(Self { t0, tf, dt })
    }

    pub fn times(&self) -> Vec<f64> {
        let steps = ((self.tf - self.t0) / self.dt).round() as usize;
        (0..=steps).map(|i| self.t0 + i as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub outputs: Vec<Vector>,
    pub states: Option<Vec<Vector>>,
}

/// Output trajectory of a second-order system from rest, integrated on its
/// companion realization.
pub fn simulate(sys: &SecondOrderSystem, input: &Signal, grid: &TimeGrid) -> Result<Trajectory> {
    let fo = first_companion(sys, &JChoice::Identity)?;
    simulate_state_space(&fo.ss, input, grid, false)
}

/// Trapezoidal rule for `E q' = A q + B u` from `q(t0) = 0`, with the input
/// replaced by its mean over each step.
pub fn simulate_state_space(
    ss: &StateSpace,
    input: &Signal,
    grid: &TimeGrid,
    keep_states: bool,
) -> Result<Trajectory> {
    let times = grid.times();
    let n = ss.order();
    let m = ss.inputs();
    let h = grid.dt;
    let lhs = &ss.e - &ss.a * (0.5 * h);
    let lu = Lu::new(&lhs, "E - dt/2 A")?;
    let step = lu.solve(&(&ss.e + &ss.a * (0.5 * h)));
    let drive = lu.solve(&(&ss.b * (0.5 * h)));

    let mut q = Vector::zeros(n);
    let mut outputs = Vec::with_capacity(times.len());
    let mut states = keep_states.then(|| Vec::with_capacity(times.len()));
    outputs.push(&ss.c * &q);
    if let Some(s) = states.as_mut() {
        s.push(q.clone());
    }
    for pair in times.windows(2) {
        let t = pair[1];
        let u = input.mean_over(pair[0], t, m);
        q = &step * &q + &drive * (u * 2.0);
        if !q.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteState { time: t });
        }
        outputs.push(&ss.c * &q);
        if let Some(s) = states.as_mut() {
            s.push(q.clone());
        }
    }
    Ok(Trajectory {
        times,
        outputs,
        states,
    })
}
