use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SecondOrderSystem, StateSpace};
use crate::linalg::Mat;

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Mat {
    let g = uniform(rng, n, n);
    (&g * g.transpose()) / n as f64 + Mat::identity(n, n) * shift
}

/// Seeded random c-stable system with symmetric positive definite `E` and
/// `A + A^T` negative definite.
pub fn random_state_space(n: usize, m: usize, p: usize, seed: u64) -> StateSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = spd(&mut rng, n, 1.0);
    let skew = uniform(&mut rng, n, n);
    let a = -spd(&mut rng, n, 0.2) + (&skew - skew.transpose()) * 1.5;
    let b = uniform(&mut rng, n, m);
    let c = uniform(&mut rng, p, n);
    StateSpace { e, a, b, c }
}

/// Seeded random mechanical system with symmetric positive definite
/// `M`, `E`, `K` and dense input/output matrices.
pub fn random_second_order(n: usize, m: usize, p: usize, seed: u64) -> SecondOrderSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mm = spd(&mut rng, n, 1.0);
    let e = spd(&mut rng, n, 0.3);
    let k = spd(&mut rng, n, 1.0);
    let bu = uniform(&mut rng, n, m);
    let cp = uniform(&mut rng, p, n);
    let cv = uniform(&mut rng, p, n) * 0.5;
    SecondOrderSystem::new(mm, e, k, bu, cp, cv).expect("random system is well formed")
}
