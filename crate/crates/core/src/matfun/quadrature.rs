use num_complex::Complex64;

use super::FrequencyBand;
use crate::error::{Error, Result};
use crate::linalg::{to_complex, Lu, Mat};
use crate::system::{check_stability, StateSpace};

const PANEL: usize = 16;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule on `[lo, hi]` with `points` nodes split
/// into panels of at most 16.
pub fn composite_gauss_legendre(lo: f64, hi: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = points.div_ceil(PANEL).max(1);
    let per_panel = points.div_ceil(panels);
    let (x, w) = gauss_legendre(per_panel);
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(a + 0.5 * width * (xi + 1.0));
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

/// Low-rank factor `Z` with `Z Z^T` approximating the frequency-limited
/// controllability Gramian by quadrature of its defining integral; each
/// interval of the band gets `n_points` nodes.
pub fn quadrature_gramian(ss: &StateSpace, band: &FrequencyBand, n_points: usize) -> Result<Mat> {
    if n_points < 2 {
        return Err(Error::InvalidParams("quadrature needs at least 2 points".into()));
    }
    if !check_stability(ss, None)?.is_c_stable {
        return Err(Error::UnstableRealization);
    }
    let n = ss.order();
    let m = ss.inputs();
    let (ce, ca, cb) = (to_complex(&ss.e), to_complex(&ss.a), to_complex(&ss.b));
    let mut columns: Vec<Mat> = Vec::new();
    for &(lo, hi) in band.intervals() {
        let (nodes, weights) = composite_gauss_legendre(lo, hi, n_points);
        for (omega, w) in nodes.into_iter().zip(weights) {
            let pencil = &ce * Complex64::new(0.0, omega) - &ca;
            let x = Lu::new(&pencil, "j omega E - A")
                .map_err(|_| Error::SingularAtFrequency { re: 0.0, im: omega })?
                .solve(&cb);
            // the negative half of the symmetric band doubles the weight
            let scale = (w / std::f64::consts::PI).sqrt();
            let mut block = Mat::zeros(n, 2 * m);
            for j in 0..m {
                for i in 0..n {
                    block[(i, j)] = scale * x[(i, j)].re;
                    block[(i, m + j)] = scale * x[(i, j)].im;
                }
            }
            columns.push(block);
        }
    }
    let total: usize = columns.iter().map(|c| c.ncols()).sum();
    let mut z = Mat::zeros(n, total);
    let mut at = 0;
    for c in columns {
        z.view_mut((0, at), c.shape()).copy_from(&c);
        at += c.ncols();
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // degree 2n - 1 monomial with odd power integrates to zero, even to 2/(d+1)
            let d = 2 * n - 2;
            let integral: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(d as i32)).sum();
            assert!((integral - 2.0 / (d as f64 + 1.0)).abs() < 1e-13, "n = {n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn three_point_rule_by_hand() {
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15);
    }

    fn scalar() -> StateSpace {
        let s = |x: f64| Mat::from_element(1, 1, x);
        StateSpace::new(s(1.0), s(-1.0), s(1.0), s(1.0)).unwrap()
    }

    #[test]
    fn scalar_band_matches_arctan() {
        let band = FrequencyBand::single(1.0, 2.0).unwrap();
        let z = quadrature_gramian(&scalar(), &band, 200).unwrap();
        let p = (&z * z.transpose())[(0, 0)];
        let exact = (2f64.atan() - 1f64.atan()) / std::f64::consts::PI;
        assert!((p - exact).abs() < 1e-8);
    }

    #[test]
    fn error_shrinks_as_points_double() {
        let band = FrequencyBand::single(0.0, 3.0).unwrap();
        let exact = 3f64.atan() / std::f64::consts::PI;
        let mut last = f64::INFINITY;
        for points in [2, 4, 8, 16, 32, 64] {
            let z = quadrature_gramian(&scalar(), &band, points).unwrap();
            let err = ((&z * z.transpose())[(0, 0)] - exact).abs();
            assert!(err <= last + 1e-12, "{points}: {err:e} after {last:e}");
            last = err;
        }
        assert!(last < 1e-12, "{last:e}");
    }

    #[test]
    fn too_few_points() {
        let band = FrequencyBand::single(1.0, 2.0).unwrap();
        assert!(quadrature_gramian(&scalar(), &band, 1).is_err());
    }
}
