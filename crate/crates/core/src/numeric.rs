//! Small numerical building blocks: compensated summation, Gamma-function
//! helpers and Gaussian quadrature nodes.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn beta(a: f64, b: f64) -> f64 {
    (libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)).exp()
}

/// Volume of the unit ball in `R^k`; `V_0 = 1`.
pub fn unit_ball_volume(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// Gauss rule for the weight `(1 - t^2)^alpha` on `[-1, 1]` (Golub–Welsch).
///
/// `alpha = 0` gives Gauss–Legendre. Nodes are returned in increasing order.
pub fn gauss_gegenbauer(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -0.5);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + 2.0 * alpha;
        let b = (kf * (kf + 2.0 * alpha) / (s * s - 1.0)).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let mu0 = PI.sqrt() * gamma(alpha + 1.0) / gamma(alpha + 1.5);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize: the exact rule is symmetric about the origin
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let t = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-t, w);
        pairs[j] = (t, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_gegenbauer(n, 0.0);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        t.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|w| half * w).collect(),
    )
}

/// C-infinity step: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smooth_step(u: f64) -> f64 {
    fn g(u: f64) -> f64 {
        if u > 0.0 {
            (-1.0 / u).exp()
        } else {
            0.0
        }
    }
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = g(u);
        a / (a + g(1.0 - u))
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8, 0.0, 2.0);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert_relative_eq!(int, 2f64.powi(16) / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn gegenbauer_half_weight_matches_beta_integrals() {
        // int (1-t^2)^(1/2) t^4 dt = B(5/2, 3/2)
        let (t, w) = gauss_gegenbauer(6, 0.5);
        let int: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(4)).sum();
        assert_relative_eq!(int, beta(2.5, 1.5), max_relative = 1e-13);
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_relative_eq!(unit_ball_volume(2), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn smooth_step_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            let s = smooth_step(u);
            assert!(s >= prev);
            assert_relative_eq!(s + smooth_step(1.0 - u), 1.0, epsilon = 1e-15);
            prev = s;
        }
    }
}
