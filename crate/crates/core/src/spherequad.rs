//! Integration on unit spheres `S^{m-1} ⊂ R^m`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numeric::{gamma, gauss_gegenbauer, CompensatedSum};
use crate::par;
use crate::seed::{standard_normal, Seed};

/// Surface area `2 π^{m/2} / Γ(m/2)` of `S^{m-1}`.
pub fn surface_area(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(invalid("m", "sphere ambient dimension must be at least 2"));
    }
    Ok(area(m))
}

pub(crate) fn area(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Deterministic { order: usize },
    MonteCarlo { count: usize, seed: Seed },
}

/// A quadrature estimate; `std_error` is zero for deterministic rules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Nodes on `S^{m-1}` (flat, `m` coordinates per node) and positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    m: usize,
    mode: Mode,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, j: usize) -> &[f64] {
        &self.nodes[j * self.m..(j + 1) * self.m]
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_j w_j g(node_j)`, with a standard error for Monte Carlo rules.
    pub fn integrate<G>(&self, g: G) -> Estimate
    where
        G: Fn(&[f64]) -> f64 + Sync + Send,
    {
        match self.mode {
            Mode::Deterministic { .. } => Estimate {
                value: par::sum(self.len(), |j| self.weights[j] * g(self.node(j))),
                std_error: 0.0,
            },
            Mode::MonteCarlo { count, .. } => {
                let (s, s2) = par::sum_and_squares(count, |j| g(self.node(j)));
                mc_estimate(self.m, count, s, s2)
            }
        }
    }
}

fn mc_estimate(m: usize, count: usize, s: f64, s2: f64) -> Estimate {
    let n = count as f64;
    let mean = s / n;
    let var = if count > 1 {
        ((s2 - s * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let a = area(m);
    Estimate {
        value: a * mean,
        std_error: a * (var / n).sqrt(),
    }
}

/// Writes the Monte Carlo nodes of chunk `chunk` (chunks have
/// [`par::CHUNK`] nodes) into `out`, whose length is a multiple of `m`.
///
/// Node `j` of a count-`N` sample is the same whichever way the sample is
/// consumed: materialized, streamed, or split across threads.
pub fn fill_chunk(m: usize, seed: Seed, chunk: usize, out: &mut [f64]) {
    let mut rng = seed.rng(chunk as u64);
    for node in out.chunks_exact_mut(m) {
        loop {
            let mut r2 = 0.0;
            for v in node.iter_mut() {
                *v = standard_normal(&mut rng);
                r2 += *v * *v;
            }
            if r2 > 1e-300 {
                let inv = 1.0 / r2.sqrt();
                node.iter_mut().for_each(|v| *v *= inv);
                break;
            }
        }
    }
}

/// Uniform nodes on `S^{m-1}` from normalized standard normal vectors.
pub fn sample_sphere(m: usize, count: usize, seed: Seed) -> Result<QuadratureRule> {
    if m < 2 {
        return Err(invalid("m", "sphere ambient dimension must be at least 2"));
    }
    if count == 0 {
        return Err(invalid("count", "need at least one sample"));
    }
    let mut nodes = vec![0.0; count * m];
    par::for_each_chunk_mut(&mut nodes, par::CHUNK * m, |c, part| {
        fill_chunk(m, seed, c, part)
    });
    Ok(QuadratureRule {
        m,
        mode: Mode::MonteCarlo { count, seed },
        nodes,
        weights: vec![area(m) / count as f64; count],
    })
}

/// Monte Carlo integral of `g` over `S^{m-1}` without storing the nodes;
/// identical to integrating against `sample_sphere(m, count, seed)`.
pub fn monte_carlo<G>(m: usize, count: usize, seed: Seed, g: G) -> Result<Estimate>
where
    G: Fn(&[f64]) -> f64 + Sync + Send,
{
    if m < 2 {
        return Err(invalid("m", "sphere ambient dimension must be at least 2"));
    }
    if count == 0 {
        return Err(invalid("count", "need at least one sample"));
    }
    let chunks = count.div_ceil(par::CHUNK);
    let partials = par::map_indexed(chunks, |c| {
        let len = par::CHUNK.min(count - c * par::CHUNK);
        let mut buf = vec![0.0; len * m];
        fill_chunk(m, seed, c, &mut buf);
        let mut s = CompensatedSum::default();
        let mut s2 = CompensatedSum::default();
        for node in buf.chunks_exact(m) {
            let v = g(node);
            s.add(v);
            s2.add(v * v);
        }
        (s.value(), s2.value())
    });
    let mut s = CompensatedSum::default();
    let mut s2 = CompensatedSum::default();
    for (a, b) in partials {
        s.add(a);
        s2.add(b);
    }
    Ok(mc_estimate(m, count, s.value(), s2.value()))
}

/// Product rule on `S^{m-1}`.
///
/// For `m = 2`: `order` equally spaced angles with equal weights. For
/// `m > 2`: write `x = (u, sqrt(1 - u^2) y')` with `y' ∈ S^{m-2}`; the polar
/// variable `u` uses the Gauss rule for `(1 - u^2)^{(m-3)/2}` with
/// `ceil(order/2)` points (Gauss–Legendre when `m = 3`) and `y'` the rule of
/// the same order on `S^{m-2}`.
pub fn product_rule(m: usize, order: usize) -> Result<QuadratureRule> {
    if m < 2 {
        return Err(invalid("m", "sphere ambient dimension must be at least 2"));
    }
    if order < 4 {
        return Err(invalid("order", "quadrature order must be at least 4"));
    }
    let (nodes, weights) = product_nodes(m, order);
    Ok(QuadratureRule {
        m,
        mode: Mode::Deterministic { order },
        nodes,
        weights,
    })
}

fn product_nodes(m: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 2 {
        let w = 2.0 * PI / order as f64;
        let nodes = (0..order)
            .flat_map(|j| {
                let th = 2.0 * PI * j as f64 / order as f64;
                [th.cos(), th.sin()]
            })
            .collect();
        return (nodes, vec![w; order]);
    }
    let (sub_nodes, sub_weights) = product_nodes(m - 1, order);
    let (us, uw) = gauss_gegenbauer(order.div_ceil(2), (m as f64 - 3.0) / 2.0);
    let sub_len = sub_weights.len();
    let mut nodes = Vec::with_capacity(us.len() * sub_len * m);
    let mut weights = Vec::with_capacity(us.len() * sub_len);
    for (u, w) in us.iter().zip(&uw) {
        let s = (1.0 - u * u).max(0.0).sqrt();
        for k in 0..sub_len {
            nodes.push(*u);
            nodes.extend(
                sub_nodes[k * (m - 1)..(k + 1) * (m - 1)]
                    .iter()
                    .map(|y| s * y),
            );
            weights.push(w * sub_weights[k]);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn surface_areas() {
        assert_relative_eq!(surface_area(2).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(surface_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(surface_area(6).unwrap(), PI.powi(3), max_relative = 1e-14);
        assert_relative_eq!(surface_area(3).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert!(surface_area(1).is_err());
    }

    #[test]
    fn sampled_nodes_are_unit_vectors() {
        let rule = sample_sphere(5, 10_000, Seed(3)).unwrap();
        for j in 0..rule.len() {
            let r: f64 = rule.node(j).iter().map(|v| v * v).sum();
            assert!((r.sqrt() - 1.0).abs() < 1e-12);
        }
        assert!(sample_sphere(3, 0, Seed(0)).is_err());
    }

    #[test]
    fn sample_moments() {
        for m in [3usize, 4] {
            let n = 1_000_000;
            let rule = sample_sphere(m, n, Seed(11)).unwrap();
            for k in 0..m {
                let mean: f64 = (0..n).map(|j| rule.node(j)[k]).sum::<f64>() / n as f64;
                assert!(mean.abs() < 5e-3);
            }
            let sq: f64 = (0..n).map(|j| rule.node(j)[0].powi(2)).sum::<f64>() / n as f64;
            assert!((sq * m as f64 - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn streaming_matches_materialized() {
        let g = |y: &[f64]| (y[0] + 2.0 * y[2]).exp();
        let rule = sample_sphere(4, 5000, Seed(9)).unwrap();
        let a = rule.integrate(g);
        let b = monte_carlo(4, 5000, Seed(9), g).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-14);
        assert_relative_eq!(a.std_error, b.std_error, max_relative = 1e-10);
    }

    #[test]
    fn product_rule_moments() {
        for m in 2..=4 {
            let rule = product_rule(m, 16).unwrap();
            let a = area(m);
            assert_relative_eq!(rule.integrate(|_| 1.0).value, a, max_relative = 1e-10);
            let sum: f64 = rule.weights().iter().sum();
            assert_relative_eq!(sum, a, max_relative = 1e-8);
            for axis in 0..m {
                let v = rule.integrate(|y| y[axis] * y[axis]).value;
                assert_relative_eq!(v, a / m as f64, max_relative = 1e-8);
            }
            // E x_1^4 = 3 / (m (m + 2))
            let v = rule.integrate(|y| y[m - 1].powi(4)).value;
            assert_relative_eq!(v, 3.0 * a / (m * (m + 2)) as f64, max_relative = 1e-10);
            let v = rule.integrate(|y| (y[0] * y[m - 1]).powi(2)).value;
            assert_relative_eq!(v, a / (m * (m + 2)) as f64, max_relative = 1e-10);
            for j in 0..rule.len() {
                let r: f64 = rule.node(j).iter().map(|v| v * v).sum();
                assert!((r.sqrt() - 1.0).abs() < 1e-12);
            }
        }
        let circle = product_rule(2, 8).unwrap();
        assert!((circle.integrate(|y| y[0] * y[0]).value - PI).abs() < 1e-12);
        assert!(product_rule(3, 3).is_err());
    }

    #[test]
    fn monte_carlo_error_shrinks_like_inverse_sqrt() {
        let g = |y: &[f64]| {
            let r2 = (y[0] - 0.6).powi(2) + (y[1] - 0.3).powi(2) + y[2].powi(2);
            let u = 1.0 - r2 / 0.8;
            if u > 0.0 {
                u * u
            } else {
                0.0
            }
        };
        let exact = product_rule(3, 400).unwrap().integrate(g).value;
        // rms error over independent seeds at two sample sizes
        let rms = |count: usize| {
            let reps = 40;
            let s: f64 = (0..reps)
                .map(|k| {
                    let e = monte_carlo(3, count, Seed(1000 + k), g).unwrap().value - exact;
                    e * e
                })
                .sum();
            (s / reps as f64).sqrt()
        };
        let ratio = rms(4_000) / rms(16_000);
        assert!(ratio > 1.0 && ratio < 4.0, "ratio {ratio}");
    }
}
