//! Density of the image of `σ_{nd-1}` under `(y_1, ..., y_n) ↦ (y_1 - y_n, ..., y_{n-1} - y_n)`.
//!
//! With `Q(z) = Σ|z_i|² - |Σ z_i|²/n` the density is
//! `ρ(z) = (2π / n^{d/2}) V_{d-2} (1 - Q(z))_+^{(d-2)/2}`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Error, Result};
use crate::numeric::{gauss_legendre, unit_ball_volume};
use crate::par;
use crate::seed::Seed;
use crate::spherequad::{self, area, Estimate};

/// Relative change between a resolution and its half that `total_mass`
/// accepts.
pub const MASS_TOL: f64 = 5e-3;

/// Largest supported `n d`.
pub const MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PushforwardSpec {
    n: usize,
    d: usize,
}

impl PushforwardSpec {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", "push-forward needs arity at least 2"));
        }
        if d < 2 {
            return Err(invalid("d", "dimension must be at least 2"));
        }
        if n * d > MAX_DIM {
            return Err(invalid("n*d", format!("sphere dimension above {MAX_DIM}")));
        }
        Ok(PushforwardSpec { n, d })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Dimension `(n-1) d` of the difference space.
    pub fn difference_dim(&self) -> usize {
        (self.n - 1) * self.d
    }

    fn check(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.difference_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.difference_dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Half-width of a cube containing the support: the form has
    /// eigenvalues 1 and 1/n, so `Q < 1` implies `|z|² < n`.
    pub fn support_half_width(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    fn q_unchecked(&self, z: &[f64]) -> f64 {
        let d = self.d;
        let mut sq = 0.0;
        let mut tot = [0.0f64; MAX_DIM];
        let tot = &mut tot[..d];
        for zi in z.chunks_exact(d) {
            for (k, v) in zi.iter().enumerate() {
                sq += v * v;
                tot[k] += v;
            }
        }
        let s2: f64 = tot.iter().map(|v| v * v).sum();
        (sq - s2 / self.n as f64).max(0.0)
    }

    fn density_unchecked(&self, z: &[f64]) -> f64 {
        let q = self.q_unchecked(z);
        if q >= 1.0 {
            return 0.0;
        }
        let c = density_sup(*self);
        if self.d == 2 {
            c
        } else {
            c * (1.0 - q).powf((self.d as f64 - 2.0) / 2.0)
        }
    }
}

/// `Q(z) = Σ|z_i|² - |Σ z_i|²/n` for `z = (z_1, ..., z_{n-1})` stored flat.
pub fn quadratic_form_q(spec: PushforwardSpec, z: &[f64]) -> Result<f64> {
    spec.check(z)?;
    Ok(spec.q_unchecked(z))
}

/// Closed-form push-forward density at `z`.
pub fn density(spec: PushforwardSpec, z: &[f64]) -> Result<f64> {
    spec.check(z)?;
    Ok(spec.density_unchecked(z))
}

/// `sup ρ = (2π / n^{d/2}) V_{d-2}`, attained where `Q = 0`.
pub fn density_sup(spec: PushforwardSpec) -> f64 {
    let d = spec.d as f64;
    2.0 * std::f64::consts::PI / (spec.n as f64).powf(d / 2.0) * unit_ball_volume(spec.d - 2)
}

fn midpoint_mass(spec: PushforwardSpec, resolution: usize) -> f64 {
    let k = spec.difference_dim();
    let b = spec.support_half_width();
    let h = 2.0 * b / resolution as f64;
    let cells = resolution.pow(k as u32);
    let s = par::sum(cells, |mut idx| {
        let mut z = [0.0f64; MAX_DIM];
        for v in z[..k].iter_mut().rev() {
            *v = -b + ((idx % resolution) as f64 + 0.5) * h;
            idx /= resolution;
        }
        spec.density_unchecked(&z[..k])
    });
    s * h.powi(k as i32)
}

/// Midpoint-rule integral of ρ over the support cube with `resolution`
/// cells per axis. The result is compared with the half-resolution rule and
/// rejected with [`Error::TooCoarse`] when they differ by more than
/// [`MASS_TOL`].
pub fn total_mass(spec: PushforwardSpec, resolution: usize) -> Result<f64> {
    let k = spec.difference_dim();
    if resolution < 8 {
        return Err(invalid("resolution", "need at least 8 cells per axis"));
    }
    if (resolution as f64).powi(k as i32) > 2e9 {
        return Err(invalid("resolution", "integration grid too large"));
    }
    let fine = midpoint_mass(spec, resolution);
    let coarse = midpoint_mass(spec, resolution / 2);
    let rel = (fine - coarse).abs() / fine;
    if rel > MASS_TOL {
        return Err(Error::TooCoarse(format!(
            "total mass changed by {:.3}% between resolutions {} and {}",
            100.0 * rel,
            resolution / 2,
            resolution
        )));
    }
    Ok(fine)
}

/// `∫ F(z) ρ(z) dz` by quadrature in whitened polar coordinates.
///
/// `z_l = w_l + c Σ_m w_m` with `c = (√n - 1)/(n - 1)` maps the unit ball
/// `|w| < 1` onto `{Q < 1}` with Jacobian `n^{d/2}`. The radius is written
/// `sin θ` so the weight `r^{k-1}(1 - r²)^{(d-2)/2} dr` becomes the smooth
/// `sin^{k-1}θ cos^{d-1}θ dθ`, integrated by Gauss–Legendre with
/// `radial_order` points; directions use `product_rule(k, angular_order)`.
pub fn integrate_against_density<F>(
    spec: PushforwardSpec,
    f: F,
    radial_order: usize,
    angular_order: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let k = spec.difference_dim();
    if radial_order < 4 {
        return Err(invalid("radial_order", "need at least 4 radial nodes"));
    }
    let dirs = spherequad::product_rule(k, angular_order)?;
    let (th, tw) = gauss_legendre(radial_order, 0.0, FRAC_PI_2);
    let n = spec.n as f64;
    let c = (n.sqrt() - 1.0) / (n - 1.0);
    let d = spec.d;
    let total = th.len() * dirs.len();
    let s = par::sum(total, |idx| {
        let (i, j) = (idx / dirs.len(), idx % dirs.len());
        let (s, co) = th[i].sin_cos();
        let w = tw[i] * s.powi(k as i32 - 1) * co.powi(d as i32 - 1) * dirs.weight(j);
        let omega = dirs.node(j);
        let mut z = [0.0f64; MAX_DIM];
        let mut mean = [0.0f64; MAX_DIM];
        for (l, v) in omega.iter().enumerate() {
            mean[l % d] += v;
        }
        for l in 0..k {
            z[l] = s * (omega[l] + c * mean[l % d]);
        }
        w * f(&z[..k])
    });
    Ok(2.0 * std::f64::consts::PI * unit_ball_volume(d - 2) * s)
}

fn split_differences(y: &[f64], n: usize, d: usize, z: &mut [f64]) {
    let last = &y[(n - 1) * d..n * d];
    for l in 0..n - 1 {
        for k in 0..d {
            z[l * d + k] = y[l * d + k] - last[k];
        }
    }
}

/// Monte Carlo estimate of `∫_{S^{nd-1}} F(y_1 - y_n, ..., y_{n-1} - y_n) dσ`.
pub fn pushforward_expectation<F>(
    spec: PushforwardSpec,
    f: F,
    count: usize,
    seed: Seed,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let (n, d) = (spec.n, spec.d);
    spherequad::monte_carlo(n * d, count, seed, |y| {
        let mut z = [0.0f64; MAX_DIM];
        split_differences(y, n, d, &mut z);
        f(&z[..(n - 1) * d])
    })
}

/// Histogram of the difference map over uniform sphere samples, on a cube
/// `[-half_width, half_width)^k` with cubic bins.
#[derive(Clone, Debug)]
pub struct Histogram {
    k: usize,
    bin: f64,
    half_width: f64,
    per_axis: usize,
    samples: usize,
    total_mass: f64,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn center(&self, mut idx: usize, out: &mut [f64]) {
        for v in out[..self.k].iter_mut().rev() {
            *v = -self.half_width + ((idx % self.per_axis) as f64 + 0.5) * self.bin;
            idx /= self.per_axis;
        }
    }

    fn scale(&self) -> f64 {
        self.total_mass / (self.samples as f64 * self.bin.powi(self.k as i32))
    }

    /// Density estimate `σ(bin) / |bin|`.
    pub fn estimate(&self, idx: usize) -> f64 {
        self.counts[idx] as f64 * self.scale()
    }

    /// Binomial standard error of [`Histogram::estimate`].
    pub fn std_error(&self, idx: usize) -> f64 {
        let p = self.counts[idx] as f64 / self.samples as f64;
        (p * (1.0 - p) * self.samples as f64).sqrt() * self.scale()
    }

    /// Smallest distance from the origin to the closed bin.
    pub fn inner_radius(&self, idx: usize) -> f64 {
        let mut c = [0.0f64; MAX_DIM];
        self.center(idx, &mut c);
        c[..self.k]
            .iter()
            .map(|v| (v.abs() - self.bin / 2.0).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Histogram oracle for the density: bins the difference map over `samples`
/// uniform points of `S^{nd-1}`.
pub fn histogram(
    spec: PushforwardSpec,
    samples: usize,
    bin: f64,
    half_width: f64,
    seed: Seed,
) -> Result<Histogram> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    if !(bin > 0.0 && half_width > 0.0) {
        return Err(invalid("bin", "bin width and half-width must be positive"));
    }
    let (n, d) = (spec.n, spec.d);
    let k = spec.difference_dim();
    let per_axis = (2.0 * half_width / bin).round() as usize;
    if per_axis == 0 || (per_axis as f64).powi(k as i32) > 5e7 {
        return Err(invalid("bin", "histogram has too many bins"));
    }
    let bins = per_axis.pow(k as u32);
    let half_width = per_axis as f64 * bin / 2.0;
    let m = n * d;
    let chunks = samples.div_ceil(par::CHUNK);
    const GROUP: usize = 64;
    let partial = par::map_indexed(chunks.div_ceil(GROUP), |g| {
        let mut counts = vec![0u64; bins];
        let mut buf = vec![0.0; par::CHUNK * m];
        let mut z = vec![0.0; k];
        for c in g * GROUP..((g + 1) * GROUP).min(chunks) {
            let len = par::CHUNK.min(samples - c * par::CHUNK);
            let buf = &mut buf[..len * m];
            spherequad::fill_chunk(m, seed, c, buf);
            'node: for y in buf.chunks_exact(m) {
                split_differences(y, n, d, &mut z);
                let mut idx = 0;
                for v in &z {
                    let b = ((v + half_width) / bin).floor();
                    if b < 0.0 || b >= per_axis as f64 {
                        continue 'node;
                    }
                    idx = idx * per_axis + b as usize;
                }
                counts[idx] += 1;
            }
        }
        counts
    });
    let mut counts = vec![0u64; bins];
    for p in partial {
        for (c, v) in counts.iter_mut().zip(p) {
            *c += v;
        }
    }
    Ok(Histogram {
        k,
        bin,
        half_width,
        per_axis,
        samples,
        total_mass: area(m),
        counts,
    })
}

/// Fraction of bins meeting `{|z| < radius}` whose estimate is within
/// `sigmas` standard errors of the closed form at the bin center.
pub fn histogram_agreement(
    spec: PushforwardSpec,
    hist: &Histogram,
    radius: f64,
    sigmas: f64,
) -> (usize, usize) {
    let mut c = vec![0.0; hist.k];
    let mut hits = 0;
    let mut total = 0;
    for idx in 0..hist.len() {
        if hist.inner_radius(idx) >= radius {
            continue;
        }
        hist.center(idx, &mut c);
        let expected = spec.density_unchecked(&c);
        let se = hist.std_error(idx).max(f64::MIN_POSITIVE);
        total += 1;
        if (hist.estimate(idx) - expected).abs() <= sigmas * se {
            hits += 1;
        }
    }
    (hits, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn spec(n: usize, d: usize) -> PushforwardSpec {
        PushforwardSpec::new(n, d).unwrap()
    }

    #[test]
    fn quadratic_form_examples() {
        assert_eq!(quadratic_form_q(spec(2, 2), &[0.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(quadratic_form_q(spec(2, 2), &[1.0, 0.0]).unwrap(), 0.5);
        let q = quadratic_form_q(spec(3, 2), &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(q, 2.0 / 3.0, max_relative = 1e-15);
        assert!(quadratic_form_q(spec(3, 2), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn density_examples() {
        assert_relative_eq!(density(spec(2, 2), &[0.3, -0.9]).unwrap(), PI, max_relative = 1e-15);
        let r2 = 2f64.sqrt();
        assert_relative_eq!(density(spec(2, 3), &[0.0; 3]).unwrap(), PI * r2, max_relative = 1e-14);
        // Q = |z|^2 / 2 = 1.5
        assert_eq!(density(spec(2, 2), &[3f64.sqrt(), 0.0]).unwrap(), 0.0);
        assert_eq!(density(spec(2, 3), &[3f64.sqrt(), 0.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(density_sup(spec(3, 2)), 2.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(density_sup(spec(2, 3)), PI * r2, max_relative = 1e-14);
    }

    #[test]
    fn sup_dominates_random_evaluations() {
        for (n, d) in [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)] {
            let s = spec(n, d);
            let sup = density_sup(s);
            let mut rng = Seed(5).rng(0);
            let k = s.difference_dim();
            let b = s.support_half_width();
            let mut z = vec![0.0; k];
            let mut best = 0.0f64;
            for _ in 0..200_000 {
                z.iter_mut().for_each(|v| *v = rng.random_range(-b..b) * 0.3);
                let rho = density(s, &z).unwrap();
                assert!(rho <= sup);
                best = best.max(rho);
            }
            assert!(best > 0.95 * sup);
        }
        for d in 2..5 {
            for n in 2..4 {
                assert!(density_sup(spec(n + 1, d)) <= density_sup(spec(n, d)));
            }
        }
    }

    #[test]
    fn symmetric_under_permutation_and_rotation() {
        let s = spec(3, 2);
        let z = [0.3, -0.1, 0.2, 0.4];
        let swapped = [0.2, 0.4, 0.3, -0.1];
        let q = quadratic_form_q(s, &z).unwrap();
        assert_relative_eq!(q, quadratic_form_q(s, &swapped).unwrap(), max_relative = 1e-15);
        let (sn, cs) = 0.7f64.sin_cos();
        let rot: Vec<f64> = z
            .chunks(2)
            .flat_map(|v| [cs * v[0] - sn * v[1], sn * v[0] + cs * v[1]])
            .collect();
        assert_relative_eq!(q, quadratic_form_q(s, &rot).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn polar_quadrature_recovers_sphere_area() {
        for (n, d) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let m = integrate_against_density(spec(n, d), |_| 1.0, 24, 16).unwrap();
            assert_relative_eq!(m, area(n * d), max_relative = 1e-10);
        }
    }

    #[test]
    fn midpoint_mass_matches_area() {
        let m = total_mass(spec(2, 2), 512).unwrap();
        assert_relative_eq!(m, 2.0 * PI * PI, max_relative = 5e-3);
        assert!(matches!(total_mass(spec(2, 2), 8), Err(Error::TooCoarse(_))));
    }

    #[test]
    fn support_is_inside_q_below_one() {
        // every point of the sphere maps into {Q <= 1}
        let s = spec(3, 2);
        let e = pushforward_expectation(
            s,
            |z| if s.q_unchecked(z) > 1.0 + 1e-12 { 1.0 } else { 0.0 },
            100_000,
            Seed(2),
        )
        .unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn histogram_is_flat_in_the_plane() {
        let s = spec(2, 2);
        let h = histogram(s, 1_000_000, 0.05, 1.5, Seed(8)).unwrap();
        let (hits, total) = histogram_agreement(s, &h, 1.2, 3.0);
        assert!(hits as f64 >= 0.95 * total as f64, "{hits}/{total}");
    }

    proptest! {
        #[test]
        fn q_is_nonnegative(z in prop::collection::vec(-3.0f64..3.0, 6)) {
            prop_assert!(quadratic_form_q(spec(4, 2), &z).unwrap() >= 0.0);
            prop_assert!(quadratic_form_q(spec(3, 3), &z).unwrap() >= 0.0);
        }
    }
}
