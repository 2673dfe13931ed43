//! Pointwise evaluation of `A_t(f_1, ..., f_n)(x)` and its maximal variants.

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Error, Result};
use crate::func::{Evaluate, FunctionTuple, Profile};
use crate::numeric::gauss_legendre;
use crate::par;
use crate::pushforward::{integrate_against_density, PushforwardSpec};
use crate::spherequad::{product_rule, Estimate, QuadratureRule};

/// Default Gauss–Legendre points per slicing level.
pub const DEFAULT_LAMBDA_ORDER: usize = 32;
/// Minimum order accepted by [`SlicedAverager`].
pub const MIN_SLICED_ORDER: usize = 16;

fn check_factors(factors: &[&dyn Evaluate], t: f64, x: &[f64]) -> Result<usize> {
    let Some(first) = factors.first() else {
        return Err(invalid("functions", "need at least one factor"));
    };
    let d = first.dim();
    for f in factors {
        if f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
    }
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", "scale must be positive"));
    }
    Ok(d)
}

/// `Σ_j w_j Π_i f_i(x - t y_{i,j})` over a rule on `S^{nd-1}`.
pub fn average_direct(
    factors: &[&dyn Evaluate],
    t: f64,
    x: &[f64],
    rule: &QuadratureRule,
) -> Result<Estimate> {
    let d = check_factors(factors, t, x)?;
    let n = factors.len();
    if rule.dim() != n * d {
        return Err(Error::DimensionMismatch {
            expected: n * d,
            got: rule.dim(),
        });
    }
    Ok(rule.integrate(|y| {
        let mut p = [0.0f64; 8];
        let p = &mut p[..d];
        let mut prod = 1.0;
        for (i, f) in factors.iter().enumerate() {
            for k in 0..d {
                p[k] = x[k] - t * y[i * d + k];
            }
            prod *= f.value(p);
            if prod == 0.0 {
                break;
            }
        }
        prod
    }))
}

/// Evaluates averages through the slicing identity
///
/// `A^n_t(f)(x) = ∫_0^1 λ^{(n-1)d-1} (1-λ²)^{(d-2)/2} A^{n-1}_{tλ}(f_1..f_{n-1})(x) A_{t√(1-λ²)}(f_n)(x) dλ`,
///
/// recursing to single-sphere averages on `S^{d-1}`. The substitution
/// `λ = sin θ` turns the weight into `sin^{(n-1)d-1}θ cos^{d-1}θ`, smooth on
/// `[0, π/2]`, where Gauss–Legendre is applied.
#[derive(Clone, Debug)]
pub struct SlicedAverager {
    d: usize,
    lambda_order: usize,
    base_order: usize,
    base: QuadratureRule,
    // (sin θ, cos θ, Gauss weight)
    theta: Vec<(f64, f64, f64)>,
}

impl SlicedAverager {
    pub fn new(d: usize, lambda_order: usize, base_order: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid("d", "dimension must be at least 2"));
        }
        if d > 8 {
            return Err(invalid("d", "dimension above 8 is not supported"));
        }
        if lambda_order < MIN_SLICED_ORDER {
            return Err(invalid("lambda_order", "need at least 16 points"));
        }
        if base_order < MIN_SLICED_ORDER {
            return Err(invalid("base_order", "need at least 16 points"));
        }
        let base = product_rule(d, base_order)?;
        let (th, w) = gauss_legendre(lambda_order, 0.0, FRAC_PI_2);
        let theta = th
            .iter()
            .zip(&w)
            .map(|(t, w)| {
                let (s, c) = t.sin_cos();
                (s, c, *w)
            })
            .collect();
        Ok(SlicedAverager {
            d,
            lambda_order,
            base_order,
            base,
            theta,
        })
    }

    /// Default orders: 32 slicing points, base rule of order 64.
    pub fn with_defaults(d: usize) -> Result<Self> {
        Self::new(d, DEFAULT_LAMBDA_ORDER, 64)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn lambda_order(&self) -> usize {
        self.lambda_order
    }

    pub fn base_order(&self) -> usize {
        self.base_order
    }

    pub fn eval(&self, factors: &[&dyn Evaluate], t: f64, x: &[f64]) -> Result<f64> {
        let d = check_factors(factors, t, x)?;
        if d != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: d,
            });
        }
        Ok(self.eval_unchecked(factors, t, x))
    }

    /// Evaluates at many points in parallel; `xs` holds `d` coordinates per point.
    pub fn eval_many(&self, factors: &[&dyn Evaluate], t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        let d = self.d;
        if xs.len() % d != 0 {
            return Err(invalid("xs", "point buffer length is not a multiple of d"));
        }
        if let Some(x) = xs.get(..d) {
            self.eval(factors, t, x)?;
        }
        Ok(par::map_indexed(xs.len() / d, |i| {
            self.eval_unchecked(factors, t, &xs[i * d..(i + 1) * d])
        }))
    }

    pub(crate) fn eval_unchecked(&self, factors: &[&dyn Evaluate], t: f64, x: &[f64]) -> f64 {
        let k = factors.len();
        if k == 1 {
            return self.single(factors[0], t, x);
        }
        let p = ((k - 1) * self.d - 1) as i32;
        let q = (self.d - 1) as i32;
        let mut acc = 0.0;
        for &(s, c, w) in &self.theta {
            let last = self.single(factors[k - 1], t * c, x);
            if last == 0.0 {
                continue;
            }
            let rest = self.eval_unchecked(&factors[..k - 1], t * s, x);
            acc += w * s.powi(p) * c.powi(q) * rest * last;
        }
        acc
    }

    fn single(&self, f: &dyn Evaluate, t: f64, x: &[f64]) -> f64 {
        let d = self.d;
        let mut p = [0.0f64; 8];
        let p = &mut p[..d];
        let mut acc = 0.0;
        for j in 0..self.base.len() {
            let y = self.base.node(j);
            for k in 0..d {
                p[k] = x[k] - t * y[k];
            }
            acc += self.base.weight(j) * f.value(p);
        }
        acc
    }
}

/// How an average is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum Method<'a> {
    Direct(&'a QuadratureRule),
    Sliced(&'a SlicedAverager),
}

impl Method<'_> {
    pub fn eval(&self, factors: &[&dyn Evaluate], t: f64, x: &[f64]) -> Result<f64> {
        match self {
            Method::Direct(rule) => Ok(average_direct(factors, t, x, rule)?.value),
            Method::Sliced(s) => s.eval(factors, t, x),
        }
    }
}

/// The dyadic scales `{2^{-l} : |l| <= N}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicScaleSet {
    pub n: u32,
}

impl DyadicScaleSet {
    pub fn new(n: u32) -> Self {
        DyadicScaleSet { n }
    }

    /// Scales ordered by `l = -N, ..., N`.
    pub fn scales(&self) -> Vec<f64> {
        let n = self.n as i32;
        (-n..=n).map(|l| 2f64.powi(-l)).collect()
    }
}

/// Maximum of the average over a set of scales.
pub fn maximal_over(
    factors: &[&dyn Evaluate],
    x: &[f64],
    scales: &[f64],
    method: Method<'_>,
) -> Result<f64> {
    if scales.is_empty() {
        return Err(invalid("scales", "empty scale set"));
    }
    let mut best = f64::NEG_INFINITY;
    for &t in scales {
        best = best.max(method.eval(factors, t, x)?);
    }
    Ok(best)
}

/// Truncated lacunary maximal function `max_{|l| <= N} A_{2^{-l}}(f)(x)`.
pub fn lacunary_maximal(
    factors: &[&dyn Evaluate],
    x: &[f64],
    scales: DyadicScaleSet,
    method: Method<'_>,
) -> Result<f64> {
    maximal_over(factors, x, &scales.scales(), method)
}

/// Geometric scale grid `t_min 2^{j/K}`, `j = 0, 1, ...`, up to `t_max`.
///
/// Grids with the same endpoints and `K` doubled are supersets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricGrid {
    t_min: f64,
    t_max: f64,
    k: u32,
}

impl GeometricGrid {
    pub fn new(t_min: f64, t_max: f64, k: u32) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(invalid("t", "need 0 < t_min < t_max"));
        }
        if k < 4 {
            return Err(invalid("K", "need at least 4 points per octave"));
        }
        Ok(GeometricGrid { t_min, t_max, k })
    }

    /// `t ∈ [2^-8, 2^8]` with `K = 8`.
    pub fn standard() -> Self {
        GeometricGrid {
            t_min: 2f64.powi(-8),
            t_max: 2f64.powi(8),
            k: 8,
        }
    }

    pub fn with_k(self, k: u32) -> Result<Self> {
        Self::new(self.t_min, self.t_max, k)
    }

    pub fn points_per_octave(&self) -> u32 {
        self.k
    }

    pub fn scales(&self) -> Vec<f64> {
        let steps = (self.k as f64 * (self.t_max / self.t_min).log2() + 1e-9).floor() as i64;
        (0..=steps)
            .map(|j| self.t_min * 2f64.powf(j as f64 / self.k as f64))
            .collect()
    }
}

/// Maximum of the average over a geometric grid: a lower bound for
/// `sup_{t>0} A_t(f)(x)` that increases to it as `K` grows.
pub fn full_maximal(
    factors: &[&dyn Evaluate],
    x: &[f64],
    grid: GeometricGrid,
    method: Method<'_>,
) -> Result<f64> {
    maximal_over(factors, x, &grid.scales(), method)
}

/// Discretization of [`l1_pairing`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingGrid {
    /// Midpoint cells per axis over the support box of `f_n`.
    pub x_resolution: usize,
    pub radial_order: usize,
    pub angular_order: usize,
    /// Accepted relative change against the half-resolution x grid.
    pub tolerance: f64,
}

impl Default for PairingGrid {
    fn default() -> Self {
        PairingGrid {
            x_resolution: 64,
            radial_order: 32,
            angular_order: 64,
            tolerance: 2e-3,
        }
    }
}

fn pairing_at(functions: &FunctionTuple, spec: PushforwardSpec, grid: &PairingGrid, res: usize) -> Result<f64> {
    let d = functions.dim();
    let n = functions.arity();
    let last = &functions.entries()[n - 1];
    let r = last.support_radius();
    let h = 2.0 * r / res as f64;
    let cells = res.pow(d as u32);
    // nonzero samples of f_n on the midpoint grid
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    let mut x = vec![0.0; d];
    for mut idx in 0..cells {
        for k in (0..d).rev() {
            x[k] = last.center()[k] - r + ((idx % res) as f64 + 0.5) * h;
            idx /= res;
        }
        let v = last.value(&x);
        if v != 0.0 {
            xs.extend_from_slice(&x);
            ws.push(v);
        }
    }
    let vol = h.powi(d as i32);
    let others = &functions.entries()[..n - 1];
    integrate_against_density(
        spec,
        |z| {
            let mut p = [0.0f64; 8];
            let p = &mut p[..d];
            let mut acc = 0.0;
            for (j, w) in ws.iter().enumerate() {
                let xj = &xs[j * d..(j + 1) * d];
                let mut prod = *w;
                for (l, f) in others.iter().enumerate() {
                    for k in 0..d {
                        p[k] = xj[k] - z[l * d + k];
                    }
                    prod *= f.value(p);
                    if prod == 0.0 {
                        break;
                    }
                }
                acc += prod;
            }
            acc * vol
        },
        grid.radial_order,
        grid.angular_order,
    )
}

/// `∫ A(f)(x) dx` computed as `∫ f_n(x) ∫ Π_{l<n} f_l(x - z_l) ρ(z) dz dx`.
///
/// Gaussians are truncated at their [`support_radius`](crate::TestFunction::support_radius).
/// The x integral is repeated at half resolution; a relative change above
/// `grid.tolerance` is reported as [`Error::TooCoarse`].
pub fn l1_pairing(functions: &FunctionTuple, grid: PairingGrid) -> Result<f64> {
    let n = functions.arity();
    if n < 2 {
        return Err(invalid("functions", "pairing needs arity at least 2"));
    }
    if grid.x_resolution < 8 {
        return Err(invalid("x_resolution", "need at least 8 cells per axis"));
    }
    let spec = PushforwardSpec::new(n, functions.dim())?;
    if functions.entries().iter().any(|f| f.amplitude() == 0.0) {
        return Ok(0.0);
    }
    let fine = pairing_at(functions, spec, &grid, grid.x_resolution)?;
    let coarse = pairing_at(functions, spec, &grid, grid.x_resolution / 2)?;
    let scale = fine.abs().max(f64::MIN_POSITIVE);
    if (fine - coarse).abs() > grid.tolerance * scale {
        return Err(Error::TooCoarse(format!(
            "pairing changed from {coarse} to {fine} on refinement"
        )));
    }
    Ok(fine)
}

/// Outcome of [`localization_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationReport {
    /// Some pair of supports is more than 2 apart.
    pub separated: bool,
    /// If separated, the average vanished at every probe.
    pub c1_ok: bool,
    /// The average vanished at every probe outside `∪ (supp f_i + B(0,1))`.
    pub c2_ok: bool,
    /// Largest value seen over all probes.
    pub max_value: f64,
    pub probes: usize,
}

/// Checks the support localization of the `t = 1` average on a set of probe
/// points (`d` coordinates each).
pub fn localization_check(
    functions: &FunctionTuple,
    probes: &[f64],
    method: Method<'_>,
) -> Result<LocalizationReport> {
    let d = functions.dim();
    if probes.len() % d != 0 {
        return Err(invalid("probes", "point buffer length is not a multiple of d"));
    }
    let supports: Vec<(&[f64], f64)> = functions
        .entries()
        .iter()
        .map(|f| match f.profile() {
            Profile::Bump { s, .. } => Ok((f.center(), *s)),
            Profile::Gaussian { .. } => Err(invalid(
                "functions",
                "localization needs compactly supported inputs",
            )),
        })
        .collect::<Result<_>>()?;
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    };
    let mut separated = false;
    for i in 0..supports.len() {
        for j in i + 1..supports.len() {
            let gap = dist(supports[i].0, supports[j].0) - supports[i].1 - supports[j].1;
            separated |= gap > 2.0;
        }
    }
    let factors = functions.factors();
    let mut all_zero = true;
    let mut outside_zero = true;
    let mut max_value = f64::NEG_INFINITY;
    for x in probes.chunks_exact(d) {
        let v = method.eval(&factors, 1.0, x)?;
        max_value = max_value.max(v);
        if v != 0.0 {
            all_zero = false;
            let outside = supports.iter().all(|(c, s)| dist(x, c) > s + 1.0);
            if outside {
                outside_zero = false;
            }
        }
    }
    Ok(LocalizationReport {
        separated,
        c1_ok: !separated || all_zero,
        c2_ok: outside_zero,
        max_value,
        probes: probes.len() / d,
    })
}
