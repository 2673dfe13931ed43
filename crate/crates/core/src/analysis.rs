//! Lebesgue norms, operator-norm probes over input families, and the
//! concentrating family that shows the full maximal operator is unbounded
//! at `p = d/(d-1)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::averages::{maximal_over, DyadicScaleSet, GeometricGrid, Method, SlicedAverager};
use crate::error::{invalid, Error, Result};
use crate::exponents::ExponentTuple;
use crate::func::{Evaluate, FunctionTuple, Profile, TestFunction};
use crate::grid::{sample_grid, GridFunction};
use crate::numeric::{gamma, smooth_step};
use crate::par;
use crate::seed::Seed;

/// Analytic `‖f‖_p` for `p ∈ [1, ∞]`.
pub fn lp_norm(f: &TestFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", "norm exponent must be at least 1"));
    }
    let amp = f.amplitude();
    if p.is_infinite() || amp == 0.0 {
        return Ok(amp);
    }
    let d = f.dim() as f64;
    Ok(match *f.profile() {
        Profile::Gaussian { a } => amp * (PI / (a * p)).powf(d / (2.0 * p)),
        Profile::Bump { s, k } => {
            let kp = k as f64 * p;
            let int = PI.powf(d / 2.0) * gamma(kp + 1.0) / gamma(d / 2.0 + kp + 1.0);
            amp * s.powf(d / p) * int.powf(1.0 / p)
        }
    })
}

/// `(h^d Σ |v|^p)^{1/p}` over the grid, or `max |v|` for `p = ∞`.
///
/// Any `p > 0` is accepted; for `p < 1` this is the quasi-norm, computed
/// literally.
pub fn grid_lp_norm(g: &GridFunction, p: f64) -> Result<f64> {
    lattice_norm(g.values(), g.shape().cell_volume(), p)
}

fn lattice_norm(values: &[f64], cell: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(invalid("p", "norm exponent must be positive"));
    }
    if p.is_infinite() {
        return Ok(par::max(values.len(), |i| values[i].abs()).unwrap_or(0.0));
    }
    let s = par::sum(values.len(), |i| values[i].abs().powf(p));
    Ok((s * cell).powf(1.0 / p))
}

/// Structured input families for [`bound_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `f_i(δ_m ·)` with `δ_m = ratio^{m - (count-1)/2}`.
    Dilates {
        count: usize,
        ratio: f64,
        base: FunctionTuple,
    },
    /// All inputs shifted by `m · spacing` along the first axis.
    Translates {
        count: usize,
        spacing: f64,
        base: FunctionTuple,
    },
    /// Random bump tuples with the arity and dimension of `base`: centers in
    /// `[-1, 1]^d`, radii in `[0.3, 1.2]`, `k = 2`, amplitudes in `[0.5, 2]`.
    RandomBumps {
        count: usize,
        seed: Seed,
        base: FunctionTuple,
    },
    /// The truncated concentrating family of [`stein_growth_probe`]; it is
    /// not a tuple of closed-form functions and only that probe accepts it.
    Stein { d: usize, levels: u32 },
}

impl FamilySpec {
    pub fn members(&self) -> Result<Vec<FunctionTuple>> {
        match self {
            FamilySpec::Dilates { count, ratio, base } => {
                if *count < 1 || !(*ratio > 1.0) {
                    return Err(invalid("family", "need count >= 1 and ratio > 1"));
                }
                let mid = (*count as f64 - 1.0) / 2.0;
                (0..*count)
                    .map(|m| {
                        let delta = ratio.powf(m as f64 - mid);
                        base.map(|f| f.dilate(delta))
                    })
                    .collect()
            }
            FamilySpec::Translates {
                count,
                spacing,
                base,
            } => {
                if *count < 1 {
                    return Err(invalid("family", "need count >= 1"));
                }
                let d = base.dim();
                (0..*count)
                    .map(|m| {
                        let mut shift = vec![0.0; d];
                        shift[0] = m as f64 * spacing;
                        base.map(|f| f.translate(&shift))
                    })
                    .collect()
            }
            FamilySpec::RandomBumps { count, seed, base } => {
                if *count < 1 {
                    return Err(invalid("family", "need count >= 1"));
                }
                Ok(random_bump_tuples(*count, base.arity(), base.dim(), *seed))
            }
            FamilySpec::Stein { .. } => Err(Error::Unsupported(
                "the Stein family is only available through stein_growth_probe".into(),
            )),
        }
    }
}

/// `count` random bump tuples; member `m` draws from stream `m`.
pub fn random_bump_tuples(count: usize, n: usize, d: usize, seed: Seed) -> Vec<FunctionTuple> {
    (0..count)
        .map(|m| {
            let mut rng = seed.rng(m as u64);
            let fs = (0..n)
                .map(|_| {
                    let center = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let s = rng.random_range(0.3..1.2);
                    let amp = rng.random_range(0.5..2.0);
                    TestFunction::bump(s, 2, center)
                        .and_then(|f| f.with_amplitude(amp))
                        .expect("parameters are in range")
                })
                .collect();
            FunctionTuple::new(fs).expect("common dimension")
        })
        .collect()
}

/// The operator whose norm is probed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    Average {
        #[serde(default = "unit_scale")]
        t: f64,
    },
    Lacunary { n: u32 },
    FullMaximal { t_min: f64, t_max: f64, k: u32 },
}

fn unit_scale() -> f64 {
    1.0
}

impl Operator {
    fn scales(&self) -> Result<Vec<f64>> {
        match *self {
            Operator::Average { t } => {
                if !(t > 0.0) {
                    return Err(invalid("t", "scale must be positive"));
                }
                Ok(vec![t])
            }
            Operator::Lacunary { n } => Ok(DyadicScaleSet::new(n).scales()),
            Operator::FullMaximal { t_min, t_max, k } => {
                Ok(GeometricGrid::new(t_min, t_max, k)?.scales())
            }
        }
    }
}

/// Discretization of [`bound_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    /// Initial intervals per axis of the output grid; doubled until the
    /// norm is stable.
    pub resolution: usize,
    pub max_resolution: usize,
    /// Accepted relative change of the output norm under 2x refinement.
    pub refine_tol: f64,
    pub lambda_order: usize,
    pub base_order: usize,
    /// Output exponent used in place of the Hölder exponent `r`.
    pub output_exponent: Option<f64>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            resolution: 32,
            max_resolution: 256,
            refine_tol: 5e-3,
            lambda_order: 32,
            base_order: 96,
            output_exponent: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    /// `‖T(f)‖_r / Π‖f_i‖_{p_i}` per member.
    pub ratios: Vec<f64>,
    pub output_norms: Vec<f64>,
    pub input_norms: Vec<f64>,
    pub max_ratio: f64,
    /// The last ratio exceeds the first by a factor of at least 1.5.
    pub growth: bool,
}

/// Box `[lo, hi]^d` (per axis) containing every support grown by `reach`.
fn output_box(tuple: &FunctionTuple, reach: f64) -> (Vec<f64>, Vec<f64>) {
    let d = tuple.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for f in tuple.entries() {
        let r = f.support_radius() + reach;
        for k in 0..d {
            lo[k] = lo[k].min(f.center()[k] - r);
            hi[k] = hi[k].max(f.center()[k] + r);
        }
    }
    (lo, hi)
}

/// Norm of `T(f)` on the closed lattice over the box with `m` intervals per
/// axis, together with the norm on the every-other-point sublattice.
fn output_norm_pair<T>(lo: &[f64], hi: &[f64], m: usize, p: f64, op: T) -> Result<(f64, f64)>
where
    T: Fn(&[f64]) -> f64 + Sync + Send,
{
    let d = lo.len();
    let side = m + 1;
    let total = side.pow(d as u32);
    let h: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / m as f64).collect();
    let values = par::map_indexed(total, |mut idx| {
        let mut x = [0.0f64; 8];
        for k in (0..d).rev() {
            x[k] = lo[k] + (idx % side) as f64 * h[k];
            idx /= side;
        }
        op(&x[..d])
    });
    let cell: f64 = h.iter().product();
    let fine = lattice_norm(&values, cell, p)?;
    let coarse_vals: Vec<f64> = (0..total)
        .filter(|&idx| {
            let mut i = idx;
            (0..d).all(|_| {
                let even = (i % side) % 2 == 0;
                i /= side;
                even
            })
        })
        .map(|idx| values[idx])
        .collect();
    let coarse = lattice_norm(&coarse_vals, cell * 2f64.powi(d as i32), p)?;
    Ok((fine, coarse))
}

/// Ratios `‖T(f)‖_r / Π‖f_i‖_{p_i}` over a family.
///
/// The output norm is a lattice sum over a box covering every support grown
/// by the largest scale; the lattice is refined until the norm changes by
/// less than `refine_tol` relative to the half-resolution lattice, or the
/// probe fails with [`Error::TooCoarse`].
pub fn bound_probe(
    operator: Operator,
    exponents: &ExponentTuple,
    family: &FamilySpec,
    options: ProbeOptions,
) -> Result<ProbeResult> {
    bound_probe_members(operator, exponents, &family.members()?, options)
}

/// [`bound_probe`] over an explicit list of input tuples.
pub fn bound_probe_members(
    operator: Operator,
    exponents: &ExponentTuple,
    members: &[FunctionTuple],
    options: ProbeOptions,
) -> Result<ProbeResult> {
    if members.is_empty() {
        return Err(invalid("family", "need at least one member"));
    }
    let scales = operator.scales()?;
    let reach = scales.iter().cloned().fold(0.0, f64::max);
    let r = options.output_exponent.unwrap_or(exponents.output());
    if !(r > 0.0) {
        return Err(invalid("output_exponent", "must be positive"));
    }
    let d = members[0].dim();
    let avg = SlicedAverager::new(d, options.lambda_order, options.base_order)?;
    let mut ratios = Vec::with_capacity(members.len());
    let mut output_norms = Vec::with_capacity(members.len());
    let mut input_norms = Vec::with_capacity(members.len());
    for tuple in members {
        if tuple.arity() != exponents.arity() {
            return Err(Error::ArityMismatch {
                expected: exponents.arity(),
                got: tuple.arity(),
            });
        }
        let denom: f64 = tuple
            .entries()
            .iter()
            .zip(exponents.inputs())
            .map(|(f, &p)| lp_norm(f, p))
            .product::<Result<f64>>()?;
        let factors = tuple.factors();
        let op = |x: &[f64]| {
            maximal_over(&factors, x, &scales, Method::Sliced(&avg))
                .expect("validated inputs")
        };
        let (lo, hi) = output_box(tuple, reach);
        let mut m = options.resolution.max(4);
        let norm = loop {
            let (fine, coarse) = output_norm_pair(&lo, &hi, m, r, &op)?;
            let scale = fine.abs().max(f64::MIN_POSITIVE);
            if fine == 0.0 || (fine - coarse).abs() <= options.refine_tol * scale {
                break fine;
            }
            if 2 * m > options.max_resolution {
                return Err(Error::TooCoarse(format!(
                    "output norm changed from {coarse} to {fine} at {m} intervals per axis"
                )));
            }
            m *= 2;
        };
        output_norms.push(norm);
        input_norms.push(denom);
        ratios.push(if denom == 0.0 { 0.0 } else { norm / denom });
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let growth = ratios.len() > 1 && ratios[ratios.len() - 1] >= 1.5 * ratios[0];
    Ok(ProbeResult {
        ratios,
        output_norms,
        input_norms,
        max_ratio,
        growth,
    })
}

/// Member `k` of the concentrating family, a mollified truncation of
/// `|x|^{1-d} / log(1/|x|)`: with `u = log2(1/|x|)` the cutoff is
/// `s(k + 1 - u) s(2u - 2)`, so the function is supported in
/// `2^{-k-1} < |x| < 1/2` and unmodified on `2^{-k} <= |x| <= 2^{-3/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteinFunction {
    pub d: usize,
    pub k: u32,
}

impl SteinFunction {
    pub fn radial(&self, r: f64) -> f64 {
        if r <= 2f64.powi(-(self.k as i32) - 1) || r >= 0.5 {
            return 0.0;
        }
        let u = -r.log2();
        let eta = smooth_step(self.k as f64 + 1.0 - u) * smooth_step(2.0 * u - 2.0);
        r.powi(1 - self.d as i32) / (1.0 / r).ln() * eta
    }
}

impl Evaluate for SteinFunction {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// Configuration of [`stein_growth_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct SteinProbe {
    pub d: usize,
    /// Truncation levels `1..=levels`.
    pub levels: u32,
    /// Point where the maximal function is evaluated.
    pub probe: Vec<f64>,
    pub t_grid: GeometricGrid,
    /// Trapezoid points on the circle.
    pub base_order: usize,
    /// Points per axis of the norm grid on `[-1, 1]^d`.
    pub norm_resolution: usize,
}

impl SteinProbe {
    pub fn standard() -> Self {
        SteinProbe {
            d: 2,
            levels: 6,
            probe: vec![2.0, 0.0],
            t_grid: GeometricGrid::standard(),
            base_order: 1 << 14,
            norm_resolution: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteinReport {
    pub levels: Vec<u32>,
    pub norms: Vec<f64>,
    pub maximal: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `ratio(5) / ratio(2)`, when both levels were run.
    pub growth_factor: Option<f64>,
    pub growth: bool,
}

/// Ratio `M f_k(x_0) / ‖f_k‖_p` with `p = d/(d-1)` for the truncated
/// family; growth in `k` reflects unboundedness of the full maximal
/// operator at this exponent.
pub fn stein_growth_probe(cfg: &SteinProbe) -> Result<SteinReport> {
    if cfg.d != 2 {
        return Err(Error::Unsupported(format!("Stein probe in dimension {}", cfg.d)));
    }
    if cfg.levels < 1 || cfg.levels > 6 {
        return Err(invalid("levels", "truncation levels must lie in 1..=6"));
    }
    if cfg.probe.len() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: cfg.probe.len(),
        });
    }
    let finest = 2f64.powi(-(cfg.levels as i32) - 1);
    let h = 2.0 / cfg.norm_resolution as f64;
    if h > finest / 4.0 {
        return Err(Error::TooCoarse(format!(
            "norm grid spacing {h} does not resolve scale {finest}"
        )));
    }
    let reach: f64 = cfg.probe.iter().map(|v| v * v).sum::<f64>().sqrt() + 1.0;
    let arc = 2.0 * PI * reach / cfg.base_order as f64;
    if arc > finest / 4.0 {
        return Err(Error::TooCoarse(format!(
            "circle spacing {arc} does not resolve scale {finest}"
        )));
    }
    let p = cfg.d as f64 / (cfg.d as f64 - 1.0);
    let avg = SlicedAverager::new(cfg.d, crate::averages::MIN_SLICED_ORDER, cfg.base_order)?;
    let scales = cfg.t_grid.scales();
    let levels: Vec<u32> = (1..=cfg.levels).collect();
    let mut norms = Vec::new();
    let mut maximal = Vec::new();
    for &k in &levels {
        let f = SteinFunction { d: cfg.d, k };
        let g = sample_grid(&f, 1.0, cfg.norm_resolution)?;
        norms.push(grid_lp_norm(&g, p)?);
        maximal.push(maximal_over(&[&f], &cfg.probe, &scales, Method::Sliced(&avg))?);
    }
    let ratios: Vec<f64> = maximal.iter().zip(&norms).map(|(m, n)| m / n).collect();
    let growth_factor = (cfg.levels >= 5).then(|| ratios[4] / ratios[1]);
    Ok(SteinReport {
        levels,
        norms,
        maximal,
        ratios,
        growth: growth_factor.is_some_and(|g| g >= 1.5),
        growth_factor,
    })
}
