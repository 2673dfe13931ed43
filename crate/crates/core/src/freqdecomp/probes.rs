//! Numerical probes: decay of single-sphere averages of frequency-localized
//! inputs, and Hardy–Littlewood domination of the B-pieces.

use std::f64::consts::PI;

use crate::averages::{DyadicScaleSet, SlicedAverager};
use crate::error::{invalid, Error, Result};
use crate::grid::{sample_grid, GridFunction, GridShape};
use crate::func::TestFunction;
use crate::numeric::fitted_slope;
use crate::par;

use super::{phi_hat, BPattern, Band, Decomposition, Plans, Spectrum};

/// Fourier transform of the surface measure of the unit sphere
/// `S^{d-1}` at `|ξ| = r`: `2π r^{-(d-2)/2} J_{(d-2)/2}(2π r)`.
pub fn sphere_fourier_transform(d: usize, r: f64) -> Result<f64> {
    let z = 2.0 * PI * r;
    match d {
        2 => Ok(2.0 * PI * libm::j0(z)),
        3 => Ok(if r == 0.0 { 4.0 * PI } else { 2.0 * z.sin() / r }),
        _ if d >= 4 && d % 2 == 0 => {
            let nu = (d - 2) / 2;
            if r == 0.0 {
                Ok(crate::spherequad::area(d))
            } else {
                Ok(2.0 * PI * r.powf(-(nu as f64)) * libm::jn(nu as i32, z))
            }
        }
        _ => Err(Error::Unsupported(format!(
            "sphere transform in odd dimension {d}"
        ))),
    }
}

/// Configuration of [`linear_decay_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayProbe {
    pub d: usize,
    /// Levels `1..=max_level` are measured.
    pub max_level: u32,
    /// The slope is fitted over `fit_from..=max_level`.
    pub fit_from: u32,
    pub resolution: usize,
    pub half_width: f64,
    /// Sphere radius.
    pub lambda: f64,
    /// Measure the low-pass piece in place of every level.
    pub lowpass: bool,
}

impl DecayProbe {
    /// Levels 1..8 fitted over 3..8; 512 points per axis for d = 2, 128 for
    /// d = 3. The torus leaves the top level just below Nyquist; its width is
    /// detuned by 0.9 so the frequency spacing is not commensurate with the
    /// unit sphere (otherwise lattice frequencies pile up on zeros of `σ̂`).
    pub fn standard(d: usize) -> Self {
        let max_level = 8;
        let resolution = if d == 2 { 512 } else { 128 };
        DecayProbe {
            d,
            max_level,
            fit_from: 3,
            resolution,
            half_width: 0.9 * resolution as f64 / (4.0 * 2f64.powi(max_level as i32 + 1)),
            lambda: 1.0,
            lowpass: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub levels: Vec<u32>,
    /// `log2 (‖A_λ(ψ_i * f)‖_2 / ‖ψ_i * f‖_2)` per level; NaN for levels
    /// whose band contains no lattice frequency.
    pub log2_ratio: Vec<f64>,
    pub slope: f64,
}

fn min_resolution(d: usize) -> usize {
    if d == 2 {
        512
    } else {
        128
    }
}

/// Measures how `‖A_λ(ψ_i * f)‖_2 / ‖ψ_i * f‖_2` decays in `i` for a
/// Gaussian `f` whose spectrum is nearly flat up to `2^{max_level+1}`. The
/// sphere average is the spectral multiplier `σ̂(λξ)` on the grid and the
/// norms come from Parseval.
pub fn linear_decay_probe(p: &DecayProbe) -> Result<DecayReport> {
    if !(p.d == 2 || p.d == 3) {
        return Err(Error::Unsupported(format!("decay probe in dimension {}", p.d)));
    }
    if p.fit_from < 1 || p.fit_from >= p.max_level {
        return Err(invalid("fit_from", "need at least two fitted levels"));
    }
    if p.resolution < min_resolution(p.d) {
        return Err(Error::TooCoarse(format!(
            "resolution {} below {} for d = {}",
            p.resolution,
            min_resolution(p.d),
            p.d
        )));
    }
    let shape = GridShape::new(p.d, p.half_width, p.resolution)?;
    let top = 2f64.powi(p.max_level as i32 + 1);
    let nyquist = p.resolution as f64 / (4.0 * p.half_width);
    if nyquist < top {
        return Err(Error::TooCoarse(format!(
            "Nyquist frequency {nyquist} below 2^{}",
            p.max_level + 1
        )));
    }
    let a = 2.0 * PI * PI * top * top;
    let f = TestFunction::gaussian(a, vec![0.0; p.d])?;
    let grid = sample_grid(&f, p.half_width, p.resolution)?;
    let spectrum = Spectrum::of(&grid, &Plans::new(p.resolution));
    let coeffs = spectrum.coeffs();
    let sigma: Vec<f64> = par::map_indexed(coeffs.len(), |i| {
        let r = Spectrum::frequency_norm(shape, i);
        sphere_fourier_transform(p.d, p.lambda * r).unwrap_or(f64::NAN)
    });
    let levels: Vec<u32> = (1..=p.max_level).collect();
    let log2_ratio = levels
        .iter()
        .map(|&i| {
            let band = |r: f64| {
                if p.lowpass {
                    phi_hat(r)
                } else {
                    Band::Level(i).multiplier(1.0, r)
                }
            };
            let (num, den) = par::map_indexed(coeffs.len(), |k| {
                let m = band(Spectrum::frequency_norm(shape, k));
                let e = coeffs[k].norm_sqr() * m * m;
                (e * sigma[k] * sigma[k], e)
            })
            .into_iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            0.5 * (num / den).log2()
        })
        .collect::<Vec<f64>>();
    let from = (p.fit_from - 1) as usize;
    let xs: Vec<f64> = levels[from..].iter().map(|&i| i as f64).collect();
    let slope = fitted_slope(&xs, &log2_ratio[from..]);
    Ok(DecayReport {
        levels,
        log2_ratio,
        slope,
    })
}

/// Largest ball average of `f` about `x` over radii `2^{-m} L`,
/// `0 <= m <= log2 N`, with periodic distances on the torus. Balls holding
/// no lattice point are skipped.
pub fn hl_maximal(f: &GridFunction, x: &[f64]) -> Result<f64> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(invalid("f", "maximal function needs nonnegative input"));
    }
    let shape = f.shape();
    let l = shape.half_width;
    let period = 2.0 * l;
    let levels = shape.resolution.trailing_zeros() as usize + 1;
    // per chunk: (sum, count) of points whose finest containing ball is m
    let parts = par::map_indexed(shape.len().div_ceil(par::CHUNK), |c| {
        let mut sums = vec![0.0; levels];
        let mut counts = vec![0usize; levels];
        let mut p = vec![0.0; shape.d];
        for idx in c * par::CHUNK..((c + 1) * par::CHUNK).min(shape.len()) {
            shape.point(idx, &mut p);
            let r2: f64 = p
                .iter()
                .zip(x)
                .map(|(a, b)| {
                    let u = (a - b).rem_euclid(period);
                    let u = u.min(period - u);
                    u * u
                })
                .sum();
            let r = r2.sqrt();
            if r > l {
                continue;
            }
            // finest level whose radius still contains the point
            let m = if r == 0.0 {
                levels - 1
            } else {
                ((l / r).log2().floor() as usize).min(levels - 1)
            };
            sums[m] += f.values()[idx];
            counts[m] += 1;
        }
        (sums, counts)
    });
    let mut sums = vec![0.0; levels];
    let mut counts = vec![0usize; levels];
    for (s, c) in parts {
        for m in 0..levels {
            sums[m] += s[m];
            counts[m] += c[m];
        }
    }
    // ball m contains every point whose finest level is >= m
    let mut best = 0.0f64;
    let (mut s, mut c) = (0.0, 0usize);
    for m in (0..levels).rev() {
        s += sums[m];
        c += counts[m];
        if c > 0 {
            best = best.max(s / c as f64);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominationReport {
    /// `max_{|l| <= N} |A^B_{2^{-l}}(f)(x)|` per probe.
    pub numerators: Vec<f64>,
    /// `Π_k M f_k(x)` per probe.
    pub denominators: Vec<f64>,
    pub max_ratio: f64,
}

/// Compares the truncated lacunary maximal function of a B-piece with the
/// product of Hardy–Littlewood maximal functions at each probe point.
pub fn b_piece_domination(
    decomposition: &Decomposition<'_>,
    grids: &[GridFunction],
    pattern: &BPattern,
    probes: &[f64],
    scales: DyadicScaleSet,
    avg: &SlicedAverager,
) -> Result<DominationReport> {
    if grids.len() != decomposition.arity() {
        return Err(Error::ArityMismatch {
            expected: decomposition.arity(),
            got: grids.len(),
        });
    }
    let d = avg.dim();
    let points = probes.len() / d;
    let mut numerators = vec![0.0f64; points];
    for t in scales.scales() {
        let v = decomposition.b_piece_average(pattern, t, probes, avg)?;
        for (n, v) in numerators.iter_mut().zip(v) {
            *n = n.max(v.abs());
        }
    }
    let mut denominators = vec![1.0; points];
    for g in grids {
        for (p, den) in denominators.iter_mut().enumerate() {
            *den *= hl_maximal(g, &probes[p * d..(p + 1) * d])?;
        }
    }
    let max_ratio = numerators
        .iter()
        .zip(&denominators)
        .map(|(&n, &m)| {
            if n == 0.0 {
                0.0
            } else if m == 0.0 {
                f64::INFINITY
            } else {
                n / m
            }
        })
        .fold(0.0, f64::max);
    Ok(DominationReport {
        numerators,
        denominators,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freqdecomp::{build_filterbank, Flag};
    use crate::func::TestFunction;
    use crate::spherequad::area;

    #[test]
    fn sphere_transform_at_origin_is_area() {
        for d in [2usize, 3, 4, 6] {
            let v = sphere_fourier_transform(d, 0.0).unwrap();
            assert!((v - area(d)).abs() < 1e-12 * area(d));
            let small = sphere_fourier_transform(d, 1e-6).unwrap();
            assert!((small - area(d)).abs() < 1e-6 * area(d));
        }
        assert!(sphere_fourier_transform(5, 1.0).is_err());
    }

    #[test]
    fn decay_slopes() {
        for (d, want, tol) in [(2usize, -0.5, 0.15), (3, -1.0, 0.2)] {
            let r = linear_decay_probe(&DecayProbe::standard(d)).unwrap();
            println!("d={d}: {:?} slope {}", r.log2_ratio, r.slope);
            assert!((r.slope - want).abs() <= tol, "d={d}: slope {}", r.slope);
            let low = linear_decay_probe(&DecayProbe {
                lowpass: true,
                ..DecayProbe::standard(d)
            })
            .unwrap();
            assert!(low.slope.abs() < 1e-9);
        }
        let coarse = DecayProbe {
            resolution: 256,
            ..DecayProbe::standard(2)
        };
        assert!(matches!(linear_decay_probe(&coarse), Err(Error::TooCoarse(_))));
    }

    #[test]
    fn hl_of_constant_and_monotone() {
        let shape = GridShape::new(2, 2.0, 32).unwrap();
        let c = GridFunction::filled(shape, 1.5);
        assert!((hl_maximal(&c, &[0.3, -0.7]).unwrap() - 1.5).abs() < 1e-14);
        let f = sample_grid(&TestFunction::bump(0.5, 2, vec![0.0, 0.0]).unwrap(), 2.0, 32).unwrap();
        let g = f.map(|v| v + 0.1 * v.sqrt());
        let mean = f.values().iter().sum::<f64>() / f.values().len() as f64;
        let at_center = hl_maximal(&f, &[0.0, 0.0]).unwrap();
        assert!(at_center >= f.values()[16 * 32 + 16] - 1e-15);
        assert!(at_center >= mean);
        for x in [[0.0, 0.0], [0.5, 0.25], [-1.0, 1.5]] {
            assert!(hl_maximal(&f, &x).unwrap() <= hl_maximal(&g, &x).unwrap());
        }
        assert!(hl_maximal(&f.map(|v| v - 0.5), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn all_low_constants_ratio_is_sphere_area() {
        let bank = build_filterbank(2, 1, 4.0, 64).unwrap();
        let c = GridFunction::filled(bank.shape(), 1.0);
        let grids = vec![c.clone(), c];
        let dec = Decomposition::new(&bank, &grids).unwrap();
        let avg = SlicedAverager::new(2, 16, 32).unwrap();
        let pattern = BPattern::new(vec![Flag::Low, Flag::Low]).unwrap();
        let r = b_piece_domination(&dec, &grids, &pattern, &[0.0, 0.0, 1.0, 0.5], DyadicScaleSet::new(1), &avg)
            .unwrap();
        assert!((r.max_ratio - area(4)).abs() < 1e-6 * area(4));
    }
}
