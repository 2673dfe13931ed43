//! Discrete Fourier transforms of grid functions on the torus `[-L, L)^d`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{GridFunction, GridShape};
use crate::par;

/// Forward and inverse length-N plans, shareable across threads.
#[derive(Clone)]
pub struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Plans {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Plans")
            .field("len", &self.forward.len())
            .finish()
    }
}

impl Plans {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// In-place d-dimensional transform of row-major data (unnormalized).
fn transform(data: &mut [Complex64], shape: GridShape, plans: &Plans, inverse: bool) {
    let n = shape.resolution;
    let fft = if inverse { &plans.inverse } else { &plans.forward };
    for axis in 0..shape.d {
        let stride = n.pow((shape.d - 1 - axis) as u32);
        if stride == 1 {
            par::for_each_chunk_mut(data, n, |_, line| {
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(line, &mut scratch);
            });
            continue;
        }
        // lines along `axis`: start offsets o = outer * n * stride + inner
        let lines = data.len() / n;
        let view: &[Complex64] = data;
        let done = par::map_indexed(lines, |l| {
            let (outer, inner) = (l / stride, l % stride);
            let base = outer * n * stride + inner;
            let mut line: Vec<Complex64> = (0..n).map(|k| view[base + k * stride]).collect();
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(&mut line, &mut scratch);
            line
        });
        for (l, line) in done.into_iter().enumerate() {
            let (outer, inner) = (l / stride, l % stride);
            let base = outer * n * stride + inner;
            for (k, v) in line.into_iter().enumerate() {
                data[base + k * stride] = v;
            }
        }
    }
}

/// Signed integer frequency index of FFT position `j`.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Discrete Fourier coefficients of a grid function; frequency index `k`
/// corresponds to `ξ = k / (2L)`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    shape: GridShape,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &GridFunction, plans: &Plans) -> Spectrum {
        let shape = f.shape();
        let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform(&mut coeffs, shape, plans, false);
        Spectrum { shape, coeffs }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `|ξ|` at flat index `idx`.
    pub fn frequency_norm(shape: GridShape, mut idx: usize) -> f64 {
        let n = shape.resolution;
        let mut r2 = 0.0;
        for _ in 0..shape.d {
            let k = signed_index(idx % n, n) as f64;
            r2 += k * k;
            idx /= n;
        }
        r2.sqrt() / (2.0 * shape.half_width)
    }

    /// Multiplies coefficient `ξ` by `m(|ξ|)`.
    pub fn apply_radial<M>(&self, m: M) -> Spectrum
    where
        M: Fn(f64) -> f64 + Sync + Send,
    {
        let shape = self.shape;
        Spectrum {
            shape,
            coeffs: par::map_indexed(self.coeffs.len(), |i| {
                self.coeffs[i] * m(Self::frequency_norm(shape, i))
            }),
        }
    }

    /// Back to a real grid function (imaginary parts are discarded).
    pub fn to_grid(&self, plans: &Plans) -> Result<GridFunction> {
        let mut data = self.coeffs.clone();
        transform(&mut data, self.shape, plans, true);
        let scale = 1.0 / self.coeffs.len() as f64;
        GridFunction::from_values(self.shape, data.iter().map(|c| c.re * scale).collect())
    }

    /// `h^d Σ |f_j|²` via Parseval.
    pub fn l2_norm_squared(&self) -> f64 {
        let len = self.coeffs.len();
        par::sum(len, |i| self.coeffs[i].norm_sqr()) / len as f64 * self.shape.cell_volume()
    }
}
