//! Uniform periodic grids on the box `[-L, L)^d`.

use crate::error::{invalid, Error, Result};
use crate::func::Evaluate;
use crate::par;

/// Samples of a function on the lattice `x_j = -L + j h`, `h = 2L / N`,
/// `j in {0, ..., N-1}^d`, stored row-major (last axis fastest).
///
/// The lattice contains the origin, and it is also the node set of the
/// discrete Fourier transform on the torus of period `2L`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    d: usize,
    half_width: f64,
    resolution: usize,
    values: Vec<f64>,
}

/// Shape of a grid without its values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridShape {
    pub d: usize,
    pub half_width: f64,
    pub resolution: usize,
}

impl GridShape {
    pub fn new(d: usize, half_width: f64, resolution: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "dimension must be positive"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid("L", "half-width must be positive"));
        }
        if resolution < 8 || !resolution.is_power_of_two() {
            return Err(invalid(
                "resolution",
                format!("{resolution} is not a power of two >= 8"),
            ));
        }
        if resolution.checked_pow(d as u32).is_none() {
            return Err(invalid("resolution", "grid too large"));
        }
        Ok(GridShape {
            d,
            half_width,
            resolution,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multi-index of flat index `idx`.
    pub fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        for k in (0..self.d).rev() {
            out[k] = idx % self.resolution;
            idx /= self.resolution;
        }
    }

    /// Coordinates of flat index `idx`.
    pub fn point(&self, mut idx: usize, out: &mut [f64]) {
        let h = self.spacing();
        for k in (0..self.d).rev() {
            out[k] = -self.half_width + (idx % self.resolution) as f64 * h;
            idx /= self.resolution;
        }
    }
}

impl GridFunction {
    pub fn from_values(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", shape.len(), values.len()),
            ));
        }
        Ok(GridFunction {
            d: shape.d,
            half_width: shape.half_width,
            resolution: shape.resolution,
            values,
        })
    }

    pub fn filled(shape: GridShape, value: f64) -> Self {
        GridFunction {
            d: shape.d,
            half_width: shape.half_width,
            resolution: shape.resolution,
            values: vec![value; shape.len()],
        }
    }

    pub fn shape(&self) -> GridShape {
        GridShape {
            d: self.d,
            half_width: self.half_width,
            resolution: self.resolution,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.shape().spacing()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        if self.resolution != other.resolution || self.half_width != other.half_width {
            return Err(invalid("grid", "grids do not share a discretization"));
        }
        Ok(())
    }

    /// Riemann (periodic trapezoid) sum `h^d sum_j values_j`.
    pub fn integral(&self) -> f64 {
        par::sum(self.values.len(), |i| self.values[i]) * self.shape().cell_volume()
    }

    pub fn map<F: Fn(f64) -> f64 + Sync + Send>(&self, f: F) -> GridFunction {
        GridFunction {
            values: par::map_indexed(self.values.len(), |i| f(self.values[i])),
            ..self.clone()
        }
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &GridFunction, beta: f64) -> Result<GridFunction> {
        self.same_shape(other)?;
        Ok(GridFunction {
            values: par::map_indexed(self.values.len(), |i| {
                alpha * self.values[i] + beta * other.values[i]
            }),
            ..self.clone()
        })
    }
}

/// Samples `f` on the lattice of [`GridFunction`].
pub fn sample_grid(f: &dyn Evaluate, half_width: f64, resolution: usize) -> Result<GridFunction> {
    let shape = GridShape::new(f.dim(), half_width, resolution)?;
    let mut values = vec![0.0; shape.len()];
    par::for_each_chunk_mut(&mut values, par::CHUNK, |c, part| {
        let mut x = vec![0.0; shape.d];
        for (k, v) in part.iter_mut().enumerate() {
            shape.point(c * par::CHUNK + k, &mut x);
            *v = f.value(&x);
        }
    });
    GridFunction::from_values(shape, values)
}
