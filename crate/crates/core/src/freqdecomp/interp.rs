//! Periodic tensor-product cubic interpolation of grid functions.

use crate::error::{Error, Result};
use crate::func::Evaluate;
use crate::grid::GridFunction;

/// Four-point Lagrange interpolation in each axis, periodic on `[-L, L)^d`.
#[derive(Clone, Debug)]
pub struct Interpolant {
    grid: GridFunction,
    inv_h: f64,
}

impl Interpolant {
    pub fn new(grid: GridFunction) -> Result<Self> {
        if grid.dim() > 8 {
            return Err(Error::Unsupported(format!(
                "interpolation in dimension {}",
                grid.dim()
            )));
        }
        let inv_h = 1.0 / grid.spacing();
        Ok(Interpolant { grid, inv_h })
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }
}

#[inline]
fn weights(u: f64) -> [f64; 4] {
    let (um, u1, u2) = (u + 1.0, u - 1.0, u - 2.0);
    [
        -u * u1 * u2 / 6.0,
        um * u1 * u2 / 2.0,
        -um * u * u2 / 2.0,
        um * u * u1 / 6.0,
    ]
}

impl Evaluate for Interpolant {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d = self.grid.dim();
        let n = self.grid.resolution();
        let l = self.grid.half_width();
        let vals = self.grid.values();
        let mut w = [[0.0f64; 4]; 8];
        let mut idx = [[0usize; 4]; 8];
        for k in 0..d {
            let s = (x[k] + l) * self.inv_h;
            let i0 = s.floor();
            w[k] = weights(s - i0);
            let base = (i0 as i64 - 1).rem_euclid(n as i64) as usize;
            for (m, slot) in idx[k].iter_mut().enumerate() {
                *slot = (base + m) % n;
            }
        }
        match d {
            2 => {
                let mut acc = 0.0;
                for a in 0..4 {
                    let row = idx[0][a] * n;
                    let mut inner = 0.0;
                    for b in 0..4 {
                        inner += w[1][b] * vals[row + idx[1][b]];
                    }
                    acc += w[0][a] * inner;
                }
                acc
            }
            3 => {
                let mut acc = 0.0;
                for a in 0..4 {
                    let pa = idx[0][a] * n;
                    let mut mid = 0.0;
                    for b in 0..4 {
                        let row = (pa + idx[1][b]) * n;
                        let mut inner = 0.0;
                        for c in 0..4 {
                            inner += w[2][c] * vals[row + idx[2][c]];
                        }
                        mid += w[1][b] * inner;
                    }
                    acc += w[0][a] * mid;
                }
                acc
            }
            _ => {
                let mut acc = 0.0;
                for combo in 0..4usize.pow(d as u32) {
                    let (mut c, mut flat, mut wt) = (combo, 0usize, 1.0);
                    for k in (0..d).rev() {
                        let m = c % 4;
                        c /= 4;
                        wt *= w[k][m];
                        flat += idx[k][m] * n.pow((d - 1 - k) as u32);
                    }
                    acc += wt * vals[flat];
                }
                acc
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::TestFunction;
    use crate::grid::sample_grid;

    #[test]
    fn reproduces_lattice_values_and_cubics() {
        let f = TestFunction::gaussian(3.0, vec![0.1, -0.2]).unwrap();
        let g = sample_grid(&f, 2.0, 64).unwrap();
        let it = Interpolant::new(g.clone()).unwrap();
        let shape = g.shape();
        let mut x = [0.0; 2];
        for idx in [0usize, 17, 2080, 4095] {
            shape.point(idx, &mut x);
            assert!((it.value(&x) - g.values()[idx]).abs() < 1e-14);
        }
        let w = weights(0.37);
        let cubic = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        let interp: f64 = (0..4).map(|m| w[m] * cubic(m as f64 - 1.0)).sum();
        assert!((interp - cubic(0.37)).abs() < 1e-14);
    }

    #[test]
    fn smooth_functions_are_accurate() {
        for d in [2usize, 3] {
            let f = TestFunction::gaussian(2.0, vec![0.05; d]).unwrap();
            let it = Interpolant::new(sample_grid(&f, 3.0, 128).unwrap()).unwrap();
            for p in [0.013, -0.41, 0.77] {
                let x = vec![p; d];
                assert!((it.value(&x) - f.value(&x)).abs() < 2e-5);
            }
        }
    }

    #[test]
    fn wraps_periodically() {
        let f = TestFunction::gaussian(2.0, vec![0.0, 0.0]).unwrap();
        let it = Interpolant::new(sample_grid(&f, 2.0, 32).unwrap()).unwrap();
        let a = it.value(&[0.3, 0.1]);
        let b = it.value(&[0.3 + 4.0, 0.1 - 8.0]);
        assert!((a - b).abs() < 1e-12);
    }
}
