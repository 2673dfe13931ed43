//! Littlewood–Paley filters on the torus `[-L, L)^d` and the frequency
//! pieces of multilinear spherical averages.
//!
//! `φ̂(ξ) = s(2 - |ξ|)` with the smooth step `s`, so `φ̂ = 1` on `|ξ| <= 1`
//! and `φ̂ = 0` on `|ξ| >= 2`; `ψ̂(ξ) = φ̂(ξ) - φ̂(2ξ)` lives on
//! `1/2 < |ξ| < 2`. At scale `t` the filters are dilated with the average:
//! low `φ̂(tξ)`, high `1 - φ̂(tξ)`, level `i` `ψ̂(2^{-i} t ξ)`.

mod interp;
mod pieces;
mod probes;
mod spectral;

pub use interp::Interpolant;
pub use pieces::{BPattern, Decomposition, Flag, Reconstruction};
pub use probes::{
    b_piece_domination, hl_maximal, linear_decay_probe, sphere_fourier_transform, DecayProbe,
    DecayReport, DominationReport,
};
pub use spectral::{signed_index, Plans, Spectrum};

use crate::error::{invalid, Result};
use crate::grid::{GridFunction, GridShape};
use crate::numeric::smooth_step;

pub fn phi_hat(r: f64) -> f64 {
    smooth_step(2.0 - r)
}

pub fn psi_hat(r: f64) -> f64 {
    phi_hat(r) - phi_hat(2.0 * r)
}

/// A frequency band of the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Band {
    Lowpass,
    Highpass,
    /// `ψ̂(2^{-i} ·)`, `i >= 1`.
    Level(u32),
}

impl Band {
    /// Multiplier at `|ξ| = r` for averages at scale `t`.
    pub fn multiplier(self, t: f64, r: f64) -> f64 {
        match self {
            Band::Lowpass => phi_hat(t * r),
            Band::Highpass => 1.0 - phi_hat(t * r),
            Band::Level(i) => psi_hat(t * r * 2f64.powi(-(i as i32))),
        }
    }
}

/// Filter profiles realized on the frequency lattice of one torus grid.
#[derive(Clone, Debug)]
pub struct FilterBank {
    j_max: u32,
    shape: GridShape,
    plans: Plans,
}

/// Builds the bank for levels `1..=j_max` on `[-L, L)^d` with `resolution`
/// points per axis; requires `2^J` below the Nyquist frequency `N / (4L)`.
pub fn build_filterbank(
    d: usize,
    j_max: u32,
    half_width: f64,
    resolution: usize,
) -> Result<FilterBank> {
    if j_max < 1 {
        return Err(invalid("J", "need at least one level"));
    }
    let shape = GridShape::new(d, half_width, resolution)?;
    let nyquist = resolution as f64 / (4.0 * half_width);
    if 2f64.powi(j_max as i32) >= nyquist {
        return Err(invalid(
            "J",
            format!("2^{j_max} is not below the Nyquist frequency {nyquist}"),
        ));
    }
    Ok(FilterBank {
        j_max,
        shape,
        plans: Plans::new(resolution),
    })
}

impl FilterBank {
    pub fn levels(&self) -> u32 {
        self.j_max
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn plans(&self) -> &Plans {
        &self.plans
    }

    pub fn nyquist(&self) -> f64 {
        self.shape.resolution as f64 / (4.0 * self.shape.half_width)
    }

    /// Largest deviation of `φ̂(ξ) + Σ_{j=1..J} ψ̂(2^{-j} ξ)` from 1 over
    /// lattice frequencies with `|ξ| <= 2^{J-1}`.
    pub fn partition_defect(&self) -> f64 {
        let limit = 2f64.powi(self.j_max as i32 - 1);
        (0..self.shape.len())
            .map(|i| Spectrum::frequency_norm(self.shape, i))
            .filter(|&r| r <= limit)
            .map(|r| {
                let s: f64 = phi_hat(r)
                    + (1..=self.j_max)
                        .map(|j| Band::Level(j).multiplier(1.0, r))
                        .sum::<f64>();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        f.same_shape(&GridFunction::filled(self.shape, 0.0))
    }

    /// Applies a band at scale `t` to a grid on the bank's torus.
    pub fn filter_at(&self, f: &GridFunction, band: Band, t: f64) -> Result<GridFunction> {
        self.check(f)?;
        if let Band::Level(0) = band {
            return Err(invalid("level", "levels start at 1"));
        }
        Spectrum::of(f, &self.plans)
            .apply_radial(|r| band.multiplier(t, r))
            .to_grid(&self.plans)
    }
}

/// Applies a band at scale 1.
pub fn filter(f: &GridFunction, bank: &FilterBank, band: Band) -> Result<GridFunction> {
    bank.filter_at(f, band, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::TestFunction;
    use crate::grid::sample_grid;

    #[test]
    fn profile_values() {
        assert_eq!(phi_hat(0.0), 1.0);
        assert_eq!(phi_hat(1.0), 1.0);
        assert_eq!(phi_hat(2.0), 0.0);
        assert_eq!(psi_hat(3.0), 0.0);
        assert_eq!(psi_hat(0.5), 0.0);
        assert!(psi_hat(1.0) > 0.0);
        let r = 1.7;
        let s = phi_hat(r) + psi_hat(r / 2.0) + psi_hat(r / 4.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_support() {
        for k in 0..4000 {
            let r = k as f64 * 0.001;
            if r <= 0.5 || r >= 2.0 {
                assert!(psi_hat(r).abs() < 1e-14, "r={r}");
            }
        }
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        let bank = build_filterbank(2, 4, 4.0, 512).unwrap();
        assert!(bank.partition_defect() < 1e-12);
        let bank = build_filterbank(3, 3, 1.0, 64).unwrap();
        assert!(bank.partition_defect() < 1e-12);
        assert!(build_filterbank(2, 5, 4.0, 128).is_err());
    }

    #[test]
    fn constants() {
        let bank = build_filterbank(2, 2, 2.0, 64).unwrap();
        let c = GridFunction::filled(bank.shape(), 2.5);
        let low = filter(&c, &bank, Band::Lowpass).unwrap();
        assert!(low.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
        let hi = filter(&c, &bank, Band::Level(1)).unwrap();
        assert!(hi.values().iter().all(|v| v.abs() < 1e-12));
        assert!(filter(&c, &bank, Band::Level(0)).is_err());
    }

    #[test]
    fn pieces_sum_to_band_limited_input() {
        let j = 4;
        let bank = build_filterbank(2, j, 4.0, 512).unwrap();
        let f = TestFunction::gaussian(20.0, vec![0.2, -0.1]).unwrap();
        let g = sample_grid(&f, 4.0, 512).unwrap();
        let mut sum = filter(&g, &bank, Band::Lowpass).unwrap();
        for i in 1..=j {
            sum = sum.combine(1.0, &filter(&g, &bank, Band::Level(i)).unwrap(), 1.0).unwrap();
        }
        let norm: f64 = g.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        let err: f64 = sum
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-10 * norm, "{err}");
    }

    #[test]
    fn filtering_is_linear() {
        let bank = build_filterbank(2, 2, 2.0, 64).unwrap();
        let f = sample_grid(&TestFunction::gaussian(5.0, vec![0.1, 0.0]).unwrap(), 2.0, 64).unwrap();
        let g = sample_grid(&TestFunction::bump(0.8, 2, vec![-0.3, 0.2]).unwrap(), 2.0, 64).unwrap();
        let (a, b) = (1.7, -0.6);
        let lhs = filter(&f.combine(a, &g, b).unwrap(), &bank, Band::Level(2)).unwrap();
        let rhs = filter(&f, &bank, Band::Level(2))
            .unwrap()
            .combine(a, &filter(&g, &bank, Band::Level(2)).unwrap(), b)
            .unwrap();
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
