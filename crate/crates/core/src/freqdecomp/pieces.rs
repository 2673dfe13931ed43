//! Frequency pieces `A^B_t` and `A^{i_1..i_n}_t` of the n-linear average.

use crate::averages::SlicedAverager;
use crate::error::{invalid, Error, Result};
use crate::func::Evaluate;
use crate::grid::GridFunction;

use super::{Band, FilterBank, Interpolant, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flag {
    Low,
    High,
}

impl Flag {
    fn band(self) -> Band {
        match self {
            Flag::Low => Band::Lowpass,
            Flag::High => Band::Highpass,
        }
    }
}

/// Which inputs of a B-piece are low-pass (`φ̂(t·)`) and which are
/// high-pass (`1 - φ̂(t·)`) filtered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BPattern(Vec<Flag>);

impl BPattern {
    pub fn new(flags: Vec<Flag>) -> Result<Self> {
        if flags.is_empty() {
            return Err(invalid("pattern", "pattern needs at least one flag"));
        }
        Ok(BPattern(flags))
    }

    pub fn flags(&self) -> &[Flag] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_all_high(&self) -> bool {
        self.0.iter().all(|&f| f == Flag::High)
    }

    /// The `2^n - 1` patterns with at least one low flag, in binary order.
    /// The all-high pattern is excluded: it is the sum of the localized
    /// pieces.
    pub fn with_low(n: usize) -> Vec<BPattern> {
        (0..(1usize << n) - 1)
            .map(|bits| {
                BPattern(
                    (0..n)
                        .map(|k| if bits >> (n - 1 - k) & 1 == 1 { Flag::High } else { Flag::Low })
                        .collect(),
                )
            })
            .collect()
    }
}

/// Outcome of a reconstruction check at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reconstruction {
    pub b_pieces: f64,
    pub localized: f64,
    /// The average of the unfiltered inputs.
    pub whole: f64,
}

impl Reconstruction {
    pub fn relative_error(&self) -> f64 {
        (self.b_pieces + self.localized - self.whole).abs() / self.whole.abs()
    }
}

/// Spectra of `n` grid inputs sharing a filter bank's torus.
#[derive(Clone, Debug)]
pub struct Decomposition<'a> {
    bank: &'a FilterBank,
    grids: Vec<GridFunction>,
    spectra: Vec<Spectrum>,
}

impl<'a> Decomposition<'a> {
    pub fn new(bank: &'a FilterBank, grids: &[GridFunction]) -> Result<Self> {
        if grids.is_empty() {
            return Err(invalid("grids", "need at least one input"));
        }
        let probe = GridFunction::filled(bank.shape(), 0.0);
        for g in grids {
            g.same_shape(&probe)?;
        }
        Ok(Decomposition {
            bank,
            grids: grids.to_vec(),
            spectra: grids.iter().map(|g| Spectrum::of(g, bank.plans())).collect(),
        })
    }

    pub fn arity(&self) -> usize {
        self.spectra.len()
    }

    pub fn bank(&self) -> &FilterBank {
        self.bank
    }

    /// Input `k` filtered by `band` at scale `t`.
    pub fn band_grid(&self, k: usize, band: Band, t: f64) -> Result<GridFunction> {
        if let Band::Level(0) = band {
            return Err(invalid("level", "levels start at 1"));
        }
        self.spectra[k]
            .apply_radial(|r| band.multiplier(t, r))
            .to_grid(self.bank.plans())
    }

    fn interpolants(&self, bands: &[Band], t: f64) -> Result<Vec<Interpolant>> {
        bands
            .iter()
            .enumerate()
            .map(|(k, &b)| Interpolant::new(self.band_grid(k, b, t)?))
            .collect()
    }

    fn evaluate(&self, parts: &[Interpolant], t: f64, xs: &[f64], avg: &SlicedAverager) -> Result<Vec<f64>> {
        let factors: Vec<&dyn Evaluate> = parts.iter().map(|p| p as &dyn Evaluate).collect();
        avg.eval_many(&factors, t, xs)
    }

    fn check_scale(t: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", "scale must be positive"));
        }
        Ok(())
    }

    /// `A_t(ψ_{i_1} * f_1, ..., ψ_{i_n} * f_n)` at each point of `xs`.
    pub fn localized_average(
        &self,
        levels: &[u32],
        t: f64,
        xs: &[f64],
        avg: &SlicedAverager,
    ) -> Result<Vec<f64>> {
        Self::check_scale(t)?;
        if levels.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: levels.len(),
            });
        }
        if levels.contains(&0) {
            return Err(invalid("levels", "localized pieces need levels >= 1"));
        }
        let bands: Vec<Band> = levels.iter().map(|&i| Band::Level(i)).collect();
        self.evaluate(&self.interpolants(&bands, t)?, t, xs, avg)
    }

    /// `A^B_t(f)` at each point of `xs`.
    pub fn b_piece_average(
        &self,
        pattern: &BPattern,
        t: f64,
        xs: &[f64],
        avg: &SlicedAverager,
    ) -> Result<Vec<f64>> {
        Self::check_scale(t)?;
        if pattern.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: pattern.len(),
            });
        }
        let bands: Vec<Band> = pattern.flags().iter().map(|f| f.band()).collect();
        self.evaluate(&self.interpolants(&bands, t)?, t, xs, avg)
    }

    /// The average of the interpolated, unfiltered inputs.
    pub fn whole_average(&self, t: f64, xs: &[f64], avg: &SlicedAverager) -> Result<Vec<f64>> {
        Self::check_scale(t)?;
        let parts = self
            .grids
            .iter()
            .map(|g| Interpolant::new(g.clone()))
            .collect::<Result<Vec<_>>>()?;
        self.evaluate(&parts, t, xs, avg)
    }

    /// Sums all B-pieces and all localized pieces with levels `1..=J`.
    pub fn reconstruction(&self, t: f64, xs: &[f64], avg: &SlicedAverager) -> Result<Vec<Reconstruction>> {
        Self::check_scale(t)?;
        let n = self.arity();
        let j = self.bank.levels();
        let per_input = |band: Band| -> Result<Vec<Interpolant>> {
            (0..n)
                .map(|k| Interpolant::new(self.band_grid(k, band, t)?))
                .collect()
        };
        let low = per_input(Band::Lowpass)?;
        let high = per_input(Band::Highpass)?;
        let levels: Vec<Vec<Interpolant>> = (1..=j).map(|i| per_input(Band::Level(i))).collect::<Result<_>>()?;
        let points = xs.len() / avg.dim();
        let mut b_sum = vec![0.0; points];
        for pattern in BPattern::with_low(n) {
            let factors: Vec<&dyn Evaluate> = pattern
                .flags()
                .iter()
                .enumerate()
                .map(|(k, f)| match f {
                    Flag::Low => &low[k] as &dyn Evaluate,
                    Flag::High => &high[k] as &dyn Evaluate,
                })
                .collect();
            for (acc, v) in b_sum.iter_mut().zip(avg.eval_many(&factors, t, xs)?) {
                *acc += v;
            }
        }
        let mut loc_sum = vec![0.0; points];
        for combo in 0..(j as usize).pow(n as u32) {
            let mut c = combo;
            let mut factors: Vec<&dyn Evaluate> = Vec::with_capacity(n);
            for k in 0..n {
                factors.push(&levels[c % j as usize][k]);
                c /= j as usize;
            }
            for (acc, v) in loc_sum.iter_mut().zip(avg.eval_many(&factors, t, xs)?) {
                *acc += v;
            }
        }
        let whole = self.whole_average(t, xs, avg)?;
        Ok((0..points)
            .map(|p| Reconstruction {
                b_pieces: b_sum[p],
                localized: loc_sum[p],
                whole: whole[p],
            })
            .collect())
    }
}
