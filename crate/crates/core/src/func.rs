//! Closed-form nonnegative test functions on `R^d`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Anything that can be evaluated pointwise on `R^d`.
///
/// `value` does not check the length of `x`; callers that accept user input
/// go through [`TestFunction::evaluate`] or validate dimensions up front.
pub trait Evaluate: Sync + Send {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

/// Radial profile of a [`TestFunction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Profile {
    /// `exp(-a |x - c|^2)`
    Gaussian { a: f64 },
    /// `(1 - |x - c|^2 / s^2)_+^k`
    Bump {
        s: f64,
        #[serde(default = "default_smoothness")]
        k: u32,
    },
}

fn default_smoothness() -> u32 {
    2
}

/// `amplitude * profile(x - center)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TestFunctionRepr", into = "TestFunctionRepr")]
pub struct TestFunction {
    profile: Profile,
    center: Vec<f64>,
    amplitude: f64,
}

#[derive(Serialize, Deserialize)]
struct TestFunctionRepr {
    #[serde(flatten)]
    profile: Profile,
    center: Vec<f64>,
    #[serde(default = "unit")]
    amplitude: f64,
    d: usize,
}

fn unit() -> f64 {
    1.0
}

impl TryFrom<TestFunctionRepr> for TestFunction {
    type Error = Error;

    fn try_from(r: TestFunctionRepr) -> Result<Self> {
        if r.center.len() != r.d {
            return Err(Error::DimensionMismatch {
                expected: r.d,
                got: r.center.len(),
            });
        }
        TestFunction::new(r.profile, r.center, r.amplitude)
    }
}

impl From<TestFunction> for TestFunctionRepr {
    fn from(f: TestFunction) -> Self {
        TestFunctionRepr {
            d: f.center.len(),
            profile: f.profile,
            center: f.center,
            amplitude: f.amplitude,
        }
    }
}

/// Tail mass fraction below which a Gaussian is treated as compactly supported.
pub const GAUSSIAN_TAIL: f64 = 1e-8;

impl TestFunction {
    pub fn new(profile: Profile, center: Vec<f64>, amplitude: f64) -> Result<Self> {
        if center.len() < 2 {
            return Err(invalid("d", "dimension must be at least 2"));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(invalid("amplitude", "must be finite and nonnegative"));
        }
        match profile {
            Profile::Gaussian { a } if !(a > 0.0 && a.is_finite()) => {
                return Err(invalid("a", "decay rate must be positive"))
            }
            Profile::Bump { s, k } if !(s > 0.0 && s.is_finite()) || k == 0 => {
                return Err(invalid("s/k", "bump needs s > 0 and k >= 1"))
            }
            _ => {}
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("center", "must be finite"));
        }
        Ok(TestFunction {
            profile,
            center,
            amplitude,
        })
    }

    pub fn gaussian(a: f64, center: Vec<f64>) -> Result<Self> {
        Self::new(Profile::Gaussian { a }, center, 1.0)
    }

    pub fn bump(s: f64, k: u32, center: Vec<f64>) -> Result<Self> {
        Self::new(Profile::Bump { s, k }, center, 1.0)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(invalid("amplitude", "must be finite and nonnegative"));
        }
        self.amplitude = amplitude;
        Ok(self)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.profile, Profile::Bump { .. })
    }

    /// Checked evaluation.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                got: x.len(),
            });
        }
        Ok(self.value(x))
    }

    /// Radius of the ball about `center` outside of which the function is
    /// zero (bumps) or carries less than [`GAUSSIAN_TAIL`] of its mass.
    pub fn support_radius(&self) -> f64 {
        match self.profile {
            Profile::Bump { s, .. } => s,
            Profile::Gaussian { a } => {
                // P(chi^2_d > 2 a r^2) < GAUSSIAN_TAIL for r^2 = (20 + d) / a, d <= 8
                ((20.0 + self.dim() as f64) / a).sqrt()
            }
        }
    }

    /// The translate `x -> f(x - shift)`.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shift.len(),
            });
        }
        let center = self.center.iter().zip(shift).map(|(c, s)| c + s).collect();
        Ok(TestFunction {
            center,
            ..self.clone()
        })
    }

    /// The dilate `x -> f(delta * x)`.
    pub fn dilate(&self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "dilation factor must be positive"));
        }
        let center = self.center.iter().map(|c| c / delta).collect();
        let profile = match self.profile {
            Profile::Gaussian { a } => Profile::Gaussian { a: a * delta * delta },
            Profile::Bump { s, k } => Profile::Bump { s: s / delta, k },
        };
        Ok(TestFunction {
            profile,
            center,
            amplitude: self.amplitude,
        })
    }

    fn dist2(&self, x: &[f64]) -> f64 {
        self.center
            .iter()
            .zip(x)
            .map(|(c, x)| (x - c) * (x - c))
            .sum()
    }
}

impl Evaluate for TestFunction {
    fn dim(&self) -> usize {
        self.center.len()
    }

    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        let r2 = self.dist2(x);
        match self.profile {
            Profile::Gaussian { a } => self.amplitude * (-a * r2).exp(),
            Profile::Bump { s, k } => {
                let u = 1.0 - r2 / (s * s);
                if u <= 0.0 {
                    0.0
                } else {
                    self.amplitude * u.powi(k as i32)
                }
            }
        }
    }
}

/// The constant function 1 on `R^d`; used only for total-measure identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstantOne {
    pub d: usize,
}

impl Evaluate for ConstantOne {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, _x: &[f64]) -> f64 {
        1.0
    }
}

/// An ordered tuple `(f_1, ..., f_n)` of test functions on a common `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TestFunction>", into = "Vec<TestFunction>")]
pub struct FunctionTuple {
    entries: Vec<TestFunction>,
}

impl TryFrom<Vec<TestFunction>> for FunctionTuple {
    type Error = Error;

    fn try_from(v: Vec<TestFunction>) -> Result<Self> {
        FunctionTuple::new(v)
    }
}

impl From<FunctionTuple> for Vec<TestFunction> {
    fn from(t: FunctionTuple) -> Self {
        t.entries
    }
}

impl FunctionTuple {
    pub fn new(entries: Vec<TestFunction>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(invalid("entries", "a tuple needs at least one function"));
        };
        let d = first.dim();
        if let Some(bad) = entries.iter().find(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(FunctionTuple { entries })
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn entries(&self) -> &[TestFunction] {
        &self.entries
    }

    /// Borrowed trait objects, the form the averaging kernels consume.
    pub fn factors(&self) -> Vec<&dyn Evaluate> {
        self.entries.iter().map(|f| f as &dyn Evaluate).collect()
    }

    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: FnMut(&TestFunction) -> Result<TestFunction>,
    {
        FunctionTuple::new(self.entries.iter().map(f).collect::<Result<Vec<_>>>()?)
    }
}
