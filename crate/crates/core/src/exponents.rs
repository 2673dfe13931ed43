//! Lebesgue exponent tuples `(p_1, ..., p_n; r)` with `1/r = sum 1/p_i`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const HOLDER_TOL: f64 = 1e-12;

/// Exponents of an n-linear estimate `L^{p_1} x ... x L^{p_n} -> L^r`.
///
/// Infinite exponents are stored as `f64::INFINITY`; in JSON they may be
/// written as the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub struct ExponentTuple {
    p: Vec<f64>,
    r: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Extended {
    Finite(f64),
    Named(InfName),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
enum InfName {
    #[serde(rename = "inf")]
    Inf,
}

impl From<Extended> for f64 {
    fn from(e: Extended) -> f64 {
        match e {
            Extended::Finite(v) => v,
            Extended::Named(InfName::Inf) => f64::INFINITY,
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            Extended::Named(InfName::Inf)
        } else {
            Extended::Finite(v)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ExponentRepr {
    p: Vec<Extended>,
    #[serde(default)]
    r: Option<Extended>,
}

impl TryFrom<ExponentRepr> for ExponentTuple {
    type Error = Error;

    fn try_from(e: ExponentRepr) -> Result<Self> {
        let p = e.p.into_iter().map(f64::from).collect();
        match e.r {
            Some(r) => ExponentTuple::new(p, r.into()),
            None => ExponentTuple::from_inputs(p),
        }
    }
}

impl From<ExponentTuple> for ExponentRepr {
    fn from(e: ExponentTuple) -> Self {
        ExponentRepr {
            p: e.p.into_iter().map(Extended::from).collect(),
            r: Some(e.r.into()),
        }
    }
}

fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

impl ExponentTuple {
    /// Validates `p_i in [1, inf]` and the Hölder relation.
    pub fn new(p: Vec<f64>, r: f64) -> Result<Self> {
        check_inputs(&p)?;
        if !(r > 0.0) {
            return Err(invalid("r", "output exponent must be positive"));
        }
        let sum: f64 = p.iter().map(|&q| recip(q)).sum();
        let inv_r = recip(r);
        if (inv_r - sum).abs() > HOLDER_TOL * (1.0 + sum) {
            return Err(Error::Holder { inv_r, sum });
        }
        Ok(ExponentTuple { p, r })
    }

    /// The tuple whose output exponent is forced by the Hölder relation.
    pub fn from_inputs(p: Vec<f64>) -> Result<Self> {
        check_inputs(&p)?;
        let sum: f64 = p.iter().map(|&q| recip(q)).sum();
        let r = if sum == 0.0 { f64::INFINITY } else { 1.0 / sum };
        Ok(ExponentTuple { p, r })
    }

    pub fn arity(&self) -> usize {
        self.p.len()
    }

    pub fn inputs(&self) -> &[f64] {
        &self.p
    }

    pub fn output(&self) -> f64 {
        self.r
    }

    /// The point `(1/p_1, ..., 1/p_n)` of the unit cube.
    pub fn reciprocals(&self) -> Vec<f64> {
        self.p.iter().map(|&q| recip(q)).collect()
    }
}

fn check_inputs(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(invalid("p", "need at least one input exponent"));
    }
    if p.iter().any(|&q| !(q >= 1.0)) {
        return Err(invalid("p", "input exponents must lie in [1, inf]"));
    }
    Ok(())
}
