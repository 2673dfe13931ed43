//! JSON input schemas. Every document carries `"schema_version": 1`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sphavg::analysis::{FamilySpec, Operator, ProbeOptions};
use sphavg::{ExponentTuple, FunctionTuple};

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
struct Versioned {
    schema_version: Option<u32>,
}

/// Reads and parses a config, reporting syntax errors by line and column.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let located = |e: serde_json::Error| {
        Failure::input(format!(
            "malformed JSON in {} at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    };
    let v: Versioned = serde_json::from_str(&text).map_err(located)?;
    match v.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(Failure::input(format!(
                "{}: unsupported schema_version {other} (expected {SCHEMA_VERSION})",
                path.display()
            )))
        }
        None => {
            return Err(Failure::input(format!(
                "{}: missing schema_version (expected {SCHEMA_VERSION})",
                path.display()
            )))
        }
    }
    serde_json::from_str(&text).map_err(located)
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodConfig {
    Sliced {
        #[serde(default = "default_lambda")]
        lambda_order: usize,
        #[serde(default = "default_base")]
        base_order: usize,
    },
    Product {
        order: usize,
    },
    MonteCarlo {
        count: usize,
    },
}

fn default_lambda() -> usize {
    sphavg::averages::DEFAULT_LAMBDA_ORDER
}

fn default_base() -> usize {
    64
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig::Sliced {
            lambda_order: default_lambda(),
            base_order: default_base(),
        }
    }
}

fn unit() -> f64 {
    1.0
}

/// `average` input.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageConfig {
    #[allow(dead_code)]
    pub schema_version: u32,
    pub functions: FunctionTuple,
    #[serde(default = "unit")]
    pub t: f64,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub method: MethodConfig,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalesConfig {
    Lacunary { n: u32 },
    Geometric { t_min: f64, t_max: f64, k: u32 },
}

/// `maximal` input.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalConfig {
    #[allow(dead_code)]
    pub schema_version: u32,
    pub functions: FunctionTuple,
    pub points: Vec<Vec<f64>>,
    pub scales: ScalesConfig,
    #[serde(default)]
    pub method: MethodConfig,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub resolution: Option<usize>,
    pub max_resolution: Option<usize>,
    pub lambda_order: Option<usize>,
    pub base_order: Option<usize>,
    pub output_exponent: Option<f64>,
}

impl ProbeConfig {
    pub fn options(&self, refine_tol: Option<f64>) -> ProbeOptions {
        let d = ProbeOptions::default();
        ProbeOptions {
            resolution: self.resolution.unwrap_or(d.resolution),
            max_resolution: self.max_resolution.unwrap_or(d.max_resolution),
            refine_tol: refine_tol.unwrap_or(d.refine_tol),
            lambda_order: self.lambda_order.unwrap_or(d.lambda_order),
            base_order: self.base_order.unwrap_or(d.base_order),
            output_exponent: self.output_exponent,
        }
    }
}

/// `sweep` input.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[allow(dead_code)]
    pub schema_version: u32,
    pub operator: Option<Operator>,
    pub exponents: Option<ExponentTuple>,
    pub family: FamilySpec,
    #[serde(default)]
    pub options: ProbeConfig,
}
