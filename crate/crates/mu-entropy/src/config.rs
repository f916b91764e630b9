//! JSON experiment configuration: measure specs, operator specs and command
//! parameters.
//!
//! The wire format is a single JSON document. Complex numbers serialize as
//! `[re, im]` pairs, partitions as arrays of arrays of indices; operator and
//! measure kinds are tagged unions keyed by `"kind"`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::mu_norm::Partition;
use crate::operators::{OperatorKind, OperatorSpec};

/// Complex number on the wire: `[re, im]`.
pub type CxPair = [f64; 2];

fn to_cx(p: CxPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn from_cx(z: Complex64) -> CxPair {
    [z.re, z.im]
}

/// Measure spec as it appears in config documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureJson {
    /// `{"kind":"explicit","weights":[...]}`
    Explicit { weights: Vec<f64> },
    /// `{"kind":"geometric","ratio":r}`
    Geometric { ratio: f64 },
    /// `{"kind":"condit1"}`
    Condit1,
}

impl MeasureJson {
    /// Materialize the measure with (at least) `len` atoms; explicit measures
    /// carry their own length and must provide enough weights.
    pub fn build(&self, len: usize) -> Result<Measure> {
        match self {
            MeasureJson::Explicit { weights } => {
                let m = Measure::explicit(weights.clone())?;
                if m.len() < len {
                    return Err(Error::InsufficientSpec {
                        requested: len,
                        reason: format!("explicit measure has {} atoms", m.len()),
                    });
                }
                Ok(m)
            }
            MeasureJson::Geometric { ratio } => Measure::geometric(*ratio, len),
            MeasureJson::Condit1 => Measure::condit1(len),
        }
    }

    /// Number of atoms intrinsically fixed by the spec (explicit only).
    pub fn intrinsic_len(&self) -> Option<usize> {
        match self {
            MeasureJson::Explicit { weights } => Some(weights.len()),
            _ => None,
        }
    }
}

/// Operator spec as it appears in config documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorJson {
    Dense { entries: Vec<Vec<CxPair>> },
    Diagonal { entries: Vec<CxPair> },
    Koopman { permutation: Vec<usize> },
    ShiftRight,
    ShiftLeft,
    Indicator { set: Vec<usize> },
    TwoBandD,
    ColumnA { b: Vec<f64> },
    HankelB { alpha: Vec<f64> },
    BlockBAlpha { sizes: Vec<usize> },
    Composed { factors: Vec<OperatorJson> },
}

impl OperatorJson {
    /// Translate to the library's operator kind.
    pub fn to_kind(&self) -> OperatorKind {
        match self {
            OperatorJson::Dense { entries } => OperatorKind::Dense {
                entries: entries
                    .iter()
                    .map(|row| row.iter().map(|&p| to_cx(p)).collect())
                    .collect(),
            },
            OperatorJson::Diagonal { entries } => OperatorKind::Diagonal {
                entries: entries.iter().map(|&p| to_cx(p)).collect(),
            },
            OperatorJson::Koopman { permutation } => {
                OperatorKind::Koopman { permutation: permutation.clone() }
            }
            OperatorJson::ShiftRight => OperatorKind::ShiftRight,
            OperatorJson::ShiftLeft => OperatorKind::ShiftLeft,
            OperatorJson::Indicator { set } => OperatorKind::Indicator { set: set.clone() },
            OperatorJson::TwoBandD => OperatorKind::TwoBandD,
            OperatorJson::ColumnA { b } => OperatorKind::ColumnA { b: b.clone() },
            OperatorJson::HankelB { alpha } => OperatorKind::HankelB { alpha: alpha.clone() },
            OperatorJson::BlockBAlpha { sizes } => {
                OperatorKind::BlockBAlpha { sizes: sizes.clone() }
            }
            OperatorJson::Composed { factors } => OperatorKind::Composed {
                factors: factors.iter().map(OperatorJson::to_kind).collect(),
            },
        }
    }

    /// Inverse of [`OperatorJson::to_kind`] (used by round-trip tests).
    pub fn from_kind(kind: &OperatorKind) -> Self {
        match kind {
            OperatorKind::Dense { entries } => OperatorJson::Dense {
                entries: entries
                    .iter()
                    .map(|row| row.iter().map(|&z| from_cx(z)).collect())
                    .collect(),
            },
            OperatorKind::Diagonal { entries } => OperatorJson::Diagonal {
                entries: entries.iter().map(|&z| from_cx(z)).collect(),
            },
            OperatorKind::Koopman { permutation } => {
                OperatorJson::Koopman { permutation: permutation.clone() }
            }
            OperatorKind::ShiftRight => OperatorJson::ShiftRight,
            OperatorKind::ShiftLeft => OperatorJson::ShiftLeft,
            OperatorKind::Indicator { set } => OperatorJson::Indicator { set: set.clone() },
            OperatorKind::TwoBandD => OperatorJson::TwoBandD,
            OperatorKind::ColumnA { b } => OperatorJson::ColumnA { b: b.clone() },
            OperatorKind::HankelB { alpha } => OperatorJson::HankelB { alpha: alpha.clone() },
            OperatorKind::BlockBAlpha { sizes } => {
                OperatorJson::BlockBAlpha { sizes: sizes.clone() }
            }
            OperatorKind::Composed { factors } => OperatorJson::Composed {
                factors: factors.iter().map(OperatorJson::from_kind).collect(),
            },
        }
    }
}

/// Command parameters; unset values fall back to per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct Params {
    /// Truncation dimension J.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j: Option<usize>,
    /// Largest truncation dimension for series commands.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jmax: Option<usize>,
    /// Path length n.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    /// Largest path length for rate estimation.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nmax: Option<usize>,
    /// Partition blocks (arrays of indices); defaults to the finest partition.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub partition: Option<Vec<Vec<usize>>>,
    /// Numerical tolerance override.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    /// Enumeration budget override.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub budget: Option<u64>,
    /// Growth threshold for the divergence flag of truncation series.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub divergence_eps: Option<f64>,
}

/// A full experiment document: measure + operator + parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub measure: MeasureJson,
    pub operator: OperatorJson,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    /// Parse a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Canonical (normalized) JSON serialization.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Effective truncation dimension: `params.j`, else `params.jmax`, else
    /// the intrinsic length of an explicit measure.
    pub fn dimension(&self) -> Result<usize> {
        self.params
            .j
            .or(self.params.jmax)
            .or_else(|| self.measure.intrinsic_len())
            .filter(|&j| j > 0)
            .ok_or_else(|| {
                Error::Config("no dimension: set params.j (or jmax) or use an explicit measure".into())
            })
    }

    /// Build the validated operator spec at the effective dimension.
    pub fn build_spec(&self) -> Result<OperatorSpec> {
        let j = self.dimension()?;
        let mu = self.measure.build(j)?;
        OperatorSpec::new(self.operator.to_kind(), mu)
    }

    /// Build the partition from `params.partition`, defaulting to the finest
    /// partition at the effective dimension.
    pub fn build_partition(&self) -> Result<Partition> {
        let j = self.dimension()?;
        match &self.params.partition {
            None => Ok(Partition::finest(j)),
            Some(blocks) => Partition::new(blocks.clone(), j),
        }
    }
}
