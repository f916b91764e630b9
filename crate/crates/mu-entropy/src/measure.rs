//! Measures on the atoms of ℕ₀ and vectors in the weighted space ℓ²(μ).
//!
//! A measure assigns a strictly positive weight μ_j to every atom j, with
//! Σ μ_j = 1. Finite measures are given explicitly; infinite families
//! (geometric, the conditional block family) are materialized as prefixes of
//! any requested length, with tail mass 1 − M_J where M_J = Σ_{j<J} μ_j.
//!
//! The space ℓ²(μ) carries the inner product ⟨x,y⟩ = Σ_j μ_j x_j ȳ_j; the
//! weighted ℓ¹ norm is ‖x‖_{ℓ¹(μ)} = Σ_j μ_j |x_j|.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for the Σ μ_j = 1 normalization check on explicit input.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Normalization constant of the conditional block measure:
/// C = 2 / (ζ(3/2) + ζ(2)), the unique constant making the block masses
/// C/(2k^{3/2}) + C/(2k²) sum to 1 over k ≥ 1.
pub fn condit1_constant() -> f64 {
    2.0 / (zeta_gt1(1.5) + std::f64::consts::PI.powi(2) / 6.0)
}

/// ζ(s) for s > 1 via Euler–Maclaurin summation (absolute error ≪ 1e-14 for
/// the exponents used here).
fn zeta_gt1(s: f64) -> f64 {
    let n = 200_000u32;
    let nf = f64::from(n);
    let partial: f64 = (1..=n).map(|k| f64::from(k).powf(-s)).sum();
    partial + nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s)
        + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0
}

/// Which named family a measure came from.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    /// Finite measure given weight-by-weight; sums to 1 exactly (within
    /// [`NORMALIZATION_TOL`]).
    Explicit,
    /// μ_j = (1−r) r^j for 0 < r < 1, materialized as a prefix.
    Geometric { ratio: f64 },
    /// The conditional block measure paired with blocks of size 2^k: the
    /// first atom of block k (k ≥ 1) carries C/(2k^{3/2}) and the remaining
    /// 2^k − 1 atoms share C/(2k²) equally, C = [`condit1_constant`].
    Condit1,
}

/// A positive weight vector μ on the first `len` atoms of ℕ₀.
///
/// For infinite families the stored weights are the exact prefix of the
/// infinite measure; [`Measure::tail`] bounds the mass beyond the prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    weights: Vec<f64>,
    kind: MeasureKind,
}

impl Measure {
    /// Explicit finite measure. Rejects non-positive weights and weight
    /// vectors whose sum deviates from 1 by more than [`NORMALIZATION_TOL`].
    pub fn explicit(weights: Vec<f64>) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum, tol: NORMALIZATION_TOL });
        }
        Ok(Self { weights, kind: MeasureKind::Explicit })
    }

    /// Prefix of length `len` of the geometric measure μ_j = (1−r) r^j.
    pub fn geometric(ratio: f64, len: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Config(format!(
                "geometric ratio must lie in (0,1), got {ratio}"
            )));
        }
        if len == 0 {
            return Err(Error::Config("measure length must be at least 1".into()));
        }
        let weights = (0..len).map(|j| (1.0 - ratio) * ratio.powi(j as i32)).collect();
        Ok(Self { weights, kind: MeasureKind::Geometric { ratio } })
    }

    /// Prefix of length `len` of the conditional block measure (see
    /// [`MeasureKind::Condit1`]).
    pub fn condit1(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Config("measure length must be at least 1".into()));
        }
        let c = condit1_constant();
        let mut weights = Vec::with_capacity(len);
        let mut k = 1u32;
        'outer: loop {
            let kf = f64::from(k);
            let size = 1usize << k; // block k has 2^k atoms
            let interior = c / (2.0 * kf * kf) / (size as f64 - 1.0);
            for pos in 0..size {
                let w = if pos == 0 { c / (2.0 * kf.powf(1.5)) } else { interior };
                weights.push(w);
                if weights.len() == len {
                    break 'outer;
                }
            }
            k += 1;
        }
        Ok(Self { weights, kind: MeasureKind::Condit1 })
    }

    /// Index of the first atom past block K of the conditional measure:
    /// A_K = Σ_{k≤K} 2^k = 2^{K+1} − 2.
    pub fn condit1_block_end(k: u32) -> usize {
        (1usize << (k + 1)) - 2
    }

    /// Total mass of block k (k ≥ 1) of the conditional measure:
    /// C/(2k^{3/2}) + C/(2k²).
    pub fn condit1_block_mass(k: u32) -> f64 {
        let c = condit1_constant();
        let kf = f64::from(k);
        c / (2.0 * kf.powf(1.5)) + c / (2.0 * kf * kf)
    }

    /// Number of materialized atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// True when no atoms are materialized (never constructed; kept for API
    /// completeness).
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The weight vector μ_0..μ_{J−1}.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single weight μ_j.
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    /// Family tag.
    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Materialized mass M_J = Σ_{j<J} μ_j.
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Upper bound on the mass beyond the prefix: 1 − M_J (0 for explicit
    /// finite measures up to rounding).
    pub fn tail(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }

    /// The length-`j` prefix of this measure (same family, shorter
    /// materialization). Errors when more atoms are requested than exist.
    pub fn prefix(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.weights.len() {
            return Err(Error::InsufficientSpec {
                requested: j,
                reason: format!("measure materializes only {} atoms", self.weights.len()),
            });
        }
        Ok(Self { weights: self.weights[..j].to_vec(), kind: self.kind.clone() })
    }
}

/// Shannon entropy of the first `j` atoms: S = −Σ_{i<j} μ_i log μ_i (nats).
/// Every μ_i is strictly positive, so no 0·log 0 care is needed here.
pub fn entropy_of_measure(mu: &Measure, j: usize) -> Result<f64> {
    if j > mu.len() {
        return Err(Error::IndexOutOfRange { index: j, dim: mu.len() });
    }
    Ok(-mu.weights[..j].iter().map(|&w| w * w.ln()).sum::<f64>())
}

/// A complex vector living in ℓ²(μ) for a specific measure prefix.
#[derive(Clone, Debug)]
pub struct WeightedVector {
    entries: Vec<Complex64>,
    measure: Measure,
}

impl WeightedVector {
    /// Pair a coefficient vector with its measure; lengths must match.
    pub fn new(entries: Vec<Complex64>, measure: Measure) -> Result<Self> {
        if entries.len() != measure.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} entries, measure has {} atoms",
                entries.len(),
                measure.len()
            )));
        }
        Ok(Self { entries, measure })
    }

    /// Coefficients.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Underlying measure.
    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Weighted ℓ¹ norm ‖x‖_{ℓ¹(μ)} = Σ μ_j |x_j|.
    pub fn norm_l1mu(&self) -> f64 {
        self.entries
            .iter()
            .zip(self.measure.weights())
            .map(|(x, &w)| w * x.norm())
            .sum()
    }
}

/// Inner product ⟨x,y⟩ = Σ_j μ_j x_j ȳ_j of ℓ²(μ).
pub fn inner_l2mu(x: &WeightedVector, y: &WeightedVector) -> Result<Complex64> {
    if x.measure != y.measure {
        return Err(Error::DimensionMismatch(
            "inner product requires identical measures".into(),
        ));
    }
    Ok(x.entries
        .iter()
        .zip(&y.entries)
        .zip(x.measure.weights())
        .map(|((a, b), &w)| w * a * b.conj())
        .sum())
}

/// Unweighted ℓ¹ norm Σ |x_j|.
pub fn norm_l1(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm()).sum()
}
