//! Operator specifications and their finite truncations U_J = p_J U q_J.
//!
//! Operators act on ℓ²(μ) through their coordinate matrices: (Ux)_j =
//! Σ_k U_{jk} x_k, so the entry (j,k) transports mass from atom k to atom j.
//! Infinite operators exist only as an [`OperatorSpec`] that can materialize
//! any J×J top-left corner; every computation factors through those corners.
//!
//! The gallery covers all operator families used by the worked examples:
//! diagonal multipliers ĝ, Koopman operators U_F of measure automorphisms,
//! the one-sided shifts, indicator projections 1̂_X, the two-band operator D,
//! the column operator A, the Hankel operator B, and the block operator B_α.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::Measure;

/// Relative tolerance for the equal-measure constraint μ_{F(j)} = μ_j of
/// Koopman permutations.
const KOOPMAN_MEASURE_RTOL: f64 = 1e-12;

/// Default slack for the contraction test ‖U‖_{ℓ²(μ)} ≤ 1 + tol.
pub const CONTRACTION_TOL: f64 = 1e-9;

/// The symbolic operator families.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    /// Explicit finite matrix; truncations beyond its size read the operator
    /// as finite-rank and pad with zeros.
    Dense { entries: Vec<Vec<Complex64>> },
    /// Diagonal multiplier ĝ with the given diagonal; cannot be truncated
    /// beyond the supplied entries.
    Diagonal { entries: Vec<Complex64> },
    /// Koopman operator U_F of a finitely supported permutation F, given as
    /// the image list of 0..m; beyond m the permutation is the identity.
    Koopman { permutation: Vec<usize> },
    /// Superdiagonal shift: entries (j, j+1) = 1.
    ShiftRight,
    /// Subdiagonal shift: entries (j+1, j) = 1.
    ShiftLeft,
    /// Indicator projection 1̂_X onto the coordinates in `set`.
    Indicator { set: Vec<usize> },
    /// The two-band operator D: D_{jj} = √(1/2) and
    /// D_{j+1,j} = √(μ_j / (2 μ_{j+1})), so b(D) has rows (…, 1/2, 1/2, …).
    TwoBandD,
    /// Column operator A: the first N columns all equal the probability
    /// sequence b, where N is the largest integer with N·max(b) ≤ 1; the
    /// remaining columns vanish. Real and nonnegative (used directly as a
    /// semibistochastic input).
    ColumnA { b: Vec<f64> },
    /// Hankel operator B_{jk} = α_{j+k} for a nonnegative summable sequence α
    /// (zero beyond the supplied prefix).
    HankelB { alpha: Vec<f64> },
    /// Block-diagonal operator B_α: uniform blocks of size α_k filled with
    /// 1/α_k. `sizes` empty means the conditional family α_k = 2^k.
    BlockBAlpha { sizes: Vec<usize> },
    /// Product of factor operators, applied as written (left factor acts
    /// last).
    Composed { factors: Vec<OperatorKind> },
}

/// An operator family paired with the measure it acts on.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    kind: OperatorKind,
    measure: Measure,
}

impl OperatorSpec {
    /// Validate kind-specific parameters against the measure and build the
    /// spec. Koopman permutations must be bijections that only permute atoms
    /// of equal measure; block sizes must be positive and nondecreasing.
    pub fn new(kind: OperatorKind, measure: Measure) -> Result<Self> {
        validate_kind(&kind, &measure)?;
        Ok(Self { kind, measure })
    }

    /// The symbolic family.
    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// The measure the operator acts on.
    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Whether truncations materialize real nonnegative matrices that the
    /// entropy layer may read directly as semibistochastic inputs (the
    /// operators A, B and B_α are defined as such matrices, not as b(U) of a
    /// contraction).
    pub fn is_sb_native(&self) -> bool {
        matches!(
            self.kind,
            OperatorKind::ColumnA { .. }
                | OperatorKind::HankelB { .. }
                | OperatorKind::BlockBAlpha { .. }
        )
    }
}

fn validate_kind(kind: &OperatorKind, measure: &Measure) -> Result<()> {
    match kind {
        OperatorKind::Dense { entries } => {
            let n = entries.len();
            if entries.iter().any(|row| row.len() != n) {
                return Err(Error::DimensionMismatch(
                    "dense entries must form a square matrix".into(),
                ));
            }
            Ok(())
        }
        OperatorKind::Koopman { permutation } => {
            let m = permutation.len();
            let mut seen = vec![false; m];
            for (j, &fj) in permutation.iter().enumerate() {
                if fj >= m || seen[fj] {
                    return Err(Error::InadmissiblePermutation(format!(
                        "image list is not a bijection of 0..{m}"
                    )));
                }
                seen[fj] = true;
                if fj >= measure.len() || j >= measure.len() {
                    return Err(Error::InadmissiblePermutation(format!(
                        "support index {j}→{fj} outside the materialized measure"
                    )));
                }
                let (a, b) = (measure.weight(j), measure.weight(fj));
                if (a - b).abs() > KOOPMAN_MEASURE_RTOL * a.max(b) {
                    return Err(Error::InadmissiblePermutation(format!(
                        "μ_{j} = {a} but μ_{fj} = {b}: F must permute atoms of equal measure"
                    )));
                }
            }
            Ok(())
        }
        OperatorKind::Indicator { set } => {
            if set.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(
                    "indicator set must be strictly increasing".into(),
                ));
            }
            Ok(())
        }
        OperatorKind::ColumnA { b } => {
            if b.iter().any(|&x| x < 0.0) {
                return Err(Error::Config("column sequence b must be nonnegative".into()));
            }
            let max = b.iter().cloned().fold(0.0f64, f64::max);
            if max <= 0.0 {
                return Err(Error::Config("column sequence b must not vanish".into()));
            }
            Ok(())
        }
        OperatorKind::HankelB { alpha } => {
            if alpha.iter().any(|&x| x < 0.0) {
                return Err(Error::Config("Hankel sequence α must be nonnegative".into()));
            }
            Ok(())
        }
        OperatorKind::BlockBAlpha { sizes } => {
            if sizes.contains(&0) {
                return Err(Error::Config("block sizes must be positive".into()));
            }
            if sizes.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Config("block sizes must be nondecreasing".into()));
            }
            Ok(())
        }
        OperatorKind::Composed { factors } => {
            if factors.is_empty() {
                return Err(Error::Config("composed operator needs at least one factor".into()));
            }
            for f in factors {
                validate_kind(f, measure)?;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// A complex J×J coordinate matrix together with the measure prefix it acts
/// on. Entry (j,k) is ⟨U e_k, e_j⟩ in the basis e_j = μ_j^{-1/2} δ_j, i.e.
/// the coefficient of x_k in (Ux)_j.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    data: DMatrix<Complex64>,
    measure: Measure,
}

impl DenseMatrix {
    /// Pair a square matrix with a measure prefix of matching length.
    pub fn new(data: DMatrix<Complex64>, measure: Measure) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch("matrix must be square".into()));
        }
        if data.nrows() != measure.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}×{} but measure has {} atoms",
                data.nrows(),
                data.ncols(),
                measure.len()
            )));
        }
        Ok(Self { data, measure })
    }

    /// Dimension J.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Entry (j, k).
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.data[(j, k)]
    }

    /// Underlying matrix.
    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Underlying measure prefix.
    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// The conjugated matrix diag(√μ) · W · diag(√μ)^{-1}, whose Euclidean
    /// operator norm equals the ℓ²(μ) operator norm of W.
    pub fn conjugated(&self) -> DMatrix<Complex64> {
        let j = self.dim();
        let mut out = self.data.clone();
        for r in 0..j {
            for c in 0..j {
                let scale = (self.measure.weight(r) / self.measure.weight(c)).sqrt();
                out[(r, c)] *= scale;
            }
        }
        out
    }

    /// Operator norm of W on ℓ²(μ) (largest singular value after
    /// conjugation).
    pub fn opnorm_mu(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.conjugated()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// Materialize the J×J truncation U_J = p_J U q_J of a spec: the entries
/// (j,k) for j,k < J of the infinite coordinate matrix.
pub fn truncate(spec: &OperatorSpec, j: usize) -> Result<DenseMatrix> {
    if j == 0 {
        return Err(Error::InsufficientSpec { requested: 0, reason: "J must be at least 1".into() });
    }
    let measure = spec.measure().prefix(j)?;
    let data = materialize(spec.kind(), &measure, j)?;
    DenseMatrix::new(data, measure)
}

fn materialize(kind: &OperatorKind, measure: &Measure, j: usize) -> Result<DMatrix<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut m = DMatrix::from_element(j, j, zero);
    match kind {
        OperatorKind::Dense { entries } => {
            // Finite-rank reading: beyond the given block the operator is 0.
            for (r, row) in entries.iter().enumerate().take(j) {
                for (c, &v) in row.iter().enumerate().take(j) {
                    m[(r, c)] = v;
                }
            }
        }
        OperatorKind::Diagonal { entries } => {
            if entries.len() < j {
                return Err(Error::InsufficientSpec {
                    requested: j,
                    reason: format!("diagonal provides only {} entries", entries.len()),
                });
            }
            for (d, &v) in entries.iter().enumerate().take(j) {
                m[(d, d)] = v;
            }
        }
        OperatorKind::Koopman { permutation } => {
            // (U_F x)_j = x_{F(j)}; equal measure makes √(μ_{F(j)}/μ_j) = 1,
            // so the matrix is the 0/1 permutation matrix with row j hitting
            // column F(j). Beyond the support F is the identity.
            for r in 0..j {
                let c = permutation.get(r).copied().unwrap_or(r);
                if c < j {
                    m[(r, c)] = one;
                }
            }
        }
        OperatorKind::ShiftRight => {
            for r in 0..j.saturating_sub(1) {
                m[(r, r + 1)] = one;
            }
        }
        OperatorKind::ShiftLeft => {
            for r in 0..j.saturating_sub(1) {
                m[(r + 1, r)] = one;
            }
        }
        OperatorKind::Indicator { set } => {
            for &d in set.iter().filter(|&&d| d < j) {
                m[(d, d)] = one;
            }
        }
        OperatorKind::TwoBandD => {
            let half = 0.5f64.sqrt();
            for d in 0..j {
                m[(d, d)] = Complex64::new(half, 0.0);
                if d + 1 < j {
                    let w = (measure.weight(d) / (2.0 * measure.weight(d + 1))).sqrt();
                    m[(d + 1, d)] = Complex64::new(w, 0.0);
                }
            }
        }
        OperatorKind::ColumnA { b } => {
            let bs = b.iter().cloned().fold(0.0f64, f64::max);
            // Largest N with N·b_s ≤ 1 (so (N+1)·b_s > 1).
            let n = (1.0 / bs).floor() as usize;
            for r in 0..j.min(b.len()) {
                for c in 0..n.min(j) {
                    m[(r, c)] = Complex64::new(b[r], 0.0);
                }
            }
        }
        OperatorKind::HankelB { alpha } => {
            for r in 0..j {
                for c in 0..j {
                    if let Some(&a) = alpha.get(r + c) {
                        m[(r, c)] = Complex64::new(a, 0.0);
                    }
                }
            }
        }
        OperatorKind::BlockBAlpha { sizes } => {
            let mut start = 0usize;
            let mut k = 0usize;
            while start < j {
                let size = if sizes.is_empty() {
                    1usize << (k + 1) // conditional family α_k = 2^k, k ≥ 1
                } else if k < sizes.len() {
                    sizes[k]
                } else {
                    return Err(Error::InsufficientSpec {
                        requested: j,
                        reason: format!("block sizes cover only {start} atoms"),
                    });
                };
                let v = Complex64::new(1.0 / size as f64, 0.0);
                for r in start..(start + size).min(j) {
                    for c in start..(start + size).min(j) {
                        m[(r, c)] = v;
                    }
                }
                start += size;
                k += 1;
            }
        }
        OperatorKind::Composed { factors } => {
            let mut acc: Option<DMatrix<Complex64>> = None;
            for f in factors {
                let fm = materialize(f, measure, j)?;
                acc = Some(match acc {
                    None => fm,
                    Some(a) => a * fm,
                });
            }
            m = acc.expect("validated non-empty factor list");
        }
    }
    Ok(m)
}

/// Adjoint in ℓ²(μ): W*_{jk} = (μ_k/μ_j) · conj(W_{kj}).
pub fn adjoint(w: &DenseMatrix) -> DenseMatrix {
    let j = w.dim();
    let mut data = DMatrix::from_element(j, j, Complex64::new(0.0, 0.0));
    for r in 0..j {
        for c in 0..j {
            data[(r, c)] = w.entry(c, r).conj() * (w.measure().weight(c) / w.measure().weight(r));
        }
    }
    DenseMatrix { data, measure: w.measure().clone() }
}

/// True iff ‖W‖_{ℓ²(μ)} ≤ 1 + tol.
pub fn is_contraction(w: &DenseMatrix, tol: f64) -> bool {
    w.opnorm_mu() <= 1.0 + tol
}

/// Product of the given matrices in the written order (leftmost acts last).
pub fn compose(ws: &[&DenseMatrix]) -> Result<DenseMatrix> {
    let first = ws
        .first()
        .ok_or_else(|| Error::DimensionMismatch("compose needs at least one factor".into()))?;
    let mut acc = first.data.clone();
    for w in &ws[1..] {
        if w.dim() != first.dim() || w.measure() != first.measure() {
            return Err(Error::DimensionMismatch(
                "compose requires equal dimensions and measures".into(),
            ));
        }
        acc *= w.data.clone();
    }
    Ok(DenseMatrix { data: acc, measure: first.measure().clone() })
}
