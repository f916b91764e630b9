//! The map b, the semibistochastic semigroup, and the mean-ergodic (Cesàro)
//! projector onto Ker(B − I).
//!
//! b sends an operator U on ℓ²(μ) to the real matrix B_{jk} =
//! (μ_j/μ_k)|U_{jk}|², which for μ-contractions is semibistochastic: entrywise
//! nonnegative with every row and column sum at most 1. On ℓ¹ the space
//! splits as Ker(B−I) ⊕ Im(B−I), and the Cesàro averages (1/n)Σ_{k<n} B^k
//! converge to the oblique projector P onto the kernel along the image. The
//! scalars u_α = lim_k Σ_j (B^k)_{jα} and the vectors P^T e, P μ feed the
//! closed-form entropy of the finite-dimensional theorem.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::operators::DenseMatrix;

/// Slack on row/column sums of semibistochastic matrices.
pub const SB_TOL: f64 = 1e-12;

/// Relative rank threshold on the pivoted-QR diagonal separating Ker(B−I)
/// from the regular part.
pub const RANK_TOL: f64 = 1e-10;

/// Iteration cap for [`u_limit`].
pub const U_LIMIT_KMAX: usize = 100_000;

/// A validated semibistochastic matrix: entrywise nonnegative, all row and
/// column sums ≤ 1 + [`SB_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct SbMatrix {
    data: DMatrix<f64>,
}

impl SbMatrix {
    /// Dimension J.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Entry (j, k).
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.data[(j, k)]
    }

    /// Underlying matrix.
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// Check the semibistochastic invariants and wrap the matrix.
pub fn validate_sb(b: DMatrix<f64>) -> Result<SbMatrix> {
    if b.nrows() != b.ncols() {
        return Err(Error::NotSemibistochastic("matrix must be square".into()));
    }
    let j = b.nrows();
    for r in 0..j {
        for c in 0..j {
            if b[(r, c)].is_nan() || b[(r, c)] < 0.0 {
                return Err(Error::NotSemibistochastic(format!(
                    "negative entry {} at ({r},{c})",
                    b[(r, c)]
                )));
            }
        }
    }
    for r in 0..j {
        let sum: f64 = (0..j).map(|c| b[(r, c)]).sum();
        if sum > 1.0 + SB_TOL {
            return Err(Error::NotSemibistochastic(format!("row {r} sums to {sum}")));
        }
    }
    for c in 0..j {
        let sum: f64 = (0..j).map(|r| b[(r, c)]).sum();
        if sum > 1.0 + SB_TOL {
            return Err(Error::NotSemibistochastic(format!("column {c} sums to {sum}")));
        }
    }
    Ok(SbMatrix { data: b })
}

/// b(U)_{jk} = (μ_j/μ_k) |U_{jk}|², validated as semibistochastic.
///
/// The validation is on the output: b(U) ∈ SB holds for every μ-contraction,
/// but also for some non-contractions (the two-band operator D among them),
/// and those are exactly the inputs the worked examples need. Inputs whose
/// image violates the SB sums are rejected.
pub fn b_map(u: &DenseMatrix) -> Result<SbMatrix> {
    validate_sb(b_weights(u))
}

/// The raw b-weight matrix without SB validation (used by the path-weight
/// enumerators, for which the formula is meaningful for any operator).
pub fn b_weights(u: &DenseMatrix) -> DMatrix<f64> {
    let j = u.dim();
    DMatrix::from_fn(j, j, |r, c| {
        u.measure().weight(r) / u.measure().weight(c) * u.entry(r, c).norm_sqr()
    })
}

/// ℓ¹-operator norm: the largest column absolute sum.
pub fn l1_opnorm(b: &DMatrix<f64>) -> f64 {
    (0..b.ncols())
        .map(|c| (0..b.nrows()).map(|r| b[(r, c)].abs()).sum())
        .fold(0.0, f64::max)
}

/// The sequence a_α^k = Σ_j (B^k)_{jα} for k = 0..=kmax (a_α^0 = 1 by the
/// empty-product convention). Nonincreasing and contained in [0, 1].
pub fn a_seq(b: &SbMatrix, alpha: usize, kmax: usize) -> Result<Vec<f64>> {
    let j = b.dim();
    if alpha >= j {
        return Err(Error::IndexOutOfRange { index: alpha, dim: j });
    }
    let mut col = DVector::zeros(j);
    col[alpha] = 1.0;
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    for _ in 1..=kmax {
        col = &b.data * col;
        out.push(col.sum());
    }
    Ok(out)
}

/// u_α = lim_k a_α^k, detected when a successive difference drops below `tol`
/// after a burn-in of max(32, 4J) steps (mass can sit on an exact plateau for
/// up to ~J steps before it starts draining through a truncation edge).
/// Errors when [`U_LIMIT_KMAX`] iterations do not reach the tolerance.
pub fn u_limit(b: &SbMatrix, alpha: usize, tol: f64) -> Result<f64> {
    let j = b.dim();
    if alpha >= j {
        return Err(Error::IndexOutOfRange { index: alpha, dim: j });
    }
    let burn_in = 32.max(4 * j);
    let mut col = DVector::zeros(j);
    col[alpha] = 1.0;
    let mut prev = 1.0f64;
    for k in 1..=U_LIMIT_KMAX {
        col = &b.data * col;
        let cur = col.sum();
        if k >= burn_in && (prev - cur).abs() < tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "u_limit did not converge within {U_LIMIT_KMAX} iterations (slow mixing)"
    )))
}

/// The Cesàro projector data for a semibistochastic matrix.
#[derive(Clone, Debug)]
pub struct ErgodicData {
    /// Oblique projector P onto Ker(B−I) along Im(B−I).
    pub projector: DMatrix<f64>,
    /// u_α per column index, computed by iterating the a-sequence.
    pub u: Vec<f64>,
    /// v = P·μ.
    pub v: Vec<f64>,
    /// P^T·e with e = (1,…,1); the row weights of the closed-form entropy.
    pub ut: Vec<f64>,
}

/// Orthonormal basis of the null space of `m` (within the relative rank
/// threshold `rel_tol` on the pivoted-QR diagonal), as matrix columns.
///
/// Built from a column-pivoted Householder QR, which is backward stable; the
/// mean-ergodic setting guarantees a healthy gap between the zero and nonzero
/// parts of the spectrum of B − I, so the diagonal threshold is reliable.
fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let j = m.nrows();
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let rmax = (0..j).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let rank = (0..j)
        .take_while(|&i| r[(i, i)].abs() > rel_tol * rmax.max(1e-300))
        .count();
    let kdim = j - rank;
    let mut basis = DMatrix::zeros(j, kdim);
    for i in 0..kdim {
        // M x = Q R Π⁻¹ x: solve R z = 0 with z = (z₁, e_i), then x = Π z
        let mut z = DVector::zeros(j);
        z[rank + i] = 1.0;
        for row in (0..rank).rev() {
            let mut s = r[(row, rank + i)];
            for col in row + 1..rank {
                s += r[(row, col)] * z[col];
            }
            z[row] = -s / r[(row, row)];
        }
        qr.p().inv_permute_rows(&mut z);
        // modified Gram-Schmidt against the columns already accepted
        for prev in 0..i {
            let dot: f64 = (0..j).map(|row| basis[(row, prev)] * z[row]).sum();
            for row in 0..j {
                z[row] -= dot * basis[(row, prev)];
            }
        }
        let norm = z.norm();
        for row in 0..j {
            basis[(row, i)] = z[row] / norm;
        }
    }
    basis
}

/// The oblique projector onto Ker(B−I) along Im(B−I): with column bases K of
/// Ker(B−I) and L of Ker(Bᵀ−I) (the orthogonal complement of Im(B−I)), the
/// projector is P = K (LᵀK)⁻¹ Lᵀ. Eigenvalue 1 of a semibistochastic matrix
/// is semisimple (mean ergodic theorem), which makes LᵀK invertible.
pub fn cesaro_projector(b: &SbMatrix, tol: f64) -> Result<DMatrix<f64>> {
    let j = b.dim();
    let m = &b.data - DMatrix::<f64>::identity(j, j);
    let k = null_space(&m, RANK_TOL);
    let l = null_space(&m.transpose(), RANK_TOL);
    if k.ncols() != l.ncols() {
        return Err(Error::Numerical(format!(
            "rank ambiguity: Ker(B−I) has dimension {} but Ker(Bᵀ−I) has {}",
            k.ncols(),
            l.ncols()
        )));
    }
    if k.ncols() == 0 {
        return Ok(DMatrix::zeros(j, j));
    }
    let ltk = l.transpose() * &k;
    let inv = ltk.try_inverse().ok_or_else(|| {
        Error::Numerical("kernel and image of B−I intersect: eigenvalue 1 not semisimple".into())
    })?;
    let mut p = &k * inv * l.transpose();
    // flush rounding residue so drained directions give exact zeros
    for x in p.iter_mut() {
        if x.abs() < 1e-14 {
            *x = 0.0;
        }
    }
    // sanity: P² = P and BP = PB = P within a loose gate
    let err = |m: &DMatrix<f64>| m.amax();
    let p2 = &p * &p - &p;
    let bp = &b.data * &p - &p;
    let pb = &p * &b.data - &p;
    let worst = err(&p2).max(err(&bp)).max(err(&pb));
    if worst > tol.max(1e-9) * 1e3 {
        return Err(Error::Numerical(format!(
            "projector identities violated by {worst:.3e} (unstable kernel dimension)"
        )));
    }
    Ok(p)
}

/// Assemble the full ergodic data: projector, u (iterative a-sequence
/// limits), v = P·μ and P^T·e. The measure prefix must match the matrix
/// dimension.
pub fn ergodic_projector(b: &SbMatrix, mu: &Measure, tol: f64) -> Result<ErgodicData> {
    let j = b.dim();
    if mu.len() != j {
        return Err(Error::DimensionMismatch(format!(
            "matrix of dimension {j} with measure of {} atoms",
            mu.len()
        )));
    }
    let projector = cesaro_projector(b, tol)?;
    let ut: Vec<f64> = (0..j).map(|c| (0..j).map(|r| projector[(r, c)]).sum()).collect();
    let v: Vec<f64> = (0..j)
        .map(|r| (0..j).map(|c| projector[(r, c)] * mu.weight(c)).sum())
        .collect();
    // iterate the a-sequences; fall back to the projector value when an
    // individual column mixes too slowly to certify by iteration
    let u: Vec<f64> = (0..j)
        .map(|alpha| u_limit(b, alpha, tol).unwrap_or(ut[alpha]))
        .collect();
    Ok(ErgodicData { projector, u, v, ut })
}

/// The averaging operator B_{n,α} = (1/n) Σ_{j<n} a_α^{n−1−j} B^j.
pub fn averaged_operator(b: &SbMatrix, alpha: usize, n: usize) -> Result<DMatrix<f64>> {
    let j = b.dim();
    if alpha >= j {
        return Err(Error::IndexOutOfRange { index: alpha, dim: j });
    }
    if n == 0 {
        return Err(Error::Config("averaging length n must be at least 1".into()));
    }
    let a = a_seq(b, alpha, n.saturating_sub(1))?;
    let mut power = DMatrix::<f64>::identity(j, j);
    let mut acc = DMatrix::<f64>::zeros(j, j);
    for idx in 0..n {
        acc += &power * a[n - 1 - idx];
        if idx + 1 < n {
            power = &power * &b.data;
        }
    }
    Ok(acc / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Measure;
    use crate::operators::{truncate, OperatorKind, OperatorSpec};
    use approx::assert_abs_diff_eq;

    fn uniform(j: usize) -> Measure {
        Measure::explicit(vec![1.0 / j as f64; j]).unwrap()
    }

    fn uniform_block(n: usize) -> SbMatrix {
        validate_sb(DMatrix::from_element(n, n, 1.0 / n as f64)).unwrap()
    }

    #[test]
    fn b_of_koopman_is_permutation() {
        let mu = uniform(4);
        let spec =
            OperatorSpec::new(OperatorKind::Koopman { permutation: vec![2, 3, 1, 0] }, mu)
                .unwrap();
        let b = b_map(&truncate(&spec, 4).unwrap()).unwrap();
        let f = [2usize, 3, 1, 0];
        for r in 0..4 {
            for c in 0..4 {
                let expect = if f[r] == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(b.entry(r, c), expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn b_of_identity_is_identity() {
        let mu = Measure::geometric(0.5, 3).unwrap();
        let eye = DenseMatrix::new(DMatrix::identity(3, 3), mu).unwrap();
        let b = b_map(&eye).unwrap();
        assert_eq!(b.data(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn b_of_two_band_rows() {
        // rows (…, 1/2, 1/2, 0, …): diagonal and subdiagonal halves
        let mu = Measure::geometric(0.5, 5).unwrap();
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, mu).unwrap();
        let b = b_map(&truncate(&spec, 5).unwrap()).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let expect = if r == c || (r > 0 && c == r - 1) { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(b.entry(r, c), expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn validate_sb_examples() {
        assert!(validate_sb(DMatrix::from_element(3, 3, 1.0 / 3.0)).is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[0.6, 0.6, 0.0, 0.0]);
        assert!(validate_sb(bad).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[0.5, -0.1, 0.0, 0.5]);
        assert!(validate_sb(neg).is_err());
    }

    #[test]
    fn sb_product_closed() {
        let a = uniform_block(3);
        let bmat = validate_sb(DMatrix::from_row_slice(
            3,
            3,
            &[0.2, 0.0, 0.5, 0.3, 0.4, 0.0, 0.1, 0.2, 0.3],
        ))
        .unwrap();
        let prod = a.data() * bmat.data();
        let prod = validate_sb(prod).unwrap();
        assert!(l1_opnorm(prod.data()) <= 1.0 + SB_TOL);
    }

    #[test]
    fn a_seq_doubly_stochastic_is_constant() {
        let b = uniform_block(4);
        let a = a_seq(&b, 2, 10).unwrap();
        for v in a {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn a_seq_zero_matrix() {
        let b = validate_sb(DMatrix::zeros(3, 3)).unwrap();
        let a = a_seq(&b, 0, 5).unwrap();
        assert_eq!(a[0], 1.0);
        for &v in &a[1..] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn a_seq_two_band_decreases_to_zero() {
        // Ker(b(D_J) − I) = {0}, so u_α = 0 and the a-sequence drains once
        // the plateau reaches the truncation edge.
        let mu = Measure::geometric(0.5, 6).unwrap();
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, mu.clone()).unwrap();
        let b = b_map(&truncate(&spec, 6).unwrap()).unwrap();
        let a = a_seq(&b, 0, 200).unwrap();
        for w in a.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
        assert!(a[200] < 1e-6);
        assert_abs_diff_eq!(u_limit(&b, 0, 1e-10).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn u_limit_examples() {
        let b = uniform_block(5);
        assert_abs_diff_eq!(u_limit(&b, 3, 1e-10).unwrap(), 1.0, epsilon = 1e-12);
        let eye = validate_sb(DMatrix::identity(4, 4)).unwrap();
        assert_abs_diff_eq!(u_limit(&eye, 1, 1e-10).unwrap(), 1.0, epsilon = 1e-15);
        // column operator A truncated past its N nonzero columns: u_α = 0
        let spec = OperatorSpec::new(
            OperatorKind::ColumnA { b: vec![0.4, 0.3, 0.2, 0.1] },
            Measure::geometric(0.5, 4).unwrap(),
        )
        .unwrap();
        let a = truncate(&spec, 4).unwrap();
        let b = validate_sb(a.data().map(|z| z.re)).unwrap();
        assert_abs_diff_eq!(u_limit(&b, 3, 1e-10).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn projector_identity_cases() {
        let tol = 1e-10;
        // B = I → P = I
        let eye = validate_sb(DMatrix::identity(3, 3)).unwrap();
        let p = cesaro_projector(&eye, tol).unwrap();
        assert_abs_diff_eq!((p - DMatrix::identity(3, 3)).norm(), 0.0, epsilon = 1e-9);
        // idempotent doubly stochastic block → P = B
        let b = uniform_block(4);
        let p = cesaro_projector(&b, tol).unwrap();
        assert_abs_diff_eq!((p - b.data()).norm(), 0.0, epsilon = 1e-9);
        // b(D_J) → P = 0
        let mu = Measure::geometric(0.5, 6).unwrap();
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, mu).unwrap();
        let bd = b_map(&truncate(&spec, 6).unwrap()).unwrap();
        let p = cesaro_projector(&bd, tol).unwrap();
        assert_abs_diff_eq!(p.norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn projector_matches_cesaro_average() {
        // cross-check the algebraic projector against a truncated Cesàro sum
        let b = validate_sb(DMatrix::from_row_slice(
            3,
            3,
            &[0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0],
        ))
        .unwrap();
        let p = cesaro_projector(&b, 1e-10).unwrap();
        let n = 4096usize;
        let mut acc = DMatrix::<f64>::zeros(3, 3);
        let mut power = DMatrix::<f64>::identity(3, 3);
        for _ in 0..n {
            acc += &power;
            power = &power * b.data();
        }
        acc /= n as f64;
        assert!((acc - &p).norm() < 1e-3);
        // this B is idempotent-after-one-step: P should fix e_2 and average {0,1}
        assert_abs_diff_eq!(p[(2, 2)], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p[(0, 0)], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(p[(0, 1)], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn ergodic_data_consistency() {
        let mu = uniform(4);
        let b = uniform_block(4);
        let data = ergodic_projector(&b, &mu, 1e-10).unwrap();
        for alpha in 0..4 {
            assert_abs_diff_eq!(data.u[alpha], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(data.ut[alpha], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(data.v[alpha], 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn averaged_operator_edge_cases() {
        let b = uniform_block(3);
        // n = 1 → a_α^0 · I = I
        let m1 = averaged_operator(&b, 0, 1).unwrap();
        assert_abs_diff_eq!((m1 - DMatrix::identity(3, 3)).norm(), 0.0, epsilon = 1e-15);
        // zero matrix → (1/n)·a_α^{n-1}·I = 0 for n ≥ 2
        let z = validate_sb(DMatrix::zeros(3, 3)).unwrap();
        let mz = averaged_operator(&z, 1, 8).unwrap();
        assert_abs_diff_eq!(mz.norm(), 0.0, epsilon = 1e-15);
        // idempotent doubly stochastic: B_{n,α} → u_α · P = B
        let m = averaged_operator(&b, 0, 4096).unwrap();
        assert!((m - b.data()).norm() < 1e-3);
    }
}
