//! Operator entropy: path-weight enumeration over partitions, the exact
//! finite-dimensional closed form, truncation limits, invariances and the
//! zero-entropy classifier.
//!
//! For a partition χ = {X_0,…,X_K} and a block path σ: {0..n} → {0..K} the
//! path weight is
//!   I_U(G_σ) = Σ_{j_0..j_n} B_{j_n j_{n−1}} ⋯ B_{j_1 j_0} μ_{j_0}
//! restricted to j_k ∈ X_{σ(k)}, where B_{jk} = (μ_j/μ_k)|U_{jk}|². The
//! partition entropy is 𝔥(U,χ,n) = −Σ_σ I log I, its n-rate recovers the
//! entropy of the operator, and in finite dimension the rate collapses to
//!   𝔥(U) = −Σ_{j,k} (Pᵀe)_j · B_{jk} · (Pμ)_k · log B_{jk}
//! with P the Cesàro projector of B. The truncation sequence 𝔥(U_J) is
//! nondecreasing and its limit 𝔍(U) may differ from 𝔥(U).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::mu_norm::{mu_norm_sq, Partition};
use crate::operators::{truncate, DenseMatrix, OperatorSpec};
use crate::stochastic::{b_map, b_weights, cesaro_projector, ergodic_projector, validate_sb, SbMatrix};

/// Default node budget for the dynamic-programming path enumeration.
pub const DEFAULT_DP_BUDGET: u64 = 10_000_000;

/// Default path budget for the 𝔥₁ enumeration (true matrix product per path).
pub const DEFAULT_H1_BUDGET: u64 = 100_000;

/// Default growth threshold for the 𝔍 divergence flag.
pub const DEFAULT_DIVERGENCE_EPS: f64 = 1e-3;

/// x·log x with the 0·log 0 := 0 convention.
fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Path weights I_U(G_σ) keyed by the block path σ (only paths of positive
/// weight are stored).
#[derive(Clone, Debug, Default)]
pub struct PathWeightTable {
    table: BTreeMap<Vec<usize>, f64>,
}

impl PathWeightTable {
    /// Weight of a specific block path, 0 when absent.
    pub fn get(&self, sigma: &[usize]) -> f64 {
        self.table.get(sigma).copied().unwrap_or(0.0)
    }

    /// All stored (σ, I) pairs in lexicographic σ order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.table.iter().map(|(k, &v)| (k, v))
    }

    /// Number of surviving paths.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    /// True when no path survives.
    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Total mass Σ_σ I_U(G_σ) (≤ 1 for contractions with full partitions).
    pub fn mass(&self) -> f64 {
        self.table.values().sum()
    }
}

/// Depth-first propagation of masked μ-weighted vectors through the
/// b-weight matrix; every explored node counts against the budget, and
/// branches whose vector is exactly zero are pruned.
fn dfs_block_paths(
    bw: &DMatrix<f64>,
    mu: &Measure,
    chi: &Partition,
    n: usize,
    budget: u64,
    visit: &mut impl FnMut(&[usize], f64),
) -> Result<()> {
    let nblocks = chi.num_blocks();
    let blocks = chi.blocks();
    let mut nodes: u64 = 0;
    let mut path: Vec<usize> = Vec::with_capacity(n + 1);

    // stack of vectors indexed by depth to avoid reallocation
    #[allow(clippy::too_many_arguments)]
    fn rec(
        bw: &DMatrix<f64>,
        blocks: &[Vec<usize>],
        nblocks: usize,
        n: usize,
        budget: u64,
        nodes: &mut u64,
        path: &mut Vec<usize>,
        v: &[f64],
        visit: &mut impl FnMut(&[usize], f64),
    ) -> Result<()> {
        if path.len() == n + 1 {
            visit(path, v.iter().sum());
            return Ok(());
        }
        let dim = bw.nrows();
        // propagate once, then mask per candidate block
        let mut w = vec![0.0f64; dim];
        for (c, &vc) in v.iter().enumerate() {
            if vc != 0.0 {
                for r in 0..dim {
                    let b = bw[(r, c)];
                    if b != 0.0 {
                        w[r] += b * vc;
                    }
                }
            }
        }
        for b in 0..nblocks {
            let mut masked = vec![0.0f64; dim];
            let mut nonzero = false;
            for &i in &blocks[b] {
                if w[i] != 0.0 {
                    masked[i] = w[i];
                    nonzero = true;
                }
            }
            if !nonzero {
                continue; // pruned branches are free; only live nodes are charged
            }
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::BudgetExceeded { needed: u128::from(*nodes), budget });
            }
            path.push(b);
            rec(bw, blocks, nblocks, n, budget, nodes, path, &masked, visit)?;
            path.pop();
        }
        Ok(())
    }

    let dim = bw.nrows();
    for b0 in 0..nblocks {
        let mut v0 = vec![0.0f64; dim];
        for &i in &blocks[b0] {
            v0[i] = mu.weight(i);
        }
        nodes += 1;
        if nodes > budget {
            return Err(Error::BudgetExceeded { needed: u128::from(nodes), budget });
        }
        path.push(b0);
        rec(bw, blocks, nblocks, n, budget, &mut nodes, &mut path, &v0, visit)?;
        path.pop();
    }
    Ok(())
}

fn check_partition(u: &DenseMatrix, chi: &Partition, n: usize) -> Result<()> {
    if chi.dim() != u.dim() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} indices against dimension {}",
            chi.dim(),
            u.dim()
        )));
    }
    if n == 0 {
        return Err(Error::Config("path length n must be at least 1".into()));
    }
    Ok(())
}

/// Path weights by dynamic programming over block-masked transfer vectors.
/// The budget (default [`DEFAULT_DP_BUDGET`]) is charged per explored node of
/// the block-path tree; zero-weight branches are pruned before being charged
/// further.
pub fn path_weights(
    u: &DenseMatrix,
    chi: &Partition,
    n: usize,
    budget: u64,
) -> Result<PathWeightTable> {
    check_partition(u, chi, n)?;
    let bw = b_weights(u);
    let mut table = PathWeightTable::default();
    dfs_block_paths(&bw, u.measure(), chi, n, budget, &mut |sigma, i| {
        if i > 0.0 {
            table.table.insert(sigma.to_vec(), i);
        }
    })?;
    Ok(table)
}

/// Literal path enumeration straight from the defining sum — the reference
/// oracle for [`path_weights`]. Enumerates all J^{n+1} index paths, so the
/// upfront budget check rejects anything beyond toy sizes.
pub fn literal_path_weights(
    u: &DenseMatrix,
    chi: &Partition,
    n: usize,
    budget: u64,
) -> Result<PathWeightTable> {
    check_partition(u, chi, n)?;
    let dim = u.dim() as u128;
    let total = dim.checked_pow(n as u32 + 1).unwrap_or(u128::MAX);
    if total > u128::from(budget) {
        return Err(Error::BudgetExceeded { needed: total, budget });
    }
    let bw = b_weights(u);
    let block_of = chi.block_of();
    let mut table = PathWeightTable::default();
    let j = u.dim();
    let mut idx = vec![0usize; n + 1];
    loop {
        // weight of the index path idx[0] → idx[1] → … → idx[n]
        let mut w = u.measure().weight(idx[0]);
        for step in 1..=n {
            w *= bw[(idx[step], idx[step - 1])];
            if w == 0.0 {
                break;
            }
        }
        if w > 0.0 {
            let sigma: Vec<usize> = idx.iter().map(|&i| block_of[i]).collect();
            *table.table.entry(sigma).or_insert(0.0) += w;
        }
        // odometer increment
        let mut pos = 0usize;
        loop {
            idx[pos] += 1;
            if idx[pos] < j {
                break;
            }
            idx[pos] = 0;
            pos += 1;
            if pos > n {
                return Ok(table);
            }
        }
    }
}

/// 𝔥(U,χ,n) = −Σ_σ I_U(G_σ) log I_U(G_σ) via the same pruned DFS as
/// [`path_weights`], without materializing the table.
pub fn partition_entropy(u: &DenseMatrix, chi: &Partition, n: usize, budget: u64) -> Result<f64> {
    check_partition(u, chi, n)?;
    let bw = b_weights(u);
    let mut acc = 0.0;
    dfs_block_paths(&bw, u.measure(), chi, n, budget, &mut |_, i| {
        acc -= xlogx(i);
    })?;
    Ok(acc)
}

/// 𝔥₁(U,χ,n) = −Σ_σ ‖𝔛_σ‖²_μ log ‖𝔛_σ‖²_μ with 𝔛_σ = 1̂_{X_{σ(n)}} U ⋯ U
/// 1̂_{X_{σ(0)}}. This genuinely multiplies a masked matrix per path, so the
/// upfront budget (default [`DEFAULT_H1_BUDGET`]) bounds |χ|^{n+1}.
pub fn h1_partition_entropy(
    u: &DenseMatrix,
    chi: &Partition,
    n: usize,
    budget: u64,
) -> Result<f64> {
    check_partition(u, chi, n)?;
    let paths = (chi.num_blocks() as u128)
        .checked_pow(n as u32 + 1)
        .unwrap_or(u128::MAX);
    if paths > u128::from(budget) {
        return Err(Error::BudgetExceeded { needed: paths, budget });
    }
    let j = u.dim();
    let blocks = chi.blocks();
    let mask_rows = |m: &DMatrix<Complex64>, block: &[usize]| -> DMatrix<Complex64> {
        let mut out = DMatrix::from_element(j, j, Complex64::new(0.0, 0.0));
        for &r in block {
            for c in 0..j {
                out[(r, c)] = m[(r, c)];
            }
        }
        out
    };

    let mut acc = 0.0;
    // DFS over σ; the node at depth d carries 𝔛 = 1̂_{X_{σ(d)}} U ⋯ U 1̂_{X_{σ(0)}}
    let mut stack: Vec<(usize, DMatrix<Complex64>)> = Vec::new();
    for b0 in (0..blocks.len()).rev() {
        let mut init = DMatrix::from_element(j, j, Complex64::new(0.0, 0.0));
        for &c in &blocks[b0] {
            init[(c, c)] = Complex64::new(1.0, 0.0);
        }
        stack.push((0, init));
    }
    while let Some((depth, m)) = stack.pop() {
        if m.iter().all(|z| z.norm_sqr() == 0.0) {
            continue; // all deeper σ give ‖𝔛_σ‖ = 0, contributing nothing
        }
        if depth == n {
            let dm = DenseMatrix::new(m, u.measure().clone())?;
            acc -= xlogx(mu_norm_sq(&dm));
            continue;
        }
        let advanced = u.data() * &m;
        for b in (0..blocks.len()).rev() {
            stack.push((depth + 1, mask_rows(&advanced, &blocks[b])));
        }
    }
    Ok(acc)
}

/// How an [`EntropyReport`] value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactTheorem,
    PartitionRate,
    H1Rate,
    TruncationLimit,
}

/// Convergence metadata attached to entropy results.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    /// Whether a reported series was nondecreasing (truncation limits).
    pub monotone: bool,
    /// Whether the truncation series kept growing through its last doublings.
    pub divergent: bool,
    /// Whether the estimate is considered converged.
    pub converged: bool,
    /// Free-form notes (residuals, fallbacks).
    pub notes: Vec<String>,
}

/// An entropy value (nats) with its provenance and per-step trace.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    /// The entropy in nats (for divergent truncation series: the last finite
    /// partial value; the divergence flag marks 𝔍 = ∞).
    pub value: f64,
    /// Computation route.
    pub method: Method,
    /// (n, 𝔥(U,χ,n)) or (J, 𝔥(U_J)) pairs backing the value.
    pub trace: Vec<(usize, f64)>,
    /// Convergence flags.
    pub diagnostics: Diagnostics,
}

/// Exact entropy of a finite-dimensional operator: compute B = b(U), its
/// Cesàro projector, and evaluate the closed form.
pub fn exact_entropy(u: &DenseMatrix) -> Result<EntropyReport> {
    let b = b_map(u)?;
    exact_entropy_sb(&b, u.measure())
}

/// Exact entropy reading a semibistochastic matrix directly:
/// 𝔥 = −Σ_{j,k} (Pᵀe)_j B_{jk} (Pμ)_k log B_{jk}.
pub fn exact_entropy_sb(b: &SbMatrix, mu: &Measure) -> Result<EntropyReport> {
    let value = exact_entropy_sb_value(b, mu)?;
    Ok(EntropyReport {
        value,
        method: Method::ExactTheorem,
        trace: Vec::new(),
        diagnostics: Diagnostics { monotone: true, divergent: false, converged: true, notes: Vec::new() },
    })
}

fn exact_entropy_sb_value(b: &SbMatrix, mu: &Measure) -> Result<f64> {
    let data = ergodic_projector(b, mu, 1e-10)?;
    let j = b.dim();
    let mut acc = 0.0;
    for r in 0..j {
        if data.ut[r] == 0.0 {
            continue;
        }
        for c in 0..j {
            let bjk = b.entry(r, c);
            if bjk > 0.0 {
                acc -= data.ut[r] * bjk * data.v[c] * bjk.ln();
            }
        }
    }
    // the closed form is nonnegative up to rounding
    Ok(if acc < 0.0 && acc > -1e-10 { 0.0 } else { acc })
}

/// Materialize the J-th truncation of a spec as a semibistochastic matrix:
/// directly for the matrix-native families (A, B, B_α), through b(·) for
/// operator families.
pub fn sb_truncation(spec: &OperatorSpec, j: usize) -> Result<SbMatrix> {
    let m = truncate(spec, j)?;
    if spec.is_sb_native() {
        validate_sb(m.data().map(|z| z.re))
    } else {
        b_map(&m)
    }
}

/// The nondecreasing truncation series 𝔥(U_J), J = 1..=jmax, with the
/// divergence flag raised when each of the last three doublings of J grows
/// the value by more than `eps`.
pub fn truncation_entropy_series(
    spec: &OperatorSpec,
    jmax: usize,
    eps: f64,
) -> Result<EntropyReport> {
    if jmax == 0 {
        return Err(Error::Config("Jmax must be at least 1".into()));
    }
    let series: Vec<(usize, f64)> = (1..=jmax)
        .map(|j| {
            let b = sb_truncation(spec, j)?;
            Ok((j, exact_entropy_sb_value(&b, &spec.measure().prefix(j)?)?))
        })
        .collect::<Result<_>>()?;
    Ok(series_report(series, eps))
}

/// Assemble a truncation report (monotonicity + divergence flags) from a
/// computed (J, 𝔥(U_J)) series.
pub fn series_report(series: Vec<(usize, f64)>, eps: f64) -> EntropyReport {
    let monotone = series.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
    let jmax = series.last().map(|&(j, _)| j).unwrap_or(0);
    let at = |j: usize| {
        series
            .iter()
            .rev()
            .find(|&&(jj, _)| jj <= j)
            .map(|&(_, h)| h)
    };
    let divergent = if jmax >= 8 {
        let (a, b, c, d) = (at(jmax / 8), at(jmax / 4), at(jmax / 2), at(jmax));
        match (a, b, c, d) {
            (Some(a), Some(b), Some(c), Some(d)) => b - a > eps && c - b > eps && d - c > eps,
            _ => false,
        }
    } else {
        false
    };
    let value = series.last().map(|&(_, h)| h).unwrap_or(0.0);
    EntropyReport {
        value,
        method: Method::TruncationLimit,
        trace: series,
        diagnostics: Diagnostics { monotone, divergent, converged: !divergent, notes: Vec::new() },
    }
}

/// Partial sums of the block-family entropy with blocks of size 2^k carrying
/// the conditional masses: 𝔥 after K blocks = Σ_{k≤K} log(2^k)·m_k. This is
/// the closed form of the theorem for idempotent block matrices (P = B), used
/// where the matrix dimension A_K = 2^{K+1}−2 is far beyond materialization;
/// it is cross-checked against the matrix route at small K in the tests.
pub fn condit_block_entropy_series(kmax: u32, eps: f64) -> EntropyReport {
    let mut acc = 0.0;
    let mut series = Vec::with_capacity(kmax as usize);
    for k in 1..=kmax {
        acc += f64::from(k) * 2f64.ln() * Measure::condit1_block_mass(k);
        series.push((k as usize, acc));
    }
    series_report(series, eps)
}

/// Rate estimate 𝔥(U,χ) = lim (1/n)𝔥(U,χ,n), via the least-squares slope of
/// the series over its last ⌈nmax/2⌉ points (robust for series of the form
/// c·n + const).
pub fn entropy_rate(
    u: &DenseMatrix,
    chi: &Partition,
    nmax: usize,
    budget: u64,
) -> Result<EntropyReport> {
    if nmax < 2 {
        return Err(Error::Config("rate estimation needs nmax ≥ 2".into()));
    }
    let series: Vec<(usize, f64)> = (1..=nmax)
        .map(|n| Ok((n, partition_entropy(u, chi, n, budget)?)))
        .collect::<Result<_>>()?;
    let m = nmax.div_ceil(2);
    let window = &series[series.len() - m..];
    let (slope, residual) = least_squares_slope(window);
    let converged = residual <= 0.01 * (1.0 + slope.abs());
    let mut notes = Vec::new();
    notes.push(format!("least-squares residual {residual:.3e} over final {m} points"));
    Ok(EntropyReport {
        value: slope,
        method: Method::PartitionRate,
        trace: series,
        diagnostics: Diagnostics { monotone: true, divergent: false, converged, notes },
    })
}

fn least_squares_slope(points: &[(usize, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let xbar = points.iter().map(|&(n, _)| n as f64).sum::<f64>() / m;
    let ybar = points.iter().map(|&(_, h)| h).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|&(n, _)| (n as f64 - xbar).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|&(n, h)| (n as f64 - xbar) * (h - ybar))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = ybar - slope * xbar;
    let residual = points
        .iter()
        .map(|&(n, h)| (h - slope * n as f64 - intercept).abs())
        .fold(0.0, f64::max);
    (slope, residual)
}

/// Zero-entropy test with witness: dead rows (columns of P vanishing) and
/// dead columns (rows of P vanishing) are exempt; every remaining entry must
/// lie in {0, 1} within 1e−9. Returns the first violating entry otherwise.
pub fn is_zero_entropy(b: &SbMatrix) -> Result<(bool, Option<(usize, usize)>)> {
    let p = cesaro_projector(b, 1e-10)?;
    let j = b.dim();
    let live_row: Vec<bool> = (0..j)
        .map(|c| (0..j).map(|r| p[(r, c)].abs()).sum::<f64>() > 1e-8)
        .collect();
    let live_col: Vec<bool> = (0..j)
        .map(|r| (0..j).map(|c| p[(r, c)].abs()).sum::<f64>() > 1e-8)
        .collect();
    for (r, &lr) in live_row.iter().enumerate() {
        if !lr {
            continue;
        }
        for (c, &lc) in live_col.iter().enumerate() {
            if !lc {
                continue;
            }
            let e = b.entry(r, c);
            if e.abs() > 1e-9 && (e - 1.0).abs() > 1e-9 {
                return Ok((false, Some((r, c))));
            }
        }
    }
    Ok((true, None))
}

/// Entropy values under the two invariance transformations.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    /// 𝔥(U).
    pub h_base: f64,
    /// 𝔥(D₁ U D₂) for diagonal unitaries D₁, D₂.
    pub h_diag: f64,
    /// 𝔥(U_F⁻¹ U U_F) for an admissible permutation F.
    pub h_koopman: f64,
    /// Whether b(D₁UD₂) = b(U) held entrywise (1e−12).
    pub b_equal: bool,
}

/// Evaluate 𝔥 on U, D₁UD₂ and U_F⁻¹UU_F. D₁, D₂ must be unimodular
/// diagonals; F must be a bijection permuting atoms of equal measure.
pub fn invariance_suite(
    u: &DenseMatrix,
    d1: &[Complex64],
    d2: &[Complex64],
    f: &[usize],
) -> Result<InvarianceReport> {
    let j = u.dim();
    if d1.len() != j || d2.len() != j || f.len() != j {
        return Err(Error::DimensionMismatch("diagonals and permutation must have length J".into()));
    }
    for d in d1.iter().chain(d2) {
        if (d.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("diagonal factors must be unimodular".into()));
        }
    }
    let mut finv = vec![usize::MAX; j];
    for (idx, &fi) in f.iter().enumerate() {
        if fi >= j || finv[fi] != usize::MAX {
            return Err(Error::InadmissiblePermutation("image list is not a bijection".into()));
        }
        let (a, b) = (u.measure().weight(idx), u.measure().weight(fi));
        if (a - b).abs() > 1e-12 * a.max(b) {
            return Err(Error::InadmissiblePermutation(
                "F moves mass between atoms of unequal measure".into(),
            ));
        }
        finv[fi] = idx;
    }

    let h_base = exact_entropy(u)?.value;

    let mut sandwiched = u.data().clone();
    for r in 0..j {
        for c in 0..j {
            sandwiched[(r, c)] = d1[r] * sandwiched[(r, c)] * d2[c];
        }
    }
    let sandwiched = DenseMatrix::new(sandwiched, u.measure().clone())?;
    let b_equal = {
        let ba = b_weights(u);
        let bb = b_weights(&sandwiched);
        (ba - bb).iter().all(|x| x.abs() <= 1e-12)
    };
    let h_diag = exact_entropy(&sandwiched)?.value;

    // (U_F)_{jk} = δ_{F(j)k}: conjugation permutes coordinates.
    // (U_F⁻¹ U U_F)_{jk} = U_{F(j) F(k)}.
    let conj = DMatrix::from_fn(j, j, |r, c| u.entry(f[r], f[c]));
    let conj = DenseMatrix::new(conj, u.measure().clone())?;
    let h_koopman = exact_entropy(&conj)?.value;

    Ok(InvarianceReport { h_base, h_diag, h_koopman, b_equal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorKind;
    use approx::assert_abs_diff_eq;

    fn cx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn geo(j: usize) -> Measure {
        Measure::geometric(0.5, j).unwrap()
    }

    fn uniform(j: usize) -> Measure {
        Measure::explicit(vec![1.0 / j as f64; j]).unwrap()
    }

    #[test]
    fn path_weights_diagonal_constant_paths() {
        let j = 4;
        let d: Vec<Complex64> = vec![cx(0.9), cx(0.5), cx(0.3), cx(0.8)];
        let spec = OperatorSpec::new(OperatorKind::Diagonal { entries: d.clone() }, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::finest(j);
        let n = 3;
        let table = path_weights(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
        assert_eq!(table.len(), j);
        for idx in 0..j {
            let sigma = vec![idx; n + 1];
            let expect = d[idx].norm_sqr().powi(n as i32) * u.measure().weight(idx);
            assert_abs_diff_eq!(table.get(&sigma), expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn path_weights_koopman_orbit_paths() {
        let j = 4;
        let f = vec![1usize, 2, 3, 0];
        let spec =
            OperatorSpec::new(OperatorKind::Koopman { permutation: f.clone() }, uniform(j))
                .unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::finest(j);
        let n = 3;
        let table = path_weights(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
        assert_eq!(table.len(), j);
        // single surviving path per start: σ(k) = F^{-k}(σ(0)) read forward
        // means σ(k+1) = F(σ(k)) fails; the path steps through preimages.
        let mut finv = vec![0usize; j];
        for (a, &b) in f.iter().enumerate() {
            finv[b] = a;
        }
        for start in 0..j {
            let mut sigma = vec![start];
            for _ in 0..n {
                sigma.push(finv[*sigma.last().unwrap()]);
            }
            assert_abs_diff_eq!(table.get(&sigma), 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn path_weights_two_band_doubling() {
        let j = 20;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::finest(j);
        let n = 5;
        let table = path_weights(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
        // paths step j → j or j → j+1 with weight 1/2 each; away from the
        // truncation edge every start index spawns 2^n paths of weight
        // (1/2)^n μ_{σ(0)}
        let sigma = vec![3usize; n + 1]; // constant path from index 3
        assert_abs_diff_eq!(
            table.get(&sigma),
            0.5f64.powi(n as i32) * u.measure().weight(3),
            epsilon = 1e-15
        );
        let stair: Vec<usize> = (3..3 + n + 1).collect(); // strictly ascending path
        assert_abs_diff_eq!(
            table.get(&stair),
            0.5f64.powi(n as i32) * u.measure().weight(3),
            epsilon = 1e-15
        );
        assert!(table.mass() <= 1.0 + 1e-9);
    }

    #[test]
    fn dp_matches_literal_enumeration() {
        let j = 5;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::new(vec![vec![0, 2], vec![1, 4], vec![3]], j).unwrap();
        for n in 1..=4 {
            let dp = path_weights(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
            let lit = literal_path_weights(&u, &chi, n, 100_000).unwrap();
            for (sigma, w) in lit.iter() {
                assert_abs_diff_eq!(dp.get(sigma), w, epsilon = 1e-12);
            }
            assert_eq!(dp.len(), lit.len());
        }
    }

    #[test]
    fn budget_enforced() {
        let j = 6;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::finest(j);
        assert!(matches!(
            path_weights(&u, &chi, 5, 10),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            literal_path_weights(&u, &chi, 5, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn two_band_partition_entropy_linear() {
        // 𝔥(D, χ_⊙, n) = n·log 2 + S(μ) up to the truncation tail.
        let j = 40;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::finest(j);
        for n in [1usize, 4, 8] {
            let h = partition_entropy(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
            let target = n as f64 * 2f64.ln() + 2.0 * 2f64.ln();
            assert_abs_diff_eq!(h, target, epsilon = 1e-6);
        }
    }

    #[test]
    fn diagonal_unitary_entropy_constant() {
        let j = 5;
        let d: Vec<Complex64> = (0..j)
            .map(|i| Complex64::from_polar(1.0, 0.7 * i as f64))
            .collect();
        let spec = OperatorSpec::new(OperatorKind::Diagonal { entries: d }, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::finest(j);
        let h1 = partition_entropy(&u, &chi, 1, DEFAULT_DP_BUDGET).unwrap();
        for n in 2..=5 {
            let hn = partition_entropy(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
            assert_abs_diff_eq!(hn, h1, epsilon = 1e-10);
        }
        let rate = entropy_rate(&u, &chi, 6, DEFAULT_DP_BUDGET).unwrap();
        assert_abs_diff_eq!(rate.value, 0.0, epsilon = 1e-10);
        assert!(rate.diagnostics.converged);
    }

    #[test]
    fn refinement_monotone_example() {
        let j = 6;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let coarse = Partition::new(vec![vec![0, 1, 2], vec![3, 4, 5]], j).unwrap();
        let fine = Partition::new(vec![vec![0, 1], vec![2], vec![3], vec![4, 5]], j).unwrap();
        for n in 1..=4 {
            let hc = partition_entropy(&u, &coarse, n, DEFAULT_DP_BUDGET).unwrap();
            let hf = partition_entropy(&u, &fine, n, DEFAULT_DP_BUDGET).unwrap();
            assert!(hc <= hf + 1e-9, "n={n}: coarse {hc} > fine {hf}");
        }
    }

    #[test]
    fn h1_equals_h_at_n1() {
        let j = 5;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        for chi in [
            Partition::finest(j),
            Partition::new(vec![vec![0, 1], vec![2, 3, 4]], j).unwrap(),
        ] {
            let a = partition_entropy(&u, &chi, 1, DEFAULT_DP_BUDGET).unwrap();
            let b = h1_partition_entropy(&u, &chi, 1, DEFAULT_H1_BUDGET).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn h1_equals_h_for_koopman() {
        let j = 6;
        let f = vec![1usize, 0, 3, 4, 2, 5];
        let spec =
            OperatorSpec::new(OperatorKind::Koopman { permutation: f }, uniform(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let chi = Partition::new(vec![vec![0, 1, 2], vec![3, 4], vec![5]], j).unwrap();
        for n in 1..=4 {
            let a = partition_entropy(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
            let b = h1_partition_entropy(&u, &chi, n, DEFAULT_H1_BUDGET).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_entropy_examples() {
        // permutation → 0
        let spec = OperatorSpec::new(
            OperatorKind::Koopman { permutation: vec![2, 0, 1, 4, 3] },
            uniform(5),
        )
        .unwrap();
        let h = exact_entropy(&truncate(&spec, 5).unwrap()).unwrap();
        assert_abs_diff_eq!(h.value, 0.0, epsilon = 1e-12);

        // uniform n-block → log n
        for n in [2usize, 3, 5] {
            let b = validate_sb(DMatrix::from_element(n, n, 1.0 / n as f64)).unwrap();
            let h = exact_entropy_sb(&b, &uniform(n)).unwrap();
            assert_abs_diff_eq!(h.value, (n as f64).ln(), epsilon = 1e-10);
        }

        // truncated two-band operator → 0 (P = 0)
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(8)).unwrap();
        let h = exact_entropy(&truncate(&spec, 8).unwrap()).unwrap();
        assert_abs_diff_eq!(h.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_entropy_sb_degenerate() {
        let z = validate_sb(DMatrix::zeros(3, 3)).unwrap();
        assert_abs_diff_eq!(exact_entropy_sb(&z, &uniform(3)).unwrap().value, 0.0, epsilon = 1e-15);
        let eye = validate_sb(DMatrix::identity(3, 3)).unwrap();
        assert_abs_diff_eq!(
            exact_entropy_sb(&eye, &uniform(3)).unwrap().value,
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn block_operator_entropy() {
        // blocks (2,2) with uniform μ on 4 atoms: 𝔥 = log 2
        let spec = OperatorSpec::new(OperatorKind::BlockBAlpha { sizes: vec![2, 2] }, uniform(4))
            .unwrap();
        let b = sb_truncation(&spec, 4).unwrap();
        let h = exact_entropy_sb(&b, &uniform(4)).unwrap();
        assert_abs_diff_eq!(h.value, 2f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn condit_block_series_frozen() {
        // closed form (C log2 / 2)·Σ_{k≤K}(k^{-1/2} + k^{-1}), frozen from an
        // independent oracle
        let r = condit_block_entropy_series(64, DEFAULT_DIVERGENCE_EPS);
        let at = |k: usize| r.trace.iter().find(|&&(kk, _)| kk == k).unwrap().1;
        assert_abs_diff_eq!(at(4), 0.79254168553358, epsilon = 1e-10);
        assert_abs_diff_eq!(at(16), 1.63541597856532, epsilon = 1e-10);
        assert_abs_diff_eq!(at(64), 3.14978143839000, epsilon = 1e-10);
        assert!(r.diagnostics.divergent);
        assert!(r.diagnostics.monotone);
    }

    #[test]
    fn condit_block_series_matches_matrix_route() {
        // matrix route at K = 4 (dimension 30)
        let k = 4u32;
        let dim = Measure::condit1_block_end(k);
        let mu = Measure::condit1(dim).unwrap();
        let spec =
            OperatorSpec::new(OperatorKind::BlockBAlpha { sizes: vec![] }, mu.clone()).unwrap();
        let b = sb_truncation(&spec, dim).unwrap();
        let h = exact_entropy_sb(&b, &mu).unwrap();
        assert_abs_diff_eq!(h.value, 0.79254168553358, epsilon = 1e-8);
    }

    #[test]
    fn truncation_series_examples() {
        // diagonal contraction: all zeros
        let d: Vec<Complex64> = (0..16).map(|i| cx(0.9 - 0.05 * i as f64)).collect();
        let spec = OperatorSpec::new(OperatorKind::Diagonal { entries: d }, geo(16)).unwrap();
        let r = truncation_entropy_series(&spec, 16, DEFAULT_DIVERGENCE_EPS).unwrap();
        assert!(r.diagnostics.monotone && !r.diagnostics.divergent);
        for &(_, h) in &r.trace {
            assert_abs_diff_eq!(h, 0.0, epsilon = 1e-10);
        }

        // two-band operator: identically zero although 𝔥(D) = log 2
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(32)).unwrap();
        let r = truncation_entropy_series(&spec, 32, DEFAULT_DIVERGENCE_EPS).unwrap();
        assert!(r.diagnostics.monotone && !r.diagnostics.divergent);
        for &(_, h) in &r.trace {
            assert_abs_diff_eq!(h, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rate_recovers_log2_for_two_band() {
        let j = 40;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let r = entropy_rate(&u, &Partition::finest(j), 8, DEFAULT_DP_BUDGET).unwrap();
        assert_abs_diff_eq!(r.value, 2f64.ln(), epsilon = 1e-6);
        assert!(r.diagnostics.converged);
    }

    #[test]
    fn classifier_examples() {
        // permutation matrix → zero entropy
        let mut perm = DMatrix::zeros(4, 4);
        for (r, c) in [(0usize, 2usize), (1, 0), (2, 1), (3, 3)] {
            perm[(r, c)] = 1.0;
        }
        let perm = validate_sb(perm).unwrap();
        let (zero, witness) = is_zero_entropy(&perm).unwrap();
        assert!(zero && witness.is_none());

        // uniform 2×2 block → positive entropy, witness (0,0)
        let b = validate_sb(DMatrix::from_element(2, 2, 0.5)).unwrap();
        let (zero, witness) = is_zero_entropy(&b).unwrap();
        assert!(!zero);
        assert_eq!(witness, Some((0, 0)));

        // b(D_J): every index dead (P = 0) → zero entropy despite the halves
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, geo(6)).unwrap();
        let bd = b_map(&truncate(&spec, 6).unwrap()).unwrap();
        let (zero, _) = is_zero_entropy(&bd).unwrap();
        assert!(zero);
    }

    #[test]
    fn invariance_trivial() {
        let j = 4;
        let spec = OperatorSpec::new(OperatorKind::TwoBandD, uniform(j)).unwrap();
        let u = truncate(&spec, j).unwrap();
        let ones = vec![cx(1.0); j];
        let id: Vec<usize> = (0..j).collect();
        let rep = invariance_suite(&u, &ones, &ones, &id).unwrap();
        assert_abs_diff_eq!(rep.h_base, rep.h_diag, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.h_base, rep.h_koopman, epsilon = 1e-12);
        assert!(rep.b_equal);
    }
}
