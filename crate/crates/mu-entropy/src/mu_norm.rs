//! The μ-norm of operators and the partition functional M_χ.
//!
//! For an atomic measure the μ-norm infimum over partitions is attained at
//! the finest partition and collapses to the explicit entry formula
//! ‖W‖²_μ = Σ_{j,k} μ_j |W_{jk}|² (weight on the output index). The
//! functional M_χ(W) = Σ_b μ(Y_b) ‖W 1̂_{Y_b}‖² over coarser partitions χ is
//! kept for the monotonicity and sandwich identities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::operators::DenseMatrix;

/// An ordered partition of {0..J−1} into disjoint nonempty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    dim: usize,
}

impl Partition {
    /// Validate disjointness, coverage of {0..dim−1} and nonemptiness.
    pub fn new(blocks: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        let mut seen = vec![false; dim];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= dim {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} outside 0..{dim}"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("index {i} repeated")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidPartition("blocks do not cover the index set".into()));
        }
        let mut blocks = blocks;
        for b in &mut blocks {
            b.sort_unstable();
        }
        Ok(Self { blocks, dim })
    }

    /// The finest partition χ_⊙ into singletons.
    pub fn finest(dim: usize) -> Self {
        Self { blocks: (0..dim).map(|i| vec![i]).collect(), dim }
    }

    /// The coarsest partition {whole set}.
    pub fn coarsest(dim: usize) -> Self {
        Self { blocks: vec![(0..dim).collect()], dim }
    }

    /// Blocks, each sorted ascending.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Dimension J of the underlying index set.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of blocks |χ|.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of each atom (lookup table).
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.dim];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }

    /// True when every block of `self` is contained in a block of `other`
    /// (self refines other).
    pub fn is_refinement_of(&self, other: &Partition) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let coarse = other.block_of();
        self.blocks
            .iter()
            .all(|block| block.iter().all(|&i| coarse[i] == coarse[block[0]]))
    }
}

/// ‖W‖²_μ = Σ_{j,k} μ_j |W_{jk}|² — the finest-partition value of M_χ, which
/// is the infimum over all partitions.
pub fn mu_norm_sq(w: &DenseMatrix) -> f64 {
    let j = w.dim();
    let mut acc = 0.0;
    for r in 0..j {
        let wr = w.measure().weight(r);
        for c in 0..j {
            acc += wr * w.entry(r, c).norm_sqr();
        }
    }
    acc
}

/// M_χ(W) = Σ_b μ(Y_b) ‖W 1̂_{Y_b}‖², with the block operator norms taken in
/// ℓ²(μ) (largest singular value after the diag(√μ) conjugation).
pub fn partition_functional(w: &DenseMatrix, chi: &Partition) -> Result<f64> {
    if chi.dim() != w.dim() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} indices applied to a {}×{} matrix",
            chi.dim(),
            w.dim(),
            w.dim()
        )));
    }
    let mut acc = 0.0;
    for block in chi.blocks() {
        let mass: f64 = block.iter().map(|&i| w.measure().weight(i)).sum();
        // W·1̂_Y keeps only the columns in Y.
        let mut masked = w.data().clone();
        let in_block: Vec<bool> = {
            let mut v = vec![false; w.dim()];
            for &i in block {
                v[i] = true;
            }
            v
        };
        for c in 0..w.dim() {
            if !in_block[c] {
                for r in 0..w.dim() {
                    masked[(r, c)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let masked = DenseMatrix::new(masked, w.measure().clone())?;
        let norm = masked.opnorm_mu();
        acc += mass * norm * norm;
    }
    Ok(acc)
}

/// ‖ĝ₁ W ĝ₂‖²_μ = Σ_{j,k} μ_j |g₁_j|² |W_{jk}|² |g₂_k|².
pub fn sandwiched_norm_sq(g1: &[Complex64], w: &DenseMatrix, g2: &[Complex64]) -> Result<f64> {
    let j = w.dim();
    if g1.len() != j || g2.len() != j {
        return Err(Error::DimensionMismatch(format!(
            "diagonal vectors of length {}/{} against dimension {j}",
            g1.len(),
            g2.len()
        )));
    }
    let mut acc = 0.0;
    for (r, g1r) in g1.iter().enumerate() {
        let a = w.measure().weight(r) * g1r.norm_sqr();
        if a == 0.0 {
            continue;
        }
        for (c, g2c) in g2.iter().enumerate() {
            acc += a * w.entry(r, c).norm_sqr() * g2c.norm_sqr();
        }
    }
    Ok(acc)
}

/// ‖ĝ₀ U_F ĝ₁ ⋯ U_F ĝ_n‖²_μ for a Koopman operator evaluated without forming
/// the product: Σ_j Π_m |(g_m)_{F^m(j)}|² · μ_{F^n(j)}.
///
/// `f` is the image list of the permutation on 0..J (must be a bijection
/// permuting atoms of equal measure); `gs` lists ĝ₀..ĝ_n.
pub fn koopman_product_norm_sq(f: &[usize], gs: &[Vec<Complex64>], mu: &Measure) -> Result<f64> {
    let j = mu.len();
    if f.len() != j {
        return Err(Error::InadmissiblePermutation(format!(
            "permutation covers {} indices, measure has {j}",
            f.len()
        )));
    }
    let mut seen = vec![false; j];
    for (idx, &fi) in f.iter().enumerate() {
        if fi >= j || seen[fi] {
            return Err(Error::InadmissiblePermutation("image list is not a bijection".into()));
        }
        seen[fi] = true;
        let (a, b) = (mu.weight(idx), mu.weight(fi));
        if (a - b).abs() > 1e-12 * a.max(b) {
            return Err(Error::InadmissiblePermutation(format!(
                "F moves mass between atoms of unequal measure ({idx}→{fi})"
            )));
        }
    }
    if gs.is_empty() {
        return Err(Error::DimensionMismatch("need at least one diagonal factor".into()));
    }
    for g in gs {
        if g.len() != j {
            return Err(Error::DimensionMismatch("diagonal factor of wrong length".into()));
        }
    }
    let mut acc = 0.0;
    for start in 0..j {
        let mut idx = start;
        let mut prod = 1.0;
        for g in gs {
            prod *= g[idx].norm_sqr();
            if prod == 0.0 {
                break;
            }
            idx = f[idx];
        }
        // after the loop idx = F^{n+1}(start); the weight sits at F^n(start),
        // but F preserves the measure along its orbits, so μ_{F^n(start)} =
        // μ_{start} and either index gives the same value.
        acc += prod * mu.weight(start);
    }
    Ok(acc)
}
