//! Property-based invariants: additivity of the μ-norm over partition pairs,
//! semibistochastic closure, a-sequence monotonicity, truncation nesting,
//! refinement monotonicity, and oracle equivalence of the two path
//! enumerations.

use mu_entropy::entropy::{
    exact_entropy_sb, h1_partition_entropy, literal_path_weights, partition_entropy, path_weights,
    DEFAULT_DP_BUDGET, DEFAULT_H1_BUDGET,
};
use mu_entropy::measure::Measure;
use mu_entropy::mu_norm::{mu_norm_sq, sandwiched_norm_sq, Partition};
use mu_entropy::operators::{truncate, DenseMatrix, OperatorKind, OperatorSpec};
use mu_entropy::stochastic::{a_seq, b_map, l1_opnorm, validate_sb};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

/// Dense contraction from raw entry data: scale the matrix to a target
/// ℓ²(μ)-norm strictly below 1.
fn contraction_from(entries: &[(f64, f64)], j: usize, mu: &Measure) -> DenseMatrix {
    let m = DMatrix::from_fn(j, j, |r, c| {
        let (re, im) = entries[r * j + c];
        Complex64::new(re, im)
    });
    let dm = DenseMatrix::new(m, mu.clone()).unwrap();
    let norm = dm.opnorm_mu().max(1e-9);
    let scaled = dm.data() * Complex64::new(0.9 / norm, 0.0);
    DenseMatrix::new(scaled, mu.clone()).unwrap()
}

/// Partition from a block-assignment vector (renumbered to drop empty blocks).
fn partition_from(assign: &[usize], j: usize) -> Partition {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut label_of: std::collections::BTreeMap<usize, usize> = Default::default();
    for (i, &a) in assign.iter().take(j).enumerate() {
        let next = blocks.len();
        let b = *label_of.entry(a).or_insert(next);
        if b == blocks.len() {
            blocks.push(Vec::new());
        }
        blocks[b].push(i);
    }
    Partition::new(blocks, j).unwrap()
}

fn uniform(j: usize) -> Measure {
    Measure::explicit(vec![1.0 / j as f64; j]).unwrap()
}

fn entry_vec(j: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), j * j)
}

fn assign_vec(j: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..j, j)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn munorm_two_sided_additivity(
        j in 2usize..=8,
        entries in entry_vec(8),
        arows in assign_vec(8),
        acols in assign_vec(8),
    ) {
        let mu = uniform(j);
        let w = contraction_from(&entries, j, &mu);
        let rows = partition_from(&arows, j);
        let cols = partition_from(&acols, j);
        let mut sum = 0.0;
        for bx in rows.blocks() {
            let gx: Vec<Complex64> = (0..j)
                .map(|i| Complex64::new(if bx.contains(&i) { 1.0 } else { 0.0 }, 0.0))
                .collect();
            for by in cols.blocks() {
                let gy: Vec<Complex64> = (0..j)
                    .map(|i| Complex64::new(if by.contains(&i) { 1.0 } else { 0.0 }, 0.0))
                    .collect();
                sum += sandwiched_norm_sq(&gx, &w, &gy).unwrap();
            }
        }
        prop_assert!((sum - mu_norm_sq(&w)).abs() < 1e-10);
    }

    #[test]
    fn b_map_closure_under_products(
        j in 2usize..=6,
        e1 in entry_vec(6),
        e2 in entry_vec(6),
    ) {
        let mu = uniform(j);
        let b1 = b_map(&contraction_from(&e1, j, &mu)).unwrap();
        let b2 = b_map(&contraction_from(&e2, j, &mu)).unwrap();
        let prod = validate_sb(b1.data() * b2.data()).unwrap();
        prop_assert!(l1_opnorm(prod.data()) <= 1.0 + 1e-12);
    }

    #[test]
    fn a_sequence_monotone_in_unit_interval(
        j in 2usize..=6,
        entries in entry_vec(6),
        alpha in 0usize..6,
    ) {
        let mu = uniform(j);
        let b = b_map(&contraction_from(&entries, j, &mu)).unwrap();
        let a = a_seq(&b, alpha % j, 32).unwrap();
        for w in a.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for v in a {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn truncations_are_nested(
        jsmall in 1usize..=10,
        alpha in proptest::collection::vec(0.0..0.2f64, 12),
    ) {
        let specs = [
            OperatorSpec::new(OperatorKind::TwoBandD, Measure::geometric(0.5, 12).unwrap())
                .unwrap(),
            OperatorSpec::new(
                OperatorKind::HankelB { alpha },
                Measure::geometric(0.5, 12).unwrap(),
            )
            .unwrap(),
        ];
        for spec in &specs {
            let small = truncate(spec, jsmall).unwrap();
            let big = truncate(spec, jsmall + 2).unwrap();
            for r in 0..jsmall {
                for c in 0..jsmall {
                    prop_assert_eq!(small.entry(r, c), big.entry(r, c));
                }
            }
        }
    }

    #[test]
    fn refinement_increases_partition_entropy(
        j in 3usize..=6,
        entries in entry_vec(6),
        assign in assign_vec(6),
        cut in 0usize..6,
        n in 1usize..=3,
    ) {
        let mu = uniform(j);
        let u = contraction_from(&entries, j, &mu);
        let coarse = partition_from(&assign.iter().map(|&a| a % 2).collect::<Vec<_>>(), j);
        // refine by splitting one block at `cut`
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for b in coarse.blocks() {
            if b.len() >= 2 {
                let pos = 1 + cut % (b.len() - 1);
                blocks.push(b[..pos].to_vec());
                blocks.push(b[pos..].to_vec());
            } else {
                blocks.push(b.clone());
            }
        }
        let fine = Partition::new(blocks, j).unwrap();
        let hc = partition_entropy(&u, &coarse, n, DEFAULT_DP_BUDGET).unwrap();
        let hf = partition_entropy(&u, &fine, n, DEFAULT_DP_BUDGET).unwrap();
        prop_assert!(hc <= hf + 1e-9);
    }

    #[test]
    fn dp_equals_literal_enumeration(
        j in 2usize..=4,
        entries in entry_vec(4),
        assign in assign_vec(4),
        n in 1usize..=3,
    ) {
        let mu = uniform(j);
        let u = contraction_from(&entries, j, &mu);
        let chi = partition_from(&assign, j);
        let dp = path_weights(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
        let lit = literal_path_weights(&u, &chi, n, 10_000).unwrap();
        for (sigma, w) in lit.iter() {
            prop_assert!((dp.get(sigma) - w).abs() < 1e-12);
        }
        prop_assert_eq!(dp.len(), lit.len());
    }

    #[test]
    fn h1_matches_h_at_first_step(
        j in 2usize..=5,
        entries in entry_vec(5),
        assign in assign_vec(5),
    ) {
        let mu = uniform(j);
        let u = contraction_from(&entries, j, &mu);
        let chi = partition_from(&assign, j);
        let a = partition_entropy(&u, &chi, 1, DEFAULT_DP_BUDGET).unwrap();
        let b = h1_partition_entropy(&u, &chi, 1, DEFAULT_H1_BUDGET).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}

/// Theorem vs enumeration: for doubly stochastic B with uniform μ, the
/// closed-form entropy equals the stabilized empirical rate
/// 𝔥(B,χ_⊙,n+1) − 𝔥(B,χ_⊙,n).
#[test]
fn exact_entropy_matches_empirical_rate() {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = 3;
        let mu = uniform(j);
        // doubly stochastic B = |Q|² from a random unitary Q
        let q = DMatrix::from_fn(j, j, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .qr()
        .q();
        let b = validate_sb(q.map(|z| z.norm_sqr())).unwrap();
        let exact = exact_entropy_sb(&b, &mu).unwrap().value;
        // U with entries √B has b(U) = B for uniform μ
        let u = DenseMatrix::new(b.data().map(|x| Complex64::new(x.sqrt(), 0.0)), mu.clone())
            .unwrap();
        let chi = Partition::finest(j);
        let n = 10;
        let d = partition_entropy(&u, &chi, n + 1, DEFAULT_DP_BUDGET).unwrap()
            - partition_entropy(&u, &chi, n, DEFAULT_DP_BUDGET).unwrap();
        assert!(
            (d - exact).abs() < 1e-3,
            "seed {seed}: empirical rate {d} vs closed form {exact}"
        );
    }
}
