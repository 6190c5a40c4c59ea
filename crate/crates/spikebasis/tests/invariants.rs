//! Property tests for the cross-module invariants.

use nalgebra::DMatrix;
use proptest::prelude::*;

use spikebasis::bases::{classify_row, Basis, GroupTag, DEFAULT_REL_TOL};
use spikebasis::costs::{
    additive_cost, entropy_exact_spike, mutual_information_spike, AdditiveKind,
};
use spikebasis::dictionary::{reconstruct, tree_basis_count, DictionaryTable, TreeBasis};
use spikebasis::verify::entropy_oracle;

fn small_entry() -> impl Strategy<Value = f64> {
    (-1000i32..=1000).prop_map(|v| v as f64 / 128.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn classify_row_is_permutation_invariant(
        mut row in prop::collection::vec(small_entry(), 1..24),
        swaps in prop::collection::vec((0usize..24, 0usize..24), 0..16),
    ) {
        let base = classify_row(&row, DEFAULT_REL_TOL);
        prop_assert_eq!(base.index.iter().sum::<usize>(), row.len());
        prop_assert_eq!(base.class_k, base.index.len());
        let len = row.len();
        for (a, b) in swaps {
            row.swap(a % len, b % len);
        }
        prop_assert_eq!(classify_row(&row, DEFAULT_REL_TOL), base);
    }

    #[test]
    fn quasi_norm_inequalities_hold(
        pairs in prop::collection::vec((small_entry(), small_entry()), 1..20),
        p_idx in 0usize..4,
    ) {
        let p = [0.25, 0.5, 0.75, 1.0][p_idx];
        let x: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
        let y: Vec<f64> = pairs.iter().map(|(_, b)| *b).collect();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let pp = |v: &[f64]| additive_cost(v, AdditiveKind::Lp { p });
        prop_assert!(pp(&sum) <= pp(&x) + pp(&y) + 1e-9);
        let norm = |v: &[f64]| pp(v).powf(1.0 / p);
        let c = 2.0_f64.powf(1.0 / p - 1.0);
        prop_assert!(norm(&sum) <= c * (norm(&x) + norm(&y)) + 1e-9);
    }

    #[test]
    fn analysis_round_trip_through_any_cover(
        x in prop::collection::vec(small_entry(), 16..=16),
        pick in 0u64..u64::MAX,
    ) {
        let n0 = 4;
        let table = DictionaryTable::analyze(&x, n0).unwrap();
        let index = pick % tree_basis_count(n0);
        let selection = spikebasis::dictionary::enumerate_tree_bases(n0, n0)
            .unwrap()
            .nth(index as usize)
            .unwrap();
        let rec = reconstruct(&table, &selection).unwrap();
        for (r, v) in rec.iter().zip(&x) {
            prop_assert!((r - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn mutual_information_is_nonnegative(
        entries in prop::collection::vec((-1000i32..=1000).prop_map(|v| v as f64 / 2048.0), 16..=16),
    ) {
        // entries below 0.49 plus 3 I keep the matrix strictly diagonally
        // dominant, hence invertible for every draw
        let n = 4;
        let m = DMatrix::from_vec(n, n, entries) + DMatrix::identity(n, n) * 3.0;
        let basis = Basis::from_synthesis(m, GroupTag::GeneralInvertible, "prop").unwrap();
        let mi = mutual_information_spike(&basis, n, DEFAULT_REL_TOL).unwrap();
        prop_assert!(mi >= -1e-12, "mutual information {}", mi);
        // and the independent oracle agrees with the classify-row route
        let oracle = entropy_oracle(&basis, n).unwrap();
        let exact = entropy_exact_spike(&basis, n, DEFAULT_REL_TOL).unwrap().value;
        prop_assert!((oracle - exact).abs() <= 1e-10);
    }

    #[test]
    fn tree_bases_tile_and_stay_orthonormal(seed in 0u64..458_330) {
        let n0 = 3;
        let index = seed % tree_basis_count(n0);
        let basis = spikebasis::dictionary::enumerate_tree_bases(n0, n0)
            .unwrap()
            .nth(index as usize)
            .unwrap();
        let widths: usize = basis.nodes().iter().map(|&(k, _)| 8usize >> k).sum();
        prop_assert_eq!(widths, 8);
        let m = basis.matrix().unwrap();
        prop_assert!((m.transpose() * &m - DMatrix::identity(8, 8)).amax() <= 1e-10);
        // re-validation keeps the same node set
        let rebuilt = TreeBasis::from_nodes(n0, basis.nodes().to_vec()).unwrap();
        prop_assert_eq!(rebuilt, basis);
    }
}
