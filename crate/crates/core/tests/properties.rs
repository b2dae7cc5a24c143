use groth_core::matrix::{
    laplacian, load_matrix, random_gram, save_matrix, validate_psd, MatrixFormat, PsdMatrix, WeightedGraph,
    DEFAULT_PSD_TOL,
};
use groth_core::{
    brute_force_sdp1, en_integral, hardness_reduction_check, objective_value, round_rank_n, solve_sdp_relaxation,
    SolverConfig,
};
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..9).prop_flat_map(|m| {
        proptest::collection::vec(((0..m), (0..m), 0.0f64..5.0), 0..20).prop_map(move |raw| {
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .filter(|&(i, j, _)| i != j && seen.insert((i.min(j), i.max(j))))
                .collect();
            WeightedGraph::new(m, edges).unwrap()
        })
    })
}

fn square() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..7).prop_flat_map(|m| (Just(m), proptest::collection::vec(-10.0f64..10.0, m * m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrization_is_idempotent((m, raw) in square()) {
        let a = PsdMatrix::from_row_major(m, raw).unwrap();
        let b = PsdMatrix::from_row_major(m, a.entries().to_vec()).unwrap();
        prop_assert_eq!(a.entries(), b.entries());
        for i in 0..m {
            for j in 0..m {
                prop_assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
    }

    #[test]
    fn laplacians_are_psd(g in graph()) {
        let a = laplacian(&g);
        prop_assert!(validate_psd(&a, DEFAULT_PSD_TOL).unwrap().pass);
        for i in 0..a.order() {
            prop_assert!(a.row(i).iter().sum::<f64>().abs() <= 1e-12 * a.scale().max(1.0));
        }
    }

    #[test]
    fn grams_are_psd(m in 1usize..15, r_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let r = 1 + ((m - 1) as f64 * r_frac) as usize;
        let a = random_gram(m, r, seed).unwrap();
        prop_assert!(validate_psd(&a, DEFAULT_PSD_TOL).unwrap().pass);
    }

    #[test]
    fn save_load_round_trip(m in 1usize..10, seed in any::<u64>(), csv in any::<bool>()) {
        let a = random_gram(m, m, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (name, format) = if csv { ("a.csv", MatrixFormat::DenseCsv) } else { ("a.mtx", MatrixFormat::MatrixMarket) };
        let path = dir.path().join(name);
        save_matrix(&a, &path, Some(format)).unwrap();
        let b = load_matrix(&path, None).unwrap();
        prop_assert_eq!(a.entries(), b.entries());
        prop_assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn solver_dominates_sign_optimum(m in 1usize..9, seed in any::<u64>()) {
        let a = random_gram(m, 1 + seed as usize % m, seed).unwrap();
        let brute = brute_force_sdp1(&a).unwrap().value;
        let sol = solve_sdp_relaxation(&a, &SolverConfig { seed, ..SolverConfig::default() }).unwrap();
        prop_assert!(brute <= sol.objective + 1e-7 * a.scale());
        prop_assert!(sol.vectors.max_norm_defect() <= 1e-12);
        let again = objective_value(&a, &sol.vectors).unwrap();
        prop_assert!((again - sol.objective).abs() <= 1e-9 * m as f64 * a.scale().max(1.0));
    }

    #[test]
    fn rounding_is_feasible_and_below_relaxation(m in 2usize..12, n in 1usize..4, seed in any::<u64>()) {
        let a = random_gram(m, m, seed).unwrap();
        let g = solve_sdp_relaxation(&a, &SolverConfig::default()).unwrap();
        let s = round_rank_n(&a, &g, n, seed).unwrap();
        prop_assert_eq!(s.vectors.dim(), n);
        prop_assert!(s.vectors.max_norm_defect() <= 1e-12);
        prop_assert!(s.objective <= g.objective + 1e-7 * a.scale());
        prop_assert!(hardness_reduction_check(&a, &s).unwrap().passed());
    }

    #[test]
    fn en_is_odd_and_bounded(n in 1usize..8, t in -1.0f64..=1.0) {
        let p = en_integral(n, t).unwrap();
        prop_assert!((p + en_integral(n, -t).unwrap()).abs() <= 1e-9);
        prop_assert!(p.abs() <= 1.0 + 1e-9);
    }
}
