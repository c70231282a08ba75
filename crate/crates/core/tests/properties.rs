use gmrf_core::coupling::{couple, CouplingLayout};
use gmrf_core::gmrf::{solve, solve_recoupling, verify_kkt, CorrelationSpec, DEFAULT_MAX_SWEEPS};
use gmrf_core::graph::{parse_edge_list, write_edge_list, Graph};
use gmrf_core::series::{tau_series, TruncatedSeries};
use gmrf_core::symmat::SymMatrix;
use gmrf_core::trees::count_spanning_trees;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            let edges: Vec<(usize, usize)> = pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e).collect();
            Graph::new(n, edges).unwrap()
        })
    })
}

/// `L Lᵀ + I/2` from an arbitrary lower triangle, rescaled to unit diagonal.
fn correlation_strategy(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |l| {
            let raw = SymMatrix::from_fn(n, |i, j| {
                let dot: f64 = (0..=i.min(j)).map(|k| l[i * n + k] * l[j * n + k]).sum();
                dot + if i == j { 0.5 } else { 0.0 }
            });
            SymMatrix::from_fn(n, |i, j| raw.get(i, j) / (raw.get(i, i) * raw.get(j, j)).sqrt())
        })
    })
}

fn brute_force_trees(g: &Graph) -> u64 {
    let (n, m) = (g.vertex_count(), g.edge_count());
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == n - 1)
        .filter(|mask| {
            let chosen: Vec<(usize, usize)> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| g.edges()[i]).collect();
            Graph::new(n, chosen).unwrap().is_connected()
        })
        .count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hadamard_fischer_oppenheim(a in correlation_strategy(7), b in correlation_strategy(7), split in 1usize..6) {
        let n = a.dim();
        let ld = a.logdet().unwrap();
        // unit diagonal: Hadamard says ln det ≤ 0
        prop_assert!(ld <= 1e-12);
        let k = split.min(n - 1);
        let head: Vec<usize> = (0..k).collect();
        let tail: Vec<usize> = (k..n).collect();
        let fischer = a.principal(&head).logdet().unwrap() + a.principal(&tail).logdet().unwrap();
        prop_assert!(ld <= fischer + 1e-10);
        let schur = a.schur_complement(&head).unwrap();
        prop_assert!((a.principal(&head).logdet().unwrap() + schur.logdet().unwrap() - ld).abs() < 1e-9);
        if b.dim() == n {
            // Oppenheim with unit diagonals: det(A∘B) ≥ det A
            prop_assert!(a.hadamard(&b).logdet().unwrap() >= ld - 1e-10);
        }
    }

    #[test]
    fn inverse_is_inverse(a in correlation_strategy(8)) {
        let inv = a.inverse().unwrap();
        let p = a.product(&inv);
        for (i, row) in p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn coupling_keeps_blocks_and_separates(q in correlation_strategy(8), a in 1usize..4, c in 1usize..4) {
        let n = q.dim();
        prop_assume!(n >= 3);
        let a = a.min(n - 2);
        let c = c.min(n - 1 - a);
        let left: Vec<usize> = (0..a + c).collect();
        let right: Vec<usize> = (a..n).collect();
        let layout = CouplingLayout::new(left.clone(), right.clone()).unwrap();
        let out = couple(&q.principal(&left), &q.principal(&right), &layout).unwrap();
        let m = &out.matrix;
        for block in [&left, &right] {
            for &i in block.iter() {
                for &j in block.iter() {
                    prop_assert!((m.get(i, j) - q.get(i, j)).abs() < 1e-8);
                }
            }
        }
        let inv = m.inverse().unwrap();
        for i in 0..a {
            for j in a + c..n {
                prop_assert!(inv.get(i, j).abs() < 1e-8);
            }
        }
        prop_assert!((out.log_det - m.logdet().unwrap()).abs() < 1e-8);
        // the coupled matrix maximizes the determinant among completions
        prop_assert!(out.log_det >= q.logdet().unwrap() - 1e-10);
    }

    #[test]
    fn completion_is_optimal(g in graph_strategy(8), x in 0.05f64..0.9) {
        let spec = CorrelationSpec::uniform(g.clone(), x).unwrap();
        let sol = solve(&spec).unwrap();
        prop_assert!(verify_kkt(&sol, &spec, 1e-7).pass);
        prop_assert!(sol.log_tau <= 1e-12);
        prop_assert!(sol.log_tau >= g.edge_count() as f64 * (1.0 - x * x).ln() - 1e-8);
        // the all-x matrix is a feasible completion, so it cannot beat the maximizer
        let all_x = SymMatrix::constant_correlation(g.vertex_count(), x);
        prop_assert!(all_x.logdet().unwrap() <= sol.log_tau + 1e-9);
        let rec = solve_recoupling(&spec, 1e-11, DEFAULT_MAX_SWEEPS).unwrap();
        prop_assert!(rec.a.max_abs_diff(&sol.a) < 1e-7);
    }

    #[test]
    fn edge_list_round_trip(g in graph_strategy(12)) {
        let back = parse_edge_list(&write_edge_list(&g)).unwrap();
        prop_assert_eq!(back.vertex_count(), g.vertex_count());
        prop_assert_eq!(back.edges(), g.edges());
        let degrees: usize = (0..g.vertex_count()).map(|u| g.degree(u)).sum();
        prop_assert_eq!(degrees, 2 * g.edge_count());
    }

    #[test]
    fn tree_count_matches_enumeration(g in graph_strategy(6)) {
        prop_assume!(g.edge_count() <= 12);
        let c = count_spanning_trees(&g).unwrap().to_u64().unwrap();
        prop_assert_eq!(c, brute_force_trees(&g));
    }

    #[test]
    fn series_low_coefficients(g in graph_strategy(6)) {
        let s = tau_series(&g, 5).unwrap();
        let c: Vec<i64> = s.coefficients.iter().map(|v| v.to_i64().unwrap()).collect();
        prop_assert_eq!(c[0], 1);
        prop_assert_eq!(c[1], 0);
        prop_assert_eq!(c[2], -(g.edge_count() as i64));
        if g.is_bipartite() {
            prop_assert!(c[3] == 0 && c[5] == 0);
        }
    }

    #[test]
    fn series_inverse(coeffs in proptest::collection::vec(-5i64..5, 1..8), tail in proptest::collection::vec(-5i64..5, 1..8)) {
        let order = 7;
        let mut unit = vec![1];
        unit.extend(&tail);
        let a = TruncatedSeries::from_integers(order, &coeffs);
        let b = TruncatedSeries::from_integers(order, &unit);
        let back = &(&a * &b) * &b.invert().unwrap();
        prop_assert_eq!(back.coeffs(), a.coeffs());
    }
}
