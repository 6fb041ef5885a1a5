mod common;

use common::*;
use patternq_core::lattice::{torus_translation, Lattice};
use patternq_core::partition::{
    block_decompose, coarsest_equitable_refinement, is_equitable, orbits_from_generators,
    quotient, Equitability, PartitionError,
};
use patternq_core::Partition;
use proptest::prelude::*;

#[test]
fn builtin_partitions_are_equitable_and_exact() {
    for (name, g, pi) in builtins() {
        let sa = g.scaled_adjacency().unwrap();
        assert!(is_equitable(&sa, &pi).unwrap().is_equitable(), "{name}");
        let w: Vec<Vec<u64>> = (0..g.n())
            .map(|i| (0..g.n()).map(|j| g.weight(i, j) as u64).collect())
            .collect();
        assert!(equitable_exact(&w, pi.labels()), "{name}");
        let q = quotient(&sa, &pi).unwrap();
        for s in q.pbar.row_sums() {
            assert!((s - 1.0).abs() < 1e-12, "{name}");
        }
        assert!(q.detailed_balance_defect() < 1e-12, "{name}");
        assert!(q.reduced_connected(), "{name}");
    }
}

#[test]
fn bipartition_is_always_equitable() {
    let g = Lattice::Path(5).generate().unwrap();
    let (a, b) = g.bipartition().unwrap().unwrap();
    let sa = g.scaled_adjacency().unwrap();
    let pi = Partition::new(5, vec![a, b]).unwrap();
    let q = quotient(&sa, &pi).unwrap();
    assert_eq!(q.pbar.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    assert!(q.reduced_bipartite.is_some());
}

#[test]
fn hex_a_reduced_graph_is_bipartite_after_dropping_self_loop() {
    let (_, g, pi) = builtins().into_iter().find(|e| e.0 == "hex_a").unwrap();
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &pi).unwrap();
    assert_eq!(q.reduced_edges.len(), 1);
    assert!(q.reduced_bipartite.is_some());
}

#[test]
fn non_equitable_rejected_everywhere() {
    let g = Lattice::Path(3).generate().unwrap();
    let sa = g.scaled_adjacency().unwrap();
    let pi = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
    assert!(matches!(is_equitable(&sa, &pi).unwrap(), Equitability::NotEquitable(_)));
    assert!(matches!(block_decompose(&sa, &pi), Err(PartitionError::NotEquitable(_))));
}

#[test]
fn refinement_matches_oracle_on_small_weighted_examples() {
    // star with one heavy spoke
    let edges = [(0, 1, 1), (0, 2, 1), (0, 3, 3)];
    let w = int_weights(4, &edges);
    let fe: Vec<_> = edges.iter().map(|&(i, j, x)| (i, j, x as f64)).collect();
    let g = patternq_core::WeightedGraph::new(4, &fe).unwrap();
    let sa = g.scaled_adjacency().unwrap();
    let seed = vec![0, 1, 1, 1];
    let got = coarsest_equitable_refinement(&sa, &Partition::from_labels(&seed)).unwrap();
    assert_eq!(got, coarsest_oracle(&w, &seed));
}

fn torus_orbits() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize)>)> {
    (3usize..7, 3usize..7).prop_flat_map(|(r, c)| {
        (
            Just(r),
            Just(c),
            prop::collection::vec((0..r, 0..c), 1..3),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbit_partitions_are_equitable((r, c, shifts) in torus_orbits(), hex in any::<bool>()) {
        let l = if hex {
            Lattice::HexTorus { rows: r, cols: c }
        } else {
            Lattice::TorusMesh { rows: r, cols: c }
        };
        let g = l.generate().unwrap();
        let perms: Vec<_> = shifts.iter().map(|&(dr, dc)| torus_translation(r, c, dr, dc)).collect();
        let pi = orbits_from_generators(&g, &perms).unwrap();
        let sa = g.scaled_adjacency().unwrap();
        prop_assert!(is_equitable(&sa, &pi).unwrap().is_equitable());
        let d = block_decompose(&sa, &pi).unwrap();
        prop_assert!(d.lower_left_max() < 1e-10);
        prop_assert!(d.lifting_defect(&sa) < 1e-12);
        prop_assert!(d.t.matmul(&d.t_inv).max_abs_diff(&patternq_core::Matrix::identity(g.n())) < 1e-12);
    }

    #[test]
    fn refinement_is_equitable_and_idempotent(
        (r, c, _) in torus_orbits(),
        labels in prop::collection::vec(0usize..3, 36),
    ) {
        let g = Lattice::TorusMesh { rows: r, cols: c }.generate().unwrap();
        let sa = g.scaled_adjacency().unwrap();
        let seed = Partition::from_labels(&labels[..g.n()]);
        let p = coarsest_equitable_refinement(&sa, &seed).unwrap();
        prop_assert!(p.refines(&seed));
        prop_assert!(is_equitable(&sa, &p).unwrap().is_equitable());
        prop_assert_eq!(coarsest_equitable_refinement(&sa, &p).unwrap(), p);
    }

    #[test]
    fn quotient_is_reversible_against_class_degrees((r, c, shifts) in torus_orbits()) {
        let g = Lattice::HexTorus { rows: r, cols: c }.generate().unwrap();
        let perms: Vec<_> = shifts.iter().map(|&(dr, dc)| torus_translation(r, c, dr, dc)).collect();
        let pi = orbits_from_generators(&g, &perms).unwrap();
        let q = quotient(&g.scaled_adjacency().unwrap(), &pi).unwrap();
        prop_assert!(q.detailed_balance_defect() < 1e-12);
        let total: f64 = q.dbar.iter().sum();
        let want: f64 = g.degrees().iter().sum();
        prop_assert!((total - want).abs() < 1e-9);
    }
}
