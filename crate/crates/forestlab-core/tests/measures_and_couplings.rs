//! End-to-end checks of the determinantal layer against the coupling layer:
//! enumeration vs sampling, orientation invariance, domination, averaging,
//! and window lifts.

use forestlab_core::coupling::{
    average_over_group, check_invariance, lift_coupling_window, quotient_actions,
    strassen_coupling, StrassenOutcome,
};
use forestlab_core::determinantal::{
    enumerate_distribution, fsf_kernel, lifted_window_pmf, lifted_window_pmf_from_atoms,
    sample_subset, wilson_ust, wsf_kernel,
};
use forestlab_core::graph::lattice::{build_graph, Axis};
use forestlab_core::graph::quotient::build_quotient;
use forestlab_core::{
    BaseEdgeRef, EdgeId, Graph, GroupAction, LatticeSpec, LiftMode, QuotientGraph, VertexId,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn torus(n: u32) -> QuotientGraph {
    build_quotient(
        LatticeSpec::Grid,
        GroupAction::GridTranslation { period: n },
    )
    .unwrap()
}

/// Spanning-subgraph check by breadth-first search over the chosen edges.
fn is_spanning_tree(g: &Graph, edges: &[EdgeId]) -> bool {
    if edges.len() != g.vertex_count() - 1 {
        return false;
    }
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for &e in edges {
        let (t, h) = g.endpoints(e);
        adj[t.idx()].push(h);
        adj[h.idx()].push(t);
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[0] = true;
    let mut stack = vec![VertexId(0)];
    while let Some(v) = stack.pop() {
        for &w in &adj[v.idx()] {
            if !seen[w.idx()] {
                seen[w.idx()] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[test]
fn enumerated_tree_counts_match_closed_forms() {
    // Cayley / Kirchhoff closed forms for the preset families.
    let cases = [
        (LatticeSpec::Cycle { n: 3 }, 3usize),
        (LatticeSpec::Cycle { n: 5 }, 5),
        (LatticeSpec::Complete { n: 4 }, 16),
        (LatticeSpec::CompleteBipartite { m: 2, n: 3 }, 12),
        (LatticeSpec::Box2 { radius: 1 }, 192),
    ];
    for (spec, count) in cases {
        let g = build_graph(spec).unwrap();
        let dist = enumerate_distribution(&wsf_kernel(&g)).unwrap();
        assert_eq!(dist.support_size(), count, "{spec:?}");
        let d = dist.diagnostics();
        assert!(d.total_mass_gap <= 1e-9, "{spec:?}: {d:?}");
        assert_eq!(d.fixed_size, Some(g.vertex_count() - 1));
        // Every atom is a spanning tree.
        for &(mask, p) in dist.atoms() {
            let edges: Vec<EdgeId> = (0..g.edge_count() as u32)
                .map(EdgeId)
                .filter(|e| mask >> e.idx() & 1 == 1)
                .collect();
            assert!(is_spanning_tree(&g, &edges), "{spec:?} atom {mask:b}");
            assert!(p > 0.0);
        }
    }
}

#[test]
fn complementary_kernels_split_each_edge() {
    // Projections onto a subspace and its complement split chi(e) in two.
    for spec in [
        LatticeSpec::Complete { n: 4 },
        LatticeSpec::Torus { n: 3 },
        LatticeSpec::Box2 { radius: 1 },
    ] {
        let g = build_graph(spec).unwrap();
        let star = forestlab_core::flow::star_space(&g);
        let cycle = forestlab_core::flow::cycle_space(&g);
        let ks = forestlab_core::determinantal::ProjectionKernel::from_subspace(&star);
        let kc = forestlab_core::determinantal::ProjectionKernel::from_subspace(&cycle);
        for e in g.edges() {
            let total = ks.entry(e, e) + kc.entry(e, e);
            assert!((total - 1.0).abs() <= 1e-12, "{spec:?} edge {e:?}");
        }
    }
}

#[test]
fn samples_are_spanning_trees_and_match_enumeration() {
    let g = build_graph(LatticeSpec::CompleteBipartite { m: 2, n: 3 }).unwrap();
    let k = wsf_kernel(&g);
    let dist = enumerate_distribution(&k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let n = 24_000usize;
    let mut counts = std::collections::HashMap::new();
    for _ in 0..n {
        let s = sample_subset(&k, &mut rng).unwrap();
        assert!(is_spanning_tree(&g, &s));
        let mask: u32 = s.iter().map(|e| 1u32 << e.idx()).sum();
        *counts.entry(mask).or_insert(0usize) += 1;
    }
    for &(mask, p) in dist.atoms() {
        let freq = *counts.get(&mask).unwrap_or(&0) as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (freq - p).abs() <= 4.0 * sigma,
            "atom {mask:b}: {freq} vs {p}"
        );
    }
}

#[test]
fn wilson_matches_kernel_marginals() {
    let g = build_graph(LatticeSpec::Box2 { radius: 1 }).unwrap();
    let k = wsf_kernel(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 20_000usize;
    let mut counts = vec![0usize; g.edge_count()];
    for _ in 0..n {
        for e in wilson_ust(&g, &mut rng).unwrap() {
            counts[e.idx()] += 1;
        }
    }
    for e in g.edges() {
        let p = k.entry(e, e);
        let freq = counts[e.idx()] as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (freq - p).abs() <= 4.0 * sigma,
            "edge {e:?}: {freq} vs {p}"
        );
    }
}

#[test]
fn torus3_domination_and_averaging() {
    let q = torus(3);
    let w = enumerate_distribution(&wsf_kernel(q.graph())).unwrap();
    let f = enumerate_distribution(&fsf_kernel(&q).unwrap()).unwrap();
    assert_eq!(w.support_size(), 11664); // 3x3 torus spanning trees
    assert_eq!(w.diagnostics().fixed_size, Some(8));
    assert_eq!(f.diagnostics().fixed_size, Some(10));
    let coupling = match strassen_coupling(&w, &f).unwrap() {
        StrassenOutcome::Coupling(c) => c,
        StrassenOutcome::Infeasible(wit) => panic!("expected feasibility, got {wit:?}"),
    };
    let d = coupling.validate(&w, &f).unwrap();
    assert!(d.ok(), "{d:?}");
    // The reverse direction must fail, with a valid witness.
    match strassen_coupling(&f, &w).unwrap() {
        StrassenOutcome::Coupling(c) => panic!("unexpected coupling with {} cells", c.cells().len()),
        StrassenOutcome::Infeasible(wit) => {
            let (mu_mass, nu_mass) = wit.recheck(&f, &w);
            assert!((mu_mass - wit.mu_mass).abs() <= 1e-12);
            assert!((nu_mass - wit.nu_mass).abs() <= 1e-12);
            assert!(wit.violation() > 1e-6);
        }
    }
    // Averaging over the 9 torus translations keeps marginals and smooths.
    let actions = quotient_actions(&q);
    assert_eq!(actions.len(), 9);
    let avg = average_over_group(&coupling, &actions).unwrap();
    let d = avg.validate(&w, &f).unwrap();
    assert!(d.ok(), "{d:?}");
    assert!(check_invariance(&avg, &actions).unwrap() <= 1e-9);
}

#[test]
fn lifted_window_tables_agree_between_routes() {
    let q = torus(3);
    let k = wsf_kernel(q.graph());
    let dist = enumerate_distribution(&k).unwrap();
    let window = [
        BaseEdgeRef::lattice(0, 0, Axis::X),
        BaseEdgeRef::lattice(0, 0, Axis::Y),
        BaseEdgeRef::lattice(1, 0, Axis::X),
        BaseEdgeRef::lattice(1, 1, Axis::Y),
    ];
    for mode in [LiftMode::Tilde, LiftMode::Hat] {
        let via_kernel = lifted_window_pmf(&k, &q, &window, mode).unwrap();
        let via_atoms = lifted_window_pmf_from_atoms(&dist, &q, &window, mode).unwrap();
        let total: f64 = via_kernel.iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        for (a, b) in via_kernel.iter().zip(&via_atoms) {
            assert!((a - b).abs() <= 1e-9, "{mode:?}: {a} vs {b}");
        }
    }
    // Inside the domain the tilde and hat tables coincide exactly.
    let t = lifted_window_pmf(&k, &q, &window, LiftMode::Tilde).unwrap();
    let h = lifted_window_pmf(&k, &q, &window, LiftMode::Hat).unwrap();
    assert_eq!(t, h);
}

#[test]
fn averaged_coupling_window_table_is_symmetric() {
    let q = torus(2);
    let w = enumerate_distribution(&wsf_kernel(q.graph())).unwrap();
    let f = enumerate_distribution(&fsf_kernel(&q).unwrap()).unwrap();
    let c = match strassen_coupling(&w, &f).unwrap() {
        StrassenOutcome::Coupling(c) => c,
        StrassenOutcome::Infeasible(wit) => panic!("{wit:?}"),
    };
    let actions = quotient_actions(&q);
    let avg = average_over_group(&c, &actions).unwrap();
    // Window of the two X-edges in the bottom row of the domain; the
    // horizontal translation swaps their quotient edges.
    let window = [
        BaseEdgeRef::lattice(0, 0, Axis::X),
        BaseEdgeRef::lattice(1, 0, Axis::X),
    ];
    let table = lift_coupling_window(&avg, &q, &window, LiftMode::Tilde).unwrap();
    assert!((table.total_mass() - 1.0).abs() <= 1e-12);
    assert_eq!(table.nonmonotone_mass(), 0.0);
    let swapped = table.apply_position_permutation(&[1, 0]).unwrap();
    assert!(table.tv_distance(&swapped) <= 1e-9);
    // Marginal tables match the measures' own lifted tables.
    let first = table.first_pmf();
    let direct = lifted_window_pmf(&wsf_kernel(q.graph()), &q, &window, LiftMode::Tilde).unwrap();
    for (a, b) in first.iter().zip(&direct) {
        assert!((a - b).abs() <= 1e-9);
    }
}

mod properties {
    use super::*;
    use forestlab_core::OrientedEdge;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Re-expressing the kernel over any orientation section leaves
        /// every subset probability unchanged.
        #[test]
        fn section_flips_preserve_distributions(flips in proptest::collection::vec(any::<bool>(), 6)) {
            let g = build_graph(LatticeSpec::Complete { n: 4 }).unwrap();
            let k = wsf_kernel(&g);
            let flipped = k.with_section_flips(&flips).unwrap();
            let d0 = enumerate_distribution(&k).unwrap();
            let d1 = enumerate_distribution(&flipped).unwrap();
            prop_assert!(d0.tv_distance(&d1).unwrap() <= 1e-10);
        }

        /// Cycle voltage is invariant under rotating the closed walk.
        #[test]
        fn cycle_voltage_rotation_invariant(rot in 0usize..6, n in 2u32..5) {
            let q = torus(n);
            let mut walk: Vec<OrientedEdge> = (0..n as i64)
                .map(|i| OrientedEdge::forward(
                    q.project_edge(BaseEdgeRef::lattice(i, 0, Axis::X)).unwrap(),
                ))
                .collect();
            let r = rot % walk.len();
            walk.rotate_left(r);
            let v = q.cycle_voltage(&walk).unwrap();
            prop_assert_eq!(v.0, vec![n as i64, 0]);
        }

        /// Inclusion probabilities are monotone under adding edges and lie
        /// in [0, 1].
        #[test]
        fn inclusion_probabilities_bounded(mask in 0u32..64) {
            let g = build_graph(LatticeSpec::Complete { n: 4 }).unwrap();
            let k = wsf_kernel(&g);
            let edges: Vec<EdgeId> = (0..6u32).map(EdgeId).filter(|e| mask >> e.idx() & 1 == 1).collect();
            let p = k.inclusion_probability(&edges).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
            if let Some((_, rest)) = edges.split_last() {
                let q = k.inclusion_probability(rest).unwrap();
                prop_assert!(p <= q + 1e-12);
            }
        }

        /// Wilson trees and kernel samples have the correct cardinality on
        /// random cycle sizes.
        #[test]
        fn sample_sizes_match_rank(n in 3u32..8, seed in any::<u64>()) {
            let g = build_graph(LatticeSpec::Cycle { n }).unwrap();
            let k = wsf_kernel(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = sample_subset(&k, &mut rng).unwrap();
            prop_assert_eq!(s.len(), n as usize - 1);
            let t = wilson_ust(&g, &mut rng).unwrap();
            prop_assert_eq!(t.len(), n as usize - 1);
            prop_assert!(is_spanning_tree(&g, &t));
        }
    }
}
