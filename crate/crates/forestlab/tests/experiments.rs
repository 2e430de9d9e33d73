//! Experiment runners exercised as a library, covering the lanes the
//! acceptance gate reaches only through the grid: trivial quotients,
//! oracle-referenced marginals, and the line-lattice towers.

use forestlab::config::{ActionSpec, ExperimentConfig, GraphSpec, Params, WindowEdge};
use forestlab::experiments;

fn graph(family: &str) -> Option<GraphSpec> {
    Some(GraphSpec {
        family: family.into(),
        n: None,
        m: None,
        radius: None,
    })
}

fn lattice_edge(x: i64, y: i64, axis: &str) -> WindowEdge {
    WindowEdge {
        x,
        y,
        axis: Some(axis.into()),
        edge: None,
    }
}

#[test]
fn decompose_trivial_quotient_of_a_complete_graph() {
    let cfg = ExperimentConfig {
        experiment: "decompose".into(),
        graph: Some(GraphSpec {
            family: "complete".into(),
            n: Some(4),
            m: None,
            radius: None,
        }),
        action: Some(ActionSpec {
            kind: "trivial".into(),
            period: None,
        }),
        params: Params::default(),
    };
    let out = experiments::run(&cfg, 0).unwrap();
    assert!(out.passed, "{:?}", out.notes);
    let star = out
        .table
        .rows()
        .iter()
        .find(|r| r.quantity == "star_dim")
        .unwrap();
    assert_eq!(star.value, 3.0);
    assert_eq!(star.gap, 0.0);
    // Trivial action: every cycle is true.
    let true_dim = out
        .table
        .rows()
        .iter()
        .find(|r| r.quantity == "true_cycle_dim")
        .unwrap();
    assert_eq!(true_dim.value, 3.0);
    assert_eq!(true_dim.gap, 0.0);
}

#[test]
fn marginals_fall_back_to_the_tree_oracle_off_transitive_families() {
    let cfg = ExperimentConfig {
        experiment: "marginals".into(),
        graph: Some(GraphSpec {
            family: "box".into(),
            n: None,
            m: None,
            radius: Some(1),
        }),
        action: None,
        params: Params::default(),
    };
    let out = experiments::run(&cfg, 0).unwrap();
    assert!(out.passed, "{:?}", out.notes);
    // 3x3 grid: corner-adjacent edges and center edges have distinct
    // marginals, and each row is referenced against brute-force counting.
    let marginals: Vec<&forestlab::table::Row> = out
        .table
        .rows()
        .iter()
        .filter(|r| r.quantity.starts_with("wsf_marginal"))
        .collect();
    assert_eq!(marginals.len(), 12);
    assert!(marginals.iter().all(|r| r.gap <= 1e-9));
    let distinct = {
        let mut v: Vec<u64> = marginals.iter().map(|r| r.value.to_bits()).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    assert!(distinct > 1, "grid marginals are not all equal");
    assert!(out.artifacts.iter().any(|a| a.name == "wsf_kernel.txt"));
}

#[test]
fn cycle_tower_marginals_and_line_exhaustion() {
    let tower = ExperimentConfig {
        experiment: "tower".into(),
        graph: graph("line"),
        action: None,
        params: Params {
            levels: vec![3, 5, 9],
            window: vec![lattice_edge(0, 0, "x")],
            ..Params::default()
        },
    };
    let out = experiments::run(&tower, 0).unwrap();
    assert!(out.passed, "{:?}", out.notes);
    // Tree measure on an n-cycle drops one edge uniformly.
    let gaps = out.table.gaps("wsf_window_marginal");
    let expect: Vec<f64> = [3.0f64, 5.0, 9.0].iter().map(|n| 1.0 / n).collect();
    for (g, e) in gaps.iter().zip(&expect) {
        assert!((g - e).abs() <= 1e-9);
    }
    assert!(out.table.gaps("fsf_window_marginal").iter().all(|g| *g <= 1e-9));

    let exhaust = ExperimentConfig {
        experiment: "exhaust".into(),
        graph: graph("line"),
        action: None,
        params: Params {
            radii: vec![4, 10],
            boundary: Some("both".into()),
            window: vec![lattice_edge(0, 0, "x")],
            ..Params::default()
        },
    };
    let out = experiments::run(&exhaust, 0).unwrap();
    assert!(out.passed, "{:?}", out.notes);
    // A free segment is its own unique spanning tree; wired it closes into a
    // cycle of 2R edges.
    for g in out.table.gaps("ust_marginal_free") {
        assert!(g <= 1e-12);
    }
    let wired = out.table.gaps("ust_marginal_wired");
    assert!((wired[0] - 1.0 / 8.0).abs() <= 1e-9);
    assert!((wired[1] - 1.0 / 20.0).abs() <= 1e-9);
}

#[test]
fn line_window_stabilizes_once_the_domain_reaches_it() {
    let cfg = ExperimentConfig {
        experiment: "sot".into(),
        graph: graph("line"),
        action: None,
        params: Params {
            levels: vec![2, 3, 6],
            window: vec![lattice_edge(1, 0, "x")],
            ..Params::default()
        },
    };
    let out = experiments::run(&cfg, 0).unwrap();
    assert!(out.passed, "{:?}", out.notes);
    // Covering needs the canonical domain to hold the neighbors at 0,1,2.
    assert!(out
        .notes
        .iter()
        .any(|n| n.contains("first covering level 3")));
}

#[test]
fn topology_rejects_non_torus_quotients() {
    let cfg = ExperimentConfig {
        experiment: "topology".into(),
        graph: graph("line"),
        action: Some(ActionSpec {
            kind: "line-translation".into(),
            period: Some(4),
        }),
        params: Params::default(),
    };
    let err = experiments::run(&cfg, 0).unwrap_err();
    assert!(err.to_string().contains("torus"));
}

#[test]
fn unknown_experiment_name_is_an_error() {
    let cfg = ExperimentConfig {
        experiment: "renormalize".into(),
        graph: None,
        action: None,
        params: Params::default(),
    };
    assert!(experiments::run(&cfg, 0).is_err());
}
