//! Reference computations that deliberately avoid the kernel machinery:
//! spanning trees counted by brute force over edge subsets, and lattice edge
//! marginals derived from current splitting. Experiments and acceptance
//! checks compare against these, never the other way around.

use anyhow::{ensure, Result};
use forestlab_core::determinantal::SubsetDistribution;
use forestlab_core::flow::{star_space, EdgeVector};
use forestlab_core::graph::lattice::{build_box2_wired, incident_edges};
use forestlab_core::{BaseVertex, EdgeId, Graph, LatticeSpec, OrientedEdge};

/// u32 subset masks plus Gosper iteration keep this cheap but small.
pub const ORACLE_EDGE_CAP: usize = 24;

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    /// Merge the classes of `a` and `b`; false if they already coincide.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra as usize] = rb;
        true
    }
}

/// All spanning trees of `g`, as bitmasks over edge ids: iterate every
/// (|V|-1)-subset of the edges and keep the acyclic ones.
pub fn spanning_tree_masks(g: &Graph) -> Result<Vec<u32>> {
    let m = g.edge_count();
    ensure!(
        m <= ORACLE_EDGE_CAP,
        "brute-force tree oracle is capped at {ORACLE_EDGE_CAP} edges, got {m}"
    );
    let n = g.vertex_count();
    if n <= 1 {
        return Ok(vec![0]);
    }
    let k = n - 1;
    if k > m {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let limit = 1u64 << m;
    let mut mask: u64 = (1u64 << k) - 1;
    while mask < limit {
        let mut uf = UnionFind::new(n);
        // n-1 edges and no cycle force a single spanning component.
        let mut acyclic = true;
        for i in 0..m {
            if mask >> i & 1 == 1 {
                let (t, h) = g.endpoints(EdgeId(i as u32));
                if !uf.union(t.0, h.0) {
                    acyclic = false;
                    break;
                }
            }
        }
        if acyclic {
            out.push(mask as u32);
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    Ok(out)
}

pub fn tree_count(g: &Graph) -> Result<usize> {
    Ok(spanning_tree_masks(g)?.len())
}

/// The uniform measure on spanning trees, packed into the same container the
/// kernel enumeration produces so the two can be compared atom by atom.
pub fn uniform_tree_distribution(g: &Graph) -> Result<SubsetDistribution> {
    let masks = spanning_tree_masks(g)?;
    ensure!(!masks.is_empty(), "graph has no spanning tree");
    let p = 1.0 / masks.len() as f64;
    Ok(SubsetDistribution::from_atoms(
        g.edge_count(),
        masks.into_iter().map(|mask| (mask, p)),
    ))
}

/// Fraction of spanning trees using edge `e`.
pub fn tree_edge_marginal(g: &Graph, e: EdgeId) -> Result<f64> {
    let masks = spanning_tree_masks(g)?;
    ensure!(!masks.is_empty(), "graph has no spanning tree");
    let hits = masks.iter().filter(|m| *m >> e.idx() & 1 == 1).count();
    Ok(hits as f64 / masks.len() as f64)
}

/// Edge marginal of the spanning-tree measure on an infinite vertex- and
/// edge-transitive lattice, by current splitting: the marginal equals the
/// current through the edge when a unit current runs between its endpoints,
/// and by symmetry a unit source at a vertex sends 1/degree through each
/// incident edge. Superposing the source at one endpoint with the sink at the
/// other puts 2/degree through the edge itself.
pub fn lattice_reference_marginal(base: LatticeSpec) -> Result<f64> {
    let degree = incident_edges(base, BaseVertex::new(0, 0))?.len();
    ensure!(degree > 0, "isolated origin in {base:?}");
    Ok(2.0 / degree as f64)
}

/// Marginal of the edge (0,0)-(1,0) in a wired box of the square lattice,
/// used to cross-check [`lattice_reference_marginal`] at a radius where the
/// boundary effect is visibly small.
pub fn wired_box_central_marginal(radius: u32) -> Result<f64> {
    ensure!(radius >= 2, "wired box needs radius at least 2");
    let (g, index) = build_box2_wired(radius);
    let e = index[&forestlab_core::BaseEdge::new(0, 0, forestlab_core::Axis::X)];
    let chi = EdgeVector::chi(&g, OrientedEdge::forward(e))?;
    let proj = star_space(&g).project(&chi)?;
    Ok(proj.norm().powi(2))
}
