//! Finite undirected multigraphs with oriented-edge views.
//!
//! Every edge is stored once with a canonical `(tail, head)` orientation; an
//! [`OrientedEdge`] selects the canonical direction or its reversal, so each
//! undirected edge yields exactly two oriented edges. Parallel edges are
//! allowed (they get distinct ids), self-loops are not.

pub mod lattice;
pub mod quotient;

use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("self-loops are not supported (vertex {0:?})")]
    SelfLoop(VertexId),
    #[error("unknown vertex {0:?} (graph has {1} vertices)")]
    UnknownVertex(VertexId, usize),
    #[error("unknown edge {0:?} (graph has {1} edges)")]
    UnknownEdge(EdgeId, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("infinite lattice family; build a finite window or quotient instead")]
    InfiniteLattice,
    #[error("edge sequence is not a closed walk: {0}")]
    NotClosedWalk(String),
    #[error("group action does not act on this base lattice: {0}")]
    ActionMismatch(String),
    #[error("group action is not free: {0}")]
    ActionNotFree(String),
    #[error("quotient would contain self-loops: {0}")]
    QuotientSelfLoop(String),
    #[error("{0} does not belong to the base of this quotient")]
    ForeignBaseEdge(String),
    #[error("window edge {0} lies outside the fundamental domain")]
    OutsideDomain(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// An edge together with a traversal direction. `reversed == false` means the
/// canonical tail-to-head direction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct OrientedEdge {
    pub edge: EdgeId,
    pub reversed: bool,
}

impl OrientedEdge {
    pub fn forward(edge: EdgeId) -> Self {
        OrientedEdge {
            edge,
            reversed: false,
        }
    }

    /// The same edge traversed the other way.
    pub fn reverse(self) -> Self {
        OrientedEdge {
            edge: self.edge,
            reversed: !self.reversed,
        }
    }

    /// +1 on the canonical direction, -1 on the reversal.
    pub fn sign(self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    endpoints: Vec<(VertexId, VertexId)>,
    out_edges: Vec<Vec<OrientedEdge>>,
}

pub struct GraphBuilder {
    graph: Graph,
}

impl GraphBuilder {
    pub fn add_edge(&mut self, tail: VertexId, head: VertexId) -> Result<EdgeId, GraphError> {
        let n = self.graph.vertex_count();
        for v in [tail, head] {
            if v.idx() >= n {
                return Err(GraphError::UnknownVertex(v, n));
            }
        }
        if tail == head {
            return Err(GraphError::SelfLoop(tail));
        }
        let id = EdgeId(self.graph.endpoints.len() as u32);
        self.graph.endpoints.push((tail, head));
        self.graph.out_edges[tail.idx()].push(OrientedEdge::forward(id));
        self.graph.out_edges[head.idx()].push(OrientedEdge::forward(id).reverse());
        Ok(id)
    }

    pub fn finish(self) -> Graph {
        self.graph
    }
}

impl Graph {
    pub fn builder(vertices: usize) -> GraphBuilder {
        GraphBuilder {
            graph: Graph {
                endpoints: Vec::new(),
                out_edges: vec![Vec::new(); vertices],
            },
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.out_edges.len()
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count() as u32).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_count() as u32).map(EdgeId)
    }

    pub fn check_edge(&self, e: EdgeId) -> Result<(), GraphError> {
        if e.idx() >= self.edge_count() {
            return Err(GraphError::UnknownEdge(e, self.edge_count()));
        }
        Ok(())
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v.idx() >= self.vertex_count() {
            return Err(GraphError::UnknownVertex(v, self.vertex_count()));
        }
        Ok(())
    }

    /// Canonical `(tail, head)` pair of an edge.
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.endpoints[e.idx()]
    }

    pub fn tail(&self, oe: OrientedEdge) -> VertexId {
        let (t, h) = self.endpoints(oe.edge);
        if oe.reversed {
            h
        } else {
            t
        }
    }

    pub fn head(&self, oe: OrientedEdge) -> VertexId {
        self.tail(oe.reverse())
    }

    /// All oriented edges leaving `v`, in insertion order. Each incident edge
    /// appears exactly once, oriented away from `v`.
    pub fn out_edges(&self, v: VertexId) -> &[OrientedEdge] {
        &self.out_edges[v.idx()]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.out_edges[v.idx()].len()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        self.bfs_tree().spans()
    }

    /// Breadth-first spanning tree (forest, if disconnected) rooted at vertex
    /// 0, deterministic in vertex and edge insertion order.
    pub fn bfs_tree(&self) -> SpanningTree {
        let n = self.vertex_count();
        let mut parent: Vec<Option<(VertexId, OrientedEdge)>> = vec![None; n];
        let mut depth = vec![0u32; n];
        let mut seen = vec![false; n];
        let mut in_tree = vec![false; self.edge_count()];
        let mut edges = Vec::new();
        let mut order = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for root in self.vertices() {
            if seen[root.idx()] {
                continue;
            }
            seen[root.idx()] = true;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &oe in self.out_edges(v) {
                    let w = self.head(oe);
                    if !seen[w.idx()] {
                        seen[w.idx()] = true;
                        parent[w.idx()] = Some((v, oe));
                        depth[w.idx()] = depth[v.idx()] + 1;
                        in_tree[oe.edge.idx()] = true;
                        edges.push(oe.edge);
                        queue.push_back(w);
                    }
                }
            }
        }
        SpanningTree {
            root: VertexId(0),
            edges,
            in_tree,
            parent,
            depth,
        }
    }

    /// One fundamental cycle per non-tree edge of the BFS tree: the chord in
    /// its canonical direction followed by the tree path closing it up.
    /// Returns closed walks; for a connected graph there are `|E| - |V| + 1`.
    pub fn fundamental_cycles(&self) -> Vec<Vec<OrientedEdge>> {
        let tree = self.bfs_tree();
        self.edges()
            .filter(|e| !tree.in_tree[e.idx()])
            .map(|e| {
                let (t, h) = self.endpoints(e);
                let mut walk = vec![OrientedEdge::forward(e)];
                walk.extend(tree.path(h, t));
                debug_assert!(self.is_closed_walk(&walk));
                walk
            })
            .collect()
    }

    /// A nonempty sequence of oriented edges is a closed walk when consecutive
    /// heads and tails match cyclically.
    pub fn is_closed_walk(&self, walk: &[OrientedEdge]) -> bool {
        if walk.is_empty() {
            return false;
        }
        walk.iter().all(|oe| oe.edge.idx() < self.edge_count())
            && (0..walk.len()).all(|i| {
                let next = walk[(i + 1) % walk.len()];
                self.head(walk[i]) == self.tail(next)
            })
    }

    /// Plain-text edge list, one `id tail head` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in self.edges() {
            let (t, h) = self.endpoints(e);
            writeln!(out, "{} {} {}", e.0, t.0, h.0)?;
        }
        Ok(())
    }
}

pub struct SpanningTree {
    pub root: VertexId,
    /// Tree edges in BFS discovery order.
    pub edges: Vec<EdgeId>,
    pub in_tree: Vec<bool>,
    parent: Vec<Option<(VertexId, OrientedEdge)>>,
    depth: Vec<u32>,
}

impl SpanningTree {
    pub fn spans(&self) -> bool {
        self.parent.iter().filter(|p| p.is_none()).count() <= 1
    }

    /// The unique simple tree path from `from` to `to` as oriented edges.
    /// Both vertices must lie in the same tree component.
    pub fn path(&self, from: VertexId, to: VertexId) -> Vec<OrientedEdge> {
        let mut up = Vec::new(); // from -> lca, against parent edges
        let mut down = Vec::new(); // lca -> to, along parent edges
        let (mut a, mut b) = (from, to);
        while self.depth[a.idx()] > self.depth[b.idx()] {
            let (p, oe) = self.parent[a.idx()].expect("depth > 0 implies a parent");
            up.push(oe.reverse());
            a = p;
        }
        while self.depth[b.idx()] > self.depth[a.idx()] {
            let (p, oe) = self.parent[b.idx()].expect("depth > 0 implies a parent");
            down.push(oe);
            b = p;
        }
        while a != b {
            let (pa, oa) = self.parent[a.idx()].expect("distinct vertices at equal depth");
            let (pb, ob) = self.parent[b.idx()].expect("distinct vertices at equal depth");
            up.push(oa.reverse());
            down.push(ob);
            a = pa;
            b = pb;
        }
        down.reverse();
        up.extend(down);
        up
    }
}
