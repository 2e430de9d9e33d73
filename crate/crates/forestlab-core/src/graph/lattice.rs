//! Lattice and preset graph families, plus coordinates for the two infinite
//! base lattices (the line `Z` and the square lattice `Z^2`).
//!
//! Infinite families are never materialized: they are queried through finite
//! windows (`Box2`, segments) or through quotients by translation actions.

use std::collections::HashMap;

use super::{EdgeId, Graph, GraphError, VertexId};

/// Supported graph families. `Line` and `Grid` are infinite and can only be
/// used as quotient bases or window hosts; the rest build finite graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeSpec {
    /// The integer line `Z` (infinite).
    Line,
    /// The square lattice `Z^2` (infinite).
    Grid,
    /// Cycle graph `C_n`, `n >= 2` (`C_2` is a doubled edge).
    Cycle { n: u32 },
    /// Complete graph `K_n`, `n >= 2`.
    Complete { n: u32 },
    /// Complete bipartite graph `K_{m,n}`, `m, n >= 1`.
    CompleteBipartite { m: u32, n: u32 },
    /// The `n x n` discrete torus with unit edges, `n >= 2`.
    Torus { n: u32 },
    /// Square box `[-radius, radius]^2` in `Z^2` with free boundary.
    Box2 { radius: u32 },
}

impl LatticeSpec {
    pub fn is_finite(self) -> bool {
        !matches!(self, LatticeSpec::Line | LatticeSpec::Grid)
    }

    pub fn validate(self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::InvalidParameter(msg));
        match self {
            LatticeSpec::Line | LatticeSpec::Grid => Ok(()),
            LatticeSpec::Cycle { n } if n < 2 => bad(format!("cycle needs n >= 2, got {n}")),
            LatticeSpec::Complete { n } if n < 2 => bad(format!("complete needs n >= 2, got {n}")),
            LatticeSpec::CompleteBipartite { m, n } if m < 1 || n < 1 => {
                bad(format!("complete bipartite needs m, n >= 1, got {m}, {n}"))
            }
            LatticeSpec::Torus { n } if n < 2 => bad(format!("torus needs n >= 2, got {n}")),
            LatticeSpec::Box2 { radius } if radius < 1 => {
                bad(format!("box needs radius >= 1, got {radius}"))
            }
            _ => Ok(()),
        }
    }
}

/// Axis of a lattice edge; line edges are always `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

/// A vertex of the base lattice. On the line, `y` is always 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseVertex {
    pub x: i64,
    pub y: i64,
}

impl BaseVertex {
    pub fn new(x: i64, y: i64) -> Self {
        BaseVertex { x, y }
    }

    pub fn shifted(self, dx: i64, dy: i64) -> Self {
        BaseVertex {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

/// A lattice edge named by its tail and axis; the head is one unit along the
/// axis. This orientation (towards positive coordinates) is canonical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseEdge {
    pub tail: BaseVertex,
    pub axis: Axis,
}

impl BaseEdge {
    pub fn new(x: i64, y: i64, axis: Axis) -> Self {
        BaseEdge {
            tail: BaseVertex::new(x, y),
            axis,
        }
    }

    pub fn head(self) -> BaseVertex {
        match self.axis {
            Axis::X => self.tail.shifted(1, 0),
            Axis::Y => self.tail.shifted(0, 1),
        }
    }

    pub fn translated(self, dx: i64, dy: i64) -> Self {
        BaseEdge {
            tail: self.tail.shifted(dx, dy),
            axis: self.axis,
        }
    }
}

/// All base-lattice edges incident to `v`: two on the line, four on the grid.
pub fn incident_edges(base: LatticeSpec, v: BaseVertex) -> Result<Vec<BaseEdge>, GraphError> {
    match base {
        LatticeSpec::Line => Ok(vec![
            BaseEdge::new(v.x - 1, 0, Axis::X),
            BaseEdge::new(v.x, 0, Axis::X),
        ]),
        LatticeSpec::Grid => Ok(vec![
            BaseEdge::new(v.x - 1, v.y, Axis::X),
            BaseEdge::new(v.x, v.y, Axis::X),
            BaseEdge::new(v.x, v.y - 1, Axis::Y),
            BaseEdge::new(v.x, v.y, Axis::Y),
        ]),
        other => Err(GraphError::ActionMismatch(format!(
            "incident_edges needs an infinite base lattice, got {other:?}"
        ))),
    }
}

/// Build a finite graph for `spec`. Infinite families are rejected.
pub fn build_graph(spec: LatticeSpec) -> Result<Graph, GraphError> {
    spec.validate()?;
    match spec {
        LatticeSpec::Line | LatticeSpec::Grid => Err(GraphError::InfiniteLattice),
        LatticeSpec::Cycle { n } => {
            let n = n as usize;
            let mut b = Graph::builder(n);
            for i in 0..n {
                b.add_edge(VertexId(i as u32), VertexId(((i + 1) % n) as u32))?;
            }
            Ok(b.finish())
        }
        LatticeSpec::Complete { n } => {
            let n = n as usize;
            let mut b = Graph::builder(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    b.add_edge(VertexId(i as u32), VertexId(j as u32))?;
                }
            }
            Ok(b.finish())
        }
        LatticeSpec::CompleteBipartite { m, n } => {
            let (m, n) = (m as usize, n as usize);
            let mut b = Graph::builder(m + n);
            for i in 0..m {
                for j in 0..n {
                    b.add_edge(VertexId(i as u32), VertexId((m + j) as u32))?;
                }
            }
            Ok(b.finish())
        }
        LatticeSpec::Torus { n } => Ok(torus_graph(n)),
        LatticeSpec::Box2 { radius } => Ok(build_box2_indexed(radius).0),
    }
}

/// Vertex id of `(i, j)` on the `n x n` torus: row-major by `j`.
pub fn torus_vertex_id(n: u32, i: u32, j: u32) -> VertexId {
    VertexId(j * n + i)
}

/// The `n x n` torus with the quotient numbering: vertex `(i, j)` has id
/// `j*n + i`; its outgoing `X` edge has id `2*vid` and `Y` edge `2*vid + 1`.
pub(crate) fn torus_graph(n: u32) -> Graph {
    let mut b = Graph::builder((n * n) as usize);
    for j in 0..n {
        for i in 0..n {
            let v = torus_vertex_id(n, i, j);
            b.add_edge(v, torus_vertex_id(n, (i + 1) % n, j)).unwrap();
            b.add_edge(v, torus_vertex_id(n, i, (j + 1) % n)).unwrap();
        }
    }
    b.finish()
}

/// Free-boundary box `[-R, R]^2` together with a coordinate index for its
/// edges, used to locate window edges inside exhaustion sequences.
pub fn build_box2_indexed(radius: u32) -> (Graph, HashMap<BaseEdge, EdgeId>) {
    let r = radius as i64;
    let side = 2 * r + 1;
    let vid = |x: i64, y: i64| VertexId(((y + r) * side + (x + r)) as u32);
    let mut b = Graph::builder((side * side) as usize);
    let mut index = HashMap::new();
    for y in -r..=r {
        for x in -r..=r {
            if x < r {
                let e = b.add_edge(vid(x, y), vid(x + 1, y)).unwrap();
                index.insert(BaseEdge::new(x, y, Axis::X), e);
            }
            if y < r {
                let e = b.add_edge(vid(x, y), vid(x, y + 1)).unwrap();
                index.insert(BaseEdge::new(x, y, Axis::Y), e);
            }
        }
    }
    (b.finish(), index)
}

/// Wired box: `[-R, R]^2` with the whole boundary identified to one vertex.
/// Edges between two boundary vertices would be self-loops and are dropped;
/// parallel edges to the boundary vertex are kept.
pub fn build_box2_wired(radius: u32) -> (Graph, HashMap<BaseEdge, EdgeId>) {
    let r = radius as i64;
    let side = 2 * r + 1;
    let interior = |x: i64, y: i64| x.abs() < r && y.abs() < r;
    // Interior vertices keep the row-major order; the boundary is the last id.
    let mut ids = HashMap::new();
    let mut next = 0u32;
    for y in -r..=r {
        for x in -r..=r {
            if interior(x, y) {
                ids.insert((x, y), VertexId(next));
                next += 1;
            }
        }
    }
    let boundary = VertexId(next);
    let vid = |x: i64, y: i64| *ids.get(&(x, y)).unwrap_or(&boundary);
    let mut b = Graph::builder(next as usize + 1);
    let mut index = HashMap::new();
    for y in -r..=r {
        for x in -r..=r {
            for (dx, dy, axis) in [(1, 0, Axis::X), (0, 1, Axis::Y)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx > r || ny > r {
                    continue;
                }
                if !interior(x, y) && !interior(nx, ny) {
                    continue; // collapsed to a self-loop at the boundary vertex
                }
                let e = b.add_edge(vid(x, y), vid(nx, ny)).unwrap();
                index.insert(BaseEdge::new(x, y, axis), e);
            }
        }
    }
    debug_assert_eq!(side, 2 * r + 1);
    (b.finish(), index)
}

/// Path graph on `[-R, R] ⊂ Z` with its edge index (free-boundary segment).
pub fn build_segment_indexed(radius: u32) -> (Graph, HashMap<BaseEdge, EdgeId>) {
    let r = radius as i64;
    let vid = |x: i64| VertexId((x + r) as u32);
    let mut b = Graph::builder((2 * r + 1) as usize);
    let mut index = HashMap::new();
    for x in -r..r {
        let e = b.add_edge(vid(x), vid(x + 1)).unwrap();
        index.insert(BaseEdge::new(x, 0, Axis::X), e);
    }
    (b.finish(), index)
}

/// Wired segment: `[-R, R] ⊂ Z` with both endpoints identified, i.e. a cycle
/// of length `2R` (the edge between the two boundary points is absent in Z).
pub fn build_segment_wired(radius: u32) -> (Graph, HashMap<BaseEdge, EdgeId>) {
    let r = radius as i64;
    // Interior vertices -R+1..=R-1 get ids 0.., the boundary is the last id.
    let interior = |x: i64| x.abs() < r;
    let boundary = VertexId((2 * r - 1) as u32);
    let vid = |x: i64| {
        if interior(x) {
            VertexId((x + r - 1) as u32)
        } else {
            boundary
        }
    };
    let mut b = Graph::builder(2 * r as usize);
    let mut index = HashMap::new();
    for x in -r..r {
        let e = b.add_edge(vid(x), vid(x + 1)).unwrap();
        index.insert(BaseEdge::new(x, 0, Axis::X), e);
    }
    (b.finish(), index)
}
