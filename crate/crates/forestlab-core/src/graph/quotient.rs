//! Quotients of base graphs by free group actions.
//!
//! Supported actions: the trivial action on any finite graph, translation by
//! multiples of `period` on the line, and independent translations by
//! multiples of `period` along both axes of the square lattice. The quotient
//! of the line is a cycle, the quotient of the grid is a torus.
//!
//! Each quotient carries a canonical lift of every vertex and edge (the
//! representative with coordinates in `[0, period)`), a voltage per edge (the
//! deck translation picked up when traversing it), and a fundamental domain
//! `D` consisting of the canonical edge lifts. `D` is edge-bijective with the
//! quotient and connected inside the base lattice, and domains are nested
//! along any increasing tower of periods.

use std::collections::{HashMap, HashSet, VecDeque};

use super::lattice::{Axis, BaseEdge, BaseVertex, LatticeSpec};
use super::{EdgeId, Graph, GraphError, OrientedEdge, VertexId};

/// Free actions available as quotient builders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupAction {
    /// Identity action on a finite graph; the quotient is the graph itself.
    Trivial,
    /// `Z` acting on the line by multiples of `period`; quotient `C_period`.
    LineTranslation { period: u32 },
    /// `Z^2` acting on the grid by multiples of `period` along each axis;
    /// quotient is the `period x period` torus.
    GridTranslation { period: u32 },
}

impl GroupAction {
    pub fn validate(self) -> Result<(), GraphError> {
        match self {
            GroupAction::Trivial => Ok(()),
            GroupAction::LineTranslation { period } | GroupAction::GridTranslation { period } => {
                if period == 0 {
                    return Err(GraphError::ActionNotFree(
                        "translation by 0 fixes every vertex".into(),
                    ));
                }
                if period == 1 {
                    return Err(GraphError::QuotientSelfLoop(
                        "period 1 identifies the endpoints of every edge".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Spot-check freeness: no group element with displacement of word length
    /// up to `word_cap` fixes a vertex of the centered box of the given
    /// radius. Translations satisfy this for any positive period.
    pub fn check_free_on_box(self, radius: i64, word_cap: i64) -> bool {
        match self {
            GroupAction::Trivial => true,
            GroupAction::LineTranslation { period } => {
                let p = period as i64;
                (-word_cap..=word_cap)
                    .filter(|&k| k != 0)
                    .all(|k| (-radius..=radius).all(|x| x + k * p != x))
            }
            GroupAction::GridTranslation { period } => {
                let p = period as i64;
                for a in -word_cap..=word_cap {
                    for b in -word_cap..=word_cap {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        for x in -radius..=radius {
                            for y in -radius..=radius {
                                if (x + a * p, y + b * p) == (x, y) {
                                    return false;
                                }
                            }
                        }
                    }
                }
                true
            }
        }
    }
}

/// Deck translation recorded on an edge, in lattice units. Rank 0 for trivial
/// quotients, 1 for line quotients, 2 for grid quotients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Voltage(pub Vec<i64>);

impl Voltage {
    pub fn zero(rank: usize) -> Self {
        Voltage(vec![0; rank])
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn negated(&self) -> Self {
        Voltage(self.0.iter().map(|&c| -c).collect())
    }

    pub fn add_assign(&mut self, other: &Voltage) {
        assert_eq!(self.0.len(), other.0.len(), "voltage rank mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }
}

/// Reference to a vertex of the quotient's base: a lattice coordinate for
/// line/grid bases, or a vertex of the finite base graph itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseVertexRef {
    Lattice(BaseVertex),
    Finite(VertexId),
}

/// Reference to an edge of the quotient's base; see [`BaseVertexRef`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseEdgeRef {
    Lattice(BaseEdge),
    Finite(EdgeId),
}

impl BaseEdgeRef {
    pub fn lattice(x: i64, y: i64, axis: Axis) -> Self {
        BaseEdgeRef::Lattice(BaseEdge::new(x, y, axis))
    }
}

/// How to pull a quotient subgraph back through the covering map:
/// `Tilde` takes the full preimage, `Hat` only the canonical lifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftMode {
    Tilde,
    Hat,
}

/// Canonical fundamental domain of a quotient: the canonical lift of each
/// quotient edge (listed in quotient edge order) and their endpoints.
#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    /// Tower level: the translation period, or 0 for a trivial quotient.
    pub level: u32,
    pub edges: Vec<BaseEdgeRef>,
    pub vertices: Vec<BaseVertexRef>,
}

impl FundamentalDomain {
    pub fn contains_edge(&self, e: &BaseEdgeRef) -> bool {
        self.edges.contains(e)
    }
}

/// A symmetry of the quotient graph induced by the base translations that
/// survive the quotient (the group `G/G_i` for translations, trivial else).
#[derive(Clone, Debug)]
pub struct GraphSymmetry {
    pub label: String,
    /// Image of each vertex id.
    pub vertex_map: Vec<VertexId>,
    /// Image of each edge id (canonical orientations map to canonical ones).
    pub edge_map: Vec<EdgeId>,
}

#[derive(Clone, Debug)]
enum QuotientKind {
    Trivial,
    Line { period: u32 },
    Grid { period: u32 },
}

/// A finite quotient graph together with its covering data.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    graph: Graph,
    kind: QuotientKind,
    voltages: Vec<Voltage>,
}

/// Build the quotient of `base` by `action`. The base must be `Line` for line
/// translations, `Grid` for grid translations, and finite for `Trivial`.
pub fn build_quotient(base: LatticeSpec, action: GroupAction) -> Result<QuotientGraph, GraphError> {
    action.validate()?;
    match (base, action) {
        (LatticeSpec::Line, GroupAction::LineTranslation { period }) => {
            let graph = super::lattice::build_graph(LatticeSpec::Cycle { n: period })?;
            // Edge i lifts to (i, i+1); only the wrap edge advances a period.
            let voltages = (0..period)
                .map(|i| {
                    if i + 1 == period {
                        Voltage(vec![period as i64])
                    } else {
                        Voltage(vec![0])
                    }
                })
                .collect();
            Ok(QuotientGraph {
                graph,
                kind: QuotientKind::Line { period },
                voltages,
            })
        }
        (LatticeSpec::Grid, GroupAction::GridTranslation { period }) => {
            let n = period;
            let graph = super::lattice::torus_graph(n);
            let mut voltages = Vec::with_capacity(graph.edge_count());
            for j in 0..n {
                for i in 0..n {
                    let wrap_x = if i + 1 == n { n as i64 } else { 0 };
                    let wrap_y = if j + 1 == n { n as i64 } else { 0 };
                    voltages.push(Voltage(vec![wrap_x, 0]));
                    voltages.push(Voltage(vec![0, wrap_y]));
                }
            }
            Ok(QuotientGraph {
                graph,
                kind: QuotientKind::Grid { period },
                voltages,
            })
        }
        (spec, GroupAction::Trivial) if spec.is_finite() => {
            Ok(QuotientGraph::trivial(super::lattice::build_graph(spec)?))
        }
        (spec, act) => Err(GraphError::ActionMismatch(format!(
            "{act:?} does not act on {spec:?}"
        ))),
    }
}

impl QuotientGraph {
    /// Wrap a finite graph as the quotient of itself by the trivial action.
    pub fn trivial(graph: Graph) -> Self {
        let m = graph.edge_count();
        QuotientGraph {
            graph,
            kind: QuotientKind::Trivial,
            voltages: vec![Voltage::zero(0); m],
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Rank of the deck group: 0 (trivial), 1 (line), or 2 (grid).
    pub fn deck_rank(&self) -> usize {
        match self.kind {
            QuotientKind::Trivial => 0,
            QuotientKind::Line { .. } => 1,
            QuotientKind::Grid { .. } => 2,
        }
    }

    /// Tower level (the period), 0 for trivial quotients.
    pub fn level(&self) -> u32 {
        match self.kind {
            QuotientKind::Trivial => 0,
            QuotientKind::Line { period } | QuotientKind::Grid { period } => period,
        }
    }

    /// Voltage picked up when traversing `oe`; negates under reversal.
    pub fn voltage(&self, oe: OrientedEdge) -> Result<Voltage, GraphError> {
        self.graph.check_edge(oe.edge)?;
        let v = &self.voltages[oe.edge.idx()];
        Ok(if oe.reversed { v.negated() } else { v.clone() })
    }

    /// Total voltage of a closed walk; the walk's lift to the base closes up
    /// exactly when this is the identity.
    pub fn cycle_voltage(&self, walk: &[OrientedEdge]) -> Result<Voltage, GraphError> {
        if !self.graph.is_closed_walk(walk) {
            return Err(GraphError::NotClosedWalk(format!(
                "{} oriented edges do not close up cyclically",
                walk.len()
            )));
        }
        let mut total = Voltage::zero(self.deck_rank());
        for &oe in walk {
            total.add_assign(&self.voltage(oe)?);
        }
        Ok(total)
    }

    /// A closed walk is a true cycle when its lift closes up in the base.
    pub fn is_true_cycle(&self, walk: &[OrientedEdge]) -> Result<bool, GraphError> {
        Ok(self.cycle_voltage(walk)?.is_identity())
    }

    /// Quotient edge under the covering map. Canonical orientations map to
    /// canonical orientations (translations preserve axis directions).
    pub fn project_edge(&self, b: BaseEdgeRef) -> Result<EdgeId, GraphError> {
        match (&self.kind, b) {
            (QuotientKind::Trivial, BaseEdgeRef::Finite(e)) => {
                self.graph.check_edge(e)?;
                Ok(e)
            }
            (QuotientKind::Line { period }, BaseEdgeRef::Lattice(e)) => {
                if e.tail.y != 0 || e.axis != Axis::X {
                    return Err(GraphError::ForeignBaseEdge(format!("{e:?} (line base)")));
                }
                Ok(EdgeId(e.tail.x.rem_euclid(*period as i64) as u32))
            }
            (QuotientKind::Grid { period }, BaseEdgeRef::Lattice(e)) => {
                let n = *period as i64;
                let i = e.tail.x.rem_euclid(n) as u32;
                let j = e.tail.y.rem_euclid(n) as u32;
                let vid = super::lattice::torus_vertex_id(*period, i, j);
                Ok(EdgeId(2 * vid.0 + if e.axis == Axis::X { 0 } else { 1 }))
            }
            (_, other) => Err(GraphError::ForeignBaseEdge(format!("{other:?}"))),
        }
    }

    pub fn project_vertex(&self, b: BaseVertexRef) -> Result<VertexId, GraphError> {
        match (&self.kind, b) {
            (QuotientKind::Trivial, BaseVertexRef::Finite(v)) => {
                self.graph.check_vertex(v)?;
                Ok(v)
            }
            (QuotientKind::Line { period }, BaseVertexRef::Lattice(v)) => {
                if v.y != 0 {
                    return Err(GraphError::ForeignBaseEdge(format!("{v:?} (line base)")));
                }
                Ok(VertexId(v.x.rem_euclid(*period as i64) as u32))
            }
            (QuotientKind::Grid { period }, BaseVertexRef::Lattice(v)) => {
                let n = *period as i64;
                Ok(super::lattice::torus_vertex_id(
                    *period,
                    v.x.rem_euclid(n) as u32,
                    v.y.rem_euclid(n) as u32,
                ))
            }
            (_, other) => Err(GraphError::ForeignBaseEdge(format!("{other:?}"))),
        }
    }

    /// Canonical lift: the base representative with coordinates in
    /// `[0, period)` (the edge's tail determines its cell).
    pub fn canonical_edge_lift(&self, e: EdgeId) -> Result<BaseEdgeRef, GraphError> {
        self.graph.check_edge(e)?;
        Ok(match &self.kind {
            QuotientKind::Trivial => BaseEdgeRef::Finite(e),
            QuotientKind::Line { .. } => BaseEdgeRef::lattice(e.0 as i64, 0, Axis::X),
            QuotientKind::Grid { period } => {
                let vid = e.0 / 2;
                let axis = if e.0 % 2 == 0 { Axis::X } else { Axis::Y };
                let (i, j) = (vid % period, vid / period);
                BaseEdgeRef::lattice(i as i64, j as i64, axis)
            }
        })
    }

    pub fn canonical_vertex_lift(&self, v: VertexId) -> Result<BaseVertexRef, GraphError> {
        self.graph.check_vertex(v)?;
        Ok(match &self.kind {
            QuotientKind::Trivial => BaseVertexRef::Finite(v),
            QuotientKind::Line { .. } => BaseVertexRef::Lattice(BaseVertex::new(v.0 as i64, 0)),
            QuotientKind::Grid { period } => BaseVertexRef::Lattice(BaseVertex::new(
                (v.0 % period) as i64,
                (v.0 / period) as i64,
            )),
        })
    }

    /// Whether a base edge is the canonical lift of its quotient edge.
    pub fn in_domain(&self, b: BaseEdgeRef) -> Result<bool, GraphError> {
        let e = self.project_edge(b)?;
        Ok(self.canonical_edge_lift(e)? == b)
    }

    /// The canonical fundamental domain (canonical lifts of all edges).
    pub fn fundamental_domain(&self) -> FundamentalDomain {
        let edges: Vec<BaseEdgeRef> = self
            .graph
            .edges()
            .map(|e| self.canonical_edge_lift(e).expect("edge ids are valid"))
            .collect();
        let mut vertices: Vec<BaseVertexRef> = edges
            .iter()
            .flat_map(|e| match e {
                BaseEdgeRef::Lattice(be) => {
                    vec![
                        BaseVertexRef::Lattice(be.tail),
                        BaseVertexRef::Lattice(be.head()),
                    ]
                }
                BaseEdgeRef::Finite(eid) => {
                    let (t, h) = self.graph.endpoints(*eid);
                    vec![BaseVertexRef::Finite(t), BaseVertexRef::Finite(h)]
                }
            })
            .collect();
        vertices.sort();
        vertices.dedup();
        FundamentalDomain {
            level: self.level(),
            edges,
            vertices,
        }
    }

    /// Pull a quotient edge set back through the covering map, restricted to
    /// a finite base window. `Tilde` keeps every preimage edge in the window,
    /// `Hat` only those that are canonical lifts. Output preserves window
    /// order.
    pub fn lift_subgraph(
        &self,
        subgraph: &[EdgeId],
        window: &[BaseEdgeRef],
        mode: LiftMode,
    ) -> Result<Vec<BaseEdgeRef>, GraphError> {
        for &e in subgraph {
            self.graph.check_edge(e)?;
        }
        let chosen: HashSet<EdgeId> = subgraph.iter().copied().collect();
        let mut out = Vec::new();
        for &w in window {
            let e = self.project_edge(w)?;
            let keep = match mode {
                LiftMode::Tilde => chosen.contains(&e),
                LiftMode::Hat => chosen.contains(&e) && self.in_domain(w)?,
            };
            if keep {
                out.push(w);
            }
        }
        Ok(out)
    }

    /// The symmetries of the quotient induced by base translations: the cyclic
    /// group of order `period` (line), its square (grid), or the identity.
    pub fn symmetries(&self) -> Vec<GraphSymmetry> {
        match &self.kind {
            QuotientKind::Trivial => {
                let idv: Vec<VertexId> = self.graph.vertices().collect();
                let ide: Vec<EdgeId> = self.graph.edges().collect();
                vec![GraphSymmetry {
                    label: "id".into(),
                    vertex_map: idv,
                    edge_map: ide,
                }]
            }
            QuotientKind::Line { period } => {
                let p = *period;
                (0..p)
                    .map(|k| GraphSymmetry {
                        label: format!("t({k})"),
                        vertex_map: (0..p).map(|i| VertexId((i + k) % p)).collect(),
                        edge_map: (0..p).map(|i| EdgeId((i + k) % p)).collect(),
                    })
                    .collect()
            }
            QuotientKind::Grid { period } => {
                let n = *period;
                let mut out = Vec::new();
                for b in 0..n {
                    for a in 0..n {
                        let vmap: Vec<VertexId> = (0..n * n)
                            .map(|vid| {
                                let (i, j) = (vid % n, vid / n);
                                super::lattice::torus_vertex_id(n, (i + a) % n, (j + b) % n)
                            })
                            .collect();
                        let emap: Vec<EdgeId> = (0..2 * n * n)
                            .map(|eid| {
                                let (vid, axis) = (eid / 2, eid % 2);
                                EdgeId(2 * vmap[vid as usize].0 + axis)
                            })
                            .collect();
                        out.push(GraphSymmetry {
                            label: format!("t({a},{b})"),
                            vertex_map: vmap,
                            edge_map: emap,
                        });
                    }
                }
                out
            }
        }
    }

    /// Rank of the group of deck translations wound by the cycles of the
    /// subgraph on the given edges (0 for forests and contractible subgraphs,
    /// up to the deck rank in general).
    pub fn winding_rank(&self, edges: &[EdgeId]) -> Result<usize, GraphError> {
        let mut b = Graph::builder(self.graph.vertex_count());
        let mut original = Vec::with_capacity(edges.len());
        for &e in edges {
            self.graph.check_edge(e)?;
            let (t, h) = self.graph.endpoints(e);
            b.add_edge(t, h)?;
            original.push(e);
        }
        let sub = b.finish();
        let rows: Vec<Vec<i64>> = sub
            .fundamental_cycles()
            .iter()
            .map(|walk| {
                let mut total = Voltage::zero(self.deck_rank());
                for oe in walk {
                    let orig = OrientedEdge {
                        edge: original[oe.edge.idx()],
                        reversed: oe.reversed,
                    };
                    total.add_assign(&self.voltage(orig).expect("checked above"));
                }
                total.0
            })
            .collect();
        Ok(crate::numeric::integer_rank(&rows))
    }

    /// Check that the canonical domain is connected as a base subgraph.
    pub fn domain_is_connected(&self) -> bool {
        let domain = self.fundamental_domain();
        if domain.edges.is_empty() {
            return true;
        }
        let mut adj: HashMap<BaseVertexRef, Vec<BaseVertexRef>> = HashMap::new();
        for e in &domain.edges {
            let (a, b) = match e {
                BaseEdgeRef::Lattice(be) => (
                    BaseVertexRef::Lattice(be.tail),
                    BaseVertexRef::Lattice(be.head()),
                ),
                BaseEdgeRef::Finite(eid) => {
                    let (t, h) = self.graph.endpoints(*eid);
                    (BaseVertexRef::Finite(t), BaseVertexRef::Finite(h))
                }
            };
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let start = *adj.keys().min().expect("nonempty domain");
        let mut seen: HashSet<BaseVertexRef> = HashSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(v) = queue.pop_front() {
            for w in &adj[&v] {
                if seen.insert(*w) {
                    queue.push_back(*w);
                }
            }
        }
        seen.len() == domain.vertices.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::lattice::build_graph;

    fn line_quotient(p: u32) -> QuotientGraph {
        build_quotient(LatticeSpec::Line, GroupAction::LineTranslation { period: p }).unwrap()
    }

    fn torus_quotient(n: u32) -> QuotientGraph {
        build_quotient(LatticeSpec::Grid, GroupAction::GridTranslation { period: n }).unwrap()
    }

    #[test]
    fn degenerate_actions_rejected() {
        assert!(matches!(
            build_quotient(LatticeSpec::Line, GroupAction::LineTranslation { period: 0 }),
            Err(GraphError::ActionNotFree(_))
        ));
        assert!(matches!(
            build_quotient(LatticeSpec::Grid, GroupAction::GridTranslation { period: 1 }),
            Err(GraphError::QuotientSelfLoop(_))
        ));
        assert!(matches!(
            build_quotient(LatticeSpec::Line, GroupAction::GridTranslation { period: 3 }),
            Err(GraphError::ActionMismatch(_))
        ));
        assert!(matches!(
            build_quotient(LatticeSpec::Grid, GroupAction::Trivial),
            Err(GraphError::ActionMismatch(_))
        ));
    }

    #[test]
    fn freeness_spot_check() {
        assert!(GroupAction::LineTranslation { period: 3 }.check_free_on_box(5, 3));
        assert!(GroupAction::GridTranslation { period: 2 }.check_free_on_box(4, 2));
        assert!(GroupAction::Trivial.check_free_on_box(4, 2));
    }

    #[test]
    fn line_quotient_is_cycle_with_one_wrap_voltage() {
        let q = line_quotient(3);
        assert_eq!(q.graph().vertex_count(), 3);
        assert_eq!(q.graph().edge_count(), 3);
        assert_eq!(q.deck_rank(), 1);
        let volts: Vec<Voltage> = q
            .graph()
            .edges()
            .map(|e| q.voltage(OrientedEdge::forward(e)).unwrap())
            .collect();
        assert_eq!(volts[0], Voltage(vec![0]));
        assert_eq!(volts[1], Voltage(vec![0]));
        assert_eq!(volts[2], Voltage(vec![3]));
        // Reversal negates.
        assert_eq!(
            q.voltage(OrientedEdge::forward(EdgeId(2)).reverse()).unwrap(),
            Voltage(vec![-3])
        );
    }

    #[test]
    fn line_cycle_voltage_and_true_cycles() {
        let q = line_quotient(3);
        let walk: Vec<OrientedEdge> = q.graph().edges().map(OrientedEdge::forward).collect();
        assert_eq!(q.cycle_voltage(&walk).unwrap(), Voltage(vec![3]));
        assert!(!q.is_true_cycle(&walk).unwrap());
        // Rotating the walk does not change the total voltage.
        let rotated = vec![walk[1], walk[2], walk[0]];
        assert_eq!(q.cycle_voltage(&rotated).unwrap(), Voltage(vec![3]));
        // Backtracking walk is a true cycle.
        let back = vec![walk[0], walk[0].reverse()];
        assert!(q.is_true_cycle(&back).unwrap());
        // Non-closed walks are rejected.
        assert!(matches!(
            q.cycle_voltage(&walk[..2]),
            Err(GraphError::NotClosedWalk(_))
        ));
        assert!(matches!(
            q.cycle_voltage(&[]),
            Err(GraphError::NotClosedWalk(_))
        ));
    }

    #[test]
    fn torus_wrap_voltages() {
        let n = 3;
        let q = torus_quotient(n);
        assert_eq!(q.graph().edge_count(), 18);
        assert_eq!(q.deck_rank(), 2);
        // Horizontal loop through row j = 1 picks up voltage (3, 0).
        let walk: Vec<OrientedEdge> = (0..n)
            .map(|i| {
                let e = q
                    .project_edge(BaseEdgeRef::lattice(i as i64, 1, Axis::X))
                    .unwrap();
                OrientedEdge::forward(e)
            })
            .collect();
        assert_eq!(q.cycle_voltage(&walk).unwrap(), Voltage(vec![3, 0]));
        assert!(!q.is_true_cycle(&walk).unwrap());
        // A unit square is a true cycle.
        let square = vec![
            OrientedEdge::forward(q.project_edge(BaseEdgeRef::lattice(0, 0, Axis::X)).unwrap()),
            OrientedEdge::forward(q.project_edge(BaseEdgeRef::lattice(1, 0, Axis::Y)).unwrap()),
            OrientedEdge::forward(q.project_edge(BaseEdgeRef::lattice(0, 1, Axis::X)).unwrap())
                .reverse(),
            OrientedEdge::forward(q.project_edge(BaseEdgeRef::lattice(0, 0, Axis::Y)).unwrap())
                .reverse(),
        ];
        assert!(q.is_true_cycle(&square).unwrap());
    }

    #[test]
    fn projection_and_canonical_lift_roundtrip() {
        let q = torus_quotient(4);
        for e in q.graph().edges() {
            let lift = q.canonical_edge_lift(e).unwrap();
            assert_eq!(q.project_edge(lift).unwrap(), e);
            assert!(q.in_domain(lift).unwrap());
        }
        // A translated copy projects to the same edge but leaves the domain.
        let w = BaseEdgeRef::lattice(1, 1, Axis::X);
        let far = BaseEdgeRef::lattice(5, -3, Axis::X);
        assert_eq!(q.project_edge(w).unwrap(), q.project_edge(far).unwrap());
        assert!(q.in_domain(w).unwrap());
        assert!(!q.in_domain(far).unwrap());
    }

    #[test]
    fn line_domain_matches_prefix_segment() {
        let q = line_quotient(3);
        let d = q.fundamental_domain();
        assert_eq!(d.level, 3);
        assert_eq!(
            d.edges,
            vec![
                BaseEdgeRef::lattice(0, 0, Axis::X),
                BaseEdgeRef::lattice(1, 0, Axis::X),
                BaseEdgeRef::lattice(2, 0, Axis::X),
            ]
        );
        // Endpoints 0,1,2,3: the segment from 0 to 3.
        assert_eq!(d.vertices.len(), 4);
        assert!(q.domain_is_connected());
    }

    #[test]
    fn domains_are_nested_and_connected_along_towers() {
        let towers = [2u32, 3, 4, 6];
        let mut prev: Option<Vec<BaseEdgeRef>> = None;
        for &n in &towers {
            let q = torus_quotient(n);
            assert!(q.domain_is_connected());
            let d = q.fundamental_domain();
            assert_eq!(d.edges.len(), q.graph().edge_count());
            if let Some(p) = prev {
                for e in &p {
                    assert!(d.contains_edge(e), "domain at level {n} lost {e:?}");
                }
            }
            prev = Some(d.edges);
        }
    }

    #[test]
    fn domain_edge_bijective() {
        let q = torus_quotient(3);
        let d = q.fundamental_domain();
        let mut images: Vec<EdgeId> = d
            .edges
            .iter()
            .map(|&e| q.project_edge(e).unwrap())
            .collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), q.graph().edge_count());
    }

    #[test]
    fn trivial_quotient_is_identity() {
        let g = build_graph(LatticeSpec::Complete { n: 4 }).unwrap();
        let q = QuotientGraph::trivial(g);
        assert_eq!(q.deck_rank(), 0);
        for e in q.graph().edges() {
            assert!(q.voltage(OrientedEdge::forward(e)).unwrap().is_identity());
            assert_eq!(q.project_edge(BaseEdgeRef::Finite(e)).unwrap(), e);
            assert!(q.in_domain(BaseEdgeRef::Finite(e)).unwrap());
        }
        // Every fundamental cycle is a true cycle.
        for c in q.graph().fundamental_cycles() {
            assert!(q.is_true_cycle(&c).unwrap());
        }
        let d = q.fundamental_domain();
        assert_eq!(d.edges.len(), 6);
        assert_eq!(d.vertices.len(), 4);
        assert!(q.domain_is_connected());
    }

    #[test]
    fn lift_subgraph_tilde_and_hat() {
        let q = torus_quotient(2);
        // Window: both lifts of the X-edge at (0,0), one inside the domain.
        let inside = BaseEdgeRef::lattice(0, 0, Axis::X);
        let outside = BaseEdgeRef::lattice(2, 2, Axis::X);
        let window = [inside, outside];
        let e = q.project_edge(inside).unwrap();
        assert_eq!(q.project_edge(outside).unwrap(), e);
        let tilde = q.lift_subgraph(&[e], &window, LiftMode::Tilde).unwrap();
        assert_eq!(tilde, vec![inside, outside]);
        let hat = q.lift_subgraph(&[e], &window, LiftMode::Hat).unwrap();
        assert_eq!(hat, vec![inside]);
        // Edges not in the subgraph never lift.
        let other = EdgeId((e.0 + 1) % 8);
        let none = q.lift_subgraph(&[other], &window, LiftMode::Tilde).unwrap();
        assert!(none.is_empty());
        // The whole quotient lifts tilde-wise to the whole window.
        let all: Vec<EdgeId> = q.graph().edges().collect();
        let full = q.lift_subgraph(&all, &window, LiftMode::Tilde).unwrap();
        assert_eq!(full.len(), window.len());
    }

    #[test]
    fn foreign_window_edges_rejected() {
        let q = line_quotient(3);
        // Grid edge into a line quotient.
        assert!(matches!(
            q.project_edge(BaseEdgeRef::lattice(0, 1, Axis::Y)),
            Err(GraphError::ForeignBaseEdge(_))
        ));
        // Finite edge ref into a lattice quotient.
        assert!(matches!(
            q.project_edge(BaseEdgeRef::Finite(EdgeId(0))),
            Err(GraphError::ForeignBaseEdge(_))
        ));
    }

    #[test]
    fn winding_rank_of_subgraphs() {
        let q = torus_quotient(3);
        // A spanning tree has no cycles at all.
        let tree = crate::determinantal::wilson_ust(q.graph(), &mut {
            use rand::SeedableRng;
            rand_chacha::ChaCha8Rng::seed_from_u64(5)
        })
        .unwrap();
        assert_eq!(q.winding_rank(&tree).unwrap(), 0);
        // One horizontal ring winds in one direction only.
        let ring: Vec<EdgeId> = (0..3)
            .map(|i| q.project_edge(BaseEdgeRef::lattice(i, 0, Axis::X)).unwrap())
            .collect();
        assert_eq!(q.winding_rank(&ring).unwrap(), 1);
        // A contractible square does not wind.
        let square: Vec<EdgeId> = [
            BaseEdgeRef::lattice(0, 0, Axis::X),
            BaseEdgeRef::lattice(1, 0, Axis::Y),
            BaseEdgeRef::lattice(0, 1, Axis::X),
            BaseEdgeRef::lattice(0, 0, Axis::Y),
        ]
        .iter()
        .map(|&w| q.project_edge(w).unwrap())
        .collect();
        assert_eq!(q.winding_rank(&square).unwrap(), 0);
        // The full edge set winds both ways.
        let all: Vec<EdgeId> = q.graph().edges().collect();
        assert_eq!(q.winding_rank(&all).unwrap(), 2);
    }

    #[test]
    fn symmetries_form_transitive_edge_actions() {
        let q = torus_quotient(2);
        let syms = q.symmetries();
        assert_eq!(syms.len(), 4);
        for s in &syms {
            // Permutations preserve endpoints up to the vertex map.
            for e in q.graph().edges() {
                let (t, h) = q.graph().endpoints(e);
                let (t2, h2) = q.graph().endpoints(s.edge_map[e.idx()]);
                assert_eq!(t2, s.vertex_map[t.idx()]);
                assert_eq!(h2, s.vertex_map[h.idx()]);
            }
        }
        let line = line_quotient(4);
        assert_eq!(line.symmetries().len(), 4);
        let g = build_graph(LatticeSpec::Complete { n: 3 }).unwrap();
        assert_eq!(QuotientGraph::trivial(g).symmetries().len(), 1);
    }
}
