//! The finite-dimensional antisymmetric edge-function space and its
//! distinguished subspaces.
//!
//! An antisymmetric function on oriented edges is determined by its values on
//! the canonical orientations, so vectors are stored as one coefficient per
//! edge id. The inner product sums over unoriented edges, which makes every
//! unit edge indicator `chi(e)` a unit vector.
//!
//! Distinguished subspaces: the star space and cycle space of a graph, the
//! true-cycle subspace of a quotient (closed walks whose lifts close up), the
//! complementary cycle part, and the harmonic complement. For a finite
//! connected graph the star and cycle spaces are orthogonal complements, so
//! the harmonic part is zero and the wired and free forest measures below
//! coincide.

pub mod window;

use thiserror::Error;

use crate::graph::quotient::QuotientGraph;
use crate::graph::{EdgeId, Graph, GraphError, OrientedEdge, VertexId};
use crate::numeric;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("ambient dimensions differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("subspace is not contained in the proposed ambient space (residual {0:.3e})")]
    NotContained(f64),
    #[error("windows differ between the two projections")]
    WindowMismatch,
    #[error("invalid window: {0}")]
    BadWindow(String),
    #[error("window projection did not stabilize within radius {0}")]
    NotStabilized(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Tolerance for membership/containment checks between subspaces.
pub const CONTAINMENT_TOL: f64 = 1e-9;

/// An antisymmetric edge function, stored by canonical-orientation values.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeVector {
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn zero(ambient: usize) -> Self {
        EdgeVector {
            values: vec![0.0; ambient],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        EdgeVector { values }
    }

    /// Unit indicator of an oriented edge: +1 on `oe`, -1 on its reversal.
    pub fn chi(g: &Graph, oe: OrientedEdge) -> Result<Self, GraphError> {
        g.check_edge(oe.edge)?;
        let mut v = EdgeVector::zero(g.edge_count());
        v.values[oe.edge.idx()] = oe.sign();
        Ok(v)
    }

    /// The star of a vertex: +1 on each edge oriented out of `v` (so an edge
    /// whose canonical head is `v` contributes -1). Parallel edges contribute
    /// separately.
    pub fn star(g: &Graph, v: VertexId) -> Result<Self, GraphError> {
        g.check_vertex(v)?;
        let mut out = EdgeVector::zero(g.edge_count());
        for &oe in g.out_edges(v) {
            out.values[oe.edge.idx()] += oe.sign();
        }
        Ok(out)
    }

    pub fn ambient_dim(&self) -> usize {
        self.values.len()
    }

    /// Value on an oriented edge; antisymmetric under reversal.
    pub fn value(&self, oe: OrientedEdge) -> f64 {
        self.values[oe.edge.idx()] * oe.sign()
    }

    pub fn coefficient(&self, e: EdgeId) -> f64 {
        self.values[e.idx()]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.values
    }

    pub fn add_scaled(&mut self, c: f64, other: &EdgeVector) {
        assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn inner(&self, other: &EdgeVector) -> Result<f64, FlowError> {
        if self.values.len() != other.values.len() {
            return Err(FlowError::AmbientMismatch(
                self.values.len(),
                other.values.len(),
            ));
        }
        Ok(numeric::dot(&self.values, &other.values))
    }

    pub fn norm(&self) -> f64 {
        numeric::norm(&self.values)
    }
}

/// A linear subspace of the edge space, stored as an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<EdgeVector>,
}

impl Subspace {
    /// Orthonormalize a spanning family (modified Gram-Schmidt, dependents
    /// dropped). All vectors must share the ambient dimension.
    pub fn from_spanning(ambient: usize, vectors: &[EdgeVector]) -> Result<Self, FlowError> {
        let raw: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| {
                if v.ambient_dim() != ambient {
                    Err(FlowError::AmbientMismatch(ambient, v.ambient_dim()))
                } else {
                    Ok(v.values.clone())
                }
            })
            .collect::<Result<_, _>>()?;
        let basis = numeric::orthonormalize(&raw)
            .into_iter()
            .map(EdgeVector::from_values)
            .collect();
        Ok(Subspace { ambient, basis })
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    /// The whole edge space, spanned by the canonical edge indicators.
    pub fn full(ambient: usize) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                let mut v = EdgeVector::zero(ambient);
                v.values[i] = 1.0;
                v
            })
            .collect();
        Subspace { ambient, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[EdgeVector] {
        &self.basis
    }

    /// Orthogonal projection of `f` onto this subspace.
    pub fn project(&self, f: &EdgeVector) -> Result<EdgeVector, FlowError> {
        if f.ambient_dim() != self.ambient {
            return Err(FlowError::AmbientMismatch(self.ambient, f.ambient_dim()));
        }
        let mut out = EdgeVector::zero(self.ambient);
        for b in &self.basis {
            let c = numeric::dot(&f.values, &b.values);
            out.add_scaled(c, b);
        }
        Ok(out)
    }

    /// Membership up to the containment tolerance (relative for large norms).
    pub fn contains(&self, f: &EdgeVector) -> Result<bool, FlowError> {
        let p = self.project(f)?;
        let mut residual = f.clone();
        residual.add_scaled(-1.0, &p);
        Ok(residual.norm() <= CONTAINMENT_TOL * f.norm().max(1.0))
    }

    /// Orthogonal complement of `self` inside `ambient_sub`; errors when
    /// `self` is not contained in `ambient_sub`.
    pub fn orthocomplement_in(&self, ambient_sub: &Subspace) -> Result<Subspace, FlowError> {
        if self.ambient != ambient_sub.ambient {
            return Err(FlowError::AmbientMismatch(
                self.ambient,
                ambient_sub.ambient,
            ));
        }
        let mut worst = 0.0f64;
        for b in &self.basis {
            let p = ambient_sub.project(b)?;
            let mut r = b.clone();
            r.add_scaled(-1.0, &p);
            worst = worst.max(r.norm());
        }
        if worst > CONTAINMENT_TOL {
            return Err(FlowError::NotContained(worst));
        }
        // Residuals of the ambient basis against self span the complement.
        let residuals: Vec<EdgeVector> = ambient_sub
            .basis
            .iter()
            .map(|a| {
                let p = self.project(a)?;
                let mut r = a.clone();
                r.add_scaled(-1.0, &p);
                Ok(r)
            })
            .collect::<Result<_, FlowError>>()?;
        let out = Subspace::from_spanning(self.ambient, &residuals)?;
        debug_assert_eq!(out.dim(), ambient_sub.dim() - self.dim());
        Ok(out)
    }

    /// Union of two subspaces (span of both bases).
    pub fn join(&self, other: &Subspace) -> Result<Subspace, FlowError> {
        if self.ambient != other.ambient {
            return Err(FlowError::AmbientMismatch(self.ambient, other.ambient));
        }
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::from_spanning(self.ambient, &all)
    }

    /// Largest absolute inner product between the bases of two subspaces;
    /// zero for orthogonal subspaces.
    pub fn max_cross_inner(&self, other: &Subspace) -> Result<f64, FlowError> {
        if self.ambient != other.ambient {
            return Err(FlowError::AmbientMismatch(self.ambient, other.ambient));
        }
        let mut worst = 0.0f64;
        for a in &self.basis {
            for b in &other.basis {
                worst = worst.max(numeric::dot(&a.values, &b.values).abs());
            }
        }
        Ok(worst)
    }

}

/// Span of the vertex stars. For a connected graph its dimension is |V| - 1
/// (the stars have a single linear relation: they sum to zero).
pub fn star_space(g: &Graph) -> Subspace {
    let stars: Vec<EdgeVector> = g
        .vertices()
        .map(|v| EdgeVector::star(g, v).expect("vertex ids are valid"))
        .collect();
    Subspace::from_spanning(g.edge_count(), &stars).expect("uniform ambient")
}

/// Turn a closed walk into its cycle vector (sum of oriented indicators;
/// backtracking pairs cancel).
pub fn cycle_vector(g: &Graph, walk: &[OrientedEdge]) -> Result<EdgeVector, GraphError> {
    if !g.is_closed_walk(walk) {
        return Err(GraphError::NotClosedWalk(format!(
            "{} oriented edges do not close up",
            walk.len()
        )));
    }
    let mut v = EdgeVector::zero(g.edge_count());
    for &oe in walk {
        v.values[oe.edge.idx()] += oe.sign();
    }
    Ok(v)
}

/// Span of all cycle vectors; dimension |E| - |V| + 1 for connected graphs.
pub fn cycle_space(g: &Graph) -> Subspace {
    let cycles: Vec<EdgeVector> = g
        .fundamental_cycles()
        .iter()
        .map(|w| cycle_vector(g, w).expect("fundamental cycles are closed"))
        .collect();
    Subspace::from_spanning(g.edge_count(), &cycles).expect("uniform ambient")
}

/// Span of the true cycles of a quotient: integer combinations of fundamental
/// cycles whose total voltage vanishes. The integer kernel is computed
/// exactly, then orthonormalized.
pub fn true_cycle_space(q: &QuotientGraph) -> Subspace {
    let g = q.graph();
    let walks = g.fundamental_cycles();
    if q.deck_rank() == 0 {
        return cycle_space(g);
    }
    let voltage_rows: Vec<Vec<i64>> = walks
        .iter()
        .map(|w| q.cycle_voltage(w).expect("fundamental cycles are closed").0)
        .collect();
    let kernel = crate::numeric::integer_kernel(&voltage_rows);
    let vectors: Vec<EdgeVector> = kernel
        .iter()
        .map(|combo| {
            let mut v = EdgeVector::zero(g.edge_count());
            for (coeff, walk) in combo.iter().zip(&walks) {
                if *coeff != 0 {
                    let c = cycle_vector(g, walk).expect("closed");
                    v.add_scaled(*coeff as f64, &c);
                }
            }
            v
        })
        .collect();
    Subspace::from_spanning(g.edge_count(), &vectors).expect("uniform ambient")
}

/// Orthogonal complement of star ⊕ cycle; zero on finite connected graphs.
pub fn harmonic_space(g: &Graph) -> Subspace {
    let joined = star_space(g).join(&cycle_space(g)).expect("same ambient");
    joined
        .orthocomplement_in(&Subspace::full(g.edge_count()))
        .expect("contained in full space")
}

/// Dimensions and orthogonality residuals of the edge-space decomposition
/// star ⊕ true-cycle ⊕ (cycle ⊖ true-cycle) ⊕ harmonic.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub edge_count: usize,
    pub star_dim: usize,
    pub cycle_dim: usize,
    pub true_cycle_dim: usize,
    /// Complement of the true cycles inside the cycle space.
    pub extra_cycle_dim: usize,
    pub harmonic_dim: usize,
    /// Largest |<a, b>| over basis pairs from different summands.
    pub max_cross_inner: f64,
    /// Largest deviation of a summand basis from orthonormality.
    pub max_basis_residual: f64,
}

impl DecompositionReport {
    pub fn dims_sum_to_ambient(&self) -> bool {
        self.star_dim + self.true_cycle_dim + self.extra_cycle_dim + self.harmonic_dim
            == self.edge_count
    }
}

fn basis_orthonormality_residual(s: &Subspace) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in s.basis().iter().enumerate() {
        for (j, b) in s.basis().iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b).unwrap() - target).abs());
        }
    }
    worst
}

/// Compute the full decomposition for a quotient (use a trivial quotient for
/// a plain graph, where true cycles are all cycles).
pub fn verify_decomposition(q: &QuotientGraph) -> Result<DecompositionReport, FlowError> {
    let g = q.graph();
    let star = star_space(g);
    let cycle = cycle_space(g);
    let true_cycle = true_cycle_space(q);
    let extra = true_cycle.orthocomplement_in(&cycle)?;
    let harmonic = harmonic_space(g);
    let parts = [&star, &true_cycle, &extra, &harmonic];
    let mut cross = 0.0f64;
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            cross = cross.max(parts[i].max_cross_inner(parts[j])?);
        }
    }
    let mut basis_residual = 0.0f64;
    for p in parts {
        basis_residual = basis_residual.max(basis_orthonormality_residual(p));
    }
    Ok(DecompositionReport {
        edge_count: g.edge_count(),
        star_dim: star.dim(),
        cycle_dim: cycle.dim(),
        true_cycle_dim: true_cycle.dim(),
        extra_cycle_dim: extra.dim(),
        harmonic_dim: harmonic.dim(),
        max_cross_inner: cross,
        max_basis_residual: basis_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::lattice::{build_graph, LatticeSpec};
    use crate::graph::quotient::{build_quotient, GroupAction};
    use approx::assert_relative_eq;

    fn c3() -> Graph {
        build_graph(LatticeSpec::Cycle { n: 3 }).unwrap()
    }

    #[test]
    fn chi_is_unit_and_antisymmetric() {
        let g = c3();
        let oe = OrientedEdge::forward(EdgeId(1));
        let chi = EdgeVector::chi(&g, oe).unwrap();
        assert_relative_eq!(chi.norm(), 1.0);
        assert_relative_eq!(chi.value(oe), 1.0);
        assert_relative_eq!(chi.value(oe.reverse()), -1.0);
        let chi_rev = EdgeVector::chi(&g, oe.reverse()).unwrap();
        let mut sum = chi.clone();
        sum.add_scaled(1.0, &chi_rev);
        assert_relative_eq!(sum.norm(), 0.0);
        assert!(EdgeVector::chi(&g, OrientedEdge::forward(EdgeId(7))).is_err());
    }

    #[test]
    fn chis_are_orthonormal_across_edges() {
        let g = build_graph(LatticeSpec::Complete { n: 4 }).unwrap();
        for e in g.edges() {
            for f in g.edges() {
                let a = EdgeVector::chi(&g, OrientedEdge::forward(e)).unwrap();
                let b = EdgeVector::chi(&g, OrientedEdge::forward(f)).unwrap();
                let expected = if e == f { 1.0 } else { 0.0 };
                assert_relative_eq!(a.inner(&b).unwrap(), expected);
            }
        }
    }

    #[test]
    fn star_on_triangle() {
        let g = c3();
        // Vertex 1 is head of edge 0 and tail of edge 1.
        let s = EdgeVector::star(&g, VertexId(1)).unwrap();
        assert_relative_eq!(s.coefficient(EdgeId(0)), -1.0);
        assert_relative_eq!(s.coefficient(EdgeId(1)), 1.0);
        assert_relative_eq!(s.coefficient(EdgeId(2)), 0.0);
        assert_relative_eq!(s.norm(), 2.0f64.sqrt());
    }

    #[test]
    fn star_counts_parallel_edges_separately() {
        let g = build_graph(LatticeSpec::Cycle { n: 2 }).unwrap();
        let s = EdgeVector::star(&g, VertexId(0)).unwrap();
        // Edge 0: 0 -> 1 (tail), edge 1: 1 -> 0 (head).
        assert_relative_eq!(s.coefficient(EdgeId(0)), 1.0);
        assert_relative_eq!(s.coefficient(EdgeId(1)), -1.0);
        assert_relative_eq!(s.norm(), 2.0f64.sqrt());
    }

    #[test]
    fn stars_sum_to_zero() {
        let g = build_graph(LatticeSpec::Complete { n: 5 }).unwrap();
        let mut total = EdgeVector::zero(g.edge_count());
        for v in g.vertices() {
            total.add_scaled(1.0, &EdgeVector::star(&g, v).unwrap());
        }
        assert_relative_eq!(total.norm(), 0.0);
    }

    #[test]
    fn star_and_cycle_spaces_decompose_triangle() {
        let g = c3();
        let star = star_space(&g);
        let cycle = cycle_space(&g);
        assert_eq!(star.dim(), 2);
        assert_eq!(cycle.dim(), 1);
        assert!(star.max_cross_inner(&cycle).unwrap() < 1e-12);
        assert_eq!(harmonic_space(&g).dim(), 0);
        // The cycle vector itself lies in the cycle space.
        let walk = g.fundamental_cycles().remove(0);
        let cv = cycle_vector(&g, &walk).unwrap();
        assert!(cycle.contains(&cv).unwrap());
        assert!(!star.contains(&cv).unwrap());
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let g = build_graph(LatticeSpec::Complete { n: 4 }).unwrap();
        let star = star_space(&g);
        let f = EdgeVector::from_values((0..6).map(|i| (i as f64) - 2.5).collect());
        let p = star.project(&f).unwrap();
        let pp = star.project(&p).unwrap();
        let mut diff = p.clone();
        diff.add_scaled(-1.0, &pp);
        assert!(diff.norm() < 1e-12);
        // Residual is orthogonal to the subspace.
        let mut r = f.clone();
        r.add_scaled(-1.0, &p);
        for b in star.basis() {
            assert!(r.inner(b).unwrap().abs() < 1e-12);
        }
        // Ambient mismatch is rejected.
        assert!(star.project(&EdgeVector::zero(5)).is_err());
    }

    #[test]
    fn orthocomplement_requires_containment() {
        let g = c3();
        let star = star_space(&g);
        let cycle = cycle_space(&g);
        assert!(matches!(
            star.orthocomplement_in(&cycle),
            Err(FlowError::NotContained(_))
        ));
        let inside = cycle.orthocomplement_in(&Subspace::full(3)).unwrap();
        assert_eq!(inside.dim(), 2);
    }

    #[test]
    fn true_cycles_of_line_quotient_vanish() {
        let q = build_quotient(LatticeSpec::Line, GroupAction::LineTranslation { period: 3 })
            .unwrap();
        // The only cycle winds; no true cycles.
        assert_eq!(cycle_space(q.graph()).dim(), 1);
        assert_eq!(true_cycle_space(&q).dim(), 0);
    }

    #[test]
    fn true_cycles_of_torus() {
        for n in [2u32, 3] {
            let q = build_quotient(
                LatticeSpec::Grid,
                GroupAction::GridTranslation { period: n },
            )
            .unwrap();
            let m = q.graph().edge_count();
            let cycles = cycle_space(q.graph());
            let true_cycles = true_cycle_space(&q);
            assert_eq!(cycles.dim(), m - (n * n) as usize + 1);
            assert_eq!(true_cycles.dim(), (n * n) as usize - 1);
            let extra = true_cycles.orthocomplement_in(&cycles).unwrap();
            assert_eq!(extra.dim(), 2);
            // Each true-cycle basis vector is orthogonal to all stars.
            let star = star_space(q.graph());
            assert!(star.max_cross_inner(&true_cycles).unwrap() < 1e-12);
        }
    }

    #[test]
    fn decomposition_report_on_torus() {
        let q = build_quotient(
            LatticeSpec::Grid,
            GroupAction::GridTranslation { period: 3 },
        )
        .unwrap();
        let r = verify_decomposition(&q).unwrap();
        assert_eq!(r.edge_count, 18);
        assert_eq!(r.star_dim, 8);
        assert_eq!(r.true_cycle_dim, 8);
        assert_eq!(r.extra_cycle_dim, 2);
        assert_eq!(r.harmonic_dim, 0);
        assert!(r.dims_sum_to_ambient());
        assert!(r.max_cross_inner < 1e-9);
        assert!(r.max_basis_residual < 1e-9);
    }

    #[test]
    fn trivial_quotient_decomposition_matches_graph() {
        let g = build_graph(LatticeSpec::Complete { n: 4 }).unwrap();
        let r = verify_decomposition(&QuotientGraph::trivial(g)).unwrap();
        assert_eq!(r.star_dim, 3);
        assert_eq!(r.cycle_dim, 3);
        assert_eq!(r.true_cycle_dim, 3);
        assert_eq!(r.extra_cycle_dim, 0);
        assert_eq!(r.harmonic_dim, 0);
        assert!(r.dims_sum_to_ambient());
    }
}
