//! Window-restricted projections of flow families.
//!
//! A window is a finite list of distinct base edges. Restricting a family of
//! flows (stars or cycles) to the window coordinates and taking the span
//! gives a subspace of `R^window`; comparing the base-lattice family with the
//! pulled-back quotient family measures how well a finite quotient level
//! already resolves the infinite-lattice geometry around the window.
//!
//! Quotient families are pulled back through canonical lifts (hat lifts):
//! window edges outside the fundamental domain read zero.

use crate::graph::lattice::{BaseEdge, BaseVertex, LatticeSpec};
use crate::graph::quotient::{BaseEdgeRef, QuotientGraph};
use crate::numeric;

use super::{EdgeVector, FlowError};

/// Which family of flows to restrict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowFamily {
    Stars,
    Cycles,
}

/// Growth cap for the cycle-family stabilization loop on the grid.
pub const STABILIZATION_RADIUS_CAP: u32 = 8;

/// A subspace of `R^window`, given by an orthonormal basis in window
/// coordinates.
#[derive(Clone, Debug)]
pub struct WindowSubspace {
    window: Vec<BaseEdgeRef>,
    basis: Vec<Vec<f64>>,
}

impl WindowSubspace {
    pub fn window(&self) -> &[BaseEdgeRef] {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Frobenius distance between the two orthogonal projectors. Both
    /// subspaces must live over the identical window.
    pub fn distance(&self, other: &WindowSubspace) -> Result<f64, FlowError> {
        if self.window != other.window {
            return Err(FlowError::WindowMismatch);
        }
        Ok(numeric::projector_distance(
            &self.basis,
            &other.basis,
            self.window.len(),
        ))
    }
}

fn check_window(window: &[BaseEdgeRef]) -> Result<(), FlowError> {
    if window.is_empty() {
        return Err(FlowError::BadWindow("window is empty".into()));
    }
    let mut seen = window.to_vec();
    seen.sort();
    seen.dedup();
    if seen.len() != window.len() {
        return Err(FlowError::BadWindow("window has duplicate edges".into()));
    }
    Ok(())
}

fn lattice_window(base: LatticeSpec, window: &[BaseEdgeRef]) -> Result<Vec<BaseEdge>, FlowError> {
    check_window(window)?;
    window
        .iter()
        .map(|w| match w {
            BaseEdgeRef::Lattice(e) => {
                let line_ok = base != LatticeSpec::Line
                    || (e.tail.y == 0 && e.axis == crate::graph::lattice::Axis::X);
                if line_ok {
                    Ok(*e)
                } else {
                    Err(FlowError::BadWindow(format!("{e:?} is not a line edge")))
                }
            }
            BaseEdgeRef::Finite(_) => Err(FlowError::BadWindow(
                "finite edge reference in a lattice window".into(),
            )),
        })
        .collect()
}

/// Restriction of the star family of the infinite base lattice to the window:
/// the span of all vertex stars, read off on the window coordinates. Only
/// vertices incident to the window contribute.
fn base_star_vectors(window: &[BaseEdge]) -> Vec<Vec<f64>> {
    let mut vertices: Vec<BaseVertex> = window
        .iter()
        .flat_map(|e| [e.tail, e.head()])
        .collect();
    vertices.sort();
    vertices.dedup();
    vertices
        .iter()
        .map(|&v| {
            window
                .iter()
                .map(|e| {
                    let mut c = 0.0;
                    if e.tail == v {
                        c += 1.0;
                    }
                    if e.head() == v {
                        c -= 1.0;
                    }
                    c
                })
                .collect()
        })
        .collect()
}

/// Restriction of one unit square (counterclockwise) to the window.
fn square_restriction(window: &[BaseEdge], x: i64, y: i64) -> Vec<f64> {
    use crate::graph::lattice::Axis;
    let signed: [(BaseEdge, f64); 4] = [
        (BaseEdge::new(x, y, Axis::X), 1.0),
        (BaseEdge::new(x + 1, y, Axis::Y), 1.0),
        (BaseEdge::new(x, y + 1, Axis::X), -1.0),
        (BaseEdge::new(x, y, Axis::Y), -1.0),
    ];
    window
        .iter()
        .map(|e| {
            signed
                .iter()
                .filter(|(s, _)| s == e)
                .map(|(_, sign)| *sign)
                .sum()
        })
        .collect()
}

fn grid_cycle_vectors(window: &[BaseEdge], radius: i64) -> Vec<Vec<f64>> {
    let xs: Vec<i64> = window.iter().flat_map(|e| [e.tail.x, e.head().x]).collect();
    let ys: Vec<i64> = window.iter().flat_map(|e| [e.tail.y, e.head().y]).collect();
    let (xmin, xmax) = (xs.iter().min().unwrap(), xs.iter().max().unwrap());
    let (ymin, ymax) = (ys.iter().min().unwrap(), ys.iter().max().unwrap());
    let mut out = Vec::new();
    for x in (xmin - radius - 1)..=(xmax + radius) {
        for y in (ymin - radius - 1)..=(ymax + radius) {
            let v = square_restriction(window, x, y);
            if v.iter().any(|&c| c != 0.0) {
                out.push(v);
            }
        }
    }
    out
}

/// Project a flow family of the infinite base lattice onto the window.
///
/// Stars are supported by the incident vertices, so their span is exact. The
/// grid cycle family is generated by unit squares; the generating set grows
/// with an expanding radius around the window until the projected span stops
/// moving (squares sharing no window edge restrict to zero, so this
/// stabilizes after one growth step). Line cycles are zero.
pub fn base_window_projection(
    base: LatticeSpec,
    window: &[BaseEdgeRef],
    family: FlowFamily,
) -> Result<WindowSubspace, FlowError> {
    if base != LatticeSpec::Line && base != LatticeSpec::Grid {
        return Err(FlowError::BadWindow(format!(
            "{base:?} is not an infinite base lattice"
        )));
    }
    let lattice = lattice_window(base, window)?;
    let vectors = match (family, base) {
        (FlowFamily::Stars, _) => base_star_vectors(&lattice),
        (FlowFamily::Cycles, LatticeSpec::Line) => Vec::new(),
        (FlowFamily::Cycles, LatticeSpec::Grid) => {
            let mut current = numeric::orthonormalize(&grid_cycle_vectors(&lattice, 0));
            let mut stable = None;
            for r in 1..=STABILIZATION_RADIUS_CAP {
                let next = numeric::orthonormalize(&grid_cycle_vectors(&lattice, r as i64));
                let dist = numeric::projector_distance(&current, &next, lattice.len());
                current = next;
                if dist <= 1e-9 {
                    stable = Some(current);
                    break;
                }
            }
            match stable {
                Some(basis) => {
                    return Ok(WindowSubspace {
                        window: window.to_vec(),
                        basis,
                    })
                }
                None => return Err(FlowError::NotStabilized(STABILIZATION_RADIUS_CAP)),
            }
        }
        (FlowFamily::Cycles, _) => unreachable!(),
    };
    Ok(WindowSubspace {
        window: window.to_vec(),
        basis: numeric::orthonormalize(&vectors),
    })
}

/// Read a quotient flow off the window through hat lifts: a window edge in
/// the fundamental domain reads the flow at its projection, others read 0.
fn hat_restriction(
    q: &QuotientGraph,
    flow: &EdgeVector,
    window: &[BaseEdgeRef],
) -> Result<Vec<f64>, FlowError> {
    window
        .iter()
        .map(|&w| {
            Ok(if q.in_domain(w)? {
                flow.coefficient(q.project_edge(w)?)
            } else {
                0.0
            })
        })
        .collect()
}

/// Project the hat-lifted star or true-cycle family of a quotient onto the
/// window.
pub fn quotient_window_projection(
    q: &QuotientGraph,
    window: &[BaseEdgeRef],
    family: FlowFamily,
) -> Result<WindowSubspace, FlowError> {
    check_window(window)?;
    let flows: Vec<EdgeVector> = match family {
        FlowFamily::Stars => q
            .graph()
            .vertices()
            .map(|v| EdgeVector::star(q.graph(), v).expect("valid vertex"))
            .collect(),
        FlowFamily::Cycles => super::true_cycle_space(q).basis().to_vec(),
    };
    let restricted: Vec<Vec<f64>> = flows
        .iter()
        .map(|f| hat_restriction(q, f, window))
        .collect::<Result<_, _>>()?;
    Ok(WindowSubspace {
        window: window.to_vec(),
        basis: numeric::orthonormalize(&restricted),
    })
}

/// Convenience: distance between the base family and the quotient family on
/// the same window.
pub fn family_distance(
    base: LatticeSpec,
    q: &QuotientGraph,
    window: &[BaseEdgeRef],
    family: FlowFamily,
) -> Result<f64, FlowError> {
    let b = base_window_projection(base, window, family)?;
    let h = quotient_window_projection(q, window, family)?;
    b.distance(&h)
}

/// Whether the fundamental domain of `q` contains every base edge incident to
/// the window's endpoints (the coverage condition under which the projected
/// families agree exactly).
pub fn domain_covers_window(
    base: LatticeSpec,
    q: &QuotientGraph,
    window: &[BaseEdgeRef],
) -> Result<bool, FlowError> {
    let lattice = lattice_window(base, window)?;
    let mut vertices: Vec<BaseVertex> = lattice.iter().flat_map(|e| [e.tail, e.head()]).collect();
    vertices.sort();
    vertices.dedup();
    for v in vertices {
        for e in crate::graph::lattice::incident_edges(base, v)? {
            if !q.in_domain(BaseEdgeRef::Lattice(e))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
