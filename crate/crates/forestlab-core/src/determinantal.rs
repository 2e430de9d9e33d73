//! Determinantal measures attached to subspaces of the edge space.
//!
//! A subspace `S` of dimension `d` induces a probability measure on `d`-edge
//! subsets: the probability that a subset contains a given collection equals
//! the principal minor of the projection kernel `K(e,f) = <P_S chi_e, chi_f>`
//! on that collection, and the probability of a subset being drawn exactly is
//! its full `d x d` minor. The wired forest measure uses the star space, the
//! free forest measure the orthocomplement of the true cycles; on a finite
//! connected graph both equal the uniform spanning tree.

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::coupling::{self, CouplingError, StrassenOutcome};
use crate::flow::{self, FlowError, Subspace};
use crate::graph::quotient::{BaseEdgeRef, LiftMode, QuotientGraph};
use crate::graph::{EdgeId, Graph, GraphError, OrientedEdge, VertexId};

/// Largest ground set for exact subset enumeration (`C(24, 12)` minors).
pub const ENUMERATION_CAP: usize = 24;
/// Largest window for exact marginal tables (`2^12` cells).
pub const WINDOW_CAP: usize = 12;
/// Pivot threshold below which a sampling step is considered degenerate.
pub const SAMPLE_PIVOT_TOL: f64 = 1e-12;

/// Tolerances for kernel self-checks.
pub const EXACT_TOL: f64 = 1e-9;
pub const IDEMPOTENCE_TOL: f64 = 1e-8;
pub const TRACE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DetError {
    #[error("ground set of {size} edges exceeds the enumeration cap {cap}; sample or use window tables instead")]
    GroundTooLarge { size: usize, cap: usize },
    #[error("window of {size} edges exceeds the table cap {cap}")]
    WindowTooLarge { size: usize, cap: usize },
    #[error("window is empty")]
    EmptyWindow,
    #[error("sampling failed to find a nondegenerate pivot after {0} restarts")]
    DegenerateSample(u32),
    #[error("orientation flip list has length {got}, ground set has {want}")]
    FlipLengthMismatch { got: usize, want: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
}

/// Projection kernel of a subspace over the canonical orientation section,
/// kept together with an orthonormal basis for exact sampling.
#[derive(Clone, Debug)]
pub struct ProjectionKernel {
    matrix: DMatrix<f64>,
    basis: DMatrix<f64>,
    dim: usize,
}

/// Self-check residuals of a kernel; see [`ProjectionKernel::diagnostics`].
#[derive(Clone, Copy, Debug)]
pub struct KernelDiagnostics {
    pub max_symmetry_gap: f64,
    pub max_idempotency_gap: f64,
    pub trace_gap: f64,
    pub diag_min: f64,
    pub diag_max: f64,
}

impl KernelDiagnostics {
    pub fn ok(&self) -> bool {
        self.max_symmetry_gap <= EXACT_TOL
            && self.max_idempotency_gap <= IDEMPOTENCE_TOL
            && self.trace_gap <= TRACE_TOL
            && self.diag_min >= -EXACT_TOL
            && self.diag_max <= 1.0 + EXACT_TOL
    }
}

impl ProjectionKernel {
    /// Kernel of the orthogonal projection onto `s`, `K = B Bᵀ` for an
    /// orthonormal basis matrix `B`.
    pub fn from_subspace(s: &Subspace) -> Self {
        let m = s.ambient_dim();
        let d = s.dim();
        let mut basis = DMatrix::zeros(m, d);
        for (j, b) in s.basis().iter().enumerate() {
            for (i, &c) in b.coefficients().iter().enumerate() {
                basis[(i, j)] = c;
            }
        }
        let matrix = &basis * basis.transpose();
        ProjectionKernel {
            matrix,
            basis,
            dim: d,
        }
    }

    pub fn ground_size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Rank of the projection = size of every sampled subset.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, e: EdgeId, f: EdgeId) -> f64 {
        self.matrix[(e.idx(), f.idx())]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The same kernel expressed over a different orientation section:
    /// flipping edge `e` conjugates row and column `e` by -1. Minors, and
    /// hence all subset probabilities, are unchanged.
    pub fn with_section_flips(&self, flips: &[bool]) -> Result<ProjectionKernel, DetError> {
        let m = self.ground_size();
        if flips.len() != m {
            return Err(DetError::FlipLengthMismatch {
                got: flips.len(),
                want: m,
            });
        }
        let mut basis = self.basis.clone();
        for (i, &flip) in flips.iter().enumerate() {
            if flip {
                for j in 0..basis.ncols() {
                    basis[(i, j)] = -basis[(i, j)];
                }
            }
        }
        let matrix = &basis * basis.transpose();
        Ok(ProjectionKernel {
            matrix,
            basis,
            dim: self.dim,
        })
    }

    fn check_edges<'a>(
        &self,
        edges: impl IntoIterator<Item = &'a EdgeId>,
    ) -> Result<(), DetError> {
        for &e in edges {
            if e.idx() >= self.ground_size() {
                return Err(GraphError::UnknownEdge(e, self.ground_size()).into());
            }
        }
        Ok(())
    }

    /// Probability that a sample contains all of `edges` (duplicates are
    /// collapsed): the principal minor of the kernel on those edges.
    pub fn inclusion_probability(&self, edges: &[EdgeId]) -> Result<f64, DetError> {
        self.check_edges(edges)?;
        let mut idx: Vec<usize> = edges.iter().map(|e| e.idx()).collect();
        idx.sort_unstable();
        idx.dedup();
        Ok(self.principal_minor(&idx))
    }

    fn principal_minor(&self, idx: &[usize]) -> f64 {
        match idx.len() {
            0 => 1.0,
            1 => self.matrix[(idx[0], idx[0])],
            k => DMatrix::from_fn(k, k, |i, j| self.matrix[(idx[i], idx[j])]).determinant(),
        }
    }

    pub fn diagnostics(&self) -> KernelDiagnostics {
        let m = self.ground_size();
        let mut sym = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                sym = sym.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        let idem = (&self.matrix * &self.matrix - &self.matrix).abs().max();
        let trace: f64 = self.matrix.trace();
        let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..m {
            dmin = dmin.min(self.matrix[(i, i)]);
            dmax = dmax.max(self.matrix[(i, i)]);
        }
        if m == 0 {
            dmin = 0.0;
            dmax = 0.0;
        }
        KernelDiagnostics {
            max_symmetry_gap: sym,
            max_idempotency_gap: idem,
            trace_gap: (trace - trace.round()).abs(),
            diag_min: dmin,
            diag_max: dmax,
        }
    }

    /// Exact probabilities of all `2^k` window configurations, indexed by
    /// bitmask over window positions. Computed from the `2^k` inclusion
    /// minors by inclusion-exclusion over supersets; no atom enumeration, so
    /// the ground set may be large. Window edges must be distinct.
    pub fn window_pmf(&self, window: &[EdgeId]) -> Result<Vec<f64>, DetError> {
        let k = window.len();
        if k == 0 {
            return Err(DetError::EmptyWindow);
        }
        if k > WINDOW_CAP {
            return Err(DetError::WindowTooLarge {
                size: k,
                cap: WINDOW_CAP,
            });
        }
        self.check_edges(window)?;
        let mut distinct: Vec<EdgeId> = window.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != k {
            return Err(GraphError::InvalidParameter(
                "window edges must be distinct".into(),
            )
            .into());
        }
        let mut table = vec![0.0f64; 1 << k];
        for mask in 0..(1u32 << k) {
            let idx: Vec<usize> = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| window[i].idx())
                .collect();
            table[mask as usize] = self.principal_minor(&idx);
        }
        // Moebius over the superset lattice turns inclusion probabilities
        // into exact-configuration probabilities.
        for bit in 0..k {
            for mask in 0..(1usize << k) {
                if mask >> bit & 1 == 0 {
                    table[mask] = table[mask] - table[mask | (1 << bit)];
                }
            }
        }
        for p in table.iter_mut() {
            if *p < 0.0 && *p > -1e-12 {
                *p = 0.0;
            }
        }
        Ok(table)
    }

    pub fn write_matrix<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = self.ground_size();
        for i in 0..m {
            let row: Vec<String> = (0..m)
                .map(|j| format!("{:.17e}", self.matrix[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A probability distribution on subsets of a ground set of at most 32 edges,
/// stored as sorted `(bitmask, probability)` atoms.
#[derive(Clone, Debug)]
pub struct SubsetDistribution {
    ground: usize,
    atoms: Vec<(u32, f64)>,
}

/// Self-check data for a subset distribution.
#[derive(Clone, Copy, Debug)]
pub struct DistributionDiagnostics {
    pub total_mass_gap: f64,
    pub min_probability: f64,
    /// Some(k) when every atom has exactly k edges.
    pub fixed_size: Option<usize>,
}

impl SubsetDistribution {
    /// Build from atoms; duplicate masks merge, near-zero atoms are dropped.
    pub fn from_atoms(ground: usize, atoms: impl IntoIterator<Item = (u32, f64)>) -> Self {
        assert!(ground <= 32, "subset distributions cap at 32 edges");
        let mut merged: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
        for (mask, p) in atoms {
            assert!(
                ground == 32 || mask < (1u64 << ground) as u32,
                "mask outside ground set"
            );
            *merged.entry(mask).or_insert(0.0) += p;
        }
        let atoms: Vec<(u32, f64)> = merged
            .into_iter()
            .filter(|&(_, p)| p.abs() > 1e-15)
            .collect();
        SubsetDistribution { ground, atoms }
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn atoms(&self) -> &[(u32, f64)] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn probability(&self, mask: u32) -> f64 {
        match self.atoms.binary_search_by_key(&mask, |a| a.0) {
            Ok(i) => self.atoms[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Probability that a sample contains edge `e`.
    pub fn marginal(&self, e: EdgeId) -> f64 {
        let bit = 1u32 << e.idx();
        self.atoms
            .iter()
            .filter(|(m, _)| m & bit != 0)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn diagnostics(&self) -> DistributionDiagnostics {
        let sizes: Vec<u32> = self.atoms.iter().map(|(m, _)| m.count_ones()).collect();
        let fixed_size = match (sizes.iter().min(), sizes.iter().max()) {
            (Some(a), Some(b)) if a == b => Some(*a as usize),
            _ => None,
        };
        DistributionDiagnostics {
            total_mass_gap: (self.total_mass() - 1.0).abs(),
            min_probability: self
                .atoms
                .iter()
                .map(|a| a.1)
                .fold(f64::INFINITY, f64::min),
            fixed_size,
        }
    }

    pub fn tv_distance(&self, other: &SubsetDistribution) -> Result<f64, CouplingError> {
        if self.ground != other.ground {
            return Err(CouplingError::GroundMismatch(self.ground, other.ground));
        }
        let mut tv = 0.0;
        for &(mask, p) in &self.atoms {
            tv += (p - other.probability(mask)).abs();
        }
        for &(mask, q) in &other.atoms {
            if self.probability(mask) == 0.0 {
                tv += q.abs();
            }
        }
        Ok(tv / 2.0)
    }

    /// Push forward along an edge permutation (`perm[old] = new`).
    pub fn apply_edge_permutation(&self, perm: &[EdgeId]) -> Result<SubsetDistribution, CouplingError> {
        coupling::check_permutation(perm, self.ground)?;
        let atoms = self
            .atoms
            .iter()
            .map(|&(mask, p)| (coupling::permute_mask(mask, perm), p));
        Ok(SubsetDistribution::from_atoms(self.ground, atoms))
    }

    /// Exact window table by summing atoms; companion to
    /// [`ProjectionKernel::window_pmf`] for cross-checks.
    pub fn window_pmf(&self, window: &[EdgeId]) -> Result<Vec<f64>, DetError> {
        let k = window.len();
        if k == 0 {
            return Err(DetError::EmptyWindow);
        }
        if k > WINDOW_CAP {
            return Err(DetError::WindowTooLarge {
                size: k,
                cap: WINDOW_CAP,
            });
        }
        let mut table = vec![0.0f64; 1 << k];
        for &(mask, p) in &self.atoms {
            let mut w = 0usize;
            for (i, e) in window.iter().enumerate() {
                if mask >> e.idx() & 1 == 1 {
                    w |= 1 << i;
                }
            }
            table[w] += p;
        }
        Ok(table)
    }
}

/// Exactly enumerate the subset distribution of a projection kernel by
/// iterating all `dim`-subsets of the ground set. Ground sets above
/// [`ENUMERATION_CAP`] are rejected.
pub fn enumerate_distribution(k: &ProjectionKernel) -> Result<SubsetDistribution, DetError> {
    let m = k.ground_size();
    if m > ENUMERATION_CAP {
        return Err(DetError::GroundTooLarge {
            size: m,
            cap: ENUMERATION_CAP,
        });
    }
    let d = k.dim();
    if d == 0 {
        return Ok(SubsetDistribution::from_atoms(m, [(0u32, 1.0)]));
    }
    let mut atoms = Vec::new();
    // Gosper's hack: iterate all d-subsets of m bits in increasing mask order.
    let limit = 1u64 << m;
    let mut mask: u64 = (1u64 << d) - 1;
    while mask < limit {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let p = k.principal_minor(&idx);
        if p > 1e-12 {
            atoms.push((mask as u32, p));
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    Ok(SubsetDistribution::from_atoms(m, atoms))
}

/// Draw one subset from a projection kernel. At each step an edge is chosen
/// with probability proportional to the squared row norm of the remaining
/// basis, the basis is restricted to flows vanishing on that edge, and
/// re-orthonormalized. Degenerate pivots trigger a restart with fresh
/// randomness.
pub fn sample_subset<R: Rng>(
    k: &ProjectionKernel,
    rng: &mut R,
) -> Result<Vec<EdgeId>, DetError> {
    let m = k.ground_size();
    let d = k.dim();
    if d == 0 {
        return Ok(Vec::new());
    }
    const RESTARTS: u32 = 64;
    'attempt: for _ in 0..RESTARTS {
        let mut v = k.basis.clone();
        let mut chosen: Vec<usize> = Vec::with_capacity(d);
        for step in 0..d {
            let cols = d - step;
            let mut norms = vec![0.0f64; m];
            let mut total = 0.0;
            for i in 0..m {
                if chosen.contains(&i) {
                    continue;
                }
                let mut s = 0.0;
                for j in 0..cols {
                    s += v[(i, j)] * v[(i, j)];
                }
                norms[i] = s;
                total += s;
            }
            if total <= 0.0 {
                continue 'attempt;
            }
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in norms.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = Some(i);
                    break;
                }
            }
            let e = match pick {
                Some(i) => i,
                None => norms
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(_, &w)| w > 0.0)
                    .map(|(i, _)| i)
                    .unwrap(),
            };
            // Pivot on the column with the largest value at e, cancel the
            // other columns there, and drop the pivot column.
            let mut pivot = 0;
            for j in 1..cols {
                if v[(e, j)].abs() > v[(e, pivot)].abs() {
                    pivot = j;
                }
            }
            if v[(e, pivot)].abs() < SAMPLE_PIVOT_TOL {
                continue 'attempt;
            }
            for j in 0..cols {
                if j == pivot {
                    continue;
                }
                let f = v[(e, j)] / v[(e, pivot)];
                for i in 0..m {
                    let upd = v[(i, pivot)];
                    v[(i, j)] -= f * upd;
                }
            }
            v = v.remove_column(pivot);
            // Re-orthonormalize so row norms remain conditional marginals.
            let cols_now = cols - 1;
            for j in 0..cols_now {
                for _ in 0..2 {
                    for l in 0..j {
                        let mut c = 0.0;
                        for i in 0..m {
                            c += v[(i, j)] * v[(i, l)];
                        }
                        for i in 0..m {
                            let upd = v[(i, l)];
                            v[(i, j)] -= c * upd;
                        }
                    }
                }
                let mut n = 0.0;
                for i in 0..m {
                    n += v[(i, j)] * v[(i, j)];
                }
                let n = n.sqrt();
                if n < SAMPLE_PIVOT_TOL {
                    continue 'attempt;
                }
                for i in 0..m {
                    v[(i, j)] /= n;
                }
            }
            chosen.push(e);
        }
        chosen.sort_unstable();
        return Ok(chosen.into_iter().map(|i| EdgeId(i as u32)).collect());
    }
    Err(DetError::DegenerateSample(RESTARTS))
}

/// Uniform spanning tree via loop-erased random walks. Returns the sorted
/// edge ids of the tree; the graph must be connected.
pub fn wilson_ust<R: Rng>(g: &Graph, rng: &mut R) -> Result<Vec<EdgeId>, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let n = g.vertex_count();
    let mut in_tree = vec![false; n];
    let mut next: Vec<Option<OrientedEdge>> = vec![None; n];
    in_tree[0] = true;
    for start in 1..n {
        if in_tree[start] {
            continue;
        }
        // Random walk from `start`, retaining only the last exit edge of
        // each vertex: following those pointers afterwards is exactly the
        // loop-erased path.
        let mut cur = VertexId(start as u32);
        while !in_tree[cur.idx()] {
            let outs = g.out_edges(cur);
            let oe = outs[rng.gen_range(0..outs.len())];
            next[cur.idx()] = Some(oe);
            cur = g.head(oe);
        }
        let mut cur = VertexId(start as u32);
        while !in_tree[cur.idx()] {
            in_tree[cur.idx()] = true;
            cur = g.head(next[cur.idx()].expect("walk recorded an exit"));
        }
    }
    let mut edges: Vec<EdgeId> = (1..n)
        .filter(|&v| next[v].is_some())
        .map(|v| next[v].unwrap().edge)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    debug_assert_eq!(edges.len(), n - 1);
    Ok(edges)
}

/// Kernel of the wired spanning forest: projection onto the star space. On a
/// finite connected graph this is the uniform spanning tree measure.
pub fn wsf_kernel(g: &Graph) -> ProjectionKernel {
    ProjectionKernel::from_subspace(&flow::star_space(g))
}

/// Kernel of the free spanning forest of a quotient: projection onto the
/// orthocomplement of the true-cycle space.
pub fn fsf_kernel(q: &QuotientGraph) -> Result<ProjectionKernel, FlowError> {
    let m = q.graph().edge_count();
    let complement =
        flow::true_cycle_space(q).orthocomplement_in(&Subspace::full(m))?;
    Ok(ProjectionKernel::from_subspace(&complement))
}

/// Map window positions to quotient edges under a lift mode. `Tilde` projects
/// every position; `Hat` projects positions inside the fundamental domain and
/// freezes the rest as almost-surely absent (`None`).
fn window_projection_map(
    q: &QuotientGraph,
    window: &[BaseEdgeRef],
    mode: LiftMode,
) -> Result<Vec<Option<EdgeId>>, DetError> {
    window
        .iter()
        .map(|&w| {
            let e = q.project_edge(w)?;
            Ok(match mode {
                LiftMode::Tilde => Some(e),
                LiftMode::Hat => {
                    if q.in_domain(w)? {
                        Some(e)
                    } else {
                        None
                    }
                }
            })
        })
        .collect()
}

/// Expand a pmf over distinct quotient edges to the full window table: window
/// positions carrying the same quotient edge must agree, frozen positions
/// must be absent, every other configuration has probability zero.
fn expand_window_pmf(
    positions: &[Option<EdgeId>],
    distinct: &[EdgeId],
    pmf: &[f64],
) -> Vec<f64> {
    let k = positions.len();
    let mut out = vec![0.0f64; 1 << k];
    'mask: for mask in 0..(1usize << k) {
        let mut dmask = 0usize;
        for (d, e) in distinct.iter().enumerate() {
            let mut want: Option<bool> = None;
            for (i, pe) in positions.iter().enumerate() {
                if *pe == Some(*e) {
                    let bit = mask >> i & 1 == 1;
                    match want {
                        None => want = Some(bit),
                        Some(b) if b != bit => continue 'mask,
                        _ => {}
                    }
                }
            }
            if want == Some(true) {
                dmask |= 1 << d;
            }
        }
        for (i, pe) in positions.iter().enumerate() {
            if pe.is_none() && mask >> i & 1 == 1 {
                continue 'mask;
            }
        }
        out[mask] = pmf[dmask];
    }
    out
}

/// Exact window table of a lifted measure, indexed by bitmask over window
/// positions, computed from kernel minors (no atom enumeration).
pub fn lifted_window_pmf(
    k: &ProjectionKernel,
    q: &QuotientGraph,
    window: &[BaseEdgeRef],
    mode: LiftMode,
) -> Result<Vec<f64>, DetError> {
    if window.is_empty() {
        return Err(DetError::EmptyWindow);
    }
    if window.len() > WINDOW_CAP {
        return Err(DetError::WindowTooLarge {
            size: window.len(),
            cap: WINDOW_CAP,
        });
    }
    let positions = window_projection_map(q, window, mode)?;
    let mut distinct: Vec<EdgeId> = positions.iter().flatten().copied().collect();
    distinct.sort_unstable();
    distinct.dedup();
    let pmf = if distinct.is_empty() {
        vec![1.0]
    } else {
        k.window_pmf(&distinct)?
    };
    Ok(expand_window_pmf(&positions, &distinct, &pmf))
}

/// Atom-route companion of [`lifted_window_pmf`], summing an enumerated
/// distribution; used to cross-check the kernel route on small graphs.
pub fn lifted_window_pmf_from_atoms(
    dist: &SubsetDistribution,
    q: &QuotientGraph,
    window: &[BaseEdgeRef],
    mode: LiftMode,
) -> Result<Vec<f64>, DetError> {
    if window.is_empty() {
        return Err(DetError::EmptyWindow);
    }
    if window.len() > WINDOW_CAP {
        return Err(DetError::WindowTooLarge {
            size: window.len(),
            cap: WINDOW_CAP,
        });
    }
    let positions = window_projection_map(q, window, mode)?;
    let mut distinct: Vec<EdgeId> = positions.iter().flatten().copied().collect();
    distinct.sort_unstable();
    distinct.dedup();
    let pmf = if distinct.is_empty() {
        vec![1.0]
    } else {
        dist.window_pmf(&distinct)?
    };
    Ok(expand_window_pmf(&positions, &distinct, &pmf))
}

/// Decide whether the measure of `lower` is stochastically dominated by that
/// of `upper` by exact enumeration plus a feasibility flow; returns either a
/// monotone coupling or a violated increasing family.
pub fn dominates(
    lower: &ProjectionKernel,
    upper: &ProjectionKernel,
) -> Result<StrassenOutcome, DetError> {
    let mu = enumerate_distribution(lower)?;
    let nu = enumerate_distribution(upper)?;
    Ok(coupling::strassen_coupling(&mu, &nu)?)
}
