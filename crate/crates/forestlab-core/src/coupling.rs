//! Monotone couplings of subset distributions.
//!
//! Two distributions on subsets of a common edge set admit a coupling
//! supported on nested pairs `A ⊆ B` exactly when the second stochastically
//! dominates the first on increasing events. Feasibility is decided by a
//! max-flow over the bipartite containment graph of the two supports: flow
//! value one yields a coupling; a deficient cut yields an increasing family
//! witnessing the violation.

use std::collections::HashMap;

use thiserror::Error;

use crate::determinantal::{SubsetDistribution, WINDOW_CAP};
use crate::graph::quotient::{BaseEdgeRef, LiftMode, QuotientGraph};
use crate::graph::{EdgeId, GraphError};

/// Max-flow residual threshold.
const FLOW_EPS: f64 = 1e-15;
/// A coupling is accepted when the flow reaches the total mass within this.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Marginals must be group-invariant within this TV distance for averaging.
pub const INVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("ground sets differ: {0} vs {1} edges")]
    GroundMismatch(usize, usize),
    #[error("{which} distribution has total mass {mass}, expected 1")]
    NotProbability { which: &'static str, mass: f64 },
    #[error("edge map is not a permutation of the ground set: {0}")]
    NotPermutation(String),
    #[error("group is empty")]
    EmptyGroup,
    #[error("marginal is not invariant under {label} (TV distance {tv:.3e})")]
    MarginalsNotInvariant { label: String, tv: f64 },
    #[error("window of {size} edges exceeds the table cap {cap}")]
    WindowTooLarge { size: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An element of a finite group acting on the ground set by an edge
/// permutation.
#[derive(Clone, Debug)]
pub struct GroupElementAction {
    pub label: String,
    /// `edge_map[old] = new`.
    pub edge_map: Vec<EdgeId>,
}

impl GroupElementAction {
    pub fn identity(ground: usize) -> Self {
        GroupElementAction {
            label: "id".into(),
            edge_map: (0..ground as u32).map(EdgeId).collect(),
        }
    }
}

/// The symmetries of a quotient graph as ground-set actions.
pub fn quotient_actions(q: &QuotientGraph) -> Vec<GroupElementAction> {
    q.symmetries()
        .into_iter()
        .map(|s| GroupElementAction {
            label: s.label,
            edge_map: s.edge_map,
        })
        .collect()
}

pub(crate) fn check_permutation(perm: &[EdgeId], ground: usize) -> Result<(), CouplingError> {
    if perm.len() != ground {
        return Err(CouplingError::NotPermutation(format!(
            "length {} vs ground {}",
            perm.len(),
            ground
        )));
    }
    let mut seen = vec![false; ground];
    for e in perm {
        if e.idx() >= ground || seen[e.idx()] {
            return Err(CouplingError::NotPermutation(format!(
                "edge {e:?} repeated or out of range"
            )));
        }
        seen[e.idx()] = true;
    }
    Ok(())
}

pub(crate) fn permute_mask(mask: u32, perm: &[EdgeId]) -> u32 {
    let mut out = 0u32;
    for (i, e) in perm.iter().enumerate() {
        if mask >> i & 1 == 1 {
            out |= 1 << e.idx();
        }
    }
    out
}

/// A coupling of two subset distributions, stored as `(first, second, mass)`
/// cells. Couplings produced by [`strassen_coupling`] are supported on nested
/// pairs.
#[derive(Clone, Debug)]
pub struct MonotoneCoupling {
    ground: usize,
    cells: Vec<(u32, u32, f64)>,
}

/// Residuals of a coupling against its intended marginals.
#[derive(Clone, Copy, Debug)]
pub struct CouplingDiagnostics {
    pub first_marginal_tv: f64,
    pub second_marginal_tv: f64,
    pub total_mass_gap: f64,
    /// Mass on cells that are not nested pairs.
    pub nonmonotone_mass: f64,
}

impl CouplingDiagnostics {
    pub fn ok(&self) -> bool {
        self.first_marginal_tv <= FEASIBILITY_TOL
            && self.second_marginal_tv <= FEASIBILITY_TOL
            && self.total_mass_gap <= FEASIBILITY_TOL
            && self.nonmonotone_mass <= FEASIBILITY_TOL
    }
}

impl MonotoneCoupling {
    /// Normalize a cell list: merge duplicates, drop near-zero cells, sort.
    pub fn from_cells(ground: usize, cells: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        let mut merged: std::collections::BTreeMap<(u32, u32), f64> =
            std::collections::BTreeMap::new();
        for (a, b, p) in cells {
            *merged.entry((a, b)).or_insert(0.0) += p;
        }
        let cells = merged
            .into_iter()
            .filter(|&(_, p)| p.abs() > 1e-15)
            .map(|((a, b), p)| (a, b, p))
            .collect();
        MonotoneCoupling { ground, cells }
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn cells(&self) -> &[(u32, u32, f64)] {
        &self.cells
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.2).sum()
    }

    pub fn first_marginal(&self) -> SubsetDistribution {
        SubsetDistribution::from_atoms(self.ground, self.cells.iter().map(|&(a, _, p)| (a, p)))
    }

    pub fn second_marginal(&self) -> SubsetDistribution {
        SubsetDistribution::from_atoms(self.ground, self.cells.iter().map(|&(_, b, p)| (b, p)))
    }

    pub fn nonmonotone_mass(&self) -> f64 {
        self.cells
            .iter()
            .filter(|&&(a, b, _)| a & !b != 0)
            .map(|c| c.2)
            .sum()
    }

    pub fn validate(
        &self,
        mu: &SubsetDistribution,
        nu: &SubsetDistribution,
    ) -> Result<CouplingDiagnostics, CouplingError> {
        Ok(CouplingDiagnostics {
            first_marginal_tv: self.first_marginal().tv_distance(mu)?,
            second_marginal_tv: self.second_marginal().tv_distance(nu)?,
            total_mass_gap: (self.total_mass() - 1.0).abs(),
            nonmonotone_mass: self.nonmonotone_mass(),
        })
    }

    fn cell_probability(&self, key: (u32, u32)) -> f64 {
        match self
            .cells
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
        {
            Ok(i) => self.cells[i].2,
            Err(_) => 0.0,
        }
    }

    pub fn tv_distance(&self, other: &MonotoneCoupling) -> Result<f64, CouplingError> {
        if self.ground != other.ground {
            return Err(CouplingError::GroundMismatch(self.ground, other.ground));
        }
        let mut tv = 0.0;
        for &(a, b, p) in &self.cells {
            tv += (p - other.cell_probability((a, b))).abs();
        }
        for &(a, b, q) in &other.cells {
            if self.cell_probability((a, b)) == 0.0 {
                tv += q.abs();
            }
        }
        Ok(tv / 2.0)
    }

    /// Push both coordinates forward along an edge permutation.
    pub fn apply_action(&self, g: &GroupElementAction) -> Result<MonotoneCoupling, CouplingError> {
        check_permutation(&g.edge_map, self.ground)?;
        Ok(MonotoneCoupling::from_cells(
            self.ground,
            self.cells.iter().map(|&(a, b, p)| {
                (
                    permute_mask(a, &g.edge_map),
                    permute_mask(b, &g.edge_map),
                    p,
                )
            }),
        ))
    }
}

/// An increasing family on which domination fails: the up-closure of the
/// generator masks carries more mass under the first measure than the second.
#[derive(Clone, Debug)]
pub struct DominationWitness {
    pub generators: Vec<u32>,
    pub mu_mass: f64,
    pub nu_mass: f64,
}

/// Mass a distribution puts on the up-closure of the generator masks.
pub fn up_closure_mass(dist: &SubsetDistribution, generators: &[u32]) -> f64 {
    dist.atoms()
        .iter()
        .filter(|(mask, _)| generators.iter().any(|g| g & !mask == 0))
        .map(|(_, p)| p)
        .sum()
}

impl DominationWitness {
    /// Re-evaluate both masses on the witness family.
    pub fn recheck(&self, mu: &SubsetDistribution, nu: &SubsetDistribution) -> (f64, f64) {
        (
            up_closure_mass(mu, &self.generators),
            up_closure_mass(nu, &self.generators),
        )
    }

    pub fn violation(&self) -> f64 {
        self.mu_mass - self.nu_mass
    }
}

#[derive(Clone, Debug)]
pub enum StrassenOutcome {
    Coupling(MonotoneCoupling),
    Infeasible(DominationWitness),
}

struct Dinic {
    arcs: Vec<(usize, f64)>, // (to, residual capacity), stored in +/- pairs
    adj: Vec<Vec<usize>>,
}

impl Dinic {
    fn new(nodes: usize) -> Self {
        Dinic {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, u: usize, v: usize, cap: f64) {
        self.adj[u].push(self.arcs.len());
        self.arcs.push((v, cap));
        self.adj[v].push(self.arcs.len());
        self.arcs.push((u, 0.0));
    }

    fn bfs(&self, s: usize, level: &mut [i32]) {
        level.fill(-1);
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &ai in &self.adj[u] {
                let (v, cap) = self.arcs[ai];
                if cap > FLOW_EPS && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    fn dfs(
        &mut self,
        u: usize,
        t: usize,
        pushed: f64,
        level: &[i32],
        iter: &mut [usize],
    ) -> f64 {
        if u == t {
            return pushed;
        }
        while iter[u] < self.adj[u].len() {
            let ai = self.adj[u][iter[u]];
            let (v, cap) = self.arcs[ai];
            if cap > FLOW_EPS && level[v] == level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(cap), level, iter);
                if got > FLOW_EPS {
                    self.arcs[ai].1 -= got;
                    self.arcs[ai ^ 1].1 += got;
                    return got;
                }
            }
            iter[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.adj.len();
        let mut flow = 0.0;
        let mut level = vec![-1; n];
        loop {
            self.bfs(s, &mut level);
            if level[t] < 0 {
                return flow;
            }
            let mut iter = vec![0usize; n];
            loop {
                let pushed = self.dfs(s, t, f64::INFINITY, &level, &mut iter);
                if pushed <= FLOW_EPS {
                    break;
                }
                flow += pushed;
            }
        }
    }

    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &ai in &self.adj[u] {
                let (v, cap) = self.arcs[ai];
                if cap > FLOW_EPS && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Enumerate the containment arcs between the two supports. When both
/// supports have fixed subset sizes the supersets are generated directly by
/// adding the missing edges; otherwise all pairs are scanned.
fn containment_arcs(mu: &SubsetDistribution, nu: &SubsetDistribution) -> Vec<(usize, usize)> {
    let m = mu.ground_size();
    let nu_index: HashMap<u32, usize> = nu
        .atoms()
        .iter()
        .enumerate()
        .map(|(j, &(mask, _))| (mask, j))
        .collect();
    let (dmu, dnu) = (mu.diagnostics(), nu.diagnostics());
    if let (Some(s), Some(t)) = (dmu.fixed_size, dnu.fixed_size) {
        if t >= s {
            let delta = t - s;
            let free = m - s;
            // Direct generation beats the pairwise scan when the number of
            // completions per atom is moderate.
            let combos: f64 = (0..delta)
                .map(|i| (free - i) as f64 / (i + 1) as f64)
                .product();
            if combos <= 4096.0 {
                let mut arcs = Vec::new();
                for (i, &(a, _)) in mu.atoms().iter().enumerate() {
                    let missing: Vec<u32> =
                        (0..m as u32).filter(|b| a >> b & 1 == 0).collect();
                    // Iterate delta-combinations of the missing edges.
                    fn rec(
                        a: u32,
                        missing: &[u32],
                        start: usize,
                        left: usize,
                        nu_index: &HashMap<u32, usize>,
                        i: usize,
                        arcs: &mut Vec<(usize, usize)>,
                    ) {
                        if left == 0 {
                            if let Some(&j) = nu_index.get(&a) {
                                arcs.push((i, j));
                            }
                            return;
                        }
                        for k in start..missing.len() {
                            rec(
                                a | 1 << missing[k],
                                missing,
                                k + 1,
                                left - 1,
                                nu_index,
                                i,
                                arcs,
                            );
                        }
                    }
                    rec(a, &missing, 0, delta, &nu_index, i, &mut arcs);
                }
                return arcs;
            }
        } else {
            return Vec::new(); // smaller target sets can never contain
        }
    }
    let mut arcs = Vec::new();
    for (i, &(a, _)) in mu.atoms().iter().enumerate() {
        for (j, &(b, _)) in nu.atoms().iter().enumerate() {
            if a & !b == 0 {
                arcs.push((i, j));
            }
        }
    }
    arcs
}

/// Decide whether `nu` stochastically dominates `mu` and construct an exact
/// monotone coupling (or a violated increasing family) via max-flow.
pub fn strassen_coupling(
    mu: &SubsetDistribution,
    nu: &SubsetDistribution,
) -> Result<StrassenOutcome, CouplingError> {
    if mu.ground_size() != nu.ground_size() {
        return Err(CouplingError::GroundMismatch(
            mu.ground_size(),
            nu.ground_size(),
        ));
    }
    for (which, d) in [("first", mu), ("second", nu)] {
        let mass = d.total_mass();
        if (mass - 1.0).abs() > 1e-7 {
            return Err(CouplingError::NotProbability { which, mass });
        }
    }
    let p = mu.support_size();
    let q = nu.support_size();
    let (source, sink) = (0usize, p + q + 1);
    let mut net = Dinic::new(p + q + 2);
    for (i, &(_, w)) in mu.atoms().iter().enumerate() {
        net.add(source, 1 + i, w);
    }
    for (j, &(_, w)) in nu.atoms().iter().enumerate() {
        net.add(1 + p + j, sink, w);
    }
    let arcs = containment_arcs(mu, nu);
    let arc_base = net.arcs.len();
    for &(i, j) in &arcs {
        net.add(1 + i, 1 + p + j, 2.0); // never binding
    }
    let flow = net.max_flow(source, sink);
    if flow >= mu.total_mass() - FEASIBILITY_TOL {
        let mut cells = Vec::new();
        for (k, &(i, j)) in arcs.iter().enumerate() {
            // Flow on the k-th containment arc is the gain on its reverse.
            let sent = net.arcs[arc_base + 2 * k + 1].1;
            if sent > 1e-14 {
                cells.push((mu.atoms()[i].0, nu.atoms()[j].0, sent));
            }
        }
        Ok(StrassenOutcome::Coupling(MonotoneCoupling::from_cells(
            mu.ground_size(),
            cells,
        )))
    } else {
        let reach = net.residual_reachable(source);
        let mut generators: Vec<u32> = mu
            .atoms()
            .iter()
            .enumerate()
            .filter(|(i, _)| reach[1 + i])
            .map(|(_, &(mask, _))| mask)
            .collect();
        // Keep only minimal generators.
        generators.sort_by_key(|g| g.count_ones());
        let mut minimal: Vec<u32> = Vec::new();
        for g in generators {
            if !minimal.iter().any(|h| h & !g == 0) {
                minimal.push(g);
            }
        }
        minimal.sort_unstable();
        let witness = DominationWitness {
            mu_mass: up_closure_mass(mu, &minimal),
            nu_mass: up_closure_mass(nu, &minimal),
            generators: minimal,
        };
        debug_assert!(witness.violation() > 0.0);
        Ok(StrassenOutcome::Infeasible(witness))
    }
}

/// Average a coupling over a group of ground-set symmetries. Both marginals
/// must already be invariant under every element (checked); the result is a
/// coupling with the same marginals, invariant under the group.
pub fn average_over_group(
    c: &MonotoneCoupling,
    actions: &[GroupElementAction],
) -> Result<MonotoneCoupling, CouplingError> {
    if actions.is_empty() {
        return Err(CouplingError::EmptyGroup);
    }
    let mu = c.first_marginal();
    let nu = c.second_marginal();
    for g in actions {
        check_permutation(&g.edge_map, c.ground_size())?;
        for m in [&mu, &nu] {
            let tv = m.apply_edge_permutation(&g.edge_map)?.tv_distance(m)?;
            if tv > INVARIANCE_TOL {
                return Err(CouplingError::MarginalsNotInvariant {
                    label: g.label.clone(),
                    tv,
                });
            }
        }
    }
    let w = 1.0 / actions.len() as f64;
    let mut cells = Vec::new();
    for g in actions {
        let moved = c.apply_action(g)?;
        cells.extend(moved.cells().iter().map(|&(a, b, p)| (a, b, p * w)));
    }
    Ok(MonotoneCoupling::from_cells(c.ground_size(), cells))
}

/// Largest TV distance between the coupling and any of its group translates.
pub fn check_invariance(
    c: &MonotoneCoupling,
    actions: &[GroupElementAction],
) -> Result<f64, CouplingError> {
    let mut worst = 0.0f64;
    for g in actions {
        worst = worst.max(c.tv_distance(&c.apply_action(g)?)?);
    }
    Ok(worst)
}

/// Joint table of a coupling read through a window lift: cell `(a, b)` is the
/// probability that the first configuration restricted to the window is `a`
/// and the second is `b` (bitmasks over window positions).
#[derive(Clone, Debug)]
pub struct WindowCouplingTable {
    window: Vec<BaseEdgeRef>,
    cells: Vec<(u32, u32, f64)>,
}

impl WindowCouplingTable {
    pub fn window(&self) -> &[BaseEdgeRef] {
        &self.window
    }

    pub fn cells(&self) -> &[(u32, u32, f64)] {
        &self.cells
    }

    pub fn first_pmf(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.window.len()];
        for &(a, _, p) in &self.cells {
            out[a as usize] += p;
        }
        out
    }

    pub fn second_pmf(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.window.len()];
        for &(_, b, p) in &self.cells {
            out[b as usize] += p;
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.2).sum()
    }

    pub fn nonmonotone_mass(&self) -> f64 {
        self.cells
            .iter()
            .filter(|&&(a, b, _)| a & !b != 0)
            .map(|c| c.2)
            .sum()
    }

    /// Relabel window positions (`perm[old] = new`); used to test invariance
    /// under base symmetries that map the window into itself.
    pub fn apply_position_permutation(
        &self,
        perm: &[usize],
    ) -> Result<WindowCouplingTable, CouplingError> {
        let k = self.window.len();
        if perm.len() != k || {
            let mut s = perm.to_vec();
            s.sort_unstable();
            s != (0..k).collect::<Vec<_>>()
        } {
            return Err(CouplingError::NotPermutation(format!(
                "window position map {perm:?}"
            )));
        }
        let relabel = |mask: u32| {
            let mut out = 0u32;
            for (i, &t) in perm.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    out |= 1 << t;
                }
            }
            out
        };
        let mut window = self.window.clone();
        for (i, &t) in perm.iter().enumerate() {
            window[t] = self.window[i];
        }
        let mut cells: Vec<(u32, u32, f64)> = self
            .cells
            .iter()
            .map(|&(a, b, p)| (relabel(a), relabel(b), p))
            .collect();
        cells.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        Ok(WindowCouplingTable {
            window,
            cells,
        })
    }

    pub fn tv_distance(&self, other: &WindowCouplingTable) -> f64 {
        let prob = |cells: &[(u32, u32, f64)], key: (u32, u32)| {
            cells
                .binary_search_by_key(&key, |&(a, b, _)| (a, b))
                .map(|i| cells[i].2)
                .unwrap_or(0.0)
        };
        let mut tv = 0.0;
        for &(a, b, p) in &self.cells {
            tv += (p - prob(&other.cells, (a, b))).abs();
        }
        for &(a, b, q) in &other.cells {
            if prob(&self.cells, (a, b)) == 0.0 {
                tv += q.abs();
            }
        }
        tv / 2.0
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "first_mask,second_mask,probability")?;
        for &(a, b, p) in &self.cells {
            writeln!(out, "{a},{b},{p:.17e}")?;
        }
        Ok(())
    }
}

/// Read a coupling through a window lift of the quotient.
pub fn lift_coupling_window(
    c: &MonotoneCoupling,
    q: &QuotientGraph,
    window: &[BaseEdgeRef],
    mode: LiftMode,
) -> Result<WindowCouplingTable, CouplingError> {
    let k = window.len();
    if k > WINDOW_CAP {
        return Err(CouplingError::WindowTooLarge {
            size: k,
            cap: WINDOW_CAP,
        });
    }
    // Position -> quotient edge (None freezes the position as absent).
    let mut positions: Vec<Option<EdgeId>> = Vec::with_capacity(k);
    for &w in window {
        let e = q.project_edge(w)?;
        positions.push(match mode {
            LiftMode::Tilde => Some(e),
            LiftMode::Hat => q.in_domain(w)?.then_some(e),
        });
    }
    let window_mask = |conf: u32| -> u32 {
        let mut out = 0u32;
        for (i, pe) in positions.iter().enumerate() {
            if let Some(e) = pe {
                if conf >> e.idx() & 1 == 1 {
                    out |= 1 << i;
                }
            }
        }
        out
    };
    let mut cells: std::collections::BTreeMap<(u32, u32), f64> = std::collections::BTreeMap::new();
    for &(a, b, p) in c.cells() {
        *cells.entry((window_mask(a), window_mask(b))).or_insert(0.0) += p;
    }
    Ok(WindowCouplingTable {
        window: window.to_vec(),
        cells: cells.into_iter().map(|((a, b), p)| (a, b, p)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinantal::{enumerate_distribution, fsf_kernel, wsf_kernel};
    use crate::graph::lattice::{build_graph, LatticeSpec};
    use crate::graph::quotient::{build_quotient, GroupAction};
    use approx::assert_relative_eq;

    fn point_mass(ground: usize, mask: u32) -> SubsetDistribution {
        SubsetDistribution::from_atoms(ground, [(mask, 1.0)])
    }

    #[test]
    fn diagonal_coupling_for_equal_measures() {
        let g = build_graph(LatticeSpec::Cycle { n: 3 }).unwrap();
        let mu = enumerate_distribution(&wsf_kernel(&g)).unwrap();
        match strassen_coupling(&mu, &mu).unwrap() {
            StrassenOutcome::Coupling(c) => {
                let d = c.validate(&mu, &mu).unwrap();
                assert!(d.ok(), "{d:?}");
                // Equal fixed-size marginals force the diagonal coupling.
                for &(a, b, _) in c.cells() {
                    assert_eq!(a, b);
                }
            }
            StrassenOutcome::Infeasible(w) => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn tree_measure_coupled_under_point_mass_at_full_set() {
        let g = build_graph(LatticeSpec::Cycle { n: 3 }).unwrap();
        let mu = enumerate_distribution(&wsf_kernel(&g)).unwrap();
        let nu = point_mass(3, 0b111);
        match strassen_coupling(&mu, &nu).unwrap() {
            StrassenOutcome::Coupling(c) => {
                let d = c.validate(&mu, &nu).unwrap();
                assert!(d.ok(), "{d:?}");
                for &(a, b, _) in c.cells() {
                    assert_eq!(b, 0b111);
                    assert_eq!(a & !b, 0);
                }
            }
            StrassenOutcome::Infeasible(w) => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn witness_when_point_mass_cannot_be_dominated() {
        // Point mass at the full set is NOT dominated by the tree measure.
        let g = build_graph(LatticeSpec::Cycle { n: 3 }).unwrap();
        let nu = enumerate_distribution(&wsf_kernel(&g)).unwrap();
        let mu = point_mass(3, 0b111);
        match strassen_coupling(&mu, &nu).unwrap() {
            StrassenOutcome::Coupling(c) => panic!("should be infeasible, got {c:?}"),
            StrassenOutcome::Infeasible(w) => {
                assert!(w.violation() > 0.5);
                let (re_mu, re_nu) = w.recheck(&mu, &nu);
                assert_relative_eq!(re_mu, w.mu_mass);
                assert_relative_eq!(re_nu, w.nu_mass);
                assert_relative_eq!(re_mu, 1.0);
                assert_relative_eq!(re_nu, 0.0);
            }
        }
    }

    #[test]
    fn torus2_wired_dominated_by_free() {
        let q = build_quotient(
            LatticeSpec::Grid,
            GroupAction::GridTranslation { period: 2 },
        )
        .unwrap();
        let mu = enumerate_distribution(&wsf_kernel(q.graph())).unwrap();
        let nu = enumerate_distribution(&fsf_kernel(&q).unwrap()).unwrap();
        match strassen_coupling(&mu, &nu).unwrap() {
            StrassenOutcome::Coupling(c) => {
                let d = c.validate(&mu, &nu).unwrap();
                assert!(d.ok(), "{d:?}");
            }
            StrassenOutcome::Infeasible(w) => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn ground_mismatch_rejected() {
        let a = point_mass(3, 0b1);
        let b = point_mass(4, 0b1);
        assert!(matches!(
            strassen_coupling(&a, &b),
            Err(CouplingError::GroundMismatch(3, 4))
        ));
    }

    #[test]
    fn averaging_preserves_marginals_and_achieves_invariance() {
        let q = build_quotient(
            LatticeSpec::Grid,
            GroupAction::GridTranslation { period: 2 },
        )
        .unwrap();
        let mu = enumerate_distribution(&wsf_kernel(q.graph())).unwrap();
        let nu = enumerate_distribution(&fsf_kernel(&q).unwrap()).unwrap();
        let c = match strassen_coupling(&mu, &nu).unwrap() {
            StrassenOutcome::Coupling(c) => c,
            StrassenOutcome::Infeasible(w) => panic!("{w:?}"),
        };
        let actions = quotient_actions(&q);
        assert_eq!(actions.len(), 4);
        let avg = average_over_group(&c, &actions).unwrap();
        let d = avg.validate(&mu, &nu).unwrap();
        assert!(d.ok(), "{d:?}");
        let inv = check_invariance(&avg, &actions).unwrap();
        assert!(inv <= INVARIANCE_TOL, "invariance TV {inv}");
    }

    #[test]
    fn averaging_rejects_noninvariant_marginals() {
        // A point mass at a single edge is not translation invariant.
        let q = build_quotient(LatticeSpec::Line, GroupAction::LineTranslation { period: 3 })
            .unwrap();
        let mu = point_mass(3, 0b001);
        let c = MonotoneCoupling::from_cells(3, [(0b001u32, 0b001u32, 1.0)]);
        let actions = quotient_actions(&q);
        assert!(matches!(
            average_over_group(&c, &actions),
            Err(CouplingError::MarginalsNotInvariant { .. })
        ));
        let _ = mu;
    }

    #[test]
    fn permutation_validation() {
        let bad = GroupElementAction {
            label: "bad".into(),
            edge_map: vec![EdgeId(0), EdgeId(0), EdgeId(2)],
        };
        let c = MonotoneCoupling::from_cells(3, [(0b1u32, 0b1u32, 1.0)]);
        assert!(matches!(
            c.apply_action(&bad),
            Err(CouplingError::NotPermutation(_))
        ));
    }

    #[test]
    fn window_table_roundtrip() {
        use crate::graph::lattice::Axis;
        let q = build_quotient(LatticeSpec::Line, GroupAction::LineTranslation { period: 3 })
            .unwrap();
        let mu = enumerate_distribution(&wsf_kernel(q.graph())).unwrap();
        let nu = point_mass(3, 0b111);
        let c = match strassen_coupling(&mu, &nu).unwrap() {
            StrassenOutcome::Coupling(c) => c,
            StrassenOutcome::Infeasible(w) => panic!("{w:?}"),
        };
        let window = [
            BaseEdgeRef::lattice(0, 0, Axis::X),
            BaseEdgeRef::lattice(1, 0, Axis::X),
        ];
        let table = lift_coupling_window(&c, &q, &window, LiftMode::Tilde).unwrap();
        assert_relative_eq!(table.total_mass(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(table.nonmonotone_mass(), 0.0);
        let first = table.first_pmf();
        let second = table.second_pmf();
        // Second coordinate is the full configuration: all window edges present.
        assert_relative_eq!(second[0b11], 1.0, epsilon = 1e-12);
        // First coordinate misses each window edge with probability 1/3.
        assert_relative_eq!(first[0b11], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(first[0b01] + first[0b10], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn window_position_permutation_is_checked() {
        let t = WindowCouplingTable {
            window: vec![
                BaseEdgeRef::lattice(0, 0, crate::graph::lattice::Axis::X),
                BaseEdgeRef::lattice(1, 0, crate::graph::lattice::Axis::X),
            ],
            cells: vec![(0b01, 0b01, 1.0)],
        };
        assert!(t.apply_position_permutation(&[0, 0]).is_err());
        let swapped = t.apply_position_permutation(&[1, 0]).unwrap();
        assert_eq!(swapped.cells()[0].0, 0b10);
        assert_relative_eq!(t.tv_distance(&swapped), 1.0);
    }
}
