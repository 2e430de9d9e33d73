//! Structure of the free measure on a torus quotient: every outcome must
//! have one more edge than a spanning tree plus the extra winding edge, be
//! connected and spanning, and wind around both handles (voltage rank 2).
//! Exhaustive over the support when the ground set is enumerable, sampled
//! otherwise or additionally.

use anyhow::{ensure, Result};
use forestlab_core::determinantal::{
    enumerate_distribution, fsf_kernel, sample_subset, ENUMERATION_CAP,
};
use forestlab_core::{EdgeId, QuotientGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{connected_spanning, mask_edges, quotient_from_config, Checks, Outcome};
use crate::config::ExperimentConfig;
use crate::table::ConvergenceTable;

#[derive(Default)]
struct Tally {
    outcomes: usize,
    edge_count_bad: usize,
    connectivity_bad: usize,
    winding_bad: usize,
}

impl Tally {
    fn record(&mut self, q: &QuotientGraph, edges: &[EdgeId], want_edges: usize) -> Result<()> {
        self.outcomes += 1;
        if edges.len() != want_edges {
            self.edge_count_bad += 1;
        }
        if !connected_spanning(q.graph(), edges) {
            self.connectivity_bad += 1;
        }
        if q.winding_rank(edges)? != 2 {
            self.winding_bad += 1;
        }
        Ok(())
    }
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let q = quotient_from_config(cfg)?;
    ensure!(
        q.deck_rank() == 2,
        "the topology check targets torus quotients"
    );
    let g = q.graph();
    let kernel = fsf_kernel(&q)?;
    let want_edges = kernel.dim();
    let level = q.level().to_string();
    let mut t = ConvergenceTable::new();
    let mut checks = Checks::new();

    let mut tally = Tally::default();
    if g.edge_count() <= ENUMERATION_CAP {
        let dist = enumerate_distribution(&kernel)?;
        for &(mask, _) in dist.atoms() {
            tally.record(&q, &mask_edges(mask, g.edge_count()), want_edges)?;
        }
        checks.note(format!(
            "exhaustive over the {}-atom support",
            dist.support_size()
        ));
    }
    let n_samples = cfg.samples(if tally.outcomes > 0 { 0 } else { 10_000 }) as usize;
    if n_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_samples {
            let s = sample_subset(&kernel, &mut rng)?;
            tally.record(&q, &s, want_edges)?;
        }
        checks.note(format!("sampled {n_samples} outcomes"));
    }

    t.push(&level, "outcomes_checked", tally.outcomes as f64, tally.outcomes as f64);
    t.push(&level, "edge_count_violations", tally.edge_count_bad as f64, 0.0);
    t.push(
        &level,
        "connectivity_violations",
        tally.connectivity_bad as f64,
        0.0,
    );
    t.push(&level, "winding_rank_violations", tally.winding_bad as f64, 0.0);
    checks.check(
        &format!("every outcome has exactly {want_edges} edges"),
        tally.edge_count_bad == 0,
        format!("{} checked", tally.outcomes),
    );
    checks.check(
        "every outcome is connected and spanning",
        tally.connectivity_bad == 0,
        format!("{} violations", tally.connectivity_bad),
    );
    checks.check(
        "every outcome winds around both handles",
        tally.winding_bad == 0,
        format!("{} violations", tally.winding_bad),
    );
    checks.finish(t, Vec::new())
}
