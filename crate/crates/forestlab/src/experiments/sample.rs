//! Sampler fidelity: draw from the kernel sampler (and the loop-erased-walk
//! tree sampler) and compare frequencies against exact probabilities, per
//! edge always and per support atom when the ground set is small enough to
//! enumerate.

use anyhow::Result;
use forestlab_core::determinantal::{
    enumerate_distribution, fsf_kernel, sample_subset, wilson_ust, wsf_kernel, ProjectionKernel,
    ENUMERATION_CAP,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use super::{quotient_from_config, Checks, Outcome};
use crate::config::ExperimentConfig;
use crate::table::ConvergenceTable;

/// Slack added to every 4-sigma band so that zero-variance marginals
/// (probability 0 or 1) compare cleanly in floating point.
const BAND_EPS: f64 = 1e-9;

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let q = quotient_from_config(cfg)?;
    let g = q.graph();
    let n_samples = cfg.samples(100_000) as usize;
    let level = q.level().to_string();
    let mut t = ConvergenceTable::new();
    let mut checks = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let kw = wsf_kernel(g);
    kernel_pass(&kw, "wsf", n_samples, &level, &mut t, &mut checks, &mut rng)?;
    if q.deck_rank() > 0 {
        let kf = fsf_kernel(&q)?;
        kernel_pass(&kf, "fsf", n_samples, &level, &mut t, &mut checks, &mut rng)?;
    }

    // Independent tree sampler against the same per-edge marginals.
    let mut counts = vec![0usize; g.edge_count()];
    for _ in 0..n_samples {
        for e in wilson_ust(g, &mut rng)? {
            counts[e.idx()] += 1;
        }
    }
    let mut ok = true;
    for e in g.edges() {
        let p = kw.entry(e, e);
        let freq = counts[e.idx()] as f64 / n_samples as f64;
        t.push(&level, format!("wilson_freq_e{}", e.idx()), freq, p);
        ok &= (freq - p).abs() <= band(p, n_samples);
    }
    checks.check(
        "loop-erased-walk edge frequencies within 4 sigma",
        ok,
        format!("{n_samples} trees"),
    );

    checks.finish(t, Vec::new())
}

fn band(p: f64, n: usize) -> f64 {
    4.0 * (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n as f64).sqrt() + BAND_EPS
}

#[allow(clippy::too_many_arguments)]
fn kernel_pass(
    k: &ProjectionKernel,
    name: &str,
    n_samples: usize,
    level: &str,
    t: &mut ConvergenceTable,
    checks: &mut Checks,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let m = k.ground_size();
    let mut edge_counts = vec![0usize; m];
    let mut atom_counts: HashMap<u32, usize> = HashMap::new();
    let mut sizes_ok = true;
    for _ in 0..n_samples {
        let s = sample_subset(k, rng)?;
        sizes_ok &= s.len() == k.dim();
        let mut mask = 0u32;
        for e in &s {
            edge_counts[e.idx()] += 1;
            mask |= 1 << e.idx();
        }
        *atom_counts.entry(mask).or_insert(0) += 1;
    }
    checks.check(
        &format!("{name} samples all have {} edges", k.dim()),
        sizes_ok,
        format!("{n_samples} draws"),
    );

    let mut edges_ok = true;
    for (i, &c) in edge_counts.iter().enumerate() {
        let p = k.entry(forestlab_core::EdgeId(i as u32), forestlab_core::EdgeId(i as u32));
        let freq = c as f64 / n_samples as f64;
        t.push(level, format!("{name}_dpp_freq_e{i}"), freq, p);
        edges_ok &= (freq - p).abs() <= band(p, n_samples);
    }
    checks.check(
        &format!("{name} sampler edge frequencies within 4 sigma"),
        edges_ok,
        format!("{m} edges"),
    );

    if m <= ENUMERATION_CAP {
        let dist = enumerate_distribution(k)?;
        let mut atoms_ok = true;
        let mut worst_z = 0.0f64;
        for &(mask, p) in dist.atoms() {
            let freq = *atom_counts.get(&mask).unwrap_or(&0) as f64 / n_samples as f64;
            let b = band(p, n_samples);
            atoms_ok &= (freq - p).abs() <= b;
            if b > BAND_EPS {
                worst_z = worst_z.max(4.0 * (freq - p).abs() / (b - BAND_EPS));
            }
        }
        // Frequencies off the support mean the sampler leaks mass.
        let stray: usize = atom_counts
            .iter()
            .filter(|(mask, _)| dist.probability(**mask) == 0.0)
            .map(|(_, c)| *c)
            .sum();
        checks.check(
            &format!("{name} sampler atom frequencies within 4 sigma"),
            atoms_ok && stray == 0,
            format!(
                "{} atoms, worst z {:.2}, stray draws {}",
                dist.support_size(),
                worst_z,
                stray
            ),
        );
    } else {
        checks.note(format!(
            "{name}: ground set of {m} edges exceeds the enumeration cap; atom check skipped"
        ));
    }
    Ok(())
}
