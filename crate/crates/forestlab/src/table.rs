//! Convergence tables: one row per (level, quantity), with the gap to a
//! reference value kept explicitly so it can be re-audited from the columns.

use anyhow::{ensure, Result};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub level: String,
    pub quantity: String,
    pub value: f64,
    pub reference: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceTable {
    rows: Vec<Row>,
}

impl ConvergenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, level: impl Into<String>, quantity: impl Into<String>, value: f64, reference: f64) {
        self.rows.push(Row {
            level: level.into(),
            quantity: quantity.into(),
            value,
            reference,
            gap: (value - reference).abs(),
        });
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Re-derive every gap from its value/reference columns.
    pub fn audit(&self) -> Result<()> {
        for r in &self.rows {
            ensure!(
                r.gap == (r.value - r.reference).abs(),
                "gap column out of sync at ({}, {})",
                r.level,
                r.quantity
            );
        }
        Ok(())
    }

    /// Gaps of one quantity in row order (one per level).
    pub fn gaps(&self, quantity: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.quantity == quantity)
            .map(|r| r.gap)
            .collect()
    }

    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(0.0, f64::max)
    }

    pub fn gaps_nonincreasing(&self, quantity: &str) -> bool {
        self.gaps(quantity).windows(2).all(|w| w[1] <= w[0])
    }

    pub fn gaps_strictly_decreasing(&self, quantity: &str) -> bool {
        self.gaps(quantity).windows(2).all(|w| w[1] < w[0])
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "level,quantity,value,reference,gap")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.17},{:.17},{:.17}",
                r.level, r.quantity, r.value, r.reference, r.gap
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}
