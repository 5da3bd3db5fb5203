//! Report types and their JSON, CSV and text encodings.
//!
//! JSON is one object with the stable keys `command`, `params`, `result` and
//! `elapsed_ms`. Big integers are strings so they survive any JSON parser.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use polygon_odds::{ExactCount, ExactProb, PolygonRealization, SimEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub result: ReportResult,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportResult {
    Simulation(SimResult),
    Count(CountResult),
    Exact(ExactResult),
    Polygon(PolygonResult),
    Table(TableResult),
    Convergence(ConvergenceResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactResult {
    pub value: String,
    pub decimal: f64,
}

impl From<&ExactProb> for ExactResult {
    fn from(p: &ExactProb) -> Self {
        ExactResult {
            value: p.to_string(),
            decimal: significant(p.to_f64()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimResult {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub shards: u64,
}

impl From<&SimEstimate> for SimResult {
    fn from(e: &SimEstimate) -> Self {
        SimResult {
            trials: e.trials,
            successes: e.successes,
            estimate: e.estimate,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            seed: e.seed,
            shards: e.shards,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountResult {
    pub total: String,
    pub good: String,
    pub probability: String,
    pub decimal: f64,
    pub bad_by_index: Vec<String>,
}

impl From<&ExactCount> for CountResult {
    fn from(c: &ExactCount) -> Self {
        CountResult {
            total: c.total.to_string(),
            good: c.good.to_string(),
            probability: c.probability.to_string(),
            decimal: significant(c.probability.to_f64()),
            bad_by_index: c.bad_by_index.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonResult {
    pub vertices: Vec<[f64; 2]>,
    pub side_lengths: Vec<f64>,
    pub circumradius: f64,
}

impl From<&PolygonRealization> for PolygonResult {
    fn from(p: &PolygonRealization) -> Self {
        PolygonResult {
            vertices: p.vertices.clone(),
            side_lengths: p.side_lengths(),
            circumradius: p.circumradius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub family: String,
    pub n: Option<u64>,
    pub k: u64,
    pub value: String,
    pub decimal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableResult {
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceRow {
    pub n: u64,
    pub discrete: String,
    pub limit: String,
    pub gap: String,
    pub gap_decimal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceResult {
    pub family: String,
    pub k: u64,
    pub rows: Vec<ConvergenceRow>,
    /// Every gap positive and strictly smaller than the one before.
    pub decreasing: bool,
}

/// Round to 12 significant digits.
pub fn significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl RunReport {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => self.write_csv(out),
            Format::Text => self.write_text(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = |x: f64| x.to_string();
        match &self.result {
            ReportResult::Exact(r) => {
                w.write_record(["value", "decimal"])?;
                w.write_record([r.value.clone(), d(r.decimal)])?;
            }
            ReportResult::Simulation(r) => {
                w.write_record([
                    "trials",
                    "successes",
                    "estimate",
                    "ci_low",
                    "ci_high",
                    "seed",
                    "shards",
                ])?;
                w.write_record([
                    r.trials.to_string(),
                    r.successes.to_string(),
                    d(r.estimate),
                    d(r.ci_low),
                    d(r.ci_high),
                    r.seed.to_string(),
                    r.shards.to_string(),
                ])?;
            }
            ReportResult::Count(r) => {
                w.write_record(["total", "good", "probability", "decimal", "bad_by_index"])?;
                w.write_record([
                    r.total.clone(),
                    r.good.clone(),
                    r.probability.clone(),
                    d(r.decimal),
                    r.bad_by_index.join(","),
                ])?;
            }
            ReportResult::Polygon(r) => {
                w.write_record(["vertex", "x", "y", "side_length"])?;
                for (i, ([x, y], s)) in r.vertices.iter().zip(&r.side_lengths).enumerate() {
                    w.write_record([(i + 1).to_string(), d(*x), d(*y), d(*s)])?;
                }
            }
            ReportResult::Table(r) => {
                w.write_record(["family", "n", "k", "value", "decimal"])?;
                for row in &r.rows {
                    w.write_record([
                        row.family.clone(),
                        row.n.map(|n| n.to_string()).unwrap_or_default(),
                        row.k.to_string(),
                        row.value.clone(),
                        d(row.decimal),
                    ])?;
                }
            }
            ReportResult::Convergence(r) => {
                w.write_record(["n", "discrete", "limit", "gap", "gap_decimal"])?;
                for row in &r.rows {
                    w.write_record([
                        row.n.to_string(),
                        row.discrete.clone(),
                        row.limit.clone(),
                        row.gap.clone(),
                        d(row.gap_decimal),
                    ])?;
                }
            }
        }
        w.flush()
    }

    fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(out, "{} {}", self.command, params.join(" "))?;
        match &self.result {
            ReportResult::Exact(r) => writeln!(out, "probability {} ≈ {}", r.value, r.decimal)?,
            ReportResult::Simulation(r) => writeln!(
                out,
                "estimate {} ({} / {}), interval [{}, {}], seed {}, shards {}",
                r.estimate, r.successes, r.trials, r.ci_low, r.ci_high, r.seed, r.shards
            )?,
            ReportResult::Count(r) => writeln!(
                out,
                "{} of {} outcomes form a polygon; probability {} ≈ {}",
                r.good, r.total, r.probability, r.decimal
            )?,
            ReportResult::Polygon(r) => {
                writeln!(out, "circumradius {}", r.circumradius)?;
                for (i, [x, y]) in r.vertices.iter().enumerate() {
                    writeln!(out, "v{} = ({x}, {y})", i + 1)?;
                }
            }
            ReportResult::Table(r) => {
                for row in &r.rows {
                    let n = row.n.map(|n| format!(" n={n}")).unwrap_or_default();
                    writeln!(
                        out,
                        "{}{n} k={}: {} ≈ {}",
                        row.family, row.k, row.value, row.decimal
                    )?;
                }
            }
            ReportResult::Convergence(r) => {
                for row in &r.rows {
                    writeln!(
                        out,
                        "n={}: {} vs {} gap {}",
                        row.n, row.discrete, row.limit, row.gap_decimal
                    )?;
                }
                writeln!(out, "decreasing: {}", r.decreasing)?;
            }
        }
        writeln!(out, "elapsed {:.3} ms", self.elapsed_ms)
    }
}
