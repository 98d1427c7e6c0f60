//! Aggregation and serialization of suite results.
//!
//! %E is averaged over all episodes of an algorithm. The other metrics are
//! averaged only over the episodes where that algorithm stopped the seeker.
//! Standard deviations use the population estimator (divide by n).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use counterplan::simulator::Metrics;

use crate::suite::SuiteResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stat { mean, std: var.sqrt(), n: values.len() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub domain: String,
    pub algorithm: String,
    pub episodes: usize,
    pub e: Option<Stat>,
    pub ratio_seek: Option<Stat>,
    pub len_prev: Option<Stat>,
    pub ratio_anticipatory: Option<Stat>,
    pub time_avg_s: Option<Stat>,
    /// Episode count per status.
    pub statuses: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub summaries: Vec<AlgorithmSummary>,
    pub rows: Vec<(String, Metrics)>,
    /// (task id, reason) for tasks that could not be generated.
    pub failures: Vec<(String, String)>,
}

pub fn summarize(domain: &str, algorithm: &str, rows: &[&Metrics]) -> AlgorithmSummary {
    let solved: Vec<&&Metrics> = rows.iter().filter(|m| m.stopped()).collect();
    let over = |f: &dyn Fn(&Metrics) -> Option<f64>| Stat::of(&solved.iter().filter_map(|m| f(m)).collect::<Vec<_>>());
    let mut statuses = BTreeMap::new();
    for m in rows {
        *statuses.entry(m.status.clone()).or_insert(0) += 1;
    }
    AlgorithmSummary {
        domain: domain.to_string(),
        algorithm: algorithm.to_string(),
        episodes: rows.len(),
        e: Stat::of(&rows.iter().map(|m| m.e).collect::<Vec<_>>()),
        ratio_seek: over(&|m| Some(m.ratio_seek)),
        len_prev: over(&|m| Some(m.len_prev as f64)),
        ratio_anticipatory: over(&|m| m.ratio_anticipatory),
        time_avg_s: over(&|m| Some(m.time_avg_s)),
        statuses,
    }
}

/// Builds the report for one or more suites, algorithms in first-seen order.
pub fn build_report(suites: &[SuiteResult]) -> SuiteReport {
    let mut report = SuiteReport::default();
    for s in suites {
        let mut order: Vec<&str> = Vec::new();
        for m in s.rows() {
            if !order.contains(&m.algorithm.as_str()) {
                order.push(&m.algorithm);
            }
            report.rows.push((s.domain.clone(), m.clone()));
        }
        for alg in order {
            let rows: Vec<&Metrics> = s.rows().filter(|m| m.algorithm == alg).collect();
            report.summaries.push(summarize(&s.domain, alg, &rows));
        }
        for t in &s.tasks {
            if let Some(f) = &t.failure {
                report.failures.push((t.task_id.clone(), f.clone()));
            }
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(format!("unknown format {s}")),
        }
    }
}

fn cell(s: Option<Stat>) -> String {
    s.map_or("-".into(), |s| format!("{:.2} ± {:.2}", s.mean, s.std))
}

impl SuiteReport {
    /// One metrics row per episode.
    pub fn to_csv(&self) -> String {
        let mut out = format!("domain,{}\n", Metrics::CSV_HEADER);
        for (d, m) in &self.rows {
            let _ = writeln!(out, "{d},{}", m.csv_row());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Summary table, one row per domain and algorithm.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| domain | algorithm | episodes | %E | %|π_seek| | |π_prev| | %|π_prev|_a | t_C (s) |\n\
             |---|---|---|---|---|---|---|---|\n",
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                s.domain,
                s.algorithm,
                s.episodes,
                cell(s.e),
                cell(s.ratio_seek),
                cell(s.len_prev),
                cell(s.ratio_anticipatory),
                s.time_avg_s.map_or("-".into(), |t| format!("{:.3} ± {:.3}", t.mean, t.std)),
            );
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Markdown => self.to_markdown(),
        }
    }

    pub fn summary(&self, domain: &str, algorithm: &str) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.domain == domain && s.algorithm == algorithm)
    }
}
