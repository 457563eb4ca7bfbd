//! Timing harness: runs queries under both join engines and reports median
//! match/join/total times plus the baseline-over-parallel speedup.

use std::fmt;

use thiserror::Error;

use crate::planner::{execute_with, plan_bgp, ExecError, JoinEngine};
use crate::sparql::Query;
use crate::store::TripleStore;

/// Measurements for one query. Times are medians over the repetitions, in
/// milliseconds.
#[derive(Debug, Clone)]
pub struct QueryBench {
    pub name: String,
    pub rows: usize,
    pub workers: usize,
    pub reps: usize,
    pub mr_match_ms: f64,
    pub mr_join_ms: f64,
    pub mr_total_ms: f64,
    pub nested_match_ms: f64,
    pub nested_join_ms: f64,
    pub nested_total_ms: f64,
    /// Baseline join time over parallel join time.
    pub speedup: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub entries: Vec<QueryBench>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetition count must be at least 1")]
    ZeroReps,
    #[error(
        "engines disagree on {query}: {mr} rows from the parallel join, {nested} from the baseline"
    )]
    CardinalityMismatch {
        query: String,
        mr: usize,
        nested: usize,
    },
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Runs every query `reps` times per engine. Cardinalities must agree
/// between engines before any timing is reported.
pub fn run_bench(
    store: &TripleStore,
    queries: &[(String, Query)],
    workers: usize,
    reps: usize,
) -> Result<BenchReport, BenchError> {
    if reps == 0 {
        return Err(BenchError::ZeroReps);
    }
    let mut report = BenchReport::default();
    for (name, query) in queries {
        let plan = plan_bgp(store, query);
        let mut mr_rows = 0;
        let mut nested_rows = 0;
        let mut mr_times = Times::default();
        let mut nested_times = Times::default();
        for _ in 0..reps {
            let (result, t) = execute_with(store, &plan, query, workers, JoinEngine::MapReduce)?;
            mr_rows = result.rows.len();
            mr_times.push(&t);
            let (result, t) = execute_with(store, &plan, query, workers, JoinEngine::NestedLoop)?;
            nested_rows = result.rows.len();
            nested_times.push(&t);
        }
        if mr_rows != nested_rows {
            return Err(BenchError::CardinalityMismatch {
                query: name.clone(),
                mr: mr_rows,
                nested: nested_rows,
            });
        }
        let mr_join_ms = mr_times.median_join();
        let nested_join_ms = nested_times.median_join();
        report.entries.push(QueryBench {
            name: name.clone(),
            rows: mr_rows,
            workers,
            reps,
            mr_match_ms: mr_times.median_match(),
            mr_join_ms,
            mr_total_ms: mr_times.median_total(),
            nested_match_ms: nested_times.median_match(),
            nested_join_ms,
            nested_total_ms: nested_times.median_total(),
            speedup: nested_join_ms / mr_join_ms.max(f64::EPSILON),
        });
    }
    Ok(report)
}

#[derive(Default)]
struct Times {
    match_ms: Vec<f64>,
    join_ms: Vec<f64>,
    total_ms: Vec<f64>,
}

impl Times {
    fn push(&mut self, t: &crate::planner::ExecTimings) {
        self.match_ms.push(t.match_time.as_secs_f64() * 1e3);
        self.join_ms.push(t.join_time.as_secs_f64() * 1e3);
        self.total_ms.push(t.total_time.as_secs_f64() * 1e3);
    }

    fn median_match(&self) -> f64 {
        median(self.match_ms.clone())
    }

    fn median_join(&self) -> f64 {
        median(self.join_ms.clone())
    }

    fn median_total(&self) -> f64 {
        median(self.total_ms.clone())
    }
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty(), "median of an empty sample");
    xs.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

impl BenchReport {
    /// One `key=value` CSV line per (query, engine); the parallel-engine line
    /// carries the speedup.
    pub fn machine_lines(&self) -> Vec<String> {
        let mut lines = Vec::with_capacity(self.entries.len() * 2);
        for e in &self.entries {
            lines.push(format!(
                "query={},engine=mr,workers={},reps={},rows={},match_ms={:.3},join_ms={:.3},total_ms={:.3},speedup={:.2}",
                e.name, e.workers, e.reps, e.rows, e.mr_match_ms, e.mr_join_ms, e.mr_total_ms, e.speedup
            ));
            lines.push(format!(
                "query={},engine=nested,workers={},reps={},rows={},match_ms={:.3},join_ms={:.3},total_ms={:.3}",
                e.name, e.workers, e.reps, e.rows, e.nested_match_ms, e.nested_join_ms, e.nested_total_ms
            ));
        }
        lines
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>8} {:>8} {:>12} {:>12} {:>12} {:>12} {:>8}",
            "query", "rows", "workers", "mr_match", "mr_join", "base_join", "mr_total", "speedup"
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "{:<16} {:>8} {:>8} {:>10.2}ms {:>10.2}ms {:>10.2}ms {:>10.2}ms {:>7.2}x",
                e.name,
                e.rows,
                e.workers,
                e.mr_match_ms,
                e.mr_join_ms,
                e.nested_join_ms,
                e.mr_total_ms,
                e.speedup
            )?;
        }
        Ok(())
    }
}
