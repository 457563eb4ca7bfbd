//! Greedy left-deep planning and plan execution.
//!
//! A plan interleaves `Match` steps (evaluate one triple pattern against the
//! store) with `Join`/`Cross` steps that fold the new table into the
//! accumulated result. Patterns are ordered greedily: start from the
//! cheapest pattern by index cardinality, then repeatedly pick the cheapest
//! pattern sharing a variable with what has been joined so far. Patterns
//! connected to nothing seen yet are combined with a cross product.

use std::ops::Range;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::join::{mr_join, split_ranges, JoinError};
use crate::matcher::{count_matches, match_pattern};
use crate::oracle::{nested_loop_join, OracleError};
use crate::sparql::{Projection, Query};
use crate::store::{Term, TripleStore};
use crate::table::BindingTable;

/// One plan step. `Match` carries the pattern's textual position in the
/// query; `Join` lists the shared variables it merges on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JoinStep {
    Match(usize),
    Join(Vec<String>),
    Cross,
}

/// An ordered plan plus per-step cardinality estimates: exact match counts
/// for `Match` steps, a running product upper bound for `Join` and `Cross`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub steps: Vec<JoinStep>,
    pub estimated_cards: Vec<u64>,
}

/// Decoded query answer: projected variable names and one term per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

/// Which join implementation `execute_with` folds steps through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinEngine {
    MapReduce,
    NestedLoop,
}

/// Wall-clock split of one execution.
#[derive(Debug, Clone, Copy)]
pub struct ExecTimings {
    pub match_time: Duration,
    pub join_time: Duration,
    pub total_time: Duration,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Join(#[from] JoinError),
    #[error(transparent)]
    Baseline(#[from] OracleError),
    #[error("cross product operands share variables {0:?}")]
    OverlappingSchemas(Vec<String>),
}

/// Orders the query's patterns into a left-deep plan. Ties on cardinality go
/// to the pattern appearing first in the query text.
pub fn plan_bgp(store: &TripleStore, query: &Query) -> QueryPlan {
    let patterns = &query.patterns;
    assert!(!patterns.is_empty(), "a query has at least one pattern");
    let cards: Vec<u64> = patterns
        .iter()
        .map(|p| count_matches(store, p) as u64)
        .collect();
    let vars: Vec<Vec<&str>> = patterns
        .iter()
        .map(|p| {
            let mut vs: Vec<&str> = Vec::new();
            for v in p.variables() {
                if !vs.contains(&v) {
                    vs.push(v);
                }
            }
            vs
        })
        .collect();

    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let cheapest =
        |candidates: &[usize]| *candidates.iter().min_by_key(|&&i| (cards[i], i)).unwrap();

    let first = cheapest(&remaining);
    remaining.retain(|&i| i != first);
    let mut steps = vec![JoinStep::Match(first)];
    let mut estimated_cards = vec![cards[first]];
    let mut seen_vars: Vec<&str> = vars[first].clone();
    let mut running = cards[first];

    while !remaining.is_empty() {
        let connected: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| vars[i].iter().any(|v| seen_vars.contains(v)))
            .collect();
        let (pick, shared) = if connected.is_empty() {
            (cheapest(&remaining), None)
        } else {
            let pick = cheapest(&connected);
            let mut shared: Vec<String> = vars[pick]
                .iter()
                .filter(|v| seen_vars.contains(v))
                .map(|v| (*v).to_string())
                .collect();
            shared.sort();
            (pick, Some(shared))
        };
        remaining.retain(|&i| i != pick);

        steps.push(JoinStep::Match(pick));
        estimated_cards.push(cards[pick]);
        running = running.saturating_mul(cards[pick]);
        match shared {
            Some(vars) => steps.push(JoinStep::Join(vars)),
            None => steps.push(JoinStep::Cross),
        }
        estimated_cards.push(running);
        for v in &vars[pick] {
            if !seen_vars.contains(v) {
                seen_vars.push(v);
            }
        }
    }

    QueryPlan {
        steps,
        estimated_cards,
    }
}

/// Concatenates every row pair of two tables with disjoint schemas, `a`
/// outermost.
pub fn cross_product(a: &BindingTable, b: &BindingTable) -> Result<BindingTable, ExecError> {
    let overlap: Vec<String> = a
        .schema()
        .iter()
        .filter(|v| b.schema().contains(v))
        .cloned()
        .collect();
    if !overlap.is_empty() {
        return Err(ExecError::OverlappingSchemas(overlap));
    }
    let mut schema = a.schema().to_vec();
    schema.extend_from_slice(b.schema());
    let mut out = BindingTable::new(schema);
    let mut row = Vec::with_capacity(a.width() + b.width());
    for ra in a.rows() {
        for rb in b.rows() {
            row.clear();
            row.extend_from_slice(ra);
            row.extend_from_slice(rb);
            out.push_row(&row);
        }
    }
    Ok(out)
}

/// Executes a plan with the map/sort/reduce join and returns the decoded,
/// projected result.
pub fn execute(
    store: &TripleStore,
    plan: &QueryPlan,
    query: &Query,
    workers: usize,
) -> Result<ResultSet, ExecError> {
    execute_with(store, plan, query, workers, JoinEngine::MapReduce).map(|(rs, _)| rs)
}

/// Executes a plan with the chosen join implementation, timing the match and
/// join phases separately. Pattern matching for distinct `Match` steps runs
/// in parallel, bounded by `workers`.
pub fn execute_with(
    store: &TripleStore,
    plan: &QueryPlan,
    query: &Query,
    workers: usize,
    engine: JoinEngine,
) -> Result<(ResultSet, ExecTimings), ExecError> {
    assert!(workers >= 1, "worker count must be positive");
    let started = Instant::now();

    let match_indices: Vec<usize> = plan
        .steps
        .iter()
        .filter_map(|s| match s {
            JoinStep::Match(i) => Some(*i),
            _ => None,
        })
        .collect();
    let mut tables: Vec<Option<BindingTable>> =
        match_patterns(store, query, &match_indices, workers)
            .into_iter()
            .map(Some)
            .collect();
    let match_time = started.elapsed();

    let join_started = Instant::now();
    let mut acc: Option<BindingTable> = None;
    let mut pending: Option<BindingTable> = None;
    let mut next_table = 0;
    for step in &plan.steps {
        match step {
            JoinStep::Match(_) => {
                let table = tables[next_table].take().expect("each match used once");
                next_table += 1;
                if acc.is_none() {
                    acc = Some(table);
                } else {
                    assert!(
                        pending.is_none(),
                        "two matches queued without a combine step"
                    );
                    pending = Some(table);
                }
            }
            JoinStep::Join(_) => {
                let right = pending.take().expect("join needs a queued operand");
                let left = acc.take().unwrap();
                let joined = match engine {
                    JoinEngine::MapReduce => mr_join(&left, &right, workers)?,
                    JoinEngine::NestedLoop => nested_loop_join(&left, &right)?,
                };
                acc = Some(joined);
            }
            JoinStep::Cross => {
                let right = pending.take().expect("cross needs a queued operand");
                let left = acc.take().unwrap();
                acc = Some(cross_product(&left, &right)?);
            }
        }
    }
    assert!(pending.is_none(), "plan left an uncombined table");
    let table = acc.expect("plan produced no table");
    let join_time = join_started.elapsed();

    let result = project(store, &table, &query.projection);
    let timings = ExecTimings {
        match_time,
        join_time,
        total_time: started.elapsed(),
    };
    Ok((result, timings))
}

fn match_patterns(
    store: &TripleStore,
    query: &Query,
    indices: &[usize],
    workers: usize,
) -> Vec<BindingTable> {
    if workers == 1 || indices.len() <= 1 {
        return indices
            .iter()
            .map(|&i| match_pattern(store, &query.patterns[i]))
            .collect();
    }
    let chunks: Vec<Range<usize>> = split_ranges(indices.len(), workers);
    let parts: Vec<Vec<BindingTable>> = thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|range| {
                scope.spawn(move || {
                    indices[range]
                        .iter()
                        .map(|&i| match_pattern(store, &query.patterns[i]))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("match worker panicked"))
            .collect()
    });
    parts.into_iter().flatten().collect()
}

/// Keeps the projected columns (all of them for `SELECT *`, in table order)
/// and decodes ids back to terms.
fn project(store: &TripleStore, table: &BindingTable, projection: &Projection) -> ResultSet {
    let (schema, cols): (Vec<String>, Vec<usize>) = match projection {
        Projection::All => (table.schema().to_vec(), (0..table.width()).collect()),
        Projection::Vars(names) => (
            names.clone(),
            names
                .iter()
                .map(|n| {
                    table
                        .column_index(n)
                        .expect("projection validated against pattern variables")
                })
                .collect(),
        ),
    };
    let rows: Vec<Vec<Term>> = table
        .rows()
        .map(|row| {
            cols.iter()
                .map(|&c| {
                    store
                        .resolve(row[c])
                        .expect("ids come from this store")
                        .clone()
                })
                .collect()
        })
        .collect();
    ResultSet { schema, rows }
}
