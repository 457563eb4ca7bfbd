//! Slow reference evaluators, independent of the join pipeline and planner.
//!
//! `nested_loop_join` and `evaluate_bruteforce` recompute everything from
//! first principles (their own shared-variable discovery, their own
//! candidate enumeration) so they can serve as cross-checks for the fast
//! paths and as benchmark baselines. Favor clarity over speed here.

use std::collections::HashSet;
use thiserror::Error;

use crate::planner::ResultSet;
use crate::sparql::{Projection, Query, TermOrVar};
use crate::store::{TermId, TripleStore};
use crate::table::BindingTable;

/// Assignment budget for `evaluate_bruteforce`.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("tables share no variable; use a cross product instead")]
    NoSharedVariable,
    #[error("brute-force enumeration needs {needed} assignments, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
}

/// Joins two tables by comparing every row pair. Output schema is the shared
/// variables (sorted by name) followed by the remaining columns of `a`, then
/// of `b`; rows are sorted lexicographically. Duplicates are preserved.
pub fn nested_loop_join(a: &BindingTable, b: &BindingTable) -> Result<BindingTable, OracleError> {
    let mut shared: Vec<&String> = a
        .schema()
        .iter()
        .filter(|v| b.schema().contains(v))
        .collect();
    shared.sort();
    if shared.is_empty() {
        return Err(OracleError::NoSharedVariable);
    }

    let a_key: Vec<usize> = shared.iter().map(|v| a.column_index(v).unwrap()).collect();
    let b_key: Vec<usize> = shared.iter().map(|v| b.column_index(v).unwrap()).collect();
    let a_rest: Vec<usize> = (0..a.width()).filter(|c| !a_key.contains(c)).collect();
    let b_rest: Vec<usize> = (0..b.width()).filter(|c| !b_key.contains(c)).collect();

    let mut schema: Vec<String> = shared.iter().map(|v| (*v).clone()).collect();
    schema.extend(a_rest.iter().map(|&c| a.schema()[c].clone()));
    schema.extend(b_rest.iter().map(|&c| b.schema()[c].clone()));

    let mut rows: Vec<Vec<TermId>> = Vec::new();
    for ra in a.rows() {
        for rb in b.rows() {
            if a_key.iter().zip(&b_key).all(|(&ca, &cb)| ra[ca] == rb[cb]) {
                let mut row: Vec<TermId> = a_key.iter().map(|&c| ra[c]).collect();
                row.extend(a_rest.iter().map(|&c| ra[c]));
                row.extend(b_rest.iter().map(|&c| rb[c]));
                rows.push(row);
            }
        }
    }
    rows.sort();

    let mut out = BindingTable::new(schema);
    for row in &rows {
        out.push_row(row);
    }
    Ok(out)
}

/// Evaluates a query by trying every combination of candidate bindings, one
/// variable at a time, and keeping the assignments under which all patterns
/// are triples of the store.
///
/// Candidates for a variable are the terms seen in every position where the
/// variable occurs (intersected across occurrences), so the search space is
/// a superset of the answer. If the combination count exceeds `budget` the
/// evaluation refuses to run rather than stall.
pub fn evaluate_bruteforce(store: &TripleStore, query: &Query) -> Result<ResultSet, OracleError> {
    evaluate_bruteforce_with_budget(store, query, DEFAULT_ENUMERATION_BUDGET)
}

pub fn evaluate_bruteforce_with_budget(
    store: &TripleStore,
    query: &Query,
    budget: u64,
) -> Result<ResultSet, OracleError> {
    // Variables in first-occurrence order across patterns.
    let mut variables: Vec<String> = Vec::new();
    for pattern in &query.patterns {
        for var in pattern.variables() {
            if !variables.iter().any(|v| v == var) {
                variables.push(var.to_string());
            }
        }
    }

    let schema: Vec<String> = match &query.projection {
        Projection::All => variables.clone(),
        Projection::Vars(names) => names.clone(),
    };
    let empty = |schema: Vec<String>| ResultSet {
        schema,
        rows: Vec::new(),
    };

    // A constant term absent from the dictionary can never match.
    let mut resolved_patterns: Vec<[PositionSpec; 3]> = Vec::new();
    for pattern in &query.patterns {
        let mut spec = [
            PositionSpec::Id(TermId::new(0)),
            PositionSpec::Id(TermId::new(0)),
            PositionSpec::Id(TermId::new(0)),
        ];
        for (slot, term) in spec.iter_mut().zip(pattern.positions()) {
            *slot = match term {
                TermOrVar::Var(name) => {
                    PositionSpec::Var(variables.iter().position(|v| v == name).unwrap())
                }
                TermOrVar::Const(t) => match store.lookup(t) {
                    Some(tid) => PositionSpec::Id(tid),
                    None => return Ok(empty(schema)),
                },
            };
        }
        resolved_patterns.push(spec);
    }

    // Candidate ids per variable: intersection over all occurrence positions.
    let mut subjects: HashSet<TermId> = HashSet::new();
    let mut predicates: HashSet<TermId> = HashSet::new();
    let mut objects: HashSet<TermId> = HashSet::new();
    for t in store.triples() {
        subjects.insert(t.s);
        predicates.insert(t.p);
        objects.insert(t.o);
    }
    let position_sets = [&subjects, &predicates, &objects];

    let mut candidates: Vec<Option<Vec<TermId>>> = vec![None; variables.len()];
    for spec in &resolved_patterns {
        for (pos, slot) in spec.iter().enumerate() {
            if let PositionSpec::Var(v) = slot {
                let seen = position_sets[pos];
                match &mut candidates[*v] {
                    None => {
                        let mut ids: Vec<TermId> = seen.iter().copied().collect();
                        ids.sort();
                        candidates[*v] = Some(ids);
                    }
                    Some(ids) => ids.retain(|tid| seen.contains(tid)),
                }
            }
        }
    }
    let candidates: Vec<Vec<TermId>> = candidates
        .into_iter()
        .map(|c| c.expect("every variable occurs in a pattern"))
        .collect();

    let mut combinations: u64 = 1;
    for c in &candidates {
        if c.is_empty() {
            return Ok(empty(schema));
        }
        combinations = combinations.saturating_mul(c.len() as u64);
    }
    if combinations > budget {
        return Err(OracleError::BudgetExceeded {
            needed: combinations,
            budget,
        });
    }

    let triples: HashSet<(TermId, TermId, TermId)> =
        store.triples().iter().map(|t| (t.s, t.p, t.o)).collect();

    let projected: Vec<usize> = schema
        .iter()
        .map(|name| variables.iter().position(|v| v == name).unwrap())
        .collect();

    let mut rows = Vec::new();
    let mut assignment: Vec<TermId> = vec![TermId::new(0); variables.len()];
    enumerate(
        0,
        &candidates,
        &mut assignment,
        &resolved_patterns,
        &triples,
        &projected,
        store,
        &mut rows,
    );
    Ok(ResultSet { schema, rows })
}

#[derive(Clone, Copy)]
enum PositionSpec {
    Id(TermId),
    Var(usize),
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    depth: usize,
    candidates: &[Vec<TermId>],
    assignment: &mut Vec<TermId>,
    patterns: &[[PositionSpec; 3]],
    triples: &HashSet<(TermId, TermId, TermId)>,
    projected: &[usize],
    store: &TripleStore,
    rows: &mut Vec<Vec<crate::store::Term>>,
) {
    if depth == candidates.len() {
        let satisfied = patterns.iter().all(|spec| {
            let resolve = |slot: &PositionSpec| match slot {
                PositionSpec::Id(tid) => *tid,
                PositionSpec::Var(v) => assignment[*v],
            };
            triples.contains(&(resolve(&spec[0]), resolve(&spec[1]), resolve(&spec[2])))
        });
        if satisfied {
            rows.push(
                projected
                    .iter()
                    .map(|&v| store.resolve(assignment[v]).expect("candidate id").clone())
                    .collect(),
            );
        }
        return;
    }
    for &tid in &candidates[depth] {
        assignment[depth] = tid;
        enumerate(
            depth + 1,
            candidates,
            assignment,
            patterns,
            triples,
            projected,
            store,
            rows,
        );
    }
}
