//! Map/sort/reduce join of two binding tables on their shared variables.
//!
//! The join runs as three deterministic phases over flagged key-value
//! entries:
//!
//! * **map** — every row of either table is split into its join key (the
//!   shared variables, sorted by name) and its remaining columns, and emitted
//!   with a LEFT or RIGHT provenance flag;
//! * **sort** — all entries are ordered by (key, flag, value), so each key
//!   group is contiguous with its LEFT block before its RIGHT block;
//! * **reduce duplicate** — each key group contributes the cartesian product
//!   of its LEFT and RIGHT blocks; groups with one-sided provenance emit
//!   nothing. Keeping LEFT before RIGHT makes the block boundary a single
//!   binary-search split.
//!
//! Every phase accepts a worker budget and is partitioned so that the output
//! is byte-identical for any worker count: map concatenates per-chunk
//! emissions in chunk order, sort produces the unique totally-ordered
//! sequence, and reduce concatenates per-batch rows along group-aligned
//! boundaries. The result is the natural join under bag semantics, with rows
//! sorted by key, then left value, then right value.

use std::ops::Range;
use std::thread;
use thiserror::Error;

use crate::store::TermId;
use crate::table::BindingTable;

/// Phases fall back to the calling thread below this input size; parallel and
/// sequential paths produce identical output.
const PARALLEL_CUTOFF: usize = 4096;

/// Which operand an intermediate entry came from. `Left` sorts before
/// `Right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    Left,
    Right,
}

/// Join key: one id per shared variable, in sorted-name order.
pub type JoinKey = Vec<TermId>;

/// One intermediate emitted by the map phase. Field order gives the derived
/// ordering used by the sort phase: key, then flag, then value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct KeyedEntry {
    pub key: JoinKey,
    pub flag: Flag,
    pub value: Vec<TermId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JoinError {
    #[error("tables share no variable; use a cross product instead")]
    NoSharedVariable,
}

/// Column bookkeeping for one join: which variables are shared and where the
/// key and value columns live in each operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinSpec {
    pub left_schema: Vec<String>,
    pub right_schema: Vec<String>,
    /// Shared variables, sorted by name.
    pub shared: Vec<String>,
    /// shared ++ left non-shared ++ right non-shared.
    pub output_schema: Vec<String>,
    left_key_cols: Vec<usize>,
    left_value_cols: Vec<usize>,
    right_key_cols: Vec<usize>,
    right_value_cols: Vec<usize>,
}

impl JoinSpec {
    /// Derives the spec for joining tables with the given schemas. Fails when
    /// the schemas are disjoint.
    pub fn for_schemas(left: &[String], right: &[String]) -> Result<JoinSpec, JoinError> {
        let mut shared: Vec<String> = left.iter().filter(|v| right.contains(v)).cloned().collect();
        shared.sort();
        if shared.is_empty() {
            return Err(JoinError::NoSharedVariable);
        }

        let position =
            |schema: &[String], name: &String| schema.iter().position(|v| v == name).unwrap();
        let left_key_cols: Vec<usize> = shared.iter().map(|v| position(left, v)).collect();
        let right_key_cols: Vec<usize> = shared.iter().map(|v| position(right, v)).collect();
        let left_value_cols: Vec<usize> = (0..left.len())
            .filter(|c| !left_key_cols.contains(c))
            .collect();
        let right_value_cols: Vec<usize> = (0..right.len())
            .filter(|c| !right_key_cols.contains(c))
            .collect();

        let mut output_schema = shared.clone();
        output_schema.extend(left_value_cols.iter().map(|&c| left[c].clone()));
        output_schema.extend(right_value_cols.iter().map(|&c| right[c].clone()));

        Ok(JoinSpec {
            left_schema: left.to_vec(),
            right_schema: right.to_vec(),
            shared,
            output_schema,
            left_key_cols,
            left_value_cols,
            right_key_cols,
            right_value_cols,
        })
    }
}

/// Joins two tables on all their shared variables.
///
/// The output contains one row per LEFT x RIGHT pair with equal keys
/// (duplicates preserved), sorted by key, then left value, then right value,
/// independent of `workers`.
pub fn mr_join(
    tp1: &BindingTable,
    tp2: &BindingTable,
    workers: usize,
) -> Result<BindingTable, JoinError> {
    assert!(workers >= 1, "worker count must be positive");
    let spec = JoinSpec::for_schemas(tp1.schema(), tp2.schema())?;
    let entries = map_phase(tp1, tp2, &spec, workers);
    let sorted = sort_phase(entries, workers);
    Ok(reduce_duplicate_phase(&sorted, &spec, workers))
}

/// Splits every row of both tables into a flagged key-value entry: `tp1` rows
/// carry `Flag::Left`, `tp2` rows `Flag::Right`. Emits exactly
/// `|tp1| + |tp2|` entries, in row order per side.
pub fn map_phase(
    tp1: &BindingTable,
    tp2: &BindingTable,
    spec: &JoinSpec,
    workers: usize,
) -> Vec<KeyedEntry> {
    assert!(workers >= 1, "worker count must be positive");
    let mut out = Vec::with_capacity(tp1.len() + tp2.len());
    emit_side(
        tp1,
        &spec.left_key_cols,
        &spec.left_value_cols,
        Flag::Left,
        workers,
        &mut out,
    );
    emit_side(
        tp2,
        &spec.right_key_cols,
        &spec.right_value_cols,
        Flag::Right,
        workers,
        &mut out,
    );
    out
}

fn emit_side(
    table: &BindingTable,
    key_cols: &[usize],
    value_cols: &[usize],
    flag: Flag,
    workers: usize,
    out: &mut Vec<KeyedEntry>,
) {
    if workers == 1 || table.len() < PARALLEL_CUTOFF {
        emit_range(table, key_cols, value_cols, flag, 0..table.len(), out);
        return;
    }
    let chunks = split_ranges(table.len(), workers);
    let parts: Vec<Vec<KeyedEntry>> = thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|range| {
                scope.spawn(move || {
                    let mut part = Vec::with_capacity(range.len());
                    emit_range(table, key_cols, value_cols, flag, range, &mut part);
                    part
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("map worker panicked"))
            .collect()
    });
    for part in parts {
        out.extend(part);
    }
}

fn emit_range(
    table: &BindingTable,
    key_cols: &[usize],
    value_cols: &[usize],
    flag: Flag,
    rows: Range<usize>,
    out: &mut Vec<KeyedEntry>,
) {
    for i in rows {
        let row = table.row(i);
        out.push(KeyedEntry {
            key: key_cols.iter().map(|&c| row[c]).collect(),
            flag,
            value: value_cols.iter().map(|&c| row[c]).collect(),
        });
    }
}

/// Orders entries by (key, flag, value). The output is the unique sorted
/// permutation of the input, whatever the worker count: chunks are sorted in
/// parallel and merged stably.
pub fn sort_phase(mut entries: Vec<KeyedEntry>, workers: usize) -> Vec<KeyedEntry> {
    assert!(workers >= 1, "worker count must be positive");
    if workers == 1 || entries.len() < PARALLEL_CUTOFF {
        entries.sort();
        return entries;
    }

    let mut runs: Vec<Vec<KeyedEntry>> = Vec::with_capacity(workers);
    for range in split_ranges(entries.len(), workers).into_iter().rev() {
        runs.push(entries.split_off(range.start));
    }
    runs.push(entries);
    runs.reverse();

    let mut runs: Vec<Vec<KeyedEntry>> = thread::scope(|scope| {
        let handles: Vec<_> = runs
            .into_iter()
            .map(|mut run| {
                scope.spawn(move || {
                    run.sort();
                    run
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sort worker panicked"))
            .collect()
    });

    while runs.len() > 1 {
        let mut next: Vec<Vec<KeyedEntry>> = Vec::with_capacity(runs.len().div_ceil(2));
        let mut iter = runs.into_iter();
        let mut pairs = Vec::new();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => pairs.push((a, b)),
                None => next.push(a),
            }
        }
        let merged: Vec<Vec<KeyedEntry>> = thread::scope(|scope| {
            let handles: Vec<_> = pairs
                .into_iter()
                .map(|(a, b)| scope.spawn(move || merge_runs(a, b)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("merge worker panicked"))
                .collect()
        });
        // Leftover run (odd count) stays last to preserve ordering of work;
        // merged pairs keep their original relative order.
        let mut combined = merged;
        combined.extend(next);
        runs = combined;
    }
    runs.pop().unwrap_or_default()
}

fn merge_runs(a: Vec<KeyedEntry>, b: Vec<KeyedEntry>) -> Vec<KeyedEntry> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut ai = a.into_iter().peekable();
    let mut bi = b.into_iter().peekable();
    loop {
        match (ai.peek(), bi.peek()) {
            (Some(x), Some(y)) => {
                if x <= y {
                    out.push(ai.next().unwrap());
                } else {
                    out.push(bi.next().unwrap());
                }
            }
            (Some(_), None) => out.push(ai.next().unwrap()),
            (None, Some(_)) => out.push(bi.next().unwrap()),
            (None, None) => break,
        }
    }
    out
}

/// Walks sorted entries group by group and emits, for every key, the
/// cartesian product of its LEFT and RIGHT blocks. Output rows are
/// key ++ left value ++ right value.
///
/// `sorted` must be sort-phase output. Work is partitioned across workers on
/// group-aligned boundaries so row order never depends on the worker count.
pub fn reduce_duplicate_phase(
    sorted: &[KeyedEntry],
    spec: &JoinSpec,
    workers: usize,
) -> BindingTable {
    assert!(workers >= 1, "worker count must be positive");
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "input not sorted");

    let mut groups: Vec<Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i].key != sorted[start].key {
            groups.push(start..i);
            start = i;
        }
    }

    let width = spec.output_schema.len();
    if workers == 1 || sorted.len() < PARALLEL_CUTOFF {
        let mut data = Vec::new();
        let mut rows = 0;
        for g in &groups {
            rows += emit_group(&sorted[g.clone()], &mut data);
        }
        debug_assert_eq!(data.len(), rows * width);
        return BindingTable::from_raw_parts(spec.output_schema.clone(), data, rows);
    }

    let batches = batch_groups(&groups, sorted.len(), workers);
    let parts: Vec<(Vec<TermId>, usize)> = thread::scope(|scope| {
        let groups = &groups;
        let handles: Vec<_> = batches
            .into_iter()
            .map(|batch| {
                scope.spawn(move || {
                    let mut data = Vec::new();
                    let mut rows = 0;
                    for g in &groups[batch] {
                        rows += emit_group(&sorted[g.clone()], &mut data);
                    }
                    (data, rows)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("reduce worker panicked"))
            .collect()
    });

    let mut data = Vec::new();
    let mut rows = 0;
    for (part, count) in parts {
        data.extend(part);
        rows += count;
    }
    debug_assert_eq!(data.len(), rows * width);
    BindingTable::from_raw_parts(spec.output_schema.clone(), data, rows)
}

/// Emits one key group's LEFT x RIGHT product, returning the row count. The
/// group is sorted by (flag, value), so the LEFT block ends at a single
/// partition point and both blocks are already value-ordered. Walking runs
/// of equal left values (rather than single entries) keeps the emitted rows
/// sorted by (key, left value, right value) even when left values repeat.
fn emit_group(group: &[KeyedEntry], out: &mut Vec<TermId>) -> usize {
    let split = group.partition_point(|e| e.flag == Flag::Left);
    let (lefts, rights) = group.split_at(split);
    if lefts.is_empty() || rights.is_empty() {
        return 0;
    }
    let key = &group[0].key;
    let mut rows = 0;
    let mut li = 0;
    while li < lefts.len() {
        let mut lj = li + 1;
        while lj < lefts.len() && lefts[lj].value == lefts[li].value {
            lj += 1;
        }
        let copies = lj - li;
        for r in rights {
            for _ in 0..copies {
                out.extend_from_slice(key);
                out.extend_from_slice(&lefts[li].value);
                out.extend_from_slice(&r.value);
            }
            rows += copies;
        }
        li = lj;
    }
    rows
}

/// Groups batched into at most `workers` contiguous runs, balanced by entry
/// count.
fn batch_groups(groups: &[Range<usize>], total: usize, workers: usize) -> Vec<Range<usize>> {
    let target = total.div_ceil(workers).max(1);
    let mut batches = Vec::new();
    let mut batch_start = 0;
    let mut in_batch = 0;
    for (i, g) in groups.iter().enumerate() {
        in_batch += g.len();
        if in_batch >= target {
            batches.push(batch_start..i + 1);
            batch_start = i + 1;
            in_batch = 0;
        }
    }
    if batch_start < groups.len() {
        batches.push(batch_start..groups.len());
    }
    batches
}

/// Splits `0..n` into up to `parts` contiguous, near-equal ranges.
pub(crate) fn split_ranges(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.min(n).max(1);
    let base = n / parts;
    let rem = n % parts;
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < rem);
        if len == 0 {
            break;
        }
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}
