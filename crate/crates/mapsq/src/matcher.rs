//! Evaluates one triple pattern against the store, producing its
//! partial-match binding table.

use crate::sparql::{TermOrVar, TriplePattern};
use crate::store::{IndexChoice, TermId, TripleStore};
use crate::table::BindingTable;

/// Picks the permutation index whose sort order puts the pattern's constant
/// positions in a prefix. An all-variable pattern scans SPO in full.
pub fn select_index(pattern: &TriplePattern) -> IndexChoice {
    let s = matches!(pattern.s, TermOrVar::Const(_));
    let p = matches!(pattern.p, TermOrVar::Const(_));
    let o = matches!(pattern.o, TermOrVar::Const(_));
    match (s, p, o) {
        (true, _, false) => IndexChoice::Spo,
        (true, false, true) => IndexChoice::Osp,
        (true, true, true) => IndexChoice::Spo,
        (false, true, _) => IndexChoice::Pos,
        (false, false, true) => IndexChoice::Osp,
        (false, false, false) => IndexChoice::Spo,
    }
}

/// Matches `pattern` against the store.
///
/// The schema lists the pattern's variables in (s, p, o) position order with
/// repeats collapsed; a repeated variable only matches triples that bind it
/// to equal ids. A constant missing from the dictionary yields an empty
/// table, not an error.
pub fn match_pattern(store: &TripleStore, pattern: &TriplePattern) -> BindingTable {
    let schema: Vec<String> = {
        let mut names = Vec::new();
        for v in pattern.variables() {
            if !names.iter().any(|n| n == v) {
                names.push(v.to_string());
            }
        }
        names
    };

    // Column extraction plan: for each position either bind a new schema
    // column or check equality against an earlier occurrence.
    enum Step {
        Extract(usize),
        MustEqual(usize, usize),
    }
    let mut steps = Vec::new();
    let mut seen: Vec<(&str, usize)> = Vec::new();
    for (pos, tv) in pattern.positions().into_iter().enumerate() {
        if let Some(name) = tv.as_var() {
            match seen.iter().find(|(n, _)| *n == name) {
                Some((_, col)) => steps.push(Step::MustEqual(pos, *col)),
                None => {
                    seen.push((name, seen.len()));
                    steps.push(Step::Extract(pos));
                }
            }
        }
    }

    let mut table = BindingTable::new(schema);
    let resolved = match resolve_constants(store, pattern) {
        Some(ids) => ids,
        None => return table, // unknown constant, vacuous match
    };
    let choice = select_index(pattern);
    let range = store.prefix_range(choice, prefix_for(choice, resolved));

    let mut row = Vec::with_capacity(table.width());
    'triples: for t in range {
        let vals = [t.s, t.p, t.o];
        row.clear();
        for step in &steps {
            match *step {
                Step::Extract(pos) => row.push(vals[pos]),
                Step::MustEqual(pos, col) => {
                    if vals[pos] != row[col] {
                        continue 'triples;
                    }
                }
            }
        }
        table.push_row(&row);
    }
    table
}

/// Exact number of triples in the pattern's index prefix range. Repeated
/// variables are not filtered here; this is the planner's cardinality count.
pub fn count_matches(store: &TripleStore, pattern: &TriplePattern) -> usize {
    match resolve_constants(store, pattern) {
        Some(ids) => {
            let choice = select_index(pattern);
            store.prefix_range(choice, prefix_for(choice, ids)).len()
        }
        None => 0,
    }
}

/// Dictionary ids of the pattern's constants, positionally; `None` as a whole
/// when a constant is absent from the dictionary.
fn resolve_constants(store: &TripleStore, pattern: &TriplePattern) -> Option<[Option<TermId>; 3]> {
    let mut ids = [None, None, None];
    for (pos, tv) in pattern.positions().into_iter().enumerate() {
        if let TermOrVar::Const(term) = tv {
            ids[pos] = Some(store.lookup(term)?);
        }
    }
    Some(ids)
}

/// Reorders (s, p, o) constants into the chosen index's component order.
fn prefix_for(choice: IndexChoice, ids: [Option<TermId>; 3]) -> [Option<TermId>; 3] {
    let [s, p, o] = ids;
    match choice {
        IndexChoice::Spo => [s, p, o],
        IndexChoice::Pos => [p, o, s],
        IndexChoice::Osp => [o, s, p],
    }
}
