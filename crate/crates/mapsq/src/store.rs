//! Dictionary-encoded in-memory triple store.
//!
//! Terms are interned into dense ids in first-seen order; triples are kept in
//! three sorted permutation indexes (SPO, POS, OSP) so that every
//! constant-position combination of a triple pattern has one index with a
//! usable prefix. The store is immutable once loaded and safe to share across
//! worker threads.

use indexmap::IndexSet;
use std::fmt;
use std::io::BufRead;
use thiserror::Error;

use crate::ntriples;

/// An RDF term: IRI, literal or blank node.
///
/// The lexical form of a literal keeps any language tag or datatype IRI as an
/// opaque suffix. Two terms are equal exactly when kind and lexical form are
/// equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal(String),
    BlankNode(String),
}

impl Term {
    pub fn iri(lexical: impl Into<String>) -> Term {
        Term::Iri(lexical.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Term {
        Term::Literal(lexical.into())
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term::BlankNode(label.into())
    }

    pub fn lexical(&self) -> &str {
        match self {
            Term::Iri(s) | Term::Literal(s) | Term::BlankNode(s) => s,
        }
    }
}

impl fmt::Display for Term {
    /// Output form: IRIs print bare, literals quoted with escapes, blank
    /// nodes with their `_:` prefix.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write!(f, "{s}"),
            Term::Literal(s) => {
                write!(f, "\"")?;
                for c in s.chars() {
                    match c {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        '\r' => write!(f, "\\r")?,
                        '\t' => write!(f, "\\t")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
            Term::BlankNode(s) => write!(f, "_:{s}"),
        }
    }
}

/// Dense identifier of an interned term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

impl TermId {
    pub fn new(value: u32) -> TermId {
        TermId(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A dictionary-encoded triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}

/// Which permutation index a scan runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexChoice {
    Spo,
    Pos,
    Osp,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown term id {0}")]
    UnknownId(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// In-memory triple store. Build it with [`TripleStore::load_ntriples`] or
/// [`TripleStore::from_triples`]; reads never mutate it.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    dictionary: IndexSet<Term>,
    spo: Vec<Triple>,
    pos: Vec<Triple>,
    osp: Vec<Triple>,
}

impl TripleStore {
    pub fn new() -> TripleStore {
        TripleStore::default()
    }

    /// Reads UTF-8 N-Triples. Duplicate statements are deduplicated; term ids
    /// are assigned in first-occurrence order (subject, predicate, object
    /// within each line).
    pub fn load_ntriples(reader: impl BufRead) -> Result<TripleStore, StoreError> {
        let mut store = TripleStore::new();
        let mut triples = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let parsed = ntriples::parse_line(&line).map_err(|message| StoreError::Parse {
                line: lineno + 1,
                message,
            })?;
            if let Some((s, p, o)) = parsed {
                let s = store.intern(s);
                let p = store.intern(p);
                let o = store.intern(o);
                triples.push(Triple { s, p, o });
            }
        }
        store.build_indexes(triples);
        Ok(store)
    }

    /// Builds a store from decoded triples, interning terms in the same
    /// first-seen order the loader uses.
    pub fn from_triples(triples: impl IntoIterator<Item = (Term, Term, Term)>) -> TripleStore {
        let mut store = TripleStore::new();
        let encoded = triples
            .into_iter()
            .map(|(s, p, o)| {
                let s = store.intern(s);
                let p = store.intern(p);
                let o = store.intern(o);
                Triple { s, p, o }
            })
            .collect();
        store.build_indexes(encoded);
        store
    }

    fn build_indexes(&mut self, mut triples: Vec<Triple>) {
        triples.sort_unstable();
        triples.dedup();
        self.pos = triples.clone();
        self.pos.sort_unstable_by_key(|t| (t.p, t.o, t.s));
        self.osp = triples.clone();
        self.osp.sort_unstable_by_key(|t| (t.o, t.s, t.p));
        self.spo = triples;
    }

    /// Returns the id of `term`, assigning the next dense id on first sight.
    pub fn intern(&mut self, term: Term) -> TermId {
        let (index, _) = self.dictionary.insert_full(term);
        assert!(index < u32::MAX as usize, "dictionary full");
        TermId(index as u32)
    }

    /// Non-mutating dictionary lookup.
    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.dictionary.get_index_of(term).map(|i| TermId(i as u32))
    }

    pub fn resolve(&self, id: TermId) -> Result<&Term, StoreError> {
        self.dictionary
            .get_index(id.index())
            .ok_or(StoreError::UnknownId(id.value()))
    }

    /// Number of distinct triples.
    pub fn count(&self) -> usize {
        self.spo.len()
    }

    /// Number of distinct terms in the dictionary.
    pub fn term_count(&self) -> usize {
        self.dictionary.len()
    }

    /// All triples in SPO order.
    pub fn triples(&self) -> &[Triple] {
        &self.spo
    }

    /// Dictionary terms in id order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.dictionary.iter()
    }

    pub fn index_for(&self, choice: IndexChoice) -> &[Triple] {
        match choice {
            IndexChoice::Spo => &self.spo,
            IndexChoice::Pos => &self.pos,
            IndexChoice::Osp => &self.osp,
        }
    }

    /// Binary-searches one index for the triples whose leading components
    /// match `prefix`. The components are given in the index's own ordering
    /// (e.g. `[p, o]` for POS) and bound components must form a prefix.
    pub fn prefix_range(&self, choice: IndexChoice, prefix: [Option<TermId>; 3]) -> &[Triple] {
        debug_assert!(
            !prefix.windows(2).any(|w| w[0].is_none() && w[1].is_some()),
            "bound components must form a prefix"
        );
        let key = move |t: &Triple| -> (TermId, TermId, TermId) {
            match choice {
                IndexChoice::Spo => (t.s, t.p, t.o),
                IndexChoice::Pos => (t.p, t.o, t.s),
                IndexChoice::Osp => (t.o, t.s, t.p),
            }
        };
        let lo = (
            prefix[0].unwrap_or(TermId(0)),
            prefix[1].unwrap_or(TermId(0)),
            prefix[2].unwrap_or(TermId(0)),
        );
        let hi = (
            prefix[0].unwrap_or(TermId(u32::MAX)),
            prefix[1].unwrap_or(TermId(u32::MAX)),
            prefix[2].unwrap_or(TermId(u32::MAX)),
        );
        let idx = self.index_for(choice);
        let start = idx.partition_point(|t| key(t) < lo);
        let end = idx.partition_point(|t| key(t) <= hi);
        &idx[start..end]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const TWO_LINES: &str = "<Jim> <hasJob> <Doctor> .\n<Doctor> <workAt> \"Hospital\" .\n";

    #[test]
    fn empty_stream_loads_empty_store() {
        let store = TripleStore::load_ntriples("".as_bytes()).unwrap();
        assert_eq!(store.count(), 0);
        assert_eq!(store.term_count(), 0);
    }

    #[test]
    fn two_lines_intern_five_terms() {
        let store = TripleStore::load_ntriples(TWO_LINES.as_bytes()).unwrap();
        assert_eq!(store.count(), 2);
        assert_eq!(store.term_count(), 5);
        // First-seen order: subject, predicate, object within each line.
        let terms: Vec<&Term> = store.terms().collect();
        assert_eq!(terms[0], &Term::iri("Jim"));
        assert_eq!(terms[1], &Term::iri("hasJob"));
        assert_eq!(terms[2], &Term::iri("Doctor"));
        assert_eq!(terms[3], &Term::iri("workAt"));
        assert_eq!(terms[4], &Term::literal("Hospital"));
    }

    #[test]
    fn duplicate_lines_are_deduplicated() {
        let input = "<a> <b> <c> .\n<a> <b> <c> .\n";
        let store = TripleStore::load_ntriples(input.as_bytes()).unwrap();
        assert_eq!(store.count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = "<a> <b> <c> .\n<broken\n";
        let err = TripleStore::load_ntriples(input.as_bytes()).unwrap_err();
        match err {
            StoreError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn intern_is_idempotent_and_dense() {
        let mut store = TripleStore::new();
        let a = store.intern(Term::iri("a"));
        assert_eq!(a, TermId::new(0));
        let a2 = store.intern(Term::iri("a"));
        assert_eq!(a, a2);
        let b = store.intern(Term::literal("a"));
        assert_eq!(b, TermId::new(1));
        assert_ne!(a, b);
    }

    #[test]
    fn resolve_round_trips_and_rejects_unknown_ids() {
        let mut store = TripleStore::new();
        let id = store.intern(Term::literal("Hospital"));
        assert_eq!(store.resolve(id).unwrap(), &Term::literal("Hospital"));
        assert!(store.resolve(TermId::new(99)).is_err());
    }

    #[test]
    fn hospital_literal_resolves_from_fixture() {
        let store = TripleStore::load_ntriples(TWO_LINES.as_bytes()).unwrap();
        let id = store.lookup(&Term::literal("Hospital")).unwrap();
        assert_eq!(store.resolve(id).unwrap(), &Term::literal("Hospital"));
        // IRI and literal spellings are distinct dictionary entries.
        assert!(store.lookup(&Term::iri("Hospital")).is_none());
    }

    #[test]
    fn indexes_agree_on_triple_set() {
        let input = "<a> <p> <b> .\n<b> <p> <c> .\n<a> <q> \"x\" .\n<c> <p> <a> .\n";
        let store = TripleStore::load_ntriples(input.as_bytes()).unwrap();
        let spo: BTreeSet<Triple> = store.index_for(IndexChoice::Spo).iter().copied().collect();
        let pos: BTreeSet<Triple> = store.index_for(IndexChoice::Pos).iter().copied().collect();
        let osp: BTreeSet<Triple> = store.index_for(IndexChoice::Osp).iter().copied().collect();
        assert_eq!(spo, pos);
        assert_eq!(spo, osp);
        assert_eq!(spo.len(), store.count());
    }

    #[test]
    fn ingestion_is_deterministic() {
        let input = "<b> <p> <a> .\n<a> <p> <b> .\n<a> <q> \"x\"@en .\n";
        let s1 = TripleStore::load_ntriples(input.as_bytes()).unwrap();
        let s2 = TripleStore::load_ntriples(input.as_bytes()).unwrap();
        assert_eq!(
            s1.terms().collect::<Vec<_>>(),
            s2.terms().collect::<Vec<_>>()
        );
        assert_eq!(s1.triples(), s2.triples());
    }

    #[test]
    fn prefix_range_matches_filter() {
        let input = "<a> <p> <b> .\n<a> <p> <c> .\n<a> <q> <b> .\n<b> <p> <b> .\n";
        let store = TripleStore::load_ntriples(input.as_bytes()).unwrap();
        let a = store.lookup(&Term::iri("a")).unwrap();
        let p = store.lookup(&Term::iri("p")).unwrap();
        let range = store.prefix_range(IndexChoice::Spo, [Some(a), Some(p), None]);
        assert_eq!(range.len(), 2);
        assert!(range.iter().all(|t| t.s == a && t.p == p));
        let all = store.prefix_range(IndexChoice::Pos, [Some(p), None, None]);
        assert_eq!(all.len(), 3);
    }
}
