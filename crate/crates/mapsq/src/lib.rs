//! In-memory engine for basic graph pattern queries over RDF data.
//!
//! Triples are dictionary-encoded into dense ids and kept in three sorted
//! permutation indexes, so any triple pattern resolves to a contiguous index
//! range. A `SELECT` query is parsed into patterns, ordered by a greedy
//! cardinality-based planner, and folded together with a deterministic
//! map/sort/reduce join that scales across threads without changing its
//! output. Slow reference evaluators ([`oracle`]) recompute answers
//! independently for testing and baseline comparisons, and [`generator`]
//! produces seeded synthetic datasets large enough to exercise the parallel
//! paths.
//!
//! ```
//! use mapsq::planner::{execute, plan_bgp};
//! use mapsq::sparql::parse_query;
//! use mapsq::store::TripleStore;
//! use std::io::Cursor;
//!
//! let data = "<urn:jim> <urn:hasJob> <urn:doctor> .\n\
//!             <urn:doctor> <urn:workAt> \"Hospital\" .\n";
//! let store = TripleStore::load_ntriples(Cursor::new(data)).unwrap();
//!
//! let query = parse_query(
//!     "SELECT ?person WHERE { ?person <urn:hasJob> ?job . ?job <urn:workAt> \"Hospital\" . }",
//! )
//! .unwrap();
//! let plan = plan_bgp(&store, &query);
//! let result = execute(&store, &plan, &query, 2).unwrap();
//! assert_eq!(result.rows.len(), 1);
//! ```

pub mod bench;
pub mod generator;
pub mod join;
pub mod matcher;
pub mod ntriples;
pub mod oracle;
pub mod planner;
pub mod sparql;
pub mod store;
pub mod table;

pub use join::{mr_join, JoinError};
pub use oracle::{evaluate_bruteforce, nested_loop_join};
pub use planner::{execute, plan_bgp, JoinEngine, QueryPlan, ResultSet};
pub use sparql::{parse_query, Query};
pub use store::{Term, TermId, Triple, TripleStore};
pub use table::BindingTable;
