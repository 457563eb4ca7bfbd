//! End-to-end acceptance checks for the whole engine. Each test covers one
//! release criterion, asserts its correctness condition and its time budget,
//! and prints a single PASS line (visible with `--nocapture`).

use std::fs;
use std::io::Cursor;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mapsq::bench::run_bench;
use mapsq::generator::{generate, generate_to, triple_count_bounds, GenConfig};
use mapsq::join::{map_phase, mr_join, reduce_duplicate_phase, sort_phase, Flag, JoinSpec};
use mapsq::matcher::{count_matches, match_pattern};
use mapsq::oracle::{evaluate_bruteforce, nested_loop_join};
use mapsq::planner::{execute, plan_bgp};
use mapsq::sparql::parse_query;
use mapsq::store::{Term, TermId, TripleStore};
use mapsq::table::BindingTable;

const FIXTURE_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/hospital.nt");

fn fixture_store() -> TripleStore {
    let bytes = fs::read(FIXTURE_PATH).expect("bundled fixture exists");
    TripleStore::load_ntriples(Cursor::new(bytes)).expect("fixture parses")
}

fn decode_rows(store: &TripleStore, table: &BindingTable) -> Vec<Vec<Term>> {
    table
        .rows()
        .map(|row| {
            row.iter()
                .map(|&id| store.resolve(id).unwrap().clone())
                .collect()
        })
        .collect()
}

fn random_table(
    rng: &mut StdRng,
    schema: &[&str],
    key_cols: usize,
    rows: usize,
    keys: u32,
) -> BindingTable {
    let mut t = BindingTable::new(schema.iter().map(|s| s.to_string()).collect());
    for _ in 0..rows {
        let row: Vec<TermId> = (0..schema.len())
            .map(|c| {
                if c < key_cols {
                    TermId::new(rng.gen_range(0..keys))
                } else {
                    TermId::new(rng.gen_range(0..60) + 1_000)
                }
            })
            .collect();
        t.push_row(&row);
    }
    t
}

/// Five triples about jobs and workplaces; the two-pattern job query must
/// join to exactly two people, with the professor row matching nothing.
#[test]
fn golden_fixture_join_and_query() {
    let started = Instant::now();
    let store = fixture_store();
    assert_eq!(store.count(), 5);

    let jobs = parse_query("SELECT * WHERE { ?person <hasJob> ?job . }").unwrap();
    let places = parse_query("SELECT * WHERE { ?job <workAt> ?workplace . }").unwrap();
    let tp1 = match_pattern(&store, &jobs.patterns[0]);
    let tp2 = match_pattern(&store, &places.patterns[0]);
    assert_eq!(tp1.len(), 3);
    assert_eq!(tp2.len(), 2);

    let joined = mr_join(&tp1, &tp2, 2).unwrap();
    assert_eq!(
        joined.schema(),
        [
            "job".to_string(),
            "person".to_string(),
            "workplace".to_string()
        ]
    );
    let rows = decode_rows(&store, &joined);
    assert_eq!(
        rows,
        vec![
            vec![
                Term::iri("Doctor"),
                Term::iri("Jim"),
                Term::literal("Hospital")
            ],
            vec![
                Term::iri("Nurse"),
                Term::iri("Susan"),
                Term::literal("Hospital")
            ],
        ]
    );
    assert!(
        !rows.iter().any(|r| r[0] == Term::iri("Proffesor")),
        "the professor job matches no workplace and must not survive the join"
    );

    let query = parse_query(
        "SELECT ?person WHERE { ?person <hasJob> ?job . ?job <workAt> \"Hospital\" . }",
    )
    .unwrap();
    let plan = plan_bgp(&store, &query);
    let result = execute(&store, &plan, &query, 2).unwrap();
    assert_eq!(result.schema, vec!["person".to_string()]);
    assert_eq!(
        result.rows,
        vec![vec![Term::iri("Jim")], vec![Term::iri("Susan")]]
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("PASS golden fixture: 2-row join and {{Jim, Susan}} answer in {elapsed:?}");
}

/// 1,000 randomized joins across key skews, sizes, and worker counts agree
/// with the nested-loop reference.
#[test]
fn join_kernel_matches_nested_loop_oracle() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xA11CE);
    for case in 0..1_000 {
        let keys = [1u32, 5, 50][case % 3];
        let workers = [1usize, 2, 4, 8][case % 4];
        let key_cols = 1 + case % 2;
        let (left, right): (Vec<&str>, Vec<&str>) = if key_cols == 1 {
            (vec!["k", "a"], vec!["k", "b"])
        } else {
            (vec!["k", "j", "a"], vec!["j", "k", "b"])
        };
        let a_rows = rng.gen_range(0..=200);
        let b_rows = rng.gen_range(0..=200);
        let a = random_table(&mut rng, &left, key_cols, a_rows, keys);
        let b = random_table(&mut rng, &right, key_cols, b_rows, keys);
        let fast = mr_join(&a, &b, workers).unwrap();
        let slow = nested_loop_join(&a, &b).unwrap();
        assert_eq!(fast, slow, "case {case}: keys={keys} workers={workers}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("PASS join kernel vs nested-loop oracle: 1000 cases in {elapsed:?}");
}

/// 200 randomized (store, query) pairs: the planned engine and the
/// brute-force enumerator return the same multiset of solutions.
#[test]
fn end_to_end_matches_bruteforce_oracle() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xBEEF);

    let entities: Vec<Term> = (0..25).map(|i| Term::iri(format!("e{i}"))).collect();
    let predicates: Vec<Term> = (0..6).map(|i| Term::iri(format!("p{i}"))).collect();
    let literals: Vec<Term> = (0..5).map(|i| Term::literal(format!("l{i}"))).collect();

    for case in 0..200 {
        let triple_count = if case % 4 == 0 {
            rng.gen_range(0..=60)
        } else {
            rng.gen_range(60..=2_000)
        };
        let store = TripleStore::from_triples((0..triple_count).map(|_| {
            let s = entities[rng.gen_range(0..entities.len())].clone();
            let p = predicates[rng.gen_range(0..predicates.len())].clone();
            let o = if rng.gen_bool(0.3) {
                literals[rng.gen_range(0..literals.len())].clone()
            } else {
                entities[rng.gen_range(0..entities.len())].clone()
            };
            (s, p, o)
        }));

        let nvars = rng.gen_range(1..=4usize);
        let npatterns = rng.gen_range(1..=4usize);
        let mut text = String::from("SELECT * WHERE {");
        for _ in 0..npatterns {
            let mut term = |kind: usize| -> String {
                let var_chance = if kind == 1 { 0.3 } else { 0.5 };
                if rng.gen_bool(var_chance) {
                    format!("?v{}", rng.gen_range(0..nvars))
                } else {
                    match kind {
                        0 => format!("<e{}>", rng.gen_range(0..entities.len())),
                        1 => format!("<p{}>", rng.gen_range(0..predicates.len())),
                        _ => {
                            if rng.gen_bool(0.3) {
                                format!("\"l{}\"", rng.gen_range(0..literals.len()))
                            } else {
                                format!("<e{}>", rng.gen_range(0..entities.len()))
                            }
                        }
                    }
                }
            };
            let s = term(0);
            let p = term(1);
            let o = term(2);
            text.push_str(&format!(" {s} {p} {o} ."));
        }
        text.push_str(" }");
        let query = parse_query(&text).unwrap();

        let workers = [1, 2, 4][case % 3];
        let plan = plan_bgp(&store, &query);
        let engine = execute(&store, &plan, &query, workers)
            .unwrap_or_else(|e| panic!("case {case} ({text}): {e}"));
        let brute = evaluate_bruteforce(&store, &query)
            .unwrap_or_else(|e| panic!("case {case} ({text}): {e}"));

        // SELECT * column orders differ between engines; compare projected
        // onto the brute-force schema.
        let perm: Vec<usize> = brute
            .schema
            .iter()
            .map(|v| engine.schema.iter().position(|w| w == v).unwrap())
            .collect();
        let mut engine_rows: Vec<Vec<Term>> = engine
            .rows
            .iter()
            .map(|r| perm.iter().map(|&c| r[c].clone()).collect())
            .collect();
        engine_rows.sort();
        let mut brute_rows = brute.rows;
        brute_rows.sort();
        assert_eq!(engine_rows, brute_rows, "case {case}: {text}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!("PASS end-to-end vs brute-force oracle: 200 cases in {elapsed:?}");
}

/// Fifty randomized joins, including inputs large enough to engage the
/// parallel paths, give byte-identical row sequences at 1, 2, 4, 8 workers.
#[test]
fn join_output_worker_invariant() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(7_777);
    for case in 0..50 {
        let rows_a = if case % 5 == 0 {
            rng.gen_range(4_000..=6_000)
        } else {
            rng.gen_range(0..=300)
        };
        let rows_b = if case % 5 == 0 {
            rng.gen_range(4_000..=6_000)
        } else {
            rng.gen_range(0..=300)
        };
        let keys = [1u32, 5, 50, 500][case % 4];
        let a = random_table(&mut rng, &["k", "a"], 1, rows_a, keys);
        let b = random_table(&mut rng, &["k", "b"], 1, rows_b, keys);
        let reference = mr_join(&a, &b, 1).unwrap();
        for workers in [2, 4, 8] {
            let other = mr_join(&a, &b, workers).unwrap();
            assert_eq!(
                reference, other,
                "case {case}: workers={workers} changed the output"
            );
        }
    }
    let elapsed = started.elapsed();
    println!("PASS worker invariance: 50 joins x workers {{1,2,4,8}} in {elapsed:?}");
}

/// Map emits |Tp1| + |Tp2| entries, sort permutes them, and the join
/// cardinality is the sum over keys of |L(k)| * |R(k)| — over 500 cases.
#[test]
fn phase_conservation_laws() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(31_415);
    for case in 0..500 {
        let keys = [1u32, 3, 20][case % 3];
        let key_cols = 1 + case % 2;
        let (left, right): (Vec<&str>, Vec<&str>) = if key_cols == 1 {
            (vec!["k", "a"], vec!["k", "b"])
        } else {
            (vec!["j", "k", "a"], vec!["k", "j", "b"])
        };
        let a_rows = rng.gen_range(0..=150);
        let b_rows = rng.gen_range(0..=150);
        let a = random_table(&mut rng, &left, key_cols, a_rows, keys);
        let b = random_table(&mut rng, &right, key_cols, b_rows, keys);
        let spec = JoinSpec::for_schemas(a.schema(), b.schema()).unwrap();
        let workers = [1, 2, 4][case % 3];

        let entries = map_phase(&a, &b, &spec, workers);
        assert_eq!(entries.len(), a.len() + b.len(), "case {case}: map count");

        let sorted = sort_phase(entries.clone(), workers);
        let mut expected = entries;
        expected.sort();
        assert_eq!(sorted, expected, "case {case}: sort must permute its input");

        let mut law: u64 = 0;
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j].key == sorted[i].key {
                j += 1;
            }
            let lefts = sorted[i..j].iter().filter(|e| e.flag == Flag::Left).count();
            law += (lefts * (j - i - lefts)) as u64;
            i = j;
        }
        let result = reduce_duplicate_phase(&sorted, &spec, workers);
        assert_eq!(result.len() as u64, law, "case {case}: cardinality law");
    }
    let elapsed = started.elapsed();
    println!("PASS phase laws: 500 cases in {elapsed:?}");
}

/// On a generated dataset of over 10^5 triples, a two-join star query whose
/// intermediates all top 10^4 rows must run the parallel join at least twice
/// as fast as the nested-loop baseline (medians over 3 repetitions).
#[test]
fn parallel_join_outperforms_nested_loop_baseline() {
    let started = Instant::now();
    let mut bytes = Vec::new();
    let triples = generate_to(10, 42, &mut bytes).unwrap();
    assert!(triples >= 100_000, "dataset too small: {triples}");
    let store = TripleStore::load_ntriples(Cursor::new(&bytes)).unwrap();

    let text = fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../queries/q2_star.rq"
    ))
    .unwrap();
    let query = parse_query(&text).unwrap();
    assert_eq!(
        query.patterns.len(),
        3,
        "star query folds through two joins"
    );

    for pattern in &query.patterns {
        let matches = count_matches(&store, pattern);
        assert!(
            matches > 10_000,
            "pattern `{pattern}` matches only {matches} rows"
        );
    }
    // The first fold (the two cheapest patterns joined on ?student) is the
    // smallest intermediate; it must clear the bar too.
    let t_advisor = match_pattern(&store, &query.patterns[1]);
    let t_member = match_pattern(&store, &query.patterns[2]);
    let first_join = mr_join(&t_advisor, &t_member, 4).unwrap();
    assert!(
        first_join.len() > 10_000,
        "first intermediate: {}",
        first_join.len()
    );

    let report = run_bench(&store, &[("star".to_string(), query)], 4, 3).unwrap();
    let entry = &report.entries[0];
    assert!(entry.rows > 10_000);
    assert!(
        entry.mr_join_ms <= 0.5 * entry.nested_join_ms,
        "parallel join {:.2} ms vs baseline {:.2} ms (speedup {:.2}x, need 2x)",
        entry.mr_join_ms,
        entry.nested_join_ms,
        entry.speedup
    );
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "PASS performance: {} triples, parallel join {:.2} ms vs baseline {:.2} ms ({:.1}x) in {elapsed:?}",
        triples, entry.mr_join_ms, entry.nested_join_ms, entry.speedup
    );
}

/// A fixed (universities, seed) pair writes byte-identical files that load
/// without a single parse error.
#[test]
fn generator_deterministic_and_loadable() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.nt");
    let path_b = dir.path().join("b.nt");
    let count_a = generate(&GenConfig {
        universities: 2,
        seed: 123,
        output: path_a.clone(),
    })
    .unwrap();
    let count_b = generate(&GenConfig {
        universities: 2,
        seed: 123,
        output: path_b.clone(),
    })
    .unwrap();
    assert_eq!(count_a, count_b);

    let bytes_a = fs::read(&path_a).unwrap();
    let bytes_b = fs::read(&path_b).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b, "same config must be byte-identical");

    let store = TripleStore::load_ntriples(Cursor::new(&bytes_a))
        .expect("generated output has zero parse errors");
    assert_eq!(store.count(), count_a);
    let (min, max) = triple_count_bounds(2);
    assert!(
        (min..=max).contains(&count_a),
        "{count_a} outside [{min}, {max}]"
    );

    // A different seed must not reproduce the same bytes.
    let path_c = dir.path().join("c.nt");
    generate(&GenConfig {
        universities: 2,
        seed: 124,
        output: path_c.clone(),
    })
    .unwrap();
    assert_ne!(bytes_a, fs::read(&path_c).unwrap());

    let elapsed = started.elapsed();
    println!("PASS generator determinism: {count_a} triples, byte-identical re-run in {elapsed:?}");
}

/// The fixture file on disk stays in sync with what the golden test expects.
#[test]
fn bundled_fixture_is_valid() {
    assert!(Path::new(FIXTURE_PATH).exists());
    let store = fixture_store();
    assert_eq!(store.count(), 5);
    assert_eq!(store.term_count(), 9);
}
