//! Seeded generator for synthetic university-domain RDF data.
//!
//! The output is a plain N-Triples graph: universities contain departments,
//! departments employ professors, professors teach courses and advise
//! students, students belong to a department and take courses taught there.
//! All cardinalities are drawn from a seeded RNG, so a fixed
//! (universities, seed) pair always yields byte-identical output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const NS: &str = "http://mapsq.example.org/uni#";

/// Entities per level: departments per university, professors per
/// department, courses per professor, students per professor, courses per
/// student. Inclusive ranges.
const DEPARTMENTS: (u32, u32) = (15, 25);
const PROFESSORS: (u32, u32) = (7, 14);
const COURSES_TAUGHT: (u32, u32) = (1, 3);
const STUDENTS: (u32, u32) = (8, 14);
const COURSES_TAKEN: (u32, u32) = (1, 4);

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub universities: u32,
    pub seed: u64,
    pub output: PathBuf,
}

/// Generates the configured dataset into `config.output`, returning the
/// triple count.
pub fn generate(config: &GenConfig) -> io::Result<usize> {
    let file = File::create(&config.output)?;
    let mut out = BufWriter::new(file);
    let count = generate_to(config.universities, config.seed, &mut out)?;
    out.flush()?;
    Ok(count)
}

/// Streams the dataset for `universities` universities into `out`.
pub fn generate_to<W: Write>(universities: u32, seed: u64, out: &mut W) -> io::Result<usize> {
    assert!(universities >= 1, "need at least one university");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0usize;
    let mut triple = |out: &mut W, s: &str, p: &str, o: &str| -> io::Result<()> {
        writeln!(out, "<{s}> <{p}> <{o}> .")?;
        count += 1;
        Ok(())
    };

    let class = |name: &str| format!("{NS}{name}");
    let pred = |name: &str| format!("{NS}{name}");

    for u in 0..universities {
        let univ = format!("{NS}u{u}");
        triple(out, &univ, TYPE, &class("University"))?;

        let departments = rng.gen_range(DEPARTMENTS.0..=DEPARTMENTS.1);
        for d in 0..departments {
            let dept = format!("{univ}/d{d}");
            triple(out, &dept, TYPE, &class("Department"))?;
            triple(out, &dept, &pred("subOrganizationOf"), &univ)?;

            let professors = rng.gen_range(PROFESSORS.0..=PROFESSORS.1);
            let mut dept_courses: Vec<String> = Vec::new();
            let mut prof_iris: Vec<String> = Vec::with_capacity(professors as usize);
            for p in 0..professors {
                let prof = format!("{dept}/p{p}");
                triple(out, &prof, TYPE, &class("Professor"))?;
                triple(out, &prof, &pred("worksFor"), &dept)?;
                let taught = rng.gen_range(COURSES_TAUGHT.0..=COURSES_TAUGHT.1);
                for _ in 0..taught {
                    let course = format!("{dept}/c{}", dept_courses.len());
                    triple(out, &course, TYPE, &class("Course"))?;
                    triple(out, &prof, &pred("teacherOf"), &course)?;
                    dept_courses.push(course);
                }
                prof_iris.push(prof);
            }

            for prof in &prof_iris {
                let students = rng.gen_range(STUDENTS.0..=STUDENTS.1);
                for s in 0..students {
                    let student = format!("{prof}/s{s}");
                    triple(out, &student, TYPE, &class("Student"))?;
                    triple(out, &student, &pred("memberOf"), &dept)?;
                    triple(out, &student, &pred("advisor"), prof)?;
                    let wanted = rng.gen_range(COURSES_TAKEN.0..=COURSES_TAKEN.1) as usize;
                    let wanted = wanted.min(dept_courses.len());
                    let mut picks: Vec<usize> =
                        sample(&mut rng, dept_courses.len(), wanted).into_vec();
                    picks.sort_unstable();
                    for i in picks {
                        triple(out, &student, &pred("takesCourse"), &dept_courses[i])?;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Inclusive triple-count bounds for a given university count, derived from
/// the generation ranges. Used to sanity-check outputs.
pub fn triple_count_bounds(universities: u32) -> (usize, usize) {
    let per_univ = |depts: usize, profs: usize, taught: usize, students: usize, taken: usize| {
        1 + depts * (2 + profs * (2 + taught * 2 + students * (3 + taken)))
    };
    let min = per_univ(
        DEPARTMENTS.0 as usize,
        PROFESSORS.0 as usize,
        COURSES_TAUGHT.0 as usize,
        STUDENTS.0 as usize,
        COURSES_TAKEN.0 as usize,
    );
    let max = per_univ(
        DEPARTMENTS.1 as usize,
        PROFESSORS.1 as usize,
        COURSES_TAUGHT.1 as usize,
        STUDENTS.1 as usize,
        COURSES_TAKEN.1 as usize,
    );
    (min * universities as usize, max * universities as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::TripleStore;
    use std::io::Cursor;

    #[test]
    fn fixed_seed_is_byte_identical() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        generate_to(1, 42, &mut a).unwrap();
        generate_to(1, 42, &mut b).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        generate_to(1, 1, &mut a).unwrap();
        generate_to(1, 2, &mut b).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn output_loads_and_count_is_in_bounds() {
        let mut bytes = Vec::new();
        let written = generate_to(1, 7, &mut bytes).unwrap();
        let store = TripleStore::load_ntriples(Cursor::new(&bytes)).unwrap();
        // Generated IRIs are all distinct, so loading drops nothing.
        assert_eq!(store.count(), written);
        let (min, max) = triple_count_bounds(1);
        assert!(
            (min..=max).contains(&written),
            "{written} outside [{min}, {max}]"
        );
    }

    #[test]
    fn university_count_scales_output() {
        let mut one = Vec::new();
        let mut three = Vec::new();
        let count_one = generate_to(1, 9, &mut one).unwrap();
        let count_three = generate_to(3, 9, &mut three).unwrap();
        assert!(count_three > count_one * 2);
        let (min, max) = triple_count_bounds(3);
        assert!((min..=max).contains(&count_three));
    }
}
