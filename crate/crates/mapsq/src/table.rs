//! Columnar tables of variable bindings over dictionary-encoded term ids.

use crate::store::TermId;

/// The partial or intermediate result of matching triple patterns: a schema
/// of variable names plus fixed-width rows of term ids, one column per
/// variable.
///
/// Rows are stored flat in row-major order. The row count is tracked
/// separately so that zero-width tables (a pattern with no variables) can
/// still distinguish "one empty solution" from "no solution".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingTable {
    schema: Vec<String>,
    data: Vec<TermId>,
    rows: usize,
}

impl BindingTable {
    /// Creates an empty table with the given schema.
    ///
    /// Panics if the schema repeats a variable name.
    pub fn new(schema: Vec<String>) -> Self {
        for (i, name) in schema.iter().enumerate() {
            assert!(
                !schema[..i].contains(name),
                "duplicate variable {name:?} in schema"
            );
        }
        BindingTable {
            schema,
            data: Vec::new(),
            rows: 0,
        }
    }

    /// Builds a table from an existing flat row-major buffer.
    pub(crate) fn from_raw_parts(schema: Vec<String>, data: Vec<TermId>, rows: usize) -> Self {
        debug_assert_eq!(data.len(), rows * schema.len());
        BindingTable { schema, data, rows }
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    /// Number of columns.
    pub fn width(&self) -> usize {
        self.schema.len()
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    /// Appends one row. Panics if the row width does not match the schema.
    pub fn push_row(&mut self, row: &[TermId]) {
        assert_eq!(row.len(), self.schema.len(), "row width mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn row(&self, i: usize) -> &[TermId] {
        let w = self.schema.len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[TermId]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Position of a variable in the schema, if bound.
    pub fn column_index(&self, var: &str) -> Option<usize> {
        self.schema.iter().position(|v| v == var)
    }
}
