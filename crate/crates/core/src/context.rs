//! Formal contexts and the derivation operators between object and
//! attribute sets.

use crate::set::{AttributeSet, ObjectSet};

/// Binary relation between `n_objects` objects and `n_attributes` attributes.
///
/// The incidence is stored twice, once per object (row) and once per
/// attribute (column), so both derivations are word-parallel intersections.
/// Names are presentation only; every operation works on dense indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalContext {
    name: String,
    object_names: Vec<String>,
    attribute_names: Vec<String>,
    rows: Vec<AttributeSet>,
    columns: Vec<ObjectSet>,
}

impl FormalContext {
    /// Builds a context from a row-major incidence matrix, with default
    /// names `o1..` and `a1..`.
    pub fn from_rows(n_attributes: usize, rows: &[Vec<bool>]) -> Self {
        let object_names = (1..=rows.len()).map(|i| format!("o{i}")).collect();
        let attribute_names = (1..=n_attributes).map(|i| format!("a{i}")).collect();
        Self::with_names("", object_names, attribute_names, rows)
    }

    /// Builds a context from named objects and attributes.
    ///
    /// Panics if a row's length differs from the attribute count or the
    /// name lists disagree with the matrix shape.
    pub fn with_names(
        name: impl Into<String>,
        object_names: Vec<String>,
        attribute_names: Vec<String>,
        rows: &[Vec<bool>],
    ) -> Self {
        let n_attributes = attribute_names.len();
        assert_eq!(object_names.len(), rows.len(), "object name count");
        let mut row_sets = Vec::with_capacity(rows.len());
        let mut columns = vec![ObjectSet::empty(rows.len()); n_attributes];
        for (o, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_attributes, "row {o} has wrong length");
            let mut set = AttributeSet::empty(n_attributes);
            for (a, &cell) in row.iter().enumerate() {
                if cell {
                    set.insert(a);
                    columns[a].insert(o);
                }
            }
            row_sets.push(set);
        }
        FormalContext {
            name: name.into(),
            object_names,
            attribute_names,
            rows: row_sets,
            columns,
        }
    }

    /// Builds a context column by column; `columns[a]` is the extent of `a`.
    pub fn from_columns(n_objects: usize, columns: Vec<ObjectSet>) -> Self {
        let n_attributes = columns.len();
        let mut rows = vec![AttributeSet::empty(n_attributes); n_objects];
        for (a, col) in columns.iter().enumerate() {
            assert_eq!(col.universe(), n_objects, "column {a} has wrong universe");
            for o in col {
                rows[o].insert(a);
            }
        }
        FormalContext {
            name: String::new(),
            object_names: (1..=n_objects).map(|i| format!("o{i}")).collect(),
            attribute_names: (1..=n_attributes).map(|i| format!("a{i}")).collect(),
            rows,
            columns,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_objects(&self) -> usize {
        self.rows.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    pub fn object_names(&self) -> &[String] {
        &self.object_names
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn has(&self, object: usize, attribute: usize) -> bool {
        self.rows[object].contains(attribute)
    }

    /// The intent of a single object, `{o}'`.
    pub fn row(&self, object: usize) -> &AttributeSet {
        &self.rows[object]
    }

    /// The extent of a single attribute, `{a}'`.
    pub fn column(&self, attribute: usize) -> &ObjectSet {
        &self.columns[attribute]
    }

    pub fn all_attributes(&self) -> AttributeSet {
        AttributeSet::full(self.n_attributes())
    }

    pub fn all_objects(&self) -> ObjectSet {
        ObjectSet::full(self.n_objects())
    }

    /// Number of crosses in the relation.
    pub fn incidence_count(&self) -> usize {
        self.rows.iter().map(AttributeSet::len).sum()
    }

    /// Attributes shared by every object in `objects`.
    pub fn derive_objects(&self, objects: &ObjectSet) -> AttributeSet {
        let mut out = self.all_attributes();
        for o in objects {
            out.intersect_with(&self.rows[o]);
        }
        out
    }

    /// Objects having every attribute in `attributes`.
    pub fn derive_attributes(&self, attributes: &AttributeSet) -> ObjectSet {
        let mut out = self.all_objects();
        for a in attributes {
            out.intersect_with(&self.columns[a]);
        }
        out
    }

    /// `attributes''`.
    pub fn closure(&self, attributes: &AttributeSet) -> AttributeSet {
        self.derive_objects(&self.derive_attributes(attributes))
    }

    pub fn is_closed(&self, attributes: &AttributeSet) -> bool {
        &self.closure(attributes) == attributes
    }

    /// Whether `premise -> conclusion` holds, i.e. `premise' ⊆ conclusion'`.
    pub fn implication_holds(&self, premise: &AttributeSet, conclusion: &AttributeSet) -> bool {
        self.derive_attributes(premise)
            .is_subset(&self.derive_attributes(conclusion))
    }

    /// Row-major copy of the incidence matrix.
    pub fn to_rows(&self) -> Vec<Vec<bool>> {
        self.rows
            .iter()
            .map(|r| (0..self.n_attributes()).map(|a| r.contains(a)).collect())
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::FormalContext;

    /// The five-object, five-attribute running example.
    pub fn toy() -> FormalContext {
        let rows = [
            "XX...", //
            ".X.XX", ".XXX.", "..X.X", "...XX",
        ];
        let rows: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| r.chars().map(|c| c == 'X').collect())
            .collect();
        FormalContext::from_rows(5, &rows)
    }

    /// Decodes `bits` into an `n_objects x n_attributes` matrix.
    pub fn from_bits(n_objects: usize, n_attributes: usize, bits: u128) -> FormalContext {
        let rows: Vec<Vec<bool>> = (0..n_objects)
            .map(|o| {
                (0..n_attributes)
                    .map(|a| bits >> (o * n_attributes + a) & 1 == 1)
                    .collect()
            })
            .collect();
        FormalContext::from_rows(n_attributes, &rows)
    }
}
