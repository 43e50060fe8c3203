//! Sparse reduced row echelon form over exact scalars.
//!
//! Rows are maps from an ordered coordinate key to nonzero scalars. The pivot
//! of a row is its smallest key; callers choose the coordinate order by
//! choosing the key type, which is how the same routine serves component-major
//! echelon forms, sign-split forms for index counting, and augmented systems
//! for kernels.

use std::collections::BTreeMap;

use crate::series::{accumulate, Field, Scalar};

pub type SparseRow<K> = BTreeMap<K, Scalar>;

/// An incrementally maintained reduced echelon basis.
///
/// Every stored row has pivot coefficient 1 and no other stored row has a
/// nonzero entry in its pivot column.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    field: Field,
    rows: BTreeMap<K, SparseRow<K>>,
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new(field: Field) -> Self {
        Echelon {
            field,
            rows: BTreeMap::new(),
        }
    }

    pub fn from_rows(field: Field, rows: impl IntoIterator<Item = SparseRow<K>>) -> Self {
        let mut e = Echelon::new(field);
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    /// Rows in increasing pivot order.
    pub fn rows(&self) -> impl Iterator<Item = &SparseRow<K>> {
        self.rows.values()
    }

    pub fn into_rows(self) -> Vec<SparseRow<K>> {
        self.rows.into_values().collect()
    }

    /// Remainder of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &SparseRow<K>) -> SparseRow<K> {
        let mut out = v.clone();
        let hits: Vec<K> = v
            .keys()
            .filter(|k| self.rows.contains_key(*k))
            .cloned()
            .collect();
        // Subtracting a reduced row never introduces another pivot column.
        for p in hits {
            if let Some(c) = out.get(&p).cloned() {
                let row = &self.rows[&p];
                for (k, x) in row {
                    accumulate(&mut out, k.clone(), -(&c * x));
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &SparseRow<K>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Adds `v` to the span. Returns false when `v` was already in the span.
    pub fn insert(&mut self, v: SparseRow<K>) -> bool {
        let r = self.reduce(&v);
        let Some((pivot, lead)) = r.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        debug_assert_eq!(lead.field(), self.field);
        let inv = lead.inv().expect("nonzero pivot");
        let row: SparseRow<K> = r.into_iter().map(|(k, c)| (k, &c * &inv)).collect();
        for other in self.rows.values_mut() {
            if let Some(c) = other.get(&pivot).cloned() {
                for (k, x) in &row {
                    accumulate(other, k.clone(), -(&c * x));
                }
            }
        }
        self.rows.insert(pivot, row);
        true
    }
}

/// Rank of a family of rows.
pub fn rank<K: Ord + Clone>(field: Field, rows: impl IntoIterator<Item = SparseRow<K>>) -> usize {
    Echelon::from_rows(field, rows).rank()
}

/// Key for augmented systems: image coordinates sort before source indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Aug<I, S> {
    Image(I),
    Source(S),
}

/// Basis of the kernel of the linear map sending source coordinate `s` to
/// `columns[s]`. Kernel vectors are returned as sparse maps over sources.
pub fn kernel<I: Ord + Clone, S: Ord + Clone>(
    field: Field,
    columns: impl IntoIterator<Item = (S, SparseRow<I>)>,
) -> Vec<SparseRow<S>> {
    let mut e: Echelon<Aug<I, S>> = Echelon::new(field);
    for (s, col) in columns {
        let mut row: SparseRow<Aug<I, S>> = col.into_iter().map(|(k, c)| (Aug::Image(k), c)).collect();
        row.insert(Aug::Source(s), Scalar::one(field));
        e.insert(row);
    }
    e.into_rows()
        .into_iter()
        .filter(|r| matches!(r.keys().next(), Some(Aug::Source(_))))
        .map(|r| {
            r.into_iter()
                .filter_map(|(k, c)| match k {
                    Aug::Source(s) => Some((s, c)),
                    Aug::Image(_) => None,
                })
                .collect()
        })
        .collect()
}
