//! Windowed models of discrete, cocompact subspaces of `k((u))^{⊕r}`.
//!
//! A [`WindowedSubspace`] stores a reduced echelon basis supported in the
//! u-window `[u_lo, u_hi)`. When `full_below` is set the modeled space also
//! contains every vector supported strictly below `u_lo`, which is what makes
//! the quotient by `k[[u]]^{⊕r}` finite dimensional.
//!
//! The canonical pivot of a row is its (component, lowest exponent) key.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::{Echelon, SparseRow};
use crate::series::{Field, LaurentVec, Scalar, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FredholmError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("support at u^{exp} (component {component}) lies outside the window [{u_lo}, {u_hi})")]
    SupportOutsideWindow {
        component: usize,
        exp: i64,
        u_lo: i64,
        u_hi: i64,
    },
    #[error("subspace is finite dimensional, its quotient is not linearly compact")]
    NotCocompact,
    #[error("pivot u^{exp} (component {component}) touches the top margin starting at {margin_start}")]
    WindowTooSmall {
        component: usize,
        exp: i64,
        margin_start: i64,
    },
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("window mismatch")]
    WindowMismatch,
    #[error("invalid window [{0}, {1})")]
    InvalidWindow(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    In,
    NotIn,
}

/// Finite echelon model of a Fredholm subspace of `k((u))^{⊕r}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowedSubspace {
    field: Field,
    rank: usize,
    u_lo: i64,
    u_hi: i64,
    margin: i64,
    full_below: bool,
    rows: Vec<LaurentVec>,
}

type Key = (usize, i64);

fn to_row(v: &LaurentVec) -> SparseRow<Key> {
    v.entries().clone()
}

impl WindowedSubspace {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn u_lo(&self) -> i64 {
        self.u_lo
    }

    pub fn u_hi(&self) -> i64 {
        self.u_hi
    }

    /// Width of the top u-margin used by [`fredholm_index`].
    pub fn margin(&self) -> i64 {
        self.margin
    }

    pub fn full_below(&self) -> bool {
        self.full_below
    }

    pub fn rows(&self) -> &[LaurentVec] {
        &self.rows
    }

    pub fn dim_in_window(&self) -> usize {
        self.rows.len()
    }

    pub fn with_margin(mut self, margin: i64) -> Self {
        self.margin = margin.max(0);
        self
    }

    /// Same span viewed as finite dimensional (drops the tail assertion).
    pub fn without_tail(mut self) -> Self {
        self.full_below = false;
        self
    }

    fn check_support(&self, v: &LaurentVec) -> Result<(), FredholmError> {
        check_support(v, self.rank, self.u_lo, self.u_hi, false)
    }

    fn echelon(&self) -> Echelon<Key> {
        Echelon::from_rows(self.field, self.rows.iter().map(to_row))
    }

    /// Canonical pivots `(component, exponent)` with components numbered from 0.
    pub fn pivots(&self) -> Vec<(usize, i64)> {
        self.rows.iter().filter_map(|r| r.pivot()).collect()
    }

    /// Counts pivots below and at-or-above `threshold` after re-echelonizing
    /// with every exponent `< threshold` ordered before every exponent
    /// `≥ threshold`. The second number is `dim(span ∩ {exponents ≥ threshold})`
    /// and the first is the rank of the projection onto exponents below it.
    fn split_counts(&self, threshold: i64) -> (usize, usize) {
        let e: Echelon<(bool, usize, i64)> = Echelon::from_rows(
            self.field,
            self.rows.iter().map(|r| {
                r.entries()
                    .iter()
                    .map(|((c, a), v)| ((*a >= threshold, *c, *a), v.clone()))
                    .collect()
            }),
        );
        let above = e.pivots().filter(|(hi, _, _)| *hi).count();
        (e.rank() - above, above)
    }

    /// `dim_k` of the modeled space intersected with `{exponents ≥ threshold}`
    /// in every component. Requires `threshold ≥ u_lo` so that the tail below
    /// the window does not contribute.
    pub fn dim_at_or_above(&self, threshold: i64) -> usize {
        debug_assert!(threshold >= self.u_lo || !self.full_below);
        self.split_counts(threshold).1
    }

    /// Fails with `WindowTooSmall` if a pivot sits in the top margin.
    pub fn check_margin(&self) -> Result<(), FredholmError> {
        let margin_start = self.u_hi - self.margin;
        for (component, exp) in self.pivots() {
            if exp >= margin_start {
                return Err(FredholmError::WindowTooSmall {
                    component,
                    exp,
                    margin_start,
                });
            }
        }
        Ok(())
    }

    /// Block-diagonal direct sum; both summands must share the u-window.
    pub fn direct_sum(&self, other: &WindowedSubspace) -> Result<WindowedSubspace, FredholmError> {
        self.field.ensure_same(other.field)?;
        if self.u_lo != other.u_lo || self.u_hi != other.u_hi || self.full_below != other.full_below {
            return Err(FredholmError::WindowMismatch);
        }
        let rank = self.rank + other.rank;
        let rows = self
            .rows
            .iter()
            .map(|r| r.reindex(0, rank))
            .chain(other.rows.iter().map(|r| r.reindex(self.rank, rank)))
            .collect();
        echelonize(self.field, rows, rank, self.u_lo, self.u_hi, self.full_below)
            .map(|w| w.with_margin(self.margin.max(other.margin)))
    }

    /// Re-materializes the tail on a larger window `[u_lo', u_hi') ⊇ [u_lo, u_hi)`.
    pub fn enlarge(&self, new_lo: i64, new_hi: i64) -> Result<WindowedSubspace, FredholmError> {
        if new_lo > self.u_lo || new_hi < self.u_hi {
            return Err(FredholmError::WindowMismatch);
        }
        let mut rows = self.rows.clone();
        if self.full_below {
            for c in 0..self.rank {
                for e in new_lo..self.u_lo {
                    rows.push(LaurentVec::unit(self.field, self.rank, c, e));
                }
            }
        }
        echelonize(self.field, rows, self.rank, new_lo, new_hi, self.full_below)
            .map(|w| w.with_margin(self.margin))
    }
}

fn check_support(
    v: &LaurentVec,
    rank: usize,
    u_lo: i64,
    u_hi: i64,
    allow_below: bool,
) -> Result<(), FredholmError> {
    if v.rank() > rank {
        return Err(FredholmError::RankMismatch(v.rank(), rank));
    }
    for &(component, exp) in v.entries().keys() {
        if exp >= u_hi || (exp < u_lo && !allow_below) {
            return Err(FredholmError::SupportOutsideWindow {
                component,
                exp,
                u_lo,
                u_hi,
            });
        }
    }
    Ok(())
}

/// Reduced echelon form of `rows` in the u-window `[u_lo, u_hi)`.
///
/// With `full_below`, terms below `u_lo` are absorbed by the tail and
/// discarded; without it they are a support error.
pub fn echelonize(
    field: Field,
    rows: Vec<LaurentVec>,
    rank: usize,
    u_lo: i64,
    u_hi: i64,
    full_below: bool,
) -> Result<WindowedSubspace, FredholmError> {
    if u_lo >= u_hi {
        return Err(FredholmError::InvalidWindow(u_lo, u_hi));
    }
    let mut e: Echelon<Key> = Echelon::new(field);
    for r in &rows {
        field.ensure_same(r.field())?;
        check_support(r, rank, u_lo, u_hi, full_below)?;
        let row: SparseRow<Key> = r
            .entries()
            .iter()
            .filter(|((_, a), _)| *a >= u_lo)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        e.insert(row);
    }
    let rows = e
        .into_rows()
        .into_iter()
        .map(|r| LaurentVec::from_map(field, rank, r))
        .collect();
    Ok(WindowedSubspace {
        field,
        rank,
        u_lo,
        u_hi,
        margin: 0,
        full_below,
        rows,
    })
}

/// `In` iff `v` lies in the modeled space. `v` must be supported inside the
/// window.
pub fn membership(w: &WindowedSubspace, v: &LaurentVec) -> Result<Membership, FredholmError> {
    w.field.ensure_same(v.field())?;
    w.check_support(v)?;
    Ok(if w.echelon().contains(&to_row(v)) {
        Membership::In
    } else {
        Membership::NotIn
    })
}

/// Index of `W → k((u))^r / k[[u]]^r`: `dim(W ∩ k[[u]]^r) − dim(coker)`.
pub fn fredholm_index(w: &WindowedSubspace) -> Result<i64, FredholmError> {
    if !w.full_below {
        return Err(FredholmError::NotCocompact);
    }
    w.check_margin()?;
    let r = w.rank as i64;
    let (neg_pivots, nonneg_pivots) = w.split_counts(0);
    // The tail covers (−∞, u_lo); nonnegative exponents below u_lo belong to W.
    let tail_nonneg = r * w.u_lo.max(0);
    let neg_coords = r * (-w.u_lo).max(0);
    let kernel = nonneg_pivots as i64 + tail_nonneg;
    let cokernel = neg_coords - neg_pivots as i64;
    Ok(kernel - cokernel)
}

/// Canonical pivot set with components numbered from 1.
pub fn pivot_profile(w: &WindowedSubspace) -> Vec<(usize, i64)> {
    w.pivots().into_iter().map(|(c, e)| (c + 1, e)).collect()
}

/// Convenience constructor: span of monomials `u^e` (component `c`) plus an
/// optional tail.
pub fn monomial_subspace(
    field: Field,
    rank: usize,
    u_lo: i64,
    u_hi: i64,
    full_below: bool,
    monomials: impl IntoIterator<Item = (usize, i64)>,
) -> Result<WindowedSubspace, FredholmError> {
    let rows = monomials
        .into_iter()
        .map(|(c, e)| LaurentVec::unit(field, rank, c, e))
        .collect();
    echelonize(field, rows, rank, u_lo, u_hi, full_below)
}

/// Rows grouped per component, for display.
pub fn rows_by_component(w: &WindowedSubspace) -> BTreeMap<usize, Vec<LaurentVec>> {
    let mut out: BTreeMap<usize, Vec<LaurentVec>> = BTreeMap::new();
    for r in &w.rows {
        if let Some((c, _)) = r.pivot() {
            out.entry(c).or_default().push(r.clone());
        }
    }
    out
}

impl WindowedSubspace {
    /// Rebuilds a subspace from stored parts, re-echelonizing the rows.
    pub fn from_parts(
        field: Field,
        rank: usize,
        u_lo: i64,
        u_hi: i64,
        full_below: bool,
        margin: i64,
        rows: Vec<LaurentVec>,
    ) -> Result<Self, FredholmError> {
        Ok(echelonize(field, rows, rank, u_lo, u_hi, full_below)?.with_margin(margin))
    }

    /// Every row scaled by `c ≠ 0`; the echelon form is unchanged.
    pub fn rescaled(&self, c: &Scalar) -> Result<Self, FredholmError> {
        let rows = self.rows.iter().map(|r| r.scale(c)).collect();
        Ok(echelonize(self.field, rows, self.rank, self.u_lo, self.u_hi, self.full_below)?
            .with_margin(self.margin))
    }
}
