//! Finite representatives of the two-dimensional local field `k((u))((t))`.
//!
//! An element is a finite sum `Σ c_{a,b} u^a t^b`. Infinite tails never appear
//! here; they are modeled by the `full_below` flag on subspaces instead.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{accumulate, format_term, join_terms, Field, LaurentVec, Scalar, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Local2DError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("vector rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
}

/// An element of `k((u))((t))` with finitely many terms, keyed by `(b, a)`
/// for the monomial `u^a t^b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Local2DElement {
    field: Field,
    terms: BTreeMap<(i64, i64), Scalar>,
}

impl Local2DElement {
    pub fn zero(field: Field) -> Self {
        Local2DElement {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: Field) -> Self {
        Local2DElement::monomial(field, 0, 0, Scalar::one(field))
    }

    /// `c · u^a t^b`
    pub fn monomial(field: Field, a: i64, b: i64, c: Scalar) -> Self {
        let mut x = Local2DElement::zero(field);
        accumulate(&mut x.terms, (b, a), c);
        x
    }

    /// Builds from `(a, b, c)` triples with integer coefficients.
    pub fn from_ints(field: Field, terms: &[(i64, i64, i64)]) -> Self {
        let mut x = Local2DElement::zero(field);
        for &(a, b, c) in terms {
            accumulate(&mut x.terms, (b, a), Scalar::from_i64(field, c));
        }
        x
    }

    pub fn from_terms(
        field: Field,
        terms: impl IntoIterator<Item = ((i64, i64), Scalar)>,
    ) -> Result<Self, Local2DError> {
        let mut x = Local2DElement::zero(field);
        for ((a, b), c) in terms {
            field.ensure_same(c.field())?;
            accumulate(&mut x.terms, (b, a), c);
        }
        Ok(x)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Terms keyed by `(t-exponent, u-exponent)`.
    pub fn terms(&self) -> &BTreeMap<(i64, i64), Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&(0, 0))
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn ord_t(&self) -> Result<i64, SeriesError> {
        self.terms
            .keys()
            .next()
            .map(|(b, _)| *b)
            .ok_or(SeriesError::ZeroOrder)
    }

    /// The coefficient of `t^b` as a Laurent vector of rank 1.
    pub fn t_coefficient(&self, b: i64) -> LaurentVec {
        let entries = self
            .terms
            .range((b, i64::MIN)..=(b, i64::MAX))
            .map(|((_, a), c)| ((0usize, *a), c.clone()));
        LaurentVec::from_entries(self.field, 1, entries).expect("rank 1")
    }

    pub fn negate(&self) -> Self {
        Local2DElement {
            field: self.field,
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Local2DElement::zero(self.field);
        }
        Local2DElement {
            field: self.field,
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn add(&self, other: &Local2DElement) -> Result<Self, Local2DError> {
        self.field.ensure_same(other.field)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            accumulate(&mut out.terms, *k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Local2DElement) -> Result<Self, Local2DError> {
        self.add(&other.negate())
    }

    pub fn mul(&self, other: &Local2DElement) -> Result<Self, Local2DError> {
        self.field.ensure_same(other.field)?;
        let mut out = Local2DElement::zero(self.field);
        for ((b1, a1), c1) in &self.terms {
            for ((b2, a2), c2) in &other.terms {
                accumulate(&mut out.terms, (b1 + b2, a1 + a2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// Largest absolute exponent in either variable; 0 for the zero element.
    pub fn support_radius(&self) -> i64 {
        self.terms
            .keys()
            .map(|(b, a)| b.abs().max(a.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Drops terms with u-exponent below `u_lo`.
    pub fn drop_below_u(&self, u_lo: i64) -> Self {
        Local2DElement {
            field: self.field,
            terms: self
                .terms
                .iter()
                .filter(|((_, a), _)| *a >= u_lo)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }
}

pub fn l2_mul(x: &Local2DElement, y: &Local2DElement) -> Result<Local2DElement, Local2DError> {
    x.mul(y)
}

pub fn ord_t(x: &Local2DElement) -> Result<i64, SeriesError> {
    x.ord_t()
}

impl fmt::Display for Local2DElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .terms
            .iter()
            .map(|((b, a), c)| format_term(c, &[("u", *a), ("t", *b)]));
        f.write_str(&join_terms(terms))
    }
}

/// A vector in `K^{⊕r}`; rank 1 vectors are plain elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Local2DVector {
    field: Field,
    comps: Vec<Local2DElement>,
}

impl Local2DVector {
    pub fn zero(field: Field, rank: usize) -> Self {
        Local2DVector {
            field,
            comps: vec![Local2DElement::zero(field); rank],
        }
    }

    pub fn scalar(x: Local2DElement) -> Self {
        Local2DVector {
            field: x.field,
            comps: vec![x],
        }
    }

    /// `x` placed in component `i` of a rank-`rank` vector.
    pub fn basis(x: Local2DElement, i: usize, rank: usize) -> Self {
        let mut v = Local2DVector::zero(x.field, rank);
        v.comps[i] = x;
        v
    }

    pub fn from_components(field: Field, comps: Vec<Local2DElement>) -> Result<Self, Local2DError> {
        for c in &comps {
            field.ensure_same(c.field)?;
        }
        Ok(Local2DVector { field, comps })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Local2DElement] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Minimum t-order over components.
    pub fn ord_t(&self) -> Result<i64, SeriesError> {
        self.comps
            .iter()
            .filter_map(|c| c.ord_t().ok())
            .min()
            .ok_or(SeriesError::ZeroOrder)
    }

    /// The coefficient of `t^b` as a vector in `k((u))^r`.
    pub fn t_coefficient(&self, b: i64) -> LaurentVec {
        let entries = self.comps.iter().enumerate().flat_map(|(i, c)| {
            c.terms
                .range((b, i64::MIN)..=(b, i64::MAX))
                .map(move |((_, a), v)| ((i, *a), v.clone()))
        });
        LaurentVec::from_entries(self.field, self.rank(), entries).expect("in range")
    }

    /// Iterates `(component, a, b, coefficient)`.
    pub fn iter_terms(&self) -> impl Iterator<Item = (usize, i64, i64, &Scalar)> {
        self.comps
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.terms.iter().map(move |((b, a), v)| (i, *a, *b, v)))
    }

    pub fn add(&self, other: &Local2DVector) -> Result<Self, Local2DError> {
        if self.rank() != other.rank() {
            return Err(Local2DError::RankMismatch(self.rank(), other.rank()));
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.add(y))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Local2DVector {
            field: self.field,
            comps,
        })
    }

    pub fn sub(&self, other: &Local2DVector) -> Result<Self, Local2DError> {
        self.add(&other.scale(&-Scalar::one(self.field)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Local2DVector {
            field: self.field,
            comps: self.comps.iter().map(|x| x.scale(c)).collect(),
        }
    }

    /// Scalar multiplication by an element of `K`.
    pub fn mul_scalar(&self, a: &Local2DElement) -> Result<Self, Local2DError> {
        let comps = self
            .comps
            .iter()
            .map(|x| a.mul(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Local2DVector {
            field: self.field,
            comps,
        })
    }

    pub fn drop_below_u(&self, u_lo: i64) -> Self {
        Local2DVector {
            field: self.field,
            comps: self.comps.iter().map(|c| c.drop_below_u(u_lo)).collect(),
        }
    }

    pub fn support_radius(&self) -> i64 {
        self.comps.iter().map(|c| c.support_radius()).max().unwrap_or(0)
    }
}

impl fmt::Display for Local2DVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank() == 1 {
            return write!(f, "{}", self.comps[0]);
        }
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A rectangular `(t, u)` truncation window `[t_lo, t_hi) × [u_lo, u_hi)`
/// with top margins `m_t`, `m_u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window2D {
    pub t_lo: i64,
    pub t_hi: i64,
    pub u_lo: i64,
    pub u_hi: i64,
    pub m_t: i64,
    pub m_u: i64,
}

impl Window2D {
    pub fn new(t_lo: i64, t_hi: i64, u_lo: i64, u_hi: i64, m_t: i64, m_u: i64) -> Result<Self, Local2DError> {
        let w = Window2D {
            t_lo,
            t_hi,
            u_lo,
            u_hi,
            m_t,
            m_u,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), Local2DError> {
        let bad = |m: String| Err(Local2DError::InvalidWindow(m));
        if self.t_lo >= self.t_hi {
            return bad(format!("t_lo={} must be below t_hi={}", self.t_lo, self.t_hi));
        }
        if self.u_lo >= self.u_hi {
            return bad(format!("u_lo={} must be below u_hi={}", self.u_lo, self.u_hi));
        }
        if self.m_t < 0 || self.m_u < 0 {
            return bad("margins must be nonnegative".into());
        }
        if 2 * self.m_t >= self.t_hi - self.t_lo {
            return bad(format!("m_t={} must be below half the t-width", self.m_t));
        }
        if 2 * self.m_u >= self.u_hi - self.u_lo {
            return bad(format!("m_u={} must be below half the u-width", self.m_u));
        }
        Ok(())
    }

    pub fn contains(&self, a: i64, b: i64) -> bool {
        (self.u_lo..self.u_hi).contains(&a) && (self.t_lo..self.t_hi).contains(&b)
    }

    /// The window shrunk by its margins on every side.
    pub fn interior_contains(&self, a: i64, b: i64) -> bool {
        (self.u_lo + self.m_u..self.u_hi - self.m_u).contains(&a)
            && (self.t_lo + self.m_t..self.t_hi - self.m_t).contains(&b)
    }

    pub fn interior_levels(&self) -> std::ops::Range<i64> {
        self.t_lo + self.m_t..self.t_hi - self.m_t
    }

    /// Grows the window by `r` in every direction, keeping margins.
    pub fn enlarged(&self, r: i64) -> Window2D {
        Window2D {
            t_lo: self.t_lo - r,
            t_hi: self.t_hi + r,
            u_lo: self.u_lo - r,
            u_hi: self.u_hi + r,
            ..*self
        }
    }
}

/// Restriction of `x` to the window, with a flag telling whether any term
/// was discarded.
pub fn truncate(x: &Local2DElement, w: &Window2D) -> (Local2DElement, bool) {
    let terms: BTreeMap<(i64, i64), Scalar> = x
        .terms
        .iter()
        .filter(|((b, a), _)| w.contains(*a, *b))
        .map(|(k, c)| (*k, c.clone()))
        .collect();
    let dropped = terms.len() != x.terms.len();
    (
        Local2DElement {
            field: x.field,
            terms,
        },
        dropped,
    )
}
