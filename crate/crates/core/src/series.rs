//! Exact scalars and one-variable Laurent polynomials.
//!
//! Two ground fields are supported: the rationals (arbitrary precision) and
//! prime fields `F_p` with `p < 2^31`. Every value carries its field tag and
//! binary operations between different fields are rejected at the API
//! boundary.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("order of the zero element is undefined")]
    ZeroOrder,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("cannot parse field '{0}' (expected Q or Fp:<p>)")]
    BadField(String),
    #[error("cannot parse scalar '{0}'")]
    BadScalar(String),
    #[error("component {component} out of range for rank {rank}")]
    ComponentOutOfRange { component: usize, rank: usize },
}

/// The ground field `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Prime(u32),
}

impl Field {
    pub fn prime(p: u64) -> Result<Field, SeriesError> {
        if p >= (1 << 31) || !is_prime(p) {
            return Err(SeriesError::NotPrime(p));
        }
        Ok(Field::Prime(p as u32))
    }

    pub fn ensure_same(self, other: Field) -> Result<(), SeriesError> {
        if self == other {
            Ok(())
        } else {
            Err(SeriesError::FieldMismatch(self, other))
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "Fp:{p}"),
        }
    }
}

impl FromStr for Field {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "Q" {
            return Ok(Field::Rational);
        }
        if let Some(p) = s.strip_prefix("Fp:") {
            let p: u64 = p.parse().map_err(|_| SeriesError::BadField(s.to_string()))?;
            return Field::prime(p);
        }
        Err(SeriesError::BadField(s.to_string()))
    }
}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An exact element of the active ground field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Mod { p: u32, v: u32 },
}

impl Scalar {
    pub fn zero(field: Field) -> Scalar {
        Scalar::from_i64(field, 0)
    }

    pub fn one(field: Field) -> Scalar {
        Scalar::from_i64(field, 1)
    }

    pub fn from_i64(field: Field, n: i64) -> Scalar {
        match field {
            Field::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Scalar::Mod {
                p,
                v: n.rem_euclid(p as i64) as u32,
            },
        }
    }

    pub fn from_ratio(field: Field, num: i64, den: i64) -> Result<Scalar, SeriesError> {
        let d = Scalar::from_i64(field, den);
        Scalar::from_i64(field, num).div(&d)
    }

    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rational,
            Scalar::Mod { p, .. } => Field::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Mod { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_one(),
            Scalar::Mod { v, .. } => *v == 1,
        }
    }

    pub fn inv(&self) -> Result<Scalar, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(q) => Scalar::Rational(q.recip()),
            Scalar::Mod { p, v } => Scalar::Mod {
                p: *p,
                v: pow_mod(*v as u64, *p as u64 - 2, *p as u64) as u32,
            },
        })
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar, SeriesError> {
        Ok(self * &rhs.inv()?)
    }

    /// Parses `"num/den"`, `"num"` (rationals) or a residue (prime fields).
    pub fn parse(field: Field, s: &str) -> Result<Scalar, SeriesError> {
        let bad = || SeriesError::BadScalar(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        match field {
            Field::Rational => {
                let n: BigInt = num.parse().map_err(|_| bad())?;
                let d: BigInt = den.parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Scalar::Rational(BigRational::new(n, d)))
            }
            Field::Prime(_) => {
                let n: i64 = num.parse().map_err(|_| bad())?;
                let d: i64 = den.parse().map_err(|_| bad())?;
                Scalar::from_ratio(field, n, d).map_err(|_| bad())
            }
        }
    }
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Rationals print as `num/den` (always with a denominator), residues as the
/// least nonnegative representative.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Scalar::Mod { v, .. } => write!(f, "{v}"),
        }
    }
}

fn same_prime(a: u32, b: u32) -> u32 {
    assert_eq!(a, b, "scalar field mismatch");
    a
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Mod { p, v }, Scalar::Mod { p: q, v: w }) => {
                let p = same_prime(*p, *q);
                Scalar::Mod {
                    p,
                    v: ((*v as u64 + *w as u64) % p as u64) as u32,
                }
            }
            _ => panic!("scalar field mismatch"),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Mod { p, v }, Scalar::Mod { p: q, v: w }) => {
                let p = same_prime(*p, *q);
                Scalar::Mod {
                    p,
                    v: ((*v as u64 * *w as u64) % p as u64) as u32,
                }
            }
            _ => panic!("scalar field mismatch"),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Mod { p, v } => Scalar::Mod {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Scalar {
    /// Absolute size of the numerator, used only for diagnostics.
    pub fn height(&self) -> u64 {
        match self {
            Scalar::Rational(q) => {
                let n = q.numer().abs();
                u64::try_from(&n).unwrap_or(u64::MAX)
            }
            Scalar::Mod { v, .. } => *v as u64,
        }
    }
}

/// Adds `c` into `map[key]`, removing the entry when it cancels.
pub(crate) fn accumulate<K: Ord>(map: &mut BTreeMap<K, Scalar>, key: K, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get() + &c;
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

/// A finite Laurent polynomial `Σ c_e u^e` with nonzero stored coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    field: Field,
    coeffs: BTreeMap<i64, Scalar>,
}

impl LaurentPoly {
    pub fn zero(field: Field) -> Self {
        LaurentPoly {
            field,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn monomial(field: Field, exp: i64, c: Scalar) -> Self {
        let mut p = LaurentPoly::zero(field);
        accumulate(&mut p.coeffs, exp, c);
        p
    }

    /// Builds from integer coefficients; repeated exponents are summed.
    pub fn from_ints(field: Field, terms: &[(i64, i64)]) -> Self {
        let mut p = LaurentPoly::zero(field);
        for &(e, c) in terms {
            accumulate(&mut p.coeffs, e, Scalar::from_i64(field, c));
        }
        p
    }

    pub fn from_terms(
        field: Field,
        terms: impl IntoIterator<Item = (i64, Scalar)>,
    ) -> Result<Self, SeriesError> {
        let mut p = LaurentPoly::zero(field);
        for (e, c) in terms {
            field.ensure_same(c.field())?;
            accumulate(&mut p.coeffs, e, c);
        }
        Ok(p)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Scalar> {
        &self.coeffs
    }

    pub fn coeff(&self, e: i64) -> Scalar {
        self.coeffs
            .get(&e)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.field))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn ord_u(&self) -> Result<i64, SeriesError> {
        self.coeffs
            .keys()
            .next()
            .copied()
            .ok_or(SeriesError::ZeroOrder)
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn negate(&self) -> Self {
        LaurentPoly {
            field: self.field,
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = LaurentPoly::zero(self.field);
        if c.is_zero() {
            return out;
        }
        for (e, v) in &self.coeffs {
            out.coeffs.insert(*e, v * c);
        }
        out
    }

    pub fn shift(&self, by: i64) -> Self {
        LaurentPoly {
            field: self.field,
            coeffs: self.coeffs.iter().map(|(e, c)| (e + by, c.clone())).collect(),
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> Result<Self, SeriesError> {
        self.field.ensure_same(other.field)?;
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            accumulate(&mut out.coeffs, *e, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LaurentPoly) -> Result<Self, SeriesError> {
        self.add(&other.negate())
    }

    pub fn mul(&self, other: &LaurentPoly) -> Result<Self, SeriesError> {
        self.field.ensure_same(other.field)?;
        let mut out = LaurentPoly::zero(self.field);
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                accumulate(&mut out.coeffs, e1 + e2, c1 * c2);
            }
        }
        Ok(out)
    }
}

pub fn lp_add(x: &LaurentPoly, y: &LaurentPoly) -> Result<LaurentPoly, SeriesError> {
    x.add(y)
}

pub fn lp_mul(x: &LaurentPoly, y: &LaurentPoly) -> Result<LaurentPoly, SeriesError> {
    x.mul(y)
}

/// Renders `c · Π var^exp`, e.g. `u^-1 t`, `-3/2 u^2`, `1`.
pub(crate) fn format_term(c: &Scalar, vars: &[(&str, i64)]) -> String {
    let coef = match c {
        Scalar::Rational(q) if q.is_integer() => q.numer().to_string(),
        other => other.to_string(),
    };
    let mono: Vec<String> = vars
        .iter()
        .filter(|(_, e)| *e != 0)
        .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
        .collect();
    match (coef.as_str(), mono.is_empty()) {
        (_, true) => coef,
        ("1", false) => mono.join(" "),
        ("-1", false) => format!("-{}", mono.join(" ")),
        _ => format!("{coef} {}", mono.join(" ")),
    }
}

/// Joins rendered terms with ` + `, folding a leading minus into ` - `.
pub(crate) fn join_terms(terms: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for (i, t) in terms.enumerate() {
        if i == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.coeffs.iter().map(|(e, c)| format_term(c, &[("u", *e)]));
        f.write_str(&join_terms(terms))
    }
}

/// A vector in `k((u))^r` with finite support, keyed by (component, exponent).
/// Components are numbered from 0 internally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentVec {
    field: Field,
    rank: usize,
    entries: BTreeMap<(usize, i64), Scalar>,
}

impl LaurentVec {
    pub fn zero(field: Field, rank: usize) -> Self {
        LaurentVec {
            field,
            rank,
            entries: BTreeMap::new(),
        }
    }

    /// `u^exp` in the given component.
    pub fn unit(field: Field, rank: usize, component: usize, exp: i64) -> Self {
        let mut v = LaurentVec::zero(field, rank);
        v.entries.insert((component, exp), Scalar::one(field));
        v
    }

    pub fn from_poly(p: &LaurentPoly) -> Self {
        LaurentVec::from_components(p.field, std::slice::from_ref(p)).expect("single component")
    }

    pub fn from_components(field: Field, comps: &[LaurentPoly]) -> Result<Self, SeriesError> {
        let mut v = LaurentVec::zero(field, comps.len());
        for (i, p) in comps.iter().enumerate() {
            field.ensure_same(p.field)?;
            for (e, c) in &p.coeffs {
                v.entries.insert((i, *e), c.clone());
            }
        }
        Ok(v)
    }

    pub fn from_entries(
        field: Field,
        rank: usize,
        entries: impl IntoIterator<Item = ((usize, i64), Scalar)>,
    ) -> Result<Self, SeriesError> {
        let mut v = LaurentVec::zero(field, rank);
        for ((comp, e), c) in entries {
            if comp >= rank {
                return Err(SeriesError::ComponentOutOfRange {
                    component: comp,
                    rank,
                });
            }
            field.ensure_same(c.field())?;
            accumulate(&mut v.entries, (comp, e), c);
        }
        Ok(v)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> &BTreeMap<(usize, i64), Scalar> {
        &self.entries
    }

    pub(crate) fn from_map(
        field: Field,
        rank: usize,
        entries: BTreeMap<(usize, i64), Scalar>,
    ) -> Self {
        LaurentVec {
            field,
            rank,
            entries,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn component(&self, i: usize) -> LaurentPoly {
        LaurentPoly {
            field: self.field,
            coeffs: self
                .entries
                .range((i, i64::MIN)..=(i, i64::MAX))
                .map(|((_, e), c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn components(&self) -> Vec<LaurentPoly> {
        (0..self.rank).map(|i| self.component(i)).collect()
    }

    /// Minimal u-order over all components.
    pub fn ord_u(&self) -> Result<i64, SeriesError> {
        self.entries
            .keys()
            .map(|(_, e)| *e)
            .min()
            .ok_or(SeriesError::ZeroOrder)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.entries.keys().map(|(_, e)| *e).min()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.entries.keys().map(|(_, e)| *e).max()
    }

    /// Leading (component, exponent) key in component-major order.
    pub fn pivot(&self) -> Option<(usize, i64)> {
        self.entries.keys().next().copied()
    }

    pub fn add(&self, other: &LaurentVec) -> Result<Self, SeriesError> {
        self.field.ensure_same(other.field)?;
        let mut out = self.clone();
        out.rank = out.rank.max(other.rank);
        for (k, c) in &other.entries {
            accumulate(&mut out.entries, *k, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = LaurentVec::zero(self.field, self.rank);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.entries {
            out.entries.insert(*k, v * c);
        }
        out
    }

    /// Moves every entry to component `comp + offset` inside a vector of rank
    /// `new_rank`.
    pub fn reindex(&self, offset: usize, new_rank: usize) -> Self {
        LaurentVec {
            field: self.field,
            rank: new_rank,
            entries: self
                .entries
                .iter()
                .map(|((c, e), v)| ((c + offset, *e), v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for LaurentVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components()
            .iter()
            .map(|p| p.to_string())
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
