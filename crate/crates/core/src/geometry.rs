//! Built-in geometric data and their Schur pairs.
//!
//! Each datum has fixed coordinates at its distinguished point. Its rings of
//! sections expand to monomial spaces `{u^a t^b : criterion(a, b)}`, so the
//! forward map produces pairs whose generators are monomials in the window.
//!
//! Also hosts the nodal cubic ring used for the non-Noetherian chain.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::fredholm::{fredholm_index, FredholmError, WindowedSubspace};
use crate::linalg::{Echelon, SparseRow};
use crate::local2d::{Local2DElement, Local2DVector, Window2D};
use crate::schur::{LayeredSubspace, SchurError, SchurPair, Verdict};
use crate::series::{accumulate, Field, LaurentVec, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error("{0}")]
    Unsupported(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("unknown example `{0}` (expected p2-line, even-variant, nilpotent or nodal-cubic)")]
    UnknownKind(String),
    #[error("degree bound {0} is too small, need at least 3")]
    DegreeTooSmall(i64),
}

impl From<FredholmError> for GeometryError {
    fn from(e: FredholmError) -> Self {
        GeometryError::Schur(SchurError::Fredholm(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// A line `C` in `P²`, with `W` the sections of `O(m)`.
    P2Line { twist: i64 },
    /// Synthetic: odd t-levels shifted down by one, so only even t-orders
    /// carry invertible elements.
    EvenVariant { twist: i64 },
    /// Ribbon with `t_i t_j = 0` for all `i, j ≠ 0`.
    Nilpotent { twist: i64 },
    /// The affine nodal cubic `y² = x²(x+1)`.
    NodalCubic,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::P2Line { .. } => "p2-line",
            Kind::EvenVariant { .. } => "even-variant",
            Kind::Nilpotent { .. } => "nilpotent",
            Kind::NodalCubic => "nodal-cubic",
        }
    }

    pub fn parse(name: &str, twist: i64) -> Result<Kind, GeometryError> {
        Ok(match name {
            "p2-line" => Kind::P2Line { twist },
            "even-variant" => Kind::EvenVariant { twist },
            "nilpotent" => Kind::Nilpotent { twist },
            "nodal-cubic" => Kind::NodalCubic,
            other => return Err(GeometryError::UnknownKind(other.to_string())),
        })
    }
}

impl FromStr for Kind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::parse(s, 0)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How monomials multiply in the ambient ring of a datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductRule {
    Standard,
    /// `u^a t^b · u^c t^d = 0` whenever `b ≠ 0` and `d ≠ 0`.
    Nilpotent,
}

impl ProductRule {
    pub fn mul(self, x: &Local2DElement, y: &Local2DElement) -> Local2DElement {
        let field = x.field();
        match self {
            ProductRule::Standard => x.mul(y).expect("same field"),
            ProductRule::Nilpotent => {
                let mut out = BTreeMap::new();
                for ((b1, a1), c1) in x.terms() {
                    for ((b2, a2), c2) in y.terms() {
                        if *b1 != 0 && *b2 != 0 {
                            continue;
                        }
                        accumulate(&mut out, (a1 + a2, b1 + b2), c1 * c2);
                    }
                }
                Local2DElement::from_terms(field, out).expect("same field")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeometricDatum {
    pub kind: Kind,
    pub field: Field,
}

impl GeometricDatum {
    pub fn new(kind: Kind, field: Field) -> Self {
        GeometricDatum { kind, field }
    }

    pub fn p2_line(twist: i64) -> Self {
        GeometricDatum::new(Kind::P2Line { twist }, Field::Rational)
    }

    /// Self-intersection `C·C` of the model curve.
    pub fn selfint(&self) -> i64 {
        match self.kind {
            Kind::P2Line { .. } | Kind::EvenVariant { .. } => 1,
            Kind::Nilpotent { .. } | Kind::NodalCubic => 0,
        }
    }

    pub fn synthetic(&self) -> bool {
        matches!(self.kind, Kind::EvenVariant { .. })
    }

    pub fn product_rule(&self) -> ProductRule {
        match self.kind {
            Kind::Nilpotent { .. } => ProductRule::Nilpotent,
            _ => ProductRule::Standard,
        }
    }

    fn twist(&self) -> Result<i64, GeometryError> {
        match self.kind {
            Kind::P2Line { twist } | Kind::EvenVariant { twist } | Kind::Nilpotent { twist } => Ok(twist),
            Kind::NodalCubic => Err(GeometryError::Unsupported(
                "nodal-cubic is affine; the forward construction needs a projective curve".into(),
            )),
        }
    }

    /// Highest u-exponent of level `b` of `A` (`m = 0`) or `W`.
    fn level_top(&self, m: i64, b: i64) -> i64 {
        match self.kind {
            Kind::P2Line { .. } => m - b,
            Kind::EvenVariant { .. } => m - b - b.rem_euclid(2),
            Kind::Nilpotent { .. } | Kind::NodalCubic => m,
        }
    }

    /// Whether `u^a t^b` is a section with the given twist.
    pub fn criterion(&self, m: i64, a: i64, b: i64) -> bool {
        a <= self.level_top(m, b)
    }
}

fn monomial_space(
    g: &GeometricDatum,
    m: i64,
    w: &Window2D,
) -> Result<LayeredSubspace, GeometryError> {
    let field = g.field;
    let mut gens = Vec::new();
    for b in w.t_lo..w.t_hi {
        let top = g.level_top(m, b);
        // An empty level would wrongly inherit the tail below u_lo.
        if top < w.u_lo - 1 {
            return Err(GeometryError::WindowTooSmall(format!(
                "level {b} has top exponent {top}, below u_lo - 1 = {}",
                w.u_lo - 1
            )));
        }
        for a in w.u_lo..w.u_hi.min(top + 1) {
            gens.push(Local2DVector::scalar(Local2DElement::monomial(
                field,
                a,
                b,
                Scalar::one(field),
            )));
        }
    }
    Ok(LayeredSubspace::from_generators(field, 1, *w, gens)?)
}

/// The Schur pair of a projective datum, read off through the window.
pub fn forward_krichever(g: &GeometricDatum, w: &Window2D) -> Result<SchurPair, GeometryError> {
    let m = g.twist()?;
    w.validate().map_err(SchurError::from)?;
    let a = monomial_space(g, 0, w)?;
    let wsp = monomial_space(g, m, w)?;
    Ok(SchurPair::new(a, wsp)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelIndexRow {
    pub b: i64,
    #[serde(rename = "index_A")]
    pub index_a: Option<i64>,
    #[serde(rename = "index_W")]
    pub index_w: Option<i64>,
}

/// Fredholm index of every level of `A` and `W`; `None` where the level's
/// pivots reach the top u-margin.
pub fn level_index_table(g: &GeometricDatum, w: &Window2D) -> Result<Vec<LevelIndexRow>, GeometryError> {
    let p = forward_krichever(g, w)?;
    let idx = |l: &WindowedSubspace| -> Result<Option<i64>, GeometryError> {
        match fredholm_index(l) {
            Ok(i) => Ok(Some(i)),
            Err(FredholmError::WindowTooSmall { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    (w.t_lo..w.t_hi)
        .map(|b| {
            Ok(LevelIndexRow {
                b,
                index_a: idx(p.a().level(b).expect("level"))?,
                index_w: idx(p.w().level(b).expect("level"))?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderGroupReport {
    pub d: i64,
    /// Inverse pairs `(g, h)` with `g·h = 1`, one per distinct nonzero order.
    pub witnesses: Vec<(String, String)>,
    /// The window held no invertible of nonzero order.
    pub exhausted: bool,
    pub synthetic: bool,
}

/// Generator of the subgroup of `Z` spanned by t-orders of invertible
/// elements found among pairs of window generators of `A`.
pub fn order_group(g: &GeometricDatum, w: &Window2D) -> Result<OrderGroupReport, GeometryError> {
    let p = forward_krichever(g, w)?;
    let rule = g.product_rule();
    let field = g.field;
    let gens: Vec<&Local2DElement> = p.a().generators().iter().map(|v| &v.components()[0]).collect();
    let one = Local2DElement::one(field);
    let mut d = 0i64;
    let mut witnesses: BTreeMap<i64, (String, String)> = BTreeMap::new();
    for (i, x) in gens.iter().enumerate() {
        for y in &gens[i..] {
            if rule.mul(x, y) != one {
                continue;
            }
            let o = x.ord_t().expect("nonzero");
            if o == 0 {
                continue;
            }
            d = d.gcd(&o);
            let (x, y) = if o > 0 { (x, y) } else { (y, x) };
            witnesses
                .entry(o.abs())
                .or_insert_with(|| (x.to_string(), y.to_string()));
        }
    }
    Ok(OrderGroupReport {
        d,
        witnesses: witnesses.into_values().collect(),
        exhausted: d == 0,
        synthetic: g.synthetic(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub unit: bool,
    pub multiplicative: bool,
    pub torsion_free: bool,
    /// Nonzero generator pairs of nonzero level whose product vanishes.
    pub vanishing_products: usize,
    pub details: Vec<String>,
    pub verdict: Verdict,
}

/// Checks the level axioms on explicit level data: unit in level 0,
/// `A_i · A_j ⊂ A_{i+j}` on interior generators, and every interior level a
/// cocompact space with pivots clear of the top margin.
pub fn validate_level_axioms(
    levels: &BTreeMap<i64, WindowedSubspace>,
    generators: &[Local2DElement],
    w: &Window2D,
    rule: ProductRule,
) -> AxiomReport {
    let mut details = Vec::new();
    let unit = levels
        .get(&0)
        .map(|l| {
            let one = LaurentVec::unit(l.field(), 1, 0, 0);
            crate::fredholm::membership(l, &one) == Ok(crate::fredholm::Membership::In)
        })
        .unwrap_or(false);
    if !unit {
        details.push("1 is not in level 0".into());
    }

    let interior: Vec<&Local2DElement> = generators
        .iter()
        .filter(|x| !x.is_zero() && x.terms().keys().all(|(b, a)| w.interior_contains(*a, *b)))
        .collect();
    let mut multiplicative = true;
    let mut vanishing = 0;
    for (i, x) in interior.iter().enumerate() {
        for y in &interior[i..] {
            let (ox, oy) = (x.ord_t().expect("nonzero"), y.ord_t().expect("nonzero"));
            let p = rule.mul(x, y);
            if p.is_zero() {
                if ox != 0 && oy != 0 {
                    vanishing += 1;
                }
                continue;
            }
            if p.ord_t().expect("nonzero") < ox + oy {
                multiplicative = false;
                if details.len() < 16 {
                    details.push(format!("({x})·({y}) drops below level {}", ox + oy));
                }
            }
        }
    }

    let mut torsion_free = true;
    for b in w.interior_levels() {
        let Some(l) = levels.get(&b) else {
            torsion_free = false;
            details.push(format!("level {b} missing"));
            continue;
        };
        if !l.full_below() {
            torsion_free = false;
            details.push(format!("level {b} is finite dimensional"));
            continue;
        }
        if let Err(e) = l.clone().with_margin(w.m_u).check_margin() {
            torsion_free = false;
            details.push(format!("level {b}: {e}"));
        }
    }

    let verdict = if unit && multiplicative && torsion_free {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    AxiomReport {
        unit,
        multiplicative,
        torsion_free,
        vanishing_products: vanishing,
        details,
        verdict,
    }
}

pub fn validate_ribbon_axioms(g: &GeometricDatum, w: &Window2D) -> Result<AxiomReport, GeometryError> {
    let p = forward_krichever(g, w)?;
    let gens: Vec<Local2DElement> = p
        .a()
        .generators()
        .iter()
        .map(|v| v.components()[0].clone())
        .collect();
    Ok(validate_level_axioms(p.a().levels(), &gens, w, g.product_rule()))
}

/// `k[x, y]/(y² − x²(x+1))` in the normal-form basis `x^a y^e`, `e ∈ {0, 1}`,
/// truncated at total degree `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodalCubicRing {
    pub degree_bound: i64,
    pub field: Field,
}

/// Normal-form polynomial keyed by `(a, e)` for `x^a y^e`.
pub type NodalPoly = BTreeMap<(i64, u8), Scalar>;

fn degree(k: &(i64, u8)) -> i64 {
    k.0 + k.1 as i64
}

impl NodalCubicRing {
    pub fn new(degree_bound: i64, field: Field) -> Self {
        NodalCubicRing { degree_bound, field }
    }

    /// Basis monomials of the point ideal `(x, y)` up to degree `deg`.
    fn ideal_basis(deg: i64) -> Vec<(i64, u8)> {
        let mut out = Vec::new();
        for a in 1..=deg {
            out.push((a, 0));
        }
        for a in 0..deg {
            out.push((a, 1));
        }
        out
    }

    /// Product of basis monomials in normal form (`y² = x³ + x²`).
    pub fn mul_monomials(&self, p: (i64, u8), q: (i64, u8)) -> NodalPoly {
        let one = Scalar::one(self.field);
        let mut out = NodalPoly::new();
        let a = p.0 + q.0;
        match p.1 + q.1 {
            2 => {
                accumulate(&mut out, (a + 3, 0), one.clone());
                accumulate(&mut out, (a + 2, 0), one);
            }
            e => accumulate(&mut out, (a, e), one),
        }
        out
    }

    /// `dim_k(J_Q ∩ deg ≤ D)`.
    pub fn point_ideal_dim(&self) -> usize {
        Self::ideal_basis(self.degree_bound).len()
    }

    /// `dim_k(J_Q² ∩ deg ≤ D)`, from products of ideal generators of degree
    /// up to `D + extra`; elimination runs from the top degree down so that
    /// low-degree combinations of high-degree products are found.
    fn square_dim_with(&self, extra: i64) -> usize {
        let g = self.degree_bound + extra;
        let basis = Self::ideal_basis(g);
        // Key: (−degree, a, e) puts high degrees first.
        let mut e: Echelon<(i64, i64, u8)> = Echelon::new(self.field);
        for (i, p) in basis.iter().enumerate() {
            for q in &basis[i..] {
                if degree(p) + degree(q) > g {
                    continue;
                }
                let row: SparseRow<(i64, i64, u8)> = self
                    .mul_monomials(*p, *q)
                    .into_iter()
                    .map(|(k, c)| ((-degree(&k), k.0, k.1), c))
                    .collect();
                e.insert(row);
            }
        }
        e.pivots().filter(|(nd, _, _)| -nd <= self.degree_bound).count()
    }

    /// `dim_k(J_Q² ∩ deg ≤ D)`; stable against a larger generation bound.
    pub fn square_dim(&self) -> usize {
        let n = self.square_dim_with(3);
        debug_assert_eq!(n, self.square_dim_with(6));
        n
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub dims: Vec<usize>,
    pub point_ideal_dim: usize,
    pub square_dim: usize,
    pub degree_bound: i64,
}

/// Dimensions of `J_k ∩ window` for `k = 1..k_max`, where
/// `J_k = {Σ c_i t^i : c_i ∈ J_Q, c_i ∈ J_Q² for i < −k}`.
pub fn noncoherent_chain(r: &NodalCubicRing, k_max: i64, w: &Window2D) -> Result<ChainReport, GeometryError> {
    if r.degree_bound < 3 {
        return Err(GeometryError::DegreeTooSmall(r.degree_bound));
    }
    if k_max < 1 {
        return Err(GeometryError::WindowTooSmall("k_max must be positive".into()));
    }
    if w.t_lo > -k_max - 1 || w.t_hi < 1 {
        return Err(GeometryError::WindowTooSmall(format!(
            "t-range [{}, {}) must cover [{}, 1)",
            w.t_lo,
            w.t_hi,
            -k_max - 1
        )));
    }
    let n1 = r.point_ideal_dim();
    let n2 = r.square_dim();
    let dims = (1..=k_max)
        .map(|k| (w.t_lo..w.t_hi).map(|i| if i < -k { n2 } else { n1 }).sum())
        .collect();
    Ok(ChainReport {
        dims,
        point_ideal_dim: n1,
        square_dim: n2,
        degree_bound: r.degree_bound,
    })
}
