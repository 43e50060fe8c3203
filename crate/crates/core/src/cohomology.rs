//! Two-chart Čech cohomology on `P¹` for line bundles and for stacks of
//! line bundles glued by lower-triangular transition data, plus the
//! dimension of the unipotent part of the Picard group of a thickening.
//!
//! Charts are `U₁ = P¹ ∖ {∞}` with coordinate `z` and `U₂ = P¹ ∖ {0}` with
//! `w = 1/z`. Section spaces are truncated at a bound `B`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{GeometricDatum, Kind};
use crate::linalg::{kernel, rank, SparseRow};
use crate::series::{Field, LaurentPoly, Scalar, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("bound {bound} too small: {reason}")]
    BoundTooSmall { bound: i64, reason: String },
    #[error("invalid coupling from level {from} to level {to}")]
    InvalidCoupling { from: usize, to: usize },
    #[error("the overlap U1 ∩ U2 is not a chart for this check")]
    ChartNotAllowed,
    #[error("{0}")]
    Unsupported(String),
}

/// A transition term: level `to` receives `c(z) · (level from)` on the
/// overlap. Only `from < to` is allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling {
    pub from: usize,
    pub to: usize,
    pub c: LaurentPoly,
}

/// Graded pieces `O(d_0), …, O(d_i)` of a truncated filtered sheaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelStack {
    field: Field,
    twists: Vec<i64>,
    couplings: Vec<Coupling>,
}

impl LevelStack {
    /// A split stack.
    pub fn new(field: Field, twists: Vec<i64>) -> Self {
        LevelStack {
            field,
            twists,
            couplings: Vec::new(),
        }
    }

    /// Levels `d_j = m − j·selfint` for `j = 0..=i`.
    pub fn from_datum(field: Field, m: i64, selfint: i64, i: usize) -> Self {
        LevelStack::new(field, (0..=i as i64).map(|j| m - j * selfint).collect())
    }

    pub fn with_coupling(mut self, from: usize, to: usize, c: LaurentPoly) -> Result<Self, CohomologyError> {
        if from >= to || to >= self.twists.len() || c.is_zero() {
            return Err(CohomologyError::InvalidCoupling { from, to });
        }
        self.field.ensure_same(c.field())?;
        self.couplings.push(Coupling { from, to, c });
        Ok(self)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn twists(&self) -> &[i64] {
        &self.twists
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn len(&self) -> usize {
        self.twists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twists.is_empty()
    }

    /// The first `n` levels with the couplings among them.
    pub fn prefix(&self, n: usize) -> LevelStack {
        LevelStack {
            field: self.field,
            twists: self.twists[..n].to_vec(),
            couplings: self.couplings.iter().filter(|c| c.to < n).cloned().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    U1,
    U2,
    Overlap,
}

/// Source coordinate of `C⁰`: (level, chart 0 or 1, exponent).
type Src = (usize, u8, i64);
/// Target coordinate of `C¹`: (level, exponent of z on the overlap).
type Tgt = (usize, i64);

/// The truncated two-chart complex of a stack.
struct Complex {
    field: Field,
    columns: Vec<(Src, SparseRow<Tgt>)>,
    c1_dim: usize,
    /// Top chart exponents per level, used to detect boundary contact.
    top: Vec<(i64, i64)>,
    lo: Vec<i64>,
}

fn build_complex(stack: &LevelStack, bound: i64) -> Result<Complex, CohomologyError> {
    let field = stack.field;
    let n = stack.len();
    let mut into: BTreeMap<usize, Vec<&Coupling>> = BTreeMap::new();
    for c in &stack.couplings {
        into.entry(c.to).or_default().push(c);
    }
    for (j, d) in stack.twists.iter().enumerate() {
        if bound < d.abs() + 2 {
            return Err(CohomologyError::BoundTooSmall {
                bound,
                reason: format!("level {j} has twist {d}, need bound ≥ |d| + 2"),
            });
        }
    }
    for c in &stack.couplings {
        let top = c.c.max_exp().expect("nonzero") + stack.twists[c.from];
        if top > bound {
            return Err(CohomologyError::BoundTooSmall {
                bound,
                reason: format!("coupling {}→{} reaches z^{top}", c.from, c.to),
            });
        }
    }

    // Lowest overlap exponent per level, so that all images fit.
    let mut lo = Vec::with_capacity(n);
    for j in 0..n {
        let mut l = stack.twists[j] - bound;
        for c in into.get(&j).into_iter().flatten() {
            l = l.min(c.c.ord_u()? + lo[c.from]);
        }
        lo.push(l);
    }

    let one = Scalar::one(field);
    let mut columns = Vec::new();
    let mut top = Vec::with_capacity(n);
    for (j, (&d, &lo_j)) in stack.twists.iter().zip(&lo).enumerate() {
        for a in 0..=bound {
            columns.push(((j, 0u8, a), SparseRow::from([((j, a), one.clone())])));
        }
        let k_max = d - lo_j;
        for k in 0..=k_max {
            let mut col = SparseRow::new();
            crate::series::accumulate(&mut col, (j, d - k), -&one);
            for c in stack.couplings.iter().filter(|c| c.from == j) {
                for (e, s) in c.c.coeffs() {
                    crate::series::accumulate(&mut col, (c.to, e + d - k), -s);
                }
            }
            columns.push(((j, 1u8, k), col));
        }
        top.push((bound, k_max));
    }
    let c1_dim = (0..n).map(|j| (bound - lo[j] + 1) as usize).sum();
    Ok(Complex {
        field,
        columns,
        c1_dim,
        top,
        lo,
    })
}

/// `(h0, h1)` of a stack via its truncated Čech complex.
fn stack_cohomology(stack: &LevelStack, bound: i64) -> Result<(usize, usize), CohomologyError> {
    let cx = build_complex(stack, bound)?;
    let ker = kernel(cx.field, cx.columns.clone());
    for v in &ker {
        for (j, chart, e) in v.keys() {
            let (top1, top2) = cx.top[*j];
            if (*chart == 0 && *e == top1) || (*chart == 1 && *e == top2) {
                return Err(CohomologyError::BoundTooSmall {
                    bound,
                    reason: format!("a global section reaches the truncation edge at level {j}"),
                });
            }
        }
    }
    let h0 = ker.len();
    let rk = cx.columns.len() - h0;
    Ok((h0, cx.c1_dim - rk))
}

/// `(h0, h1)` of `O(d)` on `P¹` over `Q`.
pub fn cech_line_bundle(d: i64, bound: i64) -> Result<(usize, usize), CohomologyError> {
    cech_line_bundle_over(Field::Rational, d, bound)
}

pub fn cech_line_bundle_over(field: Field, d: i64, bound: i64) -> Result<(usize, usize), CohomologyError> {
    stack_cohomology(&LevelStack::new(field, vec![d]), bound)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineCohomology {
    pub d: i64,
    pub h0: usize,
    pub h1: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Levelwise {
    pub h0: usize,
    pub h1: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub h0: usize,
    pub h1: usize,
    pub levels: Vec<LineCohomology>,
    pub levelwise: Levelwise,
    /// Block and levelwise totals coincide.
    pub agrees: bool,
    /// Every map `H¹(levels 0..=i+1) → H¹(levels 0..=i)` is onto.
    pub transition_surjective: bool,
    pub bound: i64,
}

/// Whether `H¹` of the stack maps onto `H¹` of the stack without its last
/// level. The induced map on cochains drops the last level's coordinates.
fn transition_onto(stack: &LevelStack, bound: i64) -> Result<bool, CohomologyError> {
    let n = stack.len();
    let small = build_complex(&stack.prefix(n - 1), bound)?;
    let big = build_complex(stack, bound)?;
    debug_assert_eq!(small.lo[..], big.lo[..n - 1]);
    let mut rows: Vec<SparseRow<Tgt>> = small.columns.iter().map(|(_, c)| c.clone()).collect();
    for j in 0..n {
        for e in big.lo[j]..=bound {
            let image: SparseRow<Tgt> = if j + 1 < n {
                SparseRow::from([((j, e), Scalar::one(stack.field))])
            } else {
                SparseRow::new()
            };
            rows.push(image);
        }
    }
    Ok(rank(stack.field, rows) == small.c1_dim)
}

/// Cohomology of the whole stack and of each graded piece.
pub fn ribbon_cohomology(stack: &LevelStack, bound: i64) -> Result<CohomologyReport, CohomologyError> {
    let (h0, h1) = stack_cohomology(stack, bound)?;
    let mut levels = Vec::new();
    for &d in &stack.twists {
        let (a, b) = cech_line_bundle_over(stack.field, d, bound)?;
        levels.push(LineCohomology { d, h0: a, h1: b });
    }
    let levelwise = Levelwise {
        h0: levels.iter().map(|l| l.h0).sum(),
        h1: levels.iter().map(|l| l.h1).sum(),
    };
    let mut transition_surjective = true;
    for n in 2..=stack.len() {
        transition_surjective &= transition_onto(&stack.prefix(n), bound)?;
    }
    Ok(CohomologyReport {
        h0,
        h1,
        agrees: levelwise.h0 == h0 && levelwise.h1 == h1,
        levels,
        levelwise,
        transition_surjective,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictionLevel {
    pub level: usize,
    pub kernel_dim: usize,
    pub level_dim: usize,
    pub surjective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactnessReport {
    pub levels: Vec<RestrictionLevel>,
    pub pass: bool,
}

/// On an affine chart, checks that sections of levels `0..=j` restrict onto
/// sections of levels `0..j` with kernel exactly the sections of level `j`.
pub fn restriction_exactness_check(
    stack: &LevelStack,
    chart: Chart,
    bound: i64,
) -> Result<ExactnessReport, CohomologyError> {
    if chart == Chart::Overlap {
        return Err(CohomologyError::ChartNotAllowed);
    }
    if stack.is_empty() {
        return Ok(ExactnessReport {
            levels: Vec::new(),
            pass: true,
        });
    }
    let cx = build_complex(stack, bound)?;
    let exps = |j: usize| -> std::ops::RangeInclusive<i64> {
        match chart {
            Chart::U1 => 0..=cx.top[j].0,
            _ => 0..=cx.top[j].1,
        }
    };
    let field = stack.field;
    let one = Scalar::one(field);
    let mut levels = Vec::new();
    for j in 1..stack.len() {
        // Sections over the chart of levels 0..=j, projected to levels 0..j.
        let mut cols = Vec::new();
        for l in 0..=j {
            for e in exps(l) {
                let img: SparseRow<(usize, i64)> = if l < j {
                    SparseRow::from([((l, e), one.clone())])
                } else {
                    SparseRow::new()
                };
                cols.push(((l, e), img));
            }
        }
        let target_dim: usize = (0..j).map(|l| exps(l).count()).sum();
        let kernel_dim = kernel(field, cols.clone()).len();
        let image_rank = cols.len() - kernel_dim;
        let level_dim = exps(j).count();
        levels.push(RestrictionLevel {
            level: j,
            kernel_dim,
            level_dim,
            surjective: image_rank == target_dim,
        });
    }
    let pass = levels.iter().all(|l| l.surjective && l.kernel_dim == l.level_dim);
    Ok(ExactnessReport { levels, pass })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PicardReport {
    pub i: usize,
    pub dimension: usize,
    /// `h¹(O(−j·C·C))` for `j = 1..=i`.
    pub levels: Vec<LineCohomology>,
    /// Generator of the cyclic quotient, `−(C·C)`.
    pub d: i64,
    pub h0_vanishes: bool,
    pub justification: String,
    pub bound: i64,
}

/// Dimension of the unipotent part of `Pic` of the `i`-th thickening.
pub fn picard_dimension(g: &GeometricDatum, i: usize, bound: i64) -> Result<PicardReport, CohomologyError> {
    if !matches!(g.kind, Kind::P2Line { .. }) {
        return Err(CohomologyError::Unsupported(format!(
            "picard is available for p2-line only, not {}",
            g.kind
        )));
    }
    if i == 0 {
        return Err(CohomologyError::Unsupported("i must be positive".into()));
    }
    let s = g.selfint();
    let mut levels = Vec::with_capacity(i);
    for j in 1..=i as i64 {
        let d = -j * s;
        let (h0, h1) = cech_line_bundle_over(g.field, d, bound)?;
        levels.push(LineCohomology { d, h0, h1 });
    }
    let h0_vanishes = levels.iter().all(|l| l.h0 == 0);
    let justification = if h0_vanishes {
        "h0 of every graded piece O(-j), j >= 1, is zero, so the successive extensions add h1 dimensions".into()
    } else {
        "some graded piece has sections; the sum is only an upper bound".into()
    };
    Ok(PicardReport {
        i,
        dimension: levels.iter().map(|l| l.h1).sum(),
        levels,
        d: -s,
        h0_vanishes,
        justification,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_bundles() {
        assert_eq!(cech_line_bundle(0, 12), Ok((1, 0)));
        assert_eq!(cech_line_bundle(-2, 12), Ok((0, 1)));
        assert_eq!(cech_line_bundle(3, 12), Ok((4, 0)));
        assert_eq!(cech_line_bundle_over(Field::prime(7).unwrap(), -5, 9), Ok((0, 4)));
        assert!(matches!(
            cech_line_bundle(11, 12),
            Err(CohomologyError::BoundTooSmall { .. })
        ));
    }

    #[test]
    fn stacks() {
        let r = ribbon_cohomology(&LevelStack::from_datum(Field::Rational, 0, 1, 2), 12).unwrap();
        assert_eq!((r.h0, r.h1), (1, 1));
        assert!(r.agrees && r.transition_surjective);
        let r = ribbon_cohomology(&LevelStack::from_datum(Field::Rational, 0, 1, 5), 12).unwrap();
        assert_eq!((r.h0, r.h1), (1, 10));
        let r = ribbon_cohomology(&LevelStack::new(Field::Rational, vec![0]), 12).unwrap();
        assert_eq!((r.h0, r.h1), (1, 0));
    }

    #[test]
    fn nonsplit_extension_differs_from_levelwise() {
        // 0 → O(−2) → E → O → 0 with class z^{-1}: E ≅ O(−1)², no sections.
        let c = LaurentPoly::from_ints(Field::Rational, &[(-1, 1)]);
        let stack = LevelStack::new(Field::Rational, vec![0, -2]).with_coupling(0, 1, c).unwrap();
        let r = ribbon_cohomology(&stack, 12).unwrap();
        assert_eq!((r.h0, r.h1), (0, 0));
        assert_eq!((r.levelwise.h0, r.levelwise.h1), (1, 1));
        assert!(!r.agrees);
        // A coboundary class z^{1} splits.
        let c = LaurentPoly::from_ints(Field::Rational, &[(1, 1)]);
        let stack = LevelStack::new(Field::Rational, vec![0, -2]).with_coupling(0, 1, c).unwrap();
        let r = ribbon_cohomology(&stack, 12).unwrap();
        assert_eq!((r.h0, r.h1), (1, 1));
    }

    #[test]
    fn restriction() {
        let stack = LevelStack::from_datum(Field::Rational, 1, 1, 3);
        for chart in [Chart::U1, Chart::U2] {
            assert!(restriction_exactness_check(&stack, chart, 10).unwrap().pass);
        }
        assert_eq!(
            restriction_exactness_check(&stack, Chart::Overlap, 10),
            Err(CohomologyError::ChartNotAllowed)
        );
        let empty = LevelStack::new(Field::Rational, vec![]);
        assert!(restriction_exactness_check(&empty, Chart::U1, 10).unwrap().pass);
    }

    #[test]
    fn picard() {
        let g = GeometricDatum::p2_line(0);
        let dims: Vec<usize> = (1..=5)
            .map(|i| picard_dimension(&g, i, 12).unwrap().dimension)
            .collect();
        assert_eq!(dims, vec![0, 1, 3, 6, 10]);
        assert_eq!(picard_dimension(&g, 3, 12).unwrap().d, -1);
        let nil = GeometricDatum::new(Kind::Nilpotent { twist: 0 }, Field::Rational);
        assert!(picard_dimension(&nil, 2, 12).is_err());
    }
}
