//! t-filtered subspaces of `K^{⊕r}`, Schur pair checks, graded slices and
//! Hilbert functions of the associated graded pieces.
//!
//! A [`LayeredSubspace`] stores, for every t-level `b` of its window, the
//! windowed space of leading `t^b` coefficients, together with a list of
//! generators. Levels are authoritative; generators are witnesses used to
//! lift leading coefficients back to elements.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::fredholm::{
    echelonize, fredholm_index, membership, FredholmError, Membership, WindowedSubspace,
};
use crate::linalg::{Aug, Echelon, SparseRow};
use crate::local2d::{Local2DElement, Local2DError, Local2DVector, Window2D};
use crate::series::{accumulate, Field, LaurentVec, Scalar, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchurError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Local2D(#[from] Local2DError),
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error("term u^{a} t^{b} lies outside the window")]
    SupportViolation { a: i64, b: i64 },
    #[error("invalid layered subspace: {0}")]
    InvalidLayers(String),
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error("slice range [{0}, {1}) is empty or leaves the window")]
    Range(i64, i64),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("windows or ranks differ")]
    WindowMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayeredMembership {
    In,
    NotIn,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

type Key2 = (i64, usize, i64);
type Key1 = (usize, i64);

fn vec_to_row(v: &Local2DVector) -> SparseRow<Key2> {
    v.iter_terms()
        .map(|(c, a, b, s)| ((b, c, a), s.clone()))
        .collect()
}

fn row_to_vec(field: Field, rank: usize, row: &SparseRow<Key2>) -> Local2DVector {
    let mut comps: Vec<BTreeMap<(i64, i64), Scalar>> = vec![BTreeMap::new(); rank];
    for ((b, c, a), s) in row {
        comps[*c].insert((*a, *b), s.clone());
    }
    let comps = comps
        .into_iter()
        .map(|t| Local2DElement::from_terms(field, t).expect("same field"))
        .collect();
    Local2DVector::from_components(field, comps).expect("consistent rank")
}

/// `t^b · v` as an element of `K^{⊕r}`.
fn lift(v: &LaurentVec, b: i64) -> Local2DVector {
    let row: SparseRow<Key2> = v
        .entries()
        .iter()
        .map(|((c, a), s)| ((b, *c, *a), s.clone()))
        .collect();
    row_to_vec(v.field(), v.rank(), &row)
}

/// A reduced basis row of a level together with an element of the layered
/// space whose `t^b` coefficient is exactly that row.
#[derive(Clone, Debug, PartialEq, Eq)]
struct LevelRep {
    pivot: Key1,
    row: SparseRow<Key1>,
    rep: Local2DVector,
}

/// A t-filtered subspace of `K^{⊕r}` seen through a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredSubspace {
    field: Field,
    rank: usize,
    window: Window2D,
    levels: BTreeMap<i64, WindowedSubspace>,
    generators: Vec<Local2DVector>,
    reps: BTreeMap<i64, Vec<LevelRep>>,
}

fn check_in_window(v: &Local2DVector, w: &Window2D) -> Result<(), SchurError> {
    for (_, a, b, _) in v.iter_terms() {
        if !w.contains(a, b) {
            return Err(SchurError::SupportViolation { a, b });
        }
    }
    Ok(())
}

impl LayeredSubspace {
    /// Cross-validates levels against generators.
    ///
    /// Every level of the t-range must be present, share the window's
    /// u-range and carry the below-window tail. Every generator must lie in
    /// the window and have its leading coefficient in its level.
    pub fn new(
        field: Field,
        rank: usize,
        window: Window2D,
        levels: BTreeMap<i64, WindowedSubspace>,
        generators: Vec<Local2DVector>,
    ) -> Result<Self, SchurError> {
        window.validate()?;
        if rank == 0 {
            return Err(SchurError::InvalidLayers("rank must be positive".into()));
        }
        let expected: Vec<i64> = (window.t_lo..window.t_hi).collect();
        if levels.keys().copied().collect::<Vec<_>>() != expected {
            return Err(SchurError::InvalidLayers(format!(
                "levels must be exactly t = {}..{}",
                window.t_lo,
                window.t_hi - 1
            )));
        }
        let mut levels = levels;
        for (b, level) in levels.iter_mut() {
            field.ensure_same(level.field())?;
            if level.rank() != rank {
                return Err(SchurError::InvalidLayers(format!("level {b} has rank {}", level.rank())));
            }
            if level.u_lo() != window.u_lo || level.u_hi() != window.u_hi {
                return Err(SchurError::InvalidLayers(format!("level {b} has a different u-window")));
            }
            if !level.full_below() {
                return Err(SchurError::InvalidLayers(format!("level {b} lacks the tail below u_lo")));
            }
            *level = level.clone().with_margin(window.m_u);
        }
        for g in &generators {
            field.ensure_same(g.field())?;
            if g.rank() != rank {
                return Err(SchurError::InvalidLayers(format!("generator of rank {}", g.rank())));
            }
            check_in_window(g, &window)?;
            let g = g.drop_below_u(window.u_lo);
            if g.is_zero() {
                continue;
            }
            let b = g.ord_t()?;
            if membership(&levels[&b], &g.t_coefficient(b))? != Membership::In {
                return Err(SchurError::InvalidLayers(format!(
                    "generator {g} has its leading coefficient outside level {b}"
                )));
            }
        }
        let reps = build_reps(field, rank, window.u_lo, &levels, &generators);
        Ok(LayeredSubspace {
            field,
            rank,
            window,
            levels,
            generators,
            reps,
        })
    }

    /// Derives the levels from the generators: level `b` is spanned by the
    /// leading coefficients of the generator span at t-order `b`, plus the
    /// tail below `u_lo`. Leading terms are taken modulo that tail.
    pub fn from_generators(
        field: Field,
        rank: usize,
        window: Window2D,
        generators: Vec<Local2DVector>,
    ) -> Result<Self, SchurError> {
        window.validate()?;
        for g in &generators {
            field.ensure_same(g.field())?;
            if g.rank() != rank {
                return Err(SchurError::InvalidLayers(format!("generator of rank {}", g.rank())));
            }
            check_in_window(g, &window)?;
        }
        let e = Echelon::from_rows(field, generators.iter().map(|g| vec_to_row(&g.drop_below_u(window.u_lo))));
        let mut leads: BTreeMap<i64, Vec<LaurentVec>> = BTreeMap::new();
        for row in e.rows() {
            let b = row.keys().next().expect("nonzero row").0;
            leads
                .entry(b)
                .or_default()
                .push(row_to_vec(field, rank, row).t_coefficient(b));
        }
        let mut levels = BTreeMap::new();
        for b in window.t_lo..window.t_hi {
            let rows = leads.remove(&b).unwrap_or_default();
            levels.insert(b, echelonize(field, rows, rank, window.u_lo, window.u_hi, true)?);
        }
        LayeredSubspace::new(field, rank, window, levels, generators)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn window(&self) -> &Window2D {
        &self.window
    }

    pub fn levels(&self) -> &BTreeMap<i64, WindowedSubspace> {
        &self.levels
    }

    pub fn level(&self, b: i64) -> Option<&WindowedSubspace> {
        self.levels.get(&b)
    }

    pub fn generators(&self) -> &[Local2DVector] {
        &self.generators
    }

    /// Generators whose whole support lies in the window interior.
    pub fn interior_generators(&self) -> impl Iterator<Item = &Local2DVector> {
        let w = self.window;
        self.generators
            .iter()
            .filter(move |g| !g.is_zero() && g.iter_terms().all(|(_, a, b, _)| w.interior_contains(a, b)))
    }
}

fn build_reps(
    field: Field,
    rank: usize,
    u_lo: i64,
    levels: &BTreeMap<i64, WindowedSubspace>,
    generators: &[Local2DVector],
) -> BTreeMap<i64, Vec<LevelRep>> {
    // Reduce generators modulo the tail so that each has a distinct 2D
    // leading key; every reduced row is still an element of the span.
    let gens = Echelon::from_rows(field, generators.iter().map(|g| vec_to_row(&g.drop_below_u(u_lo))));
    let mut by_level: BTreeMap<i64, Vec<Local2DVector>> = BTreeMap::new();
    for row in gens.rows() {
        let b = row.keys().next().expect("nonzero row").0;
        by_level.entry(b).or_default().push(row_to_vec(field, rank, row));
    }

    let mut out = BTreeMap::new();
    for (&b, level) in levels {
        // Sources tagged 0 are bare lifts of level rows, tagged 1 are
        // generator elements. Kernel elimination removes the smallest tags
        // first, so generator witnesses are preferred when they suffice.
        let mut sources: BTreeMap<(u8, usize), Local2DVector> = BTreeMap::new();
        let mut e: Echelon<Aug<Key1, (u8, usize)>> = Echelon::new(field);
        let mut push = |tag: (u8, usize), lead: &LaurentVec, rep: Local2DVector| {
            let mut row: SparseRow<Aug<Key1, (u8, usize)>> = lead
                .entries()
                .iter()
                .map(|(k, s)| (Aug::Image(*k), s.clone()))
                .collect();
            row.insert(Aug::Source(tag), Scalar::one(field));
            e.insert(row);
            sources.insert(tag, rep);
        };
        for (i, r) in level.rows().iter().enumerate() {
            push((0, i), r, lift(r, b));
        }
        for (i, g) in by_level.get(&b).into_iter().flatten().enumerate() {
            push((1, i), &g.t_coefficient(b), g.clone());
        }
        let mut reps = Vec::new();
        for row in e.rows() {
            let Some(Aug::Image(pivot)) = row.keys().next().cloned() else {
                continue;
            };
            let mut image = SparseRow::new();
            let mut rep = Local2DVector::zero(field, rank);
            for (k, s) in row {
                match k {
                    Aug::Image(k1) => {
                        image.insert(*k1, s.clone());
                    }
                    Aug::Source(tag) => {
                        rep = rep.add(&sources[tag].scale(s)).expect("same field");
                    }
                }
            }
            reps.push(LevelRep {
                pivot,
                row: image,
                rep,
            });
        }
        out.insert(b, reps);
    }
    out
}

/// Three-valued membership by level-wise reduction.
///
/// At each step the leading `t^b` coefficient is reduced against level `b`;
/// a nonzero remainder proves non-membership. Otherwise a certified element
/// with the same leading coefficient is subtracted and the loop continues
/// on a remainder of strictly higher t-order. Reaching the top t-margin
/// gives `Inconclusive`.
pub fn layered_membership(
    l: &LayeredSubspace,
    x: &Local2DVector,
) -> Result<LayeredMembership, SchurError> {
    l.field.ensure_same(x.field())?;
    if x.rank() != l.rank {
        return Err(SchurError::WindowMismatch);
    }
    check_in_window(x, &l.window)?;
    let w = l.window;
    let mut x = x.drop_below_u(w.u_lo);
    loop {
        if x.is_zero() {
            return Ok(LayeredMembership::In);
        }
        let b = x.ord_t()?;
        if b >= w.t_hi - w.m_t {
            return Ok(LayeredMembership::Inconclusive);
        }
        let c = x.t_coefficient(b);
        let mut rem: SparseRow<Key1> = c.entries().clone();
        let mut comb = Local2DVector::zero(l.field, l.rank);
        for rep in &l.reps[&b] {
            if let Some(s) = c.entries().get(&rep.pivot) {
                for (k, v) in &rep.row {
                    accumulate(&mut rem, *k, -(s * v));
                }
                comb = comb.add(&rep.rep.scale(s))?;
            }
        }
        if !rem.is_empty() {
            return Ok(LayeredMembership::NotIn);
        }
        x = x.sub(&comb)?.drop_below_u(w.u_lo);
        debug_assert!(x.is_zero() || x.ord_t().unwrap() > b);
    }
}

/// A pair `(A, W)` with `A ⊂ K` containing 1 and `W ⊂ K^{⊕r}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchurPair {
    a: LayeredSubspace,
    w: LayeredSubspace,
}

impl SchurPair {
    pub fn new(a: LayeredSubspace, w: LayeredSubspace) -> Result<Self, SchurError> {
        if a.rank != 1 {
            return Err(SchurError::InvalidPair(format!("A must have rank 1, got {}", a.rank)));
        }
        if a.window != w.window {
            return Err(SchurError::InvalidPair("A and W use different windows".into()));
        }
        a.field.ensure_same(w.field)?;
        let win = a.window;
        if !win.contains(0, 0) {
            return Err(SchurError::InvalidPair("window does not contain u^0 t^0".into()));
        }
        let one = LaurentVec::unit(a.field, 1, 0, 0);
        if membership(&a.levels[&0], &one)? != Membership::In {
            return Err(SchurError::InvalidPair("1 is not in level 0 of A".into()));
        }
        Ok(SchurPair { a, w })
    }

    pub fn a(&self) -> &LayeredSubspace {
        &self.a
    }

    pub fn w(&self) -> &LayeredSubspace {
        &self.w
    }

    pub fn window(&self) -> &Window2D {
        &self.a.window
    }

    pub fn field(&self) -> Field {
        self.a.field
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelIndices {
    pub b: i64,
    #[serde(rename = "index_A")]
    pub index_a: Option<i64>,
    #[serde(rename = "index_W")]
    pub index_w: Option<i64>,
    /// Whether the level lies in the t-interior and counts for the verdict.
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchurReport {
    pub unit: bool,
    pub subalgebra: Verdict,
    pub module_closure: Verdict,
    pub fredholm: Verdict,
    pub levels: Vec<LevelIndices>,
    pub products_checked: usize,
    pub products_in_margin: usize,
    pub products_escaped: usize,
    pub failures: Vec<String>,
    pub verdict: Verdict,
}

enum Product {
    Escaped,
    InMargin,
    Check(Local2DVector),
}

fn classify(p: &Local2DVector, w: &Window2D) -> Product {
    let p = p.drop_below_u(w.u_lo);
    let mut margin = false;
    for (_, a, b, _) in p.iter_terms() {
        if b < w.t_lo || b >= w.t_hi || a >= w.u_hi {
            return Product::Escaped;
        }
        if b >= w.t_hi - w.m_t || a >= w.u_hi - w.m_u {
            margin = true;
        }
    }
    if margin {
        Product::InMargin
    } else {
        Product::Check(p)
    }
}

struct ClosureTally {
    verdict: Verdict,
    checked: usize,
    in_margin: usize,
    escaped: usize,
}

fn closure<'a>(
    target: &LayeredSubspace,
    pairs: impl Iterator<Item = (&'a Local2DElement, &'a Local2DVector)>,
    label: &str,
    failures: &mut Vec<String>,
) -> Result<ClosureTally, SchurError> {
    let mut t = ClosureTally {
        verdict: Verdict::Pass,
        checked: 0,
        in_margin: 0,
        escaped: 0,
    };
    for (x, y) in pairs {
        let p = y.mul_scalar(x)?;
        match classify(&p, &target.window) {
            Product::Escaped => {
                t.escaped += 1;
                t.verdict = t.verdict.and(Verdict::Inconclusive);
            }
            Product::InMargin => t.in_margin += 1,
            Product::Check(p) => {
                t.checked += 1;
                match layered_membership(target, &p)? {
                    LayeredMembership::In => {}
                    LayeredMembership::NotIn => {
                        t.verdict = Verdict::Fail;
                        if failures.len() < 16 {
                            failures.push(format!("{label}: ({x})·({y}) = {p} is not a member"));
                        }
                    }
                    LayeredMembership::Inconclusive => {
                        t.verdict = t.verdict.and(Verdict::Inconclusive);
                    }
                }
            }
        }
    }
    Ok(t)
}

fn level_index(level: &WindowedSubspace) -> Result<i64, FredholmError> {
    fredholm_index(level)
}

/// Checks the finite-window shadow of the Schur pair conditions.
///
/// Closure is tested on products of generators supported in the window
/// interior. Products with a term below `t_lo`, at or above `t_hi`, or at or
/// above `u_hi` have escaped the window and make the check inconclusive;
/// products reaching the top margins are counted but not tested. Fredholm
/// verdicts use the interior t-levels; all levels are reported.
pub fn check_schur_pair(p: &SchurPair) -> Result<SchurReport, SchurError> {
    let w = p.a.window;
    let mut failures = Vec::new();

    let unit = membership(&p.a.levels[&0], &LaurentVec::unit(p.a.field, 1, 0, 0))? == Membership::In;

    let a_gens: Vec<&Local2DVector> = p.a.interior_generators().collect();
    let w_gens: Vec<&Local2DVector> = p.w.interior_generators().collect();
    let a_elems: Vec<&Local2DElement> = a_gens.iter().map(|g| &g.components()[0]).collect();

    let aa = a_elems
        .iter()
        .enumerate()
        .flat_map(|(i, x)| a_gens[i..].iter().map(move |y| (*x, *y)));
    let sub = closure(&p.a, aa, "A·A", &mut failures)?;
    let aw = a_elems
        .iter()
        .flat_map(|x| w_gens.iter().map(move |y| (*x, *y)));
    let module = closure(&p.w, aw, "A·W", &mut failures)?;

    let mut subalgebra = sub.verdict;
    if !unit {
        subalgebra = Verdict::Fail;
        failures.push("1 is not in A".into());
    }

    let mut fredholm = Verdict::Pass;
    let mut levels = Vec::new();
    let interior = w.interior_levels();
    for b in w.t_lo..w.t_hi {
        let is_interior = interior.contains(&b);
        let mut index = |l: &LayeredSubspace, name: &str| match level_index(&l.levels[&b]) {
            Ok(i) => Some(i),
            Err(e) => {
                if is_interior {
                    let v = match e {
                        FredholmError::WindowTooSmall { .. } => Verdict::Inconclusive,
                        _ => Verdict::Fail,
                    };
                    fredholm = fredholm.and(v);
                    failures.push(format!("{name} level {b}: {e}"));
                }
                None
            }
        };
        let index_a = index(&p.a, "A");
        let index_w = index(&p.w, "W");
        levels.push(LevelIndices {
            b,
            index_a,
            index_w,
            interior: is_interior,
        });
    }

    let verdict = subalgebra.and(module.verdict).and(fredholm);
    Ok(SchurReport {
        unit,
        subalgebra,
        module_closure: module.verdict,
        fredholm,
        levels,
        products_checked: sub.checked + module.checked,
        products_in_margin: sub.in_margin + module.in_margin,
        products_escaped: sub.escaped + module.escaped,
        failures,
        verdict,
    })
}

/// `L(i, j)` realized as a block-diagonal windowed subspace of rank
/// `r·(j−i)`, block `b − i` being level `b`.
pub fn graded_slice(l: &LayeredSubspace, i: i64, j: i64) -> Result<WindowedSubspace, SchurError> {
    if i >= j || i < l.window.t_lo || j > l.window.t_hi {
        return Err(SchurError::Range(i, j));
    }
    let mut acc = l.levels[&i].clone();
    for b in i + 1..j {
        acc = acc.direct_sum(&l.levels[&b])?;
    }
    Ok(acc)
}

/// `dim_k(U_n(0,j) ∩ L(0,j))` where `U_n = u^{-n} k[[u]]` in every block.
pub fn hilbert_function(l: &LayeredSubspace, j: i64, n: i64) -> Result<usize, SchurError> {
    if j < 1 || n < 0 {
        return Err(SchurError::Range(0, j));
    }
    let w = l.window;
    if w.t_lo > 0 || j > w.t_hi {
        return Err(SchurError::WindowTooSmall(format!(
            "levels 0..{} are not all inside t ∈ [{}, {})",
            j - 1,
            w.t_lo,
            w.t_hi
        )));
    }
    if -n < w.u_lo {
        return Err(SchurError::WindowTooSmall(format!(
            "u^-{n} lies below u_lo = {}",
            w.u_lo
        )));
    }
    let mut total = 0;
    for b in 0..j {
        let level = &l.levels[&b];
        level.check_margin()?;
        total += level.dim_at_or_above(-n);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointIdealReport {
    /// `dims[n] = hilbert_function(L, 1, n)`.
    pub dims: Vec<usize>,
    /// `jumps[n] = dims[n] − dims[n−1]`, with `jumps[0] = dims[0]`.
    pub jumps: Vec<i64>,
    /// Degrees `n ≥ 1` whose jump differs from 1.
    pub failing_degrees: Vec<i64>,
    pub verdict: Verdict,
}

/// Checks that the degree-1 slice has colength one in every degree up to
/// `n_max`.
pub fn point_ideal_check(l: &LayeredSubspace, n_max: i64) -> Result<PointIdealReport, SchurError> {
    let dims = (0..=n_max)
        .map(|n| hilbert_function(l, 1, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut jumps = Vec::with_capacity(dims.len());
    let mut failing = Vec::new();
    for (n, d) in dims.iter().enumerate() {
        let jump = if n == 0 {
            *d as i64
        } else {
            *d as i64 - dims[n - 1] as i64
        };
        if n > 0 && jump != 1 {
            failing.push(n as i64);
        }
        jumps.push(jump);
    }
    let verdict = if failing.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(PointIdealReport {
        dims,
        jumps,
        failing_degrees: failing,
        verdict,
    })
}

/// Whether both pairs have identical echelon rows on every level.
pub fn pair_equal_in_window(p1: &SchurPair, p2: &SchurPair) -> Result<bool, SchurError> {
    if p1.window() != p2.window() || p1.w.rank != p2.w.rank || p1.field() != p2.field() {
        return Err(SchurError::WindowMismatch);
    }
    let same = |x: &LayeredSubspace, y: &LayeredSubspace| {
        x.levels
            .iter()
            .zip(y.levels.iter())
            .all(|((b1, l1), (b2, l2))| b1 == b2 && l1.rows() == l2.rows() && l1.full_below() == l2.full_below())
    };
    Ok(same(&p1.a, &p2.a) && same(&p1.w, &p2.w))
}
