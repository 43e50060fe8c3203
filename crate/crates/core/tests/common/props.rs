//! Strategies and property checks shared by the property suite and the
//! acceptance target.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use ribbonlab::cohomology::cech_line_bundle_over;
use ribbonlab::fredholm::echelonize;
use ribbonlab::local2d::truncate;
use ribbonlab::schur::{graded_slice, layered_membership, LayeredMembership, LayeredSubspace};
use ribbonlab::{
    fredholm_index, membership, LaurentVec, Local2DElement, Local2DVector, Membership, Scalar,
    Window2D, WindowedSubspace,
};

use super::{coords, dense, dense2, dense_rank, fp};

type Check = Result<(), TestCaseError>;

#[derive(Clone, Debug)]
pub struct Case {
    pub r: usize,
    pub u_lo: i64,
    pub u_hi: i64,
    pub rows: Vec<LaurentVec>,
}

impl Case {
    pub fn subspace(&self, full_below: bool) -> WindowedSubspace {
        echelonize(fp(), self.rows.clone(), self.r, self.u_lo, self.u_hi, full_below).unwrap()
    }
}

pub fn vec_in(r: usize, lo: i64, hi: i64, max_terms: usize) -> impl Strategy<Value = LaurentVec> {
    prop::collection::vec((0..r, lo..hi, 1i64..101), 0..=max_terms).prop_map(move |ts| {
        LaurentVec::from_entries(
            fp(),
            r,
            ts.into_iter().map(|(c, e, v)| ((c, e), Scalar::from_i64(fp(), v))),
        )
        .unwrap()
    })
}

pub fn case(max_width: i64) -> impl Strategy<Value = Case> {
    (1usize..=3, -8i64..=4, 1..=max_width).prop_flat_map(|(r, u_lo, width)| {
        let u_hi = u_lo + width;
        prop::collection::vec(vec_in(r, u_lo, u_hi, 4), 0..=6).prop_map(move |rows| Case {
            r,
            u_lo,
            u_hi,
            rows,
        })
    })
}

pub fn case_with_vector(max_width: i64) -> impl Strategy<Value = (Case, LaurentVec, bool)> {
    case(max_width).prop_flat_map(|c| {
        let (r, lo, hi) = (c.r, c.u_lo, c.u_hi);
        let rows = c.rows.clone();
        // Half the probes are combinations of the rows, which are members.
        let combo = prop::collection::vec(0i64..101, rows.len()).prop_map(move |cs| {
            rows.iter().zip(cs).fold(LaurentVec::zero(fp(), r), |acc, (v, k)| {
                acc.add(&v.scale(&Scalar::from_i64(fp(), k))).unwrap()
            })
        });
        let probe = prop_oneof![vec_in(r, lo, hi, 4), combo];
        (Just(c), probe, any::<bool>())
    })
}

pub fn element(lo: i64, hi: i64, max_terms: usize) -> impl Strategy<Value = Local2DElement> {
    prop::collection::vec((lo..hi, lo..hi, 1i64..101), 0..=max_terms).prop_map(|ts| {
        Local2DElement::from_terms(
            fp(),
            ts.into_iter().map(|(a, b, c)| ((a, b), Scalar::from_i64(fp(), c))),
        )
        .unwrap()
    })
}

/// Index of `span(rows) + (everything below u_lo)` by explicit counting.
pub fn brute_index(c: &Case) -> i64 {
    let low = c.u_lo.min(0);
    let high = c.u_hi.max(0);
    let mut s = c.rows.clone();
    for comp in 0..c.r {
        for e in low..c.u_lo {
            s.push(LaurentVec::unit(fp(), c.r, comp, e));
        }
    }
    let all = coords(c.r, low, high);
    let neg = coords(c.r, low, 0);
    let dim_s = dense_rank(s.iter().map(|v| dense(v, &all)).collect());
    let rank_neg = dense_rank(s.iter().map(|v| dense(v, &neg)).collect());
    let kernel = dim_s as i64 - rank_neg as i64;
    let coker = c.r as i64 * -low - rank_neg as i64;
    kernel - coker
}

pub fn brute_member(c: &Case, v: &LaurentVec) -> bool {
    let cs = coords(c.r, c.u_lo, c.u_hi);
    let mut m: Vec<Vec<i64>> = c.rows.iter().map(|x| dense(x, &cs)).collect();
    let before = dense_rank(m.clone());
    m.push(dense(v, &cs));
    dense_rank(m) == before
}

pub fn layered_case() -> impl Strategy<Value = (Window2D, usize, Vec<Local2DVector>, Local2DVector)> {
    (1usize..=2, 0i64..=1).prop_flat_map(|(r, m_t)| {
        let w = Window2D::new(-1, 3, -2, 3, m_t, 0).unwrap();
        let term = (0..r, w.u_lo..w.u_hi, w.t_lo..w.t_hi, 1i64..101);
        let vector = move |ts: Vec<(usize, i64, i64, i64)>| {
            let mut comps = vec![Local2DElement::zero(fp()); r];
            for (c, a, b, v) in ts {
                let m = Local2DElement::monomial(fp(), a, b, Scalar::from_i64(fp(), v));
                comps[c] = comps[c].add(&m).unwrap();
            }
            Local2DVector::from_components(fp(), comps).unwrap()
        };
        let gens = prop::collection::vec(prop::collection::vec(term.clone(), 1..=3).prop_map(vector), 0..=5);
        gens.prop_flat_map(move |gens| {
            let g2 = gens.clone();
            let combo = prop::collection::vec(0i64..101, gens.len()).prop_map(move |cs| {
                g2.iter().zip(cs).fold(Local2DVector::zero(fp(), r), |acc, (g, k)| {
                    acc.add(&g.scale(&Scalar::from_i64(fp(), k))).unwrap()
                })
            });
            let probe = prop_oneof![prop::collection::vec(term.clone(), 0..=3).prop_map(vector), combo];
            (Just(w), Just(r), Just(gens), probe)
        })
    })
}

fn cells(r: usize, w: &Window2D) -> Vec<(usize, i64, i64)> {
    let mut out = Vec::new();
    for c in 0..r {
        for b in w.t_lo..w.t_hi {
            for a in w.u_lo..w.u_hi {
                out.push((c, a, b));
            }
        }
    }
    out
}

pub fn check_echelon(c: &Case, full: bool) -> Check {
    let w = c.subspace(full);
    let again = echelonize(fp(), w.rows().to_vec(), c.r, c.u_lo, c.u_hi, full).unwrap();
    prop_assert_eq!(w.rows(), again.rows());

    let cs = coords(c.r, c.u_lo, c.u_hi);
    let orig = dense_rank(c.rows.iter().map(|v| dense(v, &cs)).collect());
    let ech = dense_rank(w.rows().iter().map(|v| dense(v, &cs)).collect());
    let both = dense_rank(c.rows.iter().chain(w.rows()).map(|v| dense(v, &cs)).collect());
    prop_assert_eq!(orig, w.dim_in_window());
    prop_assert_eq!(ech, orig);
    prop_assert_eq!(both, orig);
    Ok(())
}

pub fn check_membership(c: &Case, v: &LaurentVec, full: bool) -> Check {
    let got = membership(&c.subspace(full), v).unwrap();
    prop_assert_eq!(got == Membership::In, brute_member(c, v));
    Ok(())
}

pub fn check_index(c: &Case) -> Check {
    prop_assert_eq!(fredholm_index(&c.subspace(true)).unwrap(), brute_index(c));
    Ok(())
}

pub fn check_enlargement(c: &Case, v: &LaurentVec, full: bool, dl: i64, dh: i64) -> Check {
    let w = c.subspace(full);
    let big = w.enlarge(c.u_lo - dl, c.u_hi + dh).unwrap();
    prop_assert_eq!(membership(&w, v).unwrap(), membership(&big, v).unwrap());
    if full {
        prop_assert_eq!(fredholm_index(&w).unwrap(), fredholm_index(&big).unwrap());
    }
    Ok(())
}

pub fn check_ord_t(x: &Local2DElement, y: &Local2DElement) -> Check {
    if x.is_zero() || y.is_zero() {
        prop_assert!(x.mul(y).unwrap().is_zero());
        return Ok(());
    }
    let xy = x.mul(y).unwrap();
    prop_assert_eq!(xy.ord_t().unwrap(), x.ord_t().unwrap() + y.ord_t().unwrap());
    Ok(())
}

pub fn check_serre(d: i64) -> Check {
    let bound = d.abs().max((d + 2).abs()) + 2;
    let (h0, h1) = cech_line_bundle_over(fp(), d, bound).unwrap();
    let (k0, k1) = cech_line_bundle_over(fp(), -2 - d, bound).unwrap();
    prop_assert_eq!((h0, h1), (k1, k0));
    prop_assert_eq!(h0 as i64, (d + 1).max(0));
    prop_assert_eq!(h1 as i64, (-d - 1).max(0));
    Ok(())
}

pub fn check_direct_sum(c: &Case, rows2: Vec<LaurentVec>) -> Check {
    let rows2: Vec<LaurentVec> = rows2
        .into_iter()
        .map(|v| {
            LaurentVec::from_entries(
                fp(),
                2,
                v.entries()
                    .iter()
                    .filter(|((_, e), _)| *e >= c.u_lo && *e < c.u_hi)
                    .map(|(k, s)| (*k, s.clone())),
            )
            .unwrap()
        })
        .collect();
    let w1 = c.subspace(true);
    let w2 = echelonize(fp(), rows2, 2, c.u_lo, c.u_hi, true).unwrap();
    let sum = w1.direct_sum(&w2).unwrap();
    prop_assert_eq!(
        fredholm_index(&sum).unwrap(),
        fredholm_index(&w1).unwrap() + fredholm_index(&w2).unwrap()
    );
    Ok(())
}

pub fn check_ring_axioms(x: &Local2DElement, y: &Local2DElement, z: &Local2DElement) -> Check {
    let one = Local2DElement::one(fp());
    prop_assert_eq!(&x.mul(&one).unwrap(), x);
    prop_assert_eq!(x.mul(y).unwrap(), y.mul(x).unwrap());
    prop_assert_eq!(
        x.mul(y).unwrap().mul(z).unwrap(),
        x.mul(&y.mul(z).unwrap()).unwrap()
    );
    prop_assert_eq!(
        x.mul(&y.add(z).unwrap()).unwrap(),
        x.mul(y).unwrap().add(&x.mul(z).unwrap()).unwrap()
    );
    prop_assert!(x.sub(x).unwrap().is_zero());
    Ok(())
}

pub fn check_truncation(x: &Local2DElement, y: &Local2DElement, n: i64) -> Check {
    let w = Window2D::new(0, n, 0, n, 0, 0).unwrap();
    let (tx, _) = truncate(x, &w);
    prop_assert_eq!(truncate(&tx, &w), (tx.clone(), false));
    // For power series the truncated product only sees truncated factors.
    let (ty, _) = truncate(y, &w);
    let lhs = truncate(&x.mul(y).unwrap(), &w).0;
    let rhs = truncate(&tx.mul(&ty).unwrap(), &w).0;
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

pub fn check_layered(w: &Window2D, r: usize, gens: &[Local2DVector], x: &Local2DVector) -> Check {
    let l = LayeredSubspace::from_generators(fp(), r, *w, gens.to_vec()).unwrap();
    let cs = cells(r, w);
    let mut m: Vec<Vec<i64>> = gens.iter().map(|g| dense2(g, &cs)).collect();
    let before = dense_rank(m.clone());
    m.push(dense2(x, &cs));
    let member = dense_rank(m) == before;
    match layered_membership(&l, x).unwrap() {
        LayeredMembership::In => prop_assert!(member),
        LayeredMembership::NotIn => prop_assert!(!member),
        LayeredMembership::Inconclusive => prop_assert!(w.m_t > 0),
    }
    Ok(())
}

pub fn check_slices(w: &Window2D, r: usize, gens: &[Local2DVector], ijk: &[i64]) -> Check {
    let (i, j, k) = (ijk[0], ijk[1], ijk[2]);
    let l = LayeredSubspace::from_generators(fp(), r, *w, gens.to_vec()).unwrap();
    let outer = graded_slice(&l, i, k).unwrap();
    let left = graded_slice(&l, i, j).unwrap();
    let right = graded_slice(&l, j, k).unwrap();
    prop_assert_eq!(outer.rank(), left.rank() + right.rank());
    prop_assert_eq!(outer.dim_in_window(), left.dim_in_window() + right.dim_in_window());
    prop_assert_eq!(
        fredholm_index(&outer).unwrap(),
        fredholm_index(&left).unwrap() + fredholm_index(&right).unwrap()
    );
    Ok(())
}
