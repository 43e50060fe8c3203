//! Independent oracles shared by the integration tests: dense Gaussian
//! elimination modulo a small prime, written without the library's sparse
//! echelon code.

#![allow(dead_code)]

pub mod props;

use ribbonlab::{Field, LaurentVec, Local2DVector, Scalar};

pub const P: u32 = 101;

pub fn fp() -> Field {
    Field::prime(P as u64).unwrap()
}

pub fn residue(s: &Scalar) -> i64 {
    match s {
        Scalar::Mod { v, .. } => *v as i64,
        Scalar::Rational(_) => panic!("oracle works over F_p"),
    }
}

fn inv_mod(a: i64, p: i64) -> i64 {
    let mut r = 1;
    let mut b = a.rem_euclid(p);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Rank of a dense matrix over `F_P`.
pub fn dense_rank(mut m: Vec<Vec<i64>>) -> usize {
    let p = P as i64;
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c].rem_euclid(p) != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][c], p);
        for x in m[rank].iter_mut() {
            *x = (*x * inv).rem_euclid(p);
        }
        for i in 0..m.len() {
            if i != rank && m[i][c].rem_euclid(p) != 0 {
                let f = m[i][c];
                let pivot_row = m[rank].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = (*x - f * y).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dense coordinates of `v` over the `(component, exponent)` list `coords`;
/// entries outside the list are ignored.
pub fn dense(v: &LaurentVec, coords: &[(usize, i64)]) -> Vec<i64> {
    coords
        .iter()
        .map(|k| v.entries().get(k).map(residue).unwrap_or(0))
        .collect()
}

pub fn dense2(v: &Local2DVector, coords: &[(usize, i64, i64)]) -> Vec<i64> {
    coords
        .iter()
        .map(|&(c, a, b)| {
            v.components()[c]
                .terms()
                .get(&(b, a))
                .map(residue)
                .unwrap_or(0)
        })
        .collect()
}

/// All `(component, exponent)` pairs with exponent in `lo..hi`.
pub fn coords(r: usize, lo: i64, hi: i64) -> Vec<(usize, i64)> {
    (0..r).flat_map(|c| (lo..hi).map(move |e| (c, e))).collect()
}
