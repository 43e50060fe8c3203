//! Acceptance suite. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them
//! in order.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use ribbonlab::cohomology::{cech_line_bundle, picard_dimension, ribbon_cohomology, LevelStack};
use ribbonlab::geometry::{forward_krichever, level_index_table, order_group, GeometricDatum, Kind};
use ribbonlab::schur::{hilbert_function, point_ideal_check, Verdict};
use ribbonlab::{Field, Window2D};
use serde_json::Value;

use common::props::*;

const Q: Field = Field::Rational;

fn report(name: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(why) => {
            println!("FAIL {name}: {why}");
            panic!("{name}: {why}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ribbonlab"))
        .args(args)
        .env_remove("RIBBONLAB_FIELD")
        .output()
        .expect("binary runs")
}

fn cli_json(args: &[&str]) -> Result<Value, String> {
    let out = cli(args);
    serde_json::from_slice(&out.stdout).map_err(|e| format!("{args:?}: bad JSON ({e})"))
}

/// Number of degree-`k` monomials in two variables.
fn monomials(k: i64) -> i64 {
    (k + 1).max(0)
}

/// `(h⁰, h¹)` of `O(k)` on the projective line: global sections are
/// degree-`k` forms, and `h¹(O(k)) = h⁰(O(−2−k))`.
fn line_cohomology(k: i64) -> (i64, i64) {
    (monomials(k), monomials(-2 - k))
}

fn standard_window() -> Window2D {
    Window2D::new(-4, 4, -8, 8, 2, 2).unwrap()
}

fn check_file(path: &Path) -> (i32, Duration) {
    let start = Instant::now();
    let out = cli(&["check", path.to_str().unwrap()]);
    (out.status.code().unwrap_or(-1), start.elapsed())
}

/// Adds `u¹t⁰` to `A` both as a generator and as a row of level 0.
fn inject_u1(pair: &mut Value) {
    let a = &mut pair["A"];
    a["generators"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!([{ "terms": [[1, 0, "1"]] }]));
    let level = a["levels"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|l| l["b"] == 0)
        .unwrap();
    level["space"]["rows"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!([{ "field": "Q", "coeffs": [[1, "1"]] }]));
}

#[test]
fn schur_pair_soundness() {
    let run = || -> Result<String, String> {
        let dir = tempfile::tempdir().unwrap();
        let mut slowest = Duration::ZERO;
        for m in 0..=3 {
            let path = dir.path().join(format!("p{m}.json"));
            let twist = m.to_string();
            let out = cli(&["build", "p2-line", "--twist", &twist, "--out", path.to_str().unwrap()]);
            ensure(out.status.success(), || format!("build m={m} exited {:?}", out.status.code()))?;
            let (code, took) = check_file(&path);
            ensure(code == 0, || format!("check m={m} exited {code}"))?;
            ensure(took < Duration::from_secs(10), || format!("check m={m} took {took:?}"))?;
            slowest = slowest.max(took);

            let mut pair: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
            inject_u1(&mut pair);
            let bad = dir.path().join(format!("bad{m}.json"));
            std::fs::write(&bad, pair.to_string()).unwrap();
            let (code, _) = check_file(&bad);
            ensure(code == 1, || format!("check with u^1 injected (m={m}) exited {code}"))?;
        }
        Ok(format!("m=0..3 exit 0, injected u^1 exits 1, slowest check {slowest:?}"))
    };
    report("schur-pair soundness", run());
}

#[test]
fn level_fredholm_indices() {
    let run = || -> Result<String, String> {
        let w = Window2D::new(-3, 4, -12, 12, 2, 2).unwrap();
        for m in -2..=3 {
            let table = level_index_table(&GeometricDatum::p2_line(m), &w).map_err(|e| e.to_string())?;
            for row in table {
                let (h0, h1) = line_cohomology(m - row.b);
                ensure(row.index_w == Some(h0 - h1), || {
                    format!("m={m} b={}: index_w {:?}, Euler characteristic {}", row.b, row.index_w, h0 - h1)
                })?;
            }
        }
        Ok("index_W = m - b + 1 for m in -2..=3, b in -3..4".into())
    };
    report("level Fredholm indices", run());
}

#[test]
fn hilbert_reconstruction() {
    let run = || -> Result<String, String> {
        let p = forward_krichever(&GeometricDatum::p2_line(0), &standard_window()).map_err(|e| e.to_string())?;
        let a = p.a();
        for j in 1..=2 {
            for n in 0..=6 {
                let want: i64 = (0..j).map(|b| line_cohomology(n - b).0).sum();
                let got = hilbert_function(a, j, n).map_err(|e| e.to_string())? as i64;
                ensure(got == want, || format!("j={j} n={n}: {got} vs {want}"))?;
            }
        }
        let pi = point_ideal_check(a, 6).map_err(|e| e.to_string())?;
        ensure(pi.verdict == Verdict::Pass, || format!("point ideal {pi:?}"))?;

        let v = cli_json(&["report", "hilbert", "--j", "2", "--max-n", "4"])?;
        ensure(v["table"] == serde_json::json!([1, 3, 5, 7, 9]), || format!("CLI table {}", v["table"]))?;
        Ok("j=1 gives n+1, j=2 gives 2n+1 for n<=6, point ideal jumps all 1".into())
    };
    report("Hilbert reconstruction", run());
}

#[test]
fn cohomology() {
    let run = || -> Result<String, String> {
        for d in -6..=6 {
            let got = cech_line_bundle(d, 12).map_err(|e| e.to_string())?;
            let (h0, h1) = line_cohomology(d);
            ensure(got == (h0 as usize, h1 as usize), || format!("d={d}: {got:?}"))?;
        }
        for (i, want) in [(2, (1, 1)), (5, (1, 10))] {
            let stack = LevelStack::from_datum(Q, 0, 1, i);
            let oracle = stack.twists().iter().fold((0, 0), |(a, b), &k| {
                let (h0, h1) = line_cohomology(k);
                (a + h0, b + h1)
            });
            let r = ribbon_cohomology(&stack, 12).map_err(|e| e.to_string())?;
            ensure((r.h0, r.h1) == want, || format!("i={i}: ({}, {})", r.h0, r.h1))?;
            ensure((r.h0 as i64, r.h1 as i64) == oracle, || format!("i={i}: levelwise sum {oracle:?}"))?;
            ensure(r.agrees && r.transition_surjective, || format!("i={i}: {r:?}"))?;
        }
        Ok("line bundles d=-6..6 exact; stacks i=2 -> (1,1), i=5 -> (1,10)".into())
    };
    report("cohomology", run());
}

#[test]
fn picard() {
    let run = || -> Result<String, String> {
        let mut dims = Vec::new();
        for i in 1..=5usize {
            let r = picard_dimension(&GeometricDatum::p2_line(0), i, 12).map_err(|e| e.to_string())?;
            let oracle: i64 = (1..=i as i64).map(|k| line_cohomology(-k).1).sum();
            ensure(r.dimension as i64 == oracle, || format!("i={i}: {} vs {oracle}", r.dimension))?;
            ensure(r.d == -1, || format!("i={i}: d = {}", r.d))?;
            dims.push(r.dimension);
        }
        ensure(dims == [0, 1, 3, 6, 10], || format!("{dims:?}"))?;
        Ok(format!("dimensions {dims:?}, d = -1"))
    };
    report("Picard", run());
}

/// Whether `u^a t^b` lies in the algebra of each model, and whether the
/// product of two monomials survives.
fn in_algebra(kind: &str, a: i64, b: i64) -> bool {
    match kind {
        "p2-line" => a + b <= 0,
        "even-variant" => a + b + b.rem_euclid(2) <= 0,
        _ => a <= 0,
    }
}

fn product_survives(kind: &str, b1: i64, b2: i64) -> bool {
    kind != "nilpotent" || b1 == 0 || b2 == 0
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// gcd of t-orders of monomial inverse pairs inside the window.
fn inverse_pair_search(kind: &str, w: &Window2D) -> i64 {
    let mut d = 0;
    for b in w.t_lo..w.t_hi {
        for a in w.u_lo..w.u_hi {
            let inside = w.contains(-a, -b);
            if inside && in_algebra(kind, a, b) && in_algebra(kind, -a, -b) && product_survives(kind, b, -b) {
                d = gcd(d, b);
            }
        }
    }
    d
}

#[test]
fn order_group_regimes() {
    let run = || -> Result<String, String> {
        let w = standard_window();
        let mut seen = Vec::new();
        for (name, kind, want) in [
            ("p2-line", Kind::P2Line { twist: 0 }, 1),
            ("even-variant", Kind::EvenVariant { twist: 0 }, 2),
            ("nilpotent", Kind::Nilpotent { twist: 0 }, 0),
        ] {
            let oracle = inverse_pair_search(name, &w);
            ensure(oracle == want, || format!("{name}: search oracle gives {oracle}"))?;
            let r = order_group(&GeometricDatum::new(kind, Q), &w).map_err(|e| e.to_string())?;
            ensure(r.d == want, || format!("{name}: d = {}", r.d))?;
            seen.push(format!("{name} d={}", r.d));
        }
        Ok(seen.join(", "))
    };
    report("order group", run());
}

type Poly = BTreeMap<(i64, i64), i64>;

/// Normal form in `k[x, y]/(y² − x³ − x²)` over F_101.
fn normal_form(p: &Poly) -> Poly {
    let mut work = p.clone();
    let mut out = Poly::new();
    while let Some(((i, j), c)) = work.pop_first() {
        if c.rem_euclid(101) == 0 {
            continue;
        }
        if j < 2 {
            *out.entry((i, j)).or_insert(0) += c;
        } else {
            *work.entry((i + 3, j - 2)).or_insert(0) += c;
            *work.entry((i + 2, j - 2)).or_insert(0) += c;
        }
    }
    out.retain(|_, c| c.rem_euclid(101) != 0);
    out
}

/// `dim(I ∩ deg ≤ D)` for the ideal generated by monomials `gens`, computed
/// from products with ring monomials of degree up to `D + 4`.
fn ideal_dim(gens: &[(i64, i64)], d: i64) -> usize {
    let mut elems = Vec::new();
    for &(gi, gj) in gens {
        for a in 0..=d + 4 {
            for e in 0..=1 {
                if a + e <= d + 4 {
                    elems.push(normal_form(&Poly::from([((gi + a, gj + e), 1)])));
                }
            }
        }
    }
    let keys: BTreeSet<(i64, i64)> = elems.iter().flat_map(|p| p.keys().copied()).collect();
    let all: Vec<_> = keys.iter().copied().collect();
    let high: Vec<_> = keys.iter().copied().filter(|(i, j)| i + j > d).collect();
    let dense = |cols: &[(i64, i64)]| -> Vec<Vec<i64>> {
        elems
            .iter()
            .map(|p| cols.iter().map(|k| p.get(k).copied().unwrap_or(0)).collect())
            .collect()
    };
    common::dense_rank(dense(&all)) - common::dense_rank(dense(&high))
}

#[test]
fn non_noetherian_chain() {
    let run = || -> Result<String, String> {
        let n1 = ideal_dim(&[(1, 0), (0, 1)], 8);
        let n2 = ideal_dim(&[(2, 0), (1, 1), (0, 2)], 8);
        ensure(n1 > n2, || format!("oracle: J_Q {n1}, J_Q^2 {n2}"))?;
        let v = cli_json(&["report", "demo-noncoherent", "--max-k", "5", "--degree-bound", "8"])?;
        let dims: Vec<i64> = serde_json::from_value(v["dims"].clone()).map_err(|e| e.to_string())?;
        ensure(dims.len() == 5, || format!("{dims:?}"))?;
        for pair in dims.windows(2) {
            let step = pair[1] - pair[0];
            ensure(step == (n1 - n2) as i64, || format!("{dims:?}: step {step}, oracle {}", n1 - n2))?;
        }
        ensure(v["point_ideal_dim"] == n1 && v["square_dim"] == n2, || format!("{v}"))?;
        Ok(format!("dims {dims:?}, constant step {}", n1 - n2))
    };
    report("non-Noetherian chain", run());
}

#[test]
fn property_suites() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        let cases = 1000;
        let runner = || TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        fn fail<T: std::fmt::Debug>(name: &str, e: proptest::test_runner::TestError<T>) -> String {
            format!("{name}: {e:?}")
        }
        runner()
            .run(&(case(12), any::<bool>()), |(c, full)| check_echelon(&c, full))
            .map_err(|e| fail("echelon idempotence", e))?;
        runner()
            .run(&case_with_vector(12), |(c, v, full)| check_membership(&c, &v, full))
            .map_err(|e| fail("membership", e))?;
        runner()
            .run(&case(16), |c| check_index(&c))
            .map_err(|e| fail("index count", e))?;
        runner()
            .run(&(case_with_vector(12), 0i64..6, 0i64..6), |((c, v, full), dl, dh)| {
                check_enlargement(&c, &v, full, dl, dh)
            })
            .map_err(|e| fail("enlargement", e))?;
        runner()
            .run(&(element(-4, 5, 5), element(-4, 5, 5)), |(x, y)| check_ord_t(&x, &y))
            .map_err(|e| fail("ord_t additivity", e))?;
        runner()
            .run(&(-10i64..=10), check_serre)
            .map_err(|e| fail("Serre duality", e))?;
        Ok(format!("6 suites x {cases} cases in {:?}", start.elapsed()))
    };
    report("property suites", run());
}
