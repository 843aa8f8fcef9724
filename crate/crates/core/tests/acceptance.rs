//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Built with `harness = false` so the lines show up in `cargo test` output.
//! The process exits non-zero if any criterion fails that is not listed in
//! `KNOWN_FAILURES`.

#![allow(clippy::approx_constant)]

use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

use orbit_height::certify::{
    bundled_table, estimate_optimal_d, ordered_orbits, parse_table, verify_table_row, CertConfig,
    GapFn, PhiSet, RowReport, Status, TableRowSpec,
};
use orbit_height::expr::parse_poly;
use orbit_height::heights::{
    mahler_measure, mahler_orbit_product, orbit_height, weil_height, AlgebraicNumber,
};
use orbit_height::mobius::{FiniteGroup, MobiusMap};
use orbit_height::numth::QuadPoint;
use orbit_height::orbits::{compute_o, height_zeros, is_o_infinite, special_points, OrbitSetO};
use orbit_height::poly::{cyclotomic, Poly};
use orbit_height::real::{Dyadic, Interval};
use orbit_height::search::{min_orbit_height, SearchSpace};

const PREC: u64 = 128;

/// Criteria that fail as specified. Table 2 row 1 with B1 = B2 = 1/2 gives a
/// gap that is unbounded below near z = 1 and z = -1.
const KNOWN_FAILURES: &[u32] = &[8];

struct Outcome {
    id: u32,
    pass: bool,
}

type Verdict = (bool, String);

fn criterion(id: u32, name: &str, budget: f64, f: impl FnOnce() -> Verdict) -> Outcome {
    let t = Instant::now();
    let (ok, detail) = f();
    let secs = t.elapsed().as_secs_f64();
    let in_time = secs <= budget;
    let pass = ok && in_time;
    let tag = if pass { "PASS" } else { "FAIL" };
    let late = if in_time { "" } else { ", over budget" };
    println!("[{tag}] {id:>2} {name}: {detail} ({secs:.2} s of {budget} s{late})");
    Outcome { id, pass }
}

fn group(s: &str) -> FiniteGroup {
    FiniteGroup::parse(s).unwrap()
}

fn poly(s: &str) -> Poly {
    parse_poly(s).unwrap()
}

fn weight(x: f64) -> Interval {
    Interval::point(Dyadic::from_f64(x))
}

fn near(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn rows(name: &str) -> Vec<TableRowSpec> {
    parse_table(bundled_table(name).unwrap()).unwrap()
}

fn row(rows: &[TableRowSpec], index: u32) -> &TableRowSpec {
    rows.iter().find(|r| r.index == index).unwrap()
}

/// Witness check passed, or was skipped because its divisibility condition
/// does not hold for this p/q.
fn witness_ok(r: &RowReport) -> bool {
    r.check("witness").is_some_and(|c| c.status != Status::Fail)
}

/// D estimate for a one-weight phi built on the orbit of 0.
fn one_weight_estimate(g: &FiniteGroup, b: f64) -> f64 {
    let os = ordered_orbits(g).unwrap();
    let phi = PhiSet::from_orbits(g, &os, vec![weight(b)]).unwrap();
    estimate_optimal_d(g, &phi, &CertConfig::default()).0
}

fn c1() -> Verdict {
    let m = mahler_measure(&poly("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1"), PREC).unwrap();
    (m.near(1.1762808, 1e-6), format!("M = {}", m.to_decimal(12)))
}

fn c2() -> Verdict {
    let g = group("-1,1;0,1");
    let r = min_orbit_height(&g, &SearchSpace::new(4, 2, false).unwrap(), PREC).unwrap();
    let ok = r.min.near(0.2406059, 1e-6) && r.witness == poly("x^4-x^3+x^2-x+1");
    (ok, format!("min {} at {}", r.min.to_decimal(10), r.witness))
}

fn c3() -> Verdict {
    let g = group("0,1;-1,1");
    let d = one_weight_estimate(&g, 0.11724);
    let a = AlgebraicNumber::maximal_root(&poly("(x^2-x+1)^3-(x^2-x)^2"), PREC).unwrap();
    let log_abs = a.value().unwrap().norm().ln();
    let ok = near(d, 0.4217993, 1e-4) && near(log_abs, 0.4217993, 1e-6) && near(log_abs, d, 1e-4);
    (ok, format!("D ~ {d:.8}, log|alpha| = {log_abs:.10}"))
}

fn c4() -> Verdict {
    let g = group("1,1;-1,1");
    let d = one_weight_estimate(&g, 0.19408);
    let a = AlgebraicNumber::maximal_root(&poly("(x^2+1)^4+x^2*(x^2-1)^2"), PREC).unwrap();
    let h = orbit_height(&g, &a, PREC).unwrap();
    let log_abs = a.value().unwrap().norm().ln();
    let ok = near(d, 0.7328576, 1e-4) && h.near(log_abs, 1e-9) && h.near(0.7328576, 1e-6);
    (
        ok,
        format!(
            "D ~ {d:.8}, h_G(alpha) = {}, log|alpha| = {log_abs:.12}",
            h.to_decimal(12)
        ),
    )
}

fn c5() -> Verdict {
    let d = one_weight_estimate(&group("2,-1;1,1"), 0.30503);
    (near(d, 1.75737, 1e-4), format!("D ~ {d:.8}"))
}

fn c6() -> Verdict {
    let t = rows("table1");
    let cfg = CertConfig::default();
    let want = [
        (1, 1.38629),
        (2, 0.69315),
        (3, 0.69315),
        (4, 1.60944),
        (5, 1.09861),
        (7, 0.84730),
    ];
    let mut ok = true;
    let mut parts = vec![];
    for (i, d) in want {
        let r = verify_table_row(row(&t, i), 1, 5, 1, &cfg).unwrap();
        let got = r.d_formula.unwrap_or(f64::NAN);
        let good = r.pass && near(got, d, 1e-4) && witness_ok(&r);
        ok &= good;
        parts.push(format!(
            "row {i} D={got:.5}{}",
            if good { "" } else { " FAIL" }
        ));
    }
    (ok, parts.join(", "))
}

fn c7() -> Verdict {
    let g = group("1,-1;3,1");
    let f = poly("x^2+1");
    let prod = mahler_orbit_product(&g, &f, PREC).unwrap();
    let h = orbit_height(&g, &AlgebraicNumber::from_minpoly(&f).unwrap(), PREC).unwrap();
    let ok = prod.contains(&Dyadic::from_int(25))
        && prod.width_f64() < 1e-20
        && h.near(5f64.ln(), 1e-15);
    (
        ok,
        format!(
            "product = {} (width {:e}), h_G(i) = {}",
            prod.to_decimal(25),
            prod.width_f64(),
            h.to_decimal(15)
        ),
    )
}

fn c8() -> Verdict {
    let t = rows("table2");
    let cfg = CertConfig::default();
    let want = [(1, -1, 0.24061), (2, 1, 0.54931), (3, 1, 0.24061)];
    let mut ok = true;
    let mut parts = vec![];
    for (i, sign, d) in want {
        let r = verify_table_row(row(&t, i), sign, 5, 1, &cfg).unwrap();
        let est = r.d_estimate.unwrap_or(f64::NAN);
        let good = r.pass && near(r.d_formula.unwrap_or(f64::NAN), d, 1e-4) && witness_ok(&r);
        ok &= good;
        let failed: Vec<&str> = r
            .checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.name.as_str())
            .collect();
        let note = if good {
            String::new()
        } else {
            format!(" FAIL [{}]", failed.join(" "))
        };
        parts.push(format!("row {i} D~{est:.5}{note}"));
    }
    (ok, parts.join(", "))
}

fn c9() -> Verdict {
    let d3 = group("1,-1;3,1 | 1,0;0,-1");
    let r = min_orbit_height(&d3, &SearchSpace::new(2, 5, false).unwrap(), PREC).unwrap();
    let d3_ok = r.min.near(25f64.ln(), 1e-6) && r.witness == poly("x^2+1");
    let d2 = group("1,-1;0,-1 | 1,1;2,-1");
    let h = orbit_height(&d2, &AlgebraicNumber::from_quad(&QuadPoint::int(-1)), PREC).unwrap();
    let s = min_orbit_height(&d2, &SearchSpace::new(3, 3, false).unwrap(), PREC).unwrap();
    let d2_ok = h.near(2f64.ln(), 1e-9) && s.min.lo_f64() >= 2f64.ln() - 1e-4;
    (
        d3_ok && d2_ok,
        format!(
            "D3 min {} at {}; D2 h_G(-1) = {}, min {} at {}",
            r.min.to_decimal(10),
            r.witness,
            h.to_decimal(12),
            s.min.to_decimal(10),
            s.witness
        ),
    )
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn rel_close(a: &Interval, b: &Interval, tol: f64) -> bool {
    let (x, y) = (a.mid_f64(), b.mid_f64());
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0) + a.width_f64() + b.width_f64()
}

fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(-6i64..=6, 2..=max_deg + 1)
        .prop_map(|c| Poly::from_i64(&c))
        .prop_filter("degree >= 1", |f| f.degree() >= 1)
}

fn arb_map() -> impl Strategy<Value = MobiusMap> {
    (-6i64..=6, -6i64..=6, -6i64..=6, -6i64..=6)
        .prop_filter("nonsingular", |(a, b, c, d)| a * d != b * c)
        .prop_map(|(a, b, c, d)| MobiusMap::from_i64(a, b, c, d).unwrap())
}

/// Subgroups generated by elements of shape (a,b;-b,-a) and by z -> 1/z.
fn fingrps_subgroup() -> impl Strategy<Value = FiniteGroup> {
    (-9i64..=9, -9i64..=9, 0usize..4).prop_filter_map("a^2 != b^2", |(a, b, k)| {
        if a * a == b * b {
            return None;
        }
        let m = MobiusMap::from_i64(a, b, -b, -a).ok()?;
        let s = MobiusMap::from_i64(0, 1, 1, 0).ok()?;
        let gens = match k {
            0 => vec![m],
            1 => vec![MobiusMap::from_i64(b, a, -a, -b).ok()?],
            2 => vec![s],
            _ => vec![m, s],
        };
        FiniteGroup::generate(&gens).ok()
    })
}

/// Every group in both tables at p/q = 5, both signs.
fn table_groups() -> Vec<FiniteGroup> {
    [
        "1,0;5,-1",
        "1,1;5,-1",
        "1,-1;5,-1",
        "1,5;7,-1",
        "1,5;3,-1",
        "1,-1;3,1",
        "1,5;5,-1",
        "1,1;-1,1",
        "1,5;6,-1",
        "1,5;4,-1",
        "0,1;-1,1",
        "0,1;-1,-1",
        "2,-1;1,1",
        "2,1;-1,1",
        "1,0;1,-1",
        "1,0;-1,-1",
        "1,0;2,-1",
        "1,0;-2,-1",
        "1,-1;0,-1",
        "1,1;0,-1",
        "1,-1;-1,-1",
        "1,1;1,-1",
        "1,-1;-2,-1",
        "1,1;2,-1",
        "1,-1;-3,-1",
        "1,1;3,-1",
    ]
    .iter()
    .map(|s| group(s))
    .collect()
}

fn kronecker() -> std::result::Result<(), String> {
    for m in 1..=30 {
        let a = AlgebraicNumber::from_minpoly(&cyclotomic(m)).unwrap();
        let h = weil_height(&a, PREC).unwrap();
        if !(h.is_exact() && h.contains_zero()) {
            return Err(format!("h(Phi_{m}) = {}", h.to_decimal(20)));
        }
    }
    Ok(())
}

fn mahler_props() -> std::result::Result<(), String> {
    runner(500)
        .run(&(arb_poly(4), arb_poly(4)), |(f, g)| {
            let m = mahler_measure(&f.mul(&g), 96).unwrap();
            let mm = mahler_measure(&f, 96)
                .unwrap()
                .mul(&mahler_measure(&g, 96).unwrap());
            prop_assert!(rel_close(&m, &mm, 1e-10));
            let m2 = mahler_measure(&f.graeffe(), 96).unwrap();
            let mf = mahler_measure(&f, 96).unwrap();
            prop_assert!(rel_close(&mf.mul(&mf), &m2, 1e-10));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn group_props() -> std::result::Result<(), String> {
    runner(500)
        .run(
            &(arb_map(), arb_map(), arb_map(), arb_poly(4)),
            |(s, t, u, f)| {
                prop_assert_eq!(s.compose(&t).compose(&u), s.compose(&t.compose(&u)));
                prop_assert!(s.compose(&s.inverse()).is_identity());
                prop_assert_eq!(s.compose(&MobiusMap::identity()), s.clone());
                prop_assert_eq!(s.compose(&t).inverse(), t.inverse().compose(&s.inverse()));
                if let Ok(g) = s.pullback_minpoly(&f) {
                    prop_assert_eq!(s.inverse().pullback_minpoly(&g).unwrap(), f.normalized());
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

fn fingrps_props() -> std::result::Result<(), String> {
    runner(50)
        .run(&fingrps_subgroup(), |g| {
            prop_assert!(is_o_infinite(&g));
            prop_assert_eq!(compute_o(&g), OrbitSetO::Infinite);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn gap_invariance(groups: &[FiniteGroup]) -> std::result::Result<(), String> {
    for g in groups {
        let os = ordered_orbits(g).map_err(|e| e.to_string())?;
        let phi = PhiSet::from_orbits(g, &os, os.iter().map(|_| weight(0.1)).collect()).unwrap();
        let f = GapFn::new(g, &phi);
        runner(100)
            .run(&(-3.0f64..3.0, -3.0f64..3.0), |(re, im)| {
                let z = Complex64::new(re, im);
                let v = f.eval(z);
                prop_assume!(v.is_finite() && v.abs() < 1e6);
                for s in g.elements() {
                    if let Some(sz) = s.apply_complex(z) {
                        let u = f.eval(sz);
                        prop_assert!(
                            (u - v).abs() < 1e-10 * v.abs().max(1.0),
                            "{} vs {} in {}",
                            u,
                            v,
                            g
                        );
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn zeros_exact(groups: &[FiniteGroup]) -> std::result::Result<(), String> {
    for g in groups {
        let zs = height_zeros(g).map_err(|e| e.to_string())?;
        for p in special_points() {
            let h = orbit_height(g, &AlgebraicNumber::from_quad(&p), PREC).unwrap();
            let zero = h.is_exact() && h.contains_zero();
            if zs.contains(&p) != zero || (!zero && !h.is_positive()) {
                return Err(format!("{g}: h_G({p}) = {}", h.to_decimal(20)));
            }
        }
    }
    Ok(())
}

fn c10() -> Verdict {
    let groups = table_groups();
    let suites: Vec<(&str, std::result::Result<(), String>)> = vec![
        ("kronecker", kronecker()),
        ("mahler", mahler_props()),
        ("group", group_props()),
        ("fingrps", fingrps_props()),
        ("gap", gap_invariance(&groups)),
        ("zeros", zeros_exact(&groups)),
    ];
    let ok = suites.iter().all(|(_, r)| r.is_ok());
    let detail = suites
        .iter()
        .map(|(n, r)| match r {
            Ok(()) => format!("{n} ok"),
            Err(e) => format!("{n} FAILED: {e}"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    (ok, detail)
}

fn main() {
    let outcomes = vec![
        criterion(1, "Lehmer measure", 1.0, c1),
        criterion(2, "{z, 1-z} search", 30.0, c2),
        criterion(3, "C3 constant", 30.0, c3),
        criterion(4, "C4 constant", 60.0, c4),
        criterion(5, "C6 constant", 60.0, c5),
        criterion(6, "table 1 at p/q = 5", 120.0, c6),
        criterion(7, "exact h_G(i) = log 5", 1.0, c7),
        criterion(8, "table 2 rows 1-3", 120.0, c8),
        criterion(9, "dihedral examples", 120.0, c9),
        criterion(10, "property suites", 300.0, c10),
    ];
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    let mut unexpected = false;
    for o in &outcomes {
        let known = KNOWN_FAILURES.contains(&o.id);
        if !o.pass && known {
            println!("criterion {} failed as documented", o.id);
        }
        if o.pass && known {
            println!("criterion {} now passes; drop it from KNOWN_FAILURES", o.id);
            unexpected = true;
        }
        unexpected |= !o.pass && !known;
    }
    if unexpected {
        std::process::exit(1);
    }
}
