//! Irreducibility over Q and factorization of small-degree integer polynomials.
//!
//! Distinct-degree patterns modulo a few primes restrict the degrees a
//! rational factor can have; often no degree survives. Otherwise candidate
//! factors are formed from subsets of the complex roots (closed under
//! conjugation), rounded to integers, and confirmed by exact division.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};

use super::modp::{ddf_pattern, possible_degrees};
use super::Poly;
use crate::error::{Error, Result};
use crate::roots::complex_roots;

const PRIMES: [u64; 24] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

fn factor_degree_mask(f: &Poly) -> Vec<bool> {
    let n = f.degree();
    let mut mask = vec![true; n + 1];
    let mut used = 0;
    for &p in PRIMES.iter() {
        if let Some(pat) = ddf_pattern(f, p) {
            let r = possible_degrees(&pat, n);
            for (m, ok) in mask.iter_mut().zip(r) {
                *m &= ok;
            }
            used += 1;
            if (1..n).all(|d| !mask[d]) || used >= 8 {
                break;
            }
        }
    }
    mask
}

/// Roots grouped into real roots and conjugate pairs: each group is one
/// "unit" of a rational factor.
fn root_units(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut used = vec![false; roots.len()];
    let mut units = Vec::new();
    let tol = |z: Complex64| 1e-9 * z.norm().max(1.0);
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = roots[i];
        if z.im.abs() <= tol(z) {
            units.push(vec![z]);
            continue;
        }
        let partner = (0..roots.len()).filter(|&j| !used[j]).min_by(|&a, &b| {
            (roots[a] - z.conj())
                .norm()
                .partial_cmp(&(roots[b] - z.conj()).norm())
                .unwrap()
        });
        match partner {
            Some(j) => {
                used[j] = true;
                units.push(vec![z, roots[j]]);
            }
            None => units.push(vec![z]),
        }
    }
    units
}

fn candidate_from_roots(lead: f64, roots: &[Complex64]) -> Option<Poly> {
    let mut c = vec![Complex64::new(lead, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        c = next;
    }
    let mut out = Vec::with_capacity(c.len());
    for a in c {
        let k = a.re.round();
        // loose acceptance; exact division decides
        if (a.re - k).abs() > 0.25 || !k.is_finite() || k.abs() > 9e15 {
            return None;
        }
        out.push(BigInt::from(k as i64));
    }
    Some(Poly::new(out).normalized())
}

/// A nontrivial factor of the squarefree primitive `f`, if one exists, of
/// degree allowed by `mask`.
fn find_factor(f: &Poly, mask: &[bool]) -> Result<Option<Poly>> {
    let n = f.degree();
    let roots: Vec<Complex64> = complex_roots(f, 96)?.iter().map(|d| d.center()).collect();
    let units = root_units(&roots);
    let lead = f.lead().abs().to_f64().unwrap_or(f64::INFINITY);
    let m = units.len();
    // depth-first over unit subsets; degree of a subset is the number of roots
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, vec![], 0)];
    while let Some((start, chosen, deg)) = stack.pop() {
        if deg >= 1 && deg <= n / 2 && mask[deg] {
            let rs: Vec<Complex64> = chosen.iter().flat_map(|&u| units[u].clone()).collect();
            if let Some(g) = candidate_from_roots(lead, &rs) {
                if g.degree() == deg && g.divides(f) {
                    return Ok(Some(g));
                }
            }
        }
        for (u, unit) in units.iter().enumerate().take(m).skip(start) {
            let d = deg + unit.len();
            if d <= n / 2 {
                let mut c = chosen.clone();
                c.push(u);
                stack.push((u + 1, c, d));
            }
        }
    }
    Ok(None)
}

/// True iff the primitive polynomial `f` of degree at least one is
/// irreducible over Q.
pub fn is_irreducible(f: &Poly) -> Result<bool> {
    if f.degree() < 1 {
        return Err(Error::ConstantPolynomial);
    }
    if !f.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let n = f.degree();
    if n == 1 {
        return Ok(true);
    }
    if f.coeff(0) == BigInt::from(0) || !f.is_squarefree() {
        return Ok(false);
    }
    let mask = factor_degree_mask(f);
    if (1..n).all(|d| !mask[d]) {
        return Ok(true);
    }
    Ok(find_factor(f, &mask)?.is_none())
}

fn split_squarefree(f: &Poly, out: &mut Vec<Poly>) -> Result<()> {
    if f.degree() < 1 {
        return Ok(());
    }
    let (k, g) = f.strip_x();
    for _ in 0..k {
        out.push(Poly::x());
    }
    if g.degree() < 1 {
        return Ok(());
    }
    if g.degree() == 1 {
        out.push(g.normalized());
        return Ok(());
    }
    let mask = factor_degree_mask(&g);
    match find_factor(&g, &mask)? {
        Some(h) => {
            let q = g.div_exact(&h).expect("factor divides");
            split_squarefree(&h, out)?;
            split_squarefree(&q, out)
        }
        None => {
            out.push(g.normalized());
            Ok(())
        }
    }
}

/// Factorization `f = ± content * prod p_i^{e_i}` with irreducible primitive
/// `p_i` of positive leading coefficient, sorted by degree then coefficients.
pub fn factor(f: &Poly) -> Result<(BigInt, Vec<(Poly, usize)>)> {
    let (content, _) = f.content_primitive()?;
    let mut out: Vec<(Poly, usize)> = Vec::new();
    for (s, e) in f.squarefree_decomposition() {
        let mut parts = Vec::new();
        split_squarefree(&s, &mut parts)?;
        for p in parts {
            out.push((p, e));
        }
    }
    out.sort_by(|a, b| a.0.lex_cmp(&b.0));
    Ok((content, out))
}
