//! Exhaustive minimisation of h_G over primitive irreducible polynomials of
//! bounded degree and height.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heights::orbit_height_poly;
use crate::mobius::FiniteGroup;
use crate::orbits::is_o_infinite;
use crate::poly::{is_cyclotomic_product, is_irreducible, Poly};
use crate::real::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchSpace {
    pub max_degree: usize,
    pub max_height: i64,
    pub skip_cyclotomic: bool,
}

impl SearchSpace {
    pub fn new(max_degree: usize, max_height: i64, skip_cyclotomic: bool) -> Result<Self> {
        if max_degree < 1 || max_height < 1 {
            return Err(Error::Invalid(
                "degree and height bounds must be at least 1".into(),
            ));
        }
        Ok(SearchSpace {
            max_degree,
            max_height,
            skip_cyclotomic,
        })
    }
}

fn coefficient_vectors(n: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = vec![];
    let width = (2 * h + 1) as usize;
    let total = width.pow(n as u32);
    for lead in 1..=h {
        for mut k in 0..total {
            let mut c = Vec::with_capacity(n + 1);
            for _ in 0..n {
                c.push((k % width) as i64 - h);
                k /= width;
            }
            c.push(lead);
            out.push(c);
        }
    }
    out
}

/// Every primitive irreducible polynomial in the space with positive leading
/// coefficient, ordered by degree then coefficients.
pub fn enum_polys(space: &SearchSpace) -> Vec<Poly> {
    let mut out: Vec<Poly> = (1..=space.max_degree)
        .flat_map(|n| coefficient_vectors(n, space.max_height))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|c| Poly::from_i64(&c))
        .filter(|f| f.is_primitive() && is_irreducible(f).unwrap_or(false))
        .filter(|f| {
            !(space.skip_cyclotomic
                && f.degree() >= 1
                && f.coeff(0) != BigInt::from(0)
                && is_cyclotomic_product(f))
        })
        .collect();
    out.sort_by(|a, b| a.lex_cmp(b));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub space: SearchSpace,
    pub count: usize,
    pub evaluated: usize,
    #[serde(serialize_with = "interval_text")]
    pub min: Interval,
    #[serde(serialize_with = "poly_text")]
    pub witness: Poly,
}

fn interval_text<S: serde::Serializer>(v: &Interval, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_decimal(25))
}

fn poly_text<S: serde::Serializer>(f: &Poly, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

/// `h_G >= h >= log max(|a_n|, |a_0|) / n`.
fn height_lower_bound(f: &Poly) -> f64 {
    let a = f.lead().abs().max(f.coeff(0).abs());
    a.to_f64().unwrap_or(f64::INFINITY).ln() / f.degree() as f64
}

fn better(a: &(Interval, Poly), b: &(Interval, Poly)) -> bool {
    let d = a.0.mid_f64() - b.0.mid_f64();
    if d.abs() < 1e-12 {
        a.1.lex_cmp(&b.1) == Ordering::Less
    } else {
        d < 0.0
    }
}

/// Smallest positive `h_G` over the space, with the lexicographically
/// smallest witness among ties.
pub fn min_orbit_height(g: &FiniteGroup, space: &SearchSpace, prec: u64) -> Result<SearchResult> {
    if is_o_infinite(g) {
        return Err(Error::OrbitSetInfinite);
    }
    let mut polys: Vec<(f64, Poly)> = enum_polys(space)
        .into_iter()
        .map(|f| (height_lower_bound(&f), f))
        .collect();
    let count = polys.len();
    polys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.lex_cmp(&b.1)));
    let mut best: Option<(Interval, Poly)> = None;
    let mut evaluated = 0;
    for chunk in polys.chunks(64) {
        let cutoff = best
            .as_ref()
            .map(|b| b.0.hi_f64() + 1e-9)
            .unwrap_or(f64::INFINITY);
        let todo: Vec<&Poly> = chunk
            .iter()
            .filter(|(lb, _)| *lb <= cutoff)
            .map(|(_, f)| f)
            .collect();
        if todo.is_empty() {
            break;
        }
        evaluated += todo.len();
        let vals: Vec<(Interval, Poly)> = todo
            .par_iter()
            .map(|f| Ok((orbit_height_poly(g, f, prec)?, (*f).clone())))
            .collect::<Result<_>>()?;
        for v in vals {
            let zero = v.0.contains_zero() && v.0.width_f64() < 1e-20;
            if zero {
                continue;
            }
            if best.as_ref().is_none_or(|b| better(&v, b)) {
                best = Some(v);
            }
        }
    }
    let (min, witness) = best.ok_or(Error::EmptySearch)?;
    Ok(SearchResult {
        space: *space,
        count,
        evaluated,
        min,
        witness,
    })
}
