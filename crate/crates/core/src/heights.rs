//! Mahler measures, Weil heights and G-orbit heights as certified intervals.

use num_complex::Complex64;
use num_traits::Signed;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mobius::FiniteGroup;
use crate::numth::QuadPoint;
use crate::poly::{factor, is_irreducible, strip_cyclotomic, Poly};
use crate::real::{Dyadic, Interval};
use crate::roots::{complex_roots, maximal_root, RootDisk};

pub const DEFAULT_PRECISION: u64 = 128;

/// `|lead| * prod max(1, |alpha|)` for a squarefree `f` of degree >= 1.
fn measure_squarefree(f: &Poly, prec: u64) -> Result<Interval> {
    let w = prec + 32;
    let disks = complex_roots(f, w)?;
    let one = Dyadic::one();
    let mut acc = Interval::from_int(f.lead().abs());
    for d in &disks {
        let (lo, hi) = d.abs_bounds(w);
        let factor = if hi < one {
            continue;
        } else if lo > one {
            Interval::new(lo, hi)
        } else {
            Interval::new(one.clone(), hi.max(one.clone()))
        };
        acc = acc.mul(&factor).round(w);
    }
    Ok(acc)
}

/// Certified enclosure of `M(f)`. Exact when every root is zero or a root of
/// unity, and exact factors are kept exact otherwise.
pub fn mahler_measure(f: &Poly, prec: u64) -> Result<Interval> {
    let (c, g) = f.content_primitive()?;
    let (_, g) = g.strip_x();
    let (rest, _) = strip_cyclotomic(&g);
    let mut m = Interval::from_int(c);
    if rest.is_constant() {
        return Ok(m.mul_int(&rest.lead().abs()));
    }
    for (s, e) in rest.squarefree_decomposition() {
        let ms = measure_squarefree(&s, prec)?;
        m = m.mul(&ms.pow(e as u32)).round(prec + 32);
    }
    Ok(m)
}

/// An algebraic number given by its minimal polynomial, optionally with an
/// isolating disk selecting one conjugate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicNumber {
    minpoly: Poly,
    root: Option<RootDisk>,
}

impl AlgebraicNumber {
    pub fn from_minpoly(f: &Poly) -> Result<Self> {
        if f.degree() < 1 {
            return Err(Error::ConstantPolynomial);
        }
        let g = f.normalized();
        if !is_irreducible(&g)? {
            return Err(Error::NotIrreducible(g.to_string()));
        }
        Ok(AlgebraicNumber {
            minpoly: g,
            root: None,
        })
    }

    pub fn from_quad(p: &QuadPoint) -> Self {
        AlgebraicNumber {
            minpoly: Poly::new(p.minpoly_coeffs()),
            root: None,
        }
    }

    /// The root of `f` of largest modulus with nonnegative imaginary part,
    /// with the irreducible factor of `f` it belongs to.
    pub fn maximal_root(f: &Poly, prec: u64) -> Result<Self> {
        let (_, parts) = factor(f)?;
        let mut best: Option<(Poly, RootDisk)> = None;
        for (p, _) in parts {
            let disks = complex_roots(&p, prec)?;
            let Some(d) = maximal_root(&disks).cloned() else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((_, b)) => {
                    let (x, y) = (d.center(), b.center());
                    if (x.norm() - y.norm()).abs() > 1e-12 * x.norm().max(1.0) {
                        x.norm() > y.norm()
                    } else {
                        x.im > y.im
                    }
                }
            };
            if better {
                best = Some((p, d));
            }
        }
        let (minpoly, root) = best.ok_or(Error::ConstantPolynomial)?;
        Ok(AlgebraicNumber {
            minpoly,
            root: Some(root),
        })
    }

    pub fn minpoly(&self) -> &Poly {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    pub fn root(&self) -> Option<&RootDisk> {
        self.root.as_ref()
    }

    pub fn value(&self) -> Option<Complex64> {
        self.root.as_ref().map(|d| d.center())
    }
}

fn height_of_poly(f: &Poly, n: usize, prec: u64) -> Result<Interval> {
    if f.degree() < 1 {
        return Ok(Interval::zero());
    }
    let m = mahler_measure(f, prec)?;
    Ok(m.ln(prec + 16)?.div_int(n as u64, prec + 16))
}

/// `(1/deg) log M(minpoly)`.
pub fn weil_height(x: &AlgebraicNumber, prec: u64) -> Result<Interval> {
    height_of_poly(&x.minpoly, x.degree(), prec)
}

/// Heights `h(sigma alpha)` for every `sigma` in `G`, in the group's element
/// order. Conjugates sent to infinity contribute zero.
pub fn orbit_height_terms(g: &FiniteGroup, f: &Poly, prec: u64) -> Result<Vec<Interval>> {
    let n = f.degree();
    g.elements()
        .par_iter()
        .map(|s| {
            let (h, _) = s.inverse().pullback_parts(f);
            height_of_poly(&h, n, prec)
        })
        .collect()
}

/// `h_G` at a root of `f` (assumed irreducible and primitive).
pub fn orbit_height_poly(g: &FiniteGroup, f: &Poly, prec: u64) -> Result<Interval> {
    let terms = orbit_height_terms(g, f, prec)?;
    Ok(terms.iter().fold(Interval::zero(), |acc, t| acc.add(t)))
}

pub fn orbit_height(g: &FiniteGroup, x: &AlgebraicNumber, prec: u64) -> Result<Interval> {
    orbit_height_poly(g, &x.minpoly, prec)
}

/// `prod_sigma M(f_sigma)`; fails if some conjugate is sent to infinity.
pub fn mahler_orbit_product(g: &FiniteGroup, f: &Poly, prec: u64) -> Result<Interval> {
    let parts: Vec<Interval> = g
        .elements()
        .par_iter()
        .map(|s| {
            let h = s.inverse().pullback_minpoly(f)?;
            mahler_measure(&h, prec)
        })
        .collect::<Result<_>>()?;
    Ok(parts
        .iter()
        .fold(Interval::one(), |acc, m| acc.mul(m).round(prec + 32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::MobiusMap;
    use crate::numth::rat;
    use crate::poly::cyclotomic;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_i64(c)
    }

    fn group(s: &str) -> FiniteGroup {
        FiniteGroup::parse(s).unwrap()
    }

    #[test]
    fn measures() {
        assert_eq!(
            mahler_measure(&p(&[-2, 1]), 128).unwrap(),
            Interval::from_int(2)
        );
        let lehmer = Poly::parse("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1").unwrap();
        let m = mahler_measure(&lehmer, 128).unwrap();
        assert!(m.near(1.176280818259917, 1e-15));
        assert!(m.width_f64() < 1e-30);
        assert!(mahler_measure(&cyclotomic(10), 128).unwrap().is_exact());
        assert_eq!(
            mahler_measure(&cyclotomic(10), 128).unwrap(),
            Interval::one()
        );
        // 6 (x-2)^2 x^3 Phi_5 : 6 * 4
        let f = p(&[-2, 1])
            .pow(2)
            .mul(&p(&[0, 0, 0, 6]))
            .mul(&cyclotomic(5));
        let m = mahler_measure(&f, 128).unwrap();
        assert!(m.near(24.0, 1e-30));
    }

    #[test]
    fn weil_heights() {
        let two = AlgebraicNumber::from_quad(&QuadPoint::int(2));
        assert!(weil_height(&two, 128).unwrap().near(2f64.ln(), 1e-30));
        let z12 = AlgebraicNumber::from_minpoly(&cyclotomic(12)).unwrap();
        assert_eq!(weil_height(&z12, 128).unwrap(), Interval::zero());
        let q = QuadPoint::new(rat(1, 5), rat(2, 5), -1).unwrap();
        let h = weil_height(&AlgebraicNumber::from_quad(&q), 128).unwrap();
        assert!(h.near(0.5 * 5f64.ln(), 1e-15));
        assert!(AlgebraicNumber::from_minpoly(&p(&[4, 0, 0, 0, 1])).is_err());
    }

    #[test]
    fn orbit_heights() {
        let g = group("1,-1;3,1");
        let i = AlgebraicNumber::from_quad(&QuadPoint::i());
        assert!(orbit_height(&g, &i, 128).unwrap().near(5f64.ln(), 1e-30));
        let zero = AlgebraicNumber::from_quad(&QuadPoint::int(0));
        assert_eq!(orbit_height(&g, &zero, 128).unwrap(), Interval::zero());
        let z = group("1,-1;0,-1");
        let h = orbit_height_poly(&z, &cyclotomic(10), 128).unwrap();
        assert!(h.near(0.2406059125298017, 1e-15));
    }

    #[test]
    fn orbit_products() {
        let g = group("1,-1;3,1");
        let m = mahler_orbit_product(&g, &p(&[1, 0, 1]), 128).unwrap();
        assert_eq!(m, Interval::from_int(25));
        let z = group("1,-1;0,-1");
        let m = mahler_orbit_product(&z, &cyclotomic(10), 128).unwrap();
        assert!(m.near((3.0 + 5f64.sqrt()) / 2.0, 1e-14));
        let t = group("1,0;0,1");
        let f = p(&[3, -7, 2, 5]);
        assert_eq!(
            mahler_orbit_product(&t, &f, 128).unwrap(),
            mahler_measure(&f, 128).unwrap()
        );
        assert_eq!(
            mahler_orbit_product(&g, &p(&[-1, 3]), 128),
            Err(Error::OrbitHitsInfinity { dropped: 1 })
        );
    }

    #[test]
    fn maximal_roots() {
        let f = Poly::parse("(z^2+1)^4+z^2(z^2-1)^2").unwrap();
        let a = AlgebraicNumber::maximal_root(&f, 128).unwrap();
        let v = a.value().unwrap();
        assert!((v - Complex64::new(0.0, 2.0810189966245)).norm() < 1e-12);
        assert_eq!(a.minpoly(), &f);
    }

    #[test]
    fn infinity_counts_as_zero() {
        // z -> 2/z sends 0 to infinity
        let g = group("0,2;1,0");
        let h = orbit_height_poly(&g, &p(&[0, 1]), 128).unwrap();
        assert_eq!(h, Interval::zero());
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        proptest::collection::vec(-6i64..=6, 2..=max_deg + 1)
            .prop_map(|c| Poly::from_i64(&c))
            .prop_filter("degree >= 1", |f| f.degree() >= 1)
    }

    fn rel_close(a: &Interval, b: &Interval, tol: f64) -> bool {
        let (x, y) = (a.mid_f64(), b.mid_f64());
        (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0) + a.width_f64() + b.width_f64()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn multiplicative(f in arb_poly(4), g in arb_poly(4)) {
            let m = mahler_measure(&f.mul(&g), 96).unwrap();
            let mm = mahler_measure(&f, 96).unwrap().mul(&mahler_measure(&g, 96).unwrap());
            prop_assert!(rel_close(&m, &mm, 1e-10));
            prop_assert!(m.overlaps(&mm));
        }

        #[test]
        fn graeffe_squares_measure(f in arb_poly(4)) {
            let m = mahler_measure(&f, 96).unwrap();
            let m2 = mahler_measure(&f.graeffe(), 96).unwrap();
            prop_assert!(rel_close(&m.mul(&m), &m2, 1e-10));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn heights_nonnegative_and_invariant(f in arb_poly(4), k in 0usize..6) {
            let f = f.normalized();
            prop_assume!(is_irreducible(&f).unwrap());
            let g = group("2,-1;1,1");
            let h = orbit_height_poly(&g, &f, 96).unwrap();
            prop_assert!(h.hi_f64() >= 0.0);
            let s: &MobiusMap = &g.elements()[k];
            if let Ok(f2) = s.inverse().pullback_minpoly(&f) {
                let h2 = orbit_height_poly(&g, &f2, 96).unwrap();
                prop_assert!(rel_close(&h, &h2, 1e-10));
            }
            if let Ok(prod) = mahler_orbit_product(&g, &f, 96) {
                let lhs = h.mul(&Interval::from_int(f.degree() as i64));
                prop_assert!(rel_close(&lhs, &prod.ln(96).unwrap(), 1e-10));
            }
        }
    }
}
