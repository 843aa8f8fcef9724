//! Dense polynomials over a small prime field, enough for distinct-degree
//! factorization.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Fp {
    p: u64,
    c: Vec<u64>,
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(p));
    e.x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

impl Fp {
    fn new(p: u64, mut c: Vec<u64>) -> Fp {
        while c.last() == Some(&0) {
            c.pop();
        }
        Fp { p, c }
    }

    fn from_poly(f: &Poly, p: u64) -> Fp {
        let bp = BigInt::from(p);
        Fp::new(
            p,
            f.coeffs()
                .iter()
                .map(|a| a.mod_floor(&bp).to_u64().unwrap())
                .collect(),
        )
    }

    fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn monic(&self) -> Fp {
        let inv = inv_mod(*self.c.last().unwrap(), self.p);
        Fp::new(self.p, self.c.iter().map(|a| a * inv % self.p).collect())
    }

    fn sub(&self, o: &Fp) -> Fp {
        let n = self.c.len().max(o.c.len());
        let p = self.p;
        Fp::new(
            p,
            (0..n)
                .map(|i| {
                    let a = self.c.get(i).copied().unwrap_or(0);
                    let b = o.c.get(i).copied().unwrap_or(0);
                    (a + p - b) % p
                })
                .collect(),
        )
    }

    fn mul(&self, o: &Fp) -> Fp {
        if self.is_zero() || o.is_zero() {
            return Fp::new(self.p, vec![]);
        }
        let p = self.p;
        let mut c = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = (c[i + j] + a * b) % p;
            }
        }
        Fp::new(p, c)
    }

    fn divrem(&self, g: &Fp) -> (Fp, Fp) {
        let p = self.p;
        let inv = inv_mod(*g.c.last().unwrap(), p);
        let mut r = self.c.clone();
        if r.len() < g.c.len() {
            return (Fp::new(p, vec![]), self.clone());
        }
        let mut q = vec![0u64; r.len() - g.c.len() + 1];
        for k in (0..q.len()).rev() {
            let t = r[k + g.deg()] * inv % p;
            q[k] = t;
            if t == 0 {
                continue;
            }
            for (j, b) in g.c.iter().enumerate() {
                r[k + j] = (r[k + j] + p - t * b % p) % p;
            }
        }
        (Fp::new(p, q), Fp::new(p, r))
    }

    fn rem(&self, g: &Fp) -> Fp {
        self.divrem(g).1
    }

    fn gcd(&self, o: &Fp) -> Fp {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    fn derivative(&self) -> Fp {
        let p = self.p;
        Fp::new(
            p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| (i as u64 % p) * a % p)
                .collect(),
        )
    }

    fn powmod(&self, mut e: u64, m: &Fp) -> Fp {
        let mut base = self.rem(m);
        let mut acc = Fp::new(self.p, vec![1]);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }
}

/// Degree pattern of the factorization of `f` mod `p`, as `(degree, count)`
/// pairs. `None` when `p` divides the leading coefficient or `f` mod `p` is
/// not squarefree.
pub(super) fn ddf_pattern(f: &Poly, p: u64) -> Option<Vec<(usize, usize)>> {
    let fp = Fp::from_poly(f, p);
    if fp.deg() != f.degree() || fp.deg() == 0 {
        return None;
    }
    let mut rest = fp.monic();
    if rest.gcd(&rest.derivative()).deg() > 0 {
        return None;
    }
    let x = Fp::new(p, vec![0, 1]);
    let mut h = x.clone();
    let mut out = Vec::new();
    let mut i = 0;
    while rest.deg() >= 2 * (i + 1) {
        i += 1;
        h = h.powmod(p, &rest);
        let g = h.sub(&x).gcd(&rest);
        if g.deg() > 0 {
            out.push((i, g.deg() / i));
            rest = rest.divrem(&g).0.monic();
            h = h.rem(&rest);
        }
    }
    if rest.deg() > 0 {
        out.push((rest.deg(), 1));
    }
    Some(out)
}

/// Bitmask of degrees of possible factors given a mod-p pattern.
pub(super) fn possible_degrees(pattern: &[(usize, usize)], n: usize) -> Vec<bool> {
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for &(d, k) in pattern {
        for _ in 0..k {
            for s in (d..=n).rev() {
                if reach[s - d] {
                    reach[s] = true;
                }
            }
        }
    }
    reach
}
