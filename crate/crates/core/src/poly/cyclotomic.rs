use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::Poly;

pub fn euler_phi(mut m: u64) -> u64 {
    let mut r = m;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if m > 1 {
        r -= r / m;
    }
    r
}

fn mobius_mu(mut m: u64) -> i32 {
    let mut k = 0;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return 0;
            }
            k += 1;
        }
        p += 1;
    }
    if m > 1 {
        k += 1;
    }
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn x_pow_minus_one(d: u64) -> Poly {
    let mut c = vec![BigInt::zero(); d as usize + 1];
    c[0] = -BigInt::one();
    c[d as usize] = BigInt::one();
    Poly::new(c)
}

/// The `m`-th cyclotomic polynomial.
pub fn cyclotomic(m: u64) -> Poly {
    assert!(m >= 1);
    static CACHE: OnceLock<Mutex<HashMap<u64, Poly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&m) {
        return p.clone();
    }
    let divisors: Vec<u64> = (1..=m).filter(|d| m.is_multiple_of(*d)).collect();
    let mut num = Poly::one();
    let mut den = Poly::one();
    for &d in &divisors {
        match mobius_mu(m / d) {
            1 => num = num.mul(&x_pow_minus_one(d)),
            -1 => den = den.mul(&x_pow_minus_one(d)),
            _ => {}
        }
    }
    let p = num.div_exact(&den).expect("cyclotomic quotient is exact");
    cache.lock().unwrap().insert(m, p.clone());
    p
}

/// Orders `m` with `phi(m) <= n`, increasing.
fn orders_up_to_degree(n: usize) -> impl Iterator<Item = u64> {
    // m / phi(m) < 7 far beyond any degree used here
    let limit = (7 * n as u64).max(6);
    (1..=limit).filter(move |&m| euler_phi(m) as usize <= n)
}

/// Divides out every cyclotomic factor (with multiplicity). Returns the
/// cofactor and the list of `(m, multiplicity)` removed.
pub fn strip_cyclotomic(f: &Poly) -> (Poly, Vec<(u64, usize)>) {
    let mut rest = f.clone();
    let mut found = Vec::new();
    if rest.degree() < 1 {
        return (rest, found);
    }
    let two = BigInt::from(2);
    for m in orders_up_to_degree(f.degree()) {
        if euler_phi(m) as usize > rest.degree() {
            continue;
        }
        let phi = cyclotomic(m);
        let at2 = phi.eval_int(&two);
        let mut k = 0;
        loop {
            if rest.degree() < phi.degree() {
                break;
            }
            // cheap necessary condition before the long division
            if !(rest.eval_int(&two) % &at2).is_zero() {
                break;
            }
            match rest.div_exact(&phi) {
                Some(q) => {
                    rest = q;
                    k += 1;
                }
                None => break,
            }
        }
        if k > 0 {
            found.push((m, k));
        }
    }
    (rest, found)
}

/// True iff every root of `f` is zero or a root of unity.
pub fn is_cyclotomic_product(f: &Poly) -> bool {
    if f.is_zero() {
        return false;
    }
    let (_, g) = f.primitive().strip_x();
    if g.is_constant() {
        return true;
    }
    if !g.lead().abs().is_one() || !g.coeff(0).abs().is_one() {
        return false;
    }
    let (rest, _) = strip_cyclotomic(&g);
    rest.is_constant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic(1), Poly::from_i64(&[-1, 1]));
        assert_eq!(cyclotomic(6), Poly::from_i64(&[1, -1, 1]));
        assert_eq!(cyclotomic(10), Poly::from_i64(&[1, -1, 1, -1, 1]));
        assert_eq!(cyclotomic(12), Poly::from_i64(&[1, 0, -1, 0, 1]));
        for m in 1..=40 {
            assert_eq!(cyclotomic(m).degree() as u64, euler_phi(m));
        }
    }

    #[test]
    fn cyclotomic_product_examples() {
        assert!(is_cyclotomic_product(&Poly::from_i64(&[1, -1, 1, -1, 1])));
        assert!(!is_cyclotomic_product(&Poly::from_i64(&[-1, -1, 1])));
        assert!(is_cyclotomic_product(&Poly::from_i64(&[-1, 0, 0, 1])));
        assert!(is_cyclotomic_product(&Poly::from_i64(&[0, 0, 3])));
        for m in 1..=30 {
            assert!(is_cyclotomic_product(&cyclotomic(m)));
        }
    }

    #[test]
    fn strip_reports_multiplicity() {
        let f = cyclotomic(3)
            .pow(2)
            .mul(&cyclotomic(5))
            .mul(&Poly::from_i64(&[-2, 1]));
        let (rest, found) = strip_cyclotomic(&f);
        assert_eq!(rest, Poly::from_i64(&[-2, 1]));
        assert_eq!(found, vec![(3, 2), (5, 1)]);
    }

    #[test]
    fn order_bound_covers_all_orders() {
        // largest m with phi(m) <= n, by brute force
        for n in 1..=60usize {
            let mmax = (1..5000u64)
                .filter(|&m| euler_phi(m) as usize <= n)
                .max()
                .unwrap();
            assert!(mmax <= (7 * n as u64).max(6));
        }
    }
}
