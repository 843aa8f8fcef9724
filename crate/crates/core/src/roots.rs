//! Certified complex roots of squarefree integer polynomials.
//!
//! Approximations come from Aberth-Ehrlich iteration (hardware floats, then
//! dyadic arithmetic at the working precision). Each approximation `z` is
//! then certified by exact evaluation: the disk of radius `n |f(z)/f'(z)|`
//! around `z` contains a root, so pairwise disjoint disks isolate all `n`.

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::real::{Dyadic, Round};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Cx {
    re: Dyadic,
    im: Dyadic,
}

impl Cx {
    fn zero() -> Cx {
        Cx {
            re: Dyadic::zero(),
            im: Dyadic::zero(),
        }
    }

    fn from_c64(z: Complex64) -> Cx {
        Cx {
            re: Dyadic::from_f64(z.re),
            im: Dyadic::from_f64(z.im),
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn add(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    fn sub(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    fn mul(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    fn round(&self, prec: u64) -> Cx {
        Cx {
            re: self.re.round(prec, Round::Nearest),
            im: self.im.round(prec, Round::Nearest),
        }
    }

    fn norm_sqr(&self) -> Dyadic {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    fn div(&self, o: &Cx, prec: u64) -> Option<Cx> {
        let d = o.norm_sqr();
        if d.is_zero() {
            return None;
        }
        let d = d.round(prec + 8, Round::Nearest);
        let n = self.mul(&Cx {
            re: o.re.clone(),
            im: o.im.neg(),
        });
        Some(Cx {
            re: n.re.div(&d, prec, Round::Nearest),
            im: n.im.div(&d, prec, Round::Nearest),
        })
    }

    /// `floor(log2 |z|)` estimate; very negative for zero.
    fn log2_mag(&self) -> i64 {
        let m = |d: &Dyadic| {
            if d.is_zero() {
                i64::MIN / 4
            } else {
                d.exponent() + d.bits() as i64
            }
        };
        m(&self.re).max(m(&self.im))
    }
}

/// `f(z)` and `f'(z)` by Horner's rule, rounded to `prec` bits per step.
fn eval_with_derivative(coeffs: &[Dyadic], z: &Cx, prec: Option<u64>) -> (Cx, Cx) {
    let mut p = Cx::zero();
    let mut dp = Cx::zero();
    for a in coeffs.iter().rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z).add(&Cx {
            re: a.clone(),
            im: Dyadic::zero(),
        });
        if let Some(w) = prec {
            dp = dp.round(w);
            p = p.round(w);
        }
    }
    (p, dp)
}

/// An isolating disk for one root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDisk {
    re: Dyadic,
    im: Dyadic,
    rad: Dyadic,
}

impl RootDisk {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn center_re(&self) -> &Dyadic {
        &self.re
    }

    pub fn center_im(&self) -> &Dyadic {
        &self.im
    }

    pub fn radius(&self) -> &Dyadic {
        &self.rad
    }

    pub fn radius_f64(&self) -> f64 {
        self.rad.to_f64()
    }

    /// Lower and upper bounds of `|root|`.
    pub fn abs_bounds(&self, prec: u64) -> (Dyadic, Dyadic) {
        let n2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        let lo = n2.sqrt(prec, Round::Down).sub(&self.rad);
        let hi = n2.sqrt(prec, Round::Up).add(&self.rad);
        let lo = if lo.signum() < 0 { Dyadic::zero() } else { lo };
        (lo.round(prec, Round::Down), hi.round(prec, Round::Up))
    }

    pub fn overlaps(&self, other: &RootDisk) -> bool {
        let dr = self.re.sub(&other.re);
        let di = self.im.sub(&other.im);
        let d2 = dr.mul(&dr).add(&di.mul(&di));
        let r = self.rad.add(&other.rad);
        d2 <= r.mul(&r)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let c = self.center();
        (z - c).norm() <= self.rad.to_f64() * (1.0 + 1e-9) + 1e-300
    }
}

fn cauchy_bound(c: &[f64]) -> f64 {
    let n = c.len() - 1;
    let lead = c[n].abs();
    let m = c[..n].iter().map(|a| a.abs()).fold(0.0, f64::max);
    1.0 + m / lead
}

/// Aberth-Ehrlich in hardware floats.
fn aberth_f64(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let r = cauchy_bound(c).min(1e6) * 0.5;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut done = true;
        for k in 0..n {
            let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for a in c.iter().rev() {
                dp = dp * z[k] + p;
                p = p * z[k] + a;
            }
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (z[k] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[k] -= w;
                if w.norm() > 1e-15 * z[k].norm().max(1.0) {
                    done = false;
                }
            } else {
                done = false;
                z[k] += Complex64::new(1e-3, 1e-3);
            }
        }
        if done {
            break;
        }
    }
    z
}

/// Aberth-Ehrlich at `w` bits. Returns false if it did not settle.
fn aberth_dyadic(coeffs: &[Dyadic], z: &mut [Cx], w: u64) -> bool {
    let n = z.len();
    let mut prev = i64::MAX;
    for _ in 0..200 {
        let mut worst = i64::MIN;
        let mut scale = 0i64;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(coeffs, &z[k], Some(w));
            if p.re.is_zero() && p.im.is_zero() {
                continue;
            }
            let Some(ratio) = p.div(&dp, w) else {
                return false;
            };
            let mut s = Cx::zero();
            for j in 0..n {
                if j != k {
                    let Some(t) = Cx {
                        re: Dyadic::one(),
                        im: Dyadic::zero(),
                    }
                    .div(&z[k].sub(&z[j]), w) else {
                        return false;
                    };
                    s = s.add(&t).round(w);
                }
            }
            let one = Cx {
                re: Dyadic::one(),
                im: Dyadic::zero(),
            };
            let den = one.sub(&ratio.mul(&s).round(w));
            let Some(corr) = ratio.div(&den, w) else {
                return false;
            };
            worst = worst.max(corr.log2_mag());
            scale = scale.max(z[k].log2_mag());
            z[k] = z[k].sub(&corr).round(w);
        }
        let floor = scale.max(0) - w as i64;
        // converged, or stalled at the rounding noise floor
        if worst < floor + 6 || (worst < floor + w as i64 / 2 && worst >= prev - 1) {
            return true;
        }
        prev = worst;
    }
    false
}

/// Certified isolating disks for all roots of a squarefree `f`, with radius at
/// most `2^(-precision_bits/2)`.
pub fn complex_roots(f: &Poly, precision_bits: u64) -> Result<Vec<RootDisk>> {
    if f.degree() < 1 {
        return Err(Error::ConstantPolynomial);
    }
    if !f.is_squarefree() {
        return Err(Error::NotSquarefree);
    }
    let n = f.degree();
    let coeffs: Vec<Dyadic> = f
        .coeffs()
        .iter()
        .map(|a| Dyadic::from_int(a.clone()))
        .collect();
    if n == 1 {
        // exact rational root; a tiny disk around its dyadic rounding
        let w = precision_bits + 16;
        let q = num_rational::BigRational::new(-f.coeff(0), f.coeff(1));
        let lo = Dyadic::from_rational(&q, w, Round::Down);
        let hi = Dyadic::from_rational(&q, w, Round::Up);
        return Ok(vec![RootDisk {
            rad: hi.sub(&lo),
            re: lo,
            im: Dyadic::zero(),
        }]);
    }
    let init = aberth_f64(&f.coeffs_f64());
    let mut w = precision_bits.max(53) + 32;
    let mut z: Vec<Cx> = init.iter().map(|&c| Cx::from_c64(c)).collect();
    for _attempt in 0..5 {
        aberth_dyadic(&coeffs, &mut z, w);
        if let Some(disks) = certify(&coeffs, &z, precision_bits) {
            return Ok(disks);
        }
        w *= 2;
        // fresh perturbation in case two approximations collapsed
        for (k, zk) in z.iter_mut().enumerate() {
            let eps = Complex64::from_polar(1e-6, k as f64 + 0.3);
            *zk = Cx::from_c64(zk.to_c64() + eps);
        }
    }
    Err(Error::RootIsolation(format!(
        "could not separate the roots of {f} at {w} bits"
    )))
}

fn certify(coeffs: &[Dyadic], z: &[Cx], precision_bits: u64) -> Option<Vec<RootDisk>> {
    let n = z.len();
    let nn = Dyadic::from_int(BigInt::from(n * n));
    let mut disks = Vec::with_capacity(n);
    let limit = Dyadic::new(BigInt::from(1), -((precision_bits / 2) as i64));
    for zk in z {
        let (p, dp) = eval_with_derivative(coeffs, zk, None);
        let num = p.norm_sqr();
        let den = dp.norm_sqr();
        if den.is_zero() {
            return None;
        }
        let r2 = num.mul(&nn).div(&den, 64, Round::Up);
        let rad = r2.sqrt(64, Round::Up);
        if rad > limit {
            return None;
        }
        disks.push(RootDisk {
            re: zk.re.clone(),
            im: zk.im.clone(),
            rad,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            if disks[i].overlaps(&disks[j]) {
                return None;
            }
        }
    }
    Some(disks)
}

/// The root of largest modulus, ties broken toward nonnegative imaginary part.
pub fn maximal_root(disks: &[RootDisk]) -> Option<&RootDisk> {
    disks.iter().max_by(|a, b| {
        let (ca, cb) = (a.center(), b.center());
        let (ma, mb) = (ca.norm(), cb.norm());
        if (ma - mb).abs() > 1e-12 * ma.max(1.0) {
            ma.partial_cmp(&mb).unwrap()
        } else {
            ca.im.partial_cmp(&cb.im).unwrap()
        }
    })
}

/// Hardware-float roots, uncertified.
pub fn approx_roots(f: &Poly) -> Vec<Complex64> {
    if f.degree() < 1 {
        return vec![];
    }
    aberth_f64(&f.coeffs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn quadratic_roots() {
        let f = Poly::from_i64(&[1, 0, 1]);
        let r = complex_roots(&f, 128).unwrap();
        let c = sorted(r.iter().map(|d| d.center()).collect());
        assert!((c[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((c[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(r.iter().all(|d| d.radius_f64() < 1e-30));

        let g = Poly::from_i64(&[-1, -1, 1]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = sorted(
            complex_roots(&g, 128)
                .unwrap()
                .iter()
                .map(|d| d.center())
                .collect(),
        );
        assert!((c[0].re - (1.0 - phi)).abs() < 1e-15);
        assert!((c[1].re - phi).abs() < 1e-15);
    }

    #[test]
    fn lehmer_roots() {
        let f = Poly::parse("x^10+x^9-x^7-x^6-x^5-x^4-x^3+x+1").unwrap();
        let r = complex_roots(&f, 128).unwrap();
        assert_eq!(r.len(), 10);
        let top = r.iter().map(|d| d.center().re).fold(f64::MIN, f64::max);
        assert!((top - 1.1762808182599175).abs() < 1e-12);
    }

    #[test]
    fn rejects_repeated_roots() {
        let f = Poly::from_i64(&[1, -2, 1]);
        assert_eq!(complex_roots(&f, 64), Err(Error::NotSquarefree));
    }

    #[test]
    fn close_real_pair() {
        // roots r and 1/r with r close to 1
        let f = Poly::from_i64(&[10000, -20001, 10000]);
        let r = complex_roots(&f, 200).unwrap();
        let prod: Complex64 = r.iter().map(|d| d.center()).product();
        assert!((prod.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn maximal_root_prefers_upper_half_plane() {
        let f = Poly::from_i64(&[4, 0, 1]);
        let r = complex_roots(&f, 96).unwrap();
        let m = maximal_root(&r).unwrap().center();
        assert!((m - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn high_degree_clustered() {
        let mut c = vec![0i64; 25];
        c[0] = -2;
        c[24] = 1;
        let r = complex_roots(&Poly::from_i64(&c), 128).unwrap();
        assert_eq!(r.len(), 24);
        let want = 2f64.powf(1.0 / 24.0);
        assert!(r.iter().all(|d| (d.center().norm() - want).abs() < 1e-14));
    }
}
