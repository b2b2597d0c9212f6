//! Exact arithmetic on C^2 \ {0}: Gaussian-rational coefficients over the
//! quotient ring Q(i)[z1, z2, zb1, zb2, r^{+-1}] / (z1 zb1 + z2 zb2 - r^2).
//!
//! Monomials are kept canonical by eliminating the product z2 zb2 through the
//! relation, so equality of functions is equality of coefficient maps.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, Zero};

/// Gaussian rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl CRat {
    pub fn zero() -> Self {
        CRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        CRat {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        CRat {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        CRat {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        CRat {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn sub(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    pub fn neg(&self) -> CRat {
        CRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn mul(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn conj(&self) -> CRat {
        CRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn inv(&self) -> CRat {
        let n = &self.re * &self.re + &self.im * &self.im;
        assert!(!n.is_zero(), "division by zero");
        CRat {
            re: &self.re / &n,
            im: -(&self.im / &n),
        }
    }

    pub fn to_f64(&self) -> Complex64 {
        let f = |q: &BigRational| -> f64 {
            let num = q.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
            let den = q.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
            num / den
        };
        Complex64::new(f(&self.re), f(&self.im))
    }

    /// Rough magnitude for display purposes.
    pub fn abs_f64(&self) -> f64 {
        self.to_f64().norm()
    }
}

/// Canonical monomial z1^a z2^b zb1^c zb2^d r^{-t}, with min(b, d) = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mono {
    pub a: u8,
    pub b: u8,
    pub c: u8,
    pub d: u8,
    pub t: i16,
}

impl Mono {
    pub fn one() -> Self {
        Mono {
            a: 0,
            b: 0,
            c: 0,
            d: 0,
            t: 0,
        }
    }

    pub fn homogeneity(&self) -> i32 {
        self.a as i32 + self.b as i32 + self.c as i32 + self.d as i32 - self.t as i32
    }

    pub fn degree(&self) -> u32 {
        self.a as u32 + self.b as u32 + self.c as u32 + self.d as u32
    }
}

/// Polynomial-with-r-powers over the quotient ring.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CPoly {
    pub terms: BTreeMap<Mono, CRat>,
}

impl CPoly {
    pub fn zero() -> Self {
        CPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_term(m: Mono, c: CRat) -> Self {
        let mut p = CPoly::zero();
        p.add_term(m, c);
        p
    }

    /// r^{-t}
    pub fn r_power(t: i16) -> Self {
        CPoly::from_term(
            Mono {
                a: 0,
                b: 0,
                c: 0,
                d: 0,
                t,
            },
            CRat::one(),
        )
    }

    /// Insert coeff * mono, reducing z2 zb2 -> r^2 - z1 zb1 to canonical form.
    pub fn add_term(&mut self, m: Mono, coeff: CRat) {
        if coeff.is_zero() {
            return;
        }
        if m.b > 0 && m.d > 0 {
            // z2 zb2 X = r^2 X - z1 zb1 X
            self.add_term(
                Mono {
                    a: m.a,
                    b: m.b - 1,
                    c: m.c,
                    d: m.d - 1,
                    t: m.t - 2,
                },
                coeff.clone(),
            );
            self.add_term(
                Mono {
                    a: m.a + 1,
                    b: m.b - 1,
                    c: m.c + 1,
                    d: m.d - 1,
                    t: m.t,
                },
                coeff.neg(),
            );
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(CRat::zero);
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &CPoly) -> CPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &CPoly) -> CPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.neg());
        }
        out
    }

    pub fn scale(&self, s: &CRat) -> CPoly {
        let mut out = CPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c.mul(s));
        }
        out
    }

    /// Complex conjugate of the function.
    pub fn conj(&self) -> CPoly {
        let mut out = CPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(
                Mono {
                    a: m.c,
                    b: m.d,
                    c: m.a,
                    d: m.b,
                    t: m.t,
                },
                c.conj(),
            );
        }
        out
    }

    fn derive(&self, var: usize) -> CPoly {
        // var: 0 = z1, 1 = z2, 2 = zb1, 3 = zb2
        let mut out = CPoly::zero();
        for (m, c) in &self.terms {
            let e = [m.a, m.b, m.c, m.d][var];
            if e > 0 {
                let mut mm = *m;
                match var {
                    0 => mm.a -= 1,
                    1 => mm.b -= 1,
                    2 => mm.c -= 1,
                    _ => mm.d -= 1,
                }
                out.add_term(mm, c.mul(&CRat::from_int(e as i64)));
            }
            if m.t != 0 {
                // d/dvar r^{-t} = -(t/2) r^{-t-2} * conj-partner
                let mut mm = *m;
                mm.t += 2;
                match var {
                    0 => mm.c += 1,
                    1 => mm.d += 1,
                    2 => mm.a += 1,
                    _ => mm.b += 1,
                }
                out.add_term(mm, c.mul(&CRat::from_ratio(-(m.t as i64), 2)));
            }
        }
        out
    }

    pub fn d_z1(&self) -> CPoly {
        self.derive(0)
    }

    pub fn d_z2(&self) -> CPoly {
        self.derive(1)
    }

    pub fn d_zb1(&self) -> CPoly {
        self.derive(2)
    }

    pub fn d_zb2(&self) -> CPoly {
        self.derive(3)
    }

    /// Flat Laplacian up to a positive constant: sum_i d_{z_i} d_{zb_i}.
    pub fn laplace(&self) -> CPoly {
        self.d_z1().d_zb1().add(&self.d_z2().d_zb2())
    }

    pub fn split_by_homogeneity(&self) -> BTreeMap<i32, CPoly> {
        let mut out: BTreeMap<i32, CPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.homogeneity())
                .or_insert_with(CPoly::zero)
                .add_term(*m, c.clone());
        }
        out
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let r2 = z1.norm_sqr() + z2.norm_sqr();
        let r = r2.sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let v = z1.powu(m.a as u32)
                * z2.powu(m.b as u32)
                * z1.conj().powu(m.c as u32)
                * z2.conj().powu(m.d as u32)
                * r.powi(-(m.t as i32));
            acc += c.to_f64() * v;
        }
        acc
    }

    /// Human-readable rendering in a canonical monomial order.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut s = String::new();
            let coeff = format!(
                "({}{}{}i)",
                c.re,
                if c.im.is_negative() { "" } else { "+" },
                c.im
            );
            s.push_str(&coeff);
            let var = |name: &str, e: u8| -> String {
                match e {
                    0 => String::new(),
                    1 => format!("*{name}"),
                    _ => format!("*{name}^{e}"),
                }
            };
            s.push_str(&var("z1", m.a));
            s.push_str(&var("z2", m.b));
            s.push_str(&var("zb1", m.c));
            s.push_str(&var("zb2", m.d));
            if m.t != 0 {
                s.push_str(&format!("*r^{}", -(m.t as i32)));
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(a: u8, b: u8, c: u8, d: u8, t: i16) -> Mono {
        Mono { a, b, c, d, t }
    }

    #[test]
    fn reduction_is_canonical() {
        // z2 zb2 == r^2 - z1 zb1
        let mut p = CPoly::zero();
        p.add_term(mono(0, 1, 0, 1, 0), CRat::one());
        let mut q = CPoly::zero();
        q.add_term(mono(0, 0, 0, 0, -2), CRat::one());
        q.add_term(mono(1, 0, 1, 0, 0), CRat::from_int(-1));
        assert_eq!(p, q);
    }

    #[test]
    fn derivative_of_r_power() {
        // d/dz1 r^{-2} = -zb1 r^{-4}
        let p = CPoly::r_power(2);
        let d = p.d_z1();
        let mut expect = CPoly::zero();
        expect.add_term(mono(0, 0, 1, 0, 4), CRat::from_int(-1));
        assert_eq!(d, expect);
    }

    #[test]
    fn r_inverse_quadratic_laplacian() {
        // on R^4, 4 sum d d-bar of r^{-2} = 0 (Kelvin constant)
        let p = CPoly::r_power(2);
        assert!(p.laplace().is_zero());
    }

    #[test]
    fn eval_respects_relation() {
        let mut p = CPoly::zero();
        p.add_term(mono(0, 1, 0, 1, 2), CRat::one()); // z2 zb2 / r^2
        let z1 = Complex64::new(0.3, -0.2);
        let z2 = Complex64::new(-0.1, 0.7);
        let got = p.eval(z1, z2);
        let expect = z2 * z2.conj() / (z1.norm_sqr() + z2.norm_sqr());
        assert!((got - expect).norm() < 1e-14);
    }
}
