//! (0,1)- and real (1,1)-forms on C^2 \ {0} with exact coefficients.
//!
//! A real (1,1)-form is stored as omega = i W_{i jbar} dz_i ^ dzb_j with W
//! Hermitian. The operator convention is d^c = i(dbar - del), so dd^c f has
//! W = 2 f_{,i jbar}.

use num::complex::Complex64;

use super::ring::{CPoly, CRat, Mono};

/// xi = P_1 dzb_1 + P_2 dzb_2.
#[derive(Clone, Debug, PartialEq)]
pub struct Form01 {
    pub comp: [CPoly; 2],
}

impl Form01 {
    pub fn zero() -> Self {
        Form01 {
            comp: [CPoly::zero(), CPoly::zero()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comp[0].is_zero() && self.comp[1].is_zero()
    }

    /// Coefficient of dzb1 ^ dzb2 in dbar xi.
    pub fn dbar(&self) -> CPoly {
        self.comp[1].d_zb1().sub(&self.comp[0].d_zb2())
    }

    /// Flat dbar^* up to a positive constant: sum_i d_{z_i} P_i.
    pub fn dbar_star(&self) -> CPoly {
        self.comp[0].d_z1().add(&self.comp[1].d_z2())
    }

    /// A_{i jbar} = d_{z_i} P_j, the coefficients of del xi.
    pub fn del(&self) -> [[CPoly; 2]; 2] {
        [
            [self.comp[0].d_z1(), self.comp[1].d_z1()],
            [self.comp[0].d_z2(), self.comp[1].d_z2()],
        ]
    }

    /// Componentwise flat Hodge Laplacian (up to the positive constant 4).
    pub fn laplace(&self) -> Form01 {
        Form01 {
            comp: [self.comp[0].laplace(), self.comp[1].laplace()],
        }
    }

    pub fn scale(&self, s: &CRat) -> Form01 {
        Form01 {
            comp: [self.comp[0].scale(s), self.comp[1].scale(s)],
        }
    }

    pub fn add(&self, o: &Form01) -> Form01 {
        Form01 {
            comp: [self.comp[0].add(&o.comp[0]), self.comp[1].add(&o.comp[1])],
        }
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> [Complex64; 2] {
        [self.comp[0].eval(z1, z2), self.comp[1].eval(z1, z2)]
    }
}

/// Real (1,1)-form omega = i W_{i jbar} dz_i ^ dzb_j, W Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct Form11 {
    pub w: [[CPoly; 2]; 2],
}

impl Form11 {
    pub fn zero() -> Self {
        Form11 {
            w: [
                [CPoly::zero(), CPoly::zero()],
                [CPoly::zero(), CPoly::zero()],
            ],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|row| row.iter().all(|p| p.is_zero()))
    }

    pub fn add(&self, o: &Form11) -> Form11 {
        let mut out = Form11::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.w[i][j] = self.w[i][j].add(&o.w[i][j]);
            }
        }
        out
    }

    pub fn sub(&self, o: &Form11) -> Form11 {
        let mut out = Form11::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.w[i][j] = self.w[i][j].sub(&o.w[i][j]);
            }
        }
        out
    }

    pub fn scale_real(&self, num: i64, den: i64) -> Form11 {
        let s = CRat::from_ratio(num, den);
        let mut out = Form11::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.w[i][j] = self.w[i][j].scale(&s);
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.w[0][0] == self.w[0][0].conj()
            && self.w[1][1] == self.w[1][1].conj()
            && self.w[0][1].conj() == self.w[1][0]
    }

    /// dd^c f = 2i del dbar f, i.e. W_{i jbar} = 2 d_{z_i} d_{zb_j} f.
    pub fn ddc(f: &CPoly) -> Form11 {
        let two = CRat::from_int(2);
        let db = [f.d_zb1(), f.d_zb2()];
        Form11 {
            w: [
                [db[0].d_z1().scale(&two), db[1].d_z1().scale(&two)],
                [db[0].d_z2().scale(&two), db[1].d_z2().scale(&two)],
            ],
        }
    }

    /// 2 Re ( C del xi ) for a complex constant C (and its formal conjugate),
    /// as the Hermitian matrix W_{i jbar} = -i (C A_{i jbar} - Cbar conj(A_{j ibar})).
    pub fn two_re_del(xi: &Form01, c: &CRat) -> Form11 {
        let a = xi.del();
        let mi = CRat::i().neg();
        let mut out = Form11::zero();
        for i in 0..2 {
            for j in 0..2 {
                let t1 = a[i][j].scale(c);
                let t2 = a[j][i].conj().scale(&c.conj());
                out.w[i][j] = t1.sub(&t2).scale(&mi);
            }
        }
        out
    }

    /// Exact d-closedness: d omega = 0 iff d_{z_k} W_{i jbar} is symmetric in
    /// (k, i) for each jbar (the (0,2)-part follows by conjugation).
    pub fn is_closed(&self) -> bool {
        for j in 0..2 {
            let d0 = self.w[1][j].d_z1();
            let d1 = self.w[0][j].d_z2();
            if d0 != d1 {
                return false;
            }
        }
        true
    }

    /// Split into homogeneous levels; the level is the common homogeneity of
    /// the W entries (= decay order of the form in metric norm).
    pub fn split_levels(&self) -> std::collections::BTreeMap<i32, Form11> {
        let mut out: std::collections::BTreeMap<i32, Form11> = std::collections::BTreeMap::new();
        for i in 0..2 {
            for j in 0..2 {
                for (lvl, poly) in self.w[i][j].split_by_homogeneity() {
                    let entry = out.entry(lvl).or_insert_with(Form11::zero);
                    entry.w[i][j] = entry.w[i][j].add(&poly);
                }
            }
        }
        out
    }
}

fn mono(a: u8, b: u8, c: u8, d: u8, t: i16) -> Mono {
    Mono { a, b, c, d, t }
}

/// xi_{-3} = (zb2 dzb1 - zb1 dzb2) / r^4.
pub fn xi_m3() -> Form01 {
    Form01 {
        comp: [
            CPoly::from_term(mono(0, 0, 0, 1, 4), CRat::one()),
            CPoly::from_term(mono(0, 0, 1, 0, 4), CRat::from_int(-1)),
        ],
    }
}

/// xi_{-4,1} = (zb1 zb2 dzb1 - zb1^2 dzb2) / r^6.
pub fn xi_m41() -> Form01 {
    Form01 {
        comp: [
            CPoly::from_term(mono(0, 0, 1, 1, 6), CRat::one()),
            CPoly::from_term(mono(0, 0, 2, 0, 6), CRat::from_int(-1)),
        ],
    }
}

/// xi_{-4,2} = (zb2^2 dzb1 - zb1 zb2 dzb2) / r^6.
pub fn xi_m42() -> Form01 {
    Form01 {
        comp: [
            CPoly::from_term(mono(0, 0, 0, 2, 6), CRat::one()),
            CPoly::from_term(mono(0, 0, 1, 1, 6), CRat::from_int(-1)),
        ],
    }
}
