//! Built-in metric families on asymptotic charts, all with analytic first
//! derivatives: the spatial Schwarzschild slice, radial Kahler potential
//! metrics (log / power models, Eguchi-Hanson), and a compactly supported
//! radial gauge reparameterization of the flat cone.

use nalgebra::DMatrix;
use std::sync::Arc;

use super::chart::{contact_form, d_contact_form, d_round_metric, round_metric, ChartPoint};
use super::metric::{ConeMetric, MetricField};

/// Radial Kahler potential u(s); only derivatives enter the metric. The
/// associated Kahler form is omega = i del dbar u, flat at u = s^2/2.
pub trait RadialPotential: Send + Sync {
    fn d1(&self, s: f64) -> f64;
    fn d2(&self, s: f64) -> f64;
    fn d3(&self, s: f64) -> f64;
    /// Claimed decay order of the metric perturbation against the flat cone.
    fn perturbation_decay(&self) -> f64;
}

/// u = s^2/2.
pub struct FlatPotential;

impl RadialPotential for FlatPotential {
    fn d1(&self, s: f64) -> f64 {
        s
    }
    fn d2(&self, _s: f64) -> f64 {
        1.0
    }
    fn d3(&self, _s: f64) -> f64 {
        0.0
    }
    fn perturbation_decay(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

/// u = s^2/2 + c log s (the n = 2 mass model).
pub struct LogPotential {
    pub c: f64,
}

impl RadialPotential for LogPotential {
    fn d1(&self, s: f64) -> f64 {
        s + self.c / s
    }
    fn d2(&self, s: f64) -> f64 {
        1.0 - self.c / (s * s)
    }
    fn d3(&self, s: f64) -> f64 {
        2.0 * self.c / (s * s * s)
    }
    fn perturbation_decay(&self) -> f64 {
        -2.0
    }
}

/// u = s^2/2 + c s^q (q = 4 - 2n for the mass model in complex dimension n).
pub struct PowerPotential {
    pub c: f64,
    pub q: f64,
}

impl RadialPotential for PowerPotential {
    fn d1(&self, s: f64) -> f64 {
        s + self.c * self.q * s.powf(self.q - 1.0)
    }
    fn d2(&self, s: f64) -> f64 {
        1.0 + self.c * self.q * (self.q - 1.0) * s.powf(self.q - 2.0)
    }
    fn d3(&self, s: f64) -> f64 {
        self.c * self.q * (self.q - 1.0) * (self.q - 2.0) * s.powf(self.q - 3.0)
    }
    fn perturbation_decay(&self) -> f64 {
        self.q - 2.0
    }
}

/// Eguchi-Hanson: u' = sqrt(s^4 + a^4)/s on C^2 \ {0} (Z_2-quotient link).
pub struct EguchiHansonPotential {
    pub a: f64,
}

impl RadialPotential for EguchiHansonPotential {
    fn d1(&self, s: f64) -> f64 {
        (s.powi(4) + self.a.powi(4)).sqrt() / s
    }
    fn d2(&self, s: f64) -> f64 {
        let t = (s.powi(4) + self.a.powi(4)).sqrt();
        (s.powi(4) - self.a.powi(4)) / (s * s * t)
    }
    fn d3(&self, s: f64) -> f64 {
        let a4 = self.a.powi(4);
        let t = (s.powi(4) + a4).sqrt();
        4.0 * s / t - 2.0 * (s.powi(4) - a4) / (s.powi(3) * t)
            - 2.0 * s * (s.powi(4) - a4) / (t * t * t)
    }
    fn perturbation_decay(&self) -> f64 {
        -4.0
    }
}

/// Riemannian metric of omega = i del dbar u for a radial potential on C^n:
/// in the chart (s, link), with V = u'/s and W = (u'' + u'/s)/2,
///
/// ```text
/// g = W ds^2 + s^2 [ V (g_S - eta (x) eta) + W eta (x) eta ]
/// ```
///
/// where eta is the contact form of S^{2n-1}.
pub struct PotentialMetric {
    pub n_complex: usize,
    pub potential: Arc<dyn RadialPotential>,
    pub quotient: usize,
}

impl PotentialMetric {
    pub fn n_real(&self) -> usize {
        2 * self.n_complex
    }

    fn v_w(&self, s: f64) -> (f64, f64, f64, f64) {
        let d1 = self.potential.d1(s);
        let d2 = self.potential.d2(s);
        let d3 = self.potential.d3(s);
        let v = d1 / s;
        let w = (d2 + v) / 2.0;
        let dv = (d2 * s - d1) / (s * s);
        let dw = (d3 + dv) / 2.0;
        (v, w, dv, dw)
    }

    /// Positivity of the induced (1,1)-form at a radius (both eigenvalues).
    pub fn is_positive_at(&self, s: f64) -> bool {
        let (v, w, _, _) = self.v_w(s);
        v > 0.0 && w > 0.0
    }

    /// Hermitian components u_{i jbar} of the Kahler form at a point of C^n,
    /// u_{i jbar} = (u'/2s) delta_ij + (zbar_i z_j / 4 s^2)(u'' - u'/s).
    pub fn hermitian_components(&self, z: &[num::complex::Complex64]) -> DMatrix<num::complex::Complex64> {
        use num::complex::Complex64;
        let n = self.n_complex;
        assert_eq!(z.len(), n);
        let s2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        let s = s2.sqrt();
        let d1 = self.potential.d1(s);
        let d2 = self.potential.d2(s);
        let diag = d1 / (2.0 * s);
        let rank1 = (d2 - d1 / s) / (4.0 * s2);
        let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                let mut v = z[i].conj() * z[j] * rank1;
                if i == j {
                    v += Complex64::new(diag, 0.0);
                }
                out[(i, j)] = v;
            }
        }
        out
    }
}

impl MetricField for PotentialMetric {
    fn dim(&self) -> usize {
        self.n_real()
    }

    fn g(&self, p: &ChartPoint) -> DMatrix<f64> {
        let n = self.dim();
        let m = n - 1;
        let s = p.x[0];
        let y = &p.x[1..];
        let (v, w, _, _) = self.v_w(s);
        let gs = round_metric(y);
        let eta = contact_form(p.patch, y);
        let mut g = DMatrix::zeros(n, n);
        g[(0, 0)] = w;
        for a in 0..m {
            for b in 0..m {
                g[(a + 1, b + 1)] = s * s * (v * gs[(a, b)] + (w - v) * eta[a] * eta[b]);
            }
        }
        g
    }

    fn dg(&self, p: &ChartPoint) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        let m = n - 1;
        let s = p.x[0];
        let y = &p.x[1..];
        let (v, w, dv, dw) = self.v_w(s);
        let gs = round_metric(y);
        let dgs = d_round_metric(y);
        let eta = contact_form(p.patch, y);
        let deta = d_contact_form(p.patch, y);
        let mut out = vec![DMatrix::zeros(n, n); n];
        out[0][(0, 0)] = dw;
        for a in 0..m {
            for b in 0..m {
                out[0][(a + 1, b + 1)] = 2.0 * s * (v * gs[(a, b)] + (w - v) * eta[a] * eta[b])
                    + s * s * (dv * gs[(a, b)] + (dw - dv) * eta[a] * eta[b]);
                for c in 0..m {
                    out[c + 1][(a + 1, b + 1)] = s
                        * s
                        * (v * dgs[c][(a, b)]
                            + (w - v) * (deta[(a, c)] * eta[b] + eta[a] * deta[(b, c)]));
                }
            }
        }
        out
    }

    fn decay_claim(&self) -> Option<f64> {
        Some(-self.potential.perturbation_decay())
    }
}

/// Spatial Schwarzschild slice: g = (1 - 2m r^{2-N})^{-1} dr^2 + r^2 g_{S^{N-1}}.
pub struct SchwarzschildSlice {
    pub n_real: usize,
    pub mass: f64,
}

impl MetricField for SchwarzschildSlice {
    fn dim(&self) -> usize {
        self.n_real
    }

    fn g(&self, p: &ChartPoint) -> DMatrix<f64> {
        let mut g = ConeMetric::flat(self.n_real).g(p);
        let r = p.x[0];
        let f = 1.0 - 2.0 * self.mass * r.powf(2.0 - self.n_real as f64);
        g[(0, 0)] = 1.0 / f;
        g
    }

    fn dg(&self, p: &ChartPoint) -> Vec<DMatrix<f64>> {
        let mut dg = ConeMetric::flat(self.n_real).dg(p);
        let r = p.x[0];
        let nf = self.n_real as f64;
        let f = 1.0 - 2.0 * self.mass * r.powf(2.0 - nf);
        let df = -2.0 * self.mass * (2.0 - nf) * r.powf(1.0 - nf);
        dg[0][(0, 0)] = -df / (f * f);
        dg
    }

    fn decay_claim(&self) -> Option<f64> {
        Some(self.n_real as f64 - 2.0)
    }
}

/// Pullback of the flat cone under the radial reparameterization
/// s -> rho(s) = s (1 + eps B(s)) with B a C^2 bump supported in (s0, s1);
/// the metric equals the flat cone outside the support.
pub struct GaugeBump {
    pub n_real: usize,
    pub eps: f64,
    pub support: (f64, f64),
}

impl GaugeBump {
    fn bump(&self, s: f64) -> (f64, f64, f64) {
        let (s0, s1) = self.support;
        if s <= s0 || s >= s1 {
            return (0.0, 0.0, 0.0);
        }
        let norm = ((s1 - s0) / 2.0).powi(6);
        let a = s - s0;
        let b = s1 - s;
        let v = a.powi(3) * b.powi(3) / norm;
        let dv = (3.0 * a.powi(2) * b.powi(3) - 3.0 * a.powi(3) * b.powi(2)) / norm;
        let d2v = (6.0 * a * b.powi(3) - 18.0 * a.powi(2) * b.powi(2) + 6.0 * a.powi(3) * b) / norm;
        (v, dv, d2v)
    }

    fn rho(&self, s: f64) -> (f64, f64, f64) {
        let (v, dv, d2v) = self.bump(s);
        let rho = s * (1.0 + self.eps * v);
        let drho = 1.0 + self.eps * (v + s * dv);
        let d2rho = self.eps * (2.0 * dv + s * d2v);
        (rho, drho, d2rho)
    }
}

impl MetricField for GaugeBump {
    fn dim(&self) -> usize {
        self.n_real
    }

    fn g(&self, p: &ChartPoint) -> DMatrix<f64> {
        let n = self.n_real;
        let (rho, drho, _) = self.rho(p.x[0]);
        let gs = round_metric(&p.x[1..]);
        let mut g = DMatrix::zeros(n, n);
        g[(0, 0)] = drho * drho;
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                g[(a + 1, b + 1)] = rho * rho * gs[(a, b)];
            }
        }
        g
    }

    fn dg(&self, p: &ChartPoint) -> Vec<DMatrix<f64>> {
        let n = self.n_real;
        let (rho, drho, d2rho) = self.rho(p.x[0]);
        let gs = round_metric(&p.x[1..]);
        let dgs = d_round_metric(&p.x[1..]);
        let mut out = vec![DMatrix::zeros(n, n); n];
        out[0][(0, 0)] = 2.0 * drho * d2rho;
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                out[0][(a + 1, b + 1)] = 2.0 * rho * drho * gs[(a, b)];
                for c in 0..n - 1 {
                    out[c + 1][(a + 1, b + 1)] = rho * rho * dgs[c][(a, b)];
                }
            }
        }
        out
    }

    fn decay_claim(&self) -> Option<f64> {
        Some(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::Patch;
    use crate::geometry::metric::{scalar_curvature, scalar_direct};

    fn pt(x: Vec<f64>) -> ChartPoint {
        ChartPoint::with_patch(Patch::North, x)
    }

    #[test]
    fn flat_potential_reproduces_cone() {
        let flat = PotentialMetric {
            n_complex: 2,
            potential: Arc::new(FlatPotential),
            quotient: 1,
        };
        let cone = ConeMetric::flat(4);
        let p = pt(vec![2.7, 0.2, -0.5, 0.3]);
        assert!((flat.g(&p) - cone.g(&p)).norm() < 1e-13);
        let dflat = flat.dg(&p);
        let dcone = cone.dg(&p);
        for k in 0..4 {
            assert!((&dflat[k] - &dcone[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_dg_matches_finite_differences() {
        let burns = PotentialMetric {
            n_complex: 2,
            potential: Arc::new(LogPotential { c: 0.3 }),
            quotient: 1,
        };
        let p = pt(vec![1.9, 0.25, -0.4, 0.15]);
        let dg = burns.dg(&p);
        let h = 1e-6;
        for k in 0..4 {
            let mut pp = p.clone();
            pp.x[k] += h;
            let mut pm = p.clone();
            pm.x[k] -= h;
            let fd = (burns.g(&pp) - burns.g(&pm)) / (2.0 * h);
            assert!(
                (&dg[k] - &fd).norm() < 1e-7,
                "dg mismatch in direction {k}: {}",
                (&dg[k] - fd).norm()
            );
        }
    }

    #[test]
    fn schwarzschild_slice_is_scalar_flat() {
        for n in [3usize, 4] {
            let g = SchwarzschildSlice {
                n_real: n,
                mass: 0.7,
            };
            let p = pt(vec![3.0, 0.3, -0.2, 0.4][..n].to_vec());
            let sc = scalar_curvature(&g, Some(&ConeMetric::flat(n)), &p, 0.02, 1e-5).unwrap();
            assert!(sc.value.abs() < 1e-6, "R = {} for n = {n}", sc.value);
            assert!(sc.reference_path.unwrap().abs() < 1e-5);
        }
    }

    #[test]
    fn eguchi_hanson_is_scalar_flat() {
        let eh = PotentialMetric {
            n_complex: 2,
            potential: Arc::new(EguchiHansonPotential { a: 1.0 }),
            quotient: 2,
        };
        let p = pt(vec![2.1, 0.2, -0.3, 0.1]);
        let (r, _) = scalar_direct(&eh, &p, 0.02).unwrap();
        assert!(r.abs() < 1e-6, "EH scalar curvature {r}");
    }

    #[test]
    fn log_model_is_scalar_flat() {
        // the n = 2 log-potential family is scalar flat identically (the
        // scalar-flat Kahler family behind the Burns metric), checked
        // independently with exact symbolic curvature at sample points
        for (s, c) in [(2.0, 0.1), (1.4, -0.05), (3.3, 0.25)] {
            let m = PotentialMetric {
                n_complex: 2,
                potential: Arc::new(LogPotential { c }),
                quotient: 1,
            };
            let p = pt(vec![s, 0.15, -0.2, 0.3]);
            let (r, _) = scalar_direct(&m, &p, 0.02).unwrap();
            assert!(r.abs() < 1e-5, "R = {r} at s = {s}, c = {c}");
        }
    }

    #[test]
    fn gauge_bump_is_flat_and_trivial_outside_support() {
        let gb = GaugeBump {
            n_real: 4,
            eps: 0.05,
            support: (2.0, 5.0),
        };
        let cone = ConeMetric::flat(4);
        let outside = pt(vec![7.0, 0.1, 0.2, -0.3]);
        assert!((gb.g(&outside) - cone.g(&outside)).norm() == 0.0);
        let inside = pt(vec![3.0, 0.1, 0.2, -0.3]);
        assert!((gb.g(&inside) - cone.g(&inside)).norm() > 1e-4);
        // pullback of the flat metric stays flat
        let (r, _) = scalar_direct(&gb, &inside, 0.01).unwrap();
        assert!(r.abs() < 1e-6, "gauge metric scalar curvature {r}");
    }

    #[test]
    fn positivity_check() {
        let burns = PotentialMetric {
            n_complex: 2,
            potential: Arc::new(LogPotential { c: -0.5 }),
            quotient: 1,
        };
        assert!(burns.is_positive_at(3.0));
        assert!(!burns.is_positive_at(0.5));
    }
}
