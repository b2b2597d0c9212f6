//! Stereographic charts on round spheres, the contact form of odd spheres,
//! and tensor-product quadrature over links.
//!
//! A link point is carried as stereographic coordinates y in R^m together
//! with the patch (projection from the south or the north pole); nodes are
//! assigned to the patch where |y| <= 1.

use nalgebra::{DMatrix, DVector};

use crate::link_spectrum::sphere_volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Patch {
    North,
    South,
}

/// Chart point of an n-dimensional metric: coordinates plus the link patch.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    pub patch: Patch,
    pub x: Vec<f64>,
}

impl ChartPoint {
    pub fn new(x: Vec<f64>) -> Self {
        ChartPoint {
            patch: Patch::North,
            x,
        }
    }

    pub fn with_patch(patch: Patch, x: Vec<f64>) -> Self {
        ChartPoint { patch, x }
    }
}

/// Ambient embedding u(y) in R^{m+1} of the stereographic chart.
pub fn embed(patch: Patch, y: &[f64]) -> DVector<f64> {
    let m = y.len();
    let q: f64 = y.iter().map(|v| v * v).sum();
    let den = 1.0 + q;
    let mut u = DVector::zeros(m + 1);
    for i in 0..m {
        u[i] = 2.0 * y[i] / den;
    }
    u[m] = (1.0 - q) / den;
    if patch == Patch::South {
        u[m] = -u[m];
    }
    u
}

/// Jacobian du_i / dy_a, (m+1) x m.
pub fn embed_jacobian(patch: Patch, y: &[f64]) -> DMatrix<f64> {
    let m = y.len();
    let q: f64 = y.iter().map(|v| v * v).sum();
    let den = 1.0 + q;
    let mut j = DMatrix::zeros(m + 1, m);
    for i in 0..m {
        for a in 0..m {
            let mut v = -4.0 * y[i] * y[a] / (den * den);
            if i == a {
                v += 2.0 / den;
            }
            j[(i, a)] = v;
        }
    }
    for a in 0..m {
        let mut v = -4.0 * y[a] / (den * den);
        if patch == Patch::South {
            v = -v;
        }
        j[(m, a)] = v;
    }
    j
}

/// Hessian d2 u_i / dy_a dy_b as a vector over i of m x m matrices.
pub fn embed_hessian(patch: Patch, y: &[f64]) -> Vec<DMatrix<f64>> {
    let m = y.len();
    let q: f64 = y.iter().map(|v| v * v).sum();
    let den = 1.0 + q;
    let d2 = den * den;
    let d3 = den * den * den;
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut h = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                let mut v = 16.0 * y[i] * y[a] * y[b] / d3;
                if i == a {
                    v += -4.0 * y[b] / d2;
                }
                if i == b {
                    v += -4.0 * y[a] / d2;
                }
                if a == b {
                    v += -4.0 * y[i] / d2;
                }
                h[(a, b)] = v;
            }
        }
        out.push(h);
    }
    let mut h = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut v = 16.0 * y[a] * y[b] / d3;
            if a == b {
                v += -4.0 / d2;
            }
            if patch == Patch::South {
                v = -v;
            }
            h[(a, b)] = v;
        }
    }
    out.push(h);
    out
}

/// Round metric of S^m in stereographic coordinates: 4 delta / (1+|y|^2)^2.
pub fn round_metric(y: &[f64]) -> DMatrix<f64> {
    let m = y.len();
    let q: f64 = y.iter().map(|v| v * v).sum();
    let c = 4.0 / ((1.0 + q) * (1.0 + q));
    DMatrix::identity(m, m) * c
}

/// d/dy_c of the round metric.
pub fn d_round_metric(y: &[f64]) -> Vec<DMatrix<f64>> {
    let m = y.len();
    let q: f64 = y.iter().map(|v| v * v).sum();
    let dc = -16.0 / (1.0 + q).powi(3);
    (0..m)
        .map(|c| DMatrix::identity(m, m) * (dc * y[c]))
        .collect()
}

/// Contact 1-form of S^{2n-1} (unit length for the round metric) in chart
/// components: eta_a = sum_i (K u)_i du_i/dy_a with K the standard complex
/// rotation pairing ambient coordinates (x_k, y_k).
pub fn contact_form(patch: Patch, y: &[f64]) -> DVector<f64> {
    let u = embed(patch, y);
    let j = embed_jacobian(patch, y);
    let ku = k_rotate(&u);
    j.transpose() * ku
}

/// d/dy_c of the contact form components.
pub fn d_contact_form(patch: Patch, y: &[f64]) -> DMatrix<f64> {
    let m = y.len();
    let u = embed(patch, y);
    let j = embed_jacobian(patch, y);
    let hess = embed_hessian(patch, y);
    let ku = k_rotate(&u);
    let mut out = DMatrix::zeros(m, m); // (a, c) = d eta_a / dy_c
    for c in 0..m {
        let du_c: DVector<f64> = j.column(c).into();
        let kdu = k_rotate(&du_c);
        for a in 0..m {
            let mut v = 0.0;
            for i in 0..u.len() {
                v += kdu[i] * j[(i, a)] + ku[i] * hess[i][(a, c)];
            }
            out[(a, c)] = v;
        }
    }
    out
}

fn k_rotate(u: &DVector<f64>) -> DVector<f64> {
    let n2 = u.len();
    assert!(n2 % 2 == 0, "contact form needs an even ambient dimension");
    let mut out = DVector::zeros(n2);
    for j in 0..n2 / 2 {
        out[2 * j] = -u[2 * j + 1];
        out[2 * j + 1] = u[2 * j];
    }
    out
}

/// Quadrature node on the link: chart coordinates and dVol_{g_L} weight.
#[derive(Debug, Clone)]
pub struct LinkNode {
    pub patch: Patch,
    pub y: Vec<f64>,
    pub weight: f64,
}

/// Tensor-product quadrature over a (possibly quotient) round link.
#[derive(Debug, Clone)]
pub struct LinkQuadrature {
    pub dim: usize,
    pub quotient: usize,
    pub nodes: Vec<LinkNode>,
    pub volume: f64,
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // Newton iteration on Legendre polynomials; nodes on [-1, 1]
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Ambient nodes and weights on S^m (weights sum to Vol(S^m)).
fn ambient_sphere_nodes(m: usize, res: usize) -> Vec<(DVector<f64>, f64)> {
    if m == 1 {
        let n = (4 * res).max(8);
        let w = 2.0 * std::f64::consts::PI / n as f64;
        return (0..n)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                let mut u = DVector::zeros(2);
                u[0] = phi.cos();
                u[1] = phi.sin();
                (u, w)
            })
            .collect();
    }
    let sub = ambient_sphere_nodes(m - 1, res);
    let gl = gauss_legendre(res.max(4));
    let mut out = Vec::with_capacity(sub.len() * gl.len());
    for (t, wt) in &gl {
        // theta in [0, pi], t = cos-substitution: use theta = pi (t+1)/2
        let theta = std::f64::consts::PI * (t + 1.0) / 2.0;
        let jac = std::f64::consts::PI / 2.0 * theta.sin().powi(m as i32 - 1);
        for (v, wv) in &sub {
            let mut u = DVector::zeros(m + 1);
            u[0] = theta.cos();
            for i in 0..m {
                u[i + 1] = theta.sin() * v[i];
            }
            out.push((u, wt * jac * wv));
        }
    }
    out
}

impl LinkQuadrature {
    /// Build quadrature over S^m (quotient order p divides the weights).
    /// `res` is the per-angle resolution; node count grows like res^m.
    pub fn sphere(m: usize, res: usize, quotient: usize) -> LinkQuadrature {
        let ambient = ambient_sphere_nodes(m, res);
        let p = quotient.max(1) as f64;
        let nodes = ambient
            .into_iter()
            .map(|(u, w)| {
                let last = u[m];
                let patch = if last >= 0.0 { Patch::North } else { Patch::South };
                let den = 1.0 + last.abs();
                let y: Vec<f64> = (0..m).map(|i| u[i] / den).collect();
                LinkNode {
                    patch,
                    y,
                    weight: w / p,
                }
            })
            .collect::<Vec<_>>();
        let volume = nodes.iter().map(|n| n.weight).sum();
        LinkQuadrature {
            dim: m,
            quotient: quotient.max(1),
            nodes,
            volume,
        }
    }

    /// Integrate a scalar over the link (weights carry dVol_{g_L}).
    pub fn integrate(&self, f: impl Fn(&LinkNode) -> f64 + Sync) -> f64 {
        use rayon::prelude::*;
        self.nodes.par_iter().map(|n| n.weight * f(n)).sum()
    }

    pub fn exact_volume(&self) -> f64 {
        sphere_volume(self.dim) / self.quotient as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_unit_and_consistent() {
        for patch in [Patch::North, Patch::South] {
            let y = vec![0.3, -0.2, 0.5];
            let u = embed(patch, &y);
            assert!((u.norm() - 1.0).abs() < 1e-14);
            // finite-difference check of the Jacobian
            let j = embed_jacobian(patch, &y);
            let h = 1e-6;
            for a in 0..3 {
                let mut yp = y.clone();
                yp[a] += h;
                let mut ym = y.clone();
                ym[a] -= h;
                let du = (embed(patch, &yp) - embed(patch, &ym)) / (2.0 * h);
                for i in 0..4 {
                    assert!((du[i] - j[(i, a)]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn round_metric_is_pullback_of_ambient() {
        let y = vec![0.4, 0.1, -0.3];
        let j = embed_jacobian(Patch::North, &y);
        let pullback = j.transpose() * &j;
        let g = round_metric(&y);
        assert!((pullback - g).norm() < 1e-13);
    }

    #[test]
    fn contact_form_is_unit_for_round_metric() {
        for patch in [Patch::North, Patch::South] {
            let y = vec![0.2, -0.4, 0.6];
            let eta = contact_form(patch, &y);
            let g = round_metric(&y);
            let ginv = g.try_inverse().unwrap();
            let norm2 = (eta.transpose() * &ginv * &eta)[(0, 0)];
            assert!((norm2 - 1.0).abs() < 1e-12, "contact norm^2 {norm2}");
            // finite-difference check of d_contact_form
            let d = d_contact_form(patch, &y);
            let h = 1e-6;
            for c in 0..3 {
                let mut yp = y.clone();
                yp[c] += h;
                let mut ym = y.clone();
                ym[c] -= h;
                let de = (contact_form(patch, &yp) - contact_form(patch, &ym)) / (2.0 * h);
                for a in 0..3 {
                    assert!((de[a] - d[(a, c)]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn sphere_quadrature_volumes() {
        for (m, res, tol) in [(2usize, 12usize, 1e-10), (3, 10, 1e-9), (5, 8, 1e-5)] {
            let q = LinkQuadrature::sphere(m, res, 1);
            let exact = q.exact_volume();
            assert!(
                (q.volume - exact).abs() / exact < tol,
                "S^{m} volume {} vs {exact}",
                q.volume
            );
        }
        let lens = LinkQuadrature::sphere(3, 8, 2);
        assert!((lens.volume - lens.exact_volume()).abs() / lens.exact_volume() < 1e-8);
    }

    #[test]
    fn quadrature_integrates_harmonics_to_zero() {
        // degree-1 and degree-2 harmonics integrate to zero over the sphere
        let q = LinkQuadrature::sphere(3, 10, 1);
        let i1 = q.integrate(|n| embed(n.patch, &n.y)[0]);
        let i2 = q.integrate(|n| {
            let u = embed(n.patch, &n.y);
            u[0] * u[1]
        });
        assert!(i1.abs() < 1e-11 && i2.abs() < 1e-11, "{i1} {i2}");
    }
}
