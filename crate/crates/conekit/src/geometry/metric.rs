//! Chart-level tensor calculus: Christoffel symbols, the connection
//! difference tensor, scalar curvature (two independent paths) and the
//! linearization of scalar curvature against a reference metric.

use nalgebra::DMatrix;

use crate::error::{ConekitError, Result};

use super::chart::ChartPoint;

/// A metric given by evaluable components on a chart. First derivatives are
/// part of the contract (all built-ins provide them analytically); second
/// derivatives are taken by Richardson-extrapolated central differences of
/// `dg` wherever needed.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn g(&self, p: &ChartPoint) -> DMatrix<f64>;
    /// d_k g_ij for k = 0..dim.
    fn dg(&self, p: &ChartPoint) -> Vec<DMatrix<f64>>;
    /// Claimed decay rate tau of g - g0 relative to the reference cone.
    fn decay_claim(&self) -> Option<f64> {
        None
    }
}

/// Reference cone dr^2 + r^2 * scale^2 * g_{S^m} over a (quotient of a)
/// round sphere; `scale` = 1 is the unit round link.
#[derive(Debug, Clone)]
pub struct ConeMetric {
    pub n_real: usize,
    pub link_scale: f64,
}

impl ConeMetric {
    pub fn flat(n_real: usize) -> Self {
        ConeMetric {
            n_real,
            link_scale: 1.0,
        }
    }

    /// Closed-form Ricci tensor: zero on the r-row/column and
    /// (m-1)(1 - scale^2) g_{S^m} on the link block.
    pub fn ricci(&self, p: &ChartPoint) -> DMatrix<f64> {
        let n = self.n_real;
        let m = n - 1;
        let mut out = DMatrix::zeros(n, n);
        let gs = super::chart::round_metric(&p.x[1..]);
        let factor = (m as f64 - 1.0) * (1.0 - self.link_scale * self.link_scale);
        for a in 0..m {
            for b in 0..m {
                out[(a + 1, b + 1)] = factor * gs[(a, b)];
            }
        }
        out
    }
}

impl MetricField for ConeMetric {
    fn dim(&self) -> usize {
        self.n_real
    }

    fn g(&self, p: &ChartPoint) -> DMatrix<f64> {
        let n = self.n_real;
        let r = p.x[0];
        let gs = super::chart::round_metric(&p.x[1..]);
        let mut out = DMatrix::zeros(n, n);
        out[(0, 0)] = 1.0;
        let s2 = self.link_scale * self.link_scale;
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                out[(a + 1, b + 1)] = r * r * s2 * gs[(a, b)];
            }
        }
        out
    }

    fn dg(&self, p: &ChartPoint) -> Vec<DMatrix<f64>> {
        let n = self.n_real;
        let r = p.x[0];
        let gs = super::chart::round_metric(&p.x[1..]);
        let dgs = super::chart::d_round_metric(&p.x[1..]);
        let s2 = self.link_scale * self.link_scale;
        let mut out = vec![DMatrix::zeros(n, n); n];
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                out[0][(a + 1, b + 1)] = 2.0 * r * s2 * gs[(a, b)];
                for c in 0..n - 1 {
                    out[c + 1][(a + 1, b + 1)] = r * r * s2 * dgs[c][(a, b)];
                }
            }
        }
        out
    }

    fn decay_claim(&self) -> Option<f64> {
        Some(f64::INFINITY)
    }
}

/// The round S^m itself as a standalone m-dimensional metric.
#[derive(Debug, Clone)]
pub struct RoundSphereMetric {
    pub m: usize,
}

impl MetricField for RoundSphereMetric {
    fn dim(&self) -> usize {
        self.m
    }

    fn g(&self, p: &ChartPoint) -> DMatrix<f64> {
        super::chart::round_metric(&p.x)
    }

    fn dg(&self, p: &ChartPoint) -> Vec<DMatrix<f64>> {
        super::chart::d_round_metric(&p.x)
    }
}

/// Euclidean metric in Cartesian coordinates (any dimension).
#[derive(Debug, Clone)]
pub struct EuclideanMetric {
    pub n: usize,
}

impl MetricField for EuclideanMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn g(&self, _p: &ChartPoint) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n)
    }

    fn dg(&self, _p: &ChartPoint) -> Vec<DMatrix<f64>> {
        vec![DMatrix::zeros(self.n, self.n); self.n]
    }
}

/// g(t) = base + t (other - base); analytic in both inputs.
pub struct InterpolatedMetric<'a> {
    pub base: &'a dyn MetricField,
    pub other: &'a dyn MetricField,
    pub t: f64,
}

impl MetricField for InterpolatedMetric<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn g(&self, p: &ChartPoint) -> DMatrix<f64> {
        let gb = self.base.g(p);
        let go = self.other.g(p);
        &gb + (go - &gb) * self.t
    }

    fn dg(&self, p: &ChartPoint) -> Vec<DMatrix<f64>> {
        let db = self.base.dg(p);
        let do_ = self.other.dg(p);
        db.iter()
            .zip(do_)
            .map(|(b, o)| b + (o - b) * self.t)
            .collect()
    }
}

fn invert(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone().try_inverse().ok_or(ConekitError::SingularMetric)
}

/// Christoffel symbols Gamma^k_{ij} from components and first derivatives.
pub fn christoffel_from(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let n = g.nrows();
    let ginv = invert(g)?;
    let mut out = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[k][(i, j)] = 0.5 * acc;
                out[k][(j, i)] = 0.5 * acc;
            }
        }
    }
    Ok(out)
}

/// Levi-Civita Christoffel symbols of `metric` at `p`.
pub fn christoffel(metric: &dyn MetricField, p: &ChartPoint) -> Result<Vec<DMatrix<f64>>> {
    christoffel_from(&metric.g(p), &metric.dg(p))
}

fn shifted(p: &ChartPoint, k: usize, h: f64) -> ChartPoint {
    let mut q = p.clone();
    q.x[k] += h;
    q
}

/// Fourth-order central difference with one Richardson step; returns the
/// value and a disagreement estimate.
fn richardson_tensor<F>(eval: F, p: &ChartPoint, k: usize, h: f64) -> (Vec<DMatrix<f64>>, f64)
where
    F: Fn(&ChartPoint) -> Vec<DMatrix<f64>>,
{
    let stencil = |h: f64| -> Vec<DMatrix<f64>> {
        let fp2 = eval(&shifted(p, k, 2.0 * h));
        let fp1 = eval(&shifted(p, k, h));
        let fm1 = eval(&shifted(p, k, -h));
        let fm2 = eval(&shifted(p, k, -2.0 * h));
        fp2.iter()
            .zip(&fp1)
            .zip(&fm1)
            .zip(&fm2)
            .map(|(((a2, a1), b1), b2)| (b2 - a2 + (a1 - b1) * 8.0) / (12.0 * h))
            .collect()
    };
    let c1 = stencil(h);
    let c2 = stencil(h / 2.0);
    // 4th order: e(h/2) = e(h)/16; Richardson: (16 c2 - c1) / 15
    let value: Vec<DMatrix<f64>> = c1
        .iter()
        .zip(&c2)
        .map(|(a, b)| (b * 16.0 - a) / 15.0)
        .collect();
    let err = c1
        .iter()
        .zip(&c2)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    (value, err)
}

/// d_l Gamma^k_{ij} by Richardson finite differences of the analytic
/// Christoffels. Returns (dGamma[l][k], error estimate).
pub fn d_christoffel(
    metric: &dyn MetricField,
    p: &ChartPoint,
    h: f64,
) -> Result<(Vec<Vec<DMatrix<f64>>>, f64)> {
    let n = metric.dim();
    let mut out = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for l in 0..n {
        let (v, e) = richardson_tensor(
            |q| christoffel(metric, q).expect("christoffel in stencil"),
            p,
            l,
            h,
        );
        worst = worst.max(e);
        out.push(v);
    }
    Ok((out, worst))
}

/// Connection difference A^k_{ij} = 1/2 g^{kl} (nabla-bar_i g_jl +
/// nabla-bar_j g_il - nabla-bar_l g_ij) of g against gbar.
pub fn connection_difference(
    g: &dyn MetricField,
    gbar: &dyn MetricField,
    p: &ChartPoint,
) -> Result<Vec<DMatrix<f64>>> {
    let n = g.dim();
    let gm = g.g(p);
    let dgm = g.dg(p);
    let ginv = invert(&gm)?;
    let gamma_bar = christoffel(gbar, p)?;
    // covariant derivative of g with respect to gbar
    let mut nabla = vec![DMatrix::zeros(n, n); n]; // nabla[k][(i,j)] = nabla-bar_k g_ij
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = dgm[k][(i, j)];
                for c in 0..n {
                    acc -= gamma_bar[c][(k, i)] * gm[(c, j)] + gamma_bar[c][(k, j)] * gm[(i, c)];
                }
                nabla[k][(i, j)] = acc;
            }
        }
    }
    let mut out = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[(k, l)] * (nabla[i][(j, l)] + nabla[j][(i, l)] - nabla[l][(i, j)]);
                }
                out[k][(i, j)] = 0.5 * acc;
            }
        }
    }
    Ok(out)
}

/// Ricci tensor by the direct coordinate formula, using finite-difference
/// derivatives of the analytic Christoffels.
pub fn ricci_direct(metric: &dyn MetricField, p: &ChartPoint, h: f64) -> Result<(DMatrix<f64>, f64)> {
    let n = metric.dim();
    let gamma = christoffel(metric, p)?;
    let (dgamma, err) = d_christoffel(metric, p, h)?;
    let mut ric = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += dgamma[k][k][(i, j)] - dgamma[i][k][(k, j)];
                for l in 0..n {
                    acc += gamma[k][(k, l)] * gamma[l][(i, j)] - gamma[k][(i, l)] * gamma[l][(k, j)];
                }
            }
            ric[(i, j)] = acc;
        }
    }
    Ok((ric, err))
}

/// Scalar curvature by the direct path.
pub fn scalar_direct(metric: &dyn MetricField, p: &ChartPoint, h: f64) -> Result<(f64, f64)> {
    let (ric, err) = ricci_direct(metric, p, h)?;
    let ginv = invert(&metric.g(p))?;
    Ok(((&ginv * ric).trace(), err))
}

/// Scalar curvature through the Ricci-difference formula against a reference
/// cone: R_ij = Rbar_ij + nabla-bar_k A^k_ij - nabla-bar_i A^k_kj
///             + A^k_kl A^l_ij - A^k_jl A^l_ik.
pub fn scalar_via_reference(
    g: &dyn MetricField,
    reference: &ConeMetric,
    p: &ChartPoint,
    h: f64,
) -> Result<(f64, f64)> {
    let n = g.dim();
    let gamma_bar = christoffel(reference, p)?;
    let a = connection_difference(g, reference, p)?;
    // finite differences of A, with gbar-corrections to covariant form
    let mut da = Vec::with_capacity(n); // da[l][k] = d_l A^k
    let mut worst: f64 = 0.0;
    for l in 0..n {
        let (v, e) = richardson_tensor(
            |q| connection_difference(g, reference, q).expect("A in stencil"),
            p,
            l,
            h,
        );
        worst = worst.max(e);
        da.push(v);
    }
    let nabla_a = |kcov: usize, kup: usize, i: usize, j: usize| -> f64 {
        let mut acc = da[kcov][kup][(i, j)];
        for c in 0..n {
            acc += gamma_bar[kup][(kcov, c)] * a[c][(i, j)]
                - gamma_bar[c][(kcov, i)] * a[kup][(c, j)]
                - gamma_bar[c][(kcov, j)] * a[kup][(i, c)];
        }
        acc
    };
    let rbar = reference.ricci(p);
    let mut ric = rbar;
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += nabla_a(k, k, i, j) - nabla_a(i, k, k, j);
                for l in 0..n {
                    acc += a[k][(k, l)] * a[l][(i, j)] - a[k][(j, l)] * a[l][(i, k)];
                }
            }
            ric[(i, j)] += acc;
        }
    }
    let ginv = invert(&g.g(p))?;
    Ok(((&ginv * ric).trace(), worst))
}

/// Scalar curvature with the dual-path agreement check. Returns the direct
/// value; errors when the Richardson diagnostics disagree beyond tolerance.
pub fn scalar_curvature(
    g: &dyn MetricField,
    reference: Option<&ConeMetric>,
    p: &ChartPoint,
    h: f64,
    agree_tol: f64,
) -> Result<ScalarCurvature> {
    let (direct, err1) = scalar_direct(g, p, h)?;
    let via_ref = match reference {
        Some(r) => Some(scalar_via_reference(g, r, p, h)?),
        None => None,
    };
    if let Some((v, err2)) = via_ref {
        let scale = direct.abs().max(v.abs()).max(1.0);
        if (direct - v).abs() > agree_tol * scale + 10.0 * (err1 + err2) {
            return Err(ConekitError::StepSizeFailure((direct - v).abs()));
        }
        Ok(ScalarCurvature {
            value: direct,
            reference_path: Some(v),
            fd_error_estimate: err1.max(err2),
        })
    } else {
        Ok(ScalarCurvature {
            value: direct,
            reference_path: None,
            fd_error_estimate: err1,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScalarCurvature {
    pub value: f64,
    pub reference_path: Option<f64>,
    pub fd_error_estimate: f64,
}

/// Linearized scalar curvature at gbar in the direction g - gbar:
/// DR = -<Ric_bar, h>_bar + div-bar div-bar h - Lap-bar tr_bar h.
pub fn linearized_scalar(
    g: &dyn MetricField,
    gbar: &dyn MetricField,
    rbar: &DMatrix<f64>,
    p: &ChartPoint,
    h_step: f64,
) -> Result<f64> {
    let n = g.dim();
    let gb = gbar.g(p);
    let gbinv = invert(&gb)?;
    let hmat = g.g(p) - &gb;
    let gamma_bar = christoffel(gbar, p)?;
    let (dgamma_bar, _) = d_christoffel(gbar, p, h_step)?;

    // -<Ric, h>
    let mut term_ric = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    term_ric -= gbinv[(i, k)] * gbinv[(j, l)] * rbar[(i, j)] * hmat[(k, l)];
                }
            }
        }
    }

    // first and second coordinate derivatives of h
    let dh: Vec<DMatrix<f64>> = {
        let dgm = g.dg(p);
        let dgb = gbar.dg(p);
        dgm.iter().zip(dgb).map(|(a, b)| a - b).collect()
    };
    let mut d2h = Vec::with_capacity(n); // d2h[a][b] = d_a d_b h
    let mut _err: f64 = 0.0;
    for a in 0..n {
        let (v, e) = richardson_tensor(
            |q| {
                let dgm = g.dg(q);
                let dgb = gbar.dg(q);
                dgm.iter().zip(dgb).map(|(x, y)| x - y).collect()
            },
            p,
            a,
            h_step,
        );
        _err = _err.max(e);
        d2h.push(v);
    }

    // nabla h and nabla^2 h
    let nabla_h = |a: usize, i: usize, j: usize| -> f64 {
        let mut acc = dh[a][(i, j)];
        for c in 0..n {
            acc -= gamma_bar[c][(a, i)] * hmat[(c, j)] + gamma_bar[c][(a, j)] * hmat[(i, c)];
        }
        acc
    };
    let d_nabla_h = |b: usize, a: usize, i: usize, j: usize| -> f64 {
        let mut acc = d2h[b][a][(i, j)];
        for c in 0..n {
            acc -= dgamma_bar[b][c][(a, i)] * hmat[(c, j)]
                + gamma_bar[c][(a, i)] * dh[b][(c, j)]
                + dgamma_bar[b][c][(a, j)] * hmat[(i, c)]
                + gamma_bar[c][(a, j)] * dh[b][(i, c)];
        }
        acc
    };
    let nabla2_h = |b: usize, a: usize, i: usize, j: usize| -> f64 {
        let mut acc = d_nabla_h(b, a, i, j);
        for c in 0..n {
            acc -= gamma_bar[c][(b, a)] * nabla_h(c, i, j)
                + gamma_bar[c][(b, i)] * nabla_h(a, c, j)
                + gamma_bar[c][(b, j)] * nabla_h(a, i, c);
        }
        acc
    };

    // div div h = g^{ja} g^{ib} nabla_a nabla_b h_ij
    let mut divdiv = 0.0;
    for j in 0..n {
        for a in 0..n {
            for i in 0..n {
                for b in 0..n {
                    divdiv += gbinv[(j, a)] * gbinv[(i, b)] * nabla2_h(a, b, i, j);
                }
            }
        }
    }

    // Lap tr h: tr h as a scalar field, Laplacian via its coordinate derivs
    let trace_at = |q: &ChartPoint| -> f64 {
        let gb = gbar.g(q);
        let hq = g.g(q) - &gb;
        (gb.try_inverse().unwrap() * hq).trace()
    };
    let mut dtr = vec![0.0; n];
    let mut d2tr = DMatrix::zeros(n, n);
    for a in 0..n {
        let f = |hh: f64| -> f64 {
            (trace_at(&shifted(p, a, -2.0 * hh)) - 8.0 * trace_at(&shifted(p, a, -hh))
                + 8.0 * trace_at(&shifted(p, a, hh))
                - trace_at(&shifted(p, a, 2.0 * hh)))
                / (12.0 * hh)
        };
        let c1 = f(h_step);
        let c2 = f(h_step / 2.0);
        dtr[a] = (16.0 * c2 - c1) / 15.0;
    }
    for a in 0..n {
        for b in 0..=a {
            let f = |hh: f64| -> f64 {
                if a == b {
                    (-trace_at(&shifted(p, a, -2.0 * hh)) + 16.0 * trace_at(&shifted(p, a, -hh))
                        - 30.0 * trace_at(p)
                        + 16.0 * trace_at(&shifted(p, a, hh))
                        - trace_at(&shifted(p, a, 2.0 * hh)))
                        / (12.0 * hh * hh)
                } else {
                    let pp = |sa: f64, sb: f64| {
                        let mut q = p.clone();
                        q.x[a] += sa * hh;
                        q.x[b] += sb * hh;
                        trace_at(&q)
                    };
                    (pp(1.0, 1.0) - pp(1.0, -1.0) - pp(-1.0, 1.0) + pp(-1.0, -1.0)) / (4.0 * hh * hh)
                }
            };
            let c1 = f(h_step);
            let c2 = f(h_step / 2.0);
            let order = if a == b { 16.0 } else { 4.0 };
            let v = (order * c2 - c1) / (order - 1.0);
            d2tr[(a, b)] = v;
            d2tr[(b, a)] = v;
        }
    }
    let mut lap_tr = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut acc = d2tr[(a, b)];
            for c in 0..n {
                acc -= gamma_bar[c][(a, b)] * dtr[c];
            }
            lap_tr += gbinv[(a, b)] * acc;
        }
    }

    Ok(term_ric + divdiv - lap_tr)
}

/// Finite-difference derivative (R(gbar + t h) - R(gbar)) / t of the scalar
/// curvature at gbar towards g.
pub fn scalar_linearization_fd(
    g: &dyn MetricField,
    gbar: &dyn MetricField,
    p: &ChartPoint,
    t: f64,
    h_step: f64,
) -> Result<f64> {
    let perturbed = InterpolatedMetric {
        base: gbar,
        other: g,
        t,
    };
    let (r1, _) = scalar_direct(&perturbed, p, h_step)?;
    let (r0, _) = scalar_direct(gbar, p, h_step)?;
    Ok((r1 - r0) / t)
}
