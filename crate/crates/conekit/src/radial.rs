//! Per-mode radial ODE solvers for the cone Laplacian.
//!
//! All three mode families reduce to the scalar problem
//!
//! ```text
//! -y'' - (p/r) y' + (q/r^2) y = w        on [1, oo)
//! ```
//!
//! whose homogeneous solutions are r^{a+-} with a^2 + (p-1) a - q = 0.
//! Solutions are produced by numerical quadrature of the explicit
//! variation-of-parameters kernel (never by time stepping), preserving the
//! branch structure: when a+ exceeds the target order the a+ integral runs
//! from infinity and the growing coefficients are suppressed exactly by the
//! choice of data at r = 1.
//!
//! The degenerate case p = 1, q = 0 (cone dimension 4 acting on a coclosed
//! mode with eigenvalue 0) is handled by the explicit log kernel.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{ConekitError, Result};
use crate::grid::{self, RadialGrid};
use crate::link_spectrum::LinkSpectrum;

/// Right-hand side of a mode problem: an evaluable profile with a claimed
/// decay order |f| = O(r^decay_order) used for tail substitution.
#[derive(Clone)]
pub struct Rhs {
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub decay_order: f64,
    /// Whether the closure may be evaluated beyond the grid end (analytic
    /// profiles yes, grid-interpolated ones no).
    pub extendable: bool,
}

impl Rhs {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, decay_order: f64) -> Self {
        Rhs {
            f: Arc::new(f),
            df: None,
            decay_order,
            extendable: true,
        }
    }

    pub fn with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        decay_order: f64,
    ) -> Self {
        Rhs {
            f: Arc::new(f),
            df: Some(Arc::new(df)),
            decay_order,
            extendable: true,
        }
    }

    pub fn non_extendable(mut self) -> Self {
        self.extendable = false;
        self
    }

    pub fn zero() -> Self {
        Rhs::new(|_| 0.0, f64::NEG_INFINITY)
    }

    /// c * r^e
    pub fn power(c: f64, e: f64) -> Self {
        Rhs::with_derivative(
            move |r: f64| c * r.powf(e),
            move |r: f64| c * e * r.powf(e - 1.0),
            e,
        )
    }

    fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    fn eval_deriv(&self, r: f64) -> f64 {
        match &self.df {
            Some(df) => df(r),
            None => {
                let h = 1e-4 * r.max(1.0);
                ((self.f)(r - 2.0 * h) - 8.0 * (self.f)(r - h) + 8.0 * (self.f)(r + h)
                    - (self.f)(r + 2.0 * h))
                    / (12.0 * h)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeKind {
    Coclosed,
    ExactPair,
    Function,
}

#[derive(Clone)]
pub struct SolverOptions {
    pub gap_tol: f64,
    /// Relative tolerance on the analytic tail of improper integrals.
    pub tail_tol: f64,
    /// Gate on the relative accuracy of the grid derivative of v.
    pub diff_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tol: crate::indicial::DEFAULT_GAP_TOL,
            tail_tol: 1e-7,
            diff_tol: 1e-5,
        }
    }
}

/// A single Fourier coefficient function of r.
#[derive(Clone)]
pub struct ModeProblem {
    pub kind: ModeKind,
    /// Real cone dimension n >= 4.
    pub n: usize,
    /// lambda'' (coclosed), lambda' (pair/function).
    pub eigenvalue: f64,
    /// [w] for coclosed, [u, v] for exact pairs, [f] for functions.
    pub rhs: Vec<Rhs>,
    /// Target rate rho of the source 1-form/function data.
    pub target_rate: f64,
    /// Optional data at r = 1, per solved component ((E, g) for pairs).
    pub data_at_one: Vec<Option<(f64, f64)>>,
    pub grid: Arc<RadialGrid>,
    pub opts: SolverOptions,
}

impl ModeProblem {
    pub fn coclosed(n: usize, lambda: f64, w: Rhs, rho: f64) -> Self {
        ModeProblem {
            kind: ModeKind::Coclosed,
            n,
            eigenvalue: lambda,
            rhs: vec![w],
            target_rate: rho,
            data_at_one: Vec::new(),
            grid: RadialGrid::default_solver(),
            opts: SolverOptions::default(),
        }
    }

    pub fn exact_pair(n: usize, lambda: f64, u: Rhs, v: Rhs, rho: f64) -> Self {
        ModeProblem {
            kind: ModeKind::ExactPair,
            n,
            eigenvalue: lambda,
            rhs: vec![u, v],
            target_rate: rho,
            data_at_one: Vec::new(),
            grid: RadialGrid::default_solver(),
            opts: SolverOptions::default(),
        }
    }

    pub fn function(n: usize, lambda: f64, f: Rhs, rho: f64) -> Self {
        ModeProblem {
            kind: ModeKind::Function,
            n,
            eigenvalue: lambda,
            rhs: vec![f],
            target_rate: rho,
            data_at_one: Vec::new(),
            grid: RadialGrid::default_solver(),
            opts: SolverOptions::default(),
        }
    }

    pub fn with_grid(mut self, grid: Arc<RadialGrid>) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_data(mut self, data: Vec<Option<(f64, f64)>>) -> Self {
        self.data_at_one = data;
        self
    }
}

// ---------------------------------------------------------------------------
// the scalar kernel
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
enum KernelBranch {
    /// a+ integral from infinity (a- < target < a+).
    FromInfinity,
    /// both integrals from 1 (target above a+).
    FromOne,
    /// both integrals from infinity (target below a-); no data freedom.
    BothFromInfinity,
    /// double root at 0: homogeneous solutions 1 and log r.
    Log,
}

/// Cumulative integrals of s^e w(s) along the grid, with analytic tail.
struct CumulativeIntegral {
    grid: Arc<RadialGrid>,
    exponent: f64,
    rhs: Rhs,
    /// value of the integral at every grid node
    at_nodes: Vec<f64>,
    /// log-weighted integrand moment (only for the log kernel's J1)
    log_weight: bool,
    tail: f64,
}

impl CumulativeIntegral {
    fn integrand(&self, s: f64) -> f64 {
        let base = s.powf(self.exponent) * self.rhs.eval(s);
        if self.log_weight {
            base * s.ln()
        } else {
            base
        }
    }

    fn segment(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for (x, w) in grid::gl8_nodes(a, b) {
            acc += w * self.integrand(x);
        }
        acc
    }

    fn from_one(grid: Arc<RadialGrid>, exponent: f64, rhs: Rhs, log_weight: bool) -> Self {
        let mut me = CumulativeIntegral {
            grid: grid.clone(),
            exponent,
            rhs,
            at_nodes: vec![0.0; grid.len()],
            log_weight,
            tail: 0.0,
        };
        let mut acc = 0.0;
        for k in 1..grid.len() {
            acc += me.segment(grid.r[k - 1], grid.r[k]);
            me.at_nodes[k] = acc;
        }
        me
    }

    /// Integral from +infinity: I(r) = -int_r^inf. The stretch past the grid
    /// end is integrated numerically as far as the RHS closure allows, then
    /// closed with the analytic power-law tail from the claimed decay order.
    /// The tail *model* error is estimated by comparing the claimed exponent
    /// with the locally fitted one.
    fn from_infinity(grid: Arc<RadialGrid>, exponent: f64, rhs: Rhs, tail_tol: f64) -> Result<Self> {
        let rmax = grid.r_max();
        let nu = rhs.decay_order;
        let power = exponent + nu;
        if power >= -1.0 {
            return Err(ConekitError::QuadratureNonConvergence(format!(
                "improper integral tail s^{power:.3} does not converge"
            )));
        }
        let mut me = CumulativeIntegral {
            grid: grid.clone(),
            exponent,
            rhs,
            at_nodes: vec![0.0; grid.len()],
            log_weight: false,
            tail: 0.0,
        };
        // numeric extension beyond the grid where the closure is evaluable
        let ext_decades = if me.rhs.extendable { 3 } else { 0 };
        let ext_per_decade = 16;
        let mut r_ext = rmax;
        let mut beyond = 0.0;
        for k in 0..ext_decades * ext_per_decade {
            let a = rmax * 10f64.powf(k as f64 / ext_per_decade as f64);
            let b = rmax * 10f64.powf((k + 1) as f64 / ext_per_decade as f64);
            beyond += me.segment(a, b);
            r_ext = b;
        }
        // analytic closure of the remaining tail, exact for power-law RHS
        let w_end = (me.rhs.f)(r_ext);
        let tail_with = |expo: f64| -> f64 {
            if w_end == 0.0 || expo + exponent + 1.0 >= 0.0 {
                0.0
            } else {
                w_end * r_ext.powf(exponent + 1.0) / (-(exponent + expo + 1.0))
            }
        };
        let analytic_tail = tail_with(nu);
        // model-error estimate from the locally fitted decay exponent
        let w_half = (me.rhs.f)(r_ext / 2.0);
        let model_err = if w_end == 0.0 || w_half == 0.0 || w_end * w_half < 0.0 {
            analytic_tail.abs()
        } else {
            let nu_local = (w_end / w_half).abs().ln() / 2f64.ln();
            (analytic_tail - tail_with(nu_local)).abs()
        };
        me.tail = beyond + analytic_tail;
        let last = grid.len() - 1;
        me.at_nodes[last] = -me.tail;
        let mut acc = -me.tail;
        for k in (0..last).rev() {
            acc -= me.segment(grid.r[k], grid.r[k + 1]);
            me.at_nodes[k] = acc;
        }
        let scale = me
            .at_nodes
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
            .max(1e-300);
        if model_err > tail_tol * scale && model_err > 1e-280 {
            return Err(ConekitError::QuadratureNonConvergence(format!(
                "tail model error {:.3e} above tolerance {:.3e} x scale {:.3e}; extend the grid",
                model_err, tail_tol, scale
            )));
        }
        me.tail = model_err.max(analytic_tail.abs() * 1e-15);
        Ok(me)
    }

    fn value_at(&self, r: f64) -> f64 {
        let k = self.grid.bracket(r);
        self.at_nodes[k] + self.segment(self.grid.r[k], r)
    }
}

/// Fully evaluable solution of one scalar mode ODE.
pub struct SolvedRadial {
    pub grid: Arc<RadialGrid>,
    /// ODE: -y'' - (p/r) y' + (q/r^2) y = w
    pub p_coef: f64,
    pub q_coef: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    branch: KernelBranch,
    /// coefficients of the homogeneous solutions actually present
    pub coef_plus: f64,
    pub coef_minus: f64,
    i_plus: Option<CumulativeIntegral>,
    i_minus: Option<CumulativeIntegral>,
    rhs: Rhs,
    pub decay_order: f64,
    pub tail_estimate: f64,
}

impl SolvedRadial {
    /// y, y', y'' or y''' at r, from the analytic form of the kernel.
    pub fn eval(&self, r: f64, order: usize) -> f64 {
        let w = self.rhs.eval(r);
        match self.branch {
            KernelBranch::Log => {
                let j0 = self.i_plus.as_ref().unwrap().value_at(r);
                let j1 = self.i_minus.as_ref().unwrap().value_at(r);
                let l = r.ln();
                match order {
                    0 => self.coef_plus + self.coef_minus * l - (l * j0 - j1),
                    1 => (self.coef_minus - j0) / r,
                    2 => (-self.coef_minus + j0) / (r * r) - w,
                    3 => {
                        (2.0 * self.coef_minus - 2.0 * j0) / (r * r * r) + w / r
                            - self.rhs.eval_deriv(r)
                    }
                    _ => panic!("derivative order {order} not supported"),
                }
            }
            _ => {
                let (ap, am) = (self.a_plus, self.a_minus);
                let denom = am - ap;
                let ip = self.i_plus.as_ref().map_or(0.0, |i| i.value_at(r));
                let im = self.i_minus.as_ref().map_or(0.0, |i| i.value_at(r));
                let falling = |a: f64, k: usize| -> f64 {
                    (0..k).fold(1.0, |acc, j| acc * (a - j as f64))
                };
                let kernel = |k: usize| -> f64 {
                    (falling(ap, k) * r.powf(ap - k as f64) * ip
                        - falling(am, k) * r.powf(am - k as f64) * im)
                        / denom
                };
                let hom = |k: usize| -> f64 {
                    self.coef_plus * falling(ap, k) * r.powf(ap - k as f64)
                        + self.coef_minus * falling(am, k) * r.powf(am - k as f64)
                };
                match order {
                    0 => hom(0) + kernel(0),
                    1 => hom(1) + kernel(1),
                    2 => hom(2) + kernel(2) - w,
                    3 => {
                        hom(3) + kernel(3) + self.p_coef * w / r - self.rhs.eval_deriv(r)
                    }
                    _ => panic!("derivative order {order} not supported"),
                }
            }
        }
    }

    /// Relative residual of the ODE at r.
    pub fn residual_at(&self, r: f64) -> f64 {
        let y = self.eval(r, 0);
        let dy = self.eval(r, 1);
        let d2y = self.eval(r, 2);
        let w = self.rhs.eval(r);
        let lhs = -d2y - self.p_coef * dy / r + self.q_coef * y / (r * r);
        let scale = w
            .abs()
            .max(d2y.abs())
            .max((self.p_coef * dy / r).abs())
            .max((self.q_coef * y / (r * r)).abs())
            .max(1e-300);
        (lhs - w).abs() / scale
    }
}

fn indicial_roots(p: f64, q: f64) -> (f64, f64, f64) {
    let half = (p - 1.0) / 2.0;
    let disc = half * half + q;
    (disc, -half + disc.max(0.0).sqrt(), -half - disc.max(0.0).sqrt())
}

/// Solve -y'' - (p/r) y' + (q/r^2) y = w with y = O(r^{s_target}).
fn solve_scalar_ode(
    p: f64,
    q: f64,
    rhs: Rhs,
    s_target: f64,
    data: Option<(f64, f64)>,
    grid: Arc<RadialGrid>,
    opts: &SolverOptions,
    context: &str,
) -> Result<SolvedRadial> {
    let (disc, ap, am) = indicial_roots(p, q);
    if disc < 0.0 {
        return Err(ConekitError::InvalidArgument(
            "negative indicial discriminant; complex roots are out of scope".into(),
        ));
    }
    let log_case = disc == 0.0;
    if log_case && ap.abs() > 1e-12 {
        return Err(ConekitError::InvalidArgument(
            "degenerate double root away from 0 is not supported".into(),
        ));
    }
    for a in [ap, am] {
        if (a - s_target).abs() < opts.gap_tol {
            return Err(ConekitError::ExceptionalRate {
                rate: s_target,
                nearest: a,
                gap: opts.gap_tol,
                context: context.to_string(),
            });
        }
    }

    if log_case {
        // y = C1 + C2 log r - ( log r J0 - J1 ),  J0 = int_1^r s w, J1 = int_1^r s log s w
        let j0 = CumulativeIntegral::from_one(grid.clone(), 1.0, rhs.clone(), false);
        let j1 = CumulativeIntegral::from_one(grid.clone(), 1.0, rhs.clone(), true);
        let (c1, c2, tail) = match data {
            Some((y1, dy1)) => (y1, dy1, 0.0),
            None => {
                if s_target < 0.0 {
                    // choose data so both the constant and the log terms cancel
                    let nu = rhs.decay_order;
                    if nu + 1.0 >= -1.0 {
                        return Err(ConekitError::QuadratureNonConvergence(
                            "log-kernel suppression needs an integrable s*w tail".into(),
                        ));
                    }
                    let rmax = grid.r_max();
                    let wr = rhs.eval(rmax);
                    let t0 = wr * rmax.powi(2) / (-(nu + 2.0));
                    // int_R^inf s log s w ds ~ w(R) R^{-nu} [ R^{nu+2} log R /(-(nu+2)) + R^{nu+2}/(nu+2)^2 ]
                    let t1 = wr * (rmax.powi(2) * rmax.ln() / (-(nu + 2.0))
                        + rmax.powi(2) / ((nu + 2.0) * (nu + 2.0)));
                    let j0_inf = j0.at_nodes[grid.len() - 1] + t0;
                    let j1_inf = j1.at_nodes[grid.len() - 1] + t1;
                    (-j1_inf, j0_inf, t0.abs() + t1.abs())
                } else {
                    (0.0, 0.0, 0.0)
                }
            }
        };
        return Ok(SolvedRadial {
            grid,
            p_coef: p,
            q_coef: q,
            a_plus: 0.0,
            a_minus: 0.0,
            branch: KernelBranch::Log,
            coef_plus: c1,
            coef_minus: c2,
            i_plus: Some(j0),
            i_minus: Some(j1),
            rhs,
            decay_order: if data.is_none() && s_target < 0.0 {
                s_target
            } else {
                0.0
            },
            tail_estimate: tail,
        });
    }

    let branch = if s_target > ap {
        KernelBranch::FromOne
    } else if s_target > am {
        KernelBranch::FromInfinity
    } else {
        KernelBranch::BothFromInfinity
    };
    if matches!(branch, KernelBranch::BothFromInfinity) && data.is_some() {
        return Err(ConekitError::InvalidArgument(format!(
            "target order {s_target} lies below both indicial roots ({am}, {ap}); \
             the decaying solution is unique and data at r = 1 cannot be prescribed"
        )));
    }
    let i_plus = match branch {
        KernelBranch::FromOne => CumulativeIntegral::from_one(grid.clone(), 1.0 - ap, rhs.clone(), false),
        _ => CumulativeIntegral::from_infinity(grid.clone(), 1.0 - ap, rhs.clone(), opts.tail_tol)?,
    };
    let i_minus = match branch {
        KernelBranch::BothFromInfinity => {
            CumulativeIntegral::from_infinity(grid.clone(), 1.0 - am, rhs.clone(), opts.tail_tol)?
        }
        _ => CumulativeIntegral::from_one(grid.clone(), 1.0 - am, rhs.clone(), false),
    };
    let tail = i_plus.tail.abs() + i_minus.tail.abs();
    let (c_plus, c_minus) = match data {
        None => (0.0, 0.0),
        Some((y1, dy1)) => {
            // kernel value and slope at r = 1 (I_-(1) = 0 in both branches)
            let k0 = i_plus.value_at(1.0) / (am - ap);
            let k1 = ap * k0;
            let rhs0 = y1 - k0;
            let rhs1 = dy1 - k1;
            // C+ + C- = rhs0 ; a+ C+ + a- C- = rhs1
            let mut cp = (am * rhs0 - rhs1) / (am - ap);
            let cm = (rhs1 - ap * rhs0) / (am - ap);
            // In the suppressed branch the r^{a+} mode amplifies rounding in
            // the data solve all the way to the grid end; data consistent
            // with the decay claim means C+ = 0 exactly.
            if matches!(branch, KernelBranch::FromInfinity) {
                let scale = y1.abs() + dy1.abs() + k0.abs() + k1.abs();
                if cp.abs() <= 1e-11 * scale {
                    cp = 0.0;
                }
            }
            (cp, cm)
        }
    };

    let mut decay = s_target;
    if c_plus.abs() > 1e-13 {
        decay = decay.max(ap);
    }
    if c_minus.abs() > 1e-13 {
        decay = decay.max(am);
    }

    Ok(SolvedRadial {
        grid,
        p_coef: p,
        q_coef: q,
        a_plus: ap,
        a_minus: am,
        branch,
        coef_plus: c_plus,
        coef_minus: c_minus,
        i_plus: Some(i_plus),
        i_minus: Some(i_minus),
        rhs,
        decay_order: decay,
        tail_estimate: tail,
    })
}

// ---------------------------------------------------------------------------
// RadialFunction: grid samples plus an analytic evaluator when available
// ---------------------------------------------------------------------------

/// A radial profile on the solver grid with a derivative evaluator.
#[derive(Clone)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
    pub decay_order: f64,
    evaluator: Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>,
}

impl RadialFunction {
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        f: impl Fn(f64, usize) -> f64 + Send + Sync + 'static,
        decay_order: f64,
    ) -> Self {
        let values = grid.r.iter().map(|&r| f(r, 0)).collect();
        RadialFunction {
            grid,
            values,
            decay_order,
            evaluator: Arc::new(f),
        }
    }

    pub fn from_solved(s: SolvedRadial) -> Self {
        let grid = s.grid.clone();
        let decay = s.decay_order;
        let values = grid.r.iter().map(|&r| s.eval(r, 0)).collect();
        let inner = Arc::new(s);
        RadialFunction {
            grid,
            values,
            decay_order: decay,
            evaluator: Arc::new(move |r, k| inner.eval(r, k)),
        }
    }

    pub fn eval(&self, r: f64, order: usize) -> f64 {
        (self.evaluator)(r, order)
    }

    /// Fitted log-log slope of |f| over the last decade of the grid.
    pub fn fitted_decay_slope(&self) -> f64 {
        let range = self.grid.last_decades(1.0);
        let r: Vec<f64> = self.grid.r[range.clone()].to_vec();
        let v: Vec<f64> = self.values[range].to_vec();
        crate::fit::loglog_slope(&r, &v)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Weighted C^k sup norm with order rho: max_{i<=k} sup (r^2+1)^{(-rho+i)/2} |f^(i)|.
/// The Hoelder seminorm is intentionally omitted.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedNorm {
    pub k: usize,
    pub rho: f64,
    pub value: f64,
    /// Set when the weighted quantity still grows towards the grid edge,
    /// i.e. the claimed order rho is too small for this profile.
    pub grows_with_radius: bool,
}

pub fn weighted_norm(f: &RadialFunction, k: usize, rho: f64) -> WeightedNorm {
    assert!(k <= 3, "derivatives up to order 3 are available");
    let grid = &f.grid;
    let mut value: f64 = 0.0;
    let mut weighted0 = Vec::with_capacity(grid.len());
    for &r in grid.r.iter() {
        for i in 0..=k {
            let w = (r * r + 1.0).powf((-rho + i as f64) / 2.0) * f.eval(r, i).abs();
            if i == 0 {
                weighted0.push(w);
            }
            if w > value {
                value = w;
            }
        }
    }
    // growth flag: compare the weighted size on the last decade vs the middle
    let tail = grid.last_decades(1.0);
    let tail_max = weighted0[tail.clone()].iter().cloned().fold(0.0f64, f64::max);
    let mid_max = weighted0[..tail.start.max(1)].iter().cloned().fold(0.0f64, f64::max);
    let grows = tail_max > 3.0 * mid_max && tail_max > 1e-250;
    WeightedNorm {
        k,
        rho,
        value,
        grows_with_radius: grows,
    }
}

// ---------------------------------------------------------------------------
// mode-level solvers
// ---------------------------------------------------------------------------

/// Solution record for a single mode.
pub struct ModeSolution {
    pub function: RadialFunction,
    /// sup of the relative ODE residual over the grid.
    pub residual_sup: f64,
    pub tail_estimate: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub log_case: bool,
}

// The paper's blanket assumption rho > 1-n guarantees that the two-branch
// representation applies to every coclosed mode at once; per mode the solver
// selects the branch from the actual indicial roots instead, which also
// covers the log-case example at rho = -4 in cone dimension 4.
fn check_rho(_n: usize, _rho: f64) -> Result<()> {
    Ok(())
}

fn sup_residual(s: &SolvedRadial) -> f64 {
    s.grid
        .r
        .iter()
        .map(|&r| s.residual_at(r))
        .fold(0.0f64, f64::max)
}

/// Coclosed mode: -h'' - ((n-3)/r) h' + (lambda''/r^2) h = w, h = O(r^{rho+3}).
pub fn solve_coclosed_mode(p: &ModeProblem) -> Result<ModeSolution> {
    assert_eq!(p.kind, ModeKind::Coclosed);
    check_rho(p.n, p.target_rate)?;
    let solved = solve_scalar_ode(
        p.n as f64 - 3.0,
        p.eigenvalue,
        p.rhs[0].clone(),
        p.target_rate + 3.0,
        p.data_at_one.first().copied().flatten(),
        p.grid.clone(),
        &p.opts,
        "coclosed mode (set A)",
    )?;
    let residual = sup_residual(&solved);
    let (ap, am, log_case) = (
        solved.a_plus,
        solved.a_minus,
        matches!(solved.branch, KernelBranch::Log),
    );
    let tail = solved.tail_estimate;
    Ok(ModeSolution {
        function: RadialFunction::from_solved(solved),
        residual_sup: residual,
        tail_estimate: tail,
        a_plus: ap,
        a_minus: am,
        log_case,
    })
}

/// Function mode: -u'' - ((n-1)/r) u' + (lambda'/r^2) u = f, u = O(r^{rho}).
/// Also reports the operator-norm ratio ||u||_{2,rho} / ||f||_{0,rho-2}.
pub fn solve_function_mode(p: &ModeProblem) -> Result<(ModeSolution, f64)> {
    assert_eq!(p.kind, ModeKind::Function);
    check_rho(p.n, p.target_rate)?;
    let solved = solve_scalar_ode(
        p.n as f64 - 1.0,
        p.eigenvalue,
        p.rhs[0].clone(),
        p.target_rate,
        p.data_at_one.first().copied().flatten(),
        p.grid.clone(),
        &p.opts,
        "function mode (set D)",
    )?;
    let residual = sup_residual(&solved);
    let (ap, am) = (solved.a_plus, solved.a_minus);
    let tail = solved.tail_estimate;
    let u = RadialFunction::from_solved(solved);
    let f_rf = RadialFunction::from_fn(
        p.grid.clone(),
        {
            let rhs = p.rhs[0].clone();
            move |r, k| match k {
                0 => rhs.eval(r),
                1 => rhs.eval_deriv(r),
                _ => 0.0,
            }
        },
        p.rhs[0].decay_order,
    );
    let nu = weighted_norm(&u, 2, p.target_rate).value;
    let nf = weighted_norm(&f_rf, 0, p.target_rate - 2.0).value.max(1e-300);
    let sol = ModeSolution {
        function: u,
        residual_sup: residual,
        tail_estimate: tail,
        a_plus: ap,
        a_minus: am,
        log_case: false,
    };
    Ok((sol, nu / nf))
}

/// Solution of the coupled exact-pair system.
pub struct PairSolution {
    pub f: RadialFunction,
    pub g: RadialFunction,
    pub e: RadialFunction,
    /// sup relative residual of the first original equation.
    pub residual_f_eq: f64,
    /// sup relative residual of the second original equation.
    pub residual_g_eq: f64,
    pub v_prime_accuracy: f64,
}

/// Exact-pair mode: solve the coupled system
///   -f'' - ((n-1)/r) f' + ((n-1+lambda)/r^2) f - (2 lambda / r^3) g = u
///   -g'' - ((n-3)/r) g' + (lambda/r^2) g - (2/r) f = v
/// through the reduction E = f - g' (set B), then g (set C), then f = g' + E.
pub fn solve_exact_pair(p: &ModeProblem) -> Result<PairSolution> {
    assert_eq!(p.kind, ModeKind::ExactPair);
    check_rho(p.n, p.target_rate)?;
    let n = p.n as f64;
    let lambda = p.eigenvalue;
    let (u, v) = (p.rhs[0].clone(), p.rhs[1].clone());
    let rho = p.target_rate;

    // v' by the grid differentiator, with an accuracy estimate gating the
    // solve. The closure is sampled on three ghost nodes beyond each end so
    // the centered 6th-order stencil applies on the whole grid.
    let v_values: Vec<f64> = p.grid.r.iter().map(|&r| v.eval(r)).collect();
    let accuracy = grid::derivative_accuracy(&p.grid, &v_values);
    if accuracy > p.opts.diff_tol {
        return Err(ConekitError::DifferentiationAccuracy {
            got: accuracy,
            tol: p.opts.diff_tol,
        });
    }
    const GHOST: usize = 3;
    let step = p.grid.step;
    let mut extended: Vec<f64> = Vec::with_capacity(p.grid.len() + 2 * GHOST);
    for k in (1..=GHOST).rev() {
        extended.push(v.eval((-(k as f64) * step).exp()));
    }
    extended.extend_from_slice(&v_values);
    let v_max = *p.grid.v.last().unwrap();
    for k in 1..=GHOST {
        extended.push(v.eval((v_max + k as f64 * step).exp()));
    }
    let v_d1 = if extended.iter().all(|x| x.is_finite()) {
        let dv_ext = grid::fd_derivative(&extended, step);
        p.grid
            .r
            .iter()
            .enumerate()
            .map(|(i, &r)| dv_ext[i + GHOST] / r)
            .collect::<Vec<f64>>()
    } else {
        grid::radial_derivatives(&p.grid, &v_values).0
    };
    let v_prime = GridInterp::new(p.grid.clone(), v_d1);

    // theta = u - v'
    let theta = Rhs::new(
        {
            let u = u.clone();
            let v_prime = v_prime.clone();
            move |r| u.eval(r) - v_prime.eval(r)
        },
        rho,
    )
    .non_extendable();
    let e_solved = solve_scalar_ode(
        n - 3.0,
        lambda + n - 3.0,
        theta,
        rho + 2.0,
        p.data_at_one.first().copied().flatten(),
        p.grid.clone(),
        &p.opts,
        "exact pair, E equation (set B)",
    )?;
    let e_arc = Arc::new(e_solved);

    // varpi = 2 E / r + v
    let varpi = Rhs::with_derivative(
        {
            let e = e_arc.clone();
            let v = v.clone();
            move |r| 2.0 * e.eval(r, 0) / r + v.eval(r)
        },
        {
            let e = e_arc.clone();
            let v_prime = v_prime.clone();
            move |r| 2.0 * e.eval(r, 1) / r - 2.0 * e.eval(r, 0) / (r * r) + v_prime.eval(r)
        },
        rho + 1.0,
    )
    .non_extendable();
    let g_solved = solve_scalar_ode(
        n - 1.0,
        lambda,
        varpi,
        rho + 3.0,
        p.data_at_one.get(1).copied().flatten(),
        p.grid.clone(),
        &p.opts,
        "exact pair, g equation (set C)",
    )?;
    let g_arc = Arc::new(g_solved);

    let e_rf = RadialFunction {
        grid: p.grid.clone(),
        values: p.grid.r.iter().map(|&r| e_arc.eval(r, 0)).collect(),
        decay_order: e_arc.decay_order,
        evaluator: {
            let e = e_arc.clone();
            Arc::new(move |r, k| e.eval(r, k))
        },
    };
    let g_rf = RadialFunction {
        grid: p.grid.clone(),
        values: p.grid.r.iter().map(|&r| g_arc.eval(r, 0)).collect(),
        decay_order: g_arc.decay_order,
        evaluator: {
            let g = g_arc.clone();
            Arc::new(move |r, k| g.eval(r, k))
        },
    };
    let f_rf = RadialFunction {
        grid: p.grid.clone(),
        values: p
            .grid
            .r
            .iter()
            .map(|&r| g_arc.eval(r, 1) + e_arc.eval(r, 0))
            .collect(),
        decay_order: (g_rf.decay_order - 1.0).max(e_rf.decay_order),
        evaluator: {
            let g = g_arc.clone();
            let e = e_arc.clone();
            Arc::new(move |r, k| g.eval(r, k + 1) + e.eval(r, k))
        },
    };

    // residuals of the original equations
    let mut res_f: f64 = 0.0;
    let mut res_g: f64 = 0.0;
    for &r in &p.grid.r {
        let (f0, f1, f2) = (f_rf.eval(r, 0), f_rf.eval(r, 1), f_rf.eval(r, 2));
        let (g0, g1, g2) = (g_rf.eval(r, 0), g_rf.eval(r, 1), g_rf.eval(r, 2));
        let uu = u.eval(r);
        let vv = v.eval(r);
        let lhs_f =
            -f2 - (n - 1.0) / r * f1 + (n - 1.0 + lambda) / (r * r) * f0 - 2.0 * lambda / (r * r * r) * g0;
        let scale_f = uu
            .abs()
            .max(f2.abs())
            .max(((n - 1.0 + lambda) / (r * r) * f0).abs())
            .max((2.0 * lambda / (r * r * r) * g0).abs())
            .max(1e-300);
        res_f = res_f.max((lhs_f - uu).abs() / scale_f);
        let lhs_g = -g2 - (n - 3.0) / r * g1 + lambda / (r * r) * g0 - 2.0 / r * f0;
        let scale_g = vv
            .abs()
            .max(g2.abs())
            .max((lambda / (r * r) * g0).abs())
            .max((2.0 / r * f0).abs())
            .max(1e-300);
        res_g = res_g.max((lhs_g - vv).abs() / scale_g);
    }

    Ok(PairSolution {
        f: f_rf,
        g: g_rf,
        e: e_rf,
        residual_f_eq: res_f,
        residual_g_eq: res_g,
        v_prime_accuracy: accuracy,
    })
}

/// Local 6-point polynomial interpolation of grid samples (in ln r).
#[derive(Clone)]
struct GridInterp {
    grid: Arc<RadialGrid>,
    values: Arc<Vec<f64>>,
}

impl GridInterp {
    fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        GridInterp {
            grid,
            values: Arc::new(values),
        }
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.grid.len();
        let v = r.ln();
        let k = self.grid.bracket(r);
        let lo = k.saturating_sub(2).min(n - 6);
        let mut acc = 0.0;
        for i in lo..lo + 6 {
            let mut l = 1.0;
            for j in lo..lo + 6 {
                if j != i {
                    l *= (v - self.grid.v[j]) / (self.grid.v[i] - self.grid.v[j]);
                }
            }
            acc += l * self.values[i];
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// assembly of 1-forms from mode solutions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EigenFamily {
    /// kappa_i dr component
    RadialComponent,
    /// d_L kappa_i component
    ExactDifferential,
    /// eta_j component
    Coclosed,
}

pub struct AssemblyTerm {
    pub family: EigenFamily,
    pub mode_index: usize,
    pub eigenvalue: f64,
    pub radial: RadialFunction,
    /// decay order of this term as a 1-form in metric norm.
    pub form_order: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssemblyReport {
    pub term_orders: Vec<f64>,
    /// max rule over the terms
    pub aggregate_order: f64,
    /// sup-norm estimate of the assembled form including eigenform factors
    pub norm_estimate: f64,
    /// truncation tail bound from the (1+lambda)^{-k/2} decay and Weyl growth
    pub tail_bound: f64,
    pub truncation_count: usize,
}

/// Tail bound sum_{j > J} j^{-1 + (2n-k)/(n-1)} evaluated in closed form.
pub fn truncation_tail_bound(truncation: usize, k: usize, n: usize) -> Result<f64> {
    let e = -1.0 + (2.0 * n as f64 - k as f64) / (n as f64 - 1.0);
    if e >= -1.0 {
        return Err(ConekitError::InvalidArgument(format!(
            "tail bound needs k > 2n (k = {k}, n = {n})"
        )));
    }
    let j = truncation.max(1) as f64;
    Ok(j.powf(e + 1.0) / (-(e + 1.0)))
}

/// Assemble mode solutions into a 1-form record with per-term decay orders,
/// an aggregate norm estimate and a truncation tail bound.
pub fn assemble_one_form(
    terms: Vec<AssemblyTerm>,
    spec: &LinkSpectrum,
    k_norm: usize,
    n: usize,
    trunc: usize,
) -> Result<AssemblyReport> {
    use rayon::prelude::*;
    if n != spec.dim_link + 1 {
        return Err(ConekitError::DimensionMismatch {
            cone_dim: n,
            dim_link: spec.dim_link,
        });
    }
    for t in &terms {
        let table: &[(f64, u32)] = match t.family {
            EigenFamily::Coclosed => &spec.coclosed_one_form_modes,
            _ => &spec.function_modes,
        };
        if !table.iter().any(|&(l, _)| (l - t.eigenvalue).abs() < 1e-9) {
            return Err(ConekitError::InvalidArgument(format!(
                "eigenvalue {} not present in the spectrum for {:?}",
                t.eigenvalue, t.family
            )));
        }
    }
    let nc = (n as f64) / 2.0;
    let per_term: Vec<(f64, f64)> = terms
        .par_iter()
        .map(|t| {
            let exponent = match t.family {
                EigenFamily::RadialComponent | EigenFamily::Coclosed => (nc * 2.0 + 1.0) / 2.0,
                EigenFamily::ExactDifferential => (nc * 2.0 + 3.0) / 2.0,
            };
            let factor = (1.0 + t.eigenvalue).powf(exponent);
            let wn = weighted_norm(&t.radial, k_norm.min(3), t.radial.decay_order);
            (t.form_order, factor * wn.value)
        })
        .collect();
    let aggregate_order = per_term
        .iter()
        .map(|x| x.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let k_series = 2 * n + 3;
    let tail = truncation_tail_bound(trunc, k_series, n)?;
    let norm_estimate = per_term.iter().map(|x| x.1).fold(0.0f64, f64::max) * (1.0 + tail);
    Ok(AssemblyReport {
        term_orders: per_term.iter().map(|x| x.0).collect(),
        aggregate_order,
        norm_estimate,
        tail_bound: tail,
        truncation_count: trunc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fine_grid() -> Arc<RadialGrid> {
        RadialGrid::geometric(1e4, 96).unwrap()
    }

    #[test]
    fn coclosed_manufactured_power() {
        // h = r^s solves the ODE with w = (q - s(s-1) - (n-3)s) r^{s-2}; with
        // matching data the solver must reproduce it.
        let n = 4usize;
        let lambda = 4.0;
        let s = -1.3;
        let coef = lambda - s * (s - 1.0) - (n as f64 - 3.0) * s;
        let w = Rhs::power(coef, s - 2.0);
        let p = ModeProblem::coclosed(n, lambda, w, s - 3.0)
            .with_grid(fine_grid())
            .with_data(vec![Some((1.0, s))]);
        let sol = solve_coclosed_mode(&p).unwrap();
        let mut worst: f64 = 0.0;
        for &r in &p.grid.r {
            let rel = (sol.function.eval(r, 0) - r.powf(s)).abs() / r.powf(s);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-8, "recovery error {worst}");
        assert!(sol.residual_sup < 1e-8, "residual {}", sol.residual_sup);
    }

    #[test]
    fn coclosed_zero_rhs_zero_data() {
        let p = ModeProblem::coclosed(5, 8.0, Rhs::zero(), -3.0);
        let sol = solve_coclosed_mode(&p).unwrap();
        assert!(sol.function.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coclosed_log_case_explicit_kernel() {
        // n = 4, lambda'' = 0, w = r^{-3}: the decaying solution is -1/r.
        let p = ModeProblem::coclosed(4, 0.0, Rhs::power(1.0, -3.0), -4.0).with_grid(fine_grid());
        let sol = solve_coclosed_mode(&p).unwrap();
        assert!(sol.log_case);
        let mut worst: f64 = 0.0;
        for &r in &p.grid.r {
            let expect = -1.0 / r;
            worst = worst.max((sol.function.eval(r, 0) - expect).abs() * r);
        }
        assert!(worst < 1e-8, "log-kernel error {worst}");
        assert!(sol.residual_sup < 1e-8);
        let slope = sol.function.fitted_decay_slope();
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn exceptional_rate_refused() {
        // rho + 3 = a+ = 2 exactly
        let p = ModeProblem::coclosed(4, 4.0, Rhs::power(1.0, -3.0), -1.0);
        assert!(matches!(
            solve_coclosed_mode(&p),
            Err(ConekitError::ExceptionalRate { .. })
        ));
    }

    #[test]
    fn below_both_roots_unique_solution_no_data_freedom() {
        // a = +-2; target rho+3 = -2.5 below both roots: the decaying
        // solution is unique, so prescribed data is refused ...
        let with_data = ModeProblem::coclosed(4, 4.0, Rhs::power(1.0, -4.5), -5.5)
            .with_grid(fine_grid())
            .with_data(vec![Some((1.0, 0.0))]);
        assert!(matches!(
            solve_coclosed_mode(&with_data),
            Err(ConekitError::InvalidArgument(_))
        ));
        // ... and without data the double-suppression kernel still solves it.
        let p = ModeProblem::coclosed(4, 4.0, Rhs::power(1.0, -4.5), -5.5).with_grid(fine_grid());
        let sol = solve_coclosed_mode(&p).unwrap();
        assert!(sol.residual_sup < 1e-8, "residual {}", sol.residual_sup);
        let slope = sol.function.fitted_decay_slope();
        assert!((slope + 2.5).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn function_mode_flat_manufactured() {
        // lambda' = 0, u = r^{1-n}: f = -(n-1) r^{-n-1}. The target order lies
        // below both indicial roots, so the r^{2-n} branch is suppressed
        // automatically and the decaying solution is unique.
        let n = 4usize;
        let f = Rhs::power(-(n as f64 - 1.0), -(n as f64) - 1.0);
        let p = ModeProblem::function(n, 0.0, f, 1.0 - n as f64 + 1e-3).with_grid(fine_grid());
        let (sol, ratio) = solve_function_mode(&p).unwrap();
        let mut worst: f64 = 0.0;
        for &r in &p.grid.r {
            let expect = r.powf(1.0 - n as f64);
            worst = worst.max((sol.function.eval(r, 0) - expect).abs() / expect);
        }
        assert!(worst < 1e-7, "recovery {worst}");
        assert!(sol.residual_sup < 1e-8);
        assert!(ratio.is_finite() && ratio > 0.0);
    }

    #[test]
    fn function_mode_homogeneous_kelvin_branch() {
        // u = r^{2-n} solves the homogeneous equation identically (d_0^-).
        let n = 5usize;
        let grid = fine_grid();
        let sol = solve_scalar_ode(
            n as f64 - 1.0,
            0.0,
            Rhs::zero(),
            2.0 - n as f64 + 1e-6,
            Some((1.0, 2.0 - n as f64)),
            grid.clone(),
            &SolverOptions::default(),
            "test",
        )
        .unwrap();
        for &r in &grid.r {
            let expect = r.powf(2.0 - n as f64);
            assert!((sol.eval(r, 0) - expect).abs() / expect < 1e-10);
            assert!(sol.residual_at(r) < 1e-10);
        }
    }

    #[test]
    fn exact_pair_zero() {
        let p = ModeProblem::exact_pair(4, 3.0, Rhs::zero(), Rhs::zero(), -2.5);
        let sol = solve_exact_pair(&p).unwrap();
        assert!(sol.f.values.iter().all(|&v| v == 0.0));
        assert!(sol.g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exact_pair_manufactured() {
        // g = r^{s+1}, E = r^s, f = g' + E = (s+2) r^s; build (u, v) forward.
        let n = 4usize;
        let nf = n as f64;
        let lambda = 3.0;
        let s = -2.2;
        let u_coef = (s + 2.0) * (-s * (s - 1.0) - (nf - 1.0) * s + nf - 1.0 + lambda) - 2.0 * lambda;
        let v_coef = -(s + 1.0) * s - (nf - 3.0) * (s + 1.0) + lambda - 2.0 * (s + 2.0);
        let grid = RadialGrid::geometric(1e4, 256).unwrap();
        let p = ModeProblem::exact_pair(
            n,
            lambda,
            Rhs::power(u_coef, s - 2.0),
            Rhs::power(v_coef, s - 1.0),
            s - 2.0,
        )
        .with_grid(grid.clone())
        .with_data(vec![None, Some((1.0, s + 1.0))]);
        let sol = solve_exact_pair(&p).unwrap();
        let mut worst_f: f64 = 0.0;
        let mut worst_g: f64 = 0.0;
        for &r in grid.r.iter() {
            worst_f =
                worst_f.max((sol.f.eval(r, 0) - (s + 2.0) * r.powf(s)).abs() / r.powf(s).abs());
            worst_g = worst_g.max((sol.g.eval(r, 0) - r.powf(s + 1.0)).abs() / r.powf(s + 1.0));
        }
        assert!(worst_f < 1e-7, "f recovery {worst_f}");
        assert!(worst_g < 1e-7, "g recovery {worst_g}");
        assert!(sol.residual_f_eq < 1e-6, "laequ2 residual {}", sol.residual_f_eq);
        assert!(sol.residual_g_eq < 1e-6, "laequ3 residual {}", sol.residual_g_eq);
    }

    #[test]
    fn superposition_linearity() {
        let n = 4usize;
        let lambda = 4.0;
        let grid = fine_grid();
        let w1 = Rhs::power(1.0, -3.1);
        let w2 = Rhs::power(0.7, -3.4);
        let alpha = 2.5f64;
        let combo = Rhs::new(move |r: f64| alpha * r.powf(-3.1) + 0.7 * r.powf(-3.4), -3.1);
        let solve = |w: Rhs| {
            let p = ModeProblem::coclosed(n, lambda, w, -4.1).with_grid(grid.clone());
            solve_coclosed_mode(&p).unwrap()
        };
        let s1 = solve(w1);
        let s2 = solve(w2);
        let sc = solve(combo);
        for &r in grid.r.iter().step_by(17) {
            let lin = alpha * s1.function.eval(r, 0) + s2.function.eval(r, 0);
            let got = sc.function.eval(r, 0);
            let scale = lin.abs().max(1e-12);
            assert!((lin - got).abs() / scale < 1e-8);
        }
    }

    #[test]
    fn weighted_norm_examples() {
        let grid = fine_grid();
        let rho = -2.0;
        let t = RadialFunction::from_fn(grid.clone(), move |r, k| match k {
            0 => r.powf(rho),
            1 => rho * r.powf(rho - 1.0),
            _ => rho * (rho - 1.0) * r.powf(rho - 2.0),
        }, rho);
        // (r^2+1)^{-rho/2} r^rho lies in [1, 2^{|rho|/2}] on [1, oo)
        let wn = weighted_norm(&t, 0, rho);
        assert!(wn.value >= 1.0 - 1e-12 && wn.value <= 2.0f64.powf(rho.abs() / 2.0) + 1e-12);
        assert!(!wn.grows_with_radius);

        let zero = RadialFunction::from_fn(grid.clone(), |_, _| 0.0, 0.0);
        assert_eq!(weighted_norm(&zero, 2, -1.0).value, 0.0);

        let bad = RadialFunction::from_fn(grid, move |r, k| match k {
            0 => r.powf(rho + 1.0),
            _ => 0.0,
        }, rho + 1.0);
        let wn_bad = weighted_norm(&bad, 0, rho);
        assert!(wn_bad.grows_with_radius, "wrong-rate profile must be flagged");
    }

    #[test]
    fn weighted_norm_monotone_in_k() {
        let grid = fine_grid();
        let t = RadialFunction::from_fn(grid, |r, k| match k {
            0 => r.powf(-1.5),
            1 => -1.5 * r.powf(-2.5),
            2 => 3.75 * r.powf(-3.5),
            _ => 0.0,
        }, -1.5);
        let w0 = weighted_norm(&t, 0, -1.5).value;
        let w1 = weighted_norm(&t, 1, -1.5).value;
        let w2 = weighted_norm(&t, 2, -1.5).value;
        assert!(w0 <= w1 && w1 <= w2);
    }

    #[test]
    fn assembly_aggregate_and_tail() {
        let spec = crate::link_spectrum::sphere_spectrum(3, 8).unwrap();
        let grid = RadialGrid::default_solver();
        let term = |order: f64, family: EigenFamily, lam: f64, idx: usize| AssemblyTerm {
            family,
            mode_index: idx,
            eigenvalue: lam,
            radial: RadialFunction::from_fn(grid.clone(), move |r, k| match k {
                0 => r.powf(order),
                1 => order * r.powf(order - 1.0),
                _ => order * (order - 1.0) * r.powf(order - 2.0),
            }, order),
            form_order: order,
        };
        let single = assemble_one_form(
            vec![term(-3.0, EigenFamily::Coclosed, 4.0, 1)],
            &spec,
            2,
            4,
            8,
        )
        .unwrap();
        assert_eq!(single.aggregate_order, -3.0);
        let double = assemble_one_form(
            vec![
                term(-3.0, EigenFamily::Coclosed, 4.0, 1),
                term(-5.0, EigenFamily::ExactDifferential, 3.0, 1),
            ],
            &spec,
            2,
            4,
            8,
        )
        .unwrap();
        assert_eq!(double.aggregate_order, -3.0);

        // tail bound decreases with the truncation count (k = 2n+3)
        let t8 = truncation_tail_bound(8, 11, 4).unwrap();
        let t16 = truncation_tail_bound(16, 11, 4).unwrap();
        let t32 = truncation_tail_bound(32, 11, 4).unwrap();
        assert!(t8 > t16 && t16 > t32);
    }

    #[test]
    fn assembly_rejects_foreign_eigenvalue() {
        let spec = crate::link_spectrum::sphere_spectrum(3, 4).unwrap();
        let grid = RadialGrid::default_solver();
        let t = AssemblyTerm {
            family: EigenFamily::Coclosed,
            mode_index: 1,
            eigenvalue: 5.5,
            radial: RadialFunction::from_fn(grid, |_, _| 0.0, 0.0),
            form_order: -3.0,
        };
        assert!(assemble_one_form(vec![t], &spec, 2, 4, 4).is_err());
    }

    #[test]
    fn lemma_ratio_bound_no_growth_with_frequency() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 4usize;
        let lambda = 4.0;
        let rho = -4.2;
        let grid = fine_grid();
        let mut freqs = Vec::new();
        let mut ratios = Vec::new();
        for i in 0..50 {
            let nu = 0.2 + 0.12 * i as f64;
            let amp: f64 = rng.gen_range(0.2..1.0);
            let phase: f64 = rng.gen_range(0.0..6.28);
            let w = Rhs::new(
                move |r: f64| r.powf(rho + 1.0) * (1.0 + 0.5 * (nu * r.ln() + phase).sin()) * amp,
                rho + 1.0,
            );
            let p = ModeProblem::coclosed(n, lambda, w.clone(), rho).with_grid(grid.clone());
            let sol = solve_coclosed_mode(&p).unwrap();
            let h_norm = weighted_norm(&sol.function, 2, rho + 3.0).value;
            let w_rf = RadialFunction::from_fn(grid.clone(), move |r, k| if k == 0 { (w.f)(r) } else { 0.0 }, rho + 1.0);
            let w_norm = weighted_norm(&w_rf, 0, rho + 1.0).value;
            freqs.push(nu);
            ratios.push(h_norm / w_norm);
        }
        let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(max_ratio.is_finite());
        let (_, slope, _) = crate::fit::linear_fit(&freqs, &ratios);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let range = freqs.last().unwrap() - freqs[0];
        assert!(
            (slope * range).abs() < 0.5 * mean,
            "ratio grows with frequency: slope {slope}, mean {mean}"
        );
    }
}
