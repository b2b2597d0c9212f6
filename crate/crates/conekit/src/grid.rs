//! Radial grids, Gauss-Legendre quadrature and log-grid finite differences.
//!
//! Everything radial in this crate is power-law-like, so grids are geometric
//! on [1, r_max] and derivatives are taken in v = ln r.

use std::sync::Arc;

use crate::error::{ConekitError, Result};

/// 8-point Gauss-Legendre nodes on [-1, 1].
const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Integrate `f` over [a, b] with composite 8-point Gauss-Legendre.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, subdivisions: usize) -> f64 {
    let n = subdivisions.max(1);
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Gauss-Legendre nodes and weights on [a, b] (8-point rule).
pub fn gl8_nodes(a: f64, b: f64) -> [(f64, f64); 8] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for i in 0..8 {
        out[i] = (mid + half * GL8_X[i], half * GL8_W[i]);
    }
    out
}

/// Geometric radial grid r_0 = 1 < r_1 < ... < r_M = r_max, uniform in ln r.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    /// ln r at the nodes.
    pub v: Vec<f64>,
    /// spacing of v.
    pub step: f64,
    pub points_per_decade: usize,
}

impl RadialGrid {
    pub fn geometric(r_max: f64, points_per_decade: usize) -> Result<Arc<RadialGrid>> {
        if r_max <= 1.0 || points_per_decade < 4 {
            return Err(ConekitError::InvalidArgument(format!(
                "geometric grid needs r_max > 1 and >= 4 points per decade (got {r_max}, {points_per_decade})"
            )));
        }
        let decades = r_max.log10();
        let m = (decades * points_per_decade as f64).ceil() as usize;
        let step = decades * std::f64::consts::LN_10 / m as f64;
        let v: Vec<f64> = (0..=m).map(|k| k as f64 * step).collect();
        let r: Vec<f64> = v.iter().map(|&x| x.exp()).collect();
        Ok(Arc::new(RadialGrid {
            r,
            v,
            step,
            points_per_decade,
        }))
    }

    /// Default solver grid: [1, 1e4], 64 points per decade.
    pub fn default_solver() -> Arc<RadialGrid> {
        RadialGrid::geometric(1.0e4, 64).expect("default grid")
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Largest index k with r_k <= r (clamped to the interior).
    pub fn bracket(&self, r: f64) -> usize {
        let v = r.max(1.0).ln();
        let k = (v / self.step).floor() as usize;
        k.min(self.r.len() - 2)
    }

    /// Indices of the last `decades` decades of the grid.
    pub fn last_decades(&self, decades: f64) -> std::ops::Range<usize> {
        let v_hi = *self.v.last().unwrap();
        let v_lo = v_hi - decades * std::f64::consts::LN_10;
        let start = self.v.iter().position(|&x| x >= v_lo).unwrap_or(0);
        start..self.r.len()
    }
}

/// Centered 6th-order first derivative on a uniform grid; one-sided 5th-order
/// stencils near the edges. Returns dF/dv.
pub fn fd_derivative(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    let c = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    for i in 0..n {
        if i >= 3 && i + 3 < n {
            let mut acc = 0.0;
            for (j, cj) in c.iter().enumerate() {
                acc += cj * values[i + j - 3];
            }
            out[i] = acc / step;
        } else {
            // 6-point one-sided, order 5
            let fwd = [-137.0 / 60.0, 5.0, -5.0, 10.0 / 3.0, -5.0 / 4.0, 1.0 / 5.0];
            if i + 5 < n && i < 3 {
                let mut acc = 0.0;
                for (j, cj) in fwd.iter().enumerate() {
                    acc += cj * values[i + j];
                }
                out[i] = acc / step;
            } else {
                let mut acc = 0.0;
                for (j, cj) in fwd.iter().enumerate() {
                    acc += -cj * values[i - j];
                }
                out[i] = acc / step;
            }
        }
    }
    out
}

/// Centered 6th-order second derivative in v; edges by applying `fd_derivative` twice.
pub fn fd_second_derivative(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    let c = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let d1 = fd_derivative(values, step);
    let d2_edge = fd_derivative(&d1, step);
    for i in 0..n {
        if i >= 3 && i + 3 < n {
            let mut acc = 0.0;
            for (j, cj) in c.iter().enumerate() {
                acc += cj * values[i + j - 3];
            }
            out[i] = acc / (step * step);
        } else {
            out[i] = d2_edge[i];
        }
    }
    out
}

/// First and second r-derivatives of grid samples of f(r), via the log grid:
/// f' = e^{-v} dF/dv, f'' = e^{-2v} (d2F/dv2 - dF/dv).
pub fn radial_derivatives(grid: &RadialGrid, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let dv = fd_derivative(values, grid.step);
    let dvv = fd_second_derivative(values, grid.step);
    let mut d1 = vec![0.0; values.len()];
    let mut d2 = vec![0.0; values.len()];
    for i in 0..values.len() {
        let r = grid.r[i];
        d1[i] = dv[i] / r;
        d2[i] = (dvv[i] - dv[i]) / (r * r);
    }
    (d1, d2)
}

/// Estimate of the relative accuracy of the grid derivative of `f`, from the
/// disagreement between the 6th-order stencil and a 4th-order one.
pub fn derivative_accuracy(grid: &RadialGrid, values: &[f64]) -> f64 {
    let n = values.len();
    let d6 = fd_derivative(values, grid.step);
    let mut worst: f64 = 0.0;
    let scale = values.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-300);
    for i in 2..n - 2 {
        let d4 = (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2])
            / (12.0 * grid.step);
        worst = worst.max((d6[i] - d4).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_low_degree() {
        let val = integrate(&|x| x.powi(7) - 3.0 * x.powi(2) + 1.0, 0.0, 2.0, 1);
        let exact = 2.0f64.powi(8) / 8.0 - 2.0f64.powi(3) + 2.0;
        assert!((val - exact).abs() < 1e-12);
    }

    #[test]
    fn log_grid_derivatives_of_powers() {
        let grid = RadialGrid::geometric(1e3, 96).unwrap();
        let s = -2.3;
        let vals: Vec<f64> = grid.r.iter().map(|r| r.powf(s)).collect();
        let (d1, d2) = radial_derivatives(&grid, &vals);
        for i in grid.len() / 4..3 * grid.len() / 4 {
            let r = grid.r[i];
            let rel1 = (d1[i] - s * r.powf(s - 1.0)).abs() / r.powf(s - 1.0).abs();
            let rel2 = (d2[i] - s * (s - 1.0) * r.powf(s - 2.0)).abs() / r.powf(s - 2.0).abs();
            assert!(rel1 < 1e-9, "rel1 {rel1}");
            assert!(rel2 < 1e-7, "rel2 {rel2}");
        }
    }
}
