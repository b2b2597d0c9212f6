//! Exceptional (indicial) sets of the cone Laplacian.
//!
//! Four families of homogeneous-solution orders govern solvability of the
//! mode ODEs:
//!
//!   A: a_j^+- - 1,  a_j^+- = -(n-4)/2 +- sqrt(((n-4)/2)^2 + lambda''_j),  j >= 1
//!   B: b_i^+-,      b_i^+- = -(n-4)/2 +- sqrt(((n-4)/2)^2 + lambda'_i + n - 3), i >= 0
//!   C: c_i^+- - 1,  c_i^+- = -(n-2)/2 +- sqrt(((n-2)/2)^2 + lambda'_i),  i >= 1
//!   D: d_i^+-,      d_i^+- = -(n-2)/2 +- sqrt(((n-2)/2)^2 + lambda'_i),  i >= 0
//!
//! Orders are kept as exact expressions (rational base plus square root of a
//! rational) whenever the source eigenvalue is rational; comparisons use the
//! f64 projection.

use num::rational::Ratio;
use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{ConekitError, Result};
use crate::link_spectrum::LinkSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetLabel {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// base + sign * sqrt(disc), with rational base and discriminant when exact.
#[derive(Debug, Clone, Serialize)]
pub struct OrderValue {
    pub value: f64,
    pub exact: Option<ExactOrder>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactOrder {
    pub base: (i64, i64),
    pub disc: (i64, i64),
    pub sign: i8,
}

impl OrderValue {
    fn from_parts(base: Ratio<i64>, disc: Option<Ratio<i64>>, sign: i8, value: f64) -> Self {
        let exact = disc.map(|d| {
            // fold perfect squares into the base
            if let Some(root) = ratio_sqrt(&d) {
                let folded = base + if sign >= 0 { root } else { -root };
                ExactOrder {
                    base: (*folded.numer(), *folded.denom()),
                    disc: (0, 1),
                    sign: 0,
                }
            } else {
                ExactOrder {
                    base: (*base.numer(), *base.denom()),
                    disc: (*d.numer(), *d.denom()),
                    sign,
                }
            }
        });
        OrderValue { value, exact }
    }
}

fn ratio_sqrt(x: &Ratio<i64>) -> Option<Ratio<i64>> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(Ratio::zero());
    }
    let isqrt = |n: i64| -> Option<i64> {
        let r = (n as f64).sqrt().round() as i64;
        for c in [r - 1, r, r + 1] {
            if c >= 0 && c * c == n {
                return Some(c);
            }
        }
        None
    };
    Some(Ratio::new(isqrt(*x.numer())?, isqrt(*x.denom())?))
}

fn as_rational(x: f64) -> Option<Ratio<i64>> {
    for den in [1i64, 2, 3, 4, 5, 6, 8, 10, 12, 16] {
        let scaled = x * den as f64;
        if (scaled - scaled.round()).abs() < 1e-9 && scaled.abs() < 9.0e15 {
            return Some(Ratio::new(scaled.round() as i64, den));
        }
    }
    None
}

/// One homogeneous-solution order with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalEntry {
    /// The exceptional order itself (shifted by -1 for sets A and C).
    pub order: OrderValue,
    /// The unshifted indicial root (a, b, c or d).
    pub root: OrderValue,
    pub mode_index: usize,
    pub branch: Branch,
    pub source_eigenvalue: f64,
    /// True for the degenerate double root (n = 4, lambda'' = 0), where the
    /// homogeneous solutions are 1 and log r.
    pub log_case: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalSet {
    pub label: SetLabel,
    pub cone_dim: usize,
    /// Entries sorted nondecreasingly by order.
    pub entries: Vec<ExceptionalEntry>,
}

impl ExceptionalSet {
    pub fn orders(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.order.value).collect()
    }
}

struct SetRecipe {
    label: SetLabel,
    /// base = -(shift)/2 in the root formula
    half_shift: f64,
    /// discriminant = half_shift^2 + lambda + lambda_offset
    lambda_offset: f64,
    /// order = root + order_shift
    order_shift: f64,
    min_index: usize,
    use_coclosed: bool,
}

fn compute_set(
    spec: &LinkSpectrum,
    n: usize,
    window: (f64, f64),
    recipe: SetRecipe,
) -> Result<ExceptionalSet> {
    let min_dim = match recipe.label {
        SetLabel::A | SetLabel::B => 4,
        SetLabel::C | SetLabel::D => 3,
    };
    if n != spec.dim_link + 1 || n < min_dim {
        return Err(ConekitError::DimensionMismatch {
            cone_dim: n,
            dim_link: spec.dim_link,
        });
    }
    let modes: &[(f64, u32)] = if recipe.use_coclosed {
        &spec.coclosed_one_form_modes
    } else {
        &spec.function_modes
    };
    let base = recipe.half_shift;
    let base_rat = as_rational(base);
    let mut entries = Vec::new();
    for (idx, &(lam, _mult)) in modes.iter().enumerate() {
        // function modes are indexed from 0, coclosed from 1
        let mode_index = if recipe.use_coclosed { idx + 1 } else { idx };
        if mode_index < recipe.min_index {
            continue;
        }
        let disc = base * base + lam + recipe.lambda_offset;
        if disc < 0.0 {
            return Err(ConekitError::InvalidArgument(format!(
                "negative discriminant {disc} for eigenvalue {lam}; complex indicial roots are out of scope"
            )));
        }
        let sq = disc.sqrt();
        let log_case = disc == 0.0;
        let disc_rat = base_rat.and_then(|b| as_rational(lam + recipe.lambda_offset).map(|l| b * b + l));
        let shift_rat = as_rational(recipe.order_shift);
        let branches: &[(Branch, f64, i8)] = if log_case {
            &[(Branch::Plus, 0.0, 1)]
        } else {
            &[(Branch::Plus, sq, 1), (Branch::Minus, -sq, -1)]
        };
        for &(branch, delta, sign) in branches {
            let root_val = base + delta;
            let order_val = root_val + recipe.order_shift;
            if order_val < window.0 - 1e-12 || order_val > window.1 + 1e-12 {
                continue;
            }
            let root = match (base_rat, disc_rat) {
                (Some(b), Some(d)) => OrderValue::from_parts(b, Some(d), sign, root_val),
                _ => OrderValue {
                    value: root_val,
                    exact: None,
                },
            };
            let order = match (base_rat, disc_rat, shift_rat) {
                (Some(b), Some(d), Some(s)) => OrderValue::from_parts(b + s, Some(d), sign, order_val),
                _ => OrderValue {
                    value: order_val,
                    exact: None,
                },
            };
            entries.push(ExceptionalEntry {
                order,
                root,
                mode_index,
                branch,
                source_eigenvalue: lam,
                log_case,
            });
        }
    }
    entries.sort_by(|a, b| a.order.value.total_cmp(&b.order.value));
    Ok(ExceptionalSet {
        label: recipe.label,
        cone_dim: n,
        entries,
    })
}

/// Exceptional set A (coclosed 1-form modes): orders a_j^+- - 1.
pub fn compute_a(spec: &LinkSpectrum, n: usize, window: (f64, f64)) -> Result<ExceptionalSet> {
    compute_set(
        spec,
        n,
        window,
        SetRecipe {
            label: SetLabel::A,
            half_shift: -((n as f64) - 4.0) / 2.0,
            lambda_offset: 0.0,
            order_shift: -1.0,
            min_index: 1,
            use_coclosed: true,
        },
    )
}

/// Exceptional set B (exact-pair reduction, E_i equation): orders b_i^+-.
pub fn compute_b(spec: &LinkSpectrum, n: usize, window: (f64, f64)) -> Result<ExceptionalSet> {
    compute_set(
        spec,
        n,
        window,
        SetRecipe {
            label: SetLabel::B,
            half_shift: -((n as f64) - 4.0) / 2.0,
            lambda_offset: (n as f64) - 3.0,
            order_shift: 0.0,
            min_index: 0,
            use_coclosed: false,
        },
    )
}

/// Exceptional set C (exact-pair g_i equation): orders c_i^+- - 1, i >= 1.
pub fn compute_c(spec: &LinkSpectrum, n: usize, window: (f64, f64)) -> Result<ExceptionalSet> {
    compute_set(
        spec,
        n,
        window,
        SetRecipe {
            label: SetLabel::C,
            half_shift: -((n as f64) - 2.0) / 2.0,
            lambda_offset: 0.0,
            order_shift: -1.0,
            min_index: 1,
            use_coclosed: false,
        },
    )
}

/// Exceptional set D (function Laplacian): orders d_i^+-, i >= 0.
pub fn compute_d(spec: &LinkSpectrum, n: usize, window: (f64, f64)) -> Result<ExceptionalSet> {
    compute_set(
        spec,
        n,
        window,
        SetRecipe {
            label: SetLabel::D,
            half_shift: -((n as f64) - 2.0) / 2.0,
            lambda_offset: 0.0,
            order_shift: 0.0,
            min_index: 0,
            use_coclosed: false,
        },
    )
}

/// Whether `rate` lies within `gap_tol` of the set; reports the nearest entry.
pub fn is_exceptional<'a>(
    rate: f64,
    set: &'a ExceptionalSet,
    gap_tol: f64,
) -> (bool, Option<&'a ExceptionalEntry>) {
    assert!(gap_tol > 0.0, "gap_tol must be positive");
    let nearest = set
        .entries
        .iter()
        .min_by(|a, b| (a.order.value - rate).abs().total_cmp(&(b.order.value - rate).abs()));
    match nearest {
        Some(e) => ((e.order.value - rate).abs() < gap_tol, Some(e)),
        None => (false, None),
    }
}

/// Default tolerance around exceptional orders; solver entry points refuse
/// rates inside the gap instead of regularizing.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_spectrum::{sphere_spectrum, sphere_spectrum_any, LinkSpectrum};

    fn custom_spec(dim_link: usize, coclosed: Vec<(f64, u32)>) -> LinkSpectrum {
        LinkSpectrum {
            dim_link,
            volume: 1.0,
            einstein_constant: dim_link as f64 - 1.0,
            function_modes: vec![(0.0, 1)],
            coclosed_one_form_modes: coclosed,
            truncation_count: 1,
        }
    }

    #[test]
    fn set_a_log_case_n4() {
        let spec = custom_spec(3, vec![(0.0, 1)]);
        let set = compute_a(&spec, 4, (-10.0, 10.0)).unwrap();
        assert_eq!(set.entries.len(), 1);
        let e = &set.entries[0];
        assert!(e.log_case);
        assert_eq!(e.order.value, -1.0);
        assert_eq!(e.root.value, 0.0);
    }

    #[test]
    fn set_a_s3_first_mode() {
        let spec = sphere_spectrum(3, 2).unwrap();
        let set = compute_a(&spec, 4, (-10.0, 10.0)).unwrap();
        // lambda''_1 = 4 -> a = +-2, orders {-3, 1}
        let orders = set.orders();
        assert!(orders.contains(&-3.0) && orders.contains(&1.0), "{orders:?}");
    }

    #[test]
    fn set_a_empty_coclosed_list() {
        let spec = custom_spec(3, vec![]);
        let set = compute_a(&spec, 4, (-10.0, 10.0)).unwrap();
        assert!(set.entries.is_empty());
    }

    #[test]
    fn set_b_n4_values() {
        let spec = sphere_spectrum(3, 1).unwrap();
        let set = compute_b(&spec, 4, (-10.0, 10.0)).unwrap();
        // lambda'_0 = 0 -> b = +-1; lambda'_1 = 3 -> b = +-2
        let orders = set.orders();
        assert_eq!(orders, vec![-2.0, -1.0, 1.0, 2.0]);
    }

    #[test]
    fn set_c_excludes_zero_mode_and_matches_values() {
        let spec = sphere_spectrum(3, 1).unwrap();
        let set = compute_c(&spec, 4, (-10.0, 10.0)).unwrap();
        assert_eq!(set.orders(), vec![-4.0, 0.0]);
        assert!(set.entries.iter().all(|e| e.mode_index >= 1));
        let empty = compute_c(&spec, 4, (0.5, 0.9)).unwrap();
        assert!(empty.entries.is_empty());
    }

    #[test]
    fn set_d_flat_closed_form() {
        // flat R^n: d_i^+ = i, d_i^- = 2 - n - i
        for n in [4usize, 6] {
            let spec = sphere_spectrum(n - 1, 8).unwrap();
            let set = compute_d(&spec, n, (-30.0, 30.0)).unwrap();
            let mut expect: Vec<f64> = (0..=8).map(|i| i as f64).collect();
            expect.extend((0..=8).map(|i| 2.0 - n as f64 - i as f64));
            for o in expect {
                assert!(
                    set.orders().iter().any(|&x| (x - o).abs() < 1e-12),
                    "missing order {o} for n={n}"
                );
            }
        }
    }

    #[test]
    fn set_d_flat_r3() {
        let spec = sphere_spectrum_any(2, 3);
        let set = compute_d(&spec, 3, (-3.0, 3.0)).unwrap();
        let orders = set.orders();
        for o in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            assert!(orders.iter().any(|&x| (x - o).abs() < 1e-12), "missing {o}");
        }
        // -1 is d_0^-
        let e = set
            .entries
            .iter()
            .find(|e| (e.order.value + 1.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(e.mode_index, 0);
        assert_eq!(e.branch, Branch::Minus);
    }

    #[test]
    fn kelvin_pairs_in_d() {
        let spec = sphere_spectrum(5, 6).unwrap();
        let n = 6;
        let set = compute_d(&spec, n, (-100.0, 100.0)).unwrap();
        for i in 0..spec.function_modes.len() {
            let pair: Vec<&ExceptionalEntry> =
                set.entries.iter().filter(|e| e.mode_index == i).collect();
            assert_eq!(pair.len(), 2);
            let s: f64 = pair.iter().map(|e| e.order.value).sum();
            assert!((s - (2.0 - n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = sphere_spectrum(3, 2).unwrap();
        assert!(matches!(
            compute_a(&spec, 5, (-1.0, 1.0)),
            Err(ConekitError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn is_exceptional_basics() {
        let spec = sphere_spectrum(3, 4).unwrap();
        let set = compute_d(&spec, 4, (-20.0, 20.0)).unwrap();
        let d0_minus = -2.0;
        let (hit, near) = is_exceptional(d0_minus, &set, 1e-6);
        assert!(hit);
        assert_eq!(near.unwrap().order.value, d0_minus);
        let (miss, _) = is_exceptional(d0_minus + 1e-5, &set, 1e-6);
        assert!(!miss);
        // midway between adjacent entries 0 and 1
        let (mid, near) = is_exceptional(0.4, &set, 1e-6);
        assert!(!mid);
        assert_eq!(near.unwrap().order.value, 0.0);
    }

    #[test]
    fn monotone_under_spectrum_enlargement() {
        let small = sphere_spectrum(3, 3).unwrap();
        let large = sphere_spectrum(3, 8).unwrap();
        let a_small = compute_a(&small, 4, (-50.0, 50.0)).unwrap();
        let a_large = compute_a(&large, 4, (-50.0, 50.0)).unwrap();
        for e in &a_small.entries {
            assert!(a_large
                .entries
                .iter()
                .any(|f| (f.order.value - e.order.value).abs() < 1e-12));
        }
    }

    #[test]
    fn branch_sums_on_builtins() {
        // pre-shift roots: A and B sum to -(n-4); C and D sum to -(n-2)
        for spec in [sphere_spectrum(3, 5).unwrap(), sphere_spectrum(5, 5).unwrap()] {
            let n = spec.dim_link + 1;
            let nf = n as f64;
            for (set, expect) in [
                (compute_a(&spec, n, (-1e6, 1e6)).unwrap(), -(nf - 4.0)),
                (compute_b(&spec, n, (-1e6, 1e6)).unwrap(), -(nf - 4.0)),
                (compute_c(&spec, n, (-1e6, 1e6)).unwrap(), -(nf - 2.0)),
                (compute_d(&spec, n, (-1e6, 1e6)).unwrap(), -(nf - 2.0)),
            ] {
                for e in &set.entries {
                    if e.log_case {
                        continue;
                    }
                    let partner = set
                        .entries
                        .iter()
                        .find(|f| f.mode_index == e.mode_index && f.branch != e.branch)
                        .unwrap();
                    assert!((e.root.value + partner.root.value - expect).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn exact_orders_fold_perfect_squares() {
        let spec = sphere_spectrum(3, 2).unwrap();
        let set = compute_d(&spec, 4, (-20.0, 20.0)).unwrap();
        for e in &set.entries {
            let ex = e.order.exact.as_ref().expect("integral data should stay exact");
            assert_eq!(ex.disc, (0, 1), "perfect square not folded: {ex:?}");
        }
    }
}
