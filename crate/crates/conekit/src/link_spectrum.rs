//! Spectral data of closed link manifolds.
//!
//! A [`LinkSpectrum`] carries the eigenvalue/multiplicity tables of the link
//! Laplacian on functions and on coclosed 1-forms, together with the volume
//! and dimension. Built-in constructions cover round spheres and their lens
//! quotients; everything else enters through the JSON loader.
//!
//! Coclosed 1-form data for S^3 and S^5 is a frozen fixture produced by the
//! exact oracle in `oracles/spectrum_oracle.py` (tangential harmonic
//! polynomial 1-forms; multiplicities by integer rank, eigenvalues checked
//! against a symbolic Hodge Laplacian). The same counting identity
//! `mult(k) = (m+1) h_k - h_{k+1} - h_{k-1}` backs the other dimensions.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{ConekitError, Result};

/// Eigenvalue/multiplicity tables of a closed link manifold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkSpectrum {
    pub dim_link: usize,
    pub volume: f64,
    /// Ric(g_L) = einstein_constant * g_L where known; informational.
    pub einstein_constant: f64,
    /// (eigenvalue, multiplicity), nondecreasing, first entry (0, 1).
    pub function_modes: Vec<(f64, u32)>,
    /// (eigenvalue, multiplicity), nondecreasing.
    pub coclosed_one_form_modes: Vec<(f64, u32)>,
    /// Number of distinct nonzero eigenvalues retained per family.
    pub truncation_count: usize,
}

#[derive(Deserialize)]
struct Fixture {
    dim_link: usize,
    modes: Vec<(f64, u32)>,
}

static FIXTURE_M3: OnceLock<Fixture> = OnceLock::new();
static FIXTURE_M5: OnceLock<Fixture> = OnceLock::new();

fn coclosed_fixture(m: usize) -> Option<&'static Fixture> {
    match m {
        3 => Some(FIXTURE_M3.get_or_init(|| {
            serde_json::from_str(include_str!("../fixtures/sphere_coclosed_m3.json"))
                .expect("fixture sphere_coclosed_m3.json")
        })),
        5 => Some(FIXTURE_M5.get_or_init(|| {
            serde_json::from_str(include_str!("../fixtures/sphere_coclosed_m5.json"))
                .expect("fixture sphere_coclosed_m5.json")
        })),
        _ => None,
    }
}

/// Gamma(n/2) for integer n >= 1.
pub fn gamma_half_integer(n: usize) -> f64 {
    if n % 2 == 0 {
        // (n/2 - 1)!
        let mut acc = 1.0;
        for k in 2..n / 2 {
            acc *= k as f64;
        }
        if n / 2 >= 2 {
            acc
        } else {
            1.0
        }
    } else {
        // Gamma(1/2 + k) = (2k-1)!! / 2^k sqrt(pi)
        let k = (n - 1) / 2;
        let mut acc = std::f64::consts::PI.sqrt();
        for j in 1..=k {
            acc *= (2 * j - 1) as f64 / 2.0;
        }
        acc
    }
}

/// Volume of the round unit sphere S^m.
pub fn sphere_volume(m: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf((m + 1) as f64 / 2.0) / gamma_half_integer(m + 1)
}

/// dim of degree-k harmonic polynomials on R^{nv}.
fn harm_dim(nv: usize, k: i64) -> i64 {
    if k < 0 {
        return 0;
    }
    let full = |d: i64| -> i64 {
        if d < 0 {
            0
        } else {
            // C(nv + d - 1, d), built incrementally to stay in range
            let mut acc: i64 = 1;
            for j in 1..=d {
                acc = acc * (nv as i64 - 1 + j) / j;
            }
            acc
        }
    };
    full(k) - full(k - 2)
}

fn coclosed_closed_form(m: usize, k: i64) -> (f64, u32) {
    let nv = m + 1;
    let lam = ((k + 1) * (k + m as i64 - 2)) as f64;
    let mult = nv as i64 * harm_dim(nv, k) - harm_dim(nv, k + 1) - harm_dim(nv, k - 1);
    (lam, mult as u32)
}

/// Round-sphere spectrum, public entry point (unit curvature, Einstein
/// constant m-1). Errors for m < 3: the 1-form machinery assumes cone
/// dimension at least 4.
pub fn sphere_spectrum(m: usize, i_max: usize) -> Result<LinkSpectrum> {
    if m < 3 {
        return Err(ConekitError::UnsupportedDimension(m, 3));
    }
    if i_max < 1 {
        return Err(ConekitError::InvalidArgument("i_max must be >= 1".into()));
    }
    Ok(sphere_spectrum_any(m, i_max))
}

/// Round-sphere spectrum for any m >= 2; used internally for function-only
/// workflows (e.g. the exceptional set D over a flat R^n cone with n = m+1).
pub fn sphere_spectrum_any(m: usize, i_max: usize) -> LinkSpectrum {
    let nv = m + 1;
    let mut function_modes = Vec::with_capacity(i_max + 1);
    for k in 0..=i_max as i64 {
        let lam = (k * (k + m as i64 - 1)) as f64;
        function_modes.push((lam, harm_dim(nv, k) as u32));
    }
    let coclosed = match coclosed_fixture(m) {
        Some(fix) => {
            assert_eq!(fix.dim_link, m);
            fix.modes.iter().take(i_max).cloned().collect::<Vec<_>>()
        }
        None => (1..=i_max as i64).map(|k| coclosed_closed_form(m, k)).collect(),
    };
    LinkSpectrum {
        dim_link: m,
        volume: sphere_volume(m),
        einstein_constant: (m - 1) as f64,
        function_modes,
        coclosed_one_form_modes: coclosed,
        truncation_count: i_max,
    }
}

/// Number of monomials z1^a zb1^c z2^b zb2^d of total degree k with torus
/// weights a - c = alpha, b - d = beta.
fn poly_weight_count(k: i64, alpha: i64, beta: i64) -> i64 {
    if k < 0 {
        return 0;
    }
    let mut count = 0;
    let mut s1 = alpha.abs();
    while s1 <= k {
        let s2 = k - s1;
        if s2 >= beta.abs() && (s2 - beta.abs()) % 2 == 0 {
            count += 1;
        }
        s1 += 2;
    }
    count
}

fn harm_weight_count(k: i64, alpha: i64, beta: i64) -> i64 {
    poly_weight_count(k, alpha, beta) - poly_weight_count(k - 2, alpha, beta)
}

/// Z_p-invariant multiplicity of the degree-k function harmonics on S^3 under
/// (z1, z2) -> (zeta z1, zeta^{-1} z2); exact weight count.
fn lens_function_mult(p: usize, k: i64) -> u32 {
    let mut total = 0i64;
    for alpha in -k..=k {
        for beta in -k..=k {
            if (alpha - beta).rem_euclid(p as i64) == 0 {
                total += harm_weight_count(k, alpha, beta);
            }
        }
    }
    total as u32
}

/// Z_p-invariant multiplicity of the level-k coclosed 1-forms on S^3, via the
/// virtual character of the tangential harmonic polynomial forms,
/// T_k = H_k (x) R^4 - H_{k+1} - H_{k-1}.
fn lens_coclosed_mult(p: usize, k: i64) -> u32 {
    let wts = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
    let mut total = 0i64;
    let bound = k + 2;
    for alpha in -bound..=bound {
        for beta in -bound..=bound {
            if (alpha - beta).rem_euclid(p as i64) != 0 {
                continue;
            }
            let mut c = 0i64;
            for (da, db) in wts {
                c += harm_weight_count(k, alpha - da, beta - db);
            }
            c -= harm_weight_count(k + 1, alpha, beta);
            c -= harm_weight_count(k - 1, alpha, beta);
            total += c;
        }
    }
    total as u32
}

/// Spectrum of the lens space S^3 / Z_p: the Z_p-invariant subset of the S^3
/// spectrum with reduced multiplicities; levels with zero invariant
/// multiplicity are dropped. `i_max` counts retained nonzero levels.
pub fn lens_spectrum(p: usize, i_max: usize) -> Result<LinkSpectrum> {
    if p == 0 {
        return Err(ConekitError::InvalidArgument("lens order p must be >= 1".into()));
    }
    if i_max < 1 {
        return Err(ConekitError::InvalidArgument("i_max must be >= 1".into()));
    }
    if p == 1 {
        return sphere_spectrum(3, i_max);
    }
    let mut function_modes = vec![(0.0, 1u32)];
    let mut k = 1i64;
    while function_modes.len() <= i_max && k < 4 * (i_max as i64 + 2) * p as i64 {
        let mult = lens_function_mult(p, k);
        if mult > 0 {
            function_modes.push(((k * (k + 2)) as f64, mult));
        }
        k += 1;
    }
    let mut coclosed = Vec::new();
    let mut k = 1i64;
    while coclosed.len() < i_max && k < 4 * (i_max as i64 + 2) * p as i64 {
        let mult = lens_coclosed_mult(p, k);
        if mult > 0 {
            coclosed.push((((k + 1) * (k + 1)) as f64, mult));
        }
        k += 1;
    }
    Ok(LinkSpectrum {
        dim_link: 3,
        volume: sphere_volume(3) / p as f64,
        einstein_constant: 2.0,
        function_modes,
        coclosed_one_form_modes: coclosed,
        truncation_count: i_max,
    })
}

/// Weyl-law diagnostic: least-squares exponent of log lambda_j vs log j,
/// eigenvalues expanded with multiplicity. Purely informative.
#[derive(Debug, Clone, Serialize)]
pub struct WeylDiagnostic {
    pub expected_exponent: f64,
    pub function_exponent: f64,
    pub function_residual: f64,
    pub coclosed_exponent: f64,
    pub coclosed_residual: f64,
}

pub fn weyl_check(spec: &LinkSpectrum) -> Result<WeylDiagnostic> {
    if spec.truncation_count < 10 {
        return Err(ConekitError::InsufficientData(format!(
            "weyl_check needs at least 10 retained eigenvalues, have {}",
            spec.truncation_count
        )));
    }
    let fit_family = |modes: &[(f64, u32)]| -> Result<(f64, f64)> {
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        let mut j = 0u64;
        for &(lam, mult) in modes {
            for _ in 0..mult {
                j += 1;
                if lam > 0.0 {
                    lx.push((j as f64).ln());
                    ly.push(lam.ln());
                }
            }
        }
        if lx.len() < 10 {
            return Err(ConekitError::InsufficientData(
                "fewer than 10 positive eigenvalues with multiplicity".into(),
            ));
        }
        let (_, slope, res) = crate::fit::linear_fit(&lx, &ly);
        Ok((slope, res))
    };
    let (fe, fr) = fit_family(&spec.function_modes)?;
    let (ce, cr) = fit_family(&spec.coclosed_one_form_modes)?;
    Ok(WeylDiagnostic {
        expected_exponent: 2.0 / spec.dim_link as f64,
        function_exponent: fe,
        function_residual: fr,
        coclosed_exponent: ce,
        coclosed_residual: cr,
    })
}

/// Validate the LinkSpectrum invariants, reporting the offending field path.
pub fn validate(spec: &LinkSpectrum) -> Result<()> {
    let fail = |path: &str, message: String| {
        Err(ConekitError::InvalidSpectrum {
            path: path.to_string(),
            message,
        })
    };
    if spec.dim_link < 2 {
        return fail("dim_link", format!("must be >= 2, got {}", spec.dim_link));
    }
    if !(spec.volume > 0.0) {
        return fail("volume", format!("must be positive, got {}", spec.volume));
    }
    if spec.function_modes.is_empty() {
        return fail("function_modes", "must contain the zero mode".into());
    }
    if spec.function_modes[0].0 != 0.0 {
        return fail(
            "function_modes[0][0]",
            format!("first eigenvalue must be 0, got {}", spec.function_modes[0].0),
        );
    }
    if spec.function_modes[0].1 != 1 {
        return fail(
            "function_modes[0][1]",
            format!("zero mode multiplicity must be 1, got {}", spec.function_modes[0].1),
        );
    }
    for (i, &(lam, mult)) in spec.function_modes.iter().enumerate() {
        if i >= 1 && lam <= 0.0 {
            return fail(
                &format!("function_modes[{i}][0]"),
                format!("eigenvalue must be positive, got {lam}"),
            );
        }
        if i >= 1 && lam < spec.function_modes[i - 1].0 {
            return fail(
                &format!("function_modes[{i}][0]"),
                "eigenvalues must be nondecreasing".into(),
            );
        }
        if mult == 0 {
            return fail(&format!("function_modes[{i}][1]"), "multiplicity must be positive".into());
        }
    }
    for (j, &(lam, mult)) in spec.coclosed_one_form_modes.iter().enumerate() {
        if lam < 0.0 {
            return fail(
                &format!("coclosed_one_form_modes[{j}][0]"),
                format!("eigenvalue must be nonnegative, got {lam}"),
            );
        }
        if j >= 1 && lam < spec.coclosed_one_form_modes[j - 1].0 {
            return fail(
                &format!("coclosed_one_form_modes[{j}][0]"),
                "eigenvalues must be nondecreasing".into(),
            );
        }
        if mult == 0 {
            return fail(
                &format!("coclosed_one_form_modes[{j}][1]"),
                "multiplicity must be positive".into(),
            );
        }
    }
    Ok(())
}

/// Load a user spectrum from the documented JSON schema, rejecting on the
/// first invariant violation with a field-path message.
pub fn load_spectrum_json(text: &str) -> Result<LinkSpectrum> {
    #[derive(Deserialize)]
    struct Raw {
        dim_link: usize,
        volume: f64,
        einstein_constant: f64,
        function_modes: Vec<(f64, u32)>,
        coclosed_one_form_modes: Vec<(f64, u32)>,
    }
    let raw: Raw = serde_json::from_str(text)?;
    let trunc = raw.function_modes.len().saturating_sub(1).max(raw.coclosed_one_form_modes.len());
    let spec = LinkSpectrum {
        dim_link: raw.dim_link,
        volume: raw.volume,
        einstein_constant: raw.einstein_constant,
        function_modes: raw.function_modes,
        coclosed_one_form_modes: raw.coclosed_one_form_modes,
        truncation_count: trunc,
    };
    validate(&spec)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_s3_function_eigenvalues() {
        // lambda_k = k(k+2) on S^3, cross-checked against the classical table
        let s = sphere_spectrum(3, 2).unwrap();
        let lams: Vec<f64> = s.function_modes.iter().map(|m| m.0).collect();
        assert_eq!(lams, vec![0.0, 3.0, 8.0]);
        let mults: Vec<u32> = s.function_modes.iter().map(|m| m.1).collect();
        assert_eq!(mults, vec![1, 4, 9]);
    }

    #[test]
    fn sphere_s3_first_coclosed_is_four() {
        let s = sphere_spectrum(3, 3).unwrap();
        assert_eq!(s.coclosed_one_form_modes[0], (4.0, 6));
        assert_eq!(s.coclosed_one_form_modes[1], (9.0, 16));
        assert_eq!(s.coclosed_one_form_modes[2], (16.0, 30));
    }

    #[test]
    fn sphere_s5_bounds_met_with_equality() {
        // n = 3: lambda'_1 = 5 = 2n-1, lambda''_1 = 8 = 4n-4
        let s = sphere_spectrum(5, 2).unwrap();
        assert_eq!(s.function_modes[1].0, 5.0);
        assert_eq!(s.coclosed_one_form_modes[0], (8.0, 15));
    }

    #[test]
    fn unsupported_dimension_errors() {
        assert!(matches!(
            sphere_spectrum(2, 3),
            Err(ConekitError::UnsupportedDimension(2, 3))
        ));
    }

    #[test]
    fn lens_p1_equals_sphere() {
        let a = lens_spectrum(1, 4).unwrap();
        let b = sphere_spectrum(3, 4).unwrap();
        assert_eq!(a.function_modes, b.function_modes);
        assert_eq!(a.coclosed_one_form_modes, b.coclosed_one_form_modes);
        assert_eq!(a.volume, b.volume);
    }

    #[test]
    fn lens_p2_volume_and_first_modes() {
        let s = lens_spectrum(2, 2).unwrap();
        assert!((s.volume - sphere_volume(3) / 2.0).abs() < 1e-14);
        // Character-theoretic oracle: under z -> -z every degree-k harmonic
        // changes sign by (-1)^k, so odd function levels vanish and even ones
        // survive whole: first positive level k = 2, lambda = 8, mult 9.
        assert_eq!(s.function_modes[1], (8.0, 9));
        // Coclosed level k has parity (-1)^{k+1}: k = 1 survives whole.
        assert_eq!(s.coclosed_one_form_modes[0], (4.0, 6));
        assert_eq!(s.coclosed_one_form_modes[1], (16.0, 30));
    }

    #[test]
    fn lens_subset_of_sphere_with_smaller_multiplicities() {
        let lens = lens_spectrum(3, 6).unwrap();
        let sphere = sphere_spectrum(3, 40).unwrap();
        for &(lam, mult) in &lens.function_modes {
            let parent = sphere.function_modes.iter().find(|m| m.0 == lam);
            assert!(parent.is_some(), "lens eigenvalue {lam} not in sphere spectrum");
            assert!(mult <= parent.unwrap().1);
        }
        for &(lam, mult) in &lens.coclosed_one_form_modes {
            let parent = sphere.coclosed_one_form_modes.iter().find(|m| m.0 == lam);
            assert!(parent.is_some());
            assert!(mult <= parent.unwrap().1);
        }
    }

    #[test]
    fn weyl_exponent_close_to_two_thirds() {
        let s = sphere_spectrum(3, 30).unwrap();
        let w = weyl_check(&s).unwrap();
        assert!((w.function_exponent - 2.0 / 3.0).abs() < 0.15 * 2.0 / 3.0,
            "exponent {}", w.function_exponent);
        let lens = lens_spectrum(2, 30).unwrap();
        let wl = weyl_check(&lens).unwrap();
        assert!((wl.function_exponent - w.function_exponent).abs() < 0.1);
    }

    #[test]
    fn weyl_needs_enough_modes() {
        let mut s = sphere_spectrum(3, 12).unwrap();
        s.truncation_count = 1;
        s.function_modes.truncate(2);
        assert!(matches!(weyl_check(&s), Err(ConekitError::InsufficientData(_))));
    }

    #[test]
    fn loader_reports_field_paths() {
        let bad = r#"{"dim_link": 3, "volume": -1.0, "einstein_constant": 2.0,
                      "function_modes": [[0.0, 1]], "coclosed_one_form_modes": []}"#;
        match load_spectrum_json(bad) {
            Err(ConekitError::InvalidSpectrum { path, .. }) => assert_eq!(path, "volume"),
            other => panic!("expected InvalidSpectrum, got {other:?}"),
        }
        let bad2 = r#"{"dim_link": 3, "volume": 1.0, "einstein_constant": 2.0,
                       "function_modes": [[0.0, 1], [3.0, 4], [2.0, 9]],
                       "coclosed_one_form_modes": []}"#;
        match load_spectrum_json(bad2) {
            Err(ConekitError::InvalidSpectrum { path, .. }) => {
                assert_eq!(path, "function_modes[2][0]")
            }
            other => panic!("expected InvalidSpectrum, got {other:?}"),
        }
    }
}
