//! Obstruction spaces of the ddbar lemma on C^2 \ {0}.
//!
//! At growth rate -2-k the space of dbar- and dbar*-closed (0,1)-forms and
//! the dbar-image of decaying harmonic functions are finite dimensional;
//! their dimensions are computed by exact rational linear algebra on
//! monomial coefficient vectors. Every harmonic candidate has components of
//! the Kelvin shape r^{-2-2k} * (degree-k polynomial in z, zbar), so the
//! ansatz space below is exhaustive.

use std::collections::BTreeMap;

use serde::Serialize;

use super::forms::Form01;
use super::linalg::CMat;
use super::ring::{CPoly, CRat, Mono};
use crate::error::{ConekitError, Result};

pub const DEFAULT_K_MAX: usize = 6;

/// Dimension data of the obstruction space at growth rate -2-k.
#[derive(Debug, Clone)]
pub struct ObstructionSpace {
    pub growth_rate: i32,
    pub dim_harmonic: usize,
    pub dim_dbar_image: usize,
    /// Representatives of the quotient (harmonic modulo dbar-image), in
    /// canonical monomial order.
    pub basis: Vec<Form01>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionSummary {
    pub k: usize,
    pub growth_rate: i32,
    pub dim_harmonic: usize,
    pub dim_dbar_image: usize,
    pub quotient_dim: usize,
    pub basis: Vec<[String; 2]>,
    /// The truncated expansion with only the first obstruction level is known
    /// to be incomplete; higher levels contribute at every lower order.
    pub tail_note: &'static str,
}

impl ObstructionSpace {
    pub fn summary(&self, k: usize) -> ObstructionSummary {
        ObstructionSummary {
            k,
            growth_rate: self.growth_rate,
            dim_harmonic: self.dim_harmonic,
            dim_dbar_image: self.dim_dbar_image,
            quotient_dim: self.dim_harmonic - self.dim_dbar_image,
            basis: self
                .basis
                .iter()
                .map(|f| [f.comp[0].render(), f.comp[1].render()])
                .collect(),
            tail_note: "expansion truncated at this rate carries error terms at every lower rate",
        }
    }
}

/// All canonical monomials of the given homogeneity with degree <= max_deg.
pub fn monomials_of_homogeneity(hom: i32, max_deg: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for g in 0..=max_deg {
        let t = g as i32 - hom;
        if t > i16::MAX as i32 || t < i16::MIN as i32 {
            continue;
        }
        for a in 0..=g as u8 {
            for b in 0..=(g as u8 - a) {
                for c in 0..=(g as u8 - a - b) {
                    let d = g as u8 - a - b - c;
                    if b.min(d) != 0 {
                        continue;
                    }
                    out.push(Mono {
                        a,
                        b,
                        c,
                        d,
                        t: t as i16,
                    });
                }
            }
        }
    }
    out
}

/// Constraint matrix whose kernel is {forms in the span with op(form) = 0}.
/// Rows are indexed by (equation index, monomial): the images of one basis
/// element under the different operators are separate equations.
fn constraint_matrix(basis_images: &[Vec<CPoly>]) -> CMat {
    let mut rows: BTreeMap<(usize, Mono), usize> = BTreeMap::new();
    let mut entries: Vec<Vec<(usize, CRat)>> = Vec::with_capacity(basis_images.len());
    for images in basis_images {
        let mut col = Vec::new();
        for (eq, poly) in images.iter().enumerate() {
            for (m, c) in &poly.terms {
                let next = rows.len();
                let idx = *rows.entry((eq, *m)).or_insert(next);
                col.push((idx, c.clone()));
            }
        }
        entries.push(col);
    }
    let mut mat = CMat::zeros(rows.len(), basis_images.len());
    for (j, col) in entries.iter().enumerate() {
        for (i, c) in col {
            mat.data[*i][j] = mat.data[*i][j].add(c);
        }
    }
    mat
}

fn form_from_coeffs(basis: &[(usize, Mono)], coeffs: &[CRat]) -> Form01 {
    let mut f = Form01::zero();
    for ((comp, m), c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            f.comp[*comp].add_term(*m, c.clone());
        }
    }
    f
}

/// Compute the obstruction dimensions and a quotient basis at rate -2-k.
pub fn obstruction_dimensions(k: usize) -> Result<ObstructionSpace> {
    obstruction_dimensions_capped(k, DEFAULT_K_MAX)
}

pub fn obstruction_dimensions_capped(k: usize, k_max: usize) -> Result<ObstructionSpace> {
    if k > k_max {
        return Err(ConekitError::InvalidArgument(format!(
            "k = {k} exceeds k_max = {k_max}"
        )));
    }
    // (0,1)-forms with components of homogeneity -2-k
    let monos = monomials_of_homogeneity(-2 - k as i32, k as u32);
    let mut basis: Vec<(usize, Mono)> = Vec::new();
    for comp in 0..2 {
        for &m in &monos {
            basis.push((comp, m));
        }
    }
    let images: Vec<Vec<CPoly>> = basis
        .iter()
        .map(|(comp, m)| {
            let mut f = Form01::zero();
            f.comp[*comp] = CPoly::from_term(*m, CRat::one());
            vec![f.dbar(), f.dbar_star()]
        })
        .collect();
    let harmonic_kernel = constraint_matrix(&images).kernel();
    let dim_harmonic = harmonic_kernel.len();

    // decaying harmonic functions of homogeneity -1-k and their dbar-images
    let fn_monos = monomials_of_homogeneity(-1 - k as i32, k.saturating_sub(1) as u32);
    let harmonic_fns: Vec<Vec<CRat>> = if fn_monos.is_empty() {
        Vec::new()
    } else {
        let fn_images: Vec<Vec<CPoly>> = fn_monos
            .iter()
            .map(|m| vec![CPoly::from_term(*m, CRat::one()).laplace()])
            .collect();
        constraint_matrix(&fn_images).kernel()
    };
    // dbar of the harmonic functions, expressed over the form basis
    let mut form_index = BTreeMap::new();
    for (i, key) in basis.iter().enumerate() {
        form_index.insert(*key, i);
    }
    let mut image_vectors: Vec<Vec<CRat>> = Vec::new();
    for hf in &harmonic_fns {
        let mut f = CPoly::zero();
        for (m, c) in fn_monos.iter().zip(hf) {
            if !c.is_zero() {
                f.add_term(*m, c.clone());
            }
        }
        let db = [f.d_zb1(), f.d_zb2()];
        let mut vec = vec![CRat::zero(); basis.len()];
        for (comp, poly) in db.iter().enumerate() {
            for (m, c) in &poly.terms {
                let idx = form_index
                    .get(&(comp, *m))
                    .expect("dbar image escapes the ansatz span");
                vec[*idx] = vec[*idx].add(c);
            }
        }
        image_vectors.push(vec);
    }
    let dim_dbar_image = if image_vectors.is_empty() {
        0
    } else {
        let mut m = CMat::zeros(basis.len(), image_vectors.len());
        for (j, v) in image_vectors.iter().enumerate() {
            for (i, c) in v.iter().enumerate() {
                m.data[i][j] = c.clone();
            }
        }
        m.rank()
    };

    // quotient representatives: kernel vectors extending the image span
    let mut span = CMat::zeros(basis.len(), dim_dbar_image + dim_harmonic);
    let mut col = 0;
    for v in image_vectors.iter() {
        for (i, c) in v.iter().enumerate() {
            span.data[i][col] = c.clone();
        }
        col += 1;
    }
    let mut reps = Vec::new();
    let mut current_rank = dim_dbar_image;
    for v in harmonic_kernel.iter() {
        for (i, c) in v.iter().enumerate() {
            span.data[i][col] = c.clone();
        }
        let r = CMat {
            rows: basis.len(),
            cols: col + 1,
            data: span
                .data
                .iter()
                .map(|row| row[..col + 1].to_vec())
                .collect(),
        }
        .rank();
        if r > current_rank {
            current_rank = r;
            col += 1;
            reps.push(form_from_coeffs(&basis, v));
        }
    }

    Ok(ObstructionSpace {
        growth_rate: -2 - k as i32,
        dim_harmonic,
        dim_dbar_image,
        basis: reps,
    })
}
