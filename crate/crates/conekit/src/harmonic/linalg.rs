//! Exact dense linear algebra over the Gaussian rationals, sized for the
//! obstruction and expansion systems (a few hundred unknowns).

use super::ring::CRat;

#[derive(Clone, Debug)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<CRat>>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![vec![CRat::zero(); cols]; rows],
        }
    }

    /// Row echelon reduction; returns pivot column indices. Mutates in place.
    fn echelon(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let mut pivot = None;
            for r in row..self.rows {
                if !self.data[r][col].is_zero() {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(pr) = pivot else { continue };
            self.data.swap(row, pr);
            let inv = self.data[row][col].inv();
            for c in col..self.cols {
                self.data[row][c] = self.data[row][c].mul(&inv);
            }
            for r in 0..self.rows {
                if r != row && !self.data[r][col].is_zero() {
                    let factor = self.data[r][col].clone();
                    for c in col..self.cols {
                        let delta = factor.mul(&self.data[row][c]);
                        self.data[r][c] = self.data[r][c].sub(&delta);
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == self.rows {
                break;
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelon().len()
    }

    /// Basis of the right kernel.
    pub fn kernel(&self) -> Vec<Vec<CRat>> {
        let mut m = self.clone();
        let pivots = m.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![CRat::zero(); self.cols];
            v[free] = CRat::one();
            for (ri, &p) in pivots.iter().enumerate() {
                v[p] = m.data[ri][free].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// One exact solution of A x = b, or None when inconsistent.
    pub fn solve(&self, b: &[CRat]) -> Option<Vec<CRat>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = CMat::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.data[r][c] = self.data[r][c].clone();
            }
            aug.data[r][self.cols] = b[r].clone();
        }
        let pivots = aug.echelon();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![CRat::zero(); self.cols];
        for (ri, &p) in pivots.iter().enumerate() {
            x[p] = aug.data[ri][self.cols].clone();
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_rank() {
        // [1 2 3; 2 4 6] has rank 1, kernel dim 2
        let mut m = CMat::zeros(2, 3);
        for (c, v) in [1i64, 2, 3].iter().enumerate() {
            m.data[0][c] = CRat::from_int(*v);
            m.data[1][c] = CRat::from_int(2 * *v);
        }
        assert_eq!(m.rank(), 1);
        assert_eq!(m.kernel().len(), 2);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let mut m = CMat::zeros(2, 2);
        m.data[0][0] = CRat::from_int(2);
        m.data[1][1] = CRat::i();
        let x = m.solve(&[CRat::from_int(4), CRat::i()]).unwrap();
        assert_eq!(x[0], CRat::from_int(2));
        assert_eq!(x[1], CRat::one());

        let mut sing = CMat::zeros(2, 1);
        sing.data[0][0] = CRat::one();
        sing.data[1][0] = CRat::one();
        assert!(sing.solve(&[CRat::zero(), CRat::one()]).is_none());
    }
}
