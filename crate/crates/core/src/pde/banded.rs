//! Symmetric banded matrices and their LDL^T factorization.
//!
//! Rows are stored from the leftmost band entry up to the diagonal, so both
//! the factorization and the triangular solves run over contiguous slices.
//! No pivoting is done: on positive definite input this is Cholesky in
//! disguise, and on indefinite input the signs of `D` give the inertia as long
//! as no pivot vanishes.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    /// row i: entries (i, i-bw) ..= (i, i); out-of-range slots are zero
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Adds `v` at `(i, j)` and, implicitly, at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        assert!(r - c <= self.bw, "entry ({r},{c}) outside the band");
        self.data[r * (self.bw + 1) + (c + self.bw - r)] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[r * (self.bw + 1) + (c + self.bw - r)]
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.bw + 1;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * w + (lo + self.bw - i)..(i + 1) * w];
            let mut acc = 0.0;
            for (k, a) in row.iter().enumerate() {
                let j = lo + k;
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    /// LDL^T factorization; consumes the matrix storage.
    pub fn factor(mut self) -> Result<LdlFactor> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut d = vec![0.0; n];
        let mut scratch = vec![0.0; w];
        let mut scale: f64 = 0.0;
        for i in 0..n {
            scale = scale.max(self.data[i * w + bw].abs());
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let off = lo + bw - i;
            // scratch[k] holds L[i][lo+k] * D[lo+k] as it is produced
            for j in lo..i {
                let jlo = j.saturating_sub(bw).max(lo);
                let mut s = self.data[i * w + (j + bw - i)];
                let ri = &scratch[(jlo - lo)..(j - lo)];
                let rj = &self.data[j * w + (jlo + bw - j)..j * w + bw];
                for (a, b) in ri.iter().zip(rj) {
                    s -= a * b;
                }
                scratch[j - lo] = s;
                self.data[i * w + (j + bw - i)] = s / d[j];
            }
            let mut s = self.data[i * w + bw];
            let row = &self.data[i * w + off..i * w + bw];
            for (k, l) in row.iter().enumerate() {
                s -= scratch[k] * l;
            }
            if s == 0.0 || !s.is_finite() || s.abs() <= 1e-14 * scale {
                return Err(Error::IndefiniteOperator { pivot: i, value: s });
            }
            d[i] = s;
        }
        let negative = d.iter().filter(|v| **v < 0.0).count();
        Ok(LdlFactor { n, bw, l: self.data, d, negative })
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
    negative: usize,
}

impl LdlFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of negative pivots, i.e. of negative eigenvalues.
    pub fn negative_pivots(&self) -> usize {
        self.negative
    }

    pub fn is_positive_definite(&self) -> bool {
        self.negative == 0
    }

    pub fn first_negative_pivot(&self) -> Option<(usize, f64)> {
        self.d.iter().position(|v| *v < 0.0).map(|i| (i, self.d[i]))
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let row = &self.l[i * w + (lo + bw - i)..i * w + bw];
            let mut s = x[i];
            for (l, v) in row.iter().zip(&x[lo..i]) {
                s -= l * v;
            }
            x[i] = s;
        }
        for (v, d) in x.iter_mut().zip(&self.d) {
            *v /= d;
        }
        for i in (0..self.n).rev() {
            let lo = i.saturating_sub(bw);
            let xi = x[i];
            let row = &self.l[i * w + (lo + bw - i)..i * w + bw];
            for (l, v) in row.iter().zip(x[lo..i].iter_mut()) {
                *v -= l * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, bw: usize, shift: f64, seed: u64) -> (BandMatrix, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = BandMatrix::zeros(n, bw);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v: f64 = if i == j { shift + rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) };
                b.add(i, j, v);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        (b, dense)
    }

    #[test]
    fn solves_match_dense_lu() {
        let (b, dense) = random_band(60, 5, 12.0, 3);
        let rhs: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; 60];
        b.matvec(&rhs, &mut y);
        let dy = &dense * nalgebra::DVector::from_vec(rhs.clone());
        for i in 0..60 {
            assert!((y[i] - dy[i]).abs() < 1e-12);
        }
        let f = b.factor().unwrap();
        assert!(f.is_positive_definite());
        let mut x = rhs.clone();
        f.solve_in_place(&mut x);
        let exact = dense.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for i in 0..60 {
            assert!((x[i] - exact[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn inertia_counts_negative_eigenvalues() {
        let (b, dense) = random_band(40, 4, 0.0, 9);
        let eig = dense.symmetric_eigenvalues();
        let expected = eig.iter().filter(|v| **v < 0.0).count();
        let f = b.factor().unwrap();
        assert_eq!(f.negative_pivots(), expected);
    }
}
