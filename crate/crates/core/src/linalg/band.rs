//! Banded direct solvers. Structured-grid numberings keep the bandwidth at a
//! few node rows, so a band factorization is a sparse direct solve here.

use super::CsrMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting in band storage.
///
/// Row `i` keeps columns `i - kl ..= i + kl + ku`; the extra `kl` upper
/// diagonals hold the fill produced by row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku2: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols(), "band LU needs a square matrix");
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let ku2 = kl + ku;
        let width = kl + ku2 + 1;
        let mut lu = Self {
            n,
            kl,
            ku2,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        for i in 0..n {
            for (j, v) in a.row(i) {
                *lu.at_mut(i, j) = v;
            }
        }
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.at(k, k).abs();
            for i in k + 1..=last_row {
                let v = lu.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= f64::EPSILON * scale * 1e-3 || best == 0.0 {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            lu.pivots[k] = p;
            let last_col = (k + ku2).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a_kj = lu.at(k, j);
                    let a_pj = lu.at(p, j);
                    *lu.at_mut(k, j) = a_pj;
                    *lu.at_mut(p, j) = a_kj;
                }
            }
            let pivot = lu.at(k, k);
            for i in k + 1..=last_row {
                let l = lu.at(i, k) / pivot;
                *lu.at_mut(i, k) = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let u = lu.at(k, j);
                        *lu.at_mut(i, j) -= l * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j + self.kl - i]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.width + j + self.kl - i]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                    x[i] -= self.at(i, k) * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.ku2).min(n - 1) {
                s -= self.at(k, j) * x[j];
            }
            x[k] = s / self.at(k, k);
        }
        x
    }
}

/// Cholesky factorization `A = L Lᵀ` of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    kl: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    /// Uses the lower triangle of `a` only.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols(), "band Cholesky needs a square matrix");
        let n = a.nrows();
        let (kl, _) = a.bandwidths();
        let w = kl + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[i * w + j + kl - i] = v;
                }
            }
        }
        for j in 0..n {
            let j0 = j.saturating_sub(kl);
            let mut d = data[j * w + kl];
            for k in j0..j {
                let l = data[j * w + k + kl - j];
                d -= l * l;
            }
            if !(d > 0.0) {
                return Err(Error::Singular(format!(
                    "matrix not positive definite at row {j} (pivot {d:e})"
                )));
            }
            let d = d.sqrt();
            data[j * w + kl] = d;
            for i in j + 1..(j + kl + 1).min(n) {
                let i0 = i.saturating_sub(kl).max(j0);
                let mut s = data[i * w + j + kl - i];
                for k in i0..j {
                    s -= data[i * w + k + kl - i] * data[j * w + k + kl - j];
                }
                data[i * w + j + kl - i] = s / d;
            }
        }
        Ok(Self { n, kl, data })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, w) = (self.n, self.kl, self.kl + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(kl)..i {
                s -= self.data[i * w + k + kl - i] * y[k];
            }
            y[i] = s / self.data[i * w + kl];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + kl + 1).min(n) {
                s -= self.data[k * w + i + kl - k] * y[k];
            }
            y[i] = s / self.data[i * w + kl];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparsityBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kl: usize, ku: usize, spd: bool, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = SparsityBuilder::new(n, n);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                b.add_clique(&[i, j]);
            }
        }
        let mut m = b.build();
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                if spd && j > i {
                    continue;
                }
                let v: f64 = rng.gen_range(-1.0..1.0);
                if spd {
                    if j == i {
                        m.add(i, i, 2.0 * kl as f64 + 1.0 + v.abs());
                    } else {
                        m.add(i, j, v);
                        m.add(j, i, v);
                    }
                } else {
                    m.add(i, j, v);
                }
            }
        }
        m
    }

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.mul_vec(x);
        ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn lu_solves_nonsymmetric_band_with_pivoting() {
        for seed in 0..5 {
            let a = random_banded(40, 3, 5, false, seed);
            let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
            let x = BandLu::factor(&a).unwrap().solve(&b);
            assert!(residual(&a, &x, &b) < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn lu_needs_pivoting_on_zero_diagonal() {
        let mut b = SparsityBuilder::new(2, 2);
        b.add_clique(&[0, 1]);
        let mut a = b.build();
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        let x = BandLu::factor(&a).unwrap().solve(&[2.0, 3.0]);
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn cholesky_matches_lu_on_spd() {
        let a = random_banded(60, 4, 4, true, 11);
        let b: Vec<f64> = (0..60).map(|i| 1.0 + i as f64 * 0.1).collect();
        let x1 = BandCholesky::factor(&a).unwrap().solve(&b);
        let x2 = BandLu::factor(&a).unwrap().solve(&b);
        assert!(residual(&a, &x1, &b) < 1e-10);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_matrices_are_rejected() {
        let mut b = SparsityBuilder::new(2, 2);
        b.add_clique(&[0, 1]);
        let mut a = b.build();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            a.add(i, j, 1.0);
        }
        assert!(BandLu::factor(&a).is_err());
        assert!(BandCholesky::factor(&a).is_err());
    }
}
