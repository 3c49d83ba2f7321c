//! Exact arithmetic on bivariate polynomials `Σ c[i][j] xⁱ yʲ`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    c: Vec<Vec<f64>>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self { c: vec![vec![0.0]] }
    }

    pub fn constant(a: f64) -> Self {
        Self { c: vec![vec![a]] }
    }

    pub fn x() -> Self {
        Self {
            c: vec![vec![0.0], vec![1.0]],
        }
    }

    pub fn y() -> Self {
        Self {
            c: vec![vec![0.0, 1.0]],
        }
    }

    fn dims(&self) -> (usize, usize) {
        (self.c.len(), self.c.iter().map(Vec::len).max().unwrap_or(1))
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.c.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c.iter().map(|r| r.iter().map(|v| v * s).collect()).collect(),
        }
    }

    pub fn dx(&self) -> Self {
        if self.c.len() < 2 {
            return Self::zero();
        }
        Self {
            c: (1..self.c.len())
                .map(|i| self.c[i].iter().map(|v| v * i as f64).collect())
                .collect(),
        }
    }

    pub fn dy(&self) -> Self {
        Self {
            c: self
                .c
                .iter()
                .map(|r| {
                    if r.len() < 2 {
                        vec![0.0]
                    } else {
                        (1..r.len()).map(|j| r[j] * j as f64).collect()
                    }
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in both variables
        self.c
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * x + row.iter().rev().fold(0.0, |a, v| a * y + v))
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, o: &Poly2) -> Poly2 {
        let (a, b) = self.dims();
        let (c, d) = o.dims();
        let (n, m) = (a.max(c), b.max(d));
        Poly2 {
            c: (0..n)
                .map(|i| (0..m).map(|j| self.get(i, j) + o.get(i, j)).collect())
                .collect(),
        }
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, o: &Poly2) -> Poly2 {
        self + &(-o)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, o: &Poly2) -> Poly2 {
        let (a, b) = self.dims();
        let (c, d) = o.dims();
        let mut out = vec![vec![0.0; b + d - 1]; a + c - 1];
        for i in 0..a {
            for j in 0..b {
                let s = self.get(i, j);
                if s == 0.0 {
                    continue;
                }
                for k in 0..c {
                    for l in 0..d {
                        out[i + k][j + l] += s * o.get(k, l);
                    }
                }
            }
        }
        Poly2 { c: out }
    }
}
