use super::{dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients with a diagonal (Jacobi) preconditioner for SPD systems.
/// Stops when `‖b - A x‖ ≤ rel_tol ‖b‖`.
pub fn cg_jacobi(a: &CsrMatrix, b: &[f64], x0: &[f64], rel_tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgReport)> {
    let n = b.len();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0.to_vec();
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(p, q)| p * q).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rel = norm2(&r) / bnorm;
        if rel <= rel_tol {
            return Ok((
                x,
                CgReport {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        a.mul_vec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm2(&r) / bnorm;
    if rel <= rel_tol {
        Ok((
            x,
            CgReport {
                iterations: max_iter,
                relative_residual: rel,
            },
        ))
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: rel,
        })
    }
}
