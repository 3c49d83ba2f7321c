//! Constitutive tensors of the plate model and their reduction from 3D data.
//!
//! Fourth-order tensors are stored densely and exchanged with the outside
//! world in Voigt form with engineering shear: strains are written as
//! `(a11, a22, a33, 2 a23, 2 a13, 2 a12)` in 3D and `(a11, a22, 2 a12)` in 2D,
//! so that `Q(A) = εᵀ C ε` and the Voigt matrix entries are plain tensor
//! entries `C[i][j][k][l]`.

use std::fmt;

use nalgebra::{Matrix2, Matrix3, Matrix6, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{from_voigt2_stress, voigt2};

/// Relative tolerance for symmetry violations of user input.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// A tensor counts as positive definite when `λ_min > PD_RATIO · λ_max`.
pub const PD_RATIO: f64 = 1e-12;

const VOIGT3: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
// Voigt rows of the in-plane (11, 22, 12) and out-of-plane (33, 23, 13) strains.
const IN_PLANE: [usize; 3] = [0, 1, 5];
const OUT_OF_PLANE: [usize; 3] = [2, 3, 4];

fn voigt3_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => unreachable!("index out of range"),
    }
}

fn voigt2_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (0, 1) => 2,
        _ => unreachable!("index out of range"),
    }
}

fn check_symmetric<const N: usize>(
    m: &nalgebra::SMatrix<f64, N, N>,
    what: &str,
) -> Result<nalgebra::SMatrix<f64, N, N>> {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(format!(
            "{what}: asymmetry {asym:e} exceeds {SYMMETRY_TOL:e} relative"
        )));
    }
    Ok((m + m.transpose()) * 0.5)
}

fn check_pd<const N: usize>(m: &nalgebra::SMatrix<f64, N, N>) -> Result<()> {
    let dyn_m = nalgebra::DMatrix::from_iterator(N, N, m.iter().copied());
    let eig = SymmetricEigen::new(dyn_m).eigenvalues;
    let min = eig.min();
    let max = eig.max();
    if !(max > 0.0 && min > PD_RATIO * max) {
        return Err(Error::NotPositiveDefinite {
            min_eig: min,
            max_eig: max,
        });
    }
    Ok(())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue2(m: &Matrix2<f64>) -> f64 {
    SymmetricEigen::new(*m).eigenvalues.min()
}

pub fn min_eigenvalue3(m: &Matrix3<f64>) -> f64 {
    SymmetricEigen::new(*m).eigenvalues.min()
}

/// Fourth-order tensor acting on symmetric 3×3 matrices, with minor and major
/// symmetries and positive definite on symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor3D {
    voigt: Matrix6<f64>,
}

impl SymTensor3D {
    /// Builds from a Voigt matrix (engineering shear, order 11 22 33 23 13 12).
    pub fn from_voigt(m: Matrix6<f64>) -> Result<Self> {
        let voigt = check_symmetric(&m, "3D tensor")?;
        check_pd(&voigt)?;
        Ok(Self { voigt })
    }

    /// Builds from full index form, symmetrizing after checking the minor and
    /// major symmetries to relative tolerance.
    pub fn from_entries(c: &[[[[f64; 3]; 3]; 3]; 3]) -> Result<Self> {
        let scale = c
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = c[i][j][k][l];
                        let worst = (v - c[j][i][k][l])
                            .abs()
                            .max((v - c[i][j][l][k]).abs())
                            .max((v - c[k][l][i][j]).abs());
                        if worst > SYMMETRY_TOL * scale {
                            return Err(Error::NotSymmetric(format!(
                                "entry [{}][{}][{}][{}] violates tensor symmetry by {worst:e}",
                                i + 1,
                                j + 1,
                                k + 1,
                                l + 1
                            )));
                        }
                    }
                }
            }
        }
        let mut m = Matrix6::zeros();
        for (a, &(i, j)) in VOIGT3.iter().enumerate() {
            for (b, &(k, l)) in VOIGT3.iter().enumerate() {
                m[(a, b)] = 0.25 * (c[i][j][k][l] + c[j][i][k][l] + c[i][j][l][k] + c[j][i][l][k]);
            }
        }
        Self::from_voigt(m)
    }

    /// Isotropic tensor with `Q(A) = 2 mu |sym A|² + lambda tr(A)²`.
    pub fn isotropic(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Invalid(format!("isotropic mu must be > 0, got {mu}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Invalid(format!("isotropic lambda must be >= 0, got {lambda}")));
        }
        let mut m = Matrix6::zeros();
        for a in 0..3 {
            for b in 0..3 {
                m[(a, b)] = lambda;
            }
            m[(a, a)] += 2.0 * mu;
            m[(a + 3, a + 3)] = mu;
        }
        Self::from_voigt(m)
    }

    pub fn voigt(&self) -> &Matrix6<f64> {
        &self.voigt
    }

    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.voigt[(voigt3_index(i, j), voigt3_index(k, l))]
    }

    /// `Q(A) = C sym(A) : sym(A)`.
    pub fn quad_form(&self, a: &Matrix3<f64>) -> f64 {
        let e = strain_voigt3(a);
        e.dot(&(self.voigt * e))
    }
}

fn strain_voigt3(a: &Matrix3<f64>) -> nalgebra::Vector6<f64> {
    let mut e = nalgebra::Vector6::zeros();
    for (r, &(i, j)) in VOIGT3.iter().enumerate() {
        e[r] = if i == j { a[(i, i)] } else { a[(i, j)] + a[(j, i)] };
    }
    e
}

/// Fourth-order tensor acting on symmetric 2×2 matrices.
///
/// Positive definite unless built with [`SymTensor2D::zero`], which stands
/// for a coupling that is switched off in the current temperature regime.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2D {
    voigt: Matrix3<f64>,
}

impl SymTensor2D {
    /// Builds from a Voigt matrix (engineering shear, order 11 22 12).
    pub fn from_voigt(m: Matrix3<f64>) -> Result<Self> {
        let voigt = check_symmetric(&m, "2D tensor")?;
        check_pd(&voigt)?;
        Ok(Self { voigt })
    }

    /// The tensor with `Q(A) = |sym A|²`.
    pub fn identity_form() -> Self {
        Self {
            voigt: Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.5)),
        }
    }

    pub fn zero() -> Self {
        Self {
            voigt: Matrix3::zeros(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.voigt.iter().all(|v| *v == 0.0)
    }

    pub fn voigt(&self) -> &Matrix3<f64> {
        &self.voigt
    }

    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.voigt[(voigt2_index(i, j), voigt2_index(k, l))]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { voigt: self.voigt * s }
    }

    /// `C A` for symmetric `A`.
    #[inline]
    pub fn apply(&self, a: &Matrix2<f64>) -> Matrix2<f64> {
        from_voigt2_stress(&(self.voigt * voigt2(a)))
    }

    #[inline]
    pub fn quad_form(&self, a: &Matrix2<f64>) -> f64 {
        let e = voigt2(a);
        e.dot(&(self.voigt * e))
    }

    /// `C A : B` for symmetric `A`, `B`.
    #[inline]
    pub fn bilinear(&self, a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
        voigt2(b).dot(&(self.voigt * voigt2(a)))
    }
}

/// Linear map from an in-plane strain to the out-of-plane entries
/// `(a13, a23, a33)` of its energy-minimizing completion.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationMap {
    /// Rows `a13, a23, a33`; columns act on `(A11, A22, A12)`.
    pub coeff: Matrix3<f64>,
}

impl RelaxationMap {
    pub fn apply(&self, a: &Matrix2<f64>) -> Vector3<f64> {
        let s = crate::linalg::sym2(a);
        self.coeff * Vector3::new(s[(0, 0)], s[(1, 1)], s[(0, 1)])
    }

    /// The symmetric 3×3 completion of `a` that minimizes the 3D form.
    pub fn complete(&self, a: &Matrix2<f64>) -> Matrix3<f64> {
        let s = crate::linalg::sym2(a);
        let o = self.apply(&s);
        Matrix3::new(
            s[(0, 0)],
            s[(0, 1)],
            o[0], //
            s[(1, 0)],
            s[(1, 1)],
            o[1], //
            o[0],
            o[1],
            o[2],
        )
    }
}

fn sub3(m: &Matrix6<f64>, rows: [usize; 3], cols: [usize; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[(rows[r], cols[c])])
}

/// Minimizes the 3D form over the vertical stretches: the reduced tensor is
/// the Schur complement of the out-of-plane block, and the minimizer solves
/// the 3×3 normal equations in `(a33, 2 a23, 2 a13)`.
pub fn reduce_form(c3: &SymTensor3D) -> Result<(SymTensor2D, RelaxationMap)> {
    let v = c3.voigt();
    let c_ii = sub3(v, IN_PLANE, IN_PLANE);
    let c_io = sub3(v, IN_PLANE, OUT_OF_PLANE);
    let c_oo = sub3(v, OUT_OF_PLANE, OUT_OF_PLANE);
    let chol = c_oo
        .cholesky()
        .ok_or_else(|| Error::Singular("out-of-plane block of the 3D tensor".into()))?;
    // ε_O = S ε_I with ε_I = (A11, A22, 2 A12), ε_O = (a33, 2 a23, 2 a13)
    let s = -chol.solve(&c_io.transpose());
    let reduced = c_ii + c_io * s;
    let reduced = (reduced + reduced.transpose()) * 0.5;
    let to_engineering = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 2.0));
    let s_tensor = s * to_engineering;
    let coeff = Matrix3::from_rows(&[
        s_tensor.row(2) * 0.5,
        s_tensor.row(1) * 0.5,
        s_tensor.row(0).into_owned(),
    ]);
    Ok((SymTensor2D::from_voigt(reduced)?, RelaxationMap { coeff }))
}

/// Eliminates the through-thickness gradient component:
/// `K̃ = K″ − (K31, K32) ⊗ (K31, K32) / K33`.
pub fn reduce_heat_conductivity(k3: &Matrix3<f64>) -> Result<Matrix2<f64>> {
    let k = check_symmetric(k3, "heat conductivity")?;
    let k33 = k[(2, 2)];
    if !(k33 > 0.0) {
        return Err(Error::Invalid(format!("K33 must be > 0, got {k33}")));
    }
    let c = nalgebra::Vector2::new(k[(2, 0)], k[(2, 1)]);
    let upper = k.fixed_view::<2, 2>(0, 0).into_owned();
    Ok(upper - c * c.transpose() / k33)
}

/// Regime-dependent coupling tensors: the thermal expansion matrix survives
/// only for `alpha = 2` and the dissipative heating tensor only for `alpha = 4`.
pub fn regime_tensors(alpha: f64, b_full: &Matrix3<f64>, c_visc2: &SymTensor2D) -> Result<(Matrix2<f64>, SymTensor2D)> {
    check_alpha(alpha)?;
    let b = check_symmetric(b_full, "thermal expansion matrix")?;
    let b_thermal = if alpha == 2.0 {
        b.fixed_view::<2, 2>(0, 0).into_owned()
    } else {
        Matrix2::zeros()
    };
    let c_alpha = if alpha == 4.0 {
        c_visc2.clone()
    } else {
        SymTensor2D::zero()
    };
    Ok((b_thermal, c_alpha))
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if (2.0..=4.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("alpha must lie in [2, 4], got {alpha}")))
    }
}

/// Result of checking the block structure required by the plate limit.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    /// Largest in-plane/out-of-plane coupling entry of the 3D tensor.
    pub c3_max: f64,
    /// 1-based `(k, l, i, 3)` of that entry.
    pub c3_worst: (usize, usize, usize, usize),
    /// Largest entry of the third row/column of the expansion matrix.
    pub b_max: f64,
    /// 1-based `(i, j)` of that entry.
    pub b_worst: (usize, usize),
    pub tol: f64,
}

impl CompatibilityReport {
    pub fn tensor_ok(&self) -> bool {
        self.c3_max <= self.tol
    }

    pub fn expansion_ok(&self) -> bool {
        self.b_max <= self.tol
    }

    pub fn pass(&self) -> bool {
        self.tensor_ok() && self.expansion_ok()
    }
}

impl fmt::Display for CompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (k, l, i, j) = self.c3_worst;
        writeln!(
            f,
            "tensor coupling  max |c3[k,l,i,3]| = {:.16e} at c3[{k},{l},{i},{j}]  {}",
            self.c3_max,
            if self.tensor_ok() { "PASS" } else { "FAIL" }
        )?;
        let (bi, bj) = self.b_worst;
        writeln!(
            f,
            "expansion third row/column  max |b[i,3]| = {:.16e} at b[{bi},{bj}]  {}",
            self.b_max,
            if self.expansion_ok() { "PASS" } else { "FAIL" }
        )?;
        write!(f, "{}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

/// Measures how far `c3` and `b_full` are from decoupling the in-plane strain
/// from the out-of-plane strain components.
pub fn check_compatibility(c3: &SymTensor3D, b_full: &Matrix3<f64>, tol: f64) -> CompatibilityReport {
    let mut c3_max = 0.0f64;
    let mut c3_worst = (1, 1, 1, 3);
    for k in 0..2 {
        for l in 0..2 {
            for i in 0..3 {
                let v = c3
                    .entry(2, i, k, l)
                    .abs()
                    .max(c3.entry(i, 2, k, l).abs())
                    .max(c3.entry(k, l, i, 2).abs())
                    .max(c3.entry(k, l, 2, i).abs());
                if v > c3_max {
                    c3_max = v;
                    c3_worst = (k + 1, l + 1, i + 1, 3);
                }
            }
        }
    }
    let mut b_max = 0.0f64;
    let mut b_worst = (1, 3);
    for i in 0..3 {
        for (v, at) in [(b_full[(i, 2)], (i + 1, 3)), (b_full[(2, i)], (3, i + 1))] {
            if v.abs() > b_max {
                b_max = v.abs();
                b_worst = at;
            }
        }
    }
    CompatibilityReport {
        c3_max,
        c3_worst,
        b_max,
        b_worst,
        tol,
    }
}

/// 3D material data as supplied by the user.
#[derive(Debug, Clone)]
pub struct Material3D {
    pub c_el: SymTensor3D,
    pub c_visc: SymTensor3D,
    pub b_full: Matrix3<f64>,
    pub cv_bar: f64,
    pub k3: Matrix3<f64>,
    pub kappa: f64,
    pub alpha: f64,
}

/// Reduced parameters of the plate model.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSet {
    c_el: SymTensor2D,
    c_visc: SymTensor2D,
    c_visc_alpha: SymTensor2D,
    b_thermal: Matrix2<f64>,
    cv_bar: f64,
    k_tilde: Matrix2<f64>,
    kappa: f64,
    alpha: f64,
}

impl MaterialSet {
    /// `b_inplane` is the upper-left block of the expansion matrix; it is
    /// dropped unless `alpha = 2`.
    pub fn new(
        c_el: SymTensor2D,
        c_visc: SymTensor2D,
        b_inplane: Matrix2<f64>,
        cv_bar: f64,
        k_tilde: Matrix2<f64>,
        kappa: f64,
        alpha: f64,
    ) -> Result<Self> {
        let mut b3 = Matrix3::zeros();
        b3.fixed_view_mut::<2, 2>(0, 0).copy_from(&b_inplane);
        let (b_thermal, c_visc_alpha) = regime_tensors(alpha, &b3, &c_visc)?;
        if !(cv_bar > 0.0) || !cv_bar.is_finite() {
            return Err(Error::Invalid(format!("cv_bar must be > 0, got {cv_bar}")));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::Invalid(format!("kappa must be >= 0, got {kappa}")));
        }
        let k_tilde = check_symmetric(&k_tilde, "reduced conductivity")?;
        check_pd(&k_tilde)?;
        if c_el.is_zero() || c_visc.is_zero() {
            return Err(Error::Invalid(
                "elastic and viscous tensors must be positive definite".into(),
            ));
        }
        Ok(Self {
            c_el,
            c_visc,
            c_visc_alpha,
            b_thermal,
            cv_bar,
            k_tilde,
            kappa,
            alpha,
        })
    }

    pub fn from_3d(m: &Material3D) -> Result<Self> {
        let (c_el, _) = reduce_form(&m.c_el)?;
        let (c_visc, _) = reduce_form(&m.c_visc)?;
        let k3 = check_symmetric(&m.k3, "heat conductivity")?;
        check_pd(&k3)?;
        let k_tilde = reduce_heat_conductivity(&k3)?;
        let b = check_symmetric(&m.b_full, "thermal expansion matrix")?;
        Self::new(
            c_el,
            c_visc,
            b.fixed_view::<2, 2>(0, 0).into_owned(),
            m.cv_bar,
            k_tilde,
            m.kappa,
            m.alpha,
        )
    }

    pub fn c_el(&self) -> &SymTensor2D {
        &self.c_el
    }
    pub fn c_visc(&self) -> &SymTensor2D {
        &self.c_visc
    }
    pub fn c_visc_alpha(&self) -> &SymTensor2D {
        &self.c_visc_alpha
    }
    pub fn b_thermal(&self) -> &Matrix2<f64> {
        &self.b_thermal
    }
    pub fn cv_bar(&self) -> f64 {
        self.cv_bar
    }
    pub fn k_tilde(&self) -> &Matrix2<f64> {
        &self.k_tilde
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn has_thermal_stress(&self) -> bool {
        self.b_thermal.iter().any(|v| *v != 0.0)
    }

    pub fn has_dissipative_heating(&self) -> bool {
        !self.c_visc_alpha.is_zero()
    }
}
