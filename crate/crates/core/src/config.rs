//! TOML run configuration. See `docs/config.md` for the grammar.

use std::ops::Range;
use std::path::PathBuf;

use nalgebra::{Matrix3, Matrix6};
use serde::Deserialize;
use toml::Spanned;

use crate::constitutive::{check_alpha, Material3D, MaterialSet, SymTensor3D};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{Field, InitialCondition, Loads};
use crate::grid::{Edge, Grid2D};
use crate::korn::ZField;
use crate::stepper::{LinearSolver, SimParams};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: RawGrid,
    material: RawMaterial,
    #[serde(default)]
    loads: RawLoads,
    #[serde(default)]
    ic: RawIc,
    sim: RawSim,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    korn: RawKorn,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: Spanned<usize>,
    ny: Spanned<usize>,
    lx: Spanned<f64>,
    ly: Spanned<f64>,
    dirichlet_edges: Spanned<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTensor {
    isotropic: Option<RawIsotropic>,
    voigt: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIsotropic {
    mu: f64,
    lambda: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    elastic: Spanned<RawTensor>,
    viscous: Spanned<RawTensor>,
    b_full: Option<Spanned<Vec<Vec<f64>>>>,
    cv_bar: Spanned<f64>,
    k3: Spanned<Vec<Vec<f64>>>,
    #[serde(default)]
    kappa: Option<Spanned<f64>>,
    alpha: Spanned<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoads {
    f2d: Option<Spanned<String>>,
    mu_flat: Option<Spanned<String>>,
    test_only: Option<RawTestOnly>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTestOnly {
    gu: Option<Spanned<[String; 2]>>,
    gmu: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIc {
    u0: Option<Spanned<[String; 2]>>,
    v0: Option<Spanned<String>>,
    v0_derivatives: Option<Spanned<[String; 3]>>,
    mu0: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Spanned<f64>,
    t_end: Spanned<f64>,
    newton_tol: Option<Spanned<f64>>,
    newton_max_iter: Option<usize>,
    linear_solver: Option<Spanned<String>>,
    linear_solver_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<PathBuf>,
    vtk_stride: Option<usize>,
    vtk_prefix: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKorn {
    hs: Option<Vec<f64>>,
    n: Option<usize>,
    nz: Option<usize>,
    z: Option<Spanned<String>>,
}

/// Where results of `run` go.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub csv: PathBuf,
    /// Write a VTK snapshot every `vtk_stride` steps; 0 disables.
    pub vtk_stride: usize,
    pub vtk_prefix: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KornConfig {
    pub hs: Vec<f64>,
    pub n: usize,
    pub nz: usize,
    pub z: ZField,
}

impl Default for KornConfig {
    fn default() -> Self {
        Self {
            hs: vec![0.4, 0.2, 0.1],
            n: 8,
            nz: 3,
            z: ZField::Identity,
        }
    }
}

/// A fully validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: Grid2D,
    pub material_3d: Material3D,
    pub material: MaterialSet,
    pub loads: Loads,
    pub ic: InitialCondition,
    pub sim: SimParams,
    pub output: OutputConfig,
    pub korn: KornConfig,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        let (line, column) = line_col(self.text, span.start);
        Error::Config {
            line,
            column,
            message: message.into(),
        }
    }

    fn wrap(&self, span: Range<usize>, key: &str, e: Error) -> Error {
        match e {
            Error::Config { .. } => e,
            other => self.err(span, format!("{key}: {other}")),
        }
    }

    fn expr(&self, s: &Spanned<String>, key: &str) -> Result<Field> {
        Expr::parse(s.get_ref())
            .map(Expr::into_field)
            .map_err(|e| self.err(s.span(), format!("{key}: {e}")))
    }

    fn opt_expr(&self, s: &Option<Spanned<String>>, key: &str) -> Result<Field> {
        s.as_ref().map_or(Ok(Field::zero()), |s| self.expr(s, key))
    }

    fn matrix3(&self, m: &Spanned<Vec<Vec<f64>>>, key: &str) -> Result<Matrix3<f64>> {
        let rows = m.get_ref();
        if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
            return Err(self.err(m.span(), format!("{key} must be a 3×3 array")));
        }
        Ok(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    fn tensor(&self, t: &Spanned<RawTensor>, key: &str) -> Result<SymTensor3D> {
        let span = t.span();
        match (&t.get_ref().isotropic, &t.get_ref().voigt) {
            (Some(iso), None) => SymTensor3D::isotropic(iso.mu, iso.lambda).map_err(|e| self.wrap(span, key, e)),
            (None, Some(rows)) => {
                if rows.len() != 6 || rows.iter().any(|r| r.len() != 6) {
                    return Err(self.err(span, format!("{key}.voigt must be a 6×6 array")));
                }
                SymTensor3D::from_voigt(Matrix6::from_fn(|i, j| rows[i][j])).map_err(|e| self.wrap(span, key, e))
            }
            _ => Err(self.err(span, format!("{key} needs exactly one of 'isotropic' or 'voigt'"))),
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        Error::Config {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let cx = Ctx { text };

    let g = &raw.grid;
    let edges = g
        .dirichlet_edges
        .get_ref()
        .iter()
        .map(|s| s.parse::<Edge>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| cx.wrap(g.dirichlet_edges.span(), "grid.dirichlet_edges", e))?;
    let grid = Grid2D::new(
        *g.nx.get_ref(),
        *g.ny.get_ref(),
        *g.lx.get_ref(),
        *g.ly.get_ref(),
        &edges,
    )
    .map_err(|e| cx.wrap(g.nx.span(), "grid", e))?;

    let m = &raw.material;
    check_alpha(*m.alpha.get_ref()).map_err(|e| cx.wrap(m.alpha.span(), "material.alpha", e))?;
    let k3 = cx.matrix3(&m.k3, "material.k3")?;
    let k3_sym = 0.5 * (k3 + k3.transpose());
    if (k3 - k3.transpose()).abs().max() > 1e-12 * (1.0 + k3.abs().max())
        || k3_sym.symmetric_eigen().eigenvalues.min() <= 0.0
    {
        return Err(cx.err(m.k3.span(), "material.k3 must be symmetric positive definite"));
    }
    let b_full = match &m.b_full {
        Some(b) => cx.matrix3(b, "material.b_full")?,
        None => Matrix3::zeros(),
    };
    let material_3d = Material3D {
        c_el: cx.tensor(&m.elastic, "material.elastic")?,
        c_visc: cx.tensor(&m.viscous, "material.viscous")?,
        b_full,
        cv_bar: *m.cv_bar.get_ref(),
        k3,
        kappa: m.kappa.as_ref().map_or(0.0, |k| *k.get_ref()),
        alpha: *m.alpha.get_ref(),
    };
    let material = MaterialSet::from_3d(&material_3d).map_err(|e| cx.wrap(m.cv_bar.span(), "material", e))?;

    let l = &raw.loads;
    let tests = l.test_only.clone().unwrap_or_default();
    let loads = Loads {
        f2d: cx.opt_expr(&l.f2d, "loads.f2d")?,
        mu_flat: cx.opt_expr(&l.mu_flat, "loads.mu_flat")?,
        gu_test: match &tests.gu {
            Some(gu) => {
                let sp = |s: &String| Spanned::new(gu.span(), s.clone());
                let [a, b] = gu.get_ref();
                Some([
                    cx.expr(&sp(a), "loads.test_only.gu")?,
                    cx.expr(&sp(b), "loads.test_only.gu")?,
                ])
            }
            None => None,
        },
        gmu_test: tests
            .gmu
            .as_ref()
            .map(|s| cx.expr(s, "loads.test_only.gmu"))
            .transpose()?,
    };

    let i = &raw.ic;
    let arr = |a: &Spanned<[String; 2]>, key: &str| -> Result<[Field; 2]> {
        let [x, y] = a.get_ref();
        Ok([
            cx.expr(&Spanned::new(a.span(), x.clone()), key)?,
            cx.expr(&Spanned::new(a.span(), y.clone()), key)?,
        ])
    };
    let ic = InitialCondition {
        u0: match &i.u0 {
            Some(u) => arr(u, "ic.u0")?,
            None => [Field::zero(), Field::zero()],
        },
        v0: cx.opt_expr(&i.v0, "ic.v0")?,
        v0_derivatives: match (&i.v0_derivatives, &i.v0) {
            (Some(d), _) => {
                let sp = |s: &String| Spanned::new(d.span(), s.clone());
                let [a, b, c] = d.get_ref();
                Some([
                    cx.expr(&sp(a), "ic.v0_derivatives")?,
                    cx.expr(&sp(b), "ic.v0_derivatives")?,
                    cx.expr(&sp(c), "ic.v0_derivatives")?,
                ])
            }
            (None, None) => Some([Field::zero(), Field::zero(), Field::zero()]),
            (None, Some(_)) => None,
        },
        mu0: cx.opt_expr(&i.mu0, "ic.mu0")?,
    };

    let s = &raw.sim;
    let linear_solver = match s.linear_solver.as_ref().map(|s| s.get_ref().as_str()) {
        None | Some("direct") => LinearSolver::Direct,
        Some("cg") => LinearSolver::Cg {
            rel_tol: s.linear_solver_tol.unwrap_or(1e-12),
        },
        Some(other) => {
            return Err(cx.err(
                s.linear_solver.as_ref().expect("matched Some").span(),
                format!("sim.linear_solver: unknown solver '{other}' (expected direct or cg)"),
            ))
        }
    };
    let sim = SimParams {
        dt: *s.dt.get_ref(),
        t_end: *s.t_end.get_ref(),
        newton_tol: s.newton_tol.as_ref().map_or(1e-10, |t| *t.get_ref()),
        newton_max_iter: s.newton_max_iter.unwrap_or(25),
        linear_solver,
    };
    sim.validate().map_err(|e| cx.wrap(s.dt.span(), "sim", e))?;

    let o = &raw.output;
    let output = OutputConfig {
        csv: o.csv.clone().unwrap_or_else(|| PathBuf::from("ledger.csv")),
        vtk_stride: o.vtk_stride.unwrap_or(0),
        vtk_prefix: o.vtk_prefix.clone().unwrap_or_else(|| PathBuf::from("state")),
    };

    let k = &raw.korn;
    let d = KornConfig::default();
    let korn = KornConfig {
        hs: k.hs.clone().unwrap_or(d.hs),
        n: k.n.unwrap_or(d.n),
        nz: k.nz.unwrap_or(d.nz),
        z: match &k.z {
            Some(z) => z.get_ref().parse().map_err(|e| cx.wrap(z.span(), "korn.z", e))?,
            None => d.z,
        },
    };

    Ok(RunConfig {
        grid,
        material_3d,
        material,
        loads,
        ic,
        sim,
        output,
        korn,
    })
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
