//! Structured rectangular meshes of the mid-plane and their DOF layout.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::basis::{ElementTable, CORNERS};
use crate::error::{Error, Result};

/// Quadrature order (points per direction) used for every element integral.
pub const QUAD_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];
}

impl FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Edge::Left),
            "right" => Ok(Edge::Right),
            "bottom" => Ok(Edge::Bottom),
            "top" => Ok(Edge::Top),
            other => Err(Error::Invalid(format!(
                "unknown edge '{other}' (expected left, right, bottom or top)"
            ))),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        })
    }
}

/// Degrees of freedom per node of each field.
pub const U_PER_NODE: usize = 2;
pub const V_PER_NODE: usize = 4;
/// Interleaved `(u1, u2, v, ∂₁v, ∂₂v, ∂₁₂v)` per node in the mechanical system.
pub const MECH_PER_NODE: usize = U_PER_NODE + V_PER_NODE;

/// Numbering of the three fields and of the free mechanical unknowns.
///
/// The state vectors keep `u` (2 per node), `v` (value, ∂₁, ∂₂, ∂₁₂ per node)
/// and `mu` (1 per node) separately. The mechanical system interleaves `u`
/// and `v` node by node and drops the clamped DOFs, which keeps the matrix
/// band narrow.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    n_nodes: usize,
    u_fixed: Vec<bool>,
    v_fixed: Vec<bool>,
    /// Mechanical index (`6 * node + local`) → free index.
    mech_to_free: Vec<Option<usize>>,
    free_to_mech: Vec<usize>,
}

impl DofLayout {
    pub fn n_u(&self) -> usize {
        U_PER_NODE * self.n_nodes
    }
    pub fn n_v(&self) -> usize {
        V_PER_NODE * self.n_nodes
    }
    pub fn n_mu(&self) -> usize {
        self.n_nodes
    }
    pub fn n_free_mech(&self) -> usize {
        self.free_to_mech.len()
    }

    pub fn u_fixed(&self) -> &[bool] {
        &self.u_fixed
    }
    pub fn v_fixed(&self) -> &[bool] {
        &self.v_fixed
    }

    pub fn u_constrained_count(&self) -> usize {
        self.u_fixed.iter().filter(|b| **b).count()
    }
    pub fn v_constrained_count(&self) -> usize {
        self.v_fixed.iter().filter(|b| **b).count()
    }

    pub fn mech_index_u(node: usize, c: usize) -> usize {
        MECH_PER_NODE * node + c
    }
    pub fn mech_index_v(node: usize, k: usize) -> usize {
        MECH_PER_NODE * node + U_PER_NODE + k
    }

    pub fn free_of_mech(&self, m: usize) -> Option<usize> {
        self.mech_to_free[m]
    }

    pub fn mech_of_free(&self, f: usize) -> usize {
        self.free_to_mech[f]
    }

    /// Gathers the free mechanical unknowns from separate `u`/`v` vectors.
    pub fn gather_free(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.free_to_mech
            .iter()
            .map(|&m| {
                let (node, local) = (m / MECH_PER_NODE, m % MECH_PER_NODE);
                if local < U_PER_NODE {
                    u[U_PER_NODE * node + local]
                } else {
                    v[V_PER_NODE * node + local - U_PER_NODE]
                }
            })
            .collect()
    }

    /// Writes free unknowns back; fixed entries are left untouched.
    pub fn scatter_free(&self, x: &[f64], u: &mut [f64], v: &mut [f64]) {
        for (&m, &val) in self.free_to_mech.iter().zip(x) {
            let (node, local) = (m / MECH_PER_NODE, m % MECH_PER_NODE);
            if local < U_PER_NODE {
                u[U_PER_NODE * node + local] = val;
            } else {
                v[V_PER_NODE * node + local - U_PER_NODE] = val;
            }
        }
    }
}

/// Uniform `nx × ny` rectangle mesh of `(0, lx) × (0, ly)`.
///
/// Nodes are numbered lexicographically, `i + (nx + 1) j`; elements likewise,
/// with local nodes counter-clockwise from the lower-left corner.
#[derive(Debug, Clone)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    dirichlet: BTreeSet<Edge>,
    layout: DofLayout,
    table: ElementTable,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, dirichlet: &[Edge]) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Invalid(format!("grid needs nx, ny >= 2, got {nx} x {ny}")));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::Invalid(format!(
                "side lengths must be positive, got {lx} x {ly}"
            )));
        }
        if dirichlet.is_empty() {
            return Err(Error::Invalid(
                "mechanical problem is not well-posed without Γ′_D: give at least one clamped edge".into(),
            ));
        }
        let dirichlet: BTreeSet<Edge> = dirichlet.iter().copied().collect();
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        let n_nodes = (nx + 1) * (ny + 1);
        let mut u_fixed = vec![false; U_PER_NODE * n_nodes];
        let mut v_fixed = vec![false; V_PER_NODE * n_nodes];
        for j in 0..=ny {
            for i in 0..=nx {
                let on = dirichlet.iter().any(|e| match e {
                    Edge::Left => i == 0,
                    Edge::Right => i == nx,
                    Edge::Bottom => j == 0,
                    Edge::Top => j == ny,
                });
                if on {
                    let n = i + (nx + 1) * j;
                    u_fixed[U_PER_NODE * n..U_PER_NODE * (n + 1)].fill(true);
                    v_fixed[V_PER_NODE * n..V_PER_NODE * (n + 1)].fill(true);
                }
            }
        }
        let mut mech_to_free = vec![None; MECH_PER_NODE * n_nodes];
        let mut free_to_mech = Vec::new();
        for n in 0..n_nodes {
            for local in 0..MECH_PER_NODE {
                let fixed = if local < U_PER_NODE {
                    u_fixed[U_PER_NODE * n + local]
                } else {
                    v_fixed[V_PER_NODE * n + local - U_PER_NODE]
                };
                if !fixed {
                    let m = MECH_PER_NODE * n + local;
                    mech_to_free[m] = Some(free_to_mech.len());
                    free_to_mech.push(m);
                }
            }
        }
        let grid = Self {
            nx,
            ny,
            lx,
            ly,
            dirichlet,
            layout: DofLayout {
                n_nodes,
                u_fixed,
                v_fixed,
                mech_to_free,
                free_to_mech,
            },
            table: ElementTable::new(hx, hy, QUAD_ORDER),
        };
        grid.assert_affine();
        Ok(grid)
    }

    /// Every element is the same translated rectangle, so the Jacobian is
    /// `diag(hx, hy)` on the unit reference square everywhere.
    fn assert_affine(&self) {
        let (hx, hy) = self.spacing();
        for e in 0..self.n_elements() {
            let nodes = self.element_nodes(e);
            let p0 = self.node_coords(nodes[0]);
            let p2 = self.node_coords(nodes[2]);
            let jac = (p2.0 - p0.0, p2.1 - p0.1);
            assert!(
                (jac.0 - hx).abs() <= 1e-12 * hx && (jac.1 - hy).abs() <= 1e-12 * hy,
                "element {e} is not an affine image of the reference cell"
            );
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn spacing(&self) -> (f64, f64) {
        (self.lx / self.nx as f64, self.ly / self.ny as f64)
    }
    pub fn dirichlet_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.dirichlet.iter().copied()
    }
    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }
    pub fn table(&self) -> &ElementTable {
        &self.table
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }
    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i + (self.nx + 1) * j
    }

    pub fn node_ij(&self, n: usize) -> (usize, usize) {
        (n % (self.nx + 1), n / (self.nx + 1))
    }

    pub fn node_coords(&self, n: usize) -> (f64, f64) {
        let (i, j) = self.node_ij(n);
        let (hx, hy) = self.spacing();
        // Exact endpoints on the far edges.
        let x = if i == self.nx { self.lx } else { i as f64 * hx };
        let y = if j == self.ny { self.ly } else { j as f64 * hy };
        (x, y)
    }

    pub fn element_nodes(&self, e: usize) -> [usize; 4] {
        let (ei, ej) = (e % self.nx, e / self.nx);
        CORNERS.map(|(a, b)| self.node_index(ei + a, ej + b))
    }

    pub fn element_origin(&self, e: usize) -> (f64, f64) {
        let (hx, hy) = self.spacing();
        ((e % self.nx) as f64 * hx, (e / self.nx) as f64 * hy)
    }

    /// Boundary segments `(node_a, node_b, edge)` covering all of the boundary.
    pub fn boundary_segments(&self) -> Vec<(usize, usize, Edge)> {
        let mut out = Vec::new();
        for i in 0..self.nx {
            out.push((self.node_index(i, 0), self.node_index(i + 1, 0), Edge::Bottom));
            out.push((self.node_index(i, self.ny), self.node_index(i + 1, self.ny), Edge::Top));
        }
        for j in 0..self.ny {
            out.push((self.node_index(0, j), self.node_index(0, j + 1), Edge::Left));
            out.push((
                self.node_index(self.nx, j),
                self.node_index(self.nx, j + 1),
                Edge::Right,
            ));
        }
        out
    }

    /// Free mechanical index of every element-local DOF: 8 `u` entries
    /// (`2 * node + c`) followed by 16 `v` entries (`4 * node + k`).
    pub fn element_mech_dofs(&self, e: usize) -> [Option<usize>; 24] {
        let nodes = self.element_nodes(e);
        let mut out = [None; 24];
        for (a, &n) in nodes.iter().enumerate() {
            for c in 0..U_PER_NODE {
                out[U_PER_NODE * a + c] = self.layout.free_of_mech(DofLayout::mech_index_u(n, c));
            }
            for k in 0..V_PER_NODE {
                out[8 + V_PER_NODE * a + k] = self.layout.free_of_mech(DofLayout::mech_index_v(n, k));
            }
        }
        out
    }
}
