//! CSV and legacy VTK writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::EnergyLedger;
use crate::error::{Error, Result};
use crate::fields::PlateState;
use crate::grid::{Grid2D, U_PER_NODE, V_PER_NODE};

pub const LEDGER_COLUMNS: [&str; 7] = [
    "t",
    "elastic",
    "visc_diss_cum",
    "cpl_work_cum",
    "ext_work_cum",
    "balance_residual",
    "min_mu",
];

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A header plus rows of floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| fmt_float(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.split('\n').filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Invalid("CSV has no header".into()))?;
        let mut t = Table::new(header.split(','));
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Invalid(format!("CSV row {}: cannot parse '{c}'", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != t.columns.len() {
                return Err(Error::Invalid(format!("CSV row {} has {} cells", i + 1, row.len())));
            }
            t.rows.push(row);
        }
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_csv(&fs::read_to_string(path)?)
    }
}

pub fn ledger_table(ledger: &EnergyLedger) -> Table {
    let mut t = Table::new(LEDGER_COLUMNS);
    for e in &ledger.entries {
        t.push(vec![
            e.t,
            e.elastic,
            e.visc_diss_cum,
            e.cpl_work_cum,
            e.ext_work_cum,
            e.balance_residual,
            e.min_mu,
        ]);
    }
    t
}

pub fn export_ledger_csv(ledger: &EnergyLedger, path: &Path) -> Result<()> {
    ledger_table(ledger).write(path)
}

/// Legacy ASCII VTK structured grid with point data `u` (padded to 3), `v`, `mu`.
pub fn vtk_string(grid: &Grid2D, state: &PlateState) -> String {
    let n = grid.n_nodes();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "plate state t={}", fmt_float(state.t));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", grid.nx() + 1, grid.ny() + 1);
    let _ = writeln!(s, "POINTS {n} double");
    for node in 0..n {
        let (x, y) = grid.node_coords(node);
        let _ = writeln!(s, "{} {} 0", fmt_float(x), fmt_float(y));
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    let _ = writeln!(s, "VECTORS u double");
    for node in 0..n {
        let u = &state.u[U_PER_NODE * node..U_PER_NODE * (node + 1)];
        let _ = writeln!(s, "{} {} 0", fmt_float(u[0]), fmt_float(u[1]));
    }
    for (name, vals) in [
        ("v", (0..n).map(|k| state.v[V_PER_NODE * k]).collect::<Vec<_>>()),
        ("mu", state.mu.clone()),
    ] {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in vals {
            let _ = writeln!(s, "{}", fmt_float(v));
        }
    }
    s
}

pub fn export_vtk(grid: &Grid2D, state: &PlateState, path: &Path) -> Result<()> {
    state.check_shape(grid)?;
    fs::write(path, vtk_string(grid, state))?;
    Ok(())
}
