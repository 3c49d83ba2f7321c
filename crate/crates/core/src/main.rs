use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::Matrix2;

use vkplate::config::{load_config, KornConfig, RunConfig};
use vkplate::constitutive::{check_compatibility, reduce_form, SymTensor3D};
use vkplate::export::{export_ledger_csv, export_vtk, Table};
use vkplate::korn::{scaling_study, ZField};
use vkplate::{Edge, Error, Result, Stepper};

/// Tolerance of the material compatibility check enforced by `run`.
const COMPAT_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "vkplate", version, about = "Thermoviscoelastic von Kármán plate solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a configuration and write the energy ledger (and VTK snapshots).
    Run {
        config: PathBuf,
        /// Run even if the material fails the compatibility check.
        #[arg(long)]
        force: bool,
        /// Override the ledger CSV path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Korn constants on thin slabs for a list of thicknesses (CSV on stdout).
    /// Flags override the `[korn]` section of `--config`, which overrides the defaults.
    Korn {
        /// Comma-separated, strictly decreasing thicknesses [default: 0.4,0.2,0.1].
        #[arg(long, value_delimiter = ',')]
        h: Option<Vec<f64>>,
        /// In-plane elements per side [default: 8].
        #[arg(long)]
        n: Option<usize>,
        /// Through-thickness elements [default: 3].
        #[arg(long)]
        nz: Option<usize>,
        /// identity or perturbed [default: identity].
        #[arg(long)]
        z: Option<String>,
        /// Clamped edges of the mid-plane, comma-separated.
        #[arg(long, value_delimiter = ',', default_values_t = [String::from("left")])]
        clamp: Vec<String>,
        /// Run configuration whose `[korn]` section supplies defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the reduced plate tensors of a configuration.
    Reduce { config: PathBuf },
    /// Check the material compatibility conditions of a configuration.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run { config, force, out } => run(&load_config(&config)?, force, out),
        Command::Korn {
            h,
            n,
            nz,
            z,
            clamp,
            config,
            out,
        } => {
            let base = match config {
                Some(p) => load_config(&p)?.korn,
                None => KornConfig::default(),
            };
            let z = match z {
                Some(s) => s.parse()?,
                None => base.z,
            };
            let hs = h.unwrap_or(base.hs);
            korn(&hs, n.unwrap_or(base.n), nz.unwrap_or(base.nz), z, &clamp, out)
        }
        Command::Reduce { config } => reduce(&load_config(&config)?),
        Command::Check { config } => check(&load_config(&config)?),
    }
}

fn compatibility_failures(cfg: &RunConfig) -> Vec<String> {
    let m = &cfg.material_3d;
    let mut out = Vec::new();
    for (name, c) in [("elastic", &m.c_el), ("viscous", &m.c_visc)] {
        let r = check_compatibility(c, &m.b_full, COMPAT_TOL);
        if !r.tensor_ok() {
            out.push(format!("{name} tensor couples in-plane and out-of-plane strains:\n{r}"));
        }
    }
    let r = check_compatibility(&m.c_el, &m.b_full, COMPAT_TOL);
    if m.alpha == 2.0 && !r.expansion_ok() {
        out.push(format!("expansion matrix has a nonzero third row/column:\n{r}"));
    }
    out
}

fn run(cfg: &RunConfig, force: bool, out: Option<PathBuf>) -> Result<ExitCode> {
    let failures = compatibility_failures(cfg);
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("{f}");
        }
        if !force {
            return Err(Error::Invalid(
                "material fails the compatibility check (use --force to run anyway)".into(),
            ));
        }
        eprintln!("warning: running despite failed compatibility check");
    }
    print_reduced("elastic", &cfg.material_3d.c_el)?;
    print_reduced("viscous", &cfg.material_3d.c_visc)?;
    let stepper = Stepper::new(&cfg.grid, &cfg.material, &cfg.loads, cfg.sim)?;
    let initial = cfg.ic.interpolate(&cfg.grid)?;
    let traj = stepper.run_from(initial)?;
    let csv = out.unwrap_or_else(|| cfg.output.csv.clone());
    export_ledger_csv(&traj.ledger, &csv)?;
    let stride = cfg.output.vtk_stride;
    if stride > 0 {
        for (k, s) in traj.states.iter().enumerate().step_by(stride) {
            let mut p = cfg.output.vtk_prefix.clone().into_os_string();
            p.push(format!("_{k:05}.vtk"));
            export_vtk(&cfg.grid, s, &PathBuf::from(p))?;
        }
    }
    let last = traj.ledger.last();
    println!(
        "{} steps to t = {}; elastic energy {:.6e}; balance residual {:.3e}; ledger written to {}",
        traj.states.len() - 1,
        last.t,
        last.elastic,
        last.balance_residual,
        csv.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn korn(hs: &[f64], n: usize, nz: usize, z: ZField, clamp: &[String], out: Option<PathBuf>) -> Result<ExitCode> {
    let edges = clamp.iter().map(|s| s.parse()).collect::<Result<Vec<Edge>>>()?;
    let study = scaling_study(hs, n, nz, z, &edges)?;
    let mut t = Table::new(["h", "lambda_min", "constant", "pair_slope"]);
    for r in &study.rows {
        t.push(vec![r.h, r.lambda_min, r.constant, r.pair_slope]);
    }
    match out {
        Some(p) => t.write(&p)?,
        None => print!("{}", t.to_csv()),
    }
    eprintln!("least-squares slope of log(constant) vs log(h): {:.6}", study.slope);
    Ok(ExitCode::SUCCESS)
}

fn print_matrix(name: &str, rows: &[Vec<f64>]) {
    println!("{name}:");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:>25.16e}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn print_reduced(name: &str, c3: &SymTensor3D) -> Result<()> {
    let (c2, map) = reduce_form(c3)?;
    let v = c2.voigt();
    print_matrix(
        &format!("{name} reduced tensor (Voigt 11, 22, 12; engineering shear)"),
        &(0..3).map(|i| (0..3).map(|j| v[(i, j)]).collect()).collect::<Vec<_>>(),
    );
    print_matrix(
        &format!("{name} relaxation map (rows a13, a23, a33; columns A11, A22, A12)"),
        &(0..3)
            .map(|i| (0..3).map(|j| map.coeff[(i, j)]).collect())
            .collect::<Vec<_>>(),
    );
    println!("{name} Q2(Id2) = {:.16e}", c2.quad_form(&Matrix2::identity()));
    Ok(())
}

fn reduce(cfg: &RunConfig) -> Result<ExitCode> {
    let m = &cfg.material_3d;
    print_reduced("elastic", &m.c_el)?;
    print_reduced("viscous", &m.c_visc)?;
    let k = cfg.material.k_tilde();
    print_matrix(
        "reduced conductivity",
        &[vec![k[(0, 0)], k[(0, 1)]], vec![k[(1, 0)], k[(1, 1)]]],
    );
    let b = cfg.material.b_thermal();
    print_matrix(
        &format!("thermal expansion at alpha = {}", m.alpha),
        &[vec![b[(0, 0)], b[(0, 1)]], vec![b[(1, 0)], b[(1, 1)]]],
    );
    println!(
        "dissipative heating tensor {}",
        if cfg.material.has_dissipative_heating() {
            "active"
        } else {
            "zero"
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn check(cfg: &RunConfig) -> Result<ExitCode> {
    let m = &cfg.material_3d;
    let mut pass = true;
    for (name, c) in [("elastic", &m.c_el), ("viscous", &m.c_visc)] {
        let r = check_compatibility(c, &m.b_full, COMPAT_TOL);
        println!("[{name}]\n{r}");
        pass &= r.pass();
    }
    println!("overall: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
