//! Thermoviscoelastic von Kármán plates: reduced constitutive tensors,
//! a conforming finite element discretisation of the coupled mechanical and
//! heat system with implicit Euler time stepping, energy bookkeeping, and a
//! numerical study of generalized Korn constants on thin slabs.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod basis;
pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod export;
pub mod expr;
pub mod fields;
pub mod grid;
pub mod korn;
pub mod linalg;
pub mod parallel;
pub mod stepper;

pub use constitutive::{check_compatibility, reduce_form, reduce_heat_conductivity, Material3D, MaterialSet};
pub use error::{Error, Result};
pub use fields::{Field, InitialCondition, Loads, PlateState};
pub use grid::{Edge, Grid2D};
pub use stepper::{run, step, SimParams, Stepper, Trajectory};
