// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod diagrams;
pub mod error;
pub mod fft;
pub mod lattice;
pub mod linalg;
pub mod numfmt;
pub mod oracle;
pub mod quad;
pub mod registry;
pub mod scattering;
pub mod thermo;

pub use error::{GgrError, Result};
pub use registry::ConstantRegistry;
pub use scattering::{build_jastrow, solve_scattering, JastrowFactor, Potential, PotentialKind, ScatteringSolution};
pub use thermo::{FreeGasPoint, GrandParams};
pub use lattice::{build_model, kernel_moments, wick_density, DiscreteTorusModel, KernelMoments, TorusGrid, TorusKernel};
pub use diagrams::{Diagram, DiagramContext, DiagramFilter, DiagramGraph, DiagramValue, Engine};
pub use oracle::{compare_ggr, exact_free_state, exact_jastrow_state, pressure_functional, LatticeModel};
pub use bounds::{BoundInputs, BoundReport, Regime};
