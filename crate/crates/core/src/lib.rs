//! Generalized Sierpinski carpet graphs, killed Green's functions, capacities
//! and Gaussian free field sampling with a hard wall.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod gff;
pub mod graphs;
pub mod green;
pub mod io;
pub mod solver;
pub mod studies;

pub use error::{Error, ResourceCaps, Result};
pub use geometry::{
    cells_at_level, dimensions, half_open_partition, validate_gsc, validate_gsc_with, AxiomStatus,
    CarpetSpec, Cell, DimensionReport, HalfOpenPartition, LevelCellSet, ValidationReport, Witness,
};
pub use gff::{
    conditional_decompose, empirical_covariance, estimate_wall_probability, gibbs_hard_wall,
    relative_entropy, sample_gff, sample_gff_batch, ChainConfig, FieldSample, Observable,
    SweepOrder, Tilt, WallEstimate, WallRun, WallRunStats,
};
pub use graphs::{
    build_crosswire, build_inner_graph, build_outer_graph, coarse_sets, cubic_neighborhood,
    default_x0, mean_value_operator, project_to_inner, sample_at_centers, Center, CoarseBlock,
    CoarseSets, GraphKind, LatticeGraph, RipSubgraph,
};
pub use green::{
    crosswire_resistance, dirichlet_energy, equilibrium_potential, estimate_rho, green_form,
    harmonic_extension, operator_energy, quad_form_inverse_green, resistance_sequence, Boundary,
    DirichletOperator, Equilibrium, ResistanceResult, SolverChoice, SolverConfig,
};
pub use studies::{run_studies, ReportRow, RunMode, StudyPlan, StudyReport};
