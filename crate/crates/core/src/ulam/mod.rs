//! Ulam discretization of the open and closed transfer operators.

mod curves;
mod eigen;
mod identities;
mod measure;
mod operator;
mod partition;
mod spectral;

pub use curves::{evd_operator_curve, perturbed_eigenvalue_curve, PerturbedSpectrum, ALIGN_CAP};
pub(crate) use curves::ball_frame;
pub use eigen::{
    leading_eigs, leading_eigs_from, second_eigenvalue_modulus, LeadingEigs, EIG_MAX_ITER, EIG_TOL,
};
pub use identities::{
    conformality_residual, duality_residual, h0_integral, lambda_invariance_residual, nu_survival,
};
pub use measure::{BallMass, MeasureOracle};
pub use operator::{build_operator, DiscretizedOperator, Variant};
pub use partition::{build_partition, build_partition_with_points, BinPartition};
pub use spectral::{
    check_hole_smallness, check_operator_closeness, hole_smallness, spectral_solution,
    spectral_solution_with_tol, SpectralSolution, SUPPORT_TOL,
};
