//! One-forms of the Dirac calculus, strong connections on the U(1) bundle
//! `T³_θ → T²_θ`, and the Dirac operators they induce.
//!
//! One-forms are kept in canonical form `Σ σʲ π(cⱼ)`. The σʲ are linearly
//! independent over the faithfully represented algebra, so the coefficient
//! triple determines the operator and the vertical field condition becomes
//! the presentation-free statement `c₃ = 1`.

mod calculus;
mod compat;
mod connection;
mod twisted;

pub use calculus::{canonicalize, vertical_part, DiracCalculus, OneForm};
pub use compat::{
    calculus_compatibility_check, find_compatibility_counterexample, CompatibilityCounterexample,
};
pub use connection::{
    hermitian_check, is_strong_connection, is_strong_connection_for, leibniz_residual, nabla,
    sample_connections, Connection, HermitianReport, StrongnessReport,
};
pub use twisted::{
    compatibility_scan, compatible_dirac, equivariant_decomposition, horizontal_part,
    lifted_dirac, per_fibre_twisted, reality_defect, squared_lift_residual, twisted_dirac,
    two_path_residual, ScanReport, ScanRow, SCAN_COEFFICIENTS,
};
