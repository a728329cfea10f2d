//! Fibre spectra and residues of lattice zeta functions.

mod eigen;
mod epstein;
mod integral;

pub use eigen::{
    fibre_eigensystem, fibre_spectrum, lifted_relation_check, spectral_report, spectrum_relation_check,
    EigenComponent, FibreEigensystem, FibreSpectrum, SpectralReport, WindowMeta, SPECTRAL_REPORT_SCHEMA,
};
pub use epstein::{epstein_residue, epstein_zeta, spinor_residue};
pub use integral::{
    fibre_length_check, nc_integral, orthogonality_check, Chirality, FibreLengthReport, FibreLengthRow,
    IntegralConfig, IntegralEstimate, IntegralOperator, OrthogonalityReport, SpectralSample, FIBRE_LENGTH_SCHEMA,
    INTEGRAL_SCHEMA, ORTHOGONALITY_SCHEMA,
};
