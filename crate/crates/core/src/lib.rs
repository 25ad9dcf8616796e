//! Steady states of the isotropic XY chain coupled to two thermal reservoirs
//! through a sample carrying a one-site magnetic impurity.
//!
//! The analytic side ([`scattering`], [`ness`], [`transport`]) evaluates the
//! closed-form momentum integrals; [`oracle`] recomputes the same quantities
//! by evolving a finite truncation of the lattice.

pub mod error;
pub mod model;
pub mod ness;
pub mod numerics;
pub mod oracle;
pub mod scattering;
pub mod transport;

pub use error::{Error, Result};
pub use model::{
    bound_state, dispersion, planck_density, planck_difference, BoundState, ModelParams,
    OperatorKind, Reservoir, ThermalConfig,
};
pub use ness::{
    correlation_block, s_element, ti_commutator_element, CorrelationBlock, NessEvaluator,
    SiteWindow,
};
pub use numerics::{adaptive_integrate, QuadratureResult, QuadratureSpec};
pub use scattering::{magnetic_correction, wave_action, xy_symbol, MagneticCorrection, XySymbol};
pub use transport::{
    divergence_fit, entropy_production, flux_derivative, flux_second_derivative, heat_flux,
    log_decomposition, DivergenceFit, FluxReport, LogDecomposition,
};

pub use num_complex::Complex64;
