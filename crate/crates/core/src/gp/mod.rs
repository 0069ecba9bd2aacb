//! Brute-force Gaussian-process implicit surfaces: realizations of the
//! squared-exponential process, ray casting against their level sets, and
//! the statistics the macrofacet medium is meant to reproduce.

mod field;
mod ray;
mod stats;

pub use field::{realize_gp, GpMean, GpRealization, GpSynthesizer, GridSpec};
pub use ray::{first_hit, FirstHit, BISECTION_STEPS};
pub use stats::{
    empirical_transmittance, empirical_vndf, ensemble_radiance, multiplicativity_probe, realization_radiance,
    EnsembleImage, EnsembleScene, MultiplicativityProbe, OracleOptions, SphereBins, TransmittanceRow, VndfHistogram,
    MAX_ENSEMBLE_PIXELS, MAX_REALIZATIONS,
};
