//! Emission spectra from two-time correlations, weak-drive response scans,
//! dressed-mode frequencies and the temperature anticrossing map.

mod correlation;
mod linear;
pub mod peaks;
mod spectrum;

pub use correlation::{
    emission_correlation, regression_trace, two_time_correlation, two_time_covariance,
    CorrelationKind, CorrelationOptions, CorrelationTrace, Propagator, StationaryProblem,
};
pub use linear::{
    anticrossing_map, cavity_population, linear_response_scan, polariton_modes, scatter_fraction,
    transmission_amplitude, AnticrossingMap, LinearResponse, PolaritonMode,
};
pub use spectrum::{format_num, power_spectrum, Reference, Spectrum};
