//! Band structure, boundary values of m-functions, and related probes.

mod floquet;
mod harmonic;
mod reflectionless;
mod sigma;
mod tree;

pub use floquet::{floquet_bands, floquet_ratio, m_periodic, monodromy, BandStructure, BAND_EDGE_TOL};
pub use harmonic::{harmonic_measure, value_distribution_defect};
pub use reflectionless::{reflectionless_defect, two_sided_periodic, ReflectionlessDefect, TwoSidedOptions, TwoSidedPeriodic};
pub use sigma::{
    classify, default_reach, energy_grid, sigma_ac_estimate, Classification, EnergyRecord, Rung, SigmaOptions, SpectralReport,
    Thresholds, DEFAULT_LADDER,
};
pub use tree::{tail_after, tree_spectrum_report, GenerationReport, TreeSpectrumReport};
