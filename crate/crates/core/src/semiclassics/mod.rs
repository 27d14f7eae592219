//! Semiclassical bookkeeping: partitions, character families, spectral
//! windows, quantum limits, the integrated ergodicity statistic, density-one
//! selection, Weyl counting and zonal concentration.

mod limits;
mod partition;
mod window;
mod zonal;

pub use limits::{
    integrated_qe_statistic, limit_target, limit_target_error, matrix_element, qe_stat_point, quantum_limit,
    select_density_one, theta_density, weyl_statistic, QeStatPoint, QuantumLimitEntry, QuantumLimitReport,
    SelectionResult, TestFunction, WeylPoint,
};
pub use partition::{
    admissible_exponents, character_family, check_admissible, partition, CharacterFamily, FamilySnapshot,
    PartitionResult, VARTHETA_LIMIT,
};
pub use window::{spectral_window, SpectralWindow, SpectrumSource};
pub use zonal::{zonal_mass, zonal_report, ZonalReport};
