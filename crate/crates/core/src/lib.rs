//! Steady-state photoluminescence excitation (PLE) spectra of two
//! dipole-dipole coupled two-level emitters under cw plane-wave drive.
//!
//! The pipeline is
//! [`GeometryConfig`] → [`Couplings`] → [`Liouvillian`] → steady state →
//! [`total_intensity`]. Everything is generic over the scalar type
//! ([`Real`], implemented for `f32` and `f64`); the `*64` / `*32` aliases
//! below fix the precision.
//!
//! Units: rates are in units of `γ1`, lengths in units of the resonance
//! wavelength of emitter 1.
//!
//! ```
//! use pairple::{GeometryConfig64, PairParams64, ple_scan};
//! use std::f64::consts::FRAC_PI_2;
//!
//! let geom = GeometryConfig64::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 0.08).unwrap();
//! let params = PairParams64::identical(2.0);
//! let grid: Vec<f64> = (0..=40).map(|i| -20.0 + i as f64).collect();
//! let spectrum = ple_scan(&params, &geom, &grid).unwrap();
//! assert_eq!(spectrum.intensity.len(), grid.len());
//! ```

pub mod couplings;
pub mod error;
pub mod geometry;
pub mod master_equation;
pub mod scalar;
pub mod spectra;
pub mod steady_state;

pub use couplings::{
    drive_amplitudes, gamma_12, green_contraction, green_tensor, omega_12, Couplings, PairParams,
};
pub use error::{Error, Result};
pub use geometry::{
    admissible_theta_range, derive_geometry, sin2_beta, DetectorDistance, GeometryConfig,
    GeometryDerived,
};
pub use master_equation::{
    apply_liouvillian, build_liouvillian, to_collective, CollectiveBasis, DensityMatrix,
    Liouvillian, LiouvillianParts, Mat16, Mat4,
};
pub use scalar::{Real, C};
pub use spectra::{
    find_peaks, intensity_factors, ple_scan, polarization_scan, product_basis_intensity,
    total_intensity, IntensityFactors, Peak, PeakKind, PleSpectrum, PolarizationScan,
};
pub use steady_state::{
    evolve_default, evolve_to_steady, evolve_with_retry, oracle_schedule, propagate, solve_steady,
    Evolution,
};

pub type GeometryConfig64 = GeometryConfig<f64>;
pub type GeometryConfig32 = GeometryConfig<f32>;
pub type GeometryDerived64 = GeometryDerived<f64>;
pub type GeometryDerived32 = GeometryDerived<f32>;
pub type PairParams64 = PairParams<f64>;
pub type PairParams32 = PairParams<f32>;
pub type Couplings64 = Couplings<f64>;
pub type Couplings32 = Couplings<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type Liouvillian64 = Liouvillian<f64>;
pub type Liouvillian32 = Liouvillian<f32>;
pub type IntensityFactors64 = IntensityFactors<f64>;
pub type IntensityFactors32 = IntensityFactors<f32>;
pub type PleSpectrum64 = PleSpectrum<f64>;
pub type PleSpectrum32 = PleSpectrum<f32>;
pub type PolarizationScan64 = PolarizationScan<f64>;
pub type PolarizationScan32 = PolarizationScan<f32>;
pub type Peak64 = Peak<f64>;
pub type Peak32 = Peak<f32>;
