//! Camera-aware 3D body estimation toolkit.
//!
//! The crate combines a perspective camera model ([`camgeom`]), discretized
//! calibration losses with analytic gradients ([`losses`]), a simplified
//! articulated skeleton ([`bodykin`]), optimization-based body fitting under
//! an estimated camera ([`fitter`]), world-frame evaluation metrics
//! ([`metrics`]), and equirectangular-panorama synthetic data generation
//! ([`panosample`]).
//!
//! All angles are radians internally; degrees appear only at the JSON/CLI
//! boundary. With the default `parallel` feature, batch entry points
//! (panorama resampling, batch fitting, batch metric evaluation) run on
//! rayon; without it they fall back to equivalent sequential loops.

pub mod bodykin;
pub mod camgeom;
pub mod fitter;
pub mod losses;
pub mod metrics;
pub mod panosample;
