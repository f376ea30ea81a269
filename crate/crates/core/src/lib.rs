//! Casimir-Lifshitz forces between periodically patterned dielectric
//! heterostructures, evaluated to second order in the dielectric contrast.
//!
//! The library is organized bottom-up:
//!
//! * [`quadrature`]: adaptive integration over semi-infinite domains and
//!   primed-series summation, the numerical workhorses everything else uses.
//! * [`materials`]: imaginary-frequency permittivity models and the
//!   Clausius-Mossotti contrast ratio they induce.
//! * [`spectral`]: lamellar (binary stripe) profiles and the Fourier
//!   coefficients of their contrast-ratio modulation.
//! * [`kernels`]: the gap response kernel coupling one Fourier harmonic of
//!   the modulation across the vacuum gap, and its gap-integrated variant.
//! * [`forces`]: plate-plate energy per area, proximity-force (Derjaguin)
//!   normal and lateral forces on a sphere, and the harmonic caches that
//!   make sweeps cheap.
//! * [`sweep`]: config parsing and the deterministic CSV sweep driver used
//!   by the `casimir-sweep` binary.
//!
//! With the default `parallel` feature the sweep grid and the per-harmonic
//! integrals run on rayon; [`Parallelism::Sequential`] selects the serial
//! path at runtime, and disabling the feature removes rayon entirely. Both
//! paths produce byte-identical output.

pub mod forces;
pub mod kernels;
pub mod materials;
pub mod quadrature;
pub mod spectral;
pub mod sweep;

mod exec;

pub use exec::Parallelism;
pub use forces::{ForceError, ForceResult, Geometry, HarmonicCache};
pub use materials::{DielectricModel, MaterialError, PhysicalConstants};
pub use quadrature::{IntegralEstimate, QuadratureError, QuadratureSettings};
pub use spectral::{LamellarProfile, ProfileError};
pub use sweep::{ConfigError, SweepError, SweepSpec};
