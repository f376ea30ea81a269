//! Response kernels of the vacuum gap.
//!
//! At second order in the dielectric contrast, one Fourier harmonic of the
//! surface modulation with transverse wavevector `Q` couples across a gap of
//! width `H` at imaginary frequency `ζ` through the dimensionless kernel
//!
//! ```text
//! E(Q; ζ, H) = ∫_1^∞ dp (2p⁴ - 2p² + 1) / (4p² + ρ²)^{3/2} e^{-u √(4p² + ρ²)}
//! ```
//!
//! with `ρ = c Q / ζ` and `u = ζ H / c`. `E` is positive and strictly
//! decreasing in both `Q` and `H`; at fixed `(ρ, u)` it depends on nothing
//! else, which pins its scaling under `(ζ, H, Q) → (sζ, H/s, sQ)`.
//!
//! Two companions cover the force expressions:
//!
//! * the scaled kernel `ζ² E`, which stays integrable down to `ζ = 0`
//!   (approaching `c² / (16 H²)` at `Q = 0`) and is the natural integrand
//!   for frequency integrals;
//! * the gap-integrated kernel `∫_H^∞ E dH'`, which collapses in closed form
//!   to `(c/ζ) ∫_1^∞ dp N(p) / (4p² + ρ²)² e^{-u √(4p² + ρ²)}` (meters) and
//!   turns force kernels into energy kernels without a nested quadrature.
//!
//! Integrands are evaluated in the form `N(p)/p^k` over powers of
//! `√(4 + (ρ/p)²)`, which stays overflow-free for any arguments whose result
//! is representable.

use thiserror::Error;

use crate::materials::SPEED_OF_LIGHT;
use crate::quadrature::{
    integrate_semi_infinite, IntegralEstimate, QuadratureError, QuadratureSettings,
};

/// Arguments shared by the kernel evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    /// Transverse wavevector `Q` of the harmonic, rad/m. `Q = 0` is the
    /// uniform (specular) channel.
    pub transverse_wavevector: f64,
    /// Imaginary frequency `ζ`, rad/s. Must be > 0.
    pub zeta: f64,
    /// Gap width `H`, meters. Must be > 0.
    pub gap: f64,
}

#[derive(Debug, Clone, Error)]
pub enum KernelError {
    #[error("invalid kernel arguments: {0}")]
    InvalidArgs(&'static str),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl KernelArgs {
    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.transverse_wavevector.is_finite() && self.transverse_wavevector >= 0.0) {
            return Err(KernelError::InvalidArgs("transverse wavevector must be finite and >= 0"));
        }
        if !(self.zeta.is_finite() && self.zeta > 0.0) {
            return Err(KernelError::InvalidArgs("zeta must be finite and > 0"));
        }
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(KernelError::InvalidArgs("gap must be finite and > 0"));
        }
        Ok(())
    }

    /// Dimensionless `(ρ, u) = (cQ/ζ, ζH/c)`.
    fn reduced(&self) -> (f64, f64) {
        (
            SPEED_OF_LIGHT * self.transverse_wavevector / self.zeta,
            self.zeta * self.gap / SPEED_OF_LIGHT,
        )
    }
}

/// Dimensionless gap kernel `E(Q; ζ, H)`.
pub fn kernel_e(
    args: &KernelArgs,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate, KernelError> {
    args.validate()?;
    let (rho, u) = args.reduced();
    let est = integrate_semi_infinite(|p| gap_integrand(p, rho, u), 1.0, 0.5 / u, settings)?;
    Ok(est)
}

/// Kernel integrated over all gaps beyond `H`: `∫_H^∞ E(Q; ζ, H') dH'`,
/// in meters.
pub fn kernel_e_gap_integrated(
    args: &KernelArgs,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate, KernelError> {
    args.validate()?;
    let (rho, u) = args.reduced();
    let est =
        integrate_semi_infinite(|p| gap_integrated_integrand(p, rho, u), 1.0, 0.5 / u, settings)?;
    Ok(scale(est, SPEED_OF_LIGHT / args.zeta))
}

/// `ζ² E(Q; ζ, H)` (rad²/s²), finite down to `ζ → 0`.
pub fn scaled_kernel_e(
    args: &KernelArgs,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate, KernelError> {
    let est = kernel_e(args, settings)?;
    Ok(scale(est, args.zeta * args.zeta))
}

/// `ζ² ∫_H^∞ E dH'` (m rad²/s²), finite down to `ζ → 0`.
pub fn scaled_kernel_e_gap_integrated(
    args: &KernelArgs,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate, KernelError> {
    let est = kernel_e_gap_integrated(args, settings)?;
    Ok(scale(est, args.zeta * args.zeta))
}

fn scale(est: IntegralEstimate, factor: f64) -> IntegralEstimate {
    IntegralEstimate {
        value: est.value * factor,
        error_estimate: est.error_estimate * factor.abs(),
        evaluations: est.evaluations,
    }
}

// (2p⁴ - 2p² + 1) / w³ e^{-u w} with w = √(4p² + ρ²), written over p³ so no
// intermediate overflows before the exponential underflows.
fn gap_integrand(p: f64, rho: f64, u: f64) -> f64 {
    let q = rho / p;
    let s2 = 4.0 + q * q;
    let w = p * s2.sqrt();
    let damping = (-u * w).exp();
    if damping == 0.0 {
        return 0.0;
    }
    (2.0 * p - 2.0 / p + 1.0 / (p * p * p)) / (s2 * s2.sqrt()) * damping
}

// (2p⁴ - 2p² + 1) / w⁴ e^{-u w}, the H'-integrated variant (up to c/ζ).
fn gap_integrated_integrand(p: f64, rho: f64, u: f64) -> f64 {
    let q = rho / p;
    let s2 = 4.0 + q * q;
    let w = p * s2.sqrt();
    let damping = (-u * w).exp();
    if damping == 0.0 {
        return 0.0;
    }
    let p2 = p * p;
    (2.0 - 2.0 / p2 + 1.0 / (p2 * p2)) / (s2 * s2) * damping
}
