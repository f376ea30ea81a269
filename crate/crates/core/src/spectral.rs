//! Periodic stripe (lamellar) profiles and their contrast spectra.
//!
//! A profile alternates between a high and a low dielectric region along one
//! lateral axis with period `wavelength`; the high region occupies a fraction
//! `fill_fraction` of each period and is centered on the origin, so the
//! profile is even and its Fourier spectrum is real. What enters the force
//! expansion is the spectrum of the Clausius-Mossotti ratio modulation:
//!
//! ```text
//! C_0(ζ)     = f r_h(ζ) + (1 - f) r_l(ζ)
//! C_m(ζ)     = sin(m π f) / (m π) * (r_h(ζ) - r_l(ζ)),   m >= 1
//! ```
//!
//! The sine prefactor is purely geometric, so each harmonic factorizes into
//! a ζ-independent weight times the shared contrast difference; the force
//! layer exploits that to integrate each harmonic only once.

use thiserror::Error;

use crate::materials::{DielectricModel, MaterialError};

/// A binary stripe pattern: `high` on a fraction `fill_fraction` of each
/// period of length `wavelength` (meters), `low` on the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LamellarProfile {
    pub high: DielectricModel,
    pub low: DielectricModel,
    pub fill_fraction: f64,
    pub wavelength: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("fill fraction must lie in [0, 1], got {0}")]
    InvalidFillFraction(f64),
    #[error("wavelength must be finite and > 0, got {0}")]
    InvalidWavelength(f64),
    #[error(transparent)]
    Material(#[from] MaterialError),
}

impl LamellarProfile {
    pub fn new(
        high: DielectricModel,
        low: DielectricModel,
        fill_fraction: f64,
        wavelength: f64,
    ) -> Result<Self, ProfileError> {
        let profile = LamellarProfile { high, low, fill_fraction, wavelength };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        self.high.validate()?;
        self.low.validate()?;
        if !(self.fill_fraction.is_finite() && (0.0..=1.0).contains(&self.fill_fraction)) {
            return Err(ProfileError::InvalidFillFraction(self.fill_fraction));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(ProfileError::InvalidWavelength(self.wavelength));
        }
        Ok(())
    }

    /// Fourier coefficient `C_m` of the contrast-ratio modulation at
    /// imaginary frequency `zeta`.
    ///
    /// Coefficients are bounded by `|r_h - r_l| / (m π)` for `m >= 1`, and
    /// vanish exactly whenever `m * fill_fraction` is an integer (which
    /// covers empty and full stripes) or the two materials coincide.
    pub fn fourier_coeff(&self, m: u32, zeta: f64) -> Result<f64, ProfileError> {
        self.validate()?;
        if m == 0 {
            let rh = self.high.cm_ratio(zeta)?;
            let rl = self.low.cm_ratio(zeta)?;
            return Ok(self.fill_fraction * rh + (1.0 - self.fill_fraction) * rl);
        }
        let s = sine_factor(m, self.fill_fraction);
        if s == 0.0 {
            // Still surface frequency-domain errors for out-of-domain zeta.
            self.high.cm_ratio(zeta)?;
            return Ok(0.0);
        }
        Ok(s * self.contrast_difference(zeta)?)
    }

    /// `r_high(ζ) - r_low(ζ)`, the ζ-dependent factor shared by all
    /// harmonics with `m >= 1`. Identically zero when the models coincide.
    pub(crate) fn contrast_difference(&self, zeta: f64) -> Result<f64, ProfileError> {
        Ok(self.high.cm_ratio(zeta)? - self.low.cm_ratio(zeta)?)
    }
}

/// Geometric factor `sin(m π f) / (m π)` for `m >= 1`, with exact zeros
/// whenever `m f` is an integer (the floating sine alone would only come
/// within an ulp of zero).
pub(crate) fn sine_factor(m: u32, fill_fraction: f64) -> f64 {
    let mf = m as f64 * fill_fraction;
    if mf == mf.round() {
        return 0.0;
    }
    (std::f64::consts::PI * mf).sin() / (std::f64::consts::PI * m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn glass_on_vacuum(fill: f64) -> LamellarProfile {
        LamellarProfile::new(
            DielectricModel::Constant { epsilon: 4.0 },
            DielectricModel::Vacuum,
            fill,
            1e-6,
        )
        .unwrap()
    }

    #[test]
    fn mean_coefficient_is_the_fill_weighted_ratio() {
        let p = LamellarProfile::new(
            DielectricModel::Constant { epsilon: 2.0 },
            DielectricModel::Vacuum,
            0.25,
            1e-6,
        )
        .unwrap();
        // r_high = 3 * 1 / 4 = 0.75, r_low = 0.
        assert_relative_eq!(p.fourier_coeff(0, 1e15).unwrap(), 0.1875, max_relative = 1e-15);
    }

    #[test]
    fn first_harmonic_of_a_half_filled_stripe() {
        let p = glass_on_vacuum(0.5);
        let expected = 1.5 / std::f64::consts::PI;
        assert_relative_eq!(p.fourier_coeff(1, 1e15).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 0.477464829, max_relative = 1e-9);
    }

    #[test]
    fn even_harmonics_of_a_half_filled_stripe_vanish_exactly() {
        let p = glass_on_vacuum(0.5);
        for m in [2, 4, 6, 100] {
            assert_eq!(p.fourier_coeff(m, 1e15).unwrap(), 0.0);
        }
    }

    #[test]
    fn uniform_fills_have_no_harmonics() {
        for fill in [0.0, 1.0] {
            let p = glass_on_vacuum(fill);
            for m in 1..20 {
                assert_eq!(p.fourier_coeff(m, 3e15).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn identical_materials_have_no_harmonics() {
        let p = LamellarProfile::new(
            DielectricModel::gold(),
            DielectricModel::gold(),
            0.37,
            1e-6,
        )
        .unwrap();
        for m in 1..10 {
            assert_eq!(p.fourier_coeff(m, 1e15).unwrap(), 0.0);
        }
        assert!(p.fourier_coeff(0, 1e15).unwrap() > 0.0);
    }

    #[test]
    fn harmonics_respect_the_envelope_bound() {
        let p = glass_on_vacuum(0.3);
        let contrast = 1.5;
        for m in 1..200 {
            let c = p.fourier_coeff(m, 1e14).unwrap().abs();
            assert!(c <= contrast / (m as f64 * std::f64::consts::PI) + 1e-15);
        }
    }

    #[test]
    fn partial_sums_reconstruct_the_profile_inside_a_stripe() {
        // x = λ/8 sits strictly inside the high stripe for f = 0.5 (which
        // extends to |x| < λ/4), away from the jump.
        let p = glass_on_vacuum(0.5);
        let zeta = 1e15;
        let x_over_lambda = 0.125;
        let mut sum = p.fourier_coeff(0, zeta).unwrap();
        for m in 1..=10_000 {
            let c = p.fourier_coeff(m, zeta).unwrap();
            sum += 2.0 * c * (2.0 * std::f64::consts::PI * m as f64 * x_over_lambda).cos();
        }
        let r_high = DielectricModel::Constant { epsilon: 4.0 }.cm_ratio(zeta).unwrap();
        assert!((sum - r_high).abs() < 1e-3, "partial sum {sum} vs {r_high}");
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        assert!(matches!(
            LamellarProfile::new(DielectricModel::Vacuum, DielectricModel::Vacuum, 1.5, 1e-6),
            Err(ProfileError::InvalidFillFraction(_))
        ));
        assert!(matches!(
            LamellarProfile::new(DielectricModel::Vacuum, DielectricModel::Vacuum, 0.5, 0.0),
            Err(ProfileError::InvalidWavelength(_))
        ));
        assert!(matches!(
            LamellarProfile::new(
                DielectricModel::Constant { epsilon: 0.0 },
                DielectricModel::Vacuum,
                0.5,
                1e-6
            ),
            Err(ProfileError::Material(_))
        ));
    }

    #[test]
    fn out_of_domain_frequency_is_surfaced_even_for_zero_harmonics() {
        let p = glass_on_vacuum(0.5);
        assert!(p.fourier_coeff(2, -1.0).is_err());
    }
}
