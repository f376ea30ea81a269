//! Imaginary-frequency dielectric response models.
//!
//! All response functions are evaluated on the imaginary frequency axis
//! (`zeta` in rad/s), where every causal permittivity is real, positive, and
//! monotonically nonincreasing. Besides the bare permittivity, each model
//! exposes the Clausius-Mossotti contrast ratio `3 (ε - 1) / (ε + 2)`, the
//! quantity the perturbative force expansion is organized in. The ratio is
//! reduced algebraically per model so it stays finite at `zeta = 0` even for
//! free-carrier (plasma) response, whose bare permittivity diverges there.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Plasma frequency used for gold, rad/s.
pub const GOLD_PLASMA_FREQUENCY: f64 = 1.37e16;

/// Resonance frequency used for silicon, rad/s.
pub const SILICON_RESONANCE_FREQUENCY: f64 = 6.6e15;

/// Plasma frequency used for silicon (3.3 times the resonance), rad/s.
pub const SILICON_PLASMA_FREQUENCY: f64 = 3.3 * SILICON_RESONANCE_FREQUENCY;

/// The fundamental constants the force expressions depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants { hbar: HBAR, c: SPEED_OF_LIGHT };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants::CODATA
    }
}

/// A dielectric response model on the imaginary frequency axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DielectricModel {
    /// `ε = 1` at all frequencies.
    Vacuum,
    /// Frequency-independent `ε >= 1`.
    Constant { epsilon: f64 },
    /// Free-carrier response `ε = 1 + ω_p² / ζ²`.
    Plasma { plasma_frequency: f64 },
    /// Single bound resonance `ε = 1 + ω_p² / (ζ² + ω_0²)`.
    DrudeLorentz { plasma_frequency: f64, resonance_frequency: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("imaginary frequency must be >= 0, got {zeta}")]
    NegativeFrequency { zeta: f64 },
    #[error("plasma permittivity diverges at zero frequency")]
    PlasmaStaticLimit,
    #[error("invalid dielectric model: {0}")]
    InvalidModel(String),
    #[error("unknown material name {0:?} (expected gold, silicon, air, or const:<value>)")]
    UnknownMaterial(String),
}

impl DielectricModel {
    /// Gold modeled as a lossless plasma.
    pub fn gold() -> Self {
        DielectricModel::Plasma { plasma_frequency: GOLD_PLASMA_FREQUENCY }
    }

    /// Silicon modeled as a single Drude-Lorentz resonance.
    pub fn silicon() -> Self {
        DielectricModel::DrudeLorentz {
            plasma_frequency: SILICON_PLASMA_FREQUENCY,
            resonance_frequency: SILICON_RESONANCE_FREQUENCY,
        }
    }

    /// Checks the model parameters themselves (frequency-independent).
    pub fn validate(&self) -> Result<(), MaterialError> {
        match *self {
            DielectricModel::Vacuum => Ok(()),
            DielectricModel::Constant { epsilon } => {
                if epsilon.is_finite() && epsilon >= 1.0 {
                    Ok(())
                } else {
                    Err(MaterialError::InvalidModel(format!(
                        "constant permittivity must be finite and >= 1, got {epsilon}"
                    )))
                }
            }
            DielectricModel::Plasma { plasma_frequency } => {
                if plasma_frequency.is_finite() && plasma_frequency > 0.0 {
                    Ok(())
                } else {
                    Err(MaterialError::InvalidModel(format!(
                        "plasma frequency must be finite and > 0, got {plasma_frequency}"
                    )))
                }
            }
            DielectricModel::DrudeLorentz { plasma_frequency, resonance_frequency } => {
                if !(plasma_frequency.is_finite() && plasma_frequency > 0.0) {
                    return Err(MaterialError::InvalidModel(format!(
                        "plasma frequency must be finite and > 0, got {plasma_frequency}"
                    )));
                }
                if !(resonance_frequency.is_finite() && resonance_frequency > 0.0) {
                    return Err(MaterialError::InvalidModel(format!(
                        "resonance frequency must be finite and > 0, got {resonance_frequency}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Permittivity at imaginary frequency `zeta` (rad/s).
    ///
    /// Fails for `zeta < 0`, and for the plasma model at `zeta = 0` where the
    /// bare permittivity diverges; use [`Self::cm_ratio`] there instead.
    pub fn permittivity(&self, zeta: f64) -> Result<f64, MaterialError> {
        self.validate()?;
        check_frequency(zeta)?;
        match *self {
            DielectricModel::Vacuum => Ok(1.0),
            DielectricModel::Constant { epsilon } => Ok(epsilon),
            DielectricModel::Plasma { plasma_frequency } => {
                if zeta == 0.0 {
                    return Err(MaterialError::PlasmaStaticLimit);
                }
                let x = plasma_frequency / zeta;
                Ok(1.0 + x * x)
            }
            DielectricModel::DrudeLorentz { plasma_frequency, resonance_frequency } => {
                Ok(1.0
                    + plasma_frequency * plasma_frequency
                        / (zeta * zeta + resonance_frequency * resonance_frequency))
            }
        }
    }

    /// Clausius-Mossotti contrast ratio `3 (ε - 1) / (ε + 2)` at `zeta`.
    ///
    /// Evaluated in a per-model reduced form, so the plasma model is finite
    /// at `zeta = 0` (where it attains its supremum 3). For models with
    /// `ε >= 1` the ratio lies in `[0, 3)` except for that static plasma
    /// endpoint, and decreases monotonically with `zeta`.
    pub fn cm_ratio(&self, zeta: f64) -> Result<f64, MaterialError> {
        self.validate()?;
        check_frequency(zeta)?;
        match *self {
            DielectricModel::Vacuum => Ok(0.0),
            DielectricModel::Constant { epsilon } => Ok(3.0 * (epsilon - 1.0) / (epsilon + 2.0)),
            DielectricModel::Plasma { plasma_frequency } => {
                let wp2 = plasma_frequency * plasma_frequency;
                Ok(3.0 * wp2 / (3.0 * zeta * zeta + wp2))
            }
            DielectricModel::DrudeLorentz { plasma_frequency, resonance_frequency } => {
                let wp2 = plasma_frequency * plasma_frequency;
                let w02 = resonance_frequency * resonance_frequency;
                Ok(3.0 * wp2 / (3.0 * (zeta * zeta + w02) + wp2))
            }
        }
    }
}

fn check_frequency(zeta: f64) -> Result<(), MaterialError> {
    if zeta.is_nan() || zeta < 0.0 {
        Err(MaterialError::NegativeFrequency { zeta })
    } else {
        Ok(())
    }
}

impl FromStr for DielectricModel {
    type Err = MaterialError;

    /// Parses the material vocabulary used by configs and the CLI:
    /// `gold`, `silicon`, `air`, or `const:<epsilon>` (case-insensitive).
    fn from_str(s: &str) -> Result<Self, MaterialError> {
        let token = s.trim().to_ascii_lowercase();
        match token.as_str() {
            "gold" => Ok(DielectricModel::gold()),
            "silicon" => Ok(DielectricModel::silicon()),
            "air" => Ok(DielectricModel::Vacuum),
            _ => {
                if let Some(value) = token.strip_prefix("const:") {
                    let epsilon: f64 = value
                        .parse()
                        .map_err(|_| MaterialError::UnknownMaterial(s.trim().to_string()))?;
                    let model = DielectricModel::Constant { epsilon };
                    model.validate()?;
                    Ok(model)
                } else {
                    Err(MaterialError::UnknownMaterial(s.trim().to_string()))
                }
            }
        }
    }
}

impl fmt::Display for DielectricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DielectricModel::Vacuum => write!(f, "air"),
            DielectricModel::Constant { epsilon } => write!(f, "const:{epsilon}"),
            DielectricModel::Plasma { plasma_frequency } => {
                write!(f, "plasma({plasma_frequency} rad/s)")
            }
            DielectricModel::DrudeLorentz { plasma_frequency, resonance_frequency } => {
                write!(f, "drude-lorentz({plasma_frequency}, {resonance_frequency} rad/s)")
            }
        }
    }
}
