//! Casimir-Lifshitz observables for patterned surfaces.
//!
//! Everything here is built from one object: the per-harmonic frequency
//! integrals
//!
//! ```text
//! T_m = ∫_0^∞ dζ  ζ² X(Q_m; ζ, H)  C_m^(u)(ζ) C_m^(d)(ζ),    Q_m = 2πm/λ
//! ```
//!
//! where `X` is either the gap kernel `E` (plate-plate energy per area and,
//! through the proximity-force approximation, the normal force) or its
//! gap-integrated variant (plate-sphere energy and lateral force), and the
//! `C_m` are the contrast-spectrum coefficients of the two facing profiles.
//! The observables are then primed harmonic sums over `T_m` with `cos` or
//! `sin` phases in the lateral offset:
//!
//! ```text
//! E_pp/A   = -ħ/(2π²c²) [ T_0/2 + Σ_{m≥1} cos(2πma) T_m ]        (E kernel)
//! F^nor    = 2πR (E_pp/A)                                        (E kernel)
//! F^0      = 2πR (-ħ/(2π²c²)) T_0/2                              (E kernel)
//! E_ps     = 2πR (-ħ/(2π²c²)) [ T_0/2 + Σ cos(2πma) T_m ]        (gap-integrated)
//! F^lat    = -2πR ħ/(2π²c²λ) Σ_{m≥1} 2πm sin(2πma) T_m           (gap-integrated)
//! ```
//!
//! so `F^nor = -∂E_ps/∂H` and `F^lat = -(1/λ) ∂E_ps/∂a` hold identically.
//! Attraction means `F^nor < 0`; the lateral force restores perfect stripe
//! alignment (`a = 0` is the energy minimum).
//!
//! A [`HarmonicCache`] holds the `T_m` for one `(profile pair, H, kernel)`
//! and is immutable after construction, so a whole offset sweep reuses one
//! cache and every observable evaluation is a cheap trigonometric sum. The
//! truncation index is chosen on the unphased `|T_m|`, which bounds the
//! phased tail uniformly in `a`.

use std::cell::Cell;

use thiserror::Error;

use crate::exec::{map_ordered, Parallelism};
use crate::kernels::{
    scaled_kernel_e, scaled_kernel_e_gap_integrated, KernelArgs, KernelError,
};
use crate::materials::{PhysicalConstants, SPEED_OF_LIGHT};
use crate::quadrature::{
    integrate_semi_infinite_seeded, IntegralEstimate, PrimedAccumulator, QuadratureError,
    QuadratureSettings, SeriesState,
};
use crate::spectral::{sine_factor, LamellarProfile, ProfileError};

/// Number of harmonic terms evaluated speculatively per scheduling batch.
/// Terms past the truncation point are discarded, so results (including
/// evaluation counts) do not depend on the execution path.
const HARMONIC_BATCH: u32 = 8;

/// Geometry of the facing bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Closest separation `H`, meters.
    pub gap: f64,
    /// Lateral offset between the patterns in units of the wavelength.
    /// Only its value modulo 1 matters.
    pub lateral_offset: f64,
    /// Sphere radius for the proximity-force observables, meters.
    pub sphere_radius: Option<f64>,
}

impl Geometry {
    pub fn plate_plate(gap: f64, lateral_offset: f64) -> Self {
        Geometry { gap, lateral_offset, sphere_radius: None }
    }

    pub fn plate_sphere(gap: f64, lateral_offset: f64, sphere_radius: f64) -> Self {
        Geometry { gap, lateral_offset, sphere_radius: Some(sphere_radius) }
    }

    pub fn validate(&self) -> Result<(), ForceError> {
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(ForceError::InvalidGeometry("gap must be finite and > 0"));
        }
        if !self.lateral_offset.is_finite() {
            return Err(ForceError::InvalidGeometry("lateral offset must be finite"));
        }
        if let Some(r) = self.sphere_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(ForceError::InvalidGeometry("sphere radius must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// A force or energy value with its accuracy and cost diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceResult {
    pub value: f64,
    /// Propagated quadrature errors plus the series truncation tail.
    pub error_estimate: f64,
    /// Number of harmonic terms retained (truncation index + 1).
    pub harmonics_used: u32,
    /// Total integrand evaluations across both quadrature levels.
    pub evaluations: u64,
}

#[derive(Debug, Clone, Error)]
pub enum ForceError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("this observable needs a sphere radius")]
    MissingSphereRadius,
    #[error("facing profiles must share a wavelength, got {up} and {down}")]
    WavelengthMismatch { up: f64, down: f64 },
    #[error("cache holds {got:?} terms but {expected:?} terms are required")]
    CacheKindMismatch { expected: CacheKind, got: CacheKind },
}

/// Which kernel a [`HarmonicCache`] was integrated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheKind {
    /// `ζ² E`: plate-plate energy per area and normal forces.
    PlatePlate,
    /// `ζ² ∫_H^∞ E dH'`: plate-sphere energy and lateral forces.
    GapIntegrated,
}

#[derive(Debug, Clone, Copy)]
struct CachedTerm {
    value: f64,
    error: f64,
}

/// The per-harmonic frequency integrals for one profile pair and gap,
/// immutable once built and shareable across threads.
#[derive(Debug, Clone)]
pub struct HarmonicCache {
    kind: CacheKind,
    gap: f64,
    wavelength: f64,
    terms: Vec<CachedTerm>,
    tail_error: f64,
    evaluations: u64,
}

impl HarmonicCache {
    /// Builds the `ζ² E` cache for two identical facing profiles.
    pub fn plate_plate(
        profile: &LamellarProfile,
        gap: f64,
        settings: &QuadratureSettings,
        par: Parallelism,
    ) -> Result<Self, ForceError> {
        Self::build(CacheKind::PlatePlate, profile, profile, gap, settings, par)
    }

    /// Builds the gap-integrated cache for two identical facing profiles.
    pub fn gap_integrated(
        profile: &LamellarProfile,
        gap: f64,
        settings: &QuadratureSettings,
        par: Parallelism,
    ) -> Result<Self, ForceError> {
        Self::build(CacheKind::GapIntegrated, profile, profile, gap, settings, par)
    }

    /// Two-profile variant of [`Self::plate_plate`]; the profiles may differ
    /// in materials and fill but must share a wavelength.
    pub fn plate_plate_pair(
        up: &LamellarProfile,
        down: &LamellarProfile,
        gap: f64,
        settings: &QuadratureSettings,
        par: Parallelism,
    ) -> Result<Self, ForceError> {
        Self::build(CacheKind::PlatePlate, up, down, gap, settings, par)
    }

    /// Two-profile variant of [`Self::gap_integrated`].
    pub fn gap_integrated_pair(
        up: &LamellarProfile,
        down: &LamellarProfile,
        gap: f64,
        settings: &QuadratureSettings,
        par: Parallelism,
    ) -> Result<Self, ForceError> {
        Self::build(CacheKind::GapIntegrated, up, down, gap, settings, par)
    }

    fn build(
        kind: CacheKind,
        up: &LamellarProfile,
        down: &LamellarProfile,
        gap: f64,
        settings: &QuadratureSettings,
        par: Parallelism,
    ) -> Result<Self, ForceError> {
        settings.validate().map_err(ForceError::Quadrature)?;
        up.validate()?;
        down.validate()?;
        if !(gap.is_finite() && gap > 0.0) {
            return Err(ForceError::InvalidGeometry("gap must be finite and > 0"));
        }
        if up.wavelength != down.wavelength {
            return Err(ForceError::WavelengthMismatch {
                up: up.wavelength,
                down: down.wavelength,
            });
        }

        let ctx = TermContext::new(kind, *up, *down, gap, settings);
        let mut acc = PrimedAccumulator::new(settings);
        let mut terms: Vec<CachedTerm> = Vec::new();
        let mut evaluations: u64 = 0;

        loop {
            let start = acc.next_index();
            let indices: Vec<u32> = (0..HARMONIC_BATCH).map(|i| start + i).collect();
            let batch: Vec<Result<TermEstimate, ForceError>> =
                map_ordered(par, indices, |m| ctx.evaluate(m));
            for outcome in batch {
                let term = outcome?;
                terms.push(CachedTerm { value: term.value, error: term.error });
                evaluations += term.evaluations;
                match acc.push(term.value) {
                    SeriesState::Continue => {}
                    SeriesState::Converged => {
                        return Ok(HarmonicCache {
                            kind,
                            gap,
                            wavelength: up.wavelength,
                            terms,
                            tail_error: acc.estimate().error_estimate,
                            evaluations,
                        });
                    }
                    SeriesState::Exhausted => {
                        return Err(ForceError::Quadrature(
                            QuadratureError::ConvergenceFailure { partial: acc.estimate() },
                        ));
                    }
                }
            }
        }
    }

    pub fn kind(&self) -> CacheKind {
        self.kind
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Number of harmonic terms retained, including `m = 0`.
    pub fn harmonics(&self) -> u32 {
        self.terms.len() as u32
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// `T_0/2 + Σ_{m≥1} cos(2πma) T_m` and its error bound.
    fn cosine_sum(&self, lateral_offset: f64) -> (f64, f64) {
        let a = lateral_offset.rem_euclid(1.0);
        let mut value = 0.0;
        let mut error = self.tail_error;
        for (m, term) in self.terms.iter().enumerate() {
            if m == 0 {
                value += 0.5 * term.value;
                error += 0.5 * term.error;
            } else {
                let phase = cos_two_pi(m as f64 * a);
                value += phase * term.value;
                error += phase.abs() * term.error;
            }
        }
        (value, error)
    }

    /// `Σ_{m≥1} 2πm sin(2πma) T_m` and its error bound.
    fn sine_derivative_sum(&self, lateral_offset: f64) -> (f64, f64) {
        let a = lateral_offset.rem_euclid(1.0);
        let mut value = 0.0;
        let mut error = 2.0 * std::f64::consts::PI * self.terms.len() as f64 * self.tail_error;
        for (m, term) in self.terms.iter().enumerate().skip(1) {
            let weight = 2.0 * std::f64::consts::PI * m as f64;
            let phase = sin_two_pi(m as f64 * a);
            value += weight * phase * term.value;
            error += weight * phase.abs() * term.error;
        }
        (value, error)
    }

    fn require(&self, expected: CacheKind) -> Result<(), ForceError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(ForceError::CacheKindMismatch { expected, got: self.kind })
        }
    }
}

/// Plate-plate interaction energy per unit area (J/m²) at the geometry's
/// gap and lateral offset. Negative (binding), with magnitude maximal at
/// perfect alignment.
pub fn energy_pp_per_area(
    profile: &LamellarProfile,
    geometry: &Geometry,
    settings: &QuadratureSettings,
) -> Result<ForceResult, ForceError> {
    geometry.validate()?;
    let cache = HarmonicCache::plate_plate(profile, geometry.gap, settings, Parallelism::default())?;
    Ok(energy_pp_per_area_from_cache(&cache, geometry.lateral_offset)?)
}

/// Evaluates the plate-plate energy per area from a prebuilt cache.
pub fn energy_pp_per_area_from_cache(
    cache: &HarmonicCache,
    lateral_offset: f64,
) -> Result<ForceResult, ForceError> {
    cache.require(CacheKind::PlatePlate)?;
    let (sum, err) = cache.cosine_sum(lateral_offset);
    let pre = energy_prefactor();
    Ok(result_from(cache, pre * sum, pre.abs() * err))
}

/// Normal force on a sphere of radius `R` (N), via the proximity-force
/// (Derjaguin) mapping `F = 2πR E_pp/A`. Negative (attractive).
pub fn normal_force_ps(
    profile: &LamellarProfile,
    geometry: &Geometry,
    settings: &QuadratureSettings,
) -> Result<ForceResult, ForceError> {
    geometry.validate()?;
    let radius = required_radius(geometry)?;
    let cache = HarmonicCache::plate_plate(profile, geometry.gap, settings, Parallelism::default())?;
    normal_force_ps_from_cache(&cache, radius, geometry.lateral_offset)
}

/// Evaluates the normal sphere force from a prebuilt plate-plate cache.
pub fn normal_force_ps_from_cache(
    cache: &HarmonicCache,
    sphere_radius: f64,
    lateral_offset: f64,
) -> Result<ForceResult, ForceError> {
    cache.require(CacheKind::PlatePlate)?;
    check_proximity_validity(sphere_radius, cache.gap)?;
    let (sum, err) = cache.cosine_sum(lateral_offset);
    let pre = derjaguin_prefactor(sphere_radius);
    Ok(result_from(cache, pre * sum, pre.abs() * err))
}

/// Normal sphere force for the laterally uniform reference pattern: the
/// `m = 0` channel alone, used to normalize modulation curves.
pub fn normalization_force_ps0(
    profile: &LamellarProfile,
    geometry: &Geometry,
    settings: &QuadratureSettings,
) -> Result<ForceResult, ForceError> {
    geometry.validate()?;
    let radius = required_radius(geometry)?;
    let cache = HarmonicCache::plate_plate(profile, geometry.gap, settings, Parallelism::default())?;
    normalization_force_ps0_from_cache(&cache, radius)
}

/// Evaluates the uniform-reference normal force from a prebuilt cache.
pub fn normalization_force_ps0_from_cache(
    cache: &HarmonicCache,
    sphere_radius: f64,
) -> Result<ForceResult, ForceError> {
    cache.require(CacheKind::PlatePlate)?;
    check_proximity_validity(sphere_radius, cache.gap)?;
    let term = cache.terms[0];
    let pre = derjaguin_prefactor(sphere_radius);
    Ok(ForceResult {
        value: pre * 0.5 * term.value,
        error_estimate: pre.abs() * 0.5 * term.error,
        harmonics_used: 1,
        evaluations: cache.evaluations,
    })
}

/// Plate-sphere interaction energy (J): the normal force integrated from
/// the gap out to infinite separation. Negative, vanishing at large gaps.
pub fn energy_ps(
    profile: &LamellarProfile,
    geometry: &Geometry,
    settings: &QuadratureSettings,
) -> Result<ForceResult, ForceError> {
    geometry.validate()?;
    let radius = required_radius(geometry)?;
    let cache =
        HarmonicCache::gap_integrated(profile, geometry.gap, settings, Parallelism::default())?;
    energy_ps_from_cache(&cache, radius, geometry.lateral_offset)
}

/// Evaluates the plate-sphere energy from a prebuilt gap-integrated cache.
pub fn energy_ps_from_cache(
    cache: &HarmonicCache,
    sphere_radius: f64,
    lateral_offset: f64,
) -> Result<ForceResult, ForceError> {
    cache.require(CacheKind::GapIntegrated)?;
    check_proximity_validity(sphere_radius, cache.gap)?;
    let (sum, err) = cache.cosine_sum(lateral_offset);
    let pre = derjaguin_prefactor(sphere_radius);
    Ok(result_from(cache, pre * sum, pre.abs() * err))
}

/// Lateral force on the sphere (N), positive along increasing offset.
/// Restores alignment: it drives the offset toward `a = 0`, vanishing at
/// the aligned and anti-aligned configurations.
pub fn lateral_force_ps(
    profile: &LamellarProfile,
    geometry: &Geometry,
    settings: &QuadratureSettings,
) -> Result<ForceResult, ForceError> {
    geometry.validate()?;
    let radius = required_radius(geometry)?;
    let cache =
        HarmonicCache::gap_integrated(profile, geometry.gap, settings, Parallelism::default())?;
    lateral_force_ps_from_cache(&cache, radius, geometry.lateral_offset)
}

/// Evaluates the lateral force from a prebuilt gap-integrated cache.
pub fn lateral_force_ps_from_cache(
    cache: &HarmonicCache,
    sphere_radius: f64,
    lateral_offset: f64,
) -> Result<ForceResult, ForceError> {
    cache.require(CacheKind::GapIntegrated)?;
    check_proximity_validity(sphere_radius, cache.gap)?;
    let (sum, err) = cache.sine_derivative_sum(lateral_offset);
    let pre = derjaguin_prefactor(sphere_radius) / cache.wavelength;
    Ok(result_from(cache, pre * sum, pre.abs() * err))
}

fn result_from(cache: &HarmonicCache, value: f64, error: f64) -> ForceResult {
    ForceResult {
        value,
        error_estimate: error,
        harmonics_used: cache.harmonics(),
        evaluations: cache.evaluations,
    }
}

/// `-ħ/(2π²c²)`, the negative prefactor common to all observables.
fn energy_prefactor() -> f64 {
    let k = PhysicalConstants::CODATA;
    -k.hbar / (2.0 * std::f64::consts::PI.powi(2) * k.c * k.c)
}

fn derjaguin_prefactor(sphere_radius: f64) -> f64 {
    2.0 * std::f64::consts::PI * sphere_radius * energy_prefactor()
}

fn required_radius(geometry: &Geometry) -> Result<f64, ForceError> {
    geometry.sphere_radius.ok_or(ForceError::MissingSphereRadius)
}

fn check_proximity_validity(sphere_radius: f64, gap: f64) -> Result<(), ForceError> {
    if !(sphere_radius.is_finite() && sphere_radius > 0.0) {
        return Err(ForceError::InvalidGeometry("sphere radius must be finite and > 0"));
    }
    if sphere_radius < 10.0 * gap {
        log::warn!(
            "sphere radius {sphere_radius} m is below 10 gap widths ({gap} m); \
             the proximity-force mapping loses accuracy"
        );
    }
    Ok(())
}

struct TermEstimate {
    value: f64,
    error: f64,
    evaluations: u64,
}

/// Everything needed to evaluate one harmonic term, cheap to share across
/// worker threads.
struct TermContext {
    kind: CacheKind,
    up: LamellarProfile,
    down: LamellarProfile,
    gap: f64,
    outer: QuadratureSettings,
    inner: QuadratureSettings,
    breakpoints: Vec<f64>,
    decay_scale: f64,
    skip_oscillating: bool,
}

impl TermContext {
    fn new(
        kind: CacheKind,
        up: LamellarProfile,
        down: LamellarProfile,
        gap: f64,
        settings: &QuadratureSettings,
    ) -> Self {
        // The frequency integrand turns over at ζ ~ c/2H; seeding a decade
        // ladder around it resolves both the material response scales and
        // the retardation falloff regardless of where they sit relative to
        // each other.
        let decay_scale = SPEED_OF_LIGHT / (2.0 * gap);
        let breakpoints: Vec<f64> =
            (-6..=4).map(|k| 10f64.powi(k) * decay_scale).collect();
        // The nested kernel quadrature runs two digits tighter so its noise
        // stays below the outer rule's error model.
        let inner = QuadratureSettings {
            rel_tol: (settings.rel_tol * 1e-2).max(1e-14),
            ..settings.clone()
        };
        let skip_oscillating = up.high == up.low || down.high == down.low;
        TermContext {
            kind,
            up,
            down,
            gap,
            outer: settings.clone(),
            inner,
            breakpoints,
            decay_scale,
            skip_oscillating,
        }
    }

    fn evaluate(&self, m: u32) -> Result<TermEstimate, ForceError> {
        let geometric = if m == 0 {
            1.0
        } else {
            if self.skip_oscillating {
                return Ok(TermEstimate { value: 0.0, error: 0.0, evaluations: 0 });
            }
            let s = sine_factor(m, self.up.fill_fraction) * sine_factor(m, self.down.fill_fraction);
            if s == 0.0 {
                return Ok(TermEstimate { value: 0.0, error: 0.0, evaluations: 0 });
            }
            s
        };

        let q = 2.0 * std::f64::consts::PI * m as f64 / self.up.wavelength;
        let issue: Cell<Option<ForceError>> = Cell::new(None);
        let inner_evaluations: Cell<u64> = Cell::new(0);

        let integrand = |zeta: f64| -> f64 {
            if zeta == 0.0 {
                // Removable: the scaled kernel has a finite ζ → 0 limit and
                // a single point does not move the integral.
                return 0.0;
            }
            let weight = match self.contrast_weight(m, zeta) {
                Ok(w) => w,
                Err(e) => {
                    issue.set(Some(e));
                    return 0.0;
                }
            };
            if weight == 0.0 {
                return 0.0;
            }
            let args = KernelArgs { transverse_wavevector: q, zeta, gap: self.gap };
            let kernel = match self.kind {
                CacheKind::PlatePlate => scaled_kernel_e(&args, &self.inner),
                CacheKind::GapIntegrated => scaled_kernel_e_gap_integrated(&args, &self.inner),
            };
            match kernel {
                Ok(est) => {
                    inner_evaluations.set(inner_evaluations.get() + est.evaluations);
                    est.value * weight
                }
                Err(KernelError::Quadrature(QuadratureError::ConvergenceFailure { partial })) => {
                    inner_evaluations.set(inner_evaluations.get() + partial.evaluations);
                    issue.set(Some(ForceError::Quadrature(
                        QuadratureError::ConvergenceFailure { partial },
                    )));
                    partial.value * weight
                }
                Err(e) => {
                    issue.set(Some(e.into()));
                    0.0
                }
            }
        };

        let est: IntegralEstimate = integrate_semi_infinite_seeded(
            integrand,
            0.0,
            self.decay_scale,
            &self.breakpoints,
            &self.outer,
        )
        .map_err(ForceError::Quadrature)?;
        if let Some(e) = issue.take() {
            return Err(e);
        }
        Ok(TermEstimate {
            value: geometric * est.value,
            error: geometric.abs() * est.error_estimate,
            evaluations: inner_evaluations.get() + est.evaluations,
        })
    }

    /// `C_m^(u)(ζ) C_m^(d)(ζ)` with the geometric sine factors split off
    /// (they are applied once per term, not per frequency).
    fn contrast_weight(&self, m: u32, zeta: f64) -> Result<f64, ForceError> {
        if m == 0 {
            let u = mean_ratio(&self.up, zeta)?;
            let d = mean_ratio(&self.down, zeta)?;
            Ok(u * d)
        } else {
            let u = self.up.contrast_difference(zeta)?;
            let d = self.down.contrast_difference(zeta)?;
            Ok(u * d)
        }
    }
}

fn mean_ratio(profile: &LamellarProfile, zeta: f64) -> Result<f64, ForceError> {
    let rh = profile.high.cm_ratio(zeta).map_err(ProfileError::from)?;
    let rl = profile.low.cm_ratio(zeta).map_err(ProfileError::from)?;
    Ok(profile.fill_fraction * rh + (1.0 - profile.fill_fraction) * rl)
}

/// `cos(2πx)` with exact values on the quarter grid, so offsets like 0 and
/// 1/2 hit their symmetry points exactly.
fn cos_two_pi(x: f64) -> f64 {
    let y = x - x.floor();
    if y == 0.0 {
        return 1.0;
    }
    if y == 0.5 {
        return -1.0;
    }
    if y == 0.25 || y == 0.75 {
        return 0.0;
    }
    let z = if y >= 0.5 { y - 1.0 } else { y };
    (2.0 * std::f64::consts::PI * z).cos()
}

/// `sin(2πx)` with exact zeros at half-integer `x`.
fn sin_two_pi(x: f64) -> f64 {
    let y = x - x.floor();
    if y == 0.0 || y == 0.5 {
        return 0.0;
    }
    if y == 0.25 {
        return 1.0;
    }
    if y == 0.75 {
        return -1.0;
    }
    let z = if y >= 0.5 { y - 1.0 } else { y };
    (2.0 * std::f64::consts::PI * z).sin()
}
