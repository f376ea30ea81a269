//! Sweep driver: grids of (fill, gap, offset) cells evaluated into a CSV
//! table plus per-cell summaries.
//!
//! Output is deterministic: rows are ordered by (fill, gap, offset), every
//! number is formatted with 12 significant digits, and the values themselves
//! are byte-identical across runs, thread counts, and the sequential and
//! parallel execution paths (the per-cell math is order-fixed; threads only
//! redistribute whole work items).

mod config;

use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

pub use config::{
    parse_config, parse_config_partial, parse_f64_list, parse_length, ConfigError, PartialSweep,
};

use crate::exec::{map_ordered, Parallelism};
use crate::forces::{
    lateral_force_ps_from_cache, normal_force_ps_from_cache, normalization_force_ps0_from_cache,
    ForceError, HarmonicCache,
};
use crate::materials::DielectricModel;
use crate::quadrature::{QuadratureError, QuadratureSettings};
use crate::spectral::LamellarProfile;

/// Which observable columns a sweep fills in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSelection {
    pub normal: bool,
    pub normal_normalized: bool,
    pub lateral: bool,
}

impl Default for OutputSelection {
    fn default() -> Self {
        OutputSelection { normal: true, normal_normalized: true, lateral: true }
    }
}

impl OutputSelection {
    fn needs_plate_plate(&self) -> bool {
        self.normal || self.normal_normalized
    }

    fn needs_gap_integrated(&self) -> bool {
        self.lateral
    }
}

impl FromStr for OutputSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut sel = OutputSelection { normal: false, normal_normalized: false, lateral: false };
        for token in s.split(',') {
            match token.trim() {
                "normal" => sel.normal = true,
                "normal_normalized" => sel.normal_normalized = true,
                "lateral" => sel.lateral = true,
                other => {
                    return Err(format!(
                        "unknown output {other:?} (expected normal, normal_normalized, lateral)"
                    ))
                }
            }
        }
        if !(sel.normal || sel.normal_normalized || sel.lateral) {
            return Err("at least one output must be selected".into());
        }
        Ok(sel)
    }
}

/// A validated, runnable sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Label for the CSV `material_pair` column, e.g. `gold-air`.
    pub pair_label: String,
    /// Material of the stripe region (fraction `f` of each period).
    pub high: DielectricModel,
    /// Material of the complementary region.
    pub low: DielectricModel,
    pub fill_fractions: Vec<f64>,
    /// Stripe wavelength, meters.
    pub wavelength: f64,
    /// Gap values, meters.
    pub gaps: Vec<f64>,
    /// Sphere radius, meters.
    pub sphere_radius: f64,
    /// Number of uniform offsets in [0, 1).
    pub a_points: u32,
    pub outputs: OutputSelection,
    pub settings: QuadratureSettings,
    /// Worker threads; `None` leaves the global pool (and its environment
    /// override) in charge.
    pub threads: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |message: String| ConfigError::Invalid { message };
        self.high.validate().map_err(|e| invalid(e.to_string()))?;
        self.low.validate().map_err(|e| invalid(e.to_string()))?;
        if self.fill_fractions.is_empty() {
            return Err(invalid("f needs at least one value".into()));
        }
        for &f in &self.fill_fractions {
            if !(f.is_finite() && (0.0..=1.0).contains(&f)) {
                return Err(invalid(format!("fill fraction {f} outside [0, 1]")));
            }
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(invalid(format!("wavelength {} must be > 0", self.wavelength)));
        }
        if self.gaps.is_empty() {
            return Err(invalid("H needs at least one value".into()));
        }
        for &h in &self.gaps {
            if !(h.is_finite() && h > 0.0) {
                return Err(invalid(format!("gap {h} must be > 0")));
            }
        }
        if !(self.sphere_radius.is_finite() && self.sphere_radius > 0.0) {
            return Err(invalid(format!("R {} must be > 0", self.sphere_radius)));
        }
        if self.a_points < 2 {
            return Err(invalid("a_points must be at least 2".into()));
        }
        if let Some(0) = self.threads {
            return Err(invalid("threads must be at least 1".into()));
        }
        self.settings.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }
}

/// Per-row convergence status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Some integral or harmonic series for this cell exhausted its budget;
    /// affected value columns are left empty.
    ConvergenceFailure,
}

impl RowStatus {
    fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::ConvergenceFailure => "convergence_failure",
        }
    }
}

/// One output row: a single (fill, gap, offset) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub fill: f64,
    pub gap: f64,
    pub offset: f64,
    pub normal: Option<f64>,
    pub normal_normalized: Option<f64>,
    pub lateral: Option<f64>,
    pub err_normal: Option<f64>,
    pub err_lateral: Option<f64>,
    pub harmonics_used: u32,
    pub status: RowStatus,
}

/// Per-(fill, gap) aggregates used for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub fill: f64,
    pub gap: f64,
    /// Normal force of the laterally uniform reference, N.
    pub reference_force: Option<f64>,
    /// max(F/F0) - min(F/F0) over the offset grid.
    pub modulation_peak_to_peak: Option<f64>,
    /// max |F/F0 - 1| over the offset grid.
    pub modulation_max_deviation: Option<f64>,
    /// max |F_lat| over the offset grid, N.
    pub max_abs_lateral: Option<f64>,
    pub converged: bool,
}

/// Complete sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub pair_label: String,
    pub wavelength: f64,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<CellSummary>,
}

impl SweepTable {
    pub fn any_convergence_failure(&self) -> bool {
        self.rows.iter().any(|r| r.status == RowStatus::ConvergenceFailure)
    }

    /// Writes the table as CSV (LF line endings, UTF-8, 12 significant
    /// digits, empty cells for unselected or failed outputs).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "material_pair,f,lambda_m,H_m,a,F_normal_N,F_normal_over_F0,F_lateral_N,\
             err_normal_N,err_lateral_N,harmonics_used,status"
        )?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                self.pair_label,
                fmt_sci(row.fill),
                fmt_sci(self.wavelength),
                fmt_sci(row.gap),
                fmt_sci(row.offset),
                fmt_opt(row.normal),
                fmt_opt(row.normal_normalized),
                fmt_opt(row.lateral),
                fmt_opt(row.err_normal),
                fmt_opt(row.err_lateral),
                row.harmonics_used,
                row.status.as_str()
            )?;
        }
        Ok(())
    }

    /// One human-readable line per cell, for log output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.summaries
            .iter()
            .map(|s| {
                let mut line = format!(
                    "{} f={} H={}: ",
                    self.pair_label,
                    fmt_sci(s.fill),
                    fmt_sci(s.gap)
                );
                if !s.converged {
                    line.push_str("convergence failure");
                    return line;
                }
                let mut parts: Vec<String> = Vec::new();
                if let Some(f0) = s.reference_force {
                    parts.push(format!("F0={} N", fmt_sci(f0)));
                }
                if let (Some(p2p), Some(dev)) =
                    (s.modulation_peak_to_peak, s.modulation_max_deviation)
                {
                    parts.push(format!(
                        "modulation peak-to-peak={:.3}% max-deviation={:.3}%",
                        100.0 * p2p,
                        100.0 * dev
                    ));
                }
                if let Some(lat) = s.max_abs_lateral {
                    parts.push(format!("max|F_lat|={} N", fmt_sci(lat)));
                }
                line.push_str(&parts.join(", "));
                line
            })
            .collect()
    }
}

fn fmt_sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sci).unwrap_or_default()
}

#[derive(Debug, Clone, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Force(#[from] ForceError),
}

/// Runs the sweep with the default execution mode.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    run_sweep_with(spec, Parallelism::default())
}

/// Runs the sweep on an explicit execution mode. `spec.threads` (if set)
/// bounds the rayon pool; it is ignored on the sequential path.
pub fn run_sweep_with(spec: &SweepSpec, par: Parallelism) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    match par {
        Parallelism::Sequential => {
            if spec.threads.map_or(false, |t| t > 1) {
                log::warn!("threads setting ignored on the sequential path");
            }
            run_cells(spec, par)
        }
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => match spec.threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(
                    |e| {
                        SweepError::Config(ConfigError::Invalid {
                            message: format!("failed to build thread pool: {e}"),
                        })
                    },
                )?;
                pool.install(|| run_cells(spec, par))
            }
            None => run_cells(spec, par),
        },
    }
}

fn run_cells(spec: &SweepSpec, par: Parallelism) -> Result<SweepTable, SweepError> {
    let mut fills = spec.fill_fractions.clone();
    fills.sort_by(f64::total_cmp);
    fills.dedup();
    let mut gaps = spec.gaps.clone();
    gaps.sort_by(f64::total_cmp);
    gaps.dedup();

    let cells: Vec<(f64, f64)> =
        fills.iter().flat_map(|&f| gaps.iter().map(move |&h| (f, h))).collect();

    let outcomes: Vec<Result<CellOutput, SweepError>> =
        map_ordered(par, cells, |(fill, gap)| evaluate_cell(spec, fill, gap, par));

    let mut rows = Vec::with_capacity(outcomes.len() * spec.a_points as usize);
    let mut summaries = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let cell = outcome?;
        rows.extend(cell.rows);
        summaries.push(cell.summary);
    }
    Ok(SweepTable {
        pair_label: spec.pair_label.clone(),
        wavelength: spec.wavelength,
        rows,
        summaries,
    })
}

struct CellOutput {
    rows: Vec<SweepRow>,
    summary: CellSummary,
}

/// Distinguishes "budget ran out" (a flagged row) from hard errors (which
/// abort the sweep).
fn build_cache(
    build: impl FnOnce() -> Result<HarmonicCache, ForceError>,
) -> Result<Option<HarmonicCache>, SweepError> {
    match build() {
        Ok(cache) => Ok(Some(cache)),
        Err(
            ForceError::Quadrature(QuadratureError::ConvergenceFailure { .. })
            | ForceError::Kernel(crate::kernels::KernelError::Quadrature(
                QuadratureError::ConvergenceFailure { .. },
            )),
        ) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn evaluate_cell(
    spec: &SweepSpec,
    fill: f64,
    gap: f64,
    par: Parallelism,
) -> Result<CellOutput, SweepError> {
    let profile = LamellarProfile::new(spec.high, spec.low, fill, spec.wavelength)
        .map_err(ForceError::from)?;

    let plate_plate = if spec.outputs.needs_plate_plate() {
        build_cache(|| HarmonicCache::plate_plate(&profile, gap, &spec.settings, par))?
    } else {
        None
    };
    let gap_integrated = if spec.outputs.needs_gap_integrated() {
        build_cache(|| HarmonicCache::gap_integrated(&profile, gap, &spec.settings, par))?
    } else {
        None
    };

    let failed = (spec.outputs.needs_plate_plate() && plate_plate.is_none())
        || (spec.outputs.needs_gap_integrated() && gap_integrated.is_none());
    let status = if failed { RowStatus::ConvergenceFailure } else { RowStatus::Ok };

    let reference = plate_plate
        .as_ref()
        .map(|cache| normalization_force_ps0_from_cache(cache, spec.sphere_radius))
        .transpose()?;

    let n = spec.a_points;
    let mut rows = Vec::with_capacity(n as usize);
    let mut normalized_min = f64::INFINITY;
    let mut normalized_max = f64::NEG_INFINITY;
    let mut max_abs_lateral: Option<f64> = None;

    for j in 0..n {
        let offset = j as f64 / n as f64;
        let mut row = SweepRow {
            fill,
            gap,
            offset,
            normal: None,
            normal_normalized: None,
            lateral: None,
            err_normal: None,
            err_lateral: None,
            harmonics_used: 0,
            status,
        };
        if let Some(cache) = &plate_plate {
            let force = normal_force_ps_from_cache(cache, spec.sphere_radius, offset)?;
            row.harmonics_used = row.harmonics_used.max(force.harmonics_used);
            if spec.outputs.normal {
                row.normal = Some(force.value);
                row.err_normal = Some(force.error_estimate);
            }
            let f0 = reference.as_ref().expect("reference exists with the cache").value;
            let ratio = force.value / f0;
            if spec.outputs.normal_normalized {
                row.normal_normalized = Some(ratio);
            }
            normalized_min = normalized_min.min(ratio);
            normalized_max = normalized_max.max(ratio);
        }
        if let Some(cache) = &gap_integrated {
            let force = lateral_force_ps_from_cache(cache, spec.sphere_radius, offset)?;
            row.harmonics_used = row.harmonics_used.max(force.harmonics_used);
            row.lateral = Some(force.value);
            row.err_lateral = Some(force.error_estimate);
            let mag = force.value.abs();
            max_abs_lateral = Some(max_abs_lateral.map_or(mag, |m: f64| m.max(mag)));
        }
        rows.push(row);
    }

    let modulation = plate_plate.is_some() && normalized_max.is_finite();
    let summary = CellSummary {
        fill,
        gap,
        reference_force: reference.as_ref().map(|r| r.value),
        modulation_peak_to_peak: if modulation {
            Some(normalized_max - normalized_min)
        } else {
            None
        },
        modulation_max_deviation: if modulation {
            Some((normalized_max - 1.0).abs().max((normalized_min - 1.0).abs()))
        } else {
            None
        },
        max_abs_lateral,
        converged: !failed,
    };
    Ok(CellOutput { rows, summary })
}
