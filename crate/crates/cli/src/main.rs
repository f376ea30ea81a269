//! Sweep runner: evaluates sphere-plate force grids and writes CSV.
//!
//! Parameters come from an optional `--config` file (flat `key = value`
//! lines) overridden by command-line flags. The CSV goes to `--out` or
//! stdout; per-cell summaries go to stderr. Exit codes: 0 success, 1 bad
//! usage or configuration, 2 finished with convergence failures flagged in
//! the output.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use casimir::sweep::{
    parse_config_partial, parse_f64_list, parse_length, run_sweep, OutputSelection, PartialSweep,
    SweepTable,
};
use casimir::DielectricModel;

#[derive(Parser, Debug)]
#[command(
    name = "casimir-sweep",
    version,
    about = "Casimir force sweeps for striped dielectric heterostructures",
    after_help = "Lengths require a nm, um, or m suffix. Without --threads the rayon \
                  global pool is used, which honors RAYON_NUM_THREADS."
)]
struct Cli {
    /// Config file with one `key = value` per line; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Material pair `high,low`: gold, silicon, air, or const:<epsilon>.
    #[arg(long)]
    materials: Option<String>,
    /// Comma-separated fill fractions in [0, 1].
    #[arg(long)]
    f: Option<String>,
    /// Stripe wavelength, e.g. `1um`.
    #[arg(long)]
    lambda: Option<String>,
    /// Comma-separated gaps, e.g. `100nm,300nm`.
    #[arg(long = "H", value_name = "GAPS")]
    gaps: Option<String>,
    /// Sphere radius, e.g. `180um`.
    #[arg(long = "R", value_name = "RADIUS")]
    sphere_radius: Option<String>,
    /// Number of uniform lateral offsets in [0, 1).
    #[arg(long)]
    a_points: Option<u32>,
    /// Comma-separated subset of: normal, normal_normalized, lateral.
    #[arg(long)]
    outputs: Option<String>,
    /// Relative tolerance for integrals and harmonic series.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Harmonic cutoff for the stripe Fourier series.
    #[arg(long)]
    m_max: Option<u32>,
    /// Worker thread count.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(table) => {
            if table.any_convergence_failure() {
                eprintln!("warning: some cells failed to converge; see the status column");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<SweepTable, String> {
    let mut partial = PartialSweep::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        partial = parse_config_partial(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let spec = partial
        .overridden_by(flags_to_partial(&cli)?)
        .finish()
        .map_err(|e| e.to_string())?;

    let table = run_sweep(&spec).map_err(|e| e.to_string())?;

    for line in table.summary_lines() {
        eprintln!("{line}");
    }
    match &cli.out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            table
                .write_csv(&mut file)
                .and_then(|_| file.flush())
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
        None => {
            let stdout = io::stdout();
            table
                .write_csv(&mut stdout.lock())
                .map_err(|e| format!("cannot write CSV: {e}"))?;
        }
    }
    Ok(table)
}

fn flags_to_partial(cli: &Cli) -> Result<PartialSweep, String> {
    let mut p = PartialSweep::default();
    if let Some(materials) = &cli.materials {
        let (a, b) = materials
            .split_once(',')
            .ok_or("--materials: expected two comma-separated names")?;
        if b.contains(',') {
            return Err("--materials: expected exactly two materials".into());
        }
        a.parse::<DielectricModel>().map_err(|e| format!("--materials: {e}"))?;
        b.parse::<DielectricModel>().map_err(|e| format!("--materials: {e}"))?;
        p.materials = Some((a.trim().to_string(), b.trim().to_string()));
    }
    if let Some(f) = &cli.f {
        p.fill_fractions = Some(parse_f64_list(f).map_err(|e| format!("--f: {e}"))?);
    }
    if let Some(lambda) = &cli.lambda {
        p.wavelength = Some(parse_length(lambda).map_err(|e| format!("--lambda: {e}"))?);
    }
    if let Some(gaps) = &cli.gaps {
        let parsed: Result<Vec<f64>, String> = gaps.split(',').map(parse_length).collect();
        p.gaps = Some(parsed.map_err(|e| format!("--H: {e}"))?);
    }
    if let Some(radius) = &cli.sphere_radius {
        p.sphere_radius = Some(parse_length(radius).map_err(|e| format!("--R: {e}"))?);
    }
    if let Some(outputs) = &cli.outputs {
        p.outputs =
            Some(outputs.parse::<OutputSelection>().map_err(|e| format!("--outputs: {e}"))?);
    }
    p.a_points = cli.a_points;
    p.rel_tol = cli.rel_tol;
    p.m_max = cli.m_max;
    p.threads = cli.threads;
    Ok(p)
}
