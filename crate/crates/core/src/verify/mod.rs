//! Verification scenarios: each one builds a construction, runs the
//! estimators against a claimed constant, and emits a JSON [`Report`]
//! with an optional SVG plot.
//!
//! Reports are reproducible from (config, seed); only `wall_time_ms`
//! varies between runs.

mod config;
mod report;
mod scenarios;
pub mod svg;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub use config::{parse_kv, Scenario, ScenarioConfig, DEFAULT_SEED, DEFAULT_SUITE, SEED_ENV};
pub use report::{
    read_ndjson, write_ndjson, Check, PlotData, Report, Witness, PASS_TOLERANCE, TOOL_VERSION,
};
pub use scenarios::{
    run_scenario, sphere_constant, verify_density, verify_homomorphism, verify_matrix_norms,
    verify_metric, verify_pl_norm, verify_product_qi, verify_psi_constant, verify_psi_drift,
    verify_radial_bound, verify_spiral_bound, verify_spiral_kernel, Cloud, Homomorphism,
    IDENTITY_TOLERANCE, PSI_DRIFT_TOLERANCE, SPIRAL_DRIFT_TOLERANCE,
};

use crate::error::Result;

/// Writes the reports as NDJSON to `out` (if given) and each plot to an
/// SVG next to `svg`. A single plot goes to `svg` itself; several get the
/// suffix `-<index>` before the extension. Returns the SVG paths written.
pub fn write_outputs(
    reports: &[Report],
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    if let Some(path) = out {
        write_ndjson(BufWriter::new(File::create(path)?), reports)?;
    }
    let mut written = Vec::new();
    if let Some(base) = svg {
        let plotted: Vec<&Report> = reports.iter().filter(|r| r.plot.is_some()).collect();
        for (i, r) in plotted.iter().enumerate() {
            let path = if plotted.len() == 1 {
                base.to_path_buf()
            } else {
                indexed(base, i)
            };
            let title = format!("{}: {}", r.scenario, r.case);
            std::fs::write(
                &path,
                svg::render(&title, r.plot.as_ref().expect("filtered")),
            )?;
            written.push(path);
        }
    }
    Ok(written)
}

fn indexed(base: &Path, i: usize) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{i}"),
    };
    base.with_file_name(name)
}
