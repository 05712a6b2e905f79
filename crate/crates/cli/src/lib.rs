//! Config-driven experiment runner for `trotter-lab`: TOML scenarios in,
//! CSV tables and SVG plots out.

pub mod config;
pub mod runners;
pub mod svg;
pub mod table;

use std::io;
use std::path::{Path, PathBuf};

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, ScenarioKind};
pub use runners::{run_experiment, Check, Outcome};

/// Write through a temporary sibling and rename, so a reader never sees half a file.
fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".part");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Writes the CSV and, when the outcome carries a plot, the SVG. A plot that
/// cannot be drawn (for example no positive values on a log axis) is reported
/// in the returned notes instead of failing the run.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome, dir: &Path) -> io::Result<(Vec<PathBuf>, Vec<String>)> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut notes = Vec::new();
    let csv = dir.join(cfg.csv_name());
    write_atomic(&csv, &outcome.table.to_csv())?;
    written.push(csv);
    if let Some(spec) = &outcome.plot {
        match svg::render_svg(&outcome.table, spec) {
            Ok(text) => {
                let path = dir.join(cfg.svg_name());
                write_atomic(&path, &text)?;
                written.push(path);
            }
            Err(e) => notes.push(format!("plot skipped: {e}")),
        }
    }
    Ok((written, notes))
}
