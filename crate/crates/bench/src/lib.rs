//! Benchmark experiments, configuration, CSV and SVG output for `alefem`.

pub mod config;
pub mod experiments;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use alefem::{Error, Result};

pub use config::{Experiment, ExperimentConfig};

/// Writes every output (and its SVG, when requested) under `dir`.
pub fn write_outputs(dir: &Path, outputs: &[experiments::Output], svg: bool) -> Result<Vec<PathBuf>> {
    let io = |e: std::io::Error| Error::Config(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut written = Vec::new();
    for out in outputs {
        let path = dir.join(&out.file);
        fs::write(&path, &out.csv).map_err(io)?;
        written.push(path.clone());
        if let (true, Some(plot)) = (svg, &out.plot) {
            let svg_path = path.with_extension("svg");
            fs::write(&svg_path, svg::emit_svg(&out.csv, plot)?).map_err(io)?;
            written.push(svg_path);
        }
    }
    Ok(written)
}
