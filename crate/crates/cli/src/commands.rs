//! The subcommands, minus argument parsing: each returns the files it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{parse_config_with, Engine, Overrides, RunConfig};
use crate::error::{CliError, Result};
use crate::run::{run, run_sweep, RunOutput};
use crate::series::{format_number, read_csv, write_csv};
use crate::svg::{emit_svg, PlotSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Svg,
    Both,
}

pub fn load_config(path: &Path, overrides: Overrides) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_with(&text, overrides)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, write: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write(&mut file).map_err(|e| match e {
        CliError::Io(msg) => CliError::io(path, msg),
        other => other,
    })
}

/// Writes the series as `<name>.csv` and/or `<name>.svg` inside `dir`.
pub fn write_output(output: &RunOutput, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let series = &output.series;
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{}.csv", series.name));
        write_file(&path, |f| write_csv(series, f))?;
        written.push(path);
    }
    if matches!(format, Format::Svg | Format::Both) {
        let path = dir.join(format!("{}.svg", series.name));
        emit_svg(series, &PlotSpec::for_series(series), &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `<name>_jumps.csv` with one row per recorded jump.
pub fn write_jumps(output: &RunOutput, dir: &Path) -> Result<Option<PathBuf>> {
    let Some(jumps) = &output.jumps else {
        return Ok(None);
    };
    ensure_dir(dir)?;
    let path = dir.join(format!("{}_jumps.csv", output.series.name));
    write_file(&path, |f| {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(f);
        let err = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(["trajectory", "t", "channel"]).map_err(err)?;
        for (traj, records) in jumps.iter().enumerate() {
            for j in records {
                w.write_record([traj.to_string(), format_number(j.time), j.channel.to_string()]).map_err(err)?;
            }
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    })?;
    Ok(Some(path))
}

pub fn simulate(config: &RunConfig, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if config.sweep.is_some() {
        return Err(CliError::config("sweep", "this config declares a sweep; run it with the sweep subcommand"));
    }
    write_output(&run(config)?, dir, format)
}

/// Sweep points run concurrently; files are written afterwards in sweep order.
pub fn sweep(config: &RunConfig, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let outputs = run_sweep(config)?;
    let mut written = Vec::new();
    for out in &outputs {
        written.extend(write_output(out, dir, format)?);
    }
    Ok(written)
}

pub fn trajectories(config: &RunConfig, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if config.engine != Engine::Mcwf {
        return Err(CliError::config("engine", "trajectories runs the mcwf engine"));
    }
    let out = run(config)?;
    let mut written = write_output(&out, dir, format)?;
    written.extend(write_jumps(&out, dir)?);
    Ok(written)
}

/// Renders an existing CSV as `<stem>.svg` in `dir`.
pub fn plot_csv(input: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CliError::io(input, "no file name"))?
        .to_string();
    let file = fs::File::open(input).map_err(|e| CliError::io(input, e))?;
    let series = read_csv(&stem, file)?;
    ensure_dir(dir)?;
    let path = dir.join(format!("{stem}.svg"));
    emit_svg(&series, &PlotSpec::for_series(&series), &path)?;
    Ok(vec![path])
}
