//! Run-directory persistence: `config.json`, raw snapshots, `series.csv`,
//! `diagnostics.csv` and JSON summaries.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{io_err, Error, Result};
use crate::solver::{Observer, SeriesRow, SimConfig};
use crate::spectral::{Field, Grid};

pub const CONFIG_FILE: &str = "config.json";
pub const SERIES_FILE: &str = "series.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

const SERIES_COLUMNS: [&str; 7] = ["step", "t", "I", "M", "H", "max_abs_u", "boundary_magnitude"];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn snapshot_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(SNAPSHOT_DIR).join(format!("step_{step:08}.bin"))
}

fn abort_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(SNAPSHOT_DIR).join(format!("abort_step_{step:08}.bin"))
}

pub fn create_run_dir(dir: &Path) -> Result<()> {
    let snaps = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snaps).map_err(io_err(snaps))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_required(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        path: path.into(),
        reason: e.to_string(),
    })
}

fn read_required(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingInput(path.into()));
    }
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_config(dir: &Path, cfg: &SimConfig) -> Result<()> {
    write_json(&dir.join(CONFIG_FILE), cfg)
}

pub fn read_config(dir: &Path) -> Result<SimConfig> {
    read_json(&dir.join(CONFIG_FILE))
}

/// Samples as little-endian `f64`, no header.
pub fn write_snapshot(path: &Path, u: &Field) -> Result<()> {
    let bytes: Vec<u8> = u.samples().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_snapshot(path: &Path, grid: &Grid) -> Result<Field> {
    if !path.exists() {
        return Err(Error::MissingInput(path.into()));
    }
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Malformed {
            path: path.into(),
            reason: format!("{} bytes, expected {}", bytes.len(), 8 * grid.len()),
        });
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Field::new(grid, samples).map_err(|e| Error::Malformed {
        path: path.into(),
        reason: e.to_string(),
    })
}

/// Step indices of the regular snapshots in a run directory, ascending.
pub fn list_snapshots(dir: &Path) -> Result<Vec<u64>> {
    let snaps = dir.join(SNAPSHOT_DIR);
    if !snaps.exists() {
        return Err(Error::MissingInput(snaps));
    }
    let mut steps: Vec<u64> = fs::read_dir(&snaps)
        .map_err(io_err(&snaps))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix("step_")?.strip_suffix(".bin")?.parse().ok()
        })
        .collect();
    steps.sort_unstable();
    Ok(steps)
}

/// A CSV table with a header row. A column named `step` is written as an
/// integer; everything else as a 17-digit float.
pub fn write_table(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(columns).map_err(|e| csv_err(path, e))?;
    for row in rows {
        let cells = row.iter().zip(columns).map(|(v, c)| {
            if c == "step" {
                format!("{}", *v as u64)
            } else {
                format_float(*v)
            }
        });
        w.write_record(cells).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    if !path.exists() {
        return Err(Error::MissingInput(path.into()));
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let columns: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = rec
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|e| Error::Malformed {
                    path: path.into(),
                    reason: format!("`{cell}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((columns, rows))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Malformed {
        path: path.into(),
        reason: e.to_string(),
    }
}

pub fn write_series(dir: &Path, series: &[SeriesRow]) -> Result<()> {
    let columns: Vec<String> = SERIES_COLUMNS.map(String::from).to_vec();
    let rows: Vec<Vec<f64>> = series
        .iter()
        .map(|r| {
            vec![
                r.step as f64,
                r.t,
                r.integral,
                r.mass,
                r.energy,
                r.max_abs_u,
                r.boundary_magnitude,
            ]
        })
        .collect();
    write_table(&dir.join(SERIES_FILE), &columns, &rows)
}

pub fn read_series(dir: &Path) -> Result<Vec<SeriesRow>> {
    let path = dir.join(SERIES_FILE);
    let (columns, rows) = read_table(&path)?;
    if columns != SERIES_COLUMNS {
        return Err(Error::Malformed {
            path,
            reason: format!("unexpected header {columns:?}"),
        });
    }
    Ok(rows
        .into_iter()
        .map(|r| SeriesRow {
            step: r[0] as u64,
            t: r[1],
            integral: r[2],
            mass: r[3],
            energy: r[4],
            max_abs_u: r[5],
            boundary_magnitude: r[6],
        })
        .collect())
}

/// Writes every scheduled snapshot, and on abort the last finite state as
/// `abort_step_XXXXXXXX.bin`.
pub struct SnapshotWriter {
    dir: PathBuf,
    abort: Option<PathBuf>,
}

impl SnapshotWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        create_run_dir(dir)?;
        Ok(Self {
            dir: dir.into(),
            abort: None,
        })
    }

    /// Path of the abort snapshot, if the run aborted.
    pub fn abort_snapshot(&self) -> Option<&Path> {
        self.abort.as_deref()
    }
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, step: u64, _t: f64, u: &Field) -> Result<()> {
        write_snapshot(&snapshot_path(&self.dir, step), u)
    }

    fn abort(&mut self, step: u64, _t: f64, last_good: &Field) -> Result<()> {
        let path = abort_path(&self.dir, step);
        write_snapshot(&path, last_good)?;
        self.abort = Some(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run, Profile};

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, 6.02214076e23] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn run_directory_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        let mut cfg = SimConfig::new(
            0.5,
            0.02,
            Profile::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: 1.0,
            },
        );
        cfg.n = 128;
        let mut snaps = SnapshotWriter::new(dir).unwrap();
        let summary = run(&cfg, &mut [&mut snaps]).unwrap();
        write_config(dir, &cfg).unwrap();
        write_series(dir, &summary.series).unwrap();

        assert_eq!(read_config(dir).unwrap(), cfg);
        assert_eq!(read_series(dir).unwrap(), summary.series);
        assert_eq!(list_snapshots(dir).unwrap(), vec![0, 10, 20]);
        let last = read_snapshot(&snapshot_path(dir, 20), &cfg.grid().unwrap()).unwrap();
        assert_eq!(last.samples(), summary.final_state.samples());
    }

    #[test]
    fn missing_and_malformed_inputs() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(read_series(tmp.path()), Err(Error::MissingInput(_))));
        let p = tmp.path().join("bad.csv");
        fs::write(&p, "a,b\n1,x\n").unwrap();
        assert!(matches!(read_table(&p), Err(Error::Malformed { .. })));
        let g = Grid::new(1.0, 16).unwrap();
        let snap = tmp.path().join("s.bin");
        fs::write(&snap, [0u8; 24]).unwrap();
        assert!(matches!(read_snapshot(&snap, &g), Err(Error::Malformed { .. })));
    }
}
