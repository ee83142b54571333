//! SVG figures drawn from the files of a run directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dgbo_core::io;
use plotters::prelude::*;

type Curve = (String, Vec<(f64, f64)>);

/// Smallest value shown on logarithmic axes.
const LOG_FLOOR: f64 = 1e-18;

fn line_chart(
    path: &Path,
    caption: &str,
    x_desc: &str,
    y_desc: &str,
    curves: &[Curve],
    log_y: bool,
) -> Result<()> {
    let points = || curves.iter().flat_map(|c| c.1.iter());
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points() {
        if !(x.is_finite() && y.is_finite()) || (log_y && y <= 0.0) {
            continue;
        }
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, if log_y { LOG_FLOOR } else { 0.0 }, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = if log_y { y0 * 10.0 } else { y0 + 1.0 };
    }

    let root = SVGBackend::new(path, (900, 540)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut builder = ChartBuilder::on(&root);
    builder
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(80);
    let style = |i: usize| Palette99::pick(i).stroke_width(2);
    if log_y {
        let mut chart = builder.build_cartesian_2d(x0..x1, (y0..y1).log_scale())?;
        chart.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw()?;
        for (i, (label, pts)) in curves.iter().enumerate() {
            let kept = pts.iter().copied().filter(|p| p.1 > 0.0);
            chart
                .draw_series(LineSeries::new(kept, style(i)))?
                .label(label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], style(i)));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE)
            .border_style(BLACK)
            .draw()?;
    } else {
        let pad = 0.05 * (y1 - y0);
        let mut chart = builder.build_cartesian_2d(x0..x1, (y0 - pad)..(y1 + pad))?;
        chart.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw()?;
        for (i, (label, pts)) in curves.iter().enumerate() {
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), style(i)))?
                .label(label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], style(i)));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE)
            .border_style(BLACK)
            .draw()?;
    }
    root.present()?;
    Ok(())
}

fn column(columns: &[String], rows: &[Vec<f64>], name: &str) -> Option<Vec<f64>> {
    let i = columns.iter().position(|c| c == name)?;
    Some(rows.iter().map(|r| r[i]).collect())
}

/// Writes `waterfall.svg`, `drift.svg`, `weighted_energy.svg` and
/// `decay.svg` into `dir` and returns their paths.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let required = [
        io::CONFIG_FILE,
        io::SERIES_FILE,
        io::DIAGNOSTICS_FILE,
        io::SNAPSHOT_DIR,
    ];
    let missing: Vec<String> = required
        .iter()
        .map(|f| dir.join(f))
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        bail!("cannot plot {}: missing {}", dir.display(), missing.join(", "));
    }
    let cfg = io::read_config(dir)?;
    let grid = cfg.grid()?;
    let series = io::read_series(dir)?;
    let (columns, rows) = io::read_table(&dir.join(io::DIAGNOSTICS_FILE))?;
    if rows.is_empty() {
        bail!("{} has no rows", dir.join(io::DIAGNOSTICS_FILE).display());
    }
    let mut written = Vec::new();

    // Waterfall: up to twelve snapshots stacked by time.
    let steps = io::list_snapshots(dir)?;
    let stride = steps.len().div_ceil(12).max(1);
    let picked: Vec<u64> = steps.iter().step_by(stride).copied().collect();
    let snaps = picked
        .iter()
        .map(|&s| io::read_snapshot(&io::snapshot_path(dir, s), &grid))
        .collect::<dgbo_core::Result<Vec<_>>>()?;
    let scale = snaps.first().map_or(1.0, |u| u.max_abs()).max(1e-12);
    let curves: Vec<Curve> = picked
        .iter()
        .zip(&snaps)
        .enumerate()
        .map(|(i, (&step, u))| {
            let off = 0.6 * scale * i as f64;
            let pts = grid
                .points()
                .iter()
                .zip(u.samples())
                .map(|(&x, &v)| (x, v + off))
                .collect();
            (format!("t = {:.3}", step as f64 * cfg.dt), pts)
        })
        .collect();
    let p = dir.join("waterfall.svg");
    line_chart(&p, "u(x, t), offset by time", "x", "u + offset", &curves, false)?;
    written.push(p);

    // Conserved-quantity drift with the thresholds drawn as flat lines.
    let u0 = io::read_snapshot(&io::snapshot_path(dir, 0), &grid)
        .context("drift plot needs the step-0 snapshot")?;
    let l1 = grid.integrate(&u0.samples().iter().map(|v| v.abs()).collect::<Vec<_>>());
    let first = series.first().context("empty series")?;
    let t_end = series.last().map_or(1.0, |r| r.t.max(1e-12));
    let rel = |v: f64, v0: f64| {
        if v0 == 0.0 {
            (v - v0).abs()
        } else {
            ((v - v0) / v0).abs()
        }
    };
    let floor = |v: f64| v.max(LOG_FLOOR);
    let tol = cfg.tolerances;
    let curves: Vec<Curve> = vec![
        (
            "I".into(),
            series
                .iter()
                .map(|r| (r.t, floor((r.integral - first.integral).abs() / l1.max(1.0))))
                .collect(),
        ),
        (
            "M".into(),
            series
                .iter()
                .map(|r| (r.t, floor(rel(r.mass, first.mass))))
                .collect(),
        ),
        (
            "H".into(),
            series
                .iter()
                .map(|r| (r.t, floor(rel(r.energy, first.energy))))
                .collect(),
        ),
        (
            "I threshold".into(),
            vec![(0.0, tol.integral), (t_end, tol.integral)],
        ),
        ("M threshold".into(), vec![(0.0, tol.mass), (t_end, tol.mass)]),
        ("H threshold".into(), vec![(0.0, tol.energy), (t_end, tol.energy)]),
    ];
    let p = dir.join("drift.svg");
    line_chart(
        &p,
        "relative drift of conserved quantities",
        "t",
        "drift",
        &curves,
        true,
    )?;
    written.push(p);

    let t = column(&columns, &rows, "t").context("diagnostics lack t")?;
    let pick = |prefix: &str, scale_by_t: bool| -> Vec<Curve> {
        columns
            .iter()
            .filter(|c| c.starts_with(prefix) && !c.ends_with("_sharp"))
            .filter_map(|c| {
                let v = column(&columns, &rows, c)?;
                let pts = t
                    .iter()
                    .zip(v)
                    .filter(|(t, _)| !scale_by_t || **t > 0.0)
                    .map(|(&t, v)| (t, if scale_by_t { t * v } else { v }))
                    .collect();
                Some((c.clone(), pts))
            })
            .collect()
    };
    let p = dir.join("weighted_energy.svg");
    line_chart(
        &p,
        "weighted energies W_j(t)",
        "t",
        "W_j",
        &pick("W_", false),
        true,
    )?;
    written.push(p);
    let decay: Vec<Curve> = pick("F_", true)
        .into_iter()
        .map(|(name, pts)| (format!("t {name}"), pts))
        .collect();
    let p = dir.join("decay.svg");
    line_chart(&p, "t F_j(t)", "t", "t F_j", &decay, false)?;
    written.push(p);
    Ok(written)
}

/// One curve of `column` per run directory, on a log axis.
pub fn propagation_plot(runs: &[(String, PathBuf)], column_name: &str, path: &Path) -> Result<()> {
    let curves = runs
        .iter()
        .map(|(label, dir)| -> Result<Curve> {
            let (columns, rows) = io::read_table(&dir.join(io::DIAGNOSTICS_FILE))?;
            let t = column(&columns, &rows, "t").context("diagnostics lack t")?;
            let v = column(&columns, &rows, column_name)
                .with_context(|| format!("diagnostics lack {column_name}"))?;
            Ok((format!("{column_name}, {label}"), t.into_iter().zip(v).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    line_chart(
        path,
        &format!("{column_name}(t) for both orientations"),
        "t",
        column_name,
        &curves,
        true,
    )
}
