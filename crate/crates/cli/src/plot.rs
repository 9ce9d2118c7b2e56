//! SVG line plots rendered from the CSV artifacts.

use std::path::Path;

use locfex::{Error, Result};
use plotters::prelude::*;

/// Values at or below this are drawn at the floor of a log plot.
const LOG_FLOOR: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// Plots columns `ys` of `csv` against column `x`.
///
/// Non-numeric cells are skipped. Returns `false` without writing when the
/// x column is not numeric or no y column has a value.
pub fn plot_csv(csv: &Path, svg: &Path, title: &str, x: &str, ys: &[&str], scale: Scale) -> Result<bool> {
    let fail = |e: &dyn std::fmt::Display| Error::InvalidArgument(format!("{}: {e}", csv.display()));
    let mut reader = csv::Reader::from_path(csv).map_err(|e| fail(&e))?;
    let header = reader.headers().map_err(|e| fail(&e))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let xj = col(x).ok_or_else(|| fail(&format!("no column `{x}`")))?;
    let records = reader.records().collect::<std::result::Result<Vec<_>, _>>().map_err(|e| fail(&e))?;

    let Some(xs) = records.iter().map(|r| r[xj].parse::<f64>().ok()).collect::<Option<Vec<f64>>>() else {
        return Ok(false);
    };
    let mut series = Vec::new();
    for name in ys {
        let j = col(name).ok_or_else(|| fail(&format!("no column `{name}`")))?;
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&records)
            .filter_map(|(&xv, r)| r[j].parse::<f64>().ok().map(|v| (xv, v)))
            .map(|(xv, v)| match scale {
                Scale::Linear => (xv, v),
                Scale::Log => (xv, v.abs().max(LOG_FLOOR).log10()),
            })
            .collect();
        if !pts.is_empty() {
            series.push((*name, pts));
        }
    }
    if series.is_empty() {
        return Ok(false);
    }

    let (x_lo, x_hi) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (y_lo, y_hi) = bounds(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    if let Some(dir) = svg.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| fail(&e))?;
    }
    let draw = |e: &dyn std::fmt::Display| Error::InvalidArgument(format!("{}: {e}", svg.display()));
    let root = SVGBackend::new(svg, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x_lo..x_hi, y_lo..y_hi)
        .map_err(|e| draw(&e))?;
    let y_desc = match scale {
        Scale::Linear => "value".to_string(),
        Scale::Log => "log10 |value|".to_string(),
    };
    chart.configure_mesh().x_desc(x).y_desc(y_desc).draw().map_err(|e| draw(&e))?;
    for (i, (name, pts)) in series.into_iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(|e| draw(&e))?
            .label(name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        chart.draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled()))).map_err(|e| draw(&e))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| draw(&e))?;
    root.present().map_err(|e| draw(&e))?;
    Ok(true)
}

/// Min and max of `values`, widened when they coincide.
fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}
