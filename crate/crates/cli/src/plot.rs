//! Log-log plots of measured rounds against `d`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Result};
use plotters::prelude::*;

use crate::experiment::ExperimentRow;

const COLORS: [RGBColor; 6] = [BLUE, RED, GREEN, MAGENTA, CYAN, BLACK];

/// Mean total rounds per `d`, one series per `n`, over successful rows.
pub fn series(rows: &[ExperimentRow]) -> BTreeMap<usize, Vec<(f64, f64)>> {
    let mut acc: BTreeMap<usize, BTreeMap<usize, (u64, usize)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.verdict.is_ok() && r.total_rounds > 0) {
        let e = acc.entry(r.n).or_default().entry(r.d).or_insert((0, 0));
        e.0 += r.total_rounds;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(n, per_d)| {
            let pts = per_d
                .into_iter()
                .map(|(d, (sum, count))| (d as f64, sum as f64 / count as f64))
                .collect();
            (n, pts)
        })
        .collect()
}

/// Writes an SVG with rounds against `d` on log-log axes. With no data
/// the axes are still drawn.
pub fn plot_rounds(title: &str, rows: &[ExperimentRow], path: &Path) -> Result<()> {
    let data = series(rows);
    let all: Vec<(f64, f64)> = data.values().flatten().copied().collect();
    let (mut x0, mut x1) = (1.0f64, 2.0f64);
    let (mut y0, mut y1) = (1.0f64, 10.0f64);
    if !all.is_empty() {
        x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) / 1.5;
        x1 = all.iter().map(|p| p.0).fold(0.0, f64::max) * 1.5;
        y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) / 1.5;
        y1 = all.iter().map(|p| p.1).fold(0.0, f64::max) * 1.5;
    }
    let err = |e: &dyn std::fmt::Display| anyhow!("plotting {}: {e}", path.display());
    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 24))
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc("d")
        .y_desc("rounds")
        .draw()
        .map_err(|e| err(&e))?;
    for (idx, (n, pts)) in data.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), color))
            .map_err(|e| err(&e))?
            .label(format!("n = {n}"))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        chart
            .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(|e| err(&e))?;
    }
    if !data.is_empty() {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(|e| err(&e))?;
    }
    root.present().map_err(|e| err(&e))?;
    Ok(())
}
