//! SVG figures: error histograms from metrics files and weight scatters
//! from network files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use visuomotor_core::GwrNetwork;

use crate::harness::MetricRow;
use crate::FormatError;

const SIZE: (u32, u32) = (720, 480);
const BINS: usize = 40;

fn plot_err<E: std::fmt::Display>(e: E) -> FormatError {
    FormatError::Plot(e.to_string())
}

/// Bin edges and counts over `[0, max]`.
pub fn histogram(values: &[f64], bins: usize) -> (f64, Vec<usize>) {
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let width = if max > 0.0 { max / bins as f64 } else { 1.0 };
    let mut counts = vec![0; bins];
    for &v in values.iter().filter(|v| v.is_finite()) {
        let i = ((v / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    (width, counts)
}

/// One histogram per model found in the metrics rows. Returns the written files.
pub fn error_histograms(rows: &[MetricRow], out_dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, FormatError> {
    std::fs::create_dir_all(out_dir)?;
    let mut groups: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.model, &r.stage)).or_default().push(r.error);
    }
    let mut written = Vec::new();
    for ((model, stage), errors) in groups {
        let name = if prefix.trim_end_matches('-') == model { model.to_string() } else { format!("{prefix}{model}") };
        let path = out_dir.join(format!("{name}-hist.svg"));
        let unit = if stage == "gaze" { "px" } else { "cm" };
        let (width, counts) = histogram(&errors, BINS);
        let top = counts.iter().copied().max().unwrap_or(1).max(1);
        let root = SVGBackend::new(&path, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(format!("{model}: {stage} error ({} trials)", errors.len()), ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(0.0..width * BINS as f64, 0usize..top + top / 10 + 1)
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc(format!("error ({unit})")).y_desc("trials").draw().map_err(plot_err)?;
        chart
            .draw_series(counts.iter().enumerate().map(|(i, &c)| {
                let x0 = i as f64 * width;
                Rectangle::new([(x0, 0), (x0 + width, c)], BLUE.mix(0.6).filled())
            }))
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
        written.push(path.clone());
    }
    Ok(written)
}

/// Scatter of the first two weight coordinates with the network's edges.
pub fn weight_scatter(net: &GwrNetwork, path: &Path) -> Result<(), FormatError> {
    let pts: Vec<(f64, f64)> = (0..net.len())
        .map(|i| {
            let w = net.weight(i);
            (w[0], w.get(1).copied().unwrap_or(0.0))
        })
        .collect();
    let span = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let pad = ((hi - lo) * 0.05).max(1e-6);
        (lo - pad)..(hi + pad)
    };
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{} ({} neurons)", net.label(), net.len()), ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(span(|p| p.0), span(|p| p.1))
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("w[0]").y_desc("w[1]").draw().map_err(plot_err)?;
    chart
        .draw_series(net.edges().iter().map(|e| PathElement::new(vec![pts[e.a], pts[e.b]], BLACK.mix(0.15))))
        .map_err(plot_err)?;
    chart
        .draw_series(pts.iter().map(|&p| Circle::new(p, 2, RED.filled())))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}
