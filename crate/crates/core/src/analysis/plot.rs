//! Plot artifact export: CSV data files are the authoritative output, each
//! paired with a minimal static SVG 1.1 rendering.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{quantile, sorted_column};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Supported plot kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Boxplot,
    Scatter,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boxplot" => Ok(PlotKind::Boxplot),
            "scatter" => Ok(PlotKind::Scatter),
            other => Err(Error::Config(format!(
                "unknown plot kind '{}', expected boxplot or scatter",
                other
            ))),
        }
    }
}

/// Paths of the files a plot export produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotArtifacts {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

struct BoxSummary {
    name: String,
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
    whisker_low: f64,
    whisker_high: f64,
    outliers: Vec<f64>,
}

fn box_summary(dataset: &Dataset, j: usize, name: &str) -> BoxSummary {
    let sorted = sorted_column(dataset, j);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|v| *v >= low_fence && *v <= high_fence)
        .collect();
    let outliers: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|v| *v < low_fence || *v > high_fence)
        .collect();
    // every quartile lies inside the fences, so inside is never empty
    BoxSummary {
        name: name.to_string(),
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        whisker_low: inside[0],
        whisker_high: inside[inside.len() - 1],
        outliers,
    }
}

fn resolve_selection(dataset: &Dataset, selection: &[String]) -> Result<Vec<usize>> {
    if selection.is_empty() {
        return Err(Error::Config("plot selection names no features".into()));
    }
    selection
        .iter()
        .map(|name| {
            dataset
                .feature_meta
                .iter()
                .position(|spec| &spec.name == name)
                .ok_or_else(|| Error::Config(format!("unknown feature '{}'", name)))
        })
        .collect()
}

/// Export plot data and rendering for the selected features.
///
/// `out_base` is the artifact path without extension; `.csv` and `.svg` are
/// appended. Scatter plots require exactly two selected features.
pub fn export_plot(
    dataset: &Dataset,
    kind: PlotKind,
    selection: &[String],
    out_base: &Path,
) -> Result<PlotArtifacts> {
    let indices = resolve_selection(dataset, selection)?;
    let (csv, svg) = match kind {
        PlotKind::Boxplot => {
            let summaries: Vec<BoxSummary> = indices
                .iter()
                .zip(selection)
                .map(|(&j, name)| box_summary(dataset, j, name))
                .collect();
            (boxplot_csv(&summaries), boxplot_svg(&summaries))
        }
        PlotKind::Scatter => {
            if indices.len() != 2 {
                return Err(Error::Config(format!(
                    "scatter requires exactly 2 features, got {}",
                    indices.len()
                )));
            }
            (
                scatter_csv(dataset, indices[0], indices[1]),
                scatter_svg(dataset, indices[0], indices[1], selection),
            )
        }
    };

    if let Some(parent) = out_base.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    let csv_path = out_base.with_extension("csv");
    let svg_path = out_base.with_extension("svg");
    std::fs::write(&csv_path, csv).map_err(|e| Error::io(csv_path.display().to_string(), e))?;
    std::fs::write(&svg_path, svg).map_err(|e| Error::io(svg_path.display().to_string(), e))?;
    Ok(PlotArtifacts {
        csv: csv_path,
        svg: svg_path,
    })
}

fn boxplot_csv(summaries: &[BoxSummary]) -> String {
    let mut out =
        String::from("feature,min,q1,median,q3,max,whisker_low,whisker_high,outliers\n");
    for s in summaries {
        let outliers = s
            .outliers
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.name, s.min, s.q1, s.median, s.q3, s.max, s.whisker_low, s.whisker_high, outliers
        );
    }
    out
}

fn scatter_csv(dataset: &Dataset, jx: usize, jy: usize) -> String {
    let mut out = String::from("x,y,label\n");
    for i in 0..dataset.n_rows() {
        let label = dataset
            .labels
            .as_ref()
            .map(|ls| dataset.class_names[ls[i]].as_str())
            .unwrap_or("");
        let _ = writeln!(
            out,
            "{},{},{}",
            dataset.features.get(i, jx),
            dataset.features.get(i, jy),
            label
        );
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct LinearScale {
    lo: f64,
    span: f64,
    pix_lo: f64,
    pix_span: f64,
}

impl LinearScale {
    fn new(lo: f64, hi: f64, pix_lo: f64, pix_hi: f64) -> LinearScale {
        let span = if hi > lo { hi - lo } else { 1.0 };
        LinearScale {
            lo,
            span,
            pix_lo,
            pix_span: pix_hi - pix_lo,
        }
    }

    fn at(&self, v: f64) -> f64 {
        self.pix_lo + (v - self.lo) / self.span * self.pix_span
    }
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        width, height, width, height
    )
}

fn boxplot_svg(summaries: &[BoxSummary]) -> String {
    let slot = 110.0;
    let width = 70.0 + slot * summaries.len() as f64;
    let height = 420.0;
    let (top, bottom) = (30.0, 380.0);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in summaries {
        lo = lo.min(s.min);
        hi = hi.max(s.max);
    }
    // y grows downward in SVG, so map data low to the bottom edge
    let scale = LinearScale::new(lo, hi, bottom, top);

    let mut out = svg_open(width, height);
    let _ = writeln!(
        out,
        "<line x1=\"50\" y1=\"{}\" x2=\"50\" y2=\"{}\" stroke=\"black\"/>",
        top, bottom
    );
    let _ = writeln!(
        out,
        "<text x=\"45\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        scale.at(hi) + 4.0,
        hi
    );
    let _ = writeln!(
        out,
        "<text x=\"45\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        scale.at(lo) + 4.0,
        lo
    );

    for (i, s) in summaries.iter().enumerate() {
        let cx = 70.0 + slot * i as f64 + slot / 2.0;
        let half = 30.0;
        let (yq1, yq3) = (scale.at(s.q1), scale.at(s.q3));
        let _ = writeln!(
            out,
            "<line x1=\"{cx}\" y1=\"{}\" x2=\"{cx}\" y2=\"{}\" stroke=\"black\"/>",
            scale.at(s.whisker_low),
            yq1
        );
        let _ = writeln!(
            out,
            "<line x1=\"{cx}\" y1=\"{}\" x2=\"{cx}\" y2=\"{}\" stroke=\"black\"/>",
            yq3,
            scale.at(s.whisker_high)
        );
        for (w, v) in [(20.0, s.whisker_low), (20.0, s.whisker_high)] {
            let y = scale.at(v);
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\"/>",
                cx - w / 2.0,
                cx + w / 2.0
            );
        }
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            cx - half,
            yq3,
            2.0 * half,
            (yq1 - yq3).max(0.5)
        );
        let ym = scale.at(s.median);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{ym}\" x2=\"{}\" y2=\"{ym}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - half,
            cx + half
        );
        for v in &s.outliers {
            let _ = writeln!(
                out,
                "<circle cx=\"{cx}\" cy=\"{}\" r=\"3\" fill=\"none\" stroke=\"black\"/>",
                scale.at(*v)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{cx}\" y=\"405\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            xml_escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

fn scatter_svg(dataset: &Dataset, jx: usize, jy: usize, selection: &[String]) -> String {
    let (width, height) = (520.0, 420.0);
    let (left, right, top, bottom) = (60.0, 490.0, 30.0, 370.0);

    let xs = dataset.features.column(jx);
    let ys = dataset.features.column(jy);
    let (xlo, xhi) = bounds(&xs);
    let (ylo, yhi) = bounds(&ys);
    let sx = LinearScale::new(xlo, xhi, left, right);
    let sy = LinearScale::new(ylo, yhi, bottom, top);

    let mut out = svg_open(width, height);
    let _ = writeln!(
        out,
        "<line x1=\"{left}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{bottom}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"400\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        (left + right) / 2.0,
        xml_escape(&selection[0])
    );
    let _ = writeln!(
        out,
        "<text x=\"15\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{}</text>",
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        xml_escape(&selection[1])
    );
    for (v, x, y, anchor) in [
        (xlo, sx.at(xlo), bottom + 15.0, "middle"),
        (xhi, sx.at(xhi), bottom + 15.0, "middle"),
    ] {
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"11\" text-anchor=\"{anchor}\">{v}</text>"
        );
    }
    for v in [ylo, yhi] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{v}</text>",
            left - 5.0,
            sy.at(v) + 4.0
        );
    }

    for i in 0..dataset.n_rows() {
        let color = dataset
            .labels
            .as_ref()
            .map(|ls| PALETTE[ls[i] % PALETTE.len()])
            .unwrap_or(PALETTE[0]);
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>",
            sx.at(xs[i]),
            sy.at(ys[i]),
            color
        );
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}
