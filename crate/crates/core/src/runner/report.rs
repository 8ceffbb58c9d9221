//! Report generation from the results store: per-config metric tables,
//! summed confusion matrices, fold-averaged ROC curves, and a cross-config
//! summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::compare::{metric_value, METRIC_IDS};
use crate::error::{Error, Result};
use crate::evaluate::RunRecord;
use crate::runner::store::{read_records, RecordFilter};

/// One aggregated metric line.
#[derive(Debug, Clone, PartialEq)]
struct MetricRow {
    id: &'static str,
    mean: f64,
    std: f64,
    n: usize,
}

fn metric_rows(records: &[RunRecord]) -> Vec<MetricRow> {
    let mut rows = Vec::new();
    for (id, _) in METRIC_IDS {
        let values: Vec<f64> = records.iter().filter_map(|r| metric_value(r, id)).collect();
        if values.is_empty() {
            continue;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (n as f64 - 1.0);
            var.sqrt()
        };
        rows.push(MetricRow { id, mean, std, n });
    }
    rows
}

fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from("metric,mean,std,n\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{},{}", row.id, row.mean, row.std, row.n);
    }
    out
}

fn metrics_text(config_hash: &str, rows: &[MetricRow]) -> String {
    let mut out = format!("metrics for config {}\n", config_hash);
    let width = rows.iter().map(|r| r.id.len()).max().unwrap_or(0);
    for row in rows {
        let _ = writeln!(
            out,
            "  {:width$}  {:.4} +/- {:.4}  (n = {})",
            row.id,
            row.mean,
            row.std,
            row.n,
            width = width
        );
    }
    out
}

fn summed_confusion(records: &[RunRecord]) -> Option<Vec<Vec<usize>>> {
    let mut total: Option<Vec<Vec<usize>>> = None;
    for record in records {
        let Some(classification) = &record.metrics.classification else {
            continue;
        };
        match &mut total {
            None => total = Some(classification.confusion.clone()),
            Some(sum) => {
                for (sum_row, row) in sum.iter_mut().zip(&classification.confusion) {
                    for (cell, v) in sum_row.iter_mut().zip(row) {
                        *cell += v;
                    }
                }
            }
        }
    }
    total
}

fn confusion_text(confusion: &[Vec<usize>]) -> String {
    let n = confusion.len();
    let cell = confusion
        .iter()
        .flatten()
        .map(|v| v.to_string().len())
        .max()
        .unwrap_or(1)
        .max(n.saturating_sub(1).to_string().len())
        .max(4);
    let mut out = String::from("summed confusion matrix (rows = true class)\n");
    let _ = write!(out, "{:>cell$}", "", cell = cell + 2);
    for j in 0..n {
        let _ = write!(out, "{:>cell$}", format!("p{}", j), cell = cell + 1);
    }
    out.push('\n');
    for (i, row) in confusion.iter().enumerate() {
        let _ = write!(out, "{:>cell$}", format!("t{}", i), cell = cell + 2);
        for v in row {
            let _ = write!(out, "{:>cell$}", v, cell = cell + 1);
        }
        out.push('\n');
    }
    out
}

/// The curve's tpr just left of x: the first point at x when x is a
/// breakpoint, the linear interpolation otherwise.
fn lower_tpr(points: &[(f64, f64)], x: f64) -> f64 {
    for (i, (px, py)) in points.iter().enumerate() {
        if *px == x {
            return *py;
        }
        if *px > x {
            if i == 0 {
                return *py;
            }
            let (qx, qy) = points[i - 1];
            return qy + (py - qy) * (x - qx) / (px - qx);
        }
    }
    points.last().map(|(_, py)| *py).unwrap_or(0.0)
}

/// The curve's tpr just right of x: the last point at x when x is a
/// breakpoint, the linear interpolation otherwise.
fn upper_tpr(points: &[(f64, f64)], x: f64) -> f64 {
    let mut exact: Option<f64> = None;
    for (i, (px, py)) in points.iter().enumerate() {
        if *px == x {
            exact = Some(*py);
            continue;
        }
        if *px > x {
            if let Some(v) = exact {
                return v;
            }
            if i == 0 {
                return *py;
            }
            let (qx, qy) = points[i - 1];
            return qy + (py - qy) * (x - qx) / (px - qx);
        }
    }
    exact
        .or_else(|| points.last().map(|(_, py)| *py))
        .unwrap_or(0.0)
}

/// Vertical averaging at the union of fpr breakpoints. Each breakpoint
/// contributes its left and right tpr averages, so shared vertical jumps
/// survive and the mean of identical curves is that curve.
fn average_curves(curves: &[&Vec<(f64, f64)>]) -> Vec<(f64, f64)> {
    let mut union: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.iter().map(|(x, _)| *x))
        .collect();
    union.sort_by(|a, b| a.partial_cmp(b).expect("fpr values are finite"));
    union.dedup();

    let n = curves.len() as f64;
    let mut mean = Vec::new();
    for x in union {
        let lo = curves.iter().map(|c| lower_tpr(c, x)).sum::<f64>() / n;
        let hi = curves.iter().map(|c| upper_tpr(c, x)).sum::<f64>() / n;
        mean.push((x, lo));
        if hi > lo {
            mean.push((x, hi));
        }
    }
    mean
}

/// Mean ROC curve per class over the records that carry one.
fn mean_roc(records: &[RunRecord]) -> Vec<(usize, Vec<(f64, f64)>)> {
    let n_classes = records
        .iter()
        .map(|r| r.metrics.per_class_roc.len())
        .max()
        .unwrap_or(0);
    let mut result = Vec::new();
    for class in 0..n_classes {
        let curves: Vec<&Vec<(f64, f64)>> = records
            .iter()
            .filter_map(|r| r.metrics.per_class_roc.get(class))
            .filter_map(|c| c.as_ref())
            .collect();
        if curves.is_empty() {
            continue;
        }
        result.push((class, average_curves(&curves)));
    }
    result
}

fn roc_csv(curves: &[(usize, Vec<(f64, f64)>)]) -> String {
    let mut out = String::from("class,fpr,mean_tpr\n");
    for (class, points) in curves {
        for (fpr, tpr) in points {
            let _ = writeln!(out, "{},{},{}", class, fpr, tpr);
        }
    }
    out
}

const ROC_COLORS: [&str; 6] = [
    "#1f6f8b", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#2c3e50",
];

fn roc_svg(curves: &[(usize, Vec<(f64, f64)>)]) -> String {
    let (width, height) = (460.0, 440.0);
    let (left, right, top, bottom) = (50.0, 420.0, 20.0, 390.0);
    let sx = |v: f64| left + v * (right - left);
    // y grows downward in SVG, so tpr 1 maps to the top edge
    let sy = |v: f64| bottom - v * (bottom - top);

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        width, height, width, height
    );
    let _ = writeln!(
        out,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        right - left,
        bottom - top
    );
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
        sx(0.0),
        sy(0.0),
        sx(1.0),
        sy(1.0)
    );
    for (value, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            sx(value),
            bottom + 16.0,
            label
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            sy(value) + 4.0,
            label
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">mean false positive rate</text>",
        (left + right) / 2.0,
        bottom + 36.0
    );
    for (slot, (class, points)) in curves.iter().enumerate() {
        let color = ROC_COLORS[slot % ROC_COLORS.len()];
        let path: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            path.join(" "),
            color
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{}\">class {}</text>",
            right - 70.0,
            top + 16.0 + 14.0 * slot as f64,
            color,
            class
        );
    }
    out.push_str("</svg>\n");
    out
}

fn write_artifact(path: PathBuf, content: String, artifacts: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, content).map_err(|e| Error::io(path.display().to_string(), e))?;
    artifacts.push(path);
    Ok(())
}

/// Generates every report artifact for the selected configs, returning the
/// written paths. Per config `<out_dir>/<config_hash>/` holds metrics.csv,
/// metrics.txt, confusion.txt (classification configs), and roc_mean.csv
/// plus roc_mean.svg (configs with ROC data); the cross-config summary
/// lands in summary.csv and summary.txt.
pub fn generate_report(
    store_path: &Path,
    selection: &[String],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if selection.is_empty() {
        return Err(Error::Config("report selection is empty".into()));
    }
    let mut artifacts = Vec::new();
    let mut summary_rows: Vec<(String, Vec<MetricRow>, usize)> = Vec::new();
    for hash in selection {
        let filter = RecordFilter {
            config_hash: Some(hash.clone()),
            ..RecordFilter::default()
        };
        let records = read_records(store_path, &filter)?;
        if records.is_empty() {
            return Err(Error::Config(format!(
                "no records for config {} in {}",
                hash,
                store_path.display()
            )));
        }
        let config_dir = out_dir.join(hash);
        std::fs::create_dir_all(&config_dir)
            .map_err(|e| Error::io(config_dir.display().to_string(), e))?;

        let rows = metric_rows(&records);
        write_artifact(config_dir.join("metrics.csv"), metrics_csv(&rows), &mut artifacts)?;
        write_artifact(
            config_dir.join("metrics.txt"),
            metrics_text(hash, &rows),
            &mut artifacts,
        )?;
        if let Some(confusion) = summed_confusion(&records) {
            write_artifact(
                config_dir.join("confusion.txt"),
                confusion_text(&confusion),
                &mut artifacts,
            )?;
        }
        let curves = mean_roc(&records);
        if !curves.is_empty() {
            write_artifact(config_dir.join("roc_mean.csv"), roc_csv(&curves), &mut artifacts)?;
            write_artifact(config_dir.join("roc_mean.svg"), roc_svg(&curves), &mut artifacts)?;
        }
        summary_rows.push((hash.clone(), rows, records.len()));
    }

    let columns: Vec<&'static str> = METRIC_IDS
        .iter()
        .map(|(id, _)| *id)
        .filter(|id| {
            summary_rows
                .iter()
                .any(|(_, rows, _)| rows.iter().any(|r| r.id == *id))
        })
        .collect();
    let mut csv = String::from("config_hash,records");
    for id in &columns {
        let _ = write!(csv, ",{}_mean", id);
    }
    csv.push('\n');
    let mut text = String::from("cross-config summary\n");
    for (hash, rows, n_records) in &summary_rows {
        let _ = write!(csv, "{},{}", hash, n_records);
        let _ = write!(text, "  {} ({} records)", hash, n_records);
        for id in &columns {
            match rows.iter().find(|r| r.id == *id) {
                Some(row) => {
                    let _ = write!(csv, ",{}", row.mean);
                    let _ = write!(text, "  {} = {:.4}", id, row.mean);
                }
                None => csv.push(','),
            }
        }
        csv.push('\n');
        text.push('\n');
    }
    write_artifact(out_dir.join("summary.csv"), csv, &mut artifacts)?;
    write_artifact(out_dir.join("summary.txt"), text, &mut artifacts)?;
    Ok(artifacts)
}
