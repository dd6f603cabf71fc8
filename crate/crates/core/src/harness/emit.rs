//! Sweep outputs: `rows.csv`, `aggregates.csv`, `manifest.json`, `plot.svg`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::{Aggregate, SweepConfig, SweepResult, SweepRow};
use crate::error::{Error, Result};

pub const ROWS_HEADER: [&str; 4] = ["n", "repetition", "relative_iou", "relative_tortuosity"];
pub const AGGREGATES_HEADER: [&str; 6] = ["n", "K", "mean_R", "std_R", "mean_IoU", "std_IoU"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SweepConfig,
    pub train_size: usize,
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub n: usize,
    pub repetition: usize,
    pub sampled_ids: Vec<String>,
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

pub fn write_rows(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(ROWS_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.repetition.to_string(),
            r.relative_iou.to_string(),
            r.relative_tortuosity.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_aggregates(aggregates: &[Aggregate], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(AGGREGATES_HEADER)?;
    for a in aggregates {
        w.write_record([
            a.n.to_string(),
            a.k.to_string(),
            a.mean_r.to_string(),
            a.std_r.to_string(),
            a.mean_iou.to_string(),
            a.std_iou.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(header.iter().copied()) {
        return Err(Error::param("csv", format!("{} does not have header {}", path.display(), header.join(","))));
    }
    r.records().map(|rec| rec.map_err(Error::from)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let s = rec.get(i).unwrap_or_default();
    s.parse().map_err(|_| Error::param("csv", format!("cannot parse {s:?} in column {i}")))
}

/// Reads `(n, repetition, relative_iou, relative_tortuosity)` rows.
pub fn read_rows(path: &Path) -> Result<Vec<(usize, usize, f64, f64)>> {
    read_table(path, &ROWS_HEADER)?
        .iter()
        .map(|r| Ok((field(r, 0)?, field(r, 1)?, field(r, 2)?, field(r, 3)?)))
        .collect()
}

pub fn read_aggregates(path: &Path) -> Result<Vec<Aggregate>> {
    read_table(path, &AGGREGATES_HEADER)?
        .iter()
        .map(|r| {
            Ok(Aggregate {
                n: field(r, 0)?,
                k: field(r, 1)?,
                mean_r: field(r, 2)?,
                std_r: field(r, 3)?,
                mean_iou: field(r, 4)?,
                std_iou: field(r, 5)?,
            })
        })
        .collect()
}

/// Line chart of mean R and mean IoU against `n` with ±1 std error bars.
pub fn plot_svg(aggregates: &[Aggregate]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const L: f64 = 60.0;
    const R: f64 = 20.0;
    const T: f64 = 30.0;
    const B: f64 = 50.0;
    let n_max = aggregates.iter().map(|a| a.n).max().unwrap_or(1).max(1) as f64;
    let n_min = aggregates.iter().map(|a| a.n).min().unwrap_or(0) as f64;
    let span_n = (n_max - n_min).max(1.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in aggregates {
        lo = lo.min(a.mean_r - a.std_r).min(a.mean_iou - a.std_iou);
        hi = hi.max(a.mean_r + a.std_r).max(a.mean_iou + a.std_iou);
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.1).max(0.05);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |n: f64| L + (n - n_min) / span_n * (W - L - R);
    let py = |v: f64| T + (hi - v) / (hi - lo) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{L} {T}V{y}H{x}" fill="none" stroke="black"/>"#,
        y = H - B,
        x = W - R
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y:.1}" font-size="11" text-anchor="end" dominant-baseline="middle">{v:.3}</text>"#,
            x = L - 6.0
        );
    }
    for a in aggregates {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y}" font-size="11" text-anchor="middle">{n}</text>"#,
            x = px(a.n as f64),
            y = H - B + 16.0,
            n = a.n
        );
    }
    let _ = writeln!(s, r#"<text x="{x}" y="{y}" font-size="12" text-anchor="middle">n</text>"#, x = (L + W - R) / 2.0, y = H - 10.0);
    type MeanStd = fn(&Aggregate) -> (f64, f64);
    let series: [(&str, &str, MeanStd); 2] = [
        ("mean R", "#1f77b4", |a| (a.mean_r, a.std_r)),
        ("mean IoU", "#d62728", |a| (a.mean_iou, a.std_iou)),
    ];
    for (idx, (name, color, get)) in series.iter().enumerate() {
        let pts: Vec<String> = aggregates
            .iter()
            .map(|a| format!("{:.2},{:.2}", px(a.n as f64), py(get(a).0)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-name="{name}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        for a in aggregates {
            let (m, sd) = get(a);
            let x = px(a.n as f64);
            let _ = writeln!(
                s,
                r#"<line class="errorbar" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                py(m - sd),
                py(m + sd)
            );
        }
        let ly = T + 14.0 * idx as f64;
        let _ = writeln!(s, r#"<line x1="{x1}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, x1 = W - R - 110.0, x2 = W - R - 90.0);
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{ly}" font-size="11" dominant-baseline="middle">{name}</text>"#,
            x = W - R - 84.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes every sweep output into `out_dir`.
pub fn emit_results(result: &SweepResult, config: &SweepConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_rows(&result.rows, &out_dir.join("rows.csv"))?;
    write_aggregates(&result.aggregates, &out_dir.join("aggregates.csv"))?;
    let svg_path = out_dir.join("plot.svg");
    std::fs::write(&svg_path, plot_svg(&result.aggregates)).map_err(|e| Error::io(&svg_path, e))?;
    let manifest = RunManifest {
        config: config.clone(),
        train_size: result.train_size,
        samples: result
            .rows
            .iter()
            .map(|r| SampleRecord { n: r.n, repetition: r.repetition, sampled_ids: r.sampled_ids.clone() })
            .collect(),
    };
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(&path, e))
}
