use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::sweep::RateTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// Row table plus a one-line fit summary.
    Csv,
    /// Log-log plot of the data with the theory line.
    Svg,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Precondition(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn render_csv(table: &RateTable) -> String {
    let mut out = String::from("axis,value,mean_error,std_error,trials\n");
    for r in &table.rows {
        let _ = writeln!(out, "{},{},{},{},{}", table.axis.name(), r.value, r.mean_error, r.std_error, r.trials);
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_fit_csv(table: &RateTable) -> String {
    let mut out = String::from(
        "axis,measure,fitted_slope,ci_lo,ci_hi,theory_slope,alt_theory_slope,tolerance,pass,informative,excluded\n",
    );
    let excluded: Vec<String> = table.excluded.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{}",
        table.axis.name(),
        table.measure,
        opt(table.fitted_slope),
        opt(table.slope_ci.map(|c| c.0)),
        opt(table.slope_ci.map(|c| c.1)),
        table.theory_slope,
        opt(table.alt_theory_slope),
        table.tolerance,
        table.pass,
        table.informative,
        excluded.join(";"),
    );
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn polyline(pts: &[(f64, f64)], bounds: (f64, f64, f64, f64), style: &str) -> String {
    let (x0, x1, y0, y1) = bounds;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0).max(1e-12) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0).max(1e-12) * (HEIGHT - 2.0 * MARGIN);
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    format!("<polyline fill=\"none\" {style} points=\"{}\"/>\n", coords.join(" "))
}

/// Log-log plot with exactly two polylines: the measured means and the
/// theory slope through their centroid.
pub fn render_svg(table: &RateTable) -> String {
    let data: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.mean_error > 0.0)
        .map(|r| (r.abscissa.ln(), r.mean_error.ln()))
        .collect();
    let fitted: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.included && r.mean_error > 0.0)
        .map(|r| (r.abscissa.ln(), r.mean_error.ln()))
        .collect();
    let anchor = if fitted.is_empty() { &data } else { &fitted };
    let theory: Vec<(f64, f64)> = if anchor.is_empty() {
        Vec::new()
    } else {
        let n = anchor.len() as f64;
        let cx = anchor.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = anchor.iter().map(|p| p.1).sum::<f64>() / n;
        let lo = data.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = data.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        [lo, hi].iter().map(|&x| (x, cy + table.theory_slope * (x - cx))).collect()
    };
    let all = data.iter().chain(&theory);
    let bounds = all.fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |b, p| {
        (b.0.min(p.0), b.1.max(p.0), b.2.min(p.1), b.3.max(p.1))
    });
    let bounds = if bounds.0.is_finite() { bounds } else { (0.0, 1.0, 0.0, 1.0) };

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    svg.push_str(&polyline(&data, bounds, "stroke=\"#1f77b4\" stroke-width=\"2\""));
    svg.push_str(&polyline(&theory, bounds, "stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\""));
    let xlabel = if table.axis.name() == "m" { "ln(m / ln m)".to_string() } else { format!("ln {}", table.axis.name()) };
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{xlabel}</text>",
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">ln {}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        table.measure
    );
    let slope = table.fitted_slope.map(|s| format!("{s:.3}")).unwrap_or_else(|| "n/a".into());
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"30\" font-size=\"13\">fitted slope {slope}, theory {:.3}</text>",
        MARGIN, table.theory_slope
    );
    svg.push_str("</svg>\n");
    svg
}

/// Write the requested formats as `<stem>.csv`, `<stem>_fit.csv`,
/// `<stem>.svg` and `<stem>.json` under `dir`.
pub fn emit_report(table: &RateTable, dir: &Path, stem: &str, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    for f in formats {
        match f {
            ReportFormat::Csv => {
                put(format!("{stem}.csv"), render_csv(table))?;
                put(format!("{stem}_fit.csv"), render_fit_csv(table))?;
            }
            ReportFormat::Svg => put(format!("{stem}.svg"), render_svg(table))?,
            ReportFormat::Json => {
                let body = serde_json::to_string_pretty(table).map_err(|e| Error::Domain(e.to_string()))?;
                put(format!("{stem}.json"), body + "\n")?
            }
        }
    }
    Ok(written)
}
