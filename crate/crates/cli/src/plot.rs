//! Static SVG risk curves rendered from a sweep CSV.
//!
//! The plot is a function of the CSV text alone, so re-rendering a saved
//! table reproduces the image byte for byte.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv is missing column {0}")]
    MissingColumn(&'static str),
    #[error("bad number {value:?} in column {column}")]
    BadNumber { column: &'static str, value: String },
    #[error("csv has no data rows")]
    Empty,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

struct Series {
    lambda: Vec<f64>,
    ridge: Vec<f64>,
    pca: Vec<f64>,
}

fn read_series(csv_text: &str) -> Result<Series, PlotError> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(PlotError::MissingColumn(name))
    };
    let (li, ri, pi) = (column("lambda")?, column("ridge_risk")?, column("pca_risk")?);
    let mut series = Series {
        lambda: Vec::new(),
        ridge: Vec::new(),
        pca: Vec::new(),
    };
    for record in reader.records() {
        let record = record?;
        let parse = |idx: usize, name: &'static str| {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<f64>().map_err(|_| PlotError::BadNumber {
                column: name,
                value: raw.to_string(),
            })
        };
        series.lambda.push(parse(li, "lambda")?);
        series.ridge.push(parse(ri, "ridge_risk")?);
        series.pca.push(parse(pi, "pca_risk")?);
    }
    if series.lambda.is_empty() {
        return Err(PlotError::Empty);
    }
    Ok(series)
}

/// Maps data coordinates onto the plot area.
struct Axes {
    log_x: bool,
    x_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Axes {
    fn x(&self, lambda: f64) -> f64 {
        let v = if self.log_x { lambda.log10() } else { lambda };
        let span = self.x_max - self.x_min;
        let t = if span > 0.0 { (v - self.x_min) / span } else { 0.5 };
        LEFT + t * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, risk: f64) -> f64 {
        let t = if self.y_max > 0.0 { risk / self.y_max } else { 0.0 };
        HEIGHT - BOTTOM - t * (HEIGHT - TOP - BOTTOM)
    }
}

fn polyline(out: &mut String, axes: &Axes, xs: &[f64], ys: &[f64], style: &str) {
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", axes.x(x), axes.y(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"  <polyline fill="none" {style} points="{}"/>"#,
        points.join(" ")
    );
}

pub fn render_svg(csv_text: &str) -> Result<String, PlotError> {
    let s = read_series(csv_text)?;
    let log_x = s.lambda.iter().all(|&l| l > 0.0) && s.lambda.len() > 1;
    let xs: Vec<f64> = s
        .lambda
        .iter()
        .map(|&l| if log_x { l.log10() } else { l })
        .collect();
    let bound: Vec<f64> = s.ridge.iter().map(|r| 4.0 * r).collect();
    let y_max = s
        .ridge
        .iter()
        .chain(&s.pca)
        .chain(&bound)
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        * 1.05;
    let axes = Axes {
        log_x,
        x_min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        x_max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        y_max,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"  <path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );

    let lambda_min = s.lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = s.lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x_label = if log_x { "lambda (log scale)" } else { "lambda" };
    let _ = writeln!(
        out,
        r#"  <text x="{x0}" y="{:.2}" text-anchor="start">{lambda_min:.3e}</text>"#,
        y0 + 18.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{x1}" y="{:.2}" text-anchor="end">{lambda_max:.3e}</text>"#,
        y0 + 18.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        0.5 * (x0 + x1),
        y0 + 38.0
    );
    let _ = writeln!(out, r#"  <text x="{:.2}" y="{:.2}" text-anchor="end">0</text>"#, x0 - 6.0, y0);
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" text-anchor="end">{y_max:.3e}</text>"#,
        x0 - 6.0,
        y1 + 4.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">risk</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );

    polyline(&mut out, &axes, &s.lambda, &bound, r##"stroke="#999999" stroke-dasharray="6 4""##);
    polyline(&mut out, &axes, &s.lambda, &s.ridge, r##"stroke="#1f77b4" stroke-width="2""##);
    polyline(&mut out, &axes, &s.lambda, &s.pca, r##"stroke="#d62728" stroke-width="2""##);

    let legend = [
        ("#1f77b4", "", "ridge risk"),
        ("#d62728", "", "PCA-OLS risk"),
        ("#999999", r#" stroke-dasharray="6 4""#, "4 x ridge risk"),
    ];
    for (i, (color, dash, label)) in legend.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"  <line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(out, r#"  <text x="{}" y="{}">{label}</text>"#, lx + 30.0, y + 4.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}
