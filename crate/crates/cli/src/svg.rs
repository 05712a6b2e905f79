//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;

use thiserror::Error;

use crate::table::Table;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("table has no rows")]
    EmptyTable,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("no plottable points (log axes need positive values)")]
    NoPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

impl PlotSpec {
    pub fn new(title: &str, x: &str, ys: &[&str], log_x: bool, log_y: bool) -> Self {
        Self {
            title: title.to_string(),
            x: x.to_string(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            x_label: x.to_string(),
            y_label: ys.join(", "),
            log_x,
            log_y,
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: [f64; 4] = [60.0, 20.0, 40.0, 70.0]; // top, right, bottom-extra, left
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Render `spec` over `table`; one polyline with markers per y column.
pub fn render_svg(table: &Table, spec: &PlotSpec) -> Result<String, PlotError> {
    if table.is_empty() {
        return Err(PlotError::EmptyTable);
    }
    let xs = table.column(&spec.x).ok_or_else(|| PlotError::UnknownColumn(spec.x.clone()))?;
    let tx = |v: f64| if spec.log_x { v.log10() } else { v };
    let ty = |v: f64| if spec.log_y { v.log10() } else { v };
    let mut series = Vec::new();
    for name in &spec.ys {
        let ys = table.column(name).ok_or_else(|| PlotError::UnknownColumn(name.clone()))?;
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ys)
            .filter(|(x, y)| (!spec.log_x || **x > 0.0) && (!spec.log_y || **y > 0.0))
            .map(|(&x, &y)| (tx(x), ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        series.push((name.clone(), pts));
    }
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    if all.is_empty() {
        return Err(PlotError::NoPoints);
    }
    let span = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(all.iter().map(|p| p.0).collect());
    let (y0, y1) = span(all.iter().map(|p| p.1).collect());
    let (left, top) = (MARGIN[3], MARGIN[0]);
    let (pw, ph) = (W - MARGIN[3] - MARGIN[1], H - MARGIN[0] - MARGIN[2] - 20.0);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(&spec.title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(vx),
            top + ph + 16.0,
            fmt_tick(vx, spec.log_x)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(vy) + 4.0,
            fmt_tick(vy, spec.log_y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        top + ph + 36.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + ph / 2.0,
        escape(&spec.y_label)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, px(x), py(y));
        }
        let ly = top + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            left + pw - 130.0,
            left + pw - 110.0,
            left + pw - 104.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Cell;

    fn table(rows: &[(f64, f64, f64)]) -> Table {
        let mut t = Table::new(vec!["n".into(), "a".into(), "b".into()]);
        for &(n, a, b) in rows {
            t.push(vec![Cell::Num(n), Cell::Num(a), Cell::Num(b)]);
        }
        t
    }

    #[test]
    fn empty_table_is_an_error() {
        let spec = PlotSpec::new("t", "n", &["a"], true, true);
        assert_eq!(render_svg(&table(&[]), &spec), Err(PlotError::EmptyTable));
    }

    #[test]
    fn single_row_gives_one_marker() {
        let s = render_svg(&table(&[(4.0, 0.1, 0.2)]), &PlotSpec::new("t", "n", &["a"], true, true)).unwrap();
        assert_eq!(s.matches("<circle").count(), 1);
        assert_eq!(s.matches("<polyline").count(), 0);
    }

    #[test]
    fn two_series_two_polylines() {
        let t = table(&[(4.0, 1.0, 2.0), (8.0, 0.5, 1.5), (16.0, 0.25, 1.0)]);
        let s = render_svg(&t, &PlotSpec::new("conv", "n", &["a", "b"], true, true)).unwrap();
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains(">a</text>") && s.contains(">b</text>"));
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn decreasing_data_gives_descending_polyline() {
        let t = table(&[(4.0, 1.0, 1.0), (8.0, 0.5, 1.0), (16.0, 0.25, 1.0)]);
        let s = render_svg(&t, &PlotSpec::new("conv", "n", &["a"], true, true)).unwrap();
        let line = s.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<f64> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap().parse().unwrap()).collect();
        // svg y grows downwards
        assert!(ys.windows(2).all(|w| w[1] > w[0]));
    }
}
