//! Static SVG chart of mean regret against the horizon, one line per policy
//! with a +-1 stderr band. Reads only the regret CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use aoi_bandit::report::{read_regret_csv, write_atomic, RegretRow};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 70.0;
const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

pub fn render_regret_svg(csv_path: &Path, svg_path: &Path, title: &str) -> Result<()> {
    let rows = read_regret_csv(csv_path)?;
    write_atomic(svg_path, render(&rows, title).as_bytes())?;
    Ok(())
}

fn render(rows: &[RegretRow], title: &str) -> String {
    let mut series: BTreeMap<&str, Vec<&RegretRow>> = BTreeMap::new();
    let mut order = Vec::new();
    for row in rows {
        if !series.contains_key(row.policy.as_str()) {
            order.push(row.policy.as_str());
        }
        series.entry(row.policy.as_str()).or_default().push(row);
    }

    let x_max = rows.iter().map(|r| r.checkpoint).max().unwrap_or(1).max(1) as f64;
    let y_lo = rows.iter().map(|r| r.mean_regret - r.stderr).fold(0.0, f64::min);
    let y_hi = rows.iter().map(|r| r.mean_regret + r.stderr).fold(1.0, f64::max);
    let sx = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for i in 0..=5 {
        let fx = x_max * i as f64 / 5.0;
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.0}</text>"#, sx(fx), y0 + 18.0, fx);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.1}</text>"#, x0 - 6.0, sy(fy) + 4.0, fy);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">T (slots)</text>"#, WIDTH / 2.0, HEIGHT - 25.0);
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">AoI regret</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (i, name) in order.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = &series[name];
        let upper: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.checkpoint as f64), sy(r.mean_regret + r.stderr)))
            .collect();
        let lower: Vec<String> = pts
            .iter()
            .rev()
            .map(|r| format!("{:.2},{:.2}", sx(r.checkpoint as f64), sy(r.mean_regret - r.stderr)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.checkpoint as f64), sy(r.mean_regret)))
            .collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            MARGIN + 10.0,
            MARGIN + 30.0,
            MARGIN + 36.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
