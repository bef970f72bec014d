//! Static SVG line charts. Output depends only on the input rows.

use std::fmt::Write;

use qnet_alloc_core::experiments::{CompareRow, SweepRow};

use crate::report::RowResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

struct Series<'a> {
    name: &'a str,
    points: Vec<(f64, f64)>,
}

fn chart(title: &str, x_label: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y / y1 * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>"#,
        WIDTH / 2.0
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
    );
    for k in 0..=4 {
        let t = f64::from(k) / 4.0;
        let (x, y) = (x0 + t * (x1 - x0), t * y1);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
            sx(x),
            bottom + 16.0,
            tick(x)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
            left - 6.0,
            sy(y) + 3.0,
            tick(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-name="{}" points="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
            s.name,
            points.join(" ")
        );
        let ly = top + 14.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{color}" font-family="sans-serif" font-size="11">{}</text>"#,
            right - 150.0,
            s.name
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// One series per cost component against p1. Failed points are skipped.
pub fn sweep_svg(rows: &[RowResult<SweepRow>]) -> String {
    let ok: Vec<&SweepRow> = rows.iter().flatten().collect();
    let series = |name, f: fn(&SweepRow) -> f64| Series {
        name,
        points: ok.iter().map(|r| (r.p1, f(r))).collect(),
    };
    chart(
        "Cost breakdown",
        "probability of scenario 1",
        &[
            series("reservation", |r| r.reservation_cost),
            series("on-demand", |r| r.expected_on_demand_cost),
            series("qubits", |r| r.expected_qubit_cost),
            series("bell pairs", |r| r.expected_bell_cost),
        ],
    )
}

/// One series per model against the on-demand price.
pub fn compare_svg(rows: &[RowResult<CompareRow>]) -> String {
    let ok: Vec<&CompareRow> = rows.iter().flatten().collect();
    let series = |name, f: fn(&CompareRow) -> f64| Series {
        name,
        points: ok.iter().map(|r| (r.on_demand_cost, f(r))).collect(),
    };
    chart(
        "Total cost by model",
        "on-demand deployment cost",
        &[
            series("proposed", |r| r.proposed_total),
            series("EVF", |r| r.evf_total),
            series("random", |r| r.random_mean),
        ],
    )
}
