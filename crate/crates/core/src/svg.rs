//! Dependency-free SVG line charts for eyeballing sweep results. The CSV is
//! the contract; these are quick-look plots.

use crate::experiment::CellSummary;
use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

/// One polyline on the chart.
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

/// Outcome proportions against the swept value: risky, conservative, both.
/// The resolved parameters and master seed ride along in a `<desc>` element
/// so the file carries its own provenance.
pub fn outcome_chart(summaries: &[CellSummary]) -> String {
    let x_of = |(i, s): (usize, &CellSummary)| s.swept_value.unwrap_or(i as f64);
    let series = vec![
        Series {
            label: "risky".into(),
            color: "#d62728",
            points: summaries
                .iter()
                .enumerate()
                .map(|e| (x_of(e), e.1.prop_risky))
                .collect(),
        },
        Series {
            label: "conservative".into(),
            color: "#1f77b4",
            points: summaries
                .iter()
                .enumerate()
                .map(|e| (x_of(e), e.1.prop_conservative))
                .collect(),
        },
        Series {
            label: "both".into(),
            color: "#2ca02c",
            points: summaries
                .iter()
                .enumerate()
                .map(|e| (x_of(e), e.1.prop_mixed))
                .collect(),
        },
    ];
    let x_label = summaries
        .iter()
        .find_map(|s| s.swept_param)
        .map_or_else(|| "cell".to_string(), |p| p.name().to_string());
    let mut chart = line_chart("outcome proportions", &x_label, &series);
    if let Some(first) = summaries.first() {
        let p = &first.params;
        let desc = format!(
            "<desc>n_labs={} d={} p_c={} u_c={} u_r={} c={} f={} t={} rounds={} trials={} master_seed={}{}</desc>\n",
            p.n_labs,
            p.d,
            p.p_c,
            p.u_c,
            p.u_r,
            p.c,
            p.f,
            p.t,
            p.rounds,
            first.trials,
            first.master_seed,
            first
                .swept_param
                .map(|sp| format!(" swept={sp}"))
                .unwrap_or_default()
        );
        if let Some(pos) = chart.find('\n') {
            chart.insert_str(pos + 1, &desc);
        }
    }
    chart
}

/// Render a line chart with a fixed [0, 1] y-axis.
pub fn line_chart(title: &str, x_label: &str, series: &[Series]) -> String {
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x_min, x_max) = if x_min.is_finite() && x_max > x_min {
        (x_min, x_max)
    } else if x_min.is_finite() {
        (x_min - 0.5, x_min + 0.5)
    } else {
        (0.0, 1.0)
    };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| MARGIN_TOP + (1.0 - y) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );

    // y grid and labels
    for i in 0..=4 {
        let y = i as f64 * 0.25;
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            MARGIN_LEFT,
            py(y),
            MARGIN_LEFT + plot_w,
            py(y)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{:.2}</text>"#,
            MARGIN_LEFT - 6.0,
            py(y) + 4.0,
            y
        );
    }

    // x ticks on the data grid (thinned to at most 12)
    let mut ticks: Vec<f64> = series
        .first()
        .map(|s| s.points.iter().map(|p| p.0).collect())
        .unwrap_or_default();
    ticks.dedup();
    let stride = ticks.len().div_ceil(12).max(1);
    for x in ticks.iter().step_by(stride) {
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#aaa"/>"##,
            px(*x),
            py(0.0),
            py(0.0) + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            px(*x),
            py(0.0) + 18.0,
            trim_float(*x)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );

    // axes
    let _ = writeln!(
        svg,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h
    );

    // series polylines, point markers, legend
    for (i, s) in series.iter().enumerate() {
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            coords.join(" "),
            s.color
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
                px(x),
                py(y),
                s.color
            );
        }
        let ly = MARGIN_TOP + 16.0 + i as f64 * 20.0;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/>"#,
            lx,
            ly,
            lx + 18.0,
            ly,
            s.color
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(&s.label)
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn trim_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
