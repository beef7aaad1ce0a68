//! Minimal SVG regret plot: log-scale regret against cumulative shots, one
//! median line and interquartile band per arm.

use std::fmt::Write;

use super::regret::AggregateCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Renders the curves. Values at or below the lowest decade shown (which
/// includes regret ≤ 0) are drawn on the dashed floor line.
pub fn regret_svg(curves: &[(String, AggregateCurve)], budget: u64) -> String {
    let positive = curves
        .iter()
        .flat_map(|(_, c)| c.q25.iter().chain(&c.median).chain(&c.q75))
        .copied()
        .filter(|v| *v > 0.0 && v.is_finite());
    let (lo, hi) = positive.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let (dec_lo, dec_hi) = if lo.is_finite() {
        (lo.log10().floor(), hi.log10().ceil().max(lo.log10().floor() + 1.0))
    } else {
        (-3.0, 0.0)
    };
    let floor = 10f64.powf(dec_lo);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |s: f64| MARGIN_LEFT + plot_w * s / budget.max(1) as f64;
    let y_of = |v: f64| {
        let l = v.max(floor).log10();
        MARGIN_TOP + plot_h * (dec_hi - l) / (dec_hi - dec_lo)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let mut d = dec_lo;
    while d <= dec_hi {
        let y = y_of(10f64.powf(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
        d += 1.0;
    }
    let yf = y_of(floor);
    let _ = writeln!(
        svg,
        r##"<line x1="{MARGIN_LEFT}" y1="{yf:.2}" x2="{:.2}" y2="{yf:.2}" stroke="#555" stroke-dasharray="4 3"/><text x="{:.2}" y="{:.2}" fill="#555">≤ floor (incl. regret ≤ 0)</text>"##,
        MARGIN_LEFT + plot_w,
        MARGIN_LEFT + 4.0,
        yf - 4.0
    );
    for i in 0..=4 {
        let s = budget as f64 * i as f64 / 4.0;
        let x = x_of(s);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{s:.3e}</text>"#,
            MARGIN_TOP + plot_h + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">cumulative shots</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">simple regret</text>"#,
        MARGIN_TOP + plot_h / 2.0
    );

    for (i, (name, c)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !c.shots.is_empty() {
            let mut band = String::new();
            for (s, v) in c.shots.iter().zip(&c.q75) {
                let _ = write!(band, "{:.2},{:.2} ", x_of(*s as f64), y_of(*v));
            }
            for (s, v) in c.shots.iter().zip(&c.q25).rev() {
                let _ = write!(band, "{:.2},{:.2} ", x_of(*s as f64), y_of(*v));
            }
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                band.trim_end()
            );
            let line: Vec<String> = c
                .shots
                .iter()
                .zip(&c.median)
                .map(|(s, v)| format!("{:.2},{:.2}", x_of(*s as f64), y_of(*v)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
                line.join(" ")
            );
        }
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
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
