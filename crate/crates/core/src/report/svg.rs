use std::fmt::Write;

use super::ComparisonResult;

const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const PLOT_H: f64 = 200.0;
const BOTTOM: f64 = 110.0;
const GROUP_W: f64 = 40.0;
const BAR_W: f64 = 15.0;
const SIM_COLOR: &str = "#3d6fb0";
const HIST_COLOR: &str = "#c0633f";

/// Grouped bar chart of simulated and historical energy per (state, fuel).
/// Coordinates are printed with fixed precision so output is reproducible.
pub fn render_comparison_svg(cmp: &ComparisonResult) -> String {
    let n = cmp.rows.len();
    let width = LEFT + RIGHT + GROUP_W * n.max(4) as f64;
    let height = TOP + PLOT_H + BOTTOM;
    let peak = cmp
        .rows
        .iter()
        .flat_map(|r| [r.simulated, r.historical])
        .fold(0.0f64, f64::max);
    let top_value = if peak > 0.0 { peak } else { 1.0 };
    let y = |v: f64| TOP + PLOT_H * (1.0 - v / top_value);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{LEFT:.0}" y="20" font-size="14">Generation by state and fuel (TWh)</text>"#
    );
    // legend
    for (i, (label, color)) in [("simulated", SIM_COLOR), ("historical", HIST_COLOR)]
        .into_iter()
        .enumerate()
    {
        let x = LEFT + 110.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.0}" y="28" width="10" height="10" fill="{color}"/><text x="{:.0}" y="37">{label}</text>"#,
            x + 14.0
        );
    }
    // gridlines and value labels
    for k in 0..=4 {
        let v = top_value * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.0}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#dddddd"/><text x="{:.0}" y="{:.2}" text-anchor="end">{}</text>"##,
            width - RIGHT,
            LEFT - 6.0,
            yy + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT:.0}" y1="{TOP:.0}" x2="{LEFT:.0}" y2="{:.0}" stroke="#333333"/>"##,
        TOP + PLOT_H
    );
    if n == 0 {
        let _ = writeln!(
            s,
            r##"<text x="{:.0}" y="{:.0}" text-anchor="middle" fill="#777777">no data</text>"##,
            LEFT + (width - LEFT - RIGHT) / 2.0,
            TOP + PLOT_H / 2.0
        );
    }
    for (i, r) in cmp.rows.iter().enumerate() {
        let x0 = LEFT + GROUP_W * i as f64 + (GROUP_W - 2.0 * BAR_W) / 2.0;
        for (j, (v, color)) in [(r.simulated, SIM_COLOR), (r.historical, HIST_COLOR)]
            .into_iter()
            .enumerate()
        {
            let x = x0 + BAR_W * j as f64;
            let yy = y(v);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{yy:.2}" width="{BAR_W:.0}" height="{:.2}" fill="{color}"><title>{} {}: {}</title></rect>"#,
                TOP + PLOT_H - yy,
                escape(&r.state),
                r.fuel,
                v
            );
        }
        let lx = x0 + BAR_W;
        let ly = TOP + PLOT_H + 12.0;
        let _ = writeln!(
            s,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="end" transform="rotate(-45 {lx:.2} {ly:.2})">{} {}</text>"#,
            escape(&r.state),
            r.fuel
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT:.0}" y1="{:.0}" x2="{:.2}" y2="{:.0}" stroke="#333333"/>"##,
        TOP + PLOT_H,
        width - RIGHT,
        TOP + PLOT_H
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT:.0}" y="{:.0}">euclidean error {:.6} TWh, summed absolute error {:.6} TWh</text>"#,
        height - 8.0,
        cmp.euclidean,
        cmp.sum_abs
    );
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v >= 100.0 {
        format!("{v:.0}")
    } else if v >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
