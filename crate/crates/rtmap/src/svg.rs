//! Minimal static SVG plots: bar charts for histograms, line charts for
//! per-frame series. No styling beyond what is needed to read them.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 40.0;

fn frame(title: &str, body: &str, x_label: &str, y_label: &str, x_max: f64, y_max: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (PAD, H - PAD, W - PAD / 2.0, PAD);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{} (0 to {:.1})</text>"#,
        (x0 + x1) / 2.0,
        H - 8.0,
        escape(x_label),
        x_max
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" font-size="11" transform="rotate(-90 12 {})" text-anchor="middle">{} (0 to {:.3})</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label),
        y_max
    );
    s.push_str(body);
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn scale(v: f64, max: f64, lo: f64, hi: f64) -> f64 {
    if max > 0.0 {
        lo + (hi - lo) * v / max
    } else {
        lo
    }
}

/// One bar per histogram bin; `values` are percentages.
pub fn bar_chart(title: &str, bin_width: f64, values: &[f64]) -> String {
    let x_max = bin_width * values.len() as f64;
    let y_max = values.iter().copied().fold(0.0, f64::max);
    let mut body = String::new();
    let bar = (W - 1.5 * PAD) / values.len().max(1) as f64;
    for (i, &v) in values.iter().enumerate() {
        let x = PAD + i as f64 * bar;
        let y = scale(v, y_max, H - PAD, PAD);
        let _ = writeln!(
            body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="steelblue"/>"#,
            bar.max(0.5),
            (H - PAD - y).max(0.0)
        );
    }
    frame(title, &body, "range, m", "points, %", x_max, y_max)
}

/// One polyline per named series over a shared x axis.
pub fn line_chart(title: &str, x: &[f64], series: &[(&str, &[f64])]) -> String {
    let x_max = x.iter().copied().fold(0.0, f64::max);
    let y_max = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .fold(0.0, f64::max);
    let colors = ["crimson", "steelblue", "darkgreen", "darkorange"];
    let mut body = String::new();
    for (k, (name, ys)) in series.iter().enumerate() {
        let pts: Vec<String> = x
            .iter()
            .zip(ys.iter())
            .map(|(&a, &b)| {
                format!(
                    "{:.2},{:.2}",
                    scale(a, x_max, PAD, W - PAD / 2.0),
                    scale(b, y_max, H - PAD, PAD)
                )
            })
            .collect();
        let color = colors[k % colors.len()];
        let _ = writeln!(
            body,
            r#"<polyline points="{}" fill="none" stroke="{color}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            body,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            W - 150.0,
            PAD + 14.0 * k as f64,
            escape(name)
        );
    }
    frame(title, &body, "time, s", "value", x_max, y_max)
}
