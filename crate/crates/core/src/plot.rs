//! SVG scatter frames for single-input, single-output tables.
//!
//! Each object is drawn as one glyph whose shape marks its category:
//! squares, circles and diamonds for the first three categories, then
//! triangles, and the cycle repeats with new colours. The legend is text
//! only, so a frame holds exactly one shape element per object.

use std::fmt::Write;

use crate::model::{CharacteristicTable, Classification};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const GLYPH: f64 = 5.0;
const COLOURS: [&str; 6] = ["#1f4e79", "#b22222", "#2e7d32", "#6a1b9a", "#ef6c00", "#00838f"];
const LEGEND_MARKS: [&str; 4] = ["\u{25A0}", "\u{25CF}", "\u{25C6}", "\u{25B2}"];

fn glyph(out: &mut String, category: usize, x: f64, y: f64) {
    let colour = COLOURS[category % COLOURS.len()];
    let g = GLYPH;
    let _ = match category % 4 {
        0 => writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}"/>"#,
            x - g,
            y - g,
            2.0 * g,
            2.0 * g
        ),
        1 => writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{g:.2}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#
        ),
        2 => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
            x,
            y - 1.3 * g,
            x + 1.3 * g,
            y,
            x,
            y + 1.3 * g,
            x - 1.3 * g,
            y
        ),
        _ => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{colour}"/>"#,
            x,
            y - 1.2 * g,
            x + 1.2 * g,
            y + g,
            x - 1.2 * g,
            y + g
        ),
    };
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        0.5 * lo.abs().max(1.0)
    };
    (lo - pad, hi + pad)
}

/// One scatter frame of `classification` over the first input (x axis)
/// and first output (y axis).
pub fn scatter_svg(
    table: &CharacteristicTable,
    classification: &Classification,
    title: &str,
    x_label: &str,
    y_label: &str,
) -> String {
    let xs: Vec<f64> = table.inputs().row(0).iter().copied().collect();
    let ys: Vec<f64> = table.outputs().row(0).iter().copied().collect();
    let (x0, x1) = range(xs.iter().copied());
    let (y0, y1) = range(ys.iter().copied());
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{vx:.3}</text>"#,
            px(vx),
            bottom + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{vy:.3}</text>"#,
            left - 6.0,
            py(vy) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );

    for (c, members) in classification.categories.iter().enumerate() {
        let p = classification.proximity.as_ref().map(|v| v[c]);
        let label = match p {
            Some(p) => format!("{} Category {} (P = {:.4})", LEGEND_MARKS[c % 4], c + 1, p),
            None => format!("{} Category {}", LEGEND_MARKS[c % 4], c + 1),
        };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            right - 170.0,
            top + 4.0 + 16.0 * c as f64,
            COLOURS[c % COLOURS.len()],
            escape(&label)
        );
        let _ = members;
    }
    for (c, members) in classification.categories.iter().enumerate() {
        for &t in members {
            glyph(&mut s, c, px(xs[t]), py(ys[t]));
        }
    }
    s.push_str("</svg>\n");
    s
}
