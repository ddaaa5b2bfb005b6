use std::fmt::Write as _;
use std::io::Write;

use num_traits::ToPrimitive;

use super::game::GameTranscript;
use crate::generators::Output;

pub const CSV_HEADER: [&str; 6] = ["round", "input", "output_kind", "output_repr", "valid", "upper_density"];

/// Writes one row per round.
pub fn write_csv<W: Write>(tr: &GameTranscript, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &tr.rounds {
        let kind = match r.output {
            Output::Set(_) => "set",
            Output::Index(_) => "index",
            Output::Element(_) => "element",
        };
        let valid = match r.valid {
            crate::domain::Verdict::True => "true",
            crate::domain::Verdict::False => "false",
            crate::domain::Verdict::Unknown => "unknown",
        };
        let density = r.density.as_ref().map(|d| d.upper.to_string()).unwrap_or_default();
        w.write_record([
            r.round.to_string(),
            r.input.short_repr(),
            kind.to_string(),
            r.output.to_string(),
            valid.to_string(),
            density,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(tr: &GameTranscript) -> String {
    let mut buf = Vec::new();
    write_csv(tr, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;

/// Sampled upper density against the round, as a polyline on `[0, 1]`.
pub fn density_svg(tr: &GameTranscript, title: &str) -> String {
    let points: Vec<(u64, f64)> = tr
        .rounds
        .iter()
        .filter_map(|r| r.density.as_ref().map(|d| (r.round, d.upper.to_f64().unwrap_or(0.0))))
        .collect();
    let last = tr.rounds.len().max(1) as f64;
    let x = |t: u64| MARGIN + (t as f64 / last) * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="14">{}</text>"#,
        MARGIN / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (x(0), x(tr.rounds.len() as u64), y(0.0), y(1.0));
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for (v, label) in [(0.0, "0"), (0.5, "1/2"), (1.0, "1")] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{label}</text>"#,
            x0 - 4.0,
            y(v) + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x1}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">round {}</text>"#,
        y0 + 16.0,
        tr.rounds.len()
    );
    if let Some(t) = tr.t_star {
        let xt = x(t);
        let _ =
            writeln!(svg, r#"<line x1="{xt}" y1="{y0}" x2="{xt}" y2="{y1}" stroke="gray" stroke-dasharray="4 3"/>"#);
    }
    if !points.is_empty() {
        let path: Vec<String> = points.iter().map(|&(t, v)| format!("{:.2},{:.2}", x(t), y(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
