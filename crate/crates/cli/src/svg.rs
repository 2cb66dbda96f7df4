//! Hand-written SVG line charts: one file per attribute with three stacked
//! panels (group-0 means, group-1 means, divergence per fold).

use std::fmt::Write;

use fairscope::audit::LearnerAttributeResult;

const WIDTH: f64 = 780.0;
const PANEL_HEIGHT: f64 = 230.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 46.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Line<'a> {
    label: String,
    color: &'a str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// `n` evenly spaced values covering `[lo, hi]`, widened when degenerate.
fn y_range(lines: &[Line]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in lines.iter().flat_map(|l| &l.points) {
        lo = lo.min(p.1);
        hi = hi.max(p.1);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.08 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
    (lo - pad, hi + pad)
}

fn panel(svg: &mut String, index: usize, title: &str, y_label: &str, n_folds: usize, lines: &[Line], decimals: usize) {
    let top = TOP + index as f64 * PANEL_HEIGHT;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = PANEL_HEIGHT - BOTTOM - 24.0;
    let y0 = top + 24.0;
    let (lo, hi) = y_range(lines);
    let span = (n_folds.max(2) - 1) as f64;
    let sx = |x: f64| LEFT + x / span * plot_w;
    let sy = |y: f64| y0 + (hi - y) / (hi - lo) * plot_h;

    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-size="13" font-weight="bold">{}</text>"#, LEFT, top + 14.0, escape(title));
    let _ = writeln!(svg, r##"<rect x="{LEFT:.1}" y="{y0:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#444"/>"##);
    for t in 0..=4 {
        let v = lo + (hi - lo) * t as f64 / 4.0;
        let y = sy(v);
        let _ = writeln!(svg, r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, LEFT, LEFT + plot_w);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{v:.decimals$}</text>"#, LEFT - 6.0, y + 3.0);
    }
    for f in 0..n_folds {
        let x = sx(f as f64);
        let _ = writeln!(svg, r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/>"##, y0 + plot_h, y0 + plot_h + 4.0);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#, y0 + plot_h + 15.0, f + 1);
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">fold</text>"#, LEFT + plot_w / 2.0, y0 + plot_h + 30.0);
    let (lx, ly) = (18.0, y0 + plot_h / 2.0);
    let _ = writeln!(svg, r#"<text x="{lx:.1}" y="{ly:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {lx:.1} {ly:.1})">{}</text>"#, escape(y_label));

    for (i, line) in lines.iter().enumerate() {
        let pts: Vec<String> = line.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let dash = if line.dashed { r#" stroke-dasharray="5 3""# } else { "" };
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{}" stroke-width="1.6"{dash} points="{}"/>"#, line.color, pts.join(" "));
        let ly = y0 + 6.0 + i as f64 * 14.0;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(svg, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="1.6"{dash}/>"#, lx + 22.0, line.color);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#, lx + 27.0, ly + 3.0, escape(&line.label));
    }
}

fn mean_lines<'a>(rows: &[&LearnerAttributeResult], group: usize) -> Vec<Line<'a>> {
    let mut lines = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let orig = r.folds.iter().map(|f| (f.fold_index as f64, f.original[group].mu)).collect();
        let alt = r.folds.iter().map(|f| (f.fold_index as f64, f.alternated[group].mu)).collect();
        lines.push(Line { label: r.learner.clone(), color, dashed: false, points: orig });
        lines.push(Line { label: format!("{} (alternated)", r.learner), color, dashed: true, points: alt });
    }
    lines
}

/// Three-panel chart for one attribute. `stamp`, when given, is embedded as
/// a comment.
pub fn fold_panels(attribute: &str, group_names: &[String; 2], rows: &[&LearnerAttributeResult], stamp: Option<&str>) -> String {
    let n_folds = rows
        .iter()
        .flat_map(|r| r.folds.iter().map(|f| f.fold_index + 1))
        .max()
        .unwrap_or(1);
    let height = TOP + 3.0 * PANEL_HEIGHT + 10.0;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#);
    if let Some(s) = stamp {
        let _ = writeln!(svg, "<!-- generated {} -->", escape(s));
    }
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="24" font-size="16" font-weight="bold">{}</text>"#, LEFT, escape(&format!("Alternation of {attribute}")));

    let g0 = mean_lines(rows, 0);
    panel(&mut svg, 0, &format!("Mean prediction, {}", group_names[0]), "mean prediction", n_folds, &g0, 2);
    let g1 = mean_lines(rows, 1);
    panel(&mut svg, 1, &format!("Mean prediction, {}", group_names[1]), "mean prediction", n_folds, &g1, 2);
    let kl: Vec<Line> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Line {
            label: r.learner.clone(),
            color: PALETTE[i % PALETTE.len()],
            dashed: false,
            points: r.folds.iter().map(|f| (f.fold_index as f64, 0.5 * (f.kl[0] + f.kl[1]))).collect(),
        })
        .collect();
    panel(&mut svg, 2, "KL divergence (mean of both groups)", "KL divergence", n_folds, &kl, 4);
    svg.push_str("</svg>\n");
    svg
}
