//! Minimal hand-rolled SVG line chart: one line per series showing the mean,
//! with a translucent band spanning the min-max range across seeds.

/// One plotted series: points are `(x, mean, min, max)`, sorted by `x`.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64, f64, f64)>,
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

const W: f64 = 720.0;
const H: f64 = 480.0;
const ML: f64 = 86.0; // left margin: room for y tick labels
const MR: f64 = 170.0; // right margin: room for the legend
const MT: f64 = 26.0;
const MB: f64 = 58.0;

fn fmt(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Render the chart; returns the SVG document.
pub fn render(x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts: Vec<(f64, f64, f64, f64)> =
        series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, _, lo, hi) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(lo);
        y1 = y1.max(hi);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-300 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-300 {
        let pad = 0.5 * y1.abs().max(1e-12);
        y0 -= pad;
        y1 += pad;
    } else {
        let pad = 0.06 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let sx = move |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = move |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));

    // Grid and tick labels, 5 ticks per axis.
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let gx = sx(xv);
        let gy = sy(yv);
        svg.push_str(&format!(
            "  <line x1=\"{gx:.1}\" y1=\"{MT}\" x2=\"{gx:.1}\" y2=\"{:.1}\" \
             stroke=\"#dddddd\"/>\n",
            H - MB
        ));
        svg.push_str(&format!(
            "  <line x1=\"{ML}\" y1=\"{gy:.1}\" x2=\"{:.1}\" y2=\"{gy:.1}\" \
             stroke=\"#dddddd\"/>\n",
            W - MR
        ));
        svg.push_str(&format!(
            "  <text x=\"{gx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            H - MB + 18.0,
            fmt(xv)
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ML - 8.0,
            gy + 4.0,
            fmt(yv)
        ));
    }
    // Axes.
    svg.push_str(&format!(
        "  <rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#333333\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));
    // Axis labels.
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 14.0,
        x_label
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0,
        y_label
    ));

    for (si, s) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        if s.points.len() > 1 {
            // Min-max band: upper edge left-to-right, lower edge back.
            let mut band = String::new();
            for &(x, _, _, hi) in &s.points {
                band.push_str(&format!("{:.1},{:.1} ", sx(x), sy(hi)));
            }
            for &(x, _, lo, _) in s.points.iter().rev() {
                band.push_str(&format!("{:.1},{:.1} ", sx(x), sy(lo)));
            }
            svg.push_str(&format!(
                "  <polygon points=\"{}\" fill=\"{color}\" opacity=\"0.15\"/>\n",
                band.trim_end()
            ));
            let line: String = s
                .points
                .iter()
                .map(|&(x, m, _, _)| format!("{:.1},{:.1}", sx(x), sy(m)))
                .collect::<Vec<_>>()
                .join(" ");
            svg.push_str(&format!(
                "  <polyline points=\"{line}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"2\"/>\n"
            ));
        }
        for &(x, m, _, _) in &s.points {
            svg.push_str(&format!(
                "  <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(m)
            ));
        }
        // Legend entry.
        let ly = MT + 14.0 + 20.0 * si as f64;
        svg.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n",
            W - MR + 12.0,
            W - MR + 40.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            W - MR + 46.0,
            ly + 4.0,
            s.name
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
