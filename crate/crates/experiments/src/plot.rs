//! Minimal static SVG figures: density heat maps, line charts and box plots.

use std::fmt::Write;

use sgula_core::metrics::DensityEstimate;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Piecewise-linear map from `[0, 1]` to a dark-blue to yellow ramp.
fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
            px_lo,
            px_hi,
        }
    }

    fn px(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                let v = if self.log { 10f64.powf(t) } else { t };
                (v, format!("{v:.3}"))
            })
            .collect()
    }
}

fn frame(s: &mut String, x: Option<&Axis>, y: &Axis, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for (v, label) in x.map(Axis::ticks).unwrap_or_default() {
        let p = x.map_or(0.0, |x| x.px(v));
        let _ = writeln!(s, r#"<text x="{p:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#, H - MARGIN + 16.0);
    }
    for (v, label) in y.ticks() {
        let p = y.px(v);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{p:.1}" text-anchor="end">{label}</text>"#, MARGIN - 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

/// Heat map of a 2-D density, down-sampled to at most 100 cells per axis, with
/// optional cross markers (e.g. detected modes).
pub fn density_heatmap(est: &DensityEstimate<f64>, title: &str, markers: &[Vec<f64>]) -> String {
    let mut s = header(title);
    if est.dim() != 2 {
        s.push_str("</svg>\n");
        return s;
    }
    let (nx, ny) = (est.axes[0].len(), est.axes[1].len());
    let step_x = nx.div_ceil(100);
    let step_y = ny.div_ceil(100);
    let peak = est.values.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let x = Axis::new(est.axes[0].iter().copied(), false, MARGIN, W - MARGIN);
    let y = Axis::new(est.axes[1].iter().copied(), false, H - MARGIN, MARGIN);
    let cw = (W - 2.0 * MARGIN) / nx.div_ceil(step_x) as f64;
    let ch = (H - 2.0 * MARGIN) / ny.div_ceil(step_y) as f64;
    for i in (0..nx).step_by(step_x) {
        for j in (0..ny).step_by(step_y) {
            let v = est.values[i * ny + j];
            let px = x.px(est.axes[0][i]) - cw / 2.0;
            let py = y.px(est.axes[1][j]) - ch / 2.0;
            let _ = writeln!(
                s,
                r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cw + 0.3,
                ch + 0.3,
                color(v / peak)
            );
        }
    }
    for m in markers.iter().filter(|m| m.len() == 2) {
        let (px, py) = (x.px(m[0]), y.px(m[1]));
        let _ = writeln!(
            s,
            r#"<path d="M{:.1},{:.1} L{:.1},{:.1} M{:.1},{:.1} L{:.1},{:.1}" stroke="red" stroke-width="2"/>"#,
            px - 6.0,
            py - 6.0,
            px + 6.0,
            py + 6.0,
            px - 6.0,
            py + 6.0,
            px + 6.0,
            py - 6.0
        );
    }
    frame(&mut s, Some(&x), &y, "x1", "x2");
    s.push_str("</svg>\n");
    s
}

/// Line chart of one or more series.
pub fn line_chart(
    title: &str,
    series: &[(&str, Vec<(f64, f64)>)],
    log_x: bool,
    log_y: bool,
    xlabel: &str,
    ylabel: &str,
) -> String {
    const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut s = header(title);
    let x = Axis::new(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)), log_x, MARGIN, W - MARGIN);
    let y = Axis::new(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)), log_y, H - MARGIN, MARGIN);
    for (k, (name, pts)) in series.iter().enumerate() {
        let c = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|(a, b)| (!log_x || *a > 0.0) && (!log_y || *b > 0.0))
            .map(|(a, b)| format!("{:.1},{:.1}", x.px(*a), y.px(*b)))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, path.join(" "));
        for p in &path {
            let (px, py) = p.split_once(',').unwrap();
            let _ = writeln!(s, r#"<circle cx="{px}" cy="{py}" r="3" fill="{c}"/>"#);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{c}">{}</text>"#,
            W - MARGIN - 120.0,
            MARGIN + 16.0 + 16.0 * k as f64,
            escape(name)
        );
    }
    frame(&mut s, Some(&x), &y, xlabel, ylabel);
    s.push_str("</svg>\n");
    s
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(v.len() - 1);
    v[i] + (pos - i as f64) * (v[j] - v[i])
}

/// Box plots (quartiles, median, 1.5 IQR whiskers) of each group.
pub fn box_plot(title: &str, groups: &[(&str, Vec<f64>)], ylabel: &str) -> String {
    let mut s = header(title);
    let sorted: Vec<(&str, Vec<f64>)> = groups
        .iter()
        .map(|(n, v)| {
            let mut v: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
            v.sort_by(f64::total_cmp);
            (*n, v)
        })
        .collect();
    let y = Axis::new(sorted.iter().flat_map(|(_, v)| v.iter().copied()), false, H - MARGIN, MARGIN);
    let slot = (W - 2.0 * MARGIN) / sorted.len().max(1) as f64;
    for (k, (name, v)) in sorted.iter().enumerate() {
        let cx = MARGIN + slot * (k as f64 + 0.5);
        let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, H - MARGIN + 16.0, escape(name));
        if v.is_empty() {
            continue;
        }
        let (q1, q2, q3) = (quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75));
        let iqr = q3 - q1;
        let lo = v.iter().copied().find(|&x| x >= q1 - 1.5 * iqr).unwrap_or(q1);
        let hi = v.iter().rev().copied().find(|&x| x <= q3 + 1.5 * iqr).unwrap_or(q3);
        let bw = slot * 0.4;
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.1}" y2="{:.1}" stroke="black"/>"#,
            y.px(lo),
            y.px(hi)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{bw:.1}" height="{:.1}" fill="#9ecae1" stroke="black"/>"##,
            cx - bw / 2.0,
            y.px(q3),
            (y.px(q1) - y.px(q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
            cx - bw / 2.0,
            cx + bw / 2.0,
            y.px(q2),
            y.px(q2)
        );
        for &o in v.iter().filter(|&&x| x < lo || x > hi) {
            let _ = writeln!(s, r#"<circle cx="{cx:.1}" cy="{:.1}" r="2" fill="none" stroke="black"/>"#, y.px(o));
        }
    }
    frame(&mut s, None, &y, "", ylabel);
    s.push_str("</svg>\n");
    s
}
