use std::fmt::Write;

use crate::bayes::DecisionRegionGrid;
use crate::hypothesis::Hypothesis;

pub fn color(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::H0 => "#2e8b57",
        Hypothesis::H1 => "#222222",
        Hypothesis::H2 => "#d62728",
        Hypothesis::H3 => "#1f5fbf",
    }
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

fn plot_w() -> f64 {
    W - LEFT - RIGHT
}

fn plot_h() -> f64 {
    H - TOP - BOTTOM
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#,
        LEFT + plot_w() / 2.0
    );
}

fn legend(out: &mut String, entries: &[(Hypothesis, &str)]) {
    let x = W - RIGHT + 15.0;
    for (k, (h, text)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 22.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="14" height="14" fill="{}"/><text x="{}" y="{}">{text}</text>"#,
            y - 11.0,
            color(*h),
            x + 20.0,
            y
        );
    }
}

fn frame(out: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        plot_w(),
        plot_h()
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        LEFT + plot_w() / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{y_label}</text>"#,
        TOP + plot_h() / 2.0,
        TOP + plot_h() / 2.0
    );
}

fn x_tick(out: &mut String, x: f64, label: &str) {
    let y = TOP + plot_h();
    let _ = writeln!(
        out,
        r#"<line x1="{x:.2}" y1="{y}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#,
        y + 5.0,
        y + 18.0
    );
}

fn y_tick(out: &mut String, y: f64, label: &str) {
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#,
        LEFT - 5.0,
        LEFT - 8.0,
        y + 4.0
    );
}

/// Region map with power on the horizontal axis and log-scale distortion on
/// the vertical axis, one colored rectangle per run of equal labels.
pub fn render_regions(g: &DecisionRegionGrid, title: &str) -> String {
    let (pa, da) = (g.spec.power, g.spec.log_distortion);
    let cw = plot_w() / pa.bins as f64;
    let ch = plot_h() / da.bins as f64;
    let mut out = String::new();
    open(&mut out, title);
    for id in 0..da.bins {
        let y = TOP + plot_h() - (id + 1) as f64 * ch;
        let mut ip = 0;
        while ip < pa.bins {
            let h = g.label_at(ip, id);
            let start = ip;
            while ip < pa.bins && g.label_at(ip, id) == h {
                ip += 1;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                LEFT + start as f64 * cw,
                (ip - start) as f64 * cw + 0.05,
                ch + 0.05,
                color(h)
            );
        }
    }
    frame(&mut out, "received power (dB)", "distortion (log scale)");
    let p0 = (pa.min / 5.0).ceil() as i64;
    let p1 = (pa.max / 5.0).floor() as i64;
    for k in p0..=p1 {
        let v = k as f64 * 5.0;
        x_tick(&mut out, LEFT + (v - pa.min) / (pa.max - pa.min) * plot_w(), &format!("{v}"));
    }
    for e in da.min.ceil() as i64..=da.max.floor() as i64 {
        let y = TOP + plot_h() - (e as f64 - da.min) / (da.max - da.min) * plot_h();
        y_tick(&mut out, y, &format!("1e{e}"));
    }
    let entries: Vec<(Hypothesis, &str)> =
        Hypothesis::ALL.iter().map(|&h| (h, h.description())).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// Smallest 1, 2 or 5 times a power of ten that is at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let raw = raw.max(1.0);
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Four cumulative decision traces over epochs.
pub fn render_traces(cumulative: &[[f64; 4]], title: &str) -> String {
    let n = cumulative.len().max(1);
    let ymax = cumulative
        .last()
        .map_or(1.0, |c| c.iter().cloned().fold(0.0, f64::max))
        .max(1e-9);
    let x = |k: usize| LEFT + k as f64 / n as f64 * plot_w();
    let y = |v: f64| TOP + plot_h() - v / ymax * plot_h();
    let mut out = String::new();
    open(&mut out, title);
    frame(&mut out, "time (s)", "normalized cumulative decisions");
    for h in Hypothesis::ALL {
        let mut pts = format!("{:.2},{:.2}", x(0), y(0.0));
        for (k, c) in cumulative.iter().enumerate() {
            let _ = write!(pts, " {:.2},{:.2}", x(k + 1), y(c[h.index()]));
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{pts}" fill="none" stroke="{}" stroke-width="2"/>"#,
            color(h)
        );
    }
    let step = nice_step(n as f64 / 6.0);
    let mut t = 0.0;
    while t <= n as f64 {
        x_tick(&mut out, LEFT + t / n as f64 * plot_w(), &format!("{t}"));
        t += step;
    }
    for k in 0..=4 {
        let v = ymax * k as f64 / 4.0;
        y_tick(&mut out, y(v), &format!("{v:.2}"));
    }
    let entries: Vec<(Hypothesis, &str)> =
        Hypothesis::ALL.iter().map(|&h| (h, h.description())).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}
