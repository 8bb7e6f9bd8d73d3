//! Minimal SVG rendering of report plots.

use std::fmt::Write;

use super::report::PlotData;
use crate::estimators::HistogramBin;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (MARGIN, H - MARGIN, W - MARGIN / 2.0, MARGIN / 2.0);
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn sx(t: f64) -> f64 {
    MARGIN + t * (W - 1.5 * MARGIN)
}

fn sy(t: f64) -> f64 {
    (H - MARGIN) - t * (H - 1.5 * MARGIN)
}

/// Drift against k with a log₁₀ vertical axis; the closed-form prediction
/// is drawn dashed.
pub fn drift_svg(title: &str, k: &[u32], drift: &[f64], predicted: &[f64]) -> String {
    let mut s = header(title);
    let logs: Vec<f64> = drift
        .iter()
        .chain(predicted)
        .filter(|d| **d > 0.0)
        .map(|d| d.log10())
        .collect();
    let (lo, hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    let (lo, hi) = if lo.is_finite() {
        (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
    } else {
        (0.0, 1.0)
    };
    let (kmin, kmax) = (
        *k.first().unwrap_or(&0) as f64,
        (*k.last().unwrap_or(&1) as f64).max(*k.first().unwrap_or(&0) as f64 + 1.0),
    );
    let px = |kk: u32| sx((kk as f64 - kmin) / (kmax - kmin));
    let py = |d: f64| sy((d.log10() - lo) / (hi - lo));
    let decades = (hi - lo) as i64;
    let stride = (decades / 8).max(1);
    for e in (lo as i64..=hi as i64).step_by(stride as usize) {
        let y = sy((e as f64 - lo) / (hi - lo));
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="lightgray"/>"#,
            MARGIN,
            W - MARGIN / 2.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">1e{e}</text>"#,
            MARGIN - 4.0,
            y + 4.0
        );
    }
    for kk in k.iter().copied().filter(|kk| kk % 5 == 0 || k.len() < 10) {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{kk}</text>"#,
            px(kk),
            H - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">k</text>"#,
        W / 2.0,
        H - 12.0
    );
    let line = |vals: &[f64]| -> String {
        k.iter()
            .zip(vals)
            .filter(|(_, d)| **d > 0.0)
            .map(|(kk, d)| format!("{:.2},{:.2}", px(*kk), py(*d)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    if !predicted.is_empty() {
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="gray" stroke-dasharray="6,4"/>"#,
            line(predicted)
        );
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        line(drift)
    );
    for (kk, d) in k.iter().zip(drift).filter(|(_, d)| **d > 0.0) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#,
            px(*kk),
            py(*d)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Bar chart of a histogram.
pub fn histogram_svg(title: &str, bins: &[HistogramBin]) -> String {
    let mut s = header(title);
    if bins.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let peak = bins.iter().map(|b| b.count).max().unwrap_or(1).max(1) as f64;
    let width = 1.0 / bins.len() as f64;
    for (i, b) in bins.iter().enumerate() {
        let (x0, x1) = (sx(i as f64 * width), sx((i + 1) as f64 * width));
        let top = sy(b.count as f64 / peak);
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="steelblue" stroke="white"/>"#,
            x1 - x0,
            sy(0.0) - top
        );
    }
    let (lo, hi) = (bins[0].lo, bins[bins.len() - 1].hi);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="start">{lo:.4}</text>"#,
        MARGIN,
        H - MARGIN + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{hi:.4}</text>"#,
        W - MARGIN / 2.0,
        H - MARGIN + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        MARGIN - 4.0,
        sy(1.0) + 4.0,
        peak as usize
    );
    s.push_str("</svg>\n");
    s
}

pub fn render(title: &str, plot: &PlotData) -> String {
    match plot {
        PlotData::Drift {
            k,
            drift,
            predicted,
        } => drift_svg(title, k, drift, predicted),
        PlotData::Histogram { bins } => histogram_svg(title, bins),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_plot_is_well_formed() {
        let k: Vec<u32> = (1..=40).collect();
        let d: Vec<f64> = k.iter().map(|&k| 0.3 * 2f64.powi(k as i32)).collect();
        let svg = drift_svg("drift <psi>", &k, &d, &d);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 40);
        assert!(svg.contains("&lt;psi&gt;"));
    }

    #[test]
    fn histogram_plot() {
        let bins = crate::estimators::ratio_histogram(&[1.0, 1.2, 1.5, 1.5], 4);
        let svg = histogram_svg("ratios", &bins);
        assert_eq!(svg.matches("<rect").count(), 1 + 4);
    }
}
