//! Minimal SVG charts.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grouped bars for values in [0, 1]; one group per category, one bar per
/// series.
pub fn bar_chart(title: &str, categories: &[String], series: &[(String, Vec<f64>)]) -> String {
    let group_w = 24.0 * series.len().max(1) as f64 + 20.0;
    let (left, top, plot_h) = (50.0, 40.0, 240.0);
    let width = left + group_w * categories.len().max(1) as f64 + 140.0;
    let height = top + plot_h + 90.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="14">{}</text>"#, esc(title));
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = top + plot_h * (1.0 - v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{v:.2}</text>"##,
            width - 140.0,
            left - 4.0,
            y + 4.0
        );
    }
    for (g, cat) in categories.iter().enumerate() {
        let x0 = left + g as f64 * group_w + 10.0;
        for (k, (_, vals)) in series.iter().enumerate() {
            let v = vals.get(g).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            let h = plot_h * v;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="20" height="{h}" fill="{}"><title>{v:.4}</title></rect>"#,
                x0 + 24.0 * k as f64,
                top + plot_h - h,
                PALETTE[k % PALETTE.len()]
            );
        }
        let cx = x0 + 12.0 * series.len() as f64;
        let cy = top + plot_h + 14.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{cy}" text-anchor="end" transform="rotate(-40 {cx} {cy})">{}</text>"#,
            esc(cat)
        );
    }
    for (k, (name, _)) in series.iter().enumerate() {
        let x = width - 130.0;
        let y = top + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            PALETTE[k % PALETTE.len()],
            x + 16.0,
            y + 10.0,
            esc(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Row-normalised confusion matrix (percentages) as a heat map.
pub fn confusion_heatmap(title: &str, labels: &[String], percent: &[Vec<f64>]) -> String {
    let n = labels.len();
    let cell = 44.0;
    let (left, top) = (110.0, 60.0);
    let width = left + cell * n as f64 + 20.0;
    let height = top + cell * n as f64 + 100.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="14">{}</text>"#, esc(title));
    let _ = writeln!(s, r#"<text x="{left}" y="40">predicted</text>"#);
    for (i, row) in percent.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let shade = (255.0 - 2.0 * v.clamp(0.0, 100.0)).round() as u8;
            let (x, y) = (left + cell * j as f64, top + cell * i as f64);
            let ink = if shade < 128 { "#fff" } else { "#000" };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#fff"/><text x="{}" y="{}" text-anchor="middle" fill="{ink}">{v:.1}</text>"##,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            left - 6.0,
            top + cell * i as f64 + cell / 2.0 + 4.0,
            esc(&labels[i])
        );
    }
    for (j, l) in labels.iter().enumerate() {
        let cx = left + cell * j as f64 + cell / 2.0;
        let cy = top + cell * n as f64 + 12.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{cy}" text-anchor="end" transform="rotate(-40 {cx} {cy})">{}</text>"#,
            esc(l)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bar_chart_has_one_rect_per_bar() {
        let svg = bar_chart(
            "t <&>",
            &["a".into(), "b".into()],
            &[("s".into(), vec![0.5, 1.0]), ("f2".into(), vec![0.25, 0.0])],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("t &lt;&amp;&gt;"));
        assert_eq!(svg.matches("<rect").count(), 4 + 2);
    }

    #[test]
    fn heatmap_cells() {
        let svg = confusion_heatmap("cm", &["x".into(), "y".into()], &[vec![100.0, 0.0], vec![25.0, 75.0]]);
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains(">75.0<"));
    }
}
