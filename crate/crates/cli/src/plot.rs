//! Static log-log SVG plots of fitted decay curves.

use std::fmt::Write;

use quench_core::estimator::FitRecord;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 56.0;

/// Data points, the fitted line and, when a reference exponent is known, a
/// guide line of that slope through the geometric centre of the data.
pub fn loglog(title: &str, fit: &FitRecord) -> String {
    let pts: Vec<(f64, f64)> = fit
        .radii
        .iter()
        .zip(&fit.values)
        .filter(|(r, v)| **r > 0.0 && **v > 0.0)
        .map(|(r, v)| (r.log10(), v.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let _ = writeln!(
        svg,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(svg, r#"<clipPath id="frame"><rect x="{PAD}" y="{PAD}" width="{}" height="{}"/></clipPath>"#, W - 2.0 * PAD, H - 2.0 * PAD);
    let line = |svg: &mut String, slope: f64, intercept: f64, style: &str| {
        let (ya, yb) = (intercept + slope * x0, intercept + slope * x1);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style} clip-path="url(#frame)"/>"#,
            sx(x0),
            sy(ya),
            sx(x1),
            sy(yb)
        );
    };
    line(&mut svg, fit.slope, fit.intercept, r#"stroke="steelblue" stroke-width="1.5""#);
    if let Some(beta) = fit.reference {
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        line(&mut svg, beta, my - beta * mx, r#"stroke="gray" stroke-dasharray="5,4""#);
    }
    for (x, y) in &pts {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="black"/>"#, sx(*x), sy(*y));
    }
    let legend = match fit.reference {
        Some(beta) => format!("slope {:.4} (guide {:.4})", fit.slope, beta),
        None => format!("slope {:.4}", fit.slope),
    };
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{legend}</text>"#, PAD + 6.0, PAD + 16.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">log10 r</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="11" transform="rotate(-90 16 {})" text-anchor="middle">log10 {}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(&fit.quantity)
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{x:.2}</text>"#, sx(x), H - PAD + 14.0);
    }
    for y in [y0, y1] {
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{y:.2}</text>"#, PAD - 4.0, sy(y) + 3.0);
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let pad = ((hi - lo) * 0.08).max(0.05);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use quench_core::estimator::fit_exponent;

    #[test]
    fn plot_has_points_and_guide() {
        let radii = [0.5, 0.25, 0.125];
        let values: Vec<f64> = radii.iter().map(|r: &f64| r.powf(1.5)).collect();
        let fit = fit_exponent(&radii, &values, Some(1.5)).unwrap().record("fb_growth", vec![0.0, 0.0], true);
        let svg = loglog("a < b", &fit);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
