//! Self-contained SVG log-log plots: data points, the fitted power law, and a
//! dashed theoretical reference line.
//!
//! Exactly two `<line>` elements appear in the output (fit and reference);
//! axes and ticks are drawn with `<path>` so the lines are easy to locate.

use wkde_core::risk::RateFit;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;

struct LogScale {
    min: f64,
    max: f64,
    lo_px: f64,
    hi_px: f64,
}

impl LogScale {
    fn to_px(&self, v: f64) -> f64 {
        let t = (v.ln() - self.min) / (self.max - self.min);
        self.lo_px + t * (self.hi_px - self.lo_px)
    }
}

pub fn loglog_svg(points: &[(f64, f64)], fit: &RateFit, ref_slope: f64, x_label: &str) -> String {
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_min = x_min.min(x.ln());
        x_max = x_max.max(x.ln());
        y_min = y_min.min(y.ln());
        y_max = y_max.max(y.ln());
    }
    let pad = 0.05 * (x_max - x_min).max(1e-9);
    let pad_y = 0.10 * (y_max - y_min).max(1e-9);
    let xs = LogScale {
        min: x_min - pad,
        max: x_max + pad,
        lo_px: MARGIN,
        hi_px: WIDTH - MARGIN / 2.0,
    };
    let ys = LogScale {
        min: y_min - pad_y,
        max: y_max + pad_y,
        lo_px: HEIGHT - MARGIN,
        hi_px: MARGIN / 2.0,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    svg.push_str(&format!(
        "<path d=\"M {m} {t} L {m} {b} L {r} {b}\" stroke=\"black\" fill=\"none\"/>\n",
        m = MARGIN,
        t = MARGIN / 2.0,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN / 2.0
    ));

    // fitted line across the x range
    let (fx0, fx1) = (xs.min + 0.02, xs.max - 0.02);
    let fy = |lx: f64| fit.intercept + fit.slope * lx;
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
        xs.to_px(fx0.exp()),
        ys.to_px(fy(fx0).exp()),
        xs.to_px(fx1.exp()),
        ys.to_px(fy(fx1).exp()),
    ));

    // reference line with the theoretical slope through the fitted midpoint
    let mid = 0.5 * (fx0 + fx1);
    let ry = |lx: f64| fy(mid) + ref_slope * (lx - mid);
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n",
        xs.to_px(fx0.exp()),
        ys.to_px(ry(fx0).exp()),
        xs.to_px(fx1.exp()),
        ys.to_px(ry(fx1).exp()),
    ));

    for &(x, y) in points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"black\"/>\n",
            xs.to_px(x),
            ys.to_px(y)
        ));
    }

    // tick labels at the data extremes
    for &(x, _) in &[points[0], points[points.len() - 1]] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x:.4}</text>\n",
            xs.to_px(x),
            HEIGHT - MARGIN + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label} (log)</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" transform=\"rotate(-90 16 {:.2})\" text-anchor=\"middle\">mse (log)</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\">fit slope {:.4}; reference slope {:.4}</text>\n",
        MARGIN + 6.0,
        MARGIN / 2.0 + 14.0,
        fit.slope,
        ref_slope
    ));
    svg.push_str("</svg>\n");
    svg
}
