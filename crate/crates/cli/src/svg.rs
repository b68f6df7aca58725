//! Minimal self-contained SVG line charts: axes, optional log scales, grid,
//! legend. No external assets, so the files open anywhere.

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 76.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

struct Axis {
    min: f64,
    max: f64,
    log: bool,
}

impl Axis {
    /// Data coordinate -> [0, 1] along the axis.
    fn unit(&self, v: f64) -> f64 {
        let (v, min, max) = if self.log {
            (v.log10(), self.min.log10(), self.max.log10())
        } else {
            (v, self.min, self.max)
        };
        (v - min) / (max - min)
    }
}

impl Chart {
    pub fn render(&self) -> String {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

        let visible = |x: f64, y: f64| {
            x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0)
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if visible(x, y) {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }

        let mut svg = String::with_capacity(8 * 1024);
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" fill=\"#222222\" \
             font-weight=\"bold\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        if xs.is_empty() {
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" \
                 fill=\"#666666\">no plottable points</text>\n</svg>\n",
                WIDTH / 2.0,
                HEIGHT / 2.0
            ));
            return svg;
        }

        let x_axis = padded_axis(&xs, self.log_x);
        let y_axis = padded_axis(&ys, self.log_y);
        let map_x = |v: f64| MARGIN_LEFT + x_axis.unit(v) * plot_w;
        let map_y = |v: f64| MARGIN_TOP + (1.0 - y_axis.unit(v)) * plot_h;

        for (v, label) in ticks(&x_axis) {
            let x = map_x(v);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                 stroke=\"#e4e4e4\" stroke-width=\"1\"/>\n",
                MARGIN_TOP + plot_h
            ));
            svg.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\" \
                 fill=\"#444444\">{label}</text>\n",
                MARGIN_TOP + plot_h + 16.0
            ));
        }
        for (v, label) in ticks(&y_axis) {
            let y = map_y(v);
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"#e4e4e4\" stroke-width=\"1\"/>\n",
                MARGIN_LEFT + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\" \
                 fill=\"#444444\">{label}</text>\n",
                MARGIN_LEFT - 7.0,
                y + 4.0
            ));
        }

        svg.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
             fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" \
             fill=\"#222222\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222222\" \
             transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));

        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter(|&&(x, y)| visible(x, y))
                .map(|&(x, y)| (map_x(x), map_y(y)))
                .collect();
            if pts.is_empty() {
                continue;
            }
            if pts.len() > 1 {
                let path: Vec<String> =
                    pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                     stroke-width=\"1.8\"/>\n",
                    path.join(" ")
                ));
            }
            if pts.len() <= 40 {
                for (x, y) in &pts {
                    svg.push_str(&format!(
                        "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.4\" fill=\"{color}\"/>\n"
                    ));
                }
            }
        }

        let legend_x = MARGIN_LEFT + plot_w - 250.0;
        let mut legend_y = MARGIN_TOP + 14.0;
        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            svg.push_str(&format!(
                "<line x1=\"{legend_x}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" \
                 stroke=\"{color}\" stroke-width=\"2.2\"/>\n",
                legend_x + 24.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#222222\">{}</text>\n",
                legend_x + 30.0,
                legend_y + 4.0,
                escape(&truncate(&series.label, 36))
            ));
            legend_y += 17.0;
        }

        svg.push_str("</svg>\n");
        svg
    }
}

fn padded_axis(values: &[f64], log: bool) -> Axis {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        if log && v <= 0.0 {
            continue;
        }
        min = min.min(v);
        max = max.max(v);
    }
    if log {
        if min == max {
            min /= 2.0;
            max *= 2.0;
        } else {
            let pad = (max.log10() - min.log10()) * 0.03;
            min = 10f64.powf(min.log10() - pad);
            max = 10f64.powf(max.log10() + pad);
        }
    } else if min == max {
        let pad = if min == 0.0 { 0.5 } else { min.abs() * 0.1 };
        min -= pad;
        max += pad;
    } else {
        let pad = (max - min) * 0.03;
        min -= pad;
        max += pad;
    }
    Axis { min, max, log }
}

fn ticks(axis: &Axis) -> Vec<(f64, String)> {
    if axis.log {
        log_ticks(axis)
    } else {
        linear_ticks(axis)
    }
}

fn linear_ticks(axis: &Axis) -> Vec<(f64, String)> {
    let range = axis.max - axis.min;
    let raw_step = range / 5.0;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let normalized = raw_step / magnitude;
    let step = if normalized < 1.5 {
        1.0
    } else if normalized < 3.5 {
        2.0
    } else if normalized < 7.5 {
        5.0
    } else {
        10.0
    } * magnitude;
    let decimals = (-(step.log10().floor())).max(0.0) as usize;
    let mut v = (axis.min / step).ceil() * step;
    let mut out = Vec::new();
    while v <= axis.max + step * 1e-9 {
        out.push((v, fmt_tick(v, decimals)));
        v += step;
    }
    out
}

fn log_ticks(axis: &Axis) -> Vec<(f64, String)> {
    let lo = axis.min.log10().ceil() as i32;
    let hi = axis.max.log10().floor() as i32;
    if hi < lo {
        let mid = 10f64.powf((axis.min.log10() + axis.max.log10()) / 2.0);
        return vec![
            (axis.min, fmt_compact(axis.min)),
            (mid, fmt_compact(mid)),
            (axis.max, fmt_compact(axis.max)),
        ];
    }
    let count = (hi - lo + 1) as usize;
    let stride = count.div_ceil(9).max(1);
    (lo..=hi)
        .step_by(stride)
        .map(|e| {
            let v = 10f64.powi(e);
            (v, fmt_compact(v))
        })
        .collect()
}

fn fmt_tick(v: f64, decimals: usize) -> String {
    if v.abs() >= 1e5 || (v != 0.0 && v.abs() < 1e-3) {
        fmt_compact(v)
    } else {
        format!("{v:.decimals$}")
    }
}

fn fmt_compact(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 1e-3 && v.abs() < 1e5 {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        return s.to_string();
    }
    format!("{v:.0e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        return s.to_string();
    }
    let cut: String = s.chars().take(max - 1).collect();
    format!("{cut}\u{2026}")
}
