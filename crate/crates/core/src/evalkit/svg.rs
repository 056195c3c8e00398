//! Minimal deterministic SVG line plots for the accuracy-vs-k and ROC
//! curves. Output is a pure function of the inputs, so files diff cleanly.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 625.0;
const TOP: f64 = 15.0;
const BOTTOM: f64 = 435.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x_min) / (self.x_max - self.x_min);
        let fy = (y - self.y_min) / (self.y_max - self.y_min);
        (
            LEFT + fx * (RIGHT - LEFT),
            BOTTOM - fy * (BOTTOM - TOP),
        )
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(value: f64, integer: bool) -> String {
    if integer {
        format!("{value:.0}")
    } else {
        format!("{value:.2}")
    }
}

#[allow(clippy::too_many_arguments)]
fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    frame: &Frame,
    series: &[PlotSeries],
    integer_x_ticks: bool,
    diagonal: bool,
) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        TOP - 2.0,
        escape(title)
    ));

    // Axes with five tick intervals per side.
    svg.push_str(&format!(
        "<line x1=\"{LEFT:.2}\" y1=\"{BOTTOM:.2}\" x2=\"{RIGHT:.2}\" y2=\"{BOTTOM:.2}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{LEFT:.2}\" y1=\"{TOP:.2}\" x2=\"{LEFT:.2}\" y2=\"{BOTTOM:.2}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let x_value = frame.x_min + f * (frame.x_max - frame.x_min);
        let y_value = frame.y_min + f * (frame.y_max - frame.y_min);
        let (px, _) = frame.map(x_value, frame.y_min);
        let (_, py) = frame.map(frame.x_min, y_value);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{BOTTOM:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            BOTTOM + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            BOTTOM + 18.0,
            tick_label(x_value, integer_x_ticks)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{LEFT:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            LEFT - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            LEFT - 8.0,
            py + 4.0,
            tick_label(y_value, false)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 8.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">{}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(y_label)
    ));

    if diagonal {
        let (x0, y0) = frame.map(frame.x_min, frame.y_min);
        let (x1, y1) = frame.map(frame.x_max, frame.y_max);
        svg.push_str(&format!(
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" \
             stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n"
        ));
    }

    for (s, series) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let path: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = frame.map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        let ly = TOP + 18.0 + 16.0 * s as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            RIGHT - 150.0,
            RIGHT - 126.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            RIGHT - 120.0,
            ly + 4.0,
            escape(&series.name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Accuracy against feature-subset size, one polyline per series. The y
/// axis is fixed to [0, 1].
pub fn accuracy_vs_k_svg(series: &[PlotSeries]) -> String {
    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .fold(1.0_f64, f64::max);
    let frame = Frame {
        x_min: 0.0,
        x_max,
        y_min: 0.0,
        y_max: 1.0,
    };
    line_plot(
        "accuracy vs features used",
        "features used (k)",
        "accuracy",
        &frame,
        series,
        true,
        false,
    )
}

/// ROC curves on the unit square with a dashed chance diagonal.
pub fn roc_svg(series: &[PlotSeries]) -> String {
    let frame = Frame {
        x_min: 0.0,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
    };
    line_plot(
        "ROC",
        "false positive rate",
        "true positive rate",
        &frame,
        series,
        false,
        true,
    )
}
