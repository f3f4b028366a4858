use std::fmt::Write as _;

use super::RenderError;
use crate::meta::OutputMeta;
use crate::profile::{Period, ProfileSet, SeriesKey, HOURS};
use crate::scalar::Scalar;
use crate::scoring::baseline_of;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#aec7e8", "#2ca02c", "#98df8a", "#bcbd22", "#ff7f0e", "#d62728", "#ff9896",
    "#9467bd", "#c5b0d5", "#8c564b", "#17becf",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlotOptions {
    pub baseline: bool,
    pub emphasize: Option<Period>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotLine<T> {
    pub period: Period,
    pub values: [T; HOURS],
}

/// The numbers behind a chart, one line per period.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData<T> {
    pub key: SeriesKey,
    pub lines: Vec<PlotLine<T>>,
    pub baseline: Option<[T; HOURS]>,
    pub emphasize: Option<Period>,
}

pub fn plot_series<T: Scalar>(
    set: &ProfileSet<T>,
    key: &SeriesKey,
    options: &PlotOptions,
) -> Result<PlotData<T>, RenderError> {
    let Some(profiles) = set.get(key) else {
        if !set.series.keys().any(|k| k.counter_id == key.counter_id) {
            return Err(RenderError::UnknownCounter(key.counter_id.to_string()));
        }
        return Err(RenderError::MissingSeries {
            counter: key.counter_id.to_string(),
            direction: key.direction.code(),
            day_type: key.day_type.to_string(),
        });
    };
    if let Some(p) = options.emphasize {
        if !profiles.iter().any(|x| x.key.period == p) {
            return Err(RenderError::MissingPeriod(p.to_string()));
        }
    }
    let lines: Vec<PlotLine<T>> = profiles
        .iter()
        .map(|p| PlotLine {
            period: p.key.period,
            values: p.values,
        })
        .collect();
    let baseline = if options.baseline {
        let matrix: Vec<[T; HOURS]> = lines.iter().map(|l| l.values).collect();
        Some(baseline_of(&matrix)?)
    } else {
        None
    };
    Ok(PlotData {
        key: key.clone(),
        lines,
        baseline,
        emphasize: options.emphasize,
    })
}

fn nice_ceiling(v: f64) -> f64 {
    if !(v > 0.0) {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for step in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if step * mag >= v {
            return step * mag;
        }
    }
    10.0 * mag
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Deterministic SVG: hour on x, vehicles per hour on y.
pub fn render_svg<T: Scalar>(data: &PlotData<T>, meta: Option<&OutputMeta>) -> String {
    let ymax = nice_ceiling(
        data.lines
            .iter()
            .flat_map(|l| l.values.iter())
            .chain(data.baseline.iter().flatten())
            .map(|v| v.as_f64())
            .fold(0.0, f64::max),
    );
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |h: usize| LEFT + plot_w * h as f64 / (HOURS - 1) as f64;
    let y = |v: f64| TOP + plot_h * (1.0 - v / ymax);
    let points = |values: &[T; HOURS]| {
        values
            .iter()
            .enumerate()
            .map(|(h, v)| format!("{:.2},{:.2}", x(h), y(v.as_f64())))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let data_values = |values: &[T; HOURS]| {
        values
            .iter()
            .map(|v| format!("{:.6}", v.as_f64()))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let key = &data.key;
    let title = escape(&format!(
        "{} direction {} {}",
        key.counter_id, key.direction, key.day_type
    ));
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(meta) = meta {
        let line = meta.comment_block("").trim().to_string();
        let _ = writeln!(s, "<!-- {} -->", escape(&line));
    }
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         data-counter=\"{}\" data-direction=\"{}\" data-daytype=\"{}\">",
        escape(key.counter_id.as_str()),
        key.direction,
        key.day_type
    );
    let _ = writeln!(s, "  <title>{title}</title>");
    let _ = writeln!(
        s,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        s,
        "  <text x=\"{LEFT}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>",
        TOP - 15.0
    );

    s.push_str("  <g class=\"axes\" stroke=\"#444444\" stroke-width=\"1\">\n");
    let _ = writeln!(
        s,
        "    <line x1=\"{LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
        y(0.0),
        x(HOURS - 1),
        y(0.0)
    );
    let _ = writeln!(
        s,
        "    <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{:.2}\"/>",
        y(0.0)
    );
    s.push_str("  </g>\n");
    s.push_str(
        "  <g class=\"labels\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\">\n",
    );
    for h in (0..HOURS).step_by(3) {
        let _ = writeln!(
            s,
            "    <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{h}</text>",
            x(h),
            y(0.0) + 16.0
        );
    }
    for i in 0..=4 {
        let v = ymax * f64::from(i) / 4.0;
        let _ = writeln!(
            s,
            "    <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            y(v) + 4.0,
            v
        );
    }
    let _ = writeln!(
        s,
        "    <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">hour of day</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 6.0
    );
    s.push_str("  </g>\n");

    s.push_str("  <g class=\"periods\" fill=\"none\">\n");
    for (i, line) in data.lines.iter().enumerate() {
        let emphasized = data.emphasize == Some(line.period);
        let (width, opacity) = match data.emphasize {
            None => (1.5, 1.0),
            Some(_) if emphasized => (3.0, 1.0),
            Some(_) => (1.0, 0.35),
        };
        let _ = writeln!(
            s,
            "    <polyline data-period=\"{}\" data-values=\"{}\" stroke=\"{}\" stroke-width=\"{width}\" stroke-opacity=\"{opacity}\"{} points=\"{}\"/>",
            line.period,
            data_values(&line.values),
            PALETTE[i % PALETTE.len()],
            if emphasized { " class=\"emphasized\"" } else { "" },
            points(&line.values)
        );
    }
    s.push_str("  </g>\n");
    if let Some(b) = &data.baseline {
        let _ = writeln!(
            s,
            "  <polyline class=\"baseline\" data-values=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\" stroke-dasharray=\"6 4\" points=\"{}\"/>",
            data_values(b),
            points(b)
        );
    }
    s.push_str("</svg>\n");
    s
}
