use std::fmt::Write as _;
use std::io::Write;

use super::sweep::SweepSeries;
use super::temporal::{Statistic, TemporalResult};
use crate::error::Result;

/// Long-format series CSV: `series,x,mh,su,mhsu`, `NA` where a series does
/// not track a metric.
pub fn write_sweep_csv(series: &[SweepSeries], output: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(["series", "x", "mh", "su", "mhsu"])?;
    let opt = |v: Option<usize>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
    for s in series {
        for p in &s.points {
            writer.write_record([
                s.label.clone(),
                p.x.to_string(),
                opt(p.mh),
                opt(p.su),
                p.mhsu.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_temporal_csv(result: &TemporalResult, output: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record([
        "bucket",
        "label",
        "start",
        "end",
        "active",
        "mh",
        "su",
        "mhsu",
        "mh_rate",
        "su_rate",
        "mhsu_rate",
    ])?;
    for b in &result.buckets {
        writer.write_record([
            b.index.to_string(),
            b.label.clone(),
            b.start.to_string(),
            b.end.to_string(),
            b.active_clients.to_string(),
            b.mh_count.to_string(),
            b.su_count.to_string(),
            b.mhsu_count.to_string(),
            format!("{:.6}", b.mh_rate),
            format!("{:.6}", b.su_rate),
            format!("{:.6}", b.mhsu_rate),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    "#7f7f7f",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Five ticks of a round step (1, 2, 2.5 or 5 times a power of ten) that
/// cover `max`.
fn nice_ceiling(max: f64) -> f64 {
    if max <= 0.0 {
        return 1.0;
    }
    let step = max / 5.0;
    let magnitude = 10f64.powf(step.log10().floor());
    let nice = [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * magnitude)
        .find(|&s| s >= step)
        .unwrap_or(10.0 * magnitude);
    nice * 5.0
}

fn fmt_tick(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

struct Frame {
    svg: String,
    plot_w: f64,
    plot_h: f64,
    y_max: f64,
}

impl Frame {
    fn new(title: &str, x_label: &str, y_label: &str, y_max: f64) -> Self {
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(title)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 15.0,
            escape(x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0,
            escape(y_label)
        );
        let frame = Self {
            svg,
            plot_w,
            plot_h,
            y_max,
        };
        frame.with_axes()
    }

    fn with_axes(mut self) -> Self {
        let (x0, y0) = (LEFT, TOP + self.plot_h);
        let _ = writeln!(
            self.svg,
            r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{:.1}" y2="{y0:.1}" stroke="black"/>"#,
            x0 + self.plot_w
        );
        let _ = writeln!(
            self.svg,
            r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{TOP:.1}" stroke="black"/>"#
        );
        for i in 0..=5 {
            let v = self.y_max * f64::from(i) / 5.0;
            let y = self.y(v);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
                x0,
                x0 + self.plot_w
            );
            let _ = writeln!(
                self.svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                fmt_tick(v)
            );
        }
        self
    }

    fn y(&self, v: f64) -> f64 {
        TOP + self.plot_h - v / self.y_max * self.plot_h
    }

    fn x_tick(&mut self, x: f64, label: &str) {
        let y0 = TOP + self.plot_h;
        let _ = writeln!(
            self.svg,
            r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#,
            y0 + 4.0
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            escape(label)
        );
    }

    fn legend(&mut self, row: usize, color: &str, label: &str) {
        let x = LEFT + self.plot_w + 15.0;
        let y = TOP + 10.0 + row as f64 * 18.0;
        let _ = writeln!(
            self.svg,
            r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{color}"/>"#,
            y - 10.0
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="{:.1}" y="{y:.1}">{}</text>"#,
            x + 18.0,
            escape(label)
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

/// Line chart of one or more sweep series, one line per tracked metric.
pub fn sweep_svg(series: &[SweepSeries]) -> String {
    let xs: Vec<u32> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.x))
        .collect();
    let (x_min, x_max) = (
        xs.iter().copied().min().unwrap_or(0) as f64,
        xs.iter().copied().max().unwrap_or(1) as f64,
    );
    let y_peak = series
        .iter()
        .flat_map(|s| s.points.iter())
        .flat_map(|p| [p.mh.unwrap_or(0), p.su.unwrap_or(0), p.mhsu])
        .max()
        .unwrap_or(0) as f64;
    let kind = series.first().map(|s| s.kind);
    let x_label = series.first().map_or("x", |s| s.x_label.as_str());
    let title = kind.map_or_else(|| "sweep".to_string(), |k| format!("{k} sweep"));
    let mut frame = Frame::new(&title, x_label, "patients detected", nice_ceiling(y_peak));
    let x_range = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = frame.plot_w;
    let px = |x: u32| LEFT + (f64::from(x) - x_min) / x_range * plot_w;

    let mut ticks: Vec<u32> = xs.clone();
    ticks.sort_unstable();
    ticks.dedup();
    for &x in &ticks {
        let pos = px(x);
        frame.x_tick(pos, &x.to_string());
    }

    let mut row = 0;
    for s in series {
        let metrics: [(&str, Vec<Option<usize>>); 3] = [
            ("MH", s.points.iter().map(|p| p.mh).collect()),
            ("SU", s.points.iter().map(|p| p.su).collect()),
            ("MHSU", s.points.iter().map(|p| Some(p.mhsu)).collect()),
        ];
        for (name, values) in metrics {
            if values.iter().any(Option::is_none) {
                continue;
            }
            let color = PALETTE[row % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .zip(&values)
                .map(|(p, v)| format!("{:.1},{:.1}", px(p.x), frame.y(v.unwrap_or(0) as f64)))
                .collect();
            let _ = writeln!(
                frame.svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            );
            for pt in &path {
                let (cx, cy) = pt.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(
                    frame.svg,
                    r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#
                );
            }
            let label = if series.len() > 1 {
                format!("{name} ({})", s.label)
            } else {
                name.to_string()
            };
            frame.legend(row, color, &label);
            row += 1;
        }
    }
    frame.finish()
}

/// Grouped bar chart of MH/SU/MHSU per bucket.
pub fn temporal_svg(result: &TemporalResult) -> String {
    let statistic = result.spec.statistic;
    let peak = result
        .buckets
        .iter()
        .flat_map(|b| b.values(statistic))
        .fold(0.0, f64::max);
    let y_max = match statistic {
        Statistic::Frequency => nice_ceiling(peak),
        Statistic::Rate => 1.0,
    };
    let y_label = match statistic {
        Statistic::Frequency => "patients",
        Statistic::Rate => "proportion of active patients",
    };
    let title = format!(
        "[{}, {}] {:?}",
        result.spec.unit, result.spec.span, statistic
    )
    .to_lowercase();
    let mut frame = Frame::new(&title, result.spec.unit.as_str(), y_label, y_max);
    let n = result.buckets.len().max(1) as f64;
    let slot = frame.plot_w / n;
    let bar = slot * 0.8 / 3.0;
    for (i, b) in result.buckets.iter().enumerate() {
        let left = LEFT + i as f64 * slot + slot * 0.1;
        for (j, v) in b.values(statistic).into_iter().enumerate() {
            let y = frame.y(v);
            let _ = writeln!(
                frame.svg,
                r#"<rect x="{:.1}" y="{y:.1}" width="{bar:.1}" height="{:.1}" fill="{}"/>"#,
                left + j as f64 * bar,
                TOP + frame.plot_h - y,
                PALETTE[j]
            );
        }
        frame.x_tick(left + 1.5 * bar, &b.label);
    }
    for (row, name) in ["MH", "SU", "MHSU"].into_iter().enumerate() {
        frame.legend(row, PALETTE[row], name);
    }
    frame.finish()
}
