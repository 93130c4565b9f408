//! SVG figures of a trace, one file per figure family.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use super::trace::{SimTrace, TraceRow};
use crate::error::{Error, Result};

const SIZE: (u32, u32) = (800, 480);

/// Line style of one series.
#[derive(Clone, Copy)]
enum Stroke {
    Solid,
    Dotted,
}

struct Series {
    label: String,
    color: RGBColor,
    stroke: Stroke,
    points: Vec<(f64, f64)>,
}

struct Figure<'a> {
    file: &'a str,
    title: String,
    y_desc: &'a str,
    series: Vec<Series>,
}

const PALETTE: [RGBColor; 9] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
    RGBColor(23, 190, 207),
];

fn series(
    trace: &SimTrace,
    label: &str,
    color: RGBColor,
    stroke: Stroke,
    f: impl Fn(&TraceRow) -> f64,
) -> Series {
    Series {
        label: label.to_string(),
        color,
        stroke,
        points: trace.rows.iter().map(|r| (r.t, f(r))).collect(),
    }
}

fn horizontal(trace: &SimTrace, label: &str, y: f64) -> Series {
    let (t0, t1) = time_span(trace);
    Series {
        label: label.to_string(),
        color: BLACK,
        stroke: Stroke::Dotted,
        points: vec![(t0, y), (t1, y)],
    }
}

fn time_span(trace: &SimTrace) -> (f64, f64) {
    let t0 = trace.rows.first().map_or(0.0, |r| r.t);
    let t1 = trace.rows.last().map_or(0.0, |r| r.t);
    (t0, t1)
}

/// Range covering `lo..hi` with a margin; widened when degenerate.
fn padded(lo: f64, hi: f64) -> std::ops::Range<f64> {
    if !(lo.is_finite() && hi.is_finite()) {
        return -1.0..1.0;
    }
    let span = hi - lo;
    if span <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
        let w = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return lo - w..hi + w;
    }
    lo - 0.05 * span..hi + 0.05 * span
}

fn draw(fig: &Figure, trace: &SimTrace, path: &Path) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| Error::io(path, std::io::Error::other(e.to_string()));
    let (t0, t1) = time_span(trace);
    let x = padded(t0, t1);
    let x = if t1 > t0 { t0..t1 } else { x };
    let (lo, hi) = fig
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    let y = padded(lo, hi);

    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(&fig.title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x, y)
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .y_desc(fig.y_desc)
        .draw()
        .map_err(|e| err(&e))?;

    for s in &fig.series {
        let style = ShapeStyle::from(s.color).stroke_width(2);
        let pts = s.points.iter().copied();
        let anno = match s.stroke {
            Stroke::Solid => chart.draw_series(LineSeries::new(pts, style)),
            Stroke::Dotted => chart.draw_series(DashedLineSeries::new(pts, 3, 4, style)),
        }
        .map_err(|e| err(&e))?;
        let color = s.color;
        anno.label(s.label.as_str()).legend(move |(x, y)| {
            PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2))
        });
        if s.points.len() == 1 {
            chart
                .draw_series(std::iter::once(Circle::new(
                    s.points[0],
                    3,
                    s.color.filled(),
                )))
                .map_err(|e| err(&e))?;
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}

fn figures(trace: &SimTrace) -> Vec<Figure<'static>> {
    let name = &trace.controller;
    let mut figs = Vec::new();
    let lambda: [fn(&TraceRow) -> f64; 2] = [|r| r.lambda1, |r| r.lambda2];
    for (i, f) in lambda.into_iter().enumerate() {
        figs.push(Figure {
            file: ["force_arm1.svg", "force_arm2.svg"][i],
            title: format!("{name}: contact force, arm {}", i + 1),
            y_desc: "force [N]",
            series: vec![
                series(trace, "response", PALETTE[0], Stroke::Solid, f),
                horizontal(trace, "setpoint", trace.lambda_d[i]),
            ],
        });
    }
    figs.push(Figure {
        file: "angles.svg",
        title: format!("{name}: joint angles"),
        y_desc: "angle [rad]",
        series: vec![
            series(trace, "theta1", PALETTE[0], Stroke::Solid, |r| r.theta1),
            series(trace, "theta2", PALETTE[1], Stroke::Solid, |r| r.theta2),
            horizontal(trace, "theta1 setpoint", trace.theta_d[0]),
            horizontal(trace, "theta2 setpoint", trace.theta_d[1]),
        ],
    });
    let names = [
        "|W|", "|eps|", "|m|", "|U1|", "|U2|", "|pi1|", "|pi2|", "|J1|", "|J2|",
    ];
    figs.push(Figure {
        file: "estimate_norms.svg",
        title: format!("{name}: adaptive estimate norms"),
        y_desc: "norm",
        series: names
            .iter()
            .enumerate()
            .map(|(k, n)| {
                series(trace, n, PALETTE[k], Stroke::Solid, move |r| {
                    r.estimate_norms()[k]
                })
            })
            .collect(),
    });
    type Column = fn(&TraceRow) -> f64;
    let torque: [(Column, Column); 2] = [
        (|r| r.tau1_cmd, |r| r.tau1_act),
        (|r| r.tau2_cmd, |r| r.tau2_act),
    ];
    for (i, (cmd, act)) in torque.into_iter().enumerate() {
        figs.push(Figure {
            file: ["root_torque_arm1.svg", "root_torque_arm2.svg"][i],
            title: format!("{name}: root control signal, arm {}", i + 1),
            y_desc: "torque [N m]",
            series: vec![
                series(trace, "actuator output", PALETTE[0], Stroke::Solid, act),
                series(trace, "commanded", PALETTE[1], Stroke::Dotted, cmd),
            ],
        });
    }
    figs.push(Figure {
        file: "end_effector_force.svg",
        title: format!("{name}: end-effector control signal"),
        y_desc: "force [N]",
        series: vec![
            series(trace, "actuator output", PALETTE[0], Stroke::Solid, |r| {
                r.v_act
            }),
            series(trace, "commanded", PALETTE[1], Stroke::Dotted, |r| r.v_cmd),
        ],
    });
    figs
}

/// Write every figure family of `trace` into `dir` and return the paths.
pub fn emit_plots(trace: &SimTrace, dir: &Path) -> Result<Vec<PathBuf>> {
    if trace.rows.is_empty() {
        return Err(Error::Config("cannot plot an empty trace".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    figures(trace)
        .iter()
        .map(|fig| {
            let path = dir.join(fig.file);
            draw(fig, trace, &path)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> TraceRow {
        TraceRow {
            t,
            lambda1: -0.5 - t,
            lambda2: 0.5 + t,
            tau1_cmd: 3.0 * t,
            tau1_act: 2.0f64.min(3.0 * t),
            ..Default::default()
        }
    }

    #[test]
    fn seven_files_with_setpoint_line() {
        let dir = tempfile::tempdir().unwrap();
        let mut tr = SimTrace::new([-0.5, 0.5], [0.05, -0.06], "nabfc");
        for i in 0..50 {
            tr.push(row(i as f64 * 0.01));
        }
        let files = emit_plots(&tr, dir.path()).unwrap();
        assert_eq!(files.len(), 7);
        for f in &files {
            assert!(std::fs::read_to_string(f).unwrap().starts_with("<svg"));
        }
        let force = std::fs::read_to_string(dir.path().join("force_arm1.svg")).unwrap();
        assert!(force.contains("setpoint"));
    }

    #[test]
    fn single_row_does_not_panic() {
        let dir = tempfile::tempdir().unwrap();
        let mut tr = SimTrace::new([-0.5, 0.5], [0.05, -0.06], "pd");
        tr.push(row(0.0));
        assert_eq!(emit_plots(&tr, dir.path()).unwrap().len(), 7);
    }

    #[test]
    fn empty_trace_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let tr = SimTrace::new([-0.5, 0.5], [0.05, -0.06], "pd");
        assert!(emit_plots(&tr, dir.path()).is_err());
    }

    #[test]
    fn degenerate_ranges_are_widened() {
        let r = padded(0.0, 0.0);
        assert!(r.start < 0.0 && r.end > 0.0);
        let r = padded(0.5, 0.5);
        assert!(r.start < 0.5 && r.end > 0.5);
        let r = padded(0.0, 1.0);
        assert!((r.start + 0.05).abs() < 1e-12);
    }
}
