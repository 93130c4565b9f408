use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controllers::{Command, LoopSignals};
use crate::error::{Error, Result};
use crate::monitor::EnergyReport;
use crate::plant::{ContactForces, PlantInputs, PlantState};

/// One logged sample. Field order is the CSV column order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub y_m: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub v_cmd: f64,
    pub v_act: f64,
    pub tau1_cmd: f64,
    pub tau1_act: f64,
    pub tau2_cmd: f64,
    pub tau2_act: f64,
    pub z1: f64,
    pub z3_1: f64,
    pub z3_2: f64,
    pub s: f64,
    pub e: f64,
    pub c: f64,
    pub h_meas: f64,
    pub phi1: f64,
    pub residual1: f64,
    pub residual2: f64,
    pub norm_w: f64,
    pub norm_eps: f64,
    pub norm_m: f64,
    pub norm_u1: f64,
    pub norm_u2: f64,
    pub norm_pi1: f64,
    pub norm_pi2: f64,
    pub norm_j1: f64,
    pub norm_j2: f64,
}

pub const COLUMNS: [&str; 31] = [
    "t",
    "theta1",
    "theta2",
    "y_m",
    "lambda1",
    "lambda2",
    "v_cmd",
    "v_act",
    "tau1_cmd",
    "tau1_act",
    "tau2_cmd",
    "tau2_act",
    "z1",
    "z3_1",
    "z3_2",
    "s",
    "e",
    "c",
    "h_meas",
    "phi1",
    "residual1",
    "residual2",
    "norm_w",
    "norm_eps",
    "norm_m",
    "norm_u1",
    "norm_u2",
    "norm_pi1",
    "norm_pi2",
    "norm_j1",
    "norm_j2",
];

impl TraceRow {
    pub fn new(
        state: &PlantState,
        contact: &ContactForces,
        cmd: &Command,
        act: &PlantInputs,
        signals: &LoopSignals,
        report: &EnergyReport,
    ) -> Self {
        let n = report.estimate_norms;
        Self {
            t: state.t,
            theta1: state.theta[0],
            theta2: state.theta[1],
            y_m: state.y_m,
            lambda1: contact.lambda[0],
            lambda2: contact.lambda[1],
            v_cmd: cmd.force,
            v_act: act.force,
            tau1_cmd: cmd.torque[0],
            tau1_act: act.torque[0],
            tau2_cmd: cmd.torque[1],
            tau2_act: act.torque[1],
            z1: signals.z1,
            z3_1: signals.z3[0],
            z3_2: signals.z3[1],
            s: signals.s,
            e: report.e,
            c: report.c,
            h_meas: report.h_meas,
            phi1: report.phi1,
            residual1: report.constraint_residual[0],
            residual2: report.constraint_residual[1],
            norm_w: n[0],
            norm_eps: n[1],
            norm_m: n[2],
            norm_u1: n[3],
            norm_u2: n[4],
            norm_pi1: n[5],
            norm_pi2: n[6],
            norm_j1: n[7],
            norm_j2: n[8],
        }
    }

    pub fn lambda(&self) -> [f64; 2] {
        [self.lambda1, self.lambda2]
    }

    pub fn theta(&self) -> [f64; 2] {
        [self.theta1, self.theta2]
    }

    pub fn estimate_norms(&self) -> [f64; 9] {
        [
            self.norm_w,
            self.norm_eps,
            self.norm_m,
            self.norm_u1,
            self.norm_u2,
            self.norm_pi1,
            self.norm_pi2,
            self.norm_j1,
            self.norm_j2,
        ]
    }
}

/// Sampled closed-loop history plus the targets it is judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub controller: String,
    pub lambda_d: [f64; 2],
    pub theta_d: [f64; 2],
    pub rows: Vec<TraceRow>,
}

impl SimTrace {
    pub fn new(lambda_d: [f64; 2], theta_d: [f64; 2], controller: &str) -> Self {
        Self {
            controller: controller.to_string(),
            lambda_d,
            theta_d,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Write a `#`-prefixed metadata line, the header and one line per row.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut out = out;
        writeln!(
            out,
            "# controller={} lambda_d={},{} theta_d={},{}",
            self.controller, self.lambda_d[0], self.lambda_d[1], self.theta_d[0], self.theta_d[1]
        )?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut text = String::new();
        let mut input = input;
        input
            .read_to_string(&mut text)
            .map_err(|e| Error::Config(format!("unreadable trace: {e}")))?;
        let (meta, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::Config("trace is empty".into()))?;
        let meta = meta
            .strip_prefix("# ")
            .ok_or_else(|| Error::Config("trace lacks its metadata line".into()))?;
        let mut controller = None;
        let mut lambda_d = None;
        let mut theta_d = None;
        for item in meta.split_whitespace() {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad metadata item `{item}`")))?;
            match key {
                "controller" => controller = Some(value.to_string()),
                "lambda_d" => lambda_d = Some(parse_pair(value)?),
                "theta_d" => theta_d = Some(parse_pair(value)?),
                _ => {}
            }
        }
        let missing = |k: &str| Error::Config(format!("trace metadata lacks `{k}`"));
        let mut trace = SimTrace::new(
            lambda_d.ok_or_else(|| missing("lambda_d"))?,
            theta_d.ok_or_else(|| missing("theta_d"))?,
            &controller.ok_or_else(|| missing("controller"))?,
        );
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        for row in rdr.deserialize() {
            trace.push(row.map_err(|e| Error::Config(format!("bad trace row: {e}")))?);
        }
        Ok(trace)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2]> {
    let bad = || Error::Config(format!("bad number pair `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok([a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?])
}

/// Write `trace` to `path` as CSV.
pub fn emit_csv(trace: &SimTrace, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = std::io::BufWriter::new(file);
    trace.write_csv(writer).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("csv: {other:?}")),
    })
}

/// Time of the last entry into the band `|x - target| <= tol` that is never
/// left again; `None` when the final sample is outside the band.
pub fn settling_time(t: &[f64], x: &[f64], target: f64, tol: f64) -> Option<f64> {
    let inside = |v: f64| (v - target).abs() <= tol;
    match x.iter().rposition(|&v| !inside(v)) {
        None => t.first().copied(),
        Some(i) if i + 1 < x.len() => Some(t[i + 1]),
        Some(_) => None,
    }
}

/// Largest relative excess of `|x|` over `|target|` after `|x| - |target|`
/// first changes sign (or first reaches zero); zero when it never does.
pub fn overshoot(x: &[f64], target: f64) -> f64 {
    let m = target.abs();
    let Some(&x0) = x.first() else {
        return 0.0;
    };
    let above = x0.abs() > m;
    let Some(first) = x
        .iter()
        .position(|v| if above { v.abs() <= m } else { v.abs() >= m })
    else {
        return 0.0;
    };
    x[first..]
        .iter()
        .map(|v| (v.abs() - m) / m)
        .fold(0.0, f64::max)
}

/// Trapezoidal integral of `|x|` over the sample times.
pub fn effort(t: &[f64], x: &[f64]) -> f64 {
    t.windows(2)
        .zip(x.windows(2))
        .map(|(tt, xx)| 0.5 * (tt[1] - tt[0]) * (xx[0].abs() + xx[1].abs()))
        .sum()
}

/// Relative band used for every settling figure.
pub const SETTLING_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub controller: String,
    pub force_settling: [Option<f64>; 2],
    pub angle_settling: [Option<f64>; 2],
    pub force_overshoot: [f64; 2],
    pub peak_force_cmd: f64,
    pub peak_torque_cmd: [f64; 2],
    pub effort_force: f64,
    pub effort_torque: [f64; 2],
    pub max_residual: f64,
}

impl RunSummary {
    /// Later of the two contact-force settling times.
    pub fn settling(&self) -> Option<f64> {
        match self.force_settling {
            [Some(a), Some(b)] => Some(a.max(b)),
            _ => None,
        }
    }
}

pub fn summarize(trace: &SimTrace) -> RunSummary {
    let t = trace.times();
    let lam = [trace.column(|r| r.lambda1), trace.column(|r| r.lambda2)];
    let th = [trace.column(|r| r.theta1), trace.column(|r| r.theta2)];
    let tau = [trace.column(|r| r.tau1_cmd), trace.column(|r| r.tau2_cmd)];
    let v = trace.column(|r| r.v_cmd);
    let peak = |x: &[f64]| x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    RunSummary {
        controller: trace.controller.clone(),
        force_settling: [0, 1].map(|i| {
            settling_time(
                &t,
                &lam[i],
                trace.lambda_d[i],
                SETTLING_BAND * trace.lambda_d[i].abs(),
            )
        }),
        angle_settling: [0, 1].map(|i| {
            settling_time(
                &t,
                &th[i],
                trace.theta_d[i],
                SETTLING_BAND * trace.theta_d[i].abs(),
            )
        }),
        force_overshoot: [0, 1].map(|i| overshoot(&lam[i], trace.lambda_d[i])),
        peak_force_cmd: peak(&v),
        peak_torque_cmd: [peak(&tau[0]), peak(&tau[1])],
        effort_force: effort(&t, &v),
        effort_torque: [effort(&t, &tau[0]), effort(&t, &tau[1])],
        max_residual: trace
            .rows
            .iter()
            .map(|r| r.residual1.abs().max(r.residual2.abs()))
            .fold(0.0, f64::max),
    }
}

fn fmt_time(t: Option<f64>) -> String {
    t.map(|v| format!("{v:.3}"))
        .unwrap_or_else(|| "never".into())
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "controller        {}", self.controller)?;
        writeln!(
            f,
            "force settling    {} / {} s",
            fmt_time(self.force_settling[0]),
            fmt_time(self.force_settling[1])
        )?;
        writeln!(
            f,
            "angle settling    {} / {} s",
            fmt_time(self.angle_settling[0]),
            fmt_time(self.angle_settling[1])
        )?;
        writeln!(
            f,
            "force overshoot   {:.2}% / {:.2}%",
            100.0 * self.force_overshoot[0],
            100.0 * self.force_overshoot[1]
        )?;
        writeln!(
            f,
            "peak commands     v {:.4} N, tau {:.4} / {:.4} N·m",
            self.peak_force_cmd, self.peak_torque_cmd[0], self.peak_torque_cmd[1]
        )?;
        writeln!(
            f,
            "effort            v {:.4} N·s, tau {:.4} / {:.4} N·m·s",
            self.effort_force, self.effort_torque[0], self.effort_torque[1]
        )?;
        write!(f, "max residual      {:.3e} m", self.max_residual)
    }
}

/// Side-by-side summary table of at least two traces with one setpoint.
pub fn compare(traces: &[SimTrace]) -> Result<String> {
    if traces.len() < 2 {
        return Err(Error::Compare(format!(
            "need at least two traces, got {}",
            traces.len()
        )));
    }
    let first = &traces[0];
    for t in &traces[1..] {
        if t.lambda_d != first.lambda_d || t.theta_d != first.theta_d {
            return Err(Error::Compare(format!(
                "setpoint mismatch: `{}` targets lambda_d {:?}, `{}` targets {:?}",
                first.controller, first.lambda_d, t.controller, t.lambda_d
            )));
        }
    }
    let mut out = format!(
        "{:<10} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "controller", "settling_s", "overshoot_%", "effort_v", "effort_tau1", "effort_tau2"
    );
    for t in traces {
        let s = summarize(t);
        out.push_str(&format!(
            "{:<10} {:>12} {:>12.2} {:>12.4} {:>12.4} {:>12.4}\n",
            s.controller,
            fmt_time(s.settling()),
            100.0 * s.force_overshoot[0].max(s.force_overshoot[1]),
            s.effort_force,
            s.effort_torque[0],
            s.effort_torque[1],
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settling_examples() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(
            settling_time(&t, &[0.0, 0.9, 1.2, 0.98, 1.01], 1.0, 0.05),
            Some(3.0)
        );
        assert_eq!(settling_time(&t, &[1.0; 5], 1.0, 0.05), Some(0.0));
        assert_eq!(
            settling_time(&t, &[1.0, 1.0, 1.0, 1.0, 2.0], 1.0, 0.05),
            None
        );
    }

    #[test]
    fn overshoot_examples() {
        assert_eq!(overshoot(&[0.0, -0.2, -0.4], -0.5), 0.0);
        let o = overshoot(&[0.0, -0.6, -0.5, -0.55], -0.5);
        assert!((o - 0.2).abs() < 1e-12);
        // starting above the target, the excess before the first crossing is ignored
        let o = overshoot(&[-1.8, -1.2, -0.45, -0.52, -0.5], -0.5);
        assert!((o - 0.04).abs() < 1e-12);
        assert_eq!(overshoot(&[-1.8, -1.0, -0.6], -0.5), 0.0);
        assert_eq!(overshoot(&[], -0.5), 0.0);
    }

    #[test]
    fn effort_of_constant() {
        assert!((effort(&[0.0, 0.5, 1.0], &[-2.0, -2.0, -2.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_trace_is_header_only_and_round_trips() {
        let tr = SimTrace::new([-0.5, 0.5], [0.1, -0.1], "pd");
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
        assert_eq!(SimTrace::read_csv(&buf[..]).unwrap(), tr);
    }

    #[test]
    fn compare_needs_two_matching() {
        let a = SimTrace::new([-0.5, 0.5], [0.1, -0.1], "pd");
        assert!(compare(std::slice::from_ref(&a)).is_err());
        let b = SimTrace::new([-0.4, 0.4], [0.1, -0.1], "pds");
        assert!(compare(&[a.clone(), b]).is_err());
        let c = SimTrace::new([-0.5, 0.5], [0.1, -0.1], "pds");
        assert!(compare(&[a, c]).is_ok());
    }
}
