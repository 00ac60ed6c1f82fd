use std::fmt::Write;

use super::Trajectory;
use crate::scalar::{f, Scalar};

/// Samples as CSV with header `t,s,x,y,u,domain`.
pub fn trajectory_csv<T: Scalar>(traj: &Trajectory<T>) -> String {
    let mut out = String::from("t,s,x,y,u,domain\n");
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            f(s.t),
            f(s.state.s),
            f(s.state.x),
            f(s.y),
            f(s.u),
            s.label.id()
        );
    }
    out
}

/// Event log, one JSON object per line.
pub fn events_jsonl<T: Scalar>(traj: &Trajectory<T>) -> String {
    let mut out = String::new();
    for e in &traj.events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}

/// Gnuplot script plotting `y` and `u` against time from `csv_name`.
pub fn gnuplot_script(csv_name: &str, thresholds: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set key autotitle columnhead");
    let _ = writeln!(out, "set xlabel 't (d)'");
    let _ = writeln!(out, "set ylabel 'y'");
    let _ = writeln!(out, "set y2label 'u (1/d)'");
    let _ = writeln!(out, "set y2tics");
    for th in thresholds {
        let _ = writeln!(
            out,
            "set arrow from graph 0, first {th} to graph 1, first {th} nohead dt 2"
        );
    }
    let _ = writeln!(
        out,
        "plot '{csv_name}' using 1:4 with lines title 'y', '' using 1:5 axes x1y2 with steps title 'u'"
    );
    out
}
