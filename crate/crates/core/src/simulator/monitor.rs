use serde::{Deserialize, Serialize};

use super::{EventKind, SimConfig, Trajectory};
use crate::controller::{check_conditions, DilutionSchedule};
use crate::model::ModelParams;
use crate::quantizer::RegionSet;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChatterFlag<T> {
    pub window_start: T,
    pub boundary: usize,
    pub switches: usize,
}

/// Flags every window of `chatter_window` control updates in which the
/// control switched across one boundary more than `chatter_threshold` times.
pub fn detect_chatter<T: Scalar>(traj: &Trajectory<T>, cfg: &SimConfig<T>) -> Vec<ChatterFlag<T>> {
    let width = cfg.dt_control * T::from(cfg.chatter_window).unwrap();
    let mut counts = std::collections::BTreeMap::<(usize, usize), usize>::new();
    for e in &traj.events {
        if let EventKind::ControlSwitch { boundary, .. } = e.kind {
            let w = (e.t / width).floor().to_usize().unwrap_or(0);
            *counts.entry((w, boundary)).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c > cfg.chatter_threshold)
        .map(|((w, boundary), switches)| ChatterFlag {
            window_start: width * T::from(w).unwrap(),
            boundary,
            switches,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Negative,
    Unbounded,
    /// `y` fell across a step that started between `y_b` and `y_a` of the
    /// applied rate.
    InBandDecrease,
    /// `y` fell below a previous value before reaching the target output.
    LyapunovIncrease,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation<T> {
    pub t: T,
    pub kind: ViolationKind,
    pub amount: T,
}

/// Checks positivity and boundedness along the samples, monotonicity of `y`
/// inside the growth band of the applied rate and, when the schedule meets
/// all stabilization conditions, monotone approach to `y_a(D_n)`.
pub fn monitor_lemmas<T: Scalar>(
    traj: &Trajectory<T>,
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
) -> Vec<Violation<T>> {
    let mut out = Vec::new();
    let Some(first) = traj.samples.first() else {
        return out;
    };
    let tol: T = lit(1e-6);
    let (k, s_in) = (p.k(), p.s_in());
    let s_cap = first.state.s.max(s_in) + tol;
    let z_cap = first.state.z(k).max(s_in) + tol;
    for smp in &traj.samples {
        let st = smp.state;
        let neg = st.s.min(st.x);
        if neg < -tol {
            out.push(Violation {
                t: smp.t,
                kind: ViolationKind::Negative,
                amount: -neg,
            });
        }
        let excess = (st.s - s_cap).max(k * st.x - z_cap);
        if excess > T::zero() {
            out.push(Violation {
                t: smp.t,
                kind: ViolationKind::Unbounded,
                amount: excess,
            });
        }
    }

    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if let Ok((ya, yb)) = p.y_equilibria(a.u) {
            if yb < a.y && a.y < ya && b.y < a.y - tol {
                out.push(Violation {
                    t: b.t,
                    kind: ViolationKind::InBandDecrease,
                    amount: a.y - b.y,
                });
            }
        }
    }

    let passing = check_conditions(p, rs, sched).is_ok_and(|r| r.pass);
    if let (true, Ok((target, _))) = (passing, p.y_equilibria(sched.last())) {
        for w in traj.samples.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.y < target - tol && b.y < a.y - tol {
                out.push(Violation {
                    t: b.t,
                    kind: ViolationKind::LyapunovIncrease,
                    amount: a.y - b.y,
                });
            }
        }
    }
    out
}
