//! Closed-loop simulation under the region-wise control law.
//!
//! Two semantics are available. [`SimMode::PerfectEvent`] integrates the
//! Filippov system: crossings of region thresholds are located by bisection
//! and, where both neighbouring fields push towards a threshold, the state
//! slides along it with the exact convex-combination field.
//! [`SimMode::DiscreteRandom`] samples the measurement every `dt_control`
//! and, inside an overlap, picks one of the two neighbouring rates at random.

mod batch;
mod export;
mod filippov;
mod monitor;

pub use batch::{batch_simulate, batch_simulate_with_trajectories, grid, run_rng, BatchRun};
pub use export::{events_jsonl, gnuplot_script, trajectory_csv};
pub use filippov::{filippov_slide, sliding_step, sliding_weight, SlidingState};
pub use monitor::{detect_chatter, monitor_lemmas, ChatterFlag, Violation, ViolationKind};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{DilutionSchedule, Resolver};
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::quantizer::{DomainLabel, QuantizerKind, RegionSet};
use crate::scalar::{f, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    PerfectEvent,
    DiscreteRandom,
}

impl SimMode {
    /// Event-driven for abutting regions, randomized for overlapping ones.
    pub fn default_for<T: Scalar>(rs: &RegionSet<T>) -> Self {
        match rs.kind() {
            QuantizerKind::Perfect => SimMode::PerfectEvent,
            QuantizerKind::Uncertain => SimMode::DiscreteRandom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default)]
pub struct SimConfig<T> {
    pub mode: SimMode,
    /// Control update period (d).
    pub dt_control: T,
    /// Fixed RK4 step (d).
    pub integrator_step: T,
    /// Tolerance on `y` when locating a threshold crossing.
    pub event_tol: T,
    pub t_max: T,
    /// Distance to an equilibrium counted as converged.
    pub convergence_tol: T,
    /// Window length, in control updates, for chatter detection.
    pub chatter_window: usize,
    /// Switches per window above which a boundary is flagged.
    pub chatter_threshold: usize,
    pub seed: u64,
    /// Choice of rate inside an overlap.
    pub resolver: Resolver<T>,
    /// Half-width in y of the band around a threshold where a terminal
    /// state counts as sliding.
    pub sliding_band: T,
}

impl<T: Scalar> Default for SimConfig<T> {
    fn default() -> Self {
        SimConfig {
            mode: SimMode::DiscreteRandom,
            dt_control: lit(0.05),
            integrator_step: lit(1e-3),
            event_tol: lit(1e-9),
            t_max: lit(300.0),
            convergence_tol: lit(1e-3),
            chatter_window: 50,
            chatter_threshold: 20,
            seed: 0,
            resolver: Resolver::default(),
            sliding_band: lit(0.05),
        }
    }
}

impl<T: Scalar> SimConfig<T> {
    pub fn for_regions(rs: &RegionSet<T>) -> Self {
        SimConfig {
            mode: SimMode::default_for(rs),
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("dt_control", self.dt_control),
            ("integrator_step", self.integrator_step),
            ("event_tol", self.event_tol),
            ("t_max", self.t_max),
            ("convergence_tol", self.convergence_tol),
            ("sliding_band", self.sliding_band),
        ];
        for (name, v) in pos {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain(
                    "simulation config",
                    format!("{name} = {} must be positive", f(v)),
                ));
            }
        }
        if self.chatter_window == 0 || self.chatter_threshold == 0 {
            return Err(Error::domain(
                "simulation config",
                "chatter window and threshold must be positive",
            ));
        }
        if self.dt_control < self.integrator_step {
            return Err(Error::domain(
                "simulation config",
                "dt_control must be at least the integrator step",
            ));
        }
        match self.resolver {
            Resolver::RandomPick { p } if !(p >= T::zero() && p <= T::one()) => Err(Error::domain(
                "resolver",
                "pick probability must lie in [0, 1]",
            )),
            Resolver::Convex { lambda } if !(lambda >= T::zero() && lambda <= T::one()) => Err(
                Error::domain("resolver", "convex weight must lie in [0, 1]"),
            ),
            _ => Ok(()),
        }
    }

    fn control_steps(&self) -> (usize, usize, T) {
        let n_ctrl = (self.t_max / self.dt_control)
            .round()
            .to_usize()
            .unwrap_or(0)
            .max(1);
        let sub = (self.dt_control / self.integrator_step)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        (n_ctrl, sub, self.dt_control / T::from(sub).unwrap())
    }
}

/// One recorded point; `u` is the rate applied from `t` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub t: T,
    pub state: State<T>,
    pub y: T,
    pub u: T,
    pub label: DomainLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind<T> {
    DomainChange {
        from: DomainLabel,
        to: DomainLabel,
    },
    /// Applied rate jumped across switching domain `boundary`.
    ControlSwitch {
        boundary: usize,
        from: T,
        to: T,
    },
    SlidingEntry {
        boundary: usize,
    },
    SlidingExit {
        boundary: usize,
        upward: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub t: T,
    #[serde(flatten)]
    pub kind: EventKind<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub events: Vec<Event<T>>,
}

impl<T: Scalar> Trajectory<T> {
    fn push(&mut self, s: Sample<T>) {
        match self.samples.last_mut() {
            Some(last) if s.t <= last.t => *last = s,
            _ => self.samples.push(s),
        }
    }

    fn event(&mut self, t: T, kind: EventKind<T>) {
        self.events.push(Event { t, kind });
    }

    pub fn last(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    ConvergedToTarget,
    /// Resting on switching domain `boundary` (between regions `boundary`
    /// and `boundary + 1`) with `z = s_in`.
    SlidingEquilibrium {
        boundary: usize,
    },
    /// Resting at the operating point of region `region`.
    TrappedAt {
        region: usize,
    },
    Washout,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome<T> {
    pub classification: Classification,
    pub limit_point: State<T>,
    pub final_label: DomainLabel,
    pub initial_label: DomainLabel,
    /// Distance to the operating point of the last rate, when it exists.
    pub distance_to_target: Option<T>,
    /// Mean time spent in each region per completed visit.
    pub escape_times: Vec<Option<T>>,
    pub switch_count: usize,
    /// Domain-to-domain moves, adjacent steps only, sorted.
    pub transitions: Vec<(DomainLabel, DomainLabel)>,
}

pub(crate) fn rk4<T: Scalar, F: Fn(&State<T>) -> (T, T)>(
    xi: &State<T>,
    h: T,
    field: F,
) -> State<T> {
    let two: T = lit(2.0);
    let six: T = lit(6.0);
    let k1 = field(xi);
    let k2 = field(&xi.axpy(h / two, k1));
    let k3 = field(&xi.axpy(h / two, k2));
    let k4 = field(&xi.axpy(h, k3));
    State::new(
        xi.s + h / six * (k1.0 + two * k2.0 + two * k3.0 + k4.0),
        xi.x + h / six * (k1.1 + two * k2.1 + two * k3.1 + k4.1),
    )
}

/// Simulates one trajectory with the random stream of run `(0, 0)`.
pub fn simulate<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    xi0: State<T>,
    cfg: &SimConfig<T>,
) -> Result<(Trajectory<T>, SimOutcome<T>)> {
    let mut rng = run_rng(cfg.seed, 0, 0);
    simulate_with_rng(p, rs, sched, xi0, cfg, &mut rng)
}

pub fn simulate_with_rng<T: Scalar, R: Rng + ?Sized>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    xi0: State<T>,
    cfg: &SimConfig<T>,
    rng: &mut R,
) -> Result<(Trajectory<T>, SimOutcome<T>)> {
    sched.check_len(rs.n())?;
    cfg.validate()?;
    if !(xi0.s > T::zero() && xi0.x > T::zero()) || !xi0.is_finite() {
        return Err(Error::domain(
            "initial state",
            format!(
                "({}, {}) must lie in the open positive orthant",
                f(xi0.s),
                f(xi0.x)
            ),
        ));
    }
    let traj = match cfg.mode {
        SimMode::DiscreteRandom => run_discrete(p, rs, sched, xi0, cfg, rng)?,
        SimMode::PerfectEvent => EventRunner::new(p, rs, sched, cfg).run(xi0)?,
    };
    let outcome = classify(p, rs, sched, cfg, &traj);
    Ok((traj, outcome))
}

fn integration_failure<T: Scalar>(t: T, xi: &State<T>) -> Error {
    Error::IntegrationFailure {
        t: f(t),
        reason: format!("non-finite state ({}, {})", f(xi.s), f(xi.x)),
    }
}

fn switch_boundary(a: DomainLabel, b: DomainLabel) -> usize {
    let lo = a.min(b);
    match lo {
        DomainLabel::Regular(i) | DomainLabel::Switching(i) => i,
    }
}

fn run_discrete<T: Scalar, R: Rng + ?Sized>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    xi0: State<T>,
    cfg: &SimConfig<T>,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    let (n_ctrl, sub, h) = cfg.control_steps();
    let mut traj = Trajectory::default();
    let mut xi = xi0;
    let mut prev: Option<(DomainLabel, T)> = None;
    for k in 0..=n_ctrl {
        let t = cfg.dt_control * T::from(k).unwrap();
        let y = p.output_proxy(&xi);
        let label = rs.label(y);
        let u = crate::controller::control_output(rs, sched, label, &cfg.resolver, rng)?;
        if let Some((pl, pu)) = prev {
            if pl != label {
                traj.event(
                    t,
                    EventKind::DomainChange {
                        from: pl,
                        to: label,
                    },
                );
            }
            if pu != u {
                let boundary = if pl == label {
                    switch_boundary(label, label)
                } else {
                    switch_boundary(pl, label)
                };
                let boundary = boundary.clamp(1, rs.n() - 1);
                traj.event(
                    t,
                    EventKind::ControlSwitch {
                        boundary,
                        from: pu,
                        to: u,
                    },
                );
            }
        }
        traj.push(Sample {
            t,
            state: xi,
            y,
            u,
            label,
        });
        prev = Some((label, u));
        if k == n_ctrl {
            break;
        }
        for _ in 0..sub {
            xi = rk4(&xi, h, |s| p.vector_field(s, u));
        }
        if !xi.is_finite() {
            return Err(integration_failure(t + cfg.dt_control, &xi));
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy)]
enum Mode<T> {
    Cell { cell: usize, u: T },
    Sliding { threshold: usize, u_lo: T, u_hi: T },
}

/// Threshold-crossing integrator for the Filippov semantics.
struct EventRunner<'a, T: Scalar> {
    p: &'a ModelParams<T>,
    sched: &'a DilutionSchedule<T>,
    cfg: &'a SimConfig<T>,
    /// Sorted y thresholds; threshold `j` separates cells `j` and `j + 1`.
    thresholds: Vec<T>,
    cell_labels: Vec<DomainLabel>,
}

impl<'a, T: Scalar> EventRunner<'a, T> {
    fn new(
        p: &'a ModelParams<T>,
        rs: &'a RegionSet<T>,
        sched: &'a DilutionSchedule<T>,
        cfg: &'a SimConfig<T>,
    ) -> Self {
        let n = rs.n();
        let (thresholds, cell_labels) = match rs.kind() {
            QuantizerKind::Perfect => (
                rs.upper().to_vec(),
                (1..=n).map(DomainLabel::Regular).collect(),
            ),
            QuantizerKind::Uncertain => {
                let th = (1..n)
                    .flat_map(|i| [rs.lower_of(i + 1), rs.upper_of(i)])
                    .collect();
                (th, rs.all_labels())
            }
        };
        EventRunner {
            p,
            sched,
            cfg,
            thresholds,
            cell_labels,
        }
    }

    fn cell_control(&self, cell: usize) -> T {
        match self.cell_labels[cell] {
            DomainLabel::Regular(i) => self.sched.rate(i),
            DomainLabel::Switching(i) => {
                let (lo, hi) = (self.sched.rate(i), self.sched.rate(i + 1));
                match self.cfg.resolver {
                    // the event semantics stays deterministic: use the mean rate
                    Resolver::RandomPick { p } => p * hi + (T::one() - p) * lo,
                    Resolver::AlwaysLower => lo,
                    Resolver::AlwaysUpper => hi,
                    Resolver::Convex { lambda } => lambda * lo + (T::one() - lambda) * hi,
                }
            }
        }
    }

    /// Switching domain a threshold belongs to.
    fn threshold_label(&self, j: usize) -> DomainLabel {
        match (self.cell_labels[j], self.cell_labels[j + 1]) {
            (DomainLabel::Switching(i), _) | (_, DomainLabel::Switching(i)) => {
                DomainLabel::Switching(i)
            }
            (DomainLabel::Regular(i), DomainLabel::Regular(_)) => DomainLabel::Switching(i),
        }
    }

    fn boundary_index(&self, j: usize) -> usize {
        match self.threshold_label(j) {
            DomainLabel::Switching(i) | DomainLabel::Regular(i) => i,
        }
    }

    fn label(&self, mode: &Mode<T>) -> DomainLabel {
        match *mode {
            Mode::Cell { cell, .. } => self.cell_labels[cell],
            Mode::Sliding { threshold, .. } => self.threshold_label(threshold),
        }
    }

    fn applied(&self, mode: &Mode<T>, xi: &State<T>) -> T {
        match *mode {
            Mode::Cell { u, .. } => u,
            Mode::Sliding { u_lo, u_hi, .. } => {
                filippov::equivalent_control(self.p, xi, u_lo, u_hi)
            }
        }
    }

    /// Mode taken on at threshold `j` given the two neighbouring fields.
    /// `from_below` tells which side the state arrived from.
    fn decide(&self, j: usize, xi: &State<T>, from_below: bool) -> Mode<T> {
        let (u_lo, u_hi) = (self.cell_control(j), self.cell_control(j + 1));
        let lo = self.p.y_dot(xi, u_lo);
        let hi = self.p.y_dot(xi, u_hi);
        if sliding_weight(lo, hi).is_some() {
            Mode::Sliding {
                threshold: j,
                u_lo,
                u_hi,
            }
        } else if from_below {
            if hi >= T::zero() {
                Mode::Cell {
                    cell: j + 1,
                    u: u_hi,
                }
            } else {
                Mode::Cell { cell: j, u: u_lo }
            }
        } else if lo <= T::zero() {
            Mode::Cell { cell: j, u: u_lo }
        } else {
            Mode::Cell {
                cell: j + 1,
                u: u_hi,
            }
        }
    }

    fn initial_mode(&self, xi: &State<T>) -> Mode<T> {
        let y = self.p.output_proxy(xi);
        if let Some(j) = self
            .thresholds
            .iter()
            .position(|&th| (y - th).abs() <= self.cfg.event_tol)
        {
            let lo = self.p.y_dot(xi, self.cell_control(j));
            return self.decide(j, xi, lo > T::zero());
        }
        let cell = self.thresholds.iter().take_while(|&&th| y > th).count();
        Mode::Cell {
            cell,
            u: self.cell_control(cell),
        }
    }

    fn run(&self, xi0: State<T>) -> Result<Trajectory<T>> {
        let cfg = self.cfg;
        let (n_ctrl, _, h_nom) = cfg.control_steps();
        let mut traj = Trajectory::default();
        let mut xi = xi0;
        let mut mode = self.initial_mode(&xi);
        if let Mode::Sliding { threshold, .. } = mode {
            traj.event(
                T::zero(),
                EventKind::SlidingEntry {
                    boundary: self.boundary_index(threshold),
                },
            );
        }
        let record = |traj: &mut Trajectory<T>, t: T, xi: &State<T>, mode: &Mode<T>| {
            traj.push(Sample {
                t,
                state: *xi,
                y: self.p.output_proxy(xi),
                u: self.applied(mode, xi),
                label: self.label(mode),
            });
        };
        record(&mut traj, T::zero(), &xi, &mode);
        let tiny: T = lit(1e-14);

        for k in 0..n_ctrl {
            let t_end = cfg.dt_control * T::from(k + 1).unwrap();
            let mut t = cfg.dt_control * T::from(k).unwrap();
            let mut stalls = 0usize;
            while t_end - t > tiny * t_end.max(T::one()) {
                let h = h_nom.min(t_end - t);
                let (dt, next, new_mode) = self.advance(&xi, &mode, h);
                if !next.is_finite() {
                    return Err(integration_failure(t + dt, &next));
                }
                if dt <= tiny {
                    stalls += 1;
                    if stalls > 64 {
                        return Err(Error::IntegrationFailure {
                            t: f(t),
                            reason: "event locator made no progress".into(),
                        });
                    }
                }
                t = t + dt;
                xi = next;
                if let Some(nm) = new_mode {
                    self.log_transition(&mut traj, t, &xi, &mode, &nm);
                    mode = nm;
                    record(&mut traj, t, &xi, &mode);
                }
            }
            record(&mut traj, t_end, &xi, &mode);
        }
        Ok(traj)
    }

    fn log_transition(
        &self,
        traj: &mut Trajectory<T>,
        t: T,
        xi: &State<T>,
        old: &Mode<T>,
        new: &Mode<T>,
    ) {
        let (from, to) = (self.label(old), self.label(new));
        if from != to {
            traj.event(t, EventKind::DomainChange { from, to });
        }
        match (*old, *new) {
            (Mode::Cell { u: a, .. }, Mode::Cell { u: b, .. }) if a != b => {
                traj.event(
                    t,
                    EventKind::ControlSwitch {
                        boundary: switch_boundary(from, to),
                        from: a,
                        to: b,
                    },
                );
            }
            (Mode::Cell { .. }, Mode::Sliding { threshold, .. }) => {
                traj.event(
                    t,
                    EventKind::SlidingEntry {
                        boundary: self.boundary_index(threshold),
                    },
                );
            }
            (
                Mode::Sliding {
                    threshold,
                    u_lo,
                    u_hi,
                },
                Mode::Cell { cell, .. },
            ) => {
                let _ = (u_lo, u_hi, xi);
                traj.event(
                    t,
                    EventKind::SlidingExit {
                        boundary: self.boundary_index(threshold),
                        upward: cell > threshold,
                    },
                );
            }
            _ => {}
        }
    }

    /// Integrates up to `h`; returns the time actually advanced, the new
    /// state and the new mode when an event occurred.
    fn advance(&self, xi: &State<T>, mode: &Mode<T>, h: T) -> (T, State<T>, Option<Mode<T>>) {
        let p = self.p;
        match *mode {
            Mode::Sliding {
                threshold,
                u_lo,
                u_hi,
            } => {
                let level = self.thresholds[threshold];
                let next = sliding_step(p, xi, u_lo, u_hi, level, h);
                let lo = p.y_dot(&next, u_lo);
                let hi = p.y_dot(&next, u_hi);
                let exit = if lo <= T::zero() {
                    Some(Mode::Cell {
                        cell: threshold,
                        u: u_lo,
                    })
                } else if hi >= T::zero() {
                    Some(Mode::Cell {
                        cell: threshold + 1,
                        u: u_hi,
                    })
                } else {
                    None
                };
                (h, next, exit)
            }
            Mode::Cell { cell, u } => {
                let step = |tau: T| rk4(xi, tau, |s| p.vector_field(s, u));
                let next = step(h);
                let y1 = p.output_proxy(&next);
                let upper = self.thresholds.get(cell).copied();
                let lower = if cell > 0 {
                    Some(self.thresholds[cell - 1])
                } else {
                    None
                };
                let (j, level, up) = match (upper, lower) {
                    (Some(th), _) if y1 > th => (cell, th, true),
                    (_, Some(th)) if y1 < th => (cell - 1, th, false),
                    _ => return (h, next, None),
                };
                let crossed = |s: &State<T>| {
                    let y = p.output_proxy(s);
                    if up {
                        y > level
                    } else {
                        y < level
                    }
                };
                // keep !crossed(a), crossed(b)
                let (mut a, mut b) = (T::zero(), h);
                let (mut sa, mut sb) = (*xi, next);
                for _ in 0..200 {
                    if (p.output_proxy(&sb) - level).abs() <= self.cfg.event_tol
                        && (p.output_proxy(&sa) - level).abs() <= self.cfg.event_tol
                    {
                        break;
                    }
                    if b - a <= lit::<T>(1e-15) * h.max(T::one()) {
                        break;
                    }
                    let m = a + (b - a) / lit(2.0);
                    let sm = step(m);
                    if crossed(&sm) {
                        b = m;
                        sb = sm;
                    } else {
                        a = m;
                        sa = sm;
                    }
                }
                match self.decide(j, &sb, up) {
                    Mode::Sliding {
                        threshold,
                        u_lo,
                        u_hi,
                    } => (
                        b,
                        filippov::project(p, &sb, level),
                        Some(Mode::Sliding {
                            threshold,
                            u_lo,
                            u_hi,
                        }),
                    ),
                    Mode::Cell { cell: c, u: nu } => {
                        let went_through = if up { c == j + 1 } else { c == j };
                        if went_through {
                            (b, sb, Some(Mode::Cell { cell: c, u: nu }))
                        } else {
                            // grazing contact: stay on the near side
                            (a, sa, None)
                        }
                    }
                }
            }
        }
    }
}

fn classify<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    cfg: &SimConfig<T>,
    traj: &Trajectory<T>,
) -> SimOutcome<T> {
    let first = traj.samples[0];
    let last = *traj.last().expect("trajectory has samples");
    let xi = last.state;
    let n = rs.n();
    let tol = cfg.convergence_tol;
    let target = p.xi_a(sched.last()).ok();
    let distance_to_target = target.map(|t| xi.distance(&t));

    let trapped = (1..n).find(|&i| {
        let d = sched.rate(i);
        match (p.xi_a(d), p.y_equilibria(d)) {
            (Ok(eq), Ok((ya, _))) => {
                rs.lower_of(i) <= ya && ya <= rs.upper_of(i) && xi.distance(&eq) < tol
            }
            _ => false,
        }
    });
    let sliding = if (xi.z(p.k()) - p.s_in()).abs() < lit::<T>(10.0) * tol {
        let y = last.y;
        let band = cfg.sliding_band;
        (1..n).find(|&i| rs.lower_of(i + 1) - band <= y && y <= rs.upper_of(i) + band)
    } else {
        None
    };

    let classification = if xi.x < lit(1e-6) {
        Classification::Washout
    } else if distance_to_target.is_some_and(|d| d < tol) {
        Classification::ConvergedToTarget
    } else if let Some(region) = trapped {
        Classification::TrappedAt { region }
    } else if let Some(boundary) = sliding {
        Classification::SlidingEquilibrium { boundary }
    } else {
        Classification::Undecided
    };

    SimOutcome {
        classification,
        limit_point: xi,
        final_label: last.label,
        initial_label: first.label,
        distance_to_target,
        escape_times: escape_times(n, traj),
        switch_count: traj
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::ControlSwitch { .. }))
            .count(),
        transitions: transitions(traj),
    }
}

/// Sorted set of adjacent domain moves along the trajectory. Jumps between
/// non-adjacent labels (possible at sampling resolution) are filled in.
pub(crate) fn transitions<T: Scalar>(traj: &Trajectory<T>) -> Vec<(DomainLabel, DomainLabel)> {
    let mut out = std::collections::BTreeSet::new();
    for w in traj.samples.windows(2) {
        let (a, b) = (w[0].label.rank(), w[1].label.rank());
        if a < b {
            for r in a..b {
                out.insert((DomainLabel::from_rank(r), DomainLabel::from_rank(r + 1)));
            }
        } else if a > b {
            for r in (b..a).rev() {
                out.insert((DomainLabel::from_rank(r + 1), DomainLabel::from_rank(r)));
            }
        }
    }
    out.into_iter().collect()
}

fn escape_times<T: Scalar>(n: usize, traj: &Trajectory<T>) -> Vec<Option<T>> {
    let mut total = vec![T::zero(); n];
    let mut count = vec![0usize; n];
    let region_of = |l: DomainLabel, prev: Option<usize>| match l {
        DomainLabel::Regular(i) => i,
        DomainLabel::Switching(i) => prev.unwrap_or(i),
    };
    let mut current = region_of(traj.samples[0].label, None);
    let mut since = traj.samples[0].t;
    for s in &traj.samples[1..] {
        let r = region_of(s.label, Some(current));
        if r != current {
            total[current - 1] = total[current - 1] + (s.t - since);
            count[current - 1] += 1;
            current = r;
            since = s.t;
        }
    }
    total
        .into_iter()
        .zip(count)
        .map(|(t, c)| {
            if c > 0 {
                Some(t / T::from(c).unwrap())
            } else {
                None
            }
        })
        .collect()
}
