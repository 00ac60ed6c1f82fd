use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate_with_rng, SimConfig, SimOutcome, Trajectory};
use crate::controller::DilutionSchedule;
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::quantizer::RegionSet;
use crate::scalar::Scalar;

/// Random stream of replicate `rep` of initial condition `ic`.
pub fn run_rng(seed: u64, ic: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((ic as u64) << 20) | rep as u64);
    rng
}

/// Cartesian grid of `n` evenly spaced values on each closed range, `s` major.
pub fn grid<T: Scalar>(s: (T, T, usize), x: (T, T, usize)) -> Vec<State<T>> {
    let axis = |(lo, hi, n): (T, T, usize)| -> Vec<T> {
        match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * T::from(i).unwrap() / T::from(n - 1).unwrap()
                    }
                })
                .collect(),
        }
    };
    let xs = axis(x);
    axis(s)
        .into_iter()
        .flat_map(|sv| xs.iter().map(move |&xv| State::new(sv, xv)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BatchRun<T> {
    pub ic_index: usize,
    pub replicate: usize,
    pub initial: State<T>,
    pub outcome: Option<SimOutcome<T>>,
    pub error: Option<String>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory<T>>,
}

/// Runs every initial condition `replicates` times, in parallel. Results come
/// back in input order, replicates innermost. A failing run is recorded in its
/// slot and does not abort the batch.
pub fn batch_simulate<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    ics: &[State<T>],
    cfg: &SimConfig<T>,
    replicates: usize,
) -> Result<Vec<BatchRun<T>>> {
    run_batch(p, rs, sched, ics, cfg, replicates, false)
}

/// As [`batch_simulate`], keeping each trajectory.
pub fn batch_simulate_with_trajectories<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    ics: &[State<T>],
    cfg: &SimConfig<T>,
    replicates: usize,
) -> Result<Vec<BatchRun<T>>> {
    run_batch(p, rs, sched, ics, cfg, replicates, true)
}

fn run_batch<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    ics: &[State<T>],
    cfg: &SimConfig<T>,
    replicates: usize,
    keep: bool,
) -> Result<Vec<BatchRun<T>>> {
    if ics.is_empty() {
        return Err(Error::domain("initial conditions", "grid is empty"));
    }
    if replicates == 0 {
        return Err(Error::domain("replicates", "need at least one"));
    }
    sched.check_len(rs.n())?;
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..ics.len())
        .flat_map(|i| (0..replicates).map(move |r| (i, r)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(i, r)| {
            let mut rng = run_rng(cfg.seed, i, r);
            let res = simulate_with_rng(p, rs, sched, ics[i], cfg, &mut rng);
            let (outcome, error, trajectory) = match res {
                Ok((traj, out)) => (Some(out), None, keep.then_some(traj)),
                Err(e) => (None, Some(e.to_string()), None),
            };
            BatchRun {
                ic_index: i,
                replicate: r,
                initial: ics[i],
                outcome,
                error,
                trajectory,
            }
        })
        .collect())
}
