//! Choosing region-wise dilution rates from the productivity curve.

use serde::{Deserialize, Serialize};

use super::{check_conditions, DilutionSchedule};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numeric::golden_section_min;
use crate::quantizer::RegionSet;
use crate::scalar::{f, lit, Scalar};

/// Open interval of dilution rates meeting both per-region conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityInterval<T> {
    pub lo: T,
    pub hi: T,
    pub nonempty: bool,
    pub width: T,
}

impl<T: Scalar> FeasibilityInterval<T> {
    fn new(lo: T, hi: T) -> Self {
        FeasibilityInterval {
            lo,
            hi,
            nonempty: lo < hi,
            width: hi - lo,
        }
    }

    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) / lit(2.0)
    }

    pub fn contains(&self, d: T) -> bool {
        self.lo < d && d < self.hi
    }
}

/// Largest rate keeping the saddle below a region whose lower bound is `u_lb`.
pub fn d_upper<T: Scalar>(p: &ModelParams<T>, u_lb: T) -> Result<T> {
    Ok(p.mu_s_diamond().min(p.mu(p.s_d(u_lb)?)))
}

/// Smallest rate putting the operating point above a region whose upper
/// bound is `o_ub`.
pub fn d_lower<T: Scalar>(p: &ModelParams<T>, o_ub: T) -> Result<T> {
    Ok(p.mu(p.s_c(o_ub)?))
}

/// Rates satisfying both conditions for region `[u_lb, o_ub]`. A zero lower
/// bound (first region) caps the interval at `mu(s_in)`.
pub fn feasible_interval<T: Scalar>(
    p: &ModelParams<T>,
    u_lb: T,
    o_ub: T,
) -> Result<FeasibilityInterval<T>> {
    if !(u_lb >= T::zero() && u_lb <= o_ub) {
        return Err(Error::domain(
            "region bounds",
            format!("need 0 <= lower ({}) <= upper ({})", f(u_lb), f(o_ub)),
        ));
    }
    let lo = d_lower(p, o_ub)?;
    let hi = if u_lb == T::zero() {
        p.mu_s_in()
    } else {
        d_upper(p, u_lb)?
    };
    Ok(FeasibilityInterval::new(lo, hi))
}

/// Lowest admissible lower bound for a region with upper bound `o_ub`.
/// Negative below `y_hat`.
pub fn psi<T: Scalar>(p: &ModelParams<T>, o_ub: T) -> Result<T> {
    let d = d_lower(p, o_ub)?;
    let sb = p.s_b(d)?;
    Ok(p.phi(sb))
}

/// Output level at which `d_lower` reaches `mu(s_in)`.
pub fn y_hat<T: Scalar>(p: &ModelParams<T>) -> T {
    // s_b(mu(s_in)) = s_in, so the companion root is k_S k_I / s_in
    p.phi(p.k_s() * p.k_i() / p.s_in())
}

/// Minimum of `o - psi(o)` over `[y_hat, u_n]` and where it is attained.
pub fn delta_min<T: Scalar>(p: &ModelParams<T>, u_n: T) -> Result<(T, T)> {
    let yh = y_hat(p);
    if !(u_n > yh && u_n < p.phi_max()) {
        return Err(Error::domain(
            "last lower bound",
            format!(
                "u_n = {} must lie in (y_hat = {}, phi_max = {})",
                f(u_n),
                f(yh),
                f(p.phi_max())
            ),
        ));
    }
    let delta = |o: T| o - psi(p, o).unwrap_or(T::nan());
    const GRID: usize = 1000;
    let step = (u_n - yh) / T::from(GRID - 1).unwrap();
    let at = |k: usize| {
        if k == GRID - 1 {
            u_n
        } else {
            yh + step * T::from(k).unwrap()
        }
    };
    let mut best = (0usize, delta(at(0)));
    for k in 1..GRID {
        let v = delta(at(k));
        if v < best.1 {
            best = (k, v);
        }
    }
    let a = at(best.0.saturating_sub(1));
    let b = at((best.0 + 1).min(GRID - 1));
    let (x, v) = golden_section_min(delta, a, b, lit(1e-8));
    Ok((v, x))
}

/// Smallest equidistant region count guaranteed to admit a schedule.
pub fn min_region_count<T: Scalar>(p: &ModelParams<T>, u_n: T) -> Result<usize> {
    let (dm, _) = delta_min(p, u_n)?;
    let bound = u_n / dm + T::one();
    Ok(bound.floor().to_usize().unwrap_or(usize::MAX - 1) + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport<T> {
    /// First failing region (1-based).
    pub region: usize,
    pub interval: Option<FeasibilityInterval<T>>,
    pub reason: String,
    /// Intervals computed up to and including the failing region.
    pub intervals: Vec<FeasibilityInterval<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Synthesis<T> {
    Feasible {
        schedule: Vec<T>,
        intervals: Vec<FeasibilityInterval<T>>,
    },
    Infeasible(InfeasibilityReport<T>),
}

impl<T: Scalar> Synthesis<T> {
    pub fn schedule(&self) -> Option<DilutionSchedule<T>> {
        match self {
            Synthesis::Feasible { schedule, .. } => DilutionSchedule::new(schedule.clone()).ok(),
            Synthesis::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Synthesis::Feasible { .. })
    }
}

/// Picks the midpoint of each region's feasible interval, requiring it to be
/// wider than `2 * margin`, and checks that `d_star` fits the last region.
pub fn synthesize<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    d_star: T,
    margin: T,
) -> Result<Synthesis<T>> {
    if !(d_star > p.mu_s_in() && d_star < p.mu_s_diamond()) {
        return Err(Error::domain(
            "set-point dilution",
            format!(
                "D* = {} must lie in (mu(s_in) = {}, mu(s_diamond) = {})",
                f(d_star),
                f(p.mu_s_in()),
                f(p.mu_s_diamond())
            ),
        ));
    }
    if !(margin >= T::zero()) {
        return Err(Error::domain(
            "margin",
            format!("{} must be nonnegative", f(margin)),
        ));
    }
    let n = rs.n();
    let mut intervals = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    let fail = |region, interval, reason: String, intervals: &Vec<FeasibilityInterval<T>>| {
        Ok(Synthesis::Infeasible(InfeasibilityReport {
            region,
            interval,
            reason,
            intervals: intervals.clone(),
        }))
    };

    for i in 1..n {
        let iv = match feasible_interval(p, rs.lower_of(i), rs.upper_of(i)) {
            Ok(iv) => iv,
            Err(e) => return fail(i, None, e.to_string(), &intervals),
        };
        intervals.push(iv);
        if !(iv.width > lit::<T>(2.0) * margin) || !iv.nonempty {
            let reason = format!(
                "interval width {} does not exceed twice the margin {}",
                f(iv.width),
                f(margin)
            );
            return fail(i, Some(iv), reason, &intervals);
        }
        rates.push(iv.midpoint());
    }

    let last = match (d_lower(p, rs.upper_of(n - 1)), d_upper(p, rs.lower_of(n))) {
        (Ok(lo), Ok(hi)) => FeasibilityInterval::new(lo, hi),
        (Err(e), _) | (_, Err(e)) => return fail(n, None, e.to_string(), &intervals),
    };
    intervals.push(last);
    if !last.contains(d_star) {
        let reason = format!(
            "D* = {} outside ({}, {})",
            f(d_star),
            f(last.lo),
            f(last.hi)
        );
        return fail(n, Some(last), reason, &intervals);
    }
    rates.push(d_star);

    if let Some(i) = rates.windows(2).position(|w| !(w[0] < w[1])) {
        let reason = format!("rate of region {} does not exceed the previous one", i + 2);
        return fail(i + 2, Some(intervals[i + 1]), reason, &intervals);
    }
    let schedule = DilutionSchedule::new(rates.clone())?;
    let report = check_conditions(p, rs, &schedule)?;
    if !report.pass {
        let reason = format!("conditions fail: {}", report.failures().join(", "));
        return fail(n, None, reason, &intervals);
    }
    Ok(Synthesis::Feasible {
        schedule: rates,
        intervals,
    })
}
