//! Region-wise dilution control and the sufficient conditions for global
//! stabilization of the operating point of the last region.

mod synthesis;

pub use synthesis::{
    d_lower, d_upper, delta_min, feasible_interval, min_region_count, psi, synthesize, y_hat,
    FeasibilityInterval, InfeasibilityReport, Synthesis,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantizer::{DomainLabel, RegionSet};
use crate::scalar::{f, lit, Scalar};

/// Dilution rate applied in each region, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound = "T: Scalar")]
pub struct DilutionSchedule<T> {
    rates: Vec<T>,
}

impl<T: Scalar> TryFrom<Vec<T>> for DilutionSchedule<T> {
    type Error = Error;

    fn try_from(v: Vec<T>) -> Result<Self> {
        DilutionSchedule::new(v)
    }
}

impl<T: Scalar> From<DilutionSchedule<T>> for Vec<T> {
    fn from(s: DilutionSchedule<T>) -> Self {
        s.rates
    }
}

impl<T: Scalar> DilutionSchedule<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::domain("schedule", "no dilution rates"));
        }
        if rates.iter().any(|d| !(*d > T::zero()) || !d.is_finite()) {
            return Err(Error::domain("schedule", "dilution rates must be positive"));
        }
        if rates.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain(
                "schedule",
                "dilution rates must be strictly increasing",
            ));
        }
        Ok(DilutionSchedule { rates })
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Rate of region `i` (1-based).
    pub fn rate(&self, i: usize) -> T {
        self.rates[i - 1]
    }

    pub fn first(&self) -> T {
        self.rates[0]
    }

    pub fn last(&self) -> T {
        self.rates[self.rates.len() - 1]
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.rates.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.rates.len(),
            });
        }
        Ok(())
    }
}

/// How the control is picked on a switching domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Resolver<T> {
    /// Upper rate with probability `p`, lower otherwise.
    RandomPick {
        p: T,
    },
    AlwaysLower,
    AlwaysUpper,
    /// `lambda D_i + (1 - lambda) D_{i+1}`.
    Convex {
        lambda: T,
    },
}

impl<T: Scalar> Default for Resolver<T> {
    fn default() -> Self {
        Resolver::RandomPick { p: lit(0.5) }
    }
}

impl<T: Scalar> Resolver<T> {
    pub fn pick<R: Rng + ?Sized>(&self, lo: T, hi: T, rng: &mut R) -> T {
        match *self {
            Resolver::RandomPick { p } => {
                if rng.random::<f64>() < f(p) {
                    hi
                } else {
                    lo
                }
            }
            Resolver::AlwaysLower => lo,
            Resolver::AlwaysUpper => hi,
            Resolver::Convex { lambda } => {
                let l = lambda.max(T::zero()).min(T::one());
                l * lo + (T::one() - l) * hi
            }
        }
    }
}

/// Dilution applied on `label`.
pub fn control_output<T: Scalar, R: Rng + ?Sized>(
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
    label: DomainLabel,
    resolver: &Resolver<T>,
    rng: &mut R,
) -> Result<T> {
    sched.check_len(rs.n())?;
    rs.check_label(label)?;
    Ok(match label {
        DomainLabel::Regular(i) => sched.rate(i),
        DomainLabel::Switching(i) => resolver.pick(sched.rate(i), sched.rate(i + 1), rng),
    })
}

/// Outcome of checking the three stabilization conditions.
///
/// Margins are signed distances in y units, positive when the condition holds;
/// `None` means the relevant equilibrium does not exist (`D >= mu(s_bar)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport<T> {
    /// `y_b(D_i) < lower_i`, for every region.
    pub cond_lb: Vec<bool>,
    /// `y_a(D_i) > upper_i`, for regions `1..n-1`.
    pub cond_ub: Vec<bool>,
    /// `y_a(D_n) > upper_{n-1}`.
    pub cond_top: bool,
    pub lb_margins: Vec<Option<T>>,
    pub ub_margins: Vec<Option<T>>,
    pub top_margin: Option<T>,
    pub pass: bool,
}

impl<T: Scalar> ConditionReport<T> {
    /// Names of the failing conditions, e.g. `cond_ub_3`.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, ok) in self.cond_lb.iter().enumerate() {
            if !ok {
                out.push(format!("cond_lb_{}", i + 1));
            }
        }
        for (i, ok) in self.cond_ub.iter().enumerate() {
            if !ok {
                out.push(format!("cond_ub_{}", i + 1));
            }
        }
        if !self.cond_top {
            out.push("cond_top".into());
        }
        out
    }
}

pub fn check_conditions<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
) -> Result<ConditionReport<T>> {
    sched.check_len(rs.n())?;
    let n = rs.n();
    let ys: Vec<Option<(T, T)>> = sched
        .rates()
        .iter()
        .map(|&d| p.y_equilibria(d).ok())
        .collect();
    let lb_margins: Vec<Option<T>> = (1..=n)
        .map(|i| ys[i - 1].map(|(_, yb)| rs.lower_of(i) - yb))
        .collect();
    let ub_margins: Vec<Option<T>> = (1..n)
        .map(|i| ys[i - 1].map(|(ya, _)| ya - rs.upper_of(i)))
        .collect();
    let top_margin = ys[n - 1].map(|(ya, _)| ya - rs.upper_of(n - 1));
    let holds = |m: &Option<T>| m.is_some_and(|v| v > T::zero());
    let cond_lb: Vec<bool> = lb_margins.iter().map(holds).collect();
    let cond_ub: Vec<bool> = ub_margins.iter().map(holds).collect();
    let cond_top = holds(&top_margin);
    let pass = cond_lb.iter().chain(cond_ub.iter()).all(|&b| b) && cond_top;
    Ok(ConditionReport {
        cond_lb,
        cond_ub,
        cond_top,
        lb_margins,
        ub_margins,
        top_margin,
        pass,
    })
}
