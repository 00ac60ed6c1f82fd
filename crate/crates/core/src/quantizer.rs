//! Measurement regions over the growth proxy.
//!
//! Region `i` (1-based) is `lower[i-1] <= y <= upper[i-1]`, the last one is
//! unbounded above. Perfect sets abut, uncertain sets overlap pairwise.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{f, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizerKind {
    Perfect,
    Uncertain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBounds<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub kind: QuantizerKind,
}

/// A validated family of measurement regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionBounds<T>", into = "RegionBounds<T>")]
#[serde(bound = "T: Scalar")]
pub struct RegionSet<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    kind: QuantizerKind,
}

impl<T: Scalar> TryFrom<RegionBounds<T>> for RegionSet<T> {
    type Error = Error;

    fn try_from(b: RegionBounds<T>) -> Result<Self> {
        RegionSet::new(b.lower, b.upper, b.kind)
    }
}

impl<T: Scalar> From<RegionSet<T>> for RegionBounds<T> {
    fn from(r: RegionSet<T>) -> Self {
        RegionBounds {
            lower: r.lower,
            upper: r.upper,
            kind: r.kind,
        }
    }
}

/// Where a state sits with respect to the regions.
///
/// `Switching(i)` is the overlap of regions `i` and `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainLabel {
    Regular(usize),
    Switching(usize),
}

impl DomainLabel {
    /// Position along the y axis: Y1 < Y1|2 < Y2 < ...
    pub fn rank(&self) -> usize {
        match *self {
            DomainLabel::Regular(i) => 2 * i,
            DomainLabel::Switching(i) => 2 * i + 1,
        }
    }

    pub fn from_rank(r: usize) -> Self {
        if r.is_multiple_of(2) {
            DomainLabel::Regular(r / 2)
        } else {
            DomainLabel::Switching(r / 2)
        }
    }

    pub fn is_regular(&self) -> bool {
        matches!(self, DomainLabel::Regular(_))
    }

    /// Adjacent domains differ by one in rank.
    pub fn is_adjacent(&self, other: &DomainLabel) -> bool {
        self.rank().abs_diff(other.rank()) == 1
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainLabel::Regular(i) => write!(fm, "Y{i}"),
            DomainLabel::Switching(i) => write!(fm, "Y{i}|{}", i + 1),
        }
    }
}

impl PartialOrd for DomainLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DomainLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl<T: Scalar> RegionSet<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>, kind: QuantizerKind) -> Result<Self> {
        let n = lower.len();
        let bad = |msg: String| Err(Error::domain("region set", msg));
        if n < 2 {
            return bad(format!("need at least 2 regions, got {n}"));
        }
        if upper.len() != n - 1 {
            return Err(Error::LengthMismatch {
                expected: n - 1,
                found: upper.len(),
            });
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return bad("thresholds must be finite".into());
        }
        if lower[0] != T::zero() {
            return bad(format!("first lower bound must be 0, got {}", f(lower[0])));
        }
        if lower.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("lower bounds must be strictly increasing".into());
        }
        if upper.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("upper bounds must be strictly increasing".into());
        }
        match kind {
            QuantizerKind::Perfect => {
                for i in 0..n - 1 {
                    if upper[i] != lower[i + 1] {
                        return bad(format!("perfect regions must abut at boundary {}", i + 1));
                    }
                }
            }
            QuantizerKind::Uncertain => {
                for i in 0..n - 1 {
                    // pairwise overlap
                    if !(lower[i + 1] < upper[i]) {
                        return bad(format!("regions {} and {} must overlap", i + 1, i + 2));
                    }
                    if !(lower[i] < upper[i]) {
                        return bad(format!("region {} is empty", i + 1));
                    }
                    // no triple overlap
                    if i + 2 < n && !(upper[i] < lower[i + 2]) {
                        return bad(format!("regions {} and {} overlap", i + 1, i + 3));
                    }
                }
            }
        }
        Ok(RegionSet { lower, upper, kind })
    }

    /// Perfect regions from the inner boundaries `b_1 < ... < b_{n-1}`.
    pub fn perfect(boundaries: &[T]) -> Result<Self> {
        let mut lower = vec![T::zero()];
        lower.extend_from_slice(boundaries);
        RegionSet::new(lower, boundaries.to_vec(), QuantizerKind::Perfect)
    }

    pub fn n(&self) -> usize {
        self.lower.len()
    }
    pub fn kind(&self) -> QuantizerKind {
        self.kind
    }
    pub fn lower(&self) -> &[T] {
        &self.lower
    }
    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Lower bound of region `i` (1-based).
    pub fn lower_of(&self, i: usize) -> T {
        self.lower[i - 1]
    }

    /// Upper bound of region `i` (1-based); infinite for the last region.
    pub fn upper_of(&self, i: usize) -> T {
        if i == self.n() {
            T::infinity()
        } else {
            self.upper[i - 1]
        }
    }

    /// Indices (1-based) of every region whose closed interval holds `y`.
    pub fn regions_containing(&self, y: T) -> Result<Vec<usize>> {
        if !(y >= T::zero()) {
            return Err(Error::domain(
                "growth proxy",
                format!("y = {} must be nonnegative", f(y)),
            ));
        }
        Ok((1..=self.n())
            .filter(|&i| self.lower_of(i) <= y && y <= self.upper_of(i))
            .collect())
    }

    pub fn domain_of(&self, y: T) -> Result<DomainLabel> {
        let r = self.regions_containing(y)?;
        Ok(match r.as_slice() {
            [i] => DomainLabel::Regular(*i),
            [i, _] => DomainLabel::Switching(*i),
            _ => unreachable!("validated region sets cover [0, inf) with at most pairwise overlap"),
        })
    }

    /// Label lookup that clamps tiny negative outputs to zero.
    pub(crate) fn label(&self, y: T) -> DomainLabel {
        self.domain_of(y.max(T::zero()))
            .unwrap_or(DomainLabel::Regular(1))
    }

    pub fn check_label(&self, label: DomainLabel) -> Result<()> {
        let ok = match label {
            DomainLabel::Regular(i) => (1..=self.n()).contains(&i),
            DomainLabel::Switching(i) => (1..self.n()).contains(&i),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Label(label.to_string()))
        }
    }

    /// Every domain label in y order: Y1, Y1|2, ..., Yn.
    pub fn all_labels(&self) -> Vec<DomainLabel> {
        (2..=2 * self.n()).map(DomainLabel::from_rank).collect()
    }

    /// Width `upper - lower` of each bounded region.
    pub fn widths(&self) -> Vec<T> {
        (0..self.n() - 1)
            .map(|i| self.upper[i] - self.lower[i])
            .collect()
    }
}

/// Equidistant regions with boundaries `i / (n - 1) * top`; uncertain sets
/// are obtained by inflating the perfect one.
pub fn make_equidistant<T: Scalar>(
    top: T,
    n: usize,
    kind: QuantizerKind,
    overlap_fraction: T,
) -> Result<RegionSet<T>> {
    if n < 2 {
        return Err(Error::domain(
            "region count",
            format!("n = {n} must be at least 2"),
        ));
    }
    if !(top > T::zero()) || !top.is_finite() {
        return Err(Error::domain(
            "top boundary",
            format!("{} must be positive", f(top)),
        ));
    }
    if !(overlap_fraction >= T::zero() && overlap_fraction < lit(0.5)) {
        return Err(Error::domain(
            "overlap fraction",
            format!("{} must lie in [0, 0.5)", f(overlap_fraction)),
        ));
    }
    let m = T::from(n - 1).unwrap();
    let boundaries: Vec<T> = (1..n).map(|i| T::from(i).unwrap() / m * top).collect();
    let perfect = RegionSet::perfect(&boundaries)?;
    match kind {
        QuantizerKind::Perfect => Ok(perfect),
        QuantizerKind::Uncertain => inflate(&perfect, overlap_fraction),
    }
}

/// Turns a perfect set into an uncertain one by moving each boundary down
/// (for the lower bound of the next region) and up (for the upper bound of
/// the current region) by `fraction` times the current region's width.
pub fn inflate<T: Scalar>(rs: &RegionSet<T>, fraction: T) -> Result<RegionSet<T>> {
    if rs.kind() != QuantizerKind::Perfect {
        return Err(Error::domain(
            "region set",
            "only perfect sets can be inflated",
        ));
    }
    if !(fraction > T::zero() && fraction < lit(0.5)) {
        return Err(Error::domain(
            "overlap fraction",
            format!("{} must lie in (0, 0.5)", f(fraction)),
        ));
    }
    let widths = rs.widths();
    let mut lower = rs.lower().to_vec();
    let mut upper = rs.upper().to_vec();
    for (i, w) in widths.iter().enumerate() {
        let b = rs.upper()[i];
        lower[i + 1] = b - fraction * *w;
        upper[i] = b + fraction * *w;
    }
    RegionSet::new(lower, upper, QuantizerKind::Uncertain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> RegionSet<f64> {
        make_equidistant(4.0, 4, QuantizerKind::Perfect, 0.0).unwrap()
    }

    #[test]
    fn equidistant_boundaries() {
        let rs = a1();
        assert_eq!(rs.upper(), &[4.0 / 3.0, 8.0 / 3.0, 4.0]);
        assert_eq!(rs.lower(), &[0.0, 4.0 / 3.0, 8.0 / 3.0, 4.0]);
        let two = make_equidistant(4.0, 2, QuantizerKind::Perfect, 0.0).unwrap();
        assert_eq!(two.upper(), &[4.0]);
    }

    #[test]
    fn membership_a1() {
        let rs = a1();
        assert_eq!(rs.regions_containing(0.5).unwrap(), vec![1]);
        assert_eq!(rs.regions_containing(4.0 / 3.0).unwrap(), vec![1, 2]);
        assert_eq!(rs.regions_containing(100.0).unwrap(), vec![4]);
        assert_eq!(rs.domain_of(2.0).unwrap(), DomainLabel::Regular(2));
        assert_eq!(rs.domain_of(8.0 / 3.0).unwrap(), DomainLabel::Switching(2));
        assert!(rs.regions_containing(-0.1).is_err());
    }

    #[test]
    fn inflation_is_width_based() {
        let rs = inflate(&a1(), 0.1).unwrap();
        assert!((rs.lower()[3] - 3.8667).abs() < 1e-4);
        assert!((rs.upper()[2] - 4.1333).abs() < 1e-4);
        assert_eq!(rs.domain_of(3.75).unwrap(), DomainLabel::Regular(3));
        assert_eq!(rs.domain_of(3.9).unwrap(), DomainLabel::Switching(3));
        // inside (lower_2, upper_1)
        assert_eq!(rs.regions_containing(1.3).unwrap(), vec![1, 2]);

        let two = make_equidistant(4.0, 2, QuantizerKind::Perfect, 0.0).unwrap();
        let two: RegionSet<f64> = inflate(&two, 0.1).unwrap();
        assert!((two.lower()[1] - 3.6).abs() < 1e-12);
        assert!((two.upper()[0] - 4.4).abs() < 1e-12);
    }

    #[test]
    fn inflation_rejects_degenerate_fractions() {
        assert!(inflate(&a1(), 0.0).is_err());
        assert!(inflate(&a1(), 1e-6).is_ok());
        assert!(inflate(&a1(), 1e-300).is_err());
        assert!(inflate(&a1(), 0.5).is_err());
        let unc = inflate(&a1(), 0.1).unwrap();
        assert!(inflate(&unc, 0.1).is_err());
        // uneven widths make a large fraction collide with the next boundary
        let uneven = RegionSet::perfect(&[1.0, 4.0, 4.5]).unwrap();
        assert!(inflate(&uneven, 0.45).is_err());
    }

    #[test]
    fn validation() {
        assert!(RegionSet::new(vec![0.0, 1.0], vec![1.0], QuantizerKind::Perfect).is_ok());
        assert!(RegionSet::new(vec![0.0, 1.0], vec![1.1], QuantizerKind::Perfect).is_err());
        assert!(RegionSet::new(vec![0.1, 1.0], vec![1.0], QuantizerKind::Perfect).is_err());
        assert!(RegionSet::new(vec![0.0, 1.0], vec![1.0, 2.0], QuantizerKind::Perfect).is_err());
        assert!(RegionSet::new(vec![0.0, 1.0], vec![1.0], QuantizerKind::Uncertain).is_err());
        assert!(RegionSet::new(vec![0.0, 0.9], vec![1.1], QuantizerKind::Uncertain).is_ok());
        assert!(make_equidistant(4.0, 1, QuantizerKind::Perfect, 0.0).is_err());
        assert!(make_equidistant(4.0, 4, QuantizerKind::Uncertain, 0.6).is_err());
    }

    #[test]
    fn label_order_and_display() {
        let rs = a1();
        let labels = rs.all_labels();
        assert_eq!(labels.len(), 7);
        assert_eq!(labels[1].to_string(), "Y1|2");
        assert!(labels
            .windows(2)
            .all(|w| w[0] < w[1] && w[0].is_adjacent(&w[1])));
        assert!(rs.check_label(DomainLabel::Switching(4)).is_err());
    }
}
