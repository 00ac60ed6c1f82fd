use serde::{Deserialize, Serialize};

use crate::model::{ModelParams, State};
use crate::scalar::Scalar;

/// Convex weight of the lower rate on a switching surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingState<T> {
    pub active: bool,
    pub boundary: usize,
    /// Weight of `D_lo` in the hull, in `[0, 1]`.
    pub lambda: T,
}

/// Sliding weight from the two output rates. `dy/dt` is affine in the
/// dilution, so the weight that zeroes it is exact.
pub fn sliding_weight<T: Scalar>(ydot_lo: T, ydot_hi: T) -> Option<T> {
    if ydot_lo > T::zero() && ydot_hi < T::zero() {
        let l = ydot_hi / (ydot_hi - ydot_lo);
        Some(l.max(T::zero()).min(T::one()))
    } else {
        None
    }
}

/// Filippov sliding test at `xi` between the rates `d_lo` (applied below
/// the surface) and `d_hi` (above).
pub fn filippov_slide<T: Scalar>(
    p: &ModelParams<T>,
    xi: &State<T>,
    d_lo: T,
    d_hi: T,
    boundary: usize,
) -> SlidingState<T> {
    let lo = p.y_dot(xi, d_lo);
    let hi = p.y_dot(xi, d_hi);
    match sliding_weight(lo, hi) {
        Some(lambda) => SlidingState {
            active: lambda > T::zero() && lambda < T::one(),
            boundary,
            lambda,
        },
        None => SlidingState {
            active: false,
            boundary,
            lambda: if lo <= T::zero() { T::one() } else { T::zero() },
        },
    }
}

/// Equivalent dilution on the surface, `lambda D_lo + (1 - lambda) D_hi`.
pub(crate) fn equivalent_control<T: Scalar>(
    p: &ModelParams<T>,
    xi: &State<T>,
    d_lo: T,
    d_hi: T,
) -> T {
    let lo = p.y_dot(xi, d_lo);
    let hi = p.y_dot(xi, d_hi);
    let lambda =
        sliding_weight(lo, hi).unwrap_or(if lo <= T::zero() { T::one() } else { T::zero() });
    lambda * d_lo + (T::one() - lambda) * d_hi
}

/// One RK4 step of the sliding field followed by a Newton projection back
/// onto `y = level`.
pub fn sliding_step<T: Scalar>(
    p: &ModelParams<T>,
    xi: &State<T>,
    d_lo: T,
    d_hi: T,
    level: T,
    h: T,
) -> State<T> {
    let field = |s: &State<T>| p.vector_field(s, equivalent_control(p, s, d_lo, d_hi));
    let next = super::rk4(xi, h, field);
    project(p, &next, level)
}

/// Newton correction back onto `y = level` along the line `s + k x = const`,
/// leaving `z` untouched.
pub(crate) fn project<T: Scalar>(p: &ModelParams<T>, xi: &State<T>, level: T) -> State<T> {
    let k = p.k();
    let mut out = *xi;
    for _ in 0..2 {
        let r = p.output_proxy(&out) - level;
        let (gs, gx) = p.output_gradient(&out);
        let slope = k * gs - gx;
        if r == T::zero() || slope.abs() <= T::epsilon() * (k * gs.abs() + gx.abs()) {
            break;
        }
        let step = r / slope;
        out = State::new(out.s - k * step, out.x + step);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_weights() {
        assert_eq!(sliding_weight(1.0, -1.0), Some(0.5));
        assert_eq!(sliding_weight(1.0, 1.0), None);
        assert_eq!(sliding_weight(-1.0, -1.0), None);
        assert_eq!(sliding_weight(-1.0, 1.0), None);
        assert_eq!(sliding_weight(3.0, -1.0), Some(0.25));
    }
}
