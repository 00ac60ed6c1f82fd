//! Scalar root bracketing and 1-D minimization used by the controller and
//! the event locator.

use crate::scalar::{lit, Scalar};

/// Bisection on a sign change of `g` over `[lo, hi]`.
///
/// Returns the bracket `(a, b)` after convergence, with `g(a)` keeping the
/// sign of `g(lo)`. Stops once `b - a <= tol` or `|g| <= ftol`.
pub fn bisect<T: Scalar, F: FnMut(T) -> T>(
    mut g: F,
    mut lo: T,
    mut hi: T,
    tol: T,
    ftol: T,
    max_iter: usize,
) -> (T, T) {
    let g_lo = g(lo);
    let lo_neg = g_lo < T::zero();
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) / lit(2.0);
        let gm = g(mid);
        if gm.abs() <= ftol {
            // land on the far side so the caller ends past the root
            return if (gm < T::zero()) == lo_neg {
                (mid, hi)
            } else {
                (lo, mid)
            };
        }
        if (gm < T::zero()) == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for a minimum of a unimodal `g` on `[a, b]`.
pub fn golden_section_min<T: Scalar, F: FnMut(T) -> T>(
    mut g: F,
    mut a: T,
    mut b: T,
    tol: T,
) -> (T, T) {
    let inv_phi: T = lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut gc = g(c);
    let mut gd = g(d);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 500 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - (b - a) * inv_phi;
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + (b - a) * inv_phi;
            gd = g(d);
        }
        iter += 1;
    }
    let x = (a + b) / lit(2.0);
    let gx = g(x);
    // endpoints may win when the minimum sits on the boundary
    let (ga, gb) = (g(a), g(b));
    let mut best = (x, gx);
    if ga < best.1 {
        best = (a, ga);
    }
    if gb < best.1 {
        best = (b, gb);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let (a, b) = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14, 0.0, 200);
        assert!((a - 2f64.sqrt()).abs() < 1e-13);
        assert!(b >= a);
    }

    #[test]
    fn golden_section_parabola() {
        let (x, v) = golden_section_min(|x: f64| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_boundary_minimum() {
        let (x, _) = golden_section_min(|x: f64| x, 1.0, 2.0, 1e-10);
        assert_eq!(x, 1.0);
    }
}
