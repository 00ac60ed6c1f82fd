//! Reference parameters and independent numerical oracles. Nothing here
//! calls into the crate's closed forms.

#![allow(dead_code)]

use quantreactor::model::{ModelParams, ParamValues};

pub const MU_MAX: f64 = 0.74;
pub const K_S: f64 = 0.59;
pub const K_I: f64 = 16.4;
pub const K: f64 = 30.0;
pub const ALPHA: f64 = 11.0;
pub const S_IN: f64 = 30.0;

pub fn p1() -> ModelParams<f64> {
    ModelParams::new(ParamValues {
        mu_max: MU_MAX,
        k_s: K_S,
        k_i: K_I,
        k: K,
        alpha: ALPHA,
        s_in: S_IN,
    })
    .unwrap()
}

pub fn mu(s: f64) -> f64 {
    MU_MAX * s / (K_S + s + s * s / K_I)
}

pub fn phi(s: f64) -> f64 {
    ALPHA / K * mu(s) * (S_IN - s)
}

pub fn field(s: f64, x: f64, d: f64) -> (f64, f64) {
    (d * (S_IN - s) - K * mu(s) * x, (mu(s) - d) * x)
}

pub fn y_of(s: f64, x: f64) -> f64 {
    ALPHA * mu(s) * x
}

/// Plain bisection on a sign change, to an absolute bracket width.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut glo = g(lo);
    assert!(glo * g(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = m;
            glo = gm;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of a unimodal function.
pub fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while (b - a).abs() > tol {
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

pub fn central_diff(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (g(x + h) - g(x - h)) / (2.0 * h)
}

pub fn s_bar_oracle() -> f64 {
    golden_max(mu, 1e-6, S_IN, 1e-12)
}

/// Root of `mu(s) = d` below (`low = true`) or above the maximum.
pub fn s_root(d: f64, low: bool) -> f64 {
    let sb = s_bar_oracle();
    if low {
        bisect(|s| mu(s) - d, 1e-12, sb, 1e-13)
    } else {
        bisect(|s| mu(s) - d, sb, 10.0 * S_IN, 1e-12)
    }
}

pub fn y_eq(d: f64, low: bool) -> f64 {
    ALPHA * d * (S_IN - s_root(d, low)) / K
}

pub fn s_diamond_oracle() -> f64 {
    golden_max(phi, 1e-6, S_IN, 1e-12)
}

/// Root of `phi(s) = y` on the left (`left = true`) or right of the peak.
pub fn phi_root(y: f64, left: bool) -> f64 {
    let sd = s_diamond_oracle();
    if left {
        bisect(|s| phi(s) - y, 1e-12, sd, 1e-13)
    } else {
        bisect(|s| phi(s) - y, sd, S_IN, 1e-12)
    }
}

/// One classical RK4 step of the constant-dilution plant.
pub fn rk4_step(s: f64, x: f64, d: f64, h: f64) -> (f64, f64) {
    let k1 = field(s, x, d);
    let k2 = field(s + h / 2.0 * k1.0, x + h / 2.0 * k1.1, d);
    let k3 = field(s + h / 2.0 * k2.0, x + h / 2.0 * k2.1, d);
    let k4 = field(s + h * k3.0, x + h * k3.1, d);
    (
        s + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        x + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
