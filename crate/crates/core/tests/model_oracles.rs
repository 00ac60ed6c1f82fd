mod common;

use common::*;
use proptest::prelude::*;
use quantreactor::model::{Branch, EquilibriumCase, ModelParams, ParamValues, Stability, State};
use quantreactor::{ModelParams32, State64};

#[test]
fn landmarks_match_oracles() {
    let p = p1();
    assert!(rel(p.s_bar(), s_bar_oracle()) < 1e-6);
    assert!(rel(p.mu_s_bar(), mu(s_bar_oracle())) < 1e-6);
    assert!(rel(p.mu_s_in(), mu(S_IN)) < 1e-12);
    assert!(rel(p.s_diamond(), s_diamond_oracle()) < 1e-6);
    assert!(rel(p.phi_max(), phi(s_diamond_oracle())) < 1e-9);
    assert!(p.s_diamond() < p.s_bar());
    // frozen
    assert!((p.s_bar() - 3.110627).abs() < 1e-6);
    assert!((p.mu_s_bar() - 0.536487).abs() < 1e-6);
    assert!((p.mu_s_in() - 0.259746).abs() < 1e-6);
    assert!((p.s_diamond() - 2.301350).abs() < 1e-6);
    assert!((p.phi_max() - 5.380956).abs() < 1e-6);
    assert!((p.mu_s_diamond() - 0.529821).abs() < 1e-6);
}

#[test]
fn parameter_validation() {
    let base = ParamValues {
        mu_max: MU_MAX,
        k_s: K_S,
        k_i: K_I,
        k: K,
        alpha: ALPHA,
        s_in: S_IN,
    };
    assert!(ModelParams::new(ParamValues { k_s: 0.0, ..base }).is_err());
    assert!(ModelParams::new(ParamValues {
        alpha: -1.0,
        ..base
    })
    .is_err());
    // s_bar = sqrt(0.59 * 16.4) > 2
    assert!(ModelParams::new(ParamValues { s_in: 2.0, ..base }).is_err());
}

#[test]
fn growth_rate_and_derivative() {
    let p = p1();
    assert_eq!(p.growth_rate(0.0).unwrap(), 0.0);
    assert!(p.growth_rate(-1.0).is_err());
    assert!((p.growth_rate(p.s_bar()).unwrap() - 0.5365).abs() < 1e-3);
    assert!((p.growth_rate(30.0).unwrap() - 0.2597).abs() < 1e-3);
    assert!(p.growth_rate_deriv(p.s_bar()).unwrap().abs() < 1e-9);
    let fd = central_diff(mu, 1.0, 1e-6);
    assert!(rel(p.growth_rate_deriv(1.0).unwrap(), fd) < 1e-6);
    assert!(p.growth_rate_deriv(10.0).unwrap() < 0.0);
    assert!(p.growth_rate_deriv(0.0).is_err());
    for k in 1..200 {
        let s = k as f64 * 0.15;
        let d = p.growth_rate_deriv(s).unwrap();
        if s < p.s_bar() - 1e-9 {
            assert!(d > 0.0, "s = {s}");
        } else if s > p.s_bar() + 1e-9 {
            assert!(d < 0.0, "s = {s}");
        }
    }
}

#[test]
fn vector_field_examples() {
    let p = p1();
    assert_eq!(p.vector_field(&State::new(30.0, 0.0), 0.3), (0.0, 0.0));
    let sa = s_root(0.47, true);
    let xa = (S_IN - sa) / K;
    let (ds, dx) = p.vector_field(&State::new(sa, xa), 0.47);
    assert!(ds.abs() < 1e-4 && dx.abs() < 1e-4);
    assert!((sa - 1.1731).abs() < 1e-4 && (xa - 0.96090).abs() < 1e-5);
    let (ds, dx) = p.vector_field(&State::new(5.0, 0.5), 0.2);
    let (es, ex) = field(5.0, 0.5, 0.2);
    assert!((ds - es).abs() < 1e-9 && (dx - ex).abs() < 1e-9);
}

#[test]
fn output_proxy_examples() {
    let p = p1();
    assert_eq!(p.output_proxy(&State::new(4.0, 0.0)), 0.0);
    let xa = p.xi_a(0.47).unwrap();
    let xb = p.xi_b(0.47).unwrap();
    assert!((p.output_proxy(&xa) - 4.968).abs() < 2e-3);
    assert!((p.output_proxy(&xb) - 3.749).abs() < 2e-3);
}

#[test]
fn y_dot_examples() {
    let p = p1();
    assert_eq!(p.y_dot(&State::new(3.0, 0.0), 0.4), 0.0);
    // derivative of y along an RK4 micro-step of the flow
    let h = 1e-5;
    let (s1, x1) = rk4_step(5.0, 0.5, 0.3, h);
    let (s0, x0) = rk4_step(5.0, 0.5, 0.3, -h);
    let along = (y_of(s1, x1) - y_of(s0, x0)) / (2.0 * h);
    assert!(rel(p.y_dot(&State::new(5.0, 0.5), 0.3), along) < 1e-5);
    let g = p.nullcline_g(0.3, 2.0).unwrap();
    assert!(p.y_dot(&State::new(2.0, g), 0.3).abs() < 1e-9);
}

#[test]
fn equilibrium_roots() {
    let p = p1();
    assert!((p.s_a(0.47).unwrap() - s_root(0.47, true)).abs() < 1e-9);
    assert!((p.s_b(0.47).unwrap() - s_root(0.47, false)).abs() < 1e-9);
    assert!((p.s_a(0.47).unwrap() - 1.1731).abs() < 1e-3);
    assert!((p.s_b(0.47).unwrap() - 8.2482).abs() < 1e-3);
    assert!((p.s_a(0.19).unwrap() - 0.2047).abs() < 1e-2);
    assert!((p.s_b(0.19).unwrap() - 47.269).abs() < 1e-2);
    let near = p.mu_s_bar() - 1e-9;
    assert!((p.s_a(near).unwrap() - p.s_b(near).unwrap()).abs() < 1e-2);
    assert!(p.s_a(0.0).is_err() && p.s_b(0.6).is_err());
    assert_eq!(p.s_branch(0.3, Branch::A).unwrap(), p.s_a(0.3).unwrap());
}

#[test]
fn y_equilibria_examples() {
    let p = p1();
    let (ya, yb) = p.y_equilibria(0.47).unwrap();
    assert!((ya - y_eq(0.47, true)).abs() < 1e-9 && (yb - y_eq(0.47, false)).abs() < 1e-9);
    assert!((ya - 4.968).abs() < 2e-3 && (yb - 3.749).abs() < 2e-3);
    assert!(p.y_equilibria(0.19).unwrap().1 < 0.0);
    let (ya, yb) = p.y_equilibria(0.29).unwrap();
    assert!((ya - 3.149).abs() < 2e-3 && (yb - 0.525).abs() < 2e-3);
    // frozen
    assert!((ya - 3.14895).abs() < 1e-5 && (yb - 0.52505).abs() < 1e-5);
    let (ya, yb) = p.y_equilibria(0.33).unwrap();
    assert!((ya - 3.5711).abs() < 1e-4 && (yb - 1.2234).abs() < 1e-4);
}

#[test]
fn equilibrium_cases_and_stability() {
    let p = p1();
    let r = p.equilibria(0.20).unwrap();
    assert_eq!(r.case, EquilibriumCase::GlobalOperating);
    assert!(r.xi_a.is_some() && r.xi_b.is_none());
    let r = p.equilibria(0.47).unwrap();
    assert_eq!(r.case, EquilibriumCase::Bistable);
    assert_eq!(r.xi_b.unwrap().eigen.stability, Stability::Saddle);
    assert_eq!(r.xi_a.unwrap().eigen.stability, Stability::Stable);
    assert_eq!(r.xi_0.eigen.stability, Stability::Stable);
    let r = p.equilibria(0.60).unwrap();
    assert_eq!(r.case, EquilibriumCase::GlobalWashout);
    assert!(r.xi_a.is_none() && r.xi_b.is_none());
    let mut re = r.xi_0.eigen.re;
    re.sort_by(f64::total_cmp);
    assert!((re[0] + 0.6).abs() < 1e-12 && (re[1] - (mu(S_IN) - 0.6)).abs() < 1e-12);
    assert!(p.equilibria(0.0).is_err());
    let r = p.equilibria(p.mu_s_in()).unwrap();
    assert!(r.degenerate && r.case == EquilibriumCase::GlobalOperating);
    let r = p.equilibria(p.mu_s_bar()).unwrap();
    assert!(r.degenerate && r.case == EquilibriumCase::GlobalWashout);
}

#[test]
fn jacobian_matches_finite_differences() {
    let p = p1();
    for &(s, x, d) in &[(5.0, 0.5, 0.3), (1.2, 0.9, 0.47), (20.0, 0.1, 0.2)] {
        let j = p.jacobian(&State::new(s, x), d);
        let h = 1e-6;
        let ds = |k: usize| {
            let a = field(s + h, x, d);
            let b = field(s - h, x, d);
            if k == 0 {
                (a.0 - b.0) / (2.0 * h)
            } else {
                (a.1 - b.1) / (2.0 * h)
            }
        };
        let dx = |k: usize| {
            let a = field(s, x + h, d);
            let b = field(s, x - h, d);
            if k == 0 {
                (a.0 - b.0) / (2.0 * h)
            } else {
                (a.1 - b.1) / (2.0 * h)
            }
        };
        for (k, row) in j.iter().enumerate() {
            assert!((row[0] - ds(k)).abs() < 1e-6);
            assert!((row[1] - dx(k)).abs() < 1e-6);
        }
    }
}

#[test]
fn nullcline_isoline_examples() {
    let p = p1();
    let sa = p.s_a(0.3).unwrap();
    let g = p.nullcline_g(0.3, sa).unwrap();
    assert!((g - p.isoline_h(0.3, sa, Branch::A).unwrap()).abs() < 1e-9);
    let sb = p.s_b(0.47).unwrap();
    assert!(
        (p.nullcline_g(0.47, sb).unwrap() - p.isoline_h(0.47, sb, Branch::B).unwrap()).abs() < 1e-9
    );
    assert!(p.nullcline_g(0.3, 1.0).unwrap() >= p.isoline_h(0.3, 1.0, Branch::A).unwrap());
    assert!(p.nullcline_g(0.3, p.s_bar()).is_err());
    assert!(p.isoline_h(0.2, 5.0, Branch::B).is_err());
}

#[test]
fn productivity_examples() {
    let p = p1();
    assert!((p.s_diamond() - 2.3013).abs() < 1e-3);
    assert!((p.phi_max() - 5.381).abs() < 3e-3);
    let sc = p.s_c(4.0).unwrap();
    assert!((sc - phi_root(4.0, true)).abs() < 1e-9);
    assert!((sc - 0.6175).abs() < 2e-3);
    let sd = p.s_d(4.0).unwrap();
    assert!(sd > p.s_diamond() && sd < S_IN);
    assert!((sd - phi_root(4.0, false)).abs() < 1e-8);
    let top = p.phi_max() - 1e-9;
    assert!((p.s_c(top).unwrap() - p.s_diamond()).abs() < 1e-3);
    assert!((p.s_d(top).unwrap() - p.s_diamond()).abs() < 1e-3);
    assert!(p.s_c(p.phi_max()).is_err() && p.s_d(0.0).is_err());
    assert!(p.productivity_phi(31.0).is_err());
}

#[test]
fn productivity_ratio() {
    let p = p1();
    let ratio = p.y_equilibria(0.47).unwrap().0 / p.phi_max();
    assert!((ratio - 0.923).abs() < 0.005);
    assert!((ratio - 0.92323).abs() < 1e-5);
}

#[test]
fn nullcline_isoline_ordering_sampled() {
    let p = p1();
    let eps = 1e-3;
    let (lo, hi) = (p.mu_s_in() + eps, p.mu_s_bar() - eps);
    let mut checked = 0;
    for i in 0..50 {
        let d = lo + (hi - lo) * i as f64 / 49.0;
        for j in 0..200 {
            let t = j as f64 / 199.0;
            let s = eps + (p.s_bar() - 2.0 * eps) * t;
            let g = p.nullcline_g(d, s).unwrap();
            assert!(
                g >= p.isoline_h(d, s, Branch::A).unwrap() - 1e-9,
                "D {d} s {s}"
            );
            let s = p.s_bar() + eps + (S_IN - p.s_bar() - 2.0 * eps) * t;
            let g = p.nullcline_g(d, s).unwrap();
            assert!(
                g <= p.isoline_h(d, s, Branch::B).unwrap() + 1e-9,
                "D {d} s {s}"
            );
            checked += 2;
        }
    }
    assert!(checked >= 10_000);
}

#[test]
fn growth_band_positivity_sampled() {
    use rand::{Rng, SeedableRng};
    let p = p1();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut accepted = 0;
    let mut violations = 0;
    while accepted < 20_000 {
        let d = rng.random_range(0.05..p.mu_s_bar() - 1e-3);
        let s = rng.random_range(1e-9..=S_IN);
        let x = rng.random_range(1e-9..=S_IN / K);
        let xi = State::new(s, x);
        let (ya, yb) = p.y_equilibria(d).unwrap();
        let y = p.output_proxy(&xi);
        if yb < y && y < ya {
            accepted += 1;
            if p.y_dot(&xi, d) <= 0.0 {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn f32_landmarks() {
    let p = ModelParams32::new(ParamValues {
        mu_max: 0.74f32,
        k_s: 0.59,
        k_i: 16.4,
        k: 30.0,
        alpha: 11.0,
        s_in: 30.0,
    })
    .unwrap();
    assert!((p.s_bar() - 3.110627).abs() < 1e-4);
    assert!((p.y_equilibria(0.47).unwrap().0 - 4.967834).abs() < 1e-3);
}

#[test]
fn serde_round_trip() {
    let p = p1();
    let text = serde_json::to_string(&p).unwrap();
    let back: ModelParams<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(p, back);
    assert!(serde_json::from_str::<ModelParams<f64>>(&text.replace("0.59", "-0.59")).is_err());
    let st: State64 = serde_json::from_str(r#"{"s": 1.0, "x": 2.0}"#).unwrap();
    assert_eq!(st.z(K), 61.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn root_product_identity(d in 0.01f64..0.5264) {
        let p = p1();
        let (a, b) = (p.s_a(d).unwrap(), p.s_b(d).unwrap());
        prop_assert!(rel(a * b, K_S * K_I) < 1e-9);
        prop_assert!(0.0 < a && a < p.s_bar() && p.s_bar() < b);
        prop_assert!(rel(mu(a), d) < 1e-9);
        prop_assert!(rel(mu(b), d) < 1e-9);
    }

    #[test]
    fn chain_rule_identity(s in 0.01f64..30.0, x in 0.001f64..1.0, d in 0.0f64..0.8) {
        let p = p1();
        let xi = State::new(s, x);
        let (gs, gx) = p.output_gradient(&xi);
        let (fs, fx) = p.vector_field(&xi, d);
        let chain = gs * fs + gx * fx;
        let yd = p.y_dot(&xi, d);
        prop_assert!((yd - chain).abs() <= 1e-9 * chain.abs().max(1e-6));
    }

    #[test]
    fn productivity_round_trip(y in 0.01f64..5.38) {
        let p = p1();
        let (c, dd) = (p.s_c(y).unwrap(), p.s_d(y).unwrap());
        prop_assert!(0.0 < c && c < p.s_diamond() && p.s_diamond() < dd && dd < S_IN);
        prop_assert!(rel(p.productivity_phi(c).unwrap(), y) < 1e-9);
        prop_assert!(rel(p.productivity_phi(dd).unwrap(), y) < 1e-9);
    }
}
