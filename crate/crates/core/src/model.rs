//! Chemostat with Haldane kinetics under a constant or piecewise-constant
//! dilution rate.
//!
//! ```text
//! ds/dt = u (s_in - s) - k mu(s) x
//! dx/dt = (mu(s) - u) x
//! mu(s) = mu_max s / (k_S + s + s^2 / k_I)
//! ```
//!
//! The measured output is the growth proxy `y = alpha mu(s) x`. Everything in
//! this module is a pure function of the parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{f, lit, Scalar};

/// Raw plant constants, as they appear in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamValues<T> {
    /// Maximal growth rate (d^-1).
    pub mu_max: T,
    /// Half-saturation constant (g/L).
    pub k_s: T,
    /// Inhibition constant (g/L).
    pub k_i: T,
    /// Pseudo yield coefficient.
    pub k: T,
    /// Output yield (L CH4 / g).
    pub alpha: T,
    /// Input substrate concentration (g/L).
    pub s_in: T,
}

/// Validated plant parameters with cached landmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamValues<T>", into = "ParamValues<T>")]
#[serde(bound = "T: Scalar")]
pub struct ModelParams<T> {
    v: ParamValues<T>,
    s_bar: T,
    s_diamond: T,
    mu_s_bar: T,
    mu_s_in: T,
    mu_s_diamond: T,
    phi_max: T,
}

impl<T: Scalar> TryFrom<ParamValues<T>> for ModelParams<T> {
    type Error = Error;

    fn try_from(v: ParamValues<T>) -> Result<Self> {
        ModelParams::new(v)
    }
}

impl<T: Scalar> From<ModelParams<T>> for ParamValues<T> {
    fn from(p: ModelParams<T>) -> Self {
        p.v
    }
}

/// Equilibrium regime under a constant dilution rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumCase {
    /// `D < mu(s_in)`: the operating point is globally stable.
    GlobalOperating,
    /// `mu(s_in) < D < mu(s_bar)`: operating point and washout both stable.
    Bistable,
    /// `D > mu(s_bar)`: washout is globally stable.
    GlobalWashout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Saddle,
    Unstable,
    /// At least one eigenvalue has zero real part.
    NonHyperbolic,
}

/// Eigenvalues of the Jacobian at an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary<T> {
    pub re: [T; 2],
    pub im: [T; 2],
    pub stability: Stability,
}

impl<T: Scalar> EigenSummary<T> {
    /// Eigenvalues of a real 2x2 matrix and the stability label implied by
    /// their real parts.
    pub fn of(j: [[T; 2]; 2]) -> Self {
        let two: T = lit(2.0);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = tr * tr / lit(4.0) - det;
        let (re, im) = if disc >= T::zero() {
            let r = disc.sqrt();
            // avoid cancellation for the small root
            let big = if tr >= T::zero() {
                tr / two + r
            } else {
                tr / two - r
            };
            let small = if big != T::zero() {
                det / big
            } else {
                T::zero()
            };
            let (a, b) = if big > small {
                (big, small)
            } else {
                (small, big)
            };
            ([a, b], [T::zero(), T::zero()])
        } else {
            let r = (-disc).sqrt();
            ([tr / two, tr / two], [r, -r])
        };
        let neg = re.iter().filter(|&&v| v < T::zero()).count();
        let pos = re.iter().filter(|&&v| v > T::zero()).count();
        let stability = match (neg, pos) {
            (2, 0) => Stability::Stable,
            (1, 1) => Stability::Saddle,
            (0, 2) => Stability::Unstable,
            _ => Stability::NonHyperbolic,
        };
        EigenSummary { re, im, stability }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T> {
    pub state: State<T>,
    pub eigen: EigenSummary<T>,
}

/// Equilibria of the constant-dilution system and their local stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport<T> {
    pub dilution: T,
    pub case: EquilibriumCase,
    /// Set when `D` sits exactly on `mu(s_in)` or `mu(s_bar)`.
    pub degenerate: bool,
    pub xi_a: Option<Equilibrium<T>>,
    pub xi_b: Option<Equilibrium<T>>,
    pub xi_0: Equilibrium<T>,
}

/// Substrate and biomass concentrations (g/L).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State<T> {
    pub s: T,
    pub x: T,
}

impl<T: Scalar> State<T> {
    pub fn new(s: T, x: T) -> Self {
        State { s, x }
    }

    pub fn z(&self, k: T) -> T {
        self.s + k * self.x
    }

    pub fn distance(&self, other: &State<T>) -> T {
        (self.s - other.s).hypot(self.x - other.x)
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.x.is_finite()
    }

    pub(crate) fn axpy(&self, h: T, d: (T, T)) -> State<T> {
        State::new(self.s + h * d.0, self.x + h * d.1)
    }
}

/// Branch selector for the two equilibria of the constant-dilution system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Operating branch, `s < s_bar`.
    A,
    /// Saddle branch, `s > s_bar`.
    B,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(v: ParamValues<T>) -> Result<Self> {
        let all = [
            ("mu_max", v.mu_max),
            ("k_s", v.k_s),
            ("k_i", v.k_i),
            ("k", v.k),
            ("alpha", v.alpha),
            ("s_in", v.s_in),
        ];
        for (name, val) in all {
            if !(val > T::zero()) || !val.is_finite() {
                return Err(Error::domain(
                    "model parameter",
                    format!("{name} = {} must be positive", f(val)),
                ));
            }
        }
        let s_bar = (v.k_s * v.k_i).sqrt();
        if s_bar >= v.s_in {
            return Err(Error::domain(
                "model parameter",
                format!("s_bar = {} must be below s_in = {}", f(s_bar), f(v.s_in)),
            ));
        }
        let one = T::one();
        let s_diamond = v.s_in / (one + (one + v.s_in / v.k_s * (one + v.s_in / v.k_i)).sqrt());
        let mu = |s: T| v.mu_max * s / (v.k_s + s + s * s / v.k_i);
        let mu_s_diamond = mu(s_diamond);
        Ok(ModelParams {
            v,
            s_bar,
            s_diamond,
            mu_s_bar: mu(s_bar),
            mu_s_in: mu(v.s_in),
            mu_s_diamond,
            phi_max: v.alpha / v.k * mu_s_diamond * (v.s_in - s_diamond),
        })
    }

    pub fn values(&self) -> &ParamValues<T> {
        &self.v
    }
    pub fn mu_max(&self) -> T {
        self.v.mu_max
    }
    pub fn k_s(&self) -> T {
        self.v.k_s
    }
    pub fn k_i(&self) -> T {
        self.v.k_i
    }
    pub fn k(&self) -> T {
        self.v.k
    }
    pub fn alpha(&self) -> T {
        self.v.alpha
    }
    pub fn s_in(&self) -> T {
        self.v.s_in
    }

    /// Substrate level maximizing the growth rate, `sqrt(k_S k_I)`.
    pub fn s_bar(&self) -> T {
        self.s_bar
    }
    pub fn mu_s_bar(&self) -> T {
        self.mu_s_bar
    }
    pub fn mu_s_in(&self) -> T {
        self.mu_s_in
    }
    /// Substrate level maximizing the steady-state productivity.
    pub fn s_diamond(&self) -> T {
        self.s_diamond
    }
    pub fn mu_s_diamond(&self) -> T {
        self.mu_s_diamond
    }
    /// Maximal steady-state productivity `phi(s_diamond)`.
    pub fn phi_max(&self) -> T {
        self.phi_max
    }

    #[inline]
    pub(crate) fn mu(&self, s: T) -> T {
        self.v.mu_max * s / (self.v.k_s + s + s * s / self.v.k_i)
    }

    #[inline]
    pub(crate) fn mu_prime(&self, s: T) -> T {
        let den = self.v.k_s + s + s * s / self.v.k_i;
        self.v.mu_max * (self.v.k_s - s * s / self.v.k_i) / (den * den)
    }

    /// Haldane specific growth rate.
    pub fn growth_rate(&self, s: T) -> Result<T> {
        if !(s >= T::zero()) {
            return Err(Error::domain(
                "substrate",
                format!("s = {} must be nonnegative", f(s)),
            ));
        }
        Ok(self.mu(s))
    }

    pub fn growth_rate_deriv(&self, s: T) -> Result<T> {
        if !(s > T::zero()) {
            return Err(Error::domain(
                "substrate",
                format!("s = {} must be positive", f(s)),
            ));
        }
        Ok(self.mu_prime(s))
    }

    /// Right-hand side of the chemostat equations under dilution `u`.
    #[inline]
    pub fn vector_field(&self, xi: &State<T>, u: T) -> (T, T) {
        let m = self.mu(xi.s);
        (
            u * (self.v.s_in - xi.s) - self.v.k * m * xi.x,
            (m - u) * xi.x,
        )
    }

    /// Growth proxy `alpha mu(s) x`.
    #[inline]
    pub fn output_proxy(&self, xi: &State<T>) -> T {
        self.v.alpha * self.mu(xi.s) * xi.x
    }

    /// Gradient of the growth proxy with respect to `(s, x)`.
    #[inline]
    pub fn output_gradient(&self, xi: &State<T>) -> (T, T) {
        (
            self.v.alpha * self.mu_prime(xi.s) * xi.x,
            self.v.alpha * self.mu(xi.s),
        )
    }

    /// Time derivative of the growth proxy along the flow with dilution `d`.
    #[inline]
    pub fn y_dot(&self, xi: &State<T>, d: T) -> T {
        let (s, x) = (xi.s, xi.x);
        let m = self.mu(s);
        let a = self.v.alpha;
        a * (d * (self.v.s_in - s) - self.v.k * m * x) * self.mu_prime(s) * x + a * m * (m - d) * x
    }

    pub fn jacobian(&self, xi: &State<T>, d: T) -> [[T; 2]; 2] {
        let m = self.mu(xi.s);
        let mp = self.mu_prime(xi.s);
        [
            [-d - self.v.k * mp * xi.x, -self.v.k * m],
            [mp * xi.x, m - d],
        ]
    }

    fn check_sub_peak(&self, d: T) -> Result<()> {
        if !(d > T::zero() && d < self.mu_s_bar) {
            return Err(Error::domain(
                "dilution",
                format!(
                    "D = {} must lie in (0, mu(s_bar) = {})",
                    f(d),
                    f(self.mu_s_bar)
                ),
            ));
        }
        Ok(())
    }

    // Roots of mu(s) = D: s^2 - 2 b s + k_S k_I = 0 with b = k_I/2 (mu_max/D - 1).
    fn sab_roots(&self, d: T) -> (T, T) {
        let b = self.v.k_i / lit(2.0) * (self.v.mu_max / d - T::one());
        let prod = self.v.k_s * self.v.k_i;
        let r = (b * b - prod).max(T::zero()).sqrt();
        let big = b + r;
        (prod / big, big)
    }

    /// Lower root of `mu(s) = D`.
    pub fn s_a(&self, d: T) -> Result<T> {
        self.check_sub_peak(d)?;
        Ok(self.sab_roots(d).0)
    }

    /// Upper root of `mu(s) = D`; may exceed `s_in`.
    pub fn s_b(&self, d: T) -> Result<T> {
        self.check_sub_peak(d)?;
        Ok(self.sab_roots(d).1)
    }

    pub fn s_branch(&self, d: T, branch: Branch) -> Result<T> {
        match branch {
            Branch::A => self.s_a(d),
            Branch::B => self.s_b(d),
        }
    }

    /// Growth proxy at the two equilibria, `alpha D (s_in - s_j(D)) / k`.
    /// The second value is negative whenever `D < mu(s_in)`.
    pub fn y_equilibria(&self, d: T) -> Result<(T, T)> {
        self.check_sub_peak(d)?;
        let (sa, sb) = self.sab_roots(d);
        let c = self.v.alpha * d / self.v.k;
        Ok((c * (self.v.s_in - sa), c * (self.v.s_in - sb)))
    }

    /// Operating equilibrium `xi_a(D)`.
    pub fn xi_a(&self, d: T) -> Result<State<T>> {
        let sa = self.s_a(d)?;
        Ok(State::new(sa, (self.v.s_in - sa) / self.v.k))
    }

    pub fn xi_b(&self, d: T) -> Result<State<T>> {
        let sb = self.s_b(d)?;
        Ok(State::new(sb, (self.v.s_in - sb) / self.v.k))
    }

    pub fn washout(&self) -> State<T> {
        State::new(self.v.s_in, T::zero())
    }

    pub fn equilibria(&self, d: T) -> Result<EquilibriumReport<T>> {
        if !(d > T::zero()) {
            return Err(Error::domain(
                "dilution",
                format!("D = {} must be positive", f(d)),
            ));
        }
        let eps: T = lit(1e-12);
        let near = |a: T, b: T| (a - b).abs() <= eps * b.abs();
        let (case, degenerate) = if near(d, self.mu_s_in) {
            (EquilibriumCase::GlobalOperating, true)
        } else if near(d, self.mu_s_bar) {
            (EquilibriumCase::GlobalWashout, true)
        } else if d < self.mu_s_in {
            (EquilibriumCase::GlobalOperating, false)
        } else if d < self.mu_s_bar {
            (EquilibriumCase::Bistable, false)
        } else {
            (EquilibriumCase::GlobalWashout, false)
        };
        let at = |state: State<T>| Equilibrium {
            state,
            eigen: EigenSummary::of(self.jacobian(&state, d)),
        };
        let xi_a = match case {
            EquilibriumCase::GlobalWashout => None,
            _ => Some(at(self.xi_a(d)?)),
        };
        let xi_b = match (case, degenerate) {
            (EquilibriumCase::Bistable, false) => Some(at(self.xi_b(d)?)),
            _ => None,
        };
        Ok(EquilibriumReport {
            dilution: d,
            case,
            degenerate,
            xi_a,
            xi_b,
            xi_0: at(self.washout()),
        })
    }

    /// The `dy/dt = 0` nullcline, as a biomass level over `s`.
    pub fn nullcline_g(&self, d: T, s: T) -> Result<T> {
        if !(s > T::zero()) {
            return Err(Error::domain(
                "substrate",
                format!("s = {} must be positive", f(s)),
            ));
        }
        let mp = self.mu_prime(s);
        if s == self.s_bar || mp == T::zero() {
            return Err(Error::Singularity(format!(
                "nullcline undefined at s_bar = {}",
                f(self.s_bar)
            )));
        }
        let m = self.mu(s);
        let k = self.v.k;
        Ok((m - d) / (k * mp) + d * (self.v.s_in - s) / (k * m))
    }

    /// Isoline `y = y_j(D)` through the equilibrium on `branch`.
    pub fn isoline_h(&self, d: T, s: T, branch: Branch) -> Result<T> {
        if !(s > T::zero()) {
            return Err(Error::domain(
                "substrate",
                format!("s = {} must be positive", f(s)),
            ));
        }
        if branch == Branch::B && !(d > self.mu_s_in) {
            return Err(Error::domain(
                "dilution",
                format!(
                    "saddle isoline needs D > mu(s_in) = {}, got {}",
                    f(self.mu_s_in),
                    f(d)
                ),
            ));
        }
        let sj = self.s_branch(d, branch)?;
        Ok(d * (self.v.s_in - sj) / (self.v.k * self.mu(s)))
    }

    #[inline]
    pub(crate) fn phi(&self, s: T) -> T {
        self.v.alpha / self.v.k * self.mu(s) * (self.v.s_in - s)
    }

    /// Steady-state productivity `(alpha/k) mu(s) (s_in - s)` on `[0, s_in]`.
    pub fn productivity_phi(&self, s: T) -> Result<T> {
        if !(s >= T::zero() && s <= self.v.s_in) {
            return Err(Error::domain(
                "substrate",
                format!("s = {} must lie in [0, s_in = {}]", f(s), f(self.v.s_in)),
            ));
        }
        Ok(self.phi(s))
    }

    // phi(s) = y  <=>  (q/k_I + mu_max) s^2 - (mu_max s_in - q) s + q k_S = 0, q = k y / alpha.
    fn scd_roots(&self, y: T) -> Result<(T, T)> {
        if !(y > T::zero() && y < self.phi_max) {
            return Err(Error::domain(
                "productivity level",
                format!(
                    "y = {} must lie in (0, phi(s_diamond) = {})",
                    f(y),
                    f(self.phi_max)
                ),
            ));
        }
        let v = &self.v;
        let q = v.k * y / v.alpha;
        let a = q / v.k_i + v.mu_max;
        let b = v.mu_max * v.s_in - q;
        let c = q * v.k_s;
        let r = (b * b - lit::<T>(4.0) * a * c).max(T::zero()).sqrt();
        let big = b + r;
        Ok((lit::<T>(2.0) * c / big, big / (lit::<T>(2.0) * a)))
    }

    /// Lower root of `phi(s) = y`.
    pub fn s_c(&self, y: T) -> Result<T> {
        Ok(self.scd_roots(y)?.0)
    }

    /// Upper root of `phi(s) = y`.
    pub fn s_d(&self, y: T) -> Result<T> {
        Ok(self.scd_roots(y)?.1)
    }
}
