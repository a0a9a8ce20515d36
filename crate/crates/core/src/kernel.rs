//! Laplace-domain error kernel of `delta_{n,t}`, the comparison functional
//! `L_{n,t}[m]`, the quantities `Q^(1)`, `Q^(2)`, `Q_{n,t}` and the bound
//! chain `Q_{n,t}(tau) <= min(2/tau^2, 3t^2/n) <= 12/(sqrt(n)/t + tau)^2`.
//!
//! All reported `Q` values carry the `1/(n-1)!` normalization.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::Result;
use crate::quadrature::{
    adaptive, gamma_weight_integrate, gamma_window, halfline_integrate, QuadratureSpec,
};
use crate::stieltjes::StieltjesRep;

/// Stable `(1 - (1+x)e^{-x})/x^2`; equals `1/2` at `x = 0`. Series below
/// `x < 1e-4` avoids the 0/0 cancellation.
pub(crate) fn phi_ratio(x: f64) -> f64 {
    if x < 1e-4 {
        0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0
    } else {
        (1.0 - (1.0 + x) * (-x).exp()) / (x * x)
    }
}

/// A Laplace pre-image `m` with its primitive `\int_0^w m`, as needed by the
/// comparison functional.
#[derive(Debug, Clone)]
pub enum KernelDensity {
    /// `m(v) = 1` (pre-image of `1/z`).
    One,
    /// `m(v) = v` (pre-image of `1/z^2`).
    Linear,
    /// `m(v) = v e^{-tau v}` (pre-image of `1/(z+tau)^2`).
    ExpLinear { tau: f64 },
    /// Pre-image of an order-2 representation with `a = 0`.
    Rep(StieltjesRep),
}

impl KernelDensity {
    pub fn from_rep(f: &StieltjesRep) -> Result<Self> {
        f.laplace_density(1.0)?; // validates alpha = 2, a = 0
        Ok(Self::Rep(f.clone()))
    }

    pub fn eval(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        match self {
            Self::One => 1.0,
            Self::Linear => v,
            Self::ExpLinear { tau } => v * (-tau * v).exp(),
            Self::Rep(f) => f.laplace_density_unchecked(v),
        }
    }

    /// `\int_0^w m(v) dv`.
    pub fn primitive(&self, w: f64, spec: &QuadratureSpec) -> Result<f64> {
        if w <= 0.0 {
            return Ok(0.0);
        }
        match self {
            Self::One => Ok(w),
            Self::Linear => Ok(0.5 * w * w),
            Self::ExpLinear { tau } => Ok(w * w * phi_ratio(tau * w)),
            Self::Rep(f) => {
                f.integrate_measure(|tau| w * w * phi_ratio(tau * w), 2.0, 1.0 / w.min(1.0), spec)
            }
        }
    }

    /// `m(v + d) - m(v)` in a cancellation-free form. The naive difference
    /// loses all digits once `v >> |d|`; for exponential components the
    /// difference factors as `e^{-tau v}(v expm1(-tau d) + d e^{-tau d})`.
    pub fn difference(&self, v: f64, d: f64) -> f64 {
        match self {
            Self::One => 0.0,
            Self::Linear => d,
            Self::ExpLinear { tau } => exp_linear_difference(*tau, v, d),
            Self::Rep(f) => {
                let mut total = 0.0;
                for at in f.atoms() {
                    total += at.weight * exp_linear_difference(at.tau, v, d);
                }
                for p in f.pieces() {
                    if p.exponent == 0.0 {
                        // m_piece(v) = c (e^{-lo v} - e^{-hi v})
                        total += p.coeff * pure_exp_difference(p.lo, v, d);
                        if p.hi.is_finite() {
                            total -= p.coeff * pure_exp_difference(p.hi, v, d);
                        }
                    } else {
                        total += self.piece_eval(p, v + d) - self.piece_eval(p, v);
                    }
                }
                total
            }
        }
    }

    fn piece_eval(&self, p: &crate::stieltjes::DensityPiece, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let a = p.exponent + 1.0;
        let upper = if p.hi.is_infinite() { 1.0 } else { statrs::function::gamma::gamma_lr(a, v * p.hi) };
        let lower = if p.lo == 0.0 { 0.0 } else { statrs::function::gamma::gamma_lr(a, v * p.lo) };
        v * p.coeff * v.powf(-a) * statrs::function::gamma::gamma(a) * (upper - lower)
    }

    /// Decay-rate hint for the outer `v`-integral of the second term of the
    /// functional: the slowest of the exponential component `tau` and the
    /// Gamma-tail mechanism `~n/t`. Underestimates only enlarge the window.
    fn outer_decay(&self, n: u32, t: f64) -> f64 {
        let gamma_rate = f64::from(n) / t;
        let rate = match self {
            Self::One | Self::Linear => 0.5 * gamma_rate,
            Self::ExpLinear { tau } => {
                if *tau > 0.0 {
                    0.5 * tau.min(gamma_rate)
                } else {
                    0.5 * gamma_rate
                }
            }
            Self::Rep(f) => {
                let tau_min = f
                    .atoms()
                    .iter()
                    .map(|a| a.tau)
                    .chain(f.pieces().iter().map(|p| p.lo))
                    .fold(f64::INFINITY, f64::min);
                if tau_min.is_finite() && tau_min > 0.0 {
                    0.5 * tau_min.min(gamma_rate)
                } else {
                    gamma_rate / 8.0
                }
            }
        };
        rate.clamp(1e-6, 50.0)
    }
}

/// `m(v+d) - m(v)` for `m(x) = x e^{-tau x}`. The split form is exact to
/// machine precision when `|tau d| <= 1`; beyond that the naive difference
/// carries no harmful cancellation (and the split form could overflow).
fn exp_linear_difference(tau: f64, v: f64, d: f64) -> f64 {
    if tau == 0.0 {
        return d;
    }
    let td = tau * d;
    if td.abs() <= 1.0 {
        (-tau * v).exp() * (v * (-td).exp_m1() + d * (-td).exp())
    } else {
        let s = v + d;
        s * (-tau * s).exp() - v * (-tau * v).exp()
    }
}

/// `m(v+d) - m(v)` for `m(x) = e^{-tau x}`.
fn pure_exp_difference(tau: f64, v: f64, d: f64) -> f64 {
    let td = tau * d;
    if td.abs() <= 1.0 {
        (-tau * v).exp() * (-td).exp_m1()
    } else {
        (-tau * (v + d)).exp() - (-tau * v).exp()
    }
}

/// `q_{n,t}(u) = (1/(n-1)!) \int_0^{nu/t} s^{n-1} e^{-s} m(u - st/n) ds
///              - chi(u-t) m(u-t)`.
pub fn q_kernel<F: Fn(f64) -> f64>(u: f64, n: u32, t: f64, m: F, spec: &QuadratureSpec) -> Result<f64> {
    if u <= 0.0 {
        return Ok(0.0);
    }
    let nf = f64::from(n);
    let cut = nf * u / t;
    let mut v = gamma_weight_integrate(
        |s| if s <= cut { m(u - s * t / nf) } else { 0.0 },
        n,
        &[cut],
        spec,
    )?;
    if u >= t {
        v -= m(u - t);
    }
    Ok(v)
}

/// The comparison functional `L_{n,t}[m]` (normalized): the Gamma-weighted
/// primitive term plus the outer integral of the absolute inner difference.
/// The absolute value sits outside the inner `s`-integral.
pub fn l_functional(m: &KernelDensity, n: u32, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let nf = f64::from(n);
    let inner_spec = spec.inner();
    let t1 = gamma_weight_integrate(
        |s| m.primitive(t * (1.0 - s / nf).abs(), &inner_spec).unwrap_or(f64::NAN),
        n,
        &[],
        spec,
    )?;

    // m = 1: the inner difference vanishes identically
    if matches!(m, KernelDensity::One) {
        return Ok(t1);
    }
    Ok(t1 + t2_functional(m, n, t, spec)?)
}

/// Second term of the functional:
/// `\int_0^inf |E_s[m(v + t(1-s/n)) - m(v); s <= n(v/t+1)]| dv`,
/// with the difference evaluated in its stable form.
fn t2_functional(m: &KernelDensity, n: u32, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let nf = f64::from(n);
    let inner_spec = spec.inner();
    let psi = |v: f64| -> f64 {
        let lim = nf * (v / t + 1.0);
        gamma_weight_integrate(
            |s| if s <= lim { m.difference(v, t * (1.0 - s / nf)) } else { 0.0 },
            n,
            &[lim],
            &inner_spec,
        )
        .map(f64::abs)
        .unwrap_or(f64::NAN)
    };
    halfline_integrate(psi, m.outer_decay(n, t), spec)
}

/// `Q^(1)_{n,t}(tau)/(n-1)!`: the Gamma-weighted `1-(1+w)e^{-w}` term with
/// `w = tau t |1 - s/n|`; the `tau = 0` limit integrand is
/// `t^2 (1-s/n)^2 / 2`.
pub fn q1(tau: f64, n: u32, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let nf = f64::from(n);
    gamma_weight_integrate(
        |s| {
            let base = t * (1.0 - s / nf).abs();
            base * base * phi_ratio(tau * base)
        },
        n,
        &[],
        spec,
    )
}

/// `Q^(2)_{n,t}(tau)/(n-1)!`. For `tau > 0` this is the second functional
/// term for `m(v) = v e^{-tau v}` (the outer damping `e^{-tau v}` folded into
/// the stable inner difference, so large `tau` cannot overflow). At
/// `tau = 0` the inner integral collapses to an upper-incomplete-gamma tail.
pub fn q2(tau: f64, n: u32, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let nf = f64::from(n);
    if tau == 0.0 {
        // |int_0^{n(v/t+1)} s^{n-1} e^{-s} t(1-s/n) ds| / (n-1)!
        //   = t [Q(n+1, L) - Q(n, L)],  L = n(v/t+1)
        let g = |v: f64| {
            let lim = nf * (v / t + 1.0);
            t * (gamma_ur(nf + 1.0, lim) - gamma_ur(nf, lim))
        };
        return halfline_integrate(g, (0.5 * nf / t).clamp(0.02, 50.0), spec);
    }
    t2_functional(&KernelDensity::ExpLinear { tau }, n, t, spec)
}

/// One `(n, t, tau)` evaluation of the kernel quantities and the bounds
/// they must respect. All values carry the `1/(n-1)!` normalization.
#[derive(Debug, Clone, Serialize)]
pub struct KernelProbe {
    pub n: u32,
    pub t: f64,
    pub tau: f64,
    pub q1: f64,
    pub q2: f64,
    pub q_total: f64,
    /// `2/tau^2` (infinite at `tau = 0`).
    pub bound_tau: f64,
    /// `3t^2/n`.
    pub bound_n: f64,
    /// `12/(sqrt(n)/t + tau)^2`.
    pub bound_main: f64,
    pub pass: bool,
}

/// Slack on the bound comparisons.
pub const BOUND_SLACK: f64 = 1e-6;

impl KernelProbe {
    /// The comparison weight `w_{n,t}(s, tau) = tau t |1 - s/n|`.
    pub fn w(&self, s: f64) -> f64 {
        self.tau * self.t * (1.0 - s / f64::from(self.n)).abs()
    }

    pub fn min_bound(&self) -> f64 {
        self.bound_tau.min(self.bound_n)
    }
}

/// `Q_{n,t}(tau) = (Q^(1) + Q^(2))/(n-1)!` with the bound chain attached.
pub fn q_total(tau: f64, n: u32, t: f64, spec: &QuadratureSpec) -> Result<KernelProbe> {
    let v1 = q1(tau, n, t, spec)?;
    let v2 = q2(tau, n, t, spec)?;
    let total = v1 + v2;
    let nf = f64::from(n);
    let bound_tau = if tau > 0.0 { 2.0 / (tau * tau) } else { f64::INFINITY };
    let bound_n = 3.0 * t * t / nf;
    let denom = nf.sqrt() / t + tau;
    let bound_main = 12.0 / (denom * denom);
    let min_b = bound_tau.min(bound_n);
    let pass = total <= min_b * (1.0 + BOUND_SLACK) && min_b <= bound_main * (1.0 + BOUND_SLACK);
    Ok(KernelProbe {
        n,
        t,
        tau,
        q1: v1,
        q2: v2,
        q_total: total,
        bound_tau,
        bound_n,
        bound_main,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSuiteReport {
    pub probes: Vec<KernelProbe>,
    pub violations: Vec<(u32, f64, f64)>,
    /// Largest observed `q_total / bound_main` (tightness of the constant 12).
    pub max_main_ratio: f64,
    pub pass: bool,
}

/// Evaluates `q_total` over the grid and verifies
/// `Q <= min(2/tau^2, 3t^2/n) <= 12/(sqrt(n)/t + tau)^2` at every triple.
pub fn kernel_bound_suite(
    n_set: &[u32],
    t_set: &[f64],
    tau_set: &[f64],
    spec: &QuadratureSpec,
) -> Result<KernelSuiteReport> {
    let mut grid = Vec::new();
    for &n in n_set {
        for &t in t_set {
            for &tau in tau_set {
                grid.push((n, t, tau));
            }
        }
    }
    let probes: Vec<KernelProbe> = grid
        .par_iter()
        .map(|&(n, t, tau)| q_total(tau, n, t, spec))
        .collect::<Result<Vec<_>>>()?;
    let violations: Vec<(u32, f64, f64)> =
        probes.iter().filter(|p| !p.pass).map(|p| (p.n, p.t, p.tau)).collect();
    let max_main_ratio = probes
        .iter()
        .map(|p| p.q_total / p.bound_main)
        .fold(0.0f64, f64::max);
    Ok(KernelSuiteReport { pass: violations.is_empty(), probes, violations, max_main_ratio })
}

/// Exact A^1_+ norm of `delta_{n,t} f` for an order-2 representation:
/// `\int_0^inf |q_{n,t}(u)| du` with `m` the Laplace pre-image of `f`.
/// Integration is windowed; the first-order tail estimate
/// `(t^2/2n)|m'(U - t)|` is reported, not added.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct A1Norm {
    pub value: f64,
    pub tail_estimate: f64,
    pub window: f64,
}

pub fn a1_norm_delta(f: &StieltjesRep, n: u32, t: f64, spec: &QuadratureSpec) -> Result<A1Norm> {
    let density = KernelDensity::from_rep(f)?;
    let nf = f64::from(n);
    let (_, s_hi) = gamma_window(n, spec.truncation_epsilon);
    let window = t * (1.0 + s_hi / nf) + 4.0 * t;
    let inner_spec = spec.inner();
    let m = |v: f64| density.eval(v);
    let absq = |u: f64| q_kernel(u, n, t, m, &inner_spec).map(f64::abs).unwrap_or(f64::NAN);
    let mut bounds = vec![0.0, t.min(window)];
    let mut c = 2.0 * t;
    while c < window {
        bounds.push(c);
        c *= 2.0;
    }
    bounds.push(window);
    let value = adaptive(absq, &bounds, spec)?;
    let tail_estimate = t * t / (2.0 * nf) * f.laplace_density_slope(window - t).abs();
    Ok(A1Norm { value, tail_estimate, window })
}

/// `\int Q_{n,t}(tau) mu(dtau)`: the middle term of the domination chain
/// `a1_norm <= \int Q dmu <= 12 f(sqrt(n)/t)`.
pub fn q_measure_integral(f: &StieltjesRep, n: u32, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let scale = f64::from(n).sqrt() / t + 1.0;
    let inner = spec.inner();
    f.integrate_measure(
        |tau| q_total(tau, n, t, &inner).map(|p| p.q_total).unwrap_or(f64::NAN),
        2.0,
        scale,
        spec,
    )
}

/// `norm <= 12 f(sqrt(n)/t)` record.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct A1Envelope {
    pub norm: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub tail_estimate: f64,
}

pub fn a1_envelope(f: &StieltjesRep, n: u32, t: f64, spec: &QuadratureSpec) -> Result<A1Envelope> {
    if f.is_zero() {
        return Ok(A1Envelope { norm: 0.0, envelope: 0.0, ratio: 0.0, tail_estimate: 0.0 });
    }
    let a1 = a1_norm_delta(f, n, t, spec)?;
    let arg = num_complex::Complex64::new(f64::from(n).sqrt() / t, 0.0);
    let envelope = 12.0 * f.evaluate(arg, spec)?.re;
    let ratio = if envelope > 0.0 { a1.value / envelope } else { 0.0 };
    Ok(A1Envelope { norm: a1.value, envelope, ratio, tail_estimate: a1.tail_estimate })
}

/// One `(n, t)` row of the norm-example suite.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleNormRow {
    pub n: u32,
    pub t: f64,
    /// `L_{n,t}[1]` and its bound `t/sqrt(n)`.
    pub l_one: f64,
    pub bound_one: f64,
    /// `L_{n,t}[v]` and its bound `3t^2/(2n)`.
    pub l_linear: f64,
    pub bound_linear: f64,
    /// `(lambda, composite value, composite bound 2(1 + lambda t/sqrt(n))^2)`.
    pub composites: Vec<(f64, f64, f64)>,
    /// `\int |kernel of r_{n,t}| + 1`; equals 2.
    pub delta_a1: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleNormReport {
    pub rows: Vec<ExampleNormRow>,
    pub pass: bool,
}

/// The two explicit functionals (`m = 1`, `m = v`), the composite
/// `(1 + lambda/z)^2` bound assembled from them, and the plain
/// `|delta_{n,t}| <= 2` certificate.
pub fn example_norm_suite(
    n_set: &[u32],
    t_set: &[f64],
    lambdas: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExampleNormReport> {
    let mut grid = Vec::new();
    for &n in n_set {
        for &t in t_set {
            grid.push((n, t));
        }
    }
    let rows: Vec<ExampleNormRow> = grid
        .par_iter()
        .map(|&(n, t)| -> Result<ExampleNormRow> {
            let nf = f64::from(n);
            let l_one = l_functional(&KernelDensity::One, n, t, spec)?;
            let bound_one = t / nf.sqrt();
            let l_linear = l_functional(&KernelDensity::Linear, n, t, spec)?;
            let bound_linear = 1.5 * t * t / nf;
            let mut pass = l_one <= bound_one * (1.0 + BOUND_SLACK)
                && l_linear <= bound_linear * (1.0 + BOUND_SLACK);
            let mut composites = Vec::new();
            for &lambda in lambdas {
                let value = 2.0 + 2.0 * lambda * l_one + lambda * lambda * l_linear;
                let b = 1.0 + lambda * t / nf.sqrt();
                let bound = 2.0 * b * b;
                pass &= value <= bound * (1.0 + BOUND_SLACK);
                composites.push((lambda, value, bound));
            }
            let delta_a1 = r_kernel_mass(n, t, spec)? + 1.0;
            pass &= (delta_a1 - 2.0).abs() <= 1e-8;
            Ok(ExampleNormRow {
                n,
                t,
                l_one,
                bound_one,
                l_linear,
                bound_linear,
                composites,
                delta_a1,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExampleNormReport { pass: rows.iter().all(|r| r.pass), rows })
}

/// Total mass of the (nonnegative) Laplace pre-image of `r_{n,t}`:
/// `(1/(n-1)!) (n/t)^n \int_0^inf s^{n-1} e^{-ns/t} ds = 1`, evaluated in
/// physical units through the log-weight.
fn r_kernel_mass(n: u32, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let nf = f64::from(n);
    let (lo, hi) = gamma_window(n, spec.truncation_epsilon);
    let scale = t / nf; // s = scale * (gamma variable)
    let weight = |s: f64| {
        if n == 1 {
            (nf * (nf / t).ln() - nf * s / t).exp()
        } else if s <= 0.0 {
            0.0
        } else {
            (nf * (nf / t).ln() + (nf - 1.0) * s.ln() - nf * s / t - ln_gamma(nf)).exp()
        }
    };
    adaptive(weight, &[lo * scale, nf * scale, hi * scale], spec)
}

/// Laplace-transform consistency of the kernel: for `m` with transform
/// `Lm`, checks `L(q_{n,t})(z) = delta_{n,t}(z) (Lm)(z)`.
pub fn kernel_transform_identity(
    m: &KernelDensity,
    n: u32,
    t: f64,
    z: num_complex::Complex64,
    spec: &QuadratureSpec,
) -> Result<(num_complex::Complex64, num_complex::Complex64)> {
    let inner = spec.inner();
    let lhs = crate::quadrature::laplace_transform(
        |u| q_kernel(u, n, t, |v| m.eval(v), &inner).unwrap_or(f64::NAN),
        z,
        spec,
    )?;
    let lm = match m {
        KernelDensity::One => z.inv(),
        KernelDensity::Linear => (z * z).inv(),
        KernelDensity::ExpLinear { tau } => ((z + *tau) * (z + *tau)).inv(),
        KernelDensity::Rep(f) => f.evaluate(z, spec)?,
    };
    let rhs = crate::scalar::delta_scalar(z, n, t) * lm;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stieltjes::corpus;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn spec() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-8, ..QuadratureSpec::default() }
    }

    #[test]
    fn q_kernel_closed_forms() {
        let s = spec();
        assert_eq!(q_kernel(0.0, 3, 1.0, |_| 1.0, &s).unwrap(), 0.0);
        // n = 1, t = 1, m = 1: q(u) = 1 - e^{-u} for u < t, -e^{-u} shifted for u > t
        assert_relative_eq!(
            q_kernel(0.5, 1, 1.0, |_| 1.0, &s).unwrap(),
            1.0 - (-0.5f64).exp(),
            epsilon = 1e-9
        );
        assert_relative_eq!(q_kernel(2.0, 1, 1.0, |_| 1.0, &s).unwrap(), -(-2.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn l_functional_reference_values() {
        let s = spec();
        // closed form 2/e at n = t = 1 for m = 1
        assert_relative_eq!(
            l_functional(&KernelDensity::One, 1, 1.0, &s).unwrap(),
            2.0 / std::f64::consts::E,
            epsilon = 1e-8
        );
        assert!(l_functional(&KernelDensity::One, 4, 1.0, &s).unwrap() <= 0.5 + 1e-9);
        // frozen double-quadrature oracle values for m = v
        assert_relative_eq!(
            l_functional(&KernelDensity::Linear, 1, 1.0, &s).unwrap(),
            1.235758882343,
            epsilon = 1e-8
        );
        assert_relative_eq!(
            l_functional(&KernelDensity::Linear, 2, 1.0, &s).unwrap(),
            0.588338208092,
            epsilon = 1e-8
        );
        assert_relative_eq!(
            l_functional(&KernelDensity::Linear, 16, 1.0, &s).unwrap(),
            0.066622651438,
            epsilon = 1e-7
        );
        assert!(l_functional(&KernelDensity::Linear, 2, 1.0, &s).unwrap() <= 0.75);
    }

    #[test]
    fn q_values_match_frozen_oracle() {
        let s = spec();
        // reference values from an independent adaptive double quadrature
        let cases = [
            (0.0, 1u32, 1.0, 0.5, 0.73575888234288),
            (0.0, 2, 1.0, 0.25, 0.33833820809153),
            (10.0, 1, 1.0, 0.00849921540148, 0.00731584919485),
            (1.0, 2, 1.0, 0.11781445001319, 0.11331837597992),
            (0.1, 4, 2.0, 0.44449718267509, 0.78856632463024),
            (0.5, 1, 1.0, 0.26586157031767, 0.30324169996786),
        ];
        for (tau, n, t, want_q1, want_q2) in cases {
            let got1 = q1(tau, n, t, &s).unwrap();
            let got2 = q2(tau, n, t, &s).unwrap();
            assert_relative_eq!(got1, want_q1, max_relative = 1e-7);
            assert_relative_eq!(got2, want_q2, max_relative = 1e-6);
        }
    }

    #[test]
    fn q_total_respects_bound_chain() {
        let s = spec();
        let p = q_total(0.0, 2, 1.0, &s).unwrap();
        assert!(p.pass);
        assert!(p.q_total <= 1.5 * (1.0 + BOUND_SLACK));
        let p = q_total(10.0, 1, 1.0, &s).unwrap();
        assert!(p.pass);
        assert!(p.q_total <= 0.02 * (1.0 + BOUND_SLACK));
        // tight case: tau = 100, n = 1, t = 2 sits at ~98% of 2/tau^2
        let p = q_total(100.0, 1, 2.0, &s).unwrap();
        assert!(p.pass, "{p:?}");
        assert_relative_eq!(p.q_total, 0.00019669456041, max_relative = 1e-6);
    }

    #[test]
    fn q_total_64_respects_main_bound() {
        let s = spec();
        let p = q_total(1.0, 64, 1.0, &s).unwrap();
        assert!(p.q_total <= 12.0 / 81.0 * (1.0 + BOUND_SLACK));
        assert_relative_eq!(p.q_total, 0.01800190191936, max_relative = 1e-6);
    }

    #[test]
    fn kernel_suite_small_grid() {
        let s = spec();
        let rep = kernel_bound_suite(
            &[1, 2, 3, 4, 8],
            &[0.5, 1.0, 2.0],
            &[0.0, 0.1, 1.0, 10.0],
            &s,
        )
        .unwrap();
        assert!(rep.pass, "violations: {:?}", rep.violations);
        assert!(rep.max_main_ratio <= 1.0);
    }

    #[test]
    fn a1_norm_matches_exact_values() {
        let s = spec();
        // f = 1/z^2 (m = v): the norm equals t^2/(2n) exactly
        for (n, t) in [(1u32, 1.0f64), (2, 1.0), (4, 1.0), (4, 2.0)] {
            let a1 = a1_norm_delta(&corpus::inv_z_sq(), n, t, &s).unwrap();
            assert_relative_eq!(a1.value, t * t / (2.0 * f64::from(n)), max_relative = 1e-6);
        }
        // scaling law: value(4n)/value(n) = 1/4
        let v1 = a1_norm_delta(&corpus::inv_z_sq(), 4, 1.0, &s).unwrap().value;
        let v2 = a1_norm_delta(&corpus::inv_z_sq(), 16, 1.0, &s).unwrap().value;
        let ratio = v2 / v1;
        assert!((0.2..=0.3).contains(&ratio), "{ratio}");
    }

    #[test]
    fn a1_norm_bounded_by_l_and_envelope() {
        let s = spec();
        // 1/(z+1)^2 at (4, 2): <= 12 f(1) = 3
        let a1 = a1_norm_delta(&corpus::inv_shifted_sq(), 4, 2.0, &s).unwrap();
        assert!(a1.value <= 3.0);
        let l = l_functional(&KernelDensity::ExpLinear { tau: 1.0 }, 4, 2.0, &s).unwrap();
        assert!(a1.value <= l * (1.0 + 1e-6), "{} vs {}", a1.value, l);
    }

    #[test]
    fn domination_chain_on_corpus() {
        let s = spec();
        // atom measures: the tau-integral of Q is a finite sum
        for (name, f) in [("1/z^2", corpus::inv_z_sq()), ("1/(z+1)^2", corpus::inv_shifted_sq())] {
            for (n, t) in [(1u32, 1.0), (4, 1.0), (8, 0.5)] {
                let a1 = a1_norm_delta(&f, n, t, &s).unwrap().value;
                let mid = q_measure_integral(&f, n, t, &s).unwrap();
                let env = 12.0
                    * f.evaluate(Complex64::new(f64::from(n).sqrt() / t, 0.0), &s).unwrap().re;
                assert!(a1 <= mid * (1.0 + 1e-5), "{name} ({n},{t}): {a1} vs {mid}");
                assert!(mid <= env * (1.0 + 1e-5), "{name} ({n},{t}): {mid} vs {env}");
            }
        }
        // density measure: every tau-node of the middle term is itself a
        // double quadrature; the chain has orders of magnitude of slack, so
        // a coarse spec keeps the cost sane
        let coarse = QuadratureSpec { rel_tol: 1e-6, ..QuadratureSpec::default() };
        let f = corpus::unit_density();
        for (n, t) in [(1u32, 1.0), (4, 1.0)] {
            let a1 = a1_norm_delta(&f, n, t, &coarse).unwrap().value;
            let mid = q_measure_integral(&f, n, t, &coarse).unwrap();
            let env =
                12.0 * f.evaluate(Complex64::new(f64::from(n).sqrt() / t, 0.0), &coarse).unwrap().re;
            assert!(a1 <= mid * (1.0 + 1e-4), "density ({n},{t}): {a1} vs {mid}");
            assert!(mid <= env * (1.0 + 1e-4), "density ({n},{t}): {mid} vs {env}");
        }
    }

    #[test]
    fn transform_identity_roundtrip() {
        let s = spec();
        let zs = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0)];
        for m in [
            KernelDensity::One,
            KernelDensity::Linear,
            KernelDensity::ExpLinear { tau: 1.0 },
        ] {
            for z in zs {
                let (lhs, rhs) = kernel_transform_identity(&m, 2, 1.0, z, &s).unwrap();
                assert!((lhs - rhs).norm() <= 1e-7 * (1.0 + rhs.norm()), "{m:?} {z}: {lhs} vs {rhs}");
            }
        }
        // frozen value: delta_{2,1}(1)/1^2
        let (lhs, _) = kernel_transform_identity(&KernelDensity::Linear, 2, 1.0, zs[0], &s).unwrap();
        assert_relative_eq!(lhs.re, 0.07656500327300213, max_relative = 1e-7);
    }

    #[test]
    fn example_suite_small() {
        let s = spec();
        let rep = example_norm_suite(&[1, 2, 4, 16], &[0.5, 1.0, 2.0], &[0.5, 1.0, 2.0], &s).unwrap();
        assert!(rep.pass);
        let row16 = rep.rows.iter().find(|r| r.n == 16 && r.t == 1.0).unwrap();
        assert!(row16.l_one <= 0.25 + 1e-9);
        assert!(row16.l_linear <= 3.0 / 32.0 + 1e-9);
        let comp = row16.composites.iter().find(|c| c.0 == 1.0).unwrap();
        assert!(comp.2 <= 2.0 * 1.25 * 1.25 + 1e-12);
    }

    #[test]
    fn a1_envelope_examples() {
        let s = spec();
        let e = a1_envelope(&corpus::inv_z_sq(), 9, 1.0, &s).unwrap();
        assert_relative_eq!(e.envelope, 12.0 / 9.0, epsilon = 1e-10);
        assert!(e.ratio <= 1.0 + BOUND_SLACK);
        let e = a1_envelope(&corpus::inv_shifted_sq(), 4, 2.0, &s).unwrap();
        assert_relative_eq!(e.envelope, 3.0, epsilon = 1e-10);
        let zero = StieltjesRep::new(0.0, 2.0, vec![], vec![]).unwrap();
        let e = a1_envelope(&zero, 4, 1.0, &s).unwrap();
        assert_eq!(e.norm, 0.0);
        assert_eq!(e.envelope, 0.0);
        assert_eq!(e.ratio, 0.0);
    }
}
