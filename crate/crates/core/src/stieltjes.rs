//! Generalized Stieltjes functions `f(z) = a + \int mu(dtau)/(z+tau)^alpha`
//! with a positive measure given by atoms plus piecewise-power densities,
//! products of two order-1 functions, and the Laplace pre-image density that
//! feeds the kernel machinery.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, QuadValue, QuadratureSpec};
use crate::scalar::INEQ_SLACK;

/// Point mass `weight * delta_tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub tau: f64,
    pub weight: f64,
}

/// Density `coeff * tau^exponent` on `[lo, hi)`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub coeff: f64,
    pub exponent: f64,
}

/// A generalized Stieltjes function of order `alpha` in `(0, 2]`:
/// constant term plus a positive measure of atoms and power densities.
/// Immutable after construction; construction validates admissibility.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesRep {
    a: f64,
    alpha: f64,
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
}

impl StieltjesRep {
    pub fn new(a: f64, alpha: f64, atoms: Vec<Atom>, pieces: Vec<DensityPiece>) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::InvalidRepresentation(format!("constant term a = {a} must be >= 0")));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidOrder(alpha, "(0, 2]"));
        }
        for at in &atoms {
            if !(at.tau >= 0.0) || !(at.weight > 0.0) {
                return Err(Error::InvalidRepresentation(format!(
                    "atom (tau={}, weight={}): tau >= 0 and weight > 0 required",
                    at.tau, at.weight
                )));
            }
        }
        for p in &pieces {
            if !(p.lo >= 0.0) || !(p.hi > p.lo) {
                return Err(Error::InvalidRepresentation(format!(
                    "piece [{}, {}): empty or negative interval",
                    p.lo, p.hi
                )));
            }
            if !(p.coeff > 0.0) {
                return Err(Error::InvalidRepresentation(format!(
                    "piece coefficient {} must be > 0",
                    p.coeff
                )));
            }
            if !(p.exponent > -1.0) {
                return Err(Error::InvalidRepresentation(format!(
                    "piece exponent {} must be > -1 for local integrability",
                    p.exponent
                )));
            }
            if p.hi.is_infinite() && p.exponent - alpha >= -1.0 {
                return Err(Error::DivergentRepresentation { lo: p.lo, exponent: p.exponent, alpha });
            }
        }
        Ok(Self { a, alpha, atoms, pieces })
    }

    pub fn constant(a: f64) -> Self {
        Self::new(a, 1.0, vec![], vec![]).expect("constant rep")
    }

    /// Order-2 representation of `z^{-alpha}`: the atom at 0 for `alpha = 2`,
    /// otherwise the density `tau^{1-alpha} / (Gamma(alpha) Gamma(2-alpha))`
    /// on `[0, inf)`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidOrder(alpha, "(0, 2]"));
        }
        if (alpha - 2.0).abs() < 1e-14 {
            return Self::new(0.0, 2.0, vec![Atom { tau: 0.0, weight: 1.0 }], vec![]);
        }
        let coeff = 1.0 / (gamma(alpha) * gamma(2.0 - alpha));
        Self::new(
            0.0,
            2.0,
            vec![],
            vec![DensityPiece { lo: 0.0, hi: f64::INFINITY, coeff, exponent: 1.0 - alpha }],
        )
    }

    /// Order-1 (Stieltjes) representation of `z^{-beta}` for `beta` in
    /// `(0, 1]`: the atom at 0 for `beta = 1`, otherwise the density
    /// `sin(beta pi)/pi * tau^{-beta}` on `[0, inf)`.
    pub fn power_order1(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidOrder(beta, "(0, 1]"));
        }
        if (beta - 1.0).abs() < 1e-14 {
            return Self::new(0.0, 1.0, vec![Atom { tau: 0.0, weight: 1.0 }], vec![]);
        }
        let coeff = (beta * std::f64::consts::PI).sin() / std::f64::consts::PI;
        Self::new(
            0.0,
            1.0,
            vec![],
            vec![DensityPiece { lo: 0.0, hi: f64::INFINITY, coeff, exponent: -beta }],
        )
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }
    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.atoms.is_empty() && self.pieces.is_empty()
    }
    pub fn has_mass_at_origin(&self) -> bool {
        self.atoms.iter().any(|at| at.tau == 0.0) || self.pieces.iter().any(|p| p.lo == 0.0)
    }

    /// `f(z)` on the cut plane `C \ (-inf, 0]`. `z = 0` is admitted only when
    /// the value is finite.
    pub fn evaluate(&self, z: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
        if z.im == 0.0 && z.re < 0.0 {
            return Err(Error::NegativeAxis(z));
        }
        if z == Complex64::new(0.0, 0.0) {
            let atom_at_zero = self.atoms.iter().any(|at| at.tau == 0.0);
            let divergent_piece =
                self.pieces.iter().any(|p| p.lo == 0.0 && p.exponent - self.alpha <= -1.0);
            if atom_at_zero || divergent_piece {
                return Err(Error::NegativeAxis(z));
            }
        }
        let mut val = Complex64::new(self.a, 0.0);
        for at in &self.atoms {
            val += at.weight * (z + at.tau).powf(-self.alpha);
        }
        let scale = z.norm() + 1.0;
        for p in &self.pieces {
            val += p.integrate_against(|tau| (z + tau).powf(-self.alpha), self.alpha, scale, spec)?;
        }
        Ok(val)
    }

    /// The admissibility integral `\int mu(dtau)/(1+tau)^alpha`. Finite for
    /// every representation accepted by `new`; re-checked numerically.
    pub fn admissibility(&self, spec: &QuadratureSpec) -> Result<f64> {
        let mut val = 0.0;
        for at in &self.atoms {
            val += at.weight * (1.0 + at.tau).powf(-self.alpha);
        }
        for p in &self.pieces {
            val += p.integrate_against(|tau| (1.0 + tau).powf(-self.alpha), self.alpha, 1.0, spec)?;
        }
        if !val.is_finite() {
            return Err(Error::DivergentRepresentation { lo: 0.0, exponent: f64::NAN, alpha: self.alpha });
        }
        Ok(val)
    }

    /// Laplace pre-image density of an order-2 representation with `a = 0`:
    /// `m(u) = u \int e^{-u tau} mu(dtau)`, so that `(L m)(z) = f(z)`.
    /// Piece contributions reduce to regularized incomplete gamma functions.
    pub fn laplace_density(&self, u: f64) -> Result<f64> {
        if self.alpha != 2.0 || self.a != 0.0 {
            return Err(Error::InvalidRepresentation(
                "laplace_density requires alpha = 2 and a = 0".into(),
            ));
        }
        Ok(self.laplace_density_unchecked(u))
    }

    pub(crate) fn laplace_density_unchecked(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let mut h = 0.0;
        for at in &self.atoms {
            h += at.weight * (-u * at.tau).exp();
        }
        for p in &self.pieces {
            // int_lo^hi tau^p e^{-u tau} dtau = u^{-p-1} Gamma(p+1) [P(p+1, u hi) - P(p+1, u lo)]
            let a = p.exponent + 1.0;
            let upper = if p.hi.is_infinite() { 1.0 } else { gamma_lr(a, u * p.hi) };
            let lower = if p.lo == 0.0 { 0.0 } else { gamma_lr(a, u * p.lo) };
            h += p.coeff * u.powf(-a) * gamma(a) * (upper - lower);
        }
        u * h
    }

    /// `d/du laplace_density(u)` by central difference; used for recorded
    /// tail estimates only.
    pub(crate) fn laplace_density_slope(&self, u: f64) -> f64 {
        let h = 1e-5 * u.max(1.0);
        (self.laplace_density_unchecked(u + h) - self.laplace_density_unchecked(u - h)) / (2.0 * h)
    }

    /// Measure integral `\int g(tau) mu(dtau)` for `g` smooth away from 0
    /// with `|g(tau)| <~ tau^{-tail_decay}` as `tau -> inf`.
    pub fn integrate_measure<F: Fn(f64) -> f64>(
        &self,
        g: F,
        tail_decay: f64,
        scale: f64,
        spec: &QuadratureSpec,
    ) -> Result<f64> {
        let mut val = 0.0;
        for at in &self.atoms {
            val += at.weight * g(at.tau);
        }
        for p in &self.pieces {
            val += p.integrate_against(&g, tail_decay, scale, spec)?;
        }
        Ok(val)
    }
}

impl DensityPiece {
    /// `\int_{lo}^{hi} coeff tau^exponent phi(tau) dtau` for `phi` smooth on
    /// `(0, inf)` with `|phi(tau)| <~ tau^{-tail_decay}` as `tau -> inf`.
    ///
    /// The head singularity `tau^p` is removed exactly by `w = tau^{p+1}`;
    /// an infinite tail is mapped to `(0, 1]` by `tau = S/u` and the residual
    /// power `u^q` (`q = tail_decay - p - 2`) removed by `u = y^{1/(q+1)}`.
    pub fn integrate_against<V: QuadValue, F: Fn(f64) -> V>(
        &self,
        phi: F,
        tail_decay: f64,
        scale: f64,
        spec: &QuadratureSpec,
    ) -> Result<V> {
        let p = self.exponent;
        let split = if self.hi.is_infinite() {
            (4.0 * scale).max(2.0 * self.lo).max(1.0)
        } else {
            self.hi
        };
        let head_hi = split.min(self.hi);

        let mut total: Option<V> = None;
        let mut acc = |v: V| match &mut total {
            Some(t) => t.add_scaled(1.0, &v),
            None => total = Some(v),
        };

        if head_hi > self.lo {
            let head = if p == 0.0 {
                adaptive(&phi, &[self.lo, head_hi], spec)?
            } else {
                let e = p + 1.0;
                let (wa, wb) = (self.lo.powf(e), head_hi.powf(e));
                adaptive(|w: f64| phi(w.powf(1.0 / e)), &[wa, wb], spec)?.scaled(1.0 / e)
            };
            acc(head);
        }

        if self.hi.is_infinite() {
            let q = tail_decay - p - 2.0;
            if q <= -1.0 {
                return Err(Error::DivergentRepresentation { lo: split, exponent: p, alpha: tail_decay });
            }
            let s = split;
            let psi = |u: f64| phi(s / u).scaled(u.powf(-tail_decay));
            let tail = if q < 0.0 {
                let e = q + 1.0;
                adaptive(|y: f64| psi(y.powf(1.0 / e)), &[0.0, 1.0], spec)?.scaled(1.0 / e)
            } else {
                adaptive(|u: f64| psi(u).scaled(u.powf(q)), &[0.0, 1.0], spec)?
            };
            acc(tail.scaled(s.powf(p + 1.0)));
        }

        Ok(match total {
            Some(t) => t.scaled(self.coeff),
            None => phi(self.lo.max(1.0)).scaled(0.0),
        })
    }
}

/// Product `f1 * f2` of two order-1 Stieltjes functions (the class used by
/// the reciprocal bounds and the sharpness checks).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductStieltjes {
    f1: StieltjesRep,
    f2: StieltjesRep,
}

impl ProductStieltjes {
    pub fn new(f1: StieltjesRep, f2: StieltjesRep) -> Result<Self> {
        if f1.alpha() != 1.0 || f2.alpha() != 1.0 {
            return Err(Error::InvalidOrder(
                if f1.alpha() != 1.0 { f1.alpha() } else { f2.alpha() },
                "both product factors must have order 1",
            ));
        }
        Ok(Self { f1, f2 })
    }

    /// `z^{-alpha}` as the square of the order-1 representation of
    /// `z^{-alpha/2}`, for `alpha` in `(0, 2]`.
    pub fn power(alpha: f64) -> Result<Self> {
        let half = StieltjesRep::power_order1(alpha / 2.0)?;
        Self::new(half.clone(), half)
    }

    pub fn f1(&self) -> &StieltjesRep {
        &self.f1
    }
    pub fn f2(&self) -> &StieltjesRep {
        &self.f2
    }

    pub fn evaluate(&self, z: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
        Ok(self.f1.evaluate(z, spec)? * self.f2.evaluate(z, spec)?)
    }

    /// `g(z) = 1/f(z)`, evaluated pointwise; no representation of `g` is
    /// constructed.
    pub fn reciprocal_eval(&self, z: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
        let v = self.evaluate(z, spec)?;
        if v == Complex64::new(0.0, 0.0) {
            return Err(Error::Validation(format!("reciprocal_eval: f({z}) = 0")));
        }
        Ok(v.inv())
    }

    pub fn has_mass_at_origin(&self) -> bool {
        self.f1.has_mass_at_origin() || self.f2.has_mass_at_origin()
    }
}

/// Outcome of the imaginary-axis comparison `f(s) <= sqrt(2) |f(±is)|`.
#[derive(Debug, Clone, Copy)]
pub struct AxisBound {
    pub lhs: f64,
    pub rhs_plus: f64,
    pub rhs_minus: f64,
    pub holds: bool,
}

/// Checks `f(s) <= sqrt(2) |f(±is)|` for an order-1 Stieltjes function at
/// `s > 0`.
pub fn axis_bound_check(f: &StieltjesRep, s: f64, spec: &QuadratureSpec) -> Result<AxisBound> {
    if f.alpha() != 1.0 {
        return Err(Error::InvalidOrder(f.alpha(), "axis bound requires order 1"));
    }
    if !(s > 0.0) {
        return Err(Error::Validation(format!("axis_bound_check requires s > 0, got {s}")));
    }
    let lhs = f.evaluate(Complex64::new(s, 0.0), spec)?.re;
    let sqrt2 = std::f64::consts::SQRT_2;
    let rhs_plus = sqrt2 * f.evaluate(Complex64::new(0.0, s), spec)?.norm();
    let rhs_minus = sqrt2 * f.evaluate(Complex64::new(0.0, -s), spec)?.norm();
    Ok(AxisBound { lhs, rhs_plus, rhs_minus, holds: lhs <= rhs_plus.min(rhs_minus) + INEQ_SLACK })
}

/// Closed form of the regularizing kernel `r_0(t, tau)` with
/// `z^2/(1+z)^2 f(z) = \int_0^inf e^{-zt} r(t) dt`, `r(t) = \int r_0(t, tau) mu(dtau)`.
///
/// Near `tau = 1` the `(1-tau)^3` denominator cancels against the numerator;
/// a series in `eps = 1 - tau` takes over below `|eps| < 5e-3`, where the
/// closed form's rounding noise (~1e-16/eps^3) and the 4-term truncation
/// error (~eps^4) are both under 1e-9.
pub fn regularized_kernel_r0(t: f64, tau: f64) -> f64 {
    debug_assert!(t >= 0.0 && tau >= 0.0);
    let eps = 1.0 - tau;
    if eps.abs() < 5e-3 {
        let a0 = t * (t * t - 6.0 * t + 6.0) / 6.0;
        let a1 = t * t * (t - 6.0) * (t - 2.0) / 12.0;
        let a2 = t * t * t * (t * t - 10.0 * t + 20.0) / 40.0;
        let a3 = t * t * t * t * (t * t - 12.0 * t + 30.0) / 180.0;
        (-t).exp() * (a0 + eps * (a1 + eps * (a2 + eps * a3)))
    } else {
        ((-2.0 + eps * tau * t) * tau * (-tau * t).exp() + (t + (2.0 - t) * tau) * (-t).exp())
            / (eps * eps * eps)
    }
}

/// One sample point of the regularized-transform identity check.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedTransformPoint {
    pub z: Complex64,
    pub transformed: Complex64,
    pub expected: Complex64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RegularizedTransformReport {
    pub points: Vec<RegularizedTransformPoint>,
    /// `(t, r(t))` samples of the kernel on the requested grid.
    pub kernel_samples: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Verifies, at `z` in `{1, 2, 1+i}`, that Laplace-transforming
/// `r(t) = \int r_0(t, tau) mu(dtau)` reproduces `z^2 f(z) / (1+z)^2`.
pub fn regularized_transform_check(
    f: &StieltjesRep,
    t_grid: &[f64],
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<RegularizedTransformReport> {
    if f.alpha() != 2.0 || f.a() != 0.0 {
        return Err(Error::InvalidRepresentation("regularized_transform_check requires alpha = 2, a = 0".into()));
    }
    // the kernel r0 carries ~1e-10 of intrinsic f64 noise near tau = 1, so
    // the inner tolerances follow the check tolerance instead of the spec
    let inner = QuadratureSpec {
        rel_tol: (tol * 1e-2).max(1e-12),
        abs_tol: (tol * 1e-2).max(1e-12),
        ..spec.clone()
    };
    let r = |t: f64| -> Result<f64> {
        f.integrate_measure(|tau| regularized_kernel_r0(t, tau), 2.0, 1.0 + t, &inner)
    };

    let kernel_samples = t_grid.iter().map(|&t| Ok((t, r(t)?))).collect::<Result<Vec<_>>>()?;

    let outer = QuadratureSpec {
        rel_tol: (tol * 1e-1).max(1e-11),
        abs_tol: (tol * 1e-2).max(1e-12),
        ..spec.clone()
    };
    let mut points = Vec::new();
    let mut pass = true;
    for z in [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0)] {
        let transformed =
            crate::quadrature::laplace_transform(|t| r(t).unwrap_or(f64::NAN), z, &outer)?;
        let one = Complex64::new(1.0, 0.0);
        let expected = z * z / ((one + z) * (one + z)) * f.evaluate(z, spec)?;
        let ok = (transformed - expected).norm() <= tol * (1.0 + expected.norm());
        pass &= ok;
        points.push(RegularizedTransformPoint { z, transformed, expected, pass: ok });
    }
    Ok(RegularizedTransformReport { points, kernel_samples, pass })
}

// --- JSON wire format -------------------------------------------------------
//
// {"a": 0.0, "alpha": 2.0, "atoms": [[tau, w], ...], "pieces": [[lo, hi, c, p], ...]}
// where `hi` may be the string "inf".

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Bound {
    Num(f64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepWire {
    a: f64,
    alpha: f64,
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pieces: Vec<(f64, Bound, f64, f64)>,
}

impl Serialize for StieltjesRep {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = RepWire {
            a: self.a,
            alpha: self.alpha,
            atoms: self.atoms.iter().map(|at| (at.tau, at.weight)).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    let hi = if p.hi.is_infinite() {
                        Bound::Word("inf".into())
                    } else {
                        Bound::Num(p.hi)
                    };
                    (p.lo, hi, p.coeff, p.exponent)
                })
                .collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StieltjesRep {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = RepWire::deserialize(deserializer)?;
        let atoms = wire.atoms.iter().map(|&(tau, weight)| Atom { tau, weight }).collect();
        let pieces = wire
            .pieces
            .into_iter()
            .map(|(lo, hi, coeff, exponent)| {
                let hi = match hi {
                    Bound::Num(v) => v,
                    Bound::Word(w) if w.eq_ignore_ascii_case("inf") => f64::INFINITY,
                    Bound::Word(w) => return Err(D::Error::custom(format!("bad upper bound {w:?}"))),
                };
                Ok(DensityPiece { lo, hi, coeff, exponent })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        StieltjesRep::new(wire.a, wire.alpha, atoms, pieces).map_err(D::Error::custom)
    }
}

impl Serialize for ProductStieltjes {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            f1: &'a StieltjesRep,
            f2: &'a StieltjesRep,
        }
        Wire { f1: &self.f1, f2: &self.f2 }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProductStieltjes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            f1: StieltjesRep,
            f2: StieltjesRep,
        }
        let w = Wire::deserialize(deserializer)?;
        ProductStieltjes::new(w.f1, w.f2).map_err(D::Error::custom)
    }
}

/// The built-in representation corpus used by suites and tests.
pub mod corpus {
    use super::*;

    /// `1/z^2`: order-2 atom at the origin.
    pub fn inv_z_sq() -> StieltjesRep {
        StieltjesRep::new(0.0, 2.0, vec![Atom { tau: 0.0, weight: 1.0 }], vec![]).unwrap()
    }

    /// `1/(z+1)^2`: order-2 atom at `tau = 1`.
    pub fn inv_shifted_sq() -> StieltjesRep {
        StieltjesRep::new(0.0, 2.0, vec![Atom { tau: 1.0, weight: 1.0 }], vec![]).unwrap()
    }

    /// Order-2 density `1` on `[0, 1)`: `f(z) = 1/z - 1/(z+1) = 1/(z(z+1))`.
    pub fn unit_density() -> StieltjesRep {
        StieltjesRep::new(
            0.0,
            2.0,
            vec![],
            vec![DensityPiece { lo: 0.0, hi: 1.0, coeff: 1.0, exponent: 0.0 }],
        )
        .unwrap()
    }

    /// `1/z` as an order-1 atom at the origin.
    pub fn inv_z() -> StieltjesRep {
        StieltjesRep::new(0.0, 1.0, vec![Atom { tau: 0.0, weight: 1.0 }], vec![]).unwrap()
    }

    /// `1/(z+1)` as an order-1 atom at `tau = 1`.
    pub fn inv_z_plus_one() -> StieltjesRep {
        StieltjesRep::new(0.0, 1.0, vec![Atom { tau: 1.0, weight: 1.0 }], vec![]).unwrap()
    }

    /// `1 + 1/z` (order 1).
    pub fn one_plus_inv_z() -> StieltjesRep {
        StieltjesRep::new(1.0, 1.0, vec![Atom { tau: 0.0, weight: 1.0 }], vec![]).unwrap()
    }

    /// `1/z^2 = (1/z)(1/z)` as a product.
    pub fn product_inv_z_sq() -> ProductStieltjes {
        ProductStieltjes::new(inv_z(), inv_z()).unwrap()
    }

    /// `(1 + 1/z)^2` as a product.
    pub fn product_one_plus_inv_sq() -> ProductStieltjes {
        ProductStieltjes::new(one_plus_inv_z(), one_plus_inv_z()).unwrap()
    }

    /// `1/(z(z+1))` as a product.
    pub fn product_inv_z_shifted() -> ProductStieltjes {
        ProductStieltjes::new(inv_z(), inv_z_plus_one()).unwrap()
    }

    /// Order-2 corpus used by norm/envelope suites.
    pub fn order2_corpus() -> Vec<(String, StieltjesRep)> {
        vec![
            ("1/z^2".into(), inv_z_sq()),
            ("1/(z+1)^2".into(), inv_shifted_sq()),
            ("density-[0,1]".into(), unit_density()),
            ("z^-0.5".into(), StieltjesRep::power(0.5).unwrap()),
            ("z^-1".into(), StieltjesRep::power(1.0).unwrap()),
            ("z^-1.5".into(), StieltjesRep::power(1.5).unwrap()),
        ]
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen oracle values keep full digits
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_atoms_and_density() {
        let s = spec();
        let f = corpus::inv_z();
        assert_relative_eq!(f.evaluate(c(2.0, 0.0), &s).unwrap().re, 0.5, epsilon = 1e-14);

        let u = corpus::unit_density();
        // int_0^1 (1+tau)^{-2} dtau = 1/2 = 1/(z(z+1)) at z = 1
        assert_relative_eq!(u.evaluate(c(1.0, 0.0), &s).unwrap().re, 0.5, epsilon = 1e-11);
    }

    #[test]
    fn power_rep_matches_direct_power() {
        let s = spec();
        for alpha in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let f = StieltjesRep::power(alpha).unwrap();
            for z in [0.5, 1.0, 4.0, 10.0] {
                let got = f.evaluate(c(z, 0.0), &s).unwrap().re;
                let want = z.powf(-alpha);
                assert!((got - want).abs() <= 1e-8 * want, "alpha={alpha} z={z}: {got} vs {want}");
            }
            let zc = c(1.0, 1.0);
            let got = f.evaluate(zc, &s).unwrap();
            let want = zc.powf(-alpha);
            assert!((got - want).norm() <= 1e-8 * want.norm(), "alpha={alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn power_order1_matches_direct_power() {
        let s = spec();
        for beta in [0.25, 0.5, 0.75, 1.0] {
            let f = StieltjesRep::power_order1(beta).unwrap();
            for z in [0.5, 1.0, 4.0] {
                let got = f.evaluate(c(z, 0.0), &s).unwrap().re;
                assert!((got - z.powf(-beta)).abs() <= 1e-8 * z.powf(-beta), "beta={beta} z={z}");
            }
        }
    }

    #[test]
    fn admissibility_values() {
        let s = spec();
        assert_relative_eq!(corpus::inv_z().admissibility(&s).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(corpus::unit_density().admissibility(&s).unwrap(), 0.5, epsilon = 1e-11);
        assert_relative_eq!(
            StieltjesRep::power(0.5).unwrap().admissibility(&s).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn rejects_divergent_and_invalid_reps() {
        let bad = StieltjesRep::new(
            0.0,
            1.0,
            vec![],
            vec![DensityPiece { lo: 0.0, hi: f64::INFINITY, coeff: 1.0, exponent: 0.5 }],
        );
        assert!(matches!(bad, Err(Error::DivergentRepresentation { .. })));
        assert!(StieltjesRep::new(-1.0, 1.0, vec![], vec![]).is_err());
        assert!(StieltjesRep::new(0.0, 2.5, vec![], vec![]).is_err());
        assert!(StieltjesRep::new(0.0, 1.0, vec![Atom { tau: 0.0, weight: -1.0 }], vec![]).is_err());
    }

    #[test]
    fn evaluate_domain_errors() {
        let s = spec();
        let f = corpus::inv_z();
        assert!(matches!(f.evaluate(c(-1.0, 0.0), &s), Err(Error::NegativeAxis(_))));
        assert!(matches!(f.evaluate(c(0.0, 0.0), &s), Err(Error::NegativeAxis(_))));
        // z = 0 is fine when the value is finite
        let g = corpus::inv_z_plus_one();
        assert_relative_eq!(g.evaluate(c(0.0, 0.0), &s).unwrap().re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn reciprocal_examples() {
        let s = spec();
        let f = corpus::product_one_plus_inv_sq();
        assert_relative_eq!(f.reciprocal_eval(c(1.0, 0.0), &s).unwrap().re, 0.25, epsilon = 1e-12);
        let g = corpus::product_inv_z_sq();
        assert_relative_eq!(g.reciprocal_eval(c(2.0, 0.0), &s).unwrap().re, 4.0, epsilon = 1e-12);
        let h = corpus::product_inv_z_shifted();
        assert_relative_eq!(h.reciprocal_eval(c(1.0, 0.0), &s).unwrap().re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn product_times_reciprocal_is_one() {
        let s = spec();
        for f in [
            corpus::product_inv_z_sq(),
            corpus::product_one_plus_inv_sq(),
            corpus::product_inv_z_shifted(),
            ProductStieltjes::power(1.0).unwrap(),
        ] {
            for x in [0.3, 1.0, 7.5] {
                let z = c(x, 0.0);
                let prod = f.evaluate(z, &s).unwrap() * f.reciprocal_eval(z, &s).unwrap();
                assert!((prod - c(1.0, 0.0)).norm() < 1e-12, "{prod}");
            }
        }
    }

    #[test]
    fn axis_bound_examples() {
        let s = spec();
        let b = axis_bound_check(&corpus::inv_z(), 3.0, &s).unwrap();
        assert_relative_eq!(b.lhs, 1.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(b.rhs_plus, std::f64::consts::SQRT_2 / 3.0, epsilon = 1e-13);
        assert!(b.holds);

        let b = axis_bound_check(&corpus::inv_z_plus_one(), 1.0, &s).unwrap();
        assert_relative_eq!(b.lhs, 0.5, epsilon = 1e-13);
        assert_relative_eq!(b.rhs_plus, 1.0, epsilon = 1e-13);
        assert!(b.holds);

        let b = axis_bound_check(&StieltjesRep::power_order1(0.5).unwrap(), 1.0, &s).unwrap();
        assert!(b.holds);
    }

    #[test]
    fn axis_bound_over_order1_corpus() {
        let s = spec();
        for f in [
            corpus::inv_z(),
            corpus::inv_z_plus_one(),
            corpus::one_plus_inv_z(),
            StieltjesRep::power_order1(0.25).unwrap(),
            StieltjesRep::power_order1(0.75).unwrap(),
        ] {
            for x in [0.1, 0.5, 1.0, 3.0, 10.0] {
                assert!(axis_bound_check(&f, x, &s).unwrap().holds, "s={x}");
            }
        }
    }

    #[test]
    fn evaluate_is_nonincreasing_on_positive_axis() {
        let s = spec();
        for (_, f) in corpus::order2_corpus() {
            let mut prev = f64::INFINITY;
            for x in [0.1, 0.3, 1.0, 3.0, 10.0, 30.0] {
                let v = f.evaluate(c(x, 0.0), &s).unwrap();
                assert!(v.im.abs() < 1e-12 && v.re > 0.0);
                assert!(v.re <= prev + 1e-12, "not nonincreasing at {x}");
                prev = v.re;
            }
        }
    }

    #[test]
    fn laplace_density_values() {
        let f = corpus::inv_z_sq();
        assert_relative_eq!(f.laplace_density(3.0).unwrap(), 3.0, epsilon = 1e-13);
        let g = corpus::inv_shifted_sq();
        assert_relative_eq!(g.laplace_density(2.0).unwrap(), 2.0 * (-2.0f64).exp(), epsilon = 1e-13);
        let u = corpus::unit_density();
        assert_relative_eq!(u.laplace_density(1.0).unwrap(), 1.0 - (-1.0f64).exp(), epsilon = 1e-12);
        // power rep: m(v) = v^{alpha-1} / Gamma(alpha)
        let p = StieltjesRep::power(0.5).unwrap();
        assert_relative_eq!(
            p.laplace_density(2.0).unwrap(),
            2.0f64.powf(-0.5) / gamma(0.5),
            epsilon = 1e-10
        );
    }

    #[test]
    fn laplace_density_round_trip() {
        // (L m)(z) = f(z) to 1e-8 for the alpha = 2 corpus
        let s = spec();
        for (name, f) in corpus::order2_corpus() {
            for z in [c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0)] {
                let lhs =
                    crate::quadrature::laplace_transform(|u| f.laplace_density_unchecked(u), z, &s)
                        .unwrap();
                let rhs = f.evaluate(z, &s).unwrap();
                assert!(
                    (lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()),
                    "{name} at {z}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn r0_closed_form_values() {
        assert_eq!(regularized_kernel_r0(0.0, 0.7), 0.0);
        assert_relative_eq!(
            regularized_kernel_r0(1.0, 1.0),
            1.0 / (6.0 * std::f64::consts::E),
            epsilon = 1e-13
        );
        // the defining integral form gives t e^{-t tau} at tau = 0
        assert_relative_eq!(regularized_kernel_r0(1.0, 0.0), (-1.0f64).exp(), epsilon = 1e-13);
    }

    #[test]
    fn r0_series_branch_matches_high_precision_oracle() {
        // frozen 30-digit values of the closed form inside the series branch
        let cases = [
            (1.0, 0.99985, 0.061336234936698707),
            (1.0, 1.00015, 0.061290250006290162),
            (2.5, 0.9995, -0.094093126083837856),
            (6.0, 1.0005, 0.01487249968811449),
            (1.0, 0.996, 0.061927993754675709),
            (1.0, 1.004, 0.060701723980306299),
            (0.3, 0.999, 0.15895935584719347),
            (2.0, 1.0, -0.090223522157741795),
        ];
        for (t, tau, want) in cases {
            let got = regularized_kernel_r0(t, tau);
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "t={t} tau={tau}: {got} vs {want}"
            );
        }
        // continuity across the branch switch at |1-tau| = 5e-3
        for t in [0.3, 1.0, 2.5, 6.0] {
            for tau in [1.0 - 5.5e-3, 1.0 + 5.5e-3] {
                let closed = regularized_kernel_r0(t, tau);
                let inside = regularized_kernel_r0(t, 1.0 + (tau - 1.0) * 0.85);
                assert!(
                    (closed - inside).abs() <= 1e-3 * (1.0 + closed.abs()),
                    "discontinuity at t={t} tau={tau}"
                );
            }
        }
    }

    #[test]
    fn r0_integral_form_agrees_with_closed_form() {
        // independent oracle: quadrature of the defining integral
        let s = spec();
        for (t, tau) in [(1.0, 0.0), (1.0, 0.5), (2.0, 0.5), (0.7, 3.0), (2.0, 1.0)] {
            let inner = crate::quadrature::integrate(
                |x: f64| (-x * tau).exp() * x.exp() * x * (t - x - 2.0),
                0.0,
                t,
                &s,
            )
            .unwrap();
            let oracle = t * (-t * tau).exp() + (-t).exp() * inner;
            let got = regularized_kernel_r0(t, tau);
            assert!((got - oracle).abs() < 1e-11 * (1.0 + oracle.abs()), "t={t} tau={tau}");
        }
    }

    #[test]
    fn r0_absolute_integral_is_dominated() {
        // int_0^inf |r0(t,tau)| dt stays finite relative to (1+tau)^{-2};
        // the constant is empirical and only finiteness is asserted
        let s = spec();
        let mut max_ratio = 0.0f64;
        for tau in [0.0f64, 0.3, 1.0, 3.0, 10.0, 50.0] {
            let decay = if tau > 0.0 { tau.min(1.0) } else { 1.0 };
            let total = crate::quadrature::halfline_integrate(
                |t| regularized_kernel_r0(t, tau).abs(),
                decay,
                &s,
            )
            .unwrap();
            let ratio = total * (1.0 + tau) * (1.0 + tau);
            assert!(ratio.is_finite());
            max_ratio = max_ratio.max(ratio);
        }
        assert!(max_ratio.is_finite() && max_ratio > 0.0);
    }

    #[test]
    fn regularized_transform_check_corpus() {
        let s = spec();
        for f in [corpus::inv_shifted_sq(), corpus::inv_z_sq(), corpus::unit_density()] {
            let rep = regularized_transform_check(&f, &[0.5, 1.0, 2.0], 1e-7, &s).unwrap();
            assert!(rep.pass, "{:?}", rep.points);
        }
        // frozen examples: both sides 1/16, 1/9, 1/8
        let rep = regularized_transform_check(&corpus::inv_shifted_sq(), &[1.0], 1e-7, &s).unwrap();
        assert_relative_eq!(rep.points[0].expected.re, 1.0 / 16.0, epsilon = 1e-12);
        let rep = regularized_transform_check(&corpus::inv_z_sq(), &[1.0], 1e-7, &s).unwrap();
        assert_relative_eq!(rep.points[1].expected.re, 1.0 / 9.0, epsilon = 1e-12);
        let rep = regularized_transform_check(&corpus::unit_density(), &[1.0], 1e-7, &s).unwrap();
        assert_relative_eq!(rep.points[0].expected.re, 1.0 / 8.0, epsilon = 1e-11);
    }

    #[test]
    fn json_round_trip_with_inf() {
        let f = StieltjesRep::power(0.5).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"inf\""));
        let back: StieltjesRep = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);

        let g: StieltjesRep = serde_json::from_str(
            r#"{"a": 0.5, "alpha": 1.0, "atoms": [[0.0, 1.0]], "pieces": [[0.0, 2.0, 0.25, -0.5]]}"#,
        )
        .unwrap();
        assert_eq!(g.a(), 0.5);
        assert_eq!(g.pieces()[0].exponent, -0.5);

        let bad: std::result::Result<StieltjesRep, _> =
            serde_json::from_str(r#"{"a": 0.0, "alpha": 3.0, "atoms": [], "pieces": []}"#);
        assert!(bad.is_err());
    }
}
