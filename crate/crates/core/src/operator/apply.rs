//! Applying the semigroup, the Euler approximant, their difference, and
//! Stieltjes functions of the generator to state vectors.
//!
//! Diagonal models short-circuit to coordinate-wise scalar evaluation; the
//! resolvent-quadrature path works for any model and must agree with the
//! short-circuit (the operational form of the functional-calculus product
//! rule).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Generator, StateVector};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::scalar::{delta_scalar, euler_rational, semigroup_scalar};
use crate::stieltjes::StieltjesRep;

impl Generator {
    /// `e^{-tA} x`.
    pub fn semigroup_apply(&self, t: f64, x: &StateVector) -> Result<StateVector> {
        self.check_dim(x)?;
        if t < 0.0 {
            return Err(Error::Validation(format!("semigroup_apply requires t >= 0, got {t}")));
        }
        Ok(match self {
            Self::Diagonal(d) => {
                let coords = d
                    .eigenvalues()
                    .iter()
                    .zip(x.coords().iter())
                    .map(|(z, xi)| semigroup_scalar(*z, t) * xi)
                    .collect();
                StateVector::from_complex(coords)
            }
            Self::Matrix(m) => {
                let e = super::expm::matrix_exponential(&(m.matrix() * Complex64::new(-t, 0.0)));
                StateVector::from(e * x.coords())
            }
        })
    }

    /// `(I + (t/n)A)^{-n} x`. The matrix path factors once and solves n
    /// times.
    pub fn euler_apply(&self, n: u32, t: f64, x: &StateVector) -> Result<StateVector> {
        self.check_dim(x)?;
        if n == 0 || t <= 0.0 {
            return Err(Error::Validation(format!("euler_apply requires n >= 1, t > 0 (got n={n}, t={t})")));
        }
        Ok(match self {
            Self::Diagonal(d) => {
                let coords = d
                    .eigenvalues()
                    .iter()
                    .zip(x.coords().iter())
                    .map(|(z, xi)| euler_rational(*z, n, t) * xi)
                    .collect();
                StateVector::from_complex(coords)
            }
            Self::Matrix(m) => {
                let h = Complex64::new(t / f64::from(n), 0.0);
                let b = DMatrix::identity(m.dim(), m.dim()) + m.matrix() * h;
                let lu = b.lu();
                let mut y = x.coords().clone();
                for _ in 0..n {
                    y = lu.solve(&y).ok_or(Error::SingularSolve)?;
                }
                StateVector::from(y)
            }
        })
    }

    /// `delta_{n,t}(A) x = E_{n,t}(A) x - e^{-tA} x`.
    pub fn delta_apply(&self, n: u32, t: f64, x: &StateVector) -> Result<StateVector> {
        if let Self::Diagonal(d) = self {
            self.check_dim(x)?;
            let coords = d
                .eigenvalues()
                .iter()
                .zip(x.coords().iter())
                .map(|(z, xi)| delta_scalar(*z, n, t) * xi)
                .collect();
            return Ok(StateVector::from_complex(coords));
        }
        let e = self.euler_apply(n, t, x)?;
        let s = self.semigroup_apply(t, x)?;
        Ok(e.sub(&s))
    }

    /// `A x`.
    pub fn apply(&self, x: &StateVector) -> Result<StateVector> {
        self.check_dim(x)?;
        Ok(match self {
            Self::Diagonal(d) => {
                let coords = d
                    .eigenvalues()
                    .iter()
                    .zip(x.coords().iter())
                    .map(|(z, xi)| z * xi)
                    .collect();
                StateVector::from_complex(coords)
            }
            Self::Matrix(m) => StateVector::from(m.matrix() * x.coords()),
        })
    }

    /// `(A + tau)^{-k} x` for `k` in `{1, 2}`.
    pub fn resolvent_pow_apply(&self, tau: f64, k: u32, x: &StateVector) -> Result<StateVector> {
        self.check_dim(x)?;
        match self {
            Self::Diagonal(d) => {
                if tau == 0.0 && !d.is_injective() {
                    return Err(Error::NonInjective);
                }
                let coords = d
                    .eigenvalues()
                    .iter()
                    .zip(x.coords().iter())
                    .map(|(z, xi)| (z + tau).powi(-(k as i32)) * xi)
                    .collect();
                Ok(StateVector::from_complex(coords))
            }
            Self::Matrix(m) => {
                let b = m.matrix() + DMatrix::identity(m.dim(), m.dim()) * Complex64::new(tau, 0.0);
                let lu = b.lu();
                let mut y = x.coords().clone();
                for _ in 0..k {
                    y = lu.solve(&y).ok_or(Error::SingularSolve)?;
                }
                Ok(StateVector::from(y))
            }
        }
    }

    fn spectral_scale(&self) -> f64 {
        match self {
            Self::Diagonal(d) => d.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
            Self::Matrix(m) => super::spectral_norm_estimate(m.matrix()),
        }
    }

    /// `f(A) x`. Diagonal models evaluate `f` coordinate-wise on the
    /// spectrum; matrix models fall through to the quadrature path.
    pub fn function_apply(
        &self,
        f: &StieltjesRep,
        x: &StateVector,
        spec: &QuadratureSpec,
    ) -> Result<StateVector> {
        self.check_dim(x)?;
        if f.has_mass_at_origin() && !self.is_injective() {
            return Err(Error::NonInjective);
        }
        match self {
            Self::Diagonal(d) => {
                let mut coords = Vec::with_capacity(d.dim());
                for (z, xi) in d.eigenvalues().iter().zip(x.coords().iter()) {
                    coords.push(f.evaluate(*z, spec)? * xi);
                }
                Ok(StateVector::from_complex(coords))
            }
            Self::Matrix(_) => self.function_apply_quadrature(f, x, spec),
        }
    }

    /// `f(A) x` through resolvent quadrature:
    /// `a x + sum_j w_j (A + tau_j)^{-alpha} x + int c tau^p (A + tau)^{-alpha} x dtau`.
    /// Supports representation orders 1 and 2 (single/double solves).
    pub fn function_apply_quadrature(
        &self,
        f: &StieltjesRep,
        x: &StateVector,
        spec: &QuadratureSpec,
    ) -> Result<StateVector> {
        self.check_dim(x)?;
        if f.has_mass_at_origin() && !self.is_injective() {
            return Err(Error::NonInjective);
        }
        let order = if (f.alpha() - 1.0).abs() < 1e-12 {
            1u32
        } else if (f.alpha() - 2.0).abs() < 1e-12 {
            2u32
        } else {
            return Err(Error::UnsupportedOperatorOrder(f.alpha()));
        };

        let mut acc: DVector<Complex64> = x.coords() * Complex64::new(f.a(), 0.0);
        for atom in f.atoms() {
            let r = self.resolvent_pow_apply(atom.tau, order, x)?;
            acc.axpy(Complex64::new(atom.weight, 0.0), r.coords(), Complex64::new(1.0, 0.0));
        }
        let scale = self.spectral_scale() + 1.0;
        for piece in f.pieces() {
            let contribution = piece.integrate_against(
                |tau| match self.resolvent_pow_apply(tau, order, x) {
                    Ok(v) => v.into_inner(),
                    Err(_) => DVector::from_element(x.dim(), Complex64::new(f64::NAN, f64::NAN)),
                },
                f.alpha(),
                scale,
                spec,
            )?;
            if contribution.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::SingularSolve);
            }
            acc += contribution;
        }
        Ok(StateVector::from(acc))
    }

    /// `A^{-alpha} x` for `alpha` in `(0, 2]` via the order-2 power
    /// representation.
    pub fn fractional_power_apply(
        &self,
        alpha: f64,
        x: &StateVector,
        spec: &QuadratureSpec,
    ) -> Result<StateVector> {
        let f = StieltjesRep::power(alpha)?;
        self.function_apply(&f, x, spec)
    }

    /// The forward power `A^alpha x` for `alpha` in `(0, 2]` (principal
    /// branch on the spectrum). Matrix models compose `A^2` with the inverse
    /// power `A^{-(2-alpha)}`.
    pub fn forward_power_apply(
        &self,
        alpha: f64,
        x: &StateVector,
        spec: &QuadratureSpec,
    ) -> Result<StateVector> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidOrder(alpha, "(0, 2]"));
        }
        self.check_dim(x)?;
        match self {
            Self::Diagonal(d) => {
                let coords = d
                    .eigenvalues()
                    .iter()
                    .zip(x.coords().iter())
                    .map(|(z, xi)| {
                        if *z == Complex64::new(0.0, 0.0) {
                            Complex64::new(0.0, 0.0)
                        } else {
                            z.powf(alpha) * xi
                        }
                    })
                    .collect();
                Ok(StateVector::from_complex(coords))
            }
            Self::Matrix(_) => {
                let inner = if (alpha - 2.0).abs() < 1e-12 {
                    x.clone()
                } else if (alpha - 1.0).abs() < 1e-12 {
                    return self.apply(x);
                } else {
                    self.fractional_power_apply(2.0 - alpha, x, spec)?
                };
                self.apply(&self.apply(&inner)?)
            }
        }
    }
}
