//! Scalar symbols of the Euler scheme: `e_t(z) = e^{-tz}`, the rational
//! approximant `r_{n,t}(z) = (1 + tz/n)^{-n}` and their difference
//! `delta_{n,t} = r_{n,t} - e_t` on the closed right half-plane.

use num_complex::Complex64;

/// Comparison slack for strict inequalities evaluated in floating point.
pub const INEQ_SLACK: f64 = 1e-12;

/// `e^{-tz}`. Contractive for `Re z >= 0`, `t >= 0`.
pub fn semigroup_scalar(z: Complex64, t: f64) -> Complex64 {
    (-t * z).exp()
}

/// `(1 + tz/n)^{-n}`, evaluated as `exp(-n Log(1 + tz/n))` with the principal
/// logarithm so that n up to 10^6 neither overflows nor loses the phase.
/// Contractive for `Re z >= 0`; the pole `1 + tz/n = 0` needs `Re z < 0`.
pub fn euler_rational(z: Complex64, n: u32, t: f64) -> Complex64 {
    let nf = f64::from(n);
    let w = Complex64::new(1.0, 0.0) + z * (t / nf);
    (-nf * w.ln()).exp()
}

/// `delta_{n,t}(z) = r_{n,t}(z) - e_t(z)`.
pub fn delta_scalar(z: Complex64, n: u32, t: f64) -> Complex64 {
    euler_rational(z, n, t) - semigroup_scalar(z, t)
}

/// Outcome of the lower-bound probe at `z = ±i sqrt(n)/t`.
#[derive(Debug, Clone, Copy)]
pub struct DeltaLowerBound {
    /// `|delta_{n,t}(±i sqrt(n)/t)|`; independent of `t`.
    pub value: f64,
    /// `1 - 1/sqrt(2)`.
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates `|delta_{n,t}(sign * i sqrt(n)/t)|` against the universal lower
/// bound `1 - 1/sqrt(2)`. Substituting `z = i sqrt(n)/t` cancels `t`, so the
/// value depends on `n` only.
pub fn delta_lower_bound_probe(n: u32, t: f64, sign: i8) -> DeltaLowerBound {
    let s = if sign < 0 { -1.0 } else { 1.0 };
    let z = Complex64::new(0.0, s * f64::from(n).sqrt() / t);
    let value = delta_scalar(z, n, t).norm();
    let bound = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    DeltaLowerBound {
        value,
        bound,
        holds: value >= bound - INEQ_SLACK,
    }
}

/// Threshold below which `delta_{n,t}(z)/z^2` switches to the series path.
const SMALL_TZ: f64 = 1e-4;

/// `delta_{n,t}(z)/z^2` for small real `z > 0`. Converges to `t^2/(2n)` as
/// `z -> 0+`. Direct subtraction loses all digits for `|tz|` small, so below
/// `|tz| < 1e-4` both factors are expanded: with `h = t/n`,
/// `r_{n,t}(z) = exp(-tz + g)` where `g = n[(hz)^2/2 - (hz)^3/3 + ...]`,
/// hence `delta/z^2 = e^{-tz} expm1(g)/z^2`.
pub fn delta_small_z_ratio(n: u32, t: f64, z: f64) -> f64 {
    let nf = f64::from(n);
    if (t * z).abs() < SMALL_TZ {
        let hz = t * z / nf;
        let g = nf * (hz * hz) * (0.5 - hz / 3.0 + hz * hz / 4.0 - hz * hz * hz / 5.0);
        (-t * z).exp() * g.exp_m1() / (z * z)
    } else {
        let r = (-nf * (t * z / nf).ln_1p()).exp();
        let e = (-t * z).exp();
        (r - e) / (z * z)
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen oracle values keep full digits
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn semigroup_identity_and_basic_values() {
        assert_eq!(semigroup_scalar(Complex64::new(0.0, 0.0), 5.0), Complex64::new(1.0, 0.0));
        assert_relative_eq!(
            semigroup_scalar(Complex64::new(1.0, 0.0), 1.0).re,
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        let rot = semigroup_scalar(Complex64::new(0.0, 1.0), 1.0);
        assert_relative_eq!(rot.re, 1f64.cos(), max_relative = 1e-15);
        assert_relative_eq!(rot.im, -(1f64.sin()), max_relative = 1e-15);
        assert!((rot.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn euler_rational_basic_values() {
        assert_eq!(euler_rational(Complex64::new(0.0, 0.0), 7, 3.0), Complex64::new(1.0, 0.0));
        assert_relative_eq!(euler_rational(Complex64::new(1.0, 0.0), 2, 2.0).re, 0.25, max_relative = 1e-14);
        assert_relative_eq!(
            euler_rational(Complex64::new(1.0, 0.0), 4, 2.0).re,
            1.0 / 1.5f64.powi(4),
            max_relative = 1e-14
        );
    }

    #[test]
    fn delta_scalar_values() {
        assert_eq!(delta_scalar(Complex64::new(0.0, 0.0), 3, 2.0).norm(), 0.0);
        assert_relative_eq!(
            delta_scalar(Complex64::new(1.0, 0.0), 1, 1.0).re,
            0.5 - (-1.0f64).exp(),
            max_relative = 1e-14
        );
        // 1/(1+i) - e^{-i}, by direct complex arithmetic
        let d = delta_scalar(Complex64::new(0.0, 1.0), 1, 1.0);
        assert_relative_eq!(d.re, -0.040302305868139717, max_relative = 1e-13);
        assert_relative_eq!(d.im, 0.341470984807896507, max_relative = 1e-13);
        assert_relative_eq!(d.norm(), 0.343841110578656339, max_relative = 1e-13);
    }

    #[test]
    fn lower_bound_probe_values_and_t_independence() {
        let p = delta_lower_bound_probe(1, 1.0, 1);
        assert_relative_eq!(p.value, 0.343841110578656339, max_relative = 1e-13);
        assert_relative_eq!(p.bound, 0.292893218813452476, max_relative = 1e-15);
        assert!(p.holds);

        let q = delta_lower_bound_probe(1, 17.3, 1);
        assert_relative_eq!(q.value, p.value, max_relative = 1e-12);

        let r = delta_lower_bound_probe(10_000, 1.0, -1);
        assert!(r.value >= r.bound - INEQ_SLACK);
        assert_relative_eq!(r.value, 0.393462741113556702, max_relative = 1e-10);
    }

    #[test]
    fn lower_bound_probe_holds_across_grid() {
        for t in [0.01, 1.0, 100.0] {
            for n in (1..=10_000).step_by(37) {
                assert!(delta_lower_bound_probe(n, t, 1).holds, "n={n} t={t}");
                assert!(delta_lower_bound_probe(n, t, -1).holds, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn small_z_ratio_limits() {
        // limit values t^2/(2n); first-order deviation is (t + 2t/(3n)) z
        for (n, t) in [(1u32, 1.0f64), (8, 2.0), (100, 1.0), (1000, 1.0)] {
            let z = 1e-6;
            let ratio = delta_small_z_ratio(n, t, z);
            let limit = t * t / (2.0 * f64::from(n));
            assert!(
                (ratio / limit - 1.0).abs() <= 2.0 * t * z,
                "n={n} t={t}: {ratio} vs {limit}"
            );
        }
        // frozen oracle values at z = 1e-3 (direct path; cancellation noise ~ eps/(tz)^2)
        assert_relative_eq!(delta_small_z_ratio(1, 1.0, 1e-3), 0.499167624009330946, max_relative = 1e-8);
        assert_relative_eq!(delta_small_z_ratio(8, 2.0, 1e-3), 0.249458955222725706, max_relative = 1e-8);
    }

    #[test]
    fn small_z_ratio_series_matches_direct_at_crossover() {
        // the two evaluation paths agree where both are accurate
        for (n, t) in [(1u32, 1.0f64), (4, 0.5), (16, 2.0)] {
            let z = 1.2e-4 / t; // just above the series threshold
            let direct = delta_small_z_ratio(n, t, z);
            let z2 = 0.8e-4 / t; // just below
            let series = delta_small_z_ratio(n, t, z2);
            let limit = t * t / (2.0 * f64::from(n));
            assert!((direct / limit - 1.0).abs() < 3e-4);
            assert!((series / limit - 1.0).abs() < 3e-4);
        }
    }

    #[test]
    fn large_n_stability_against_polar_oracle() {
        // independent polar-form oracle: |r| = exp(-(n/2) ln(1+1/n^2)),
        // arg r = -n atan(1/n), evaluated with ln_1p/atan only
        let n = 1_000_000u32;
        let nf = f64::from(n);
        let r = euler_rational(Complex64::new(0.0, 1.0), n, 1.0);
        let modulus = (-(nf / 2.0) * (1.0 / (nf * nf)).ln_1p()).exp();
        let phase = -nf * (1.0 / nf).atan();
        assert!(r.norm() > 0.0 && r.norm() <= 1.0 + 1e-15);
        assert_relative_eq!(r.re, modulus * phase.cos(), epsilon = 1e-10);
        assert_relative_eq!(r.im, modulus * phase.sin(), epsilon = 1e-10);
        assert_relative_eq!(r.re, 0.540302035717334811, epsilon = 1e-10);
        assert_relative_eq!(r.im, -0.841470564072329186, epsilon = 1e-10);
    }

    #[test]
    fn pointwise_halving_ratio() {
        for z in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)] {
            for n in [256u32, 512, 1024] {
                let ratio = delta_scalar(z, 2 * n, 1.0).norm() / delta_scalar(z, n, 1.0).norm();
                assert!((0.4..=0.6).contains(&ratio), "z={z} n={n}: {ratio}");
            }
        }
    }

    proptest! {
        #[test]
        fn contractive_on_right_half_plane(re in 0.0..50.0f64, im in -50.0..50.0f64,
                                           n in 1u32..2000, t in 1e-3..50.0f64) {
            let z = Complex64::new(re, im);
            prop_assert!(euler_rational(z, n, t).norm() <= 1.0 + 1e-12);
            prop_assert!(semigroup_scalar(z, t).norm() <= 1.0 + 1e-12);
            prop_assert!(delta_scalar(z, n, t).norm() <= 2.0 + 1e-12);
        }
    }
}
