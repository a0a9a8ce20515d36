//! Upper-bound records (the `12M` and `8M` envelopes), the sharpness lower
//! bound with `c = (1 - 1/sqrt(2))/2`, the shifted-calculus limit and the
//! order-above-two divergence sweep.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{DiagonalGenerator, Generator, StateVector};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::scalar::{delta_scalar, INEQ_SLACK};
use crate::stieltjes::{ProductStieltjes, StieltjesRep};

/// `c = (1 - 1/sqrt(2))/2`, the universal sharpness constant.
pub const SHARPNESS_C: f64 = 0.5 * (1.0 - std::f64::consts::FRAC_1_SQRT_2);

/// One sweep point: measured error against its theoretical envelope.
#[derive(Debug, Clone, Serialize)]
pub struct RateRecord {
    pub n: u32,
    pub t: f64,
    pub alpha: Option<f64>,
    pub error: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub tail_budget: f64,
}

impl RateRecord {
    fn new(n: u32, t: f64, alpha: Option<f64>, error: f64, envelope: f64) -> Self {
        let ratio = if envelope > 0.0 { error / envelope } else { 0.0 };
        Self { n, t, alpha, error, envelope, ratio, tail_budget: 0.0 }
    }
}

/// `||f(A) delta_{n,t}(A) x|| <= 12 M ||x|| f(sqrt(n)/t)` for `f` of order 2.
pub fn stieltjes_bound_check(
    gen: &Generator,
    f: &StieltjesRep,
    n: u32,
    t: f64,
    x: &StateVector,
    spec: &QuadratureSpec,
) -> Result<RateRecord> {
    let dx = gen.delta_apply(n, t, x)?;
    let error = gen.vector_norm(&gen.function_apply(f, &dx, spec)?);
    let arg = Complex64::new(f64::from(n).sqrt() / t, 0.0);
    let envelope = 12.0 * gen.m_bound() * gen.vector_norm(x) * f.evaluate(arg, spec)?.re;
    Ok(RateRecord::new(n, t, Some(f.alpha()), error, envelope))
}

/// `||delta_{n,t}(A) x|| <= 12 M ||g(A) x|| / g(sqrt(n)/t)` with `g = 1/f`,
/// `f` a product of two Stieltjes functions. Diagonal models only (the
/// reciprocal is realized spectrally).
pub fn reciprocal_bound_check(
    gen: &Generator,
    f: &ProductStieltjes,
    n: u32,
    t: f64,
    x: &StateVector,
    spec: &QuadratureSpec,
) -> Result<RateRecord> {
    let d = match gen {
        Generator::Diagonal(d) => d,
        Generator::Matrix(_) => {
            return Err(Error::Validation(
                "reciprocal_bound_check requires a diagonal model (spectral reciprocal)".into(),
            ))
        }
    };
    gen.check_dim(x)?;
    if f.has_mass_at_origin() && !d.is_injective() {
        return Err(Error::NonInjective);
    }
    let error = gen.vector_norm(&gen.delta_apply(n, t, x)?);
    let mut gax = Vec::with_capacity(d.dim());
    for (z, xi) in d.eigenvalues().iter().zip(x.coords().iter()) {
        gax.push(f.reciprocal_eval(*z, spec)? * xi);
    }
    let gax_norm = StateVector::from_complex(gax).norm(d.norm_model());
    let arg = Complex64::new(f64::from(n).sqrt() / t, 0.0);
    let g_at_arg = f.reciprocal_eval(arg, spec)?.re;
    let envelope = 12.0 * gen.m_bound() * gax_norm / g_at_arg;
    Ok(RateRecord::new(n, t, None, error, envelope))
}

/// The Komatsu-norm bound with the intermediate single-`lambda` estimate.
#[derive(Debug, Clone, Serialize)]
pub struct KomatsuBoundRecord {
    pub record: RateRecord,
    /// `2M (1 + lambda t/sqrt(n))^2 ||[A(A+lambda)^{-1}]^2 x||` at
    /// `lambda = sqrt(n)/t`.
    pub intermediate_bound: f64,
    pub intermediate_pass: bool,
}

/// `||delta_{n,t}(A) x|| <= 8 M (t/sqrt(n))^alpha ||x||_{D^alpha}` for
/// `alpha` in `(0, 2]`.
pub fn komatsu_bound_check(
    gen: &Generator,
    alpha: f64,
    n: u32,
    t: f64,
    x: &StateVector,
) -> Result<KomatsuBoundRecord> {
    let error = gen.vector_norm(&gen.delta_apply(n, t, x)?);
    let komatsu = gen.komatsu_norm(alpha, x)?;
    let nf = f64::from(n);
    let envelope = 8.0 * gen.m_bound() * (t / nf.sqrt()).powf(alpha) * komatsu;
    let record = RateRecord::new(n, t, Some(alpha), error, envelope);

    let lambda = nf.sqrt() / t;
    let smoothing = gen.squared_smoothing_norm(lambda, x)?;
    let intermediate_bound = 8.0 * gen.m_bound() * smoothing; // 2M (1+1)^2
    let intermediate_pass = error <= intermediate_bound * (1.0 + 1e-6) || intermediate_bound == 0.0;
    Ok(KomatsuBoundRecord { record, intermediate_bound, intermediate_pass })
}

/// Sharpness record: the exact operator norm of `f(A) delta_{n,t}(A)` on a
/// diagonal-normal model against the universal lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct SharpnessRecord {
    pub n: u32,
    pub t: f64,
    pub opnorm: f64,
    pub lower: f64,
    pub holds: bool,
    /// `opnorm / (12 M f(sqrt(n)/t))`; lies in `[c/(12M), 1]`.
    pub sandwich_ratio: f64,
}

/// Requires the probe eigenvalue `i sqrt(n)/t` (or its conjugate) on the
/// spectrum; computes `sup_k |f(z_k) delta_{n,t}(z_k)|` (the exact operator
/// norm of the diagonal model) and checks it against
/// `c f(sqrt(n)/t)`, `c = (1 - 1/sqrt(2))/2`.
pub fn sharpness_check(
    model: &DiagonalGenerator,
    f: &ProductStieltjes,
    n: u32,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<SharpnessRecord> {
    let probe = Complex64::new(0.0, f64::from(n).sqrt() / t);
    let tol = 1e-9 * (1.0 + probe.norm());
    let on_grid = model
        .eigenvalues()
        .iter()
        .any(|z| (z - probe).norm() <= tol || (z - probe.conj()).norm() <= tol);
    if !on_grid {
        return Err(Error::MissingProbeEigenvalue(probe));
    }

    let mut opnorm = 0.0f64;
    for z in model.eigenvalues() {
        // delta vanishes at z = 0; skip the origin where f may be singular
        if *z == Complex64::new(0.0, 0.0) {
            continue;
        }
        let v = (f.evaluate(*z, spec)? * delta_scalar(*z, n, t)).norm();
        opnorm = opnorm.max(v);
    }
    let f_at_arg = f.evaluate(Complex64::new(probe.im.abs(), 0.0), spec)?.re;
    let lower = SHARPNESS_C * f_at_arg;
    Ok(SharpnessRecord {
        n,
        t,
        opnorm,
        lower,
        holds: opnorm >= lower - INEQ_SLACK,
        sandwich_ratio: opnorm / (12.0 * f_at_arg),
    })
}

/// `||g(A + delta) x - g(A) x||` along a decreasing sequence of shifts,
/// `g = 1/f` evaluated spectrally.
pub fn shifted_calculus_limit(
    model: &DiagonalGenerator,
    f: &ProductStieltjes,
    x: &StateVector,
    delta_seq: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if model.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: x.dim() });
    }
    let base: Vec<Complex64> = model
        .eigenvalues()
        .iter()
        .map(|z| f.reciprocal_eval(*z, spec))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(delta_seq.len());
    for &delta in delta_seq {
        let mut diff = Vec::with_capacity(model.dim());
        for ((z, g0), xi) in model.eigenvalues().iter().zip(base.iter()).zip(x.coords().iter()) {
            let g = f.reciprocal_eval(z + delta, spec)?;
            diff.push((g - g0) * xi);
        }
        out.push(StateVector::from_complex(diff).norm(model.norm_model()));
    }
    Ok(out)
}

/// `sup_{z in {eps, 2eps, ..., 1}} |z^{-alpha} delta_{n,t}(z)|` on the real
/// spectrum grid with floor `eps`.
pub fn spectral_sup_inv_power_delta(n: u32, t: f64, alpha: f64, floor: f64) -> f64 {
    let count = (1.0 / floor).floor() as usize;
    let mut sup = 0.0f64;
    for k in 1..=count {
        let z = k as f64 * floor;
        let v = z.powf(-alpha) * delta_scalar(Complex64::new(z, 0.0), n, t).norm();
        sup = sup.max(v);
    }
    sup
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceSweep {
    /// `(floor, sup)` rows, in the given floor order.
    pub sups: Vec<(f64, f64)>,
    /// last sup / first sup.
    pub growth: f64,
    pub pass: bool,
}

/// For `alpha > 2`, the spectral sup grows like `eps^{2-alpha} t^2/(2n)` as
/// the eigenvalue floor `eps` drops; passes when the sweep grows by more
/// than a factor 100.
pub fn alpha_gt2_divergence(
    n: u32,
    t: f64,
    alpha: f64,
    eigenvalue_floors: &[f64],
) -> Result<DivergenceSweep> {
    if !(alpha > 2.0) {
        return Err(Error::InvalidOrder(alpha, "(2, inf)"));
    }
    if eigenvalue_floors.len() < 2 || eigenvalue_floors.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Validation("eigenvalue floors must be strictly decreasing".into()));
    }
    let sups: Vec<(f64, f64)> = eigenvalue_floors
        .iter()
        .map(|&eps| (eps, spectral_sup_inv_power_delta(n, t, alpha, eps)))
        .collect();
    let growth = sups.last().unwrap().1 / sups.first().unwrap().1;
    Ok(DivergenceSweep { sups, growth, pass: growth > 100.0 })
}

/// Deterministic unit test vector: coordinate magnitudes `k^{-decay}` with
/// seeded random phases, normalized in l2.
pub fn seeded_unit_vector(dim: usize, decay: f64, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords: Vec<Complex64> = (1..=dim)
        .map(|k| {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar((k as f64).powf(-decay), theta)
        })
        .collect();
    let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut coords {
        *c /= norm;
    }
    StateVector::from_complex(coords)
}
