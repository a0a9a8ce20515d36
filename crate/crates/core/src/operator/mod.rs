//! Concrete generator models and the operator-level statements: semigroup
//! and Euler application, Stieltjes functions of the generator via resolvent
//! quadrature, Komatsu/Favard norms, the upper-bound records, and the
//! sharpness lower bounds.

mod apply;
mod bounds;
mod expm;
mod norms;

pub use bounds::{
    alpha_gt2_divergence, reciprocal_bound_check, seeded_unit_vector, sharpness_check,
    shifted_calculus_limit, spectral_sup_inv_power_delta, stieltjes_bound_check, komatsu_bound_check,
    DivergenceSweep, RateRecord, SharpnessRecord, KomatsuBoundRecord, SHARPNESS_C,
};
pub use expm::matrix_exponential;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coordinate norm of the model space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormModel {
    #[default]
    L2,
    LInf,
}

/// An element of the model space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    pub fn from_complex(coords: Vec<Complex64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn from_real(coords: &[f64]) -> Self {
        Self(DVector::from_iterator(
            coords.len(),
            coords.iter().map(|&r| Complex64::new(r, 0.0)),
        ))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::from_element(dim, Complex64::new(0.0, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<Complex64> {
        self.0
    }

    /// Coordinate-wise map.
    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self(self.0.map(f))
    }

    pub fn norm(&self, model: NormModel) -> f64 {
        match model {
            NormModel::L2 => self.0.norm(),
            NormModel::LInf => self.0.iter().map(|c| c.norm()).fold(0.0, f64::max),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }
}

impl From<DVector<Complex64>> for StateVector {
    fn from(v: DVector<Complex64>) -> Self {
        Self(v)
    }
}

/// Diagonal (normal, spectral) model: the generator acts coordinate-wise by
/// its eigenvalue list. `M = 1` since every `|e^{-t z_k}| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGenerator {
    eigenvalues: Vec<Complex64>,
    norm_model: NormModel,
}

impl DiagonalGenerator {
    pub fn new(eigenvalues: Vec<Complex64>, norm_model: NormModel) -> Result<Self> {
        if let Some(z) = eigenvalues.iter().find(|z| z.re < 0.0) {
            return Err(Error::Validation(format!(
                "diagonal model requires Re z >= 0, got {z}"
            )));
        }
        Ok(Self { eigenvalues, norm_model })
    }

    /// Discretized multiplication-operator model: eigenvalues
    /// `i * k * radius / points` for `k = 1..=points` (injective).
    pub fn multiplication_model(points: usize, radius: f64) -> Self {
        let eigenvalues = (1..=points)
            .map(|k| Complex64::new(0.0, radius * k as f64 / points as f64))
            .collect();
        Self { eigenvalues, norm_model: NormModel::L2 }
    }

    /// Same spectrum on the positive real axis.
    pub fn real_model(points: usize, radius: f64) -> Self {
        let eigenvalues = (1..=points)
            .map(|k| Complex64::new(radius * k as f64 / points as f64, 0.0))
            .collect();
        Self { eigenvalues, norm_model: NormModel::L2 }
    }

    /// Appends a probe eigenvalue (used by the sharpness checks, which need
    /// `i sqrt(n)/t` placed exactly on the spectrum).
    pub fn with_probe(mut self, probe: Complex64) -> Self {
        self.eigenvalues.push(probe);
        self
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn norm_model(&self) -> NormModel {
        self.norm_model
    }

    pub fn is_injective(&self) -> bool {
        self.eigenvalues.iter().all(|z| *z != Complex64::new(0.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Dense matrix model with a certified semigroup bound
/// `M >= sup_t ||e^{-tA}||`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGenerator {
    matrix: DMatrix<Complex64>,
    m_bound: f64,
}

/// Log grid used both to estimate and to validate the semigroup bound.
fn m_sample_times() -> Vec<f64> {
    (0..25).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 24.0)).collect()
}

impl MatrixGenerator {
    /// Builds the model. When `m_bound` is given it is validated against
    /// sampled `||e^{-tA}||`; otherwise it is estimated as 1.05x the sampled
    /// maximum (including `||I|| = 1` at `t = 0`).
    pub fn new(matrix: DMatrix<Complex64>, m_bound: Option<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Validation("matrix generator must be square".into()));
        }
        let mut max_norm = 1.0f64;
        for t in m_sample_times() {
            let e = expm::matrix_exponential(&(&matrix * Complex64::new(-t, 0.0)));
            max_norm = max_norm.max(spectral_norm_estimate(&e));
        }
        match m_bound {
            Some(m) => {
                if max_norm > m * (1.0 + 1e-6) {
                    return Err(Error::Validation(format!(
                        "certified M = {m} violated: sampled ||e^(-tA)|| reaches {max_norm}"
                    )));
                }
                Ok(Self { matrix, m_bound: m })
            }
            None => Ok(Self { matrix, m_bound: 1.05 * max_norm }),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Deterministic power iteration on `A^H A` for the spectral norm.
pub fn spectral_norm_estimate(m: &DMatrix<Complex64>) -> f64 {
    let dim = m.ncols();
    if dim == 0 {
        return 0.0;
    }
    let mh = m.adjoint();
    let mut v = DVector::from_element(dim, Complex64::new(1.0 / (dim as f64).sqrt(), 0.0));
    let mut sigma_sq = 0.0f64;
    for _ in 0..200 {
        let w = &mh * (m * &v);
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(next, 0.0);
        if (next - sigma_sq).abs() <= 1e-13 * next {
            sigma_sq = next;
            break;
        }
        sigma_sq = next;
    }
    sigma_sq.sqrt()
}

/// A generator model: `-A` generates the bounded semigroup `e^{-tA}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Diagonal(DiagonalGenerator),
    Matrix(MatrixGenerator),
}

impl Generator {
    pub fn dim(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.dim(),
            Self::Matrix(m) => m.dim(),
        }
    }

    /// The semigroup bound `M`.
    pub fn m_bound(&self) -> f64 {
        match self {
            Self::Diagonal(_) => 1.0,
            Self::Matrix(m) => m.m_bound(),
        }
    }

    pub fn norm_model(&self) -> NormModel {
        match self {
            Self::Diagonal(d) => d.norm_model(),
            Self::Matrix(_) => NormModel::L2,
        }
    }

    pub fn vector_norm(&self, x: &StateVector) -> f64 {
        x.norm(self.norm_model())
    }

    pub(crate) fn check_dim(&self, x: &StateVector) -> Result<()> {
        if self.dim() != x.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        Ok(())
    }

    pub fn is_injective(&self) -> bool {
        match self {
            Self::Diagonal(d) => d.is_injective(),
            // resolved by the solve itself
            Self::Matrix(_) => true,
        }
    }
}

impl From<DiagonalGenerator> for Generator {
    fn from(d: DiagonalGenerator) -> Self {
        Self::Diagonal(d)
    }
}

impl From<MatrixGenerator> for Generator {
    fn from(m: MatrixGenerator) -> Self {
        Self::Matrix(m)
    }
}

// --- JSON wire formats ------------------------------------------------------
//
// generator: {"type":"diagonal","eigenvalues":[[re,im],...]}
//         or {"type":"matrix","data":[[entry,...],...],"M":...}
//   where a matrix entry is a number or an [re,im] pair.
// vectors: [[re,im],...]

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, f64)> = self.0.iter().map(|c| (c.re, c.im)).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(f64, f64)> = Vec::deserialize(deserializer)?;
        Ok(Self::from_complex(pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixEntry {
    Real(f64),
    Pair((f64, f64)),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GeneratorWire {
    Diagonal {
        eigenvalues: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm_model: Option<NormModel>,
    },
    Matrix {
        data: Vec<Vec<MatrixEntry>>,
        #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
        m: Option<f64>,
    },
}

impl Serialize for Generator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self {
            Self::Diagonal(d) => GeneratorWire::Diagonal {
                eigenvalues: d.eigenvalues.iter().map(|z| (z.re, z.im)).collect(),
                norm_model: Some(d.norm_model),
            },
            Self::Matrix(m) => GeneratorWire::Matrix {
                data: m
                    .matrix
                    .row_iter()
                    .map(|row| row.iter().map(|z| MatrixEntry::Pair((z.re, z.im))).collect())
                    .collect(),
                m: Some(m.m_bound),
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match GeneratorWire::deserialize(deserializer)? {
            GeneratorWire::Diagonal { eigenvalues, norm_model } => {
                let eig = eigenvalues.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
                DiagonalGenerator::new(eig, norm_model.unwrap_or_default())
                    .map(Generator::Diagonal)
                    .map_err(D::Error::custom)
            }
            GeneratorWire::Matrix { data, m } => {
                let rows = data.len();
                if rows == 0 || data.iter().any(|r| r.len() != rows) {
                    return Err(D::Error::custom("matrix data must be square and nonempty"));
                }
                let mut mat = DMatrix::from_element(rows, rows, Complex64::new(0.0, 0.0));
                for (i, row) in data.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        mat[(i, j)] = match e {
                            MatrixEntry::Real(r) => Complex64::new(*r, 0.0),
                            MatrixEntry::Pair((re, im)) => Complex64::new(*re, *im),
                        };
                    }
                }
                MatrixGenerator::new(mat, m).map(Generator::Matrix).map_err(D::Error::custom)
            }
        }
    }
}
