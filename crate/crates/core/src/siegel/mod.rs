//! Riemann theta functions on the Siegel upper half-space.

mod kummer;
mod modular;
mod series;

pub use kummer::{kummer_vector, theta_hat_table, KummerVector, ThetaHatRow, ThetaHatTable};
pub use modular::{
    modular_constancy_check, modular_transform, transform_characteristic, ModularCheck,
};
pub use series::{
    theta, theta_char, theta_deriv, theta_jet, theta_with_radius, ThetaJet, MAX_DERIVATIVE_ORDER,
};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{c, imag_part, max_abs};
use crate::{CMatrix, CVector, Error, Result};

/// A validated point `Ω` of the Siegel upper half-space.
#[derive(Clone, Debug)]
pub struct SiegelPoint {
    omega: CMatrix,
    imag: DMatrix<f64>,
    imag_inv: DMatrix<f64>,
    // upper-triangular factor with Im Ω = Rᵀ R
    chol_upper: DMatrix<f64>,
    min_eigenvalue: f64,
}

/// Default relative symmetry tolerance of [`validate_siegel`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Checks symmetry and positivity of `Im Ω`, returning a validated point.
pub fn validate_siegel(omega: &CMatrix) -> Result<SiegelPoint> {
    SiegelPoint::with_tolerance(omega, SYMMETRY_TOLERANCE)
}

impl SiegelPoint {
    pub fn new(omega: CMatrix) -> Result<Self> {
        Self::with_tolerance(&omega, SYMMETRY_TOLERANCE)
    }

    /// Validation with a caller-chosen relative symmetry tolerance. The
    /// stored matrix is the symmetrized input.
    pub fn with_tolerance(omega: &CMatrix, tol: f64) -> Result<Self> {
        let g = omega.nrows();
        if omega.ncols() != g {
            return Err(Error::DimensionMismatch { expected: g, found: omega.ncols() });
        }
        if g == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if omega.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        let scale = max_abs(omega).max(1.0);
        for i in 0..g {
            for j in (i + 1)..g {
                let dev = (omega[(i, j)] - omega[(j, i)]).norm();
                if dev > tol * scale {
                    return Err(Error::NotSymmetric { row: i, col: j, deviation: dev });
                }
            }
        }
        let sym = (omega + omega.transpose()).map(|z| z * 0.5);
        let imag = imag_part(&sym);
        let min_eigenvalue = SymmetricEigen::new(imag.clone()).eigenvalues.min();
        let chol = match imag.clone().cholesky() {
            Some(ch) if min_eigenvalue > 0.0 => ch,
            _ => return Err(Error::ImagNotPositiveDefinite { min_eigenvalue }),
        };
        let imag_inv = chol.inverse();
        let chol_upper = chol.l().transpose();
        Ok(Self { omega: sym, imag, imag_inv, chol_upper, min_eigenvalue })
    }

    pub fn genus(&self) -> usize {
        self.omega.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.omega
    }

    pub fn imag(&self) -> &DMatrix<f64> {
        &self.imag
    }

    pub fn imag_inverse(&self) -> &DMatrix<f64> {
        &self.imag_inv
    }

    pub(crate) fn chol_upper(&self) -> &DMatrix<f64> {
        &self.chol_upper
    }

    /// Smallest eigenvalue of `Im Ω`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `s·Ω`, for positive real `s`.
    pub fn scaled(&self, s: f64) -> Self {
        assert!(s > 0.0, "scale must be positive");
        Self {
            omega: self.omega.map(|z| z * s),
            imag: &self.imag * s,
            imag_inv: &self.imag_inv / s,
            chol_upper: &self.chol_upper * s.sqrt(),
            min_eigenvalue: self.min_eigenvalue * s,
        }
    }

    /// Lattice vector `m + Ω m'`.
    pub fn lattice_vector(&self, m: &[f64], m_prime: &[f64]) -> CVector {
        let mp = CVector::from_iterator(m_prime.len(), m_prime.iter().map(|&x| c(x, 0.0)));
        let mut v = &self.omega * mp;
        for (vi, &mi) in v.iter_mut().zip(m) {
            *vi += mi;
        }
        v
    }

    /// A random point with `Im Ω = MᵀM + ½I` and symmetric real part in `[−½, ½)`.
    pub fn random<R: Rng + ?Sized>(g: usize, rng: &mut R) -> Self {
        let m = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
        let y = m.transpose() * &m + DMatrix::identity(g, g) * 0.5;
        let mut x = DMatrix::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let v = rng.random_range(-0.5..0.5);
                x[(i, j)] = v;
                x[(j, i)] = v;
            }
        }
        let omega = CMatrix::from_fn(g, g, |i, j| c(x[(i, j)], y[(i, j)]));
        Self::new(omega).expect("random construction is positive definite")
    }

    /// Uniform sample `x + Ω y` with `x, y ∈ [0, 1)^g`.
    pub fn random_cell_point<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let g = self.genus();
        let x: Vec<f64> = (0..g).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..g).map(|_| rng.random_range(0.0..1.0)).collect();
        self.lattice_vector(&x, &y)
    }
}

impl PartialEq for SiegelPoint {
    fn eq(&self, other: &Self) -> bool {
        self.omega == other.omega
    }
}

impl Serialize for SiegelPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::json::cmatrix::serialize(&self.omega, s)
    }
}

impl<'de> Deserialize<'de> for SiegelPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = crate::json::cmatrix::deserialize(d)?;
        SiegelPoint::new(m).map_err(D::Error::custom)
    }
}

/// Target absolute tail bound and a cap on the lattice box half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub epsilon: f64,
    pub max_radius: u32,
}

impl TruncationPolicy {
    pub fn new(epsilon: f64, max_radius: u32) -> Result<Self> {
        let p = Self { epsilon, max_radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidPolicy(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_radius < 1 {
            return Err(Error::InvalidPolicy("max_radius must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { epsilon: 1e-12, max_radius: 60 }
    }
}

/// Characteristic `[a, b]`; used as given, without reduction modulo 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaCharacteristic {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ThetaCharacteristic {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::Parse("characteristic entries must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn zero(g: usize) -> Self {
        Self { a: vec![0.0; g], b: vec![0.0; g] }
    }

    /// `[a, 0]`.
    pub fn top(a: Vec<f64>) -> Self {
        let g = a.len();
        Self { a, b: vec![0.0; g] }
    }

    /// `[0, b]`.
    pub fn bottom(b: Vec<f64>) -> Self {
        let g = b.len();
        Self { a: vec![0.0; g], b }
    }

    pub fn genus(&self) -> usize {
        self.a.len()
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&x| x == 0.0)
    }
}

/// Half-characteristics `n ∈ {0, ½}^g` in the fixed order: index `j` has
/// `n_i = ½·bit_i(j)`.
pub fn half_characteristics(g: usize) -> Vec<Vec<f64>> {
    (0..1usize << g)
        .map(|j| (0..g).map(|i| 0.5 * ((j >> i) & 1) as f64).collect())
        .collect()
}

/// Derivative along `directions[j]` of order `orders[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalRequest {
    #[serde(with = "crate::json::cvector_list")]
    pub directions: Vec<CVector>,
    pub orders: Vec<usize>,
}

impl DirectionalRequest {
    pub fn new(directions: Vec<CVector>, orders: Vec<usize>) -> Result<Self> {
        if directions.len() != orders.len() {
            return Err(Error::DimensionMismatch { expected: directions.len(), found: orders.len() });
        }
        let r = Self { directions, orders };
        if r.total_order() > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderCapExceeded { order: r.total_order(), cap: MAX_DERIVATIVE_ORDER });
        }
        Ok(r)
    }

    /// `∂_d^k`.
    pub fn single(direction: CVector, order: usize) -> Result<Self> {
        Self::new(vec![direction], vec![order])
    }

    pub fn total_order(&self) -> usize {
        self.orders.iter().sum()
    }
}
