//! Hirota bilinear derivatives on exponential sums and on theta-backed tau
//! functions, with a catalog of hierarchy equations.

mod catalog;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use catalog::{catalog_polynomial, hierarchy_residual, Hierarchy, HierarchyParams, HierarchyResidual, TauSpec, ThetaTau};

use crate::siegel::{theta_jet, SiegelPoint, ThetaCharacteristic, TruncationPolicy, MAX_DERIVATIVE_ORDER};
use crate::{CVector, Complex64, Error, Result};

/// One term `c·exp(⟨p, x⟩ + φ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    #[serde(with = "crate::json::complex")]
    pub coefficient: Complex64,
    #[serde(with = "crate::json::complex_vec")]
    pub wavevector: Vec<Complex64>,
    #[serde(with = "crate::json::complex", default)]
    pub phase: Complex64,
}

/// Finite sum `Σ c·exp(⟨p, x⟩ + φ)` over `x ∈ ℂ^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    pub terms: Vec<ExpTerm>,
}

impl ExpSum {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        let s = Self { terms };
        s.variables()?;
        Ok(s)
    }

    /// The constant `c` over `k` variables.
    pub fn constant(c: Complex64, k: usize) -> Self {
        Self { terms: vec![ExpTerm { coefficient: c, wavevector: vec![Complex64::new(0.0, 0.0); k], phase: Complex64::new(0.0, 0.0) }] }
    }

    /// `1 + exp(⟨p, x⟩ + φ)`.
    pub fn one_soliton(p: Vec<Complex64>, phase: Complex64) -> Self {
        let k = p.len();
        let mut s = Self::constant(Complex64::new(1.0, 0.0), k);
        s.terms.push(ExpTerm { coefficient: Complex64::new(1.0, 0.0), wavevector: p, phase });
        s
    }

    /// Number of variables; errors if the terms disagree.
    pub fn variables(&self) -> Result<usize> {
        let k = self.terms.first().map_or(0, |t| t.wavevector.len());
        if let Some(t) = self.terms.iter().find(|t| t.wavevector.len() != k) {
            return Err(Error::VariableMismatch(format!("terms over {k} and {} variables", t.wavevector.len())));
        }
        Ok(k)
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|t| t.coefficient * exponent(&t.wavevector, x, t.phase).exp()).sum()
    }

    /// Multiplies every term by `exp(⟨c, x⟩)`.
    pub fn gauge(&self, c: &[Complex64]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm { wavevector: t.wavevector.iter().zip(c).map(|(p, q)| p + q).collect(), ..t.clone() })
            .collect();
        Self { terms }
    }
}

fn exponent(p: &[Complex64], x: &[Complex64], phase: Complex64) -> Complex64 {
    p.iter().zip(x).map(|(a, b)| a * b).sum::<Complex64>() + phase
}

/// `c·∏ D_j^{e_j}` with variables numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HirotaMonomial {
    #[serde(with = "crate::json::complex")]
    pub coefficient: Complex64,
    pub exponents: BTreeMap<usize, u32>,
}

impl HirotaMonomial {
    pub fn degree(&self) -> usize {
        self.exponents.values().map(|&e| e as usize).sum()
    }

    fn at(&self, v: &[Complex64]) -> Complex64 {
        let mut out = self.coefficient;
        for (&var, &e) in &self.exponents {
            out *= v[var - 1].powu(e);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomial")]
pub struct HirotaPolynomial {
    pub monomials: Vec<HirotaMonomial>,
}

#[derive(Deserialize)]
struct RawPolynomial {
    monomials: Vec<HirotaMonomial>,
}

impl TryFrom<RawPolynomial> for HirotaPolynomial {
    type Error = Error;

    fn try_from(raw: RawPolynomial) -> Result<Self> {
        Self::new(raw.monomials)
    }
}

impl HirotaPolynomial {
    pub fn new(monomials: Vec<HirotaMonomial>) -> Result<Self> {
        for m in &monomials {
            if m.degree() > MAX_DERIVATIVE_ORDER {
                return Err(Error::OrderCapExceeded { order: m.degree(), cap: MAX_DERIVATIVE_ORDER });
            }
            if m.exponents.contains_key(&0) {
                return Err(Error::VariableMismatch("variables are numbered from 1".into()));
            }
        }
        Ok(Self { monomials })
    }

    /// Builds from `(coefficient, [(variable, exponent)])` pairs.
    pub fn from_terms(terms: &[(f64, &[(usize, u32)])]) -> Self {
        let monomials = terms
            .iter()
            .map(|(c, e)| HirotaMonomial {
                coefficient: Complex64::new(*c, 0.0),
                exponents: e.iter().filter(|(_, p)| *p > 0).copied().collect(),
            })
            .collect();
        Self::new(monomials).expect("catalog polynomial within the order cap")
    }

    /// Highest variable index used.
    pub fn max_variable(&self) -> usize {
        self.monomials.iter().filter_map(|m| m.exponents.keys().next_back().copied()).max().unwrap_or(0)
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(HirotaMonomial::degree).max().unwrap_or(0)
    }

    /// `P(v)` as an ordinary polynomial.
    pub fn eval(&self, v: &[Complex64]) -> Complex64 {
        self.monomials.iter().map(|m| m.at(v)).sum()
    }

    pub fn with_constant(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.monomials.push(HirotaMonomial { coefficient: c, exponents: BTreeMap::new() });
        out
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let monomials = self.monomials.iter().map(|m| HirotaMonomial { coefficient: m.coefficient * s, ..m.clone() }).collect();
        Self { monomials }
    }
}

/// A bilinear value with the sum of the moduli of its contributions, used to
/// form relative residuals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Bilinear {
    #[serde(with = "crate::json::complex")]
    pub value: Complex64,
    pub scale: f64,
}

impl Bilinear {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 { 0.0 } else { self.value.norm() / self.scale }
    }

    pub fn add(self, other: Self) -> Self {
        Self { value: self.value + other.value, scale: self.scale + other.scale }
    }
}

/// `P(D) f·g` at `x`, evaluated term by term.
pub fn hirota_apply(p: &HirotaPolynomial, f: &ExpSum, g: &ExpSum, x: &[Complex64]) -> Result<Complex64> {
    Ok(hirota_apply_scaled(p, f, g, x)?.value)
}

/// As [`hirota_apply`], also returning the modulus scale.
///
/// When `f` and `g` have the same number of terms the pairs `(i, j)` and
/// `(j, i)` are added first, so antisymmetric contributions cancel exactly.
pub fn hirota_apply_scaled(p: &HirotaPolynomial, f: &ExpSum, g: &ExpSum, x: &[Complex64]) -> Result<Bilinear> {
    let k = f.variables()?;
    let kg = g.variables()?;
    if k != kg || x.len() != k || p.max_variable() > k {
        return Err(Error::VariableMismatch(format!(
            "f over {k}, g over {kg}, point of length {}, polynomial uses {} variables",
            x.len(),
            p.max_variable()
        )));
    }
    let pair = |i: usize, j: usize| -> (Complex64, f64) {
        let (a, b) = (&f.terms[i], &g.terms[j]);
        let diff: Vec<Complex64> = a.wavevector.iter().zip(&b.wavevector).map(|(u, v)| u - v).collect();
        let sum: Vec<Complex64> = a.wavevector.iter().zip(&b.wavevector).map(|(u, v)| u + v).collect();
        let e = exponent(&sum, x, a.phase + b.phase).exp();
        let cc = a.coefficient * b.coefficient;
        let mut value = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for m in &p.monomials {
            let t = cc * m.at(&diff) * e;
            value += t;
            scale += t.norm();
        }
        (value, scale)
    };
    let mut out = Bilinear::default();
    if f.terms.len() == g.terms.len() {
        let n = f.terms.len();
        for i in 0..n {
            let (v, s) = pair(i, i);
            out = out.add(Bilinear { value: v, scale: s });
            for j in i + 1..n {
                let (v1, s1) = pair(i, j);
                let (v2, s2) = pair(j, i);
                out = out.add(Bilinear { value: v1 + v2, scale: s1 + s2 });
            }
        }
    } else {
        for i in 0..f.terms.len() {
            for j in 0..g.terms.len() {
                let (v, s) = pair(i, j);
                out = out.add(Bilinear { value: v, scale: s });
            }
        }
    }
    Ok(out)
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `P(D) f·g` at the point where `f = θ(· + z1)` and `g = θ(· + z2)`, each
/// variable `j` acting along `directions[j]`.
pub fn hirota_apply_theta(
    p: &HirotaPolynomial,
    directions: &BTreeMap<usize, CVector>,
    z1: &CVector,
    z2: &CVector,
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    Ok(hirota_apply_theta_scaled(p, directions, z1, z2, omega, policy)?.value)
}

pub fn hirota_apply_theta_scaled(
    p: &HirotaPolynomial,
    directions: &BTreeMap<usize, CVector>,
    z1: &CVector,
    z2: &CVector,
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
) -> Result<Bilinear> {
    let vars: Vec<usize> = directions.keys().copied().collect();
    for m in &p.monomials {
        if let Some(v) = m.exponents.keys().find(|v| !directions.contains_key(v)) {
            return Err(Error::VariableMismatch(format!("no direction supplied for variable {v}")));
        }
    }
    let dirs: Vec<CVector> = directions.values().cloned().collect();
    let order = p.degree();
    let chr = ThetaCharacteristic::zero(omega.genus());
    let jf = theta_jet(&chr, z1, omega, &dirs, order, policy)?.jet;
    let jg = if z1 == z2 { jf.clone() } else { theta_jet(&chr, z2, omega, &dirs, order, policy)?.jet };

    let mut out = Bilinear::default();
    for m in &p.monomials {
        let alpha: Vec<u32> = vars.iter().map(|v| m.exponents.get(v).copied().unwrap_or(0)).collect();
        // all β ≤ α, in ascending variable order
        let mut beta = vec![0u32; alpha.len()];
        loop {
            let mut weight = 1.0;
            for (a, b) in alpha.iter().zip(&beta) {
                weight *= binomial(*a, *b) as f64;
                if (a - b) % 2 == 1 {
                    weight = -weight;
                }
            }
            let bu: Vec<usize> = beta.iter().map(|&b| b as usize).collect();
            let rest: Vec<usize> = alpha.iter().zip(&beta).map(|(a, b)| (a - b) as usize).collect();
            let t = m.coefficient * weight * jf.derivative(&bu) * jg.derivative(&rest);
            out = out.add(Bilinear { value: t, scale: t.norm() });
            let mut i = 0;
            loop {
                if i == beta.len() {
                    break;
                }
                if beta[i] < alpha[i] {
                    beta[i] += 1;
                    break;
                }
                beta[i] = 0;
                i += 1;
            }
            if i == beta.len() {
                break;
            }
        }
    }
    Ok(out)
}
