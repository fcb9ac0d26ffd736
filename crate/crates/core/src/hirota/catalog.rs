use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{hirota_apply_scaled, hirota_apply_theta_scaled, Bilinear, ExpSum, HirotaPolynomial};
use crate::siegel::{SiegelPoint, TruncationPolicy};
use crate::{CVector, Complex64, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hierarchy {
    Kp,
    Bkp1,
    Bkp2,
    Dkp1,
    Dkp2,
    Ll,
}

impl FromStr for Hierarchy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "kp" => Self::Kp,
            "bkp1" => Self::Bkp1,
            "bkp2" => Self::Bkp2,
            "dkp1" => Self::Dkp1,
            "dkp2" => Self::Dkp2,
            "ll" => Self::Ll,
            other => return Err(Error::Parse(format!("unknown hierarchy '{other}'"))),
        })
    }
}

impl Hierarchy {
    /// Variable names in order; the tau function must use exactly these.
    pub fn variables(self) -> &'static [&'static str] {
        match self {
            Self::Kp => &["x1", "x2", "x3"],
            Self::Bkp1 => &["x1", "x3", "x5"],
            Self::Bkp2 => &["x1", "x3", "x5", "x7"],
            Self::Dkp1 | Self::Dkp2 => &["x1", "x3", "x5", "xhat1"],
            Self::Ll => &["x1", "x2"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Kp => "kp",
            Self::Bkp1 => "bkp1",
            Self::Bkp2 => "bkp2",
            Self::Dkp1 => "dkp1",
            Self::Dkp2 => "dkp2",
            Self::Ll => "ll",
        }
    }
}

/// Bilinear operator of a single-tau equation, over the hierarchy's variables.
/// The LL system has four tau functions and no single polynomial.
pub fn catalog_polynomial(h: Hierarchy) -> Result<HirotaPolynomial> {
    Ok(match h {
        // D₁⁴ − 4D₁D₃ + 3D₂²
        Hierarchy::Kp => HirotaPolynomial::from_terms(&[(1.0, &[(1, 4)]), (-4.0, &[(1, 1), (3, 1)]), (3.0, &[(2, 2)])]),
        // D₁⁶ − 5D₁³D₃ − 5D₃² + 9D₁D₅
        Hierarchy::Bkp1 => HirotaPolynomial::from_terms(&[
            (1.0, &[(1, 6)]),
            (-5.0, &[(1, 3), (2, 1)]),
            (-5.0, &[(2, 2)]),
            (9.0, &[(1, 1), (3, 1)]),
        ]),
        // D₁⁸ + 7D₁⁵D₃ − 35D₁²D₃² − 21D₁³D₅ − 42D₃D₅ + 90D₁D₇
        Hierarchy::Bkp2 => HirotaPolynomial::from_terms(&[
            (1.0, &[(1, 8)]),
            (7.0, &[(1, 5), (2, 1)]),
            (-35.0, &[(1, 2), (2, 2)]),
            (-21.0, &[(1, 3), (3, 1)]),
            (-42.0, &[(2, 1), (3, 1)]),
            (90.0, &[(1, 1), (4, 1)]),
        ]),
        // D̂(D₁³ − D₃)
        Hierarchy::Dkp1 => HirotaPolynomial::from_terms(&[(1.0, &[(1, 3), (4, 1)]), (-1.0, &[(2, 1), (4, 1)])]),
        // D̂(D₁⁵ + 5D₃D₁² − 6D₅)
        Hierarchy::Dkp2 => HirotaPolynomial::from_terms(&[
            (1.0, &[(1, 5), (4, 1)]),
            (5.0, &[(1, 2), (2, 1), (4, 1)]),
            (-6.0, &[(3, 1), (4, 1)]),
        ]),
        Hierarchy::Ll => return Err(Error::SpecMismatch("the LL system has no single bilinear polynomial".into())),
    })
}

/// `τ(x) = θ(Σ_j x_j U_j + shift, Ω)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaTau {
    pub omega: SiegelPoint,
    #[serde(with = "crate::json::cvector_list")]
    pub directions: Vec<CVector>,
    #[serde(with = "crate::json::cvector")]
    pub shift: CVector,
}

impl ThetaTau {
    fn point(&self, x: &[Complex64]) -> CVector {
        let mut z = self.shift.clone();
        for (u, xj) in self.directions.iter().zip(x) {
            z += u.map(|v| v * xj);
        }
        z
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauSpec {
    Exp { tau: ExpSum },
    Theta { tau: ThetaTau },
    /// Four tau functions of the LL system.
    Quad { f: ExpSum, f_star: ExpSum, g: ExpSum, g_star: ExpSum },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HierarchyParams {
    #[serde(with = "crate::json::complex", default)]
    pub lambda: Complex64,
    #[serde(with = "crate::json::complex", default)]
    pub mu: Complex64,
    /// Constant added to the single-tau operator.
    #[serde(with = "crate::json::complex", default)]
    pub constant: Complex64,
}

impl Default for HierarchyParams {
    fn default() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { lambda: z, mu: z, constant: z }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyResidual {
    pub equation: String,
    /// Relative residual `|P(D)τ·τ| / Σ|terms|` per point.
    pub residuals: Vec<f64>,
}

impl HierarchyResidual {
    pub fn max(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn count_vars(spec: &TauSpec) -> Result<usize> {
    Ok(match spec {
        TauSpec::Exp { tau } => tau.variables()?,
        TauSpec::Theta { tau } => {
            let g = tau.omega.genus();
            if tau.shift.len() != g || tau.directions.iter().any(|u| u.len() != g) {
                return Err(Error::SpecMismatch(format!("theta tau vectors must have length {g}")));
            }
            tau.directions.len()
        }
        TauSpec::Quad { f, f_star, g, g_star } => {
            let k = f.variables()?;
            for s in [f_star, g, g_star] {
                if s.variables()? != k {
                    return Err(Error::SpecMismatch("LL tau functions over different variables".into()));
                }
            }
            k
        }
    })
}

/// Relative residuals of the hierarchy equations at each point. The second
/// BKP equation is included when `h` is [`Hierarchy::Bkp2`]; the DKP pair
/// likewise.
pub fn hierarchy_residual(
    h: Hierarchy,
    spec: &TauSpec,
    points: &[Vec<Complex64>],
    params: &HierarchyParams,
    policy: &TruncationPolicy,
) -> Result<Vec<HierarchyResidual>> {
    let names = h.variables();
    let k = count_vars(spec)?;
    if k != names.len() {
        return Err(Error::SpecMismatch(format!(
            "{} needs variables ({}), tau has {k}",
            h.name(),
            names.join(", ")
        )));
    }
    if let Some(p) = points.iter().find(|p| p.len() != k) {
        return Err(Error::SpecMismatch(format!("point of length {} for {k} variables", p.len())));
    }
    let equations: Vec<(String, HirotaPolynomial)> = match h {
        Hierarchy::Ll => return ll_residuals(spec, points, params),
        Hierarchy::Bkp2 => vec![
            ("bkp1".into(), catalog_polynomial(Hierarchy::Bkp1)?),
            ("bkp2".into(), catalog_polynomial(Hierarchy::Bkp2)?),
        ],
        Hierarchy::Dkp2 => vec![
            ("dkp1".into(), catalog_polynomial(Hierarchy::Dkp1)?),
            ("dkp2".into(), catalog_polynomial(Hierarchy::Dkp2)?),
        ],
        _ => vec![(h.name().into(), catalog_polynomial(h)?)],
    };
    equations
        .into_iter()
        .map(|(name, poly)| {
            let poly = if params.constant != Complex64::new(0.0, 0.0) { poly.with_constant(params.constant) } else { poly };
            let residuals = points
                .iter()
                .map(|x| Ok(single(&poly, spec, x, policy)?.relative()))
                .collect::<Result<Vec<_>>>()?;
            Ok(HierarchyResidual { equation: name, residuals })
        })
        .collect()
}

fn single(poly: &HirotaPolynomial, spec: &TauSpec, x: &[Complex64], policy: &TruncationPolicy) -> Result<Bilinear> {
    match spec {
        TauSpec::Exp { tau } => hirota_apply_scaled(poly, tau, tau, x),
        TauSpec::Theta { tau } => {
            let dirs: BTreeMap<usize, CVector> = tau.directions.iter().cloned().enumerate().map(|(i, u)| (i + 1, u)).collect();
            let z = tau.point(x);
            hirota_apply_theta_scaled(poly, &dirs, &z, &z, &tau.omega, policy)
        }
        TauSpec::Quad { .. } => Err(Error::SpecMismatch("four tau functions given for a single-tau equation".into())),
    }
}

fn ll_residuals(spec: &TauSpec, points: &[Vec<Complex64>], params: &HierarchyParams) -> Result<Vec<HierarchyResidual>> {
    let TauSpec::Quad { f, f_star, g, g_star } = spec else {
        return Err(Error::SpecMismatch("the LL system needs four exponential-sum tau functions".into()));
    };
    let one = Complex64::new(1.0, 0.0);
    let d1 = HirotaPolynomial::from_terms(&[(1.0, &[(1, 1)])]);
    let heat = HirotaPolynomial::from_terms(&[(1.0, &[(2, 1)]), (-1.0, &[(1, 2)])]);
    let heat_l = heat.with_constant(params.lambda);
    // (D₂ − D₁ + λ), kept exactly as the system is stated
    let first_l = HirotaPolynomial::from_terms(&[(1.0, &[(2, 1)]), (-1.0, &[(1, 1)])]).with_constant(params.lambda);
    let mu = HirotaPolynomial::from_terms(&[(1.0, &[])]).scaled(params.mu);
    let terms: [(&str, Vec<(&HirotaPolynomial, &ExpSum, &ExpSum, Complex64)>); 4] = [
        ("ll_conservation", vec![(&d1, f, f_star, one), (&d1, g, g_star, one)]),
        ("ll_difference", vec![(&heat, f, f_star, one), (&heat, g, g_star, -one)]),
        ("ll_cross_fg", vec![(&heat_l, f, g_star, one), (&mu, g, f_star, one)]),
        ("ll_cross_gf", vec![(&first_l, g, f_star, one), (&mu, f, g_star, one)]),
    ];
    terms
        .iter()
        .map(|(name, parts)| {
            let residuals = points
                .iter()
                .map(|x| {
                    let mut acc = Bilinear::default();
                    for (p, a, b, s) in parts {
                        let v = hirota_apply_scaled(p, a, b, x)?;
                        acc = acc.add(Bilinear { value: v.value * s, scale: v.scale });
                    }
                    Ok(acc.relative())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(HierarchyResidual { equation: (*name).into(), residuals })
        })
        .collect()
}
