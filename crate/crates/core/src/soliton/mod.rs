//! Effectivization equations for finite-gap solutions, their solvers, the
//! theta-formula solution fields, and tests on theta constants.

mod effectivization;
mod field;
mod lm;
mod theta_constants;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use effectivization::{
    kdv_effectivization_residual, kp_effectivization_residual, solve_effectivization, vn_effectivization_residual,
    EffectivizationSolution, SolveOptions,
};
pub use field::{build_solution, pde_residual, FieldSample, GridPoint, PdeStats, SolutionField};
pub use theta_constants::{
    g2_theta_constant_relations, sasaki_irreducibility, sasaki_with_threshold, SasakiReport, ThetaConstantRelations,
};

use crate::{CVector, Complex64, Error, Result};

/// Wave vectors and constants of a theta-formula solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveVectors {
    #[serde(with = "crate::json::cvector")]
    pub u: CVector,
    #[serde(with = "crate::json::cvector")]
    pub v: CVector,
    #[serde(with = "crate::json::cvector")]
    pub w: CVector,
    #[serde(with = "crate::json::cvector")]
    pub z: CVector,
    #[serde(with = "crate::json::complex", default)]
    pub a: Complex64,
    #[serde(with = "crate::json::complex", default)]
    pub c: Complex64,
    #[serde(with = "crate::json::complex", default)]
    pub d: Complex64,
    /// Half-period shift of the sine-Gordon field.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_cvector")]
    pub delta: Option<CVector>,
}

mod opt_cvector {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::json::{vector_from_value, vector_to_value};
    use crate::CVector;

    pub fn serialize<S: Serializer>(v: &Option<CVector>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&vector_to_value(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CVector>, D::Error> {
        let raw: Option<serde_json::Value> = Option::deserialize(d)?;
        raw.map(|v| vector_from_value(&v).map_err(serde::de::Error::custom)).transpose()
    }
}

impl WaveVectors {
    pub fn zeros(g: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            u: CVector::zeros(g),
            v: CVector::zeros(g),
            w: CVector::zeros(g),
            z: CVector::zeros(g),
            a: z,
            c: z,
            d: z,
            delta: None,
        }
    }

    pub fn genus(&self) -> usize {
        self.u.len()
    }

    pub(crate) fn check(&self, g: usize) -> Result<()> {
        for v in [&self.u, &self.v, &self.w, &self.z].into_iter().chain(self.delta.as_ref()) {
            if v.len() != g {
                return Err(Error::DimensionMismatch { expected: g, found: v.len() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectivizationKind {
    Kdv,
    Kp,
    VnHolomorphic,
    VnAntiholomorphic,
}

impl FromStr for EffectivizationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "kdv" => Self::Kdv,
            "kp" => Self::Kp,
            "vn" | "vn_holomorphic" => Self::VnHolomorphic,
            "vn_antiholomorphic" => Self::VnAntiholomorphic,
            other => return Err(Error::Parse(format!("unknown effectivization kind '{other}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Kdv,
    Kp,
    SineGordon,
    Vn,
}

impl FromStr for SolutionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "kdv" => Self::Kdv,
            "kp" => Self::Kp,
            "sg" | "sine_gordon" => Self::SineGordon,
            "vn" => Self::Vn,
            other => return Err(Error::Parse(format!("unknown solution kind '{other}'"))),
        })
    }
}
