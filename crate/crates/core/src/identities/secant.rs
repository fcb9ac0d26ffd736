use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{c, norm, smallest_right_singular};
use crate::siegel::{theta, SiegelPoint, TruncationPolicy};
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Shift pairs `(α_j, β_j)` and sample points `z_k` for the linear relation
/// `Σ_j c_j θ(z + α_j) θ(z + β_j) = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SecantSystem {
    #[serde(with = "pairs")]
    pub shifts: Vec<(CVector, CVector)>,
    #[serde(with = "crate::json::cvector_list")]
    pub samples: Vec<CVector>,
}

mod pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::json::{vector_from_value, vector_to_value};
    use crate::CVector;

    pub fn serialize<S: Serializer>(v: &[(CVector, CVector)], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|(a, b)| [vector_to_value(a), vector_to_value(b)])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(CVector, CVector)>, D::Error> {
        use serde::de::Error as _;
        let raw: Vec<[serde_json::Value; 2]> = Vec::deserialize(d)?;
        raw.iter()
            .map(|[a, b]| Ok((vector_from_value(a).map_err(D::Error::custom)?, vector_from_value(b).map_err(D::Error::custom)?)))
            .collect()
    }
}

impl SecantSystem {
    pub fn new(shifts: Vec<(CVector, CVector)>, samples: Vec<CVector>) -> Result<Self> {
        let s = Self { shifts, samples };
        s.validate(None)?;
        Ok(s)
    }

    /// Draws `count` samples uniformly from the fundamental cell.
    pub fn with_random_samples(shifts: Vec<(CVector, CVector)>, omega: &SiegelPoint, count: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..count).map(|_| omega.random_cell_point(&mut rng)).collect();
        Self::new(shifts, samples)
    }

    fn validate(&self, genus: Option<usize>) -> Result<()> {
        let n = self.shifts.len();
        if n < 2 {
            return Err(Error::MalformedSystem(format!("need at least 2 shift pairs, got {n}")));
        }
        if self.samples.len() < 4 * n {
            return Err(Error::MalformedSystem(format!(
                "need at least {} samples for {n} shift pairs, got {}",
                4 * n,
                self.samples.len()
            )));
        }
        let g = genus.unwrap_or_else(|| self.samples[0].len());
        let lens = self.shifts.iter().flat_map(|(a, b)| [a.len(), b.len()]).chain(self.samples.iter().map(|z| z.len()));
        for len in lens {
            if len != g {
                return Err(Error::MalformedSystem(format!("vector of length {len} in a genus-{g} system")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SecantFit {
    #[serde(with = "crate::json::complex_vec")]
    pub coefficients: Vec<Complex64>,
    /// `σ_min / σ_next` of the row-normalized sample matrix.
    pub consistency: f64,
    pub singular_values: Vec<f64>,
    pub samples_used: usize,
    pub samples_skipped: usize,
}

/// Fits a unit coefficient vector to `M[k][j] = θ(z_k + α_j) θ(z_k + β_j)`.
pub fn secant_fit(system: &SecantSystem, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<SecantFit> {
    system.validate(Some(omega.genus()))?;
    let rows: Vec<Vec<Complex64>> = system
        .samples
        .par_iter()
        .map(|z| {
            system
                .shifts
                .iter()
                .map(|(a, b)| Ok(theta(&(z + a), omega, policy)? * theta(&(z + b), omega, policy)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    fit_rows(rows)
}

/// Null-vector fit shared by the secant and sine-Gordon fitters. Rows whose
/// norm falls below `1e−8` of the largest are discarded.
pub(crate) fn fit_rows(rows: Vec<Vec<Complex64>>) -> Result<SecantFit> {
    let n = rows.first().map_or(0, Vec::len);
    let original = rows.len();
    let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()).collect();
    let scale = norms.iter().copied().fold(0.0, f64::max);
    let kept: Vec<(Vec<Complex64>, f64)> = rows
        .into_iter()
        .zip(norms)
        .filter(|(_, nr)| scale > 0.0 && *nr >= 1e-8 * scale && nr.is_finite())
        .collect();
    let total = kept.len();
    let skipped = original - total;
    if total < n {
        return Err(Error::DegenerateSamples(format!("only {total} usable samples for {n} unknowns")));
    }
    let m = CMatrix::from_fn(total, n, |i, j| kept[i].0[j] / kept[i].1);
    let (sv, v) = smallest_right_singular(&m);
    let smin = sv[n - 1];
    let snext = sv[n - 2];
    if !(snext > 1e-12 * sv[0]) {
        return Err(Error::DegenerateSamples(format!(
            "sample matrix has rank {} for {n} unknowns",
            sv.iter().filter(|&&s| s > 1e-12 * sv[0]).count()
        )));
    }
    let nv = norm(&v);
    // fix the phase so the largest coefficient is real and positive
    let pivot = v.iter().copied().fold(c(0.0, 0.0), |acc, x| if x.norm() > acc.norm() { x } else { acc });
    let rot = pivot.conj() / pivot.norm();
    Ok(SecantFit {
        coefficients: v.iter().map(|x| x * rot / nv).collect(),
        consistency: (smin / snext).min(1.0),
        singular_values: sv,
        samples_used: total,
        samples_skipped: skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecantKind {
    Trisecant,
    Quadrisecant,
}

/// Shift pairs `(w, −w)` for the Kummer arguments of four points:
/// `(p₁+p₂−p₃−p₄)/2`, `(p₁+p₃−p₂−p₄)/2`, `(p₁+p₄−p₂−p₃)/2`, and for the
/// quadrisecant also `(p₁+p₂+p₃+p₄)/2`.
pub fn secant_points_from_quadruple(p: &[CVector; 4], kind: SecantKind) -> Vec<(CVector, CVector)> {
    let half = |s: [f64; 4]| -> CVector {
        let mut acc = p[0].map(|x| x * (0.5 * s[0]));
        for k in 1..4 {
            acc += p[k].map(|x| x * (0.5 * s[k]));
        }
        acc
    };
    let mut args = vec![
        half([1.0, 1.0, -1.0, -1.0]),
        half([1.0, -1.0, 1.0, -1.0]),
        half([1.0, -1.0, -1.0, 1.0]),
    ];
    if kind == SecantKind::Quadrisecant {
        args.push(half([1.0, 1.0, 1.0, 1.0]));
    }
    args.into_iter().map(|w| (w.clone(), -w)).collect()
}
