use serde::Serialize;

use crate::linalg::c;
use crate::siegel::{theta_hat_table, SiegelPoint, ThetaHatRow, ThetaHatTable, TruncationPolicy};
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// `∂_{d_1}⋯∂_{d_k} θ̂[n](0)` from the coordinate partials of one row.
pub(crate) fn directional(row: &ThetaHatRow, dirs: &[&CVector]) -> Complex64 {
    let g = row.characteristic.len();
    let k = dirs.len();
    let mut idx = vec![0usize; k];
    let mut total = c(0.0, 0.0);
    loop {
        let mut w = c(1.0, 0.0);
        let mut alpha = vec![0usize; g];
        for (j, &i) in idx.iter().enumerate() {
            w *= dirs[j][i];
            alpha[i] += 1;
        }
        if w != c(0.0, 0.0) {
            total += w * row.partial(&alpha);
        }
        let mut p = 0;
        while p < k {
            idx[p] += 1;
            if idx[p] < g {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
        if p == k {
            return total;
        }
    }
}

/// Columns `θ̂_jk` (`j ≤ k`, row-major) followed by `θ̂`, one row per `n`.
pub(crate) fn sasaki_matrix(table: &ThetaHatTable) -> CMatrix {
    let g = table.genus;
    let pairs: Vec<(usize, usize)> = (0..g).flat_map(|j| (j..g).map(move |k| (j, k))).collect();
    CMatrix::from_fn(table.rows.len(), pairs.len() + 1, |n, col| {
        let row = &table.rows[n];
        match pairs.get(col) {
            Some(&(j, k)) => row.second(j, k),
            None => row.value(),
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SasakiReport {
    pub rank: usize,
    pub maximal: usize,
    pub is_irreducible: bool,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

/// Numerical rank of the theta-constant matrix with the default threshold
/// `1e−9·σ_max`.
pub fn sasaki_irreducibility(omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<SasakiReport> {
    sasaki_with_threshold(omega, policy, 1e-9)
}

pub fn sasaki_with_threshold(omega: &SiegelPoint, policy: &TruncationPolicy, rel_threshold: f64) -> Result<SasakiReport> {
    let table = theta_hat_table(omega, 2, policy)?;
    Ok(sasaki_from_table(&table, rel_threshold))
}

pub(crate) fn sasaki_from_table(table: &ThetaHatTable, rel_threshold: f64) -> SasakiReport {
    let m = sasaki_matrix(table);
    let maximal = m.ncols();
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cut = rel_threshold * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > cut).count();
    SasakiReport { rank, maximal, is_irreducible: rank == maximal, singular_values: sv, threshold: rel_threshold }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaConstantRelations {
    /// Absolute residuals in the order: first relation `(k, m) = (1, 2), (2, 1)`,
    /// second relation `(1, 2), (2, 1)`, third relation.
    pub residuals: Vec<f64>,
    pub labels: Vec<String>,
    /// `σ_min / σ_max` of the duality matrix.
    pub duality_conditioning: f64,
}

impl ThetaConstantRelations {
    pub fn max(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Relations among fourth-order theta constants of a genus-2 variety,
/// contracted with the rows of the inverse of `(θ̂₁₁ θ̂₁₂ θ̂₂₂ θ̂)`.
pub fn g2_theta_constant_relations(omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<ThetaConstantRelations> {
    if omega.genus() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: omega.genus() });
    }
    let table = theta_hat_table(omega, 4, policy)?;
    let m = sasaki_matrix(&table);
    let sv = m.singular_values();
    let conditioning = sv.min() / sv.max();
    if !(conditioning > 1e-10) {
        return Err(Error::SingularDuality);
    }
    let inv = m.try_inverse().ok_or(Error::SingularDuality)?;
    // a^{pq}_n with p, q ∈ {0, 1}
    let a = |p: usize, q: usize, n: usize| -> Complex64 {
        let r = match (p.min(q), p.max(q)) {
            (0, 0) => 0,
            (0, 1) => 1,
            _ => 2,
        };
        inv[(r, n)]
    };
    let d4 = |n: usize, idx: [usize; 4]| -> Complex64 {
        let mut alpha = [0usize; 2];
        for i in idx {
            alpha[i] += 1;
        }
        table.rows[n].partial(&alpha)
    };
    let sum = |f: &dyn Fn(usize) -> Complex64| -> f64 { (0..4).map(f).sum::<Complex64>().norm() };
    let mut residuals = Vec::new();
    let mut labels = Vec::new();
    for (k, m) in [(0, 1), (1, 0)] {
        residuals.push(sum(&|n| a(k, m, n) * d4(n, [m, m, m, m]) + a(k, k, n) * d4(n, [k, m, m, m]) * 2.0));
        labels.push(format!("first(k={}, m={})", k + 1, m + 1));
    }
    for (k, m) in [(0, 1), (1, 0)] {
        residuals.push(sum(&|n| {
            a(k, m, n) * d4(n, [k, m, m, m]) - a(m, m, n) * d4(n, [m, m, m, m]) + a(k, k, n) * d4(n, [k, k, m, m]) * 3.0
        }));
        labels.push(format!("second(k={}, m={})", k + 1, m + 1));
    }
    residuals.push(sum(&|n| a(0, 0, n) * d4(n, [0, 0, 0, 1]) - a(1, 1, n) * d4(n, [0, 1, 1, 1])));
    labels.push("third".into());
    Ok(ThetaConstantRelations { residuals, labels, duality_conditioning: conditioning })
}
