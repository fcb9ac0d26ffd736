#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thetalab::siegel::SiegelPoint;
use thetalab::{CMatrix, CVector, Complex64};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scalar(tau: Complex64) -> SiegelPoint {
    SiegelPoint::new(CMatrix::from_element(1, 1, tau)).unwrap()
}

pub fn diag(entries: &[Complex64]) -> SiegelPoint {
    let g = entries.len();
    SiegelPoint::new(CMatrix::from_fn(g, g, |i, j| if i == j { entries[i] } else { c(0.0, 0.0) })).unwrap()
}

pub fn omega2(a: Complex64, b: Complex64, d: Complex64) -> SiegelPoint {
    SiegelPoint::new(CMatrix::from_row_slice(2, 2, &[a, b, b, d])).unwrap()
}

pub fn cvec(v: &[Complex64]) -> CVector {
    CVector::from_column_slice(v)
}

pub fn random_vec<R: Rng>(g: usize, rng: &mut R, scale: f64) -> CVector {
    CVector::from_fn(g, |_, _| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
}

/// Plain box sum over `m ∈ [−k, k]^g` of
/// `∏ (2πi⟨m+a, d_j⟩)^{o_j} exp(πi (m+a)ᵀΩ(m+a) + 2πi (m+a)ᵀ(z+b))`.
pub fn brute_theta(
    a: &[f64],
    b: &[f64],
    z: &CVector,
    omega: &CMatrix,
    k: i64,
    derivs: &[(CVector, u32)],
) -> Complex64 {
    let g = z.len();
    let mut total = c(0.0, 0.0);
    let mut idx = vec![-k; g];
    loop {
        let n: Vec<f64> = idx.iter().zip(a).map(|(&m, &ai)| m as f64 + ai).collect();
        let mut quad = c(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                quad += omega[(i, j)] * n[i] * n[j];
            }
        }
        let mut lin = c(0.0, 0.0);
        for i in 0..g {
            lin += (z[i] + b[i]) * n[i];
        }
        let mut w = (c(0.0, PI) * quad + c(0.0, 2.0 * PI) * lin).exp();
        for (d, o) in derivs {
            let mut p = c(0.0, 0.0);
            for i in 0..g {
                p += d[i] * n[i];
            }
            w *= (c(0.0, 2.0 * PI) * p).powu(*o);
        }
        total += w;
        let mut pos = 0;
        loop {
            if pos == g {
                return total;
            }
            idx[pos] += 1;
            if idx[pos] > k {
                idx[pos] = -k;
                pos += 1;
            } else {
                break;
            }
        }
    }
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (a.norm() + b.norm()).max(1e-300)
}
