use std::f64::consts::PI;

use super::residual;
use crate::linalg::c;
use crate::siegel::{half_characteristics, theta, theta_char, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::{CVector, Error, Result};

fn check_len(g: usize, vs: &[&CVector]) -> Result<()> {
    for v in vs {
        if v.len() != g {
            return Err(Error::DimensionMismatch { expected: g, found: v.len() });
        }
    }
    Ok(())
}

/// `θ(z1+z2)θ(z1−z2) = Σ_e θ[e/2,0](2z1,2Ω)·θ[e/2,0](2z2,2Ω)`.
pub fn addition_binary_residual(z1: &CVector, z2: &CVector, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<f64> {
    let g = omega.genus();
    check_len(g, &[z1, z2])?;
    let lhs = theta(&(z1 + z2), omega, policy)? * theta(&(z1 - z2), omega, policy)?;
    let two = omega.scaled(2.0);
    let (w1, w2) = (z1.map(|x| x * 2.0), z2.map(|x| x * 2.0));
    let mut rhs = c(0.0, 0.0);
    for n in half_characteristics(g) {
        let chr = ThetaCharacteristic::top(n);
        rhs += theta_char(&chr, &w1, &two, policy)? * theta_char(&chr, &w2, &two, policy)?;
    }
    Ok(residual(lhs, rhs))
}

/// `θ(z1+z2, Ω)θ(z1−z2, Ω) = 2^{−g} Σ_e θ[0,e/2](z1,Ω/2)·θ[0,e/2](z2,Ω/2)`.
pub fn addition_binary_dual_residual(z1: &CVector, z2: &CVector, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<f64> {
    let g = omega.genus();
    check_len(g, &[z1, z2])?;
    let lhs = theta(&(z1 + z2), omega, policy)? * theta(&(z1 - z2), omega, policy)?;
    let half = omega.scaled(0.5);
    let mut rhs = c(0.0, 0.0);
    for n in half_characteristics(g) {
        let chr = ThetaCharacteristic::bottom(n);
        rhs += theta_char(&chr, z1, &half, policy)? * theta_char(&chr, z2, &half, policy)?;
    }
    rhs /= (1u64 << g) as f64;
    Ok(residual(lhs, rhs))
}

const TERNARY: [[f64; 4]; 4] = [
    [0.5, 0.5, 0.5, 0.5],
    [0.5, 0.5, -0.5, -0.5],
    [0.5, -0.5, 0.5, -0.5],
    [0.5, -0.5, -0.5, 0.5],
];

fn mix<T, F>(items: &[T; 4], f: F) -> [T; 4]
where
    T: Clone,
    F: Fn(&[(f64, &T)]) -> T,
{
    std::array::from_fn(|i| {
        let terms: Vec<(f64, &T)> = (0..4).map(|j| (TERNARY[i][j], &items[j])).collect();
        f(&terms)
    })
}

/// Four-fold product identity with `z̃ = zT`, `ã = aT`, `b̃ = bT`; the sum
/// runs over `c, d ∈ {0, ½, 1, 3/2}^g` with prefactor `2^{−3g}`.
pub fn addition_ternary_residual(
    z: &[CVector; 4],
    chars: &[ThetaCharacteristic; 4],
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let g = omega.genus();
    check_len(g, &z.iter().collect::<Vec<_>>())?;
    for ch in chars {
        if ch.genus() != g {
            return Err(Error::DimensionMismatch { expected: g, found: ch.genus() });
        }
    }
    let zt = mix(z, |t| t.iter().fold(CVector::zeros(g), |acc, (w, v)| acc + v.map(|x| x * *w)));
    let combine = |vs: &[(f64, &Vec<f64>)]| -> Vec<f64> {
        (0..g).map(|k| vs.iter().map(|(w, v)| w * v[k]).sum()).collect()
    };
    let a: [Vec<f64>; 4] = std::array::from_fn(|i| chars[i].a.clone());
    let b: [Vec<f64>; 4] = std::array::from_fn(|i| chars[i].b.clone());
    let at = mix(&a, combine);
    let bt = mix(&b, combine);

    let mut lhs = c(1.0, 0.0);
    for i in 0..4 {
        lhs *= theta_char(&ThetaCharacteristic::new(at[i].clone(), bt[i].clone())?, &zt[i], omega, policy)?;
    }

    let shifts = quarter_grid(g);
    let mut rhs = c(0.0, 0.0);
    for cv in &shifts {
        for dv in &shifts {
            let phase_arg: f64 = dv.iter().zip(&at[0]).map(|(d, a)| d * a).sum();
            let phase = c(0.0, -4.0 * PI * phase_arg).exp();
            let mut prod = c(1.0, 0.0);
            for k in 0..4 {
                let ak = a[k].iter().zip(cv).map(|(x, y)| x + y).collect();
                let bk = b[k].iter().zip(dv).map(|(x, y)| x + y).collect();
                prod *= theta_char(&ThetaCharacteristic::new(ak, bk)?, &z[k], omega, policy)?;
            }
            rhs += phase * prod;
        }
    }
    rhs /= 8f64.powi(g as i32);
    Ok(residual(lhs, rhs))
}

// {0, ½, 1, 3/2}^g
fn quarter_grid(g: usize) -> Vec<Vec<f64>> {
    (0..4usize.pow(g as u32))
        .map(|mut j| {
            (0..g)
                .map(|_| {
                    let v = 0.5 * (j % 4) as f64;
                    j /= 4;
                    v
                })
                .collect()
        })
        .collect()
}
