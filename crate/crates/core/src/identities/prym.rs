use serde::{Deserialize, Serialize};

use super::residual;
use crate::curves::{assemble_ramified, assemble_unramified, unramified_base};
use crate::linalg::c;
use crate::siegel::{half_characteristics, theta_char, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Characteristic `[(a, b), (c, d)]` on the covering Jacobian, each block of length `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamifiedCharacteristic {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl RamifiedCharacteristic {
    pub fn zero(g: usize) -> Self {
        Self { a: vec![0.0; g], b: vec![0.0; g], c: vec![0.0; g], d: vec![0.0; g] }
    }
}

/// Characteristic `[(a₀, a, b), (c₀, c, d)]`, blocks of length `g − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnramifiedCharacteristic {
    pub a0: f64,
    pub c0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl UnramifiedCharacteristic {
    pub fn zero(h: usize) -> Self {
        Self { a0: 0.0, c0: 0.0, a: vec![0.0; h], b: vec![0.0; h], c: vec![0.0; h], d: vec![0.0; h] }
    }
}

fn lin(x: &[f64], y: &[f64], sx: f64, sy: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| sx * a + sy * b).collect()
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    lin(x, y, 1.0, 1.0)
}

fn check(len: usize, want: usize) -> Result<()> {
    if len != want {
        return Err(Error::DimensionMismatch { expected: want, found: len });
    }
    Ok(())
}

/// Residual of the decomposition of `θ(z, B)` for `B` assembled from `Π`, `B₀`
/// in the ramified shape; `π₁(u, v) = u + v`, `π₂(u, v) = u − v`.
pub fn prym_decomposition_ramified_residual(
    pi_mat: &SiegelPoint,
    b0: &SiegelPoint,
    z: &CVector,
    chars: &RamifiedCharacteristic,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let g = pi_mat.genus();
    check(z.len(), 2 * g)?;
    for v in [&chars.a, &chars.b, &chars.c, &chars.d] {
        check(v.len(), g)?;
    }
    let big = assemble_ramified(pi_mat, b0)?;
    let full = ThetaCharacteristic::new(
        [chars.a.clone(), chars.b.clone()].concat(),
        [chars.c.clone(), chars.d.clone()].concat(),
    )?;
    let lhs = theta_char(&full, z, &big, policy)?;

    let u = z.rows(0, g).into_owned();
    let v = z.rows(g, g).into_owned();
    let (p1, p2) = (&u + &v, &u - &v);
    let two_pi = pi_mat.scaled(2.0);
    let two_b0 = b0.scaled(2.0);
    let sum_ab = lin(&chars.a, &chars.b, 0.5, 0.5);
    let diff_ab = lin(&chars.a, &chars.b, 0.5, -0.5);
    let sum_cd = add(&chars.c, &chars.d);
    let diff_cd = lin(&chars.c, &chars.d, 1.0, -1.0);
    let mut rhs = c(0.0, 0.0);
    for e in half_characteristics(g) {
        let left = ThetaCharacteristic::new(add(&sum_ab, &e), sum_cd.clone())?;
        let right = ThetaCharacteristic::new(add(&diff_ab, &e), diff_cd.clone())?;
        rhs += theta_char(&left, &p1, &two_pi, policy)? * theta_char(&right, &p2, &two_b0, policy)?;
    }
    Ok(residual(lhs, rhs))
}

/// Residual of the decomposition in the unramified shape, with
/// `π₁(u, v, w) = v − w` (Prym part, `2Π`) and `π₂(u, v, w) = (u, v + w)` (base
/// curve part, `2B₀`).
#[allow(clippy::too_many_arguments)]
pub fn prym_decomposition_unramified_residual(
    pi_mat: &SiegelPoint,
    t0: Complex64,
    t1: &CVector,
    t2: &CMatrix,
    z: &CVector,
    chars: &UnramifiedCharacteristic,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let h = pi_mat.genus();
    check(z.len(), 2 * h + 1)?;
    for v in [&chars.a, &chars.b, &chars.c, &chars.d] {
        check(v.len(), h)?;
    }
    let b0 = unramified_base(t0, t1, t2)?;
    let big = assemble_unramified(pi_mat, t0, t1, t2)?;
    let full = ThetaCharacteristic::new(
        [vec![chars.a0], chars.a.clone(), chars.b.clone()].concat(),
        [vec![chars.c0], chars.c.clone(), chars.d.clone()].concat(),
    )?;
    let lhs = theta_char(&full, z, &big, policy)?;

    let u = z[0];
    let v = z.rows(1, h).into_owned();
    let w = z.rows(1 + h, h).into_owned();
    let p1 = &v - &w;
    let vw = &v + &w;
    let p2 = CVector::from_iterator(h + 1, std::iter::once(u).chain(vw.iter().copied()));
    let two_pi = pi_mat.scaled(2.0);
    let two_b0 = b0.scaled(2.0);
    let sum_ab = lin(&chars.a, &chars.b, 0.5, 0.5);
    let diff_ab = lin(&chars.a, &chars.b, 0.5, -0.5);
    let sum_cd = [vec![chars.c0], add(&chars.c, &chars.d)].concat();
    let diff_cd = lin(&chars.c, &chars.d, 1.0, -1.0);
    let mut rhs = c(0.0, 0.0);
    for e in half_characteristics(h) {
        let base = ThetaCharacteristic::new([vec![chars.a0], add(&sum_ab, &e)].concat(), sum_cd.clone())?;
        let prym = ThetaCharacteristic::new(add(&diff_ab, &e), diff_cd.clone())?;
        rhs += theta_char(&base, &p2, &two_b0, policy)? * theta_char(&prym, &p1, &two_pi, policy)?;
    }
    Ok(residual(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(tau: Complex64) -> SiegelPoint {
        SiegelPoint::new(CMatrix::from_element(1, 1, tau)).unwrap()
    }

    #[test]
    fn ramified_examples() {
        let p = TruncationPolicy::default();
        let pi = scalar(c(0.0, 1.0));
        let b0 = scalar(c(0.0, 2.0));
        let ch = RamifiedCharacteristic::zero(1);
        for z in [[c(0.1, 0.0), c(0.0, 0.2)], [c(0.0, 0.0), c(0.0, 0.0)], [c(0.3, 0.1), c(0.3, 0.1)]] {
            let z = CVector::from_column_slice(&z);
            assert!(prym_decomposition_ramified_residual(&pi, &b0, &z, &ch, &p).unwrap() < 1e-9);
        }
    }

    #[test]
    fn unramified_example() {
        let p = TruncationPolicy::default();
        let pi = scalar(c(0.0, 1.0));
        let z = CVector::from_column_slice(&[c(0.1, 0.05), c(-0.2, 0.1), c(0.3, -0.15)]);
        let t2 = CMatrix::from_element(1, 1, c(0.0, 1.0));
        for t1 in [0.0, 0.2] {
            let r = prym_decomposition_unramified_residual(
                &pi,
                c(0.0, 2.0),
                &CVector::from_element(1, c(t1, 0.0)),
                &t2,
                &z,
                &UnramifiedCharacteristic::zero(1),
                &p,
            )
            .unwrap();
            assert!(r < 1e-9, "T₁ = {t1}: {r:e}");
        }
    }
}
