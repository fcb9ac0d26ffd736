//! Lattice-sum evaluation of theta functions and their directional jets.
//!
//! The series is summed over the ellipsoid `‖√π R(n + Y⁻¹ Im z)‖ ≤ ρ_T`
//! where `Y = Im Ω = RᵀR` and `n` runs over `ℤ^g + a`. The radius `ρ_T` is
//! the smallest value for which a sphere-packing bound on the discarded
//! terms (weighted by the derivative polynomial) drops below the requested
//! absolute tolerance.

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::gamma::{gamma, gamma_ui};

use super::{DirectionalRequest, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::jet::{Jet, MultiIndexSet};
use crate::linalg::{c, norm};
use crate::{CVector, Complex64, Error, Result};

/// Cap on the total derivative order of a single evaluation.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

const CHUNK: usize = 512;
const PARALLEL_WORK: usize = 1 << 15;

/// A theta jet together with the truncation that produced it.
#[derive(Clone, Debug)]
pub struct ThetaJet {
    pub jet: Jet,
    /// Ellipsoid radius in the normalized metric.
    pub radius: f64,
    pub lattice_points: usize,
}

/// `θ(z, Ω)`.
pub fn theta(z: &CVector, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<Complex64> {
    theta_char(&ThetaCharacteristic::zero(omega.genus()), z, omega, policy)
}

/// `θ[a, b](z, Ω)` from the shifted series.
pub fn theta_char(
    chr: &ThetaCharacteristic,
    z: &CVector,
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    Ok(theta_jet(chr, z, omega, &[], 0, policy)?.jet.constant())
}

/// One mixed directional derivative of `θ[a, b]` at `z`.
pub fn theta_deriv(
    req: &DirectionalRequest,
    chr: &ThetaCharacteristic,
    z: &CVector,
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let order = req.total_order();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderCapExceeded { order, cap: MAX_DERIVATIVE_ORDER });
    }
    let tj = theta_jet(chr, z, omega, &req.directions, order, policy)?;
    Ok(tj.jet.derivative(&req.orders))
}

/// All mixed derivatives `∂_{d_1}^{α_1}⋯∂_{d_k}^{α_k} θ[a, b](z)` with
/// `|α| ≤ order`, collected as a Taylor jet in the direction parameters.
pub fn theta_jet(
    chr: &ThetaCharacteristic,
    z: &CVector,
    omega: &SiegelPoint,
    directions: &[CVector],
    order: usize,
    policy: &TruncationPolicy,
) -> Result<ThetaJet> {
    policy.validate()?;
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderCapExceeded { order, cap: MAX_DERIVATIVE_ORDER });
    }
    let g = omega.genus();
    check_dims(g, chr, z, directions)?;
    let centre = centre(chr, z, omega);
    let dnorm = directions.iter().map(norm).fold(0.0, f64::max);
    let beta = norm_real(&y_inv_y(z, omega));
    let yy = quad_y_inv(z, omega);
    let eps_normalized = policy.epsilon * (-PI * yy).exp();
    let radius = required_radius(omega, order, dnorm, beta, eps_normalized)?;
    let half_width = box_half_width(omega, radius);
    if half_width > policy.max_radius as f64 {
        return Err(Error::RadiusCapExceeded { required: half_width.ceil() as u64, cap: policy.max_radius });
    }
    Ok(sum_over_ellipsoid(chr, z, omega, directions, order, &centre, radius))
}

/// Evaluates `θ[a, b](z)` over the ellipsoid of the given normalized radius,
/// bypassing the tail bound. Intended for convergence studies.
pub fn theta_with_radius(chr: &ThetaCharacteristic, z: &CVector, omega: &SiegelPoint, radius: f64) -> Result<Complex64> {
    check_dims(omega.genus(), chr, z, &[])?;
    let centre = centre(chr, z, omega);
    Ok(sum_over_ellipsoid(chr, z, omega, &[], 0, &centre, radius).jet.constant())
}

fn check_dims(g: usize, chr: &ThetaCharacteristic, z: &CVector, directions: &[CVector]) -> Result<()> {
    for len in [chr.a.len(), chr.b.len(), z.len()].into_iter().chain(directions.iter().map(|d| d.len())) {
        if len != g {
            return Err(Error::DimensionMismatch { expected: g, found: len });
        }
    }
    Ok(())
}

fn y_inv_y(z: &CVector, omega: &SiegelPoint) -> Vec<f64> {
    let y = nalgebra::DVector::from_iterator(z.len(), z.iter().map(|w| w.im));
    (omega.imag_inverse() * y).iter().copied().collect()
}

fn quad_y_inv(z: &CVector, omega: &SiegelPoint) -> f64 {
    let c = y_inv_y(z, omega);
    z.iter().zip(&c).map(|(w, ci)| w.im * ci).sum()
}

fn norm_real(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// Points n = m + a are enumerated around -Y⁻¹ Im z, where the modulus of
// the summand peaks; the shift s satisfies x = m + s with s = a + Y⁻¹ Im z.
fn centre(chr: &ThetaCharacteristic, z: &CVector, omega: &SiegelPoint) -> Vec<f64> {
    y_inv_y(z, omega).iter().zip(&chr.a).map(|(ci, ai)| ci + ai).collect()
}

fn box_half_width(omega: &SiegelPoint, radius: f64) -> f64 {
    let b = radius * radius / PI;
    let yi = omega.imag_inverse();
    (0..omega.genus()).map(|i| (b * yi[(i, i)]).sqrt()).fold(0.0, f64::max) + 1.0
}

/// Smallest normalized radius whose weighted tail bound is below `eps`.
fn required_radius(omega: &SiegelPoint, order: usize, dnorm: f64, beta: f64, eps: f64) -> Result<f64> {
    let g = omega.genus();
    let rho = (PI * omega.min_eigenvalue()).sqrt();
    let alpha = 1.0 / rho;
    let c1 = 2.0 * PI * dnorm * alpha;
    let c0 = 1.0 + 2.0 * PI * dnorm * beta;
    let n = order as f64;
    // f(s) = (c0 + c1 s)^N e^{-s²} decreases for s beyond the positive root of
    // 2c1 s² + 2c0 s − N c1 = 0.
    let s_star = if order == 0 || c1 == 0.0 {
        0.0
    } else {
        (-2.0 * c0 + (4.0 * c0 * c0 + 8.0 * c1 * c1 * n).sqrt()) / (4.0 * c1)
    };
    let r_min = rho + s_star;
    let bound = |r: f64| tail_bound(g, rho, order, c0, c1, r - rho);
    if !(eps > 0.0) {
        return Err(Error::InvalidPolicy("tolerance underflows after normalization".into()));
    }
    if bound(r_min) < eps {
        return Ok(r_min);
    }
    let mut lo = r_min;
    let mut hi = r_min + 1.0;
    while bound(hi) >= eps {
        lo = hi;
        hi += 1.0;
        if hi > 1e4 {
            return Err(Error::InvalidPolicy(format!("tail tolerance {eps:e} is unattainable")));
        }
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) < eps {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-3 {
            break;
        }
    }
    Ok(hi)
}

/// `g (2/ρ)^g ∫_{s0}^∞ (c0 + c1 s)^N (s + ρ/2)^{g−1} e^{−s²} ds`.
fn tail_bound(g: usize, rho: f64, order: usize, c0: f64, c1: f64, s0: f64) -> f64 {
    let mut poly = vec![1.0];
    for _ in 0..order {
        poly = poly_mul(&poly, &[c0, c1]);
    }
    for _ in 1..g {
        poly = poly_mul(&poly, &[0.5 * rho, 1.0]);
    }
    let x = s0.max(0.0).powi(2);
    let integral: f64 = poly
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let a = 0.5 * (k as f64 + 1.0);
            let gamma_upper = if x > 0.0 { gamma_ui(a, x) } else { gamma(a) };
            p * 0.5 * gamma_upper
        })
        .sum();
    g as f64 * (2.0 / rho).powi(g as i32) * integral
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Lattice points `n = m + a` (flattened, `g` per point) with
/// `π (n + Y⁻¹y)ᵀ Y (n + Y⁻¹y) ≤ radius²`.
fn enumerate(omega: &SiegelPoint, a: &[f64], shift: &[f64], radius: f64) -> Vec<f64> {
    let g = omega.genus();
    let r = omega.chol_upper();
    let budget = radius * radius / PI;
    let mut out = Vec::new();
    let mut x = vec![0.0; g];
    let mut m = vec![0i64; g];
    descend(g, r, shift, budget, g, &mut x, &mut m, &mut |m: &[i64]| {
        out.extend(m.iter().zip(a).map(|(&mi, &ai)| mi as f64 + ai));
    });
    out
}

// Fixes coordinates from the last one down; `level` coordinates remain.
#[allow(clippy::too_many_arguments)]
fn descend(
    g: usize,
    r: &nalgebra::DMatrix<f64>,
    shift: &[f64],
    remaining: f64,
    level: usize,
    x: &mut [f64],
    m: &mut [i64],
    emit: &mut dyn FnMut(&[i64]),
) {
    if level == 0 {
        emit(m);
        return;
    }
    let i = level - 1;
    let partial: f64 = ((i + 1)..g).map(|j| r[(i, j)] * x[j]).sum();
    let rii = r[(i, i)];
    let half = remaining.max(0.0).sqrt();
    let lo = ((-half - partial) / rii - shift[i]).ceil() as i64;
    let hi = ((half - partial) / rii - shift[i]).floor() as i64;
    for mi in lo..=hi {
        let xi = mi as f64 + shift[i];
        let t = rii * xi + partial;
        let rest = remaining - t * t;
        if rest < 0.0 {
            continue;
        }
        x[i] = xi;
        m[i] = mi;
        descend(g, r, shift, rest, i, x, m, emit);
    }
    x[i] = 0.0;
    m[i] = 0;
}

fn sum_over_ellipsoid(
    chr: &ThetaCharacteristic,
    z: &CVector,
    omega: &SiegelPoint,
    directions: &[CVector],
    order: usize,
    shift: &[f64],
    radius: f64,
) -> ThetaJet {
    let g = omega.genus();
    let set = MultiIndexSet::shared(directions.len(), order);
    let points = enumerate(omega, &chr.a, shift, radius);
    let count = points.len() / g;
    let om = omega.matrix();
    let zb: Vec<Complex64> = z.iter().zip(&chr.b).map(|(zi, bi)| zi + bi).collect();
    let two_pi_i = c(0.0, 2.0 * PI);
    let pi_i = c(0.0, PI);

    let chunk_sum = |chunk: &[f64]| -> Vec<Complex64> {
        let mut acc = vec![c(0.0, 0.0); set.len()];
        let mut mono = vec![c(0.0, 0.0); set.len()];
        let mut w = vec![c(0.0, 0.0); directions.len()];
        for n in chunk.chunks_exact(g) {
            let mut quad = c(0.0, 0.0);
            for i in 0..g {
                let mut row = c(0.0, 0.0);
                for j in 0..g {
                    row += om[(i, j)] * n[j];
                }
                quad += row * n[i];
            }
            let lin: Complex64 = n.iter().zip(&zb).map(|(ni, zi)| zi * *ni).sum();
            let term = (pi_i * quad + two_pi_i * lin).exp();
            for (wj, d) in w.iter_mut().zip(directions) {
                *wj = two_pi_i * n.iter().zip(d.iter()).map(|(ni, di)| di * *ni).sum::<Complex64>();
            }
            set.monomials(&w, &mut mono);
            for (a, mv) in acc.iter_mut().zip(&mono) {
                *a += term * mv;
            }
        }
        acc
    };

    let width = CHUNK * g;
    let partials: Vec<Vec<Complex64>> = if count * set.len() >= PARALLEL_WORK {
        points.par_chunks(width).map(chunk_sum).collect()
    } else {
        points.chunks(width).map(chunk_sum).collect()
    };
    let mut total = vec![c(0.0, 0.0); set.len()];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    ThetaJet { jet: Jet::from_derivatives(set, &total), radius, lattice_points: count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CMatrix;

    fn scalar(tau: Complex64) -> SiegelPoint {
        SiegelPoint::new(CMatrix::from_element(1, 1, tau)).unwrap()
    }

    #[test]
    fn theta_at_i_matches_partial_sum() {
        let brute: f64 = (-10i32..=10).map(|m| (-PI * (m * m) as f64).exp()).sum();
        let v = theta(&CVector::from_element(1, c(0.0, 0.0)), &scalar(c(0.0, 1.0)), &TruncationPolicy::default()).unwrap();
        assert!((v.re - 1.086434811213308).abs() < 1e-12);
        assert!((v.re - brute).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn bound_shrinks_with_radius() {
        let a = tail_bound(2, 1.0, 4, 2.0, 3.0, 3.0);
        let b = tail_bound(2, 1.0, 4, 2.0, 3.0, 4.0);
        assert!(b < a && b > 0.0);
    }

    #[test]
    fn tail_is_sound_for_derivatives() {
        // Fourth derivative at a point with large imaginary part.
        let om = scalar(c(0.1, 0.7));
        let z = CVector::from_element(1, c(0.3, 0.6));
        let d = CVector::from_element(1, c(1.0, 0.0));
        let policy = TruncationPolicy { epsilon: 1e-10, max_radius: 100 };
        let tj = theta_jet(&ThetaCharacteristic::zero(1), &z, &om, &[d.clone()], 4, &policy).unwrap();
        let wide = sum_over_ellipsoid(&ThetaCharacteristic::zero(1), &z, &om, &[d], 4, &centre(&ThetaCharacteristic::zero(1), &z, &om), 2.0 * tj.radius);
        for k in 0..=4 {
            let diff = (tj.jet.derivative(&[k]) - wide.jet.derivative(&[k])).norm();
            assert!(diff < 1e-10, "order {k}: {diff:e}");
        }
    }

    #[test]
    fn order_cap() {
        let om = scalar(c(0.0, 1.0));
        let z = CVector::from_element(1, c(0.0, 0.0));
        let err = theta_jet(&ThetaCharacteristic::zero(1), &z, &om, &[z.clone()], 9, &TruncationPolicy::default());
        assert!(matches!(err, Err(Error::OrderCapExceeded { order: 9, cap: 8 })));
    }

    #[test]
    fn radius_cap() {
        let om = scalar(c(0.0, 1e-4));
        let z = CVector::from_element(1, c(0.0, 0.0));
        let policy = TruncationPolicy { epsilon: 1e-12, max_radius: 10 };
        assert!(matches!(theta(&z, &om, &policy), Err(Error::RadiusCapExceeded { .. })));
    }
}
