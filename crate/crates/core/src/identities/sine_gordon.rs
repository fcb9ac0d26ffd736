use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::secant::fit_rows;
use crate::linalg::c;
use crate::siegel::{theta, theta_jet, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::{CVector, Complex64, Error, Result};

/// Integer vectors `(m₁, m₂)` with `δ = (m₁ + Ω m₂)/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfPeriod {
    pub m1: Vec<i64>,
    pub m2: Vec<i64>,
}

/// Recovers `(m₁, m₂)` from `δ`, or `None` when `2δ` is off the lattice by more
/// than `tol`.
pub fn half_period_of(delta: &CVector, omega: &SiegelPoint, tol: f64) -> Option<HalfPeriod> {
    let g = omega.genus();
    let two = delta.map(|x| x * 2.0);
    let im = DVector::from_iterator(g, two.iter().map(|x| x.im));
    let m2 = omega.imag_inverse() * im;
    let re_om = omega.matrix().map(|x| x.re);
    let m1 = DVector::from_iterator(g, two.iter().map(|x| x.re)) - re_om * &m2;
    let round = |v: &DVector<f64>| -> Option<Vec<i64>> {
        v.iter()
            .map(|x| if (x - x.round()).abs() <= tol * x.abs().max(1.0) { Some(x.round() as i64) } else { None })
            .collect()
    };
    Some(HalfPeriod { m1: round(&m1)?, m2: round(&m2)? })
}

#[derive(Clone, Debug)]
pub struct SineGordonOptions {
    pub samples: usize,
    pub seed: u64,
    /// Reject `δ` that are not half-periods with `NotHalfPeriod`.
    pub require_half_period: bool,
}

impl Default for SineGordonOptions {
    fn default() -> Self {
        Self { samples: 40, seed: 0, require_half_period: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SineGordonFit {
    #[serde(with = "crate::json::complex")]
    pub c1: Complex64,
    #[serde(with = "crate::json::complex")]
    pub c2: Complex64,
    #[serde(with = "crate::json::complex")]
    pub c3: Complex64,
    pub consistency: f64,
    pub half_period: Option<HalfPeriod>,
    pub samples_used: usize,
    pub samples_skipped: usize,
    pub seed: u64,
}

/// Fits `c₁ + c₂·θ(z−δ)θ(z+δ)/θ(z)² + (c₃/2)·D₁D₂ log θ(z) = 0` over samples
/// from the fundamental cell.
pub fn sine_gordon_identity_fit(
    delta: &CVector,
    d1: &CVector,
    d2: &CVector,
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
    opts: &SineGordonOptions,
) -> Result<SineGordonFit> {
    let g = omega.genus();
    for v in [delta, d1, d2] {
        if v.len() != g {
            return Err(Error::DimensionMismatch { expected: g, found: v.len() });
        }
    }
    let half_period = half_period_of(delta, omega, 1e-9);
    if opts.require_half_period && half_period.is_none() {
        return Err(Error::NotHalfPeriod);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dirs = [d1.clone(), d2.clone()];
    let zero = ThetaCharacteristic::zero(g);
    let mut raw = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        let z = omega.random_cell_point(&mut rng);
        let jet = theta_jet(&zero, &z, omega, &dirs, 2, policy)?.jet;
        let th = jet.constant();
        let ratio_num = theta(&(&z - delta), omega, policy)? * theta(&(&z + delta), omega, policy)?;
        let d12 = jet.derivative(&[1, 1]) / th - jet.derivative(&[1, 0]) * jet.derivative(&[0, 1]) / (th * th);
        raw.push((th.norm(), vec![c(1.0, 0.0), ratio_num / (th * th), d12 * 0.5]));
    }
    let scale = raw.iter().map(|r| r.0).fold(0.0, f64::max);
    let kept: Vec<Vec<Complex64>> = raw
        .into_iter()
        .filter(|r| r.0 >= 1e-8 * scale && r.0 > 0.0)
        .map(|r| r.1)
        .collect();
    let skipped = opts.samples - kept.len();
    if kept.is_empty() {
        return Err(Error::NearZeroDenominator { skipped });
    }
    let first = kept[0][1];
    let spread = kept.iter().map(|r| (r[1] - first).norm()).fold(0.0, f64::max);
    if spread <= 1e-10 * first.norm().max(1e-300) {
        return Err(Error::DegenerateSamples("θ(z−δ)θ(z+δ)/θ(z)² is constant in z".into()));
    }
    let fit = fit_rows(kept)?;
    Ok(SineGordonFit {
        c1: fit.coefficients[0],
        c2: fit.coefficients[1],
        c3: fit.coefficients[2],
        consistency: fit.consistency,
        half_period,
        samples_used: fit.samples_used,
        samples_skipped: skipped + fit.samples_skipped,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CMatrix;

    fn tau_i() -> SiegelPoint {
        SiegelPoint::new(CMatrix::from_element(1, 1, c(0.0, 1.0))).unwrap()
    }

    #[test]
    fn half_period_recovery() {
        let om = SiegelPoint::new(CMatrix::from_element(1, 1, c(0.3, 1.1))).unwrap();
        let delta = om.lattice_vector(&[0.5], &[0.5]);
        assert_eq!(half_period_of(&delta, &om, 1e-9), Some(HalfPeriod { m1: vec![1], m2: vec![1] }));
        assert_eq!(half_period_of(&CVector::from_element(1, c(0.3, 0.0)), &om, 1e-9), None);
    }

    #[test]
    fn genus_one_half_period_fit() {
        let one = CVector::from_element(1, c(1.0, 0.0));
        let delta = CVector::from_element(1, c(0.5, 0.0));
        let fit = sine_gordon_identity_fit(&delta, &one, &one, &tau_i(), &TruncationPolicy::default(), &SineGordonOptions::default()).unwrap();
        assert!(fit.consistency < 1e-7, "{}", fit.consistency);
        assert!(fit.c2.norm() > 1e-3 && fit.c3.norm() > 1e-3);
    }

    #[test]
    fn zero_shift_degenerates() {
        let one = CVector::from_element(1, c(1.0, 0.0));
        let r = sine_gordon_identity_fit(&CVector::zeros(1), &one, &one, &tau_i(), &TruncationPolicy::default(), &SineGordonOptions::default());
        assert!(matches!(r, Err(Error::DegenerateSamples(_))));
    }

    #[test]
    fn non_half_period_rejected_by_default() {
        let one = CVector::from_element(1, c(1.0, 0.0));
        let delta = CVector::from_element(1, c(0.3, 0.0));
        let r = sine_gordon_identity_fit(&delta, &one, &one, &tau_i(), &TruncationPolicy::default(), &SineGordonOptions::default());
        assert!(matches!(r, Err(Error::NotHalfPeriod)));
    }
}
