use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{SolutionKind, WaveVectors};
use crate::identities::half_period_of;
use crate::jet::{Jet, MultiIndexSet};
use crate::linalg::c;
use crate::siegel::{theta_jet, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::{CVector, Complex64, Error, Result};

/// Field order exposed by [`FieldSample`].
const FIELD_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// A theta-formula solution `u(x, y, t)`:
///
/// * KdV: `2∂ₓ² log θ(Ux + Wt + Z)`
/// * KP: `2∂ₓ² log θ(Ux + (2/√3)Vy + Wt + Z)`
/// * VN: `2∂ₓ∂_y log θ(Ux + Vy + Wt + Z) + C`, with `x, y` standing for `z, z̄`
/// * sine-Gordon: `2i log(θ(ξ+δ)/θ(ξ)) − 2π⟨m₂, ξ + δ/2⟩`, `ξ = Ux + Vy + Z`
#[derive(Clone, Debug, Serialize)]
pub struct SolutionField {
    pub kind: SolutionKind,
    pub wave: WaveVectors,
    pub omega: SiegelPoint,
    #[serde(skip)]
    policy: TruncationPolicy,
    /// `m₂` of the half-period `δ = (m₁ + Ωm₂)/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_period_m2: Option<Vec<i64>>,
    /// Caveat recorded for VN fields: the input is not certified to be a Prym
    /// period matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `u` and its partials up to total order 4 at one point.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub point: GridPoint,
    pub jet: Jet,
    /// VN: `v = 6∂ₓ² log θ + d` with its partials.
    aux: Option<Jet>,
    /// sine-Gordon: `sin u` without branch ambiguity.
    sin_u: Option<Complex64>,
}

impl FieldSample {
    pub fn u(&self) -> Complex64 {
        self.jet.constant()
    }

    /// `∂ₓ^i ∂_y^j ∂_t^k u`.
    pub fn partial(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.jet.derivative(&[i, j, k])
    }
}

pub fn build_solution(kind: SolutionKind, wave: &WaveVectors, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<SolutionField> {
    wave.check(omega.genus())?;
    policy.validate()?;
    let mut half_period_m2 = None;
    let mut note = None;
    match kind {
        SolutionKind::SineGordon => {
            let delta = wave.delta.as_ref().ok_or(Error::NotHalfPeriod)?;
            half_period_m2 = Some(half_period_of(delta, omega, 1e-9).ok_or(Error::NotHalfPeriod)?.m2);
        }
        SolutionKind::Vn => note = Some("period matrix taken as given; Prym origin not certified".into()),
        _ => {}
    }
    Ok(SolutionField { kind, wave: wave.clone(), omega: omega.clone(), policy: policy.clone(), half_period_m2, note })
}

impl SolutionField {
    fn directions(&self) -> [CVector; 3] {
        let g = self.omega.genus();
        let w = &self.wave;
        match self.kind {
            SolutionKind::Kdv => [w.u.clone(), CVector::zeros(g), w.w.clone()],
            SolutionKind::Kp => [w.u.clone(), w.v.map(|x| x * (2.0 / 3f64.sqrt())), w.w.clone()],
            SolutionKind::Vn => [w.u.clone(), w.v.clone(), w.w.clone()],
            SolutionKind::SineGordon => [w.u.clone(), w.v.clone(), CVector::zeros(g)],
        }
    }

    fn argument(&self, p: &GridPoint) -> CVector {
        let [dx, dy, dt] = self.directions();
        &self.wave.z + dx.map(|v| v * p.x) + dy.map(|v| v * p.y) + dt.map(|v| v * p.t)
    }

    /// Theta jet at `xi`, checked against the divisor in the normalized scale
    /// `|θ|·exp(−π yᵀY⁻¹y)`.
    fn log_theta(&self, xi: &CVector, order: usize) -> Result<(Jet, Complex64)> {
        let dirs = self.directions();
        let chr = ThetaCharacteristic::zero(self.omega.genus());
        let jet = theta_jet(&chr, xi, &self.omega, &dirs, order, &self.policy)?.jet;
        let y = nalgebra::DVector::from_iterator(xi.len(), xi.iter().map(|v| v.im));
        let quad = (y.transpose() * self.omega.imag_inverse() * &y)[(0, 0)];
        let modulus = jet.constant().norm() * (-PI * quad).exp();
        if !(modulus >= 1e-8) {
            return Err(Error::NearDivisor { modulus });
        }
        Ok((jet.ln(), jet.constant()))
    }

    pub fn eval(&self, p: GridPoint) -> Result<FieldSample> {
        let set = MultiIndexSet::shared(3, FIELD_ORDER);
        let xi = self.argument(&p);
        match self.kind {
            SolutionKind::Kdv | SolutionKind::Kp | SolutionKind::Vn => {
                let (log, _) = self.log_theta(&xi, FIELD_ORDER + 2)?;
                let shift = if self.kind == SolutionKind::Vn { [1, 1, 0] } else { [2, 0, 0] };
                let shifted = |s: [usize; 3], scale: f64| -> Vec<Complex64> {
                    set.iter()
                        .map(|a| log.derivative(&[a[0] + s[0], a[1] + s[1], a[2] + s[2]]) * scale)
                        .collect()
                };
                let mut derivs = shifted(shift, 2.0);
                let mut aux = None;
                if self.kind == SolutionKind::Vn {
                    derivs[0] += self.wave.c;
                    let mut v = shifted([2, 0, 0], 6.0);
                    v[0] += self.wave.d;
                    aux = Some(Jet::from_derivatives(set.clone(), &v));
                }
                Ok(FieldSample { point: p, jet: Jet::from_derivatives(set, &derivs), aux, sin_u: None })
            }
            SolutionKind::SineGordon => {
                let delta = self.wave.delta.as_ref().ok_or(Error::NotHalfPeriod)?;
                let m2 = self.half_period_m2.as_ref().ok_or(Error::NotHalfPeriod)?;
                let shifted_xi = &xi + delta;
                let (l0, th0) = self.log_theta(&xi, FIELD_ORDER)?;
                let (l1, th1) = self.log_theta(&shifted_xi, FIELD_ORDER)?;
                let dirs = self.directions();
                let dot_m = |v: &CVector| -> Complex64 { m2.iter().zip(v.iter()).map(|(m, x)| x * *m as f64).sum() };
                let half: CVector = &xi + delta.map(|v| v * 0.5);
                let lin = dot_m(&half);
                let mut derivs: Vec<Complex64> = set
                    .iter()
                    .map(|a| (l1.derivative(a) - l0.derivative(a)) * c(0.0, 2.0))
                    .collect();
                derivs[0] -= lin * (2.0 * PI);
                for (k, d) in dirs.iter().enumerate() {
                    let mut a = [0usize; 3];
                    a[k] = 1;
                    let i = set.index_of(&a).expect("first-order index");
                    derivs[i] -= dot_m(d) * (2.0 * PI);
                }
                // e^{iu} = (θ(ξ)/θ(ξ+δ))²·exp(−2πi⟨m₂, ξ + δ/2⟩)
                let eiu = (th0 / th1).powu(2) * (c(0.0, -2.0 * PI) * lin).exp();
                let sin_u = (eiu - eiu.inv()) / c(0.0, 2.0);
                Ok(FieldSample { point: p, jet: Jet::from_derivatives(set, &derivs), aux: None, sin_u: Some(sin_u) })
            }
        }
    }

    /// Governing-equation residual at one sample as `(value, Σ|terms|)`; for
    /// sine-Gordon the terms are `u_xy` and `sin u` before fitting `C`.
    fn terms(&self, s: &FieldSample) -> Vec<Complex64> {
        let d = |i, j, k| s.partial(i, j, k);
        let u = s.u();
        match self.kind {
            SolutionKind::Kdv => vec![d(0, 0, 1), -(u * d(1, 0, 0)) * 1.5, -d(3, 0, 0) * 0.25],
            SolutionKind::Kp => vec![
                d(0, 2, 0) * 0.75,
                -d(1, 0, 1),
                d(1, 0, 0) * d(1, 0, 0) * 1.5,
                u * d(2, 0, 0) * 1.5,
                d(4, 0, 0) * 0.25,
            ],
            SolutionKind::Vn => {
                let v = s.aux.as_ref().expect("VN sample carries v");
                vec![d(0, 0, 1), -d(3, 0, 0), -v.derivative(&[1, 0, 0]) * u, -v.constant() * d(1, 0, 0)]
            }
            SolutionKind::SineGordon => vec![d(1, 1, 0), s.sin_u.expect("sine-Gordon sample carries sin u")],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PdeStats {
    pub max: f64,
    pub mean: f64,
    pub evaluated: usize,
    /// Points rejected near the theta divisor.
    pub skipped: usize,
    /// Fitted constant `C` of `u_xy = C sin u`.
    #[serde(with = "opt_complex", skip_serializing_if = "Option::is_none")]
    pub constant: Option<Complex64>,
    pub residuals: Vec<f64>,
}

mod opt_complex {
    use serde::Serializer;

    use crate::json::complex_to_value;
    use crate::Complex64;

    pub fn serialize<S: Serializer>(v: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(c) => s.serialize_some(&complex_to_value(*c)),
            None => s.serialize_none(),
        }
    }
}

/// Relative residuals of the governing equation over `grid`:
///
/// * KdV: `u_t − ¼(6uu_x + u_xxx)`
/// * KP: `¾u_yy − ∂ₓ(u_t − ¼(6uu_x + u_xxx))`
/// * VN (holomorphic half): `U_t − U_xxx − ∂ₓ(vU)`
/// * sine-Gordon: `u_xy − C sin u` with `C` fitted by least squares
pub fn pde_residual(field: &SolutionField, grid: &[GridPoint]) -> Result<PdeStats> {
    let mut samples = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    for p in grid {
        match field.eval(*p) {
            Ok(s) => samples.push(field.terms(&s)),
            Err(Error::NearDivisor { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let mut constant = None;
    let residuals: Vec<f64> = if field.kind == SolutionKind::SineGordon {
        let num: Complex64 = samples.iter().map(|t| t[1].conj() * t[0]).sum();
        let den: f64 = samples.iter().map(|t| t[1].norm_sqr()).sum();
        let cfit = if den > 0.0 { num / den } else { c(0.0, 0.0) };
        constant = Some(cfit);
        let pairs: Vec<(Complex64, f64)> = samples
            .iter()
            .map(|t| {
                let (a, b) = (t[0], t[1] * cfit);
                (a - b, a.norm() + b.norm())
            })
            .collect();
        relative(&pairs)
    } else {
        let pairs: Vec<(Complex64, f64)> =
            samples.iter().map(|t| (t.iter().sum(), t.iter().map(|x| x.norm()).sum())).collect();
        relative(&pairs)
    };
    let evaluated = residuals.len();
    if evaluated == 0 {
        return Err(Error::NearZeroDenominator { skipped });
    }
    Ok(PdeStats {
        max: residuals.iter().copied().fold(0.0, f64::max),
        mean: residuals.iter().sum::<f64>() / evaluated as f64,
        evaluated,
        skipped,
        constant,
        residuals,
    })
}

/// `|value| / scale`, with the scale floored at `1e−3` of its grid mean so that
/// points where every term vanishes by symmetry do not divide noise by noise.
fn relative(pairs: &[(Complex64, f64)]) -> Vec<f64> {
    let mean = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len().max(1) as f64;
    let floor = 1e-3 * mean;
    pairs
        .iter()
        .map(|(v, s)| {
            let s = s.max(floor);
            if s == 0.0 { 0.0 } else { v.norm() / s }
        })
        .collect()
}
