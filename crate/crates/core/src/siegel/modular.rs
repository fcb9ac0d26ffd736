use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{theta_char, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::lattice_forms::{is_symplectic_member, IntMatrix, PolarizationType};
use crate::linalg::{c, int_to_complex};
use crate::{CMatrix, CVector, Complex64, Error, Result};

struct Blocks {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

fn blocks(g_elem: &IntMatrix, g: usize) -> Result<Blocks> {
    if g_elem.nrows() != 2 * g || g_elem.ncols() != 2 * g {
        return Err(Error::DimensionMismatch { expected: 2 * g, found: g_elem.nrows() });
    }
    if !is_symplectic_member(g_elem, &PolarizationType::principal(g))? {
        return Err(Error::NotSymplectic);
    }
    let m = int_to_complex(g_elem)?;
    Ok(Blocks {
        a: m.view((0, 0), (g, g)).into_owned(),
        b: m.view((0, g), (g, g)).into_owned(),
        c: m.view((g, 0), (g, g)).into_owned(),
        d: m.view((g, g), (g, g)).into_owned(),
    })
}

fn invert_denominator(den: &CMatrix) -> Result<CMatrix> {
    let sv = den.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 || sv.min() < 1e-12 * smax {
        return Err(Error::SingularDenominator);
    }
    den.clone().try_inverse().ok_or(Error::SingularDenominator)
}

/// `(AΩ + B)(CΩ + D)⁻¹` for an element of `Sp(2g, ℤ)`.
pub fn modular_transform(omega: &SiegelPoint, g_elem: &IntMatrix) -> Result<SiegelPoint> {
    let g = omega.genus();
    let bl = blocks(g_elem, g)?;
    let om = omega.matrix();
    let inv = invert_denominator(&(&bl.c * om + &bl.d))?;
    let image = (&bl.a * om + &bl.b) * inv;
    SiegelPoint::with_tolerance(&image, 1e-9)
}

/// Image `[a', b']` of a characteristic under the modular action.
pub fn transform_characteristic(chr: &ThetaCharacteristic, g_elem: &IntMatrix) -> Result<ThetaCharacteristic> {
    let g = chr.genus();
    let bl = blocks(g_elem, g)?;
    let re = |m: &CMatrix| m.map(|z| z.re);
    let (a, b, cm, d) = (re(&bl.a), re(&bl.b), re(&bl.c), re(&bl.d));
    let av = nalgebra::DVector::from_column_slice(&chr.a);
    let bv = nalgebra::DVector::from_column_slice(&chr.b);
    let cd = &cm * d.transpose();
    let ab = &a * b.transpose();
    let a_new = &d * &av - &cm * &bv + cd.diagonal() * 0.5;
    let b_new = -(&b * &av) + &a * &bv + ab.diagonal() * 0.5;
    ThetaCharacteristic::new(a_new.iter().copied().collect(), b_new.iter().copied().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularCheck {
    /// `max_k |r_k − r̄| / |r̄|` over accepted samples.
    pub spread: f64,
    #[serde(with = "crate::json::complex")]
    pub mean_ratio: Complex64,
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
}

/// Checks that `θ[a',b'](z',Ω') / (exp(πi zᵀTz) θ[a,b](z,Ω))` is independent
/// of `z`, with `z' = ((CΩ+D)ᵀ)⁻¹ z` and `T = (CΩ+D)⁻¹C`. `t_override`
/// replaces `T` (negative controls).
pub fn modular_constancy_check(
    omega: &SiegelPoint,
    g_elem: &IntMatrix,
    chr: &ThetaCharacteristic,
    sample_count: usize,
    seed: u64,
    policy: &TruncationPolicy,
    t_override: Option<&CMatrix>,
) -> Result<ModularCheck> {
    let g = omega.genus();
    if chr.genus() != g {
        return Err(Error::DimensionMismatch { expected: g, found: chr.genus() });
    }
    let bl = blocks(g_elem, g)?;
    let om = omega.matrix();
    let den = &bl.c * om + &bl.d;
    let inv = invert_denominator(&den)?;
    let image = modular_transform(omega, g_elem)?;
    let chr_image = transform_characteristic(chr, g_elem)?;
    let t = match t_override {
        Some(t) => t.clone(),
        None => &inv * &bl.c,
    };
    let inv_t = inv.transpose();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(sample_count);
    for _ in 0..sample_count {
        let z = omega.random_cell_point(&mut rng);
        let base = theta_char(chr, &z, omega, policy)?;
        let zp: CVector = &inv_t * &z;
        let top = theta_char(&chr_image, &zp, &image, policy)?;
        let quad = (z.transpose() * &t * &z)[(0, 0)];
        let phase = (c(0.0, std::f64::consts::PI) * quad).exp();
        raw.push((base.norm(), top, phase * base));
    }
    let scale = raw.iter().map(|r| r.0).fold(0.0, f64::max);
    let ratios: Vec<Complex64> = raw
        .iter()
        .filter(|r| r.0 >= 1e-8 * scale && r.0 > 0.0)
        .map(|r| r.1 / r.2)
        .collect();
    let skipped = sample_count - ratios.len();
    if ratios.is_empty() {
        return Err(Error::NearZeroDenominator { skipped });
    }
    let mean: Complex64 = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm();
    Ok(ModularCheck { spread, mean_ratio: mean, samples: ratios.len(), skipped, seed })
}
