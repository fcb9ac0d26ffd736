use serde::Serialize;

use super::{half_characteristics, theta_char, theta_jet, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::jet::Jet;
use crate::linalg::c;
use crate::{CVector, Complex64, Result};

/// `θ[n, 0](2z, 2Ω)` over the `2^g` half-characteristics `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KummerVector {
    #[serde(with = "crate::json::complex_vec")]
    pub components: Vec<Complex64>,
}

impl KummerVector {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

pub fn kummer_vector(z: &CVector, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<KummerVector> {
    let two_omega = omega.scaled(2.0);
    let z2 = z.map(|w| w * 2.0);
    let components = half_characteristics(omega.genus())
        .into_iter()
        .map(|n| theta_char(&ThetaCharacteristic::top(n), &z2, &two_omega, policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(KummerVector { components })
}

/// Value and coordinate partials at `z = 0` of `θ[n, 0](·, 2Ω)`.
#[derive(Clone, Debug)]
pub struct ThetaHatRow {
    pub characteristic: Vec<f64>,
    pub jet: Jet,
}

impl ThetaHatRow {
    pub fn value(&self) -> Complex64 {
        self.jet.constant()
    }

    /// `∂^α θ̂[n](0)` in coordinate directions.
    pub fn partial(&self, alpha: &[usize]) -> Complex64 {
        self.jet.derivative(alpha)
    }

    /// `∂_{e_i} ∂_{e_j} θ̂[n](0)`.
    pub fn second(&self, i: usize, j: usize) -> Complex64 {
        let mut alpha = vec![0; self.characteristic.len()];
        alpha[i] += 1;
        alpha[j] += 1;
        self.partial(&alpha)
    }
}

#[derive(Clone, Debug)]
pub struct ThetaHatTable {
    pub genus: usize,
    pub max_order: usize,
    pub rows: Vec<ThetaHatRow>,
}

/// Theta constants `θ̂[n, 0](0, 2Ω)` with all coordinate partials up to
/// `max_order`, for every half-characteristic in the fixed order.
pub fn theta_hat_table(omega: &SiegelPoint, max_order: usize, policy: &TruncationPolicy) -> Result<ThetaHatTable> {
    let g = omega.genus();
    let two_omega = omega.scaled(2.0);
    let zero = CVector::from_element(g, c(0.0, 0.0));
    let axes: Vec<CVector> = (0..g)
        .map(|i| CVector::from_fn(g, |j, _| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }))
        .collect();
    let rows = half_characteristics(g)
        .into_iter()
        .map(|n| {
            let tj = theta_jet(&ThetaCharacteristic::top(n.clone()), &zero, &two_omega, &axes, max_order, policy)?;
            Ok(ThetaHatRow { characteristic: n, jet: tj.jet })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaHatTable { genus: g, max_order, rows })
}

#[derive(Serialize)]
struct PartialEntry {
    alpha: Vec<usize>,
    #[serde(with = "crate::json::complex")]
    value: Complex64,
}

#[derive(Serialize)]
struct RowView<'a> {
    characteristic: &'a [f64],
    #[serde(with = "crate::json::complex")]
    value: Complex64,
    partials: Vec<PartialEntry>,
}

impl Serialize for ThetaHatTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<RowView<'_>> = self
            .rows
            .iter()
            .map(|r| RowView {
                characteristic: &r.characteristic,
                value: r.value(),
                partials: r
                    .jet
                    .set()
                    .iter()
                    .skip(1)
                    .map(|a| PartialEntry { alpha: a.to_vec(), value: r.jet.derivative(a) })
                    .collect(),
            })
            .collect();
        rows.serialize(s)
    }
}
