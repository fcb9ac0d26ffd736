//! Numerical checks of theta-function identities: addition theorems,
//! Prym decompositions, secant relations and the sine-Gordon identity.

mod addition;
mod prym;
mod secant;
mod sine_gordon;

pub use addition::{addition_binary_dual_residual, addition_binary_residual, addition_ternary_residual};
pub use prym::{
    prym_decomposition_ramified_residual, prym_decomposition_unramified_residual, RamifiedCharacteristic,
    UnramifiedCharacteristic,
};
pub use secant::{secant_fit, secant_points_from_quadruple, SecantFit, SecantKind, SecantSystem};
pub use sine_gordon::{half_period_of, sine_gordon_identity_fit, HalfPeriod, SineGordonFit, SineGordonOptions};

use crate::Complex64;

/// `|l − r| / (|l| + |r| + 1)`.
pub fn residual(l: Complex64, r: Complex64) -> f64 {
    (l - r).norm() / (l.norm() + r.norm() + 1.0)
}
