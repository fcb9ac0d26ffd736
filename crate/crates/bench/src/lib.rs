//! Fixed inputs shared by the benchmarks.

use thetalab::siegel::SiegelPoint;
use thetalab::{CMatrix, CVector, Complex64};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A period matrix of genus `g ≤ 3` with moderate off-diagonal coupling.
pub fn omega(g: usize) -> SiegelPoint {
    let full = [
        [c(0.2, 1.1), c(0.35, 0.2), c(-0.1, 0.15)],
        [c(0.35, 0.2), c(-0.1, 1.3), c(0.05, -0.1)],
        [c(-0.1, 0.15), c(0.05, -0.1), c(0.3, 1.2)],
    ];
    assert!((1..=3).contains(&g), "fixtures cover genus 1 to 3");
    SiegelPoint::new(CMatrix::from_fn(g, g, |i, j| full[i][j])).expect("fixture is in Siegel space")
}

pub fn point(g: usize) -> CVector {
    CVector::from_fn(g, |i, _| c(0.1 + 0.07 * i as f64, -0.05 + 0.03 * i as f64))
}
