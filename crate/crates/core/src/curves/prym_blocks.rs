use serde::{Deserialize, Serialize};

use crate::siegel::SiegelPoint;
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Period data of a double covering, in one of the two supported shapes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrymBlocks {
    /// `Π` and `B₀`, both `g × g`.
    Ramified {
        #[serde(with = "crate::json::cmatrix")]
        pi: CMatrix,
        #[serde(with = "crate::json::cmatrix")]
        b0: CMatrix,
    },
    /// `Π`, `T₂` of size `(g−1) × (g−1)`, `T₁` of length `g−1`, scalar `T₀`.
    Unramified {
        #[serde(with = "crate::json::cmatrix")]
        pi: CMatrix,
        #[serde(with = "crate::json::complex")]
        t0: Complex64,
        #[serde(with = "crate::json::cvector")]
        t1: CVector,
        #[serde(with = "crate::json::cmatrix")]
        t2: CMatrix,
    },
}

fn invalid(what: &str, e: Error) -> Error {
    Error::InvalidBlockData(format!("{what}: {e}"))
}

/// `½[[Π+B₀, Π−B₀], [Π−B₀, Π+B₀]]`.
pub fn assemble_ramified(pi: &SiegelPoint, b0: &SiegelPoint) -> Result<SiegelPoint> {
    let g = pi.genus();
    if b0.genus() != g {
        return Err(Error::InvalidBlockData(format!("Π is {g}×{g} but B₀ is {0}×{0}", b0.genus())));
    }
    let (p, b) = (pi.matrix(), b0.matrix());
    let mut out = CMatrix::zeros(2 * g, 2 * g);
    let plus = (p + b).map(|z| z * 0.5);
    let minus = (p - b).map(|z| z * 0.5);
    out.view_mut((0, 0), (g, g)).copy_from(&plus);
    out.view_mut((g, g), (g, g)).copy_from(&plus);
    out.view_mut((0, g), (g, g)).copy_from(&minus);
    out.view_mut((g, 0), (g, g)).copy_from(&minus);
    SiegelPoint::new(out).map_err(|e| invalid("assembled matrix", e))
}

/// `B₀ = [[T₀/2, T₁ᵀ], [T₁, T₂]]`.
pub fn unramified_base(t0: Complex64, t1: &CVector, t2: &CMatrix) -> Result<SiegelPoint> {
    let h = t1.len();
    if t2.nrows() != h || t2.ncols() != h {
        return Err(Error::InvalidBlockData(format!("T₂ must be {h}×{h}")));
    }
    let mut b0 = CMatrix::zeros(h + 1, h + 1);
    b0[(0, 0)] = t0 * 0.5;
    for k in 0..h {
        b0[(0, k + 1)] = t1[k];
        b0[(k + 1, 0)] = t1[k];
    }
    b0.view_mut((1, 1), (h, h)).copy_from(t2);
    SiegelPoint::new(b0).map_err(|e| invalid("B₀", e))
}

/// `[[T₀, T₁ᵀ, T₁ᵀ], [T₁, (T₂+Π)/2, (T₂−Π)/2], [T₁, (T₂−Π)/2, (T₂+Π)/2]]`.
pub fn assemble_unramified(pi: &SiegelPoint, t0: Complex64, t1: &CVector, t2: &CMatrix) -> Result<SiegelPoint> {
    let h = pi.genus();
    if t1.len() != h {
        return Err(Error::InvalidBlockData(format!("T₁ must have length {h}")));
    }
    unramified_base(t0, t1, t2)?;
    let n = 2 * h + 1;
    let mut out = CMatrix::zeros(n, n);
    out[(0, 0)] = t0;
    for k in 0..h {
        for off in [1, 1 + h] {
            out[(0, off + k)] = t1[k];
            out[(off + k, 0)] = t1[k];
        }
    }
    let plus = (t2 + pi.matrix()).map(|z| z * 0.5);
    let minus = (t2 - pi.matrix()).map(|z| z * 0.5);
    out.view_mut((1, 1), (h, h)).copy_from(&plus);
    out.view_mut((1 + h, 1 + h), (h, h)).copy_from(&plus);
    out.view_mut((1, 1 + h), (h, h)).copy_from(&minus);
    out.view_mut((1 + h, 1), (h, h)).copy_from(&minus);
    SiegelPoint::new(out).map_err(|e| invalid("assembled matrix", e))
}

/// Assembles the period matrix of the covering curve from Prym blocks.
pub fn prym_block_assemble(blocks: &PrymBlocks) -> Result<SiegelPoint> {
    match blocks {
        PrymBlocks::Ramified { pi, b0 } => {
            let pi = SiegelPoint::new(pi.clone()).map_err(|e| invalid("Π", e))?;
            let b0 = SiegelPoint::new(b0.clone()).map_err(|e| invalid("B₀", e))?;
            assemble_ramified(&pi, &b0)
        }
        PrymBlocks::Unramified { pi, t0, t1, t2 } => {
            let pi = SiegelPoint::new(pi.clone()).map_err(|e| invalid("Π", e))?;
            assemble_unramified(&pi, *t0, t1, t2)
        }
    }
}
