//! Period matrices of hyperelliptic curves and assembly of Prym period blocks.

mod periods;
mod prym_blocks;

pub use periods::{period_matrix, HyperellipticCurve, PeriodData, MIN_QUAD_ORDER, QUAD_TOLERANCE};

pub use prym_blocks::{assemble_ramified, assemble_unramified, prym_block_assemble, unramified_base, PrymBlocks};
