pub mod curves;
pub mod error;
pub mod hirota;
pub mod identities;
pub mod jet;
pub mod json;
pub mod lattice_forms;
pub mod linalg;
pub mod siegel;
pub mod soliton;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub type CVector = nalgebra::DVector<Complex64>;
pub type CMatrix = nalgebra::DMatrix<Complex64>;
