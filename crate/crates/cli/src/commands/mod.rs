mod curves;
mod hirota;
mod soliton;
mod suites;
mod theta;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::{CliError, Command, Context, Outcome};

/// Library operations reachable from each subcommand.
pub const DISPATCH: &[(&str, &[&str])] = &[
    ("theta-eval", &["validate_siegel", "theta", "theta_char", "theta_deriv", "kummer_vector", "theta_hat_table"]),
    (
        "identity-suite",
        &[
            "addition_binary_residual",
            "addition_binary_dual_residual",
            "addition_ternary_residual",
            "modular_transform",
            "modular_constancy_check",
            "validate_siegel",
            "frobenius_normal_form",
            "is_symplectic_member",
            "prym_decomposition_ramified_residual",
            "prym_decomposition_unramified_residual",
            "secant_points_from_quadruple",
            "secant_fit",
            "sine_gordon_identity_fit",
        ],
    ),
    ("secant-fit", &["secant_points_from_quadruple", "secant_fit"]),
    ("hirota", &["hierarchy_residual", "catalog_polynomial", "hirota_apply", "hirota_apply_theta"]),
    (
        "effectivize",
        &[
            "solve_effectivization",
            "kdv_effectivization_residual",
            "kp_effectivization_residual",
            "vn_effectivization_residual",
        ],
    ),
    ("build-solution", &["solve_effectivization", "build_solution"]),
    ("residual-grid", &["solve_effectivization", "build_solution", "pde_residual"]),
    ("period-matrix", &["period_matrix", "prym_block_assemble"]),
    ("sasaki", &["sasaki_irreducibility", "g2_theta_constant_relations"]),
];

pub(crate) fn dispatch(cmd: &Command, ctx: &Context) -> Result<Outcome, CliError> {
    match cmd {
        Command::ThetaEval(a) => theta::theta_eval(a, ctx),
        Command::IdentitySuite(a) => suites::identity_suite(a, ctx),
        Command::SecantFit(a) => suites::secant(a, ctx),
        Command::Hirota(a) => hirota::hirota(a, ctx),
        Command::Effectivize(a) => soliton::effectivize(a, ctx),
        Command::BuildSolution(a) => soliton::build(a, ctx),
        Command::ResidualGrid(a) => soliton::residual_grid(a, ctx),
        Command::PeriodMatrix(a) => curves::period_matrix(a, ctx),
        Command::Sasaki(a) => theta::sasaki(a, ctx),
    }
}

pub(crate) fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

pub(crate) fn min(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}
