use serde_json::json;
use thetalab::curves::{period_matrix as periods, prym_block_assemble, HyperellipticCurve, PrymBlocks};
use thetalab::Error;

use super::to_value;
use crate::{input, Check, CliError, Context, Outcome, PeriodMatrixArgs};

pub(super) fn period_matrix(a: &PeriodMatrixArgs, ctx: &Context) -> Result<Outcome, CliError> {
    if let Some(blocks) = &a.prym {
        let blocks: PrymBlocks = input::parse(blocks)?;
        let om = prym_block_assemble(&blocks)?;
        if let Some(g) = a.genus {
            if g != om.genus() {
                return Err(CliError::Usage(format!("blocks assemble to genus {}, expected {g}", om.genus())));
            }
        }
        let result = json!({ "genus": om.genus(), "normalized": to_value(&om), "min_imag_eigenvalue": om.min_eigenvalue() });
        return Ok(Outcome::new(vec!["prym_block_assemble"], Vec::new(), result));
    }
    let arg = a
        .branch_points
        .as_deref()
        .ok_or_else(|| CliError::Usage("--branch-points or --prym is required".into()))?;
    // malformed lists are usage errors; collisions and unsupported counts are
    // properties of the curve
    let curve = HyperellipticCurve::from_value(&input::value(arg)?).map_err(|e| match e {
        Error::Parse(m) => CliError::Usage(format!("{arg}: {m}")),
        other => CliError::Numeric(other),
    })?;
    if let Some(g) = a.genus {
        if g != curve.genus() {
            return Err(CliError::Usage(format!("branch points give genus {}, expected {g}", curve.genus())));
        }
    }
    let data = periods(&curve, a.quad_order)?;
    let raw = data.a_periods.clone().try_inverse().map(|ai| ai * &data.b_periods);
    let asymmetry = raw.as_ref().map_or(f64::INFINITY, |m| (m - m.transpose()).norm());
    let checks = vec![
        Check::below("quadrature_change", data.quadrature_change, ctx.thresholds.quadrature),
        Check::below("raw_asymmetry", asymmetry, ctx.thresholds.period_symmetry),
    ];
    let result = json!({ "genus": curve.genus(), "period_data": to_value(&data) });
    Ok(Outcome::new(vec!["period_matrix"], checks, result))
}
