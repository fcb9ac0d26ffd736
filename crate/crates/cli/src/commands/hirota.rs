use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::json;
use thetalab::hirota::{
    catalog_polynomial, hierarchy_residual, hirota_apply_scaled, hirota_apply_theta_scaled, ExpSum, Hierarchy,
    HierarchyParams, HirotaPolynomial, TauSpec,
};
use thetalab::siegel::SiegelPoint;
use thetalab::CVector;

use super::{max, to_value};
use crate::{input, Check, CliError, Context, HirotaArgs, Outcome};

/// Theta data for a custom polynomial, evaluated at each `(z₁, z₂)` pair.
/// Direction `k` of the list belongs to variable `k + 1`.
#[derive(Deserialize)]
struct ThetaPairs {
    omega: SiegelPoint,
    #[serde(with = "thetalab::json::cvector_list")]
    directions: Vec<CVector>,
    #[serde(with = "thetalab::json::cvector_list")]
    z1: Vec<CVector>,
    #[serde(with = "thetalab::json::cvector_list")]
    z2: Vec<CVector>,
}

fn points(arg: Option<&String>) -> Result<Vec<Vec<thetalab::Complex64>>, CliError> {
    let arg = arg.ok_or_else(|| CliError::Usage("--points is required".into()))?;
    Ok(input::vectors(arg)?.into_iter().map(|v| v.iter().copied().collect()).collect())
}

pub(super) fn hirota(a: &HirotaArgs, ctx: &Context) -> Result<Outcome, CliError> {
    match a.poly.parse::<Hierarchy>() {
        Ok(h) => hierarchy(h, a, ctx),
        Err(_) => custom(a, ctx),
    }
}

fn hierarchy(h: Hierarchy, a: &HirotaArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let tau: TauSpec = input::parse(a.tau.as_deref().ok_or_else(|| CliError::Usage("--tau is required".into()))?)?;
    let pts = points(a.points.as_ref())?;
    let params = HierarchyParams {
        lambda: input::complex(&a.lambda)?,
        mu: input::complex(&a.mu)?,
        constant: input::complex(&a.constant)?,
    };
    let residuals = hierarchy_residual(h, &tau, &pts, &params, &ctx.policy)?;
    let threshold = match tau {
        TauSpec::Theta { .. } => ctx.thresholds.hirota_theta,
        _ => ctx.thresholds.hirota_exact,
    };
    let checks = residuals.iter().map(|r| Check::below(format!("{}.max", r.equation), r.max(), threshold)).collect();
    let mut ops = vec!["hierarchy_residual"];
    let mut result = json!({ "hierarchy": h.name(), "variables": h.variables(), "equations": to_value(&residuals) });
    // LL is a system of four equations and has no single catalog polynomial
    if let Ok(p) = catalog_polynomial(h) {
        result["polynomial"] = to_value(&p);
        ops.push("catalog_polynomial");
    }
    Ok(Outcome::new(ops, checks, result))
}

fn custom(a: &HirotaArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let poly: HirotaPolynomial = input::parse(&a.poly).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("--poly is neither a hierarchy name nor a polynomial: {m}")),
        other => other,
    })?;
    if let Some(theta) = &a.theta {
        let data: ThetaPairs = input::parse(theta)?;
        if data.z1.len() != data.z2.len() {
            return Err(CliError::Usage("z1 and z2 lists differ in length".into()));
        }
        let dirs: BTreeMap<usize, CVector> =
            data.directions.into_iter().enumerate().map(|(i, d)| (i + 1, d)).collect();
        let mut values = Vec::new();
        let mut rel = Vec::new();
        for (z1, z2) in data.z1.iter().zip(&data.z2) {
            let b = hirota_apply_theta_scaled(&poly, &dirs, z1, z2, &data.omega, &ctx.policy)?;
            rel.push(b.relative());
            values.push(to_value(&b));
        }
        let checks = vec![Check::below("relative.max", max(&rel), ctx.thresholds.hirota_theta)];
        return Ok(Outcome::new(vec!["hirota_apply_theta"], checks, json!({ "values": values, "relative": rel })));
    }
    let (Some(f), Some(g)) = (&a.f, &a.g) else {
        return Err(CliError::Usage("a polynomial file needs --f and --g, or --theta".into()));
    };
    let (f, g): (ExpSum, ExpSum) = (input::parse(f)?, input::parse(g)?);
    let mut values = Vec::new();
    let mut rel = Vec::new();
    for x in points(a.points.as_ref())? {
        let b = hirota_apply_scaled(&poly, &f, &g, &x)?;
        rel.push(b.relative());
        values.push(to_value(&b));
    }
    let checks = vec![Check::below("relative.max", max(&rel), ctx.thresholds.hirota_exact)];
    Ok(Outcome::new(vec!["hirota_apply"], checks, json!({ "values": values, "relative": rel })))
}
