use serde_json::json;
use thetalab::json::{complex_to_value, vector_to_value};
use thetalab::siegel::{
    kummer_vector, theta, theta_char, theta_deriv, theta_hat_table, DirectionalRequest, ThetaCharacteristic,
};
use thetalab::soliton::{g2_theta_constant_relations, sasaki_irreducibility, sasaki_with_threshold};
use thetalab::CVector;

use super::to_value;
use crate::{input, CliError, Context, Outcome, SasakiArgs, ThetaEvalArgs};

pub(super) fn theta_eval(a: &ThetaEvalArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let policy = &ctx.policy;
    let omega = input::omega(&a.omega)?;
    let g = omega.genus();
    let z = match &a.z {
        Some(s) => input::vector(s)?,
        None => CVector::zeros(g),
    };
    if z.len() != g {
        return Err(CliError::Usage(format!("z has length {}, genus is {g}", z.len())));
    }
    let chr = match &a.characteristic {
        Some(s) => input::characteristic(s, g)?,
        None => ThetaCharacteristic::zero(g),
    };
    let mut ops = vec!["validate_siegel", "theta", "theta_char"];
    let mut result = json!({
        "genus": g,
        "z": vector_to_value(&z),
        "characteristic": to_value(&chr),
        "theta": complex_to_value(theta(&z, &omega, policy)?),
        "theta_char": complex_to_value(theta_char(&chr, &z, &omega, policy)?),
    });
    if !a.deriv.is_empty() {
        let (dirs, orders): (Vec<CVector>, Vec<usize>) =
            a.deriv.iter().map(|s| input::derivative(s)).collect::<Result<Vec<_>, _>>()?.into_iter().unzip();
        if let Some(d) = dirs.iter().find(|d| d.len() != g) {
            return Err(CliError::Usage(format!("direction has length {}, genus is {g}", d.len())));
        }
        let req = DirectionalRequest::new(dirs, orders)?;
        let value = theta_deriv(&req, &chr, &z, &omega, policy)?;
        result["derivative"] = json!({ "request": to_value(&req), "value": complex_to_value(value) });
        ops.push("theta_deriv");
    }
    if a.kummer {
        result["kummer"] = to_value(&kummer_vector(&z, &omega, policy)?);
        ops.push("kummer_vector");
    }
    if let Some(order) = a.hat_order {
        let table = theta_hat_table(&omega, order, policy)?;
        let rows: Vec<_> = table
            .rows
            .iter()
            .map(|r| {
                let mut row = json!({ "characteristic": r.characteristic, "value": complex_to_value(r.value()) });
                if order >= 1 {
                    let grad: Vec<_> = (0..g)
                        .map(|i| {
                            let mut alpha = vec![0; g];
                            alpha[i] = 1;
                            complex_to_value(r.partial(&alpha))
                        })
                        .collect();
                    row["gradient"] = json!(grad);
                }
                if order >= 2 {
                    let hess: Vec<Vec<_>> =
                        (0..g).map(|i| (0..g).map(|j| complex_to_value(r.second(i, j))).collect()).collect();
                    row["hessian"] = json!(hess);
                }
                row
            })
            .collect();
        result["hat_table"] = json!({ "max_order": order, "rows": rows });
        ops.push("theta_hat_table");
    }
    Ok(Outcome::new(ops, Vec::new(), result))
}

/// Informational: reports the rank without a pass/fail check.
pub(super) fn sasaki(a: &SasakiArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let omega = input::omega(&a.omega)?;
    let report = if a.rank_threshold == 1e-9 {
        sasaki_irreducibility(&omega, &ctx.policy)?
    } else {
        sasaki_with_threshold(&omega, &ctx.policy, a.rank_threshold)?
    };
    let mut ops = vec!["sasaki_irreducibility"];
    let mut result = to_value(&report);
    if a.relations {
        if omega.genus() != 2 {
            return Err(CliError::Usage("theta-constant relations need genus two".into()));
        }
        let rel = g2_theta_constant_relations(&omega, &ctx.policy)?;
        result["relations"] = json!({
            "labels": rel.labels,
            "residuals": rel.residuals,
            "max": rel.max(),
            "threshold": ctx.thresholds.theta_relations,
            "duality_conditioning": rel.duality_conditioning,
        });
        ops.push("g2_theta_constant_relations");
    }
    Ok(Outcome::new(ops, Vec::new(), result))
}
