use std::fmt::Write as _;

use rand::Rng;
use serde_json::{json, Value};
use thetalab::json::complex_to_value;
use thetalab::siegel::SiegelPoint;
use thetalab::soliton::{
    build_solution, kdv_effectivization_residual, kp_effectivization_residual, pde_residual, solve_effectivization,
    vn_effectivization_residual, EffectivizationKind, SolutionField, SolutionKind, SolveOptions, WaveVectors,
};
use thetalab::{CVector, Complex64, Error};

use super::{max, rng, to_value};
use crate::{
    input, Check, CliError, Context, EffectivizeArgs, EffectivizeKind, FieldKind, Outcome, ResidualGridArgs,
    SolutionArgs,
};

fn effectivization_threshold(kind: EffectivizationKind, genus: usize, ctx: &Context) -> f64 {
    if kind == EffectivizationKind::Kdv && genus == 1 {
        ctx.thresholds.effectivization_kdv
    } else {
        ctx.thresholds.effectivization
    }
}

pub(super) fn effectivize(a: &EffectivizeArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let seed = ctx.seed("effectivize")?;
    let omega = input::omega(&a.omega)?;
    let kind = match a.kind {
        EffectivizeKind::Kdv => EffectivizationKind::Kdv,
        EffectivizeKind::Kp => EffectivizationKind::Kp,
        EffectivizeKind::Vn => EffectivizationKind::VnHolomorphic,
        EffectivizeKind::VnAnti => EffectivizationKind::VnAntiholomorphic,
    };
    let fixed: Option<WaveVectors> = a.fixed.as_deref().map(input::parse).transpose()?;
    let opts = SolveOptions { restarts: a.restarts, max_iterations: a.max_iterations, tolerance: a.tolerance };
    let sol = solve_effectivization(kind, &omega, &ctx.policy, seed, fixed.as_ref(), &opts)?;
    // recompute through the public residual as an independent evaluation
    let (op, recomputed) = match kind {
        EffectivizationKind::Kdv => ("kdv_effectivization_residual", kdv_effectivization_residual(&sol.wave, &omega, &ctx.policy)?),
        EffectivizationKind::Kp => ("kp_effectivization_residual", kp_effectivization_residual(&sol.wave, &omega, &ctx.policy)?),
        EffectivizationKind::VnHolomorphic | EffectivizationKind::VnAntiholomorphic => (
            "vn_effectivization_residual",
            vn_effectivization_residual(&sol.wave, &omega, &ctx.policy, kind == EffectivizationKind::VnHolomorphic)?,
        ),
    };
    let threshold = effectivization_threshold(kind, omega.genus(), ctx);
    let checks = vec![Check::below("residual.max", max(&recomputed), threshold)];
    let result = json!({ "solution": to_value(&sol), "recomputed_residuals": recomputed });
    Ok(Outcome::new(vec!["solve_effectivization", op], checks, result))
}

/// A field from a wave file, or solved from the seed.
fn field(a: &SolutionArgs, ctx: &Context, ops: &mut Vec<&'static str>, checks: &mut Vec<Check>) -> Result<(SolutionField, Value), CliError> {
    let omega = input::omega(&a.omega)?;
    let g = omega.genus();
    let kind = match a.kind {
        FieldKind::Kdv => SolutionKind::Kdv,
        FieldKind::Kp => SolutionKind::Kp,
        FieldKind::Sg => SolutionKind::SineGordon,
        FieldKind::Vn => SolutionKind::Vn,
    };
    let (wave, source) = match &a.wave {
        Some(w) => (input::parse::<WaveVectors>(w)?, json!("file")),
        None => {
            let seed = ctx.seed("solving without --wave")?;
            solved_wave(a.kind, &omega, a.delta.as_deref(), seed, ctx, ops, checks)?
        }
    };
    if wave.genus() != g {
        return Err(CliError::Usage(format!("wave vectors have length {}, genus is {g}", wave.genus())));
    }
    let f = build_solution(kind, &wave, &omega, &ctx.policy)?;
    ops.push("build_solution");
    Ok((f, source))
}

fn solved_wave(
    kind: FieldKind,
    omega: &SiegelPoint,
    delta: Option<&str>,
    seed: u64,
    ctx: &Context,
    ops: &mut Vec<&'static str>,
    checks: &mut Vec<Check>,
) -> Result<(WaveVectors, Value), CliError> {
    let g = omega.genus();
    let ekind = match kind {
        FieldKind::Kdv => EffectivizationKind::Kdv,
        FieldKind::Kp => EffectivizationKind::Kp,
        FieldKind::Vn => EffectivizationKind::VnHolomorphic,
        FieldKind::Sg => {
            let delta = delta.ok_or_else(|| CliError::Usage("a sine-Gordon field needs --wave or --delta".into()))?;
            let mut r = rng(seed);
            let mut unit = || CVector::from_fn(g, |_, _| Complex64::new(r.random_range(-1.0..1.0), 0.0));
            let mut wave = WaveVectors::zeros(g);
            wave.u = unit();
            wave.v = unit();
            wave.delta = Some(input::vector(delta)?);
            return Ok((wave, json!({ "random_directions_seed": seed })));
        }
    };
    let sol = solve_effectivization(ekind, omega, &ctx.policy, seed, None, &SolveOptions::default())?;
    ops.push("solve_effectivization");
    checks.push(Check::below("effectivization.residual", sol.residual, effectivization_threshold(ekind, g, ctx)));
    let meta = json!({ "solved": { "kind": ekind, "seed": seed, "residual": sol.residual, "converged": sol.converged } });
    Ok((sol.wave, meta))
}

pub(super) fn build(a: &SolutionArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let (mut ops, mut checks) = (Vec::new(), Vec::new());
    let (f, source) = field(a, ctx, &mut ops, &mut checks)?;
    let points = if a.at.is_empty() { vec!["0".to_string()] } else { a.at.clone() };
    let mut samples = Vec::new();
    for p in &points {
        let s = f.eval(input::point(p)?)?;
        samples.push(json!({
            "point": to_value(&s.point),
            "u": complex_to_value(s.u()),
            "u_x": complex_to_value(s.partial(1, 0, 0)),
            "u_y": complex_to_value(s.partial(0, 1, 0)),
            "u_t": complex_to_value(s.partial(0, 0, 1)),
        }));
    }
    Ok(Outcome::new(ops, checks, json!({ "field": to_value(&f), "source": source, "samples": samples })))
}

pub(super) fn residual_grid(a: &ResidualGridArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let grid = input::grid(&a.grid)?;
    if grid.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    let (mut ops, mut checks) = (Vec::new(), Vec::new());
    let (f, source) = field(&a.solution, ctx, &mut ops, &mut checks)?;
    let stats = pde_residual(&f, &grid)?;
    ops.push("pde_residual");

    // pde_residual skips exactly the points whose evaluation fails near the
    // divisor, so the residuals line up with the successful evaluations
    let mut csv = String::from("x,y,t,u_re,u_im,residual\n");
    let mut residuals = stats.residuals.iter();
    for p in &grid {
        match f.eval(*p) {
            Ok(s) => {
                let r = residuals.next().copied().unwrap_or(f64::NAN);
                let u = s.u();
                writeln!(csv, "{},{},{},{:e},{:e},{:e}", p.x, p.y, p.t, u.re, u.im, r).expect("write to string");
            }
            Err(Error::NearDivisor { .. }) => {
                writeln!(csv, "{},{},{},NaN,NaN,NaN", p.x, p.y, p.t).expect("write to string");
            }
            Err(e) => return Err(e.into()),
        }
    }
    let threshold = match f.kind {
        SolutionKind::Kdv => ctx.thresholds.pde_kdv,
        SolutionKind::Kp => ctx.thresholds.pde_kp,
        SolutionKind::Vn => ctx.thresholds.pde_vn,
        SolutionKind::SineGordon => ctx.thresholds.pde_sine_gordon,
    };
    checks.push(Check::below("pde.max", stats.max, threshold));
    let result = json!({
        "kind": f.kind,
        "source": source,
        "wave": to_value(&f.wave),
        "points": grid.len(),
        "max": stats.max,
        "mean": stats.mean,
        "evaluated": stats.evaluated,
        "skipped": stats.skipped,
        "constant": stats.constant.map(complex_to_value),
        "note": f.note,
    });
    let mut out = Outcome::new(ops, checks, result);
    match &a.csv {
        Some(path) => std::fs::write(path, csv).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => out.stdout = Some(csv),
    }
    Ok(out)
}
