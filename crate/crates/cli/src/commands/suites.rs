use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thetalab::identities::{
    addition_binary_dual_residual, addition_binary_residual, addition_ternary_residual,
    prym_decomposition_ramified_residual, prym_decomposition_unramified_residual, secant_fit,
    secant_points_from_quadruple, sine_gordon_identity_fit, RamifiedCharacteristic, SecantKind, SecantSystem,
    SineGordonOptions, UnramifiedCharacteristic,
};
use thetalab::lattice_forms::{frobenius_normal_form, is_symplectic_member, IntMatrix, IntegerSkewForm};
use thetalab::siegel::{
    modular_constancy_check, modular_transform, validate_siegel, SiegelPoint, ThetaCharacteristic, TruncationPolicy,
};
use thetalab::{CMatrix, CVector, Complex64};

use super::{max, min, rng, to_value};
use crate::{input, Check, CliError, Context, IdentitySuiteArgs, Outcome, SecantFitArgs, SecantKindArg, Suite};

/// Samples per secant fit in the identity suite.
const SECANT_SAMPLES: usize = 24;
/// Samples per modular ratio check.
const MODULAR_SAMPLES: usize = 12;

fn random_vec(g: usize, r: &mut ChaCha8Rng, scale: f64) -> CVector {
    CVector::from_fn(g, |_, _| Complex64::new(r.random_range(-scale..scale), r.random_range(-scale..scale)))
}

fn random_reals(g: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..g).map(|_| r.random_range(-0.5..0.5)).collect()
}

pub(super) fn identity_suite(a: &IdentitySuiteArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let seed = ctx.seed("identity-suite")?;
    if a.genus == 0 || a.trials == 0 {
        return Err(CliError::Usage("genus and trials must be positive".into()));
    }
    let mut r = rng(seed);
    match a.suite {
        Suite::Addition => addition(a, ctx, &mut r),
        Suite::Modular => modular(a, ctx, &mut r),
        Suite::Symplectic => symplectic(a, ctx, &mut r),
        Suite::Prym => prym(a, ctx, &mut r),
        Suite::Secant => {
            if a.genus != 1 {
                return Err(CliError::Usage("random trisecant quadruples are secant only in genus one".into()));
            }
            let (checks, result) = trisecant_trials(a.trials, &ctx.policy, ctx, &mut r)?;
            Ok(Outcome::new(vec!["secant_points_from_quadruple", "secant_fit"], checks, result))
        }
        Suite::Sg => sine_gordon(a, ctx, &mut r),
    }
}

fn addition(a: &IdentitySuiteArgs, ctx: &Context, r: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let (g, p) = (a.genus, &ctx.policy);
    let (mut binary, mut dual, mut ternary) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..a.trials {
        let om = SiegelPoint::random(g, r);
        let (z1, z2) = (random_vec(g, r, 0.5), random_vec(g, r, 0.5));
        binary.push(addition_binary_residual(&z1, &z2, &om, p)?);
        dual.push(addition_binary_dual_residual(&z1, &z2, &om, p)?);
        let z: [CVector; 4] = std::array::from_fn(|_| random_vec(g, r, 0.4));
        let chars: [ThetaCharacteristic; 4] = std::array::from_fn(|_| ThetaCharacteristic {
            a: random_reals(g, r),
            b: random_reals(g, r),
        });
        ternary.push(addition_ternary_residual(&z, &chars, &om, p)?);
    }
    let t = ctx.thresholds.addition;
    let checks = vec![
        Check::below("binary.max", max(&binary), t),
        Check::below("dual_binary.max", max(&dual), t),
        Check::below("ternary.max", max(&ternary), t),
    ];
    let result = json!({ "genus": g, "binary": binary, "dual_binary": dual, "ternary": ternary });
    Ok(Outcome::new(
        vec!["addition_binary_residual", "addition_binary_dual_residual", "addition_ternary_residual"],
        checks,
        result,
    ))
}

/// `J = [[0, −I], [I, 0]]` and translations `[[I, B], [0, I]]` by the
/// elementary symmetric `B`.
fn generators(g: usize) -> Vec<(String, IntMatrix)> {
    let n = 2 * g;
    let mut out = Vec::new();
    let mut j = vec![vec![0i64; n]; n];
    for i in 0..g {
        j[i][g + i] = -1;
        j[g + i][i] = 1;
    }
    out.push(("S".to_string(), j));
    for p in 0..g {
        for q in p..g {
            let mut t: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|k| i64::from(i == k)).collect()).collect();
            t[p][g + q] = 1;
            t[q][g + p] = 1;
            out.push((format!("T{}{}", p + 1, q + 1), t));
        }
    }
    out.into_iter().map(|(name, m)| (name, IntMatrix::from_i64(&m).expect("square integer matrix"))).collect()
}

fn modular(a: &IdentitySuiteArgs, ctx: &Context, r: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let g = a.genus;
    let gens = generators(g);
    let mut half = ThetaCharacteristic::zero(g);
    half.a[0] = 0.5;
    let chars = [ThetaCharacteristic::zero(g), half];
    let mut runs = Vec::new();
    let mut spreads = Vec::new();
    for trial in 0..a.trials {
        let om = SiegelPoint::random(g, r);
        for (name, elem) in &gens {
            let image = modular_transform(&om, elem)?;
            validate_siegel(image.matrix())?;
            for chr in &chars {
                let sample_seed = r.random::<u64>();
                let chk = modular_constancy_check(&om, elem, chr, MODULAR_SAMPLES, sample_seed, &ctx.policy, None)?;
                spreads.push(chk.spread);
                runs.push(json!({ "trial": trial, "generator": name, "characteristic": to_value(chr), "check": to_value(&chk) }));
            }
        }
    }
    let checks = vec![Check::below("spread.max", max(&spreads), ctx.thresholds.modular_spread)];
    Ok(Outcome::new(
        vec!["modular_transform", "validate_siegel", "modular_constancy_check"],
        checks,
        json!({ "genus": g, "runs": runs }),
    ))
}

/// A product of random elementary row operations, so `det = ±1`.
fn random_unimodular(n: usize, r: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|k| i64::from(i == k)).collect()).collect();
    for _ in 0..3 * n {
        let i = r.random_range(0..n);
        let mut j = r.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let k = [-2, -1, 1, 2][r.random_range(0..4)];
        for c in 0..n {
            m[i][c] += k * m[j][c];
        }
        if r.random_bool(0.2) {
            m.swap(i, j);
        }
    }
    m
}

fn random_divisors(g: usize, r: &mut ChaCha8Rng) -> Vec<i64> {
    let mut d = vec![r.random_range(1..=3)];
    while d.len() < g {
        let last = *d.last().unwrap();
        d.push(last * r.random_range(1..=3));
    }
    d
}

fn symplectic(a: &IdentitySuiteArgs, _ctx: &Context, r: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let g = a.genus;
    let mut failures = Vec::new();
    for trial in 0..a.trials {
        let delta = random_divisors(g, r);
        let delta_big: Vec<_> = delta.iter().map(|&d| d.into()).collect();
        let j = IntMatrix::block_form(&delta_big);
        let p = IntMatrix::from_i64(&random_unimodular(2 * g, r))?;
        let form = IntegerSkewForm::new(p.transpose().mul(&j)?.mul(&p)?)?;
        let (basis, pol) = frobenius_normal_form(&form)?;
        let same_delta = pol.delta == delta_big;
        let normal = basis.reduce(&form) == j;
        // P·T carries J_δ to itself, so its transpose lies in Sp_δ
        let member = is_symplectic_member(&p.mul(&basis.transform)?.transpose(), &pol)?;
        if !(same_delta && normal && member) {
            failures.push(json!({ "trial": trial, "delta": delta, "found": to_value(&pol), "normal_form": normal, "member": member }));
        }
    }
    let checks = vec![Check::below("mismatches", failures.len() as f64, 1.0)];
    Ok(Outcome::new(
        vec!["frobenius_normal_form", "is_symplectic_member"],
        checks,
        json!({ "dimension": 2 * g, "trials": a.trials, "failures": failures }),
    ))
}

fn prym(a: &IdentitySuiteArgs, ctx: &Context, r: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let (g, p) = (a.genus, &ctx.policy);
    let (mut ramified, mut unramified) = (Vec::new(), Vec::new());
    for _ in 0..a.trials {
        let pi = SiegelPoint::random(g, r);
        let b0 = SiegelPoint::random(g, r);
        let z = random_vec(2 * g, r, 0.4);
        let ch = RamifiedCharacteristic { a: random_reals(g, r), b: random_reals(g, r), c: random_reals(g, r), d: random_reals(g, r) };
        ramified.push(prym_decomposition_ramified_residual(&pi, &b0, &z, &ch, p)?);

        // the unramified blocks come from a random (g+1)-dimensional base
        let pi = SiegelPoint::random(g, r);
        let base = SiegelPoint::random(g + 1, r);
        let m = base.matrix();
        let t0 = m[(0, 0)] * 2.0;
        let t1 = CVector::from_fn(g, |i, _| m[(i + 1, 0)]);
        let t2 = CMatrix::from_fn(g, g, |i, j| m[(i + 1, j + 1)]);
        let z = random_vec(2 * g + 1, r, 0.4);
        let ch = UnramifiedCharacteristic {
            a0: r.random_range(-0.5..0.5),
            c0: r.random_range(-0.5..0.5),
            a: random_reals(g, r),
            b: random_reals(g, r),
            c: random_reals(g, r),
            d: random_reals(g, r),
        };
        unramified.push(prym_decomposition_unramified_residual(&pi, t0, &t1, &t2, &z, &ch, p)?);
    }
    let t = ctx.thresholds.prym;
    let checks = vec![Check::below("ramified.max", max(&ramified), t), Check::below("unramified.max", max(&unramified), t)];
    Ok(Outcome::new(
        vec!["prym_decomposition_ramified_residual", "prym_decomposition_unramified_residual"],
        checks,
        json!({ "genus": g, "ramified": ramified, "unramified": unramified }),
    ))
}

fn sine_gordon(a: &IdentitySuiteArgs, ctx: &Context, r: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    if a.genus != 1 {
        return Err(CliError::Usage("the sine-Gordon suite runs in genus one".into()));
    }
    let one = CVector::from_element(1, Complex64::new(1.0, 0.0));
    let mut fits = Vec::new();
    let mut consistency = Vec::new();
    for _ in 0..a.trials {
        let om = SiegelPoint::random(1, r);
        for (m1, m2) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let delta = om.lattice_vector(&[0.5 * m1], &[0.5 * m2]);
            let opts = SineGordonOptions { seed: r.random(), ..Default::default() };
            let fit = sine_gordon_identity_fit(&delta, &one, &one, &om, &ctx.policy, &opts)?;
            consistency.push(fit.consistency);
            fits.push(to_value(&fit));
        }
    }
    let checks = vec![Check::below("consistency.max", max(&consistency), ctx.thresholds.sine_gordon)];
    Ok(Outcome::new(vec!["sine_gordon_identity_fit"], checks, json!({ "fits": fits })))
}

/// Trisecants from random genus-one quadruples, each paired with a random-shift
/// negative control on the same period.
fn trisecant_trials(
    trials: usize,
    policy: &TruncationPolicy,
    ctx: &Context,
    r: &mut ChaCha8Rng,
) -> Result<(Vec<Check>, Value), CliError> {
    let (mut positive, mut negative) = (Vec::new(), Vec::new());
    for _ in 0..trials {
        let om = SiegelPoint::random(1, r);
        let p: [CVector; 4] = std::array::from_fn(|_| om.random_cell_point(r));
        let shifts = secant_points_from_quadruple(&p, SecantKind::Trisecant);
        let sys = SecantSystem::with_random_samples(shifts, &om, SECANT_SAMPLES, r.random())?;
        positive.push(secant_fit(&sys, &om, policy)?.consistency);
        negative.push(random_shift_consistency(&om, 3, SECANT_SAMPLES, policy, r)?);
    }
    let checks = vec![
        Check::below("trisecant.max", max(&positive), ctx.thresholds.secant_consistency),
        Check::above("random_shift.min", min(&negative), ctx.thresholds.secant_negative),
    ];
    Ok((checks, json!({ "trisecant": positive, "random_shift": negative })))
}

fn random_shift_consistency(
    om: &SiegelPoint,
    count: usize,
    samples: usize,
    policy: &TruncationPolicy,
    r: &mut ChaCha8Rng,
) -> Result<f64, CliError> {
    let g = om.genus();
    let shifts = (0..count).map(|_| (random_vec(g, r, 0.5), random_vec(g, r, 0.5))).collect();
    let sys = SecantSystem::with_random_samples(shifts, om, samples, r.random())?;
    Ok(secant_fit(&sys, om, policy)?.consistency)
}

pub(super) fn secant(a: &SecantFitArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let policy = &ctx.policy;
    let ops = vec!["secant_points_from_quadruple", "secant_fit"];
    if let Some(path) = &a.system {
        let om = match &a.omega {
            Some(s) => input::omega(s)?,
            None => return Err(CliError::Usage("--system needs --omega".into())),
        };
        let sys: SecantSystem = input::parse(path)?;
        let fit = secant_fit(&sys, &om, policy)?;
        let checks = vec![Check::below("consistency", fit.consistency, ctx.thresholds.secant_consistency)];
        return Ok(Outcome::new(vec!["secant_fit"], checks, json!({ "fit": to_value(&fit) })));
    }
    let seed = ctx.seed("secant-fit")?;
    let mut r = rng(seed);
    let fixed = a.omega.as_deref().map(input::omega).transpose()?;
    let g = fixed.as_ref().map_or(a.genus, SiegelPoint::genus);
    match a.kind {
        SecantKindArg::Trisecant => {
            if g != 1 {
                return Err(CliError::Usage("random trisecant quadruples are secant only in genus one; pass --system".into()));
            }
            if let Some(om) = fixed {
                let mut positive = Vec::new();
                let mut negative = Vec::new();
                for _ in 0..a.trials {
                    let p: [CVector; 4] = std::array::from_fn(|_| om.random_cell_point(&mut r));
                    let shifts = secant_points_from_quadruple(&p, SecantKind::Trisecant);
                    let sys = SecantSystem::with_random_samples(shifts, &om, a.samples, r.random())?;
                    positive.push(secant_fit(&sys, &om, policy)?.consistency);
                    negative.push(random_shift_consistency(&om, 3, a.samples, policy, &mut r)?);
                }
                let checks = vec![
                    Check::below("trisecant.max", max(&positive), ctx.thresholds.secant_consistency),
                    Check::above("random_shift.min", min(&negative), ctx.thresholds.secant_negative),
                ];
                return Ok(Outcome::new(ops, checks, json!({ "trisecant": positive, "random_shift": negative })));
            }
            let (checks, result) = trisecant_trials(a.trials, policy, ctx, &mut r)?;
            Ok(Outcome::new(ops, checks, result))
        }
        SecantKindArg::Quadrisecant => {
            // Positive instances need Prym data; only negative controls are
            // checked, the quadruple fits are reported as they come.
            let mut quadruple = Vec::new();
            let mut negative = Vec::new();
            for _ in 0..a.trials {
                let om = match &fixed {
                    Some(om) => om.clone(),
                    None => SiegelPoint::random(g, &mut r),
                };
                let p: [CVector; 4] = std::array::from_fn(|_| om.random_cell_point(&mut r));
                let shifts = secant_points_from_quadruple(&p, SecantKind::Quadrisecant);
                let sys = SecantSystem::with_random_samples(shifts, &om, a.samples, r.random())?;
                quadruple.push(secant_fit(&sys, &om, policy).map(|f| f.consistency).ok());
                negative.push(random_shift_consistency(&om, 4, a.samples, policy, &mut r)?);
            }
            let checks = vec![Check::above("random_shift.min", min(&negative), ctx.thresholds.secant_negative)];
            Ok(Outcome::new(ops, checks, json!({ "genus": g, "quadruple": quadruple, "random_shift": negative })))
        }
    }
}
