use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::lm::levenberg_marquardt;
use super::theta_constants::{directional, sasaki_from_table, sasaki_matrix};
use super::{EffectivizationKind, WaveVectors};
use crate::linalg::{c, hdot, norm, solve_complex};
use crate::siegel::{theta_hat_table, SiegelPoint, ThetaHatRow, ThetaHatTable, TruncationPolicy};
use crate::{CMatrix, CVector, Complex64, Error, Result};

fn relative(terms: &[Complex64]) -> (Complex64, f64) {
    let mut value = c(0.0, 0.0);
    let mut scale = 0.0;
    for t in terms {
        value += t;
        scale += t.norm();
    }
    (value, scale)
}

fn ratio((value, scale): (Complex64, f64)) -> f64 {
    if scale == 0.0 { 0.0 } else { value.norm() / scale }
}

fn kdv_row(row: &ThetaHatRow, w: &WaveVectors) -> (Complex64, f64) {
    let u = &w.u;
    relative(&[directional(row, &[u, u, u, u]), -directional(row, &[u, &w.w]), w.d * row.value()])
}

fn kp_row(row: &ThetaHatRow, w: &WaveVectors) -> (Complex64, f64) {
    let u = &w.u;
    relative(&[
        directional(row, &[u, u, u, u]),
        -directional(row, &[u, &w.w]),
        directional(row, &[&w.v, &w.v]),
        w.d * row.value(),
    ])
}

fn vn_row(row: &ThetaHatRow, w: &WaveVectors, holomorphic: bool) -> (Complex64, f64) {
    let (p, q) = if holomorphic { (&w.u, &w.v) } else { (&w.v, &w.u) };
    relative(&[
        directional(row, &[q, &w.w]),
        -directional(row, &[p, p, p, q]) * 4.0,
        -w.d * directional(row, &[p, q]),
        -w.c * directional(row, &[p, p]) * 3.0,
        -w.a * row.value(),
    ])
}

fn rows_residual(table: &ThetaHatTable, f: impl Fn(&ThetaHatRow) -> (Complex64, f64)) -> Vec<f64> {
    table.rows.iter().map(|r| ratio(f(r))).collect()
}

fn hat_table(wave: &WaveVectors, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<ThetaHatTable> {
    wave.check(omega.genus())?;
    theta_hat_table(omega, 4, policy)
}

/// Relative residual per half-characteristic of
/// `∂_U⁴θ̂ − ∂_U∂_Wθ̂ + dθ̂`.
pub fn kdv_effectivization_residual(wave: &WaveVectors, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<Vec<f64>> {
    let t = hat_table(wave, omega, policy)?;
    Ok(rows_residual(&t, |r| kdv_row(r, wave)))
}

/// As [`kdv_effectivization_residual`] with the extra term `∂_V²θ̂`.
pub fn kp_effectivization_residual(wave: &WaveVectors, omega: &SiegelPoint, policy: &TruncationPolicy) -> Result<Vec<f64>> {
    let t = hat_table(wave, omega, policy)?;
    Ok(rows_residual(&t, |r| kp_row(r, wave)))
}

/// `(D₂D₃ − 4D₁³D₂ − dD₁D₂ − 3CD₁² − a)θ̂` with `D₁ = ∂_U`, `D₂ = ∂_V`,
/// `D₃ = ∂_W`; the antiholomorphic half exchanges `U` and `V`.
pub fn vn_effectivization_residual(
    wave: &WaveVectors,
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
    holomorphic: bool,
) -> Result<Vec<f64>> {
    let t = hat_table(wave, omega, policy)?;
    Ok(rows_residual(&t, |r| vn_row(r, wave, holomorphic)))
}

fn kind_residuals(kind: EffectivizationKind, table: &ThetaHatTable, wave: &WaveVectors) -> Vec<f64> {
    match kind {
        EffectivizationKind::Kdv => rows_residual(table, |r| kdv_row(r, wave)),
        EffectivizationKind::Kp => rows_residual(table, |r| kp_row(r, wave)),
        EffectivizationKind::VnHolomorphic => rows_residual(table, |r| vn_row(r, wave, true)),
        EffectivizationKind::VnAntiholomorphic => rows_residual(table, |r| vn_row(r, wave, false)),
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the maximal relative residual.
    pub tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iterations: 300, tolerance: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectivizationSolution {
    pub kind: EffectivizationKind,
    pub wave: WaveVectors,
    pub residuals: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub attempts: usize,
    pub seed: u64,
    pub sasaki_rank: usize,
}

impl EffectivizationSolution {
    /// Turns an unconverged result into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged { Ok(self) } else { Err(Error::NotConverged { residual: self.residual }) }
    }
}

/// Gauge-fixed solution of the effectivization equations of `kind` with
/// `Z = 0`. For KdV and KP, `‖U‖ = 1` with the first nonzero component real
/// and positive, and for KP also `⟨U, V⟩ = 0`. For VN, `U` and `V` come from
/// `fixed` (or are drawn from the seed) and `d = 0`.
pub fn solve_effectivization(
    kind: EffectivizationKind,
    omega: &SiegelPoint,
    policy: &TruncationPolicy,
    seed: u64,
    fixed: Option<&WaveVectors>,
    opts: &SolveOptions,
) -> Result<EffectivizationSolution> {
    let g = omega.genus();
    if let Some(f) = fixed {
        f.check(g)?;
    }
    let table = theta_hat_table(omega, 4, policy)?;
    let sasaki = sasaki_from_table(&table, 1e-9);
    if !sasaki.is_irreducible {
        return Err(Error::ReducibleVariety { rank: sasaki.rank, maximal: sasaki.maximal });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixed_u = fixed.map(|f| f.u.clone()).filter(|u| norm(u) > 0.0);

    let mut best: Option<(WaveVectors, Vec<f64>, f64)> = None;
    let mut attempts = 0;
    let consider = |wave: WaveVectors, best: &mut Option<(WaveVectors, Vec<f64>, f64)>| {
        let res = kind_residuals(kind, &table, &wave);
        let m = res.iter().copied().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| m < b.2) {
            *best = Some((wave, res, m));
        }
        m
    };

    match kind {
        EffectivizationKind::VnHolomorphic | EffectivizationKind::VnAntiholomorphic => {
            let (u, v) = match fixed {
                Some(f) if norm(&f.u) > 0.0 && norm(&f.v) > 0.0 => (f.u.clone(), f.v.clone()),
                _ => (random_vector(g, &mut rng), random_vector(g, &mut rng)),
            };
            attempts = 1;
            let wave = solve_vn(&table, u, v, kind == EffectivizationKind::VnHolomorphic)?;
            consider(wave, &mut best);
        }
        EffectivizationKind::Kdv | EffectivizationKind::Kp => {
            let with_v = kind == EffectivizationKind::Kp;
            for attempt in 0..opts.restarts.max(1) {
                attempts += 1;
                let u = match (&fixed_u, attempt) {
                    (Some(u), 0) => u.clone(),
                    _ => random_vector(g, &mut rng),
                };
                let mut wave = if with_v && g == 2 {
                    kp_genus_two(&table, &u).unwrap_or_else(|_| linear_guess(&table, &u))
                } else {
                    linear_guess(&table, &u)
                };
                let mut m = consider(gauge_fix(wave.clone(), with_v), &mut best);
                if m >= opts.tolerance * 1e-2 {
                    wave = polish(&table, wave, with_v, opts.max_iterations);
                    m = consider(gauge_fix(wave, with_v), &mut best);
                }
                if m < opts.tolerance {
                    break;
                }
            }
        }
    }
    let (wave, residuals, residual) = best.expect("at least one attempt");
    Ok(EffectivizationSolution {
        kind,
        wave,
        residuals,
        residual,
        converged: residual < opts.tolerance,
        attempts,
        seed,
        sasaki_rank: sasaki.rank,
    })
}

fn random_vector(g: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(g, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn axis(g: usize, i: usize) -> CVector {
    CVector::from_fn(g, |j, _| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

fn svd_solve(m: &CMatrix, b: &CVector) -> Result<CVector> {
    m.clone()
        .svd(true, true)
        .solve(b, 1e-14 * m.norm())
        .map_err(|e| Error::RankDeficient(e.into()))
}

/// For fixed `U`, the KdV relations are linear in `(W, d)`; least squares.
fn linear_guess(table: &ThetaHatTable, u: &CVector) -> WaveVectors {
    let g = u.len();
    let rows = table.rows.len();
    let axes: Vec<CVector> = (0..g).map(|i| axis(g, i)).collect();
    let m = CMatrix::from_fn(rows, g + 1, |n, k| {
        let row = &table.rows[n];
        if k < g { -directional(row, &[u, &axes[k]]) } else { row.value() }
    });
    let b = CVector::from_fn(rows, |n, _| -directional(&table.rows[n], &[u, u, u, u]));
    let x = svd_solve(&m, &b).unwrap_or_else(|_| CVector::zeros(g + 1));
    let mut wave = WaveVectors::zeros(g);
    wave.u = u.clone();
    wave.w = x.rows(0, g).into_owned();
    wave.d = x[g];
    wave
}

/// Closed-form genus-2 KP solution for given `U`: in the basis
/// `(θ̂₁₁, θ̂₁₂, θ̂₂₂, θ̂)` the relations become `A(U) − (UWᵀ + WUᵀ)/2 + VVᵀ = 0`
/// and `d = −x₃`, solved with `V` Hermitian-orthogonal to `U`.
fn kp_genus_two(table: &ThetaHatTable, u_in: &CVector) -> Result<WaveVectors> {
    let u = u_in.map(|x| x / norm(u_in));
    if u[0].norm() < 1e-8 || u[1].norm() < 1e-8 {
        return Err(Error::RankDeficient("U has a vanishing component".into()));
    }
    let m = sasaki_matrix(table);
    let b = CVector::from_fn(4, |n, _| directional(&table.rows[n], &[&u, &u, &u, &u]));
    let x = solve_complex(&m, &b)?;
    let t = (u[0] * u[1] * x[1] - u[0] * u[0] * x[2] - u[1] * u[1] * x[0]).sqrt();
    let p = CVector::from_column_slice(&[-u[1].conj(), u[0].conj()]);
    let v = p.map(|y| y * t);
    let w = CVector::from_column_slice(&[(x[0] + v[0] * v[0]) / u[0], (x[2] + v[1] * v[1]) / u[1]]);
    let mut wave = WaveVectors::zeros(2);
    wave.u = u;
    wave.v = v;
    wave.w = w;
    wave.d = -x[3];
    Ok(wave)
}

/// Applies the scaling (and for KP the Galilean) symmetry so that `‖U‖ = 1`,
/// the first nonzero component of `U` is real positive and `⟨U, V⟩ = 0`.
fn gauge_fix(mut w: WaveVectors, with_v: bool) -> WaveVectors {
    let n = norm(&w.u);
    let Some(i) = w.u.iter().position(|x| x.norm() > 1e-12 * n) else {
        return w;
    };
    let first = w.u[i];
    let lambda = (first.conj() / first.norm()) / n;
    w.u = w.u.map(|x| x * lambda);
    w.u[i].im = 0.0;
    w.v = w.v.map(|x| x * lambda * lambda);
    w.w = w.w.map(|x| x * lambda.powu(3));
    w.d *= lambda.powu(4);
    if with_v {
        let beta = -hdot(&w.u, &w.v);
        let old_v = w.v.clone();
        w.v = &w.v + w.u.map(|x| x * beta);
        w.w = &w.w + old_v.map(|x| x * beta * 2.0) + w.u.map(|x| x * beta * beta);
    }
    w
}

/// Levenberg–Marquardt on the holomorphic relations, with gauge rows
/// `‖U‖² − 1`, `Im U₁` and (for KP) `⟨U, V⟩`.
fn polish(table: &ThetaHatTable, start: WaveVectors, with_v: bool, max_iter: usize) -> WaveVectors {
    let g = start.genus();
    let blocks = if with_v { 3 } else { 2 };
    let nc = blocks * g + 1;
    let axes: Vec<CVector> = (0..g).map(|i| axis(g, i)).collect();
    let scales: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r.jet.coeffs().iter().zip(r.jet.set().iter()).map(|(c, a)| c.norm() * crate::jet::multi_factorial(a)).fold(0.0, f64::max))
        .collect();
    let unpack = |x: &[f64]| -> WaveVectors {
        let z = |k: usize| c(x[k], x[nc + k]);
        let mut w = WaveVectors::zeros(g);
        w.u = CVector::from_fn(g, |i, _| z(i));
        if with_v {
            w.v = CVector::from_fn(g, |i, _| z(g + i));
        }
        w.w = CVector::from_fn(g, |i, _| z((blocks - 1) * g + i));
        w.d = z(blocks * g);
        w
    };
    let mut x0 = vec![0.0; 2 * nc];
    {
        let mut put = |k: usize, v: Complex64| {
            x0[k] = v.re;
            x0[nc + k] = v.im;
        };
        let s = gauge_fix(start, with_v);
        for i in 0..g {
            put(i, s.u[i]);
            if with_v {
                put(g + i, s.v[i]);
            }
            put((blocks - 1) * g + i, s.w[i]);
        }
        put(blocks * g, s.d);
    }
    let eqs = table.rows.len();
    let gauge_rows = if with_v { 4 } else { 2 };
    let f = |x: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let w = unpack(x);
        let m = 2 * eqs + gauge_rows;
        let mut r = DVector::zeros(m);
        let mut j = DMatrix::zeros(m, 2 * nc);
        for (n, row) in table.rows.iter().enumerate() {
            let s = scales[n].max(1e-300);
            let (e, _) = if with_v { kp_row(row, &w) } else { kdv_row(row, &w) };
            r[2 * n] = e.re / s;
            r[2 * n + 1] = e.im / s;
            let mut set = |k: usize, dz: Complex64| {
                let dz = dz / s;
                j[(2 * n, k)] = dz.re;
                j[(2 * n, nc + k)] = -dz.im;
                j[(2 * n + 1, k)] = dz.im;
                j[(2 * n + 1, nc + k)] = dz.re;
            };
            for i in 0..g {
                let ei = &axes[i];
                set(i, directional(row, &[ei, &w.u, &w.u, &w.u]) * 4.0 - directional(row, &[ei, &w.w]));
                if with_v {
                    set(g + i, directional(row, &[ei, &w.v]) * 2.0);
                }
                set((blocks - 1) * g + i, -directional(row, &[&w.u, ei]));
            }
            set(blocks * g, row.value());
        }
        let base = 2 * eqs;
        r[base] = w.u.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0;
        r[base + 1] = w.u[0].im;
        for i in 0..g {
            j[(base, i)] = 2.0 * w.u[i].re;
            j[(base, nc + i)] = 2.0 * w.u[i].im;
        }
        j[(base + 1, nc)] = 1.0;
        if with_v {
            let h = hdot(&w.u, &w.v);
            r[base + 2] = h.re;
            r[base + 3] = h.im;
            for i in 0..g {
                let (ur, ui, vr, vi) = (w.u[i].re, w.u[i].im, w.v[i].re, w.v[i].im);
                j[(base + 2, i)] = vr;
                j[(base + 2, nc + i)] = vi;
                j[(base + 2, g + i)] = ur;
                j[(base + 2, nc + g + i)] = ui;
                j[(base + 3, i)] = vi;
                j[(base + 3, nc + i)] = -vr;
                j[(base + 3, g + i)] = -ui;
                j[(base + 3, nc + g + i)] = ur;
            }
        }
        (r, j)
    };
    let out = levenberg_marquardt(f, x0, max_iter, 1e-15);
    unpack(&out.x)
}

/// With `d = 0`, the VN relations are linear in `(W, C, a)`.
fn solve_vn(table: &ThetaHatTable, u: CVector, v: CVector, holomorphic: bool) -> Result<WaveVectors> {
    let g = u.len();
    let rows = table.rows.len();
    let (p, q) = if holomorphic { (&u, &v) } else { (&v, &u) };
    let axes: Vec<CVector> = (0..g).map(|i| axis(g, i)).collect();
    let m = CMatrix::from_fn(rows, g + 2, |n, k| {
        let row = &table.rows[n];
        match k {
            k if k < g => directional(row, &[q, &axes[k]]),
            k if k == g => -directional(row, &[p, p]) * 3.0,
            _ => -row.value(),
        }
    });
    let sv = m.singular_values();
    let needed = rows.min(g + 2);
    let rank = sv.iter().filter(|&&s| s > 1e-10 * sv.max()).count();
    if rank < needed {
        return Err(Error::RankDeficient(format!(
            "VN system has rank {rank} < {needed}; U and V must be linearly independent"
        )));
    }
    let b = CVector::from_fn(rows, |n, _| directional(&table.rows[n], &[p, p, p, q]) * 4.0);
    let x = svd_solve(&m, &b)?;
    let mut wave = WaveVectors::zeros(g);
    wave.u = u.clone();
    wave.v = v.clone();
    wave.w = x.rows(0, g).into_owned();
    wave.c = x[g];
    wave.a = x[g + 1];
    Ok(wave)
}
