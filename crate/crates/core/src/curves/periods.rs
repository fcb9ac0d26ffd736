use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::json::complex_from_value;
use crate::linalg::c;
use crate::siegel::SiegelPoint;
use crate::{CMatrix, Complex64, Error, Result};

/// Smallest accepted quadrature order.
pub const MIN_QUAD_ORDER: usize = 32;

/// Entrywise change under order doubling above which quadrature is rejected.
pub const QUAD_TOLERANCE: f64 = 1e-8;

/// `w² = ∏(x − eᵢ)` with `2g + 2` finite branch points, or `2g + 1` of them and
/// a branch point at infinity.
#[derive(Clone, Debug, Serialize)]
pub struct HyperellipticCurve {
    #[serde(serialize_with = "ser_points")]
    pub branch_points: Vec<Complex64>,
    pub infinity: bool,
}

fn ser_points<S: serde::Serializer>(p: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    Value::Array(p.iter().map(|z| crate::json::complex_to_value(*z)).collect()).serialize(s)
}

impl<'de> Deserialize<'de> for HyperellipticCurve {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        Self::from_value(&Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl HyperellipticCurve {
    pub fn new(branch_points: Vec<Complex64>, infinity: bool) -> Result<Self> {
        let total = branch_points.len() + usize::from(infinity);
        if total != 4 && total != 6 {
            return Err(Error::Unsupported(format!("{total} branch points; only genus 1 and 2 are supported")));
        }
        if branch_points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite branch point".into()));
        }
        check_separation(&branch_points)?;
        Ok(Self { branch_points, infinity })
    }

    /// Accepts `{"branch_points": [...], "infinity": bool}` or a bare list; in
    /// both forms an entry `"inf"` marks the point at infinity.
    pub fn from_value(v: &Value) -> Result<Self> {
        let (list, mut infinity) = match v {
            Value::Array(items) => (items, false),
            Value::Object(map) => {
                let items = map
                    .get("branch_points")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("missing branch_points array".into()))?;
                (items, map.get("infinity").and_then(Value::as_bool).unwrap_or(false))
            }
            _ => return Err(Error::Parse("expected a list of branch points".into())),
        };
        let mut points = Vec::new();
        for item in list {
            match item.as_str() {
                Some("inf" | "infinity") if !infinity => infinity = true,
                Some(s) => return Err(Error::Parse(format!("unexpected branch point '{s}'"))),
                None => points.push(complex_from_value(item)?),
            }
        }
        Self::new(points, infinity)
    }

    pub fn genus(&self) -> usize {
        (self.branch_points.len() + usize::from(self.infinity) - 2) / 2
    }

    /// `2g + 2` finite points, sorted by real then imaginary part, of a curve
    /// isomorphic to this one. A point at infinity is removed by `x = c + 1/s`.
    fn finite_model(&self) -> Result<Vec<Complex64>> {
        let mut pts = if self.infinity {
            let c0 = mobius_centre(&self.branch_points);
            let mut s: Vec<Complex64> = self.branch_points.iter().map(|e| (e - c0).inv()).collect();
            s.push(c(0.0, 0.0));
            s
        } else {
            self.branch_points.clone()
        };
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        check_separation(&pts)?;
        Ok(pts)
    }
}

fn check_separation(pts: &[Complex64]) -> Result<()> {
    let scale = pts.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut distance = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            distance = distance.min((a - b).norm());
        }
    }
    if distance <= 1e-10 * scale {
        return Err(Error::BranchCollision { distance });
    }
    Ok(())
}

/// Centre of the inversion sending infinity to a finite point, chosen among a
/// fixed set of candidates so that the images are as evenly spread as possible.
fn mobius_centre(pts: &[Complex64]) -> Complex64 {
    let n = pts.len() as f64;
    let mean: Complex64 = pts.iter().sum::<Complex64>() / n;
    let spread = pts.iter().map(|p| (p - mean).norm()).fold(1e-3, f64::max);
    let mut best = (f64::NEG_INFINITY, mean + c(0.0, spread));
    for r in [0.5, 1.0, 2.0] {
        for k in 0..16 {
            let cand = mean + Complex64::from_polar(r * spread, k as f64 * PI / 8.0 + 0.1);
            let mut img: Vec<Complex64> = pts.iter().map(|e| (e - cand).inv()).collect();
            img.push(c(0.0, 0.0));
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (i, a) in img.iter().enumerate() {
                for b in &img[i + 1..] {
                    let d = (a - b).norm();
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
            if lo / hi > best.0 {
                best = (lo / hi, cand);
            }
        }
    }
    best.1
}

/// Periods of `x^{k−1}dx/w`, `k = 1..g`, and the normalized period matrix.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodData {
    /// Row `k`, column `j`: integral of the `k`-th differential over `aⱼ`.
    #[serde(with = "crate::json::cmatrix")]
    pub a_periods: CMatrix,
    #[serde(with = "crate::json::cmatrix")]
    pub b_periods: CMatrix,
    pub normalized: SiegelPoint,
    pub quad_order: usize,
    /// Entrywise change of the normalized matrix between `quad_order` and
    /// `2·quad_order` nodes.
    pub quadrature_change: f64,
    /// The inversion used to remove a branch point at infinity changes the
    /// differentials; only the normalized matrix refers to the input curve.
    pub finite_model: bool,
}

/// Period matrix of a hyperelliptic curve.
///
/// With `e₁, …, e_{2g+2}` sorted by real part, the polyline through them is
/// simple. `γₖ` is twice the integral along `[eₖ, eₖ₊₁]` of the boundary value
/// on its left; then `aⱼ = γ_{2j−1}` and `bⱼ = γ_{2j} + γ_{2j+2} + … + γ_{2g}`.
pub fn period_matrix(curve: &HyperellipticCurve, quad_order: usize) -> Result<PeriodData> {
    if quad_order < MIN_QUAD_ORDER {
        return Err(Error::Unsupported(format!("quad_order {quad_order} is below {MIN_QUAD_ORDER}")));
    }
    let pts = curve.finite_model()?;
    let g = curve.genus();
    let coarse = raw_periods(&pts, g, quad_order);
    let fine = raw_periods(&pts, g, 2 * quad_order);
    let (b_coarse, b_fine) = (normalize(&coarse)?, normalize(&fine)?);
    let change = (&b_coarse - &b_fine).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(change <= QUAD_TOLERANCE) {
        return Err(Error::QuadratureNotConverged { change });
    }
    let normalized = SiegelPoint::with_tolerance(&b_fine, 1e-8)?;
    Ok(PeriodData {
        a_periods: fine.0,
        b_periods: fine.1,
        normalized,
        quad_order,
        quadrature_change: change,
        finite_model: curve.infinity,
    })
}

/// `A⁻¹B`, with the sign of the b-cycles chosen so that the imaginary part is
/// positive definite.
fn normalize((a, b): &(CMatrix, CMatrix)) -> Result<CMatrix> {
    let inv = a.clone().try_inverse().ok_or(Error::SingularDenominator)?;
    let m = inv * b;
    let im = crate::linalg::imag_part(&m);
    if im.clone().cholesky().is_some() {
        Ok(m)
    } else if (-im).cholesky().is_some() {
        Ok(-m)
    } else {
        Err(Error::ImagNotPositiveDefinite { min_eigenvalue: crate::linalg::imag_part(&m).symmetric_eigenvalues().min() })
    }
}

fn raw_periods(pts: &[Complex64], g: usize, n: usize) -> (CMatrix, CMatrix) {
    let segs = segment_integrals(pts, g, n);
    let a = CMatrix::from_fn(g, g, |k, j| segs[2 * j][k]);
    let b = CMatrix::from_fn(g, g, |k, j| (2 * j + 1..2 * g).step_by(2).map(|s| segs[s][k]).sum());
    (a, b)
}

/// Continues `√q` along `path` starting from `start` (or the principal root).
fn track(q: &dyn Fn(Complex64) -> Complex64, path: &[Complex64], start: Option<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(path.len());
    let mut prev = start;
    for &x in path {
        let r = q(x).sqrt();
        let r = match prev {
            Some(p) if (r - p).norm() > (r + p).norm() => -r,
            _ => r,
        };
        out.push(r);
        prev = Some(r);
    }
    out
}

fn line(from: Complex64, to: Complex64, steps: usize) -> Vec<Complex64> {
    (1..=steps).map(|i| from + (to - from) * (i as f64 / steps as f64)).collect()
}

/// `γₖ` for every segment and differential, by Gauss–Chebyshev quadrature
/// with `n` nodes.
fn segment_integrals(pts: &[Complex64], g: usize, n: usize) -> Vec<Vec<Complex64>> {
    const SUB: usize = 4;
    let nodes: Vec<f64> = (1..=n).map(|j| -((2 * j - 1) as f64 * PI / (2 * n) as f64).cos()).collect();
    let mut out = Vec::with_capacity(pts.len() - 1);
    // value of the previous segment's root factor at its right end and its
    // continuation data: (root at the last fine node, last fine node)
    let mut prev: Option<(usize, Complex64, Complex64)> = None;
    for k in 0..pts.len() - 1 {
        let (e0, e1) = (pts[k], pts[k + 1]);
        let mid = (e0 + e1) * 0.5;
        let h = (e1 - e0) * 0.5;
        let q = |x: Complex64| -> Complex64 {
            pts.iter().enumerate().filter(|&(i, _)| i != k && i != k + 1).map(|(_, e)| x - e).product()
        };
        // fine path through the nodes, from the left end to the right end
        let mut path = line(e0, mid + h * nodes[0], SUB);
        let mut node_at = Vec::with_capacity(n);
        for w in 0..n {
            if w > 0 {
                path.extend(line(mid + h * nodes[w - 1], mid + h * nodes[w], SUB));
            }
            node_at.push(path.len() - 1);
        }
        let mut roots = track(&q, &path, None);

        if let Some((pk, p_last, p_root)) = prev {
            // match signs at a point in the left sector at the shared vertex
            let (a, b) = (pts[pk], e0);
            let d0 = (b - a) / (b - a).norm();
            let d1 = (e1 - e0) / (e1 - e0).norm();
            let others = pts.iter().filter(|&&p| p != a && p != b && p != e1).map(|p| (p - e0).norm()).fold(f64::INFINITY, f64::min);
            let rho = 0.25 * (b - a).norm().min((e1 - e0).norm()).min(others);
            let mut nrm = c(0.0, 1.0) * (d0 + d1);
            nrm /= nrm.norm();
            let probe = e0 + nrm * rho;
            let (pmid, ph) = ((a + b) * 0.5, (b - a) * 0.5);
            let qp = |x: Complex64| -> Complex64 {
                pts.iter().enumerate().filter(|&(i, _)| i != pk && i != pk + 1).map(|(_, e)| x - e).product()
            };
            let mut tail = line(p_last, b, SUB * 4);
            tail.extend(line(b, probe, SUB * 4));
            let r_prev = *track(&qp, &tail, Some(p_root)).last().expect("nonempty path");
            let mut head: Vec<Complex64> = line(path[0], e0, SUB * 4);
            head.extend(line(e0, probe, SUB * 4));
            let r_here = *track(&q, &head, Some(roots[0])).last().expect("nonempty path");
            let y = |x: Complex64, m: Complex64, hh: Complex64, r: Complex64| {
                let t = (x - m) / hh;
                hh * (t - 1.0).sqrt() * (t + 1.0).sqrt() * r
            };
            if (y(probe, pmid, ph, r_prev) * y(probe, mid, h, r_here).conj()).re < 0.0 {
                roots.iter_mut().for_each(|r| *r = -*r);
            }
        }
        // ∫ x^m dx / w over the left side: √(t²−1) → i√(1−t²)
        let weight = c(0.0, -2.0 * PI / n as f64);
        let vals: Vec<Complex64> = (0..g)
            .map(|m| {
                (0..n)
                    .map(|w| (mid + h * nodes[w]).powu(m as u32) / roots[node_at[w]])
                    .sum::<Complex64>()
                    * weight
            })
            .collect();
        out.push(vals);
        let last = path.len() - 1;
        prev = Some((k, path[last], roots[last]));
    }
    out
}
