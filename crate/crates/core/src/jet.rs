//! Truncated multivariate Taylor series ("jets").
//!
//! A [`Jet`] in `k` variables of order `N` stores the Taylor coefficients
//! `c_α` for all multi-indices with `|α| ≤ N`, so that the partial
//! derivative `∂^α f(0) = α! · c_α`. Products and logarithms are exact up
//! to the truncation order, which is what the soliton field evaluators use
//! to turn theta derivatives into derivatives of `log θ`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::Complex64;

/// All multi-indices `α ∈ ℕ^k` with `|α| ≤ order`, graded then lexicographic.
#[derive(Debug)]
pub struct MultiIndexSet {
    vars: usize,
    order: usize,
    indices: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
    // product table: (i, j) -> index of α_i + α_j when within the order
    sums: Vec<Vec<Option<usize>>>,
    // for i > 0: (index of α_i − e_v, v) with v the first nonzero slot
    parents: Vec<(usize, usize)>,
}

impl MultiIndexSet {
    pub fn new(vars: usize, order: usize) -> Self {
        let mut indices = Vec::new();
        for total in 0..=order {
            let mut current = vec![0; vars];
            push_with_total(vars, total, 0, &mut current, &mut indices);
        }
        if vars == 0 {
            indices = vec![Vec::new()];
        }
        let lookup: HashMap<Vec<usize>, usize> =
            indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let sums = indices
            .iter()
            .map(|a| {
                indices
                    .iter()
                    .map(|b| {
                        let s: Vec<usize> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        lookup.get(&s).copied()
                    })
                    .collect()
            })
            .collect();
        let parents = indices
            .iter()
            .map(|a| match a.iter().position(|&k| k > 0) {
                Some(v) => {
                    let mut p = a.clone();
                    p[v] -= 1;
                    (lookup[&p], v)
                }
                None => (0, 0),
            })
            .collect();
        Self { vars, order, indices, lookup, sums, parents }
    }

    /// Process-wide cached instance.
    pub fn shared(vars: usize, order: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MultiIndexSet>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((vars, order))
            .or_insert_with(|| Arc::new(Self::new(vars, order)))
            .clone()
    }

    /// Evaluates every monomial `w^α` of the set, in order, into `out`.
    pub fn monomials(&self, w: &[Complex64], out: &mut [Complex64]) {
        out[0] = Complex64::new(1.0, 0.0);
        for i in 1..self.indices.len() {
            let (p, v) = self.parents[i];
            out[i] = out[p] * w[v];
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn multi_index(&self, i: usize) -> &[usize] {
        &self.indices[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.indices.iter().map(Vec::as_slice)
    }
}

fn push_with_total(vars: usize, total: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if vars == 0 {
        return;
    }
    if pos == vars - 1 {
        cur[pos] = total;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=total).rev() {
        cur[pos] = k;
        push_with_total(vars, total - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// `α! = ∏ α_j!`
pub fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&k| (1..=k).map(|v| v as f64).product::<f64>()).product()
}

#[derive(Clone, Debug)]
pub struct Jet {
    set: Arc<MultiIndexSet>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    /// Jet with the given Taylor coefficients.
    pub fn from_coeffs(set: Arc<MultiIndexSet>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(set.len(), coeffs.len(), "coefficient count must match the index set");
        Self { set, coeffs }
    }

    pub fn zero(set: Arc<MultiIndexSet>) -> Self {
        let n = set.len();
        Self { set, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Builds a jet from partial derivatives `∂^α f(0)`, listed in the set's order.
    pub fn from_derivatives(set: Arc<MultiIndexSet>, derivs: &[Complex64]) -> Self {
        let coeffs = set
            .iter()
            .zip(derivs)
            .map(|(a, d)| d / multi_factorial(a))
            .collect();
        Self { set, coeffs }
    }

    pub fn set(&self) -> &Arc<MultiIndexSet> {
        &self.set
    }

    pub fn constant(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, alpha: &[usize]) -> Complex64 {
        self.set.index_of(alpha).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// `∂^α f(0)`; zero beyond the truncation order.
    pub fn derivative(&self, alpha: &[usize]) -> Complex64 {
        self.coeff(alpha) * multi_factorial(alpha)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { set: self.set.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            set: self.set.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.set.clone());
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if let Some(k) = self.set.sums[i][j] {
                    out.coeffs[k] += a * b;
                }
            }
        }
        out
    }

    /// Truncated `log f`; requires `f(0) ≠ 0`.
    pub fn ln(&self) -> Self {
        let f0 = self.constant();
        let mut h = self.scale(f0.inv());
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        let mut out = Self::zero(self.set.clone());
        let mut power = h.clone();
        for k in 1..=self.set.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            out = out.add(&power.scale(Complex64::new(sign / k as f64, 0.0)));
            power = power.mul(&h);
        }
        out.coeffs[0] = f0.ln();
        out
    }
}
