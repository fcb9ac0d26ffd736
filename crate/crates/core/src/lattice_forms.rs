//! Integer symplectic linear algebra.
//!
//! Everything here is exact: matrices carry [`BigInt`] entries and no
//! floating point is involved. The central routine is
//! [`frobenius_normal_form`], which finds a unimodular change of basis
//! putting a non-degenerate integer skew form into the block shape
//!
//! ```text
//!     (  0   Δ )
//!     ( -Δ   0 ),   Δ = diag(δ_1, …, δ_n),  δ_k | δ_{k+1}.
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense square-or-rectangular integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        for row in &rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: row.len() });
            }
        }
        Ok(Self { rows })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect())
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { rows: vec![vec![BigInt::zero(); ncols]; nrows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i][i] = BigInt::one();
        }
        m
    }

    /// The standard form `[[0, Δ], [-Δ, 0]]` for the given polarization.
    pub fn block_form(delta: &[BigInt]) -> Self {
        let n = delta.len();
        let mut m = Self::zeros(2 * n, 2 * n);
        for (k, d) in delta.iter().enumerate() {
            m.rows[k][n + k] = d.clone();
            m.rows[n + k][k] = -d.clone();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.nrows(), self.ncols());
        let mut t = Self::zeros(c, r);
        for i in 0..r {
            for j in 0..c {
                t.rows[j][i] = self.rows[i][j].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.ncols() != other.nrows() {
            return Err(Error::DimensionMismatch { expected: self.ncols(), found: other.nrows() });
        }
        let mut out = Self::zeros(self.nrows(), other.ncols());
        for i in 0..self.nrows() {
            for k in 0..self.ncols() {
                let a = &self.rows[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.ncols() {
                    out.rows[i][j] += a * &other.rows[k][j];
                }
            }
        }
        Ok(out)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        let n = self.nrows();
        if n != self.ncols() {
            return Err(Error::DimensionMismatch { expected: n, found: self.ncols() });
        }
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.rows.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * a[n - 1][n - 1].clone())
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.rows.iter().map(|r| r.iter().map(ToPrimitive::to_i64).collect()).collect()
    }

    fn add_col_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        for row in &mut self.rows {
            let v = &row[source] * factor;
            row[target] += v;
        }
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        let src = self.rows[source].clone();
        for (t, s) in self.rows[target].iter_mut().zip(src) {
            *t += s * factor;
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

// JSON carries plain integers; values outside i64 range are written as strings.
fn int_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(x) => serde_json::Value::from(x),
        None => serde_json::Value::from(v.to_string()),
    }
}

fn serialize_ints<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(int_json).collect::<Vec<_>>().serialize(s)
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter().map(int_json).collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows: Vec<Vec<serde_json::Value>> = Vec::deserialize(d)?;
        let parsed = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| match v {
                        serde_json::Value::Number(n) => n
                            .as_i64()
                            .map(BigInt::from)
                            .ok_or_else(|| D::Error::custom("matrix entries must be integers")),
                        serde_json::Value::String(s) => {
                            s.parse::<BigInt>().map_err(|e| D::Error::custom(e.to_string()))
                        }
                        _ => Err(D::Error::custom("matrix entries must be integers")),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        IntMatrix::from_rows(parsed).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// A `2n × 2n` antisymmetric integer matrix.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(transparent)]
pub struct IntegerSkewForm {
    entries: IntMatrix,
}

impl IntegerSkewForm {
    pub fn new(entries: IntMatrix) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: entries.ncols() });
        }
        if n % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: n + 1, found: n });
        }
        for i in 0..n {
            for j in i..n {
                if entries.get(i, j) != &-entries.get(j, i) {
                    return Err(Error::NotSkew { row: i, col: j });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(IntMatrix::from_i64(rows)?)
    }

    /// Half the dimension, `n` for a `2n × 2n` form.
    pub fn half_dim(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn entries(&self) -> &IntMatrix {
        &self.entries
    }

    pub fn determinant(&self) -> BigInt {
        self.entries.determinant().expect("square by construction")
    }
}

/// Elementary divisors `δ_1 | δ_2 | … | δ_n` of a skew form.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PolarizationType {
    #[serde(serialize_with = "serialize_ints")]
    pub delta: Vec<BigInt>,
}

impl PolarizationType {
    pub fn new(delta: Vec<BigInt>) -> Result<Self> {
        for d in &delta {
            if !d.is_positive() {
                return Err(Error::InvalidBlockData("polarization entries must be positive".into()));
            }
        }
        for w in delta.windows(2) {
            if !w[1].is_multiple_of(&w[0]) {
                return Err(Error::InvalidBlockData(format!("{} does not divide {}", w[0], w[1])));
            }
        }
        Ok(Self { delta })
    }

    /// Principal polarization `(1, …, 1)`.
    pub fn principal(n: usize) -> Self {
        Self { delta: vec![BigInt::one(); n] }
    }

    pub fn from_u64(delta: &[u64]) -> Result<Self> {
        Self::new(delta.iter().map(|&d| BigInt::from(d)).collect())
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn is_principal(&self) -> bool {
        self.delta.iter().all(One::is_one)
    }

    pub fn product(&self) -> BigInt {
        self.delta.iter().product()
    }
}

/// Unimodular basis change produced by [`frobenius_normal_form`]; its
/// columns are the basis vectors `λ_1, …, λ_{2n}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(transparent)]
pub struct SymplecticBasis {
    pub transform: IntMatrix,
}

impl SymplecticBasis {
    /// `transformᵀ · Q · transform`.
    pub fn reduce(&self, form: &IntegerSkewForm) -> IntMatrix {
        self.transform
            .transpose()
            .mul(form.entries())
            .and_then(|m| m.mul(&self.transform))
            .expect("dimensions agree")
    }
}

/// Working state: the basis (columns) and the Gram matrix of the form in it.
struct Reduction {
    basis: IntMatrix,
    gram: IntMatrix,
}

impl Reduction {
    // v ← v + c·w, applied to the basis and the Gram matrix.
    fn add(&mut self, v: usize, w: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        self.basis.add_col_multiple(v, w, c);
        self.gram.add_row_multiple(v, w, c);
        self.gram.add_col_multiple(v, w, c);
    }

    /// Smallest nonzero |Q(λ_i, λ_j)| among active indices, first in lexicographic (i, j) order.
    fn minimal_pair(&self, active: &[usize]) -> Option<(usize, usize)> {
        let mut best: Option<(BigInt, usize, usize)> = None;
        for (p, &i) in active.iter().enumerate() {
            for &j in &active[p + 1..] {
                let v = self.gram.get(i, j).abs();
                if v.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                    best = Some((v, i, j));
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }
}

/// Reduces a non-degenerate integer skew form to the block shape
/// `[[0, Δ], [-Δ, 0]]` and returns the basis together with `δ`.
pub fn frobenius_normal_form(form: &IntegerSkewForm) -> Result<(SymplecticBasis, PolarizationType)> {
    if form.determinant().is_zero() {
        return Err(Error::DegenerateForm);
    }
    let dim = form.entries().nrows();
    let n = dim / 2;
    let mut st = Reduction { basis: IntMatrix::identity(dim), gram: form.entries().clone() };
    let mut active: Vec<usize> = (0..dim).collect();
    let mut firsts = Vec::with_capacity(n);
    let mut seconds = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);

    while !active.is_empty() {
        'search: loop {
            let (i, j) = st.minimal_pair(&active).ok_or(Error::DegenerateForm)?;
            let (e, f) = if st.gram.get(i, j).is_positive() { (i, j) } else { (j, i) };
            let d = st.gram.get(e, f).clone();

            // Clear the pairings of every other active vector with e and f.
            for &v in &active {
                if v == e || v == f {
                    continue;
                }
                let qve = st.gram.get(v, e).clone();
                let (q, r) = qve.div_mod_floor(&d);
                if !r.is_zero() {
                    // Q(v + q·f, e) = r with 0 < r < δ: a smaller value exists.
                    st.add(v, f, &q);
                    continue 'search;
                }
                let qvf = st.gram.get(v, f).clone();
                let (q2, r2) = qvf.div_mod_floor(&d);
                if !r2.is_zero() {
                    st.add(v, e, &-q2);
                    continue 'search;
                }
                st.add(v, f, &q);
                st.add(v, e, &-q2);
            }

            // δ must divide the form on the complement as well, otherwise
            // fold an offending vector into e and search again.
            let rest: Vec<usize> = active.iter().copied().filter(|&v| v != e && v != f).collect();
            for (p, &v) in rest.iter().enumerate() {
                for &w in &rest[p + 1..] {
                    if !st.gram.get(v, w).is_multiple_of(&d) {
                        st.add(e, v, &BigInt::one());
                        continue 'search;
                    }
                }
            }

            firsts.push(e);
            seconds.push(f);
            delta.push(d);
            active = rest;
            break;
        }
    }

    let mut transform = IntMatrix::zeros(dim, dim);
    for (k, &col) in firsts.iter().chain(seconds.iter()).enumerate() {
        for r in 0..dim {
            transform.rows[r][k] = st.basis.get(r, col).clone();
        }
    }
    Ok((SymplecticBasis { transform }, PolarizationType::new(delta)?))
}

/// Exact check of `g · [[0, Δ], [-Δ, 0]] · gᵀ = [[0, Δ], [-Δ, 0]]`.
pub fn is_symplectic_member(g: &IntMatrix, delta: &PolarizationType) -> Result<bool> {
    let dim = 2 * delta.len();
    if g.nrows() != dim || g.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: g.nrows().max(g.ncols()) });
    }
    let j = IntMatrix::block_form(&delta.delta);
    Ok(g.mul(&j)?.mul(&g.transpose())? == j)
}
