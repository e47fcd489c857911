//! Vectors in F_q^d, non-degenerate bilinear forms, and hyperplane
//! neighborhoods.
//!
//! A vector is stored as a single u32 code: its d element indices read as a
//! little-endian base-q integer. The space cap q^d <= 2^31 (see
//! [`crate::field::MAX_SPACE`]) keeps codes in range and enumeration loops
//! bounded. Sets of vectors are sorted, deduplicated code arrays, so
//! iteration order is always the base-p counter order and reports are
//! reproducible. All types are immutable after construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field, MAX_SPACE};

pub const MAX_DIM: usize = 8;

/// q^d, validating 1 <= d <= 8 and the space-size guardrail.
pub fn space_size(field: &Field, d: usize) -> Result<u64> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::DimensionOutOfRange(d));
    }
    let mut n: u64 = 1;
    for _ in 0..d {
        n = n
            .checked_mul(field.q())
            .filter(|&v| v <= MAX_SPACE)
            .ok_or(Error::TooLarge {
                needed: u128::from(field.q()).pow(d as u32),
                limit: MAX_SPACE,
            })?;
    }
    Ok(n)
}

/// Packs d coordinates into a code.
pub fn encode_vector(field: &Field, coords: &[Fe]) -> Result<u32> {
    space_size(field, coords.len())?;
    let q = field.q();
    let mut code: u64 = 0;
    for &c in coords.iter().rev() {
        if c.0 as u64 >= q {
            return Err(Error::ElementOutOfRange { index: c.0 as u64, q });
        }
        code = code * q + c.0 as u64;
    }
    Ok(code as u32)
}

/// Unpacks a code into d coordinates.
pub fn decode_vector(field: &Field, d: usize, code: u32) -> Vec<Fe> {
    let q = field.q();
    let mut x = code as u64;
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push(Fe((x % q) as u32));
        x /= q;
    }
    out
}

/// A finite set of vectors in F_q^d: sorted unique codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VecSet {
    d: usize,
    codes: Vec<u32>,
}

impl VecSet {
    pub fn from_codes(field: &Field, d: usize, mut codes: Vec<u32>) -> Result<Self> {
        let n = space_size(field, d)?;
        codes.sort_unstable();
        codes.dedup();
        if let Some(&last) = codes.last() {
            if last as u64 >= n {
                return Err(Error::ElementOutOfRange { index: last as u64, q: n });
            }
        }
        Ok(VecSet { d, codes })
    }

    pub fn from_vectors(field: &Field, d: usize, vectors: &[Vec<Fe>]) -> Result<Self> {
        let mut codes = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
            codes.push(encode_vector(field, v)?);
        }
        VecSet::from_codes(field, d, codes)
    }

    /// The whole space F_q^d.
    pub fn full(field: &Field, d: usize) -> Result<Self> {
        let n = space_size(field, d)?;
        Ok(VecSet { d, codes: (0..n as u32).collect() })
    }

    /// F_q^d minus the origin.
    pub fn punctured_full(field: &Field, d: usize) -> Result<Self> {
        let n = space_size(field, d)?;
        Ok(VecSet { d, codes: (1..n as u32).collect() })
    }

    /// (F_q^*)^d: every coordinate nonzero.
    pub fn star_grid(field: &Field, d: usize) -> Result<Self> {
        let n = space_size(field, d)?;
        let q = field.q();
        let codes = (0..n as u32)
            .filter(|&c| {
                let mut x = c as u64;
                for _ in 0..d {
                    if x % q == 0 {
                        return false;
                    }
                    x /= q;
                }
                true
            })
            .collect();
        Ok(VecSet { d, codes })
    }

    /// Pseudo-random subset: one SplitMix64 membership draw per code in
    /// ascending order; repeats whole passes until the set is nonempty, so
    /// the result is a function of (seed, density) alone.
    pub fn random(field: &Field, d: usize, density: f64, seed: u64) -> Result<Self> {
        let n = space_size(field, d)?;
        if density <= 0.0 {
            return Err(Error::EmptySet);
        }
        let mut rng = crate::rng::SplitMix64::new(seed);
        loop {
            let codes: Vec<u32> = (0..n as u32).filter(|_| rng.include(density)).collect();
            if !codes.is_empty() {
                return Ok(VecSet { d, codes });
            }
        }
    }

    pub fn empty(d: usize) -> Self {
        VecSet { d, codes: Vec::new() }
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    #[inline]
    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn contains(&self, code: u32) -> bool {
        self.codes.binary_search(&code).is_ok()
    }

    pub fn iter_vectors<'a>(&'a self, field: &'a Field) -> impl Iterator<Item = Vec<Fe>> + 'a {
        self.codes.iter().map(move |&c| decode_vector(field, self.d, c))
    }

    /// Drops the origin.
    pub fn remove_origin(&self) -> Self {
        let codes = self.codes.iter().copied().filter(|&c| c != 0).collect();
        VecSet { d: self.d, codes }
    }

    /// Keeps vectors with every coordinate nonzero.
    pub fn restrict_star(&self, field: &Field) -> Self {
        let q = field.q();
        let codes = self
            .codes
            .iter()
            .copied()
            .filter(|&c| {
                let mut x = c as u64;
                for _ in 0..self.d {
                    if x % q == 0 {
                        return false;
                    }
                    x /= q;
                }
                true
            })
            .collect();
        VecSet { d: self.d, codes }
    }

    /// Keeps vectors u with B(a, u) = lambda.
    pub fn restrict_hyperplane(
        &self,
        field: &Field,
        form: &BilinearForm,
        a: &[Fe],
        lambda: Fe,
    ) -> Result<Self> {
        if a.len() != self.d || form.d() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: a.len() });
        }
        let w = form.left_vector(field, a);
        let codes = self
            .codes
            .iter()
            .copied()
            .filter(|&c| dot_code(field, &w, self.d, c) == lambda)
            .collect();
        Ok(VecSet { d: self.d, codes })
    }

    /// Image of the set under a matrix (vectors as columns: v -> Mv).
    pub fn map_linear(&self, field: &Field, mat: &[Fe]) -> Result<Self> {
        let d = self.d;
        if mat.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: mat.len() });
        }
        let mut codes = Vec::with_capacity(self.codes.len());
        for &c in &self.codes {
            let v = decode_vector(field, d, c);
            let mut image = vec![Fe::ZERO; d];
            for (r, img) in image.iter_mut().enumerate() {
                let mut acc = Fe::ZERO;
                for (col, &vc) in v.iter().enumerate() {
                    acc = field.add(acc, field.mul(mat[r * d + col], vc));
                }
                *img = acc;
            }
            codes.push(encode_vector(field, &image)?);
        }
        VecSet::from_codes(field, d, codes)
    }

    /// Rows of element indices, the JSON wire format for vector sets.
    pub fn to_rows(&self, field: &Field) -> Vec<Vec<u64>> {
        self.iter_vectors(field)
            .map(|v| v.into_iter().map(|c| c.0 as u64).collect())
            .collect()
    }

    pub fn from_rows(field: &Field, d: usize, rows: &[Vec<u64>]) -> Result<Self> {
        let mut vectors = Vec::with_capacity(rows.len());
        for row in rows {
            let mut v = Vec::with_capacity(row.len());
            for &idx in row {
                v.push(field.element(idx)?);
            }
            vectors.push(v);
        }
        VecSet::from_vectors(field, d, &vectors)
    }
}

/// Flat decode of a whole set (n * d coordinate indices) for hot loops that
/// would otherwise re-derive digits per pair.
pub(crate) fn decode_set(field: &Field, set: &VecSet) -> Vec<Fe> {
    let d = set.d();
    let q = field.q();
    let mut out = Vec::with_capacity(set.len() * d);
    for &c in set.codes() {
        let mut x = c as u64;
        for _ in 0..d {
            out.push(Fe((x % q) as u32));
            x /= q;
        }
    }
    out
}

#[inline]
fn dot_code(field: &Field, w: &[Fe], d: usize, code: u32) -> Fe {
    let q = field.q();
    let mut x = code as u64;
    let mut acc = Fe::ZERO;
    for &wi in w.iter().take(d) {
        acc = field.add(acc, field.mul(wi, Fe((x % q) as u32)));
        x /= q;
    }
    acc
}

/// A non-degenerate bilinear form B(x, y) = x^T M y with M invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearForm {
    d: usize,
    /// Row-major d*d entries.
    entries: Vec<Fe>,
}

impl BilinearForm {
    /// Validates invertibility (Gauss-Jordan over F_q).
    pub fn new(field: &Field, d: usize, entries: Vec<Fe>) -> Result<Self> {
        space_size(field, d)?;
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: entries.len() });
        }
        for &e in &entries {
            if e.0 as u64 >= field.q() {
                return Err(Error::ElementOutOfRange { index: e.0 as u64, q: field.q() });
            }
        }
        if mat_inverse(field, d, &entries).is_none() {
            return Err(Error::Degenerate);
        }
        Ok(BilinearForm { d, entries })
    }

    /// The dot product form (identity matrix).
    pub fn dot(field: &Field, d: usize) -> Result<Self> {
        let mut entries = vec![Fe::ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = Fe::ONE;
        }
        BilinearForm::new(field, d, entries)
    }

    /// diag(1, ..., 1, kappa), e.g. x_1 y_1 + kappa x_2 y_2 in dimension 2.
    pub fn diagonal(field: &Field, d: usize, kappa: Fe) -> Result<Self> {
        let mut entries = vec![Fe::ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = if i + 1 == d { kappa } else { Fe::ONE };
        }
        BilinearForm::new(field, d, entries)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[Fe] {
        &self.entries
    }

    /// B(x, y).
    pub fn evaluate(&self, field: &Field, x: &[Fe], y: &[Fe]) -> Result<Fe> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        if y.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: y.len() });
        }
        let w = self.left_vector(field, x);
        let mut acc = Fe::ZERO;
        for (wi, &yi) in w.iter().zip(y) {
            acc = field.add(acc, field.mul(*wi, yi));
        }
        Ok(acc)
    }

    /// The row vector x^T M; B(x, y) is then a plain dot with y.
    pub fn left_vector(&self, field: &Field, x: &[Fe]) -> Vec<Fe> {
        let d = self.d;
        let mut w = vec![Fe::ZERO; d];
        for (col, wc) in w.iter_mut().enumerate() {
            let mut acc = Fe::ZERO;
            for (row, &xr) in x.iter().enumerate() {
                acc = field.add(acc, field.mul(xr, self.entries[row * d + col]));
            }
            *wc = acc;
        }
        w
    }

    /// B(x, y) for packed codes.
    #[inline]
    pub fn eval_codes(&self, field: &Field, x: u32, y: u32) -> Fe {
        let x_coords = decode_vector(field, self.d, x);
        let w = self.left_vector(field, &x_coords);
        dot_code(field, &w, self.d, y)
    }

    /// The congruent form P^T M P.
    pub fn congruent(&self, field: &Field, p_mat: &[Fe]) -> Result<Self> {
        let pt = mat_transpose(self.d, p_mat);
        let tmp = mat_mul(field, self.d, &pt, &self.entries);
        let m2 = mat_mul(field, self.d, &tmp, p_mat);
        BilinearForm::new(field, self.d, m2)
    }
}

/// N^lambda_V(v): the vectors u in V with B(v, u) = lambda.
pub fn neighborhood(
    field: &Field,
    form: &BilinearForm,
    lambda: Fe,
    v: &[Fe],
    set: &VecSet,
) -> Result<VecSet> {
    set.restrict_hyperplane(field, form, v, lambda)
}

/// N^lambda(v) over the whole space.
pub fn neighborhood_all(
    field: &Field,
    form: &BilinearForm,
    lambda: Fe,
    v: &[Fe],
) -> Result<VecSet> {
    let full = VecSet::full(field, form.d())?;
    full.restrict_hyperplane(field, form, v, lambda)
}

/// |N^lambda_V(v)| without materializing the set.
pub fn neighborhood_count(
    field: &Field,
    form: &BilinearForm,
    lambda: Fe,
    v: &[Fe],
    set: &VecSet,
) -> Result<u64> {
    if v.len() != form.d() || set.d() != form.d() {
        return Err(Error::DimensionMismatch { expected: form.d(), got: v.len() });
    }
    let w = form.left_vector(field, v);
    let d = form.d();
    Ok(set
        .codes()
        .iter()
        .filter(|&&c| dot_code(field, &w, d, c) == lambda)
        .count() as u64)
}

// --- small dense matrix helpers over F_q (row-major) ---

pub fn mat_mul(field: &Field, d: usize, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let mut out = vec![Fe::ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..d {
                out[i * d + j] = field.add(out[i * d + j], field.mul(aik, b[k * d + j]));
            }
        }
    }
    out
}

pub fn mat_transpose(d: usize, a: &[Fe]) -> Vec<Fe> {
    let mut out = vec![Fe::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = a[i * d + j];
        }
    }
    out
}

/// Gauss-Jordan inverse; `None` when the matrix is singular.
pub fn mat_inverse(field: &Field, d: usize, a: &[Fe]) -> Option<Vec<Fe>> {
    let mut m = a.to_vec();
    let mut inv = vec![Fe::ZERO; d * d];
    for i in 0..d {
        inv[i * d + i] = Fe::ONE;
    }
    for col in 0..d {
        let pivot_row = (col..d).find(|&r| !m[r * d + col].is_zero())?;
        if pivot_row != col {
            for j in 0..d {
                m.swap(col * d + j, pivot_row * d + j);
                inv.swap(col * d + j, pivot_row * d + j);
            }
        }
        let pivot_inv = field.inv(m[col * d + col]).ok()?;
        for j in 0..d {
            m[col * d + j] = field.mul(m[col * d + j], pivot_inv);
            inv[col * d + j] = field.mul(inv[col * d + j], pivot_inv);
        }
        for r in 0..d {
            if r == col || m[r * d + col].is_zero() {
                continue;
            }
            let factor = m[r * d + col];
            for j in 0..d {
                let sub_m = field.mul(factor, m[col * d + j]);
                m[r * d + j] = field.sub(m[r * d + j], sub_m);
                let sub_i = field.mul(factor, inv[col * d + j]);
                inv[r * d + j] = field.sub(inv[r * d + j], sub_i);
            }
        }
    }
    Some(inv)
}

/// Serializable row form for vector sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VecSetRows(pub Vec<Vec<u64>>);
