//! The lambda-triple scan for triangle systems and the value-set lower bound
//! for hyperplane-restricted sets.

use serde::Serialize;

use crate::bilinear::{decode_set, space_size, BilinearForm, VecSet};
use crate::error::{Error, Result};
use crate::exec::{run_chunked, Budget};
use crate::field::{Fe, Field};

/// Result of scanning A x B x C for realized triples
/// (B(a,b), B(a,c), B(b,c)) with all three values nonzero.
#[derive(Debug, Clone, Serialize)]
pub struct TripleScan {
    pub q: u64,
    pub d: usize,
    pub set_sizes: Vec<u64>,
    /// Distinct realized triples in (F_q^*)^3.
    pub count: u64,
    /// (q - 1)^3, the total number of candidate triples.
    pub star_total: u64,
    /// count / (q-1)^3.
    pub ratio: f64,
    /// The realized triples (lambda indices, ascending), when materialized.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triples: Option<Vec<(u32, u32, u32)>>,
}

impl TripleScan {
    /// Realized lambda3 count per (lambda1, lambda2) fiber, ascending.
    /// Needs materialized triples.
    pub fn fiber_counts(&self) -> Option<Vec<((u32, u32), u64)>> {
        let triples = self.triples.as_ref()?;
        let mut out: Vec<((u32, u32), u64)> = Vec::new();
        for &(l1, l2, _) in triples {
            match out.last_mut() {
                Some((key, n)) if *key == (l1, l2) => *n += 1,
                _ => out.push(((l1, l2), 1)),
            }
        }
        Some(out)
    }
}

enum TripleRecorder {
    Dense { words: Vec<u64>, qm1: u64 },
    Sparse(std::collections::BTreeSet<(u32, u32, u32)>),
}

const DENSE_TRIPLE_LIMIT: u64 = 1 << 27; // bits

impl TripleRecorder {
    fn new(q: u64) -> Self {
        let qm1 = q - 1;
        let bits = qm1 * qm1 * qm1;
        if bits <= DENSE_TRIPLE_LIMIT {
            TripleRecorder::Dense { words: vec![0; bits.div_ceil(64) as usize], qm1 }
        } else {
            TripleRecorder::Sparse(Default::default())
        }
    }

    #[inline]
    fn record(&mut self, l1: u32, l2: u32, l3: u32) {
        match self {
            TripleRecorder::Dense { words, qm1 } => {
                let idx = ((l1 as u64 - 1) * *qm1 + (l2 as u64 - 1)) * *qm1 + (l3 as u64 - 1);
                words[(idx / 64) as usize] |= 1 << (idx % 64);
            }
            TripleRecorder::Sparse(set) => {
                set.insert((l1, l2, l3));
            }
        }
    }

    fn merge(&mut self, other: TripleRecorder) {
        match (self, other) {
            (TripleRecorder::Dense { words: a, .. }, TripleRecorder::Dense { words: b, .. }) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x |= y;
                }
            }
            (TripleRecorder::Sparse(a), TripleRecorder::Sparse(b)) => {
                a.extend(b);
            }
            _ => unreachable!("recorder variants are fixed by q"),
        }
    }

    fn count(&self) -> u64 {
        match self {
            TripleRecorder::Dense { words, .. } => {
                words.iter().map(|w| w.count_ones() as u64).sum()
            }
            TripleRecorder::Sparse(set) => set.len() as u64,
        }
    }

    fn collect(&self) -> Vec<(u32, u32, u32)> {
        match self {
            TripleRecorder::Dense { words, qm1 } => {
                let mut out = Vec::new();
                for (wi, &w) in words.iter().enumerate() {
                    let mut bits = w;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as u64;
                        bits &= bits - 1;
                        let idx = wi as u64 * 64 + b;
                        let l3 = idx % qm1;
                        let l2 = (idx / qm1) % qm1;
                        let l1 = idx / (qm1 * qm1);
                        out.push((l1 as u32 + 1, l2 as u32 + 1, l3 as u32 + 1));
                    }
                }
                out
            }
            TripleRecorder::Sparse(set) => set.iter().copied().collect(),
        }
    }
}

/// Scans all (a, b, c) in A x B x C once and records the value triple
/// (B(a,b), B(a,c), B(b,c)) whenever all three values are nonzero; returns
/// the number of distinct triples hit in (F_q^*)^3.
///
/// B(b, c) does not depend on a, so it is tabulated once when the table
/// fits; the inner loop is then pure lookups.
pub fn solvable_triples(
    field: &Field,
    form: &BilinearForm,
    a_set: &VecSet,
    b_set: &VecSet,
    c_set: &VecSet,
    materialize: bool,
    budget: &Budget,
) -> Result<TripleScan> {
    let d = form.d();
    if d < 2 {
        return Err(Error::DimensionOutOfRange(d));
    }
    for s in [a_set, b_set, c_set] {
        if s.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.d() });
        }
    }
    let q = field.q();
    let (na, nb, nc) = (a_set.len() as u128, b_set.len() as u128, c_set.len() as u128);
    let sizes = vec![na as u64, nb as u64, nc as u64];
    let star_total = (q - 1).pow(3);
    if na == 0 || nb == 0 || nc == 0 {
        return Ok(TripleScan {
            q,
            d,
            set_sizes: sizes,
            count: 0,
            star_total,
            ratio: 0.0,
            triples: materialize.then(Vec::new),
        });
    }
    budget.check(nb * nc + na * (nb + nc) + na * nb * nc)?;

    let b_coords = decode_set(field, b_set);
    let c_coords = decode_set(field, c_set);
    let use_table = nb * nc <= 1 << 26;
    let bc_table: Vec<u32> = if use_table {
        let mut t = Vec::with_capacity((nb * nc) as usize);
        for b in b_coords.chunks_exact(d) {
            let w = form.left_vector(field, b);
            for c in c_coords.chunks_exact(d) {
                t.push(dot(field, &w, c).0);
            }
        }
        t
    } else {
        Vec::new()
    };
    let b_lefts: Vec<Fe> = b_coords
        .chunks_exact(d)
        .flat_map(|b| form.left_vector(field, b))
        .collect();

    let partials = run_chunked(a_set.len(), budget.workers, |range| {
        let mut rec = TripleRecorder::new(q);
        let mut ab = vec![0u32; nb as usize];
        let mut ac = vec![0u32; nc as usize];
        for &acode in &a_set.codes()[range] {
            let a = crate::bilinear::decode_vector(field, d, acode);
            let w = form.left_vector(field, &a);
            for (slot, b) in ab.iter_mut().zip(b_coords.chunks_exact(d)) {
                *slot = dot(field, &w, b).0;
            }
            for (slot, c) in ac.iter_mut().zip(c_coords.chunks_exact(d)) {
                *slot = dot(field, &w, c).0;
            }
            for (bi, &l1) in ab.iter().enumerate() {
                if l1 == 0 {
                    continue;
                }
                if use_table {
                    let row = &bc_table[bi * nc as usize..(bi + 1) * nc as usize];
                    for (ci, &l2) in ac.iter().enumerate() {
                        if l2 == 0 {
                            continue;
                        }
                        let l3 = row[ci];
                        if l3 != 0 {
                            rec.record(l1, l2, l3);
                        }
                    }
                } else {
                    let wb = &b_lefts[bi * d..(bi + 1) * d];
                    for (ci, &l2) in ac.iter().enumerate() {
                        if l2 == 0 {
                            continue;
                        }
                        let l3 = dot(field, wb, &c_coords[ci * d..(ci + 1) * d]).0;
                        if l3 != 0 {
                            rec.record(l1, l2, l3);
                        }
                    }
                }
            }
        }
        rec
    });
    let mut rec = TripleRecorder::new(q);
    for p in partials {
        rec.merge(p);
    }

    let count = rec.count();
    Ok(TripleScan {
        q,
        d,
        set_sizes: sizes,
        count,
        star_total,
        ratio: count as f64 / star_total as f64,
        triples: materialize.then(|| rec.collect()),
    })
}

#[inline]
fn dot(field: &Field, w: &[Fe], y: &[Fe]) -> Fe {
    let mut acc = Fe::ZERO;
    for (&wi, &yi) in w.iter().zip(y) {
        acc = field.add(acc, field.mul(wi, yi));
    }
    acc
}

/// Size of the value set Pi(E, F) = {B(e, f)} against the lower bound
/// q / (1 + q^d / (|E||F|)).
#[derive(Debug, Clone, Serialize)]
pub struct ValueSetReport {
    pub q: u64,
    pub d: usize,
    pub e_size: u64,
    pub f_size: u64,
    pub size: u64,
    pub lower_bound: f64,
    /// Exact verdict size >= lower_bound (integer cross-multiplication).
    pub meets_bound: bool,
}

/// Enumerates Pi(E, F) for E in the hyperplane {v : B(a,v) = lambda1} and
/// F in {v : B(a,v) = lambda2}; membership of both sets is verified. The
/// lower bound is guaranteed for d >= 3; it is still reported for d = 2.
pub fn value_set_bound(
    field: &Field,
    form: &BilinearForm,
    a: &[Fe],
    lambda1: Fe,
    lambda2: Fe,
    e_set: &VecSet,
    f_set: &VecSet,
    budget: &Budget,
) -> Result<ValueSetReport> {
    let d = form.d();
    if a.len() != d || e_set.d() != d || f_set.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.len() });
    }
    if a.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroVector);
    }
    if lambda1.is_zero() || lambda2.is_zero() {
        return Err(Error::ZeroLambda);
    }
    let q = field.q();
    let (ne, nf) = (e_set.len() as u128, f_set.len() as u128);
    budget.check(ne * nf + (ne + nf))?;

    let wa = form.left_vector(field, a);
    let e_coords = decode_set(field, e_set);
    let f_coords = decode_set(field, f_set);
    for e in e_coords.chunks_exact(d) {
        if dot(field, &wa, e) != lambda1 {
            return Err(Error::NotInHyperplane);
        }
    }
    for f in f_coords.chunks_exact(d) {
        if dot(field, &wa, f) != lambda2 {
            return Err(Error::NotInHyperplane);
        }
    }

    let size = if q <= 1 << 24 {
        let mut seen: Vec<bool> = vec![false; q as usize];
        for e in e_coords.chunks_exact(d) {
            let w = form.left_vector(field, e);
            for f in f_coords.chunks_exact(d) {
                seen[dot(field, &w, f).0 as usize] = true;
            }
        }
        seen.iter().filter(|&&s| s).count() as u64
    } else {
        let mut seen = std::collections::BTreeSet::new();
        for e in e_coords.chunks_exact(d) {
            let w = form.left_vector(field, e);
            for f in f_coords.chunks_exact(d) {
                seen.insert(dot(field, &w, f).0);
            }
        }
        seen.len() as u64
    };

    let space = u128::from(space_size(field, d)?);
    let ef = ne * nf;
    let lower_bound = if ef == 0 {
        0.0
    } else {
        q as f64 * ef as f64 / (ef as f64 + space as f64)
    };
    // size >= q*EF/(EF + q^d)  <=>  size*(EF + q^d) >= q*EF.
    let meets_bound = u128::from(size) * (ef + space) >= u128::from(q) * ef;
    Ok(ValueSetReport {
        q,
        d,
        e_size: ne as u64,
        f_size: nf as u64,
        size,
        lower_bound,
        meets_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_scan_matches_double_entry_oracle() {
        // Independently coded bookkeeping: evaluate the three forms per
        // triple of vectors and collect into a BTreeSet.
        let f = Field::prime(3).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let star = VecSet::star_grid(&f, 2).unwrap();
        let scan =
            solvable_triples(&f, &form, &star, &star, &star, true, &Budget::default()).unwrap();

        let mut oracle = std::collections::BTreeSet::new();
        for a in star.iter_vectors(&f) {
            for b in star.iter_vectors(&f) {
                for c in star.iter_vectors(&f) {
                    let l1 = form.evaluate(&f, &a, &b).unwrap();
                    let l2 = form.evaluate(&f, &a, &c).unwrap();
                    let l3 = form.evaluate(&f, &b, &c).unwrap();
                    if !l1.is_zero() && !l2.is_zero() && !l3.is_zero() {
                        oracle.insert((l1.0, l2.0, l3.0));
                    }
                }
            }
        }
        assert_eq!(scan.count, oracle.len() as u64);
        assert_eq!(scan.triples.unwrap(), oracle.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn empty_set_gives_zero() {
        let f = Field::prime(5).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let star = VecSet::star_grid(&f, 2).unwrap();
        let empty = VecSet::empty(2);
        let scan =
            solvable_triples(&f, &form, &empty, &star, &star, false, &Budget::default()).unwrap();
        assert_eq!(scan.count, 0);
    }

    #[test]
    fn d1_is_rejected() {
        let f = Field::prime(5).unwrap();
        let form = BilinearForm::dot(&f, 1).unwrap();
        let s = VecSet::full(&f, 1).unwrap();
        assert!(matches!(
            solvable_triples(&f, &form, &s, &s, &s, false, &Budget::default()),
            Err(Error::DimensionOutOfRange(1))
        ));
    }

    #[test]
    fn fiber_counts_sum_to_total() {
        let f = Field::prime(5).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let star = VecSet::star_grid(&f, 2).unwrap();
        let scan =
            solvable_triples(&f, &form, &star, &star, &star, true, &Budget::default()).unwrap();
        let fibers = scan.fiber_counts().unwrap();
        assert_eq!(fibers.iter().map(|(_, n)| n).sum::<u64>(), scan.count);
    }

    #[test]
    fn value_set_trivial_cases() {
        let f = Field::prime(5).unwrap();
        let d = 3;
        let form = BilinearForm::dot(&f, d).unwrap();
        let a = [Fe(1), Fe(0), Fe(0)];
        let full = VecSet::full(&f, d).unwrap();
        let plane1 = full.restrict_hyperplane(&f, &form, &a, Fe(1)).unwrap();
        let plane2 = full.restrict_hyperplane(&f, &form, &a, Fe(2)).unwrap();

        // Full hyperplanes: the last coordinate of f is free, so Pi = F_q.
        let r = value_set_bound(&f, &form, &a, Fe(1), Fe(2), &plane1, &plane2, &Budget::default())
            .unwrap();
        assert_eq!(r.size, 5);
        assert!(r.meets_bound);

        // Singletons: size 1, lower bound q/(1+q^d) < 1.
        let e1 = VecSet::from_codes(&f, d, vec![plane1.codes()[0]]).unwrap();
        let f1 = VecSet::from_codes(&f, d, vec![plane2.codes()[0]]).unwrap();
        let r = value_set_bound(&f, &form, &a, Fe(1), Fe(2), &e1, &f1, &Budget::default()).unwrap();
        assert_eq!(r.size, 1);
        assert!(r.lower_bound < 1.0);
        assert!(r.meets_bound);
    }

    #[test]
    fn value_set_validates_membership() {
        let f = Field::prime(5).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let a = [Fe(1), Fe(0)];
        let full = VecSet::full(&f, 2).unwrap();
        assert!(matches!(
            value_set_bound(&f, &form, &a, Fe(1), Fe(2), &full, &full, &Budget::default()),
            Err(Error::NotInHyperplane)
        ));
        assert!(matches!(
            value_set_bound(
                &f,
                &form,
                &[Fe(0), Fe(0)],
                Fe(1),
                Fe(2),
                &full,
                &full,
                &Budget::default()
            ),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn scan_worker_independence() {
        let f = Field::prime(7).unwrap();
        let form = BilinearForm::diagonal(&f, 2, Fe(3)).unwrap();
        let a = VecSet::random(&f, 2, 0.6, 51).unwrap();
        let b = VecSet::random(&f, 2, 0.6, 52).unwrap();
        let c = VecSet::random(&f, 2, 0.6, 53).unwrap();
        let base = solvable_triples(&f, &form, &a, &b, &c, true, &Budget::default()).unwrap();
        for workers in [2, 4] {
            let multi =
                solvable_triples(&f, &form, &a, &b, &c, true, &Budget::with_workers(workers))
                    .unwrap();
            assert_eq!(base.count, multi.count);
            assert_eq!(base.triples, multi.triples);
        }
    }
}
