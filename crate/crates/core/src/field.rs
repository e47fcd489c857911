//! Arithmetic in F_p and F_{p^m} at desk scale.
//!
//! Elements are canonical indices: the coefficient vector of the reduced
//! polynomial representative, read as a little-endian base-p integer. Index
//! arithmetic keeps equality, hashing and enumeration trivial, and the
//! base-p counter order (0, 1, 2, ...) is the deterministic element order
//! used everywhere.
//!
//! A [`Field`] is an immutable context: construct once, then every operation
//! is a pure function of its arguments and safe to share across threads.
//! Small extension fields precompute add/mul/inv tables; prime fields reduce
//! directly; anything without a table falls back to polynomial arithmetic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field size; also the cap on q^d enforced by the vector
/// layer so that enumeration loops stay bounded and codes fit in u32.
pub const MAX_SPACE: u64 = 1 << 31;

/// Extension fields up to this size get dense add/mul tables.
const TABLE_LIMIT: u64 = 1024;
/// Trace and root-of-unity tables are built up to this size.
const CHAR_TABLE_LIMIT: u64 = 65536;

/// Serializable description of F_q, q = p^m.
///
/// `modulus` is the monic reduction polynomial as m+1 little-endian
/// coefficients in [0, p); prime fields carry the formal `[0, 1]` (the
/// polynomial x) and bypass reduction entirely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub m: u32,
    pub modulus: Vec<u64>,
}

impl FieldSpec {
    /// The prime field F_p.
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        Ok(FieldSpec { p, m: 1, modulus: vec![0, 1] })
    }

    /// F_{p^m} with the lexicographically smallest monic irreducible
    /// reduction polynomial (low coefficients scanned as an ascending
    /// base-p counter), so the choice is identical across runs and
    /// implementations.
    pub fn extension(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidSpec("extension degree must be >= 1".into()));
        }
        let q = checked_pow(p, m)?;
        if m == 1 {
            return FieldSpec::prime(p);
        }
        let candidates = q; // p^m lower-coefficient combinations
        for j in 0..candidates {
            let mut modulus = digits_of(j, p, m as usize);
            modulus.push(1);
            if poly_is_irreducible(&modulus, p) {
                return Ok(FieldSpec { p, m, modulus });
            }
        }
        unreachable!("an irreducible polynomial of every degree exists over F_p")
    }

    /// Validates an explicit spec (e.g. parsed from JSON).
    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::NonPrime(self.p));
        }
        if self.m == 0 {
            return Err(Error::InvalidSpec("extension degree must be >= 1".into()));
        }
        checked_pow(self.p, self.m)?;
        if self.modulus.len() != self.m as usize + 1 {
            return Err(Error::InvalidSpec(format!(
                "modulus must have {} coefficients",
                self.m + 1
            )));
        }
        if self.modulus[self.m as usize] != 1 {
            return Err(Error::InvalidSpec("modulus must be monic".into()));
        }
        if self.modulus.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidSpec("modulus coefficients must lie in [0, p)".into()));
        }
        if self.m > 1 && !poly_is_irreducible(&self.modulus, self.p) {
            return Err(Error::InvalidSpec("modulus is reducible".into()));
        }
        Ok(())
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.m)
    }
}

/// An element of a [`Field`], stored as its canonical index in [0, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

enum Repr {
    /// m = 1: direct modular arithmetic, no tables.
    Prime,
    /// m > 1, q <= TABLE_LIMIT: dense q*q add and mul tables.
    ExtTable { add: Vec<u32>, mul: Vec<u32>, inv: Vec<u32> },
    /// m > 1, large q: per-operation polynomial arithmetic.
    ExtPoly,
}

/// Runtime field context for F_q.
pub struct Field {
    spec: FieldSpec,
    q: u64,
    repr: Repr,
    /// Trace digit per element (m > 1, small q); `None` means compute on demand.
    trace_table: Option<Vec<u32>>,
    /// exp(2*pi*i*r/p) for r in [0, p).
    char_roots: Option<Vec<Complex64>>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Field(q = {}^{} = {})", self.spec.p, self.spec.m, self.q)
    }
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        spec.validate()?;
        let q = checked_pow(spec.p, spec.m)?;
        let p = spec.p;
        let m = spec.m;

        let repr = if m == 1 {
            Repr::Prime
        } else if q <= TABLE_LIMIT {
            let qs = q as usize;
            let mut add = vec![0u32; qs * qs];
            let mut mul = vec![0u32; qs * qs];
            for a in 0..q {
                let da = digits_of(a, p, m as usize);
                for b in 0..q {
                    let db = digits_of(b, p, m as usize);
                    let sum: Vec<u64> =
                        da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                    add[(a * q + b) as usize] = index_of(&sum, p) as u32;
                    let prod = poly_mul_rem(&da, &db, &spec.modulus, p);
                    mul[(a * q + b) as usize] = index_of(&prod, p) as u32;
                }
            }
            let mut inv = vec![0u32; qs];
            for a in 1..q {
                let da = digits_of(a, p, m as usize);
                let ia = poly_inverse(&da, &spec.modulus, p)
                    .expect("nonzero element of a field is invertible");
                inv[a as usize] = index_of(&ia, p) as u32;
            }
            Repr::ExtTable { add, mul, inv }
        } else {
            Repr::ExtPoly
        };

        let mut field = Field { spec, q, repr, trace_table: None, char_roots: None };

        if m > 1 && q <= CHAR_TABLE_LIMIT {
            let table: Vec<u32> =
                (0..q).map(|a| field.trace_uncached(Fe(a as u32)).0).collect();
            field.trace_table = Some(table);
        }
        if p <= CHAR_TABLE_LIMIT {
            let tau = std::f64::consts::TAU;
            let roots = (0..p)
                .map(|r| Complex64::from_polar(1.0, tau * r as f64 / p as f64))
                .collect();
            field.char_roots = Some(roots);
        }
        Ok(field)
    }

    /// F_p shortcut.
    pub fn prime(p: u64) -> Result<Self> {
        Field::new(FieldSpec::prime(p)?)
    }

    /// F_{p^m} with the canonical modulus.
    pub fn extension(p: u64, m: u32) -> Result<Self> {
        Field::new(FieldSpec::extension(p, m)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.spec.p
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.spec.m
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Checked element construction from an index.
    pub fn element(&self, index: u64) -> Result<Fe> {
        if index >= self.q {
            return Err(Error::ElementOutOfRange { index, q: self.q });
        }
        Ok(Fe(index as u32))
    }

    /// All q elements in base-p counter order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.q as u32).map(Fe)
    }

    /// Little-endian coefficient vector of an element.
    pub fn coeffs(&self, a: Fe) -> Vec<u64> {
        digits_of(a.0 as u64, self.spec.p, self.spec.m as usize)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.repr {
            Repr::Prime => {
                let s = a.0 as u64 + b.0 as u64;
                let p = self.spec.p;
                Fe(if s >= p { (s - p) as u32 } else { s as u32 })
            }
            Repr::ExtTable { add, .. } => Fe(add[(a.0 as u64 * self.q + b.0 as u64) as usize]),
            Repr::ExtPoly => {
                let p = self.spec.p;
                let da = self.coeffs(a);
                let db = self.coeffs(b);
                let sum: Vec<u64> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                Fe(index_of(&sum, p) as u32)
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        match &self.repr {
            Repr::Prime => {
                let p = self.spec.p;
                Fe(if a.0 == 0 { 0 } else { (p - a.0 as u64) as u32 })
            }
            _ => {
                let p = self.spec.p;
                let da = self.coeffs(a);
                let neg: Vec<u64> = da.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect();
                Fe(index_of(&neg, p) as u32)
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match &self.repr {
            Repr::Prime => Fe(((a.0 as u64 * b.0 as u64) % self.spec.p) as u32),
            Repr::ExtTable { mul, .. } => Fe(mul[(a.0 as u64 * self.q + b.0 as u64) as usize]),
            Repr::ExtPoly => {
                let p = self.spec.p;
                let prod = poly_mul_rem(&self.coeffs(a), &self.coeffs(b), &self.spec.modulus, p);
                Fe(index_of(&prod, p) as u32)
            }
        }
    }

    /// Multiplicative inverse. Extension fields use extended Euclid on
    /// polynomials; prime fields use Fermat's little theorem.
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match &self.repr {
            Repr::Prime => Ok(self.pow(a, self.spec.p - 2)),
            Repr::ExtTable { inv, .. } => Ok(Fe(inv[a.0 as usize])),
            Repr::ExtPoly => {
                let p = self.spec.p;
                let ia = poly_inverse(&self.coeffs(a), &self.spec.modulus, p)
                    .ok_or(Error::DivisionByZero)?;
                Ok(Fe(index_of(&ia, p) as u32))
            }
        }
    }

    /// a^e by binary exponentiation; a^0 = 1 for every a.
    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn trace_uncached(&self, a: Fe) -> Fe {
        let mut acc = a;
        let mut frob = a;
        for _ in 1..self.spec.m {
            frob = self.pow(frob, self.spec.p);
            acc = self.add(acc, frob);
        }
        debug_assert!(
            (acc.0 as u64) < self.spec.p,
            "trace must land in the prime subfield"
        );
        acc
    }

    /// Trace down to F_p: Tr(x) = x + x^p + ... + x^(p^(m-1)), returned as an
    /// element whose index is its value in [0, p). Identity map when m = 1.
    pub fn trace(&self, a: Fe) -> Fe {
        if self.spec.m == 1 {
            return a;
        }
        match &self.trace_table {
            Some(t) => Fe(t[a.0 as usize]),
            None => self.trace_uncached(a),
        }
    }

    #[inline]
    fn root_of_unity(&self, r: u64) -> Complex64 {
        match &self.char_roots {
            Some(roots) => roots[r as usize],
            None => Complex64::from_polar(
                1.0,
                std::f64::consts::TAU * r as f64 / self.spec.p as f64,
            ),
        }
    }

    /// Canonical additive character value chi(x) = exp(2*pi*i*Tr(x)/p).
    #[inline]
    pub fn chi(&self, x: Fe) -> Complex64 {
        self.root_of_unity(self.trace(x).0 as u64)
    }

    /// The character chi_s(x) = chi(s*x); nontrivial iff s != 0.
    #[inline]
    pub fn additive_character(&self, s: Fe, x: Fe) -> Complex64 {
        self.chi(self.mul(s, x))
    }

    /// The set {x^k : x in F_q}, sorted by index.
    pub fn kth_powers(&self, k: u64) -> Vec<Fe> {
        assert!(k >= 1, "kth_powers requires k >= 1");
        let mut out: Vec<Fe> = self.elements().map(|x| self.pow(x, k)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn checked_pow(p: u64, m: u32) -> Result<u64> {
    let mut q: u64 = 1;
    for _ in 0..m {
        q = q
            .checked_mul(p)
            .filter(|&v| v <= MAX_SPACE)
            .ok_or(Error::TooLarge { needed: u128::from(p).pow(m), limit: MAX_SPACE })?;
    }
    Ok(q)
}

/// Deterministic trial-division primality test (p <= 2^31 here, so the scan
/// tops out at ~46k divisions).
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn digits_of(mut x: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(x % p);
        x /= p;
    }
    out
}

fn index_of(digits: &[u64], p: u64) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * p + d)
}

// --- polynomial arithmetic over F_p (little-endian coefficient vectors) ---

fn poly_degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Remainder of `a` modulo a monic divisor `b`.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let db = poly_degree(b).expect("divisor must be nonzero");
    debug_assert_eq!(b[db], 1, "divisor must be monic");
    let mut r = a.to_vec();
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let coef = r[dr];
        let shift = dr - db;
        for (i, &bc) in b.iter().enumerate().take(db + 1) {
            let sub = (coef * bc) % p;
            let idx = i + shift;
            r[idx] = (r[idx] + p - sub) % p;
        }
    }
    r.truncate(db);
    r.resize(db, 0);
    r
}

fn poly_mul_rem(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    poly_rem(&poly_mul(a, b, p), modulus, p)
}

/// Inverse of `a` modulo the monic irreducible `modulus`, by extended Euclid.
fn poly_inverse(a: &[u64], modulus: &[u64], p: u64) -> Option<Vec<u64>> {
    let m = modulus.len() - 1;
    // Invariants: r0 = t0 * a (mod modulus), r1 = t1 * a (mod modulus).
    let mut r0 = modulus.to_vec();
    let mut r1 = poly_rem(a, modulus, p);
    let mut t0 = vec![0u64];
    let mut t1 = vec![1u64];
    while poly_degree(&r1).is_some() {
        let (quot, rem) = poly_divmod(&r0, &r1, p);
        let t_next = poly_sub(&t0, &poly_mul(&quot, &t1, p), p);
        r0 = r1;
        r1 = rem;
        t0 = t1;
        t1 = t_next;
    }
    // gcd is r0; invertible iff it is a nonzero constant.
    let d = poly_degree(&r0)?;
    if d != 0 {
        return None;
    }
    let scale = mod_inverse_u64(r0[0], p)?;
    let mut out = poly_rem(&t0, modulus, p);
    for c in &mut out {
        *c = (*c * scale) % p;
    }
    out.resize(m, 0);
    Some(out)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = (x + p - y) % p;
    }
    out
}

fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = poly_degree(b).expect("divisor must be nonzero");
    let lead_inv = mod_inverse_u64(b[db], p).expect("leading coefficient invertible");
    let mut r = a.to_vec();
    let mut quot = vec![0u64; a.len().saturating_sub(db) + 1];
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let coef = (r[dr] * lead_inv) % p;
        let shift = dr - db;
        quot[shift] = coef;
        for (i, &bc) in b.iter().enumerate().take(db + 1) {
            let sub = (coef * bc) % p;
            let idx = i + shift;
            r[idx] = (r[idx] + p - sub) % p;
        }
    }
    (quot, r)
}

fn mod_inverse_u64(a: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        return None;
    }
    // Fermat; p is prime throughout this crate.
    let mut e = p - 2;
    let mut base = a % p;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    Some(acc)
}

/// Exhaustive trial division by every monic polynomial of degree up to
/// deg(f)/2; ample at desk scale and trivially auditable.
fn poly_is_irreducible(f: &[u64], p: u64) -> bool {
    let deg = match poly_degree(f) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if deg == 1 {
        return true;
    }
    if f[0] == 0 {
        return false; // divisible by x
    }
    for dd in 1..=deg / 2 {
        let count = p.pow(dd as u32);
        for j in 0..count {
            let mut g = digits_of(j, p, dd);
            g.push(1);
            let r = poly_rem(f, &g, p);
            if poly_degree(&r).is_none() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn prime_field_construction() {
        assert_eq!(Field::prime(5).unwrap().q(), 5);
        assert_eq!(Field::prime(2).unwrap().q(), 2);
        assert!(matches!(Field::prime(4), Err(Error::NonPrime(4))));
        assert!(matches!(Field::prime(1), Err(Error::NonPrime(1))));
    }

    #[test]
    fn canonical_moduli() {
        // Scan order is the ascending base-p counter over low coefficients.
        assert_eq!(FieldSpec::extension(2, 2).unwrap().modulus, vec![1, 1, 1]); // x^2+x+1
        assert_eq!(FieldSpec::extension(2, 3).unwrap().modulus, vec![1, 1, 0, 1]); // x^3+x+1
        assert_eq!(FieldSpec::extension(3, 2).unwrap().modulus, vec![1, 0, 1]); // x^2+1
        assert_eq!(FieldSpec::extension(3, 1).unwrap(), FieldSpec::prime(3).unwrap());
    }

    #[test]
    fn arithmetic_spot_values() {
        let f5 = Field::prime(5).unwrap();
        assert_eq!(f5.inv(Fe(2)).unwrap(), Fe(3));
        assert!(matches!(f5.inv(Fe(0)), Err(Error::DivisionByZero)));

        let f7 = Field::prime(7).unwrap();
        assert_eq!(f7.pow(Fe(3), 6), Fe(1));

        // F_4 = F_2[t]/(t^2+t+1): t = index 2, t+1 = index 3.
        let f4 = Field::extension(2, 2).unwrap();
        assert_eq!(f4.mul(Fe(2), Fe(2)), Fe(3)); // t*t = t+1
        assert_eq!(f4.mul(Fe(2), Fe(3)), Fe(1)); // t*(t+1) = 1
        assert_eq!(f4.inv(Fe(2)).unwrap(), Fe(3));
    }

    #[test]
    fn trace_values() {
        let f4 = Field::extension(2, 2).unwrap();
        assert_eq!(f4.trace(Fe(2)), Fe(1)); // Tr(t) = t + t^2 = 1
        assert_eq!(f4.trace(Fe(0)), Fe(0));
        let f7 = Field::prime(7).unwrap();
        assert_eq!(f7.trace(Fe(4)), Fe(4)); // identity for m = 1
    }

    #[test]
    fn trace_is_linear_and_surjective() {
        for (p, m) in [(2u64, 2u32), (2, 3), (3, 2), (5, 2), (11, 2), (2, 4), (3, 4)] {
            let f = Field::extension(p, m).unwrap();
            assert!(f.q() <= 121 || f.q() == 256, "enumeration scale");
            let mut hit = vec![false; p as usize];
            for a in f.elements() {
                let t = f.trace(a);
                assert!((t.0 as u64) < p);
                hit[t.0 as usize] = true;
                for b in f.elements() {
                    assert_eq!(f.trace(f.add(a, b)), f.add(f.trace(a), f.trace(b)));
                }
                // F_p-linearity: scaling by a prime-subfield constant commutes.
                for c in 0..p {
                    let cf = Fe(c as u32);
                    assert_eq!(f.trace(f.mul(cf, a)), f.mul(cf, f.trace(a)));
                }
            }
            assert!(hit.iter().all(|&h| h), "trace must be onto F_p");
        }
    }

    #[test]
    fn character_orthogonality() {
        for field in [
            Field::prime(2).unwrap(),
            Field::prime(5).unwrap(),
            Field::prime(13).unwrap(),
            Field::extension(2, 2).unwrap(),
            Field::extension(3, 2).unwrap(),
            Field::extension(2, 4).unwrap(),
            Field::extension(11, 2).unwrap(),
        ] {
            let q = field.q();
            for s in field.elements() {
                let sum: Complex64 =
                    field.elements().map(|x| field.additive_character(s, x)).sum();
                if s.is_zero() {
                    assert_eq!(sum.re, q as f64);
                    assert_eq!(sum.im, 0.0);
                } else {
                    assert!(sum.norm() < 1e-9 * q as f64, "q={q} s={s:?} |sum|={}", sum.norm());
                }
            }
        }
    }

    #[test]
    fn character_spot_values() {
        let f2 = Field::prime(2).unwrap();
        assert!((f2.additive_character(Fe(1), Fe(1)) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let f5 = Field::prime(5).unwrap();
        for x in f5.elements() {
            assert_eq!(f5.additive_character(Fe(0), x), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn enumeration_order() {
        let f3 = Field::prime(3).unwrap();
        assert_eq!(f3.elements().collect::<Vec<_>>(), vec![Fe(0), Fe(1), Fe(2)]);
        let f4 = Field::extension(2, 2).unwrap();
        assert_eq!(f4.elements().collect::<Vec<_>>(), vec![Fe(0), Fe(1), Fe(2), Fe(3)]);
        assert_eq!(Field::extension(3, 2).unwrap().elements().count(), 9);
    }

    #[test]
    fn kth_power_sets() {
        let f5 = Field::prime(5).unwrap();
        assert_eq!(f5.kth_powers(2), vec![Fe(0), Fe(1), Fe(4)]);
        assert_eq!(f5.kth_powers(1).len(), 5);
        let f7 = Field::prime(7).unwrap();
        assert_eq!(f7.kth_powers(5).len(), 7); // gcd(5, 6) = 1 => bijection

        // |{x^k}| = 1 + (q-1)/gcd(k, q-1) on every small field.
        for field in [
            Field::prime(5).unwrap(),
            Field::prime(13).unwrap(),
            Field::extension(3, 2).unwrap(),
            Field::extension(2, 4).unwrap(),
        ] {
            let q = field.q();
            for k in 1..=12u64 {
                let g = gcd(k, q - 1);
                assert_eq!(field.kth_powers(k).len() as u64, 1 + (q - 1) / g);
            }
        }
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn field_axioms_sampled() {
        // 1000+ random triples per field: associativity, distributivity,
        // inverses. Covers the prime, tabled and polynomial code paths.
        for field in [
            Field::prime(2).unwrap(),
            Field::prime(7).unwrap(),
            Field::prime(10007).unwrap(),
            Field::extension(2, 2).unwrap(),
            Field::extension(3, 2).unwrap(),
            Field::extension(11, 2).unwrap(), // tabled (121 <= 1024)
            Field::extension(5, 5).unwrap(),  // 3125 > 1024: polynomial path
        ] {
            let q = field.q();
            let mut rng = SplitMix64::new(0xF1E1D);
            for _ in 0..1000 {
                let a = Fe(rng.below(q) as u32);
                let b = Fe(rng.below(q) as u32);
                let c = Fe(rng.below(q) as u32);
                assert_eq!(field.add(field.add(a, b), c), field.add(a, field.add(b, c)));
                assert_eq!(field.mul(field.mul(a, b), c), field.mul(a, field.mul(b, c)));
                assert_eq!(
                    field.mul(a, field.add(b, c)),
                    field.add(field.mul(a, b), field.mul(a, c))
                );
                assert_eq!(field.add(a, field.neg(a)), Fe::ZERO);
                assert_eq!(field.sub(a, b), field.add(a, field.neg(b)));
                if !a.is_zero() {
                    assert_eq!(field.mul(a, field.inv(a).unwrap()), Fe::ONE);
                }
            }
            // Grab one Fermat identity per field while we are here.
            let a = Fe(rng.below(q - 1) as u32 + 1);
            assert_eq!(field.pow(a, q - 1), Fe::ONE);
        }
    }

    #[test]
    fn spec_serialization_shape() {
        let spec = FieldSpec::extension(2, 2).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"p":2,"m":2,"modulus":[1,1,1]}"#);
        let back: FieldSpec = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back, spec);

        // Reducible modulus must be rejected.
        let bad: FieldSpec = serde_json::from_str(r#"{"p":2,"m":2,"modulus":[0,0,1]}"#).unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rejects_oversized_fields() {
        assert!(matches!(Field::extension(2, 40), Err(Error::TooLarge { .. })));
    }
}
