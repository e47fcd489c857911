//! Pair counting N^lambda(V, U), the hyperplane-count variance sum, and the
//! two-term character-sum decomposition behind it.

use num_complex::Complex64;
use serde::Serialize;

use super::{strict_sqrt_bound, CountReport, Histogram};
use crate::bilinear::{decode_set, decode_vector, neighborhood_count, BilinearForm, VecSet};
use crate::error::{Error, Result};
use crate::exec::{run_chunked, Budget};
use crate::field::{Fe, Field};

fn require_lambda(lambda: Fe, allow_zero: bool) -> Result<()> {
    if lambda.is_zero() && !allow_zero {
        return Err(Error::ZeroLambda);
    }
    Ok(())
}

#[inline]
fn dot_coords(field: &Field, w: &[Fe], coords: &[Fe]) -> Fe {
    let mut acc = Fe::ZERO;
    for (&wi, &ci) in w.iter().zip(coords) {
        acc = field.add(acc, field.mul(wi, ci));
    }
    acc
}

/// One-pass histogram of B(v, u) over all pairs (v, u) in V x U.
///
/// This is the second, independent route behind [`count_pairs`]; summing all
/// entries recovers |V||U| exactly.
pub fn pair_histogram(
    field: &Field,
    form: &BilinearForm,
    v_set: &VecSet,
    u_set: &VecSet,
    budget: &Budget,
) -> Result<Histogram> {
    let d = form.d();
    if v_set.d() != d || u_set.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v_set.d() });
    }
    budget.check(v_set.len() as u128 * u_set.len() as u128)?;
    let u_coords = decode_set(field, u_set);
    let partials = run_chunked(v_set.len(), budget.workers, |range| {
        let mut hist = Histogram::new(field.q());
        for &vc in &v_set.codes()[range] {
            let v = decode_vector(field, d, vc);
            let w = form.left_vector(field, &v);
            for u in u_coords.chunks_exact(d) {
                hist.bump(dot_coords(field, &w, u).0);
            }
        }
        hist
    });
    let mut out = Histogram::new(field.q());
    for p in partials {
        out.merge(p);
    }
    Ok(out)
}

/// Exact |{(v, u) in V x U : B(v, u) = lambda}| with the main term |V||U|/q
/// and the error bound sqrt(q^(d-1) |V| |U|).
///
/// The count is produced twice: per-element neighborhood counting over V,
/// and the pair histogram read at lambda. The two routes must agree exactly;
/// a mismatch is a bug and panics.
pub fn count_pairs(
    field: &Field,
    form: &BilinearForm,
    lambda: Fe,
    v_set: &VecSet,
    u_set: &VecSet,
    allow_zero: bool,
    budget: &Budget,
) -> Result<CountReport> {
    require_lambda(lambda, allow_zero)?;
    if v_set.is_empty() || u_set.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = form.d();
    if v_set.d() != d || u_set.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v_set.d() });
    }
    budget.check(2 * v_set.len() as u128 * u_set.len() as u128)?;

    // Route (a): per-element neighborhood counting.
    let partials = run_chunked(v_set.len(), budget.workers, |range| {
        let mut sum: u64 = 0;
        for &vc in &v_set.codes()[range] {
            let v = decode_vector(field, d, vc);
            sum += neighborhood_count(field, form, lambda, &v, u_set)
                .expect("dims already checked");
        }
        sum
    });
    let exact: u64 = partials.into_iter().sum();

    // Route (b): histogram over all pairs, read at lambda.
    let hist = pair_histogram(field, form, v_set, u_set, budget)?;
    assert_eq!(
        exact,
        hist.get(lambda.0),
        "independent pair-count routes disagree; this is a bug"
    );

    let q = field.q();
    let nv = v_set.len() as u128;
    let nu = u_set.len() as u128;
    let product = nv * nu;
    let dev_num = (u128::from(q) * u128::from(exact)).abs_diff(product);
    // Strict bound: dev < sqrt(q^(d-1) |V||U|)  <=>  (q*dev_num')^2 ... all
    // cleared to (dev_num)^2 < q^(d+1) |V||U|.
    let bound_sq = u128::from(q)
        .checked_pow(d as u32 + 1)
        .and_then(|x| x.checked_mul(product));
    let satisfied = bound_sq.map(|b| strict_sqrt_bound(dev_num, b));

    let main_term = product as f64 / q as f64;
    let deviation = dev_num as f64 / q as f64;
    let error_bound = ((q as f64).powi(d as i32 - 1) * product as f64).sqrt();
    Ok(CountReport {
        q,
        d,
        set_sizes: vec![nv as u64, nu as u64],
        exact_count: exact as u128,
        main_term,
        error_bound: Some(error_bound),
        deviation,
        relative_deviation: if main_term > 0.0 { Some(deviation / main_term) } else { None },
        bound_satisfied: satisfied,
    })
}

/// The variance of hyperplane-restricted counts, computed exactly.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceReport {
    pub q: u64,
    pub d: usize,
    pub set_size: u64,
    /// sum over v in F_q^d of (|N^lambda_V(v)| - |V|/q)^2.
    pub value: f64,
    /// The same sum with denominators cleared: sum of (q*N_v - |V|)^2.
    pub numerator: u128,
    /// q^(d-1) |V|.
    pub strict_bound: f64,
    /// Exact verdict: numerator < q^(d+1) |V|.
    pub bound_satisfied: bool,
}

/// sum_{v in F_q^d} (|N^lambda_V(v)| - |V|/q)^2 by full enumeration over v.
pub fn variance_sum(
    field: &Field,
    form: &BilinearForm,
    lambda: Fe,
    v_set: &VecSet,
    allow_zero: bool,
    budget: &Budget,
) -> Result<VarianceReport> {
    require_lambda(lambda, allow_zero)?;
    if v_set.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = form.d();
    if v_set.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v_set.d() });
    }
    let space = crate::bilinear::space_size(field, d)?;
    budget.check(space as u128 * v_set.len() as u128)?;

    let q = field.q();
    let size = v_set.len() as u64;
    let member_coords = decode_set(field, v_set);
    let mut numerator: u128 = 0;
    for vc in 0..space as u32 {
        let v = decode_vector(field, d, vc);
        let w = form.left_vector(field, &v);
        let mut n: u64 = 0;
        for u in member_coords.chunks_exact(d) {
            if dot_coords(field, &w, u) == lambda {
                n += 1;
            }
        }
        let diff = (q * n).abs_diff(size);
        numerator += u128::from(diff) * u128::from(diff);
    }

    let q2 = (q * q) as f64;
    let bound_num = u128::from(q)
        .checked_pow(d as u32 + 1)
        .and_then(|x| x.checked_mul(u128::from(size)));
    Ok(VarianceReport {
        q,
        d,
        set_size: size,
        value: numerator as f64 / q2,
        numerator,
        strict_bound: (q as f64).powi(d as i32 - 1) * size as f64,
        bound_satisfied: bound_num.is_some_and(|b| numerator < b),
    })
}

/// The two character sums whose total, divided by q^2, equals the variance
/// sum: R1 runs over equal twist parameters, R2 over distinct ones.
#[derive(Debug, Clone, Serialize)]
pub struct RIdentityReport {
    pub q: u64,
    pub d: usize,
    pub set_size: u64,
    pub r1: f64,
    pub r1_imag: f64,
    pub r2: f64,
    pub r2_imag: f64,
    /// (q-1) q^d |V|, which R1 must hit exactly after rounding.
    pub r1_expected: u128,
    /// -(q-2) q^d |V|, a hard floor for R2.
    pub r2_lower: i128,
    pub r1_matches: bool,
    pub r2_above_lower: bool,
    /// Variance sum recomputed by direct enumeration (the independent route).
    pub variance_value: f64,
    /// |(r1 + r2)/q^2 - variance_value|.
    pub cross_residual: f64,
    pub cross_ok: bool,
}

/// Evaluates R1 (s = s') and R2 (s != s') as literal character sums.
///
/// The u-sums for a fixed v are collected into a value histogram first and
/// the twist sums T_v(s) are formed from it; that is an exact regrouping of
/// the quadruple sum, not an orthogonality shortcut, so the character route
/// stays independent of the enumeration route it is checked against.
pub fn r_identities(
    field: &Field,
    form: &BilinearForm,
    lambda: Fe,
    v_set: &VecSet,
    allow_zero: bool,
    budget: &Budget,
) -> Result<RIdentityReport> {
    require_lambda(lambda, allow_zero)?;
    if v_set.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = form.d();
    if v_set.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v_set.d() });
    }
    let space = crate::bilinear::space_size(field, d)?;
    let q = field.q();
    let per_v = v_set.len() as u128 + u128::from(q) * u128::from(q - 1) + u128::from(q - 1).pow(2);
    budget.check(u128::from(space) * per_v + u128::from(space) * v_set.len() as u128)?;

    // chi(lambda * t) for every t, reused across the whole double twist loop.
    let lam_chi: Vec<Complex64> =
        (0..q as u32).map(|t| field.chi(field.mul(lambda, Fe(t)))).collect();
    // chi(s * b) table, indexed s*q + b.
    let qs = q as usize;
    let mut twist_chi = vec![Complex64::new(1.0, 0.0); qs * qs];
    for s in 0..q as u32 {
        for b in 0..q as u32 {
            twist_chi[s as usize * qs + b as usize] = field.chi(field.mul(Fe(s), Fe(b)));
        }
    }

    let member_coords = decode_set(field, v_set);
    let mut r1 = Complex64::new(0.0, 0.0);
    let mut r2 = Complex64::new(0.0, 0.0);
    let mut value_hist = vec![0u32; qs];
    let mut twists = vec![Complex64::new(0.0, 0.0); qs];
    for vc in 0..space as u32 {
        let v = decode_vector(field, d, vc);
        let w = form.left_vector(field, &v);
        value_hist.iter_mut().for_each(|c| *c = 0);
        for u in member_coords.chunks_exact(d) {
            value_hist[dot_coords(field, &w, u).0 as usize] += 1;
        }
        for s in 1..qs {
            let mut t = Complex64::new(0.0, 0.0);
            for (b, &n) in value_hist.iter().enumerate() {
                if n > 0 {
                    t += twist_chi[s * qs + b] * n as f64;
                }
            }
            twists[s] = t;
            r1 += t * t.conj();
        }
        for s in 1..qs {
            for s2 in 1..qs {
                if s == s2 {
                    continue;
                }
                let delta = field.sub(Fe(s2 as u32), Fe(s as u32));
                r2 += twists[s] * twists[s2].conj() * lam_chi[delta.0 as usize];
            }
        }
    }

    let size = v_set.len() as u64;
    let r1_expected = u128::from(q - 1) * u128::from(q).pow(d as u32) * u128::from(size);
    let r2_lower = -((q - 2) as i128 * (q as i128).pow(d as u32) * size as i128);
    let r1_matches = (r1.re - r1_expected as f64).abs() < 0.25 && r1.im.abs() < 0.25;
    let r2_rounded = r2.re.round() as i128;
    let r2_above_lower = r2_rounded >= r2_lower && r2.im.abs() < 0.25;

    let variance = variance_sum(field, form, lambda, v_set, allow_zero, budget)?;
    let cross = (r1.re + r2.re) / (q * q) as f64;
    let cross_residual = (cross - variance.value).abs();
    Ok(RIdentityReport {
        q,
        d,
        set_size: size,
        r1: r1.re,
        r1_imag: r1.im,
        r2: r2.re,
        r2_imag: r2.im,
        r1_expected,
        r2_lower,
        r1_matches,
        r2_above_lower,
        variance_value: variance.value,
        cross_residual,
        cross_ok: cross_residual < 0.25,
    })
}

/// Exact count for the chain B(a, b) = lambda1, B(a, c) = lambda2 via
/// sum over a of |N^l1_B(a)| * |N^l2_C(a)|, with the three-term error bound
/// (|B|/q) sqrt(q^(d-1)|A||C|) + (|C|/q) sqrt(q^(d-1)|A||B|)
/// + q^(d-1) sqrt(|B||C|).
pub fn count_two_eq_three_var(
    field: &Field,
    form: &BilinearForm,
    lambda1: Fe,
    lambda2: Fe,
    a_set: &VecSet,
    b_set: &VecSet,
    c_set: &VecSet,
    allow_zero: bool,
    budget: &Budget,
) -> Result<CountReport> {
    require_lambda(lambda1, allow_zero)?;
    require_lambda(lambda2, allow_zero)?;
    let d = form.d();
    for s in [a_set, b_set, c_set] {
        if s.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.d() });
        }
    }
    budget.check(a_set.len() as u128 * (b_set.len() as u128 + c_set.len() as u128))?;

    let partials = run_chunked(a_set.len(), budget.workers, |range| {
        let mut sum: u128 = 0;
        for &ac in &a_set.codes()[range] {
            let a = decode_vector(field, d, ac);
            let n1 = neighborhood_count(field, form, lambda1, &a, b_set)
                .expect("dims already checked");
            let n2 = neighborhood_count(field, form, lambda2, &a, c_set)
                .expect("dims already checked");
            sum += u128::from(n1) * u128::from(n2);
        }
        sum
    });
    let exact: u128 = partials.into_iter().sum();

    let q = field.q();
    let (na, nb, nc) = (a_set.len() as u128, b_set.len() as u128, c_set.len() as u128);
    let product = na * nb * nc;
    let q2 = u128::from(q) * u128::from(q);
    let dev_num = (q2 * exact).abs_diff(product);
    let deviation = dev_num as f64 / q2 as f64;

    let qf = q as f64;
    let qd1 = qf.powi(d as i32 - 1);
    let bound = (nb as f64 / qf) * (qd1 * na as f64 * nc as f64).sqrt()
        + (nc as f64 / qf) * (qd1 * na as f64 * nb as f64).sqrt()
        + qd1 * (nb as f64 * nc as f64).sqrt();
    let main_term = product as f64 / q2 as f64;
    Ok(CountReport {
        q,
        d,
        set_sizes: vec![na as u64, nb as u64, nc as u64],
        exact_count: exact,
        main_term,
        error_bound: Some(bound),
        deviation,
        relative_deviation: if main_term > 0.0 { Some(deviation / main_term) } else { None },
        bound_satisfied: Some(deviation <= bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::VecSet;

    fn setup(p: u64, d: usize) -> (Field, BilinearForm) {
        let f = Field::prime(p).unwrap();
        let form = BilinearForm::dot(&f, d).unwrap();
        (f, form)
    }

    #[test]
    fn pairs_brute_force_example() {
        // F_3, d = 1, dot, lambda = 1, V = U = {1, 2}: pairs (1,1) and (2,2).
        let (f, form) = setup(3, 1);
        let set = VecSet::from_codes(&f, 1, vec![1, 2]).unwrap();
        let r = count_pairs(&f, &form, Fe(1), &set, &set, false, &Budget::default()).unwrap();
        assert_eq!(r.exact_count, 2);
        assert_eq!(r.bound_satisfied, Some(true));
    }

    #[test]
    fn pairs_full_space_formula() {
        // V = U = F_q^d, lambda != 0: exactly (q^d - 1) q^(d-1) pairs.
        for (p, m, d) in [(3u64, 1u32, 2usize), (5, 1, 2), (2, 2, 2), (3, 1, 3), (7, 1, 1)] {
            let f = Field::extension(p, m).unwrap();
            let form = BilinearForm::dot(&f, d).unwrap();
            let full = VecSet::full(&f, d).unwrap();
            let q = f.q();
            let r = count_pairs(&f, &form, Fe(1), &full, &full, false, &Budget::default()).unwrap();
            assert_eq!(
                r.exact_count,
                u128::from(q.pow(d as u32) - 1) * u128::from(q.pow(d as u32 - 1))
            );
            assert_eq!(r.bound_satisfied, Some(true));
        }
    }

    #[test]
    fn pairs_rejects_zero_lambda_by_default() {
        let (f, form) = setup(3, 1);
        let set = VecSet::full(&f, 1).unwrap();
        assert!(matches!(
            count_pairs(&f, &form, Fe(0), &set, &set, false, &Budget::default()),
            Err(Error::ZeroLambda)
        ));
        // Allowed explicitly for oracle runs.
        let r = count_pairs(&f, &form, Fe(0), &set, &set, true, &Budget::default()).unwrap();
        assert_eq!(r.exact_count, 5); // v=0 row gives 3, plus one zero per v != 0
    }

    #[test]
    fn histogram_conserves_mass() {
        let f = Field::extension(3, 2).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let v = VecSet::random(&f, 2, 0.5, 3).unwrap();
        let u = VecSet::random(&f, 2, 0.7, 4).unwrap();
        let hist = pair_histogram(&f, &form, &v, &u, &Budget::default()).unwrap();
        assert_eq!(hist.total(), v.len() as u64 * u.len() as u64);
    }

    #[test]
    fn variance_examples() {
        // V = F_q^d: only v = 0 deviates, by q^(d-1); sum = q^(2d-2).
        let (f, form) = setup(5, 2);
        let full = VecSet::full(&f, 2).unwrap();
        let r = variance_sum(&f, &form, Fe(2), &full, false, &Budget::default()).unwrap();
        assert_eq!(r.value, 25.0);
        assert!(r.bound_satisfied);

        // F_3, d=1, dot, lambda=1, V = {0,1,2}: only the v=0 term, (0-1)^2.
        let (f3, form1) = setup(3, 1);
        let v = VecSet::full(&f3, 1).unwrap();
        let r = variance_sum(&f3, &form1, Fe(1), &v, false, &Budget::default()).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn r_identity_tiny_example() {
        // F_2, d=1, V={1}, lambda=1: R1 = (q-1) q^d |V| = 2.
        let (f, form) = setup(2, 1);
        let v = VecSet::from_codes(&f, 1, vec![1]).unwrap();
        let r = r_identities(&f, &form, Fe(1), &v, false, &Budget::default()).unwrap();
        assert!((r.r1 - 2.0).abs() < 1e-9);
        assert_eq!(r.r1_expected, 2);
        assert!(r.r1_matches);
        // q = 2: the s != s' region is empty.
        assert_eq!(r.r2, 0.0);
        assert_eq!(r.r2_lower, 0);
        assert!(r.r2_above_lower);
        assert!(r.cross_ok);
    }

    #[test]
    fn two_eq_examples() {
        // Full spaces: each a != 0 contributes q^(d-1) * q^(d-1).
        let (f, form) = setup(3, 2);
        let full = VecSet::full(&f, 2).unwrap();
        let r = count_two_eq_three_var(
            &f, &form, Fe(1), Fe(2), &full, &full, &full, false, &Budget::default(),
        )
        .unwrap();
        assert_eq!(r.exact_count, (9 - 1) * 9); // (q^d - 1) q^(2d-2)
        assert_eq!(r.bound_satisfied, Some(true));

        // F_3, d=1, A=B=C={1,2}, lambda1=lambda2=1: a=1 -> (1,1); a=2 -> (2,2).
        let (f1, form1) = setup(3, 1);
        let s = VecSet::from_codes(&f1, 1, vec![1, 2]).unwrap();
        let r = count_two_eq_three_var(
            &f1, &form1, Fe(1), Fe(1), &s, &s, &s, false, &Budget::default(),
        )
        .unwrap();
        assert_eq!(r.exact_count, 2);
    }

    #[test]
    fn worker_count_does_not_change_reports() {
        let f = Field::prime(7).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let v = VecSet::random(&f, 2, 0.6, 10).unwrap();
        let u = VecSet::random(&f, 2, 0.6, 11).unwrap();
        let one = count_pairs(&f, &form, Fe(3), &v, &u, false, &Budget::default()).unwrap();
        for workers in [2, 3, 5] {
            let multi =
                count_pairs(&f, &form, Fe(3), &v, &u, false, &Budget::with_workers(workers))
                    .unwrap();
            assert_eq!(one.exact_count, multi.exact_count);
            assert_eq!(one.deviation.to_bits(), multi.deviation.to_bits());
        }
    }

    #[test]
    fn guardrail_applies() {
        let (f, form) = setup(5, 2);
        let full = VecSet::full(&f, 2).unwrap();
        let tiny = Budget { max_ops: 10, workers: 1 };
        assert!(matches!(
            count_pairs(&f, &form, Fe(1), &full, &full, false, &tiny),
            Err(Error::TooLarge { .. })
        ));
    }
}
