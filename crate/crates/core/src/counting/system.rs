//! General systems B(a_i, a_j) = lambda_ij on a constraint graph, counted by
//! exact backtracking.

use serde::Serialize;

use super::CountReport;
use crate::bilinear::{decode_vector, BilinearForm, VecSet};
use crate::error::{Error, Result};
use crate::exec::Budget;
use crate::field::{Fe, Field};

/// One equation B(a_i, a_j) = lambda; orientation matters because B need not
/// be symmetric. Canonical input form has i < j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SystemEdge {
    pub i: usize,
    pub j: usize,
    pub lambda: Fe,
}

/// A constraint graph on k variables (0-based labels).
#[derive(Debug, Clone, Serialize)]
pub struct EquationSystem {
    k: usize,
    edges: Vec<SystemEdge>,
}

impl EquationSystem {
    /// Validates labels, forbids duplicate unordered pairs and zero targets.
    pub fn new(k: usize, edges: Vec<SystemEdge>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &edges {
            if e.i >= k || e.j >= k || e.i == e.j {
                return Err(Error::InvalidEdge { i: e.i, j: e.j });
            }
            if e.lambda.is_zero() {
                return Err(Error::ZeroLambda);
            }
            let key = (e.i.min(e.j), e.i.max(e.j));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge { i: key.0, j: key.1 });
            }
        }
        Ok(EquationSystem { k, edges })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[SystemEdge] {
        &self.edges
    }

    /// Number of equations.
    pub fn l(&self) -> usize {
        self.edges.len()
    }

    /// Maximum vertex degree in the constraint graph.
    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.k];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }

    /// Relabels variables through a permutation (variable i becomes perm[i]),
    /// keeping every edge's orientation.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: perm.len() });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| SystemEdge { i: perm[e.i], j: perm[e.j], lambda: e.lambda })
            .collect();
        EquationSystem::new(self.k, edges)
    }
}

/// The per-variable candidate sets A_1..A_k.
#[derive(Debug, Clone)]
pub struct SetFamily {
    sets: Vec<VecSet>,
}

impl SetFamily {
    pub fn new(sets: Vec<VecSet>) -> Result<Self> {
        let d = sets.first().map(|s| s.d()).unwrap_or(1);
        for s in &sets {
            if s.d() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.d() });
            }
            if s.is_empty() {
                return Err(Error::EmptySet);
            }
        }
        Ok(SetFamily { sets })
    }

    pub fn sets(&self) -> &[VecSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.sets.len() {
            return Err(Error::ArityMismatch { expected: self.sets.len(), got: perm.len() });
        }
        let mut sets = vec![VecSet::empty(1); self.sets.len()];
        for (old, &new) in perm.iter().enumerate() {
            sets[new] = self.sets[old].clone();
        }
        SetFamily::new(sets)
    }
}

/// Exact solution count by backtracking, variables ordered by descending
/// constraint degree (ties by smaller label) so violated edges prune early.
/// The main term is q^(-l) * prod |A_i|; no error bound is asserted because
/// the general statement carries no explicit constant, so the report only
/// records the relative deviation.
pub fn count_system(
    field: &Field,
    form: &BilinearForm,
    system: &EquationSystem,
    family: &SetFamily,
    budget: &Budget,
) -> Result<CountReport> {
    let k = system.k();
    if family.len() != k {
        return Err(Error::ArityMismatch { expected: k, got: family.len() });
    }
    let d = form.d();
    for s in family.sets() {
        if s.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.d() });
        }
    }

    // Order: degree desc, label asc. Unconstrained variables sink to the end
    // and are folded in as a single product factor.
    let degrees = system.degrees();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(degrees[v]), v));
    let first_free = order.iter().position(|&v| degrees[v] == 0).unwrap_or(k);
    let mut free_factor: u128 = 1;
    for &v in &order[first_free..] {
        free_factor = free_factor
            .checked_mul(family.sets()[v].len() as u128)
            .ok_or(Error::TooLarge { needed: u128::MAX, limit: budget.max_ops })?;
    }
    let ordered: &[usize] = &order[..first_free];
    let pos_of: Vec<usize> = {
        let mut p = vec![usize::MAX; k];
        for (pos, &v) in ordered.iter().enumerate() {
            p[v] = pos;
        }
        p
    };

    // For each position, the edges into already-assigned positions.
    // (earlier_pos, this_var_is_left_side, lambda)
    let mut checks: Vec<Vec<(usize, bool, Fe)>> = vec![Vec::new(); ordered.len()];
    for e in system.edges() {
        let (pi, pj) = (pos_of[e.i], pos_of[e.j]);
        if pi < pj {
            checks[pj].push((pi, false, e.lambda)); // B(assigned_i, new_j)
        } else {
            checks[pi].push((pj, true, e.lambda)); // B(new_i, assigned_j)
        }
    }

    // Pre-decode candidates and their left action through the form.
    let candidate_coords: Vec<Vec<Vec<Fe>>> = ordered
        .iter()
        .map(|&v| {
            family.sets()[v]
                .codes()
                .iter()
                .map(|&c| decode_vector(field, d, c))
                .collect()
        })
        .collect();
    let candidate_lefts: Vec<Vec<Vec<Fe>>> = candidate_coords
        .iter()
        .map(|cands| cands.iter().map(|v| form.left_vector(field, v)).collect())
        .collect();

    struct Search<'a> {
        field: &'a Field,
        checks: &'a [Vec<(usize, bool, Fe)>],
        coords: &'a [Vec<Vec<Fe>>],
        lefts: &'a [Vec<Vec<Fe>>],
        chosen: Vec<usize>,
        visited: u64,
        max_ops: u64,
    }

    impl Search<'_> {
        fn run(&mut self, pos: usize) -> Result<u128> {
            if pos == self.coords.len() {
                return Ok(1);
            }
            let mut total: u128 = 0;
            for cand in 0..self.coords[pos].len() {
                self.visited += 1;
                if self.visited > self.max_ops {
                    return Err(Error::TooLarge {
                        needed: u128::from(self.visited),
                        limit: self.max_ops,
                    });
                }
                let ok = self.checks[pos].iter().all(|&(earlier, new_is_left, lambda)| {
                    let other = self.chosen[earlier];
                    let value = if new_is_left {
                        dot(self.field, &self.lefts[pos][cand], &self.coords[earlier][other])
                    } else {
                        dot(self.field, &self.lefts[earlier][other], &self.coords[pos][cand])
                    };
                    value == lambda
                });
                if ok {
                    self.chosen[pos] = cand;
                    total += self.run(pos + 1)?;
                }
            }
            Ok(total)
        }
    }

    fn dot(field: &Field, w: &[Fe], y: &[Fe]) -> Fe {
        let mut acc = Fe::ZERO;
        for (&wi, &yi) in w.iter().zip(y) {
            acc = field.add(acc, field.mul(wi, yi));
        }
        acc
    }

    let mut search = Search {
        field,
        checks: &checks,
        coords: &candidate_coords,
        lefts: &candidate_lefts,
        chosen: vec![0; ordered.len()],
        visited: 0,
        max_ops: budget.max_ops,
    };
    let constrained = search.run(0)?;
    let exact = constrained
        .checked_mul(free_factor)
        .ok_or(Error::TooLarge { needed: u128::MAX, limit: budget.max_ops })?;

    let q = field.q();
    let sizes: Vec<u64> = family.sets().iter().map(|s| s.len() as u64).collect();
    let main_term =
        sizes.iter().map(|&s| s as f64).product::<f64>() / (q as f64).powi(system.l() as i32);
    let deviation = (exact as f64 - main_term).abs();
    Ok(CountReport {
        q,
        d,
        set_sizes: sizes,
        exact_count: exact,
        main_term,
        error_bound: None,
        deviation,
        relative_deviation: if main_term > 0.0 { Some(deviation / main_term) } else { None },
        bound_satisfied: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count_pairs, count_two_eq_three_var};

    fn edge(i: usize, j: usize, lambda: u32) -> SystemEdge {
        SystemEdge { i, j, lambda: Fe(lambda) }
    }

    #[test]
    fn system_validation() {
        assert!(EquationSystem::new(3, vec![edge(0, 1, 1), edge(0, 2, 2)]).is_ok());
        assert!(matches!(
            EquationSystem::new(2, vec![edge(0, 1, 0)]),
            Err(Error::ZeroLambda)
        ));
        assert!(matches!(
            EquationSystem::new(2, vec![edge(0, 1, 1), edge(1, 0, 2)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            EquationSystem::new(2, vec![edge(0, 2, 1)]),
            Err(Error::InvalidEdge { .. })
        ));
        let sys = EquationSystem::new(4, vec![edge(0, 1, 1), edge(0, 2, 1), edge(0, 3, 1)]).unwrap();
        assert_eq!(sys.l(), 3);
        assert_eq!(sys.max_degree(), 3);
    }

    #[test]
    fn empty_system_counts_product() {
        let f = Field::prime(5).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let sys = EquationSystem::new(3, vec![]).unwrap();
        let sets = SetFamily::new(vec![
            VecSet::random(&f, 2, 0.5, 1).unwrap(),
            VecSet::random(&f, 2, 0.5, 2).unwrap(),
            VecSet::random(&f, 2, 0.5, 3).unwrap(),
        ])
        .unwrap();
        let expected: u128 = sets.sets().iter().map(|s| s.len() as u128).product();
        let r = count_system(&f, &form, &sys, &sets, &Budget::default()).unwrap();
        assert_eq!(r.exact_count, expected);
        assert!(r.error_bound.is_none() && r.bound_satisfied.is_none());
    }

    #[test]
    fn single_edge_matches_count_pairs() {
        let f = Field::prime(7).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let v = VecSet::random(&f, 2, 0.6, 21).unwrap();
        let u = VecSet::random(&f, 2, 0.6, 22).unwrap();
        let sys = EquationSystem::new(2, vec![edge(0, 1, 3)]).unwrap();
        let fam = SetFamily::new(vec![v.clone(), u.clone()]).unwrap();
        let a = count_system(&f, &form, &sys, &fam, &Budget::default()).unwrap();
        let b = count_pairs(&f, &form, Fe(3), &v, &u, false, &Budget::default()).unwrap();
        assert_eq!(a.exact_count, b.exact_count);
    }

    #[test]
    fn two_edges_match_dedicated_counter() {
        let f = Field::prime(5).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let a = VecSet::random(&f, 2, 0.5, 31).unwrap();
        let b = VecSet::random(&f, 2, 0.5, 32).unwrap();
        let c = VecSet::random(&f, 2, 0.5, 33).unwrap();
        let sys = EquationSystem::new(3, vec![edge(0, 1, 1), edge(0, 2, 4)]).unwrap();
        let fam = SetFamily::new(vec![a.clone(), b.clone(), c.clone()]).unwrap();
        let via_system = count_system(&f, &form, &sys, &fam, &Budget::default()).unwrap();
        let direct = count_two_eq_three_var(
            &f, &form, Fe(1), Fe(4), &a, &b, &c, false, &Budget::default(),
        )
        .unwrap();
        assert_eq!(via_system.exact_count, direct.exact_count);
    }

    #[test]
    fn relabeling_is_invariant() {
        let f = Field::prime(3).unwrap();
        let form = BilinearForm::new(&f, 2, vec![Fe(1), Fe(2), Fe(0), Fe(1)]).unwrap();
        let sys = EquationSystem::new(3, vec![edge(0, 1, 1), edge(1, 2, 2), edge(0, 2, 1)]).unwrap();
        let fam = SetFamily::new(vec![
            VecSet::random(&f, 2, 0.7, 41).unwrap(),
            VecSet::random(&f, 2, 0.7, 42).unwrap(),
            VecSet::random(&f, 2, 0.7, 43).unwrap(),
        ])
        .unwrap();
        let base = count_system(&f, &form, &sys, &fam, &Budget::default()).unwrap();
        for perm in [[1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0]] {
            let sys2 = sys.relabel(&perm).unwrap();
            let fam2 = fam.permuted(&perm).unwrap();
            let r = count_system(&f, &form, &sys2, &fam2, &Budget::default()).unwrap();
            assert_eq!(base.exact_count, r.exact_count);
        }
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let f = Field::prime(3).unwrap();
        let form = BilinearForm::dot(&f, 1).unwrap();
        let sys = EquationSystem::new(3, vec![edge(0, 1, 1)]).unwrap();
        let fam = SetFamily::new(vec![VecSet::full(&f, 1).unwrap()]).unwrap();
        assert!(matches!(
            count_system(&f, &form, &sys, &fam, &Budget::default()),
            Err(Error::ArityMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn backtracking_guardrail() {
        let f = Field::prime(5).unwrap();
        let form = BilinearForm::dot(&f, 2).unwrap();
        let sys = EquationSystem::new(2, vec![edge(0, 1, 1)]).unwrap();
        let fam = SetFamily::new(vec![
            VecSet::full(&f, 2).unwrap(),
            VecSet::full(&f, 2).unwrap(),
        ])
        .unwrap();
        let tiny = Budget { max_ops: 5, workers: 1 };
        assert!(matches!(
            count_system(&f, &form, &sys, &fam, &tiny),
            Err(Error::TooLarge { .. })
        ));
    }
}
