//! Exact solution counting for bilinear equations and certification of the
//! counting bounds.
//!
//! Every counter computes its deviation from the main term in exact integer
//! arithmetic (clearing denominators) and decides strict bounds by comparing
//! squared integers, so pass/fail never hinges on float rounding. The f64
//! fields in reports are derived views for output.

mod pairs;
mod system;
mod triples;

pub use pairs::{
    count_pairs, count_two_eq_three_var, pair_histogram, r_identities, variance_sum,
    RIdentityReport, VarianceReport,
};
pub use system::{count_system, EquationSystem, SetFamily, SystemEdge};
pub use triples::{solvable_triples, value_set_bound, TripleScan, ValueSetReport};

use serde::Serialize;

/// Exact count vs. main term, with the applicable error bound when the
/// underlying statement provides one.
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub q: u64,
    pub d: usize,
    pub set_sizes: Vec<u64>,
    pub exact_count: u128,
    pub main_term: f64,
    /// `None` for counters whose statement has no explicit error constant.
    pub error_bound: Option<f64>,
    pub deviation: f64,
    /// deviation / main_term; `None` when the main term is zero.
    pub relative_deviation: Option<f64>,
    /// Exact-integer verdict `deviation <= / < error_bound`; `None` when no
    /// bound applies.
    pub bound_satisfied: Option<bool>,
}

impl CountReport {
    pub const CSV_HEADER: &'static str =
        "q,d,sizes,exact,main,bound,deviation,relative_deviation,pass";

    pub fn csv_row(&self) -> String {
        let sizes = self
            .set_sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{:.6},{},{:.6},{},{}",
            self.q,
            self.d,
            sizes,
            self.exact_count,
            self.main_term,
            self.error_bound.map_or_else(|| "".into(), |b| format!("{b:.6}")),
            self.deviation,
            self.relative_deviation
                .map_or_else(|| "".into(), |r| format!("{r:.6}")),
            self.bound_satisfied.map_or_else(|| "".into(), |b| b.to_string()),
        )
    }
}

/// Dense for small q, sorted-map otherwise; merges are elementwise integer
/// sums so parallel partials combine deterministically.
#[derive(Debug, Clone)]
pub enum Histogram {
    Dense(Vec<u64>),
    Sparse(std::collections::BTreeMap<u32, u64>),
}

const DENSE_HISTOGRAM_LIMIT: u64 = 1 << 22;

impl Histogram {
    pub(crate) fn new(q: u64) -> Self {
        if q <= DENSE_HISTOGRAM_LIMIT {
            Histogram::Dense(vec![0; q as usize])
        } else {
            Histogram::Sparse(Default::default())
        }
    }

    #[inline]
    pub(crate) fn bump(&mut self, idx: u32) {
        match self {
            Histogram::Dense(v) => v[idx as usize] += 1,
            Histogram::Sparse(m) => *m.entry(idx).or_insert(0) += 1,
        }
    }

    pub fn get(&self, idx: u32) -> u64 {
        match self {
            Histogram::Dense(v) => v.get(idx as usize).copied().unwrap_or(0),
            Histogram::Sparse(m) => m.get(&idx).copied().unwrap_or(0),
        }
    }

    pub fn total(&self) -> u64 {
        match self {
            Histogram::Dense(v) => v.iter().sum(),
            Histogram::Sparse(m) => m.values().sum(),
        }
    }

    pub(crate) fn merge(&mut self, other: Histogram) {
        match (self, other) {
            (Histogram::Dense(a), Histogram::Dense(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            (Histogram::Sparse(a), Histogram::Sparse(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            _ => unreachable!("histogram variants are fixed by q"),
        }
    }

    /// Nonzero entries in ascending index order.
    pub fn nonzero(&self) -> Vec<(u32, u64)> {
        match self {
            Histogram::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i as u32, c))
                .collect(),
            Histogram::Sparse(m) => m.iter().map(|(&k, &v)| (k, v)).collect(),
        }
    }
}

/// Strict comparison `dev < sqrt(bound_sq)` on integers: squares never lie,
/// and an overflowing square is certainly past any in-range bound.
pub(crate) fn strict_sqrt_bound(dev: u128, bound_sq: u128) -> bool {
    match dev.checked_mul(dev) {
        Some(sq) => sq < bound_sq,
        None => false,
    }
}
