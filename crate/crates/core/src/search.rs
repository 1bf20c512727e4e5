//! Bounded exhaustive sweeps over weight matrices.
//!
//! Candidates are generated directly in canonical form: each row's weights are
//! non-increasing and the rows form a non-decreasing sequence of row types. A shard is
//! the set of candidates sharing the first row type, so shards are independent and the
//! merged result does not depend on how many worker threads ran them.
//!
//! Every candidate first goes through an exact-rational pre-filter: a rigid matrix takes
//! its constant value at every non-pole point, so disagreeing at any sample point is a
//! proof of non-rigidity. Survivors get the symbolic check.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{rational_pow, BivarPoly};
use crate::bott::{classify_two_fixed_points, kosniowski_bound, ClassLabel};
use crate::rigidity::{
    candidate_constant, check, l_candidate_constant, normalize_signs_for_l, pair_partition,
    quasilinear, t_series, Mode, RigidityVerdict, Row, Sign, WeightMatrix,
};

pub const DEFAULT_MAX_ENUMERATIONS: u64 = 10_000_000;
pub const DEFAULT_MAX_EXACT_CHECKS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid search spec: {0}")]
    InvalidSpec(String),
    #[error("quasilinearity needs m = n + 1, got m = {m}, n = {n}")]
    WrongShape { m: usize, n: usize },
    #[error("budget exceeded after {} candidates ({} exact checks); partial results kept", .partial.stats.enumerated, .partial.stats.exact_checks)]
    BudgetExceeded { partial: Box<SearchReport> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignPolicy {
    /// Every assignment of row signs.
    All,
    /// Only candidates with exactly this many `+` rows (the rest `-`).
    Fixed { plus: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_enumerations: u64,
    pub max_exact_checks: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_enumerations: DEFAULT_MAX_ENUMERATIONS,
            max_exact_checks: DEFAULT_MAX_EXACT_CHECKS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub m: usize,
    pub n: usize,
    /// Largest admissible `|w_ij|`.
    pub bound: i64,
    pub mode: Mode,
    pub sign_policy: SignPolicy,
    /// Generate canonical representatives only. When false every ordered matrix is
    /// enumerated and finds are deduplicated by canonical form afterwards.
    pub canonicalize: bool,
    pub budget: Budget,
}

impl SearchSpec {
    pub fn new(m: usize, n: usize, bound: i64, mode: Mode) -> Self {
        Self {
            m,
            n,
            bound,
            mode,
            sign_policy: SignPolicy::All,
            canonicalize: true,
            budget: Budget::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.m == 0 || self.n == 0 || self.bound < 1 {
            return Err(SearchError::InvalidSpec(format!(
                "need m >= 1, n >= 1, bound >= 1 (got m = {}, n = {}, bound = {})",
                self.m, self.n, self.bound
            )));
        }
        if let SignPolicy::Fixed { plus } = self.sign_policy {
            if plus > self.m {
                return Err(SearchError::InvalidSpec(format!(
                    "{plus} plus signs for {} rows",
                    self.m
                )));
            }
        }
        Ok(())
    }
}

/// Structural annotation of a rigid find.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    /// Two fixed points; carries the family label.
    Class(ClassLabel),
    /// Quasilinear (up to global sign) with this seed.
    Quasilinear(Vec<i64>),
    /// Rows split into identical pairs with opposite signs.
    CancellingPairs,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Find {
    pub matrix: WeightMatrix,
    pub constant: BivarPoly,
    pub tag: Tag,
    /// `m >= floor(n/2) + 1`, or the constant is zero.
    pub kosniowski_ok: bool,
    pub pairable: bool,
}

impl Find {
    /// In `L` mode with `m <= n + 1` and `L != 0`: does the find break `m = n + 1, |L| = 1`?
    pub fn l_nonzero_anomaly(&self, mode: Mode) -> bool {
        if mode != Mode::L || self.constant.is_zero() {
            return false;
        }
        let (m, n) = (self.matrix.m(), self.matrix.n());
        let l = self
            .constant
            .as_constant()
            .expect("L constants are integers");
        m <= n + 1 && (m < n + 1 || !l.abs().is_one())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub enumerated: u64,
    pub prefilter_rejected: u64,
    pub exact_checks: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub spec: SearchSpec,
    pub found: Vec<Find>,
    pub stats: SearchStats,
}

impl SearchReport {
    pub fn kosniowski_violations(&self) -> impl Iterator<Item = &Find> {
        self.found.iter().filter(|f| !f.kosniowski_ok)
    }

    pub fn unpairable(&self) -> impl Iterator<Item = &Find> {
        self.found.iter().filter(|f| !f.pairable)
    }

    pub fn l_nonzero_anomalies(&self) -> impl Iterator<Item = &Find> {
        let mode = self.spec.mode;
        self.found.iter().filter(move |f| f.l_nonzero_anomaly(mode))
    }
}

/// In `L` mode signs are first pushed onto the rows; then weights are sorted descending
/// within each row and rows sorted ascending by `(weights, sign)`.
pub fn canonical_form(w: &WeightMatrix, mode: Mode) -> WeightMatrix {
    let base = match mode {
        Mode::T => w.clone(),
        Mode::L => normalize_signs_for_l(w),
    };
    let mut rows: Vec<Row> = base
        .rows()
        .iter()
        .map(|r| {
            let mut ws = r.weights.clone();
            ws.sort_unstable_by(|a, b| b.cmp(a));
            Row::new(ws, r.sign)
        })
        .collect();
    rows.sort();
    WeightMatrix::from_rows_unchecked(rows)
}

/// The admissible weight values for a mode: `+-1..=bound` for `T`, `1..=bound` for `L`.
fn weight_values(bound: i64, mode: Mode) -> Vec<i64> {
    match mode {
        Mode::T => (-bound..=-1).chain(1..=bound).collect(),
        Mode::L => (1..=bound).collect(),
    }
}

/// Non-increasing `n`-tuples over `values`.
fn sorted_tuples(values: &[i64], n: usize) -> Vec<Vec<i64>> {
    fn go(values: &[i64], n: usize, max_idx: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in (0..=max_idx).rev() {
            cur.push(values[i]);
            go(values, n, i, cur, out);
            cur.pop();
        }
    }
    let mut asc = values.to_vec();
    asc.sort_unstable();
    let mut out = Vec::new();
    if !asc.is_empty() {
        go(&asc, n, asc.len() - 1, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// All `n`-tuples over `values` in any order.
fn all_tuples(values: &[i64], n: usize) -> Vec<Vec<i64>> {
    (0..n).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

/// Row types in canonical order.
fn row_types(spec: &SearchSpec) -> Vec<Row> {
    let values = weight_values(spec.bound, spec.mode);
    let tuples = if spec.canonicalize {
        sorted_tuples(&values, spec.n)
    } else {
        all_tuples(&values, spec.n)
    };
    let mut rows: Vec<Row> = tuples
        .into_iter()
        .flat_map(|w| [Row::new(w.clone(), Sign::Minus), Row::new(w, Sign::Plus)])
        .collect();
    rows.sort();
    rows
}

/// Sample points of the pre-filter, as `(z, x, y)`.
fn prefilter_points(mode: Mode) -> Vec<(BigRational, BigRational, BigRational)> {
    let xy: &[(i64, i64)] = match mode {
        Mode::T => &[(1, 1), (2, 1)],
        Mode::L => &[(1, 1)],
    };
    let q = |v: i64| BigRational::from_integer(v.into());
    [2i64, 3]
        .iter()
        .flat_map(|z| xy.iter().map(move |(x, y)| (q(*z), q(*x), q(*y))))
        .collect()
}

/// Exact pre-filter on a single matrix: the series must agree with its only possible
/// constant at every sample point. Never rejects a rigid matrix.
pub fn passes_prefilter(w: &WeightMatrix, mode: Mode) -> bool {
    let series = t_series(w);
    let constant = match mode {
        Mode::T => candidate_constant(w),
        Mode::L => BivarPoly::constant(l_candidate_constant(w)),
    };
    prefilter_points(mode).iter().all(|(z, x, y)| {
        series.eval(z, x, y).expect("z in {2, 3} is never a pole") == constant.eval(x, y)
    })
}

/// Per-row-type residuals `eps * (prod_j f(w_j) - x^{s+} (-y)^{s-})` at every sample point.
/// A candidate passes iff its rows' residuals sum to zero at each point.
struct RowResiduals {
    values: Vec<Vec<BigRational>>,
}

impl RowResiduals {
    fn new(rows: &[Row], mode: Mode) -> Self {
        let points = prefilter_points(mode);
        let values = rows
            .iter()
            .map(|row| {
                points
                    .iter()
                    .map(|(z, x, y)| {
                        let mut prod = BigRational::one();
                        for &w in &row.weights {
                            let zw = rational_pow(z, w);
                            prod *= (x * &zw + y) / (zw - BigRational::one());
                        }
                        let limit = rational_pow(x, row.positives() as i64)
                            * rational_pow(&-y, row.negatives() as i64);
                        (prod - limit) * BigRational::from_integer(row.sign.value().into())
                    })
                    .collect()
            })
            .collect();
        Self { values }
    }

    fn passes(&self, idx: &[usize]) -> bool {
        let npts = self.values.first().map_or(0, Vec::len);
        (0..npts).all(|p| {
            let mut acc = BigRational::zero();
            for &i in idx {
                acc += &self.values[i][p];
            }
            acc.is_zero()
        })
    }
}

/// Every candidate of a spec, in enumeration order. Intended for audits and small specs.
pub fn enumerate_candidates(spec: &SearchSpec) -> Result<Vec<WeightMatrix>, SearchError> {
    spec.validate()?;
    let rows = row_types(spec);
    let mut out = Vec::new();
    for first in 0..rows.len() {
        for_each_in_shard(spec, rows.len(), first, |idx| {
            if sign_ok(spec, &rows, idx) {
                out.push(assemble(&rows, idx));
            }
            true
        });
    }
    Ok(out)
}

fn assemble(rows: &[Row], idx: &[usize]) -> WeightMatrix {
    WeightMatrix::from_rows_unchecked(idx.iter().map(|i| rows[*i].clone()).collect())
}

fn sign_ok(spec: &SearchSpec, rows: &[Row], idx: &[usize]) -> bool {
    match spec.sign_policy {
        SignPolicy::All => true,
        SignPolicy::Fixed { plus } => {
            idx.iter().filter(|i| rows[**i].sign == Sign::Plus).count() == plus
        }
    }
}

/// Visits all index sequences starting with `first`: non-decreasing when canonicalizing,
/// unrestricted otherwise. The visitor returns `false` to stop early.
fn for_each_in_shard(
    spec: &SearchSpec,
    nrows: usize,
    first: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) {
    fn go(
        m: usize,
        nrows: usize,
        canonical: bool,
        cur: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == m {
            return visit(cur);
        }
        let start = if canonical {
            *cur.last().expect("first index pushed")
        } else {
            0
        };
        for i in start..nrows {
            cur.push(i);
            let keep_going = go(m, nrows, canonical, cur, visit);
            cur.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
    let mut cur = Vec::with_capacity(spec.m);
    cur.push(first);
    go(spec.m, nrows, spec.canonicalize, &mut cur, &mut visit);
}

struct ShardResult {
    found: Vec<Find>,
    enumerated: u64,
    rejected: u64,
    exact_checks: u64,
    truncated: bool,
}

fn run_shard(
    spec: &SearchSpec,
    rows: &[Row],
    residuals: &RowResiduals,
    first: usize,
) -> ShardResult {
    let mut res = ShardResult {
        found: Vec::new(),
        enumerated: 0,
        rejected: 0,
        exact_checks: 0,
        truncated: false,
    };
    for_each_in_shard(spec, rows.len(), first, |idx| {
        if !sign_ok(spec, rows, idx) {
            return true;
        }
        if res.enumerated >= spec.budget.max_enumerations
            || res.exact_checks >= spec.budget.max_exact_checks
        {
            res.truncated = true;
            return false;
        }
        res.enumerated += 1;
        if !residuals.passes(idx) {
            res.rejected += 1;
            return true;
        }
        res.exact_checks += 1;
        let w = assemble(rows, idx);
        if let RigidityVerdict::Rigid(constant) = check(&w, spec.mode) {
            res.found
                .push(annotate(canonical_form(&w, spec.mode), constant, spec.mode));
        }
        true
    });
    res
}

fn cancelling_pairs(w: &WeightMatrix) -> bool {
    let mut rows: Vec<&Row> = w.rows().iter().collect();
    while let Some(r) = rows.pop() {
        let mut key = r.weights.clone();
        key.sort_unstable();
        let partner = rows.iter().position(|o| {
            let mut k = o.weights.clone();
            k.sort_unstable();
            k == key && o.sign != r.sign
        });
        match partner {
            Some(p) => {
                rows.swap_remove(p);
            }
            None => return false,
        }
    }
    true
}

fn annotate(matrix: WeightMatrix, constant: BivarPoly, mode: Mode) -> Find {
    let (m, n) = (matrix.m(), matrix.n());
    let tag = if m == 2 {
        Tag::Class(classify_two_fixed_points(&matrix).expect("m = 2"))
    } else if let Some(seed) = (m == n + 1)
        .then(|| quasilinearity_test_in(&matrix, mode).ok().flatten())
        .flatten()
    {
        Tag::Quasilinear(seed)
    } else if cancelling_pairs(&matrix) {
        Tag::CancellingPairs
    } else {
        Tag::Other
    };
    let kosniowski_ok = constant.is_zero() || m >= kosniowski_bound(n);
    let pairable = pair_partition(&normalize_signs_for_l(&matrix)).is_some();
    Find {
        matrix,
        constant,
        tag,
        kosniowski_ok,
        pairable,
    }
}

/// Runs `spec` on `threads` worker threads (`0` = rayon's default).
pub fn sweep(spec: &SearchSpec, threads: usize) -> Result<SearchReport, SearchError> {
    spec.validate()?;
    let started = Instant::now();
    let rows = row_types(spec);
    let residuals = RowResiduals::new(&rows, spec.mode);

    let run = || -> Vec<ShardResult> {
        (0..rows.len())
            .into_par_iter()
            .map(|first| run_shard(spec, &rows, &residuals, first))
            .collect()
    };
    let shards = if threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| SearchError::InvalidSpec(format!("thread pool: {e}")))?
            .install(run)
    };

    let mut stats = SearchStats::default();
    let mut found = Vec::new();
    let mut exceeded = false;
    for shard in shards {
        let enumerated = stats.enumerated + shard.enumerated;
        let checks = stats.exact_checks + shard.exact_checks;
        if shard.truncated
            || enumerated > spec.budget.max_enumerations
            || checks > spec.budget.max_exact_checks
        {
            exceeded = true;
            break;
        }
        stats.enumerated = enumerated;
        stats.exact_checks = checks;
        stats.prefilter_rejected += shard.rejected;
        found.extend(shard.found);
    }
    found.sort_by(|a, b| a.matrix.cmp(&b.matrix));
    found.dedup_by(|a, b| a.matrix == b.matrix);
    stats.wall_time = started.elapsed();

    let report = SearchReport {
        spec: spec.clone(),
        found,
        stats,
    };
    if exceeded {
        Err(SearchError::BudgetExceeded {
            partial: Box::new(report),
        })
    } else {
        Ok(report)
    }
}

fn normalize_seed(mut a: Vec<i64>) -> Vec<i64> {
    a.sort_unstable();
    let min = a[0];
    a.iter_mut().for_each(|v| *v -= min);
    a
}

/// Recovers a seed `a` (sorted, `a_1 = 0`) whose quasilinear matrix has the same rows as
/// `w` up to row and column order. All signs of `w` must agree; a uniformly negative
/// matrix counts as the negated quasilinear set.
pub fn quasilinearity_test(w: &WeightMatrix) -> Result<Option<Vec<i64>>, SearchError> {
    quasilinearity_test_in(w, Mode::T)
}

/// Like [`quasilinearity_test`], but in `L` mode equality is taken after pushing weight
/// signs onto row signs, so any matrix with the same `x = y = 1` data and the same
/// canonical shape as `+-quasilinear(a)` qualifies.
pub fn quasilinearity_test_in(
    w: &WeightMatrix,
    mode: Mode,
) -> Result<Option<Vec<i64>>, SearchError> {
    let (m, n) = (w.m(), w.n());
    if m != n + 1 {
        return Err(SearchError::WrongShape { m, n });
    }
    let target = canonical_form(w, mode);
    let target_neg = canonical_form(&w.negated(), mode);
    for row in w.rows() {
        // In T mode this row is taken as a_r = 0, so a_j = -w_rj. In L mode weights are
        // magnitudes and the row is taken as the minimum, so a_j = |w_rj|.
        let mut seed: Vec<i64> = row
            .weights
            .iter()
            .map(|v| match mode {
                Mode::T => -v,
                Mode::L => v.abs(),
            })
            .collect();
        seed.push(0);
        let Ok(q) = quasilinear(&seed) else { continue };
        let candidate = canonical_form(&q, mode);
        if candidate == target || candidate == target_neg {
            return Ok(Some(normalize_seed(seed)));
        }
    }
    Ok(None)
}

/// A solution `(a, b, c)` of `L(a) + L(b) - L(c) = 1` for rows of positive weights.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Problem24Solution {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub c: Vec<i64>,
}

impl Problem24Solution {
    pub fn matrix(&self) -> WeightMatrix {
        WeightMatrix::from_rows([
            (self.a.clone(), Sign::Plus),
            (self.b.clone(), Sign::Plus),
            (self.c.clone(), Sign::Minus),
        ])
        .expect("positive weights")
    }
}

/// All canonical `(a, b, c)` with entries in `1..=bound`, each list ascending and
/// `a <= b`, for which the three-row `L` identity with right-hand side `1` holds exactly.
pub fn problem_2_4_search(n: usize, bound: i64) -> Result<Vec<Problem24Solution>, SearchError> {
    if n == 0 || bound < 1 {
        return Err(SearchError::InvalidSpec(format!(
            "need n >= 1 and bound >= 1 (got n = {n}, bound = {bound})"
        )));
    }
    let mut lists = sorted_tuples(&(1..=bound).collect::<Vec<_>>(), n);
    lists.iter_mut().for_each(|l| l.reverse());
    lists.sort();

    // L values of single rows at the pre-filter points
    let points = prefilter_points(Mode::L);
    let values: Vec<Vec<BigRational>> = lists
        .iter()
        .map(|l| {
            points
                .iter()
                .map(|(z, _, _)| {
                    l.iter()
                        .map(|w| {
                            let zw = rational_pow(z, *w);
                            (&zw + BigRational::one()) / (zw - BigRational::one())
                        })
                        .product()
                })
                .collect()
        })
        .collect();

    let one = BigRational::one();
    let solutions: Vec<Problem24Solution> = (0..lists.len())
        .into_par_iter()
        .flat_map_iter(|ia| {
            let (lists, values, one) = (&lists, &values, &one);
            (ia..lists.len()).flat_map(move |ib| {
                (0..lists.len()).filter_map(move |ic| {
                    let hit = (0..points_len(values))
                        .all(|p| &values[ia][p] + &values[ib][p] - &values[ic][p] == *one);
                    if !hit {
                        return None;
                    }
                    let sol = Problem24Solution {
                        a: lists[ia].clone(),
                        b: lists[ib].clone(),
                        c: lists[ic].clone(),
                    };
                    let exact = check(&sol.matrix(), Mode::L);
                    (exact.constant() == Some(&BivarPoly::one())).then_some(sol)
                })
            })
        })
        .collect();
    let set: BTreeSet<Problem24Solution> = solutions.into_iter().collect();
    Ok(set.into_iter().collect())
}

fn points_len(values: &[Vec<BigRational>]) -> usize {
    values.first().map_or(0, Vec::len)
}
