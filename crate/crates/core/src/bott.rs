//! Chern numbers from fixed-point data via the Bott residue sum, plus the screens and the
//! two-fixed-point classifier built on top of them.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rigidity::{is_rigid, RigidityVerdict, WeightMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BottError {
    #[error("sigma_{k} requested for {len} weights")]
    IndexOutOfRange { k: usize, len: usize },
    #[error("partition has {got} entries, matrix has n = {n}")]
    PartitionLength { got: usize, n: usize },
    #[error("classifier needs exactly 2 fixed points, got {0}")]
    WrongFixedPointCount(usize),
}

/// Exponents `(r_1, ..., r_n)` of the monomial `c_1^{r_1} ... c_n^{r_n}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChernPartition(pub Vec<u32>);

impl ChernPartition {
    /// `r_1 + 2 r_2 + ... + n r_n`
    pub fn weighted_degree(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, r)| (i as u64 + 1) * *r as u64)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All partitions of length `n` with weighted degree at most `max_degree`, in
    /// lexicographic order of `(r_1, ..., r_n)`.
    pub fn enumerate(n: usize, max_degree: u64) -> Vec<ChernPartition> {
        fn go(n: usize, idx: usize, left: u64, cur: &mut Vec<u32>, out: &mut Vec<ChernPartition>) {
            if idx == n {
                out.push(ChernPartition(cur.clone()));
                return;
            }
            let step = idx as u64 + 1;
            for r in 0..=(left / step) {
                cur.push(r as u32);
                go(n, idx + 1, left - r * step, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(n, 0, max_degree, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// Partitions of exact weighted degree `n`; these index the top Chern numbers.
    pub fn top_degree(n: usize) -> Vec<ChernPartition> {
        Self::enumerate(n, n as u64)
            .into_iter()
            .filter(|r| r.weighted_degree() == n as u64)
            .collect()
    }
}

impl fmt::Display for ChernPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > 0)
            .map(|(i, r)| {
                if *r == 1 {
                    format!("c{}", i + 1)
                } else {
                    format!("c{}^{}", i + 1, r)
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "c0")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// `sigma_k(w)`, with `sigma_0 = 1`.
pub fn elementary_symmetric(k: usize, w: &[i64]) -> Result<BigInt, BottError> {
    if k > w.len() {
        return Err(BottError::IndexOutOfRange { k, len: w.len() });
    }
    Ok(elementary_symmetric_all(w).swap_remove(k))
}

/// `[sigma_0, ..., sigma_n]` via the product `prod (1 + w_j t)`.
fn elementary_symmetric_all(w: &[i64]) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); w.len() + 1];
    e[0] = BigInt::one();
    for (j, &v) in w.iter().enumerate() {
        let v = BigInt::from(v);
        for k in (1..=j + 1).rev() {
            let add = &e[k - 1] * &v;
            e[k] += add;
        }
    }
    e
}

/// `sum_i sigma_1^{r_1} ... sigma_n^{r_n} / (eps_i * prod_j w_ij)` as an exact rational.
pub fn chern_number(w: &WeightMatrix, r: &ChernPartition) -> Result<BigRational, BottError> {
    if r.len() != w.n() {
        return Err(BottError::PartitionLength {
            got: r.len(),
            n: w.n(),
        });
    }
    let mut acc = BigRational::zero();
    for row in w.rows() {
        let sigma = elementary_symmetric_all(&row.weights);
        let mut numer = BigInt::one();
        for (k, exp) in r.0.iter().enumerate() {
            numer *= num_traits::pow(sigma[k + 1].clone(), *exp as usize);
        }
        let denom = sigma[w.n()].clone() * row.sign.value();
        acc += BigRational::new(numer, denom);
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub partition: ChernPartition,
    pub value: BigRational,
}

/// Chern numbers below top degree must vanish on a genuine manifold; each nonzero one is
/// returned. `r = (0, ..., 0)` is included.
pub fn realizability_screen(w: &WeightMatrix) -> Vec<Violation> {
    let n = w.n();
    ChernPartition::enumerate(n, n as u64 - 1)
        .into_iter()
        .filter_map(|r| {
            let value = chern_number(w, &r).expect("length matches");
            (!value.is_zero()).then_some(Violation {
                partition: r,
                value,
            })
        })
        .collect()
}

/// True when every top-degree Chern number vanishes.
pub fn is_boundary_candidate(w: &WeightMatrix) -> bool {
    ChernPartition::top_degree(w.n())
        .iter()
        .all(|r| chern_number(w, r).expect("length matches").is_zero())
}

/// The three rigid families with two fixed points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    /// Two identical rows with opposite signs.
    Z,
    /// `n = 1`, weights `a` and `-a`, equal signs.
    L1,
    /// `n = 3`, rows `(a, b, -(a+b))` and its negation, equal signs.
    S3,
    NotClassified(String),
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Z => write!(f, "Z"),
            ClassLabel::L1 => write!(f, "L1"),
            ClassLabel::S3 => write!(f, "S3"),
            ClassLabel::NotClassified(reason) => write!(f, "not classified ({reason})"),
        }
    }
}

pub fn classify_two_fixed_points(w: &WeightMatrix) -> Result<ClassLabel, BottError> {
    if w.m() != 2 {
        return Err(BottError::WrongFixedPointCount(w.m()));
    }
    let sorted = |ws: &[i64]| {
        let mut v = ws.to_vec();
        v.sort_unstable();
        v
    };
    let (r1, r2) = (&w.rows()[0], &w.rows()[1]);
    let (a, b) = (sorted(&r1.weights), sorted(&r2.weights));
    let negated_b = sorted(&b.iter().map(|v| -v).collect::<Vec<_>>());

    if a == b && r1.sign != r2.sign {
        return Ok(ClassLabel::Z);
    }
    if r1.sign == r2.sign && a == negated_b {
        // three nonzero weights summing to zero always have the (a, b, -(a+b)) shape up to
        // swapping the rows
        if w.n() == 1 || (w.n() == 3 && a.iter().sum::<i64>() == 0) {
            return Ok(if w.n() == 1 {
                ClassLabel::L1
            } else {
                ClassLabel::S3
            });
        }
    }
    let reason = match is_rigid(w) {
        RigidityVerdict::Rigid(c) => format!("rigid with constant {c}, outside Z/L1/S3"),
        RigidityVerdict::NotRigid(_) => "not rigid".to_string(),
    };
    Ok(ClassLabel::NotClassified(reason))
}

/// Conjectured minimum number of fixed points of a non-bounding action in dimension `2n`.
pub fn kosniowski_bound(n: usize) -> usize {
    n / 2 + 1
}
