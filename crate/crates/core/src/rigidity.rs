//! Weight matrices and the exact rigidity decision.
//!
//! A weight matrix contributes
//! `T(z) = sum_i eps_i * prod_j (x z^w_ij + y) / (z^w_ij - 1)`.
//! Letting `z -> infinity` term by term sends each factor to `x` (w > 0) or `-y` (w < 0),
//! so if `T` is constant at all it equals `sum_i eps_i x^{s+} (-y)^{s-}`. Constancy is
//! therefore decided by the single identity `num - C * den = 0`.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{BivarPoly, DenomFactors, LaurentPoly, LaurentRational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RigidityError {
    #[error("weight must be nonzero")]
    ZeroWeight,
    #[error("weight matrix needs at least one row")]
    NoRows,
    #[error("rows need at least one weight")]
    EmptyRow,
    #[error("row {row} has {got} weights, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("zero weight at row {row}, column {col}")]
    ZeroEntry { row: usize, col: usize },
    #[error("quasilinear seed needs pairwise distinct entries, {0} repeats")]
    DuplicateEntries(i64),
    #[error("quasilinear seed needs at least two entries")]
    SeedTooShort,
}

/// Orientation sign of a fixed point. `Minus` sorts before `Plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `self * (-1)^k`
    pub fn flipped_times(self, k: usize) -> Self {
        if k.is_multiple_of(2) {
            self
        } else {
            self.flip()
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Row {
    pub weights: Vec<i64>,
    pub sign: Sign,
}

impl Row {
    pub fn new(weights: Vec<i64>, sign: Sign) -> Self {
        Self { weights, sign }
    }

    pub fn positives(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0).count()
    }

    pub fn negatives(&self) -> usize {
        self.weights.iter().filter(|w| **w < 0).count()
    }
}

/// `m` rows of `n` nonzero weights, each row carrying a sign.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Row>", into = "Vec<Row>")]
pub struct WeightMatrix {
    rows: Vec<Row>,
}

impl TryFrom<Vec<Row>> for WeightMatrix {
    type Error = RigidityError;
    fn try_from(rows: Vec<Row>) -> Result<Self, Self::Error> {
        Self::new(rows)
    }
}

impl From<WeightMatrix> for Vec<Row> {
    fn from(w: WeightMatrix) -> Self {
        w.rows
    }
}

impl WeightMatrix {
    pub fn new(rows: Vec<Row>) -> Result<Self, RigidityError> {
        let first = rows.first().ok_or(RigidityError::NoRows)?;
        let n = first.weights.len();
        if n == 0 {
            return Err(RigidityError::EmptyRow);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.weights.len() != n {
                return Err(RigidityError::RaggedRows {
                    row: i,
                    got: row.weights.len(),
                    expected: n,
                });
            }
            if let Some(j) = row.weights.iter().position(|w| *w == 0) {
                return Err(RigidityError::ZeroEntry { row: i, col: j });
            }
        }
        Ok(Self { rows })
    }

    /// Convenience constructor from `(weights, sign)` pairs.
    pub fn from_rows<I, V>(rows: I) -> Result<Self, RigidityError>
    where
        I: IntoIterator<Item = (V, Sign)>,
        V: Into<Vec<i64>>,
    {
        Self::new(
            rows.into_iter()
                .map(|(w, s)| Row::new(w.into(), s))
                .collect(),
        )
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Row>) -> Self {
        debug_assert!(Self::new(rows.clone()).is_ok());
        Self { rows }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].weights.len()
    }

    /// Every weight multiplied by `lambda`.
    pub fn scaled(&self, lambda: i64) -> Result<Self, RigidityError> {
        if lambda == 0 {
            return Err(RigidityError::ZeroWeight);
        }
        Ok(Self {
            rows: self
                .rows
                .iter()
                .map(|r| Row::new(r.weights.iter().map(|w| w * lambda).collect(), r.sign))
                .collect(),
        })
    }

    /// Every sign flipped.
    pub fn negated(&self) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| Row::new(r.weights.clone(), r.sign.flip()))
                .collect(),
        }
    }
}

impl fmt::Display for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let ws: Vec<String> = r.weights.iter().map(i64::to_string).collect();
                format!("{}({})", r.sign, ws.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(" "))
    }
}

/// Which specialization rigidity is tested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// The full two-parameter function in `x`, `y`.
    T,
    /// The specialization `x = y = 1`.
    L,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::T => "T",
            Mode::L => "L",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPoint {
    pub z: BigRational,
    pub x: BigRational,
    pub y: BigRational,
    pub value: BigRational,
    pub expected: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Lowest-degree term `(exponent, coefficient)` of `num - C * den`.
    pub residual_low: (i64, BivarPoly),
    /// First grid point where the function differs from the candidate constant, if any.
    pub point: Option<WitnessPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RigidityVerdict {
    Rigid(BivarPoly),
    NotRigid(Box<Witness>),
}

impl RigidityVerdict {
    pub fn is_rigid(&self) -> bool {
        matches!(self, RigidityVerdict::Rigid(_))
    }

    pub fn constant(&self) -> Option<&BivarPoly> {
        match self {
            RigidityVerdict::Rigid(c) => Some(c),
            RigidityVerdict::NotRigid(_) => None,
        }
    }
}

/// `(x z^w + y) / (z^w - 1)`, with negative `w` rewritten as `-(x + y z^|w|) / (z^|w| - 1)`
/// so denominator factors stay positive.
pub fn term_fraction(w: i64) -> Result<LaurentRational, RigidityError> {
    if w == 0 {
        return Err(RigidityError::ZeroWeight);
    }
    let a = w.unsigned_abs();
    let a32 = u32::try_from(a).expect("weight magnitude fits in u32");
    let num = if w > 0 {
        LaurentPoly::from_terms([(a as i64, BivarPoly::x()), (0, BivarPoly::y())])
    } else {
        LaurentPoly::from_terms([(0, -BivarPoly::x()), (a as i64, -BivarPoly::y())])
    };
    Ok(LaurentRational::new(num, DenomFactors::single(a32)))
}

fn row_product(row: &Row) -> LaurentRational {
    let mut acc = LaurentRational::from_poly(LaurentPoly::one());
    for &w in &row.weights {
        acc = acc.mul(&term_fraction(w).expect("validated nonzero"));
    }
    if row.sign == Sign::Minus {
        acc = acc.neg();
    }
    acc
}

pub fn t_series(w: &WeightMatrix) -> LaurentRational {
    w.rows
        .iter()
        .map(row_product)
        .fold(LaurentRational::zero(), |acc, r| acc.add(&r))
}

/// `sum_i eps_i * x^{s_i+} * (-y)^{s_i-}`
pub fn candidate_constant(w: &WeightMatrix) -> BivarPoly {
    let mut acc = BivarPoly::zero();
    for row in &w.rows {
        let neg = row.negatives();
        let coeff = row.sign.flipped_times(neg).value();
        acc = &acc + &BivarPoly::monomial(coeff, row.positives() as u32, neg as u32);
    }
    acc
}

pub fn l_series(w: &WeightMatrix) -> LaurentRational {
    let t = t_series(w);
    LaurentRational::new(t.num.specialize(&BigInt::one(), &BigInt::one()), t.den)
}

/// `sum_i eps_i * (-1)^{s_i-}`, the only possible value of a constant `L`.
pub fn l_candidate_constant(w: &WeightMatrix) -> BigInt {
    w.rows
        .iter()
        .map(|r| BigInt::from(r.sign.flipped_times(r.negatives()).value()))
        .sum()
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

const WITNESS_Z: [i64; 3] = [2, 3, 5];
const WITNESS_XY: [(i64, i64); 5] = [(1, 1), (1, 2), (2, 1), (1, 0), (0, 1)];

fn decide(series: &LaurentRational, constant: BivarPoly, grid: &[(i64, i64)]) -> RigidityVerdict {
    let residual = series.residual_against(&constant);
    let Some((deg, coeff)) = residual.lowest_term() else {
        return RigidityVerdict::Rigid(constant);
    };
    let residual_low = (deg, coeff.clone());
    let mut point = None;
    'scan: for z in WITNESS_Z {
        for &(x, y) in grid {
            let (z, x, y) = (rational(z), rational(x), rational(y));
            let value = series.eval(&z, &x, &y).expect("|z| >= 2 is never a pole");
            let expected = constant.eval(&x, &y);
            if value != expected {
                point = Some(WitnessPoint {
                    z,
                    x,
                    y,
                    value,
                    expected,
                });
                break 'scan;
            }
        }
    }
    RigidityVerdict::NotRigid(Box::new(Witness {
        residual_low,
        point,
    }))
}

pub fn is_rigid(w: &WeightMatrix) -> RigidityVerdict {
    decide(&t_series(w), candidate_constant(w), &WITNESS_XY)
}

/// Rigidity of the `x = y = 1` specialization; a rigid verdict carries the integer constant.
pub fn is_l_rigid(w: &WeightMatrix) -> RigidityVerdict {
    decide(
        &l_series(w),
        BivarPoly::constant(l_candidate_constant(w)),
        &[(1, 1)],
    )
}

pub fn check(w: &WeightMatrix, mode: Mode) -> RigidityVerdict {
    match mode {
        Mode::T => is_rigid(w),
        Mode::L => is_l_rigid(w),
    }
}

/// Makes every weight positive, flipping the row sign once per negated weight.
/// The `x = y = 1` series is unchanged.
pub fn normalize_signs_for_l(w: &WeightMatrix) -> WeightMatrix {
    WeightMatrix {
        rows: w
            .rows
            .iter()
            .map(|r| {
                Row::new(
                    r.weights.iter().map(|x| x.abs()).collect(),
                    r.sign.flipped_times(r.negatives()),
                )
            })
            .collect(),
    }
}

/// Parity constraints on an `L`-rigid matrix: odd `n` forces `L = 0` and even `m`,
/// even `n` forces `L = m (mod 2)`.
pub fn parity_check(w: &WeightMatrix, l: &BigInt) -> bool {
    let m = BigInt::from(w.m());
    if w.n() % 2 == 1 {
        l.is_zero() && w.m().is_multiple_of(2)
    } else {
        ((l - m) % BigInt::from(2)).is_zero()
    }
}

/// The `(n+1) x n` matrix whose row `i` is `(a_i - a_j)_{j != i}`, all signs `+`.
pub fn quasilinear(a: &[i64]) -> Result<WeightMatrix, RigidityError> {
    if a.len() < 2 {
        return Err(RigidityError::SeedTooShort);
    }
    let mut seen = std::collections::BTreeSet::new();
    for v in a {
        if !seen.insert(*v) {
            return Err(RigidityError::DuplicateEntries(*v));
        }
    }
    let rows = a
        .iter()
        .enumerate()
        .map(|(i, ai)| {
            let ws = a
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, aj)| ai - aj)
                .collect();
            Row::new(ws, Sign::Plus)
        })
        .collect();
    Ok(WeightMatrix { rows })
}

/// A pairing entry: `((row, col), (row, col))` with equal weights in distinct rows.
pub type WeightPair = ((usize, usize), (usize, usize));

/// Splits all weights (by absolute value) into equal pairs lying in different rows.
///
/// Feasible iff every value occurs an even number of times and no row holds more than half
/// of a value's occurrences. Rows with the most unpaired copies are matched first, which
/// never strands a value while that condition holds.
pub fn pair_partition(w: &WeightMatrix) -> Option<Vec<WeightPair>> {
    let mut by_value: BTreeMap<u64, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    for (i, row) in w.rows.iter().enumerate() {
        for (j, v) in row.weights.iter().enumerate() {
            by_value
                .entry(v.unsigned_abs())
                .or_default()
                .entry(i)
                .or_default()
                .push(j);
        }
    }
    let mut pairs = Vec::new();
    for per_row in by_value.into_values() {
        let total: usize = per_row.values().map(Vec::len).sum();
        let max_row = per_row.values().map(Vec::len).max().unwrap_or(0);
        if total % 2 == 1 || max_row > total / 2 {
            return None;
        }
        let mut slots: Vec<(usize, Vec<usize>)> = per_row
            .into_iter()
            .map(|(row, mut cols)| {
                cols.reverse();
                (row, cols)
            })
            .collect();
        loop {
            slots.retain(|(_, cols)| !cols.is_empty());
            if slots.is_empty() {
                break;
            }
            slots.sort_by_key(|(row, cols)| (Reverse(cols.len()), *row));
            let (ra, ca) = (slots[0].0, slots[0].1.pop().expect("nonempty"));
            let (rb, cb) = (slots[1].0, slots[1].1.pop().expect("feasible"));
            pairs.push(if ra < rb {
                ((ra, ca), (rb, cb))
            } else {
                ((rb, cb), (ra, ca))
            });
        }
    }
    Some(pairs)
}
