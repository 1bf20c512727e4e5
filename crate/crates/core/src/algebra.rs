//! Exact sparse arithmetic for the objects the rigidity checks are built on.
//!
//! - [`BivarPoly`]: polynomials in `x`, `y` with big-integer coefficients.
//! - [`LaurentPoly`]: Laurent polynomials in `z` whose coefficients are [`BivarPoly`].
//! - [`DenomFactors`]: a multiset of cyclotomic-type factors `(z^a - 1)`, kept factored.
//! - [`LaurentRational`]: a numerator over factored denominators, never reduced.
//!
//! Nothing here touches floating point.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("z = {z} is a root of the denominator factor z^{exponent} - 1")]
    PoleAtSamplePoint { z: BigRational, exponent: u32 },
    #[error("cannot evaluate a Laurent polynomial at z = 0")]
    ZeroBase,
}

/// `base^exp` for an arbitrary integer exponent. Caller guarantees `base != 0` when `exp < 0`.
pub(crate) fn rational_pow(base: &BigRational, exp: i64) -> BigRational {
    let mut acc = BigRational::one();
    let mut sq = if exp < 0 { base.recip() } else { base.clone() };
    let mut e = exp.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// Polynomial in `x` and `y` with arbitrary-precision integer coefficients.
///
/// Stored sparsely as `(deg_x, deg_y) -> coefficient`; zero coefficients are never stored,
/// so the zero polynomial is the empty map and structural equality is polynomial equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn x() -> Self {
        Self::monomial(BigInt::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(BigInt::one(), 0, 1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: impl Into<BigInt>, deg_x: u32, deg_y: u32) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((deg_x, deg_y), c);
        }
        Self { terms }
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), BigInt)>,
    {
        let mut out = Self::zero();
        for (exp, c) in terms {
            out.add_term(exp, c);
        }
        out
    }

    fn add_term(&mut self, exp: (u32, u32), c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, deg_x: u32, deg_y: u32) -> BigInt {
        self.terms
            .get(&(deg_x, deg_y))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigInt)> {
        self.terms.iter()
    }

    /// The integer value if this polynomial has no `x` or `y` dependence.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one();
        let mut sq = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(dx, dy), c) in &self.terms {
            acc += BigRational::from_integer(c.clone())
                * rational_pow(x, dx as i64)
                * rational_pow(y, dy as i64);
        }
        acc
    }

    /// Drops every term whose coefficient would be cancelled; a no-op on values built
    /// through the public API, which are always normalized.
    pub fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        self
    }
}

impl Add for &BivarPoly {
    type Output = BivarPoly;
    fn add(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &BivarPoly {
    type Output = BivarPoly;
    fn sub(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &BivarPoly {
    type Output = BivarPoly;
    fn mul(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = BivarPoly::zero();
        for (&(ax, ay), ac) in &self.terms {
            for (&(bx, by), bc) in &rhs.terms {
                out.add_term((ax + bx, ay + by), ac * bc);
            }
        }
        out
    }
}

impl Neg for &BivarPoly {
    type Output = BivarPoly;
    fn neg(self) -> BivarPoly {
        BivarPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($ty:ty, $tr:ident, $method:ident) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(BivarPoly, Add, add);
forward_owned_binop!(BivarPoly, Sub, sub);
forward_owned_binop!(BivarPoly, Mul, mul);

impl Neg for BivarPoly {
    type Output = BivarPoly;
    fn neg(self) -> BivarPoly {
        -&self
    }
}

/// Graded lexicographic order with `x` before `y`: highest total degree first, and
/// within a degree the larger power of `x` first.
impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<_> = self.terms.iter().collect();
        order.sort_by(|((ax, ay), _), ((bx, by), _)| (bx + by, bx).cmp(&(ax + ay, ax)));
        for (idx, (&(dx, dy), c)) in order.into_iter().enumerate() {
            let negative = c.is_negative();
            match (idx, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            let mut factors = Vec::new();
            if !mag.is_one() || (dx == 0 && dy == 0) {
                factors.push(mag.to_string());
            }
            for (var, d) in [("x", dx), ("y", dy)] {
                match d {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    _ => factors.push(format!("{var}^{d}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Laurent polynomial in `z` with [`BivarPoly`] coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BivarPoly>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BivarPoly::one())
    }

    pub fn constant(c: BivarPoly) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exp: i64, c: BivarPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Self { terms }
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, BivarPoly)>,
    {
        let mut out = Self::zero();
        for (e, c) in terms {
            out.add_term(e, &c);
        }
        out
    }

    fn add_term(&mut self, exp: i64, c: &BivarPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> BivarPoly {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &BivarPoly)> {
        self.terms.iter()
    }

    /// Lowest-degree nonzero term, `None` for the zero polynomial.
    pub fn lowest_term(&self) -> Option<(i64, &BivarPoly)> {
        self.terms.iter().next().map(|(e, c)| (*e, c))
    }

    pub fn highest_term(&self) -> Option<(i64, &BivarPoly)> {
        self.terms.iter().next_back().map(|(e, c)| (*e, c))
    }

    pub fn scale(&self, c: &BivarPoly) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (e, t) in &self.terms {
            out.add_term(*e, &(t * c));
        }
        out
    }

    /// `self * (z^a - 1)`.
    pub fn mul_factor(&self, a: u32) -> Self {
        assert!(a > 0, "denominator factor exponent must be positive");
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(e + a as i64, c);
            out.add_term(*e, &-c);
        }
        out
    }

    pub fn eval(
        &self,
        z: &BigRational,
        x: &BigRational,
        y: &BigRational,
    ) -> Result<BigRational, AlgebraError> {
        if z.is_zero() && !self.terms.is_empty() {
            return Err(AlgebraError::ZeroBase);
        }
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            acc += c.eval(x, y) * rational_pow(z, *e);
        }
        Ok(acc)
    }

    /// Substitutes `x`, `y` by integers, keeping the `z` structure.
    pub fn specialize(&self, x: &BigInt, y: &BigInt) -> Self {
        let (xr, yr) = (
            BigRational::from_integer(x.clone()),
            BigRational::from_integer(y.clone()),
        );
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let v = c.eval(&xr, &yr);
            debug_assert!(v.is_integer());
            out.add_term(*e, &BivarPoly::constant(v.to_integer()));
        }
        out
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

forward_owned_binop!(LaurentPoly, Add, add);
forward_owned_binop!(LaurentPoly, Sub, sub);
forward_owned_binop!(LaurentPoly, Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| match e {
                0 => format!("({c})"),
                1 => format!("({c})*z"),
                _ => format!("({c})*z^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Multiset of denominator factors `(z^a - 1)`, stored as `a -> multiplicity`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DenomFactors {
    factors: BTreeMap<u32, u32>,
}

impl DenomFactors {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(a: u32) -> Self {
        Self::with_multiplicity(a, 1)
    }

    pub fn with_multiplicity(a: u32, mult: u32) -> Self {
        assert!(a > 0, "denominator factor exponent must be positive");
        let mut factors = BTreeMap::new();
        if mult > 0 {
            factors.insert(a, mult);
        }
        Self { factors }
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn multiplicity(&self, a: u32) -> u32 {
        self.factors.get(&a).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.factors.iter().map(|(a, m)| (*a, *m))
    }

    /// Product of two factor multisets: multiplicities add.
    pub fn product(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        for (a, m) in &other.factors {
            *factors.entry(*a).or_insert(0) += m;
        }
        Self { factors }
    }

    /// Least common multiple in the factored sense: per-factor maximum multiplicity.
    pub fn lcm(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        for (a, m) in &other.factors {
            let slot = factors.entry(*a).or_insert(0);
            *slot = (*slot).max(*m);
        }
        Self { factors }
    }

    /// Factors of `target` not already in `self`. Requires `self` to divide `target`.
    fn missing_from(&self, target: &Self) -> Vec<(u32, u32)> {
        target
            .factors
            .iter()
            .filter_map(|(a, m)| {
                let have = self.multiplicity(*a);
                debug_assert!(have <= *m);
                (*m > have).then_some((*a, m - have))
            })
            .collect()
    }

    /// Degree of the expanded product in `z`.
    pub fn degree(&self) -> u64 {
        self.factors
            .iter()
            .map(|(a, m)| *a as u64 * *m as u64)
            .sum()
    }

    pub fn expand(&self) -> LaurentPoly {
        let mut out = LaurentPoly::one();
        for (a, m) in &self.factors {
            for _ in 0..*m {
                out = out.mul_factor(*a);
            }
        }
        out
    }

    pub fn eval(&self, z: &BigRational) -> Result<BigRational, AlgebraError> {
        let mut acc = BigRational::one();
        for (a, m) in &self.factors {
            let f = rational_pow(z, *a as i64) - BigRational::one();
            if f.is_zero() {
                return Err(AlgebraError::PoleAtSamplePoint {
                    z: z.clone(),
                    exponent: *a,
                });
            }
            acc *= rational_pow(&f, *m as i64);
        }
        Ok(acc)
    }
}

impl fmt::Display for DenomFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(a, m)| {
                let base = if *a == 1 {
                    "(z - 1)".to_string()
                } else {
                    format!("(z^{a} - 1)")
                };
                if *m == 1 {
                    base
                } else {
                    format!("{base}^{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `num / prod (z^a - 1)^mult`, kept unreduced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LaurentRational {
    pub num: LaurentPoly,
    pub den: DenomFactors,
}

impl LaurentRational {
    pub fn new(num: LaurentPoly, den: DenomFactors) -> Self {
        Self { num, den }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_poly(num: LaurentPoly) -> Self {
        Self::new(num, DenomFactors::empty())
    }

    /// Rewrites the numerator over a denominator that `self.den` divides.
    fn lift_to(&self, den: &DenomFactors) -> LaurentPoly {
        let mut num = self.num.clone();
        for (a, m) in self.den.missing_from(den) {
            for _ in 0..m {
                num = num.mul_factor(a);
            }
        }
        num
    }

    /// Sum over the per-factor maximum denominator, without cancelling common factors.
    pub fn add(&self, other: &Self) -> Self {
        let den = self.den.lcm(&other.den);
        let num = &self.lift_to(&den) + &other.lift_to(&den);
        Self { num, den }
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            num: &self.num * &other.num,
            den: self.den.product(&other.den),
        }
    }

    pub fn scale(&self, c: &BivarPoly) -> Self {
        Self {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn eval(
        &self,
        z: &BigRational,
        x: &BigRational,
        y: &BigRational,
    ) -> Result<BigRational, AlgebraError> {
        if z.is_zero() {
            return Err(AlgebraError::ZeroBase);
        }
        let d = self.den.eval(z)?;
        Ok(self.num.eval(z, x, y)? / d)
    }

    /// `num - c * expand(den)`; zero exactly when the function equals the constant `c`.
    pub fn residual_against(&self, c: &BivarPoly) -> LaurentPoly {
        &self.num - &self.den.expand().scale(c)
    }
}

impl fmt::Display for LaurentRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "[{}] / [{}]", self.num, self.den)
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn qr(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn xz_plus_y() -> LaurentPoly {
        LaurentPoly::from_terms([(1, BivarPoly::x()), (0, BivarPoly::y())])
    }

    #[test]
    fn bivar_examples() {
        let x = BivarPoly::x();
        let y = BivarPoly::y();
        assert!((&(&x + &y) + &(-&(&x + &y))).is_zero());
        let diff_sq = &(&x + &y) * &(&x - &y);
        assert_eq!(diff_sq, &x.pow(2) - &y.pow(2));
        let m = BivarPoly::monomial(1, 2, 3);
        assert_eq!(&m * &BivarPoly::one(), m);
    }

    #[test]
    fn display_is_graded_lex() {
        let x = BivarPoly::x();
        let y = BivarPoly::y();
        let p = &(&x.pow(2) - &(&x * &y)) + &y.pow(2);
        assert_eq!(p.to_string(), "x^2 - x*y + y^2");
        let p = &(&(&x * &y.pow(2)) - &(&x.pow(2) * &y)) + &BivarPoly::constant(-3);
        assert_eq!(p.to_string(), "-x^2*y + x*y^2 - 3");
        assert_eq!(BivarPoly::zero().to_string(), "0");
        assert_eq!(BivarPoly::constant(2).to_string(), "2");
        assert_eq!(BivarPoly::monomial(-2, 0, 1).to_string(), "-2*y");
    }

    #[test]
    fn mul_factor_examples() {
        let one = LaurentPoly::one();
        assert_eq!(
            one.mul_factor(2),
            LaurentPoly::from_terms([(2, BivarPoly::one()), (0, BivarPoly::constant(-1))])
        );
        let zinv = LaurentPoly::monomial(-1, BivarPoly::one());
        assert_eq!(
            zinv.mul_factor(1),
            LaurentPoly::from_terms([(0, BivarPoly::one()), (-1, BivarPoly::constant(-1))])
        );
        // (x z + y)(z - 1) = x z^2 + (y - x) z - y
        let expected = LaurentPoly::from_terms([
            (2, BivarPoly::x()),
            (1, &BivarPoly::y() - &BivarPoly::x()),
            (0, -BivarPoly::y()),
        ]);
        assert_eq!(xz_plus_y().mul_factor(1), expected);
    }

    #[test]
    fn add_quasilinear_n1_pair() {
        // (xz + y)/(z - 1) - (x + yz)/(z - 1) = ((x - y) z - (x - y))/(z - 1)
        let r1 = LaurentRational::new(xz_plus_y(), DenomFactors::single(1));
        let r2 = LaurentRational::new(
            -LaurentPoly::from_terms([(0, BivarPoly::x()), (1, BivarPoly::y())]),
            DenomFactors::single(1),
        );
        let sum = r1.add(&r2);
        let x_minus_y = &BivarPoly::x() - &BivarPoly::y();
        assert_eq!(sum.den, DenomFactors::single(1));
        assert_eq!(
            sum.num,
            LaurentPoly::from_terms([(1, x_minus_y.clone()), (0, -x_minus_y.clone())])
        );
        assert!(sum.residual_against(&x_minus_y).is_zero());
    }

    #[test]
    fn add_inverse_is_zero_numerator() {
        let r = LaurentRational::new(xz_plus_y(), DenomFactors::with_multiplicity(3, 2));
        let s = r.add(&r.neg());
        assert!(s.num.is_zero());
        assert_eq!(s.den, r.den);
    }

    #[test]
    fn add_distinct_factors_cross_multiplication() {
        // 1/(z-1) + 1/(z^2-1): factored bookkeeping keeps both factors.
        let r1 = LaurentRational::new(LaurentPoly::one(), DenomFactors::single(1));
        let r2 = LaurentRational::new(LaurentPoly::one(), DenomFactors::single(2));
        let out = r1.add(&r2);
        let d1 = r1.den.expand();
        let d2 = r2.den.expand();
        let lhs = &(&out.num * &d1) * &d2;
        let rhs = &(&(&r1.num * &d2) + &(&r2.num * &d1)) * &out.den.expand();
        assert_eq!(lhs, rhs);
        // value check: at z = 2, 1 + 1/3
        assert_eq!(out.eval(&q(2), &q(1), &q(1)).unwrap(), qr(4, 3));
    }

    #[test]
    fn eval_examples() {
        let zp1 = LaurentPoly::from_terms([(1, BivarPoly::one()), (0, BivarPoly::one())]);
        let r = LaurentRational::new(zp1, DenomFactors::single(1));
        assert_eq!(r.eval(&q(2), &q(0), &q(0)).unwrap(), q(3));
        let r = LaurentRational::new(xz_plus_y(), DenomFactors::single(1));
        assert_eq!(r.eval(&q(2), &q(1), &q(1)).unwrap(), q(3));
    }

    #[test]
    fn eval_errors() {
        let r = LaurentRational::new(xz_plus_y(), DenomFactors::single(2));
        assert_eq!(r.eval(&q(0), &q(1), &q(1)), Err(AlgebraError::ZeroBase));
        assert!(matches!(
            r.eval(&q(-1), &q(1), &q(1)),
            Err(AlgebraError::PoleAtSamplePoint { exponent: 2, .. })
        ));
        assert!(matches!(
            r.eval(&q(1), &q(1), &q(1)),
            Err(AlgebraError::PoleAtSamplePoint { .. })
        ));
        // z = -1 is fine for odd factors
        let r = LaurentRational::new(xz_plus_y(), DenomFactors::single(3));
        assert_eq!(r.eval(&q(-1), &q(1), &q(1)).unwrap(), q(0));
    }

    #[test]
    fn normalization_is_idempotent() {
        let p = BivarPoly::from_terms([
            ((1, 0), 3.into()),
            ((1, 0), (-3).into()),
            ((0, 2), 5.into()),
        ]);
        assert_eq!(p.nterms(), 1);
        assert_eq!(p.clone().normalized(), p);
        assert_eq!(p.clone().normalized().normalized(), p.normalized());
    }

    pub(crate) fn arb_bivar() -> impl Strategy<Value = BivarPoly> {
        prop::collection::vec(((0u32..4, 0u32..4), -5i64..=5), 0..5)
            .prop_map(|ts| BivarPoly::from_terms(ts.into_iter().map(|(e, c)| (e, BigInt::from(c)))))
    }

    fn arb_laurent() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-4i64..5, arb_bivar()), 0..4).prop_map(LaurentPoly::from_terms)
    }

    fn arb_rational() -> impl Strategy<Value = LaurentRational> {
        (
            arb_laurent(),
            prop::collection::btree_map(1u32..5, 1u32..3, 0..3),
        )
            .prop_map(|(num, fs)| {
                let den = fs.into_iter().fold(DenomFactors::empty(), |d, (a, m)| {
                    d.product(&DenomFactors::with_multiplicity(a, m))
                });
                LaurentRational::new(num, den)
            })
    }

    fn arb_point() -> impl Strategy<Value = (BigRational, BigRational, BigRational)> {
        // |z0| >= 2 keeps every z0^a away from 1.
        (2i64..7, prop::bool::ANY, 1i64..4, -4i64..5, -4i64..5).prop_map(|(zn, neg, zd, x, y)| {
            let zn = if neg { -zn * zd } else { zn * zd };
            (qr(zn, zd), q(x), q(y))
        })
    }

    proptest! {
        #[test]
        fn bivar_ring_laws(a in arb_bivar(), b in arb_bivar(), c in arb_bivar()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn laurent_ring_laws(a in arb_laurent(), b in arb_laurent(), c in arb_laurent()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn mul_factor_matches_evaluation(p in arb_laurent(), a in 1u32..6, pt in arb_point()) {
            let (z, x, y) = pt;
            let lhs = p.mul_factor(a).eval(&z, &x, &y).unwrap();
            let rhs = p.eval(&z, &x, &y).unwrap() * (rational_pow(&z, a as i64) - BigRational::one());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn add_chains_evaluate_pointwise(
            rs in prop::collection::vec(arb_rational(), 1..4),
            pts in prop::collection::vec(arb_point(), 10),
        ) {
            let sum = rs.iter().skip(1).fold(rs[0].clone(), |acc, r| acc.add(r));
            for (z, x, y) in &pts {
                let expect: BigRational = rs.iter().map(|r| r.eval(z, x, y).unwrap()).sum();
                prop_assert_eq!(sum.eval(z, x, y).unwrap(), expect);
            }
        }
    }
}
