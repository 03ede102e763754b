//! Positive rationals in lowest terms, canonical finite sets of them, and the
//! height-bounded sets `F(Q, Q')` of fractions `q/q'` with `q <= Q`, `q' <= Q'`.
//!
//! All arithmetic is exact on `u64` numerators and denominators. Anything that
//! would leave that range is reported as [`Error::Overflow`]; nothing wraps or
//! saturates. Ordering compares values through 128-bit cross products, so a
//! [`RationalSet`] has one canonical layout regardless of how (or on how many
//! threads) it was built.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest permitted value of `Q * Q'`. Elements of a quotient set of
/// subsets of `F(Q, Q')` have both parts at most `Q * Q'`, so every
/// cross-multiplication of two such elements stays below `2^62`.
pub const MAX_HEIGHT_PRODUCT: u64 = 1 << 31;

/// Default cap on `floor(Q) * floor(Q')` candidate pairs for enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// Sets larger than this are sorted with rayon.
const PARALLEL_SORT_THRESHOLD: usize = 1 << 15;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// A strictly positive rational `num/den` with `gcd(num, den) = 1`.
///
/// Equality is structural, which coincides with equality of values because
/// the representation is canonical. Ordering is by value.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReducedFraction {
    num: u64,
    den: u64,
}

impl ReducedFraction {
    pub const ONE: ReducedFraction = ReducedFraction { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        reduce(num, den)
    }

    pub fn integer(n: u64) -> Result<Self> {
        reduce(n, 1)
    }

    /// Caller guarantees `num, den >= 1` and `gcd(num, den) = 1`.
    pub(crate) const fn from_coprime(num: u64, den: u64) -> Self {
        ReducedFraction { num, den }
    }

    #[inline]
    pub fn num(&self) -> u64 {
        self.num
    }

    #[inline]
    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        multiply(self, rhs)
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        divide(self, rhs)
    }

    pub fn recip(self) -> Self {
        reciprocal(self)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for ReducedFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for ReducedFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

pub fn reduce(num: u64, den: u64) -> Result<ReducedFraction> {
    if num == 0 || den == 0 {
        return Err(Error::domain(format!(
            "only positive rationals are supported, got {num}/{den}"
        )));
    }
    let g = gcd(num, den);
    Ok(ReducedFraction {
        num: num / g,
        den: den / g,
    })
}

fn overflow(op: &str, f: ReducedFraction, g: ReducedFraction) -> Error {
    Error::Overflow(format!("{f} {op} {g} does not fit in 64 bits"))
}

/// Exact product. Cross-cancelling before multiplying keeps the result in
/// lowest terms without a final gcd.
pub fn multiply(f: ReducedFraction, g: ReducedFraction) -> Result<ReducedFraction> {
    let g1 = gcd(f.num, g.den);
    let g2 = gcd(g.num, f.den);
    let num = (f.num / g1).checked_mul(g.num / g2);
    let den = (f.den / g2).checked_mul(g.den / g1);
    match (num, den) {
        (Some(num), Some(den)) => Ok(ReducedFraction { num, den }),
        _ => Err(overflow("*", f, g)),
    }
}

pub fn divide(f: ReducedFraction, g: ReducedFraction) -> Result<ReducedFraction> {
    multiply(f, reciprocal(g)).map_err(|_| overflow("/", f, g))
}

#[inline]
pub fn reciprocal(f: ReducedFraction) -> ReducedFraction {
    ReducedFraction {
        num: f.den,
        den: f.num,
    }
}

/// Height bounds `(Q, Q')` for the set `F(Q, Q')`.
///
/// The bounds are real. A node of the certificate recursion works with
/// `(Q/r, Q'/s)`; those are kept as the original bounds plus integer
/// divisors, so that floors and membership tests stay exact instead of going
/// through a rounded quotient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FareyParams {
    q: f64,
    qprime: f64,
    q_div: u64,
    qprime_div: u64,
}

impl FareyParams {
    pub fn new(q: f64, qprime: f64) -> Result<Self> {
        if !q.is_finite() || !qprime.is_finite() || q < 1.0 || qprime < 1.0 {
            return Err(Error::domain(format!(
                "height bounds must be finite reals >= 1, got Q={q}, Q'={qprime}"
            )));
        }
        // exact sign of Q*Q' - 2^31
        if q.mul_add(qprime, -(MAX_HEIGHT_PRODUCT as f64)) > 0.0 {
            return Err(Error::capacity(
                format!("Q*Q' = {q}*{qprime}"),
                MAX_HEIGHT_PRODUCT as u128,
            ));
        }
        Ok(FareyParams {
            q,
            qprime,
            q_div: 1,
            qprime_div: 1,
        })
    }

    /// Bounds `(Q/r, Q'/s)`; both must remain `>= 1`.
    pub fn scaled_down(&self, r: u64, s: u64) -> Result<Self> {
        if r == 0 || s == 0 {
            return Err(Error::domain("scaling divisors must be positive"));
        }
        let too_big = || Error::Overflow(format!("scaling divisor {r}/{s} overflows"));
        let next = FareyParams {
            q: self.q,
            qprime: self.qprime,
            q_div: self.q_div.checked_mul(r).ok_or_else(too_big)?,
            qprime_div: self.qprime_div.checked_mul(s).ok_or_else(too_big)?,
        };
        if next.floor_q() == 0 || next.floor_qprime() == 0 {
            return Err(Error::domain(format!(
                "bounds ({}, {}) scaled by ({r}, {s}) drop below 1",
                self.q(),
                self.qprime()
            )));
        }
        Ok(next)
    }

    pub fn q(&self) -> f64 {
        self.q / self.q_div as f64
    }

    pub fn qprime(&self) -> f64 {
        self.qprime / self.qprime_div as f64
    }

    /// `Q * Q'` as a real.
    pub fn product(&self) -> f64 {
        (self.q * self.qprime) / (self.q_div as f64 * self.qprime_div as f64)
    }

    pub fn floor_q(&self) -> u64 {
        exact_floor_div(self.q, 1.0, self.q_div)
    }

    pub fn floor_qprime(&self) -> u64 {
        exact_floor_div(self.qprime, 1.0, self.qprime_div)
    }

    /// `Q * Q'` as an exact rational (the stored bounds are binary fractions).
    pub fn exact_product(&self) -> BigRational {
        let q = BigRational::from_float(self.q).expect("finite by construction");
        let qp = BigRational::from_float(self.qprime).expect("finite by construction");
        let div = BigInt::from(self.q_div) * BigInt::from(self.qprime_div);
        q * qp / BigRational::from_integer(div)
    }

    /// `floor(Q * Q')`, computed exactly.
    pub fn floor_product(&self) -> u64 {
        exact_floor_div(self.q, self.qprime, self.q_div * self.qprime_div)
    }

    pub fn contains(&self, f: &ReducedFraction) -> bool {
        in_farey(f, self)
    }
}

/// Largest `m` with `m * div <= a * b`, evaluated with a fused multiply-add so
/// the comparison sees the exact product `a * b`.
fn exact_floor_div(a: f64, b: f64, div: u64) -> u64 {
    let fits = |m: u64| -> bool {
        match m.checked_mul(div) {
            Some(v) => a.mul_add(b, -(v as f64)) >= 0.0,
            None => false,
        }
    };
    let mut m = ((a * b) / div as f64).floor().max(0.0) as u64;
    while m > 0 && !fits(m) {
        m -= 1;
    }
    while fits(m + 1) {
        m += 1;
    }
    m
}

pub fn in_farey(f: &ReducedFraction, p: &FareyParams) -> bool {
    f.num <= p.floor_q() && f.den <= p.floor_qprime()
}

/// A finite set of reduced fractions, stored strictly increasing by value.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalSet {
    elements: Vec<ReducedFraction>,
}

impl RationalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vec(mut elements: Vec<ReducedFraction>) -> Self {
        if elements.len() >= PARALLEL_SORT_THRESHOLD {
            elements.par_sort_unstable();
        } else {
            elements.sort_unstable();
        }
        elements.dedup();
        RationalSet { elements }
    }

    /// Caller guarantees strictly increasing order.
    pub(crate) fn from_sorted(elements: Vec<ReducedFraction>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        RationalSet { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, f: &ReducedFraction) -> bool {
        self.elements.binary_search(f).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ReducedFraction> {
        self.elements.iter()
    }

    pub fn as_slice(&self) -> &[ReducedFraction] {
        &self.elements
    }

    pub fn into_vec(self) -> Vec<ReducedFraction> {
        self.elements
    }

    pub fn is_subset_of(&self, p: &FareyParams) -> bool {
        self.elements.iter().all(|f| p.contains(f))
    }
}

impl fmt::Debug for RationalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements.iter()).finish()
    }
}

impl FromIterator<ReducedFraction> for RationalSet {
    fn from_iter<I: IntoIterator<Item = ReducedFraction>>(iter: I) -> Self {
        RationalSet::from_vec(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a RationalSet {
    type Item = &'a ReducedFraction;
    type IntoIter = std::slice::Iter<'a, ReducedFraction>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

pub fn enumerate_farey(p: &FareyParams) -> Result<RationalSet> {
    enumerate_farey_with_cap(p, DEFAULT_ENUMERATION_CAP)
}

/// Elements of `F(Q, Q')` in increasing order.
///
/// Walks the box with the neighbour recurrence: if `a/b < c/d` are
/// consecutive, the successor of `c/d` is `(k c - a)/(k d - b)` for the
/// largest `k` keeping both parts inside the bounds. No gcd and no sort.
pub fn enumerate_farey_with_cap(p: &FareyParams, cap: u64) -> Result<RationalSet> {
    let qn = p.floor_q();
    let qd = p.floor_qprime();
    let candidates = qn as u128 * qd as u128;
    if candidates > cap as u128 {
        return Err(Error::capacity(
            format!("enumeration of floor(Q)*floor(Q') = {candidates} candidate pairs"),
            cap as u128,
        ));
    }
    let mut out = Vec::new();
    let (mut a, mut b) = (0u64, 1u64);
    let (mut c, mut d) = (1u64, qd);
    loop {
        out.push(ReducedFraction::from_coprime(c, d));
        if c == qn && d == 1 {
            break;
        }
        let k_den = (qd + b) / d;
        let k_num = (qn + a) / c;
        let k = k_den.min(k_num);
        let (e, f) = (k * c - a, k * d - b);
        (a, b, c, d) = (c, d, e, f);
    }
    Ok(RationalSet::from_sorted(out))
}

/// Applies `op` to every pair, splitting the rows of `a` across rayon workers.
/// Each worker deduplicates its own block before the final canonical sort.
fn pairwise_set<F>(a: &RationalSet, b: &RationalSet, op: F) -> Result<RationalSet>
where
    F: Fn(ReducedFraction, ReducedFraction) -> Result<ReducedFraction> + Sync,
{
    if a.is_empty() || b.is_empty() {
        return Ok(RationalSet::new());
    }
    let rows_per_block = (PARALLEL_SORT_THRESHOLD / b.len()).max(1);
    let blocks: Vec<Vec<ReducedFraction>> = a
        .as_slice()
        .par_chunks(rows_per_block)
        .map(|rows| {
            let mut block = Vec::with_capacity(rows.len() * b.len());
            for &x in rows {
                for &y in b.iter() {
                    block.push(op(x, y)?);
                }
            }
            block.sort_unstable();
            block.dedup();
            Ok(block)
        })
        .collect::<Result<_>>()?;
    Ok(RationalSet::from_vec(blocks.concat()))
}

pub fn product_set(a: &RationalSet, b: &RationalSet) -> Result<RationalSet> {
    pairwise_set(a, b, multiply)
}

pub fn quotient_set(a: &RationalSet, b: &RationalSet) -> Result<RationalSet> {
    pairwise_set(a, b, divide)
}

pub fn reciprocal_set(b: &RationalSet) -> RationalSet {
    // reversing keeps the order: x < y iff 1/y < 1/x
    RationalSet::from_sorted(b.iter().rev().map(|&f| reciprocal(f)).collect())
}

/// A uniformly random `k`-subset of `F(Q, Q')`, fixed by `seed`.
pub fn random_subset(p: &FareyParams, k: usize, seed: u64) -> Result<RationalSet> {
    let universe = enumerate_farey(p)?;
    sample_subset(&universe, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn sample_subset<R: rand::Rng + ?Sized>(
    universe: &RationalSet,
    k: usize,
    rng: &mut R,
) -> Result<RationalSet> {
    if k > universe.len() {
        return Err(Error::domain(format!(
            "cannot draw {k} elements from a set of {}",
            universe.len()
        )));
    }
    let mut picks = rand::seq::index::sample(rng, universe.len(), k).into_vec();
    picks.sort_unstable();
    Ok(RationalSet::from_sorted(
        picks.into_iter().map(|i| universe.as_slice()[i]).collect(),
    ))
}
