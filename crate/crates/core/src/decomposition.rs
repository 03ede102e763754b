//! Gcd-class decomposition of `A x B`.
//!
//! A pair `(a/a', b/b')` belongs to class `r/s` when `gcd(a, b) = r` and
//! `gcd(a', b') = s`. The classes partition `A x B`. For each class the table
//! also records `|A_{r/s}|` and `|B_{r/s}|`, the elements whose numerator is
//! divisible by `r` and denominator by `s`.
//!
//! Two ranges of `(r, s)` appear. Realized classes are those met by some
//! pair. Divisor classes are all `(r, s)` with `r | a` and `s | a'` for some
//! element; they are coprime automatically, and tail sums run over them so
//! that classes with no pair but with nonzero `|A_{r/s}| |B_{r/s}|` are still
//! counted.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::divisor::{divisors, tau};
use crate::error::{Error, Result};
use crate::rational::{divide, gcd, RationalSet, ReducedFraction};

/// Default cap on `|A| * |B|` for pair enumeration.
pub const DEFAULT_PAIR_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GcdClass {
    r: u64,
    s: u64,
}

impl GcdClass {
    pub const UNIT: GcdClass = GcdClass { r: 1, s: 1 };

    pub fn new(r: u64, s: u64) -> Result<Self> {
        if r == 0 || s == 0 || gcd(r, s) != 1 {
            return Err(Error::domain(format!(
                "gcd class needs coprime positive (r, s), got ({r}, {s})"
            )));
        }
        Ok(GcdClass { r, s })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn rs(&self) -> u128 {
        self.r as u128 * self.s as u128
    }

    pub fn divides(&self, f: &ReducedFraction) -> bool {
        f.num() % self.r == 0 && f.den() % self.s == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    /// `|M(A x B, r/s)|`
    pub count_m: u64,
    /// `|A_{r/s}|`
    pub count_a: u64,
    /// `|B_{r/s}|`
    pub count_b: u64,
}

/// For every `(r, s)` with `r | num` and `s | den` for some element of a set,
/// the number of such elements.
pub fn divisor_class_counts(set: &RationalSet) -> BTreeMap<GcdClass, u64> {
    let mut counts: HashMap<GcdClass, u64> = HashMap::new();
    for f in set {
        let ds = divisors(f.den());
        for r in divisors(f.num()) {
            for &s in &ds {
                *counts.entry(GcdClass { r, s }).or_insert(0) += 1;
            }
        }
    }
    counts.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct DecompositionTable {
    card_a: u64,
    card_b: u64,
    realized: BTreeMap<GcdClass, ClassCounts>,
    divisor_counts_a: BTreeMap<GcdClass, u64>,
    divisor_counts_b: BTreeMap<GcdClass, u64>,
}

impl DecompositionTable {
    pub fn card_a(&self) -> u64 {
        self.card_a
    }

    pub fn card_b(&self) -> u64 {
        self.card_b
    }

    /// Realized classes in `(r, s)` order.
    pub fn classes(&self) -> impl Iterator<Item = (GcdClass, ClassCounts)> + '_ {
        self.realized.iter().map(|(&c, &n)| (c, n))
    }

    pub fn get(&self, c: GcdClass) -> Option<ClassCounts> {
        self.realized.get(&c).copied()
    }

    pub fn num_classes(&self) -> usize {
        self.realized.len()
    }

    /// `|A_{r/s}|` for any `(r, s)`, realized or not.
    pub fn count_a(&self, c: GcdClass) -> u64 {
        self.divisor_counts_a.get(&c).copied().unwrap_or(0)
    }

    pub fn count_b(&self, c: GcdClass) -> u64 {
        self.divisor_counts_b.get(&c).copied().unwrap_or(0)
    }

    /// Every `(r, s)` with `|A_{r/s}| |B_{r/s}| > 0`, with that product.
    pub fn divisor_class_products(&self) -> impl Iterator<Item = (GcdClass, u64)> + '_ {
        self.divisor_counts_a
            .iter()
            .filter_map(|(c, &ca)| self.divisor_counts_b.get(c).map(|&cb| (*c, ca * cb)))
    }
}

pub fn gcd_class(a: &ReducedFraction, b: &ReducedFraction) -> GcdClass {
    GcdClass {
        r: gcd(a.num(), b.num()),
        s: gcd(a.den(), b.den()),
    }
}

pub fn decompose(a: &RationalSet, b: &RationalSet) -> Result<DecompositionTable> {
    decompose_with_cap(a, b, DEFAULT_PAIR_CAP)
}

pub fn decompose_with_cap(
    a: &RationalSet,
    b: &RationalSet,
    cap: u64,
) -> Result<DecompositionTable> {
    let pairs = a.len() as u128 * b.len() as u128;
    if pairs > cap as u128 {
        return Err(Error::capacity(
            format!("|A|*|B| = {pairs} pairs"),
            cap as u128,
        ));
    }
    let class_m: HashMap<GcdClass, u64> = a
        .as_slice()
        .par_iter()
        .fold(HashMap::new, |mut acc, x| {
            for y in b {
                *acc.entry(gcd_class(x, y)).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut lhs, rhs| {
            for (c, n) in rhs {
                *lhs.entry(c).or_insert(0) += n;
            }
            lhs
        });
    let divisor_counts_a = divisor_class_counts(a);
    let divisor_counts_b = divisor_class_counts(b);
    let realized = class_m
        .into_iter()
        .map(|(c, count_m)| {
            let counts = ClassCounts {
                count_m,
                count_a: divisor_counts_a[&c],
                count_b: divisor_counts_b[&c],
            };
            (c, counts)
        })
        .collect();
    Ok(DecompositionTable {
        card_a: a.len() as u64,
        card_b: b.len() as u64,
        realized,
        divisor_counts_a,
        divisor_counts_b,
    })
}

/// `S_{r/s}`: elements with `r | num` and `s | den`.
pub fn subset_by_class(set: &RationalSet, c: GcdClass) -> RationalSet {
    set.iter().copied().filter(|f| c.divides(f)).collect()
}

/// `S_{r/s}` with every element `q/q'` replaced by `(q/r)/(q'/s)`, which puts
/// it in `F(Q/r, Q'/s)`. All elements move by the same factor `s/r`, so
/// quotient sets are unchanged up to that factor and their sizes are equal.
pub fn scaled_class_subset(set: &RationalSet, c: GcdClass) -> RationalSet {
    let scaled = set
        .iter()
        .filter(|f| c.divides(f))
        .map(|f| ReducedFraction::from_coprime(f.num() / c.r, f.den() / c.s))
        .collect();
    RationalSet::from_sorted(scaled)
}

/// Whether `rs > x`, exactly: for integer `rs` this is `rs > floor(x)`.
pub(crate) fn exceeds(rs: u128, x: f64) -> bool {
    let fx = x.floor();
    if fx >= u128::MAX as f64 {
        return false;
    }
    rs > fx as u128
}

/// `sum_{rs > x} |A_{r/s}| |B_{r/s}|` over all coprime `(r, s)`.
pub fn tail_product_sum(table: &DecompositionTable, x: f64) -> u64 {
    table
        .divisor_class_products()
        .filter(|(c, _)| exceeds(c.rs(), x))
        .map(|(_, p)| p)
        .sum()
}

/// `max_{rs > x} |A_{r/s}| |B_{r/s}|` over the same range as
/// [`tail_product_sum`]; zero when the range is empty.
pub fn tail_max_product(table: &DecompositionTable, x: f64) -> u64 {
    table
        .divisor_class_products()
        .filter(|(c, _)| exceeds(c.rs(), x))
        .map(|(_, p)| p)
        .max()
        .unwrap_or(0)
}

/// Number of pairs `(a, b)` in each class with `a / b = target`.
pub fn representation_counts(
    a: &RationalSet,
    b: &RationalSet,
    target: ReducedFraction,
) -> BTreeMap<GcdClass, u64> {
    let mut out = BTreeMap::new();
    for x in a {
        // b = x / target; a value that overflows cannot be an element of B
        if let Ok(y) = divide(*x, target) {
            if b.contains(&y) {
                *out.entry(gcd_class(x, &y)).or_insert(0) += 1;
            }
        }
    }
    out
}

pub fn representation_count(
    a: &RationalSet,
    b: &RationalSet,
    target: ReducedFraction,
    c: GcdClass,
) -> u64 {
    representation_counts(a, b, target)
        .get(&c)
        .copied()
        .unwrap_or(0)
}

/// `sum_{q/q' in S} tau(q) tau(q')`, which is `sum tau(q q')` since the parts
/// are coprime.
pub fn membership_sum(set: &RationalSet) -> u64 {
    set.iter().map(|f| tau(f.num()) * tau(f.den())).sum()
}

/// Number of ordered pairs `(r, s)` of positive integers with `rs <= x`.
pub fn lattice_pair_count(x: f64) -> Result<u64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "lattice count needs finite x >= 1, got {x}"
        )));
    }
    let n = x.floor() as u64;
    // hyperbola method: 2 * sum_{r <= sqrt n} floor(n/r) - floor(sqrt n)^2
    let mut root = (n as f64).sqrt() as u64;
    while root * root > n {
        root -= 1;
    }
    while (root + 1) * (root + 1) <= n {
        root += 1;
    }
    let head: u64 = (1..=root).map(|r| n / r).sum();
    Ok(2 * head - root * root)
}
