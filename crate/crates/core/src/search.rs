//! Searches for sets with small quotient or product sets: exhaustive at tiny
//! sizes, the usual structured candidates, and seeded hill climbing.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{
    divide, enumerate_farey, multiply, FareyParams, RationalSet, ReducedFraction,
};

/// Largest number of candidates [`exhaustive_min`] will evaluate.
pub const EXHAUSTIVE_CAP: u128 = 10_000_000;
pub const DEFAULT_ITERS: u32 = 1000;
pub const DEFAULT_RESTARTS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Quotient,
    Product,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::Quotient => "quotient",
            Objective::Product => "product",
        }
    }

    fn apply(&self, x: ReducedFraction, y: ReducedFraction) -> Result<ReducedFraction> {
        match self {
            Objective::Quotient => divide(x, y),
            Objective::Product => multiply(x, y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exhaustive,
    Construction,
    Local,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exhaustive => "exhaustive",
            Method::Construction => "construction",
            Method::Local => "local",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub objective: u64,
    pub witness_a: RationalSet,
    pub witness_b: RationalSet,
    pub q: f64,
    pub qprime: f64,
    pub k: usize,
    pub method: Method,
}

impl SearchResult {
    pub fn to_json(&self) -> Value {
        let texts = |s: &RationalSet| s.iter().map(|f| f.to_string()).collect::<Vec<_>>();
        json!({
            "objective": self.objective,
            "method": self.method.to_string(),
            "q": self.q,
            "qprime": self.qprime,
            "k": self.k,
            "witness_a": texts(&self.witness_a),
            "witness_b": texts(&self.witness_b),
        })
    }
}

/// `|A/B|` or `|AB|`, reusing `buf` between calls.
fn objective_size(
    objective: Objective,
    a: &[ReducedFraction],
    b: &[ReducedFraction],
    buf: &mut Vec<ReducedFraction>,
) -> Result<u64> {
    buf.clear();
    for &x in a {
        for &y in b {
            buf.push(objective.apply(x, y)?);
        }
    }
    buf.sort_unstable();
    buf.dedup();
    Ok(buf.len() as u64)
}

/// Exact size of `A/B` or `AB` for two sets.
pub fn objective_value(objective: Objective, a: &RationalSet, b: &RationalSet) -> Result<u64> {
    objective_size(objective, a.as_slice(), b.as_slice(), &mut Vec::new())
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic
/// order; false after the last one.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn pick(universe: &[ReducedFraction], idx: &[usize]) -> Vec<ReducedFraction> {
    idx.iter().map(|&i| universe[i]).collect()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("k must lie in 1..={n}, got {k}")));
    }
    Ok(())
}

/// Global minimum over all `k`-subsets (`A = B` when `symmetric`). Ties go
/// to the lexicographically first witness in the canonical order.
pub fn exhaustive_min(
    p: &FareyParams,
    k: usize,
    objective: Objective,
    symmetric: bool,
) -> Result<SearchResult> {
    let universe = enumerate_farey(p)?;
    let n = universe.len();
    check_k(k, n)?;
    let combos = binomial(n as u128, k as u128).unwrap_or(u128::MAX);
    let candidates = if symmetric {
        combos
    } else {
        combos.saturating_mul(combos)
    };
    if candidates > EXHAUSTIVE_CAP {
        return Err(Error::capacity(
            format!("{candidates} candidate subsets (use local search instead)"),
            EXHAUSTIVE_CAP,
        ));
    }
    let u = universe.as_slice();
    let mut buf = Vec::with_capacity(k * k);
    let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
    let mut ia: Vec<usize> = (0..k).collect();
    loop {
        let a = pick(u, &ia);
        let mut ib: Vec<usize> = (0..k).collect();
        loop {
            let b = if symmetric { a.clone() } else { pick(u, &ib) };
            let value = objective_size(objective, &a, &b, &mut buf)?;
            if best.as_ref().map_or(true, |(v, _, _)| value < *v) {
                best = Some((
                    value,
                    ia.clone(),
                    if symmetric { ia.clone() } else { ib.clone() },
                ));
            }
            if symmetric || !next_combination(&mut ib, n) {
                break;
            }
        }
        if !next_combination(&mut ia, n) {
            break;
        }
    }
    let (objective_value, ia, ib) = best.expect("at least one combination");
    Ok(SearchResult {
        objective: objective_value,
        witness_a: RationalSet::from_vec(pick(u, &ia)),
        witness_b: RationalSet::from_vec(pick(u, &ib)),
        q: p.q(),
        qprime: p.qprime(),
        k,
        method: Method::Exhaustive,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// `{start * ratio^i : 0 <= i < k}`
    Geometric {
        start: ReducedFraction,
        ratio: ReducedFraction,
    },
    /// The `k` lowest-height elements of `F(Q, Q')` with numerator and
    /// denominator both `bound`-smooth; height is `max(num, den)`, ties by value.
    Smooth { bound: u64 },
}

fn is_smooth(mut m: u64, bound: u64) -> bool {
    let mut p = 2;
    while p <= bound && m > 1 {
        while m % p == 0 {
            m /= p;
        }
        p += 1;
    }
    m == 1
}

pub fn structured_construction(
    kind: Construction,
    p: &FareyParams,
    k: usize,
) -> Result<RationalSet> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    match kind {
        Construction::Geometric { start, ratio } => {
            if ratio == ReducedFraction::ONE {
                return Err(Error::domain("geometric ratio must differ from 1"));
            }
            let mut out = Vec::with_capacity(k);
            let mut x = start;
            for i in 0..k {
                if !p.contains(&x) {
                    return Err(Error::domain(format!(
                        "geometric term {i} = {x} lies outside F({}, {})",
                        p.q(),
                        p.qprime()
                    )));
                }
                out.push(x);
                if i + 1 < k {
                    x = multiply(x, ratio)?;
                }
            }
            Ok(RationalSet::from_vec(out))
        }
        Construction::Smooth { bound } => {
            let mut smooth: Vec<ReducedFraction> = enumerate_farey(p)?
                .into_vec()
                .into_iter()
                .filter(|f| is_smooth(f.num(), bound) && is_smooth(f.den(), bound))
                .collect();
            if smooth.len() < k {
                return Err(Error::domain(format!(
                    "only {} elements of F({}, {}) are {bound}-smooth, need {k}",
                    smooth.len(),
                    p.q(),
                    p.qprime()
                )));
            }
            smooth.sort_by(|x, y| {
                x.num()
                    .max(x.den())
                    .cmp(&y.num().max(y.den()))
                    .then(x.cmp(y))
            });
            smooth.truncate(k);
            Ok(RationalSet::from_vec(smooth))
        }
    }
}

/// A geometric `k`-progression through 1 inside the bounds, trying ratios
/// `a/b` by increasing `a + b`, then `a`.
pub fn find_geometric(p: &FareyParams, k: usize) -> Option<RationalSet> {
    let qn = p.floor_q();
    let qd = p.floor_qprime();
    let max_a = qn.max(qd);
    for total in 3..=(2 * max_a) {
        for a in (total / 2 + 1)..total {
            let b = total - a;
            if b == 0 || a > max_a || crate::rational::gcd(a, b) != 1 {
                continue;
            }
            let ratio = ReducedFraction::new(a, b).ok()?;
            for j in 0..k as u32 {
                // start = (b/a)^j
                let (Some(sn), Some(sd)) = (b.checked_pow(j), a.checked_pow(j)) else {
                    break;
                };
                let start = ReducedFraction::new(sn, sd).ok()?;
                if let Ok(g) =
                    structured_construction(Construction::Geometric { start, ratio }, p, k)
                {
                    return Some(g);
                }
            }
        }
    }
    None
}

/// Smallest smoothness bound that yields `k` elements.
fn smooth_start(p: &FareyParams, k: usize) -> Option<RationalSet> {
    let top = p.floor_q().max(p.floor_qprime()).max(2);
    (2..=top).find_map(|bound| structured_construction(Construction::Smooth { bound }, p, k).ok())
}

struct Climb {
    value: u64,
    a: Vec<usize>,
    b: Vec<usize>,
}

fn index_of(universe: &RationalSet, s: &RationalSet) -> Vec<usize> {
    s.iter()
        .map(|f| {
            universe
                .as_slice()
                .binary_search(f)
                .expect("start lies in the universe")
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn climb(
    universe: &RationalSet,
    start: Option<RationalSet>,
    k: usize,
    objective: Objective,
    symmetric: bool,
    iters: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Climb> {
    let u = universe.as_slice();
    let n = u.len();
    let random_start = |rng: &mut ChaCha8Rng| rand::seq::index::sample(rng, n, k).into_vec();
    let mut a = match &start {
        Some(s) => index_of(universe, s),
        None => random_start(rng),
    };
    let mut b = match (&start, symmetric) {
        (_, true) => a.clone(),
        (Some(s), false) => index_of(universe, s),
        (None, false) => random_start(rng),
    };
    let mut member_a = vec![false; n];
    let mut member_b = vec![false; n];
    a.iter().for_each(|&i| member_a[i] = true);
    b.iter().for_each(|&i| member_b[i] = true);

    let mut buf = Vec::with_capacity(k * k);
    let eval = |a: &[usize], b: &[usize], buf: &mut Vec<ReducedFraction>| -> Result<u64> {
        let (sa, sb) = (pick(u, a), pick(u, b));
        objective_size(objective, &sa, &sb, buf)
    };
    let mut current = eval(&a, if symmetric { &a } else { &b }, &mut buf)?;
    let mut best = Climb {
        value: current,
        a: a.clone(),
        b: if symmetric { a.clone() } else { b.clone() },
    };
    if k == n {
        return Ok(best);
    }
    for _ in 0..iters {
        let on_b = !symmetric && rng.gen_bool(0.5);
        let (set, member) = if on_b {
            (&mut b, &mut member_b)
        } else {
            (&mut a, &mut member_a)
        };
        let pos = rng.gen_range(0..k);
        let incoming = loop {
            let c = rng.gen_range(0..n);
            if !member[c] {
                break c;
            }
        };
        let outgoing = set[pos];
        set[pos] = incoming;
        member[outgoing] = false;
        member[incoming] = true;
        let value = eval(&a, if symmetric { &a } else { &b }, &mut buf)?;
        if value <= current {
            current = value;
            if value < best.value {
                best = Climb {
                    value,
                    a: a.clone(),
                    b: if symmetric { a.clone() } else { b.clone() },
                };
            }
        } else {
            let (set, member) = if on_b {
                (&mut b, &mut member_b)
            } else {
                (&mut a, &mut member_a)
            };
            set[pos] = outgoing;
            member[incoming] = false;
            member[outgoing] = true;
        }
    }
    Ok(best)
}

/// Swap-neighbourhood hill climbing. Runs one start seeded with a geometric
/// progression (when one fits), one with the smallest smooth set, and
/// `restarts` random starts. Start `i` draws from its own ChaCha8 stream `i`
/// of `seed`, so the result does not depend on how restarts are scheduled.
#[allow(clippy::too_many_arguments)]
pub fn local_search_min(
    p: &FareyParams,
    k: usize,
    objective: Objective,
    symmetric: bool,
    iters: u32,
    restarts: u32,
    seed: u64,
) -> Result<SearchResult> {
    let universe = enumerate_farey(p)?;
    check_k(k, universe.len())?;
    let mut starts: Vec<Option<RationalSet>> = vec![find_geometric(p, k), smooth_start(p, k)];
    starts.retain(|s| s.is_some());
    starts.extend((0..restarts).map(|_| None));

    let results: Vec<(RationalSet, RationalSet, u64)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, start)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let c = climb(&universe, start, k, objective, symmetric, iters, &mut rng)?;
            let u = universe.as_slice();
            Ok((
                RationalSet::from_vec(pick(u, &c.a)),
                RationalSet::from_vec(pick(u, &c.b)),
                c.value,
            ))
        })
        .collect::<Result<_>>()?;
    let (witness_a, witness_b, value) = results
        .into_iter()
        .min_by(|x, y| {
            x.2.cmp(&y.2)
                .then_with(|| x.0.as_slice().cmp(y.0.as_slice()))
                .then_with(|| x.1.as_slice().cmp(y.1.as_slice()))
        })
        .expect("at least one restart");
    Ok(SearchResult {
        objective: value,
        witness_a,
        witness_b,
        q: p.q(),
        qprime: p.qprime(),
        k,
        method: Method::Local,
    })
}

/// Whether the elements, in increasing order, have a constant ratio.
pub fn is_geometric(s: &RationalSet) -> bool {
    let v = s.as_slice();
    if v.len() < 3 {
        return true;
    }
    let first = divide(v[1], v[0]);
    v.windows(2).all(
        |w| matches!((divide(w[1], w[0]), &first), (Ok(r), Ok(f)) if r.cmp(f) == Ordering::Equal),
    )
}
