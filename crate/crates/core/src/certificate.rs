//! The level-`n` lower bound for `|A/B|`, proved by induction and replayed
//! here on concrete sets as a certificate tree.
//!
//! A node at level `m` bounds the quotient set of its own pair of sets inside
//! `F(Q, Q')`. With `k = m - 1`:
//!
//! * `m = 1` is a BASE leaf claiming `|A||B| / (QQ')`.
//! * If some coprime `(r, s)` has
//!   `|A_{r/s}||B_{r/s}| >= (QQ')^{1/(k(k+1))} / (4T (rs)^{1/k}) * |A||B|`,
//!   the node RECURSEs into `(A_{r/s}, B_{r/s})` rescaled into
//!   `F(Q/r, Q'/s)` at level `k` and inherits the child's claim.
//! * Otherwise it is a TAIL leaf: with `x = T^k (QQ')^{1/m}` the tail sum
//!   `sum_{rs > x} |A_{r/s}||B_{r/s}|` is at most `|A||B|/2`, and the node
//!   claims `|A||B| / (2T^2 x (1 + log x))`.
//!
//! `T` is `T(QQ')` recomputed at every node from that node's own bounds.
//! The root's `T` is carried along as `t_frozen` so the fixed-`T` chain can
//! also be replayed.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use serde_json::{json, Map, Value};

use crate::bounds::{conditional_bound, lemma_bound};
use crate::decomposition::{
    decompose, divisor_class_counts, exceeds, scaled_class_subset, subset_by_class,
    tail_product_sum, GcdClass,
};
use crate::divisor::TauTable;
use crate::error::{Error, Result};
use crate::rational::{quotient_set, FareyParams, RationalSet};

/// Relative band around equality in which the recursion condition is
/// re-decided in exact arithmetic.
pub const CONDITION_GUARD: f64 = 1e-12;

/// Relative slack for recomputed reals and for the closing-chain check.
const REAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Base,
    Recurse,
    Tail,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Base => "BASE",
            Branch::Recurse => "RECURSE",
            Branch::Tail => "TAIL",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateNode {
    pub level: u32,
    /// Node bounds `Q/R`, `Q'/S` where `R`, `S` are the products of the
    /// classes taken on the path from the root.
    pub q: f64,
    pub qprime: f64,
    pub card_a: u64,
    pub card_b: u64,
    /// `T` of this node's bounds.
    pub t_local: u64,
    /// `T` of the root instance.
    pub t_frozen: u64,
    pub branch: Branch,
    /// RECURSE only: the chosen class.
    pub class: Option<GcdClass>,
    /// RECURSE only: `|A_{r/s}||B_{r/s}|`.
    pub lhs7: Option<u64>,
    /// RECURSE only: right-hand side of the recursion condition.
    pub rhs7: Option<f64>,
    /// TAIL only.
    pub x: Option<f64>,
    /// TAIL only.
    pub tail_sum: Option<u64>,
    pub claimed_bound: f64,
    pub child: Option<Box<CertificateNode>>,
}

impl CertificateNode {
    /// Exponent index used by the recursion condition at this node.
    pub fn exponent_n(&self) -> u32 {
        self.level.saturating_sub(1)
    }

    pub fn depth(&self) -> u32 {
        1 + self.child.as_ref().map_or(0, |c| c.depth())
    }

    /// Nodes from the root downwards.
    pub fn nodes(&self) -> Vec<&CertificateNode> {
        let mut out = vec![self];
        let mut cur = self;
        while let Some(c) = cur.child.as_deref() {
            out.push(c);
            cur = c;
        }
        out
    }
}

/// Outcome of the recursion condition for one class.
#[derive(Clone, Copy, Debug)]
struct ConditionEval {
    holds: bool,
    rhs: f64,
    ratio: f64,
}

/// Right-hand side `(QQ')^{1/(k(k+1))} / (4T (rs)^{1/k}) * |A||B|`.
fn condition_rhs(card_product: u64, rs: u128, p: &FareyParams, k: u32, t: u64) -> f64 {
    let kk = (k * (k + 1)) as f64;
    p.product().powf(1.0 / kk) / (4.0 * t as f64 * (rs as f64).powf(1.0 / k as f64))
        * card_product as f64
}

/// Exact form of the recursion condition, raised to the power `k(k+1)`:
/// `(4T lhs)^{k(k+1)} (rs)^{k+1} >= QQ' (|A||B|)^{k(k+1)}`.
fn condition_exact(lhs: u64, card_product: u64, rs: u128, p: &FareyParams, k: u32, t: u64) -> bool {
    let kk = k * (k + 1);
    let left = BigInt::from(4u64) * BigInt::from(t) * BigInt::from(lhs);
    let left = BigRational::from_integer(Pow::pow(left, kk) * Pow::pow(BigInt::from(rs), k + 1));
    let right =
        p.exact_product() * BigRational::from_integer(Pow::pow(BigInt::from(card_product), kk));
    left >= right
}

fn evaluate_condition(
    lhs: u64,
    card_product: u64,
    rs: u128,
    p: &FareyParams,
    k: u32,
    t: u64,
) -> ConditionEval {
    let rhs = condition_rhs(card_product, rs, p, k, t);
    let lhs_f = lhs as f64;
    let ratio = lhs_f / rhs;
    let holds = if rhs.is_finite() && rhs > 0.0 && ((lhs_f - rhs) / rhs).abs() > CONDITION_GUARD {
        lhs_f >= rhs
    } else {
        condition_exact(lhs, card_product, rs, p, k, t)
    };
    ConditionEval { holds, rhs, ratio }
}

/// The TAIL threshold `T^k (QQ')^{1/(k+1)}`.
fn tail_threshold(p: &FareyParams, k: u32, t: u64) -> f64 {
    (t as f64).powi(k as i32) * p.product().powf(1.0 / (k + 1) as f64)
}

fn local_t(p: &FareyParams, table: &TauTable) -> Result<u64> {
    table.running_max(p.floor_product()).map_err(|_| {
        Error::capacity(
            format!(
                "T(QQ') at QQ' = {} needs a larger divisor table",
                p.floor_product()
            ),
            table.limit() as u128,
        )
    })
}

/// Traces the induction for `(A, B)` at level `n`.
pub fn certify(
    a: &RationalSet,
    b: &RationalSet,
    p: &FareyParams,
    n: u32,
    table: &TauTable,
) -> Result<CertificateNode> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("certification needs nonempty A and B"));
    }
    if n == 0 {
        return Err(Error::domain("level n must be at least 1"));
    }
    if !a.is_subset_of(p) || !b.is_subset_of(p) {
        return Err(Error::domain(format!(
            "input sets are not contained in F({}, {})",
            p.q(),
            p.qprime()
        )));
    }
    let t_frozen = local_t(p, table)?;
    certify_node(a, b, p, n, table, t_frozen)
}

fn certify_node(
    a: &RationalSet,
    b: &RationalSet,
    p: &FareyParams,
    level: u32,
    table: &TauTable,
    t_frozen: u64,
) -> Result<CertificateNode> {
    let t = local_t(p, table)?;
    let (card_a, card_b) = (a.len() as u64, b.len() as u64);
    let mut node = CertificateNode {
        level,
        q: p.q(),
        qprime: p.qprime(),
        card_a,
        card_b,
        t_local: t,
        t_frozen,
        branch: Branch::Base,
        class: None,
        lhs7: None,
        rhs7: None,
        x: None,
        tail_sum: None,
        claimed_bound: 0.0,
        child: None,
    };
    if level == 1 {
        node.claimed_bound = card_a as f64 * card_b as f64 / p.product();
        return Ok(node);
    }

    let k = level - 1;
    let card_product = card_a * card_b;
    let counts_a = divisor_class_counts(a);
    let counts_b = divisor_class_counts(b);
    let products: BTreeMap<GcdClass, u64> = counts_a
        .iter()
        .filter_map(|(c, &ca)| counts_b.get(c).map(|&cb| (*c, ca * cb)))
        .collect();

    let mut best: Option<(GcdClass, u64, ConditionEval)> = None;
    for (&c, &lhs) in &products {
        let eval = evaluate_condition(lhs, card_product, c.rs(), p, k, t);
        if !eval.holds {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bc, _, be)) => match eval.ratio.partial_cmp(&be.ratio) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Equal) => (c.rs(), c.r()) < (bc.rs(), bc.r()),
                _ => false,
            },
        };
        if better {
            best = Some((c, lhs, eval));
        }
    }

    if let Some((c, lhs, eval)) = best {
        let child_params = p.scaled_down(c.r(), c.s())?;
        let child = certify_node(
            &scaled_class_subset(a, c),
            &scaled_class_subset(b, c),
            &child_params,
            k,
            table,
            t_frozen,
        )?;
        node.branch = Branch::Recurse;
        node.class = Some(c);
        node.lhs7 = Some(lhs);
        node.rhs7 = Some(eval.rhs);
        node.claimed_bound = child.claimed_bound;
        node.child = Some(Box::new(child));
        return Ok(node);
    }

    let x = tail_threshold(p, k, t);
    let tail: u64 = products
        .iter()
        .filter(|(c, _)| exceeds(c.rs(), x))
        .map(|(_, &v)| v)
        .sum();
    node.branch = Branch::Tail;
    node.x = Some(x);
    node.tail_sum = Some(tail);
    node.claimed_bound = conditional_bound(card_a, card_b, t, x)?;
    if tail as u128 * 2 > card_product as u128 {
        return Err(Error::CertificationFailure {
            message: format!(
                "no class satisfies the recursion condition, yet the tail sum {tail} exceeds |A||B|/2 = {}",
                card_product as f64 / 2.0
            ),
            node: Box::new(node),
        });
    }
    Ok(node)
}

/// Result of re-checking a certificate against its input sets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Validation {
    pub diagnostics: Vec<String>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

fn close(recorded: f64, recomputed: f64) -> bool {
    recorded == recomputed
        || (recorded - recomputed).abs() <= REAL_TOLERANCE * recomputed.abs().max(recorded.abs())
}

/// Recomputes every node from `A`, `B` and the root bounds recorded in the
/// certificate. Sets at each level are rebuilt by filtering, counts and
/// tail sums are recomputed through the decomposition, and each claim is
/// compared with the exact size of that node's quotient set.
pub fn validate(
    cert: &CertificateNode,
    a: &RationalSet,
    b: &RationalSet,
    table: &TauTable,
) -> Validation {
    let mut v = Validation::default();
    let p = match FareyParams::new(cert.q, cert.qprime) {
        Ok(p) => p,
        Err(e) => {
            v.diagnostics.push(format!("root: bad bounds: {e}"));
            return v;
        }
    };
    if !a.is_subset_of(&p) || !b.is_subset_of(&p) {
        v.diagnostics
            .push("root: input sets are not inside the recorded bounds".into());
        return v;
    }
    let t_frozen = match table.running_max(p.floor_product()) {
        Ok(t) => t,
        Err(e) => {
            v.diagnostics.push(format!("root: {e}"));
            return v;
        }
    };
    validate_node(
        cert,
        a.clone(),
        b.clone(),
        p,
        t_frozen,
        table,
        "root",
        &mut v,
    );
    v
}

#[allow(clippy::too_many_arguments)]
fn validate_node(
    node: &CertificateNode,
    a: RationalSet,
    b: RationalSet,
    p: FareyParams,
    t_frozen: u64,
    table: &TauTable,
    path: &str,
    v: &mut Validation,
) {
    let mut errors: Vec<String> = Vec::new();
    let mut fail = |msg: String| errors.push(format!("{path}: {msg}"));
    let (card_a, card_b) = (a.len() as u64, b.len() as u64);
    if node.level == 0 {
        fail("level 0".into());
        v.diagnostics.extend(errors);
        return;
    }
    if node.q != p.q() || node.qprime != p.qprime() {
        fail(format!(
            "bounds ({}, {}) differ from recomputed ({}, {})",
            node.q,
            node.qprime,
            p.q(),
            p.qprime()
        ));
    }
    if node.card_a != card_a || node.card_b != card_b {
        fail(format!(
            "cardinalities ({}, {}) differ from recomputed ({card_a}, {card_b})",
            node.card_a, node.card_b
        ));
    }
    let t = match table.running_max(p.floor_product()) {
        Ok(t) => t,
        Err(e) => {
            fail(e.to_string());
            v.diagnostics.extend(errors);
            return;
        }
    };
    if node.t_local != t {
        fail(format!(
            "t_local {} differs from recomputed {t}",
            node.t_local
        ));
    }
    if node.t_frozen != t_frozen {
        fail(format!(
            "t_frozen {} differs from root T {t_frozen}",
            node.t_frozen
        ));
    }
    if t > t_frozen {
        fail(format!("T increased along the recursion: {t} > {t_frozen}"));
    }
    let is_base = node.branch == Branch::Base;
    if is_base != (node.level == 1) {
        fail(format!(
            "branch {} at level {}",
            node.branch.as_str(),
            node.level
        ));
    }
    if node.branch != Branch::Recurse && node.child.is_some() {
        fail("leaf node has a child".into());
    }
    let card_product = card_a * card_b;
    let k = node.exponent_n();

    match node.branch {
        Branch::Base => {
            let expected = card_a as f64 * card_b as f64 / p.product();
            if !close(node.claimed_bound, expected) {
                fail(format!(
                    "base claim {} differs from {expected}",
                    node.claimed_bound
                ));
            }
        }
        Branch::Recurse => {
            let (Some(c), Some(lhs), Some(rhs), Some(child)) =
                (node.class, node.lhs7, node.rhs7, node.child.as_deref())
            else {
                fail("RECURSE node missing class, condition values or child".into());
                v.diagnostics.extend(errors);
                return;
            };
            if node.level < 2 {
                v.diagnostics.extend(errors);
                return;
            }
            let sub_a = subset_by_class(&a, c);
            let sub_b = subset_by_class(&b, c);
            let recomputed = sub_a.len() as u64 * sub_b.len() as u64;
            if lhs != recomputed {
                fail(format!("lhs7 {lhs} differs from recomputed {recomputed}"));
            }
            let expected_rhs = condition_rhs(card_product, c.rs(), &p, k, t);
            if !close(rhs, expected_rhs) {
                fail(format!("rhs7 {rhs} differs from recomputed {expected_rhs}"));
            }
            if !evaluate_condition(recomputed, card_product, c.rs(), &p, k, t).holds {
                fail(format!(
                    "recursion condition fails for class ({}, {})",
                    c.r(),
                    c.s()
                ));
            }
            if child.level + 1 != node.level {
                fail(format!(
                    "child level {} under level {}",
                    child.level, node.level
                ));
            }
            if node.claimed_bound != child.claimed_bound {
                fail("RECURSE claim differs from the child's claim".into());
            }
            match p.scaled_down(c.r(), c.s()) {
                Ok(child_params) => validate_node(
                    child,
                    scaled_class_subset(&a, c),
                    scaled_class_subset(&b, c),
                    child_params,
                    t_frozen,
                    table,
                    &format!("{path}/({},{})", c.r(), c.s()),
                    v,
                ),
                Err(e) => v.diagnostics.push(format!("{path}: {e}")),
            }
        }
        Branch::Tail => {
            let (Some(x), Some(tail)) = (node.x, node.tail_sum) else {
                fail("TAIL node missing threshold or tail sum".into());
                v.diagnostics.extend(errors);
                return;
            };
            if node.level < 2 {
                v.diagnostics.extend(errors);
                return;
            }
            let expected_x = tail_threshold(&p, k, t);
            if !close(x, expected_x) {
                fail(format!(
                    "threshold {x} differs from recomputed {expected_x}"
                ));
            }
            match decompose(&a, &b) {
                Ok(table) => {
                    let recomputed = tail_product_sum(&table, x);
                    if tail != recomputed {
                        fail(format!(
                            "tail sum {tail} differs from recomputed {recomputed}"
                        ));
                    }
                    if recomputed as u128 * 2 > card_product as u128 {
                        fail(format!("tail hypothesis fails: {recomputed} > |A||B|/2"));
                    }
                }
                Err(e) => fail(e.to_string()),
            }
            match conditional_bound(card_a, card_b, t, x) {
                Ok(expected) if close(node.claimed_bound, expected) => {}
                Ok(expected) => fail(format!(
                    "tail claim {} differs from {expected}",
                    node.claimed_bound
                )),
                Err(e) => fail(e.to_string()),
            }
        }
    }

    match quotient_set(&a, &b) {
        Ok(qs) => {
            if node.claimed_bound > qs.len() as f64 {
                fail(format!(
                    "claim {} exceeds |A/B| = {}",
                    node.claimed_bound,
                    qs.len()
                ));
            }
        }
        Err(e) => fail(e.to_string()),
    }
    match lemma_bound(card_a, card_b, &p, node.level, t) {
        Ok(lb) if node.claimed_bound >= lb * (1.0 - REAL_TOLERANCE) => {}
        Ok(lb) => fail(format!(
            "claim {} is below the level-{} bound {lb}",
            node.claimed_bound, node.level
        )),
        Err(e) => fail(e.to_string()),
    }
    v.diagnostics.extend(errors);
}

fn real_to_json(x: f64) -> Value {
    let abs = x.abs();
    if abs != 0.0 && !(1e-5..1e16).contains(&abs) {
        Value::String(format!("{x:e}"))
    } else {
        Value::String(format!("{x}"))
    }
}

impl CertificateNode {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("level".into(), json!(self.level));
        m.insert("exponent_n".into(), json!(self.exponent_n()));
        m.insert("q".into(), real_to_json(self.q));
        m.insert("qprime".into(), real_to_json(self.qprime));
        m.insert("card_a".into(), json!(self.card_a));
        m.insert("card_b".into(), json!(self.card_b));
        m.insert("t_local".into(), json!(self.t_local));
        m.insert("t_frozen".into(), json!(self.t_frozen));
        m.insert("branch".into(), json!(self.branch.as_str()));
        m.insert("r".into(), json!(self.class.map(|c| c.r())));
        m.insert("s".into(), json!(self.class.map(|c| c.s())));
        m.insert("lhs7".into(), json!(self.lhs7));
        m.insert("rhs7".into(), self.rhs7.map_or(Value::Null, real_to_json));
        m.insert("x".into(), self.x.map_or(Value::Null, real_to_json));
        m.insert("tail_sum".into(), json!(self.tail_sum));
        m.insert("claimed_bound".into(), real_to_json(self.claimed_bound));
        m.insert(
            "child".into(),
            self.child.as_ref().map_or(Value::Null, |c| c.to_json()),
        );
        Value::Object(m)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json())
            .expect("certificate JSON is always serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |msg: String| Error::Parse {
            line: 0,
            message: msg,
        };
        let obj = value
            .as_object()
            .ok_or_else(|| bad("certificate node must be a JSON object".into()))?;
        let field = |name: &str| -> Result<&Value> {
            obj.get(name)
                .ok_or_else(|| bad(format!("missing field {name:?}")))
        };
        let uint = |name: &str| -> Result<u64> {
            field(name)?
                .as_u64()
                .ok_or_else(|| bad(format!("field {name:?} must be an unsigned integer")))
        };
        let opt_uint = |name: &str| -> Result<Option<u64>> {
            match field(name)? {
                Value::Null => Ok(None),
                v => v.as_u64().map(Some).ok_or_else(|| {
                    bad(format!(
                        "field {name:?} must be an unsigned integer or null"
                    ))
                }),
            }
        };
        let real = |name: &str, v: &Value| -> Result<f64> {
            let s = v
                .as_str()
                .ok_or_else(|| bad(format!("field {name:?} must be a decimal string")))?;
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("field {name:?}: {s:?} is not a finite real")))
        };
        let opt_real = |name: &str| -> Result<Option<f64>> {
            match field(name)? {
                Value::Null => Ok(None),
                v => real(name, v).map(Some),
            }
        };
        let small = |name: &str, v: u64| -> Result<u32> {
            u32::try_from(v).map_err(|_| bad(format!("field {name:?} out of range")))
        };

        let level = small("level", uint("level")?)?;
        if let Some(e) = obj.get("exponent_n") {
            if e.as_u64() != Some(level.saturating_sub(1) as u64) {
                return Err(bad(format!(
                    "exponent_n must equal level - 1 = {}",
                    level.saturating_sub(1)
                )));
            }
        }
        let branch = match field("branch")?.as_str() {
            Some("BASE") => Branch::Base,
            Some("RECURSE") => Branch::Recurse,
            Some("TAIL") => Branch::Tail,
            _ => return Err(bad("branch must be one of BASE, RECURSE, TAIL".into())),
        };
        let class = match (opt_uint("r")?, opt_uint("s")?) {
            (None, None) => None,
            (Some(r), Some(s)) => Some(GcdClass::new(r, s).map_err(|e| bad(e.to_string()))?),
            _ => return Err(bad("r and s must both be present or both null".into())),
        };
        let child = match field("child")? {
            Value::Null => None,
            v => Some(Box::new(CertificateNode::from_json(v)?)),
        };
        Ok(CertificateNode {
            level,
            q: real("q", field("q")?)?,
            qprime: real("qprime", field("qprime")?)?,
            card_a: uint("card_a")?,
            card_b: uint("card_b")?,
            t_local: uint("t_local")?,
            t_frozen: uint("t_frozen")?,
            branch,
            class,
            lhs7: opt_uint("lhs7")?,
            rhs7: opt_real("rhs7")?,
            x: opt_real("x")?,
            tail_sum: opt_uint("tail_sum")?,
            claimed_bound: real("claimed_bound", field("claimed_bound")?)?,
            child,
        })
    }
}
