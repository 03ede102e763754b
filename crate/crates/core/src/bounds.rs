//! Lower bounds for `|A/B|` and their comparison with exact set sizes.
//!
//! Two families live here. The certified ones, [`conditional_bound`] and
//! [`lemma_bound`], are finite formulas that must never exceed the true size.
//! The asymptotic ones ([`theorem1_reference`], [`theorem_a_reference`],
//! [`corollary_reference`]) are evaluated with their `o(1)` terms set to zero;
//! they are reference curves and are labelled as such wherever they are
//! printed. All logarithms are natural.

use serde_json::{json, Map, Value};

use crate::divisor::{tau_max, TauTable};
use crate::error::{Error, Result};
use crate::format::format_real;
use crate::rational::{product_set, quotient_set, FareyParams, RationalSet};

/// Exponent constant in the quotient-set theorem: `2 sqrt(log 2)`.
pub fn theorem1_constant() -> f64 {
    2.0 * std::f64::consts::LN_2.sqrt()
}

/// Exponent constant in the product-set corollary: `4 sqrt(log 2)`.
pub fn corollary_constant() -> f64 {
    4.0 * std::f64::consts::LN_2.sqrt()
}

/// Exponent constant of the earlier product-set bound.
pub const THEOREM_A_CONSTANT: f64 = 9.0;

pub const REFERENCE_NOTE: &str =
    "thm1_ref, thmA_ref and cor_ref drop their o(1) terms: reference curves, not certified bounds";

/// `|A||B| / (2 T^2 x (1 + log x))`.
///
/// Only a valid lower bound when the tail sum over `rs > x` is at most
/// `|A||B|/2`; the certificate tracer checks that before using it.
pub fn conditional_bound(card_a: u64, card_b: u64, t: u64, x: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::domain("T must be at least 1"));
    }
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "threshold x must be finite and >= 1, got {x}"
        )));
    }
    let t = t as f64;
    Ok(card_a as f64 * card_b as f64 / (2.0 * t * t * x * (1.0 + x.ln())))
}

/// `|A||B| / ((4T)^{n+1} (QQ')^{1/n} (1 + log QQ'))` with `T = T(QQ')`.
pub fn lemma_bound(card_a: u64, card_b: u64, p: &FareyParams, n: u32, t: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("level n must be at least 1"));
    }
    if t == 0 {
        return Err(Error::domain("T must be at least 1"));
    }
    let qq = p.product();
    let denom = (4.0 * t as f64).powi(n as i32 + 1) * qq.powf(1.0 / n as f64) * (1.0 + qq.ln());
    Ok(card_a as f64 * card_b as f64 / denom)
}

/// Past `ceil(log QQ')` the `(4T)^{n+1}` factor dominates.
pub fn default_n_max(p: &FareyParams) -> u32 {
    (p.product().ln().ceil() as u32).max(1)
}

/// The level in `1..=n_max` with the largest lemma bound, smallest on ties.
pub fn best_n(card_a: u64, card_b: u64, p: &FareyParams, t: u64, n_max: u32) -> Result<(u32, f64)> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let mut best = (1, lemma_bound(card_a, card_b, p, 1, t)?);
    for n in 2..=n_max {
        let b = lemma_bound(card_a, card_b, p, n, t)?;
        if b > best.1 {
            best = (n, b);
        }
    }
    Ok(best)
}

fn asymptotic(card_a: u64, card_b: u64, constant: f64, height: f64, name: &str) -> Result<f64> {
    let l = height.ln();
    if !(l.ln() > 0.0) || !height.is_finite() {
        return Err(Error::domain(format!(
            "{name} needs log log of its height argument positive, got {height}"
        )));
    }
    Ok(card_a as f64 * card_b as f64 * (-constant * l / l.ln().sqrt()).exp())
}

/// `|A||B| exp(-2 sqrt(log 2) log(QQ') / sqrt(log log QQ'))`, `o(1)` dropped.
pub fn theorem1_reference(card_a: u64, card_b: u64, p: &FareyParams) -> Result<f64> {
    asymptotic(
        card_a,
        card_b,
        theorem1_constant(),
        p.product(),
        "theorem1_reference",
    )
}

/// `|A||B| exp(-9 log Q / sqrt(log log Q))`, `o(1)` dropped.
pub fn theorem_a_reference(card_a: u64, card_b: u64, q: f64) -> Result<f64> {
    asymptotic(card_a, card_b, THEOREM_A_CONSTANT, q, "theorem_a_reference")
}

/// `|A||B| exp(-4 sqrt(log 2) log Q / sqrt(log log Q))`, as printed, `o(1)`
/// dropped.
pub fn corollary_reference(card_a: u64, card_b: u64, q: f64) -> Result<f64> {
    asymptotic(
        card_a,
        card_b,
        corollary_constant(),
        q,
        "corollary_reference",
    )
}

/// The quotient-set reference at `Q' = Q`, i.e. with `sqrt(log log Q^2)` in
/// the denominator; differs from [`corollary_reference`] by a factor that
/// the `o(1)` absorbs.
pub fn theorem1_equal_heights_reference(card_a: u64, card_b: u64, q: f64) -> Result<f64> {
    asymptotic(
        card_a,
        card_b,
        theorem1_constant(),
        q * q,
        "theorem1_equal_heights_reference",
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub q: f64,
    pub qprime: f64,
    pub card_a: u64,
    pub card_b: u64,
    /// `T(QQ')`
    pub t_qq: u64,
    pub actual_quotient: u64,
    pub actual_product: Option<u64>,
    /// Lemma bounds for `n = 1..=lemma_bounds.len()`.
    pub lemma_bounds: Vec<f64>,
    pub best_n: u32,
    pub best_bound: f64,
    pub thm1_ref: Option<f64>,
    pub thm_a_ref: Option<f64>,
    pub cor_ref: Option<f64>,
}

impl BoundReport {
    pub fn n_max(&self) -> u32 {
        self.lemma_bounds.len() as u32
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("q".into(), json!(self.q));
        m.insert("qprime".into(), json!(self.qprime));
        m.insert("card_a".into(), json!(self.card_a));
        m.insert("card_b".into(), json!(self.card_b));
        m.insert("t_qq".into(), json!(self.t_qq));
        m.insert("actual_quotient".into(), json!(self.actual_quotient));
        if let Some(p) = self.actual_product {
            m.insert("actual_product".into(), json!(p));
        }
        for (i, b) in self.lemma_bounds.iter().enumerate() {
            m.insert(format!("lemma_n{}", i + 1), json!(b));
        }
        m.insert("best_n".into(), json!(self.best_n));
        m.insert("best_bound".into(), json!(self.best_bound));
        m.insert("thm1_ref".into(), json!(self.thm1_ref));
        m.insert("thmA_ref".into(), json!(self.thm_a_ref));
        m.insert("cor_ref".into(), json!(self.cor_ref));
        m.insert("reference_note".into(), json!(REFERENCE_NOTE));
        Value::Object(m)
    }

    pub fn csv_header(n_max: u32) -> String {
        let mut cols: Vec<String> = ["q", "qprime", "card_a", "card_b", "t_qq", "actual_quotient"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        cols.extend((1..=n_max).map(|k| format!("lemma_n{k}")));
        cols.extend(
            ["best_n", "best_bound", "thm1_ref", "thmA_ref", "cor_ref"]
                .iter()
                .map(|s| s.to_string()),
        );
        cols.join(",")
    }

    /// Undefined reference values are empty fields.
    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
        let mut cols = vec![
            format_real(self.q),
            format_real(self.qprime),
            self.card_a.to_string(),
            self.card_b.to_string(),
            self.t_qq.to_string(),
            self.actual_quotient.to_string(),
        ];
        cols.extend(self.lemma_bounds.iter().map(|&b| format_real(b)));
        cols.push(self.best_n.to_string());
        cols.push(format_real(self.best_bound));
        cols.push(opt(self.thm1_ref));
        cols.push(opt(self.thm_a_ref));
        cols.push(opt(self.cor_ref));
        cols.join(",")
    }
}

/// Evaluates every bound for `(A, B)` and checks the certified ones against
/// the exact quotient-set size. `n_max = None` uses [`default_n_max`].
pub fn compare_actual(
    a: &RationalSet,
    b: &RationalSet,
    p: &FareyParams,
    n_max: Option<u32>,
    table: &TauTable,
    include_product: bool,
) -> Result<BoundReport> {
    if !a.is_subset_of(p) || !b.is_subset_of(p) {
        return Err(Error::domain(format!(
            "input sets are not contained in F({}, {})",
            p.q(),
            p.qprime()
        )));
    }
    let n_max = n_max.unwrap_or_else(|| default_n_max(p));
    let t = tau_max(table, p.product())?;
    let (card_a, card_b) = (a.len() as u64, b.len() as u64);
    let actual_quotient = quotient_set(a, b)?.len() as u64;
    let actual_product = if include_product {
        Some(product_set(a, b)?.len() as u64)
    } else {
        None
    };
    let lemma_bounds = (1..=n_max)
        .map(|n| lemma_bound(card_a, card_b, p, n, t))
        .collect::<Result<Vec<_>>>()?;
    let (best_n, best_bound) = best_n(card_a, card_b, p, t, n_max)?;
    for (i, &bound) in lemma_bounds.iter().enumerate() {
        if bound > actual_quotient as f64 {
            return Err(Error::BoundViolation(format!(
                "lemma bound at n={} is {bound} but |A/B| = {actual_quotient}",
                i + 1
            )));
        }
    }
    let height = p.q().max(p.qprime());
    Ok(BoundReport {
        q: p.q(),
        qprime: p.qprime(),
        card_a,
        card_b,
        t_qq: t,
        actual_quotient,
        actual_product,
        lemma_bounds,
        best_n,
        best_bound,
        thm1_ref: theorem1_reference(card_a, card_b, p).ok(),
        thm_a_ref: theorem_a_reference(card_a, card_b, height).ok(),
        cor_ref: corollary_reference(card_a, card_b, height).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::build_tau_table;
    use crate::rational::{enumerate_farey, reduce};

    fn params(q: f64, qp: f64) -> FareyParams {
        FareyParams::new(q, qp).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn conditional_examples() {
        let v = conditional_bound(10, 10, 2, 4.0).unwrap();
        let expected = 100.0 / (2.0 * 4.0 * 4.0 * (1.0 + 4f64.ln()));
        assert!(close(v, expected, 1e-15));
        assert!((v - 1.3095).abs() < 1e-3);
        assert_eq!(conditional_bound(1, 1, 1, 1.0).unwrap(), 0.5);
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let x = 1.0 + i as f64 * 0.37;
            let v = conditional_bound(7, 9, 3, x).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(conditional_bound(1, 1, 0, 1.0).is_err());
        assert!(conditional_bound(1, 1, 1, 0.5).is_err());
    }

    #[test]
    fn lemma_examples() {
        let p = params(2.0, 2.0);
        let v = lemma_bound(3, 3, &p, 1, 3).unwrap();
        let expected = 9.0 / (144.0 * 4.0 * (1.0 + 4f64.ln()));
        assert!(close(v, expected, 1e-15));
        assert!((v - 0.0065476).abs() < 1e-6);
        assert!(v <= 9.0 / 4.0);
        assert_eq!(lemma_bound(0, 0, &p, 3, 3).unwrap(), 0.0);
        assert!(lemma_bound(1, 1, &p, 0, 3).is_err());
    }

    #[test]
    fn best_n_examples() {
        let table = build_tau_table(10_000).unwrap();
        let p = params(100.0, 100.0);
        let t = tau_max(&table, p.product()).unwrap();
        assert_eq!(t, 64);
        let (n, b) = best_n(500, 700, &p, t, default_n_max(&p)).unwrap();
        assert_eq!(n, 1);
        assert_eq!(b, lemma_bound(500, 700, &p, 1, t).unwrap());
        assert_eq!(best_n(5, 5, &p, t, 1).unwrap().0, 1);
        assert_eq!(default_n_max(&p), 10);
        // huge QQ' with tiny T would favour larger n
        let q = params(1e4, 1e4);
        assert!(best_n(1, 1, &q, 1, 30).unwrap().0 > 1);
    }

    #[test]
    fn theorem1_examples() {
        let p = params(1e4, 1e4);
        let v = theorem1_reference(10_000, 10_000, &p).unwrap();
        let l = 1e8f64.ln();
        let expected = 1e8 * (-2.0 * 2f64.ln().sqrt() * l / l.ln().sqrt()).exp();
        assert!(close(v, expected, 1e-12));
        assert!((v - 1.57).abs() < 0.01);
        assert!(theorem1_reference(3, 3, &params(1.0, 2.0)).is_err());
        let w = theorem1_reference(3, 3, &params(2.0, 2.0)).unwrap();
        assert!(w < 9.0);
        assert!(close(
            theorem1_reference(20_000, 10_000, &p).unwrap(),
            2.0 * v,
            1e-15
        ));
    }

    #[test]
    fn theorem_a_and_corollary_examples() {
        let v = theorem_a_reference(100, 100, 1e4).unwrap();
        let l = 1e4f64.ln();
        let exponent = -9.0 * l / l.ln().sqrt();
        assert!(close(v, 1e4 * exponent.exp(), 1e-12));
        assert!((exponent + 55.63).abs() < 0.01, "{exponent}");
        let c = corollary_reference(50, 50, 1e3).unwrap();
        let l = 1e3f64.ln();
        assert!(close(
            c,
            2500.0 * (-4.0 * 2f64.ln().sqrt() * l / l.ln().sqrt()).exp(),
            1e-12
        ));
        for q in [20.0, 100.0, 1e4, 1e6] {
            assert!(theorem_a_reference(7, 9, q).unwrap() < corollary_reference(7, 9, q).unwrap());
        }
        let mut prev = f64::INFINITY;
        let mut q = 10.0f64;
        while q <= 1e6 {
            let v = corollary_reference(50, 50, q).unwrap();
            assert!(v < prev, "Q={q}");
            prev = v;
            q *= 1.1;
        }
        assert!(corollary_reference(1, 1, 2.0).is_err());
    }

    #[test]
    fn corollary_vs_theorem1_at_equal_heights() {
        let q = 1e3;
        let cor = corollary_reference(50, 50, q).unwrap();
        let thm = theorem1_equal_heights_reference(50, 50, q).unwrap();
        let l = q.ln();
        let ratio_exponent =
            -corollary_constant() * l * (1.0 / (2.0 * l).ln().sqrt() - 1.0 / l.ln().sqrt());
        assert!(close(thm / cor, ratio_exponent.exp(), 1e-9));
        assert!(thm > cor);
        let p = params(q, q);
        assert!(close(thm, theorem1_reference(50, 50, &p).unwrap(), 1e-12));
    }

    #[test]
    fn compare_small_instances() {
        let table = build_tau_table(10_000).unwrap();
        let p = params(2.0, 2.0);
        let f2 = enumerate_farey(&p).unwrap();
        let r = compare_actual(&f2, &f2, &p, Some(4), &table, true).unwrap();
        assert_eq!(r.actual_quotient, 5);
        assert_eq!(r.actual_product, Some(5));
        assert_eq!(r.t_qq, 3);
        assert!(r.lemma_bounds.iter().all(|&b| b < 5.0));
        let (n, b) = best_n(3, 3, &p, 3, 4).unwrap();
        assert_eq!((r.best_n, r.best_bound), (n, b));
        assert!(r.thm_a_ref.is_none());

        let one: RationalSet = [reduce(1, 1).unwrap()].into_iter().collect();
        let r = compare_actual(&one, &one, &params(1.0, 1.0), None, &table, false).unwrap();
        assert_eq!(r.actual_quotient, 1);
        assert!(r.lemma_bounds.iter().all(|&b| b <= 1.0));

        let empty = RationalSet::new();
        let r = compare_actual(&empty, &f2, &p, Some(3), &table, false).unwrap();
        assert_eq!(r.actual_quotient, 0);
        assert!(r.lemma_bounds.iter().all(|&b| b == 0.0));

        let outside: RationalSet = [reduce(3, 1).unwrap()].into_iter().collect();
        assert!(matches!(
            compare_actual(&outside, &f2, &p, None, &table, false),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn report_serialization_field_names() {
        let table = build_tau_table(100).unwrap();
        let p = params(5.0, 4.0);
        let f = enumerate_farey(&p).unwrap();
        let r = compare_actual(&f, &f, &p, Some(3), &table, false).unwrap();
        let j = r.to_json();
        let keys: Vec<&str> = j.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(
            keys,
            [
                "q",
                "qprime",
                "card_a",
                "card_b",
                "t_qq",
                "actual_quotient",
                "lemma_n1",
                "lemma_n2",
                "lemma_n3",
                "best_n",
                "best_bound",
                "thm1_ref",
                "thmA_ref",
                "cor_ref",
                "reference_note"
            ]
        );
        let header = BoundReport::csv_header(3);
        assert_eq!(
            header,
            "q,qprime,card_a,card_b,t_qq,actual_quotient,lemma_n1,lemma_n2,lemma_n3,best_n,best_bound,thm1_ref,thmA_ref,cor_ref"
        );
        let row = r.to_csv_row();
        assert_eq!(row.split(',').count(), header.split(',').count());
        assert!(row.starts_with("5,4,"));
    }
}
