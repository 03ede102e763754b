//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed; exits nonzero
//! when any criterion fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use productset::bounds::lemma_bound;
use productset::certificate::{certify, validate};
use productset::decomposition::{
    decompose, lattice_pair_count, membership_sum, representation_counts, tail_max_product,
    tail_product_sum,
};
use productset::divisor::{build_tau_table, tau_max, TauTable};
use productset::rational::{
    enumerate_farey, product_set, quotient_set, random_subset, reciprocal_set,
};
use productset::search::{
    exhaustive_min, is_geometric, structured_construction, Construction, Objective,
};
use productset::text::parse_fraction;
use productset::{FareyParams, RationalSet};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Instance {
    p: FareyParams,
    a: RationalSet,
    b: RationalSet,
}

/// Seeded instances with integer heights in `1..=max_height` and set sizes
/// up to `min(|F|, max_size)`.
fn instances(count: usize, max_height: u32, max_size: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let q = rng.gen_range(1..=max_height) as f64;
            let qp = rng.gen_range(1..=max_height) as f64;
            let p = FareyParams::new(q, qp).unwrap();
            let size = enumerate_farey(&p).unwrap().len().min(max_size);
            let ka = rng.gen_range(1..=size);
            let kb = rng.gen_range(1..=size);
            let a = random_subset(&p, ka, rng.gen()).unwrap();
            let b = random_subset(&p, kb, rng.gen()).unwrap();
            Instance { p, a, b }
        })
        .collect()
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(took)
}

/// Divisor count by trial division.
fn tau_oracle(mut n: u64) -> u64 {
    let mut count = 1;
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        count *= e + 1;
        d += 1;
    }
    if n > 1 {
        count *= 2;
    }
    count
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn table_for(insts: &[Instance]) -> TauTable {
    let top = insts.iter().map(|i| i.p.floor_product()).max().unwrap_or(1);
    build_tau_table(top).unwrap()
}

fn c1_partition(insts: &[Instance]) -> Outcome {
    let start = Instant::now();
    for (i, inst) in insts.iter().enumerate() {
        let t = decompose(&inst.a, &inst.b).map_err(|e| e.to_string())?;
        let total: u64 = t.classes().map(|(_, c)| c.count_m).sum();
        let expected = (inst.a.len() * inst.b.len()) as u64;
        ensure!(
            total == expected,
            "instance {i}: class sizes sum to {total}, |A||B| = {expected}"
        );
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("{} instances in {took:.2?}", insts.len()))
}

fn c2_class_inequality(insts: &[Instance]) -> Outcome {
    let mut classes = 0;
    for (i, inst) in insts.iter().enumerate() {
        let t = decompose(&inst.a, &inst.b).map_err(|e| e.to_string())?;
        for (c, counts) in t.classes() {
            classes += 1;
            ensure!(
                counts.count_m <= counts.count_a * counts.count_b,
                "instance {i}, class {c:?}: {counts:?}"
            );
        }
    }
    Ok(format!("{classes} classes, no violations"))
}

fn c3_representations() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    for q in 2..=12 {
        let p = FareyParams::new(q as f64, q as f64).unwrap();
        let f = enumerate_farey(&p).unwrap();
        for target in &quotient_set(&f, &f).unwrap() {
            let bound = tau_oracle(target.num()) * tau_oracle(target.den());
            for (c, count) in representation_counts(&f, &f, *target) {
                checked += 1;
                ensure!(
                    count <= bound,
                    "Q={q}, {target}, class {c:?}: {count} > {bound}"
                );
            }
        }
    }
    let took = within(Duration::from_secs(60), start)?;
    Ok(format!("{checked} (target, class) pairs in {took:.2?}"))
}

fn c4_membership(insts: &[Instance], small: &[Instance]) -> Outcome {
    let table = table_for(insts);
    for (i, inst) in insts.iter().enumerate() {
        let t = tau_max(&table, inst.p.product()).map_err(|e| e.to_string())?;
        for s in [&inst.a, &inst.b] {
            let m = membership_sum(s);
            ensure!(
                m <= s.len() as u64 * t,
                "instance {i}: membership sum {m} > {} * {t}",
                s.len()
            );
        }
    }
    for (i, inst) in small.iter().enumerate() {
        let s = &inst.a;
        ensure!(s.len() <= 50, "small instance {i} has {} elements", s.len());
        let (qn, qd) = (inst.p.floor_q(), inst.p.floor_qprime());
        let mut direct = 0u64;
        for r in 1..=qn {
            for d in 1..=qd {
                if gcd(r, d) == 1 {
                    direct += s
                        .iter()
                        .filter(|f| f.num() % r == 0 && f.den() % d == 0)
                        .count() as u64;
                }
            }
        }
        ensure!(
            direct == membership_sum(s),
            "small instance {i}: {direct} != {}",
            membership_sum(s)
        );
    }
    Ok(format!(
        "{} bounded, {} identities exact",
        insts.len(),
        small.len()
    ))
}

fn c5_lattice() -> Outcome {
    let mut direct = 0u64;
    for x in 1..=10_000u64 {
        // pairs with rs <= x grow by tau(x) at each step
        direct += tau_oracle(x);
        let count = lattice_pair_count(x as f64).map_err(|e| e.to_string())?;
        ensure!(count == direct, "x={x}: {count} != {direct}");
        let xf = x as f64;
        ensure!(
            (count as f64) <= xf * (1.0 + xf.ln()),
            "x={x}: {count} > x(1 + ln x)"
        );
    }
    Ok("x = 1..10^4".into())
}

fn c6_cauchy(insts: &[Instance]) -> Outcome {
    for (i, inst) in insts.iter().enumerate() {
        let t = decompose(&inst.a, &inst.b).map_err(|e| e.to_string())?;
        let (ma, mb) = (
            membership_sum(&inst.a) as f64,
            membership_sum(&inst.b) as f64,
        );
        for x in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let lhs = tail_product_sum(&t, x);
            let rhs = (tail_max_product(&t, x) as f64).sqrt() * ma.sqrt() * mb.sqrt();
            ensure!(lhs as f64 <= rhs, "instance {i}, x={x}: {lhs} > {rhs}");
        }
    }
    Ok(format!("{} instances x 5 thresholds", insts.len()))
}

fn c7_lemma(insts: &[Instance], table: &TauTable) -> Outcome {
    for (i, inst) in insts.iter().enumerate() {
        let t = tau_max(table, inst.p.product()).map_err(|e| e.to_string())?;
        let exact = quotient_set(&inst.a, &inst.b)
            .map_err(|e| e.to_string())?
            .len() as f64;
        for n in 1..=5 {
            let b = lemma_bound(inst.a.len() as u64, inst.b.len() as u64, &inst.p, n, t)
                .map_err(|e| e.to_string())?;
            ensure!(
                b <= exact,
                "instance {i}, n={n}: bound {b} > |A/B| = {exact}"
            );
        }
    }
    Ok(format!("{} instances x 5 levels", insts.len()))
}

fn c8_certificates(insts: &[Instance], table: &TauTable) -> Outcome {
    let start = Instant::now();
    let mut tails = 0;
    for (i, inst) in insts.iter().enumerate() {
        let exact = quotient_set(&inst.a, &inst.b)
            .map_err(|e| e.to_string())?
            .len() as f64;
        let t = tau_max(table, inst.p.product()).map_err(|e| e.to_string())?;
        for n in 1..=3 {
            let cert = certify(&inst.a, &inst.b, &inst.p, n, table)
                .map_err(|e| format!("instance {i}, n={n}: {e}"))?;
            ensure!(
                cert.claimed_bound <= exact,
                "instance {i}, n={n}: claim above |A/B|"
            );
            let lemma = lemma_bound(inst.a.len() as u64, inst.b.len() as u64, &inst.p, n, t)
                .map_err(|e| e.to_string())?;
            ensure!(
                cert.claimed_bound >= lemma,
                "instance {i}, n={n}: claim below lemma bound"
            );
            let v = validate(&cert, &inst.a, &inst.b, table);
            ensure!(v.is_valid(), "instance {i}, n={n}: {:?}", v.diagnostics);
            tails += cert
                .nodes()
                .iter()
                .filter(|c| c.branch.as_str() == "TAIL")
                .count();
        }
    }
    let took = within(Duration::from_secs(300), start)?;
    Ok(format!(
        "{} certificates ({tails} tail leaves) in {took:.2?}",
        3 * insts.len()
    ))
}

fn c9_sieve() -> Outcome {
    let table = build_tau_table(1_000_000).map_err(|e| e.to_string())?;
    for (x, expected) in [(4u64, 3u64), (11, 4), (10_000, 64), (1_000_000, 240)] {
        let got = tau_max(&table, x as f64).map_err(|e| e.to_string())?;
        ensure!(got == expected, "T({x}) = {got}, expected {expected}");
        let oracle = (1..=x).map(tau_oracle).max().unwrap();
        ensure!(oracle == expected, "oracle T({x}) = {oracle}");
        let argmax = (1..=x).find(|&m| table.tau(m) == got).unwrap();
        ensure!(
            tau_oracle(argmax) == got,
            "tau({argmax}) disagrees with the oracle"
        );
    }
    let n = 100_000u64;
    let lhs: u64 = (1..=n).map(|m| table.tau(m)).sum();
    let rhs: u64 = (1..=n).map(|d| n / d).sum();
    ensure!(lhs == rhs, "summatory identity: {lhs} != {rhs}");
    Ok("T(4)=3, T(11)=4, T(10^4)=64, T(10^6)=240; summatory identity at 10^5".into())
}

fn c10_farey_size() -> Outcome {
    const N: usize = 1000;
    let mut phi: Vec<u64> = (0..=N as u64).collect();
    for i in 2..=N {
        if phi[i] == i as u64 {
            for j in (i..=N).step_by(i) {
                phi[j] -= phi[j] / i as u64;
            }
        }
    }
    let mut sum = 0;
    for q in 1..=N {
        sum += phi[q];
        let p = FareyParams::new(q as f64, q as f64).unwrap();
        let size = enumerate_farey(&p).map_err(|e| e.to_string())?.len() as u64;
        ensure!(
            size == 2 * sum - 1,
            "Q={q}: |F| = {size}, expected {}",
            2 * sum - 1
        );
    }
    Ok("Q = 1..1000".into())
}

fn c11_corollary(insts: &[Instance]) -> Outcome {
    for (i, inst) in insts.iter().enumerate() {
        let prod = product_set(&inst.a, &inst.b).map_err(|e| e.to_string())?;
        let quot = quotient_set(&inst.a, &reciprocal_set(&inst.b)).map_err(|e| e.to_string())?;
        ensure!(
            prod.len() == quot.len(),
            "instance {i}: {} != {}",
            prod.len(),
            quot.len()
        );
    }
    Ok(format!("{} instances", insts.len()))
}

fn c12_extremal() -> Outcome {
    let p = FareyParams::new(3.0, 3.0).unwrap();
    let r = exhaustive_min(&p, 3, Objective::Quotient, true).map_err(|e| e.to_string())?;
    ensure!(r.objective == 5, "minimum {} instead of 5", r.objective);
    ensure!(
        is_geometric(&r.witness_a),
        "witness {:?} is not geometric",
        r.witness_a
    );
    let big = FareyParams::new(5000.0, 5000.0).unwrap();
    let mut built = 0;
    for (start, ratio) in [
        ("1", "2"),
        ("1/8", "2"),
        ("1/9", "3"),
        ("16/81", "3/2"),
        ("1", "3/5"),
    ] {
        for k in 2..=6 {
            let kind = Construction::Geometric {
                start: parse_fraction(start).unwrap(),
                ratio: parse_fraction(ratio).unwrap(),
            };
            let g = structured_construction(kind, &big, k).map_err(|e| e.to_string())?;
            let size = quotient_set(&g, &g).map_err(|e| e.to_string())?.len();
            ensure!(
                size == 2 * k - 1,
                "start {start}, ratio {ratio}, k={k}: |G/G| = {size}"
            );
            built += 1;
        }
    }
    Ok(format!(
        "exhaustive minimum 5 with witness {:?}; {built} progressions",
        r.witness_a
    ))
}

fn c13_performance() -> Outcome {
    let p = FareyParams::new(2000.0, 2000.0).unwrap();
    let a = random_subset(&p, 3000, 1).map_err(|e| e.to_string())?;
    let b = random_subset(&p, 3000, 2).map_err(|e| e.to_string())?;
    let mut results: Vec<(usize, Duration, RationalSet)> = Vec::new();
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let start = Instant::now();
        let set = pool
            .install(|| product_set(&a, &b))
            .map_err(|e| e.to_string())?;
        let took = within(Duration::from_secs(60), start)?;
        results.push((threads, took, set));
    }
    ensure!(
        results[0].2 == results[1].2,
        "outputs differ between 1 and 4 threads"
    );
    Ok(format!(
        "|AB| = {}; 1 thread {:.2?}, 4 threads {:.2?}",
        results[0].2.len(),
        results[0].1,
        results[1].1
    ))
}

fn c14_determinism() -> Outcome {
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_productset"))
            .args([
                "report",
                "--q",
                "30",
                "--qprime",
                "25",
                "--instances",
                "60",
                "--seed",
                "2024",
            ])
            .env("PRODUCTSET_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "report exited with {:?}", out.status);
        Ok(out.stdout)
    };
    let outputs = [run("1")?, run("1")?, run("4")?, run("4")?];
    let distinct: BTreeSet<&Vec<u8>> = outputs.iter().collect();
    ensure!(distinct.len() == 1, "{} distinct outputs", distinct.len());
    Ok(format!("{} bytes, identical over 4 runs", outputs[0].len()))
}

fn main() {
    let crit1 = instances(200, 50, 200, 0xC0FFEE);
    let small = instances(50, 50, 50, 0xBEEF);
    let crit7 = instances(1000, 30, 200, 0x5EED);
    let table7 = table_for(&crit7);

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("partition identity", Box::new(|| c1_partition(&crit1))),
        ("class inequality", Box::new(|| c2_class_inequality(&crit1))),
        ("representation bound", Box::new(c3_representations)),
        ("membership sum", Box::new(|| c4_membership(&crit1, &small))),
        ("lattice count", Box::new(c5_lattice)),
        ("Cauchy step", Box::new(|| c6_cauchy(&crit1))),
        ("lemma soundness", Box::new(|| c7_lemma(&crit7, &table7))),
        (
            "certificate soundness and totality",
            Box::new(|| c8_certificates(&crit7, &table7)),
        ),
        ("sieve cross-checks", Box::new(c9_sieve)),
        ("Farey size", Box::new(c10_farey_size)),
        (
            "product/quotient duality",
            Box::new(|| c11_corollary(&crit1)),
        ),
        ("extremal baseline", Box::new(c12_extremal)),
        ("performance", Box::new(c13_performance)),
        ("determinism", Box::new(c14_determinism)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
