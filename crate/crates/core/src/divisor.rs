//! Divisor-count sieve `tau(m)` with its running maximum `T(x) = max_{m<=x} tau(m)`.

use crate::error::{Error, Result};

/// Largest table the sieve will build.
pub const MAX_TABLE_LIMIT: u64 = 100_000_000;

/// `tau(m)` and `T(m)` for `1 <= m <= limit`. Counts fit in `u16`: the
/// largest divisor count below `10^8` is 768.
#[derive(Clone, Debug)]
pub struct TauTable {
    limit: u64,
    tau: Vec<u16>,
    tmax: Vec<u16>,
}

impl TauTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Panics if `m` is zero or beyond the table.
    pub fn tau(&self, m: u64) -> u64 {
        assert!(
            m >= 1 && m <= self.limit,
            "tau({m}) outside table 1..={}",
            self.limit
        );
        self.tau[m as usize] as u64
    }

    /// `T(m)` for integer `m`; panics outside the table.
    pub fn tmax(&self, m: u64) -> u64 {
        assert!(
            m >= 1 && m <= self.limit,
            "T({m}) outside table 1..={}",
            self.limit
        );
        self.tmax[m as usize] as u64
    }

    /// `T(m)` for integer `m`, as a `Result`.
    pub fn running_max(&self, m: u64) -> Result<u64> {
        if m == 0 || m > self.limit {
            return Err(Error::domain(format!(
                "T({m}) requested but the divisor table covers 1..={}",
                self.limit
            )));
        }
        Ok(self.tmax[m as usize] as u64)
    }
}

/// Divisor-marking sieve: every `d <= n` adds one to each of its multiples.
pub fn build_tau_table(n: u64) -> Result<TauTable> {
    if n == 0 {
        return Err(Error::domain("divisor table limit must be positive"));
    }
    if n > MAX_TABLE_LIMIT {
        return Err(Error::capacity(
            format!("divisor table limit {n}"),
            MAX_TABLE_LIMIT as u128,
        ));
    }
    let len = n as usize + 1;
    let mut tau = vec![0u16; len];
    for d in 1..len {
        for m in (d..len).step_by(d) {
            tau[m] += 1;
        }
    }
    let mut tmax = vec![0u16; len];
    for m in 1..len {
        tmax[m] = tmax[m - 1].max(tau[m]);
    }
    Ok(TauTable {
        limit: n,
        tau,
        tmax,
    })
}

/// `T(floor(x))`.
pub fn tau_max(table: &TauTable, x: f64) -> Result<u64> {
    if !(x >= 1.0) {
        return Err(Error::domain(format!("T(x) needs x >= 1, got {x}")));
    }
    let m = x.floor();
    if m > table.limit as f64 {
        return Err(Error::domain(format!(
            "T({x}) requested but the divisor table covers 1..={}",
            table.limit
        )));
    }
    table.running_max(m as u64)
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "cannot factor 0");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `tau(n)` by trial division, for values outside any table.
pub fn tau(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `exp(log 2 * log x / log log x)`: the classical divisor bound with its
/// `o(1)` dropped. A reference curve only; nothing is certified from it.
pub fn divisor_bound_reference(x: f64) -> Result<f64> {
    if !(x > std::f64::consts::E.exp()) {
        return Err(Error::domain(format!(
            "divisor reference curve needs x > e^e, got {x}"
        )));
    }
    let lx = x.ln();
    Ok((std::f64::consts::LN_2 * lx / lx.ln()).exp())
}
