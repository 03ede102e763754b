//! Batch experiments: seeded random instances, one bound report per row.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{compare_actual, default_n_max, BoundReport};
use crate::divisor::build_tau_table;
use crate::error::{Error, Result};
use crate::rational::{enumerate_farey, sample_subset, FareyParams};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "PRODUCTSET_THREADS";

/// Parses [`THREADS_ENV`]; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::domain(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

#[derive(Clone, Debug)]
pub struct ReportConfig {
    pub params: FareyParams,
    pub instances: usize,
    pub seed: u64,
    pub n_max: Option<u32>,
    pub size_min: usize,
    pub size_max: usize,
}

/// CSV with a header row and one [`BoundReport`] row per instance.
///
/// Instance `i` draws its sizes and both sets from ChaCha8 stream `i` of the
/// seed, so rows are independent of scheduling and of each other.
pub fn batch_report(config: &ReportConfig) -> Result<String> {
    let p = &config.params;
    if config.size_min == 0 || config.size_min > config.size_max {
        return Err(Error::domain(format!(
            "set sizes need 1 <= size_min <= size_max, got {}..={}",
            config.size_min, config.size_max
        )));
    }
    let n_max = config.n_max.unwrap_or_else(|| default_n_max(p));
    let mut out = BoundReport::csv_header(n_max);
    out.push('\n');
    if config.instances == 0 {
        return Ok(out);
    }
    let universe = enumerate_farey(p)?;
    let upper = config.size_max.min(universe.len());
    if config.size_min > upper {
        return Err(Error::domain(format!(
            "size_min {} exceeds |F| = {}",
            config.size_min,
            universe.len()
        )));
    }
    let table = build_tau_table(p.floor_product())?;
    let rows: Vec<String> = (0..config.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let ka = rng.gen_range(config.size_min..=upper);
            let kb = rng.gen_range(config.size_min..=upper);
            let a = sample_subset(&universe, ka, &mut rng)?;
            let b = sample_subset(&universe, kb, &mut rng)?;
            Ok(compare_actual(&a, &b, p, Some(n_max), &table, false)?.to_csv_row())
        })
        .collect::<Result<_>>()?;
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
