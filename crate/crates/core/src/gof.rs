//! Kolmogorov-Smirnov goodness of fit for the Yule-Simon hypothesis with a
//! semi-parametric bootstrap p-value: every synthetic sample is refitted
//! before its KS distance is taken.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::SizeDistribution;
use crate::report::{fmt_num, Table};
use crate::rng::{stream_rng, GENERATOR_ID};
use crate::row;
use crate::snapshot::Month;
use crate::yule::{mle_rho, YuleSampler, YuleSimon};

pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const MIN_BOOTSTRAP: usize = 100;
/// Fraction of replica fit failures above which the test is aborted.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// `max_x |ECDF(x) - F(x; ρ)|` over integers `1..=max observed size`.
///
/// The ECDF is right-continuous and flat between observed atoms while `F`
/// increases, so the supremum is attained at an atom or just before one.
pub fn ks_statistic(dist: &SizeDistribution, rho: f64) -> Result<f64> {
    if dist.total_projects() < 1 {
        return Err(Error::Insufficient("KS statistic needs at least one observation".into()));
    }
    let law = YuleSimon::new(rho)?;
    Ok(ks_with(dist, &law))
}

fn ks_with(dist: &SizeDistribution, law: &YuleSimon) -> f64 {
    let n = dist.total_projects() as f64;
    let mut below = 0u64;
    let mut d: f64 = 0.0;
    for (x, c) in dist.iter() {
        if x > 1 {
            // just before the atom: ECDF still at the previous level
            d = d.max((below as f64 / n - law.cdf(x - 1)).abs());
        }
        below += c;
        d = d.max((below as f64 / n - law.cdf(x)).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GofConfig {
    pub n_bootstrap: usize,
    pub seed: u64,
    /// Use `(k + 1)/(B + 1)` instead of `k/B`.
    pub plus_one_smoothing: bool,
}

impl GofConfig {
    pub fn new(n_bootstrap: usize, seed: u64) -> Self {
        Self { n_bootstrap, seed, plus_one_smoothing: false }
    }
}

impl Default for GofConfig {
    fn default() -> Self {
        Self::new(DEFAULT_BOOTSTRAP, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GofResult {
    pub rho_hat: f64,
    pub ks_observed: f64,
    pub p_value: f64,
    pub n_bootstrap: usize,
    pub seed: u64,
    /// Synthetic statistics `>= ks_observed`.
    pub exceedances: usize,
    pub replica_failures: usize,
    pub plus_one_smoothing: bool,
    /// Synthetic KS statistics by replica index (`NaN` for failed fits).
    pub bootstrap_statistics: Vec<f64>,
}

/// Fraction of `statistics` at or above `observed`; `NaN` entries are skipped.
pub fn pvalue_from_statistics(statistics: &[f64], observed: f64, plus_one: bool) -> f64 {
    let valid = statistics.iter().filter(|s| !s.is_nan());
    let (mut k, mut b) = (0usize, 0usize);
    for &s in valid {
        b += 1;
        if s >= observed {
            k += 1;
        }
    }
    if plus_one {
        (k + 1) as f64 / (b + 1) as f64
    } else if b == 0 {
        f64::NAN
    } else {
        k as f64 / b as f64
    }
}

pub fn bootstrap_pvalue(dist: &SizeDistribution, n_bootstrap: usize, seed: u64) -> Result<GofResult> {
    bootstrap_pvalue_with(dist, &GofConfig::new(n_bootstrap, seed))
}

/// Replica `b` draws from stream `b` of `cfg.seed`, so results do not depend
/// on the thread count.
pub fn bootstrap_pvalue_with(dist: &SizeDistribution, cfg: &GofConfig) -> Result<GofResult> {
    if cfg.n_bootstrap < MIN_BOOTSTRAP {
        return Err(Error::Domain(format!(
            "n_bootstrap must be >= {MIN_BOOTSTRAP}, got {}",
            cfg.n_bootstrap
        )));
    }
    let fit = mle_rho(dist)?;
    let law = YuleSimon::new(fit.rho_hat)?;
    let ks_observed = ks_with(dist, &law);
    let sampler = YuleSampler::new(fit.rho_hat)?;
    let n = dist.total_projects() as usize;

    let statistics: Vec<f64> = (0..cfg.n_bootstrap as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(cfg.seed, b);
            let synthetic = SizeDistribution::from_sizes(sampler.sample(n, &mut rng));
            match mle_rho(&synthetic).and_then(|f| YuleSimon::new(f.rho_hat)) {
                Ok(refit) => ks_with(&synthetic, &refit),
                Err(_) => f64::NAN,
            }
        })
        .collect();

    let replica_failures = statistics.iter().filter(|s| s.is_nan()).count();
    if replica_failures as f64 > MAX_FAILURE_RATE * cfg.n_bootstrap as f64 {
        return Err(Error::ReplicaFailures { failed: replica_failures, total: cfg.n_bootstrap });
    }
    let exceedances = statistics.iter().filter(|&&s| s >= ks_observed).count();
    Ok(GofResult {
        rho_hat: fit.rho_hat,
        ks_observed,
        p_value: pvalue_from_statistics(&statistics, ks_observed, cfg.plus_one_smoothing),
        n_bootstrap: cfg.n_bootstrap,
        seed: cfg.seed,
        exceedances,
        replica_failures,
        plus_one_smoothing: cfg.plus_one_smoothing,
        bootstrap_statistics: statistics,
    })
}

/// Rows `month,rho_hat,ks,p_value,B,seed`.
/// A `None` month leaves the cell empty.
pub fn gof_table(rows: &[(Option<Month>, GofResult)]) -> Table {
    let mut t = Table::new(&["month", "rho_hat", "ks", "p_value", "B", "seed"])
        .meta("ks_support", "integer atoms, right-continuous ECDF, no continuity correction")
        .meta("bootstrap", "semi-parametric: sample from fitted rho, refit each replica")
        .meta("generator", GENERATOR_ID);
    if let Some((_, r)) = rows.first() {
        t.push_meta("p_value_rule", if r.plus_one_smoothing { "(k+1)/(B+1)" } else { "k/B" });
    }
    for (m, r) in rows {
        t.push(row![crate::report::month_cell(*m), fmt_num(r.rho_hat), fmt_num(r.ks_observed), fmt_num(r.p_value), r.n_bootstrap, r.seed]);
    }
    t
}
