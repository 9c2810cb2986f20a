//! The Yule-Simon distribution `f(x) = ρ·B(x, ρ+1)`, `x = 1, 2, ...`.
//!
//! Everything is evaluated in log space through [`ln_gamma_ratio`], so sizes
//! up to `10^6` and beyond keep full relative accuracy. The survival function
//! has the closed form `P(X > x) = x·B(x, ρ+1) = Γ(ρ+1)Γ(x+1)/Γ(x+ρ+1)`,
//! which keeps small tail probabilities accurate without summing the pmf.

use rand::Rng;

use crate::error::{Error, Result};
use crate::histogram::SizeDistribution;
use crate::optimize::brent_minimize;
use crate::report::{fmt_num, Table};
use crate::row;
use crate::snapshot::Month;
use crate::special::{gamma_ratio, ln_gamma_fn, ln_gamma_ratio};

/// Default extent of the cached survival table used for sampling.
pub const DEFAULT_X_CACHE: u64 = 100_000;

/// Largest value returned by the sampler.
pub const SAMPLE_CAP: u64 = 1 << 62;

fn check(x: u64, rho: f64) -> Result<()> {
    if x < 1 {
        return Err(Error::Domain(format!("size must be >= 1, got {x}")));
    }
    check_rho(rho)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("rho must be positive and finite, got {rho}")));
    }
    Ok(())
}

#[inline]
fn log_pmf_unchecked(x: f64, rho: f64, ln_gamma_rho1: f64) -> f64 {
    rho.ln() + ln_gamma_rho1 + ln_gamma_ratio(x, rho + 1.0)
}

#[inline]
fn ln_survival_unchecked(x: f64, rho: f64, ln_gamma_rho1: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    ln_gamma_rho1 + ln_gamma_ratio(x + 1.0, rho)
}

pub fn log_pmf(x: u64, rho: f64) -> Result<f64> {
    check(x, rho)?;
    Ok(log_pmf_unchecked(x as f64, rho, ln_gamma_fn(rho + 1.0)))
}

pub fn pmf(x: u64, rho: f64) -> Result<f64> {
    check(x, rho)?;
    Ok(pmf_unchecked(x as f64, rho, ln_gamma_fn(rho + 1.0)))
}

#[inline]
fn pmf_unchecked(x: f64, rho: f64, ln_gamma_rho1: f64) -> f64 {
    let p = (rho.ln() + ln_gamma_rho1).exp() * gamma_ratio(x, rho + 1.0);
    if p.is_normal() {
        p
    } else {
        log_pmf_unchecked(x, rho, ln_gamma_rho1).exp()
    }
}

/// `P(X <= x)`.
pub fn cdf(x: u64, rho: f64) -> Result<f64> {
    survival(x, rho).map(|s| 1.0 - s)
}

/// `P(X > x)`, accurate in relative terms deep into the tail.
pub fn survival(x: u64, rho: f64) -> Result<f64> {
    check(x, rho)?;
    Ok(ln_survival_unchecked(x as f64, rho, ln_gamma_fn(rho + 1.0)).exp())
}

/// `ρ = 1/(1 - p₀)`.
pub fn rho_from_p0(p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Domain(format!("p0 must lie in (0, 1), got {p0}")));
    }
    Ok(1.0 / (1.0 - p0))
}

/// `p₀ = 1 - 1/ρ`.
pub fn p0_from_rho(rho: f64) -> Result<f64> {
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("rho must exceed 1, got {rho}")));
    }
    Ok(1.0 - 1.0 / rho)
}

/// A Yule-Simon law with pre-computed constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YuleSimon {
    rho: f64,
    ln_gamma_rho1: f64,
}

impl YuleSimon {
    pub fn new(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { rho, ln_gamma_rho1: ln_gamma_fn(rho + 1.0) })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn log_pmf(&self, x: u64) -> f64 {
        debug_assert!(x >= 1);
        log_pmf_unchecked(x as f64, self.rho, self.ln_gamma_rho1)
    }

    pub fn pmf(&self, x: u64) -> f64 {
        debug_assert!(x >= 1);
        pmf_unchecked(x as f64, self.rho, self.ln_gamma_rho1)
    }

    /// `P(X > x)`; `survival(0) = 1`.
    pub fn survival(&self, x: u64) -> f64 {
        ln_survival_unchecked(x as f64, self.rho, self.ln_gamma_rho1).exp()
    }

    pub fn cdf(&self, x: u64) -> f64 {
        1.0 - self.survival(x)
    }

    /// Integer histogram of `total` projects whose cumulative counts are the
    /// rounded expected cumulative counts: `Σ_{y<=x} n(y) = round(total·F(x))`.
    /// The ECDF then tracks `F` to within `0.5/total` everywhere.
    pub fn integer_expected_counts(&self, total: u64) -> SizeDistribution {
        let t = total as f64;
        let mut d = SizeDistribution::default();
        let mut placed = 0u64;
        let mut x = 1u64;
        while placed < total {
            let cum = ((t * self.cdf(x)).round() as u64).min(total);
            d.add(x, cum - placed);
            placed = cum;
            x += 1;
        }
        d
    }

    /// Expected counts `total·f(x)` for `x = 1..=max_x`.
    pub fn expected_counts(&self, total: f64, max_x: u64) -> Vec<(u64, f64)> {
        (1..=max_x).map(|x| (x, total * self.pmf(x))).collect()
    }
}

/// Inverse-transform sampler over a cached survival table, with exact
/// closed-form inversion beyond the table.
#[derive(Debug, Clone)]
pub struct YuleSampler {
    law: YuleSimon,
    /// `survival[x] = P(X > x)` for `x = 0..table_len`.
    survival: Vec<f64>,
}

/// Below this survival mass no uniform draw can land.
const SURVIVAL_FLOOR: f64 = 1.0e-18;
const REANCHOR_EVERY: u64 = 1024;

impl YuleSampler {
    pub fn new(rho: f64) -> Result<Self> {
        Self::with_cache(rho, DEFAULT_X_CACHE)
    }

    pub fn with_cache(rho: f64, x_cache: u64) -> Result<Self> {
        let law = YuleSimon::new(rho)?;
        let mut survival = vec![1.0];
        let mut s = 1.0;
        for x in 1..=x_cache.max(1) {
            // S(x) = S(x-1)·x/(x+ρ), re-anchored to the closed form periodically.
            s = if x % REANCHOR_EVERY == 0 { law.survival(x) } else { s * x as f64 / (x as f64 + rho) };
            survival.push(s);
            if s < SURVIVAL_FLOOR {
                break;
            }
        }
        Ok(Self { law, survival })
    }

    pub fn law(&self) -> &YuleSimon {
        &self.law
    }

    /// Smallest `x` with `P(X > x) <= u`, for `u` in `(0, 1]`.
    fn invert(&self, u: f64) -> u64 {
        let last = self.survival.len() - 1;
        if self.survival[last] <= u {
            // first index whose survival drops to u or below
            let idx = self.survival.partition_point(|&s| s > u);
            return idx.max(1) as u64;
        }
        self.invert_tail(u, last as u64)
    }

    fn invert_tail(&self, u: f64, mut lo: u64) -> u64 {
        // P(X > x) ≈ Γ(ρ+1)·x^(-ρ) gives a starting upper bound.
        let rho = self.law.rho;
        let guess = ((self.law.ln_gamma_rho1 - u.ln()) / rho).exp();
        let mut hi = if guess.is_finite() && guess < SAMPLE_CAP as f64 {
            (guess as u64).max(lo + 1)
        } else {
            SAMPLE_CAP
        };
        while self.law.survival(hi) > u {
            if hi >= SAMPLE_CAP / 2 {
                return SAMPLE_CAP;
            }
            lo = hi;
            hi *= 2;
        }
        // invariant: S(lo) > u >= S(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.law.survival(mid) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = 1.0 - rng.random::<f64>();
        self.invert(u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<u64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// `n` i.i.d. draws from Yule-Simon(ρ).
pub fn sample<R: Rng + ?Sized>(rho: f64, n: usize, rng: &mut R) -> Result<Vec<u64>> {
    if n < 1 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    Ok(YuleSampler::new(rho)?.sample(n, rng))
}

/// Result of a maximum-likelihood fit of ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YuleFit {
    pub rho_hat: f64,
    pub log_likelihood: f64,
    pub n_observations: u64,
    /// `1 - 1/ρ̂`; negative when ρ̂ < 1.
    pub derived_p0: f64,
    /// `ρ̂ > 1`, i.e. inside the range the growth model can generate.
    pub domain_flag: bool,
    pub iterations: usize,
}

const LOG_RHO_TOL: f64 = 1e-8;
const MLE_MAX_ITER: usize = 500;
const BRACKET_LO: f64 = 1e-3;
const BRACKET_HI: f64 = 1e3;
const MAX_WIDENINGS: usize = 4;

/// Log-likelihood of ρ for a histogram, optionally left-truncated at `min_size`
/// (observations below `min_size` are ignored and the rest are conditioned on
/// `X >= min_size`).
pub fn log_likelihood(dist: &SizeDistribution, rho: f64, min_size: u64) -> Result<f64> {
    let law = YuleSimon::new(rho)?;
    Ok(ll_with(&law, &collect_points(dist, min_size), min_size))
}

fn collect_points(dist: &SizeDistribution, min_size: u64) -> Vec<(f64, f64)> {
    dist.iter()
        .filter(|&(x, _)| x >= min_size.max(1))
        .map(|(x, c)| (x as f64, c as f64))
        .collect()
}

fn collect_weighted(points: &[(u64, f64)], min_size: u64) -> Vec<(f64, f64)> {
    points
        .iter()
        .filter(|&&(x, w)| x >= min_size.max(1) && w > 0.0)
        .map(|&(x, w)| (x as f64, w))
        .collect()
}

fn ll_with(law: &YuleSimon, points: &[(f64, f64)], min_size: u64) -> f64 {
    let rho = law.rho;
    let mut ll = 0.0;
    let mut total = 0.0;
    for &(x, c) in points {
        ll += c * log_pmf_unchecked(x, rho, law.ln_gamma_rho1);
        total += c;
    }
    if min_size > 1 {
        ll -= total * ln_survival_unchecked((min_size - 1) as f64, rho, law.ln_gamma_rho1);
    }
    ll
}

/// Maximum-likelihood estimate of ρ over the full support.
pub fn mle_rho(dist: &SizeDistribution) -> Result<YuleFit> {
    mle_rho_truncated(dist, 1)
}

/// Maximum-likelihood estimate of ρ from the sizes `>= min_size`, conditioning
/// on `X >= min_size`. `min_size = 1` is the ordinary fit.
pub fn mle_rho_truncated(dist: &SizeDistribution, min_size: u64) -> Result<YuleFit> {
    let min_size = min_size.max(1);
    fit_points(collect_points(dist, min_size), min_size)
}

/// Maximum-likelihood estimate from real-valued counts `(size, weight)`,
/// e.g. expected counts or a histogram with a latent (fractional) class.
pub fn mle_rho_weighted(points: &[(u64, f64)], min_size: u64) -> Result<YuleFit> {
    let min_size = min_size.max(1);
    fit_points(collect_weighted(points, min_size), min_size)
}

fn fit_points(points: Vec<(f64, f64)>, min_size: u64) -> Result<YuleFit> {
    let n: f64 = points.iter().map(|p| p.1).sum();
    if n < 2.0 {
        return Err(Error::Degenerate(format!(
            "need at least 2 projects of size >= {min_size}, got {n}"
        )));
    }
    if points.iter().all(|p| p.0 as u64 == min_size) {
        return Err(Error::Degenerate(format!(
            "all observations equal the smallest admissible size {min_size}; likelihood has no maximum"
        )));
    }
    let neg_ll = |u: f64| {
        let law = YuleSimon { rho: u.exp(), ln_gamma_rho1: ln_gamma_fn(u.exp() + 1.0) };
        -ll_with(&law, &points, min_size)
    };

    let (mut lo, mut hi) = (BRACKET_LO.ln(), BRACKET_HI.ln());
    let mut iterations = 0;
    for _ in 0..=MAX_WIDENINGS {
        let m = brent_minimize(neg_ll, lo, hi, LOG_RHO_TOL / 2.0, MLE_MAX_ITER);
        iterations += m.iterations;
        if !m.converged {
            return Err(Error::NonConvergence { iterations, best: m.x.exp() });
        }
        let width = hi - lo;
        if m.x - lo < 1e-6 {
            lo -= width;
        } else if hi - m.x < 1e-6 {
            hi += width;
        } else {
            let rho_hat = m.x.exp();
            return Ok(YuleFit {
                rho_hat,
                log_likelihood: -m.value,
                n_observations: n.round() as u64,
                derived_p0: 1.0 - 1.0 / rho_hat,
                domain_flag: rho_hat > 1.0,
                iterations,
            });
        }
    }
    Err(Error::NonConvergence { iterations, best: ((lo + hi) / 2.0).exp() })
}

/// Rows `month,rho_hat,log_likelihood,n_observations,derived_p0,domain_flag,iterations`.
/// A `None` month leaves the cell empty.
pub fn fit_table(rows: &[(Option<Month>, YuleFit)], min_size: u64) -> Table {
    let mut t = Table::new(&[
        "month",
        "rho_hat",
        "log_likelihood",
        "n_observations",
        "derived_p0",
        "domain_flag",
        "iterations",
    ])
    .meta("min_size", min_size);
    for (m, f) in rows {
        t.push(row![
            crate::report::month_cell(*m),
            fmt_num(f.rho_hat),
            fmt_num(f.log_likelihood),
            f.n_observations,
            fmt_num(f.derived_p0),
            f.domain_flag,
            f.iterations
        ]);
    }
    t
}
