//! Expectation-maximization correction of the singleton class.
//!
//! Observed single-developer projects mix collaborative projects (which the
//! growth model describes) with projects that never intended to grow. The
//! collaborative singleton count is treated as latent:
//!
//! * E-step: given ρ, predict `n̂(1) = f(1;ρ)/(1 - f(1;ρ)) · Σ_{x>=2} n(x) = ρ·Σ_{x>=2} n(x)`,
//!   the singleton count that makes the observed `x >= 2` block Yule(ρ)-proportioned.
//! * M-step: refit ρ on `{n̂(1)} ∪ {n(x) : x >= 2}`.
//!
//! The `x >= 2` block is never modified.

use crate::error::{Error, Result};
use crate::histogram::SizeDistribution;
use crate::report::{fmt_num, Table};
use crate::row;
use crate::snapshot::{EntryExitRow, GapMask, Month};
use crate::yule::{mle_rho, mle_rho_weighted};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    /// Halt when `|Δρ| < epsilon`.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Starting ρ; `None` fits the `x >= 2` sizes alone as an ordinary
    /// (untruncated) sample, which starts below the singleton-inflated fit.
    pub rho_init: Option<f64>,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { epsilon: 1e-4, max_iterations: 500, rho_init: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmResult {
    pub rho_col: f64,
    /// Predicted collaborative singleton count (real-valued).
    pub latent_singletons: f64,
    pub observed_singletons: u64,
    pub iterations: usize,
    pub converged: bool,
    /// ρ before the first pass followed by the M-step result of every pass.
    pub rho_trace: Vec<f64>,
}

impl EmResult {
    /// Observed singletons attributed to non-collaborative projects.
    pub fn non_collaborative_singletons(&self) -> f64 {
        self.observed_singletons as f64 - self.latent_singletons
    }
}

/// The histogram used by the M-step: latent singleton count plus the
/// untouched `x >= 2` block.
pub fn corrected_histogram(dist: &SizeDistribution, latent_singletons: f64) -> Vec<(u64, f64)> {
    std::iter::once((1, latent_singletons))
        .chain(dist.iter().filter(|&(x, _)| x >= 2).map(|(x, c)| (x, c as f64)))
        .collect()
}

pub fn em_fit(dist: &SizeDistribution, cfg: &EmConfig) -> Result<EmResult> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {}", cfg.epsilon)));
    }
    if cfg.max_iterations < 1 {
        return Err(Error::Domain("max_iterations must be >= 1".into()));
    }
    let block = dist.restricted_from(2);
    if block.distinct_classes() < 2 {
        return Err(Error::Degenerate("EM needs at least two distinct sizes >= 2".into()));
    }
    let multi: f64 = block.total_projects() as f64;
    let mut rho = match cfg.rho_init {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::Domain(format!("rho_init must be positive, got {r}"))),
        None => mle_rho(&block)?.rho_hat,
    };

    let mut trace = vec![rho];
    let mut latent = rho * multi;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        // E: f(1)/(1 - f(1)) = ρ
        latent = rho * multi;
        // M
        let next = mle_rho_weighted(&corrected_histogram(dist, latent), 1)?.rho_hat;
        let delta = (next - rho).abs();
        rho = next;
        trace.push(rho);
        if delta < cfg.epsilon {
            converged = true;
            break;
        }
    }
    Ok(EmResult {
        rho_col: rho,
        latent_singletons: latent,
        observed_singletons: dist.count(1),
        iterations,
        converged,
        rho_trace: trace,
    })
}

/// Rows `month,rho_col,observed_singletons,latent_singletons,iterations,converged`.
/// A `None` month leaves the cell empty.
pub fn em_table(rows: &[(Option<Month>, EmResult)], cfg: &EmConfig) -> Table {
    let mut t = Table::new(&["month", "rho_col", "observed_singletons", "latent_singletons", "iterations", "converged"])
        .meta("epsilon", fmt_num(cfg.epsilon))
        .meta("max_iterations", cfg.max_iterations);
    for (m, r) in rows {
        t.push(row![
            crate::report::month_cell(*m),
            fmt_num(r.rho_col),
            r.observed_singletons,
            fmt_num(r.latent_singletons.round()),
            r.iterations,
            r.converged
        ]);
    }
    t
}

/// Monthly count of newly founded collaborative projects implied by the EM
/// correction: new projects minus the month's growth of the
/// non-collaborative singleton stock (`observed - latent` singletons).
///
/// `months`, `results` and `entries` are aligned by index. A month is emitted
/// only if neither it nor its predecessor is masked; the predecessor of the
/// first month has `initial_non_collaborative` non-collaborative singletons.
pub fn predicted_collaborative_entries(
    months: &[Month],
    results: &[EmResult],
    entries: &[EntryExitRow],
    mask: &GapMask,
    initial_non_collaborative: f64,
) -> Result<Vec<(Month, f64)>> {
    if months.len() != results.len() || months.len() != entries.len() {
        return Err(Error::Misaligned(format!(
            "{} months, {} EM results, {} entry rows",
            months.len(),
            results.len(),
            entries.len()
        )));
    }
    if let Some(i) = (0..months.len()).find(|&i| entries[i].month != months[i]) {
        return Err(Error::Misaligned(format!(
            "entry row for month {} at position of month {}",
            entries[i].month, months[i]
        )));
    }
    if months.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Misaligned("months must be consecutive".into()));
    }
    let mut out = Vec::with_capacity(months.len());
    let mut prev_stock = Some(initial_non_collaborative);
    for i in 0..months.len() {
        let stock = results[i].non_collaborative_singletons();
        if mask.is_masked(months[i]) {
            prev_stock = None;
            continue;
        }
        if let Some(prev) = prev_stock {
            out.push((months[i], entries[i].new_projects as f64 - (stock - prev)));
        }
        prev_stock = Some(stock);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::yule::{sample, YuleSimon};

    #[test]
    fn fixed_point_on_model_consistent_data() {
        let law = YuleSimon::new(3.0).unwrap();
        let d = law.integer_expected_counts(10_000);
        let r = em_fit(&d, &EmConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.rho_col - 3.0).abs() < 0.01, "{r:?}");
        let rel = (r.latent_singletons / r.observed_singletons as f64 - 1.0).abs();
        assert!(rel < 0.01, "{r:?}");
    }

    #[test]
    fn recovers_inflated_singletons() {
        let xs = sample(3.0, 10_000, &mut stream_rng(31, 0)).unwrap();
        let mut d = SizeDistribution::from_sizes(xs);
        let truth = d.count(1) as f64;
        d.add(1, 3 * d.count(1));
        let r = em_fit(&d, &EmConfig::default()).unwrap();
        assert!(r.converged && r.iterations <= 50, "{r:?}");
        assert!((2.8..=3.2).contains(&r.rho_col), "{r:?}");
        assert!((r.latent_singletons / truth - 1.0).abs() < 0.1, "{r:?}");
    }

    #[test]
    fn iteration_cap() {
        let xs = sample(3.0, 10_000, &mut stream_rng(32, 0)).unwrap();
        let mut d = SizeDistribution::from_sizes(xs);
        d.add(1, 20_000);
        let r = em_fit(&d, &EmConfig { max_iterations: 1, ..Default::default() }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.rho_trace.len(), 2);
    }

    #[test]
    fn trace_ends_within_epsilon() {
        let xs = sample(2.5, 5000, &mut stream_rng(33, 0)).unwrap();
        let r = em_fit(&SizeDistribution::from_sizes(xs), &EmConfig::default()).unwrap();
        let n = r.rho_trace.len();
        assert!(r.converged);
        assert!((r.rho_trace[n - 1] - r.rho_trace[n - 2]).abs() < 1e-4);
    }

    #[test]
    fn block_untouched_and_idempotent() {
        let xs = sample(3.0, 8000, &mut stream_rng(34, 0)).unwrap();
        let mut d = SizeDistribution::from_sizes(xs);
        d.add(1, 9000);
        let r = em_fit(&d, &EmConfig::default()).unwrap();
        let corrected = corrected_histogram(&d, r.latent_singletons);
        for &(x, c) in &corrected[1..] {
            assert_eq!(c.to_bits(), (d.count(x) as f64).to_bits());
        }
        // refit on the (rounded) corrected histogram
        let rounded = SizeDistribution::from_counts(corrected.iter().map(|&(x, c)| (x, c.round() as u64)));
        let again = em_fit(&rounded, &EmConfig::default()).unwrap();
        assert!((again.rho_col - r.rho_col).abs() < 2e-3, "{} vs {}", again.rho_col, r.rho_col);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(em_fit(&SizeDistribution::from_counts([(1, 10), (2, 5)]), &EmConfig::default()).is_err());
        let d = SizeDistribution::from_counts([(1, 10), (2, 5), (3, 2)]);
        assert!(em_fit(&d, &EmConfig { epsilon: 0.0, ..Default::default() }).is_err());
        assert!(em_fit(&d, &EmConfig { max_iterations: 0, ..Default::default() }).is_err());
    }

    fn em_stub(observed: u64, latent: f64) -> EmResult {
        EmResult {
            rho_col: 3.0,
            latent_singletons: latent,
            observed_singletons: observed,
            iterations: 1,
            converged: true,
            rho_trace: vec![3.0, 3.0],
        }
    }

    fn entries(month: Month, new_projects: u64) -> EntryExitRow {
        EntryExitRow { month, new_projects, ..Default::default() }
    }

    #[test]
    fn identity_when_untouched() {
        let out = predicted_collaborative_entries(&[7], &[em_stub(40, 40.0)], &[entries(7, 12)], &GapMask::new(), 0.0)
            .unwrap();
        assert_eq!(out, vec![(7, 12.0)]);
    }

    #[test]
    fn masked_month_absent() {
        let months = [1, 2, 3, 4];
        let res = [em_stub(10, 5.0), em_stub(20, 10.0), em_stub(30, 15.0), em_stub(40, 20.0)];
        let rows = [entries(1, 10), entries(2, 10), entries(3, 10), entries(4, 10)];
        let out = predicted_collaborative_entries(&months, &res, &rows, &GapMask::from_months([2]), 0.0).unwrap();
        // month 2 masked; month 3 lacks a usable predecessor
        assert_eq!(out, vec![(1, 5.0), (4, 5.0)]);
    }

    #[test]
    fn misaligned_inputs() {
        let err = predicted_collaborative_entries(&[1, 2], &[em_stub(1, 1.0)], &[entries(1, 1)], &GapMask::new(), 0.0);
        assert!(matches!(err, Err(Error::Misaligned(_))));
        let err = predicted_collaborative_entries(&[1], &[em_stub(1, 1.0)], &[entries(2, 1)], &GapMask::new(), 0.0);
        assert!(matches!(err, Err(Error::Misaligned(_))));
    }
}
