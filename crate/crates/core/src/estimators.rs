//! Empirical estimators over monthly series and event logs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::report::{fmt_num, Table};
use crate::row;
use crate::snapshot::{entry_exit_counts, GapMask, MembershipEventLog, Month, ProjectId, SnapshotSummary};
use crate::stats::{linear_fit, median, quantile};

/// Average days per calendar month, used to express month gaps in days.
pub const DAYS_PER_MONTH: f64 = 30.4375;

pub const MIN_INTERARRIVAL_COHORT: usize = 30;

// ---------------------------------------------------------------------------
// exponential growth

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    /// Growth rate per month (natural log scale).
    pub omega: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub p_value: f64,
    pub n_points: usize,
}

/// OLS of `ln X` on month over the unmasked points.
pub fn fit_exponential_growth(series: &[(Month, f64)], mask: &GapMask) -> Result<GrowthFit> {
    let mut xs = Vec::with_capacity(series.len());
    let mut ys = Vec::with_capacity(series.len());
    for &(m, v) in series {
        if mask.is_masked(m) {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositive { month: m, value: v });
        }
        xs.push(m as f64);
        ys.push(v.ln());
    }
    if xs.len() < 3 {
        return Err(Error::Insufficient(format!("growth fit needs >= 3 unmasked points, got {}", xs.len())));
    }
    let fit = linear_fit(&xs, &ys).ok_or_else(|| Error::Degenerate("all points share one month".into()))?;
    Ok(GrowthFit {
        omega: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        p_value: fit.slope_p_value,
        n_points: fit.n,
    })
}

// ---------------------------------------------------------------------------
// relative entry rates

/// Per-month rate; `None` when masked or undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub month: Month,
    pub g: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryRateSeries {
    pub points: Vec<RatePoint>,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

impl EntryRateSeries {
    fn from_points(points: Vec<RatePoint>) -> Result<Self> {
        let values: Vec<f64> = points.iter().filter_map(|p| p.g).collect();
        let q = |p| quantile(&values, p).ok_or_else(|| Error::Insufficient("no defined entry rates".into()));
        Ok(Self { median: q(0.5)?, q10: q(0.1)?, q90: q(0.9)?, points })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().filter_map(|p| p.g)
    }
}

/// `g(t) = (N(t) - N(t-1)) / N(t)` for one count series. The first month has
/// no predecessor and is not emitted.
pub fn relative_rates(series: &[(Month, u64)], mask: &GapMask) -> Result<Vec<RatePoint>> {
    if series.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return Err(Error::Misaligned("entry-rate series must cover consecutive months".into()));
    }
    Ok(series
        .windows(2)
        .map(|w| {
            let (prev_m, prev) = w[0];
            let (m, n) = w[1];
            let g = if mask.is_masked(m) || mask.is_masked(prev_m) || n == 0 {
                None
            } else {
                Some((n as f64 - prev as f64) / n as f64)
            };
            RatePoint { month: m, g }
        })
        .collect())
}

/// Relative entry rates of projects and developers.
pub fn relative_entry_rates(
    summaries: &[SnapshotSummary],
    mask: &GapMask,
) -> Result<(EntryRateSeries, EntryRateSeries)> {
    let projects: Vec<_> = summaries.iter().map(|s| (s.month, s.n_projects)).collect();
    let developers: Vec<_> = summaries.iter().map(|s| (s.month, s.n_developers)).collect();
    Ok((
        EntryRateSeries::from_points(relative_rates(&projects, mask)?)?,
        EntryRateSeries::from_points(relative_rates(&developers, mask)?)?,
    ))
}

/// Rows `month,g_projects,g_developers` (empty cells for masked months).
pub fn entry_rate_table(projects: &EntryRateSeries, developers: &EntryRateSeries) -> Table {
    let mut t = Table::new(&["month", "g_projects", "g_developers"]);
    for (k, s) in [("projects", projects), ("developers", developers)] {
        t.push_meta(format!("{k}_median"), fmt_num(s.median));
        t.push_meta(format!("{k}_q10"), fmt_num(s.q10));
        t.push_meta(format!("{k}_q90"), fmt_num(s.q90));
    }
    let cell = |g: Option<f64>| g.map(fmt_num).unwrap_or_default();
    for (p, d) in projects.points.iter().zip(&developers.points) {
        t.push(row![p.month, cell(p.g), cell(d.g)]);
    }
    t
}

// ---------------------------------------------------------------------------
// size-dependent growth

pub const DEFAULT_WINDOW_MONTHS: u32 = 12;
pub const DEFAULT_MIN_PER_BIN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBin {
    /// Smallest and largest starting size in the bin.
    pub size_lo: u64,
    pub size_hi: u64,
    pub n_projects: usize,
    pub mean_size: f64,
    /// Mean size increment over the window.
    pub mean_increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaFit {
    pub window_start: Month,
    pub window_months: u32,
    pub gamma: f64,
    pub stderr: f64,
    /// `ln` of the proportionality factor of `mean_increment ∝ size^gamma`.
    pub intercept: f64,
    pub bins: Vec<GrowthBin>,
}

/// Fits `ln mean_increment = intercept + gamma ln mean_size` over base-2
/// size bins. Bins are filled from small sizes upward until they hold
/// `min_per_bin` projects; a sparse remainder joins the last bin. Bins with a
/// nonpositive mean increment cannot enter the log fit and are skipped.
pub fn fit_size_growth(pairs: &[(u64, f64)], min_per_bin: usize) -> Result<(f64, f64, f64, Vec<GrowthBin>)> {
    let mut by_octave: BTreeMap<u32, Vec<(u64, f64)>> = BTreeMap::new();
    for &(x, inc) in pairs.iter().filter(|p| p.0 > 0) {
        by_octave.entry(x.ilog2()).or_default().push((x, inc));
    }
    let mut groups: Vec<Vec<(u64, f64)>> = Vec::new();
    let mut pending: Vec<(u64, f64)> = Vec::new();
    for (_, members) in by_octave {
        pending.extend(members);
        if pending.len() >= min_per_bin.max(1) {
            groups.push(std::mem::take(&mut pending));
        }
    }
    if !pending.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(pending),
            None => groups.push(pending),
        }
    }
    let bins: Vec<GrowthBin> = groups
        .iter()
        .map(|g| {
            let n = g.len() as f64;
            GrowthBin {
                size_lo: g.iter().map(|p| p.0).min().unwrap_or(0),
                size_hi: g.iter().map(|p| p.0).max().unwrap_or(0),
                n_projects: g.len(),
                mean_size: g.iter().map(|p| p.0 as f64).sum::<f64>() / n,
                mean_increment: g.iter().map(|p| p.1).sum::<f64>() / n,
            }
        })
        .filter(|b| b.mean_increment > 0.0)
        .collect();
    if bins.len() < 2 {
        return Err(Error::Insufficient(format!("need >= 2 usable size bins, got {}", bins.len())));
    }
    let lx: Vec<f64> = bins.iter().map(|b| b.mean_size.ln()).collect();
    let ly: Vec<f64> = bins.iter().map(|b| b.mean_increment.ln()).collect();
    let fit = linear_fit(&lx, &ly).ok_or_else(|| Error::Degenerate("all bins share one mean size".into()))?;
    let stderr = if fit.slope_stderr.is_finite() { fit.slope_stderr } else { 0.0 };
    Ok((fit.slope, stderr, fit.intercept, bins))
}

/// One fit per consecutive window `[s, s + window_months]` inside the log's
/// month range, using projects active at the window start.
pub fn size_dependent_growth(
    log: &MembershipEventLog,
    window_months: u32,
    min_per_bin: usize,
) -> Result<Vec<GammaFit>> {
    if window_months == 0 {
        return Err(Error::Domain("window must be at least one month".into()));
    }
    let range = log.month_range().ok_or_else(|| Error::Insufficient("event log is empty".into()))?;
    let w = window_months as Month;
    let mut fits = Vec::new();
    let mut start = *range.start();
    while start + w <= *range.end() {
        let before = log.snapshot_at(start)?.project_sizes();
        let after = log.snapshot_at(start + w)?.project_sizes();
        let pairs: Vec<(u64, f64)> = before
            .iter()
            .map(|(p, &x)| (x, after.get(p).copied().unwrap_or(0) as f64 - x as f64))
            .collect();
        if pairs.is_empty() {
            return Err(Error::Insufficient(format!("no active projects at month {start}")));
        }
        let (gamma, stderr, intercept, bins) = fit_size_growth(&pairs, min_per_bin)?;
        fits.push(GammaFit { window_start: start, window_months, gamma, stderr, intercept, bins });
        start += w;
    }
    if fits.is_empty() {
        return Err(Error::Insufficient(format!(
            "log spans {} months, shorter than the {window_months}-month window",
            range.end() - range.start()
        )));
    }
    Ok(fits)
}

/// Rows `window_start,gamma,stderr,intercept,size_lo,size_hi,n_projects,mean_size,mean_increment`.
pub fn gamma_table(fits: &[GammaFit]) -> Table {
    let mut t = Table::new(&[
        "window_start",
        "gamma",
        "stderr",
        "intercept",
        "size_lo",
        "size_hi",
        "n_projects",
        "mean_size",
        "mean_increment",
    ]);
    if let Some(f) = fits.first() {
        t.push_meta("window_months", f.window_months);
    }
    for f in fits {
        for b in &f.bins {
            t.push(row![
                f.window_start,
                fmt_num(f.gamma),
                fmt_num(f.stderr),
                fmt_num(f.intercept),
                b.size_lo,
                b.size_hi,
                b.n_projects,
                fmt_num(b.mean_size),
                fmt_num(b.mean_increment)
            ]);
        }
    }
    t
}

// ---------------------------------------------------------------------------
// p0 series

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    All,
    Collaborative,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::All => "all",
            Variant::Collaborative => "collaborative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EntryCounts {
    pub month: Month,
    /// New projects.
    pub g1: u64,
    /// New developers.
    pub gtot: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P0Point {
    pub month: Month,
    pub g1: u64,
    pub gtot: u64,
    /// `None` for masked months and zero denominators.
    pub p0: Option<f64>,
}

impl P0Point {
    /// A value the growth model cannot produce.
    pub fn above_one(&self) -> bool {
        self.p0.is_some_and(|v| v > 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct P0Series {
    pub variant: Variant,
    pub points: Vec<P0Point>,
    pub median: f64,
}

impl P0Series {
    pub fn n_above_one(&self) -> usize {
        self.points.iter().filter(|p| p.above_one()).count()
    }
}

pub fn p0_series(counts: &[EntryCounts], mask: &GapMask, variant: Variant) -> Result<P0Series> {
    let points: Vec<P0Point> = counts
        .iter()
        .map(|c| P0Point {
            month: c.month,
            g1: c.g1,
            gtot: c.gtot,
            p0: (!mask.is_masked(c.month) && c.gtot > 0).then(|| c.g1 as f64 / c.gtot as f64),
        })
        .collect();
    let values: Vec<f64> = points.iter().filter_map(|p| p.p0).collect();
    let median = median(&values).ok_or_else(|| Error::Insufficient("no month with new developers".into()))?;
    Ok(P0Series { variant, points, median })
}

/// Monthly new projects and new developers, without filtering.
pub fn all_entry_counts(log: &MembershipEventLog, months: RangeInclusive<Month>) -> Vec<EntryCounts> {
    entry_exit_counts(log, months)
        .into_iter()
        .map(|r| EntryCounts { month: r.month, g1: r.new_projects, gtot: r.new_developers })
        .collect()
}

/// Monthly new collaborative projects (by birth month) and new developers,
/// excluding a developer whose first month includes joining a
/// non-collaborative project born that same month. The exclusion applies at
/// the developer's entry month.
pub fn collaborative_entry_counts(
    log: &MembershipEventLog,
    months: RangeInclusive<Month>,
    labels: &[CollaborationLabel],
) -> Vec<EntryCounts> {
    let start = *months.start();
    let mut rows: Vec<EntryCounts> = months.clone().map(|month| EntryCounts { month, ..Default::default() }).collect();
    let label_of: HashMap<ProjectId, &CollaborationLabel> = labels.iter().map(|l| (l.project, l)).collect();
    for l in labels.iter().filter(|l| l.collaborative && months.contains(&l.birth_month)) {
        rows[(l.birth_month - start) as usize].g1 += 1;
    }
    let first = log.developer_first_months();
    let mut founder_of_solo = std::collections::HashSet::new();
    for e in log.events() {
        if first.get(&e.developer) != Some(&e.entry_month) {
            continue;
        }
        if let Some(l) = label_of.get(&e.project) {
            if !l.collaborative && l.birth_month == e.entry_month {
                founder_of_solo.insert(e.developer);
            }
        }
    }
    for (d, &m) in &first {
        if months.contains(&m) && !founder_of_solo.contains(d) {
            rows[(m - start) as usize].gtot += 1;
        }
    }
    rows
}

/// Rows `month,g1,gtot,p0,above_one`.
pub fn p0_table(series: &P0Series) -> Table {
    let mut t = Table::new(&["month", "g1", "gtot", "p0", "above_one"])
        .meta("variant", series.variant)
        .meta("median", fmt_num(series.median))
        .meta("n_above_one", series.n_above_one());
    for p in &series.points {
        t.push(row![p.month, p.g1, p.gtot, p.p0.map(fmt_num).unwrap_or_default(), p.above_one()]);
    }
    t
}

// ---------------------------------------------------------------------------
// collaborative classification

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollaborationLabel {
    pub project: ProjectId,
    pub birth_month: Month,
    pub collaborative: bool,
    /// First month with at least two active developers, if any by the end
    /// of observation.
    pub second_developer_month: Option<Month>,
    /// Non-collaborative, but born too recently for that to be conclusive.
    pub censored: bool,
}

/// Labels every project born by `observation_end`. A project is
/// collaborative iff it has two or more active developers in some month up to
/// `observation_end`; a non-collaborative project younger than
/// `horizon_days` is flagged as censored.
pub fn classify_collaborative(
    log: &MembershipEventLog,
    observation_end: Month,
    horizon_days: f64,
) -> Vec<CollaborationLabel> {
    let mut by_project: HashMap<ProjectId, Vec<usize>> = HashMap::new();
    for (i, e) in log.events().iter().enumerate() {
        if e.entry_month <= observation_end {
            by_project.entry(e.project).or_default().push(i);
        }
    }
    let events = log.events();
    let mut labels: Vec<CollaborationLabel> = by_project
        .into_iter()
        .map(|(project, mut idx)| {
            idx.sort_by_key(|&i| events[i].entry_month);
            let birth_month = events[idx[0]].entry_month;
            // the active set only grows at entry months
            let second_developer_month = idx
                .iter()
                .map(|&i| events[i].entry_month)
                .filter(|&m| m <= observation_end)
                .find(|&m| {
                    let mut first = None;
                    idx.iter().any(|&j| {
                        let e = &events[j];
                        if !e.is_active(m) {
                            return false;
                        }
                        match first {
                            None => {
                                first = Some(e.developer);
                                false
                            }
                            Some(d) => d != e.developer,
                        }
                    })
                });
            let collaborative = second_developer_month.is_some();
            let age_days = (observation_end - birth_month) as f64 * DAYS_PER_MONTH;
            CollaborationLabel {
                project,
                birth_month,
                collaborative,
                second_developer_month,
                censored: !collaborative && age_days < horizon_days,
            }
        })
        .collect();
    labels.sort_by_key(|l| l.project);
    labels
}

/// Rows `project,birth_month,collaborative,second_developer_month,censored`.
pub fn collaboration_table(log: &MembershipEventLog, labels: &[CollaborationLabel], observation_end: Month) -> Table {
    let mut t = Table::new(&["project", "birth_month", "collaborative", "second_developer_month", "censored"])
        .meta("observation_end", observation_end);
    for l in labels {
        t.push(row![
            log.project_name(l.project),
            l.birth_month,
            l.collaborative,
            l.second_developer_month.map(|m| m.to_string()).unwrap_or_default(),
            l.censored
        ]);
    }
    t
}

// ---------------------------------------------------------------------------
// inter-arrival of the second developer

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wait {
    pub days: f64,
    /// Still waiting at the end of observation; `days` is a lower bound.
    pub censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterArrivalFit {
    /// Rate per day.
    pub lambda: f64,
    pub mean_days: f64,
    /// Fraction of uncensored waits shorter than `mean_days`.
    pub prob_before_mean: f64,
    /// `1 / prob_before_mean`; `None` when that fraction is 0 or 1.
    pub censor_factor: Option<f64>,
    pub n_uncensored: usize,
    pub n_censored: usize,
}

impl InterArrivalFit {
    /// The waits cannot come from an exponential law.
    pub fn non_exponential(&self) -> bool {
        self.censor_factor.is_none()
    }
}

/// Exponential MLE on uncensored waits.
pub fn fit_interarrival(waits: &[Wait]) -> Result<InterArrivalFit> {
    let observed: Vec<f64> = waits.iter().filter(|w| !w.censored).map(|w| w.days).collect();
    if let Some(bad) = observed.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
        return Err(Error::Domain(format!("wait must be a finite nonnegative number of days, got {bad}")));
    }
    if observed.len() < MIN_INTERARRIVAL_COHORT {
        return Err(Error::Insufficient(format!(
            "inter-arrival fit needs >= {MIN_INTERARRIVAL_COHORT} uncensored waits, got {}",
            observed.len()
        )));
    }
    let mean_days = observed.iter().sum::<f64>() / observed.len() as f64;
    if mean_days <= 0.0 {
        return Err(Error::Degenerate("every observed wait is zero".into()));
    }
    let below = observed.iter().filter(|&&d| d < mean_days).count();
    let prob_before_mean = below as f64 / observed.len() as f64;
    let censor_factor = (below > 0 && below < observed.len()).then(|| 1.0 / prob_before_mean);
    Ok(InterArrivalFit {
        lambda: 1.0 / mean_days,
        mean_days,
        prob_before_mean,
        censor_factor,
        n_uncensored: observed.len(),
        n_censored: waits.len() - observed.len(),
    })
}

/// Waits from birth to second developer for projects born in `cohort`.
/// Projects still alone at the end of observation give censored waits.
pub fn cohort_waits(labels: &[CollaborationLabel], cohort: RangeInclusive<Month>, observation_end: Month) -> Vec<Wait> {
    labels
        .iter()
        .filter(|l| cohort.contains(&l.birth_month))
        .map(|l| match l.second_developer_month {
            Some(m) => Wait { days: (m - l.birth_month) as f64 * DAYS_PER_MONTH, censored: false },
            None => Wait { days: (observation_end - l.birth_month) as f64 * DAYS_PER_MONTH, censored: true },
        })
        .collect()
}

pub fn interarrival_table(fit: &InterArrivalFit) -> Table {
    let mut t = Table::new(&[
        "lambda_per_day",
        "mean_days",
        "prob_before_mean",
        "censor_factor",
        "non_exponential",
        "n_uncensored",
        "n_censored",
    ]);
    t.push(row![
        fmt_num(fit.lambda),
        fmt_num(fit.mean_days),
        fmt_num(fit.prob_before_mean),
        fit.censor_factor.map(fmt_num).unwrap_or_default(),
        fit.non_exponential(),
        fit.n_uncensored,
        fit.n_censored
    ]);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::sim::{run, SimParams};
    use rand::Rng;

    #[test]
    fn exact_exponential_series() {
        let s: Vec<_> = (0..40).map(|t| (t, (0.013 * t as f64).exp() * 500.0)).collect();
        let f = fit_exponential_growth(&s, &GapMask::new()).unwrap();
        assert!((f.omega - 0.013).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(f.n_points, 40);
    }

    #[test]
    fn noisy_growth_series() {
        let mut rng = stream_rng(5, 0);
        let s: Vec<_> = (0..89)
            .map(|t| (t, 1000.0 * (0.013 * t as f64).exp() * (1.0 + 0.02 * (2.0 * rng.random::<f64>() - 1.0))))
            .collect();
        let f = fit_exponential_growth(&s, &GapMask::new()).unwrap();
        assert!((f.omega - 0.013).abs() < 0.001 && f.r_squared > 0.99, "{f:?}");
    }

    #[test]
    fn growth_mask_and_errors() {
        let mut s: Vec<_> = (0..10).map(|t| (t, (0.02 * t as f64).exp())).collect();
        s[4].1 = 0.0;
        let err = fit_exponential_growth(&s, &GapMask::new()).unwrap_err();
        assert_eq!(err, Error::NonPositive { month: 4, value: 0.0 });
        let f = fit_exponential_growth(&s, &GapMask::from_months([4, 5])).unwrap();
        assert_eq!(f.n_points, 8);
        assert!(fit_exponential_growth(&s[..2], &GapMask::new()).is_err());
    }

    fn summary(month: Month, n: u64) -> SnapshotSummary {
        SnapshotSummary { month, n_developers: n * 2, n_projects: n, n_links: n * 3 }
    }

    #[test]
    fn entry_rate_examples() {
        let (p, d) = relative_entry_rates(&[summary(0, 100), summary(1, 102)], &GapMask::new()).unwrap();
        assert!((p.median - 2.0 / 102.0).abs() < 1e-15);
        assert!((p.median - 0.0196).abs() < 1e-4);
        assert!((d.median - 4.0 / 204.0).abs() < 1e-15);

        let flat: Vec<_> = (0..5).map(|m| summary(m, 50)).collect();
        let (p, _) = relative_entry_rates(&flat, &GapMask::new()).unwrap();
        assert!(p.values().all(|g| g == 0.0));

        let w: f64 = 0.03;
        let exp: Vec<_> = (0..30).map(|m| (m, (1e6 * (w * m as f64).exp()).round() as u64)).collect();
        for pt in relative_rates(&exp, &GapMask::new()).unwrap() {
            assert!((pt.g.unwrap() - (1.0 - (-w).exp())).abs() < 1e-5);
        }
    }

    #[test]
    fn entry_rate_masking() {
        let s = [(0, 10), (1, 0), (2, 12), (3, 15), (4, 20)];
        let pts = relative_rates(&s, &GapMask::from_months([3])).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].g, None); // N = 0
        assert!(pts[1].g.is_some());
        assert_eq!(pts[2].g, None);
        assert_eq!(pts[3].g, None);
        assert!(relative_rates(&[(0, 1), (2, 2)], &GapMask::new()).is_err());
    }

    /// Projects of size `2^k` (k = 0..5, 25 each) at month 0 gain `f(x)` developers by month 12.
    fn growth_fixture(f: impl Fn(u64) -> u64) -> MembershipEventLog {
        let mut b = MembershipEventLog::builder();
        let mut dev = 0;
        for k in 0..6 {
            let x = 1u64 << k;
            for j in 0..25 {
                let p = format!("p{k}_{j}");
                for _ in 0..x {
                    b.push(format!("d{dev}"), &p, 0, None).unwrap();
                    dev += 1;
                }
                for _ in 0..f(x) {
                    b.push(format!("d{dev}"), &p, 6, None).unwrap();
                    dev += 1;
                }
            }
        }
        // a link alive only after the window keeps month 12 inside the range
        b.push("pad_dev", "pad_proj", 12, Some(13)).unwrap();
        b.build()
    }

    #[test]
    fn gamma_exact_fixtures() {
        let f1 = size_dependent_growth(&growth_fixture(|x| x), 12, 20).unwrap();
        assert_eq!(f1.len(), 1);
        assert!((f1[0].gamma - 1.0).abs() < 1e-12, "{:?}", f1[0]);
        assert!(f1[0].stderr < 1e-9);
        let f2 = size_dependent_growth(&growth_fixture(|x| x * x), 12, 20).unwrap();
        assert!((f2[0].gamma - 2.0).abs() < 1e-12);
        let f3 = size_dependent_growth(&growth_fixture(|x| 3 * x), 12, 20).unwrap();
        assert!((f3[0].gamma - 1.0).abs() < 1e-12);
        assert!((f3[0].intercept - f1[0].intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gamma_sparse_bins_merge() {
        let mut pairs: Vec<(u64, f64)> = (0..30).map(|_| (1, 1.0)).collect();
        pairs.extend((0..30).map(|_| (2, 2.0)));
        pairs.extend([(100, 100.0), (300, 300.0)]);
        let (_, _, _, bins) = fit_size_growth(&pairs, 20).unwrap();
        assert_eq!(bins.len(), 2);
        assert_eq!(bins[1].n_projects, 32);
    }

    #[test]
    fn gamma_window_errors() {
        let mut b = MembershipEventLog::builder();
        b.push("a", "x", 0, None).unwrap();
        b.push("b", "x", 5, None).unwrap();
        assert!(matches!(size_dependent_growth(&b.build(), 12, 1), Err(Error::Insufficient(_))));
    }

    #[test]
    fn gamma_on_proportional_simulation() {
        let trace = run(&SimParams::new(0.3, 240_000, 17).with_history()).unwrap();
        let log = trace.to_event_log(5000).unwrap();
        let fits = size_dependent_growth(&log, 12, 20).unwrap();
        assert_eq!(fits.len(), 3);
        for f in &fits {
            assert!((f.gamma - 1.0).abs() < 2.0 * f.stderr.max(1e-3), "{f:?}");
        }
    }

    #[test]
    fn p0_examples() {
        let s = p0_series(&[EntryCounts { month: 0, g1: 61, gtot: 100 }], &GapMask::new(), Variant::All).unwrap();
        assert!((s.median - 0.61).abs() < 1e-15);
        let s = p0_series(
            &[EntryCounts { month: 0, g1: 120, gtot: 100 }, EntryCounts { month: 1, g1: 3, gtot: 0 }],
            &GapMask::new(),
            Variant::All,
        )
        .unwrap();
        assert!(s.points[0].above_one());
        assert_eq!(s.points[1].p0, None);
        assert_eq!(s.n_above_one(), 1);
    }

    #[test]
    fn p0_simulated_round_trip() {
        let trace = run(&SimParams::new(2.0 / 3.0, 60_000, 9).with_history()).unwrap();
        let log = trace.to_event_log(2500).unwrap();
        let counts = all_entry_counts(&log, log.month_range().unwrap());
        let s = p0_series(&counts, &GapMask::new(), Variant::All).unwrap();
        assert!((s.median - 2.0 / 3.0).abs() < 0.03, "{}", s.median);
        assert_eq!(s.n_above_one(), 0);
    }

    #[test]
    fn p0_above_one_when_veterans_found() {
        let mut b = MembershipEventLog::builder();
        b.push("v", "p0", 0, None).unwrap();
        for i in 1..4 {
            b.push("v", format!("p{i}"), 1, None).unwrap();
        }
        b.push("n", "p1", 1, None).unwrap();
        let log = b.build();
        let s = p0_series(&all_entry_counts(&log, 0..=1), &GapMask::new(), Variant::All).unwrap();
        assert_eq!(s.points[1].p0, Some(3.0));
    }

    fn collab_log() -> MembershipEventLog {
        let mut b = MembershipEventLog::builder();
        b.push("a", "solo", 0, None).unwrap();
        b.push("b", "team", 0, None).unwrap();
        b.push("c", "team", 3, None).unwrap();
        // sequential members never overlap
        b.push("d", "relay", 1, Some(4)).unwrap();
        b.push("e", "relay", 4, None).unwrap();
        b.push("f", "late", 18, None).unwrap();
        b.push("a", "late2", 18, None).unwrap();
        b.push("g", "late2", 19, None).unwrap();
        b.build()
    }

    #[test]
    fn classification() {
        let log = collab_log();
        let labels = classify_collaborative(&log, 20, 450.0);
        let get = |n: &str| *labels.iter().find(|l| l.project == log.project_id(n).unwrap()).unwrap();
        assert!(!get("solo").collaborative && !get("solo").censored);
        assert!(get("team").collaborative);
        assert_eq!(get("team").second_developer_month, Some(3));
        assert!(!get("relay").collaborative);
        assert!(!get("late").collaborative && get("late").censored);
        // about 100 days old at the end
        let recent = classify_collaborative(&log, 21, 450.0);
        assert!(recent.iter().find(|l| l.project == log.project_id("late").unwrap()).unwrap().censored);
        let early = classify_collaborative(&log, 2, 450.0);
        assert!(!early.iter().any(|l| l.collaborative));
        assert!(early.iter().all(|l| l.birth_month <= 2));
    }

    #[test]
    fn collaborative_counts_exclude_solo_founders() {
        let log = collab_log();
        let labels = classify_collaborative(&log, 20, 450.0);
        let rows = collaborative_entry_counts(&log, 0..=20, &labels);
        // month 0: team is collaborative; a founded solo, b founded team
        assert_eq!((rows[0].g1, rows[0].gtot), (1, 1));
        assert_eq!((rows[1].g1, rows[1].gtot), (0, 0));
        assert_eq!((rows[18].g1, rows[18].gtot), (1, 0));
        assert_eq!((rows[19].g1, rows[19].gtot), (0, 1));
    }

    #[test]
    fn interarrival_exponential_cohort() {
        let mut rng = stream_rng(11, 0);
        let waits: Vec<Wait> = (0..3000)
            .map(|_| Wait { days: -450.0 * (1.0 - rng.random::<f64>()).ln(), censored: false })
            .collect();
        let f = fit_interarrival(&waits).unwrap();
        assert!((f.mean_days - 450.0).abs() < 15.0, "{f:?}");
        assert!((f.prob_before_mean - 0.632).abs() < 0.02);
        let c = f.censor_factor.unwrap();
        assert!((1.5..=1.7).contains(&c));
    }

    #[test]
    fn interarrival_degenerate_and_censored() {
        let same = vec![Wait { days: 100.0, censored: false }; 40];
        let f = fit_interarrival(&same).unwrap();
        assert_eq!(f.prob_before_mean, 0.0);
        assert!(f.non_exponential());

        let mut mixed: Vec<Wait> = (0..40).map(|i| Wait { days: 10.0 * i as f64, censored: false }).collect();
        mixed.extend((0..40).map(|_| Wait { days: 1e6, censored: true }));
        let f = fit_interarrival(&mixed).unwrap();
        assert_eq!((f.n_uncensored, f.n_censored), (40, 40));
        assert!((f.mean_days - 195.0).abs() < 1e-12);

        assert!(fit_interarrival(&mixed[..29]).is_err());
    }

    #[test]
    fn cohort_waits_from_labels() {
        let log = collab_log();
        let labels = classify_collaborative(&log, 20, 450.0);
        let w = cohort_waits(&labels, 0..=1, 20);
        assert_eq!(w.len(), 3);
        assert_eq!(w.iter().filter(|w| w.censored).count(), 2);
        assert!(w.iter().any(|w| !w.censored && w.days == 3.0 * DAYS_PER_MONTH));
    }
}
