use std::collections::BTreeSet;

use projgrowth_core::em::{em_fit, em_table, predicted_collaborative_entries, EmConfig};
use projgrowth_core::estimators::{
    all_entry_counts, classify_collaborative, cohort_waits, collaboration_table, collaborative_entry_counts,
    entry_rate_table, fit_exponential_growth, fit_interarrival, gamma_table, interarrival_table, p0_series, p0_table,
    relative_entry_rates, size_dependent_growth, Variant,
};
use projgrowth_core::gof::{bootstrap_pvalue_with, gof_table, GofConfig};
use projgrowth_core::rate_eq::{iterate_master_truncated, master_table, steady_state};
use projgrowth_core::report::{fmt_num, Table};
use projgrowth_core::row;
use projgrowth_core::sim::{replicate, SimParams};
use projgrowth_core::snapshot::{entry_exit_counts, summaries, Month};
use projgrowth_core::yule::{fit_table, mle_rho, mle_rho_truncated};

use crate::args::{AnalyzeArgs, EmArgs, FitArgs, GofArgs, P0Args, RateeqArgs, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::input::{load_log, load_mask, load_sizes, log_to_csv, month_range, options, parse_month};
use crate::manifest::Run;

pub fn simulate(a: &SimulateArgs, run: &mut Run) -> CliResult<()> {
    let mut params = SimParams::new(a.p0, a.steps, a.seed).with_alpha(a.alpha).with_checkpoints(a.checkpoints.clone());
    if a.events_per_month.is_some() {
        params = params.with_history();
    }
    params.validate()?;
    if a.replicas == 0 {
        return Err(CliError::Usage("--replicas must be >= 1".into()));
    }
    run.seed("seed", a.seed);
    run.seed("streams", format!("0..{}", a.replicas));
    let reps = replicate(&params, a.replicas)?;
    for (r, trace) in reps.traces.iter().enumerate() {
        run.write_table(&format!("trace-{r:03}.csv"), &trace.to_table())?;
    }
    run.write_table("mean_distribution.csv", &reps.mean_table())?;

    let mut counts = Table::new(&["replica", "checkpoint_step", "n_projects"]);
    counts.push_meta("p0", fmt_num(a.p0));
    for (r, trace) in reps.traces.iter().enumerate() {
        for (step, n) in trace.project_count_series() {
            counts.push(row![r, step, n]);
        }
    }
    run.write_table("project_counts.csv", &counts)?;

    if let Some(spm) = a.events_per_month {
        if spm == 0 {
            return Err(CliError::Usage("--events-per-month must be >= 1".into()));
        }
        let log = reps.traces[0].to_event_log(spm).expect("history recorded");
        run.write_bytes("events.csv", log_to_csv(&log).as_bytes())?;
    }
    Ok(())
}

pub fn analyze(a: &AnalyzeArgs, run: &mut Run) -> CliResult<()> {
    let opts = options(&a.format)?;
    let log = load_log(run, &a.events, &opts)?;
    let mask = load_mask(run, a.gap_mask.as_deref(), &opts)?;
    let months = month_range(&log, a.months.as_ref(), &opts)?;
    let masked = |m: Month| mask.is_masked(m);

    let sums = summaries(&log, months.clone())?;
    let mut t = Table::new(&["month", "n_developers", "n_projects", "n_links", "masked"]);
    for s in &sums {
        t.push(row![s.month, s.n_developers, s.n_projects, s.n_links, masked(s.month)]);
    }
    run.write_table("summary.csv", &t)?;

    let mut sizes = Table::new(&["month", "size", "count"]);
    let mut degrees = Table::new(&["month", "degree", "count"]);
    for m in months.clone() {
        let snap = log.snapshot_at(m)?;
        for (x, n) in snap.project_size_distribution().iter() {
            sizes.push(row![m, x, n]);
        }
        for (k, n) in snap.developer_degree_distribution().iter() {
            degrees.push(row![m, k, n]);
        }
    }
    run.write_table("size_distribution.csv", &sizes)?;
    run.write_table("degree_distribution.csv", &degrees)?;

    let mut t = Table::new(&[
        "month",
        "new_projects",
        "removed_projects",
        "new_developers",
        "removed_developers",
        "masked",
    ]);
    for r in entry_exit_counts(&log, months.clone()) {
        t.push(row![
            r.month,
            r.new_projects,
            r.removed_projects,
            r.new_developers,
            r.removed_developers,
            masked(r.month)
        ]);
    }
    run.write_table("entry_exit.csv", &t)?;

    match relative_entry_rates(&sums, &mask) {
        Ok((p, d)) => run.write_table("entry_rates.csv", &entry_rate_table(&p, &d))?,
        Err(e) => run.note(format!("entry_rates.csv skipped: {e}")),
    }

    let mut t = Table::new(&["quantity", "omega", "r_squared", "p_value", "n_points"]);
    type Pick = fn(&projgrowth_core::SnapshotSummary) -> u64;
    let series: [(&str, Pick); 3] =
        [("projects", |s| s.n_projects), ("developers", |s| s.n_developers), ("links", |s| s.n_links)];
    for (name, pick) in series {
        let pts: Vec<(Month, f64)> = sums.iter().map(|s| (s.month, pick(s) as f64)).collect();
        match fit_exponential_growth(&pts, &mask) {
            Ok(f) => t.push(row![name, fmt_num(f.omega), fmt_num(f.r_squared), fmt_num(f.p_value), f.n_points]),
            Err(e) => run.note(format!("growth fit for {name} skipped: {e}")),
        }
    }
    run.write_table("growth.csv", &t)?;

    match size_dependent_growth(&log, a.window, a.min_per_bin) {
        Ok(fits) => {
            let fits: Vec<_> = fits
                .into_iter()
                .filter(|f| months.contains(&f.window_start) && months.contains(&(f.window_start + a.window as Month)))
                .collect();
            run.write_table("gamma.csv", &gamma_table(&fits))?;
        }
        Err(e) => run.note(format!("gamma.csv skipped: {e}")),
    }
    Ok(())
}

pub fn fit(a: &FitArgs, run: &mut Run) -> CliResult<()> {
    let opts = options(&a.format)?;
    if a.min_size == 0 {
        return Err(CliError::Usage("--min-size must be >= 1".into()));
    }
    let (dists, _) = load_sizes(run, &a.source, &a.choice, &opts)?;
    let mut rows = Vec::with_capacity(dists.len());
    for (m, d) in &dists {
        let f = if a.min_size > 1 { mle_rho_truncated(d, a.min_size)? } else { mle_rho(d)? };
        rows.push((*m, f));
    }
    run.write_table("fit.csv", &fit_table(&rows, a.min_size))
}

pub fn gof(a: &GofArgs, run: &mut Run) -> CliResult<()> {
    let opts = options(&a.format)?;
    let (dists, _) = load_sizes(run, &a.source, &a.choice, &opts)?;
    let cfg = GofConfig { n_bootstrap: a.bootstrap, seed: a.seed, plus_one_smoothing: a.plus_one };
    run.seed("seed", a.seed);
    run.seed("streams", format!("0..{}", a.bootstrap));
    let mut rows = Vec::with_capacity(dists.len());
    for (m, d) in &dists {
        rows.push((*m, bootstrap_pvalue_with(d, &cfg)?));
    }
    run.write_table("gof.csv", &gof_table(&rows))
}

pub fn em(a: &EmArgs, run: &mut Run) -> CliResult<()> {
    let opts = options(&a.format)?;
    let mask = load_mask(run, a.gap_mask.as_deref(), &opts)?;
    let (dists, log) = load_sizes(run, &a.source, &a.choice, &opts)?;
    let cfg = EmConfig { epsilon: a.epsilon, max_iterations: a.max_iterations, rho_init: None };
    let mut rows = Vec::with_capacity(dists.len());
    for (m, d) in &dists {
        rows.push((*m, em_fit(d, &cfg)?));
    }
    run.write_table("em.csv", &em_table(&rows, &cfg))?;

    if let Some(log) = log {
        let months: Vec<Month> = rows.iter().filter_map(|r| r.0).collect();
        let results: Vec<_> = rows.iter().map(|r| r.1.clone()).collect();
        let entries = entry_exit_counts(&log, months[0]..=*months.last().expect("nonempty"));
        let predicted =
            predicted_collaborative_entries(&months, &results, &entries, &mask, a.initial_non_collaborative)?;
        let mut t = Table::new(&["month", "predicted_collaborative_entries"])
            .meta("initial_non_collaborative", fmt_num(a.initial_non_collaborative));
        for (m, v) in predicted {
            t.push(row![m, fmt_num(v)]);
        }
        run.write_table("predicted_entries.csv", &t)?;
    }

    let stalled: Vec<String> = rows
        .iter()
        .filter(|r| !r.1.converged)
        .map(|r| r.0.map(|m| format!("month {m}")).unwrap_or_else(|| "input".into()))
        .collect();
    if !stalled.is_empty() {
        return Err(CliError::NotConverged(format!(
            "EM did not converge within {} iterations for {}",
            a.max_iterations,
            stalled.join(", ")
        )));
    }
    Ok(())
}

pub fn p0(a: &P0Args, run: &mut Run) -> CliResult<()> {
    let opts = options(&a.format)?;
    let log = load_log(run, &a.events, &opts)?;
    let mask = load_mask(run, a.gap_mask.as_deref(), &opts)?;
    let months = month_range(&log, a.months.as_ref(), &opts)?;
    let variant: Variant = a.variant.into();
    let series = match variant {
        Variant::All => p0_series(&all_entry_counts(&log, months), &mask, variant)?,
        Variant::Collaborative => {
            let full = log.month_range().expect("nonempty log");
            let end = match &a.observation_end {
                Some(t) => parse_month(t, &opts)?,
                None => *full.end(),
            };
            let cohort = match &a.cohort {
                Some(span) => span.resolve(&opts).map_err(CliError::Usage)?,
                None => *full.start()..=end,
            };
            // labels do not depend on the horizon; only the censoring flag does
            let unflagged = classify_collaborative(&log, end, 0.0);
            let fit = fit_interarrival(&cohort_waits(&unflagged, cohort, end));
            let horizon = match (a.horizon_days, &fit) {
                (Some(h), _) => h,
                (None, Ok(f)) => f.mean_days,
                (None, Err(e)) => {
                    run.note(format!("no fitted horizon ({e}); censoring flags disabled"));
                    0.0
                }
            };
            if !(horizon >= 0.0) {
                return Err(CliError::Usage(format!("--horizon-days must be >= 0, got {horizon}")));
            }
            let labels = classify_collaborative(&log, end, horizon);
            let mut t = collaboration_table(&log, &labels, end);
            t.push_meta("horizon_days", fmt_num(horizon));
            run.write_table("collaboration.csv", &t)?;
            match &fit {
                Ok(f) => run.write_table("interarrival.csv", &interarrival_table(f))?,
                Err(e) => run.note(format!("interarrival.csv skipped: {e}")),
            }
            p0_series(&collaborative_entry_counts(&log, months, &labels), &mask, variant)?
        }
    };
    run.write_table("p0.csv", &p0_table(&series))
}

pub fn rateeq(a: &RateeqArgs, run: &mut Run) -> CliResult<()> {
    let mut record: BTreeSet<u64> = a.record.iter().copied().collect();
    if record.is_empty() {
        record.insert(a.steps);
    }
    if let Some(&bad) = record.iter().find(|&&n| n == 0 || n > a.steps) {
        return Err(CliError::Usage(format!("--record step {bad} outside 1..={}", a.steps)));
    }
    let record: Vec<u64> = record.into_iter().collect();
    let states = iterate_master_truncated(a.p0, a.steps, &record, a.x_trunc)?;
    let mut t = master_table(a.p0, &states, a.max_x);
    t.push_meta("x_trunc", a.x_trunc);
    run.write_table("master.csv", &t)?;

    let mut ss = Table::new(&["N", "x", "n_star"]).meta("p0", fmt_num(a.p0));
    for s in &states {
        for (x, n) in steady_state(a.p0, s.step, a.max_x)? {
            ss.push(row![s.step, x, fmt_num(n)]);
        }
    }
    run.write_table("steady_state.csv", &ss)
}
