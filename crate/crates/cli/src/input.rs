//! Reading event logs, gap masks and size distributions.

use std::ops::RangeInclusive;
use std::path::Path;

use projgrowth_core::snapshot::{parse_events, GapMask, MembershipEventLog, Month, ParseFailure, ParseOptions, RowError};
use projgrowth_core::SizeDistribution;

use crate::args::{EventFormat, MonthChoice, SizeSource};
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

pub fn options(format: &EventFormat) -> CliResult<ParseOptions> {
    format.options().map_err(CliError::Usage)
}

pub fn load_log(run: &mut Run, path: &Path, opts: &ParseOptions) -> CliResult<MembershipEventLog> {
    let bytes = run.read_input(path)?;
    let parsed = parse_events(bytes.as_slice(), opts).map_err(|failure| CliError::Parse { path: path.into(), failure })?;
    for d in &parsed.duplicates {
        run.note(format!("{}: line {} repeats line {}; dropped", path.display(), d.line, d.first_line));
    }
    if parsed.log.is_empty() {
        return Err(CliError::Usage(format!("{}: no events", path.display())));
    }
    Ok(parsed.log)
}

pub fn load_mask(run: &mut Run, path: Option<&Path>, opts: &ParseOptions) -> CliResult<GapMask> {
    let Some(path) = path else { return Ok(GapMask::new()) };
    let bytes = run.read_input(path)?;
    GapMask::parse(bytes.as_slice(), opts).map_err(|failure| CliError::Parse { path: path.into(), failure })
}

/// The requested range clipped to nothing: every month must lie in the log.
pub fn month_range(
    log: &MembershipEventLog,
    span: Option<&crate::args::MonthSpan>,
    opts: &ParseOptions,
) -> CliResult<RangeInclusive<Month>> {
    let full = log.month_range().ok_or_else(|| CliError::Usage("event log is empty".into()))?;
    let Some(span) = span else { return Ok(full) };
    let r = span.resolve(opts).map_err(CliError::Usage)?;
    if r.start() < full.start() || r.end() > full.end() {
        return Err(CliError::Usage(format!(
            "months {}:{} outside the log's range {}:{}",
            r.start(),
            r.end(),
            full.start(),
            full.end()
        )));
    }
    Ok(r)
}

pub fn parse_month(text: &str, opts: &ParseOptions) -> CliResult<Month> {
    opts.parse_month(text).ok_or_else(|| CliError::Usage(format!("bad month {text:?}")))
}

/// Sizes one per line, `size,count` rows, or a table with named `size` and
/// `count` columns (and optionally `checkpoint_step`, of which the last is used).
pub fn parse_distribution(text: &str) -> Result<SizeDistribution, ParseFailure> {
    let mut errors = Vec::new();
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split([',', '\t', ' ']).filter(|f| !f.is_empty()).collect();
        rows.push((i + 1, fields));
    }
    let mut cols = (0usize, None::<usize>, None::<usize>);
    if let Some((_, first)) = rows.first() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            let find = |name: &str| first.iter().position(|f| f.eq_ignore_ascii_case(name));
            match find("size") {
                Some(s) => cols = (s, find("count"), find("checkpoint_step")),
                None => {
                    return Err(ParseFailure {
                        rows: vec![RowError { line: rows[0].0, message: "header lacks a size column".into() }],
                    })
                }
            }
            rows.remove(0);
        } else if first.len() == 2 {
            cols = (0, Some(1), None);
        }
    }
    let (size_col, count_col, step_col) = cols;
    let last_step = step_col.and_then(|c| rows.iter().filter_map(|(_, f)| f.get(c)?.parse::<u64>().ok()).max());
    let mut dist = SizeDistribution::default();
    for (line, f) in &rows {
        if let (Some(c), Some(last)) = (step_col, last_step) {
            if f.get(c).and_then(|v| v.parse::<u64>().ok()) != Some(last) {
                continue;
            }
        }
        let size = f.get(size_col).and_then(|v| v.parse::<u64>().ok()).filter(|&x| x >= 1);
        let count = match count_col {
            Some(c) => f.get(c).and_then(|v| v.parse::<u64>().ok()),
            None if f.len() == 1 => Some(1),
            None => None,
        };
        match (size, count) {
            (Some(x), Some(n)) => dist.add(x, n),
            _ => errors.push(RowError { line: *line, message: format!("expected a positive integer size and count, got {f:?}") }),
        }
    }
    if errors.is_empty() {
        Ok(dist)
    } else {
        Err(ParseFailure { rows: errors })
    }
}

/// Distributions to analyze, keyed by month when they come from an event log.
pub fn load_sizes(
    run: &mut Run,
    source: &SizeSource,
    choice: &MonthChoice,
    opts: &ParseOptions,
) -> CliResult<(Vec<(Option<Month>, SizeDistribution)>, Option<MembershipEventLog>)> {
    if let Some(path) = &source.distribution {
        if choice.month.is_some() || choice.months.is_some() {
            return Err(CliError::Usage("--month/--months apply to --events only".into()));
        }
        let bytes = run.read_input(path)?;
        let text = String::from_utf8_lossy(&bytes);
        let dist = parse_distribution(&text).map_err(|failure| CliError::Parse { path: path.clone(), failure })?;
        if dist.is_empty() {
            return Err(CliError::Usage(format!("{}: no sizes", path.display())));
        }
        return Ok((vec![(None, dist)], None));
    }
    let path = source.events.as_ref().expect("clap requires one source");
    let log = load_log(run, path, opts)?;
    let full = log.month_range().expect("nonempty log");
    let months = match (&choice.month, &choice.months) {
        (Some(m), _) => {
            let m = parse_month(m, opts)?;
            m..=m
        }
        (None, Some(span)) => month_range(&log, Some(span), opts)?,
        (None, None) => *full.end()..=*full.end(),
    };
    let mut out = Vec::new();
    for m in months {
        out.push((Some(m), log.snapshot_at(m)?.project_size_distribution()));
    }
    Ok((out, Some(log)))
}

pub fn log_to_csv(log: &MembershipEventLog) -> String {
    let mut s = String::from("developer_id,project_id,entry_month,exit_month\n");
    for e in log.events() {
        let exit = e.exit_month.map(|m| m.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{}\n",
            log.developer_name(e.developer),
            log.project_name(e.project),
            e.entry_month,
            exit
        ));
    }
    s
}
