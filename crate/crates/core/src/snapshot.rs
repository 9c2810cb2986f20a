//! Membership events, monthly bipartite snapshots and their summaries.
//!
//! A developer→project link is active in month `t` iff
//! `entry_month <= t` and (`exit_month` is absent or `exit_month > t`).

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::histogram::{DegreeDistribution, SizeDistribution};

/// Month index: whole months since a configurable epoch.
pub type Month = i32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeveloperId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MembershipEvent {
    pub developer: DeveloperId,
    pub project: ProjectId,
    pub entry_month: Month,
    pub exit_month: Option<Month>,
}

impl MembershipEvent {
    pub fn is_active(&self, month: Month) -> bool {
        self.entry_month <= month && self.exit_month.is_none_or(|e| e > month)
    }
}

#[derive(Default)]
struct Interner {
    names: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, u32>,
}

impl Interner {
    fn intern(&mut self, name: &[u8]) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_vec());
        self.index.insert(name.to_vec(), id);
        id
    }
}

/// Validated, de-duplicated event log. Identifiers are interned; the original
/// byte strings are retained for reporting.
#[derive(Debug, Clone, Default)]
pub struct MembershipEventLog {
    events: Vec<MembershipEvent>,
    developer_names: Vec<Vec<u8>>,
    project_names: Vec<Vec<u8>>,
}

/// Incremental construction of a [`MembershipEventLog`].
#[derive(Default)]
pub struct LogBuilder {
    developers: Interner,
    projects: Interner,
    events: Vec<MembershipEvent>,
    seen: HashMap<(u32, u32, Month), usize>,
}

/// Why [`LogBuilder::push`] refused an event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PushError {
    ExitBeforeEntry { entry: Month, exit: Month },
    /// Same (developer, project, entry month) as the event at this index.
    Duplicate(usize),
}

impl LogBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        developer: impl AsRef<[u8]>,
        project: impl AsRef<[u8]>,
        entry_month: Month,
        exit_month: Option<Month>,
    ) -> std::result::Result<usize, PushError> {
        if let Some(exit) = exit_month {
            if exit < entry_month {
                return Err(PushError::ExitBeforeEntry { entry: entry_month, exit });
            }
        }
        let d = self.developers.intern(developer.as_ref());
        let p = self.projects.intern(project.as_ref());
        if let Some(&first) = self.seen.get(&(d, p, entry_month)) {
            return Err(PushError::Duplicate(first));
        }
        let idx = self.events.len();
        self.seen.insert((d, p, entry_month), idx);
        self.events.push(MembershipEvent {
            developer: DeveloperId(d),
            project: ProjectId(p),
            entry_month,
            exit_month,
        });
        Ok(idx)
    }

    pub fn build(self) -> MembershipEventLog {
        MembershipEventLog {
            events: self.events,
            developer_names: self.developers.names,
            project_names: self.projects.names,
        }
    }
}

impl MembershipEventLog {
    pub fn builder() -> LogBuilder {
        LogBuilder::new()
    }

    pub fn events(&self) -> &[MembershipEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn n_developers(&self) -> usize {
        self.developer_names.len()
    }

    pub fn n_projects(&self) -> usize {
        self.project_names.len()
    }

    pub fn developer_name(&self, id: DeveloperId) -> Cow<'_, str> {
        String::from_utf8_lossy(&self.developer_names[id.0 as usize])
    }

    pub fn project_name(&self, id: ProjectId) -> Cow<'_, str> {
        String::from_utf8_lossy(&self.project_names[id.0 as usize])
    }

    pub fn project_id(&self, name: &str) -> Option<ProjectId> {
        self.project_names
            .iter()
            .position(|n| n == name.as_bytes())
            .map(|i| ProjectId(i as u32))
    }

    pub fn developer_id(&self, name: &str) -> Option<DeveloperId> {
        self.developer_names
            .iter()
            .position(|n| n == name.as_bytes())
            .map(|i| DeveloperId(i as u32))
    }

    /// `[first entry, last entry or exit]`, or `None` for an empty log.
    pub fn month_range(&self) -> Option<RangeInclusive<Month>> {
        let first = self.events.iter().map(|e| e.entry_month).min()?;
        let last = self
            .events
            .iter()
            .map(|e| e.exit_month.unwrap_or(e.entry_month).max(e.entry_month))
            .max()?;
        Some(first..=last)
    }

    fn check_month(&self, month: Month) -> Result<()> {
        match self.month_range() {
            Some(r) if r.contains(&month) => Ok(()),
            Some(r) => Err(Error::MonthOutOfRange { month, first: *r.start(), last: *r.end() }),
            None => Err(Error::Insufficient("event log is empty".into())),
        }
    }

    /// Active links in `month`.
    pub fn snapshot_at(&self, month: Month) -> Result<Snapshot> {
        self.check_month(month)?;
        let mut links: Vec<(DeveloperId, ProjectId)> = self
            .events
            .iter()
            .filter(|e| e.is_active(month))
            .map(|e| (e.developer, e.project))
            .collect();
        links.sort_unstable();
        links.dedup();
        Ok(Snapshot { month, links })
    }

    /// Per-project first entry month.
    pub fn project_birth_months(&self) -> HashMap<ProjectId, Month> {
        let mut births: HashMap<ProjectId, Month> = HashMap::new();
        for e in &self.events {
            births
                .entry(e.project)
                .and_modify(|m| *m = (*m).min(e.entry_month))
                .or_insert(e.entry_month);
        }
        births
    }

    /// Per-developer first entry month.
    pub fn developer_first_months(&self) -> HashMap<DeveloperId, Month> {
        let mut first: HashMap<DeveloperId, Month> = HashMap::new();
        for e in &self.events {
            first
                .entry(e.developer)
                .and_modify(|m| *m = (*m).min(e.entry_month))
                .or_insert(e.entry_month);
        }
        first
    }
}

/// Set of developer→project links active in one month.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub month: Month,
    /// Sorted, unique.
    links: Vec<(DeveloperId, ProjectId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SnapshotSummary {
    pub month: Month,
    pub n_developers: u64,
    pub n_projects: u64,
    pub n_links: u64,
}

/// Weighted undirected edge, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeightedEdge<T> {
    pub a: T,
    pub b: T,
    pub weight: u32,
}

impl Snapshot {
    pub fn from_links<I: IntoIterator<Item = (DeveloperId, ProjectId)>>(month: Month, links: I) -> Self {
        let mut links: Vec<_> = links.into_iter().collect();
        links.sort_unstable();
        links.dedup();
        Self { month, links }
    }

    pub fn links(&self) -> &[(DeveloperId, ProjectId)] {
        &self.links
    }

    pub fn contains(&self, d: DeveloperId, p: ProjectId) -> bool {
        self.links.binary_search(&(d, p)).is_ok()
    }

    pub fn summarize(&self) -> SnapshotSummary {
        let devs: BTreeSet<DeveloperId> = self.links.iter().map(|l| l.0).collect();
        let projects: BTreeSet<ProjectId> = self.links.iter().map(|l| l.1).collect();
        SnapshotSummary {
            month: self.month,
            n_developers: devs.len() as u64,
            n_projects: projects.len() as u64,
            n_links: self.links.len() as u64,
        }
    }

    /// Number of active developers per project.
    pub fn project_sizes(&self) -> HashMap<ProjectId, u64> {
        let mut sizes = HashMap::new();
        for &(_, p) in &self.links {
            *sizes.entry(p).or_insert(0) += 1;
        }
        sizes
    }

    pub fn developer_degrees(&self) -> HashMap<DeveloperId, u64> {
        let mut deg = HashMap::new();
        for &(d, _) in &self.links {
            *deg.entry(d).or_insert(0) += 1;
        }
        deg
    }

    pub fn project_size_distribution(&self) -> SizeDistribution {
        SizeDistribution::from_sizes(self.project_sizes().into_values())
    }

    pub fn developer_degree_distribution(&self) -> DegreeDistribution {
        DegreeDistribution::from_degrees(self.developer_degrees().into_values())
    }

    /// Projects linked by shared developers; weight = number of shared developers.
    pub fn project_projection(&self) -> Vec<WeightedEdge<ProjectId>> {
        // links are sorted by developer, so each developer's projects are contiguous
        let groups = self.links.chunk_by(|x, y| x.0 == y.0).map(|g| g.iter().map(|l| l.1).collect());
        co_occurrence(groups)
    }

    /// Developers linked by shared projects; weight = number of shared projects.
    pub fn developer_projection(&self) -> Vec<WeightedEdge<DeveloperId>> {
        let mut by_project: HashMap<ProjectId, Vec<DeveloperId>> = HashMap::new();
        for &(d, p) in &self.links {
            by_project.entry(p).or_default().push(d);
        }
        co_occurrence(by_project.into_values())
    }
}

fn co_occurrence<T, I>(groups: I) -> Vec<WeightedEdge<T>>
where
    T: Copy + Ord + std::hash::Hash,
    I: IntoIterator<Item = Vec<T>>,
{
    let mut weights: HashMap<(T, T), u32> = HashMap::new();
    for mut members in groups {
        members.sort_unstable();
        members.dedup();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                *weights.entry((members[i], members[j])).or_insert(0) += 1;
            }
        }
    }
    let mut edges: Vec<_> = weights
        .into_iter()
        .map(|((a, b), weight)| WeightedEdge { a, b, weight })
        .collect();
    edges.sort_unstable();
    edges
}

/// Monthly entries and removals of projects and developers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EntryExitRow {
    pub month: Month,
    pub new_projects: u64,
    pub removed_projects: u64,
    pub new_developers: u64,
    pub removed_developers: u64,
}

/// Merged half-open activity intervals `[start, end)` per entity.
fn activity_intervals<K: Copy + Eq + std::hash::Hash>(
    events: &[MembershipEvent],
    key: impl Fn(&MembershipEvent) -> K,
) -> HashMap<K, Vec<(Month, Option<Month>)>> {
    let mut raw: HashMap<K, Vec<(Month, Option<Month>)>> = HashMap::new();
    for e in events {
        raw.entry(key(e)).or_default().push((e.entry_month, e.exit_month));
    }
    for spans in raw.values_mut() {
        // an open end sorts after every finite end
        spans.sort_by_key(|&(s, e)| (s, e.map_or(Month::MAX, |m| m)));
        let mut merged: Vec<(Month, Option<Month>)> = Vec::with_capacity(spans.len());
        for &(s, e) in spans.iter() {
            if let Some(last) = merged.last_mut() {
                match last.1 {
                    None => continue,
                    Some(le) if s <= le => {
                        last.1 = match e {
                            None => None,
                            Some(e) => Some(e.max(le)),
                        };
                        continue;
                    }
                    _ => {}
                }
            }
            merged.push((s, e));
        }
        *spans = merged;
    }
    raw
}

/// An entity is new in the month of its first link, and removed in the first
/// month it has no active link after having had one. Zero-length links
/// (`exit == entry`) never make an entity active.
pub fn entry_exit_counts(log: &MembershipEventLog, months: RangeInclusive<Month>) -> Vec<EntryExitRow> {
    let mut rows: Vec<EntryExitRow> = months.clone().map(|month| EntryExitRow { month, ..Default::default() }).collect();
    let start = *months.start();
    let mut bump = |month: Month, f: &dyn Fn(&mut EntryExitRow)| {
        if months.contains(&month) {
            f(&mut rows[(month - start) as usize]);
        }
    };

    for spans in activity_intervals(log.events(), |e| e.project).values() {
        if let Some(first) = spans.iter().map(|s| s.0).min() {
            bump(first, &|r| r.new_projects += 1);
        }
        for &(s, e) in spans {
            if let Some(e) = e.filter(|&e| e > s) {
                bump(e, &|r| r.removed_projects += 1);
            }
        }
    }
    for spans in activity_intervals(log.events(), |e| e.developer).values() {
        if let Some(first) = spans.iter().map(|s| s.0).min() {
            bump(first, &|r| r.new_developers += 1);
        }
        for &(s, e) in spans {
            if let Some(e) = e.filter(|&e| e > s) {
                bump(e, &|r| r.removed_developers += 1);
            }
        }
    }
    rows
}

/// Summaries for every month of `months` (each must lie in the log's range).
pub fn summaries(log: &MembershipEventLog, months: RangeInclusive<Month>) -> Result<Vec<SnapshotSummary>> {
    months.map(|m| log.snapshot_at(m).map(|s| s.summarize())).collect()
}

/// Months excluded from estimation (data disruptions).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GapMask(BTreeSet<Month>);

impl GapMask {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_months<I: IntoIterator<Item = Month>>(months: I) -> Self {
        Self(months.into_iter().collect())
    }

    pub fn is_masked(&self, month: Month) -> bool {
        self.0.contains(&month)
    }

    pub fn months(&self) -> impl Iterator<Item = Month> + '_ {
        self.0.iter().copied()
    }

    /// One month index per line; blank lines and `#` comments ignored.
    pub fn parse<R: BufRead>(reader: R, opts: &ParseOptions) -> std::result::Result<Self, ParseFailure> {
        let mut months = BTreeSet::new();
        let mut errors = Vec::new();
        for (i, line) in reader.split(b'\n').enumerate() {
            let line_no = i + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    errors.push(RowError { line: line_no, message: e.to_string() });
                    break;
                }
            };
            let text = String::from_utf8_lossy(&line);
            let text = text.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            match opts.parse_month(text) {
                Some(m) => {
                    months.insert(m);
                }
                None => errors.push(RowError { line: line_no, message: format!("unparseable month {text:?}") }),
            }
        }
        if errors.is_empty() {
            Ok(Self(months))
        } else {
            Err(ParseFailure { rows: errors })
        }
    }
}

/// Format options for event and mask files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub delimiter: u8,
    /// Calendar month that maps to index 0 when months are written `YYYY-MM`.
    pub epoch_year: i32,
    pub epoch_month: u32,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { delimiter: b',', epoch_year: 1970, epoch_month: 1 }
    }
}

impl ParseOptions {
    /// Integer month index, or `YYYY-MM` relative to the epoch.
    pub fn parse_month(&self, field: &str) -> Option<Month> {
        let field = field.trim();
        if let Ok(m) = field.parse::<Month>() {
            return Some(m);
        }
        let (y, m) = field.split_once('-')?;
        if y.len() != 4 || m.len() != 2 {
            return None;
        }
        let y: i32 = y.parse().ok()?;
        let m: u32 = m.parse().ok()?;
        if !(1..=12).contains(&m) {
            return None;
        }
        Some((y - self.epoch_year) * 12 + m as i32 - self.epoch_month as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// All row-level errors of a rejected file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub rows: Vec<RowError>,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} malformed row(s)", self.rows.len())?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseFailure {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuplicateRow {
    pub line: usize,
    pub first_line: usize,
}

#[derive(Debug, Clone)]
pub struct ParsedLog {
    pub log: MembershipEventLog,
    /// Rows dropped because their (developer, project, entry month) repeats an earlier row.
    pub duplicates: Vec<DuplicateRow>,
    pub header_skipped: bool,
}

/// Parses `developer_id,project_id,entry_month,exit_month` rows.
///
/// A first row whose entry field is not a month is treated as a header.
/// Blank lines and lines starting with `#` are skipped. Identifier bytes are
/// kept verbatim.
pub fn parse_events<R: BufRead>(reader: R, opts: &ParseOptions) -> std::result::Result<ParsedLog, ParseFailure> {
    let mut builder = LogBuilder::new();
    let mut line_of_event: Vec<usize> = Vec::new();
    let mut errors = Vec::new();
    let mut duplicates = Vec::new();
    let mut header_skipped = false;
    let mut first_data_row = true;

    for (i, line) in reader.split(b'\n').enumerate() {
        let line_no = i + 1;
        let mut line = match line {
            Ok(l) => l,
            Err(e) => {
                errors.push(RowError { line: line_no, message: e.to_string() });
                break;
            }
        };
        if line.last() == Some(&b'\r') {
            line.pop();
        }
        if line.iter().all(u8::is_ascii_whitespace) || line.first() == Some(&b'#') {
            continue;
        }
        let fields: Vec<&[u8]> = line.split(|&b| b == opts.delimiter).collect();
        let is_first = std::mem::replace(&mut first_data_row, false);
        if fields.len() < 3 || fields.len() > 4 {
            errors.push(RowError {
                line: line_no,
                message: format!("expected 3 or 4 fields, found {}", fields.len()),
            });
            continue;
        }
        let text = |b: &[u8]| String::from_utf8_lossy(b).trim().to_string();
        let entry_text = text(fields[2]);
        let entry = opts.parse_month(&entry_text);
        if is_first && entry.is_none() && entry_text.bytes().any(|b| b.is_ascii_alphabetic()) {
            header_skipped = true;
            continue;
        }
        let Some(entry) = entry else {
            errors.push(RowError { line: line_no, message: format!("unparseable entry month {entry_text:?}") });
            continue;
        };
        let exit = match fields.get(3).map(|f| text(f)) {
            None => None,
            Some(t) if t.is_empty() => None,
            Some(t) => match opts.parse_month(&t) {
                Some(m) => Some(m),
                None => {
                    errors.push(RowError { line: line_no, message: format!("unparseable exit month {t:?}") });
                    continue;
                }
            },
        };
        let dev = trim_bytes(fields[0]);
        let proj = trim_bytes(fields[1]);
        if dev.is_empty() || proj.is_empty() {
            errors.push(RowError { line: line_no, message: "empty developer or project id".into() });
            continue;
        }
        match builder.push(dev, proj, entry, exit) {
            Ok(_) => line_of_event.push(line_no),
            Err(PushError::ExitBeforeEntry { entry, exit }) => errors.push(RowError {
                line: line_no,
                message: format!("exit month {exit} precedes entry month {entry}"),
            }),
            Err(PushError::Duplicate(first)) => {
                duplicates.push(DuplicateRow { line: line_no, first_line: line_of_event[first] })
            }
        }
    }
    if !errors.is_empty() {
        return Err(ParseFailure { rows: errors });
    }
    Ok(ParsedLog { log: builder.build(), duplicates, header_skipped })
}

fn trim_bytes(b: &[u8]) -> &[u8] {
    let start = b.iter().position(|c| !c.is_ascii_whitespace()).unwrap_or(b.len());
    let end = b.iter().rposition(|c| !c.is_ascii_whitespace()).map_or(start, |e| e + 1);
    &b[start..end]
}
