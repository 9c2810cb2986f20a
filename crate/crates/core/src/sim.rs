//! Monte Carlo simulation of the entry-and-growth process.
//!
//! One developer arrives per step. The first founds a project with certainty;
//! afterwards each arrival founds a new project with probability `p0` or joins
//! an existing project `r` with probability proportional to `x_r^alpha`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::{MeanSizeDistribution, SizeDistribution};
use crate::report::{fmt_num, Table};
use crate::rng::{stream_rng, GENERATOR_ID};
use crate::row;
use crate::snapshot::{MembershipEventLog, Month};

/// How the joined project is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Developer-slot sampling when `alpha == 1`, weight search otherwise.
    #[default]
    Auto,
    /// Pick a uniformly random placed developer and join her project.
    /// Exact size-proportional choice; only valid for `alpha == 1`.
    DeveloperSlot,
    /// Search a cumulative-weight tree over `x_r^alpha`.
    WeightSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub p0: f64,
    pub alpha: f64,
    pub n_steps: u64,
    pub seed: u64,
    /// Sorted step indices in `[1, n_steps]` at which the size distribution is
    /// recorded. Empty means "final step only".
    pub checkpoints: Vec<u64>,
    pub selection: Selection,
    /// Keep the project joined by every developer (for small runs).
    pub record_history: bool,
}

impl SimParams {
    pub fn new(p0: f64, n_steps: u64, seed: u64) -> Self {
        Self {
            p0,
            alpha: 1.0,
            n_steps,
            seed,
            checkpoints: Vec::new(),
            selection: Selection::Auto,
            record_history: false,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<u64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::Domain(format!("p0 must lie in (0, 1), got {}", self.p0)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {}", self.alpha)));
        }
        if self.n_steps < 1 {
            return Err(Error::Domain("n_steps must be >= 1".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("checkpoints must be strictly increasing".into()));
        }
        if let (Some(&first), Some(&last)) = (self.checkpoints.first(), self.checkpoints.last()) {
            if first < 1 || last > self.n_steps {
                return Err(Error::Domain(format!("checkpoints must lie in [1, {}]", self.n_steps)));
            }
        }
        if self.selection == Selection::DeveloperSlot && self.alpha != 1.0 {
            return Err(Error::Domain("developer-slot selection requires alpha = 1".into()));
        }
        Ok(())
    }

    fn resolved_selection(&self) -> Selection {
        match self.selection {
            Selection::Auto if self.alpha == 1.0 => Selection::DeveloperSlot,
            Selection::Auto => Selection::WeightSearch,
            s => s,
        }
    }

    /// `K(N) = (1 - p0)/N`, the join normalization for `alpha = 1`.
    pub fn join_normalization(&self, step: u64) -> f64 {
        (1.0 - self.p0) / step as f64
    }
}

/// Binary indexed tree over nonnegative weights.
#[derive(Debug, Clone, Default)]
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn push(&mut self, w: f64) {
        // new leaf i (1-based) covers (i - lowbit(i), i]
        let i = self.tree.len() + 1;
        let low = i & i.wrapping_neg();
        let mut sum = w;
        let mut j = i - 1;
        let stop = i - low;
        while j > stop {
            sum += self.tree[j - 1];
            j &= j - 1;
        }
        self.tree.push(sum);
    }

    fn add(&mut self, idx: usize, delta: f64) {
        let mut i = idx + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= target {
                pos = next;
                target -= self.tree[next - 1];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

/// Outcome of one arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Found,
    Join(usize),
}

#[derive(Debug, Clone)]
pub struct SimState {
    project_sizes: Vec<u64>,
    step: u64,
    sum_alpha_weights: f64,
    /// Project of each placed developer, in arrival order.
    owner: Vec<u32>,
    weights: Option<Fenwick>,
    alpha: f64,
}

impl SimState {
    /// State after the forced first founding (`step = 1`).
    pub fn new(params: &SimParams) -> Self {
        let weights = (params.resolved_selection() == Selection::WeightSearch).then(Fenwick::default);
        let mut s = Self {
            project_sizes: Vec::new(),
            step: 0,
            sum_alpha_weights: 0.0,
            owner: Vec::with_capacity(params.n_steps.min(1 << 26) as usize),
            weights,
            alpha: params.alpha,
        };
        s.apply(Move::Found);
        s
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn project_sizes(&self) -> &[u64] {
        &self.project_sizes
    }

    pub fn n_projects(&self) -> usize {
        self.project_sizes.len()
    }

    pub fn sum_alpha_weights(&self) -> f64 {
        self.sum_alpha_weights
    }

    pub fn history(&self) -> &[u32] {
        &self.owner
    }

    pub fn size_distribution(&self) -> SizeDistribution {
        SizeDistribution::from_sizes(self.project_sizes.iter().copied())
    }

    fn weight(&self, x: u64) -> f64 {
        (x as f64).powf(self.alpha)
    }

    /// Draws the next move without changing the state.
    pub fn draw<R: Rng + ?Sized>(&self, params: &SimParams, rng: &mut R) -> Move {
        if rng.random::<f64>() < params.p0 {
            return Move::Found;
        }
        match &self.weights {
            None => {
                let slot = rng.random_range(0..self.owner.len());
                Move::Join(self.owner[slot] as usize)
            }
            Some(tree) => {
                let target = rng.random::<f64>() * self.sum_alpha_weights;
                Move::Join(tree.find(target))
            }
        }
    }

    pub fn apply(&mut self, mv: Move) {
        let project = match mv {
            Move::Found => {
                self.project_sizes.push(1);
                let w = self.weight(1);
                self.sum_alpha_weights += w;
                if let Some(t) = &mut self.weights {
                    t.push(w);
                }
                self.project_sizes.len() - 1
            }
            Move::Join(r) => {
                let old = self.project_sizes[r];
                self.project_sizes[r] = old + 1;
                let delta = self.weight(old + 1) - self.weight(old);
                self.sum_alpha_weights += delta;
                if let Some(t) = &mut self.weights {
                    t.add(r, delta);
                }
                r
            }
        };
        self.owner.push(project as u32);
        self.step += 1;
    }

    /// One arrival.
    pub fn advance<R: Rng + ?Sized>(&mut self, params: &SimParams, rng: &mut R) -> Move {
        let mv = self.draw(params, rng);
        self.apply(mv);
        mv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub n_projects: u64,
    pub distribution: SizeDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub params: SimParams,
    pub stream: u64,
    pub generator: &'static str,
    pub checkpoints: Vec<Checkpoint>,
    /// Project joined by each developer in arrival order, if requested.
    pub history: Option<Vec<u32>>,
}

impl SimTrace {
    pub fn final_checkpoint(&self) -> &Checkpoint {
        self.checkpoints.last().expect("at least one checkpoint")
    }

    pub fn final_distribution(&self) -> &SizeDistribution {
        &self.final_checkpoint().distribution
    }

    /// `(step, n_projects)` at every checkpoint.
    pub fn project_count_series(&self) -> Vec<(u64, u64)> {
        self.checkpoints.iter().map(|c| (c.step, c.n_projects)).collect()
    }

    /// Maps the recorded history onto calendar months: developer `i`
    /// (0-based) joins in month `i / steps_per_month`, links never end.
    /// Returns `None` without history.
    pub fn to_event_log(&self, steps_per_month: u64) -> Option<MembershipEventLog> {
        let history = self.history.as_ref()?;
        let mut b = MembershipEventLog::builder();
        for (i, &p) in history.iter().enumerate() {
            let month = (i as u64 / steps_per_month.max(1)) as Month;
            b.push(format!("d{i}"), format!("p{p}"), month, None).expect("fresh developer per arrival");
        }
        Some(b.build())
    }

    pub fn header(&self) -> Vec<(String, String)> {
        let p = &self.params;
        vec![
            ("p0".into(), fmt_num(p.p0)),
            ("alpha".into(), fmt_num(p.alpha)),
            ("steps".into(), p.n_steps.to_string()),
            ("seed".into(), p.seed.to_string()),
            ("stream".into(), self.stream.to_string()),
            ("generator".into(), self.generator.to_string()),
        ]
    }

    /// Rows `checkpoint_step,size,count`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["checkpoint_step", "size", "count"]);
        t.meta = self.header();
        for c in &self.checkpoints {
            for (x, n) in c.distribution.iter() {
                t.push(row![c.step, x, n]);
            }
        }
        t
    }
}

fn run_stream(params: &SimParams, stream: u64) -> Result<SimTrace> {
    params.validate()?;
    let checkpoints = if params.checkpoints.is_empty() { vec![params.n_steps] } else { params.checkpoints.clone() };
    let mut rng = stream_rng(params.seed, stream);
    let mut state = SimState::new(params);
    let mut recorded = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    loop {
        while next.peek().is_some_and(|&&c| c == state.step()) {
            next.next();
            recorded.push(Checkpoint {
                step: state.step(),
                n_projects: state.n_projects() as u64,
                distribution: state.size_distribution(),
            });
        }
        if state.step() >= params.n_steps {
            break;
        }
        state.advance(params, &mut rng);
    }
    let history = params.record_history.then(|| state.owner.clone());
    Ok(SimTrace { params: params.clone(), stream, generator: GENERATOR_ID, checkpoints: recorded, history })
}

/// A single run on stream 0 of `params.seed`.
pub fn run(params: &SimParams) -> Result<SimTrace> {
    run_stream(params, 0)
}

#[derive(Debug, Clone)]
pub struct Replicates {
    /// Mean counts at the final step.
    pub mean: MeanSizeDistribution,
    pub traces: Vec<SimTrace>,
}

impl Replicates {
    /// Rows `size,mean_count,frequency`.
    pub fn mean_table(&self) -> Table {
        let mut t = Table::new(&["size", "mean_count", "frequency"]);
        if let Some(first) = self.traces.first() {
            t.meta = first.header();
            t.meta.retain(|(k, _)| k != "stream");
        }
        t.push_meta("replicas", self.traces.len());
        let freq = self.mean.frequencies();
        for (&x, &c) in &self.mean.counts {
            t.push(row![x, fmt_num(c), fmt_num(freq[&x])]);
        }
        t
    }
}

/// `replicas` independent runs; replica `r` uses stream `r` of `params.seed`,
/// so replica 0 equals [`run`]. Runs in parallel on the current rayon pool.
pub fn replicate(params: &SimParams, replicas: usize) -> Result<Replicates> {
    if replicas < 1 {
        return Err(Error::Domain("replica count must be >= 1".into()));
    }
    params.validate()?;
    let traces: Vec<SimTrace> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| run_stream(params, r))
        .collect::<Result<_>>()?;
    let mean = MeanSizeDistribution::average(traces.iter().map(|t| t.final_distribution()));
    Ok(Replicates { mean, traces })
}
