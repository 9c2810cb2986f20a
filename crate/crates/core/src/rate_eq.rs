//! Deterministic mean-field iteration of the size-class difference equations
//! and their closed-form stationary solution.
//!
//! For `N -> N + 1`:
//!
//! ```text
//! Δn(1, N) = p0 - (1 - p0)·n(1, N)/N
//! Δn(x, N) = (1 - p0)·[(x - 1)·n(x - 1, N) - x·n(x, N)]/N,   x >= 2
//! ```
//!
//! starting from `n(1, 1) = 1`. Classes above `x_trunc` are lumped into an
//! overflow bin that tracks both its project count and its developer mass.

use crate::error::{Error, Result};
use crate::report::{fmt_num, Table};
use crate::row;
use crate::yule::{rho_from_p0, YuleSimon};

pub const DEFAULT_X_TRUNC: usize = 1000;

/// Expected counts `n(x, N)` at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterState {
    pub step: u64,
    /// `counts[x - 1] = n(x, N)` for `x = 1..=x_trunc`.
    pub counts: Vec<f64>,
    pub overflow_count: f64,
    pub overflow_mass: f64,
}

impl MasterState {
    pub fn n(&self, x: u64) -> f64 {
        match x {
            0 => 0.0,
            x => self.counts.get(x as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// Σ x·n(x, N), including the overflow bin.
    pub fn mass(&self) -> f64 {
        let body: f64 = self.counts.iter().enumerate().map(|(i, &c)| (i + 1) as f64 * c).sum();
        body + self.overflow_mass
    }

    /// Σ n(x, N), including the overflow bin.
    pub fn n_projects(&self) -> f64 {
        self.counts.iter().sum::<f64>() + self.overflow_count
    }
}

fn check_p0(p0: f64) -> Result<()> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Domain(format!("p0 must lie in (0, 1), got {p0}")));
    }
    Ok(())
}

/// Iterates to `n_max_steps` with the default truncation, recording the
/// requested steps (sorted, within `[1, n_max_steps]`; others ignored).
pub fn iterate_master(p0: f64, n_max_steps: u64, record_at: &[u64]) -> Result<Vec<MasterState>> {
    iterate_master_truncated(p0, n_max_steps, record_at, DEFAULT_X_TRUNC)
}

pub fn iterate_master_truncated(
    p0: f64,
    n_max_steps: u64,
    record_at: &[u64],
    x_trunc: usize,
) -> Result<Vec<MasterState>> {
    check_p0(p0)?;
    if n_max_steps < 1 {
        return Err(Error::Domain("n_max_steps must be >= 1".into()));
    }
    if x_trunc < 1 {
        return Err(Error::Domain("x_trunc must be >= 1".into()));
    }
    let q = 1.0 - p0;
    let mut n = vec![0.0f64; x_trunc];
    n[0] = 1.0;
    let (mut over_count, mut over_mass) = (0.0f64, 0.0f64);
    let mut wanted = record_at.iter().copied().filter(|&s| s >= 1 && s <= n_max_steps).peekable();
    let mut out = Vec::new();

    let mut step = 1u64;
    loop {
        while wanted.peek() == Some(&step) {
            wanted.next();
            out.push(MasterState { step, counts: n.clone(), overflow_count: over_count, overflow_mass: over_mass });
        }
        if step == n_max_steps {
            break;
        }
        let inv = q / step as f64;
        let top = x_trunc as f64;
        let to_overflow = inv * top * n[x_trunc - 1];
        over_mass += to_overflow * (top + 1.0) + inv * over_mass;
        over_count += to_overflow;
        // descending so n[x - 2] is still the old value when n[x - 1] is updated
        let hi = ((step + 1) as usize).min(x_trunc);
        for x in (2..=hi).rev() {
            let xf = x as f64;
            n[x - 1] += inv * ((xf - 1.0) * n[x - 2] - xf * n[x - 1]);
        }
        n[0] += p0 - inv * n[0];
        step += 1;
    }
    Ok(out)
}

/// Stationary solution `n*(x, N) = ρ·B(x, ρ+1)·N·p0` for `x = 1..=max_x`.
pub fn steady_state(p0: f64, n: u64, max_x: u64) -> Result<Vec<(u64, f64)>> {
    let rho = rho_from_p0(p0)?;
    if n < 1 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    Ok(YuleSimon::new(rho)?.expected_counts(n as f64 * p0, max_x))
}

/// Rows `N,x,n` for each recorded state (classes up to `max_x`).
pub fn master_table(p0: f64, states: &[MasterState], max_x: u64) -> Table {
    let mut t = Table::new(&["N", "x", "n"]).meta("p0", fmt_num(p0));
    for s in states {
        for x in 1..=max_x.min(s.counts.len() as u64) {
            t.push(row![s.step, x, fmt_num(s.n(x))]);
        }
    }
    t
}
