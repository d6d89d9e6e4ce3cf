//! Deterministic complete search over part subsets for the NP-complete
//! regimes: DFS in part index order, include before exclude, returning
//! the first valid complete selection.
//!
//! Pruning uses only facts that survive any completion of the branch:
//! dissonance, chord-size and short-segment violations of the
//! included-so-far set never disappear when more parts join, and the
//! coverage bound assumes every undecided part is included.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::engine::{verify, ConsonanceTable};
use crate::score::{intervals, ConstraintProfile, Pitch, Score, ScoreError, Selection};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("score has {parts} parts, over the exact-search limit of {max_parts}")]
    Capacity { parts: usize, max_parts: usize },
    #[error("time budget exhausted before the search finished")]
    Timeout,
    #[error("solver precondition not met: {0}")]
    Precondition(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Resource limits for [`solve_exact`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_parts: usize,
    pub time_budget: Option<Duration>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_parts: 24,
            time_budget: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExactStats {
    pub nodes_explored: u64,
}

struct Search<'a> {
    score: &'a Score,
    profile: &'a ConstraintProfile,
    table: ConsonanceTable,
    /// Per part, per inter-event interval: sounding instance count.
    counts: Vec<Vec<u32>>,
    /// Per part, per interval: pitches of those instances.
    pitches: Vec<Vec<Vec<Pitch>>>,
    /// Per interval: total instances over all parts.
    totals: Vec<u64>,
    /// Per interval: instances of included parts.
    cur: Vec<u64>,
    /// Per interval: instances of still-undecided parts.
    rem: Vec<u64>,
    /// Per interval: pitches of included instances.
    sel_pitches: Vec<Vec<Pitch>>,
    included: Vec<bool>,
    nodes: u64,
    deadline: Option<Instant>,
}

impl<'a> Search<'a> {
    fn new(score: &'a Score, profile: &'a ConstraintProfile, deadline: Option<Instant>) -> Self {
        let spans = intervals(score);
        let n_parts = score.parts.len();
        let n_iv = spans.len();
        let mut counts = vec![vec![0u32; n_iv]; n_parts];
        let mut pitches = vec![vec![Vec::new(); n_iv]; n_parts];
        let mut totals = vec![0u64; n_iv];
        for (pi, part) in score.parts.iter().enumerate() {
            for note in &part.notes {
                for (k, &(start, _)) in spans.iter().enumerate() {
                    if note.sounds_at(start) {
                        counts[pi][k] += 1;
                        pitches[pi][k].push(note.pitch);
                        totals[k] += 1;
                    }
                }
            }
        }
        let rem = totals.clone();
        Search {
            score,
            profile,
            table: ConsonanceTable::default(),
            counts,
            pitches,
            cur: vec![0; n_iv],
            rem,
            sel_pitches: vec![Vec::new(); n_iv],
            totals,
            included: vec![false; n_parts],
            nodes: 0,
            deadline,
        }
    }

    /// True when including `part` would immediately break consonance or
    /// the chord cap on some interval. Both violations are permanent
    /// under further inclusion, so the branch is safe to drop.
    fn include_violates(&self, part: usize) -> bool {
        for (k, &cnt) in self.counts[part].iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            if let Some(j) = self.profile.max_chord {
                if self.cur[k] + cnt as u64 > j as u64 {
                    return true;
                }
            }
            if self.profile.consonance {
                let new = &self.pitches[part][k];
                for (i, &a) in new.iter().enumerate() {
                    for &b in &new[i + 1..] {
                        if !self.table.consonant_interval(a, b) {
                            return true;
                        }
                    }
                    for &b in &self.sel_pitches[k] {
                        if !self.table.consonant_interval(a, b) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn commit_include(&mut self, part: usize) {
        self.included[part] = true;
        for (k, &cnt) in self.counts[part].iter().enumerate() {
            if cnt > 0 {
                self.cur[k] += cnt as u64;
                self.sel_pitches[k].extend_from_slice(&self.pitches[part][k]);
            }
        }
    }

    fn undo_include(&mut self, part: usize) {
        self.included[part] = false;
        for (k, &cnt) in self.counts[part].iter().enumerate() {
            if cnt > 0 {
                self.cur[k] -= cnt as u64;
                let keep = self.sel_pitches[k].len() - cnt as usize;
                self.sel_pitches[k].truncate(keep);
            }
        }
    }

    /// Optimistic coverage bound on the intervals `part` touches: even
    /// with every undecided part included, does coverage still hold?
    fn coverage_feasible(&self, part: usize) -> bool {
        let p = self.profile.p;
        for (k, &cnt) in self.counts[part].iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            let best = (self.cur[k] + self.rem[k]) as i128;
            if best * (p.den() as i128) < (p.num() as i128) * (self.totals[k] as i128) {
                return false;
            }
        }
        true
    }

    /// Any non-silent segment of the included parts shorter than `d`?
    fn has_short_segment(&self, d: u64) -> bool {
        let mut bounds = BTreeSet::new();
        let mut spans: Vec<(u64, u64)> = Vec::new();
        for (pi, part) in self.score.parts.iter().enumerate() {
            if !self.included[pi] {
                continue;
            }
            for note in &part.notes {
                bounds.insert(note.onset);
                bounds.insert(note.end());
                spans.push((note.onset, note.end()));
            }
        }
        let times: Vec<u64> = bounds.into_iter().collect();
        times.windows(2).any(|w| {
            w[1] - w[0] < d && spans.iter().any(|&(on, off)| on <= w[0] && w[0] < off)
        })
    }

    fn dfs(&mut self, part: usize) -> Result<bool, SolveError> {
        self.nodes += 1;
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                return Err(SolveError::Timeout);
            }
        }
        if part == self.score.parts.len() {
            return Ok(true);
        }
        for (k, &cnt) in self.counts[part].iter().enumerate() {
            self.rem[k] -= cnt as u64;
        }

        if !self.include_violates(part) {
            self.commit_include(part);
            let segments_ok = match self.profile.min_segment_ticks {
                Some(d) => !self.has_short_segment(d),
                None => true,
            };
            if segments_ok && self.coverage_feasible(part) && self.dfs(part + 1)? {
                return Ok(true);
            }
            self.undo_include(part);
        }

        if self.coverage_feasible(part) && self.dfs(part + 1)? {
            return Ok(true);
        }

        for (k, &cnt) in self.counts[part].iter().enumerate() {
            self.rem[k] += cnt as u64;
        }
        Ok(false)
    }
}

/// Complete deterministic search: returns the first valid selection in
/// DFS order (parts by index, include tried before exclude) or `None`
/// when no valid arrangement exists. A timeout is an error, never
/// `None`.
pub fn solve_exact(
    score: &Score,
    profile: &ConstraintProfile,
    limits: &SolveLimits,
) -> Result<(Option<Selection>, ExactStats), SolveError> {
    let parts = score.parts.len();
    if parts > limits.max_parts {
        return Err(SolveError::Capacity {
            parts,
            max_parts: limits.max_parts,
        });
    }
    let deadline = limits.time_budget.map(|budget| Instant::now() + budget);
    let mut search = Search::new(score, profile, deadline);
    let found = search.dfs(0)?;
    let stats = ExactStats {
        nodes_explored: search.nodes,
    };
    if !found {
        return Ok((None, stats));
    }
    let sel = Selection::from_ids(
        score
            .parts
            .iter()
            .zip(&search.included)
            .filter(|(_, &inc)| inc)
            .map(|(p, _)| p.id.clone()),
    );
    let (ok, violations) = verify(score, &sel, profile)?;
    assert!(
        ok,
        "exact search returned a selection that fails verification: {violations:?}"
    );
    Ok((Some(sel), stats))
}
