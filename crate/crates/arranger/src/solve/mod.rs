//! Solver routing and the polynomial-time special cases: empty
//! arrangement at `p = 0`, full arrangement at `p = 1`, the
//! over-coverage regime `p > j/(j+1)`, and 2-coloring for single-note
//! chords at `p > 1/3`. Everything else goes to the exact search.

mod exact;

pub use exact::{solve_exact, ExactStats, SolveError, SolveLimits};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::engine::verify;
use crate::score::{intervals, ConstraintProfile, Score, Selection};

/// Which algorithm the constraint profile routes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverRoute {
    PZero,
    POne,
    Overcoverage,
    TwoColoring,
    Exact,
}

impl std::fmt::Display for SolverRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SolverRoute::PZero => "p_zero",
            SolverRoute::POne => "p_one",
            SolverRoute::Overcoverage => "overcoverage",
            SolverRoute::TwoColoring => "two_coloring",
            SolverRoute::Exact => "exact",
        };
        write!(f, "{name}")
    }
}

/// Routes a profile to a solver. The polynomial chord-cap routes apply
/// only when no other specific constraint is active; the region
/// `j/(j+2) < p <= j/(j+1)` for `j >= 2` carries no known polynomial
/// algorithm and goes to the exact search like the hard regions.
pub fn dispatch(_score: &Score, profile: &ConstraintProfile) -> SolverRoute {
    if profile.p.is_zero() {
        return SolverRoute::PZero;
    }
    if profile.p.is_one() {
        return SolverRoute::POne;
    }
    if !profile.consonance && profile.min_segment_ticks.is_none() {
        if let Some(j) = profile.max_chord {
            if profile.p.cmp_ratio(j as i64, j as i64 + 1).is_gt() {
                return SolverRoute::Overcoverage;
            }
            if j == 1 && profile.p.cmp_ratio(1, 3).is_gt() {
                return SolverRoute::TwoColoring;
            }
        }
    }
    SolverRoute::Exact
}

/// `p = 0`: the empty arrangement is always valid; every other
/// constraint is vacuous on silence.
pub fn solve_p_zero(_score: &Score, profile: &ConstraintProfile) -> Result<Selection, SolveError> {
    if !profile.p.is_zero() {
        return Err(SolveError::Precondition(format!(
            "solve_p_zero needs p = 0, got p={}",
            profile.p
        )));
    }
    Ok(Selection::empty())
}

/// `p = 1`: the only candidate is the all-parts selection; check it.
pub fn solve_p_one(
    score: &Score,
    profile: &ConstraintProfile,
) -> Result<Option<Selection>, SolveError> {
    if !profile.p.is_one() {
        return Err(SolveError::Precondition(format!(
            "solve_p_one needs p = 1, got p={}",
            profile.p
        )));
    }
    let sel = Selection::all_parts(score);
    let (ok, _) = verify(score, &sel, profile)?;
    Ok(if ok { Some(sel) } else { None })
}

fn require_pure_chord_profile(profile: &ConstraintProfile) -> Result<u32, SolveError> {
    if profile.consonance || profile.min_segment_ticks.is_some() {
        return Err(SolveError::Precondition(
            "chord-cap routes apply only when no other specific constraint is active".into(),
        ));
    }
    profile.max_chord.ok_or_else(|| {
        SolveError::Precondition("chord-cap routes need a max_chord limit".into())
    })
}

/// `p > j/(j+1)`: any interval with more than `j` original notes sinks
/// every arrangement, and otherwise playing everything works.
pub fn solve_overcoverage(
    score: &Score,
    profile: &ConstraintProfile,
) -> Result<Option<Selection>, SolveError> {
    let j = require_pure_chord_profile(profile)?;
    if profile.p.cmp_ratio(j as i64, j as i64 + 1).is_le() {
        return Err(SolveError::Precondition(format!(
            "solve_overcoverage needs p > j/(j+1), got p={} with j={j}",
            profile.p
        )));
    }
    for (start, _) in intervals(score) {
        let sounding: usize = score
            .parts
            .iter()
            .map(|part| part.notes.iter().filter(|n| n.sounds_at(start)).count())
            .sum();
        if sounding > j as usize {
            return Ok(None);
        }
    }
    Ok(Some(Selection::all_parts(score)))
}

/// `j = 1`, `p > 1/3`: intervals with one sounding note force their
/// part, intervals with two make the owners a different-color pair, and
/// three or more are unsatisfiable, so feasibility is graph 2-coloring
/// with forced nodes. For `p > 1/2` a two-note interval is already
/// contradictory (coverage wants both, the cap allows one).
pub fn solve_two_coloring(
    score: &Score,
    profile: &ConstraintProfile,
) -> Result<Option<Selection>, SolveError> {
    let j = require_pure_chord_profile(profile)?;
    if j != 1 || profile.p.cmp_ratio(1, 3).is_le() || profile.p.is_zero() {
        return Err(SolveError::Precondition(format!(
            "solve_two_coloring needs j = 1 and 1/3 < p <= 1, got p={} with j={j}",
            profile.p
        )));
    }

    let n_parts = score.parts.len();
    let mut forced_play: Vec<bool> = vec![false; n_parts];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (start, _) in intervals(score) {
        let mut owners: Vec<usize> = Vec::new();
        for (pi, part) in score.parts.iter().enumerate() {
            for note in &part.notes {
                if note.sounds_at(start) {
                    owners.push(pi);
                }
            }
        }
        match owners.len() {
            0 => {}
            1 => forced_play[owners[0]] = true,
            2 => {
                if profile.p.cmp_ratio(1, 2).is_gt() {
                    // both required by coverage, capped at one by j = 1
                    return Ok(None);
                }
                if owners[0] == owners[1] {
                    return Ok(None);
                }
                edges.push((owners[0], owners[1]));
            }
            _ => return Ok(None),
        }
    }

    if profile.p.cmp_ratio(1, 2).is_gt() {
        // no interval had two or more notes; everything is forced or free
        let sel = Selection::all_parts(score);
        let (ok, violations) = verify(score, &sel, profile)?;
        assert!(ok, "overfull two-coloring selection failed verify: {violations:?}");
        return Ok(Some(sel));
    }

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n_parts];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }

    // BFS 2-coloring, forced nodes seeded as "play" first, then each
    // remaining component rooted at its lowest-indexed part as "play".
    let mut color: Vec<Option<bool>> = vec![None; n_parts];
    let mut queue = VecDeque::new();
    for (pi, &forced) in forced_play.iter().enumerate() {
        if forced && color[pi].is_none() {
            color[pi] = Some(true);
            queue.push_back(pi);
            if !bfs_color(&adjacency, &forced_play, &mut color, &mut queue) {
                return Ok(None);
            }
        }
    }
    for pi in 0..n_parts {
        if color[pi].is_none() {
            color[pi] = Some(true);
            queue.push_back(pi);
            if !bfs_color(&adjacency, &forced_play, &mut color, &mut queue) {
                return Ok(None);
            }
        }
    }

    let sel = Selection::from_ids(
        score
            .parts
            .iter()
            .enumerate()
            .filter(|(pi, _)| color[*pi] == Some(true))
            .map(|(_, p)| p.id.clone()),
    );
    let (ok, violations) = verify(score, &sel, profile)?;
    assert!(ok, "two-coloring produced an invalid selection: {violations:?}");
    Ok(Some(sel))
}

/// Propagates colors breadth-first; false on an odd cycle or a forced
/// part colored silent.
fn bfs_color(
    adjacency: &[Vec<usize>],
    forced_play: &[bool],
    color: &mut [Option<bool>],
    queue: &mut VecDeque<usize>,
) -> bool {
    while let Some(node) = queue.pop_front() {
        let c = color[node].expect("queued nodes are colored");
        for &next in &adjacency[node] {
            match color[next] {
                Some(existing) => {
                    if existing == c {
                        return false;
                    }
                }
                None => {
                    if c && forced_play[next] {
                        // would color a forced part silent
                        return false;
                    }
                    color[next] = Some(!c);
                    queue.push_back(next);
                }
            }
        }
    }
    true
}

/// Final status of a solve run, the CLI/report vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
}

/// Machine-readable solve result:
/// `{"status":…,"selection":[…],"nodes_explored":…,"route":…}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub selection: Vec<String>,
    pub nodes_explored: u64,
    pub route: SolverRoute,
}

impl SolveReport {
    pub fn selection(&self) -> Option<Selection> {
        match self.status {
            SolveStatus::Sat => Some(Selection::from_ids(self.selection.iter().cloned())),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

fn report(route: SolverRoute, found: Option<Selection>, nodes_explored: u64) -> SolveReport {
    match found {
        Some(sel) => SolveReport {
            status: SolveStatus::Sat,
            selection: sel.included.iter().cloned().collect(),
            nodes_explored,
            route,
        },
        None => SolveReport {
            status: SolveStatus::Unsat,
            selection: Vec::new(),
            nodes_explored,
            route,
        },
    }
}

/// Dispatches per the hardness table and runs the routed solver. An
/// exact-search timeout becomes `status: timeout` in the report;
/// capacity and precondition problems stay hard errors.
pub fn solve(
    score: &Score,
    profile: &ConstraintProfile,
    limits: &SolveLimits,
) -> Result<SolveReport, SolveError> {
    let route = dispatch(score, profile);
    match route {
        SolverRoute::PZero => Ok(report(route, Some(solve_p_zero(score, profile)?), 0)),
        SolverRoute::POne => Ok(report(route, solve_p_one(score, profile)?, 0)),
        SolverRoute::Overcoverage => Ok(report(route, solve_overcoverage(score, profile)?, 0)),
        SolverRoute::TwoColoring => Ok(report(route, solve_two_coloring(score, profile)?, 0)),
        SolverRoute::Exact => match solve_exact(score, profile, limits) {
            Ok((found, stats)) => Ok(report(route, found, stats.nodes_explored)),
            Err(SolveError::Timeout) => Ok(SolveReport {
                status: SolveStatus::Timeout,
                selection: Vec::new(),
                nodes_explored: 0,
                route,
            }),
            Err(e) => Err(e),
        },
    }
}
