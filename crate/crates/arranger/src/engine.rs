//! The polynomial-time arrangement validity checker and its
//! per-constraint predicates.
//!
//! Every check walks the half-open intervals between consecutive note
//! events; the sounding sets are constant inside each interval, so this
//! is equivalent to checking every real instant while staying polynomial
//! in the note count.

use serde::{Deserialize, Serialize};

use crate::rational::Rational;
use crate::score::{
    intervals, segments, ConstraintProfile, Pitch, Score, ScoreError, Selection,
};

/// Which two-note intervals count as consonant, as residues mod 12.
///
/// The default set is `{0, 3, 4, 5, 7, 8, 9}`; its complement
/// `{1, 2, 6, 10, 11}` is dissonant. Octave shifts (`+12n`) are handled
/// by the mod-12 reduction. Fourths (interval 5) are kept consonant. The
/// table is configurable, but everything in this crate uses the default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsonanceTable {
    consonant: [bool; 12],
}

impl Default for ConsonanceTable {
    fn default() -> Self {
        ConsonanceTable::from_residues(&[0, 3, 4, 5, 7, 8, 9])
    }
}

impl ConsonanceTable {
    pub fn from_residues(residues: &[u8]) -> Self {
        let mut consonant = [false; 12];
        for &r in residues {
            assert!(r < 12, "consonance residues live in 0..=11");
            consonant[r as usize] = true;
        }
        ConsonanceTable { consonant }
    }

    pub fn consonant_residues(&self) -> Vec<u8> {
        (0..12u8).filter(|&r| self.consonant[r as usize]).collect()
    }

    /// True iff the interval between the two pitches, reduced mod 12, is
    /// consonant.
    pub fn consonant_interval(&self, a: Pitch, b: Pitch) -> bool {
        let diff = (a.semitone() as i32 - b.semitone() as i32).unsigned_abs() % 12;
        self.consonant[diff as usize]
    }

    /// True iff every unordered pair of pitches is consonant. Empty and
    /// singleton chords are vacuously consonant.
    pub fn chord_consonant(&self, pitches: &[Pitch]) -> bool {
        for (i, &a) in pitches.iter().enumerate() {
            for &b in &pitches[i + 1..] {
                if !self.consonant_interval(a, b) {
                    return false;
                }
            }
        }
        true
    }
}

/// [`ConsonanceTable::consonant_interval`] on the default table.
pub fn consonant_interval(a: Pitch, b: Pitch) -> bool {
    ConsonanceTable::default().consonant_interval(a, b)
}

/// [`ConsonanceTable::chord_consonant`] on the default table.
pub fn chord_consonant(pitches: &[Pitch]) -> bool {
    ConsonanceTable::default().chord_consonant(pitches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Coverage,
    Dissonance,
    ChordSize,
    SegmentTooShort,
}

/// One constraint violation, located on a half-open tick range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub start: u64,
    pub end: u64,
    pub details: String,
}

impl Violation {
    /// One-line JSON, suitable for JSON-lines reports.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("violation serialization cannot fail")
    }
}

/// Sounding note instances of the masked parts on the interval starting
/// at `tick`, returned as pitches per part index.
fn sounding_pitches(score: &Score, mask: &[bool], tick: u64) -> Vec<(usize, Pitch)> {
    let mut out = Vec::new();
    for (pi, part) in score.parts.iter().enumerate() {
        if !mask[pi] {
            continue;
        }
        for note in &part.notes {
            if note.sounds_at(tick) {
                out.push((pi, note.pitch));
            }
        }
    }
    out
}

fn selection_mask(score: &Score, sel: &Selection) -> Vec<bool> {
    score
        .parts
        .iter()
        .map(|part| sel.contains(&part.id))
        .collect()
}

/// Checks "at least a `p` fraction of the originally sounding instances
/// still sound" on every inter-event interval, in exact arithmetic
/// (`n * p.den >= p.num * N`). Intervals where nothing sounds in the
/// original are vacuously satisfied.
pub fn check_coverage(score: &Score, sel: &Selection, p: Rational) -> Vec<Violation> {
    let all = vec![true; score.parts.len()];
    let mask = selection_mask(score, sel);
    let mut out = Vec::new();
    for (start, end) in intervals(score) {
        let original = sounding_pitches(score, &all, start).len() as i64;
        if original == 0 {
            continue;
        }
        let selected = sounding_pitches(score, &mask, start).len() as i64;
        if (selected as i128) * (p.den() as i128) < (p.num() as i128) * (original as i128) {
            out.push(Violation {
                kind: ViolationKind::Coverage,
                start,
                end,
                details: format!("{selected} of {original} original notes sounding, below p={p}"),
            });
        }
    }
    out
}

/// Checks that no interval of the arrangement sounds a pairwise-dissonant
/// chord, against the given table.
pub fn check_consonance(score: &Score, sel: &Selection, table: &ConsonanceTable) -> Vec<Violation> {
    let mask = selection_mask(score, sel);
    let mut out = Vec::new();
    for (start, end) in intervals(score) {
        let sounding = sounding_pitches(score, &mask, start);
        let bad_pair = sounding.iter().enumerate().find_map(|(i, &(_, a))| {
            sounding[i + 1..]
                .iter()
                .find(|&&(_, b)| !table.consonant_interval(a, b))
                .map(|&(_, b)| (a, b))
        });
        if let Some((a, b)) = bad_pair {
            out.push(Violation {
                kind: ViolationKind::Dissonance,
                start,
                end,
                details: format!(
                    "pitches {} and {} are {} half-steps apart (dissonant)",
                    a.semitone(),
                    b.semitone(),
                    (a.semitone() as i32 - b.semitone() as i32).abs()
                ),
            });
        }
    }
    out
}

/// Checks that no interval of the arrangement sounds more than `j`
/// instances at once.
pub fn check_max_chord(score: &Score, sel: &Selection, j: u32) -> Vec<Violation> {
    let mask = selection_mask(score, sel);
    let mut out = Vec::new();
    for (start, end) in intervals(score) {
        let selected = sounding_pitches(score, &mask, start).len();
        if selected > j as usize {
            out.push(Violation {
                kind: ViolationKind::ChordSize,
                start,
                end,
                details: format!("{selected} simultaneous notes exceed the {j}-note limit"),
            });
        }
    }
    out
}

/// Checks that every non-silent segment of the arrangement lasts at
/// least `d` ticks. Silent segments are exempt.
pub fn check_min_segment(score: &Score, sel: &Selection, d: u64) -> Vec<Violation> {
    let mut out = Vec::new();
    for seg in segments(score, sel) {
        if !seg.is_empty() && seg.len() < d {
            out.push(Violation {
                kind: ViolationKind::SegmentTooShort,
                start: seg.start,
                end: seg.end,
                details: format!(
                    "{} notes held for only {} ticks, minimum is {d}",
                    seg.active.len(),
                    seg.len()
                ),
            });
        }
    }
    out
}

/// Runs every check the profile activates and aggregates all violations
/// rather than stopping at the first. Errors only on part ids the score
/// does not contain.
pub fn verify(
    score: &Score,
    sel: &Selection,
    profile: &ConstraintProfile,
) -> Result<(bool, Vec<Violation>), ScoreError> {
    sel.resolve(score)?;
    let mut violations = check_coverage(score, sel, profile.p);
    if profile.consonance {
        violations.extend(check_consonance(score, sel, &ConsonanceTable::default()));
    }
    if let Some(j) = profile.max_chord {
        violations.extend(check_max_chord(score, sel, j));
    }
    if let Some(d) = profile.min_segment_ticks {
        violations.extend(check_min_segment(score, sel, d));
    }
    violations.sort_by_key(|v| (v.start, v.end, v.kind));
    Ok((violations.is_empty(), violations))
}
