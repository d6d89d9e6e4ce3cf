//! Tick-based score model: notes, parts, selections, and the event
//! timeline every checker and solver walks.
//!
//! Time is integer ticks with a score-level `ticks_per_beat`; a note
//! sounds on the half-open interval `[onset, onset + duration)`. All
//! values are immutable after construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Errors constructing or validating score-model values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("pitch {0} out of range 0..=127")]
    PitchOutOfRange(u32),
    #[error("note duration must be at least 1 tick")]
    ZeroDuration,
    #[error("note extends past the representable tick range")]
    TickOverflow,
    #[error("ticks_per_beat must be at least 1")]
    ZeroTicksPerBeat,
    #[error("duplicate part id {0:?}")]
    DuplicatePartId(String),
    #[error("unknown part id {0:?}")]
    UnknownPart(String),
    #[error("coverage fraction p must lie in [0, 1], got {0}")]
    POutOfRange(Rational),
    #[error("max_chord must be at least 1")]
    ZeroMaxChord,
    #[error("min_segment_ticks must be at least 1")]
    ZeroMinSegment,
}

/// MIDI-style semitone number, 0..=127.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Pitch(u8);

impl Pitch {
    pub fn new(semitone: u32) -> Result<Self, ScoreError> {
        if semitone > 127 {
            return Err(ScoreError::PitchOutOfRange(semitone));
        }
        Ok(Pitch(semitone as u8))
    }

    pub fn semitone(&self) -> u8 {
        self.0
    }
}

impl TryFrom<u32> for Pitch {
    type Error = ScoreError;
    fn try_from(v: u32) -> Result<Self, Self::Error> {
        Pitch::new(v)
    }
}

impl From<Pitch> for u32 {
    fn from(p: Pitch) -> u32 {
        p.0 as u32
    }
}

/// A single note: half-open sounding interval `[onset, onset + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawNote", into = "RawNote")]
pub struct Note {
    pub onset: u64,
    pub duration: u64,
    pub pitch: Pitch,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNote {
    onset: u64,
    duration: u64,
    pitch: Pitch,
}

impl TryFrom<RawNote> for Note {
    type Error = ScoreError;
    fn try_from(raw: RawNote) -> Result<Self, Self::Error> {
        Note::new(raw.onset, raw.duration, raw.pitch)
    }
}

impl From<Note> for RawNote {
    fn from(n: Note) -> RawNote {
        RawNote {
            onset: n.onset,
            duration: n.duration,
            pitch: n.pitch,
        }
    }
}

impl Note {
    pub fn new(onset: u64, duration: u64, pitch: Pitch) -> Result<Self, ScoreError> {
        if duration == 0 {
            return Err(ScoreError::ZeroDuration);
        }
        if onset.checked_add(duration).is_none() {
            return Err(ScoreError::TickOverflow);
        }
        Ok(Note {
            onset,
            duration,
            pitch,
        })
    }

    /// First tick after the note stops sounding.
    pub fn end(&self) -> u64 {
        self.onset + self.duration
    }

    /// True iff the note sounds at `tick` (half-open on the right).
    pub fn sounds_at(&self, tick: u64) -> bool {
        self.onset <= tick && tick < self.end()
    }
}

/// One instrument line. Included or excluded from an arrangement in its
/// entirety; may contain simultaneous notes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawPart")]
pub struct Part {
    pub id: String,
    pub notes: Vec<Note>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPart {
    id: String,
    notes: Vec<Note>,
}

impl From<RawPart> for Part {
    fn from(raw: RawPart) -> Part {
        Part::new(raw.id, raw.notes)
    }
}

impl Part {
    /// Notes are kept sorted by (onset, pitch, duration); input in any
    /// order is canonicalized here.
    pub fn new(id: impl Into<String>, mut notes: Vec<Note>) -> Self {
        notes.sort_by_key(|n| (n.onset, n.pitch, n.duration));
        Part {
            id: id.into(),
            notes,
        }
    }
}

/// A multi-part score at a fixed tick resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScore", into = "RawScore")]
pub struct Score {
    pub ticks_per_beat: u32,
    pub parts: Vec<Part>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScore {
    ticks_per_beat: u32,
    parts: Vec<Part>,
}

impl TryFrom<RawScore> for Score {
    type Error = ScoreError;
    fn try_from(raw: RawScore) -> Result<Self, Self::Error> {
        Score::new(raw.ticks_per_beat, raw.parts)
    }
}

impl From<Score> for RawScore {
    fn from(s: Score) -> RawScore {
        RawScore {
            ticks_per_beat: s.ticks_per_beat,
            parts: s.parts,
        }
    }
}

impl Score {
    pub fn new(ticks_per_beat: u32, parts: Vec<Part>) -> Result<Self, ScoreError> {
        if ticks_per_beat == 0 {
            return Err(ScoreError::ZeroTicksPerBeat);
        }
        let mut seen = BTreeSet::new();
        for part in &parts {
            if !seen.insert(part.id.clone()) {
                return Err(ScoreError::DuplicatePartId(part.id.clone()));
            }
        }
        Ok(Score {
            ticks_per_beat,
            parts,
        })
    }

    pub fn part_index(&self, id: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.id == id)
    }

    pub fn total_notes(&self) -> usize {
        self.parts.iter().map(|p| p.notes.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("score serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A candidate arrangement: the set of part ids played in full.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Selection {
    pub included: BTreeSet<String>,
}

impl Selection {
    pub fn empty() -> Self {
        Selection::default()
    }

    pub fn from_ids<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Self {
        Selection {
            included: ids.into_iter().map(Into::into).collect(),
        }
    }

    pub fn all_parts(score: &Score) -> Self {
        Selection::from_ids(score.parts.iter().map(|p| p.id.clone()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.included.contains(id)
    }

    /// Resolves the selection to part indices, failing on ids the score
    /// does not contain.
    pub fn resolve(&self, score: &Score) -> Result<Vec<usize>, ScoreError> {
        let mut idx = Vec::with_capacity(self.included.len());
        for id in &self.included {
            match score.part_index(id) {
                Some(i) => idx.push(i),
                None => return Err(ScoreError::UnknownPart(id.clone())),
            }
        }
        idx.sort_unstable();
        Ok(idx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("selection serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// The constraints an arrangement must satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintProfile {
    /// Minimum fraction of originally sounding note instances that must
    /// still sound at every instant.
    pub p: Rational,
    /// Forbid pairwise-dissonant chords.
    pub consonance: bool,
    /// Maximum simultaneous sounding instances, if limited.
    pub max_chord: Option<u32>,
    /// Minimum length in ticks of any non-silent segment, if limited.
    pub min_segment_ticks: Option<u64>,
}

impl ConstraintProfile {
    pub fn new(
        p: Rational,
        consonance: bool,
        max_chord: Option<u32>,
        min_segment_ticks: Option<u64>,
    ) -> Result<Self, ScoreError> {
        if p < Rational::zero() || p > Rational::one() {
            return Err(ScoreError::POutOfRange(p));
        }
        if max_chord == Some(0) {
            return Err(ScoreError::ZeroMaxChord);
        }
        if min_segment_ticks == Some(0) {
            return Err(ScoreError::ZeroMinSegment);
        }
        Ok(ConstraintProfile {
            p,
            consonance,
            max_chord,
            min_segment_ticks,
        })
    }

    /// Coverage-only profile, the base of every variant.
    pub fn coverage(p: Rational) -> Result<Self, ScoreError> {
        ConstraintProfile::new(p, false, None, None)
    }
}

/// Identity of one note instance within a score: part index plus note
/// index inside that part. Two equal-pitch notes in different parts (or
/// positions) are distinct instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NoteId {
    pub part: usize,
    pub note: usize,
}

/// A maximal half-open interval over which the set of sounding note
/// instances of an arrangement is constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: u64,
    pub end: u64,
    pub active: Vec<NoteId>,
}

impl Segment {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

/// Sorted, deduplicated set of all note onsets and offsets in the score.
///
/// Constraint checks evaluated once per half-open interval between
/// consecutive events are equivalent to checks at every real instant.
pub fn event_times(score: &Score) -> Vec<u64> {
    let mut times = BTreeSet::new();
    for part in &score.parts {
        for note in &part.notes {
            times.insert(note.onset);
            times.insert(note.end());
        }
    }
    times.into_iter().collect()
}

/// The half-open intervals between consecutive events of [`event_times`].
pub fn intervals(score: &Score) -> Vec<(u64, u64)> {
    let times = event_times(score);
    times.windows(2).map(|w| (w[0], w[1])).collect()
}

/// All note instances from included parts sounding at `tick`, as
/// `(part_id, note)` pairs in part order. Equal pitches from different
/// instances stay distinct entries.
pub fn sounding_notes<'a>(
    score: &'a Score,
    sel: &Selection,
    tick: u64,
) -> Result<Vec<(&'a str, &'a Note)>, ScoreError> {
    let indices = sel.resolve(score)?;
    let mut out = Vec::new();
    for &i in &indices {
        let part = &score.parts[i];
        for note in &part.notes {
            if note.sounds_at(tick) {
                out.push((part.id.as_str(), note));
            }
        }
    }
    Ok(out)
}

/// Splits the arrangement `sel` of `score` into maximal half-open
/// intervals with a constant active-instance set.
///
/// Boundaries occur exactly at onsets/offsets of included notes, so two
/// consecutive equal-pitch notes produce two segments (re-articulation).
/// Segments with an empty active set can appear between sounding ones;
/// the concatenation covers `[first onset, last offset)` of the included
/// notes. Part ids in `sel` that the score lacks are ignored.
pub fn segments(score: &Score, sel: &Selection) -> Vec<Segment> {
    let mut boundaries = BTreeSet::new();
    let mut instances: Vec<(NoteId, u64, u64)> = Vec::new();
    for (pi, part) in score.parts.iter().enumerate() {
        if !sel.contains(&part.id) {
            continue;
        }
        for (ni, note) in part.notes.iter().enumerate() {
            boundaries.insert(note.onset);
            boundaries.insert(note.end());
            instances.push((NoteId { part: pi, note: ni }, note.onset, note.end()));
        }
    }
    let times: Vec<u64> = boundaries.into_iter().collect();
    let mut out = Vec::new();
    for w in times.windows(2) {
        let (start, end) = (w[0], w[1]);
        let active: Vec<NoteId> = instances
            .iter()
            .filter(|&&(_, on, off)| on <= start && start < off)
            .map(|&(id, _, _)| id)
            .collect();
        out.push(Segment { start, end, active });
    }
    out
}
