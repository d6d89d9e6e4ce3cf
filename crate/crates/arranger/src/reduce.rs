//! Compiles CNF formulas into scores whose valid arrangements correspond
//! exactly to satisfying assignments, one gadget family per constraint
//! variant, plus the inverse encode/decode between assignments and
//! selections.
//!
//! All gadgets are laid out in 8-beat measures at 4 ticks per beat.
//! Forced-true parts are pinned by solo measures (any positive coverage
//! fraction forces a lone note); forced-false parts are pinned by a
//! gadget that makes selecting them violate the variant's specific
//! constraint; variable gadgets admit exactly one of the two parts per
//! variable; clause gadgets turn the coverage fraction into the clause's
//! truth rule via padding computed from exact inequalities.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cnf::{Assignment, CnfFormula, Semantics};
use crate::rational::Rational;
use crate::score::{ConstraintProfile, Note, Part, Pitch, Score, Selection};

pub const TICKS_PER_BEAT: u32 = 4;
pub const MEASURE_BEATS: u64 = 8;
pub const MEASURE_TICKS: u64 = MEASURE_BEATS * TICKS_PER_BEAT as u64;
/// "Two beats" in gadget ticks, the transition variant's minimum segment.
pub const MIN_SEGMENT_TICKS: u64 = 2 * TICKS_PER_BEAT as u64;

// Consonance-variant pitch assignments. The variable pair is a half-step
// (dissonant); padding trues sit a fourth/major third above it (both
// consonant); a false candidate clashes with the pad pitch by a
// half-step; clause notes are all identical.
const PITCH_VAR_TRUE: u32 = 60;
const PITCH_VAR_FALSE: u32 = 61;
const PITCH_PAD: u32 = 65;
const PITCH_FALSE_CANDIDATE: u32 = 66;
const PITCH_CLAUSE: u32 = 60;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("reduction requires 0 < p < 1, got p={0}")]
    POutOfRange(Rational),
    #[error("max chord size j must be at least 1")]
    InvalidMaxChord,
    #[error("p={p} outside the hard region: requires 0 < p <= j/(j+2) = {j}/{}", j + 2)]
    OutsideHardRegion { j: u32, p: Rational },
    #[error("expected a formula with {0} semantics")]
    WrongSemantics(Semantics),
    #[error("assignment covers {0} variables but the mapping has {1}")]
    VariableMismatch(usize, u32),
    #[error("malformed witness: variable {0} has {1} of its two parts selected")]
    MalformedWitness(u32, usize),
    #[error("invalid reduction mapping: {0}")]
    InvalidMapping(String),
}

/// Clause-gadget padding: `t` forced-true and `f` forced-false parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaddingPlan {
    pub t: u32,
    pub f: u32,
}

/// Which gadget family a score was compiled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Consonance,
    MaxChord,
    Transition,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Consonance => write!(f, "consonance"),
            Variant::MaxChord => write!(f, "maxchord"),
            Variant::Transition => write!(f, "transition"),
        }
    }
}

/// Role a generated part plays in the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    ForcedTrue(u32),
    ForcedFalse(u32),
    VarTrue(u32),
    VarFalse(u32),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::ForcedTrue(k) => write!(f, "forced_true:{k}"),
            Role::ForcedFalse(k) => write!(f, "forced_false:{k}"),
            Role::VarTrue(i) => write!(f, "var_true:{i}"),
            Role::VarFalse(i) => write!(f, "var_false:{i}"),
        }
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, idx) = s
            .split_once(':')
            .ok_or_else(|| format!("role {s:?} missing ':'"))?;
        let idx: u32 = idx.parse().map_err(|_| format!("bad role index in {s:?}"))?;
        match kind {
            "forced_true" => Ok(Role::ForcedTrue(idx)),
            "forced_false" => Ok(Role::ForcedFalse(idx)),
            "var_true" => Ok(Role::VarTrue(idx)),
            "var_false" => Ok(Role::VarFalse(idx)),
            other => Err(format!("unknown role kind {other:?}")),
        }
    }
}

impl Serialize for Role {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sidecar tying generated part ids to reduction roles, written next to
/// the compiled score so arrangements can be decoded back to
/// assignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionMapping {
    pub variant: Variant,
    pub p: Rational,
    pub j: Option<u32>,
    pub roles: BTreeMap<String, Role>,
    pub formula_digest: String,
}

impl ReductionMapping {
    pub fn num_vars(&self) -> u32 {
        self.roles
            .values()
            .filter_map(|r| match r {
                Role::VarTrue(i) => Some(*i),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// `variable index -> (var_true part id, var_false part id)`.
    pub fn variable_parts(&self) -> Result<BTreeMap<u32, (String, String)>, ReduceError> {
        let mut trues: BTreeMap<u32, String> = BTreeMap::new();
        let mut falses: BTreeMap<u32, String> = BTreeMap::new();
        for (id, role) in &self.roles {
            let (bucket, kind, i) = match role {
                Role::VarTrue(i) => (&mut trues, "var_true", *i),
                Role::VarFalse(i) => (&mut falses, "var_false", *i),
                _ => continue,
            };
            if bucket.insert(i, id.clone()).is_some() {
                return Err(ReduceError::InvalidMapping(format!(
                    "duplicate {kind} role for variable {i}"
                )));
            }
        }
        let mut out = BTreeMap::new();
        for i in 1..=self.num_vars() {
            match (trues.remove(&i), falses.remove(&i)) {
                (Some(t), Some(f)) => {
                    out.insert(i, (t, f));
                }
                _ => {
                    return Err(ReduceError::InvalidMapping(format!(
                        "variable {i} lacks a var_true/var_false pair"
                    )));
                }
            }
        }
        Ok(out)
    }

    /// The constraint profile a score compiled with this mapping is
    /// meant to be arranged under.
    pub fn profile(&self) -> ConstraintProfile {
        let min_segment = match self.variant {
            Variant::Transition => Some(MIN_SEGMENT_TICKS),
            _ => None,
        };
        ConstraintProfile::new(
            self.p,
            self.variant == Variant::Consonance,
            self.j,
            min_segment,
        )
        .expect("mapping profiles are valid by construction")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mapping serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn check_open_unit(p: Rational) -> Result<(), ReduceError> {
    if p <= Rational::zero() || p >= Rational::one() {
        return Err(ReduceError::POutOfRange(p));
    }
    Ok(())
}

fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b) + if a.rem_euclid(b) != 0 { 1 } else { 0 }
}

/// Minimal-total padding `(t, f)` with
/// `t/(t+f+base) < p <= (t+1)/(t+f+base)`: below the threshold with the
/// padding trues alone, at or above it once one more part joins. `base`
/// is the number of non-padding parts in the measure (3 for a clause,
/// 2 for a variable pair).
fn pad_threshold(p: Rational, base: i128) -> PaddingPlan {
    let (num, den) = (p.num() as i128, p.den() as i128);
    // smallest s = t + f admitting a valid t: num*(s+base) <= (s+1)*den
    let s = ceil_div(base * num - den, den - num).max(0);
    let x = num * (s + base);
    let t = ceil_div(x, den) - 1;
    let f = s - t;
    debug_assert!(t >= 0 && f >= 0);
    debug_assert!(t * den < x && x <= (t + 1) * den);
    PaddingPlan {
        t: u32::try_from(t).expect("padding fits in u32"),
        f: u32::try_from(f).expect("padding fits in u32"),
    }
}

/// Padding for the consonance clause gadget: the measure holds the three
/// literal parts plus `t` forced-true and `f` forced-false parts, so a
/// clause passes coverage iff at least one literal part is selected.
pub fn consonance_clause_padding(p: Rational) -> Result<PaddingPlan, ReduceError> {
    check_open_unit(p)?;
    Ok(pad_threshold(p, 3))
}

/// Padding for the consonance variable gadget: the measure holds the two
/// variable parts plus padding, and coverage forces at least one of the
/// pair while the half-step dissonance forbids both.
pub fn consonance_variable_padding(p: Rational) -> Result<PaddingPlan, ReduceError> {
    check_open_unit(p)?;
    Ok(pad_threshold(p, 2))
}

fn check_hard_region(j: u32, p: Rational) -> Result<(), ReduceError> {
    if j == 0 {
        return Err(ReduceError::InvalidMaxChord);
    }
    if p <= Rational::zero() || p.cmp_ratio(j as i64, j as i64 + 2).is_gt() {
        return Err(ReduceError::OutsideHardRegion { j, p });
    }
    Ok(())
}

/// Smallest `f` with `(j-1)/(j+2+f) < p <= j/(j+2+f)`: the max-chord
/// clause measure holds `j-1` trues, the three literals and `f` falses,
/// so coverage demands a literal and the chord cap admits only one.
pub fn maxchord_clause_padding(j: u32, p: Rational) -> Result<u32, ReduceError> {
    check_hard_region(j, p)?;
    let (num, den) = (p.num() as i128, p.den() as i128);
    let base = j as i128 + 2;
    let mut f = 0i128;
    loop {
        let d = base + f;
        if num * d <= j as i128 * den && (j as i128 - 1) * den < num * d {
            return Ok(u32::try_from(f).expect("padding fits in u32"));
        }
        assert!(num * d <= j as i128 * den, "no padding exists inside the hard region");
        f += 1;
    }
}

/// Smallest `f` with `(j-1)/(j+1+f) < p <= j/(j+1+f)`: the max-chord
/// variable measure holds `j-1` trues, the variable pair and `f` falses,
/// forcing exactly one of the pair.
pub fn maxchord_variable_padding(j: u32, p: Rational) -> Result<u32, ReduceError> {
    check_hard_region(j, p)?;
    let (num, den) = (p.num() as i128, p.den() as i128);
    let base = j as i128 + 1;
    let mut f = 0i128;
    loop {
        let d = base + f;
        if num * d <= j as i128 * den && (j as i128 - 1) * den < num * d {
            return Ok(u32::try_from(f).expect("padding fits in u32"));
        }
        assert!(num * d <= j as i128 * den, "no padding exists inside the hard region");
        f += 1;
    }
}

/// Transition variable-gadget padding: `extra_true` full-measure anchors
/// beyond the first and `falses` parts sounding only on the pinch beat.
///
/// With `a = 1 + extra_true` anchors the audit requires, over every
/// sub-interval of the measure: selecting exactly one variable part
/// passes coverage (`a/(a+1) >= p` on the lone-variable beats and
/// `(a+1)/(a+falses+2) >= p` on the pinch), and selecting neither fails
/// it (`a/(a+falses+2) < p`). Both-selected is always rejected by the
/// three one-beat segments the overlap creates.
pub fn transition_variable_padding(p: Rational) -> Result<(u32, u32), ReduceError> {
    check_open_unit(p)?;
    let (num, den) = (p.num() as i128, p.den() as i128);
    for s in 0i128.. {
        for k in 0..=s {
            let b = s - k;
            let a = 1 + k;
            let lone_ok = a * den >= num * (a + 1);
            let pinch_ok = num * (a + b + 2) <= (a + 1) * den;
            let neither_blocked = a * den < num * (a + b + 2);
            if lone_ok && pinch_ok && neither_blocked {
                return Ok((
                    u32::try_from(k).expect("padding fits in u32"),
                    u32::try_from(b).expect("padding fits in u32"),
                ));
            }
        }
    }
    unreachable!("a/(a+1) -> 1 guarantees a solution for every p < 1")
}

/// Incrementally assembled gadget score: a fixed pool of parts receiving
/// notes measure by measure.
struct GadgetBuilder {
    ids: Vec<String>,
    notes: Vec<Vec<Note>>,
    next_measure: u64,
}

impl GadgetBuilder {
    fn new(ids: Vec<String>) -> Self {
        let notes = vec![Vec::new(); ids.len()];
        GadgetBuilder {
            ids,
            notes,
            next_measure: 0,
        }
    }

    /// Starts a measure; returns its base tick.
    fn open_measure(&mut self) -> u64 {
        let base = self.next_measure * MEASURE_TICKS;
        self.next_measure += 1;
        base
    }

    fn add_note(&mut self, part: usize, onset: u64, duration: u64, pitch: u32) {
        let pitch = Pitch::new(pitch).expect("gadget pitches are in range");
        self.notes[part].push(Note::new(onset, duration, pitch).expect("positive duration"));
    }

    fn whole_measure(&mut self, part: usize, base: u64, pitch: u32) {
        self.add_note(part, base, MEASURE_TICKS, pitch);
    }

    fn finish(self) -> Score {
        let parts = self
            .ids
            .into_iter()
            .zip(self.notes)
            .map(|(id, notes)| Part::new(id, notes))
            .collect();
        Score::new(TICKS_PER_BEAT, parts).expect("generated part ids are unique")
    }
}

/// Generated part pools: indices of forced-true, forced-false and
/// variable parts inside the builder.
struct PartPools {
    trues: Vec<usize>,
    falses: Vec<usize>,
    var_true: Vec<usize>,
    var_false: Vec<usize>,
}

fn make_pools(
    num_true: u32,
    num_false: u32,
    num_vars: u32,
) -> (GadgetBuilder, PartPools, BTreeMap<String, Role>) {
    let mut ids = Vec::new();
    let mut roles = BTreeMap::new();
    let mut pools = PartPools {
        trues: Vec::new(),
        falses: Vec::new(),
        var_true: Vec::new(),
        var_false: Vec::new(),
    };
    for k in 1..=num_true {
        let id = format!("true{k}");
        roles.insert(id.clone(), Role::ForcedTrue(k));
        pools.trues.push(ids.len());
        ids.push(id);
    }
    for k in 1..=num_false {
        let id = format!("false{k}");
        roles.insert(id.clone(), Role::ForcedFalse(k));
        pools.falses.push(ids.len());
        ids.push(id);
    }
    for i in 1..=num_vars {
        let t = format!("x{i}_true");
        let f = format!("x{i}_false");
        roles.insert(t.clone(), Role::VarTrue(i));
        roles.insert(f.clone(), Role::VarFalse(i));
        pools.var_true.push(ids.len());
        ids.push(t);
        pools.var_false.push(ids.len());
        ids.push(f);
    }
    (GadgetBuilder::new(ids), pools, roles)
}

/// Builder part index of the part a literal selects when true.
fn literal_part(pools: &PartPools, lit: &crate::cnf::Literal) -> usize {
    let i = (lit.var() - 1) as usize;
    if lit.negated() {
        pools.var_false[i]
    } else {
        pools.var_true[i]
    }
}

fn formula_digest(f: &CnfFormula) -> String {
    let mut hasher = Sha256::new();
    hasher.update(f.to_dimacs().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Compiles a 3SAT formula into a score whose arrangements under
/// `(coverage p, consonance)` correspond to satisfying assignments.
///
/// Measures in order: one solo measure per forced-true part, one
/// half-step gadget per forced-false part, one variable measure per
/// variable, one clause measure per clause. All notes span their whole
/// measure.
pub fn reduce_consonance(
    f: &CnfFormula,
    p: Rational,
) -> Result<(Score, ReductionMapping), ReduceError> {
    if f.semantics() != Semantics::ThreeSat {
        return Err(ReduceError::WrongSemantics(Semantics::ThreeSat));
    }
    let clause_pad = consonance_clause_padding(p)?;
    let var_pad = consonance_variable_padding(p)?;

    // A false-literal measure mirrors the variable gadget, so it needs
    // var_pad.t padding trues on top of its pair-true, and its padding
    // falses must be parts other than the candidate itself.
    let demand_false = clause_pad.f.max(var_pad.f);
    let num_false = if demand_false > 0 && var_pad.f > 0 {
        demand_false.max(var_pad.f + 1)
    } else {
        demand_false
    };
    let mut num_true = clause_pad.t.max(var_pad.t);
    if num_false > 0 {
        num_true = num_true.max(var_pad.t + 1);
    }

    let (mut b, pools, roles) = make_pools(num_true, num_false, f.num_vars());

    for &part in &pools.trues {
        let base = b.open_measure();
        b.whole_measure(part, base, PITCH_PAD);
    }
    for (fi, &candidate) in pools.falses.iter().enumerate() {
        let base = b.open_measure();
        // pair-true plus var_pad.t padding trues
        for &part in &pools.trues[..(var_pad.t as usize + 1)] {
            b.whole_measure(part, base, PITCH_PAD);
        }
        b.whole_measure(candidate, base, PITCH_FALSE_CANDIDATE);
        let mut taken = 0;
        for (oi, &other) in pools.falses.iter().enumerate() {
            if oi == fi || taken == var_pad.f {
                continue;
            }
            b.whole_measure(other, base, PITCH_PAD);
            taken += 1;
        }
        debug_assert_eq!(taken, var_pad.f);
    }
    for i in 0..f.num_vars() as usize {
        let base = b.open_measure();
        b.whole_measure(pools.var_true[i], base, PITCH_VAR_TRUE);
        b.whole_measure(pools.var_false[i], base, PITCH_VAR_FALSE);
        for &part in &pools.trues[..var_pad.t as usize] {
            b.whole_measure(part, base, PITCH_PAD);
        }
        for &part in &pools.falses[..var_pad.f as usize] {
            b.whole_measure(part, base, PITCH_PAD);
        }
    }
    for clause in f.clauses() {
        let base = b.open_measure();
        for lit in clause {
            b.whole_measure(literal_part(&pools, lit), base, PITCH_CLAUSE);
        }
        for &part in &pools.trues[..clause_pad.t as usize] {
            b.whole_measure(part, base, PITCH_CLAUSE);
        }
        for &part in &pools.falses[..clause_pad.f as usize] {
            b.whole_measure(part, base, PITCH_CLAUSE);
        }
    }

    let mapping = ReductionMapping {
        variant: Variant::Consonance,
        p,
        j: None,
        roles,
        formula_digest: formula_digest(f),
    };
    Ok((b.finish(), mapping))
}

/// Compiles an X3SAT formula into a score whose arrangements under
/// `(coverage p, max chord j)` correspond to exactly-one satisfying
/// assignments. Defined on the hard region `0 < p <= j/(j+2)`.
///
/// Pitches within a measure run chromatically from 60; with consonance
/// inactive only instance counts matter.
pub fn reduce_maxchord(
    f: &CnfFormula,
    j: u32,
    p: Rational,
) -> Result<(Score, ReductionMapping), ReduceError> {
    if f.semantics() != Semantics::X3Sat {
        return Err(ReduceError::WrongSemantics(Semantics::X3Sat));
    }
    let clause_falses = maxchord_clause_padding(j, p)?;
    let var_falses = maxchord_variable_padding(j, p)?;

    let num_false = clause_falses.max(var_falses);
    // The false gadget caps j trues plus the candidate; without falses
    // only the j-1 trues of the variable and clause measures are needed.
    let num_true = if num_false > 0 { j } else { j - 1 };

    let (mut b, pools, roles) = make_pools(num_true, num_false, f.num_vars());

    for &part in &pools.trues {
        let base = b.open_measure();
        b.whole_measure(part, base, PITCH_VAR_TRUE);
    }
    for &candidate in &pools.falses {
        let base = b.open_measure();
        let mut chroma = PITCH_VAR_TRUE;
        for &part in &pools.trues[..j as usize] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
        b.whole_measure(candidate, base, chroma);
    }
    for i in 0..f.num_vars() as usize {
        let base = b.open_measure();
        let mut chroma = PITCH_VAR_TRUE;
        for &part in &pools.trues[..(j - 1) as usize] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
        b.whole_measure(pools.var_true[i], base, chroma);
        b.whole_measure(pools.var_false[i], base, chroma + 1);
        chroma += 2;
        for &part in &pools.falses[..var_falses as usize] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
    }
    for clause in f.clauses() {
        let base = b.open_measure();
        let mut chroma = PITCH_VAR_TRUE;
        for &part in &pools.trues[..(j - 1) as usize] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
        for lit in clause {
            b.whole_measure(literal_part(&pools, lit), base, chroma);
            chroma += 1;
        }
        for &part in &pools.falses[..clause_falses as usize] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
    }

    let mapping = ReductionMapping {
        variant: Variant::MaxChord,
        p,
        j: Some(j),
        roles,
        formula_digest: formula_digest(f),
    };
    Ok((b.finish(), mapping))
}

/// Compiles a 3SAT formula into a score whose arrangements under
/// `(coverage p, minimum segment of 2 beats)` correspond to satisfying
/// assignments. Measures are 8 beats; in a variable measure the anchors
/// hold the whole measure, `var_true` sounds beats 3-4 and `var_false`
/// beats 4-5, so selecting both leaves three one-beat segments.
pub fn reduce_transition(
    f: &CnfFormula,
    p: Rational,
) -> Result<(Score, ReductionMapping), ReduceError> {
    if f.semantics() != Semantics::ThreeSat {
        return Err(ReduceError::WrongSemantics(Semantics::ThreeSat));
    }
    let clause_pad = consonance_clause_padding(p)?;
    let (extra_true, var_falses) = transition_variable_padding(p)?;
    let anchors = (1 + extra_true) as usize;

    let num_false = clause_pad.f.max(var_falses);
    // The false gadget replaces var_true with one more forced-true part.
    let num_true = clause_pad
        .t
        .max(anchors as u32 + if num_false > 0 { 1 } else { 0 });

    let (mut b, pools, roles) = make_pools(num_true, num_false, f.num_vars());

    let beat = TICKS_PER_BEAT as u64;
    // beats 3-4 and 4-5 of a measure, zero-based ticks
    let true_onset = 2 * beat;
    let false_onset = 3 * beat;
    let note_len = 2 * beat;

    for &part in &pools.trues {
        let base = b.open_measure();
        b.whole_measure(part, base, PITCH_VAR_TRUE);
    }
    for &candidate in &pools.falses {
        let base = b.open_measure();
        let mut chroma = PITCH_VAR_TRUE;
        for &part in &pools.trues[..anchors] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
        b.add_note(pools.trues[anchors], base + true_onset, note_len, chroma);
        b.add_note(candidate, base + false_onset, note_len, chroma + 1);
    }
    for i in 0..f.num_vars() as usize {
        let base = b.open_measure();
        let mut chroma = PITCH_VAR_TRUE;
        for &part in &pools.trues[..anchors] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
        b.add_note(pools.var_true[i], base + true_onset, note_len, chroma);
        b.add_note(pools.var_false[i], base + false_onset, note_len, chroma + 1);
        chroma += 2;
        // padding falses sound only on the pinch beat where both
        // variable parts overlap
        for &part in &pools.falses[..var_falses as usize] {
            b.add_note(part, base + false_onset, beat, chroma);
            chroma += 1;
        }
    }
    for clause in f.clauses() {
        let base = b.open_measure();
        let mut chroma = PITCH_VAR_TRUE;
        for &part in &pools.trues[..clause_pad.t as usize] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
        for lit in clause {
            b.whole_measure(literal_part(&pools, lit), base, chroma);
            chroma += 1;
        }
        for &part in &pools.falses[..clause_pad.f as usize] {
            b.whole_measure(part, base, chroma);
            chroma += 1;
        }
    }

    let mapping = ReductionMapping {
        variant: Variant::Transition,
        p,
        j: None,
        roles,
        formula_digest: formula_digest(f),
    };
    Ok((b.finish(), mapping))
}

/// Compiles under the named variant; `j` is required for `MaxChord` and
/// ignored otherwise.
pub fn reduce(
    f: &CnfFormula,
    variant: Variant,
    p: Rational,
    j: Option<u32>,
) -> Result<(Score, ReductionMapping), ReduceError> {
    match variant {
        Variant::Consonance => reduce_consonance(f, p),
        Variant::MaxChord => reduce_maxchord(f, j.ok_or(ReduceError::InvalidMaxChord)?, p),
        Variant::Transition => reduce_transition(f, p),
    }
}

/// Turns a total assignment into the corresponding arrangement: all
/// forced-true parts, no forced-false parts, and per variable the part
/// matching its truth value.
pub fn encode_assignment(
    mapping: &ReductionMapping,
    a: &Assignment,
) -> Result<Selection, ReduceError> {
    let num_vars = mapping.num_vars();
    if a.len() != num_vars as usize {
        return Err(ReduceError::VariableMismatch(a.len(), num_vars));
    }
    let pairs = mapping.variable_parts()?;
    let mut included: Vec<String> = mapping
        .roles
        .iter()
        .filter(|(_, role)| matches!(role, Role::ForcedTrue(_)))
        .map(|(id, _)| id.clone())
        .collect();
    for (i, (true_id, false_id)) in pairs {
        if a.get(i) {
            included.push(true_id);
        } else {
            included.push(false_id);
        }
    }
    Ok(Selection::from_ids(included))
}

/// Reads a variable assignment back off an arrangement of the compiled
/// score. A valid arrangement selects exactly one part per variable;
/// anything else is a malformed witness.
pub fn decode_selection(
    mapping: &ReductionMapping,
    sel: &Selection,
) -> Result<Assignment, ReduceError> {
    let pairs = mapping.variable_parts()?;
    let mut a = Assignment::all_false(mapping.num_vars());
    for (i, (true_id, false_id)) in pairs {
        let t = sel.contains(&true_id);
        let f = sel.contains(&false_id);
        match (t, f) {
            (true, false) => a.set(i, true),
            (false, true) => a.set(i, false),
            (true, true) => return Err(ReduceError::MalformedWitness(i, 2)),
            (false, false) => return Err(ReduceError::MalformedWitness(i, 0)),
        }
    }
    Ok(a)
}
