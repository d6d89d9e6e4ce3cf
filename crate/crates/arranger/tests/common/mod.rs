//! Shared test support: seeded random instances and the independent
//! brute-force oracles the solvers are measured against.

#![allow(dead_code)]

use arranger::cnf::{evaluate, Assignment, CnfFormula};
use arranger::engine::verify;
use arranger::score::{ConstraintProfile, Note, Part, Pitch, Score, Selection};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unpruned exhaustive enumeration over all part subsets; the ground
/// truth every solver verdict is compared to.
pub fn enumerate_valid(score: &Score, profile: &ConstraintProfile) -> Option<Selection> {
    let n = score.parts.len();
    assert!(n <= 16, "enumeration oracle is for small scores");
    for bits in 0u32..(1 << n) {
        let sel = Selection::from_ids(
            score
                .parts
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, p)| p.id.clone()),
        );
        if verify(score, &sel, profile).expect("ids valid").0 {
            return Some(sel);
        }
    }
    None
}

/// Exhaustive model search over all assignments; the ground truth the
/// DPLL oracle itself is compared to.
pub fn brute_force_sat(f: &CnfFormula) -> Option<Assignment> {
    let n = f.num_vars();
    assert!(n <= 20, "brute force is for small formulas");
    for bits in 0u64..(1 << n) {
        let a = Assignment::new((0..n).map(|i| bits >> i & 1 == 1).collect());
        if evaluate(f, &a).expect("total assignment") {
            return Some(a);
        }
    }
    None
}

fn note(onset: u64, duration: u64, pitch: u32) -> Note {
    Note::new(onset, duration, Pitch::new(pitch).unwrap()).unwrap()
}

/// Seeded random score, up to `max_parts` parts and 40 notes. Dense
/// scores pile notes freely; sparse ones place at most two simultaneous
/// notes, the regime the two-coloring route cares about.
pub fn random_score(seed: u64, max_parts: usize, sparse: bool) -> Score {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_parts = rng.gen_range(1..=max_parts);
    let mut notes: Vec<Vec<Note>> = vec![Vec::new(); n_parts];
    if sparse {
        for slot in 0u64..8 {
            let owners = rng.gen_range(0..=2usize.min(n_parts));
            let mut chosen: Vec<usize> = Vec::new();
            while chosen.len() < owners {
                let p = rng.gen_range(0..n_parts);
                if !chosen.contains(&p) {
                    chosen.push(p);
                }
            }
            for p in chosen {
                notes[p].push(note(slot * 4, 4, rng.gen_range(48..=84)));
            }
        }
    } else {
        let budget = 40usize;
        let mut used = 0;
        for part_notes in notes.iter_mut() {
            let count = rng.gen_range(0..=4usize).min(budget - used);
            for _ in 0..count {
                part_notes.push(note(
                    rng.gen_range(0..24),
                    rng.gen_range(1..=8),
                    rng.gen_range(48..=84),
                ));
            }
            used += count;
        }
    }
    let parts = notes
        .into_iter()
        .enumerate()
        .map(|(i, ns)| Part::new(format!("p{i}"), ns))
        .collect();
    Score::new(4, parts).unwrap()
}
