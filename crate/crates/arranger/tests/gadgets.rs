//! Measure-level gadget audits: every emitted gadget measure, checked in
//! isolation, must admit exactly the intended selections: forced trues
//! in, forced falses out, one-of-two per variable, and clause coverage
//! tracking the clause's truth rule.

mod common;

use arranger::cnf::{dpll_solve, parse_dimacs, CnfFormula, Semantics};
use arranger::engine::verify;
use arranger::rational::Rational;
use arranger::reduce::{
    decode_selection, reduce_consonance, reduce_maxchord, reduce_transition, ReductionMapping,
    Role, Variant, MEASURE_TICKS,
};
use arranger::score::{Note, Part, Score, Selection};
use arranger::solve::{solve_exact, SolveLimits};

/// The score restricted to one measure: same parts, only the notes
/// sounding inside `[m*MEASURE_TICKS, (m+1)*MEASURE_TICKS)`.
fn measure_slice(score: &Score, measure: u64) -> Score {
    let start = measure * MEASURE_TICKS;
    let end = start + MEASURE_TICKS;
    let parts = score
        .parts
        .iter()
        .map(|p| {
            let notes: Vec<Note> = p
                .notes
                .iter()
                .filter(|n| n.onset >= start && n.end() <= end)
                .copied()
                .collect();
            Part::new(p.id.clone(), notes)
        })
        .collect();
    Score::new(score.ticks_per_beat, parts).unwrap()
}

/// Part ids with notes in the slice, split by role kind.
struct MeasureParts {
    trues: Vec<String>,
    falses: Vec<String>,
    variables: Vec<String>,
}

fn classify(slice: &Score, mapping: &ReductionMapping) -> MeasureParts {
    let mut out = MeasureParts {
        trues: Vec::new(),
        falses: Vec::new(),
        variables: Vec::new(),
    };
    for part in &slice.parts {
        if part.notes.is_empty() {
            continue;
        }
        match mapping.roles[&part.id] {
            Role::ForcedTrue(_) => out.trues.push(part.id.clone()),
            Role::ForcedFalse(_) => out.falses.push(part.id.clone()),
            Role::VarTrue(_) | Role::VarFalse(_) => out.variables.push(part.id.clone()),
        }
    }
    out
}

/// Checks each subset of the measure's free parts (forced trues always
/// in, forced falses always out) against an expected-validity rule.
fn audit_measure(
    score: &Score,
    mapping: &ReductionMapping,
    measure: u64,
    free: &[String],
    expect_valid: impl Fn(&[bool]) -> bool,
) {
    let slice = measure_slice(score, measure);
    let parts = classify(&slice, mapping);
    let profile = mapping.profile();
    for bits in 0u32..(1 << free.len()) {
        let mask: Vec<bool> = (0..free.len()).map(|i| bits >> i & 1 == 1).collect();
        let mut ids = parts.trues.clone();
        ids.extend(
            free.iter()
                .zip(&mask)
                .filter(|(_, &m)| m)
                .map(|(id, _)| id.clone()),
        );
        let sel = Selection::from_ids(ids);
        let (ok, violations) = verify(&slice, &sel, &profile).unwrap();
        assert_eq!(
            ok,
            expect_valid(&mask),
            "measure {measure} of {:?} with free={free:?} mask={mask:?}: {violations:?}",
            mapping.variant,
        );
    }
}

/// Count of forced-true / forced-false parts in a mapping.
fn pool_sizes(mapping: &ReductionMapping) -> (u64, u64) {
    let trues = mapping
        .roles
        .values()
        .filter(|r| matches!(r, Role::ForcedTrue(_)))
        .count() as u64;
    let falses = mapping
        .roles
        .values()
        .filter(|r| matches!(r, Role::ForcedFalse(_)))
        .count() as u64;
    (trues, falses)
}

/// Audits every measure of a compiled score. Layout: solo measures,
/// false-literal measures, variable measures, clause measures.
fn audit_all_measures(score: &Score, mapping: &ReductionMapping, formula: &CnfFormula) {
    let (num_true, num_false) = pool_sizes(mapping);
    let num_vars = mapping.num_vars() as u64;
    let pairs = mapping.variable_parts().unwrap();

    for m in 0..num_true {
        // solo measures admit only the forced part itself
        audit_measure(score, mapping, m, &[], |_| true);
        let slice = measure_slice(score, m);
        let (ok, _) = verify(&slice, &Selection::empty(), &mapping.profile()).unwrap();
        assert!(!ok, "solo measure {m} fails to force its part");
    }
    for m in num_true..num_true + num_false {
        let slice = measure_slice(score, m);
        let parts = classify(&slice, mapping);
        assert_eq!(parts.falses.len(), 1, "one candidate per false measure");
        let candidate = parts.falses[0].clone();
        audit_measure(score, mapping, m, &[candidate], |mask| !mask[0]);
    }
    for i in 0..num_vars {
        let m = num_true + num_false + i;
        let (t, f) = pairs[&(i as u32 + 1)].clone();
        audit_measure(score, mapping, m, &[t, f], |mask| mask[0] != mask[1]);
    }
    for (c, clause) in formula.clauses().iter().enumerate() {
        let m = num_true + num_false + num_vars + c as u64;
        let free: Vec<String> = {
            // distinct literal parts, in clause order
            let mut ids = Vec::new();
            for lit in clause {
                let (t, f) = &pairs[&lit.var()];
                let id = if lit.negated() { f.clone() } else { t.clone() };
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            ids
        };
        let occurrences: Vec<usize> = free
            .iter()
            .map(|id| {
                clause
                    .iter()
                    .filter(|lit| {
                        let (t, f) = &pairs[&lit.var()];
                        let lid = if lit.negated() { f } else { t };
                        lid == id
                    })
                    .count()
            })
            .collect();
        let semantics = formula.semantics();
        audit_measure(score, mapping, m, &free, |mask| {
            let true_occurrences: usize = mask
                .iter()
                .zip(&occurrences)
                .filter(|(&m, _)| m)
                .map(|(_, &o)| o)
                .sum();
            match semantics {
                Semantics::ThreeSat => true_occurrences >= 1,
                Semantics::X3Sat => true_occurrences == 1,
            }
        });
    }
}

fn sample_formula() -> CnfFormula {
    parse_dimacs("p cnf 4 2\n-1 3 4 0\n2 -3 4 0\n").unwrap()
}

fn r(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

#[test]
fn consonance_gadgets_audit() {
    for p in [r(1, 2), r(3, 5), r(1, 5), r(2, 7), r(5, 6)] {
        let (score, mapping) = reduce_consonance(&sample_formula(), p).unwrap();
        audit_all_measures(&score, &mapping, &sample_formula());
    }
}

#[test]
fn maxchord_gadgets_audit() {
    let formula = sample_formula().with_semantics(Semantics::X3Sat);
    for (j, p) in [
        (1, r(1, 3)),
        (1, r(1, 1000)),
        (2, r(1, 2)),
        (2, r(251, 1000)),
        (2, r(1, 4)),
        (3, r(3, 5)),
        (3, r(401, 1000)),
    ] {
        let (score, mapping) = reduce_maxchord(&formula, j, p).unwrap();
        audit_all_measures(&score, &mapping, &formula);
    }
}

#[test]
fn transition_gadgets_audit() {
    for p in [r(1, 2), r(3, 5), r(1, 4), r(2, 7)] {
        let (score, mapping) = reduce_transition(&sample_formula(), p).unwrap();
        audit_all_measures(&score, &mapping, &sample_formula());
    }
}

#[test]
fn transition_variable_measure_fixed_points() {
    // single-variable gadget at p = 1/2: anchor + either variable part
    // leaves only 2-beat-or-longer segments; all parts leave three
    // one-beat segments
    let f = parse_dimacs("p cnf 1 1\n1 1 1 0\n").unwrap();
    let (score, mapping) = reduce_transition(&f, r(1, 2)).unwrap();
    let profile = mapping.profile();
    let (num_true, num_false) = pool_sizes(&mapping);
    assert_eq!((num_true, num_false), (1, 0));
    let var_measure = measure_slice(&score, 1);

    let beats = |sel: &Selection| -> Vec<u64> {
        arranger::score::segments(&var_measure, sel)
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.len() / 4)
            .collect()
    };
    assert_eq!(
        beats(&Selection::from_ids(["true1", "x1_true"])),
        vec![2, 2, 4]
    );
    assert_eq!(
        beats(&Selection::from_ids(["true1", "x1_false"])),
        vec![3, 2, 3]
    );
    let all = Selection::from_ids(["true1", "x1_true", "x1_false"]);
    assert_eq!(beats(&all), vec![2, 1, 1, 1, 3]);
    let (ok, violations) = verify(&var_measure, &all, &profile).unwrap();
    assert!(!ok);
    assert_eq!(
        violations
            .iter()
            .filter(|v| v.kind == arranger::engine::ViolationKind::SegmentTooShort)
            .count(),
        3
    );
}

#[test]
fn repeated_literals_compile_correctly() {
    // (x1 x1 x2) & (-x1 -x1 -x2): satisfiable exactly when x1 != x2
    let f = parse_dimacs("p cnf 2 2\n1 1 2 0\n-1 -1 -2 0\n").unwrap();
    for (score, mapping) in [
        reduce_consonance(&f, r(1, 2)).unwrap(),
        reduce_consonance(&f, r(3, 5)).unwrap(),
        reduce_transition(&f, r(1, 2)).unwrap(),
    ] {
        let (found, _) = solve_exact(&score, &mapping.profile(), &SolveLimits::default()).unwrap();
        let sel = found.expect("x1=T, x2=F satisfies the formula");
        let a = decode_selection(&mapping, &sel).unwrap();
        assert!(arranger::cnf::evaluate(&f, &a).unwrap());
        assert_ne!(a.get(1), a.get(2));
    }
    assert!(dpll_solve(&f).is_some());
}

#[test]
fn unsatisfiable_formula_compiles_to_unsat_score() {
    let f = parse_dimacs("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").unwrap();
    assert!(dpll_solve(&f).is_none());
    let (score, mapping) = reduce_consonance(&f, r(1, 2)).unwrap();
    let (found, _) = solve_exact(&score, &mapping.profile(), &SolveLimits::default()).unwrap();
    assert!(found.is_none());

    // under exactly-one semantics a triple occurrence can never hold
    let fx = parse_dimacs("c semantics x3sat\np cnf 1 1\n1 1 1 0\n").unwrap();
    assert!(dpll_solve(&fx).is_none());
    let (score, mapping) = reduce_maxchord(&fx, 1, r(1, 3)).unwrap();
    let (found, _) = solve_exact(&score, &mapping.profile(), &SolveLimits::default()).unwrap();
    assert!(found.is_none());
}

#[test]
fn encoded_all_true_tracks_formula_truth() {
    use arranger::cnf::{evaluate, gen_random, Assignment};
    use arranger::engine::ViolationKind;
    use arranger::reduce::encode_assignment;

    for seed in 0..30u64 {
        let f = gen_random(5, 6, seed, Semantics::ThreeSat).unwrap();
        let (score, mapping) = reduce_consonance(&f, r(1, 2)).unwrap();
        let all_true = Assignment::new(vec![true; 5]);
        let sel = encode_assignment(&mapping, &all_true).unwrap();
        let (ok, violations) = verify(&score, &sel, &mapping.profile()).unwrap();
        let satisfied = evaluate(&f, &all_true).unwrap();
        assert_eq!(ok, satisfied, "seed {seed}");
        if !satisfied {
            // the failing clause's measure is pinpointed by a coverage violation
            let (num_true, num_false) = pool_sizes(&mapping);
            let clause_base = num_true + num_false + mapping.num_vars() as u64;
            let failing: Vec<usize> = f
                .clauses()
                .iter()
                .enumerate()
                .filter(|(_, clause)| clause.iter().all(|lit| lit.negated()))
                .map(|(c, _)| c)
                .collect();
            assert!(!failing.is_empty());
            for c in failing {
                let lo = (clause_base + c as u64) * MEASURE_TICKS;
                assert!(
                    violations.iter().any(|v| v.kind == ViolationKind::Coverage
                        && v.start >= lo
                        && v.start < lo + MEASURE_TICKS),
                    "seed {seed} clause {c}: {violations:?}"
                );
            }
        }
    }
}

/// Oracle-equivalence loop usable at any (variant, p, j): the compiled
/// score is arrangeable iff DPLL satisfies the formula, and every
/// witness decodes to a model.
fn equivalence_sweep(
    variant: Variant,
    j: Option<u32>,
    p: Rational,
    semantics: Semantics,
    seeds: std::ops::Range<u64>,
) {
    for seed in seeds {
        let vars = 4 + (seed % 4) as u32;
        let clauses = 3 + (seed % 7) as usize;
        let f = arranger::cnf::gen_random(vars, clauses, seed, semantics).unwrap();
        let (score, mapping) = arranger::reduce::reduce(&f, variant, p, j).unwrap();
        let expected = dpll_solve(&f).is_some();
        let (found, _) =
            solve_exact(&score, &mapping.profile(), &SolveLimits::default()).unwrap();
        assert_eq!(found.is_some(), expected, "{variant:?} p={p} seed {seed}");
        if let Some(sel) = found {
            let a = decode_selection(&mapping, &sel).unwrap();
            assert!(arranger::cnf::evaluate(&f, &a).unwrap());
        }
    }
}

#[test]
fn equivalence_holds_at_awkward_coverage_fractions() {
    // fractions where padding counts differ from the worked examples:
    // small p needs pinch-beat falses in the transition gadget, and
    // large p stacks extra trues everywhere
    equivalence_sweep(Variant::Consonance, None, r(1, 5), Semantics::ThreeSat, 0..25);
    equivalence_sweep(Variant::Consonance, None, r(5, 6), Semantics::ThreeSat, 0..25);
    equivalence_sweep(Variant::Transition, None, r(1, 4), Semantics::ThreeSat, 0..25);
    equivalence_sweep(Variant::Transition, None, r(2, 7), Semantics::ThreeSat, 0..25);
    equivalence_sweep(Variant::MaxChord, Some(2), r(1, 3), Semantics::X3Sat, 0..25);
    equivalence_sweep(Variant::MaxChord, Some(3), r(1, 2), Semantics::X3Sat, 0..25);
}

#[test]
fn equivalence_holds_with_repeated_literals() {
    use rand::{Rng, SeedableRng};

    // gen_random keeps variables distinct; parsed formulas need not,
    // so build clauses sampling variables with replacement
    let random_with_repeats = |seed: u64, vars: u32, clauses: usize| -> CnfFormula {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(clauses);
        for _ in 0..clauses {
            let lit = |rng: &mut rand_chacha::ChaCha8Rng| {
                let var = rng.gen_range(1..=vars);
                if rng.gen_bool(0.5) {
                    arranger::cnf::Literal::negative(var)
                } else {
                    arranger::cnf::Literal::positive(var)
                }
            };
            out.push([lit(&mut rng), lit(&mut rng), lit(&mut rng)]);
        }
        CnfFormula::new(vars, out, Semantics::ThreeSat).unwrap()
    };

    for seed in 0..40u64 {
        let f = random_with_repeats(seed, 4 + (seed % 3) as u32, 4 + (seed % 6) as usize);
        let expected = dpll_solve(&f).is_some();
        for variant in [Variant::Consonance, Variant::Transition] {
            let (score, mapping) =
                arranger::reduce::reduce(&f, variant, r(1, 2), None).unwrap();
            let (found, _) =
                solve_exact(&score, &mapping.profile(), &SolveLimits::default()).unwrap();
            assert_eq!(found.is_some(), expected, "{variant:?} seed {seed}");
            if let Some(sel) = found {
                let a = decode_selection(&mapping, &sel).unwrap();
                assert!(arranger::cnf::evaluate(&f, &a).unwrap());
            }
        }
        let fx = f.with_semantics(Semantics::X3Sat);
        let expected = dpll_solve(&fx).is_some();
        let (score, mapping) = reduce_maxchord(&fx, 1, r(1, 3)).unwrap();
        let (found, _) =
            solve_exact(&score, &mapping.profile(), &SolveLimits::default()).unwrap();
        assert_eq!(found.is_some(), expected, "x3sat seed {seed}");
    }
}

#[test]
fn compiled_scores_export_to_musicxml() {
    let (score, mapping) = reduce_consonance(&sample_formula(), r(1, 2)).unwrap();
    let xml = arranger::musicxml::export_musicxml(&score);
    assert_eq!(
        xml.matches("<score-part id=").count(),
        score.parts.len(),
        "one XML part per score part"
    );
    let measures = 1 + mapping.num_vars() as usize + sample_formula().clauses().len();
    // every part carries the full measure grid
    assert_eq!(
        xml.matches("<measure number=").count(),
        measures * score.parts.len()
    );
}

#[test]
fn maxchord_variant_j_is_recorded() {
    let formula = sample_formula().with_semantics(Semantics::X3Sat);
    let (_, mapping) = reduce_maxchord(&formula, 2, r(1, 2)).unwrap();
    assert_eq!(mapping.variant, Variant::MaxChord);
    assert_eq!(mapping.j, Some(2));
    assert!(mapping.to_json().contains(r#""j":2"#));
}
