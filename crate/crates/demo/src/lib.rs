//! Browser bindings for the arranger: compile a formula to a score,
//! check a part selection, and solve for an arrangement, all as
//! JSON-string calls so the page needs no framework.
//!
//! Build with `wasm-pack build --target web` (or cargo +
//! `wasm-bindgen-cli`); `web/index.html` loads the generated module.

use std::str::FromStr;
use std::time::Duration;

use serde_json::json;
use wasm_bindgen::prelude::*;

use arranger::cnf::{parse_dimacs, Semantics};
use arranger::rational::Rational;
use arranger::reduce::{reduce, Variant, MIN_SEGMENT_TICKS};
use arranger::score::{ConstraintProfile, Score, Selection};
use arranger::solve::{dispatch, solve, SolveLimits};
use arranger::verify;

fn err(message: impl std::fmt::Display) -> String {
    json!({"ok": false, "error": message.to_string()}).to_string()
}

fn parse_profile(
    p: &str,
    consonance: bool,
    max_chord: u32,
    min_segment: u32,
) -> Result<ConstraintProfile, String> {
    let p = Rational::from_str(p).map_err(|e| e.to_string())?;
    let j = (max_chord > 0).then_some(max_chord);
    let seg = (min_segment > 0).then_some(min_segment as u64);
    ConstraintProfile::new(p, consonance, j, seg).map_err(|e| e.to_string())
}

/// Compiles DIMACS text under the given variant ("consonance",
/// "maxchord" with j > 0, or "transition") and coverage fraction.
/// Returns `{ok, score, mapping, profile}` as a JSON string; the profile
/// echoes the constraints the compiled score should be arranged under.
#[wasm_bindgen]
pub fn compile_formula(dimacs: &str, variant: &str, p: &str, j: u32) -> String {
    let inner = || -> Result<String, String> {
        let formula = parse_dimacs(dimacs).map_err(|e| e.to_string())?;
        let (variant, formula, j) = match variant {
            "consonance" => (
                Variant::Consonance,
                formula.with_semantics(Semantics::ThreeSat),
                None,
            ),
            "transition" => (
                Variant::Transition,
                formula.with_semantics(Semantics::ThreeSat),
                None,
            ),
            "maxchord" => {
                if j == 0 {
                    return Err("maxchord needs j >= 1".into());
                }
                (
                    Variant::MaxChord,
                    formula.with_semantics(Semantics::X3Sat),
                    Some(j),
                )
            }
            other => return Err(format!("unknown variant {other:?}")),
        };
        let p = Rational::from_str(p).map_err(|e| e.to_string())?;
        let (score, mapping) = reduce(&formula, variant, p, j).map_err(|e| e.to_string())?;
        let profile = mapping.profile();
        Ok(json!({
            "ok": true,
            "score": serde_json::from_str::<serde_json::Value>(&score.to_json()).unwrap(),
            "mapping": serde_json::from_str::<serde_json::Value>(&mapping.to_json()).unwrap(),
            "profile": {
                "p": profile.p.to_string(),
                "consonance": profile.consonance,
                "max_chord": profile.max_chord,
                "min_segment": profile.min_segment_ticks,
            },
        })
        .to_string())
    };
    inner().unwrap_or_else(err)
}

/// Checks a selection of part ids against a score and profile. Returns
/// `{ok, valid, violations: [{kind, start, end, details}]}`.
/// `max_chord`/`min_segment` of 0 mean "not constrained".
#[wasm_bindgen]
pub fn check_arrangement(
    score_json: &str,
    selection_json: &str,
    p: &str,
    consonance: bool,
    max_chord: u32,
    min_segment: u32,
) -> String {
    let inner = || -> Result<String, String> {
        let score = Score::from_json(score_json).map_err(|e| e.to_string())?;
        let selection = Selection::from_json(selection_json).map_err(|e| e.to_string())?;
        let profile = parse_profile(p, consonance, max_chord, min_segment)?;
        let (valid, violations) =
            verify(&score, &selection, &profile).map_err(|e| e.to_string())?;
        Ok(json!({
            "ok": true,
            "valid": valid,
            "violations": serde_json::to_value(&violations).unwrap(),
        })
        .to_string())
    };
    inner().unwrap_or_else(err)
}

/// Solves for an arrangement. Returns `{ok, report, route}` where the
/// report is the solver's `{status, selection, nodes_explored, route}`.
#[wasm_bindgen]
pub fn solve_arrangement(
    score_json: &str,
    p: &str,
    consonance: bool,
    max_chord: u32,
    min_segment: u32,
    timeout_ms: u32,
) -> String {
    let inner = || -> Result<String, String> {
        let score = Score::from_json(score_json).map_err(|e| e.to_string())?;
        let profile = parse_profile(p, consonance, max_chord, min_segment)?;
        let limits = SolveLimits {
            max_parts: 24,
            time_budget: (timeout_ms > 0).then(|| Duration::from_millis(timeout_ms as u64)),
        };
        let route = dispatch(&score, &profile);
        let report = solve(&score, &profile, &limits).map_err(|e| e.to_string())?;
        Ok(json!({
            "ok": true,
            "route": route.to_string(),
            "report": serde_json::from_str::<serde_json::Value>(&report.to_json()).unwrap(),
        })
        .to_string())
    };
    inner().unwrap_or_else(err)
}

/// Suggested default minimum-segment ticks for the transition variant.
#[wasm_bindgen]
pub fn default_min_segment() -> u32 {
    MIN_SEGMENT_TICKS as u32
}
