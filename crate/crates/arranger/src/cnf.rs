//! CNF formulas with 3SAT/X3SAT semantics, a DIMACS parser, and a small
//! DPLL solver: the independent ground truth the reduction compilers
//! are checked against.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CnfError {
    #[error("variable index must be at least 1")]
    ZeroVariable,
    #[error("variable {0} exceeds declared count {1}")]
    VariableOutOfRange(u32, u32),
    #[error("assignment covers {0} variables but the formula has {1}")]
    PartialAssignment(usize, u32),
    #[error("random generation needs at least 3 variables, got {0}")]
    TooFewVariables(u32),
    #[error("expected {0:?} semantics")]
    WrongSemantics(Semantics),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("missing DIMACS header line \"p cnf <vars> <clauses>\"")]
    MissingHeader,
    #[error("malformed DIMACS header: {0:?}")]
    BadHeader(String),
    #[error("bad token {0:?}")]
    BadToken(String),
    #[error("clause {0} has {1} literals; exactly 3 required")]
    ClauseLength(usize, usize),
    #[error("unterminated final clause")]
    UnterminatedClause,
    #[error("header declares {0} clauses but {1} were given")]
    ClauseCountMismatch(usize, usize),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// A variable or its negation. Variables are 1-based, DIMACS style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Result<Self, CnfError> {
        if var == 0 {
            return Err(CnfError::ZeroVariable);
        }
        Ok(Literal { var, negated })
    }

    pub fn positive(var: u32) -> Self {
        Literal::new(var, false).expect("var >= 1")
    }

    pub fn negative(var: u32) -> Self {
        Literal::new(var, true).expect("var >= 1")
    }

    pub fn var(&self) -> u32 {
        self.var
    }

    pub fn negated(&self) -> bool {
        self.negated
    }

    pub fn negate(&self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Signed DIMACS code: `3` or `-3`.
    pub fn code(&self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    fn from_code(code: i64) -> Result<Self, CnfError> {
        Literal::new(code.unsigned_abs() as u32, code < 0)
    }

    pub fn holds_under(&self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Clause truth rule: at least one literal (`ThreeSat`) or exactly one
/// literal occurrence (`X3Sat`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    #[serde(rename = "threesat")]
    ThreeSat,
    #[serde(rename = "x3sat")]
    X3Sat,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Semantics::ThreeSat => write!(f, "threesat"),
            Semantics::X3Sat => write!(f, "x3sat"),
        }
    }
}

impl FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "threesat" | "3sat" => Ok(Semantics::ThreeSat),
            "x3sat" => Ok(Semantics::X3Sat),
            other => Err(format!("unknown semantics {other:?}")),
        }
    }
}

pub type Clause = [Literal; 3];

/// A conjunction of exactly-3-literal clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    semantics: Semantics,
}

impl CnfFormula {
    pub fn new(
        num_vars: u32,
        clauses: Vec<Clause>,
        semantics: Semantics,
    ) -> Result<Self, CnfError> {
        for clause in &clauses {
            for lit in clause {
                if lit.var() > num_vars {
                    return Err(CnfError::VariableOutOfRange(lit.var(), num_vars));
                }
            }
        }
        Ok(CnfFormula {
            num_vars,
            clauses,
            semantics,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn with_semantics(mut self, semantics: Semantics) -> Self {
        self.semantics = semantics;
        self
    }

    /// DIMACS text. The semantics tag rides along as a comment so the
    /// output reparses to an equal formula.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!(
            "c semantics {}\np cnf {} {}\n",
            self.semantics,
            self.num_vars,
            self.clauses.len()
        );
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.code().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Parses DIMACS CNF text. Clauses must have exactly 3 literals (repeats
/// allowed). A `c semantics x3sat` comment selects X3SAT; the default is
/// plain 3SAT.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut semantics = Semantics::ThreeSat;
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('c') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("semantics") {
                if let Some(tag) = words.next() {
                    if let Ok(s) = tag.parse() {
                        semantics = s;
                    }
                }
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::BadHeader(line.to_string()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(DimacsError::BadHeader(line.to_string()));
            }
            let vars = fields[2]
                .parse()
                .map_err(|_| DimacsError::BadHeader(line.to_string()))?;
            let count = fields[3]
                .parse()
                .map_err(|_| DimacsError::BadHeader(line.to_string()))?;
            header = Some((vars, count));
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::MissingHeader);
        }
        for token in line.split_whitespace() {
            let code: i64 = token
                .parse()
                .map_err(|_| DimacsError::BadToken(token.to_string()))?;
            if code == 0 {
                if pending.len() != 3 {
                    return Err(DimacsError::ClauseLength(clauses.len() + 1, pending.len()));
                }
                clauses.push([pending[0], pending[1], pending[2]]);
                pending.clear();
            } else {
                pending.push(Literal::from_code(code)?);
            }
        }
    }

    if !pending.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if declared != clauses.len() {
        return Err(DimacsError::ClauseCountMismatch(declared, clauses.len()));
    }
    Ok(CnfFormula::new(num_vars, clauses, semantics)?)
}

/// A total assignment over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all_false(num_vars: u32) -> Self {
        Assignment {
            values: vec![false; num_vars as usize],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: u32) -> bool {
        self.values[(var - 1) as usize]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values[(var - 1) as usize] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// SAT-solver convention witness line: `v 1 -2 3`.
    pub fn witness_line(&self) -> String {
        let mut out = String::from("v");
        for (i, &value) in self.values.iter().enumerate() {
            out.push(' ');
            if !value {
                out.push('-');
            }
            out.push_str(&(i + 1).to_string());
        }
        out
    }
}

fn clause_true_count(clause: &Clause, a: &Assignment) -> usize {
    clause
        .iter()
        .filter(|lit| lit.holds_under(a.get(lit.var())))
        .count()
}

/// Evaluates the formula under its own semantics. Repeated literals
/// count per occurrence in the X3SAT exactly-one rule.
pub fn evaluate(f: &CnfFormula, a: &Assignment) -> Result<bool, CnfError> {
    if a.len() < f.num_vars() as usize {
        return Err(CnfError::PartialAssignment(a.len(), f.num_vars()));
    }
    Ok(f.clauses().iter().all(|clause| {
        let t = clause_true_count(clause, a);
        match f.semantics() {
            Semantics::ThreeSat => t >= 1,
            Semantics::X3Sat => t == 1,
        }
    }))
}

/// Rewrites an X3SAT formula into an equisatisfiable plain-3SAT formula
/// over the same variables: each clause is kept (at least one) and every
/// pair of its literal occurrences gains an at-most-one clause
/// `(-a -b -b)`, padded to width 3 by repetition.
pub fn x3sat_to_sat(f: &CnfFormula) -> Result<CnfFormula, CnfError> {
    if f.semantics() != Semantics::X3Sat {
        return Err(CnfError::WrongSemantics(Semantics::X3Sat));
    }
    let mut clauses = Vec::with_capacity(f.clauses().len() * 4);
    for clause in f.clauses() {
        clauses.push(*clause);
        for i in 0..3 {
            for jj in i + 1..3 {
                let a = clause[i].negate();
                let b = clause[jj].negate();
                clauses.push([a, b, b]);
            }
        }
    }
    CnfFormula::new(f.num_vars(), clauses, Semantics::ThreeSat)
}

/// DPLL with unit propagation. Deterministic: lowest unassigned variable
/// first, true branch first; variables left unconstrained when all
/// clauses are already satisfied default to false. X3SAT input is solved
/// through [`x3sat_to_sat`] (the witness maps back unchanged).
pub fn dpll_solve(f: &CnfFormula) -> Option<Assignment> {
    let formula;
    let f = match f.semantics() {
        Semantics::ThreeSat => f,
        Semantics::X3Sat => {
            formula = x3sat_to_sat(f).expect("semantics checked");
            &formula
        }
    };
    let mut assign: Vec<Option<bool>> = vec![None; f.num_vars() as usize];
    if dpll(f.clauses(), &mut assign) {
        Some(Assignment::new(
            assign.into_iter().map(|v| v.unwrap_or(false)).collect(),
        ))
    } else {
        None
    }
}

fn literal_state(lit: &Literal, assign: &[Option<bool>]) -> Option<bool> {
    assign[(lit.var() - 1) as usize].map(|v| lit.holds_under(v))
}

/// Unit propagation to fixpoint. Returns false on conflict; records
/// forced variables in `trail`.
fn propagate(clauses: &[Clause], assign: &mut [Option<bool>], trail: &mut Vec<u32>) -> bool {
    loop {
        let mut changed = false;
        for clause in clauses {
            let mut unassigned: Option<&Literal> = None;
            let mut unassigned_count = 0;
            let mut satisfied = false;
            for lit in clause {
                match literal_state(lit, assign) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        // repeated unassigned occurrences are one unknown
                        if unassigned != Some(lit) {
                            unassigned_count += 1;
                        }
                        unassigned = Some(lit);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match unassigned_count {
                0 => return false,
                1 => {
                    let lit = unassigned.expect("one unassigned literal");
                    assign[(lit.var() - 1) as usize] = Some(!lit.negated());
                    trail.push(lit.var());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return true;
        }
    }
}

fn all_satisfied(clauses: &[Clause], assign: &[Option<bool>]) -> bool {
    clauses
        .iter()
        .all(|clause| clause.iter().any(|lit| literal_state(lit, assign) == Some(true)))
}

fn dpll(clauses: &[Clause], assign: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    if !propagate(clauses, assign, &mut trail) {
        for var in trail {
            assign[(var - 1) as usize] = None;
        }
        return false;
    }
    if all_satisfied(clauses, assign) {
        return true;
    }
    let var = assign
        .iter()
        .position(|v| v.is_none())
        .expect("unsatisfied clause implies an unassigned variable");
    for value in [true, false] {
        assign[var] = Some(value);
        if dpll(clauses, assign) {
            return true;
        }
        assign[var] = None;
    }
    for var in trail {
        assign[(var - 1) as usize] = None;
    }
    false
}

/// Reproducible random 3-clause formula; every clause draws 3 distinct
/// variables and independent polarities from a ChaCha8 stream.
pub fn gen_random(
    num_vars: u32,
    num_clauses: usize,
    seed: u64,
    semantics: Semantics,
) -> Result<CnfFormula, CnfError> {
    if num_vars < 3 {
        return Err(CnfError::TooFewVariables(num_vars));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let mut vars: Vec<u32> = Vec::with_capacity(3);
        while vars.len() < 3 {
            let v = rng.gen_range(1..=num_vars);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let lits: Vec<Literal> = vars
            .into_iter()
            .map(|v| Literal::new(v, rng.gen_bool(0.5)).expect("var >= 1"))
            .collect();
        clauses.push([lits[0], lits[1], lits[2]]);
    }
    CnfFormula::new(num_vars, clauses, semantics)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive model search, the oracle DPLL is checked against.
    pub fn brute_force_sat(f: &CnfFormula) -> Option<Assignment> {
        let n = f.num_vars();
        assert!(n <= 20, "brute force is for small formulas");
        for bits in 0..(1u64 << n) {
            let a = Assignment::new((0..n).map(|i| bits >> i & 1 == 1).collect());
            if evaluate(f, &a).unwrap() {
                return Some(a);
            }
        }
        None
    }

    fn sample_formula() -> CnfFormula {
        parse_dimacs("p cnf 4 2\n-1 3 4 0\n2 -3 4 0\n").unwrap()
    }

    #[test]
    fn parse_preserves_clause_order_and_shape() {
        let f = sample_formula();
        assert_eq!(f.num_vars(), 4);
        assert_eq!(f.clauses().len(), 2);
        assert_eq!(f.clauses()[0][0], Literal::negative(1));
        assert_eq!(f.clauses()[1][1], Literal::negative(3));
        assert_eq!(f.semantics(), Semantics::ThreeSat);
    }

    #[test]
    fn parse_allows_repeated_literals() {
        let f = parse_dimacs("p cnf 1 1\n1 1 1 0\n").unwrap();
        assert_eq!(f.clauses()[0], [Literal::positive(1); 3]);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2 0\n"),
            Err(DimacsError::ClauseLength(1, 2))
        ));
        assert!(matches!(
            parse_dimacs("p dnf 2 1\n1 2 2 0\n"),
            Err(DimacsError::BadHeader(_))
        ));
        assert!(matches!(
            parse_dimacs("1 2 3 0\n"),
            Err(DimacsError::MissingHeader)
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 2\n1 2 3 0\n"),
            Err(DimacsError::ClauseCountMismatch(2, 1))
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 2 3\n"),
            Err(DimacsError::UnterminatedClause)
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2 3 0\n"),
            Err(DimacsError::Cnf(CnfError::VariableOutOfRange(3, 2)))
        ));
    }

    #[test]
    fn dimacs_roundtrip_keeps_semantics() {
        let f = gen_random(4, 2, 7, Semantics::X3Sat).unwrap();
        let back = parse_dimacs(&f.to_dimacs()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn evaluate_sample_assignments() {
        let f = sample_formula();
        let all_true = Assignment::new(vec![true; 4]);
        assert!(evaluate(&f, &all_true).unwrap());
        let published = Assignment::new(vec![false, true, false, true]);
        assert!(evaluate(&f, &published).unwrap());
    }

    #[test]
    fn evaluate_counts_x3sat_occurrences() {
        // clause (x x y) with x=T, y=T has two true occurrences
        let clause = [
            Literal::positive(1),
            Literal::positive(1),
            Literal::positive(2),
        ];
        let f = CnfFormula::new(2, vec![clause], Semantics::X3Sat).unwrap();
        assert!(!evaluate(&f, &Assignment::new(vec![true, true])).unwrap());
        assert!(!evaluate(&f, &Assignment::new(vec![true, false])).unwrap());
        assert!(evaluate(&f, &Assignment::new(vec![false, true])).unwrap());
    }

    #[test]
    fn evaluate_rejects_partial_assignment() {
        let f = sample_formula();
        assert_eq!(
            evaluate(&f, &Assignment::new(vec![true])),
            Err(CnfError::PartialAssignment(1, 4))
        );
    }

    #[test]
    fn dpll_solves_sample_formula() {
        let f = sample_formula();
        let a = dpll_solve(&f).expect("satisfiable");
        assert!(evaluate(&f, &a).unwrap());
    }

    #[test]
    fn dpll_reports_contradiction() {
        let f = parse_dimacs("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").unwrap();
        assert!(dpll_solve(&f).is_none());
    }

    #[test]
    fn dpll_empty_formula_defaults_false() {
        let f = CnfFormula::new(3, vec![], Semantics::ThreeSat).unwrap();
        assert_eq!(dpll_solve(&f).unwrap(), Assignment::all_false(3));
    }

    #[test]
    fn x3sat_encoding_shape() {
        let f = CnfFormula::new(
            3,
            vec![[
                Literal::positive(1),
                Literal::positive(2),
                Literal::positive(3),
            ]],
            Semantics::X3Sat,
        )
        .unwrap();
        let enc = x3sat_to_sat(&f).unwrap();
        let expect = parse_dimacs("p cnf 3 4\n1 2 3 0\n-1 -2 -2 0\n-1 -3 -3 0\n-2 -3 -3 0\n")
            .unwrap();
        assert_eq!(enc, expect);
    }

    #[test]
    fn x3sat_encoding_agrees_pointwise() {
        // brute force over all assignments of several random formulas
        for seed in 0..20 {
            let f = gen_random(4, 3, seed, Semantics::X3Sat).unwrap();
            let enc = x3sat_to_sat(&f).unwrap();
            for bits in 0..16u32 {
                let a = Assignment::new((0..4).map(|i| bits >> i & 1 == 1).collect());
                assert_eq!(evaluate(&f, &a).unwrap(), evaluate(&enc, &a).unwrap());
            }
        }
    }

    #[test]
    fn dpll_matches_brute_force() {
        for seed in 0..60u64 {
            let f = gen_random(6, 3 + (seed % 18) as usize, seed, Semantics::ThreeSat).unwrap();
            let dpll = dpll_solve(&f);
            let brute = brute_force_sat(&f);
            assert_eq!(dpll.is_some(), brute.is_some(), "seed {seed}");
            if let Some(a) = dpll {
                assert!(evaluate(&f, &a).unwrap(), "seed {seed}");
            }
        }
        // and at the top of the checkable range
        for seed in 0..6u64 {
            let f = gen_random(12, 30, seed, Semantics::ThreeSat).unwrap();
            assert_eq!(dpll_solve(&f).is_some(), brute_force_sat(&f).is_some());
        }
    }

    #[test]
    fn gen_random_is_reproducible_and_distinct() {
        let a = gen_random(4, 2, 7, Semantics::ThreeSat).unwrap();
        let b = gen_random(4, 2, 7, Semantics::ThreeSat).unwrap();
        assert_eq!(a, b);

        let f = gen_random(3, 1, 1, Semantics::ThreeSat).unwrap();
        let mut vars: Vec<u32> = f.clauses()[0].iter().map(|l| l.var()).collect();
        vars.sort_unstable();
        assert_eq!(vars, vec![1, 2, 3]);

        assert!(gen_random(2, 1, 0, Semantics::ThreeSat).is_err());
    }

    #[test]
    fn witness_line_format() {
        let a = Assignment::new(vec![false, true, false, true]);
        assert_eq!(a.witness_line(), "v -1 2 -3 4");
    }
}
