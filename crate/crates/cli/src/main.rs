//! Command-line front end: check arrangements, solve for one, compile
//! CNF formulas into scores, decode witnesses, export MusicXML, and
//! generate random instances.
//!
//! Exit codes are part of the contract so scripts can assert verdicts:
//! 0 valid/sat, 1 invalid/unsat, 2 usage or parse error, 3 timeout,
//! 4 parameters outside the hard region, 5 malformed witness.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arranger::cnf::{gen_random, parse_dimacs, Semantics};
use arranger::musicxml::export_musicxml;
use arranger::rational::Rational;
use arranger::reduce::{decode_selection, reduce, ReduceError, ReductionMapping, Variant};
use arranger::score::{ConstraintProfile, Score, Selection};
use arranger::solve::{dispatch, solve, SolveError, SolveLimits, SolveStatus};
use arranger::verify;

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_OUTSIDE_HARD_REGION: u8 = 4;
const EXIT_MALFORMED_WITNESS: u8 = 5;

#[derive(Parser)]
#[command(
    name = "arranger",
    version,
    about = "Feasibility checks, solvers and SAT reductions for single-instrument arrangements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProfileArgs {
    /// Coverage fraction as an exact rational, e.g. 1/2 or 3/5
    #[arg(long)]
    p: String,
    /// Require all simultaneous notes to be pairwise consonant
    #[arg(long)]
    consonance: bool,
    /// Cap on simultaneous notes
    #[arg(long, value_name = "J")]
    max_chord: Option<u32>,
    /// Minimum length in ticks of any sounding segment
    #[arg(long, value_name = "TICKS")]
    min_segment: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Consonance,
    Maxchord,
    Transition,
}

#[derive(Subcommand)]
enum Command {
    /// Check an arrangement; prints violations as JSON lines when invalid
    Check {
        score: PathBuf,
        selection: PathBuf,
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Decide arrangeability and print a result report
    Solve {
        score: PathBuf,
        #[command(flatten)]
        profile: ProfileArgs,
        /// Print the dispatch decision without solving
        #[arg(long)]
        route_only: bool,
        /// Exact-search part limit
        #[arg(long, default_value_t = 24)]
        max_parts: usize,
        /// Exact-search time budget in milliseconds
        #[arg(long, value_name = "MS")]
        timeout_ms: Option<u64>,
    },
    /// Compile a DIMACS CNF formula into a score and decode mapping
    Reduce {
        cnf: PathBuf,
        #[arg(long)]
        variant: VariantArg,
        /// Coverage fraction as an exact rational
        #[arg(long)]
        p: String,
        /// Chord cap, required for the maxchord variant
        #[arg(long)]
        j: Option<u32>,
        /// Output prefix; writes <out>.score.json and <out>.map.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode an arrangement of a compiled score into an assignment
    Extract {
        score: PathBuf,
        map: PathBuf,
        selection: PathBuf,
    },
    /// Render a score as MusicXML 3.1
    ExportMusicxml { score: PathBuf, out: PathBuf },
    /// Generate a reproducible random 3-CNF instance in DIMACS
    Gen {
        #[arg(long)]
        vars: u32,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "threesat")]
        semantics: String,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_score(path: &Path) -> Result<Score, Failure> {
    Score::from_json(&read_file(path)?)
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_selection(path: &Path) -> Result<Selection, Failure> {
    Selection::from_json(&read_file(path)?)
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn parse_p(text: &str) -> Result<Rational, Failure> {
    Rational::from_str(text).map_err(|e| fail(EXIT_USAGE, e.to_string()))
}

impl ProfileArgs {
    fn build(&self) -> Result<ConstraintProfile, Failure> {
        let p = parse_p(&self.p)?;
        ConstraintProfile::new(p, self.consonance, self.max_chord, self.min_segment)
            .map_err(|e| fail(EXIT_USAGE, e.to_string()))
    }
}

fn cmd_check(score: &Path, selection: &Path, profile: &ProfileArgs) -> Result<u8, Failure> {
    let score = load_score(score)?;
    let selection = load_selection(selection)?;
    let profile = profile.build()?;
    let (ok, violations) =
        verify(&score, &selection, &profile).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    if ok {
        Ok(0)
    } else {
        for violation in &violations {
            println!("{}", violation.to_json_line());
        }
        Ok(EXIT_INVALID)
    }
}

fn cmd_solve(
    score: &Path,
    profile: &ProfileArgs,
    route_only: bool,
    max_parts: usize,
    timeout_ms: Option<u64>,
) -> Result<u8, Failure> {
    let score = load_score(score)?;
    let profile = profile.build()?;
    if route_only {
        let route = dispatch(&score, &profile);
        println!("{{\"route\":\"{route}\"}}");
        return Ok(0);
    }
    let limits = SolveLimits {
        max_parts,
        time_budget: timeout_ms.map(Duration::from_millis),
    };
    let report = solve(&score, &profile, &limits).map_err(|e| match e {
        SolveError::Capacity { .. } | SolveError::Precondition(_) | SolveError::Score(_) => {
            fail(EXIT_USAGE, e.to_string())
        }
        SolveError::Timeout => fail(EXIT_TIMEOUT, e.to_string()),
    })?;
    println!("{}", report.to_json());
    Ok(match report.status {
        SolveStatus::Sat => 0,
        SolveStatus::Unsat => EXIT_INVALID,
        SolveStatus::Timeout => EXIT_TIMEOUT,
    })
}

fn cmd_reduce(
    cnf: &Path,
    variant: VariantArg,
    p: &str,
    j: Option<u32>,
    out: &Path,
) -> Result<u8, Failure> {
    let formula = parse_dimacs(&read_file(cnf)?)
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", cnf.display())))?;
    // the variant dictates how the clause list is interpreted
    let (variant, formula) = match variant {
        VariantArg::Consonance => (
            Variant::Consonance,
            formula.with_semantics(Semantics::ThreeSat),
        ),
        VariantArg::Transition => (
            Variant::Transition,
            formula.with_semantics(Semantics::ThreeSat),
        ),
        VariantArg::Maxchord => (Variant::MaxChord, formula.with_semantics(Semantics::X3Sat)),
    };
    if matches!(variant, Variant::MaxChord) && j.is_none() {
        return Err(fail(EXIT_USAGE, "--variant maxchord requires --j"));
    }
    let p = parse_p(p)?;
    let (score, mapping) = reduce(&formula, variant, p, j).map_err(|e| match e {
        ReduceError::OutsideHardRegion { .. } => fail(EXIT_OUTSIDE_HARD_REGION, e.to_string()),
        other => fail(EXIT_USAGE, other.to_string()),
    })?;
    let score_path = PathBuf::from(format!("{}.score.json", out.display()));
    let map_path = PathBuf::from(format!("{}.map.json", out.display()));
    fs::write(&score_path, score.to_json())
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", score_path.display())))?;
    fs::write(&map_path, mapping.to_json())
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", map_path.display())))?;
    Ok(0)
}

fn cmd_extract(score: &Path, map: &Path, selection: &Path) -> Result<u8, Failure> {
    let score = load_score(score)?;
    let mapping = ReductionMapping::from_json(&read_file(map)?)
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", map.display())))?;
    let selection = load_selection(selection)?;
    selection
        .resolve(&score)
        .map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let assignment = decode_selection(&mapping, &selection).map_err(|e| match e {
        ReduceError::MalformedWitness(..) => fail(EXIT_MALFORMED_WITNESS, e.to_string()),
        other => fail(EXIT_USAGE, other.to_string()),
    })?;
    println!("{}", assignment.witness_line());
    Ok(0)
}

fn cmd_export_musicxml(score: &Path, out: &Path) -> Result<u8, Failure> {
    let score = load_score(score)?;
    fs::write(out, export_musicxml(&score))
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", out.display())))?;
    Ok(0)
}

fn cmd_gen(vars: u32, clauses: usize, seed: u64, semantics: &str) -> Result<u8, Failure> {
    let semantics = Semantics::from_str(semantics).map_err(|e| fail(EXIT_USAGE, e))?;
    let formula =
        gen_random(vars, clauses, seed, semantics).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    print!("{}", formula.to_dimacs());
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check {
            score,
            selection,
            profile,
        } => cmd_check(&score, &selection, &profile),
        Command::Solve {
            score,
            profile,
            route_only,
            max_parts,
            timeout_ms,
        } => cmd_solve(&score, &profile, route_only, max_parts, timeout_ms),
        Command::Reduce {
            cnf,
            variant,
            p,
            j,
            out,
        } => cmd_reduce(&cnf, variant, &p, j, &out),
        Command::Extract {
            score,
            map,
            selection,
        } => cmd_extract(&score, &map, &selection),
        Command::ExportMusicxml { score, out } => cmd_export_musicxml(&score, &out),
        Command::Gen {
            vars,
            clauses,
            seed,
            semantics,
        } => cmd_gen(vars, clauses, seed, &semantics),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
