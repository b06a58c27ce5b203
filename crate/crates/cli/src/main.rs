//! Command-line front end: parameter files in, verification reports and
//! enumeration dumps out.
//!
//! Exit codes: 0 = pass/success, 1 = property violated (witness included
//! in the report), 2 = invalid input, 3 = resource limit exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mhg_core::algebra::{verify_hilbert, verify_polynomial_rank};
use mhg_core::antipodal::{antipodal_profile, verify_antipodal};
use mhg_core::enumerate::{oracle_enumerate_bounded, AgeEnumerator, Budget, EnumError};
use mhg_core::metric::MetricSpace;
use mhg_core::params::{classify_admissible, forbidden_triangles, ParameterSequence, ParamsFile};
use mhg_core::sumop::{decompose, magic_range, sum_m, verify_closure, verify_freeness};
use serde_json::json;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_PASS: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "mhg",
    about = "Ages of metrically homogeneous graphs: enumeration, disjoint sums, and orbit-algebra checks",
    version
)]
struct RunConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    /// Parameter file (JSON with fields delta, k1, k2, c0, c1, henson).
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Diameter (inline alternative to --params).
    #[arg(long)]
    delta: Option<u32>,
    /// K1 bound; "inf" allowed.
    #[arg(long)]
    k1: Option<String>,
    /// K2 bound; "inf" allowed.
    #[arg(long)]
    k2: Option<String>,
    /// Even-perimeter bound C0; "inf" allowed.
    #[arg(long)]
    c0: Option<String>,
    /// Odd-perimeter bound C1; "inf" allowed.
    #[arg(long)]
    c1: Option<String>,
    /// Henson constraint file (JSON array of space objects).
    #[arg(long)]
    henson: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Output format for tabular results.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (0 = library default).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Cap on isomorphism types per size.
    #[arg(long, default_value_t = 1_000_000)]
    budget_types: usize,
    /// Wall-clock cap in seconds.
    #[arg(long)]
    budget_seconds: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a parameter sequence against the admissibility table.
    Validate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// List the (finite) set of forbidden triangles.
    Triangles {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compute the window of magic parameters M.
    Magic {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Dump one JSON line per isomorphism type, sizes 0..=max-size.
    Enumerate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Type counts per size.
    Profile {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Counts of +_M-indecomposable types per size.
    Census {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Disjoint sum of two spaces with cross distance M.
    Sum {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: u32,
        /// Space files (JSON {"n":...,"upper":[...]}).
        a: PathBuf,
        b: PathBuf,
    },
    /// Split a space into its +_M-indecomposable factors.
    Decompose {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: u32,
        a: PathBuf,
    },
    /// Exhaustive verification of the structural properties.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// The bipartite antipodal diameter-3 class.
    Antipodal {
        #[command(subcommand)]
        what: AntipodalCommand,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Closure of the age under +_M for all pairs with |A|+|B| <= max-size.
    Closure {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 5)]
        max_size: usize,
    },
    /// Freeness: partitions, the order, and unique decomposition.
    Freeness {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Profile equals the Euler transform of the indecomposable census.
    Hilbert {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Generator monomials match types in count and rank, degree by degree.
    Polynomial {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Extension-based enumeration agrees with the naive labeled oracle.
    Oracle {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
}

#[derive(Subcommand, Debug)]
enum AntipodalCommand {
    /// Profile of the class by signature enumeration.
    Profile {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
    },
    /// Bijection with signatures plus cross-agreement of three counts.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
    },
}

/// Input-stage failures (exit 2).
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn read_params(args: &ParamArgs) -> Result<ParameterSequence, InputError> {
    if let Some(path) = &args.params {
        let text = fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| InputError(format!("invalid parameter file {}: {e}", path.display())));
    }
    let (Some(delta), Some(k1), Some(k2), Some(c0), Some(c1)) = (
        args.delta,
        args.k1.as_deref(),
        args.k2.as_deref(),
        args.c0.as_deref(),
        args.c1.as_deref(),
    ) else {
        return Err(InputError(
            "provide --params FILE or all of --delta --k1 --k2 --c0 --c1".to_string(),
        ));
    };
    let henson = match &args.henson {
        None => Vec::new(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| InputError(format!("invalid Henson file {}: {e}", path.display())))?
        }
    };
    let parse = |name: &str, s: &str| {
        s.parse()
            .map_err(|e| InputError(format!("invalid --{name}: {e}")))
    };
    let file = ParamsFile {
        delta,
        k1: parse("k1", k1)?,
        k2: parse("k2", k2)?,
        c0: parse("c0", c0)?,
        c1: parse("c1", c1)?,
        henson,
    };
    ParameterSequence::try_from(file).map_err(InputError)
}

fn read_space(path: &PathBuf) -> Result<MetricSpace, InputError> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| InputError(format!("invalid space file {}: {e}", path.display())))
}

fn budget(run: &RunArgs) -> Budget {
    Budget {
        max_types_per_size: run.budget_types,
        max_seconds: run.budget_seconds,
    }
}

fn init_workers(run: &RunArgs) {
    if run.jobs > 0 {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(run.jobs)
            .build_global();
    }
}

/// Resolves M: explicit values are accepted with a warning when they fall
/// outside the magic window (probing bad M is a supported use), otherwise
/// the default M from the window is used.
fn resolve_m(p: &ParameterSequence, m: Option<u32>) -> Result<u32, u8> {
    match m {
        Some(0) => {
            eprintln!("error: --m must be a positive distance");
            Err(EXIT_INVALID)
        }
        Some(m) => {
            match magic_range(p) {
                Ok(range) if !range.contains(m) => {
                    eprintln!(
                        "note: M = {m} is outside the magic window {:?}",
                        range.valid_set()
                    );
                }
                Err(e) => eprintln!("note: no magic window exists ({e}); using M = {m} anyway"),
                _ => {}
            }
            Ok(m)
        }
        None => match magic_range(p) {
            Ok(range) => Ok(range.default_m()),
            Err(e) => {
                println!(
                    "{}",
                    json!({"check": "magic", "status": "fail", "witness": e.to_string()})
                );
                Err(EXIT_VIOLATED)
            }
        },
    }
}

fn enum_exit(e: &EnumError) -> u8 {
    eprintln!("resource limit: {e}");
    EXIT_RESOURCE
}

fn warn_henson(p: &ParameterSequence) {
    if let Some(note) = p.henson_shape_note() {
        eprintln!("note: {note}");
    }
}

fn counts_output(kind: &str, counts: &[u64], start: usize, format: Format) {
    match format {
        Format::Json => println!("{}", json!({ kind: counts })),
        Format::Csv => {
            println!("n,count");
            for (i, c) in counts.iter().enumerate() {
                println!("{},{c}", start + i);
            }
        }
    }
}

fn run() -> u8 {
    let config = RunConfig::parse();
    match dispatch(config) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_INVALID
        }
    }
}

fn dispatch(config: RunConfig) -> Result<u8, InputError> {
    Ok(match config.command {
        Command::Validate { params, run } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let verdict = classify_admissible(&p);
            let case = verdict.case_letter().map(|c| c.to_string());
            match &verdict {
                v if v.is_admissible() => {
                    println!(
                        "{}",
                        json!({
                            "check": "admissibility",
                            "status": "pass",
                            "case": case,
                            "verdict": verdict.to_string(),
                        })
                    );
                    EXIT_PASS
                }
                mhg_core::params::AdmissibilityVerdict::Rejected(violations) => {
                    println!(
                        "{}",
                        json!({
                            "check": "admissibility",
                            "status": "fail",
                            "witness": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                        })
                    );
                    EXIT_VIOLATED
                }
                _ => unreachable!(),
            }
        }
        Command::Triangles { params, run } => {
            let p = read_params(&params)?;
            let forbidden = forbidden_triangles(&p);
            match run.format {
                Format::Json => {
                    let list: Vec<_> = forbidden
                        .iter()
                        .map(|t| {
                            let (i, j, k) = t.sides();
                            json!({"sides": [i, j, k], "perimeter": t.perimeter()})
                        })
                        .collect();
                    println!("{}", json!({"forbidden": list}));
                }
                Format::Csv => {
                    println!("i,j,k,perimeter");
                    for t in &forbidden {
                        let (i, j, k) = t.sides();
                        println!("{i},{j},{k},{}", t.perimeter());
                    }
                }
            }
            EXIT_PASS
        }
        Command::Magic { params, .. } => {
            let p = read_params(&params)?;
            warn_henson(&p);
            match magic_range(&p) {
                Ok(range) => {
                    let mut out = range.to_json();
                    out["check"] = json!("magic");
                    out["status"] = json!("pass");
                    println!("{out}");
                    EXIT_PASS
                }
                Err(e) => {
                    println!(
                        "{}",
                        json!({"check": "magic", "status": "fail", "witness": e.to_string()})
                    );
                    EXIT_VIOLATED
                }
            }
        }
        Command::Enumerate {
            params,
            run,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let mut age = AgeEnumerator::new(p, budget(&run));
            if let Err(e) = age.ensure(max_size) {
                return Ok(enum_exit(&e));
            }
            for n in 0..=max_size {
                let level = age.level_ref(n);
                for (code, rep) in level.codes().iter().zip(level.reps()) {
                    println!(
                        "{}",
                        json!({"code": code.to_string(), "n": n, "upper": rep.upper()})
                    );
                }
            }
            EXIT_PASS
        }
        Command::Profile {
            params,
            run,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let mut age = AgeEnumerator::new(p, budget(&run));
            match age.profile(max_size) {
                Ok(profile) => {
                    counts_output("profile", profile.counts(), 0, run.format);
                    EXIT_PASS
                }
                Err(e) => enum_exit(&e),
            }
        }
        Command::Census {
            params,
            run,
            m,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let m = match resolve_m(&p, m) {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let mut age = AgeEnumerator::new(p, budget(&run));
            match age.census(m, max_size) {
                Ok(census) => {
                    counts_output("census", census.counts(), 1, run.format);
                    EXIT_PASS
                }
                Err(e) => enum_exit(&e),
            }
        }
        Command::Sum { m, a, b, .. } => {
            if m == 0 {
                return Err(InputError("--m must be a positive distance".to_string()));
            }
            let a = read_space(&a)?;
            let b = read_space(&b)?;
            match sum_m(&a, &b, m) {
                Ok(sum) => {
                    println!(
                        "{}",
                        json!({
                            "space": serde_json::to_value(&sum).unwrap(),
                            "code": sum.canonical_code().to_string(),
                        })
                    );
                    EXIT_PASS
                }
                Err(e) => {
                    println!(
                        "{}",
                        json!({"check": "sum", "status": "fail", "witness": e.to_string()})
                    );
                    EXIT_VIOLATED
                }
            }
        }
        Command::Decompose { m, a, .. } => {
            if m == 0 {
                return Err(InputError("--m must be a positive distance".to_string()));
            }
            let a = read_space(&a)?;
            let d = decompose(&a, m);
            println!(
                "{}",
                json!({
                    "m": m,
                    "factors": d.factors().iter().map(|f| serde_json::to_value(f).unwrap()).collect::<Vec<_>>(),
                    "codes": d.factor_codes().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                })
            );
            EXIT_PASS
        }
        Command::Verify { what } => dispatch_verify(what)?,
        Command::Antipodal { what } => match what {
            AntipodalCommand::Profile { run, max_size } => {
                let profile = antipodal_profile(max_size);
                counts_output("profile", profile.counts(), 0, run.format);
                EXIT_PASS
            }
            AntipodalCommand::Verify { run, max_size } => {
                init_workers(&run);
                match verify_antipodal(max_size, budget(&run)) {
                    Ok(report) => {
                        println!("{}", report.to_json());
                        if report.passed() {
                            EXIT_PASS
                        } else {
                            EXIT_VIOLATED
                        }
                    }
                    Err(e) => enum_exit(&e),
                }
            }
        },
    })
}

fn dispatch_verify(what: VerifyCommand) -> Result<u8, InputError> {
    Ok(match what {
        VerifyCommand::Closure {
            params,
            run,
            m,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let m = match resolve_m(&p, m) {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let mut age = AgeEnumerator::new(p, budget(&run));
            match verify_closure(&mut age, m, max_size) {
                Ok(report) => {
                    println!("{}", report.to_json());
                    if report.passed() {
                        EXIT_PASS
                    } else {
                        EXIT_VIOLATED
                    }
                }
                Err(e) => enum_exit(&e),
            }
        }
        VerifyCommand::Freeness {
            params,
            run,
            m,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let m = match resolve_m(&p, m) {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let mut age = AgeEnumerator::new(p, budget(&run));
            match verify_freeness(&mut age, m, max_size) {
                Ok(report) => {
                    println!("{}", report.to_json());
                    if report.passed() {
                        EXIT_PASS
                    } else {
                        EXIT_VIOLATED
                    }
                }
                Err(e) => enum_exit(&e),
            }
        }
        VerifyCommand::Hilbert {
            params,
            run,
            m,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let m = match resolve_m(&p, m) {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let mut age = AgeEnumerator::new(p, budget(&run));
            match verify_hilbert(&mut age, m, max_size) {
                Ok(report) => {
                    println!("{}", report.to_json());
                    if report.passed() {
                        EXIT_PASS
                    } else {
                        EXIT_VIOLATED
                    }
                }
                Err(e) => enum_exit(&e),
            }
        }
        VerifyCommand::Polynomial {
            params,
            run,
            m,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let m = match resolve_m(&p, m) {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let mut age = AgeEnumerator::new(p, budget(&run));
            let mut reports = Vec::new();
            let mut all_pass = true;
            for degree in 1..=max_size {
                match verify_polynomial_rank(&mut age, m, degree) {
                    Ok(report) => {
                        all_pass &= report.passed();
                        reports.push(report.to_json());
                    }
                    Err(e) => return Ok(enum_exit(&e)),
                }
            }
            println!(
                "{}",
                json!({
                    "check": "polynomial",
                    "status": if all_pass { "pass" } else { "fail" },
                    "degrees": reports,
                })
            );
            if all_pass {
                EXIT_PASS
            } else {
                EXIT_VIOLATED
            }
        }
        VerifyCommand::Oracle {
            params,
            run,
            max_size,
        } => {
            init_workers(&run);
            let p = read_params(&params)?;
            warn_henson(&p);
            let mut age = AgeEnumerator::new(p.clone(), budget(&run));
            let mut rows = Vec::new();
            let mut all_match = true;
            for n in 0..=max_size {
                let enumerated = match age.level(n) {
                    Ok(level) => level.len() as u64,
                    Err(e) => return Ok(enum_exit(&e)),
                };
                let oracle = match oracle_enumerate_bounded(&p, n, max_size) {
                    Ok(count) => count,
                    Err(e) => return Ok(enum_exit(&e)),
                };
                all_match &= enumerated == oracle;
                rows.push(json!({"n": n, "enumerate": enumerated, "oracle": oracle}));
            }
            println!(
                "{}",
                json!({
                    "check": "oracle",
                    "status": if all_match { "pass" } else { "fail" },
                    "counts": rows,
                })
            );
            if all_match {
                EXIT_PASS
            } else {
                EXIT_VIOLATED
            }
        }
    })
}

fn main() -> ExitCode {
    ExitCode::from(run())
}
