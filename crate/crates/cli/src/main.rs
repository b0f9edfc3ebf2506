use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use latcoh_core::analysis::{analyze, AnalysisReport, Instance};
use latcoh_core::corpus::{full_corpus, run_suites, sample, thread_pool, Suite, DEFAULT_MAX_GENUS};
use latcoh_core::ingest::{extract_semigroup, ParamCurve};
use latcoh_core::{Error, GoodSemigroup};

#[derive(Parser)]
#[command(name = "latcoh", version, about = "Lattice cohomology of curve singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the good-semigroup axioms of a semigroup file.
    Validate {
        file: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the full pipeline and report the verdicts.
    Analyze {
        file: PathBuf,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Highest cohomological degree listed in the module summary.
        #[arg(long)]
        max_q: Option<usize>,
    },
    /// Render the graded root.
    Root {
        file: PathBuf,
        /// dot, ascii or json.
        #[arg(long, default_value = "ascii")]
        format: String,
    },
    /// Compute the value semigroup of a parametrized curve.
    Ingest {
        file: PathBuf,
        /// Write the semigroup file here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Truncation order used on every branch.
        #[arg(long)]
        truncation: Option<u32>,
    },
    /// Run property suites over the generated corpus.
    Corpus {
        /// Suite name, repeatable; `all` runs every suite.
        #[arg(long, required = true)]
        suite: Vec<String>,
        /// Seed for sampling with --count.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled instances (default: the whole corpus).
        #[arg(long)]
        count: Option<usize>,
        /// Genus bound for the numerical semigroups.
        #[arg(long, default_value_t = DEFAULT_MAX_GENUS)]
        max_genus: usize,
    },
}

/// A message with the exit code it should produce.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotGood(_) => 2,
            Error::TruncationInsufficient { .. } => 3,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Validate { file, json } => cmd_validate(&file, json),
        Command::Analyze { file, report, max_q } => cmd_analyze(&file, report.as_deref(), max_q),
        Command::Root { file, format } => cmd_root(&file, &format),
        Command::Ingest { file, out, truncation } => cmd_ingest(&file, out.as_deref(), truncation),
        Command::Corpus { suite, seed, count, max_genus } => cmd_corpus(&suite, seed, count, max_genus),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display())))
}

fn load_semigroup(path: &Path) -> Result<GoodSemigroup, Failure> {
    GoodSemigroup::from_json(&read(path)?).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

/// Loads and validates; a failed validation prints the report and exits 2.
fn load_good(path: &Path) -> Result<GoodSemigroup, Failure> {
    let s = load_semigroup(path)?;
    let report = s.validate();
    if !report.passed() {
        let labels: Vec<&str> = report.failed_axioms().iter().map(|a| a.label()).collect();
        return Err(Failure::new(2, format!("not a good semigroup: failed {}", labels.join(", "))));
    }
    Ok(s)
}

fn cmd_validate(path: &Path, json: bool) -> Outcome {
    let s = load_semigroup(path)?;
    let report = s.validate();
    if json {
        println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("serializable"));
    } else {
        let failed = report.failed_axioms();
        for axiom in latcoh_core::Axiom::ALL {
            let verdict = if failed.contains(&axiom) { "fail" } else { "pass" };
            println!("{}: {verdict}", axiom.label());
        }
        for v in &report.violations {
            let pts: Vec<String> = v.witnesses.iter().map(ToString::to_string).collect();
            let note = v.note.as_deref().map(|n| format!(": {n}")).unwrap_or_default();
            println!("  {} witness {}{note}", v.axiom.label(), pts.join(" "));
        }
        println!("verdict: {}", if report.passed() { "pass" } else { "fail" });
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn summary(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "branches: {}", r.branches);
    let _ = writeln!(s, "multiplicity: {} (vector {})", r.multiplicity, r.multiplicity_vector);
    let _ = writeln!(s, "conductor: {}", r.conductor);
    let _ = writeln!(s, "delta: {}", r.delta);
    let _ = writeln!(s, "eu: {}", r.eu);
    let _ = writeln!(s, "gorenstein: {}", r.gorenstein.gorenstein);
    let _ = writeln!(s, "M(H^0): {}", r.m_h0);
    let _ = write!(s, "MF: {} (w(m) = {}, M = {})", r.mf.verdict, r.mf.w_m, r.mf.m_h0);
    s.push('\n');
    let _ = writeln!(s, "nonpositivity: {}", r.nonpositivity.holds);
    let _ = writeln!(s, "classification: {}", serde_json::to_value(r.classification).expect("serializable").as_str().unwrap_or(""));
    let minima: Vec<String> = r.local_minima.iter().map(|m| format!("{}:{}", m.point, m.weight)).collect();
    let _ = writeln!(s, "local minima: {}", minima.join(" "));
    s
}

fn cmd_analyze(path: &Path, report_path: Option<&Path>, max_q: Option<usize>) -> Outcome {
    let s = load_good(path)?;
    let inst = Instance::new(s)?;
    let mut report = analyze(&inst)?;
    if let Some(q) = max_q {
        report.module.reduced.retain(|&k, _| k <= q);
    }
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    match report_path {
        Some(p) if p == Path::new("-") => println!("{json}"),
        Some(p) => {
            write(p, &format!("{json}\n"))?;
            print!("{}", summary(&report));
        }
        None => print!("{}", summary(&report)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_root(path: &Path, format: &str) -> Outcome {
    if !matches!(format, "dot" | "ascii" | "json") {
        return Err(Failure::new(1, format!("unknown format {format:?}; expected dot, ascii or json")));
    }
    let inst = Instance::new(load_good(path)?)?;
    let root = inst.cohomology.graded_root();
    match format {
        "dot" => print!("{}", root.to_dot()),
        "ascii" => print!("{}", root.to_ascii()),
        _ => println!("{}", serde_json::to_string_pretty(&root.to_json()).expect("serializable")),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ingest(path: &Path, out: Option<&Path>, truncation: Option<u32>) -> Outcome {
    let mut curve = ParamCurve::from_json(&read(path)?).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    if let Some(t) = truncation {
        curve = curve.with_truncation(t)?;
    }
    let e = match extract_semigroup(&curve) {
        Err(Error::TruncationInsufficient { branch, required }) => {
            return Err(Failure::new(
                3,
                format!("truncation order insufficient on branch {branch}; rerun with --truncation {required}"),
            ))
        }
        other => other?,
    };
    println!("multiplicity: {} (vector {})", e.multiplicity.total(), e.multiplicity.vector);
    println!("conductor: {}", e.semigroup.conductor());
    println!("delta: {}", e.delta);
    println!("certificate: {}", e.certificate.label());
    if let Some(p) = out {
        write(p, &format!("{}\n", e.semigroup.to_json()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus(names: &[String], seed: u64, count: Option<usize>, max_genus: usize) -> Outcome {
    let mut suites = Vec::new();
    for name in names {
        if name.eq_ignore_ascii_case("all") {
            suites.extend(Suite::ALL);
        } else {
            suites.push(name.parse::<Suite>()?);
        }
    }
    suites.sort();
    suites.dedup();
    let pool = thread_pool()?;
    let mut entries = full_corpus(max_genus)?;
    let total = entries.len();
    if let Some(k) = count {
        entries = sample(entries, seed, k);
        println!("seed: {seed}");
    }
    println!("instances: {} of {total}", entries.len());
    let outcomes = pool.install(|| run_suites(&entries, &suites));
    let mut failed = false;
    for o in &outcomes {
        println!("{}: checked {}, failures {}", o.suite, o.checked, o.failures);
        if o.suite == Suite::GoodDirection {
            println!("  points of weight >= 2: {}", o.items);
        }
        for note in &o.notes {
            println!("  {note}");
        }
        if let Some(w) = &o.first_failure {
            failed = true;
            println!("  first failure: {} ({})", w.instance, w.detail);
            println!("  witness: {}", w.semigroup);
        }
    }
    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}
