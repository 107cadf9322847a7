//! Command-line surface for the flowsynth engine.
//!
//! Exit codes: 0 = success / solutions found, 3 = synthesis ran but found
//! nothing, 1 = domain or semantic error, 2 = I/O or parse error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flowsynth::domain::{DomainError, DomainModel, UniverseMode};
use flowsynth::ontology::{self, OntologyError};
use flowsynth::sltl::{self, Formula, SltlError};
use flowsynth::synthesis::{self, SynthesisProblem};
use flowsynth::{bundled, TypeState};

const EXIT_OK: u8 = 0;
const EXIT_DOMAIN: u8 = 1;
const EXIT_IO_PARSE: u8 = 2;
const EXIT_NO_SOLUTIONS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "flowsynth",
    about = "Constraint-guided synthesis of service workflows",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an OBO file into a rooted taxonomy JSON file.
    ConvertObo(ConvertObo),
    /// Load a domain model and print validation diagnostics.
    Validate(Validate),
    /// Enumerate constraint-satisfying workflows for a loose branch.
    Synth(Synth),
    /// Run the 32-subset constraint grid and compare with published counts.
    ReproTable2(ReproTable2),
    /// List the services of a domain model.
    ListServices(ListServices),
}

#[derive(Args)]
struct ConvertObo {
    /// OBO input file.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Term id of the subtree root to extract.
    #[arg(long)]
    root: String,
    /// Output file for the taxonomy JSON (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Validate {
    /// Domain model JSON file (defaults to $FLOWSYNTH_DOMAIN, then the
    /// bundled example domain).
    #[arg(long, value_name = "PATH")]
    domain: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Synth {
    /// Domain model JSON file (defaults to $FLOWSYNTH_DOMAIN, then the
    /// bundled example domain).
    #[arg(long, value_name = "PATH")]
    domain: Option<PathBuf>,
    /// Constraint file(s); all lines of all files are conjoined.
    #[arg(long = "constraints", value_name = "PATH")]
    constraint_files: Vec<PathBuf>,
    /// Bundled constraint names (comma-separated, e.g. `c1,c4`).
    #[arg(long, value_delimiter = ',', value_name = "NAME")]
    named: Vec<String>,
    /// Service whose outputs form the start state.
    #[arg(long, conflicts_with = "start")]
    source: Option<String>,
    /// Service whose inputs form the goal.
    #[arg(long, conflicts_with = "goal")]
    sink: Option<String>,
    /// Explicit start types (comma-separated ids or display names).
    #[arg(long, value_delimiter = ',', value_name = "TYPE")]
    start: Vec<String>,
    /// Explicit goal types (comma-separated ids or display names).
    #[arg(long, value_delimiter = ',', value_name = "TYPE")]
    goal: Vec<String>,
    /// Search depth bound.
    #[arg(long, default_value_t = 5)]
    depth: usize,
    /// Universe semantics.
    #[arg(long, value_enum, default_value = "pipelining")]
    mode: Mode,
    /// Keep only one representative per service multiset.
    #[arg(long)]
    filter_permutations: bool,
    /// Count the empty sequence as a solution when the start state already
    /// satisfies the goal.
    #[arg(long)]
    allow_empty: bool,
    /// Force sequential search for reproducible visited-node counts.
    /// (The engine is sequential; the flag is accepted for compatibility.)
    #[arg(long)]
    seq: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Output file (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Mode {
    Pipelining,
    Accumulating,
}

impl From<Mode> for UniverseMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Pipelining => UniverseMode::Pipelining,
            Mode::Accumulating => UniverseMode::Accumulating,
        }
    }
}

#[derive(Args)]
struct ReproTable2 {
    /// Output file for the comparison CSV (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ListServices {
    #[arg(long, value_name = "PATH")]
    domain: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::ConvertObo(args) => cmd_convert_obo(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::ReproTable2(args) => cmd_repro_table2(&args),
        Command::ListServices(args) => cmd_list_services(&args),
    };
    ExitCode::from(code)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn domain_error_code(e: &DomainError) -> u8 {
    match e {
        DomainError::Io { .. } | DomainError::Schema(_) | DomainError::Json(_) => EXIT_IO_PARSE,
        DomainError::Ontology(oe) => ontology_error_code(oe),
        _ => EXIT_DOMAIN,
    }
}

fn ontology_error_code(e: &OntologyError) -> u8 {
    match e {
        OntologyError::Parse { .. } | OntologyError::Json(_) => EXIT_IO_PARSE,
        _ => EXIT_DOMAIN,
    }
}

fn sltl_error_code(e: &SltlError) -> u8 {
    match e {
        SltlError::Syntax { .. } => EXIT_IO_PARSE,
        _ => EXIT_DOMAIN,
    }
}

fn read_to_string(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO_PARSE, format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), u8> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| fail(EXIT_IO_PARSE, format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// `--domain` flag, then $FLOWSYNTH_DOMAIN, then the bundled domain.
fn load_domain(flag: Option<&Path>) -> Result<DomainModel, u8> {
    let env_path = std::env::var_os("FLOWSYNTH_DOMAIN").map(PathBuf::from);
    let path = flag.map(Path::to_path_buf).or(env_path);
    match path {
        Some(p) => DomainModel::load_file(&p).map_err(|e| fail(domain_error_code(&e), e)),
        None => Ok(bundled::domain()),
    }
}

fn cmd_convert_obo(args: &ConvertObo) -> u8 {
    let text = match read_to_string(&args.input) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let source = match ontology::parse_obo(&text) {
        Ok(s) => s,
        Err(e) => return fail(ontology_error_code(&e), e),
    };
    let taxonomy = match ontology::build_taxonomy(&source, &args.root) {
        Ok(t) => t,
        Err(e) => return fail(ontology_error_code(&e), e),
    };
    if let Err(code) = write_output(args.out.as_deref(), &taxonomy.to_json_string()) {
        return code;
    }
    eprintln!(
        "extracted {} classes, {} instances under '{}'",
        taxonomy.class_count(),
        taxonomy.instance_count(),
        args.root
    );
    EXIT_OK
}

fn cmd_validate(args: &Validate) -> u8 {
    // Per this command's contract any load failure is exit 1; the finer
    // 1-vs-2 split applies to the other commands.
    let model = match load_domain(args.domain.as_deref()) {
        Ok(m) => m,
        Err(_) => return EXIT_DOMAIN,
    };
    let diags = model.validate();
    for d in &diags {
        eprintln!("warning: {}", d.message);
    }
    eprintln!(
        "domain ok: {} services, {} warnings",
        model.services.len(),
        diags.len()
    );
    EXIT_OK
}

fn resolve_types(model: &DomainModel, names: &[String]) -> Result<TypeState, u8> {
    names
        .iter()
        .map(|n| {
            model
                .type_taxonomy
                .resolve(n)
                .map_err(|e| fail(ontology_error_code(&e), e))
        })
        .collect()
}

fn gather_constraint(model: &DomainModel, args: &Synth) -> Result<Formula, u8> {
    let mut parts = Vec::new();
    for path in &args.constraint_files {
        let text = read_to_string(path)?;
        let f = sltl::parse_constraint_file(&text, model)
            .map_err(|e| fail(sltl_error_code(&e), format!("{}: {e}", path.display())))?;
        parts.push(f);
    }
    for name in &args.named {
        let source = bundled::constraint_source(name)
            .ok_or_else(|| fail(EXIT_DOMAIN, format!("unknown bundled constraint '{name}'")))?;
        let f = sltl::parse_constraint_file(source, model)
            .map_err(|e| fail(sltl_error_code(&e), format!("constraint {name}: {e}")))?;
        parts.push(f);
    }
    Ok(sltl::conjoin(parts))
}

fn cmd_synth(args: &Synth) -> u8 {
    let model = match load_domain(args.domain.as_deref()) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let constraint = match gather_constraint(&model, args) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let mode: UniverseMode = args.mode.into();

    let mut problem: SynthesisProblem = match (&args.source, &args.sink) {
        (Some(source), Some(sink)) => {
            match synthesis::derive_problem(&model, source, sink, constraint, args.depth, mode) {
                Ok(p) => p,
                Err(e) => return fail(domain_error_code(&e), e),
            }
        }
        (None, None) => {
            if args.start.is_empty() && args.goal.is_empty() {
                return fail(
                    EXIT_DOMAIN,
                    "provide --source/--sink or --start/--goal to fix the endpoints",
                );
            }
            let start = match resolve_types(&model, &args.start) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let goal = match resolve_types(&model, &args.goal) {
                Ok(g) => g.into_iter().collect(),
                Err(code) => return code,
            };
            SynthesisProblem::new(start, goal, args.depth, mode).with_constraint(constraint)
        }
        _ => {
            return fail(
                EXIT_DOMAIN,
                "--source and --sink must be given together (or use --start/--goal)",
            )
        }
    };
    problem.filter_permutations = args.filter_permutations;
    problem.allow_empty_solution = args.allow_empty;

    let result = match synthesis::synthesize(&model, &problem) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_DOMAIN, e),
    };

    let content = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&result.to_json(&problem))
                .expect("result document serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            for solution in &result.solutions {
                s.push_str(&result.service_names(solution).join(" -> "));
                s.push('\n');
            }
            s
        }
    };
    if let Err(code) = write_output(args.out.as_deref(), &content) {
        return code;
    }
    eprintln!(
        "{} solutions ({} nodes visited, {} ms{})",
        result.solutions.len(),
        result.stats.visited_nodes,
        result.stats.wall_time.as_millis(),
        if result.truncated { ", truncated" } else { "" }
    );
    if result.solutions.is_empty() {
        EXIT_NO_SOLUTIONS
    } else {
        EXIT_OK
    }
}

fn cmd_repro_table2(args: &ReproTable2) -> u8 {
    let model = bundled::domain();
    let report = match bundled::repro_table2(&model) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_DOMAIN, e),
    };
    if let Err(code) = write_output(args.out.as_deref(), &report.csv) {
        return code;
    }
    eprintln!("{} rows", report.rows);
    for v in &report.published_violations {
        eprintln!("note: {v}");
    }
    for v in &report.our_violations {
        eprintln!("MONOTONICITY VIOLATION: {v}");
    }
    if report.our_violations.is_empty() {
        eprintln!("our results are monotone across constraint-subset inclusion");
    }
    EXIT_OK
}

fn cmd_list_services(args: &ListServices) -> u8 {
    let model = match load_domain(args.domain.as_deref()) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let mut out = String::new();
    for s in &model.services {
        let ins: Vec<&str> = s.inputs.iter().map(|t| t.id.as_str()).collect();
        let outs: Vec<&str> = s.outputs.iter().map(|t| t.id.as_str()).collect();
        out.push_str(&format!(
            "{}\t[{}] -> [{}]\n",
            s.name,
            ins.join(", "),
            outs.join(", ")
        ));
    }
    if let Err(code) = write_output(None, &out) {
        return code;
    }
    EXIT_OK
}
