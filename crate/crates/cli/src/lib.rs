//! Command-line front end: argument handling, file IO and exit codes.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use structlint::catalog::{assemble, builtin_rules, Assembled, CatalogError};
use structlint::cpp::extract_project;
use structlint::datalog::{evaluate, Database};
use structlint::diag::Diagnostic;
use structlint::dsl::{parse_ruleset, Ruleset};
use structlint::facts::{format_fact, read_fact_file, write_fact_file, EntityId, FactBase};
use structlint::report::{check, render_json, render_text};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "structlint", version, about = "Check structural C++ coding rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, clap::Args)]
struct Input {
    /// C++ source files
    files: Vec<PathBuf>,
    /// Read facts from a fact file instead of sources
    #[arg(long, conflicts_with = "files")]
    facts: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract facts from sources into a fact file
    Extract {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output file (standard output by default)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check sources or a fact file against the enabled rules
    Check {
        #[command(flatten)]
        input: Input,
        /// Additional rule files
        #[arg(long = "rules")]
        rules: Vec<PathBuf>,
        /// Check only these rule ids
        #[arg(long)]
        enable: Vec<String>,
        /// Skip these rule ids
        #[arg(long)]
        disable: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Report only one of each pair of symmetric witnesses
        #[arg(long)]
        dedup_symmetric: bool,
    },
    /// Print the assembled clause program, grouped by stratum
    CompileRules {
        #[arg(long = "rules")]
        rules: Vec<PathBuf>,
        #[arg(long)]
        enable: Vec<String>,
        #[arg(long)]
        disable: Vec<String>,
    },
    /// Print the extension of one predicate
    Facts {
        #[arg(long)]
        query: String,
        #[command(flatten)]
        input: Input,
    },
}

/// A failure already rendered as diagnostics.
struct Failed(Vec<Diagnostic>);

impl From<Diagnostic> for Failed {
    fn from(d: Diagnostic) -> Self {
        Failed(vec![d])
    }
}

fn read(path: &PathBuf) -> Result<String, Failed> {
    fs::read_to_string(path).map_err(|e| {
        Diagnostic::error(path.display().to_string(), 0, 0, format!("cannot read file: {e}")).into()
    })
}

struct Session<'a> {
    err: &'a mut dyn Write,
}

impl Session<'_> {
    fn warn(&mut self, ds: &[Diagnostic]) {
        for d in ds {
            let _ = writeln!(self.err, "{d}");
        }
    }

    fn load_sources(&mut self, files: &[PathBuf]) -> Result<Arc<FactBase>, Failed> {
        let mut sources = Vec::with_capacity(files.len());
        for f in files {
            sources.push((f.display().to_string(), read(f)?));
        }
        let project = extract_project(&sources).map_err(|e| Failed::from(e.to_diagnostic()))?;
        self.warn(&project.warnings);
        Ok(project.facts)
    }

    fn load_input(&mut self, input: &Input) -> Result<Arc<FactBase>, Failed> {
        match &input.facts {
            Some(path) => {
                let text = read(path)?;
                let fb = read_fact_file(&text).map_err(|e| {
                    Failed::from(Diagnostic::error(
                        path.display().to_string(),
                        e.line as u32,
                        1,
                        e.kind.to_string(),
                    ))
                })?;
                Ok(fb.freeze())
            }
            None if input.files.is_empty() => Err(Diagnostic::error(
                "-",
                0,
                0,
                "no input: give source files or --facts",
            )
            .into()),
            None => self.load_sources(&input.files),
        }
    }
}

fn load_rules(paths: &[PathBuf]) -> Result<Vec<(String, Ruleset)>, Failed> {
    let mut out = Vec::new();
    for p in paths {
        let name = p.display().to_string();
        let rs = parse_ruleset(&read(p)?).map_err(|e| {
            let (line, col) = e.position().unwrap_or((0, 0));
            Failed::from(Diagnostic::error(name.as_str(), line, col, e.to_string_without_position()))
        })?;
        out.push((name, rs));
    }
    Ok(out)
}

trait PlainMessage {
    fn to_string_without_position(&self) -> String;
}

impl PlainMessage for structlint::dsl::DslError {
    fn to_string_without_position(&self) -> String {
        let s = self.to_string();
        match self.position() {
            Some((l, c)) => s.strip_prefix(&format!("{l}:{c}: ")).unwrap_or(&s).to_owned(),
            None => s,
        }
    }
}

fn catalog_error(e: CatalogError) -> Failed {
    match e {
        CatalogError::Rules { source_name, error } => {
            let (line, col) = error.position().unwrap_or((0, 0));
            Diagnostic::error(source_name, line, col, error.to_string_without_position()).into()
        }
        other => Diagnostic::error("-", 0, 0, other.to_string()).into(),
    }
}

/// Applies `--disable` and `--enable` to the builtin catalog and the user
/// rulesets, then assembles the result.
fn select_rules(
    mut user: Vec<(String, Ruleset)>,
    enable: &[String],
    disable: &[String],
) -> Result<Assembled, Failed> {
    let mut catalog = builtin_rules();
    let known: BTreeSet<String> = catalog
        .iter()
        .map(|e| e.id.clone())
        .chain(user.iter().flat_map(|(_, rs)| rs.rules.iter().map(|r| r.name.clone())))
        .collect();
    for id in enable.iter().chain(disable) {
        if !known.contains(id) {
            return Err(Diagnostic::error("-", 0, 0, format!("unknown rule id `{id}`")).into());
        }
    }
    for id in disable {
        if let Some(e) = catalog.iter_mut().find(|e| e.id == *id && e.enabled) {
            e.enabled = false;
        } else {
            for (_, rs) in &mut user {
                rs.rules.retain(|r| r.name != *id);
            }
        }
    }
    if !enable.is_empty() {
        for e in &mut catalog {
            e.enabled &= enable.contains(&e.id);
        }
        for (_, rs) in &mut user {
            rs.rules.retain(|r| enable.contains(&r.name));
        }
    }
    assemble(&catalog, &user).map_err(catalog_error)
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failed> {
    let mut session = Session { err };
    let io = |e: std::io::Error| Failed::from(Diagnostic::error("-", 0, 0, format!("write failed: {e}")));
    match cli.command {
        Command::Extract { files, output } => {
            let facts = session.load_sources(&files)?;
            let text = write_fact_file(&facts);
            match output {
                Some(p) => fs::write(&p, text).map_err(|e| {
                    Failed::from(Diagnostic::error(p.display().to_string(), 0, 0, format!("cannot write file: {e}")))
                })?,
                None => out.write_all(text.as_bytes()).map_err(io)?,
            }
            Ok(EXIT_CLEAN)
        }
        Command::Check {
            input,
            rules,
            enable,
            disable,
            format,
            dedup_symmetric,
        } => {
            let user = load_rules(&rules)?;
            let assembled = select_rules(user, &enable, &disable)?;
            let facts = session.load_input(&input)?;
            let violations = check(&facts, &assembled, dedup_symmetric)
                .map_err(|e| Failed::from(Diagnostic::error("-", 0, 0, e.to_string())))?;
            let text = match format {
                Format::Text => render_text(&violations),
                Format::Json => {
                    let ids: Vec<String> = assembled.rules.iter().map(|e| e.id.clone()).collect();
                    render_json(&violations, &ids)
                }
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if violations.is_empty() { EXIT_CLEAN } else { EXIT_VIOLATIONS })
        }
        Command::CompileRules { rules, enable, disable } => {
            let assembled = select_rules(load_rules(&rules)?, &enable, &disable)?;
            out.write_all(assembled.program.dump().as_bytes()).map_err(io)?;
            Ok(EXIT_CLEAN)
        }
        Command::Facts { query, input } => {
            let assembled = select_rules(Vec::new(), &[], &[])?;
            let facts = session.load_input(&input)?;
            let model = evaluate(&assembled.program, &Database::from_facts(&facts))
                .map_err(|e| Failed::from(Diagnostic::error("-", 0, 0, e.to_string())))?;
            let tuples = model
                .query(&query)
                .map_err(|e| Failed::from(Diagnostic::error("-", 0, 0, e.to_string())))?;
            let mut lines: Vec<String> = tuples
                .iter()
                .map(|t| {
                    let ids: Vec<EntityId> = t.iter().map(|&x| EntityId(x)).collect();
                    format_fact(&facts, &query, &ids)
                })
                .collect();
            lines.sort();
            for l in lines {
                writeln!(out, "{l}").map_err(io)?;
            }
            Ok(EXIT_CLEAN)
        }
    }
}

/// Runs the tool with full argument list (program name first), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_ERROR
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_CLEAN
            };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(Failed(ds)) => {
            for d in ds {
                let _ = writeln!(err, "{d}");
            }
            EXIT_ERROR
        }
    }
}
