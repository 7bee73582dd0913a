//! The `ultras` command line.
//!
//! Rule files are read by extension: `.spec` (WF-GSOS), `.wgsos`,
//! `.sgsos` (translated on load) and `.pepa` (encoded on load).
//!
//! Exit codes: 0 success, 1 the property fails (not bisimilar, invalid
//! specification, oracle disagreement), 2 usage or parse error, 3
//! inconclusive because the budget cut a compared fragment short.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::{Debug, Display};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::bisim::{self, Partition, Side, BRUTE_FORCE_MAX_STATES};
use crate::monoid::{enumerate_clubs, Monoid};
use crate::pepa::{self, PepaError, PepaFile, PepaTerm};
use crate::system::{Ultras, Wlts};
use crate::translations::{self, explored_wlts, TranslateError};
use crate::weightfn::WeightFunction;
use crate::wfgsos::term::split_top_level;
use crate::wfgsos::{emit_spec, induce, parse_spec, Specification, Term, WfError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ultras", version, about = "Weight-function transition systems and WF-GSOS specifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Maximum number of explored states per derivation.
    #[arg(long, global = true, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Comma-separated root terms or process names.
    #[arg(long, global = true)]
    pub roots: Option<String>,
    /// Cross-check against a brute-force or direct reference.
    #[arg(long, global = true)]
    pub oracle: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
    Graph,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate rule files and report diagnostics.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the fragment induced from the roots.
    Derive { file: PathBuf },
    /// Decide bisimilarity of two roots (one file, or one root per file).
    Bisim {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// Print the bisimulation quotient of the fragment induced from the roots.
    Minimize { file: PathBuf },
    #[command(subcommand)]
    Pepa(PepaCommand),
    /// Compile a `.wgsos` or `.sgsos` file into a WF-GSOS specification.
    Translate { file: PathBuf },
    /// Positivity, refinement and clubs of a monoid (file or built-in name).
    Monoid { source: String },
}

#[derive(Subcommand, Debug)]
pub enum PepaCommand {
    /// Derive the CTMC of the main process.
    Derive { file: PathBuf },
    /// Strong equivalence of two processes (two names via --roots, or the
    /// main processes of two files).
    Compare {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// Emit the WF-GSOS specification encoding the file.
    EmitSpec { file: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Wf(#[from] WfError),
    #[error(transparent)]
    Pepa(#[from] PepaError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Bisim(#[from] bisim::BisimError),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Wf(WfError::Invalid(_))
            | CliError::Pepa(PepaError::Wf(WfError::Invalid(_)))
            | CliError::Translate(TranslateError::Invalid(_))
            | CliError::Translate(TranslateError::Wf(WfError::Invalid(_))) => EXIT_FAILS,
            _ => EXIT_USAGE,
        }
    }
}

/// Exit code and the text for stdout and stderr.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Report {
    fn ok(stdout: String) -> Self {
        Report { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn with(code: i32, stdout: String) -> Self {
        Report { code, stdout, stderr: String::new() }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Report
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Report { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Report::ok(text)
            }
        }
    }
}

/// Runs a parsed invocation.
pub fn execute(cli: &Cli) -> Report {
    let result = match &cli.command {
        Command::Check { files } => check(files),
        Command::Derive { file } => derive(cli, file),
        Command::Bisim { files } => bisim_cmd(cli, files),
        Command::Minimize { file } => minimize(cli, file),
        Command::Pepa(PepaCommand::Derive { file }) => pepa_derive(cli, file),
        Command::Pepa(PepaCommand::Compare { files }) => pepa_compare(cli, files),
        Command::Pepa(PepaCommand::EmitSpec { file }) => pepa_emit(file),
        Command::Translate { file } => translate(cli, file),
        Command::Monoid { source } => monoid(cli, source),
    };
    result.unwrap_or_else(|e| Report { code: e.code(), stdout: String::new(), stderr: format!("error: {e}\n") })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_err(path: &Path, message: impl Display) -> CliError {
    CliError::Parse { path: path.display().to_string(), message: message.to_string() }
}

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn load_pepa(path: &Path) -> Result<PepaFile, CliError> {
    PepaFile::parse(&read(path)?).map_err(|e| parse_err(path, e))
}

/// A specification from any supported rule file, unvalidated for `.spec`.
fn load_spec(path: &Path) -> Result<Specification, CliError> {
    let text = read(path)?;
    Ok(match extension(path) {
        "wgsos" => translations::translate_wgsos(&translations::parse_wgsos(&text).map_err(|e| parse_err(path, e))?)?,
        "sgsos" => translations::translate_segala(&translations::parse_sgsos(&text).map_err(|e| parse_err(path, e))?)?,
        "pepa" => pepa::spec_for(&load_pepa(path)?.defs),
        _ => parse_spec(&text).map_err(|e| parse_err(path, e))?,
    })
}

fn root_texts(cli: &Cli) -> Vec<String> {
    cli.roots
        .as_deref()
        .map(|r| split_top_level(r, ',').into_iter().map(|(_, s)| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .unwrap_or_default()
}

/// Roots from `--roots`, else every named process.
fn roots_for(cli: &Cli, spec: &Specification) -> Result<BTreeSet<Term>, CliError> {
    let texts = root_texts(cli);
    if texts.is_empty() {
        if spec.processes.is_empty() {
            return Err(CliError::Usage("no roots: pass --roots or declare processes".into()));
        }
        return Ok(spec.processes.values().cloned().collect());
    }
    texts.iter().map(|t| Ok(spec.resolve_root(t)?)).collect()
}

fn render<S: Ord + Clone + Debug + Display>(u: &Ultras<S>, format: Format) -> String {
    match format {
        Format::Text => u.to_text(),
        Format::Structured => structured(&u.to_structured()),
        Format::Graph => u.to_dot(),
    }
}

fn structured(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn blocks_json<T: Ord + Clone + Display>(p: &Partition<T>) -> serde_json::Value {
    json!(p.blocks().iter().map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn budget(cli: &Cli) -> usize {
    cli.budget as usize
}

// ---------------------------------------------------------------- commands

fn check(files: &[PathBuf]) -> Result<Report, CliError> {
    let mut out = String::new();
    let mut failed = false;
    for path in files {
        let name = path.display();
        let text = read(path)?;
        let diagnostics: Vec<String> = match extension(path) {
            "wgsos" => translations::parse_wgsos(&text).map_err(|e| parse_err(path, e))?.validate(),
            "sgsos" => translations::parse_sgsos(&text).map_err(|e| parse_err(path, e))?.validate(),
            "pepa" => pepa::spec_for(&load_pepa(path)?.defs).validate().iter().map(|d| d.to_string()).collect(),
            _ => parse_spec(&text).map_err(|e| parse_err(path, e))?.validate().iter().map(|d| d.to_string()).collect(),
        };
        if diagnostics.is_empty() {
            out.push_str(&format!("{name}: ok\n"));
        }
        for d in diagnostics {
            failed = true;
            out.push_str(&format!("{name}: {d}\n"));
        }
    }
    Ok(Report::with(if failed { EXIT_FAILS } else { EXIT_OK }, out))
}

fn derive(cli: &Cli, file: &Path) -> Result<Report, CliError> {
    let spec = load_spec(file)?;
    spec.ensure_valid()?;
    let roots = roots_for(cli, &spec)?;
    let u = induce(&spec, &roots, budget(cli).max(roots.len()))?;
    Ok(Report::ok(render(&u, cli.format)))
}

/// Widens a functional system with zero transitions for labels it lacks.
fn widen(u: &Ultras<Term>, labels: &BTreeSet<String>) -> Result<Ultras<Term>, CliError> {
    if u.labels() == labels {
        return Ok(u.clone());
    }
    if !u.is_functional().map_err(WfError::from)? {
        return Err(CliError::Usage("label sets differ and the systems are not functional".into()));
    }
    let mut w = Ultras::new(u.monoid().clone(), labels.iter().cloned());
    for s in u.states() {
        w.add_state(s.clone());
    }
    for s in u.boundary() {
        w.mark_boundary(s.clone()).map_err(WfError::from)?;
    }
    for s in u.states() {
        for a in labels {
            let fs: Vec<_> = u.transitions(s, a).cloned().collect();
            if fs.is_empty() {
                w.add_transition(s.clone(), a, WeightFunction::zero()).map_err(WfError::from)?;
            }
            for f in fs {
                w.add_transition(s.clone(), a, f).map_err(WfError::from)?;
            }
        }
    }
    Ok(w)
}

fn bisim_cmd(cli: &Cli, files: &[PathBuf]) -> Result<Report, CliError> {
    let roots = root_texts(cli);
    if roots.len() != 2 {
        return Err(CliError::Usage(format!("bisim needs exactly two roots, got {}", roots.len())));
    }
    let s1 = load_spec(&files[0])?;
    let s2 = match files.get(1) {
        Some(f) => load_spec(f)?,
        None => s1.clone(),
    };
    s1.ensure_valid()?;
    s2.ensure_valid()?;
    if s1.monoid != s2.monoid {
        return Err(CliError::Usage(format!("monoids differ: {} vs {}", s1.monoid, s2.monoid)));
    }
    let p = s1.resolve_root(&roots[0])?;
    let q = s2.resolve_root(&roots[1])?;
    let u1 = s1.engine().induce(&BTreeSet::from([p.clone()]), budget(cli))?;
    let u2 = s2.engine().induce(&BTreeSet::from([q.clone()]), budget(cli))?;
    if !u1.is_fully_explored() || !u2.is_fully_explored() {
        return Ok(Report::with(EXIT_INCONCLUSIVE, format!("inconclusive: budget {} reached\n", cli.budget)));
    }
    let labels: BTreeSet<String> = u1.labels().union(u2.labels()).cloned().collect();
    let (u1, u2) = (widen(&u1, &labels)?, widen(&u2, &labels)?);
    let part = bisim::largest_bisimulation(&u1, &u2)?;
    let verdict = part.same_block(&Side::Left(p), &Side::Right(q));
    let mut out = match cli.format {
        Format::Structured => structured(&json!({ "bisimilar": verdict, "blocks": blocks_json(&part) })),
        _ => format!("{}bisimilar: {}\n", part.to_text(), if verdict { "yes" } else { "no" }),
    };
    let mut code = if verdict { EXIT_OK } else { EXIT_FAILS };
    if cli.oracle {
        let union = bisim::disjoint_union(&u1, &u2)?;
        match bisim::brute_force_bisimilarity(&union) {
            Ok(r) if r == part.relation() => out.push_str("oracle: agree\n"),
            Ok(_) => {
                out.push_str("oracle: DISAGREE\n");
                code = EXIT_FAILS;
            }
            Err(_) => out.push_str(&format!("oracle: skipped (more than {BRUTE_FORCE_MAX_STATES} states)\n")),
        }
    }
    Ok(Report::with(code, out))
}

fn minimize(cli: &Cli, file: &Path) -> Result<Report, CliError> {
    let spec = load_spec(file)?;
    spec.ensure_valid()?;
    let roots = roots_for(cli, &spec)?;
    let u = induce(&spec, &roots, budget(cli).max(roots.len()))?;
    if !u.is_fully_explored() {
        return Ok(Report::with(EXIT_INCONCLUSIVE, format!("inconclusive: budget {} reached\n", cli.budget)));
    }
    let part = bisim::bisimilarity(&u)?;
    let q = bisim::quotient(&u, &part)?;
    let mut out = match cli.format {
        Format::Text => {
            let mut s = String::new();
            for b in part.blocks() {
                let items: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("class {{{}}}\n", items.join(", ")));
            }
            s + &q.system.to_text()
        }
        Format::Structured => structured(&json!({ "classes": blocks_json(&part), "quotient": q.system.to_structured() })),
        Format::Graph => q.system.to_dot(),
    };
    let mut code = EXIT_OK;
    if cli.oracle {
        match bisim::brute_force_bisimilarity(&u) {
            Ok(r) if r == part.relation() => out.push_str(oracle_line(cli.format, "agree").as_str()),
            Ok(_) => {
                out.push_str(oracle_line(cli.format, "DISAGREE").as_str());
                code = EXIT_FAILS;
            }
            Err(_) => out.push_str(oracle_line(cli.format, "skipped").as_str()),
        }
    }
    Ok(Report::with(code, out))
}

fn oracle_line(format: Format, verdict: &str) -> String {
    match format {
        Format::Graph => format!("// oracle: {verdict}\n"),
        _ => format!("# oracle: {verdict}\n"),
    }
}

fn pepa_main(path: &Path) -> Result<(PepaFile, PepaTerm), CliError> {
    let file = load_pepa(path)?;
    let (_, t) = file.main_term().ok_or_else(|| parse_err(path, "no process definitions"))?;
    let t = t.clone();
    Ok((file, t))
}

fn pepa_derive(cli: &Cli, path: &Path) -> Result<Report, CliError> {
    let (file, main) = pepa_main(path)?;
    let spec = pepa::spec_for(&file.defs);
    let u = pepa::derive_with(&spec, &main, budget(cli))?;
    let mut out = render(&u, cli.format);
    let mut code = EXIT_OK;
    if cli.oracle {
        let agree = u.states().iter().all(|s| pepa::rates_of(&u, s) == pepa::aggregate(&pepa::classic_sos(s)));
        out.push_str(&oracle_line(cli.format, if agree { "agree" } else { "DISAGREE" }));
        if !agree {
            code = EXIT_FAILS;
        }
    }
    Ok(Report::with(code, out))
}

fn pepa_compare(cli: &Cli, files: &[PathBuf]) -> Result<Report, CliError> {
    let (p, q) = if files.len() == 2 {
        (pepa_main(&files[0])?.1, pepa_main(&files[1])?.1)
    } else {
        let file = load_pepa(&files[0])?;
        let names = root_texts(cli);
        if names.len() != 2 {
            return Err(CliError::Usage("compare on one file needs --roots P,Q".into()));
        }
        let get = |n: &str| {
            file.defs.get(n).cloned().map_or_else(|| pepa::parse_pepa(n).map_err(|e| parse_err(&files[0], e)), Ok)
        };
        (get(&names[0])?, get(&names[1])?)
    };
    Ok(match pepa::strong_equivalence(&p, &q, budget(cli))? {
        Some(true) => Report::ok(format!("{p} ~ {q}\nequivalent: yes\n")),
        Some(false) => Report::with(EXIT_FAILS, format!("{p} !~ {q}\nequivalent: no\n")),
        None => Report::with(EXIT_INCONCLUSIVE, format!("inconclusive: budget {} reached\n", cli.budget)),
    })
}

fn pepa_emit(path: &Path) -> Result<Report, CliError> {
    let file = load_pepa(path)?;
    Ok(Report::ok(emit_spec(&pepa::spec_for(&file.defs))))
}

fn translate(cli: &Cli, path: &Path) -> Result<Report, CliError> {
    let text = read(path)?;
    match extension(path) {
        "wgsos" => {
            let source = translations::parse_wgsos(&text).map_err(|e| parse_err(path, e))?;
            let spec = translations::translate_wgsos(&source)?;
            let mut out = emit_spec(&spec);
            let mut code = EXIT_OK;
            if cli.oracle {
                let roots = roots_for(cli, &spec)?;
                let u = induce(&spec, &roots, budget(cli).max(roots.len()))?;
                let direct: Wlts<Term> = translations::wgsos_semantics(&source, &roots, budget(cli).max(roots.len()))?;
                let agree = explored_wlts(&u)? == direct;
                out.push_str(&format!("# oracle: {}\n", if agree { "agree" } else { "DISAGREE" }));
                if !agree {
                    code = EXIT_FAILS;
                }
            }
            Ok(Report::with(code, out))
        }
        "sgsos" => {
            let source = translations::parse_sgsos(&text).map_err(|e| parse_err(path, e))?;
            Ok(Report::ok(emit_spec(&translations::translate_segala(&source)?)))
        }
        other => Err(CliError::Usage(format!("translate expects a .wgsos or .sgsos file, got `.{other}`"))),
    }
}

fn monoid(cli: &Cli, source: &str) -> Result<Report, CliError> {
    let path = Path::new(source);
    let text = if path.is_file() { read(path)? } else { source.to_string() };
    let stripped: String = text.lines().map(|l| l.split(" #").next().unwrap_or("")).filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n");
    let decl = stripped.trim();
    let decl = decl.strip_prefix("monoid ").unwrap_or(decl);
    let m = Monoid::parse_declaration(decl).map_err(|e| parse_err(path, e))?;
    let yn = |b: bool| if b { "yes" } else { "no" };
    let clubs = enumerate_clubs(&m).map(|cs| cs.iter().map(|c| c.format(&m)).collect::<Vec<_>>());
    Ok(Report::ok(match cli.format {
        Format::Structured => structured(&json!({
            "monoid": m.name(),
            "positive": m.is_positive(),
            "refinement": m.is_refinement(),
            "clubs": clubs.as_ref().map(|c| json!(c)).unwrap_or_else(|e| json!(e.to_string())),
        })),
        _ => format!(
            "positive: {}, refinement: {}, clubs: {}\n",
            yn(m.is_positive()),
            yn(m.is_refinement()),
            clubs.map(|c| c.join(", ")).unwrap_or_else(|e| e.to_string())
        ),
    }))
}
