//! `gammahom`: stable homology of Γ-spaces from the command line.
//!
//! Exit status: 0 pass, 1 check failure, 2 usage error, 3 budget exceeded.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use gamma_homology::chains::{Ring, SCHEMA_VERSION};
use gamma_homology::segal::{parse_space, spectrum_level, Gamma};
use gamma_homology::simplicial::normalized_chains;
use gamma_homology::stable::{
    check_rho_iso, check_smash_vanishing, check_special, check_square, check_stable_range, check_wedge_iso,
    CheckReport, Session, StableConfig, StableResult,
};
use gamma_homology::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "gammahom", version, about = "Spectrum homology of Gamma-spaces via the Segal machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stable homology table of a Gamma-space.
    Compute(JobArgs),
    /// Run a property suite and report pass/fail per assertion.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        job: JobArgs,
    },
    /// Normalized chains of one tower level as sparse-matrix JSON.
    Dump {
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[command(flatten)]
        job: JobArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Segal,
    Square,
    Special,
    Rho,
    Wedge,
    Smash,
    Stable,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Table,
    Json,
    Csv,
}

/// Flags shared by every subcommand; each overrides the `--config` file.
#[derive(Args, Clone, Debug)]
struct JobArgs {
    /// Gamma-space spec, e.g. `ab:2`, `B(sphere)`, `wedge(ab:2,t:s0)`.
    #[arg(long)]
    space: Option<String>,
    /// Coefficients: z, q, f2, f3, f5, or fP for a prime P.
    #[arg(long)]
    ring: Option<String>,
    #[arg(long)]
    max_degree: Option<usize>,
    /// Highest tower level to build.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Cells allowed at one multi-index before giving up.
    #[arg(long)]
    cell_budget: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the fields above, using underscores.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    space: Option<String>,
    ring: Option<String>,
    max_degree: Option<usize>,
    max_iterations: Option<usize>,
    cell_budget: Option<u64>,
    threads: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

/// A fully resolved job.
#[derive(Debug)]
struct JobConfig {
    space: String,
    stable: StableConfig,
    threads: Option<usize>,
    format: Format,
    out: Option<PathBuf>,
}

/// A failure with the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_USAGE,
            error: e.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Budget { .. } => EXIT_BUDGET,
            Error::Parse(_) | Error::Validation(_) | Error::DirectionMismatch { .. } | Error::Json(_) => EXIT_USAGE,
            Error::Composition(_) | Error::Integrity(_) => EXIT_FAIL,
        };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_FAIL, error }
    }
}

fn resolve(args: JobArgs) -> Result<JobConfig, Failure> {
    let file = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map_err(Failure::usage)?;
            serde_json::from_str::<ConfigFile>(&text)
                .with_context(|| format!("parsing {}", p.display()))
                .map_err(Failure::usage)?
        }
        None => ConfigFile::default(),
    };
    let defaults = StableConfig::default();
    let space = args
        .space
        .or(file.space)
        .ok_or_else(|| Failure::usage(anyhow::anyhow!("--space is required")))?;
    let ring: Ring = args.ring.or(file.ring).as_deref().unwrap_or("z").parse()?;
    let cell_budget = args.cell_budget.or(file.cell_budget).unwrap_or(defaults.cell_budget);
    let max_iterations = args.max_iterations.or(file.max_iterations).unwrap_or(defaults.max_iterations);
    if cell_budget == 0 {
        return Err(Failure::usage(anyhow::anyhow!("--cell-budget must be positive")));
    }
    if max_iterations == 0 {
        return Err(Failure::usage(anyhow::anyhow!("--max-iterations must be positive")));
    }
    let threads = args.threads.or(file.threads);
    if threads == Some(0) {
        return Err(Failure::usage(anyhow::anyhow!("--threads must be positive")));
    }
    Ok(JobConfig {
        space,
        stable: StableConfig {
            ring,
            max_degree: args.max_degree.or(file.max_degree).unwrap_or(defaults.max_degree),
            max_iterations,
            cell_budget,
        },
        threads,
        format: args.format.or(file.format).unwrap_or(Format::Table),
        out: args.out.or(file.out),
    })
}

fn emit(job: &JobConfig, text: &str) -> Result<(), Failure> {
    match &job.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing stdout")?;
        }
    }
    Ok(())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn render_result(r: &StableResult, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            w.write_record(["degree", "group", "rank", "torsion", "n", "bound", "empirical_only"])
                .context("csv")?;
            for ev in &r.evidence {
                let g = r.group(ev.degree);
                let torsion: Vec<String> = g.map(|g| g.torsion.iter().map(|d| d.to_string()).collect()).unwrap_or_default();
                w.write_record([
                    ev.degree.to_string(),
                    r.table.render_entry(ev.degree),
                    g.map_or("?".into(), |g| g.rank.to_string()),
                    torsion.join(" "),
                    ev.n.map_or(String::new(), |n| n.to_string()),
                    ev.bound.clone().unwrap_or_default(),
                    ev.empirical_only.to_string(),
                ])
                .context("csv")?;
            }
            Ok(String::from_utf8(w.into_inner().context("csv")?).context("csv")?)
        }
        Format::Table => {
            let mut s = format!("space: {}\nring: {}\n", r.space, r.ring.symbol());
            let sp = &r.special;
            s.push_str(&match (&sp.failure, sp.special) {
                (_, true) => format!("special: yes ({})\n", mode_text(sp)),
                (Some(f), false) => format!("special: no ({f}); pre-spectrum route, values are empirical\n"),
                (None, false) => "special: no\n".into(),
            });
            s.push_str(&format!(
                "{:>6}  {:<12} {:>3}  {:<12} {:<12}  bound\n",
                "degree", "group", "n", "at n-1", "at n"
            ));
            for ev in &r.evidence {
                s.push_str(&format!(
                    "{:>6}  {:<12} {:>3}  {:<12} {:<12}  {}{}\n",
                    ev.degree,
                    r.table.render_entry(ev.degree),
                    ev.n.map_or("-".into(), |n| n.to_string()),
                    ev.previous.as_deref().unwrap_or("-"),
                    ev.value.as_deref().unwrap_or("-"),
                    ev.bound.as_deref().unwrap_or("-"),
                    if ev.empirical_only { " (empirical)" } else { "" }
                ));
            }
            if let Some(d) = r.unstable_above {
                s.push_str(&format!("unstable above degree {d}\n"));
            }
            if let Some(b) = &r.budget_exceeded {
                s.push_str(&format!("budget exceeded: {b}\n"));
            }
            for v in &r.monotonicity_violations {
                s.push_str(&format!("monotonicity violation: {v}\n"));
            }
            Ok(s)
        }
    }
}

fn mode_text(v: &gamma_homology::segal::SpecialVerdict) -> String {
    use gamma_homology::segal::SpecialMode;
    match v.mode {
        SpecialMode::Bijection { depth } => format!("levelwise bijection to depth {depth}, n + n' <= {}", v.bound),
        SpecialMode::Homology { depth, ring } => {
            format!("homology over {} to depth {depth}, n + n' <= {}", ring.symbol(), v.bound)
        }
    }
}

fn render_report(r: &CheckReport, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            w.write_record(["check", "assertion", "degree", "status", "detail"]).context("csv")?;
            for a in &r.assertions {
                let status = serde_json::to_value(a.status).map_err(Error::from)?;
                w.write_record([
                    r.check.clone(),
                    a.name.clone(),
                    a.degree.map_or(String::new(), |d| d.to_string()),
                    status.as_str().unwrap_or_default().to_string(),
                    a.detail.clone(),
                ])
                .context("csv")?;
            }
            Ok(String::from_utf8(w.into_inner().context("csv")?).context("csv")?)
        }
        Format::Table => {
            let mut s = format!("suite: {}\nspace: {}\nring: {}\n", r.check, r.space, r.ring.symbol());
            if let Some(v) = &r.special {
                s.push_str(&if v.special {
                    format!("special: yes ({})\n", mode_text(v))
                } else {
                    format!("special: no ({})\n", v.failure.as_deref().unwrap_or("-"))
                });
            }
            for a in &r.assertions {
                let tag = serde_json::to_value(a.status).map_err(Error::from)?;
                let degree = a.degree.map(|d| format!(" [degree {d}]")).unwrap_or_default();
                s.push_str(&format!(
                    "{:<6}  {}{degree}: {}\n",
                    tag.as_str().unwrap_or_default().to_uppercase(),
                    a.name,
                    a.detail
                ));
            }
            let verdict = if r.passed {
                "PASS"
            } else if r.has_failure() {
                "FAIL"
            } else {
                "BUDGET"
            };
            s.push_str(&format!("result: {verdict}\n"));
            Ok(s)
        }
    }
}

fn run_suite(s: &Session, x: &Gamma, suite: Suite) -> gamma_homology::Result<CheckReport> {
    let space = x.describe();
    let wedge = || -> gamma_homology::Result<Vec<CheckReport>> {
        Ok(vec![check_wedge_iso(s, x, 1, 1)?, check_wedge_iso(s, x, 1, 2)?])
    };
    Ok(match suite {
        Suite::Rho => check_rho_iso(s, x)?,
        Suite::Square => check_square(s, x)?,
        Suite::Special => check_special(s, x)?,
        Suite::Stable => check_stable_range(s, x)?,
        Suite::Smash => check_smash_vanishing(s, x, 1, 1)?,
        Suite::Wedge => CheckReport::merge("wedge", &space, s, wedge()?),
        Suite::Segal => {
            let mut parts = vec![check_rho_iso(s, x)?];
            parts.extend(wedge()?);
            parts.push(check_smash_vanishing(s, x, 1, 1)?);
            CheckReport::merge("segal", &space, s, parts)
        }
        Suite::All => {
            let mut parts = vec![check_special(s, x)?, check_square(s, x)?, check_rho_iso(s, x)?];
            parts.extend(wedge()?);
            parts.push(check_smash_vanishing(s, x, 1, 1)?);
            parts.push(check_stable_range(s, x)?);
            CheckReport::merge("all", &space, s, parts)
        }
    })
}

fn init_threads(job: &JobConfig) -> Result<(), Failure> {
    if let Some(t) = job.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Compute(args) => {
            let job = resolve(args)?;
            init_threads(&job)?;
            let x = parse_space(&job.space)?;
            let r = Session::new(job.stable.clone()).spectrum_homology(&x)?;
            emit(&job, &render_result(&r, job.format)?)?;
            Ok(if r.is_complete() { 0 } else { EXIT_BUDGET })
        }
        Command::Check { suite, job } => {
            let job = resolve(job)?;
            init_threads(&job)?;
            let x = parse_space(&job.space)?;
            let session = Session::new(job.stable.clone());
            let report = run_suite(&session, &x, suite)?;
            emit(&job, &render_report(&report, job.format)?)?;
            Ok(if report.has_failure() {
                EXIT_FAIL
            } else if report.budget_exceeded {
                EXIT_BUDGET
            } else {
                0
            })
        }
        Command::Dump { level, job } => {
            let job = resolve(job)?;
            init_threads(&job)?;
            let x = parse_space(&job.space)?;
            let object = spectrum_level(&x, level).object;
            let top = level + job.stable.max_degree;
            let c = normalized_chains(object, job.stable.ring, top, job.stable.cell_budget)?;
            let text = match job.format {
                Format::Json => json(&c.to_json())?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(vec![]);
                    w.write_record(["degree", "row", "col", "value"]).context("csv")?;
                    for d in 0..=c.top_degree() {
                        if let Some(b) = c.boundary(d) {
                            for (r, col, v) in b.triplets() {
                                w.write_record([d.to_string(), r.to_string(), col.to_string(), v.to_string()])
                                    .context("csv")?;
                            }
                        }
                    }
                    String::from_utf8(w.into_inner().context("csv")?).context("csv")?
                }
                Format::Table => {
                    let h = c.homology(top)?;
                    let mut s = format!(
                        "space: {}\nlevel: {level}\nschema_version: {SCHEMA_VERSION}\n{:>6}  {:>10}  homology\n",
                        x.describe(),
                        "degree",
                        "rank"
                    );
                    for d in 0..=top {
                        s.push_str(&format!("{d:>6}  {:>10}  {}\n", c.rank(d), h.render_entry(d)));
                    }
                    s
                }
            };
            emit(&job, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
