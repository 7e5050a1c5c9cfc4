//! `agmc`: validate models, check strategic formulas monolithically or with
//! the assume-guarantee rule, generate the voting benchmark, and tabulate
//! run records.
//!
//! Exit codes: 0 verdict produced, 1 input error, 2 I/O error, 3 budget
//! exceeded.

mod record;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use agmc_core::agrule::{ag_verify, AGTask, AgError, AgOptions, AgVerdict, Method};
use agmc_core::approx::{apprx_check, ApproxError, Verdict};
use agmc_core::bench::{write_voting, VotingConfig};
use agmc_core::compose::{compose, reachable_stats, Budget, ComposeError};
use agmc_core::kernel::{validate_module, Module};
use agmc_core::logic::StateFormula;
use agmc_core::mdl::{parse_assumption, parse_formula, parse_formula_file, parse_module};
use agmc_core::strategy::{dfs_synthesize, Fairness, SearchBudget};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use record::{render_table, BudgetSettings, RunRecord, TIMEOUT};

const DEFAULT_BUDGET_SECS: f64 = 7200.0;

#[derive(Parser)]
#[command(
    name = "agmc",
    version,
    about = "Assume-guarantee model checking for strategic abilities"
)]
struct Cli {
    /// Cap on explored states per exploration.
    #[arg(long, global = true)]
    max_states: Option<usize>,
    /// Worker threads for state counting and premise checks.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dfs,
    Apprx,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Dfs => "dfs",
            MethodArg::Apprx => "apprx",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and structurally validate modules, assumptions, formulas and tasks.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Check a coalition formula on the composition of FILES.
    Check {
        /// Formula text, or a `.satl` file holding exactly one formula.
        #[arg(long)]
        formula: String,
        #[arg(long, value_enum, default_value = "dfs")]
        method: MethodArg,
        /// Assumption composed with the system; only runs it accepts count.
        #[arg(long)]
        fair: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run the assume-guarantee rule on a task file.
    Ag {
        #[arg(long)]
        task: PathBuf,
        /// Neighborhood radius, overriding the task's.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "dfs")]
        method: MethodArg,
        /// Check premise 1 on all runs instead of the assumption's fair ones.
        #[arg(long)]
        no_fair: bool,
    },
    /// Generate a benchmark family.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Render run records as a table.
    Table { records: Vec<PathBuf> },
}

#[derive(Subcommand)]
enum Family {
    Voting {
        #[arg(long)]
        voters: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read `{}`: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Input(_) => 1,
        }
    }
}

impl From<AgError> for CliError {
    fn from(e: AgError) -> Self {
        match e {
            AgError::Io { path, source } => CliError::Io { path, source },
            e => CliError::Input(e.to_string()),
        }
    }
}

struct Ctx {
    budget: Budget,
    settings: BudgetSettings,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let secs = match std::env::var("AGMC_BUDGET_SECS") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| {
                    CliError::Input(format!(
                        "AGMC_BUDGET_SECS is not a number of seconds: `{s}`"
                    ))
                })?,
            Err(_) => DEFAULT_BUDGET_SECS,
        };
        let mut budget =
            Budget::unlimited().with_deadline(Instant::now() + Duration::from_secs_f64(secs));
        budget.max_states = cli.max_states;
        Ok(Ctx {
            budget,
            settings: BudgetSettings {
                time_secs: secs,
                max_states: cli.max_states,
                workers: cli.workers.max(1),
            },
        })
    }

    fn record(&self, command: &str, inputs: &[PathBuf]) -> RunRecord {
        RunRecord::new(
            command,
            inputs.iter().map(|p| p.display().to_string()).collect(),
            self.settings,
        )
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn first_keyword(text: &str) -> Option<&str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
}

fn parse_error(path: &Path, e: agmc_core::mdl::ParseErrors) -> CliError {
    CliError::Input(e.with_file(&path.display().to_string()).to_string())
}

fn load_module(path: &Path) -> Result<Module, CliError> {
    let m = parse_module(&read(path)?).map_err(|e| parse_error(path, e))?;
    let report = validate_module(&m);
    if let Some(v) = report.violations.first() {
        return Err(CliError::Input(format!(
            "{}: module `{}`: {v}",
            path.display(),
            m.name
        )));
    }
    Ok(m)
}

fn voters(modules: &[Module]) -> Option<usize> {
    let n = modules
        .iter()
        .filter(|m| m.name.starts_with("Voter"))
        .count();
    (n > 0).then_some(n)
}

/// Diagnostics for one file; `Err` only for I/O failures.
fn validate_file(path: &Path) -> Result<Vec<String>, CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let shown = path.display().to_string();
    let diags = match ext {
        "agt" => match AGTask::load(path).and_then(|t| t.validate()) {
            Ok(()) => vec![],
            Err(AgError::Io { path, source }) => return Err(CliError::Io { path, source }),
            Err(e) => vec![format!("{shown}: {e}")],
        },
        "satl" => match parse_formula_file(&read(path)?) {
            Ok(_) => vec![],
            Err(e) => e
                .with_file(&shown)
                .0
                .iter()
                .map(|e| e.to_string())
                .collect(),
        },
        _ => {
            let text = read(path)?;
            let parsed = if first_keyword(&text) == Some("assumption") {
                parse_assumption(&text).map(|a| a.module)
            } else {
                parse_module(&text)
            };
            match parsed {
                Ok(m) => validate_module(&m)
                    .violations
                    .iter()
                    .map(|v| format!("{shown}: module `{}`: {v}", m.name))
                    .collect(),
                Err(e) => e
                    .with_file(&shown)
                    .0
                    .iter()
                    .map(|e| e.to_string())
                    .collect(),
            }
        }
    };
    Ok(diags)
}

fn cmd_validate(ctx: &Ctx, files: &[PathBuf]) -> (RunRecord, u8) {
    let start = Instant::now();
    let mut rec = ctx.record("validate", files);
    let mut code = 0;
    for f in files {
        match validate_file(f) {
            Ok(d) => {
                if !d.is_empty() {
                    code = code.max(1);
                }
                rec.diagnostics.extend(d);
            }
            Err(e) => {
                code = 2;
                rec.diagnostics.push(e.to_string());
            }
        }
    }
    rec.verdict = if code == 0 { "Valid" } else { "Invalid" }.into();
    rec.elapsed_ms = start.elapsed().as_millis() as u64;
    (rec, code)
}

fn load_formula(arg: &str) -> Result<(Vec<String>, agmc_core::logic::PathFormula), CliError> {
    let path = Path::new(arg);
    let formula = if path.is_file() {
        let mut fs = parse_formula_file(&read(path)?).map_err(|e| parse_error(path, e))?;
        if fs.len() != 1 {
            return Err(CliError::Input(format!(
                "{}: expected one formula, found {}",
                path.display(),
                fs.len()
            )));
        }
        fs.remove(0)
    } else {
        parse_formula(arg).map_err(|e| CliError::Input(e.with_file("--formula").to_string()))?
    };
    match formula {
        StateFormula::Coalition { agents, path } => Ok((agents, path)),
        _ => Err(CliError::Input(
            "formula must be a single coalition formula <<A>> path".into(),
        )),
    }
}

fn budget_hit(e: &ComposeError) -> bool {
    matches!(e, ComposeError::Budget(_))
}

fn cmd_check(
    ctx: &Ctx,
    formula: &str,
    method: MethodArg,
    fair: Option<&Path>,
    files: &[PathBuf],
) -> Result<(RunRecord, u8), CliError> {
    let start = Instant::now();
    let mut inputs = files.to_vec();
    inputs.extend(fair.map(Path::to_path_buf));
    let mut rec = ctx.record("check", &inputs);
    rec.method = Some(method.name().into());
    let (agents, gamma) = load_formula(formula)?;
    let mut modules = files
        .iter()
        .map(|f| load_module(f))
        .collect::<Result<Vec<_>, _>>()?;
    rec.voters = voters(&modules);
    let fairness = match fair {
        Some(p) => {
            let a = parse_assumption(&read(p)?).map_err(|e| parse_error(p, e))?;
            let f = Fairness {
                component: a.module.name.clone(),
                accepting: a.accepting.clone(),
            };
            modules.push(a.module);
            Some(f)
        }
        None => None,
    };
    let c = compose(&modules).map_err(|e| CliError::Input(e.to_string()))?;
    let timeout = |mut rec: RunRecord, msg: String| {
        rec.verdict = TIMEOUT.into();
        rec.diagnostics.push(msg);
        rec.elapsed_ms = start.elapsed().as_millis() as u64;
        Ok((rec, 3))
    };
    match reachable_stats(&c, &ctx.budget, ctx.settings.workers) {
        Ok(s) => {
            rec.states = Some(s.states);
            rec.transitions = Some(s.transitions);
        }
        Err(e) if budget_hit(&e) => return timeout(rec, e.to_string()),
        Err(e) => return Err(CliError::Input(e.to_string())),
    }
    match method {
        MethodArg::Dfs => {
            let budget = SearchBudget {
                explore: ctx.budget,
                max_nodes: None,
            };
            match dfs_synthesize(&c, &agents, &gamma, fairness.as_ref(), &budget) {
                Ok(out) => {
                    rec.verdict = if out.strategy.is_some() { "Yes" } else { "No" }.into();
                    let strategies: Vec<String> = out
                        .strategy
                        .iter()
                        .flat_map(|s| &s.members)
                        .map(|m| {
                            let comp = c
                                .component_index(&m.agent)
                                .expect("coalition member is a component");
                            m.render(&c.components()[comp])
                        })
                        .collect();
                    rec.details = serde_json::json!({
                        "search_nodes": out.stats.search_nodes,
                        "checks": out.stats.checks,
                        "strategy": strategies,
                    });
                }
                Err(e) if e.is_budget() => return timeout(rec, e.to_string()),
                Err(e) => return Err(CliError::Input(e.to_string())),
            }
        }
        MethodArg::Apprx => match apprx_check(&c, &agents, &gamma, &ctx.budget) {
            Ok(v) => {
                let verdict = match v.verdict {
                    Verdict::No if fairness.is_some() => {
                        rec.diagnostics.push(
                            "approximation ignores fairness; a negative bound is not conclusive"
                                .into(),
                        );
                        Verdict::Inconclusive
                    }
                    v => v,
                };
                rec.verdict = format!("{verdict:?}");
                rec.details = serde_json::to_value(&v).expect("serializable");
            }
            Err(ApproxError::Strategy(e)) if e.is_budget() => return timeout(rec, e.to_string()),
            Err(e @ ApproxError::Fragment(_)) => {
                rec.verdict = format!("{:?}", Verdict::Inconclusive);
                rec.diagnostics.push(e.to_string());
            }
            Err(e) => return Err(CliError::Input(e.to_string())),
        },
    }
    rec.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok((rec, 0))
}

fn cmd_ag(
    ctx: &Ctx,
    task_path: &Path,
    k: Option<usize>,
    method: MethodArg,
    no_fair: bool,
) -> Result<(RunRecord, u8), CliError> {
    let start = Instant::now();
    let mut rec = ctx.record("ag", &[task_path.to_path_buf()]);
    rec.method = Some(method.name().into());
    let mut task = AGTask::load(task_path)?;
    if let Some(k) = k {
        task.k = k;
    }
    task.validate()?;
    rec.voters = voters(&task.system);
    let opts = AgOptions {
        method: match method {
            MethodArg::Dfs => Method::Dfs,
            MethodArg::Apprx => Method::Apprx,
        },
        fair: !no_fair,
        budget: ctx.budget,
        workers: ctx.settings.workers,
    };
    let report = ag_verify(&task, &opts)?;
    eprint!("{}", report.table());
    if let Some(p) = report.premises.first() {
        rec.states = Some(p.local.states);
        rec.transitions = Some(p.local.transitions);
    }
    for p in &report.premises {
        rec.diagnostics.extend(
            p.local
                .error
                .iter()
                .map(|e| format!("{} premise 1: {e}", p.agent)),
        );
        rec.diagnostics.extend(
            p.containment
                .error
                .iter()
                .map(|e| format!("{} premise 2: {e}", p.agent)),
        );
        if let Some(cex) = &p.containment.counterexample {
            rec.diagnostics
                .push(format!("{} premise 2 counterexample: {cex}", p.agent));
        }
    }
    let code = if report.verdict == AgVerdict::Unknown && report.budget_exceeded() {
        rec.verdict = TIMEOUT.into();
        3
    } else {
        rec.verdict = format!("{:?}", report.verdict);
        0
    };
    rec.details = serde_json::to_value(&report).expect("serializable");
    rec.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok((rec, code))
}

fn cmd_gen(ctx: &Ctx, voters: usize, out: &Path) -> Result<(RunRecord, u8), CliError> {
    let start = Instant::now();
    let mut rec = ctx.record("gen", &[]);
    let written =
        write_voting(VotingConfig::new(voters), out).map_err(|source| match source.kind() {
            std::io::ErrorKind::InvalidInput => CliError::Input(source.to_string()),
            _ => CliError::Io {
                path: out.to_path_buf(),
                source,
            },
        })?;
    rec.voters = Some(voters);
    rec.verdict = "Generated".into();
    rec.details = serde_json::json!({
        "files": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    rec.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok((rec, 0))
}

fn cmd_table(files: &[PathBuf]) -> Result<String, CliError> {
    let mut records = Vec::new();
    for f in files {
        for (i, line) in read(f)?.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: RunRecord = serde_json::from_str(line).map_err(|e| {
                CliError::Input(format!("{}:{}: not a run record: {e}", f.display(), i + 1))
            })?;
            records.push(r);
        }
    }
    Ok(render_table(&records))
}

fn emit(rec: &RunRecord) {
    for d in &rec.diagnostics {
        eprintln!("{d}");
    }
    println!("{}", serde_json::to_string(rec).expect("serializable"));
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let ctx = Ctx::new(cli)?;
    let (rec, code) = match &cli.command {
        Command::Validate { files } => cmd_validate(&ctx, files),
        Command::Check {
            formula,
            method,
            fair,
            files,
        } => cmd_check(&ctx, formula, *method, fair.as_deref(), files)?,
        Command::Ag {
            task,
            k,
            method,
            no_fair,
        } => cmd_ag(&ctx, task, *k, *method, *no_fair)?,
        Command::Gen {
            family: Family::Voting { voters, out },
        } => cmd_gen(&ctx, *voters, out)?,
        Command::Table { records } => {
            print!("{}", cmd_table(records)?);
            return Ok(0);
        }
    };
    emit(&rec);
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
