//! Assume-guarantee rule: per coalition agent, a local strategic check
//! against its assumption and a containment check of its neighborhood.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::approx::{apprx_check, Verdict};
use crate::assume::{containment_check, AssumeError, Assumption};
use crate::compose::{compose, neighborhood, reachable_stats, Budget, ComposeError};
use crate::kernel::Module;
use crate::logic::{PathFormula, StateFormula};
use crate::mdl::{
    parse_assumption, parse_formula, parse_module, parse_path_formula, parse_task, ParseErrors,
};
use crate::strategy::{dfs_synthesize, Fairness, SearchBudget, StrategyError};

#[derive(Debug, Error)]
pub enum AgError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(ParseErrors),
    #[error("task has no premises")]
    EmptyCoalition,
    #[error("radius k must be at least 1")]
    ZeroRadius,
    #[error("agent `{0}` has more than one premise")]
    DuplicatePremise(String),
    #[error("agent `{0}` is not a module of the system")]
    UnknownAgent(String),
    #[error("task formula must be a single coalition formula over the premise agents")]
    FormulaMismatch,
    #[error("guarantee of `{agent}` mentions `{var}`, which the premise model does not own")]
    GuaranteeScope { agent: String, var: String },
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Assume(#[from] AssumeError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

impl AgError {
    pub fn is_budget(&self) -> bool {
        match self {
            AgError::Compose(e) | AgError::Assume(AssumeError::Compose(e)) => {
                matches!(e, ComposeError::Budget(_))
            }
            AgError::Strategy(e) => e.is_budget(),
            _ => false,
        }
    }
}

/// One coalition member's part of the rule.
#[derive(Debug, Clone)]
pub struct Premise {
    pub agent: String,
    pub guarantee: PathFormula,
    pub assumption: Assumption,
    /// System modules composed with the agent and its assumption in the
    /// local check.
    pub context: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AGTask {
    pub system: Vec<Module>,
    pub premises: Vec<Premise>,
    pub k: usize,
}

fn read(path: &Path) -> Result<String, AgError> {
    std::fs::read_to_string(path).map_err(|source| AgError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

impl AGTask {
    /// Loads a `.agt` file and the files it names, relative to its directory.
    pub fn load(path: &Path) -> Result<Self, AgError> {
        let spec =
            parse_task(&read(path)?).map_err(|e| AgError::Parse(e.with_file(&file_name(path))))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut system = Vec::new();
        for f in &spec.system {
            let p = dir.join(f);
            system.push(
                parse_module(&read(&p)?)
                    .map_err(|e| AgError::Parse(e.with_file(&file_name(&p))))?,
            );
        }
        let mut premises = Vec::new();
        for ps in &spec.premises {
            let p = dir.join(&ps.assumption);
            let assumption = parse_assumption(&read(&p)?)
                .map_err(|e| AgError::Parse(e.with_file(&file_name(&p))))?;
            let guarantee = parse_path_formula(&ps.guarantee).map_err(AgError::Parse)?;
            premises.push(Premise {
                agent: ps.agent.clone(),
                guarantee,
                assumption,
                context: ps.context.clone(),
            });
        }
        let task = AGTask {
            system,
            premises,
            k: spec.k,
        };
        task.validate()?;
        let formula = parse_formula(&spec.formula).map_err(AgError::Parse)?;
        match formula {
            StateFormula::Coalition { agents, .. }
                if agents.iter().collect::<BTreeSet<_>>() == task.coalition().iter().collect() => {}
            _ => return Err(AgError::FormulaMismatch),
        }
        Ok(task)
    }

    pub fn validate(&self) -> Result<(), AgError> {
        if self.premises.is_empty() {
            return Err(AgError::EmptyCoalition);
        }
        if self.k == 0 {
            return Err(AgError::ZeroRadius);
        }
        let mut seen = BTreeSet::new();
        for p in &self.premises {
            if !seen.insert(p.agent.as_str()) {
                return Err(AgError::DuplicatePremise(p.agent.clone()));
            }
            for name in std::iter::once(&p.agent).chain(&p.context) {
                if !self.system.iter().any(|m| &m.name == name) {
                    return Err(AgError::UnknownAgent(name.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn coalition(&self) -> Vec<String> {
        self.premises.iter().map(|p| p.agent.clone()).collect()
    }

    /// Conjunction of all guarantees.
    pub fn conclusion(&self) -> PathFormula {
        self.premises
            .iter()
            .map(|p| p.guarantee.clone())
            .reduce(PathFormula::and)
            .expect("coalition is non-empty")
    }

    fn module(&self, name: &str) -> &Module {
        self.system
            .iter()
            .find(|m| m.name == name)
            .expect("validated")
    }

    /// Agent, assumption module, then context modules.
    pub fn premise_model(&self, p: &Premise) -> Vec<Module> {
        let mut out = vec![self.module(&p.agent).clone(), p.assumption.module.clone()];
        out.extend(p.context.iter().map(|c| self.module(c).clone()));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Dfs,
    /// Approximation first, synthesis when it is not conclusive.
    Apprx,
}

#[derive(Debug, Clone, Copy)]
pub struct AgOptions {
    pub method: Method,
    /// Restrict premise 1 to runs accepted by the assumption.
    pub fair: bool,
    pub budget: Budget,
    pub workers: usize,
}

impl Default for AgOptions {
    fn default() -> Self {
        AgOptions {
            method: Method::Dfs,
            fair: true,
            budget: Budget::unlimited(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AgVerdict {
    Proved,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalReport {
    /// `None` when the check ran out of budget or failed structurally.
    pub holds: Option<bool>,
    pub method: Method,
    pub states: usize,
    pub transitions: u64,
    pub elapsed_ms: u64,
    pub strategy: Option<String>,
    pub error: Option<String>,
    pub budget_exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContainmentReport {
    pub holds: Option<bool>,
    pub modules: Vec<String>,
    pub env_states: usize,
    pub product_states: usize,
    pub elapsed_ms: u64,
    /// Composite state names of the violating lasso, cycle marked by `|`.
    pub counterexample: Option<String>,
    pub error: Option<String>,
    pub budget_exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PremiseReport {
    pub agent: String,
    pub local: LocalReport,
    pub containment: ContainmentReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AGReport {
    pub verdict: AgVerdict,
    pub k: usize,
    pub premises: Vec<PremiseReport>,
}

impl AGReport {
    pub fn budget_exceeded(&self) -> bool {
        self.premises
            .iter()
            .any(|p| p.local.budget_exceeded || p.containment.budget_exceeded)
    }
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn local_check(task: &AGTask, p: &Premise, opts: &AgOptions) -> LocalReport {
    let start = Instant::now();
    let mut report = LocalReport {
        holds: None,
        method: opts.method,
        states: 0,
        transitions: 0,
        elapsed_ms: 0,
        strategy: None,
        error: None,
        budget_exceeded: false,
    };
    let run = |report: &mut LocalReport| -> Result<(), AgError> {
        let c = compose(&task.premise_model(p))?;
        for var in p.guarantee.variables() {
            if c.resolve_var(&var)
                .is_none_or(|id| c.value(c.init_code(), id).is_none())
            {
                return Err(AgError::GuaranteeScope {
                    agent: p.agent.clone(),
                    var,
                });
            }
        }
        let stats = reachable_stats(&c, &opts.budget, opts.workers)?;
        report.states = stats.states;
        report.transitions = stats.transitions;
        let agent = [p.agent.clone()];
        if opts.method == Method::Apprx {
            if let Ok(v) = apprx_check(&c, &agent, &p.guarantee, &opts.budget) {
                if v.verdict == Verdict::Yes {
                    report.holds = Some(true);
                    return Ok(());
                }
            }
        }
        let fairness = opts.fair.then(|| Fairness {
            component: p.assumption.module.name.clone(),
            accepting: p.assumption.accepting.clone(),
        });
        let budget = SearchBudget {
            explore: opts.budget,
            max_nodes: None,
        };
        let out = dfs_synthesize(&c, &agent, &p.guarantee, fairness.as_ref(), &budget)?;
        report.holds = Some(out.strategy.is_some());
        report.strategy = out.strategy.map(|s| {
            let comp = c.component_index(&p.agent).expect("agent is a component");
            s.members[0].render(&c.components()[comp])
        });
        Ok(())
    };
    if let Err(e) = run(&mut report) {
        report.budget_exceeded = e.is_budget();
        report.error = Some(e.to_string());
    }
    report.elapsed_ms = ms(start);
    report
}

fn containment(task: &AGTask, p: &Premise, k: usize, opts: &AgOptions) -> ContainmentReport {
    let start = Instant::now();
    let mut report = ContainmentReport {
        holds: None,
        modules: Vec::new(),
        env_states: 0,
        product_states: 0,
        elapsed_ms: 0,
        counterexample: None,
        error: None,
        budget_exceeded: false,
    };
    let run = |report: &mut ContainmentReport| -> Result<(), AgError> {
        let modules = neighborhood(&task.system, &p.agent, k)?;
        report.modules = modules.iter().map(|m| m.name.clone()).collect();
        let env = compose(&modules)?;
        let agent = task.module(&p.agent);
        let y: BTreeSet<String> = agent
            .inputs
            .iter()
            .map(|v| v.name.clone())
            .filter(|n| p.assumption.module.var_index(n).is_some())
            .collect();
        let r = containment_check(&env, &p.assumption, &y, &opts.budget)?;
        report.holds = Some(r.holds);
        report.env_states = r.env_states;
        report.product_states = r.product_states;
        report.counterexample = r.counterexample.map(|cex| {
            let names = |xs: &[u64]| {
                xs.iter()
                    .map(|&c| env.state_name(c))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            format!("{} | {}", names(&cex.trace.prefix), names(&cex.trace.cycle))
        });
        Ok(())
    };
    if let Err(e) = run(&mut report) {
        report.budget_exceeded = e.is_budget();
        report.error = Some(e.to_string());
    }
    report.elapsed_ms = ms(start);
    report
}

/// Runs both premises for every agent; premises run in parallel and the
/// report is ordered as the task lists them.
pub fn ag_verify(task: &AGTask, opts: &AgOptions) -> Result<AGReport, AgError> {
    task.validate()?;
    let premises: Vec<PremiseReport> = std::thread::scope(|s| {
        let handles: Vec<_> = task
            .premises
            .iter()
            .map(|p| {
                s.spawn(move || PremiseReport {
                    agent: p.agent.clone(),
                    local: local_check(task, p, opts),
                    containment: containment(task, p, task.k, opts),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("premise worker panicked"))
            .collect()
    });
    let proved = premises
        .iter()
        .all(|p| p.local.holds == Some(true) && p.containment.holds == Some(true));
    Ok(AGReport {
        verdict: if proved {
            AgVerdict::Proved
        } else {
            AgVerdict::Unknown
        },
        k: task.k,
        premises,
    })
}

/// Synthesis on the whole system for the conjunction of the guarantees.
pub fn check_conclusion_monolithic(task: &AGTask, budget: &SearchBudget) -> Result<bool, AgError> {
    task.validate()?;
    let c = compose(&task.system)?;
    let out = dfs_synthesize(&c, &task.coalition(), &task.conclusion(), None, budget)?;
    Ok(out.strategy.is_some())
}

impl AGReport {
    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>8} {:>10} {:>9} {:>8} {:>10} {:>9}\n",
            "agent", "local", "states", "trans", "contain", "env", "product"
        );
        let show = |h: Option<bool>| match h {
            Some(true) => "yes",
            Some(false) => "no",
            None => "?",
        };
        for p in &self.premises {
            out.push_str(&format!(
                "{:<12} {:>8} {:>10} {:>9} {:>8} {:>10} {:>9}\n",
                p.agent,
                show(p.local.holds),
                p.local.states,
                p.local.transitions,
                show(p.containment.holds),
                p.containment.env_states,
                p.containment.product_states
            ));
        }
        out.push_str(&format!("verdict: {:?}\n", self.verdict));
        out
    }
}
