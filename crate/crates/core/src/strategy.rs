//! Memoryless imperfect-information strategies, pruning a composition by a
//! joint strategy, universal path checking under optional Büchi fairness
//! and depth-first strategy synthesis.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::compose::{
    explore, Budget, BudgetExceeded, Candidate, Choices, ComposeError, ComposedModule,
    ExplicitGraph, IDLE,
};
use crate::graph::{bfs_path, cycle_through, cyclic_components, scc, Csr};
use crate::kernel::{Lasso, Module, Val};
use crate::logic::{negate_to_buchi, BuchiAutomaton, PathFormula};
use crate::mdl::guard_text;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("`{0}` is not a component of the composition")]
    UnknownAgent(String),
    #[error("agent `{0}` appears twice in the coalition")]
    DuplicateAgent(String),
    #[error("strategy for `{agent}` has {found} choices but the module has {expected} states")]
    NotTotal {
        agent: String,
        expected: usize,
        found: usize,
    },
    #[error("strategy for `{agent}` picks a move that is not a transition of state `{state}`")]
    BadChoice { agent: String, state: String },
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error("synthesis budget exceeded after {nodes} search nodes")]
    SearchBudget { nodes: usize },
}

impl StrategyError {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            StrategyError::SearchBudget { .. } | StrategyError::Compose(ComposeError::Budget(_))
        )
    }
}

/// One expanded local transition per local state of the agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemorylessStrategy {
    pub agent: String,
    /// Indexed by local state.
    pub choice: Vec<Candidate>,
}

impl MemorylessStrategy {
    /// Checks totality and that every choice is an expanded transition of
    /// its state.
    pub fn new(m: &Module, choice: Vec<Candidate>) -> Result<Self, StrategyError> {
        if choice.len() != m.states.len() {
            return Err(StrategyError::NotTotal {
                agent: m.name.clone(),
                expected: m.states.len(),
                found: choice.len(),
            });
        }
        for (q, c) in choice.iter().enumerate() {
            let ok = m
                .transitions
                .get(c.transition)
                .is_some_and(|t| t.source == q && t.target == c.target && t.guard.admits(&c.input));
            if !ok {
                return Err(StrategyError::BadChoice {
                    agent: m.name.clone(),
                    state: m.states[q].name.clone(),
                });
            }
        }
        Ok(MemorylessStrategy {
            agent: m.name.clone(),
            choice,
        })
    }

    pub fn render(&self, m: &Module) -> String {
        let mut out = format!("strategy {} {{\n", self.agent);
        for (q, c) in self.choice.iter().enumerate() {
            let guard = match guard_text(m, &crate::kernel::Guard::exact(&c.input)) {
                any if any == "*" => "[*]".to_string(),
                g => g,
            };
            out.push_str(&format!(
                "  {} -> {} on {};\n",
                m.states[q].name, m.states[c.target].name, guard
            ));
        }
        out.push('}');
        out
    }
}

/// One strategy per coalition member.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JointStrategy {
    pub members: Vec<MemorylessStrategy>,
}

impl JointStrategy {
    pub fn new(members: Vec<MemorylessStrategy>) -> Result<Self, StrategyError> {
        let mut seen = BTreeSet::new();
        for m in &members {
            if !seen.insert(m.agent.as_str()) {
                return Err(StrategyError::DuplicateAgent(m.agent.clone()));
            }
        }
        Ok(JointStrategy { members })
    }

    pub fn get(&self, agent: &str) -> Option<&MemorylessStrategy> {
        self.members.iter().find(|m| m.agent == agent)
    }
}

/// Büchi condition on one component's local states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fairness {
    pub component: String,
    pub accepting: BTreeSet<usize>,
}

/// Candidate-id form of a strategy for each agent component.
fn candidate_ids(
    c: &ComposedModule,
    s: &MemorylessStrategy,
) -> Result<(usize, Vec<u32>), StrategyError> {
    let comp = c
        .component_index(&s.agent)
        .ok_or_else(|| StrategyError::UnknownAgent(s.agent.clone()))?;
    let m = &c.components()[comp];
    let s = MemorylessStrategy::new(m, s.choice.clone())?;
    let ids = s
        .choice
        .iter()
        .enumerate()
        .map(|(q, ch)| {
            c.candidates(comp, q)
                .iter()
                .position(|x| x == ch)
                .expect("validated choice is a candidate") as u32
        })
        .collect();
    Ok((comp, ids))
}

/// True iff at every position where the agent's local state changes, the
/// move taken is the strategy's choice. The input of the choice must match
/// the composite label before the step, or after it for `sync` inputs.
pub fn trace_implements(
    c: &ComposedModule,
    trace: &Lasso<u64>,
    s: &MemorylessStrategy,
) -> Result<bool, StrategyError> {
    let (comp, ids) = candidate_ids(c, s)?;
    for pos in 0..trace.positions() {
        let code = *trace.folded(pos);
        let next = *trace.folded(trace.next(pos));
        let (q, q2) = (c.local(code, comp), c.local(next, comp));
        if q == q2 {
            continue;
        }
        let id = ids[q as usize];
        let mut found = false;
        let only = [id];
        c.for_each_step(
            code,
            &|k, _| {
                if k == comp {
                    Choices::Only(&only)
                } else {
                    Choices::All
                }
            },
            |st| found |= st.taken[comp] == id && st.target == next,
        );
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Composition restricted so that each coalition agent only takes its
/// strategy's choice (or stays put).
#[derive(Debug, Clone)]
pub struct PrunedModel<'a> {
    pub composed: &'a ComposedModule,
    restrictions: Vec<(usize, Vec<u32>)>,
}

pub fn prune<'a>(
    c: &'a ComposedModule,
    s: &JointStrategy,
) -> Result<PrunedModel<'a>, StrategyError> {
    let restrictions = s
        .members
        .iter()
        .map(|m| candidate_ids(c, m))
        .collect::<Result<_, _>>()?;
    Ok(PrunedModel {
        composed: c,
        restrictions,
    })
}

impl<'a> PrunedModel<'a> {
    /// Reachable graph of the pruned model; agents are tracked so their
    /// edges carry candidate ids.
    pub fn explore(&self, budget: &Budget) -> Result<ExplicitGraph, StrategyError> {
        let tracked: Vec<usize> = self.restrictions.iter().map(|(c, _)| *c).collect();
        let g = explore(self.composed, &tracked, budget)?;
        Ok(g)
    }

    /// Edge filter on a graph from [`PrunedModel::explore`].
    pub fn allows(&self, g: &ExplicitGraph, v: usize, e: usize) -> bool {
        self.restrictions
            .iter()
            .enumerate()
            .all(|(j, (comp, ids))| {
                let tag = g.tag(e, j);
                tag == IDLE || tag == ids[self.composed.local(g.codes[v], *comp) as usize]
            })
    }
}

/// Outcome of a universal check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversalResult {
    pub holds: bool,
    /// Violating lasso of composite states when `holds` is false.
    pub counterexample: Option<Lasso<u64>>,
    pub product_states: usize,
}

/// Product of an explicit graph with the automaton for the negated
/// property, reusable across edge filters.
pub struct Checker<'a> {
    c: &'a ComposedModule,
    g: &'a ExplicitGraph,
    buchi: BuchiAutomaton,
    /// `guard_ok[v * B + b]`.
    guard_ok: Vec<bool>,
    fair: Option<Vec<bool>>,
}

impl<'a> Checker<'a> {
    pub fn new(
        c: &'a ComposedModule,
        g: &'a ExplicitGraph,
        gamma: &PathFormula,
        fairness: Option<&Fairness>,
    ) -> Result<Self, StrategyError> {
        let buchi = negate_to_buchi(gamma);
        let nb = buchi.states.len();
        let mut bound: Vec<Vec<(Vec<(usize, Val)>, bool)>> = Vec::with_capacity(nb);
        for st in &buchi.states {
            let mut lits = Vec::new();
            for lit in &st.guard {
                lits.push((c.bind_atom(&lit.atom)?, lit.positive));
            }
            bound.push(lits);
        }
        let mut guard_ok = vec![false; g.len() * nb];
        for (v, &code) in g.codes.iter().enumerate() {
            for (b, lits) in bound.iter().enumerate() {
                guard_ok[v * nb + b] = lits.iter().all(|(atom, positive)| {
                    atom.iter().all(|&(var, x)| c.value(code, var) == Some(x)) == *positive
                });
            }
        }
        let fair = match fairness {
            None => None,
            Some(f) => {
                let comp = c
                    .component_index(&f.component)
                    .ok_or_else(|| StrategyError::UnknownAgent(f.component.clone()))?;
                Some(
                    g.codes
                        .iter()
                        .map(|&code| f.accepting.contains(&(c.local(code, comp) as usize)))
                        .collect(),
                )
            }
        };
        Ok(Checker {
            c,
            g,
            buchi,
            guard_ok,
            fair,
        })
    }

    /// Searches for a fair accepting lasso using only edges accepted by
    /// `allowed(v, e)`; stuttering is always available.
    pub fn check(&self, allowed: &dyn Fn(usize, usize) -> bool) -> UniversalResult {
        let nb = self.buchi.states.len();
        let g = self.g;
        let mut id = vec![u32::MAX; g.len() * nb];
        let mut nodes: Vec<(usize, usize)> = Vec::new();
        for &b in &self.buchi.initial {
            if self.guard_ok[b] && id[b] == u32::MAX {
                id[b] = nodes.len() as u32;
                nodes.push((0, b));
            }
        }
        let initial: Vec<usize> = (0..nodes.len()).collect();
        let mut csr = Csr::new();
        let mut i = 0;
        let mut succ = Vec::new();
        while i < nodes.len() {
            let (v, b) = nodes[i];
            succ.clear();
            let targets = std::iter::once(v)
                .chain(g.edges(v).filter(|&e| allowed(v, e)).map(|e| g.target(e)));
            for w in targets {
                for &b2 in &self.buchi.states[b].successors {
                    let k = w * nb + b2;
                    if !self.guard_ok[k] {
                        continue;
                    }
                    if id[k] == u32::MAX {
                        id[k] = nodes.len() as u32;
                        nodes.push((w, b2));
                    }
                    succ.push(id[k]);
                }
            }
            succ.sort_unstable();
            succ.dedup();
            csr.push_node(succ.iter().copied());
            i += 1;
        }
        let (comp, count) = scc(&csr);
        let cyclic = cyclic_components(&csr, &comp, count);
        let accepting = |n: usize| self.buchi.states[nodes[n].1].accepting;
        let fair = |n: usize| self.fair.as_ref().is_none_or(|f| f[nodes[n].0]);
        let mut has_acc = vec![false; count];
        let mut has_fair = vec![false; count];
        for n in 0..nodes.len() {
            let k = comp[n] as usize;
            has_acc[k] |= accepting(n);
            has_fair[k] |= fair(n);
        }
        let bad = (0..count).find(|&k| cyclic[k] && has_acc[k] && has_fair[k]);
        let counterexample = bad.map(|k| {
            let inside = |n: usize| comp[n] as usize == k;
            let start = (0..nodes.len())
                .find(|&n| inside(n) && accepting(n))
                .expect("component has an accepting node");
            let stem =
                bfs_path(&csr, &initial, |_| true, |n| n == start).expect("node is reachable");
            let cycle = cycle_through(&csr, start, inside, &[&|n| fair(n)])
                .expect("cyclic component has a cycle through every node");
            let prefix = stem[..stem.len() - 1]
                .iter()
                .map(|&n| g.codes[nodes[n].0])
                .collect();
            let cycle = cycle.iter().map(|&n| g.codes[nodes[n].0]).collect();
            Lasso::new(prefix, cycle).expect("cycle is non-empty")
        });
        UniversalResult {
            holds: counterexample.is_none(),
            counterexample,
            product_states: nodes.len(),
        }
    }

    pub fn composed(&self) -> &ComposedModule {
        self.c
    }
}

/// Does every (fair) word of the model satisfy `gamma`?
pub fn verify_universal(
    c: &ComposedModule,
    strategy: Option<&JointStrategy>,
    gamma: &PathFormula,
    fairness: Option<&Fairness>,
    budget: &Budget,
) -> Result<UniversalResult, StrategyError> {
    let empty = JointStrategy::default();
    let p = prune(c, strategy.unwrap_or(&empty))?;
    let g = p.explore(budget)?;
    let checker = Checker::new(c, &g, gamma, fairness)?;
    Ok(checker.check(&|v, e| p.allows(&g, v, e)))
}

/// Limits for synthesis.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchBudget {
    pub explore: Budget,
    pub max_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthesisStats {
    pub states: usize,
    pub edges: usize,
    pub search_nodes: usize,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synthesis {
    pub strategy: Option<JointStrategy>,
    pub stats: SynthesisStats,
}

struct Search<'a> {
    c: &'a ComposedModule,
    g: &'a ExplicitGraph,
    checker: Checker<'a>,
    agents: Vec<usize>,
    /// `(agent slot, local state)` in branching order.
    order: Vec<(usize, usize)>,
    assign: Vec<Vec<Option<u32>>>,
    nodes: usize,
    checks: usize,
    budget: SearchBudget,
}

enum Probe {
    Success,
    Fail,
    Branch(usize, usize),
}

impl Search<'_> {
    fn allowed(&self, v: usize, e: usize, open_moves: bool) -> bool {
        let code = self.g.codes[v];
        self.agents.iter().enumerate().all(|(j, &comp)| {
            let tag = self.g.tag(e, j);
            if tag == IDLE {
                return true;
            }
            match self.assign[j][self.c.local(code, comp) as usize] {
                Some(id) => tag == id,
                None => open_moves,
            }
        })
    }

    fn probe(&mut self) -> Probe {
        self.checks += 1;
        let over = self.checker.check(&|v, e| self.allowed(v, e, true));
        if over.holds {
            return Probe::Success;
        }
        self.checks += 1;
        let under = self.checker.check(&|v, e| self.allowed(v, e, false));
        if !under.holds {
            return Probe::Fail;
        }
        let reachable = self.reachable_locals();
        match self
            .order
            .iter()
            .find(|&&(j, q)| self.assign[j][q].is_none() && reachable[j][q])
        {
            Some(&(j, q)) => Probe::Branch(j, q),
            None => Probe::Fail,
        }
    }

    /// Agent local states reachable when unassigned states keep all moves.
    fn reachable_locals(&self) -> Vec<Vec<bool>> {
        let mut out: Vec<Vec<bool>> = self
            .agents
            .iter()
            .map(|&comp| vec![false; self.c.components()[comp].states.len()])
            .collect();
        let mut seen = vec![false; self.g.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (j, &comp) in self.agents.iter().enumerate() {
                out[j][self.c.local(self.g.codes[v], comp) as usize] = true;
            }
            for e in self.g.edges(v) {
                let w = self.g.target(e);
                if !seen[w] && self.allowed(v, e, true) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out
    }

    fn run(&mut self) -> Result<bool, StrategyError> {
        self.nodes += 1;
        if self.budget.max_nodes.is_some_and(|m| self.nodes > m) || self.budget.explore.timed_out()
        {
            return Err(StrategyError::SearchBudget { nodes: self.nodes });
        }
        match self.probe() {
            Probe::Success => Ok(true),
            Probe::Fail => Ok(false),
            Probe::Branch(j, q) => {
                let n = self.c.candidates(self.agents[j], q).len() as u32;
                for id in 0..n {
                    self.assign[j][q] = Some(id);
                    if self.run()? {
                        return Ok(true);
                    }
                }
                self.assign[j][q] = None;
                Ok(false)
            }
        }
    }
}

/// Depth-first search for a joint memoryless strategy of `coalition`
/// under which every (fair) word satisfies `gamma`. Local states are
/// branched in breadth-first order from each agent's initial state and
/// candidates in declaration order, so the first strategy found is the
/// least in that order. States left unassigned get their first candidate.
pub fn dfs_synthesize(
    c: &ComposedModule,
    coalition: &[String],
    gamma: &PathFormula,
    fairness: Option<&Fairness>,
    budget: &SearchBudget,
) -> Result<Synthesis, StrategyError> {
    let mut agents = Vec::new();
    let mut seen = HashSet::new();
    for a in coalition {
        if !seen.insert(a.as_str()) {
            return Err(StrategyError::DuplicateAgent(a.clone()));
        }
        agents.push(
            c.component_index(a)
                .ok_or_else(|| StrategyError::UnknownAgent(a.clone()))?,
        );
    }
    let g = explore(c, &agents, &budget.explore)?;
    let checker = Checker::new(c, &g, gamma, fairness)?;
    let order = agents
        .iter()
        .enumerate()
        .flat_map(|(j, &comp)| {
            c.components()[comp]
                .bfs_order()
                .into_iter()
                .map(move |q| (j, q))
        })
        .collect();
    let assign = agents
        .iter()
        .map(|&comp| vec![None; c.components()[comp].states.len()])
        .collect();
    let mut search = Search {
        c,
        g: &g,
        checker,
        agents: agents.clone(),
        order,
        assign,
        nodes: 0,
        checks: 0,
        budget: *budget,
    };
    let found = search.run()?;
    let stats = SynthesisStats {
        states: g.len(),
        edges: g.edge_count(),
        search_nodes: search.nodes,
        checks: search.checks,
    };
    let strategy = if found {
        let members = agents
            .iter()
            .enumerate()
            .map(|(j, &comp)| {
                let choice = search.assign[j]
                    .iter()
                    .enumerate()
                    .map(|(q, id)| c.candidates(comp, q)[id.unwrap_or(0) as usize].clone())
                    .collect();
                MemorylessStrategy {
                    agent: c.components()[comp].name.clone(),
                    choice,
                }
            })
            .collect();
        Some(JointStrategy { members })
    } else {
        None
    };
    Ok(Synthesis { strategy, stats })
}

/// Every joint strategy of the coalition, for brute-force comparison.
pub fn all_strategies(
    c: &ComposedModule,
    coalition: &[String],
) -> Result<Vec<JointStrategy>, StrategyError> {
    let mut per_agent: Vec<Vec<MemorylessStrategy>> = Vec::new();
    for a in coalition {
        let comp = c
            .component_index(a)
            .ok_or_else(|| StrategyError::UnknownAgent(a.clone()))?;
        let m = &c.components()[comp];
        let mut all = vec![Vec::new()];
        for q in 0..m.states.len() {
            let cands = c.candidates(comp, q);
            all = all
                .into_iter()
                .flat_map(|prefix: Vec<Candidate>| {
                    cands.iter().map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x.clone());
                        p
                    })
                })
                .collect();
        }
        per_agent.push(
            all.into_iter()
                .map(|choice| MemorylessStrategy {
                    agent: m.name.clone(),
                    choice,
                })
                .collect(),
        );
    }
    let mut joint = vec![Vec::new()];
    for options in per_agent {
        joint = joint
            .into_iter()
            .flat_map(|prefix: Vec<MemorylessStrategy>| {
                options.iter().map(move |s| {
                    let mut p = prefix.clone();
                    p.push(s.clone());
                    p
                })
            })
            .collect();
    }
    Ok(joint
        .into_iter()
        .map(|members| JointStrategy { members })
        .collect())
}

impl fmt::Display for JointStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.members {
            writeln!(f, "strategy {} ({} choices)", m.agent, m.choice.len())?;
        }
        Ok(())
    }
}

/// Convenience for callers that only need the budget error's counts.
pub fn budget_counts(e: &StrategyError) -> Option<BudgetExceeded> {
    match e {
        StrategyError::Compose(ComposeError::Budget(b)) => Some(*b),
        _ => None,
    }
}
