//! Fixpoint approximation of `<<C>>γ` for γ in {G p, p U q, F q} with
//! propositional operands. The upper set lets the coalition choose per
//! composite state; the lower set fixes one choice per agent local state.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::compose::{explore, Budget, ComposeError, ComposedModule, ExplicitGraph, IDLE};
use crate::kernel::Val;
use crate::logic::PathFormula;
use crate::strategy::StrategyError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("formula is outside the approximated fragment (G p, p U q, F q): {0}")]
    Fragment(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

impl From<ComposeError> for ApproxError {
    fn from(e: ComposeError) -> Self {
        ApproxError::Strategy(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApproxVerdict {
    pub verdict: Verdict,
    pub lower_size: usize,
    pub upper_size: usize,
    pub iterations: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
enum Goal<'f> {
    Always(&'f PathFormula),
    Reach(&'f PathFormula),
}

fn goal(gamma: &PathFormula) -> Result<Goal<'_>, ApproxError> {
    let fragment = || ApproxError::Fragment(crate::mdl::serialize_path_formula(gamma));
    if let Some(p) = gamma.as_always() {
        return p
            .is_propositional()
            .then_some(Goal::Always(p))
            .ok_or_else(fragment);
    }
    if let Some(q) = gamma.as_eventually() {
        return q
            .is_propositional()
            .then_some(Goal::Reach(q))
            .ok_or_else(fragment);
    }
    match gamma {
        PathFormula::Until(p, q) if p.is_propositional() && q.is_propositional() => {
            Ok(Goal::Reach(q))
        }
        _ => Err(fragment()),
    }
}

enum Bound {
    True,
    Atom(Vec<(usize, Val)>),
    Not(Box<Bound>),
    And(Box<Bound>, Box<Bound>),
}

fn bind(c: &ComposedModule, f: &PathFormula) -> Result<Bound, ApproxError> {
    Ok(match f {
        PathFormula::True => Bound::True,
        PathFormula::Atom(a) => Bound::Atom(c.bind_atom(a)?),
        PathFormula::Not(g) => Bound::Not(Box::new(bind(c, g)?)),
        PathFormula::And(a, b) => Bound::And(Box::new(bind(c, a)?), Box::new(bind(c, b)?)),
        PathFormula::Until(..) => unreachable!("operand is propositional"),
    })
}

fn eval(c: &ComposedModule, b: &Bound, code: u64) -> bool {
    match b {
        Bound::True => true,
        Bound::Atom(pairs) => pairs.iter().all(|&(v, x)| c.value(code, v) == Some(x)),
        Bound::Not(g) => !eval(c, g, code),
        Bound::And(x, y) => eval(c, x, code) && eval(c, y, code),
    }
}

/// Both bounds over the reachable graph, as membership vectors.
pub struct Approximation {
    pub graph: ExplicitGraph,
    pub upper: Vec<bool>,
    pub lower: Vec<bool>,
    pub iterations: usize,
}

impl Approximation {
    pub fn upper_codes(&self) -> BTreeSet<u64> {
        codes(&self.graph, &self.upper)
    }

    pub fn lower_codes(&self) -> BTreeSet<u64> {
        codes(&self.graph, &self.lower)
    }
}

fn codes(g: &ExplicitGraph, set: &[bool]) -> BTreeSet<u64> {
    (0..g.len())
        .filter(|&v| set[v])
        .map(|v| g.codes[v])
        .collect()
}

struct Ctx<'a> {
    c: &'a ComposedModule,
    g: &'a ExplicitGraph,
    agents: Vec<usize>,
}

impl Ctx<'_> {
    /// Is there a joint candidate at `v` under which every step stays in `w`?
    fn controllable(&self, v: usize, w: &[bool]) -> bool {
        let bad: Vec<usize> = self.g.edges(v).filter(|&e| !w[self.g.target(e)]).collect();
        if bad.is_empty() {
            return true;
        }
        let sizes: Vec<u32> = self
            .agents
            .iter()
            .map(|&a| {
                self.c
                    .candidates(a, self.c.local(self.g.codes[v], a) as usize)
                    .len() as u32
            })
            .collect();
        let mut pick = vec![0u32; sizes.len()];
        loop {
            let blocked = bad.iter().all(|&e| {
                (0..pick.len()).any(|j| {
                    let t = self.g.tag(e, j);
                    t != IDLE && t != pick[j]
                })
            });
            if blocked {
                return true;
            }
            let mut j = 0;
            loop {
                if j == pick.len() {
                    return false;
                }
                pick[j] += 1;
                if pick[j] < sizes[j] {
                    break;
                }
                pick[j] = 0;
                j += 1;
            }
        }
    }

    /// Does agent `j` taking candidate `id` at `v` keep every step in `w`,
    /// whatever the other agents do?
    fn safe_alone(&self, v: usize, j: usize, id: u32, w: &[bool]) -> bool {
        self.g.edges(v).all(|e| {
            let t = self.g.tag(e, j);
            w[self.g.target(e)] || (t != IDLE && t != id)
        })
    }

    fn allowed(&self, v: usize, e: usize, sigma: &[Vec<u32>]) -> bool {
        self.agents.iter().enumerate().all(|(j, &a)| {
            let t = self.g.tag(e, j);
            t == IDLE || t == sigma[j][self.c.local(self.g.codes[v], a) as usize]
        })
    }

    /// Shrinks `w` by `keep` until stable; returns the number of rounds
    /// that removed something.
    fn shrink(&self, w: &mut [bool], keep: impl Fn(usize, &[bool]) -> bool) -> usize {
        let mut rounds = 0;
        loop {
            let drop: Vec<usize> = (0..w.len()).filter(|&v| w[v] && !keep(v, w)).collect();
            if drop.is_empty() {
                return rounds;
            }
            for v in drop {
                w[v] = false;
            }
            rounds += 1;
        }
    }

    fn uniform_choice(&self, w: &[bool]) -> Vec<Vec<u32>> {
        self.agents
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                let states = self.c.components()[a].states.len();
                let mut best = Vec::with_capacity(states);
                for q in 0..states {
                    let n = self.c.candidates(a, q).len() as u32;
                    let here: Vec<usize> = (0..self.g.len())
                        .filter(|&v| w[v] && self.c.local(self.g.codes[v], a) as usize == q)
                        .collect();
                    let score = |id: u32| {
                        here.iter()
                            .filter(|&&v| self.safe_alone(v, j, id, w))
                            .count()
                    };
                    let pick = (0..n)
                        .max_by_key(|&id| (score(id), std::cmp::Reverse(id)))
                        .unwrap_or(0);
                    best.push(pick);
                }
                best
            })
            .collect()
    }
}

/// Computes both bounds. Goals of the form `p U q` and `F q` reduce to the
/// `q` states: any other state has a word that stutters forever.
pub fn approximate(
    c: &ComposedModule,
    coalition: &[String],
    gamma: &PathFormula,
    budget: &Budget,
) -> Result<Approximation, ApproxError> {
    let goal = goal(gamma)?;
    let mut agents = Vec::new();
    for a in coalition {
        let i = c
            .component_index(a)
            .ok_or_else(|| StrategyError::UnknownAgent(a.clone()))?;
        if agents.contains(&i) {
            return Err(StrategyError::DuplicateAgent(a.clone()).into());
        }
        agents.push(i);
    }
    let graph = explore(c, &agents, budget)?;
    let (p, reach) = match goal {
        Goal::Always(p) => (p, false),
        Goal::Reach(q) => (q, true),
    };
    let p = bind(c, p)?;
    let base: Vec<bool> = graph.codes.iter().map(|&code| eval(c, &p, code)).collect();
    if reach {
        let iterations = usize::from(base.iter().any(|&b| b));
        return Ok(Approximation {
            graph,
            lower: base.clone(),
            upper: base,
            iterations,
        });
    }
    let ctx = Ctx {
        c,
        g: &graph,
        agents,
    };
    let mut upper = base;
    let mut removing = ctx.shrink(&mut upper, |v, w| ctx.controllable(v, w));
    let mut lower = upper.clone();
    loop {
        let sigma = ctx.uniform_choice(&lower);
        let r = ctx.shrink(&mut lower, |v, w| {
            ctx.g
                .edges(v)
                .all(|e| !ctx.allowed(v, e, &sigma) || w[ctx.g.target(e)])
        });
        if r == 0 {
            break;
        }
        removing += r;
    }
    let iterations = removing + usize::from(lower.iter().any(|&b| b));
    Ok(Approximation {
        graph,
        upper,
        lower,
        iterations,
    })
}

pub fn upper_approx(
    c: &ComposedModule,
    coalition: &[String],
    gamma: &PathFormula,
    budget: &Budget,
) -> Result<BTreeSet<u64>, ApproxError> {
    Ok(approximate(c, coalition, gamma, budget)?.upper_codes())
}

pub fn lower_approx(
    c: &ComposedModule,
    coalition: &[String],
    gamma: &PathFormula,
    budget: &Budget,
) -> Result<BTreeSet<u64>, ApproxError> {
    Ok(approximate(c, coalition, gamma, budget)?.lower_codes())
}

/// Yes when init is in the lower set, No when it is outside the upper set.
pub fn apprx_check(
    c: &ComposedModule,
    coalition: &[String],
    gamma: &PathFormula,
    budget: &Budget,
) -> Result<ApproxVerdict, ApproxError> {
    let start = Instant::now();
    let a = approximate(c, coalition, gamma, budget)?;
    let verdict = if a.lower[0] {
        Verdict::Yes
    } else if !a.upper[0] {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    Ok(ApproxVerdict {
        verdict,
        lower_size: a.lower.iter().filter(|&&b| b).count(),
        upper_size: a.upper.iter().filter(|&&b| b).count(),
        iterations: a.iterations,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}
