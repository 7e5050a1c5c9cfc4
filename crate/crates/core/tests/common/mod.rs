#![allow(dead_code)]

use std::collections::BTreeSet;

use agmc_core::agrule::{AGTask, Premise};
use agmc_core::assume::Assumption;
use agmc_core::compose::{compose, explore, Budget, ComposedModule, ExplicitGraph};
use agmc_core::kernel::{
    uncovered, validate_module, Domain, Guard, Lasso, Module, State, Transition, Val, Variable,
};
use agmc_core::logic::{Atom, PathFormula};
use agmc_core::strategy::{all_strategies, prune, Checker, Fairness, JointStrategy};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn domain(n: usize) -> Domain {
    Domain::new((0..n).map(|i| format!("v{i}"))).unwrap()
}

fn random_mask(rng: &mut StdRng, d: usize) -> u64 {
    let full = (1u64 << d) - 1;
    if rng.gen_bool(0.5) {
        return full;
    }
    loop {
        let m = rng.gen_range(1..=full);
        if m != 0 {
            return m;
        }
    }
}

/// Adds self-loops on exactly the uncovered input boxes of every state.
pub fn close_with_loops(m: &mut Module) {
    let space = m.input_space();
    for q in 0..m.states.len() {
        let boxes: Vec<Vec<u64>> = m
            .transitions
            .iter()
            .filter(|t| t.source == q && t.target != q)
            .map(|t| t.guard.masks.clone())
            .collect();
        for b in uncovered(&boxes, &space) {
            m.transitions.push(Transition {
                source: q,
                guard: Guard { masks: b },
                target: q,
            });
        }
    }
}

/// Random valid module over the given variables and inputs.
pub fn random_module(
    rng: &mut StdRng,
    name: &str,
    vars: Vec<Variable>,
    inputs: Vec<Variable>,
    states: usize,
) -> Module {
    let states: Vec<State> = (0..states)
        .map(|q| State {
            name: format!("q{q}"),
            label: vars
                .iter()
                .map(|v| rng.gen_range(0..v.domain.len()) as Val)
                .collect(),
        })
        .collect();
    let n = states.len();
    let mut m = Module {
        name: name.to_string(),
        vars,
        inputs,
        sync: BTreeSet::new(),
        states,
        init: 0,
        transitions: Vec::new(),
    };
    for q in 0..n {
        if n < 2 {
            break;
        }
        for _ in 0..rng.gen_range(0..=2) {
            let mut t = rng.gen_range(0..n - 1);
            if t >= q {
                t += 1;
            }
            let masks = m
                .inputs
                .iter()
                .map(|v| random_mask(rng, v.domain.len()))
                .collect();
            m.transitions.push(Transition {
                source: q,
                guard: Guard { masks },
                target: t,
            });
        }
    }
    close_with_loops(&mut m);
    assert!(
        validate_module(&m).is_valid(),
        "generator produced an invalid module"
    );
    m
}

/// A random instance of the rule: modules `M1..Mm` owning `x1..xm`, the
/// agent `M1` with an assumption `A1` over the variables it reads.
pub struct Case {
    pub task: AGTask,
    pub seed: u64,
}

impl Case {
    pub fn agent(&self) -> &str {
        &self.task.premises[0].agent
    }

    pub fn guarantee(&self) -> &PathFormula {
        &self.task.premises[0].guarantee
    }

    pub fn assumption(&self) -> &Assumption {
        &self.task.premises[0].assumption
    }

    pub fn monolithic(&self) -> ComposedModule {
        compose(&self.task.system).unwrap()
    }
}

fn random_atom(rng: &mut StdRng, vars: &[Variable]) -> PathFormula {
    let v = &vars[rng.gen_range(0..vars.len())];
    let x = rng.gen_range(0..v.domain.len()) as Val;
    let a = PathFormula::atom(Atom::eq(v.name.clone(), v.domain.value(x).to_string()));
    if rng.gen_bool(0.3) {
        PathFormula::not(a)
    } else {
        a
    }
}

fn random_prop(rng: &mut StdRng, vars: &[Variable]) -> PathFormula {
    let a = random_atom(rng, vars);
    match rng.gen_range(0..4) {
        0 => PathFormula::and(a, random_atom(rng, vars)),
        1 => PathFormula::or(a, random_atom(rng, vars)),
        _ => a,
    }
}

/// Valuations of `vars` in mixed-radix order.
fn valuations(vars: &[Variable]) -> Vec<Vec<Val>> {
    vars.iter().fold(vec![vec![]], |acc, v| {
        acc.into_iter()
            .flat_map(|p| (0..v.domain.len()).map(move |x| [p.clone(), vec![x as Val]].concat()))
            .collect()
    })
}

/// Product of candidate counts over the agent's local states.
pub fn strategy_space(c: &ComposedModule, agent: &str) -> u64 {
    let comp = c.component_index(agent).unwrap();
    (0..c.components()[comp].states.len())
        .map(|q| c.candidates(comp, q).len() as u64)
        .product()
}

pub fn random_case(seed: u64) -> Case {
    let mut rng = rng(seed);
    loop {
        let case = try_case(&mut rng, seed);
        if strategy_space(&case.monolithic(), case.agent()) <= 4096 {
            return case;
        }
    }
}

fn try_case(rng: &mut StdRng, seed: u64) -> Case {
    let m = rng.gen_range(2..=3);
    let owned: Vec<Variable> = (1..=m)
        .map(|i| Variable::new(format!("x{i}"), domain(rng.gen_range(2..=3))))
        .collect();
    let mut system = Vec::new();
    let mut agent_inputs = Vec::new();
    for i in 0..m {
        let mut inputs: Vec<Variable> = (0..m)
            .filter(|&j| j != i && rng.gen_bool(0.5))
            .map(|j| owned[j].clone())
            .collect();
        if i == 0 && inputs.is_empty() {
            inputs.push(owned[rng.gen_range(1..m)].clone());
        }
        let states = if i == 0 {
            rng.gen_range(2..=4)
        } else {
            rng.gen_range(1..=6)
        };
        let mut module = random_module(
            rng,
            &format!("M{}", i + 1),
            vec![owned[i].clone()],
            inputs,
            states,
        );
        if i == 0 {
            agent_inputs = module.inputs.clone();
            if rng.gen_bool(0.2) {
                module.sync.insert(module.inputs[0].name.clone());
            }
        }
        system.push(module);
    }
    let assumption = random_assumption(rng, &system, &agent_inputs, &owned[0]);
    let mut props: Vec<Variable> = vec![owned[0].clone()];
    props.extend(agent_inputs.iter().cloned());
    let p = random_prop(rng, &props);
    let guarantee = match rng.gen_range(0..3) {
        0 => PathFormula::always(p),
        1 => PathFormula::eventually(p),
        _ => PathFormula::until(p, random_prop(rng, &props)),
    };
    Case {
        task: AGTask {
            system,
            premises: vec![Premise {
                agent: "M1".into(),
                guarantee,
                assumption,
                context: Vec::new(),
            }],
            k: 1,
        },
        seed,
    }
}

/// One state per valuation of the agent's inputs, so every move reads a
/// distinct change and the assumption is deterministic.
fn random_assumption(
    rng: &mut StdRng,
    system: &[Module],
    ys: &[Variable],
    own: &Variable,
) -> Assumption {
    let inputs = if rng.gen_bool(0.5) {
        vec![own.clone()]
    } else {
        Vec::new()
    };
    let labels = valuations(ys);
    let states: Vec<State> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| State {
            name: format!("a{i}"),
            label: l.clone(),
        })
        .collect();
    let init_label: Vec<Val> = ys
        .iter()
        .map(|y| {
            let owner = system
                .iter()
                .find(|m| m.vars.iter().any(|v| v.name == y.name))
                .unwrap();
            let pos = owner.var_index(&y.name).unwrap();
            owner.states[owner.init].label[pos]
        })
        .collect();
    let init = if rng.gen_bool(0.85) {
        labels.iter().position(|l| *l == init_label).unwrap()
    } else {
        rng.gen_range(0..labels.len())
    };
    let mut m = Module {
        name: "A1".into(),
        vars: ys.to_vec(),
        inputs,
        sync: BTreeSet::new(),
        states,
        init,
        transitions: Vec::new(),
    };
    let n = m.states.len();
    let dense = rng.gen_range(0.3..1.0);
    for q in 0..n {
        for t in 0..n {
            if t != q && rng.gen_bool(dense) {
                let masks = m
                    .inputs
                    .iter()
                    .map(|v| random_mask(rng, v.domain.len()))
                    .collect();
                m.transitions.push(Transition {
                    source: q,
                    guard: Guard { masks },
                    target: t,
                });
            }
        }
    }
    close_with_loops(&mut m);
    let mut accepting: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.7)).collect();
    if accepting.is_empty() {
        accepting.insert(rng.gen_range(0..n));
    }
    Assumption::new(m, accepting).unwrap()
}

/// Exhaustive oracle: the first joint strategy (in enumeration order)
/// under which every (fair) word satisfies `gamma`.
pub fn enumerate_winning(
    c: &ComposedModule,
    agents: &[String],
    gamma: &PathFormula,
    fairness: Option<&Fairness>,
) -> Option<JointStrategy> {
    let comps: Vec<usize> = agents
        .iter()
        .map(|a| c.component_index(a).unwrap())
        .collect();
    let g = explore(c, &comps, &Budget::unlimited()).unwrap();
    let checker = Checker::new(c, &g, gamma, fairness).unwrap();
    all_strategies(c, agents).unwrap().into_iter().find(|s| {
        let p = prune(c, s).unwrap();
        checker.check(&|v, e| p.allows(&g, v, e)).holds
    })
}

/// Copy of the modules whose initial states are the components of `code`.
pub fn started_at(c: &ComposedModule, code: u64) -> Vec<Module> {
    let locals = c.decode(code);
    c.components()
        .iter()
        .zip(locals)
        .map(|(m, q)| {
            let mut m = m.clone();
            m.init = q as usize;
            m
        })
        .collect()
}

/// Every lasso of composite states (stuttering allowed) with
/// `prefix + cycle <= max_len`, starting at the initial state.
pub fn graph_lassos(g: &ExplicitGraph, max_len: usize, limit: usize) -> Vec<Lasso<usize>> {
    let succ = |v: usize| -> Vec<usize> {
        let mut s: Vec<usize> = g.edges(v).map(|e| g.target(e)).collect();
        s.push(v);
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut out = Vec::new();
    let mut path = vec![0usize];
    fn go(
        path: &mut Vec<usize>,
        succ: &dyn Fn(usize) -> Vec<usize>,
        max_len: usize,
        limit: usize,
        out: &mut Vec<Lasso<usize>>,
    ) {
        if out.len() >= limit {
            return;
        }
        let last = *path.last().unwrap();
        let next = succ(last);
        for l in 0..path.len() {
            if next.contains(&path[l]) {
                out.push(Lasso::new(path[..l].to_vec(), path[l..].to_vec()).unwrap());
            }
        }
        if path.len() < max_len {
            for w in next {
                path.push(w);
                go(path, succ, max_len, limit, out);
                path.pop();
            }
        }
    }
    go(&mut path, &succ, max_len, limit, &mut out);
    out
}

/// Brute-force curtailment test over explicit block boundaries. Blocks are
/// opened one position at a time; success is a repeat of the folded
/// (block, position) pair at two openings past both prefixes, which makes
/// the boundary sequence periodic from there. Blocks longer than the
/// prefix plus cycle of `u` can always be shortened by one cycle.
pub fn curtailment_oracle<T: PartialEq>(v: &Lasso<T>, u: &Lasso<T>) -> bool {
    let fold = |l: &Lasso<T>, i: usize| {
        if i < l.prefix.len() {
            i
        } else {
            l.prefix.len() + (i - l.prefix.len()) % l.cycle.len()
        }
    };
    let cap = u.positions();
    fn go<T: PartialEq>(
        v: &Lasso<T>,
        u: &Lasso<T>,
        i: usize,
        k: usize,
        len: usize,
        cap: usize,
        opens: &mut Vec<(usize, usize)>,
        fold: &dyn Fn(&Lasso<T>, usize) -> usize,
    ) -> bool {
        // Position k belongs to block i.
        if v.at(i) != u.at(k) {
            return false;
        }
        if len == 1 && i >= v.prefix.len() && k >= u.prefix.len() {
            let key = (fold(v, i), fold(u, k));
            if opens.iter().any(|&(a, b)| (fold(v, a), fold(u, b)) == key) {
                return true;
            }
        }
        if len == 1 {
            opens.push((i, k));
        }
        let found = (len < cap && go(v, u, i, k + 1, len + 1, cap, opens, fold))
            || go(v, u, i + 1, k + 1, 1, cap, opens, fold);
        if len == 1 {
            opens.pop();
        }
        found
    }
    let mut opens = Vec::new();
    go(v, u, 0, 0, 1, cap, &mut opens, &fold)
}

/// All lassos over `alphabet` with `1 <= prefix + cycle <= max_len`.
pub fn all_lassos<T: Clone>(alphabet: &[T], max_len: usize) -> Vec<Lasso<T>> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        let words = (0..len).fold(vec![vec![]], |acc: Vec<Vec<T>>, _| {
            acc.into_iter()
                .flat_map(|w| {
                    alphabet.iter().map(move |a| {
                        let mut w = w.clone();
                        w.push(a.clone());
                        w
                    })
                })
                .collect()
        });
        for w in words {
            for start in 0..len {
                out.push(Lasso::new(w[..start].to_vec(), w[start..].to_vec()).unwrap());
            }
        }
    }
    out
}

/// Random path formula of depth at most `depth` over `a, b` in `{0, 1}`.
pub fn random_path_formula(rng: &mut StdRng, depth: usize) -> PathFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => PathFormula::True,
            k => PathFormula::atom(Atom::eq(
                if k % 2 == 0 { "a" } else { "b" },
                (k / 3).to_string(),
            )),
        };
    }
    let sub = |rng: &mut StdRng| random_path_formula(rng, depth - 1);
    match rng.gen_range(0..6) {
        0 => PathFormula::not(sub(rng)),
        1 => PathFormula::and(sub(rng), sub(rng)),
        2 => PathFormula::or(sub(rng), sub(rng)),
        3 => PathFormula::until(sub(rng), sub(rng)),
        4 => PathFormula::always(sub(rng)),
        _ => PathFormula::eventually(sub(rng)),
    }
}

pub fn random_word_lasso(rng: &mut StdRng) -> Lasso<agmc_core::kernel::Valuation> {
    let val = |rng: &mut StdRng| {
        agmc_core::kernel::Valuation::from_pairs([
            ("a", rng.gen_range(0..2).to_string()),
            ("b", rng.gen_range(0..2).to_string()),
        ])
    };
    let p = rng.gen_range(0..=5);
    let c = rng.gen_range(1..=4);
    let prefix = (0..p).map(|_| val(rng)).collect();
    let cycle = (0..c).map(|_| val(rng)).collect();
    Lasso::new(prefix, cycle).unwrap()
}
