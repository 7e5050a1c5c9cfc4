//! Assumptions about an agent's environment, curtailment of sequences and
//! the containment check of an environment against an assumption.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::compose::{explore, Budget, ComposeError, ComposedModule, Owner};
use crate::kernel::{validate_module, KernelError, Lasso, Module, Val, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssumeError {
    #[error("accepting set must be non-empty")]
    EmptyAccepting,
    #[error("accepting state index {0} is out of range")]
    AcceptingOutOfRange(usize),
    #[error("assumption module is invalid: {0}")]
    InvalidModule(String),
    #[error(transparent)]
    Scope(#[from] KernelError),
    #[error("variable `{0}` is not a state variable of the environment")]
    UnboundVariable(String),
    #[error("value `{value}` of `{var}` is not in the environment's domain")]
    ValueMismatch { var: String, value: String },
    #[error("assumption is nondeterministic in state `{state}`: two moves read the same change")]
    Nondeterministic { state: String },
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

/// Module plus a Büchi accepting set over its states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assumption {
    pub module: Module,
    pub accepting: BTreeSet<usize>,
}

impl Assumption {
    pub fn new(module: Module, accepting: BTreeSet<usize>) -> Result<Self, AssumeError> {
        if accepting.is_empty() {
            return Err(AssumeError::EmptyAccepting);
        }
        if let Some(&q) = accepting.iter().find(|&&q| q >= module.states.len()) {
            return Err(AssumeError::AcceptingOutOfRange(q));
        }
        let report = validate_module(&module);
        if !report.is_valid() {
            return Err(AssumeError::InvalidModule(report.violations[0].to_string()));
        }
        Ok(Assumption { module, accepting })
    }

    /// The same assumption with a larger accepting set.
    pub fn with_accepting(&self, accepting: BTreeSet<usize>) -> Result<Self, AssumeError> {
        Assumption::new(self.module.clone(), accepting)
    }
}

/// Block starts of a curtailment, 0-based: `prefix` then `cycle` repeated,
/// each repetition shifted by `shift` positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurtailmentWitness {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
    pub shift: usize,
}

impl CurtailmentWitness {
    /// First `n` block starts.
    pub fn starts(&self, n: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.prefix.iter().copied().take(n).collect();
        let mut round = 0;
        while out.len() < n {
            for &j in &self.cycle {
                if out.len() == n {
                    break;
                }
                out.push(j + round * self.shift);
            }
            round += 1;
        }
        out
    }
}

fn projected(u: &Lasso<Valuation>, y: &BTreeSet<String>) -> Result<Lasso<Valuation>, AssumeError> {
    let f = |x: &Valuation| x.project(y.iter().map(String::as_str));
    Ok(Lasso {
        prefix: u.prefix.iter().map(f).collect::<Result<_, _>>()?,
        cycle: u.cycle.iter().map(f).collect::<Result<_, _>>()?,
    })
}

/// Decides whether `v` is a curtailment of `u` onto `y`: `u|y` splits into
/// consecutive non-empty blocks, block `i` constantly equal to `v_i`.
/// Searches the product of folded positions for a cycle that opens a block.
pub fn is_curtailment(
    v: &Lasso<Valuation>,
    u: &Lasso<Valuation>,
    y: &BTreeSet<String>,
) -> Result<Option<CurtailmentWitness>, AssumeError> {
    let u = projected(u, y)?;
    let v = projected(v, y)?;
    let (nv, nu) = (v.positions(), u.positions());
    let id = |i: usize, k: usize| i * nu + k;
    if v.folded(0) != u.folded(0) {
        return Ok(None);
    }
    // Edge kinds: false = extend the block, true = open a new one.
    let succ = |i: usize, k: usize| {
        let k2 = u.next(k);
        let mut out = Vec::with_capacity(2);
        if v.folded(i) == u.folded(k2) {
            out.push((i, k2, false));
        }
        let i2 = v.next(i);
        if v.folded(i2) == u.folded(k2) {
            out.push((i2, k2, true));
        }
        out
    };
    let mut parent: Vec<Option<(usize, bool)>> = vec![None; nv * nu];
    let mut order = vec![id(0, 0)];
    parent[id(0, 0)] = Some((usize::MAX, false));
    let mut queue = VecDeque::from([(0, 0)]);
    while let Some((i, k)) = queue.pop_front() {
        for (i2, k2, _) in succ(i, k) {
            if parent[id(i2, k2)].is_none() {
                parent[id(i2, k2)] = Some((id(i, k), false));
                order.push(id(i2, k2));
                queue.push_back((i2, k2));
            }
        }
    }
    let mut lists = vec![Vec::new(); nv * nu];
    for &n in &order {
        for (i2, k2, _) in succ(n / nu, n % nu) {
            lists[n].push(id(i2, k2) as u32);
        }
    }
    let g = crate::graph::Csr::from_lists(&lists);
    let (comp, _) = crate::graph::scc(&g);
    let reachable = |n: usize| parent[n].is_some();
    // An opening edge inside one component gives the witness cycle.
    let open = order.iter().find_map(|&n| {
        succ(n / nu, n % nu)
            .into_iter()
            .find(|&(i2, k2, o)| o && comp[id(i2, k2)] == comp[n])
            .map(|(i2, k2, _)| (n, id(i2, k2)))
    });
    let Some((from, to)) = open else {
        return Ok(None);
    };
    let stem =
        crate::graph::bfs_path(&g, &[id(0, 0)], reachable, |n| n == from).expect("reachable");
    let back = crate::graph::bfs_path(&g, &[to], |n| comp[n] == comp[from], |n| n == from)
        .expect("same component");
    let is_open = |a: usize, b: usize| {
        succ(a / nu, a % nu).into_iter().any(|(i2, k2, o)| {
            o && id(i2, k2) == b && !succ(a / nu, a % nu).contains(&(i2, k2, false))
        })
    };
    let mut prefix = vec![0];
    for (t, w) in stem.windows(2).enumerate() {
        if is_open(w[0], w[1]) {
            prefix.push(t + 1);
        }
    }
    // Cycle: from -> to (opening), then back to from.
    let base = stem.len() - 1;
    let mut cycle = vec![base + 1];
    for (t, w) in back.windows(2).enumerate() {
        if is_open(w[0], w[1]) {
            cycle.push(base + 2 + t);
        }
    }
    let shift = back.len();
    Ok(Some(CurtailmentWitness {
        prefix,
        cycle,
        shift,
    }))
}

/// Maximal-block curtailment of `u` onto `y`: consecutive repeats collapse,
/// a constant tail becomes a single looping value.
pub fn curtail_max(
    u: &Lasso<Valuation>,
    y: &BTreeSet<String>,
) -> Result<Lasso<Valuation>, AssumeError> {
    let p = projected(u, y)?;
    let collapse = |xs: &[Valuation]| {
        let mut out: Vec<Valuation> = Vec::new();
        for x in xs {
            if out.last() != Some(x) {
                out.push(x.clone());
            }
        }
        out
    };
    let c = &p.cycle;
    if c.iter().all(|x| x == &c[0]) {
        let mut prefix = collapse(&p.prefix);
        if prefix.last() == Some(&c[0]) {
            prefix.pop();
        }
        return Ok(Lasso::new(prefix, vec![c[0].clone()])?);
    }
    let len = c.len();
    let r = (1..=len)
        .find(|&r| c[(r - 1) % len] != c[r % len])
        .expect("cycle is not constant");
    let mut head = p.prefix.clone();
    head.extend(c[..r].iter().cloned());
    let rotated: Vec<Valuation> = (0..len).map(|j| c[(r + j) % len].clone()).collect();
    Ok(Lasso::new(collapse(&head), collapse(&rotated))?)
}

/// Why containment failed: an env lasso and its curtailment onto the
/// agent's inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentCounterexample {
    pub trace: Lasso<u64>,
    pub curtailed: Lasso<Valuation>,
    /// The assumption had no move for a change (as opposed to being stuck
    /// outside its accepting set).
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentResult {
    pub holds: bool,
    pub counterexample: Option<ContainmentCounterexample>,
    pub env_states: usize,
    pub product_states: usize,
}

/// How the assumption's variables and inputs read the environment.
struct Binding {
    /// Per `y` variable: env var id and assumption variable position.
    y: Vec<(usize, usize)>,
    /// Per assumption input: env var id, or `None` when the environment
    /// does not mention it and any value may be read.
    inputs: Vec<Option<usize>>,
    /// Per assumption state: its `y` values in env indices.
    y_labels: Vec<Vec<Val>>,
    /// Per assumption input domain value: env index.
    input_values: Vec<Vec<Val>>,
}

fn bind(
    env: &ComposedModule,
    a: &Assumption,
    y: &BTreeSet<String>,
) -> Result<Binding, AssumeError> {
    let m = &a.module;
    let mut ys = Vec::new();
    for name in y {
        let pos = m
            .var_index(name)
            .ok_or_else(|| AssumeError::Scope(KernelError::OutOfScope(name.clone())))?;
        let id = env
            .var_id(name)
            .filter(|&i| matches!(env.vars()[i].owner, Owner::Component { .. }))
            .ok_or_else(|| AssumeError::UnboundVariable(name.clone()))?;
        ys.push((id, pos));
    }
    let map_value = |id: usize, var: &str, value: &str| {
        env.vars()[id]
            .domain
            .index_of(value)
            .ok_or_else(|| AssumeError::ValueMismatch {
                var: var.to_string(),
                value: value.to_string(),
            })
    };
    let mut y_labels = Vec::new();
    for st in &m.states {
        let mut row = Vec::new();
        for &(id, pos) in &ys {
            let var = &m.vars[pos];
            row.push(map_value(id, &var.name, var.domain.value(st.label[pos]))?);
        }
        y_labels.push(row);
    }
    let mut inputs = Vec::new();
    let mut input_values = Vec::new();
    for inp in &m.inputs {
        let id = env.var_id(&inp.name);
        inputs.push(id);
        input_values.push(match id {
            Some(id) => inp
                .domain
                .values()
                .iter()
                .map(|v| map_value(id, &inp.name, v))
                .collect::<Result<_, _>>()?,
            None => (0..inp.domain.len() as Val).collect(),
        });
    }
    Ok(Binding {
        y: ys,
        inputs,
        y_labels,
        input_values,
    })
}

/// Rejects assumptions with two moves from one state that read a common
/// input valuation and land on the same `y` values in different states.
fn check_deterministic(a: &Assumption, b: &Binding) -> Result<(), AssumeError> {
    let m = &a.module;
    for q in 0..m.states.len() {
        let moves: Vec<_> = m
            .transitions
            .iter()
            .filter(|t| t.source == q && t.target != q)
            .collect();
        for (i, t1) in moves.iter().enumerate() {
            for t2 in &moves[i + 1..] {
                if t1.target != t2.target
                    && b.y_labels[t1.target] == b.y_labels[t2.target]
                    && t1.guard.intersect(&t2.guard).is_some()
                {
                    return Err(AssumeError::Nondeterministic {
                        state: m.states[q].name.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Does every derived word of `env`, curtailed onto `y`, have an accepting
/// run of `a`? The assumption moves only on steps that change `y`, reading
/// its inputs from the environment before the step; stuttering leaves it in
/// place, so any reachable pair outside the accepting set is a rejecting
/// lasso.
pub fn containment_check(
    env: &ComposedModule,
    a: &Assumption,
    y: &BTreeSet<String>,
    budget: &Budget,
) -> Result<ContainmentResult, AssumeError> {
    let b = bind(env, a, y)?;
    check_deterministic(a, &b)?;
    let g = explore(env, &[], budget)?;
    let m = &a.module;
    let reject = m.states.len();
    let y_of = |code: u64| -> Vec<Val> {
        b.y.iter()
            .map(|&(id, _)| env.value(code, id).expect("y is a state variable"))
            .collect()
    };
    let external_pos: HashMap<usize, usize> = env
        .vars()
        .iter()
        .enumerate()
        .filter_map(|(id, v)| match v.owner {
            Owner::External(e) => Some((id, e)),
            _ => None,
        })
        .collect();
    // Assumption successors on a change, one per concrete input value.
    let step = |q: usize, code: u64, bx: &[u64], target_y: &[Val]| -> Vec<usize> {
        let mut per_input: Vec<Vec<Val>> = Vec::new();
        for (k, &id) in b.inputs.iter().enumerate() {
            let env_values: Vec<Val> = match id.map(|id| (id, external_pos.get(&id))) {
                None => b.input_values[k].clone(),
                Some((_, Some(&e))) => crate::kernel::BitIter(bx[e]).map(|x| x as Val).collect(),
                Some((id, None)) => vec![env.value(code, id).expect("state variable")],
            };
            // Values outside the assumption's input domain have no index.
            let local: Vec<Option<Val>> = env_values
                .iter()
                .map(|&x| {
                    b.input_values[k]
                        .iter()
                        .position(|&w| w == x)
                        .map(|p| p as Val)
                })
                .collect();
            if local.contains(&None) {
                return vec![reject];
            }
            per_input.push(local.into_iter().flatten().collect());
        }
        let mut out = Vec::new();
        let mut alpha = vec![0; per_input.len()];
        let mut idx = vec![0usize; per_input.len()];
        loop {
            for (k, vals) in per_input.iter().enumerate() {
                alpha[k] = vals[idx[k]];
            }
            let next = m
                .transitions
                .iter()
                .find(|t| {
                    t.source == q
                        && t.target != q
                        && b.y_labels[t.target] == target_y
                        && t.guard.admits(&alpha)
                })
                .map_or(reject, |t| t.target);
            out.push(next);
            let mut k = 0;
            loop {
                if k == idx.len() {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                idx[k] += 1;
                if idx[k] < per_input[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    };
    let width = m.states.len() + 1;
    let mut parent: Vec<u32> = vec![u32::MAX; g.len() * width];
    let init_q = if b.y_labels[m.init] == y_of(g.codes[0]) {
        m.init
    } else {
        reject
    };
    let start = init_q;
    parent[start] = start as u32;
    let mut queue = VecDeque::from([start]);
    let mut product_states = 1;
    let mut bad = None;
    while let Some(n) = queue.pop_front() {
        let (v, q) = (n / width, n % width);
        if q == reject || !a.accepting.contains(&q) {
            bad = Some(n);
            break;
        }
        let code = g.codes[v];
        let here = y_of(code);
        for e in g.edges(v) {
            let w = g.target(e);
            let there = y_of(g.codes[w]);
            let nexts = if there == here {
                vec![q]
            } else {
                step(q, code, &g.boxes[g.ext[e] as usize], &there)
            };
            for q2 in nexts {
                let k = w * width + q2;
                if parent[k] == u32::MAX {
                    parent[k] = n as u32;
                    product_states += 1;
                    queue.push_back(k);
                }
            }
        }
    }
    let counterexample = bad.map(|n| {
        let mut path = vec![n];
        let mut cur = n;
        while parent[cur] as usize != cur {
            cur = parent[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        let codes: Vec<u64> = path.iter().map(|&k| g.codes[k / width]).collect();
        let trace = Lasso::new(
            codes[..codes.len() - 1].to_vec(),
            vec![codes[codes.len() - 1]],
        )
        .expect("cycle is non-empty");
        let word = trace.map(|&code| env.label(code));
        let curtailed = curtail_max(&word, y).expect("y is in scope");
        ContainmentCounterexample {
            trace,
            curtailed,
            rejected: n % width == reject,
        }
    });
    Ok(ContainmentResult {
        holds: counterexample.is_none(),
        counterexample,
        env_states: g.len(),
        product_states,
    })
}

/// Direct run of the assumption along one env lasso, for cross-checking
/// [`containment_check`]. Each position carries the values of the
/// environment's unresolved inputs read when leaving it.
pub fn accepts_env_lasso(
    env: &ComposedModule,
    a: &Assumption,
    y: &BTreeSet<String>,
    trace: &Lasso<(u64, Vec<Val>)>,
) -> Result<bool, AssumeError> {
    let b = bind(env, a, y)?;
    check_deterministic(a, &b)?;
    let m = &a.module;
    let y_of = |code: u64| -> Vec<Val> {
        b.y.iter()
            .map(|&(id, _)| env.value(code, id).expect("state variable"))
            .collect()
    };
    // Inputs the environment does not mention read their first value.
    let read = |code: u64, ext: &[Val], id: Option<usize>| match id
        .map(|id| (id, &env.vars()[id].owner))
    {
        None => 0,
        Some((_, Owner::External(e))) => ext[*e],
        Some((id, Owner::Component { .. })) => env.value(code, id).expect("state variable"),
    };
    if b.y_labels[m.init] != y_of(trace.folded(0).0) {
        return Ok(false);
    }
    let mut q = m.init;
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut history = Vec::new();
    let mut pos = 0;
    loop {
        if pos >= trace.prefix.len() {
            if let Some(&at) = seen.get(&(pos, q)) {
                return Ok(history[at..].iter().any(|s| a.accepting.contains(s)));
            }
            seen.insert((pos, q), history.len());
        }
        history.push(q);
        let (code, ext) = trace.folded(pos);
        let next = trace.next(pos);
        let there = y_of(trace.folded(next).0);
        if y_of(*code) != there {
            let alpha: Option<Vec<Val>> = b
                .inputs
                .iter()
                .enumerate()
                .map(|(k, &id)| {
                    let x = read(*code, ext, id);
                    b.input_values[k]
                        .iter()
                        .position(|&w| w == x)
                        .map(|p| p as Val)
                })
                .collect();
            let Some(alpha) = alpha else { return Ok(false) };
            match m.transitions.iter().find(|t| {
                t.source == q
                    && t.target != q
                    && b.y_labels[t.target] == there
                    && t.guard.admits(&alpha)
            }) {
                Some(t) => q = t.target,
                None => return Ok(false),
            }
        }
        pos = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_system, gen_voter_assumption, voter_name};
    use crate::compose::{compose, neighborhood};
    use crate::mdl::{parse_assumption, parse_module};

    fn word(xs: &str) -> Vec<Valuation> {
        xs.chars()
            .map(|c| Valuation::from_pairs([("y", c.to_string())]))
            .collect()
    }

    fn lasso(prefix: &str, cycle: &str) -> Lasso<Valuation> {
        Lasso::new(word(prefix), word(cycle)).unwrap()
    }

    fn y() -> BTreeSet<String> {
        BTreeSet::from(["y".to_string()])
    }

    /// Checks the witness against both sequences on a long window.
    fn witness_ok(w: &CurtailmentWitness, v: &Lasso<Valuation>, u: &Lasso<Valuation>) -> bool {
        let starts = w.starts(40);
        starts[0] == 0
            && starts.windows(2).all(|p| p[0] < p[1])
            && starts
                .windows(2)
                .enumerate()
                .all(|(i, p)| (p[0]..p[1]).all(|k| u.at(k) == v.at(i)))
    }

    #[test]
    fn identity_curtailment() {
        let u = lasso("ab", "ba");
        let w = is_curtailment(&u, &u, &y()).unwrap().unwrap();
        assert!(witness_ok(&w, &u, &u));
    }

    #[test]
    fn block_matching() {
        let u = lasso("aaab", "b");
        let v = lasso("a", "b");
        let w = is_curtailment(&v, &u, &y()).unwrap().unwrap();
        assert!(witness_ok(&w, &v, &u));
        assert_eq!(w.starts(2), vec![0, 3]);
    }

    #[test]
    fn mismatched_block() {
        let u = lasso("aba", "a");
        let v = lasso("aab", "a");
        assert!(is_curtailment(&v, &u, &y()).unwrap().is_none());
    }

    #[test]
    fn out_of_scope() {
        let u = lasso("a", "b");
        let z = BTreeSet::from(["z".to_string()]);
        assert!(matches!(
            is_curtailment(&u, &u, &z),
            Err(AssumeError::Scope(_))
        ));
    }

    #[test]
    fn maximal_curtailment() {
        assert_eq!(
            curtail_max(&lasso("aaa", "a"), &y()).unwrap(),
            lasso("", "a")
        );
        assert_eq!(
            curtail_max(&lasso("aabba", "a"), &y()).unwrap(),
            lasso("ab", "a")
        );
        let u = lasso("ab", "aab");
        let c = curtail_max(&u, &y()).unwrap();
        assert!(is_curtailment(&c, &u, &y()).unwrap().is_some());
        let all: Vec<&Valuation> = c.prefix.iter().chain(&c.cycle).collect();
        assert!(all.windows(2).all(|p| p[0] != p[1]));
        assert_ne!(
            c.cycle.last(),
            c.cycle.first().filter(|_| c.cycle.len() > 1)
        );
    }

    const LOOPER: &str = "module E { var y: {a,b}; state s [y=a]; init s; trans s -> s on *; }";

    #[test]
    fn universal_assumption_accepts() {
        let env = compose(&[parse_module(LOOPER).unwrap()]).unwrap();
        let a = parse_assumption(
            "assumption U { var y: {a,b}; state p [y=a]; state q [y=b]; init p; \
             trans p -> q on *; trans q -> p on *; accepting {p, q}; }",
        )
        .unwrap();
        let r = containment_check(&env, &a, &y(), &Budget::unlimited()).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn constant_word_rejected() {
        let env = compose(&[parse_module(LOOPER).unwrap()]).unwrap();
        let a = parse_assumption(
            "assumption C { var y: {a,b}; state p [y=a]; state q [y=b]; init p; \
             trans p -> q on *; trans q -> q on *; accepting {q}; }",
        )
        .unwrap();
        let r = containment_check(&env, &a, &y(), &Budget::unlimited()).unwrap();
        assert!(!r.holds);
        let cex = r.counterexample.unwrap();
        assert_eq!(cex.trace.cycle.len(), 1);
        assert_eq!(cex.curtailed, lasso("", "a"));
        assert!(!cex.rejected);
    }

    #[test]
    fn nondeterminism_detected() {
        let env = compose(&[parse_module(LOOPER).unwrap()]).unwrap();
        let a = parse_assumption(
            "assumption N { var y: {a,b}; var z: {0,1}; state p [y=a,z=0]; state q [y=b,z=0]; state r [y=b,z=1]; \
             init p; trans p -> q on *; trans p -> r on *; trans q -> q on *; trans r -> r on *; accepting {p}; }",
        )
        .unwrap();
        assert!(matches!(
            containment_check(&env, &a, &y(), &Budget::unlimited()),
            Err(AssumeError::Nondeterministic { .. })
        ));
    }

    #[test]
    fn voting_abstraction_covers_coercer() {
        for n in 2..4 {
            let system = gen_system(n);
            let env = compose(&neighborhood(&system, &voter_name(1), 1).unwrap()).unwrap();
            let a = gen_voter_assumption(n, 1);
            let ys = BTreeSet::from(["pun_1".to_string()]);
            let r = containment_check(&env, &a, &ys, &Budget::unlimited()).unwrap();
            assert!(r.holds, "n={n}: {:?}", r.counterexample);
        }
    }

    #[test]
    fn stricter_abstraction_fails() {
        let system = gen_system(2);
        let env = compose(&neighborhood(&system, &voter_name(1), 1).unwrap()).unwrap();
        let mut a = gen_voter_assumption(2, 1);
        // Coercer that never spares.
        a.module
            .transitions
            .retain(|t| !(t.source == 0 && t.target == 2));
        let a = Assumption {
            module: a.module,
            accepting: a.accepting,
        };
        let ys = BTreeSet::from(["pun_1".to_string()]);
        let r = containment_check(&env, &a, &ys, &Budget::unlimited()).unwrap();
        assert!(!r.holds);
        assert!(r.counterexample.unwrap().rejected);
    }

    #[test]
    fn assumption_validation() {
        let m = parse_module(LOOPER).unwrap();
        assert_eq!(
            Assumption::new(m.clone(), BTreeSet::new()),
            Err(AssumeError::EmptyAccepting)
        );
        assert_eq!(
            Assumption::new(m, BTreeSet::from([3])),
            Err(AssumeError::AcceptingOutOfRange(3))
        );
    }
}
