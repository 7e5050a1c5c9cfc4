//! Formula syntax trees, the exact lasso evaluator, and the tableau
//! translation of negated path formulas into Büchi automata.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::graph::{cyclic_components, scc, Csr};
use crate::kernel::{Lasso, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("atom must constrain at least one variable")]
    EmptyAtom,
    #[error("variable `{0}` is constrained twice in one atom")]
    RepeatedVariable(String),
    #[error("variable `{0}` is not in the scope of the valuation")]
    OutOfScope(String),
}

/// Valuation predicate `p(Y)`: a conjunction of variable equalities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    constraint: BTreeMap<String, String>,
}

impl Atom {
    pub fn new<I, K, V>(pairs: I) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut constraint = BTreeMap::new();
        for (k, v) in pairs {
            let k = k.into();
            if constraint.contains_key(&k) {
                return Err(LogicError::RepeatedVariable(k));
            }
            constraint.insert(k, v.into());
        }
        if constraint.is_empty() {
            return Err(LogicError::EmptyAtom);
        }
        Ok(Atom { constraint })
    }

    pub fn eq(var: impl Into<String>, value: impl Into<String>) -> Self {
        Atom {
            constraint: BTreeMap::from([(var.into(), value.into())]),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.constraint
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.constraint.keys().map(String::as_str)
    }

    /// Same constraint with variables renamed by `f`.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Atom {
        Atom {
            constraint: self
                .constraint
                .iter()
                .map(|(k, v)| (f(k), v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.constraint.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// True iff `v` agrees with every equality of `p`.
pub fn eval_atom(p: &Atom, v: &Valuation) -> Result<bool, LogicError> {
    let mut all = true;
    for (k, want) in p.iter() {
        match v.get(k) {
            None => return Err(LogicError::OutOfScope(k.to_string())),
            Some(have) => all &= have == want,
        }
    }
    Ok(all)
}

/// Temporal formula over atoms with negation, conjunction and strong until.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathFormula {
    True,
    Atom(Atom),
    Not(Box<PathFormula>),
    And(Box<PathFormula>, Box<PathFormula>),
    Until(Box<PathFormula>, Box<PathFormula>),
}

impl PathFormula {
    pub fn atom(a: Atom) -> Self {
        PathFormula::Atom(a)
    }

    pub fn not(f: PathFormula) -> Self {
        PathFormula::Not(Box::new(f))
    }

    pub fn and(a: PathFormula, b: PathFormula) -> Self {
        PathFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: PathFormula, b: PathFormula) -> Self {
        Self::not(Self::and(Self::not(a), Self::not(b)))
    }

    pub fn until(a: PathFormula, b: PathFormula) -> Self {
        PathFormula::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: PathFormula) -> Self {
        Self::until(PathFormula::True, f)
    }

    pub fn always(f: PathFormula) -> Self {
        Self::not(Self::eventually(Self::not(f)))
    }

    pub fn false_() -> Self {
        Self::not(PathFormula::True)
    }

    /// Whether the formula contains no temporal operator.
    pub fn is_propositional(&self) -> bool {
        match self {
            PathFormula::True | PathFormula::Atom(_) => true,
            PathFormula::Not(a) => a.is_propositional(),
            PathFormula::And(a, b) => a.is_propositional() && b.is_propositional(),
            PathFormula::Until(..) => false,
        }
    }

    /// Every variable mentioned by an atom.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            PathFormula::True => {}
            PathFormula::Atom(a) => out.extend(a.vars().map(String::from)),
            PathFormula::Not(a) => a.collect_vars(out),
            PathFormula::And(a, b) | PathFormula::Until(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PathFormula::True | PathFormula::Atom(_) => 0,
            PathFormula::Not(a) => 1 + a.depth(),
            PathFormula::And(a, b) | PathFormula::Until(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Atom) -> PathFormula {
        match self {
            PathFormula::True => PathFormula::True,
            PathFormula::Atom(a) => PathFormula::Atom(f(a)),
            PathFormula::Not(a) => Self::not(a.map_atoms(f)),
            PathFormula::And(a, b) => Self::and(a.map_atoms(f), b.map_atoms(f)),
            PathFormula::Until(a, b) => Self::until(a.map_atoms(f), b.map_atoms(f)),
        }
    }

    /// Recognises `G p` written as `!(true U !p)`.
    pub fn as_always(&self) -> Option<&PathFormula> {
        if let PathFormula::Not(inner) = self {
            if let PathFormula::Until(l, r) = inner.as_ref() {
                if **l == PathFormula::True {
                    if let PathFormula::Not(p) = r.as_ref() {
                        return Some(p);
                    }
                }
            }
        }
        None
    }

    /// Recognises `F p` written as `true U p`.
    pub fn as_eventually(&self) -> Option<&PathFormula> {
        if let PathFormula::Until(l, r) = self {
            if **l == PathFormula::True {
                return Some(r);
            }
        }
        None
    }

    /// Recognises `a | b` written as `!(!a & !b)`.
    pub fn as_or(&self) -> Option<(&PathFormula, &PathFormula)> {
        if let PathFormula::Not(inner) = self {
            if let PathFormula::And(l, r) = inner.as_ref() {
                if let (PathFormula::Not(a), PathFormula::Not(b)) = (l.as_ref(), r.as_ref()) {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

/// Top-level formula: boolean combination of atoms and coalition
/// modalities over path formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateFormula {
    True,
    Atom(Atom),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Coalition {
        agents: Vec<String>,
        path: PathFormula,
    },
}

impl StateFormula {
    pub fn not(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StateFormula, b: StateFormula) -> Self {
        Self::not(Self::and(Self::not(a), Self::not(b)))
    }

    pub fn coalition(agents: Vec<String>, path: PathFormula) -> Self {
        StateFormula::Coalition { agents, path }
    }

    /// Every variable mentioned by an atom.
    pub fn variables(&self) -> BTreeSet<String> {
        match self {
            StateFormula::True => BTreeSet::new(),
            StateFormula::Atom(a) => a.vars().map(String::from).collect(),
            StateFormula::Not(a) => a.variables(),
            StateFormula::And(a, b) => {
                let mut s = a.variables();
                s.extend(b.variables());
                s
            }
            StateFormula::Coalition { path, .. } => path.variables(),
        }
    }
}

/// Exact truth value of `gamma` on the infinite word `w` (dynamic
/// programming over the folded positions of the lasso).
pub fn eval_path_lasso(gamma: &PathFormula, w: &Lasso<Valuation>) -> Result<bool, LogicError> {
    Ok(eval_positions(gamma, w)?[0])
}

fn eval_positions(gamma: &PathFormula, w: &Lasso<Valuation>) -> Result<Vec<bool>, LogicError> {
    let n = w.positions();
    Ok(match gamma {
        PathFormula::True => vec![true; n],
        PathFormula::Atom(a) => (0..n)
            .map(|i| eval_atom(a, w.folded(i)))
            .collect::<Result<_, _>>()?,
        PathFormula::Not(a) => eval_positions(a, w)?.into_iter().map(|b| !b).collect(),
        PathFormula::And(a, b) => {
            let x = eval_positions(a, w)?;
            let y = eval_positions(b, w)?;
            x.into_iter().zip(y).map(|(p, q)| p && q).collect()
        }
        PathFormula::Until(a, b) => {
            let x = eval_positions(a, w)?;
            let y = eval_positions(b, w)?;
            let mut val = vec![false; n];
            loop {
                let mut changed = false;
                for i in (0..n).rev() {
                    let v = y[i] || (x[i] && val[w.next(i)]);
                    if v != val[i] {
                        val[i] = v;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            val
        }
    })
}

/// A possibly negated atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn holds(&self, v: &Valuation) -> Result<bool, LogicError> {
        Ok(eval_atom(&self.atom, v)? == self.positive)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "({})", self.atom)
        } else {
            write!(f, "!({})", self.atom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiState {
    /// Constraint on the letter read while in this state.
    pub guard: Vec<Literal>,
    pub successors: Vec<usize>,
    pub accepting: bool,
}

/// Büchi automaton with state-based letter guards: a run `q0 q1 ...` over
/// `w0 w1 ...` needs `q0` initial, `q(i+1)` a successor of `qi`, and every
/// `wi` satisfying the guard of `qi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    pub states: Vec<BuchiState>,
    pub initial: Vec<usize>,
}

impl BuchiAutomaton {
    pub fn guard_holds(&self, q: usize, v: &Valuation) -> Result<bool, LogicError> {
        for lit in &self.states[q].guard {
            if !lit.holds(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for BuchiAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "automaton {} states", self.states.len())?;
        writeln!(f, "initial {:?}", self.initial)?;
        for (i, s) in self.states.iter().enumerate() {
            let guard: Vec<String> = s.guard.iter().map(ToString::to_string).collect();
            writeln!(
                f,
                "  {}{} [{}] -> {:?}",
                i,
                if s.accepting { "*" } else { "" },
                guard.join(" & "),
                s.successors
            )?;
        }
        Ok(())
    }
}

/// Negation normal form with release as the dual of until.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Nnf {
    True,
    False,
    Lit(Literal),
    And(usize, usize),
    Or(usize, usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    ids: HashMap<Nnf, usize>,
}

impl Arena {
    fn intern(&mut self, n: Nnf) -> usize {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(n.clone());
        self.ids.insert(n, id);
        id
    }

    fn build(&mut self, f: &PathFormula, positive: bool) -> usize {
        match (f, positive) {
            (PathFormula::True, true) => self.intern(Nnf::True),
            (PathFormula::True, false) => self.intern(Nnf::False),
            (PathFormula::Atom(a), p) => self.intern(Nnf::Lit(Literal {
                atom: a.clone(),
                positive: p,
            })),
            (PathFormula::Not(a), p) => self.build(a, !p),
            (PathFormula::And(a, b), true) => {
                let (x, y) = (self.build(a, true), self.build(b, true));
                self.intern(Nnf::And(x, y))
            }
            (PathFormula::And(a, b), false) => {
                let (x, y) = (self.build(a, false), self.build(b, false));
                self.intern(Nnf::Or(x, y))
            }
            (PathFormula::Until(a, b), true) => {
                let (x, y) = (self.build(a, true), self.build(b, true));
                self.intern(Nnf::Until(x, y))
            }
            (PathFormula::Until(a, b), false) => {
                let (x, y) = (self.build(a, false), self.build(b, false));
                self.intern(Nnf::Release(x, y))
            }
        }
    }
}

#[derive(Clone)]
struct TableauNode {
    incoming: BTreeSet<usize>,
    new: BTreeSet<usize>,
    old: BTreeSet<usize>,
    next: BTreeSet<usize>,
}

const INIT: usize = usize::MAX;

struct Tableau<'a> {
    arena: &'a Arena,
    done: Vec<TableauNode>,
}

impl Tableau<'_> {
    fn contradicts(&self, lit: &Literal, old: &BTreeSet<usize>) -> bool {
        old.iter().any(|&o| match &self.arena.nodes[o] {
            Nnf::False => true,
            Nnf::Lit(other) => {
                if other.atom == lit.atom && other.positive != lit.positive {
                    return true;
                }
                if lit.positive && other.positive {
                    return lit
                        .atom
                        .iter()
                        .any(|(k, v)| other.atom.iter().any(|(k2, v2)| k == k2 && v != v2));
                }
                false
            }
            _ => false,
        })
    }

    fn expand(&mut self, mut node: TableauNode) {
        loop {
            let Some(&eta) = node.new.iter().next() else {
                break;
            };
            node.new.remove(&eta);
            if node.old.contains(&eta) {
                continue;
            }
            match self.arena.nodes[eta].clone() {
                Nnf::False => return,
                Nnf::True => {
                    node.old.insert(eta);
                }
                Nnf::Lit(lit) => {
                    if self.contradicts(&lit, &node.old) {
                        return;
                    }
                    node.old.insert(eta);
                }
                Nnf::And(a, b) => {
                    node.old.insert(eta);
                    for x in [a, b] {
                        if !node.old.contains(&x) {
                            node.new.insert(x);
                        }
                    }
                }
                Nnf::Or(a, b) => {
                    node.old.insert(eta);
                    let mut other = node.clone();
                    if !other.old.contains(&b) {
                        other.new.insert(b);
                    }
                    if !node.old.contains(&a) {
                        node.new.insert(a);
                    }
                    self.expand(other);
                }
                Nnf::Until(a, b) => {
                    node.old.insert(eta);
                    let mut other = node.clone();
                    if !other.old.contains(&b) {
                        other.new.insert(b);
                    }
                    if !node.old.contains(&a) {
                        node.new.insert(a);
                    }
                    node.next.insert(eta);
                    self.expand(other);
                }
                Nnf::Release(a, b) => {
                    node.old.insert(eta);
                    let mut other = node.clone();
                    for x in [a, b] {
                        if !other.old.contains(&x) {
                            other.new.insert(x);
                        }
                    }
                    if !node.old.contains(&b) {
                        node.new.insert(b);
                    }
                    node.next.insert(eta);
                    self.expand(other);
                }
            }
        }
        if let Some(existing) = self
            .done
            .iter_mut()
            .find(|d| d.old == node.old && d.next == node.next)
        {
            existing.incoming.extend(node.incoming.iter().copied());
            return;
        }
        let id = self.done.len();
        let next = node.next.clone();
        self.done.push(node);
        self.expand(TableauNode {
            incoming: BTreeSet::from([id]),
            new: next,
            old: BTreeSet::new(),
            next: BTreeSet::new(),
        });
    }
}

/// Translates `gamma` into an automaton accepting exactly the words that
/// violate it.
pub fn negate_to_buchi(gamma: &PathFormula) -> BuchiAutomaton {
    let mut arena = Arena::default();
    let root = arena.build(gamma, false);
    let mut tab = Tableau {
        arena: &arena,
        done: Vec::new(),
    };
    tab.expand(TableauNode {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    });
    let nodes = tab.done;
    let untils: Vec<(usize, usize)> = arena
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match n {
            Nnf::Until(_, b) => Some((i, *b)),
            _ => None,
        })
        .collect();
    let in_set = |n: &TableauNode, j: usize| {
        let (u, b) = untils[j];
        !n.old.contains(&u) || n.old.contains(&b)
    };
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut initial_nodes = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        for &src in &n.incoming {
            if src == INIT {
                initial_nodes.push(i);
            } else {
                succ[src].push(i);
            }
        }
    }
    let guard_of = |n: &TableauNode| -> Vec<Literal> {
        n.old
            .iter()
            .filter_map(|&o| match &arena.nodes[o] {
                Nnf::Lit(l) => Some(l.clone()),
                _ => None,
            })
            .collect()
    };
    let k = untils.len();
    let member: Vec<Vec<bool>> = nodes
        .iter()
        .map(|n| (0..k).map(|j| in_set(n, j)).collect())
        .collect();
    let mut deg = Degeneralized {
        index: HashMap::new(),
        keys: Vec::new(),
        states: Vec::new(),
        guards: nodes.iter().map(guard_of).collect(),
        accepting0: member
            .iter()
            .map(|m| m.first().copied().unwrap_or(true))
            .collect(),
    };
    let initial: Vec<usize> = initial_nodes.iter().map(|&n| deg.intern(n, 0)).collect();
    let mut done = 0;
    while done < deg.states.len() {
        let (n, j) = deg.keys[done];
        let j2 = if k > 0 && member[n][j] {
            (j + 1) % k
        } else {
            j
        };
        let mut out: Vec<usize> = succ[n].iter().map(|&m| deg.intern(m, j2)).collect();
        out.sort_unstable();
        out.dedup();
        deg.states[done].successors = out;
        done += 1;
    }
    BuchiAutomaton {
        states: deg.states,
        initial,
    }
}

/// Counter construction turning one acceptance set per until into one.
struct Degeneralized {
    index: HashMap<(usize, usize), usize>,
    keys: Vec<(usize, usize)>,
    states: Vec<BuchiState>,
    guards: Vec<Vec<Literal>>,
    accepting0: Vec<bool>,
}

impl Degeneralized {
    fn intern(&mut self, n: usize, j: usize) -> usize {
        if let Some(&id) = self.index.get(&(n, j)) {
            return id;
        }
        let id = self.states.len();
        self.states.push(BuchiState {
            guard: self.guards[n].clone(),
            successors: Vec::new(),
            accepting: j == 0 && self.accepting0[n],
        });
        self.keys.push((n, j));
        self.index.insert((n, j), id);
        id
    }
}

/// True iff some run of `a` over `w` visits an accepting state infinitely
/// often.
pub fn buchi_accepts_lasso(a: &BuchiAutomaton, w: &Lasso<Valuation>) -> Result<bool, LogicError> {
    let n = w.positions();
    let m = a.states.len();
    let mut ok = vec![false; n * m];
    for p in 0..n {
        for q in 0..m {
            ok[p * m + q] = a.guard_holds(q, w.folded(p))?;
        }
    }
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n * m];
    for p in 0..n {
        let np = w.next(p);
        for q in 0..m {
            if !ok[p * m + q] {
                continue;
            }
            for &q2 in &a.states[q].successors {
                if ok[np * m + q2] {
                    lists[p * m + q].push((np * m + q2) as u32);
                }
            }
        }
    }
    let g = Csr::from_lists(&lists);
    let starts: Vec<usize> = a.initial.iter().copied().filter(|&q| ok[q]).collect();
    let mut reach = vec![false; n * m];
    let mut stack: Vec<usize> = starts.clone();
    for &s in &starts {
        reach[s] = true;
    }
    while let Some(v) = stack.pop() {
        for &w2 in g.succ(v) {
            if !reach[w2 as usize] {
                reach[w2 as usize] = true;
                stack.push(w2 as usize);
            }
        }
    }
    let (comp, count) = scc(&g);
    let cyclic = cyclic_components(&g, &comp, count);
    Ok((0..n * m).any(|v| reach[v] && a.states[v % m].accepting && cyclic[comp[v] as usize]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn val(pairs: &[(&str, &str)]) -> Valuation {
        Valuation::from_pairs(pairs.iter().copied())
    }

    fn p() -> PathFormula {
        PathFormula::atom(Atom::eq("x", "a"))
    }

    fn q() -> PathFormula {
        PathFormula::atom(Atom::eq("y", "a"))
    }

    /// Word over `x`, `y` from strings of `a`/`b` pairs.
    fn word(prefix: &[&str], cycle: &[&str]) -> Lasso<Valuation> {
        let conv = |s: &&str| {
            let c: Vec<char> = s.chars().collect();
            val(&[("x", &c[0].to_string()), ("y", &c[1].to_string())])
        };
        Lasso::new(
            prefix.iter().map(conv).collect(),
            cycle.iter().map(conv).collect(),
        )
        .unwrap()
    }

    #[test]
    fn atoms() {
        let v = val(&[("vote_1", "one"), ("pstatus_1", "none")]);
        assert!(eval_atom(&Atom::eq("vote_1", "one"), &v).unwrap());
        assert!(!eval_atom(&Atom::eq("vote_1", "two"), &v).unwrap());
        let two = Atom::new([("vote_1", "one"), ("pstatus_1", "true")]).unwrap();
        assert!(!eval_atom(&two, &v).unwrap());
        assert!(matches!(
            eval_atom(&Atom::eq("other", "x"), &v),
            Err(LogicError::OutOfScope(_))
        ));
        assert!(matches!(
            Atom::new(Vec::<(String, String)>::new()),
            Err(LogicError::EmptyAtom)
        ));
    }

    #[test]
    fn lasso_semantics() {
        assert!(eval_path_lasso(&PathFormula::always(p()), &word(&["aa"], &["ab", "aa"])).unwrap());
        let until = PathFormula::until(p(), q());
        assert!(eval_path_lasso(&until, &word(&["ab", "ab", "ab", "ba"], &["bb"])).unwrap());
        assert!(!eval_path_lasso(&until, &word(&["ab", "bb", "ab", "ba"], &["bb"])).unwrap());
        let ev = PathFormula::eventually(q());
        assert!(!eval_path_lasso(&ev, &word(&["ab", "bb"], &["ab"])).unwrap());
        assert!(eval_path_lasso(&ev, &word(&["ab"], &["bb", "ba"])).unwrap());
    }

    #[test]
    fn negation_of_always() {
        let a = negate_to_buchi(&PathFormula::always(p()));
        assert!(buchi_accepts_lasso(&a, &word(&["aa", "ba"], &["aa"])).unwrap());
        assert!(!buchi_accepts_lasso(&a, &word(&["aa"], &["ab"])).unwrap());
        let b = negate_to_buchi(&PathFormula::until(PathFormula::True, q()));
        assert!(buchi_accepts_lasso(&b, &word(&["ab"], &["bb"])).unwrap());
        assert!(!buchi_accepts_lasso(&b, &word(&["ab"], &["bb", "ba"])).unwrap());
        assert!(!a.to_string().is_empty());
    }

    #[test]
    fn all_accepting_automaton() {
        let a = BuchiAutomaton {
            states: vec![BuchiState {
                guard: vec![],
                successors: vec![0],
                accepting: true,
            }],
            initial: vec![0],
        };
        assert!(buchi_accepts_lasso(&a, &word(&[], &["aa"])).unwrap());
        let blocked = BuchiAutomaton {
            states: vec![BuchiState {
                guard: vec![Literal {
                    atom: Atom::eq("x", "b"),
                    positive: true,
                }],
                successors: vec![0],
                accepting: true,
            }],
            initial: vec![0],
        };
        assert!(!buchi_accepts_lasso(&blocked, &word(&[], &["aa"])).unwrap());
    }

    fn formula() -> impl Strategy<Value = PathFormula> {
        let leaf = prop_oneof![
            Just(PathFormula::True),
            (0..2usize, 0..2usize)
                .prop_map(|(v, d)| { PathFormula::atom(Atom::eq(["x", "y"][v], ["a", "b"][d])) }),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(PathFormula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| PathFormula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| PathFormula::until(a, b)),
                inner.clone().prop_map(PathFormula::always),
                inner.prop_map(PathFormula::eventually),
            ]
        })
    }

    fn letter() -> impl Strategy<Value = Valuation> {
        (0..2usize, 0..2usize).prop_map(|(x, y)| val(&[("x", ["a", "b"][x]), ("y", ["a", "b"][y])]))
    }

    fn lasso() -> impl Strategy<Value = Lasso<Valuation>> {
        (
            prop::collection::vec(letter(), 0..=5),
            prop::collection::vec(letter(), 1..=4),
        )
            .prop_map(|(p, c)| Lasso::new(p, c).unwrap())
    }

    /// Runs explored as simple paths in the position-state product; a run
    /// is accepting when a back edge closes a loop through an accepting
    /// state.
    fn enumerate_runs(a: &BuchiAutomaton, w: &Lasso<Valuation>) -> bool {
        fn go(a: &BuchiAutomaton, w: &Lasso<Valuation>, path: &mut Vec<(usize, usize)>) -> bool {
            let &(pos, q) = path.last().unwrap();
            for &q2 in &a.states[q].successors {
                let next = (w.next(pos), q2);
                if !a.guard_holds(q2, w.folded(next.0)).unwrap() {
                    continue;
                }
                if let Some(j) = path.iter().position(|&x| x == next) {
                    if path[j..].iter().any(|&(_, s)| a.states[s].accepting) {
                        return true;
                    }
                    continue;
                }
                path.push(next);
                if go(a, w, path) {
                    return true;
                }
                path.pop();
            }
            false
        }
        a.initial
            .iter()
            .any(|&q| a.guard_holds(q, w.folded(0)).unwrap() && go(a, w, &mut vec![(0, q)]))
    }

    fn automaton() -> impl Strategy<Value = BuchiAutomaton> {
        (1usize..=4).prop_flat_map(|n| {
            let state = (
                prop::option::of((0..2usize, 0..2usize, any::<bool>())),
                prop::collection::vec(0..n, 0..=3),
                any::<bool>(),
            )
                .prop_map(|(g, successors, accepting)| BuchiState {
                    guard: g
                        .map(|(v, d, positive)| Literal {
                            atom: Atom::eq(["x", "y"][v], ["a", "b"][d]),
                            positive,
                        })
                        .into_iter()
                        .collect(),
                    successors,
                    accepting,
                });
            (
                prop::collection::vec(state, n),
                prop::collection::vec(0..n, 1..=2),
            )
                .prop_map(|(states, initial)| BuchiAutomaton { states, initial })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn translation_matches_semantics(g in formula(), w in lasso()) {
            let a = negate_to_buchi(&g);
            prop_assert_eq!(buchi_accepts_lasso(&a, &w).unwrap(), !eval_path_lasso(&g, &w).unwrap());
        }

        #[test]
        fn rerolling_invariant(g in formula(), w in lasso()) {
            prop_assert_eq!(eval_path_lasso(&g, &w).unwrap(), eval_path_lasso(&g, &w.unrolled()).unwrap());
        }

        #[test]
        fn derived_operators(g in formula(), w in lasso()) {
            let ev = eval_path_lasso(&PathFormula::eventually(g.clone()), &w).unwrap();
            prop_assert_eq!(ev, eval_path_lasso(&PathFormula::until(PathFormula::True, g.clone()), &w).unwrap());
            let al = eval_path_lasso(&PathFormula::always(g.clone()), &w).unwrap();
            let dual = PathFormula::until(PathFormula::True, PathFormula::not(g));
            prop_assert_eq!(al, !eval_path_lasso(&dual, &w).unwrap());
        }

        #[test]
        fn acceptance_matches_run_enumeration(a in automaton(), w in lasso()) {
            prop_assert_eq!(buchi_accepts_lasso(&a, &w).unwrap(), enumerate_runs(&a, &w));
        }
    }
}
