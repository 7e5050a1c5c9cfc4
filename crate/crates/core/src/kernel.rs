//! Variables, valuations, modules, traces and words, plus the structural
//! validator for modules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Largest supported number of values per variable (guards are bitmasks).
pub const MAX_DOMAIN: usize = 64;

/// Value index inside a variable's domain.
pub type Val = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("variable `{0}` is not in scope")]
    OutOfScope(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("value `{value}` is not in the domain of `{var}`")]
    BadValue { var: String, value: String },
    #[error("domain must be non-empty")]
    EmptyDomain,
    #[error("duplicate domain value `{0}`")]
    DuplicateValue(String),
    #[error("domain has {0} values, at most {MAX_DOMAIN} are supported")]
    DomainTooLarge(usize),
    #[error("input valuation must cover exactly the input variables")]
    InputScope,
    #[error("malformed lasso: {0}")]
    Lasso(String),
    #[error("invalid trace at position {position}: {reason}")]
    Trace { position: usize, reason: String },
}

/// Ordered finite set of symbolic constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    values: Vec<String>,
}

impl Domain {
    pub fn new<I, S>(values: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(KernelError::EmptyDomain);
        }
        if values.len() > MAX_DOMAIN {
            return Err(KernelError::DomainTooLarge(values.len()));
        }
        let mut seen = BTreeSet::new();
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(KernelError::DuplicateValue(v.clone()));
            }
        }
        Ok(Domain { values })
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, value: &str) -> Option<Val> {
        self.values
            .iter()
            .position(|v| v == value)
            .map(|i| i as Val)
    }

    pub fn value(&self, index: Val) -> &str {
        &self.values[index as usize]
    }

    /// Bitmask with one bit per value.
    pub fn full_mask(&self) -> u64 {
        if self.values.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.values.len()) - 1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        Variable {
            name: name.into(),
            domain,
        }
    }
}

/// Assignment of values to a set of variables (its scope).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(BTreeMap<String, String>);

impl Valuation {
    pub fn new() -> Self {
        Valuation(BTreeMap::new())
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Valuation(
            pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn insert(&mut self, var: impl Into<String>, value: impl Into<String>) {
        self.0.insert(var.into(), value.into());
    }

    pub fn scope(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restriction to `vars`, which must lie inside the scope.
    pub fn project<'a, I>(&self, vars: I) -> Result<Valuation, KernelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = BTreeMap::new();
        for var in vars {
            let value = self
                .0
                .get(var)
                .ok_or_else(|| KernelError::OutOfScope(var.to_string()))?;
            out.insert(var.to_string(), value.clone());
        }
        Ok(Valuation(out))
    }

    /// True iff both valuations agree on every variable they share.
    pub fn agrees_with(&self, other: &Valuation) -> bool {
        self.0
            .iter()
            .all(|(k, v)| other.0.get(k).is_none_or(|w| w == v))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "]")
    }
}

/// Restriction of `v` to the variable set `vars`.
pub fn project(v: &Valuation, vars: &BTreeSet<String>) -> Result<Valuation, KernelError> {
    v.project(vars.iter().map(String::as_str))
}

/// Input constraint of a transition: one bitmask of admitted values per
/// input variable, in the module's input order. A full mask leaves the
/// variable unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    pub masks: Vec<u64>,
}

impl Guard {
    /// Guard admitting every input valuation.
    pub fn any(inputs: &[Variable]) -> Self {
        Guard {
            masks: inputs.iter().map(|v| v.domain.full_mask()).collect(),
        }
    }

    /// Guard admitting exactly one input valuation.
    pub fn exact(alpha: &[Val]) -> Self {
        Guard {
            masks: alpha.iter().map(|&a| 1u64 << a).collect(),
        }
    }

    pub fn admits(&self, alpha: &[Val]) -> bool {
        self.masks
            .iter()
            .zip(alpha)
            .all(|(m, &a)| m & (1u64 << a) != 0)
    }

    /// Number of input valuations admitted.
    pub fn size(&self) -> u128 {
        self.masks.iter().map(|m| m.count_ones() as u128).product()
    }

    pub fn intersect(&self, other: &Guard) -> Option<Guard> {
        let masks: Vec<u64> = self
            .masks
            .iter()
            .zip(&other.masks)
            .map(|(a, b)| a & b)
            .collect();
        if masks.contains(&0) {
            None
        } else {
            Some(Guard { masks })
        }
    }

    /// Admitted valuations in lexicographic domain order.
    pub fn expand(&self) -> Vec<Vec<Val>> {
        let mut out = vec![Vec::with_capacity(self.masks.len())];
        for &mask in &self.masks {
            let mut next = Vec::new();
            for prefix in &out {
                for bit in BitIter(mask) {
                    let mut p = prefix.clone();
                    p.push(bit);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

/// Iterator over set bits of a mask, lowest first.
#[derive(Debug, Clone, Copy)]
pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = Val;
    fn next(&mut self) -> Option<Val> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b as Val)
    }
}

/// Boxes covering `space` minus the union of `boxes`, pairwise disjoint.
pub fn uncovered(boxes: &[Vec<u64>], space: &[u64]) -> Vec<Vec<u64>> {
    let live: Vec<Vec<u64>> = boxes
        .iter()
        .filter_map(|b| {
            let m: Vec<u64> = b.iter().zip(space).map(|(x, s)| x & s).collect();
            if m.contains(&0) {
                None
            } else {
                Some(m)
            }
        })
        .collect();
    if live.is_empty() {
        return vec![space.to_vec()];
    }
    if live.iter().any(|b| b == space) {
        return Vec::new();
    }
    let split = (0..space.len())
        .find(|&i| live.iter().any(|b| b[i] != space[i]))
        .expect("a non-covering box differs somewhere");
    let mut out = Vec::new();
    for bit in BitIter(space[split]) {
        let mut sub = space.to_vec();
        sub[split] = 1u64 << bit;
        out.extend(uncovered(&live, &sub));
    }
    out
}

/// Number of points in the union of `boxes` inside `space`.
pub fn union_size(boxes: &[Vec<u64>], space: &[u64]) -> u128 {
    let total: u128 = space.iter().map(|m| m.count_ones() as u128).product();
    let rest: u128 = uncovered(boxes, space)
        .iter()
        .map(|b| b.iter().map(|m| m.count_ones() as u128).product::<u128>())
        .sum();
    total - rest
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub name: String,
    /// One value index per state variable, in declaration order.
    pub label: Vec<Val>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: usize,
    pub guard: Guard,
    pub target: usize,
}

/// One expanded local transition `(q, alpha, q')`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalMove {
    /// Index of the declaring transition.
    pub transition: usize,
    pub input: Vec<Val>,
    pub target: usize,
}

/// Variable-labeled transition system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    pub vars: Vec<Variable>,
    pub inputs: Vec<Variable>,
    /// Inputs that may be read in the same step in which they are written.
    pub sync: BTreeSet<String>,
    pub states: Vec<State>,
    pub init: usize,
    pub transitions: Vec<Transition>,
}

impl Module {
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|v| v.name == name)
    }

    pub fn is_sync(&self, input: usize) -> bool {
        self.sync.contains(&self.inputs[input].name)
    }

    pub fn label(&self, state: usize) -> Valuation {
        Valuation(
            self.vars
                .iter()
                .zip(&self.states[state].label)
                .map(|(v, &x)| (v.name.clone(), v.domain.value(x).to_string()))
                .collect(),
        )
    }

    pub fn input_valuation(&self, alpha: &[Val]) -> Valuation {
        Valuation(
            self.inputs
                .iter()
                .zip(alpha)
                .map(|(v, &x)| (v.name.clone(), v.domain.value(x).to_string()))
                .collect(),
        )
    }

    /// Index form of an input valuation whose scope is exactly the inputs.
    pub fn input_indices(&self, alpha: &Valuation) -> Result<Vec<Val>, KernelError> {
        if alpha.len() != self.inputs.len() {
            return Err(KernelError::InputScope);
        }
        self.inputs
            .iter()
            .map(|v| {
                let value = alpha.get(&v.name).ok_or(KernelError::InputScope)?;
                v.domain
                    .index_of(value)
                    .ok_or_else(|| KernelError::BadValue {
                        var: v.name.clone(),
                        value: value.to_string(),
                    })
            })
            .collect()
    }

    pub fn input_space(&self) -> Vec<u64> {
        self.inputs.iter().map(|v| v.domain.full_mask()).collect()
    }

    pub fn input_space_size(&self) -> u128 {
        self.inputs.iter().map(|v| v.domain.len() as u128).product()
    }

    /// |T| with every guard expanded to the valuations it admits.
    pub fn expanded_transition_count(&self) -> u128 {
        self.transitions.iter().map(|t| t.guard.size()).sum()
    }

    /// Transitions grouped by source state, in declaration order.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source < out.len() {
                out[t.source].push(i);
            }
        }
        out
    }

    /// Expanded transitions leaving `state`, in declaration order.
    pub fn local_moves(&self, state: usize) -> Vec<LocalMove> {
        let mut out = Vec::new();
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source == state {
                for input in t.guard.expand() {
                    out.push(LocalMove {
                        transition: i,
                        input,
                        target: t.target,
                    });
                }
            }
        }
        out
    }

    /// States in breadth-first discovery order from `init`, followed by the
    /// unreachable ones in declaration order.
    pub fn bfs_order(&self) -> Vec<usize> {
        let out_edges = self.outgoing();
        let mut seen = vec![false; self.states.len()];
        let mut order = Vec::with_capacity(self.states.len());
        let mut queue = std::collections::VecDeque::new();
        if self.init < self.states.len() {
            seen[self.init] = true;
            queue.push_back(self.init);
        }
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for &t in &out_edges[q] {
                let target = self.transitions[t].target;
                if target < seen.len() && !seen[target] {
                    seen[target] = true;
                    queue.push_back(target);
                }
            }
        }
        order.extend((0..self.states.len()).filter(|&q| !seen[q]));
        order
    }

    /// Reachable states and expanded transitions among them.
    pub fn reachable_counts(&self) -> (usize, u128) {
        let out_edges = self.outgoing();
        let mut seen = vec![false; self.states.len()];
        let mut queue = std::collections::VecDeque::from([self.init]);
        seen[self.init] = true;
        let mut transitions = 0u128;
        let mut states = 0usize;
        while let Some(q) = queue.pop_front() {
            states += 1;
            for &t in &out_edges[q] {
                transitions += self.transitions[t].guard.size();
                let target = self.transitions[t].target;
                if !seen[target] {
                    seen[target] = true;
                    queue.push_back(target);
                }
            }
        }
        (states, transitions)
    }
}

/// Targets reachable from `state` under the input valuation `alpha`, in order
/// of first declaration.
pub fn successors(m: &Module, state: usize, alpha: &Valuation) -> Result<Vec<usize>, KernelError> {
    if state >= m.states.len() {
        return Err(KernelError::UnknownState(state.to_string()));
    }
    let alpha = m.input_indices(alpha)?;
    let mut out = Vec::new();
    for t in &m.transitions {
        if t.source == state && t.guard.admits(&alpha) && !out.contains(&t.target) {
            out.push(t.target);
        }
    }
    Ok(out)
}

/// A single structural defect of a module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoStates,
    DuplicateVariable(String),
    StateAndInput(String),
    DuplicateState(String),
    InitOutOfRange(usize),
    LabelArity { state: String },
    LabelValue { state: String, var: String },
    TransitionEndpoint { transition: usize },
    GuardArity { transition: usize },
    GuardValue { transition: usize, input: String },
    SyncNotInput(String),
    RedundantSelfLoop { state: String, input: Valuation },
    NotTotal { state: String, input: Valuation },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "module has no states"),
            Violation::DuplicateVariable(v) => write!(f, "variable `{v}` declared twice"),
            Violation::StateAndInput(v) => {
                write!(f, "`{v}` is both a state variable and an input")
            }
            Violation::DuplicateState(s) => write!(f, "state `{s}` declared twice"),
            Violation::InitOutOfRange(i) => write!(f, "initial state index {i} out of range"),
            Violation::LabelArity { state } => {
                write!(f, "label of `{state}` does not cover the state variables")
            }
            Violation::LabelValue { state, var } => {
                write!(
                    f,
                    "label of `{state}` gives `{var}` a value outside its domain"
                )
            }
            Violation::TransitionEndpoint { transition } => {
                write!(f, "transition #{transition} refers to an unknown state")
            }
            Violation::GuardArity { transition } => {
                write!(
                    f,
                    "guard of transition #{transition} does not match the inputs"
                )
            }
            Violation::GuardValue { transition, input } => write!(
                f,
                "guard of transition #{transition} admits no valid value of `{input}`"
            ),
            Violation::SyncNotInput(v) => write!(f, "`{v}` is marked sync but is not an input"),
            Violation::RedundantSelfLoop { state, input } => write!(
                f,
                "redundant self-loop at ({state}, {input}): the state can also change"
            ),
            Violation::NotTotal { state, input } => {
                write!(f, "no transition from ({state}, {input})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Offending input valuations left out after the per-state cap.
    pub truncated: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Offending valuations listed per state and kind before truncation.
const REPORT_CAP: usize = 256;

/// Checks a module against the structural constraints on modules. Per state,
/// totality and the absence of redundant self-loops are decided symbolically
/// over the guard boxes.
pub fn validate_module(m: &Module) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    if m.states.is_empty() {
        v.push(Violation::NoStates);
    }
    let mut names = BTreeSet::new();
    for var in &m.vars {
        if !names.insert(var.name.as_str()) {
            v.push(Violation::DuplicateVariable(var.name.clone()));
        }
    }
    let mut input_names = BTreeSet::new();
    for var in &m.inputs {
        if !input_names.insert(var.name.as_str()) {
            v.push(Violation::DuplicateVariable(var.name.clone()));
        }
        if names.contains(var.name.as_str()) {
            v.push(Violation::StateAndInput(var.name.clone()));
        }
    }
    for s in &m.sync {
        if !input_names.contains(s.as_str()) {
            v.push(Violation::SyncNotInput(s.clone()));
        }
    }
    let mut state_names = BTreeSet::new();
    for s in &m.states {
        if !state_names.insert(s.name.as_str()) {
            v.push(Violation::DuplicateState(s.name.clone()));
        }
        if s.label.len() != m.vars.len() {
            v.push(Violation::LabelArity {
                state: s.name.clone(),
            });
            continue;
        }
        for (var, &x) in m.vars.iter().zip(&s.label) {
            if x as usize >= var.domain.len() {
                v.push(Violation::LabelValue {
                    state: s.name.clone(),
                    var: var.name.clone(),
                });
            }
        }
    }
    if !m.states.is_empty() && m.init >= m.states.len() {
        v.push(Violation::InitOutOfRange(m.init));
    }
    let space = m.input_space();
    let mut well_formed = vec![true; m.transitions.len()];
    for (i, t) in m.transitions.iter().enumerate() {
        if t.source >= m.states.len() || t.target >= m.states.len() {
            v.push(Violation::TransitionEndpoint { transition: i });
            well_formed[i] = false;
        }
        if t.guard.masks.len() != m.inputs.len() {
            v.push(Violation::GuardArity { transition: i });
            well_formed[i] = false;
            continue;
        }
        for (k, (&mask, &full)) in t.guard.masks.iter().zip(&space).enumerate() {
            if mask & full == 0 || mask & !full != 0 {
                v.push(Violation::GuardValue {
                    transition: i,
                    input: m.inputs[k].name.clone(),
                });
                well_formed[i] = false;
            }
        }
    }
    let mut loops: Vec<Vec<Vec<u64>>> = vec![Vec::new(); m.states.len()];
    let mut moves: Vec<Vec<Vec<u64>>> = vec![Vec::new(); m.states.len()];
    for (i, t) in m.transitions.iter().enumerate() {
        if !well_formed[i] {
            continue;
        }
        if t.source == t.target {
            loops[t.source].push(t.guard.masks.clone());
        } else {
            moves[t.source].push(t.guard.masks.clone());
        }
    }
    for q in 0..m.states.len() {
        let name = &m.states[q].name;
        let mut redundant = BTreeSet::new();
        for l in &loops[q] {
            for mv in &moves[q] {
                let both: Vec<u64> = l.iter().zip(mv).map(|(a, b)| a & b).collect();
                if both.iter().all(|&x| x != 0) {
                    for alpha in (Guard { masks: both }).expand() {
                        if redundant.len() < REPORT_CAP {
                            redundant.insert(alpha);
                        } else if !redundant.contains(&alpha) {
                            report.truncated += 1;
                        }
                    }
                }
            }
        }
        for alpha in redundant {
            v.push(Violation::RedundantSelfLoop {
                state: name.clone(),
                input: m.input_valuation(&alpha),
            });
        }
        let mut all: Vec<Vec<u64>> = loops[q].clone();
        all.extend(moves[q].iter().cloned());
        let mut listed = 0usize;
        for hole in uncovered(&all, &space) {
            for alpha in (Guard { masks: hole }).expand() {
                if listed < REPORT_CAP {
                    v.push(Violation::NotTotal {
                        state: name.clone(),
                        input: m.input_valuation(&alpha),
                    });
                    listed += 1;
                } else {
                    report.truncated += 1;
                }
            }
        }
    }
    report
}

/// Finite representation of an ultimately periodic sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lasso<T> {
    pub prefix: Vec<T>,
    pub cycle: Vec<T>,
}

impl<T> Lasso<T> {
    pub fn new(prefix: Vec<T>, cycle: Vec<T>) -> Result<Self, KernelError> {
        if cycle.is_empty() {
            return Err(KernelError::Lasso("cycle must be non-empty".into()));
        }
        Ok(Lasso { prefix, cycle })
    }

    /// Number of distinct positions (prefix plus one cycle pass).
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    /// Folded position following `pos`.
    pub fn next(&self, pos: usize) -> usize {
        if pos + 1 < self.positions() {
            pos + 1
        } else {
            self.prefix.len()
        }
    }

    /// Element at folded position `pos < positions()`.
    pub fn folded(&self, pos: usize) -> &T {
        if pos < self.prefix.len() {
            &self.prefix[pos]
        } else {
            &self.cycle[pos - self.prefix.len()]
        }
    }

    /// Element at absolute index `i` of the infinite sequence.
    pub fn at(&self, i: usize) -> &T {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Lasso<U> {
        Lasso {
            prefix: self.prefix.iter().map(&mut f).collect(),
            cycle: self.cycle.iter().map(&mut f).collect(),
        }
    }

    /// The same infinite sequence with the cycle unrolled once more.
    pub fn unrolled(&self) -> Lasso<T>
    where
        T: Clone,
    {
        let mut prefix = self.prefix.clone();
        prefix.extend(self.cycle.iter().cloned());
        Lasso {
            prefix,
            cycle: self.cycle.clone(),
        }
    }
}

/// Position of a trace: a state and the input valuation read when leaving it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub state: usize,
    pub input: Valuation,
}

pub type Trace = Lasso<Step>;

/// Checks that the trace starts at `init` and that every step is a
/// transition of `m`.
pub fn check_trace(m: &Module, trace: &Trace) -> Result<(), KernelError> {
    if trace.at(0).state != m.init {
        return Err(KernelError::Trace {
            position: 0,
            reason: "does not start at the initial state".into(),
        });
    }
    for pos in 0..trace.positions() {
        let step = trace.folded(pos);
        let next = trace.folded(trace.next(pos)).state;
        let ok = successors(m, step.state, &step.input)
            .map_err(|e| KernelError::Trace {
                position: pos,
                reason: e.to_string(),
            })?
            .contains(&next);
        if !ok {
            return Err(KernelError::Trace {
                position: pos,
                reason: format!(
                    "no transition {} -> {}",
                    m.states[step.state].name, m.states[next].name
                ),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordKind {
    /// Sequence of state labels.
    Derived,
    /// Sequence of input valuations.
    Admitted,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    pub kind: WordKind,
    pub letters: Lasso<Valuation>,
}

pub fn derived_word(m: &Module, trace: &Trace) -> Word {
    Word {
        kind: WordKind::Derived,
        letters: trace.map(|s| m.label(s.state)),
    }
}

pub fn admitted_word(trace: &Trace) -> Word {
    Word {
        kind: WordKind::Admitted,
        letters: trace.map(|s| s.input.clone()),
    }
}
