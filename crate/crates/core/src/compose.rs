//! Asynchronous composition of modules, reachable state-space exploration,
//! the module dependency graph and k-neighborhoods.
//!
//! A composite step lets any non-empty set of components move at once, each
//! taking one local transition that changes its state, while the others
//! stay put. Inputs are read from the composite label before the step. An
//! input marked `sync` may instead be read after the step, so the reader
//! reacts to a value written in the same step; at most
//! [`ComposeOptions::max_sync_reads`] such reactions happen per step.
//! The all-idle stutter step is always available and never enumerated.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::OnceLock;
use std::time::Instant;

use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use thiserror::Error;

use crate::graph::Csr;
use crate::kernel::{
    uncovered, union_size, validate_module, Domain, Guard, Module, State, Transition, Val,
    Valuation, Variable,
};
use crate::logic::Atom;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposeError {
    #[error("state variable `{var}` is owned by both `{first}` and `{second}`")]
    SharedVariable {
        var: String,
        first: String,
        second: String,
    },
    #[error("module name `{0}` is used twice")]
    DuplicateModule(String),
    #[error("module `{module}` is invalid: {reason}")]
    InvalidModule { module: String, reason: String },
    #[error("`{reader}` reads `{var}` but its domain lacks the owner's value `{value}`")]
    DomainMismatch {
        reader: String,
        var: String,
        value: String,
    },
    #[error("unresolved input `{0}` is read with different domains")]
    ExternalDomain(String),
    #[error("composite state space is too large to encode")]
    TooLarge,
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("neighborhood radius must be at least 1")]
    ZeroRadius,
    #[error("unknown state variable `{0}`")]
    UnknownVariable(String),
    #[error("value `{value}` is not in the domain of `{var}`")]
    BadValue { var: String, value: String },
    #[error("budget exceeded after {} states", .0.states)]
    Budget(BudgetExceeded),
}

/// Partial counts at the point where exploration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BudgetExceeded {
    pub states: usize,
    pub transitions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepSemantics {
    /// Any set of components may move in one step.
    Concurrent,
    /// Exactly one component moves per step.
    Interleaving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComposeOptions {
    pub semantics: StepSemantics,
    /// Same-step reads of `sync` inputs allowed per step.
    pub max_sync_reads: usize,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        ComposeOptions {
            semantics: StepSemantics::Concurrent,
            max_sync_reads: 1,
        }
    }
}

/// Exploration limits. Exceeding either yields [`ComposeError::Budget`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub max_states: Option<usize>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn states(max: usize) -> Self {
        Budget {
            max_states: Some(max),
            deadline: None,
        }
    }

    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn exceeded(&self, states: usize) -> bool {
        self.max_states.is_some_and(|m| states > m) || self.timed_out()
    }

    pub fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Where a composite variable lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    /// State variable `pos` of component `comp`.
    Component { comp: usize, pos: usize },
    /// Unresolved input with the given index.
    External(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeVar {
    pub name: String,
    pub domain: Domain,
    pub owner: Owner,
}

#[derive(Debug, Clone)]
enum InputSource {
    Internal {
        comp: usize,
        pos: usize,
        sync: bool,
        /// Owner value index to reader value index.
        map: Vec<Val>,
    },
    External(usize),
}

#[derive(Debug, Clone)]
struct LocalTrans {
    transition: u32,
    target: u32,
    masks: Vec<u64>,
}

/// Expanded local transition offered as a strategy choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub transition: usize,
    pub input: Vec<Val>,
    pub target: usize,
}

#[derive(Debug)]
struct Component {
    radix: u64,
    size: u64,
    inputs: Vec<InputSource>,
    moves: Vec<Vec<LocalTrans>>,
    candidates: OnceLock<Vec<Vec<Candidate>>>,
}

impl Clone for Component {
    fn clone(&self) -> Self {
        let candidates = OnceLock::new();
        if let Some(c) = self.candidates.get() {
            let _ = candidates.set(c.clone());
        }
        Component {
            radix: self.radix,
            size: self.size,
            inputs: self.inputs.clone(),
            moves: self.moves.clone(),
            candidates,
        }
    }
}

/// Product of modules with on-demand successor enumeration. Composite
/// states are mixed-radix codes over the component state indices.
#[derive(Debug, Clone)]
pub struct ComposedModule {
    modules: Vec<Module>,
    comps: Vec<Component>,
    vars: Vec<CompositeVar>,
    var_ids: HashMap<String, usize>,
    external: Vec<usize>,
    options: ComposeOptions,
}

/// Marks a component that did not move.
pub const IDLE: u32 = u32::MAX;

/// Per-component restriction of the moves offered during enumeration.
#[derive(Debug, Clone, Copy)]
pub enum Choices<'a> {
    /// Every local transition, as declared.
    All,
    /// Every expanded candidate; the step reports candidate ids.
    Candidates,
    /// Only the listed candidate ids.
    Only(&'a [u32]),
}

/// One enumerated composite step.
#[derive(Debug)]
pub struct Step<'a> {
    pub target: u64,
    /// Constraint on unresolved inputs, one mask per external variable.
    pub external: &'a [u64],
    /// Per component: [`IDLE`], a transition index (under [`Choices::All`])
    /// or a candidate id.
    pub taken: &'a [u32],
    /// Component that read a `sync` input after the step, if any.
    pub reactive: Option<usize>,
}

#[derive(Debug, Clone)]
struct Opt {
    target: u32,
    tag: u32,
    ext: Vec<(usize, u64)>,
    /// (owner comp, owner pos, admitted owner values) checked after the step.
    post: Vec<(usize, usize, u64)>,
}

/// Composes `modules` with the default step semantics.
pub fn compose(modules: &[Module]) -> Result<ComposedModule, ComposeError> {
    compose_with(modules, ComposeOptions::default())
}

pub fn compose_with(
    modules: &[Module],
    options: ComposeOptions,
) -> Result<ComposedModule, ComposeError> {
    let mut names = BTreeSet::new();
    for m in modules {
        if !names.insert(m.name.as_str()) {
            return Err(ComposeError::DuplicateModule(m.name.clone()));
        }
        if let Some(v) = validate_module(m).violations.first() {
            return Err(ComposeError::InvalidModule {
                module: m.name.clone(),
                reason: v.to_string(),
            });
        }
    }
    let mut vars: Vec<CompositeVar> = Vec::new();
    let mut var_ids: HashMap<String, usize> = HashMap::new();
    for (c, m) in modules.iter().enumerate() {
        for (pos, v) in m.vars.iter().enumerate() {
            if let Some(&id) = var_ids.get(&v.name) {
                let Owner::Component { comp, .. } = vars[id].owner else {
                    unreachable!("only state variables are registered so far")
                };
                return Err(ComposeError::SharedVariable {
                    var: v.name.clone(),
                    first: modules[comp].name.clone(),
                    second: m.name.clone(),
                });
            }
            var_ids.insert(v.name.clone(), vars.len());
            vars.push(CompositeVar {
                name: v.name.clone(),
                domain: v.domain.clone(),
                owner: Owner::Component { comp: c, pos },
            });
        }
    }
    let mut external = Vec::new();
    let mut comps = Vec::with_capacity(modules.len());
    let mut radix: u64 = 1;
    for m in modules {
        let mut inputs = Vec::with_capacity(m.inputs.len());
        for (k, inp) in m.inputs.iter().enumerate() {
            match var_ids.get(&inp.name).map(|&id| (id, vars[id].owner)) {
                Some((id, Owner::Component { comp, pos })) => {
                    let mut map = Vec::with_capacity(vars[id].domain.len());
                    for value in vars[id].domain.values() {
                        let r = inp.domain.index_of(value).ok_or_else(|| {
                            ComposeError::DomainMismatch {
                                reader: m.name.clone(),
                                var: inp.name.clone(),
                                value: value.clone(),
                            }
                        })?;
                        map.push(r);
                    }
                    inputs.push(InputSource::Internal {
                        comp,
                        pos,
                        sync: m.is_sync(k),
                        map,
                    });
                }
                Some((id, Owner::External(e))) => {
                    if vars[id].domain != inp.domain {
                        return Err(ComposeError::ExternalDomain(inp.name.clone()));
                    }
                    inputs.push(InputSource::External(e));
                }
                None => {
                    let e = external.len();
                    external.push(vars.len());
                    var_ids.insert(inp.name.clone(), vars.len());
                    vars.push(CompositeVar {
                        name: inp.name.clone(),
                        domain: inp.domain.clone(),
                        owner: Owner::External(e),
                    });
                    inputs.push(InputSource::External(e));
                }
            }
        }
        let mut moves = vec![Vec::new(); m.states.len()];
        for (i, t) in m.transitions.iter().enumerate() {
            if t.source != t.target {
                moves[t.source].push(LocalTrans {
                    transition: i as u32,
                    target: t.target as u32,
                    masks: t.guard.masks.clone(),
                });
            }
        }
        let size = m.states.len() as u64;
        comps.push(Component {
            radix,
            size,
            inputs,
            moves,
            candidates: OnceLock::new(),
        });
        radix = radix.checked_mul(size).ok_or(ComposeError::TooLarge)?;
    }
    Ok(ComposedModule {
        modules: modules.to_vec(),
        comps,
        vars,
        var_ids,
        external,
        options,
    })
}

/// Reusable buffers for successor enumeration.
pub struct Scratch {
    opts: Vec<Vec<Opt>>,
    ext: Vec<u64>,
    taken: Vec<u32>,
    targets: Vec<u32>,
    locals: Vec<u32>,
}

impl ComposedModule {
    pub fn components(&self) -> &[Module] {
        &self.modules
    }

    pub fn options(&self) -> ComposeOptions {
        self.options
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.modules.iter().position(|m| m.name == name)
    }

    /// State variables of the components in order, then unresolved inputs.
    pub fn vars(&self) -> &[CompositeVar] {
        &self.vars
    }

    pub fn var_id(&self, name: &str) -> Option<usize> {
        self.var_ids.get(name).copied()
    }

    /// Variable id for a formula name; `voted_K` is accepted for `vote_K`.
    pub fn resolve_var(&self, name: &str) -> Option<usize> {
        self.var_id(name).or_else(|| {
            name.strip_prefix("voted_")
                .and_then(|rest| self.var_id(&format!("vote_{rest}")))
        })
    }

    /// Unresolved inputs as composite variable ids.
    pub fn external_inputs(&self) -> &[usize] {
        &self.external
    }

    pub fn external_space(&self) -> Vec<u64> {
        self.external
            .iter()
            .map(|&id| self.vars[id].domain.full_mask())
            .collect()
    }

    pub fn state_variables(&self) -> BTreeSet<String> {
        self.vars
            .iter()
            .filter(|v| matches!(v.owner, Owner::Component { .. }))
            .map(|v| v.name.clone())
            .collect()
    }

    pub fn init_code(&self) -> u64 {
        self.encode(
            &self
                .modules
                .iter()
                .map(|m| m.init as u32)
                .collect::<Vec<_>>(),
        )
    }

    pub fn local(&self, code: u64, comp: usize) -> u32 {
        let c = &self.comps[comp];
        ((code / c.radix) % c.size) as u32
    }

    pub fn decode(&self, code: u64) -> Vec<u32> {
        (0..self.comps.len()).map(|c| self.local(code, c)).collect()
    }

    pub fn encode(&self, locals: &[u32]) -> u64 {
        locals
            .iter()
            .zip(&self.comps)
            .map(|(&l, c)| l as u64 * c.radix)
            .sum()
    }

    /// Value index of a state variable in a composite state.
    pub fn value(&self, code: u64, var: usize) -> Option<Val> {
        match self.vars[var].owner {
            Owner::Component { comp, pos } => {
                let l = self.local(code, comp) as usize;
                Some(self.modules[comp].states[l].label[pos])
            }
            Owner::External(_) => None,
        }
    }

    /// Label of a composite state over all state variables.
    pub fn label(&self, code: u64) -> Valuation {
        let mut v = Valuation::new();
        for (c, m) in self.modules.iter().enumerate() {
            let l = self.local(code, c) as usize;
            for (var, &x) in m.vars.iter().zip(&m.states[l].label) {
                v.insert(var.name.clone(), var.domain.value(x));
            }
        }
        v
    }

    pub fn state_name(&self, code: u64) -> String {
        let parts: Vec<&str> = (0..self.modules.len())
            .map(|c| {
                self.modules[c].states[self.local(code, c) as usize]
                    .name
                    .as_str()
            })
            .collect();
        format!("({})", parts.join(","))
    }

    /// Compiles an atom into `(variable id, value index)` pairs.
    pub fn bind_atom(&self, atom: &Atom) -> Result<Vec<(usize, Val)>, ComposeError> {
        atom.iter()
            .map(|(var, value)| {
                let id = self
                    .resolve_var(var)
                    .filter(|&id| matches!(self.vars[id].owner, Owner::Component { .. }))
                    .ok_or_else(|| ComposeError::UnknownVariable(var.to_string()))?;
                let x =
                    self.vars[id]
                        .domain
                        .index_of(value)
                        .ok_or_else(|| ComposeError::BadValue {
                            var: var.to_string(),
                            value: value.to_string(),
                        })?;
                Ok((id, x))
            })
            .collect()
    }

    /// Expanded local transitions of a local state in declaration order,
    /// self-loops included. Candidate ids index this list.
    pub fn candidates(&self, comp: usize, local: usize) -> &[Candidate] {
        let all = self.comps[comp].candidates.get_or_init(|| {
            let m = &self.modules[comp];
            (0..m.states.len())
                .map(|q| {
                    m.local_moves(q)
                        .into_iter()
                        .map(|mv| Candidate {
                            transition: mv.transition,
                            input: mv.input,
                            target: mv.target,
                        })
                        .collect()
                })
                .collect()
        });
        &all[local]
    }

    pub fn scratch(&self) -> Scratch {
        let n = self.comps.len();
        Scratch {
            opts: vec![Vec::new(); n],
            ext: vec![0; (n + 1) * self.external.len()],
            taken: vec![IDLE; n],
            targets: vec![0; n],
            locals: vec![0; n],
        }
    }

    /// Enumerates every non-stutter step from `code`.
    pub fn for_each_step<'c>(
        &self,
        code: u64,
        choices: &dyn Fn(usize, u32) -> Choices<'c>,
        mut f: impl FnMut(&Step),
    ) {
        let mut s = self.scratch();
        self.steps_with(&mut s, code, choices, &mut f);
    }

    pub fn steps_with<'c>(
        &self,
        s: &mut Scratch,
        code: u64,
        choices: &dyn Fn(usize, u32) -> Choices<'c>,
        f: &mut dyn FnMut(&Step),
    ) {
        let n = self.comps.len();
        for c in 0..n {
            s.locals[c] = self.local(code, c);
        }
        let sync_ok =
            self.options.semantics == StepSemantics::Concurrent && self.options.max_sync_reads > 0;
        for c in 0..n {
            let mut opts = std::mem::take(&mut s.opts[c]);
            opts.clear();
            let local = s.locals[c];
            match choices(c, local) {
                Choices::All => {
                    for t in &self.comps[c].moves[local as usize] {
                        if let Some(o) =
                            self.option(s, c, |k| t.masks[k], t.target, t.transition, sync_ok)
                        {
                            opts.push(o);
                        }
                    }
                }
                Choices::Candidates => {
                    for (id, cand) in self.candidates(c, local as usize).iter().enumerate() {
                        if cand.target != local as usize {
                            let mask = |k: usize| 1u64 << cand.input[k];
                            if let Some(o) =
                                self.option(s, c, mask, cand.target as u32, id as u32, sync_ok)
                            {
                                opts.push(o);
                            }
                        }
                    }
                }
                Choices::Only(ids) => {
                    let cands = self.candidates(c, local as usize);
                    for &id in ids {
                        let cand = &cands[id as usize];
                        if cand.target != local as usize {
                            let mask = |k: usize| 1u64 << cand.input[k];
                            if let Some(o) =
                                self.option(s, c, mask, cand.target as u32, id, sync_ok)
                            {
                                opts.push(o);
                            }
                        }
                    }
                }
            }
            s.opts[c] = opts;
        }
        let e = self.external.len();
        for (slot, &id) in s.ext[..e].iter_mut().zip(&self.external) {
            *slot = self.vars[id].domain.full_mask();
        }
        self.recurse(s, 0, 0, None, f);
    }

    fn option(
        &self,
        s: &Scratch,
        c: usize,
        mask: impl Fn(usize) -> u64,
        target: u32,
        tag: u32,
        sync_ok: bool,
    ) -> Option<Opt> {
        let mut ext = Vec::new();
        let mut post = Vec::new();
        let mut needs_post = false;
        for (k, src) in self.comps[c].inputs.iter().enumerate() {
            let m = mask(k);
            match src {
                InputSource::External(e) => {
                    if m != self.vars[self.external[*e]].domain.full_mask() {
                        ext.push((*e, m));
                    }
                }
                InputSource::Internal {
                    comp,
                    pos,
                    sync,
                    map,
                } => {
                    let owner_local = s.locals[*comp] as usize;
                    let v = map[self.modules[*comp].states[owner_local].label[*pos] as usize];
                    let pre_ok = m & (1u64 << v) != 0;
                    if *sync {
                        let owner_mask = map
                            .iter()
                            .enumerate()
                            .filter(|(_, &r)| m & (1u64 << r) != 0)
                            .fold(0u64, |acc, (i, _)| acc | (1u64 << i));
                        post.push((*comp, *pos, owner_mask));
                        needs_post |= !pre_ok;
                    } else if !pre_ok {
                        return None;
                    }
                }
            }
        }
        if !needs_post {
            post.clear();
        } else if !sync_ok {
            return None;
        }
        Some(Opt {
            target,
            tag,
            ext,
            post,
        })
    }

    fn recurse(
        &self,
        s: &mut Scratch,
        c: usize,
        movers: usize,
        reactive: Option<(usize, usize)>,
        f: &mut dyn FnMut(&Step),
    ) {
        let n = self.comps.len();
        let e = self.external.len();
        if c == n {
            if movers == 0 {
                return;
            }
            if let Some((rc, oi)) = reactive {
                let ok = s.opts[rc][oi].post.iter().all(|&(comp, pos, mask)| {
                    let l = s.targets[comp] as usize;
                    mask & (1u64 << self.modules[comp].states[l].label[pos]) != 0
                });
                if !ok {
                    return;
                }
            }
            let target = self.encode(&s.targets);
            f(&Step {
                target,
                external: &s.ext[n * e..(n + 1) * e],
                taken: &s.taken,
                reactive: reactive.map(|(rc, _)| rc),
            });
            return;
        }
        s.targets[c] = s.locals[c];
        s.taken[c] = IDLE;
        s.ext.copy_within(c * e..(c + 1) * e, (c + 1) * e);
        self.recurse(s, c + 1, movers, reactive, f);
        if self.options.semantics == StepSemantics::Interleaving && movers > 0 {
            return;
        }
        for oi in 0..s.opts[c].len() {
            let is_reactive = !s.opts[c][oi].post.is_empty();
            if is_reactive && reactive.is_some() {
                continue;
            }
            s.ext.copy_within(c * e..(c + 1) * e, (c + 1) * e);
            let mut empty = false;
            for &(x, m) in &s.opts[c][oi].ext {
                let slot = &mut s.ext[(c + 1) * e + x];
                *slot &= m;
                empty |= *slot == 0;
            }
            if empty {
                continue;
            }
            s.targets[c] = s.opts[c][oi].target;
            s.taken[c] = s.opts[c][oi].tag;
            let r = if is_reactive { Some((c, oi)) } else { reactive };
            self.recurse(s, c + 1, movers + 1, r, f);
        }
        s.targets[c] = s.locals[c];
        s.taken[c] = IDLE;
    }

    /// Distinct non-stutter `(target, external box)` pairs from `code`,
    /// sorted.
    fn moves_from(&self, s: &mut Scratch, code: u64, out: &mut Vec<(u64, Vec<u64>)>) {
        out.clear();
        self.steps_with(s, code, &|_, _| Choices::All, &mut |st| {
            out.push((st.target, st.external.to_vec()))
        });
        out.sort_unstable();
        out.dedup();
    }
}

/// Counts `(non-loop transitions, normalized self-loops)` for the sorted
/// moves of one state, expanded over unresolved inputs.
fn count_moves(moves: &[(u64, Vec<u64>)], space: &[u64]) -> (u64, u64) {
    if space.is_empty() {
        let mut targets: Vec<u64> = moves.iter().map(|(t, _)| *t).collect();
        targets.dedup();
        return (targets.len() as u64, u64::from(targets.is_empty()));
    }
    let mut trans = 0u64;
    for group in moves.chunk_by(|a, b| a.0 == b.0) {
        let boxes: Vec<Vec<u64>> = group.iter().map(|(_, b)| b.clone()).collect();
        trans += union_size(&boxes, space) as u64;
    }
    let all: Vec<Vec<u64>> = moves.iter().map(|(_, b)| b.clone()).collect();
    let total: u128 = space.iter().map(|m| m.count_ones() as u128).product();
    (trans, (total - union_size(&all, space)) as u64)
}

/// Reachable-part statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReachableStats {
    pub states: usize,
    /// Distinct `(source, input valuation, target)` triples with a change
    /// of state.
    pub transitions: u64,
    /// Self-loops for inputs under which no move is possible.
    pub self_loops: u64,
    pub elapsed_ms: u64,
}

const CHUNK: usize = 1 << 14;

/// Breadth-first exploration of the reachable part. `workers` threads
/// share each frontier chunk; the result does not depend on their number.
pub fn reachable_stats(
    c: &ComposedModule,
    budget: &Budget,
    workers: usize,
) -> Result<ReachableStats, ComposeError> {
    let start = Instant::now();
    let workers = workers.max(1);
    let space = c.external_space();
    let init = c.init_code();
    let mut seen: HashSet<u64> = HashSet::from([init]);
    let mut frontier = vec![init];
    let mut transitions = 0u64;
    let mut self_loops = 0u64;
    let stop = AtomicBool::new(false);
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for chunk in frontier.chunks(CHUNK) {
            let per = chunk.len().div_ceil(workers);
            let results: Vec<(Vec<u64>, u64, u64)> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .chunks(per)
                    .map(|part| {
                        let (space, stop) = (&space, &stop);
                        scope.spawn(move || {
                            let mut s = c.scratch();
                            let mut moves = Vec::new();
                            let mut succ = Vec::new();
                            let (mut tr, mut lp) = (0u64, 0u64);
                            for (i, &code) in part.iter().enumerate() {
                                if i % 1024 == 0 && budget.timed_out() {
                                    stop.store(true, Ordering::Relaxed);
                                }
                                if stop.load(Ordering::Relaxed) {
                                    break;
                                }
                                c.moves_from(&mut s, code, &mut moves);
                                let (t, l) = count_moves(&moves, space);
                                tr += t;
                                lp += l;
                                let mut last = None;
                                for &(t, _) in &moves {
                                    if last != Some(t) {
                                        succ.push(t);
                                        last = Some(t);
                                    }
                                }
                            }
                            (succ, tr, lp)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("exploration worker panicked"))
                    .collect()
            });
            for (succ, tr, lp) in results {
                transitions += tr;
                self_loops += lp;
                for t in succ {
                    if seen.insert(t) {
                        next.push(t);
                    }
                }
            }
            if stop.load(Ordering::Relaxed) || budget.exceeded(seen.len()) {
                return Err(ComposeError::Budget(BudgetExceeded {
                    states: seen.len(),
                    transitions,
                }));
            }
        }
        frontier = next;
    }
    Ok(ReachableStats {
        states: seen.len(),
        transitions,
        self_loops,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Explicit reachable graph. Edges carry the candidate id each tracked
/// component took (or [`IDLE`]); stutter is implicit.
#[derive(Debug, Clone)]
pub struct ExplicitGraph {
    pub tracked: Vec<usize>,
    pub codes: Vec<u64>,
    index: HashMap<u64, u32>,
    pub succ: Csr,
    /// `tracked.len()` tags per edge.
    pub tags: Vec<u32>,
    /// Per edge, index into `boxes`.
    pub ext: Vec<u32>,
    pub boxes: Vec<Vec<u64>>,
}

impl ExplicitGraph {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn index_of(&self, code: u64) -> Option<usize> {
        self.index.get(&code).map(|&i| i as usize)
    }

    pub fn edges(&self, v: usize) -> std::ops::Range<usize> {
        self.succ.offsets[v]..self.succ.offsets[v + 1]
    }

    pub fn target(&self, e: usize) -> usize {
        self.succ.targets[e] as usize
    }

    /// Tag of the `j`-th tracked component on edge `e`.
    pub fn tag(&self, e: usize, j: usize) -> u32 {
        self.tags[e * self.tracked.len() + j]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.targets.len()
    }
}

/// Builds the reachable graph from init. Tracked components offer their
/// expanded candidates; the others their declared transitions.
pub fn explore(
    c: &ComposedModule,
    tracked: &[usize],
    budget: &Budget,
) -> Result<ExplicitGraph, ComposeError> {
    let init = c.init_code();
    let mut g = ExplicitGraph {
        tracked: tracked.to_vec(),
        codes: vec![init],
        index: HashMap::from([(init, 0)]),
        succ: Csr::new(),
        tags: Vec::new(),
        ext: Vec::new(),
        boxes: Vec::new(),
    };
    let mut box_ids: HashMap<Vec<u64>, u32> = HashMap::new();
    let is_tracked: Vec<bool> = (0..c.components().len())
        .map(|i| tracked.contains(&i))
        .collect();
    let choices = |comp: usize, _| {
        if is_tracked[comp] {
            Choices::Candidates
        } else {
            Choices::All
        }
    };
    let mut s = c.scratch();
    let mut edges: Vec<(u64, Vec<u32>, u32)> = Vec::new();
    let mut v = 0;
    while v < g.codes.len() {
        if v % 1024 == 0 && budget.exceeded(g.codes.len()) {
            return Err(ComposeError::Budget(BudgetExceeded {
                states: g.codes.len(),
                transitions: g.succ.targets.len() as u64,
            }));
        }
        edges.clear();
        c.steps_with(&mut s, g.codes[v], &choices, &mut |st| {
            let next = box_ids.len() as u32;
            let b = *box_ids.entry(st.external.to_vec()).or_insert(next);
            if b == next {
                g.boxes.push(st.external.to_vec());
            }
            let tags = tracked.iter().map(|&t| st.taken[t]).collect();
            edges.push((st.target, tags, b));
        });
        edges.sort_unstable();
        edges.dedup();
        let mut targets = Vec::with_capacity(edges.len());
        for (t, tags, b) in edges.drain(..) {
            let next = g.codes.len() as u32;
            let id = *g.index.entry(t).or_insert(next);
            if id == next {
                g.codes.push(t);
            }
            targets.push(id);
            g.tags.extend(tags);
            g.ext.push(b);
        }
        g.succ.push_node(targets);
        v += 1;
    }
    if budget.exceeded(g.codes.len()) {
        return Err(ComposeError::Budget(BudgetExceeded {
            states: g.codes.len(),
            transitions: g.succ.targets.len() as u64,
        }));
    }
    Ok(g)
}

/// The reachable part as a module over the composite state variables, with
/// unresolved inputs as inputs and self-loops wherever no move exists.
pub fn to_module(c: &ComposedModule, budget: &Budget) -> Result<Module, ComposeError> {
    let g = explore(c, &[], budget)?;
    let vars: Vec<Variable> = c
        .vars()
        .iter()
        .filter(|v| matches!(v.owner, Owner::Component { .. }))
        .map(|v| Variable::new(v.name.clone(), v.domain.clone()))
        .collect();
    let inputs: Vec<Variable> = c
        .external_inputs()
        .iter()
        .map(|&id| Variable::new(c.vars()[id].name.clone(), c.vars()[id].domain.clone()))
        .collect();
    let states = g
        .codes
        .iter()
        .map(|&code| State {
            name: c.state_name(code),
            label: c
                .decode(code)
                .iter()
                .enumerate()
                .flat_map(|(i, &l)| c.components()[i].states[l as usize].label.clone())
                .collect(),
        })
        .collect();
    let space = c.external_space();
    let mut transitions = Vec::new();
    for v in 0..g.len() {
        let mut boxes = Vec::new();
        for e in g.edges(v) {
            let b = g.boxes[g.ext[e] as usize].clone();
            transitions.push(Transition {
                source: v,
                guard: Guard { masks: b.clone() },
                target: g.target(e),
            });
            boxes.push(b);
        }
        for rest in uncovered(&boxes, &space) {
            transitions.push(Transition {
                source: v,
                guard: Guard { masks: rest },
                target: v,
            });
        }
    }
    Ok(Module {
        name: c
            .components()
            .iter()
            .map(|m| m.name.as_str())
            .collect::<Vec<_>>()
            .join("|"),
        vars,
        inputs,
        sync: BTreeSet::new(),
        states,
        init: 0,
        transitions,
    })
}

/// Edge `i -> j` when module `i` reads a state variable of module `j`;
/// edges carry the shared variable names.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    graph: DiGraph<String, Vec<String>>,
}

impl DependencyGraph {
    pub fn modules(&self) -> Vec<&str> {
        self.graph.node_weights().map(String::as_str).collect()
    }

    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.graph
            .edge_indices()
            .map(|e| {
                let (a, b) = self.graph.edge_endpoints(e).expect("edge exists");
                (self.graph[a].as_str(), self.graph[b].as_str())
            })
            .collect()
    }

    /// Variables through which `reader` depends on `owner`.
    pub fn shared(&self, reader: &str, owner: &str) -> Vec<&str> {
        let (Some(a), Some(b)) = (self.node(reader), self.node(owner)) else {
            return Vec::new();
        };
        self.graph
            .find_edge(a, b)
            .map(|e| self.graph[e].iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    fn node(&self, name: &str) -> Option<NodeIndex> {
        self.graph.node_indices().find(|&n| self.graph[n] == name)
    }

    /// Module names within undirected distance `k` of `name`, excluding
    /// it, in module order.
    pub fn within(&self, name: &str, k: usize) -> Result<Vec<&str>, ComposeError> {
        if k == 0 {
            return Err(ComposeError::ZeroRadius);
        }
        let start = self
            .node(name)
            .ok_or_else(|| ComposeError::UnknownModule(name.to_string()))?;
        let mut dist: HashMap<NodeIndex, usize> = HashMap::from([(start, 0)]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            let d = dist[&n];
            if d == k {
                continue;
            }
            for w in self.graph.neighbors_undirected(n) {
                if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(w) {
                    slot.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(self
            .graph
            .node_indices()
            .filter(|n| *n != start && dist.contains_key(n))
            .map(|n| self.graph[n].as_str())
            .collect())
    }
}

pub fn dependency_graph(modules: &[Module]) -> DependencyGraph {
    let mut graph = DiGraph::new();
    let nodes: Vec<NodeIndex> = modules
        .iter()
        .map(|m| graph.add_node(m.name.clone()))
        .collect();
    for (i, mi) in modules.iter().enumerate() {
        for (j, mj) in modules.iter().enumerate() {
            if i == j {
                continue;
            }
            let shared: Vec<String> = mi
                .inputs
                .iter()
                .filter(|inp| mj.var_index(&inp.name).is_some())
                .map(|inp| inp.name.clone())
                .collect();
            if !shared.is_empty() {
                graph.add_edge(nodes[i], nodes[j], shared);
            }
        }
    }
    DependencyGraph { graph }
}

/// Members of the radius-`k` neighborhood of module `name`, excluding it.
pub fn neighborhood(modules: &[Module], name: &str, k: usize) -> Result<Vec<Module>, ComposeError> {
    let g = dependency_graph(modules);
    let names = g.within(name, k)?;
    Ok(modules
        .iter()
        .filter(|m| names.contains(&m.name.as_str()))
        .cloned()
        .collect())
}
