//! Generator for the voter/coercer benchmark: voters choose a candidate,
//! then show or hide their ballot, and the coercer decides per voter
//! whether to punish once that voter has reported.

use std::collections::BTreeSet;
use std::io;
use std::path::{Path, PathBuf};

use crate::agrule::{AGTask, Premise};
use crate::assume::Assumption;
use crate::kernel::{Domain, Guard, Module, State, Transition, Val, Variable};

pub const VOTE: [&str; 3] = ["none", "one", "two"];
pub const REPORTED: [&str; 4] = ["none", "one", "two", "hidden"];
pub const PSTATUS: [&str; 3] = ["none", "true", "false"];
pub const PUN: [&str; 3] = ["none", "punish", "nopunish"];

const NONE: Val = 0;
const PUNISH: Val = 1;
const NOPUNISH: Val = 2;

fn domain(values: &[&str]) -> Domain {
    Domain::new(values.iter().copied()).expect("benchmark domains are well-formed")
}

fn mask(values: &[Val]) -> u64 {
    values.iter().fold(0, |m, &v| m | (1u64 << v))
}

pub fn voter_name(i: usize) -> String {
    format!("Voter{i}")
}

pub const COERCER: &str = "Coercer";

pub fn assumption_name(i: usize) -> String {
    format!("CoercerAbs{i}")
}

/// Voter `i`: one input `pun_i`, read in the same step it is written.
pub fn gen_voter(i: usize) -> Module {
    let vars = vec![
        Variable::new(format!("vote_{i}"), domain(&VOTE)),
        Variable::new(format!("reported_{i}"), domain(&REPORTED)),
        Variable::new(format!("pstatus_{i}"), domain(&PSTATUS)),
    ];
    let pun = format!("pun_{i}");
    let inputs = vec![Variable::new(pun.clone(), domain(&PUN))];
    let mut states: Vec<State> = Vec::new();
    let mut add = |label: [Val; 3]| {
        let name = format!(
            "s_{}_{}_{}",
            VOTE[label[0] as usize], REPORTED[label[1] as usize], PSTATUS[label[2] as usize]
        );
        states.push(State {
            name,
            label: label.to_vec(),
        });
        states.len() - 1
    };
    let a = add([0, 0, 0]);
    let b1 = add([1, 0, 0]);
    let b2 = add([2, 0, 0]);
    let waiting = [
        add([1, 1, 0]),
        add([1, 3, 0]),
        add([2, 3, 0]),
        add([2, 2, 0]),
    ];
    let labels = [[1, 1], [1, 3], [2, 3], [2, 2]];
    let any = Guard::any(&inputs);
    let on = |v: Val| Guard {
        masks: vec![mask(&[v])],
    };
    let mut transitions = Vec::new();
    for (s, t) in [
        (a, b1),
        (a, b2),
        (b1, waiting[0]),
        (b1, waiting[1]),
        (b2, waiting[2]),
        (b2, waiting[3]),
    ] {
        transitions.push(Transition {
            source: s,
            guard: any.clone(),
            target: t,
        });
    }
    for (c, [v, r]) in waiting.iter().zip(labels) {
        transitions.push(Transition {
            source: *c,
            guard: on(NONE),
            target: *c,
        });
        for (p, status) in [(PUNISH, 1), (NOPUNISH, 2)] {
            let d = add([v, r, status]);
            transitions.push(Transition {
                source: *c,
                guard: on(p),
                target: d,
            });
            transitions.push(Transition {
                source: d,
                guard: any.clone(),
                target: d,
            });
        }
    }
    Module {
        name: voter_name(i),
        vars,
        inputs,
        sync: BTreeSet::from([pun]),
        states,
        init: a,
        transitions,
    }
}

fn pun_states(n: usize) -> Vec<State> {
    let mut states = Vec::new();
    let mut label = vec![NONE; n];
    loop {
        let name = format!(
            "c_{}",
            label
                .iter()
                .map(|&v| PUN[v as usize])
                .collect::<Vec<_>>()
                .join("_")
        );
        states.push(State {
            name,
            label: label.clone(),
        });
        let mut k = n;
        loop {
            if k == 0 {
                return states;
            }
            k -= 1;
            label[k] += 1;
            if label[k] < 3 {
                break;
            }
            label[k] = NONE;
        }
    }
}

fn pun_index(label: &[Val]) -> usize {
    label.iter().fold(0, |acc, &v| acc * 3 + v as usize)
}

/// Coercer over `n` voters. From any state, one step may decide any
/// non-empty set of undecided voters that have all reported.
pub fn gen_coercer(n: usize) -> Module {
    let vars = (1..=n)
        .map(|i| Variable::new(format!("pun_{i}"), domain(&PUN)))
        .collect();
    let inputs: Vec<Variable> = (1..=n)
        .map(|i| Variable::new(format!("reported_{i}"), domain(&REPORTED)))
        .collect();
    let states = pun_states(n);
    let full = domain(&REPORTED).full_mask();
    let reported = full & !mask(&[NONE]);
    let mut transitions = Vec::new();
    for (s, st) in states.iter().enumerate() {
        let open: Vec<usize> = (0..n).filter(|&k| st.label[k] == NONE).collect();
        let mut wait = vec![full; n];
        for &k in &open {
            wait[k] = mask(&[NONE]);
        }
        transitions.push(Transition {
            source: s,
            guard: Guard { masks: wait },
            target: s,
        });
        for subset in 1u32..(1 << open.len()) {
            let chosen: Vec<usize> = (0..open.len())
                .filter(|b| subset & (1 << b) != 0)
                .map(|b| open[b])
                .collect();
            let mut guard = vec![full; n];
            for &k in &chosen {
                guard[k] = reported;
            }
            for outcome in 0u32..(1 << chosen.len()) {
                let mut label = st.label.clone();
                for (b, &k) in chosen.iter().enumerate() {
                    label[k] = if outcome & (1 << b) != 0 {
                        NOPUNISH
                    } else {
                        PUNISH
                    };
                }
                transitions.push(Transition {
                    source: s,
                    guard: Guard {
                        masks: guard.clone(),
                    },
                    target: pun_index(&label),
                });
            }
        }
    }
    Module {
        name: COERCER.to_string(),
        vars,
        inputs,
        sync: BTreeSet::new(),
        states,
        init: 0,
        transitions,
    }
}

/// Module of the coercer abstraction for voter `i` of `n`: it owns every
/// `pun_k` but only ever decides `pun_i`, once `reported_i` is set.
pub fn gen_voter_assumption_module(n: usize, i: usize) -> Module {
    let vars = (1..=n)
        .map(|k| Variable::new(format!("pun_{k}"), domain(&PUN)))
        .collect();
    let inputs = vec![Variable::new(format!("reported_{i}"), domain(&REPORTED))];
    let state = |name: &str, v: Val| {
        let mut label = vec![NONE; n];
        label[i - 1] = v;
        State {
            name: name.to_string(),
            label,
        }
    };
    let states = vec![
        state("wait", NONE),
        state("punished", PUNISH),
        state("spared", NOPUNISH),
    ];
    let full = domain(&REPORTED).full_mask();
    let reported = Guard {
        masks: vec![full & !mask(&[NONE])],
    };
    let t = |source, guard: Guard, target| Transition {
        source,
        guard,
        target,
    };
    let transitions = vec![
        t(
            0,
            Guard {
                masks: vec![mask(&[NONE])],
            },
            0,
        ),
        t(0, reported.clone(), 1),
        t(0, reported, 2),
        t(1, Guard { masks: vec![full] }, 1),
        t(2, Guard { masks: vec![full] }, 2),
    ];
    Module {
        name: assumption_name(i),
        vars,
        inputs,
        sync: BTreeSet::new(),
        states,
        init: 0,
        transitions,
    }
}

/// Coercer abstraction for voter `i`; every state is accepting, so a
/// coercer that never decides is covered as well.
pub fn gen_voter_assumption(n: usize, i: usize) -> Assumption {
    Assumption::new(gen_voter_assumption_module(n, i), BTreeSet::from([0, 1, 2]))
        .expect("accepting set is non-empty")
}

/// Voters `1..=n` followed by the coercer.
pub fn gen_system(n: usize) -> Vec<Module> {
    let mut out: Vec<Module> = (1..=n).map(gen_voter).collect();
    out.push(gen_coercer(n));
    out
}

/// `G (!(pstatus_i=true) | vote_i=one)`.
pub fn voting_guarantee_text(i: usize) -> String {
    format!("G (!(pstatus_{i}=true) | vote_{i}=one)")
}

pub fn voting_formula_text(i: usize) -> String {
    format!("<<{}>> {}", voter_name(i), voting_guarantee_text(i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VotingConfig {
    pub n: usize,
    pub designated: usize,
}

impl VotingConfig {
    pub fn new(n: usize) -> Self {
        VotingConfig { n, designated: 1 }
    }

    fn check(&self) -> io::Result<()> {
        if self.n == 0 || self.designated == 0 || self.designated > self.n {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("designated voter {} out of 1..={}", self.designated, self.n),
            ));
        }
        Ok(())
    }
}

/// The rule instance for the designated voter: its abstraction of the
/// coercer, the other voters as context, radius 1.
pub fn voting_task(cfg: VotingConfig) -> AGTask {
    let d = cfg.designated;
    AGTask {
        system: gen_system(cfg.n),
        premises: vec![Premise {
            agent: voter_name(d),
            guarantee: crate::mdl::parse_path_formula(&voting_guarantee_text(d))
                .expect("well-formed formula"),
            assumption: gen_voter_assumption(cfg.n, d),
            context: (1..=cfg.n).filter(|&k| k != d).map(voter_name).collect(),
        }],
        k: 1,
    }
}

/// Writes `voterK.mdl`, `coercer.mdl`, `assumption_voterD.mdl`,
/// `formula.satl` and `task.agt` into `dir`.
pub fn write_voting(cfg: VotingConfig, dir: &Path) -> io::Result<Vec<PathBuf>> {
    use crate::mdl::{
        serialize_assumption, serialize_module, serialize_task, PremiseSpec, TaskSpec,
    };
    cfg.check()?;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> io::Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, text)?;
        written.push(p);
        Ok(())
    };
    let mut system = Vec::new();
    for i in 1..=cfg.n {
        let name = format!("voter{i}.mdl");
        put(&name, serialize_module(&gen_voter(i)))?;
        system.push(name);
    }
    put("coercer.mdl", serialize_module(&gen_coercer(cfg.n)))?;
    system.push("coercer.mdl".into());
    let d = cfg.designated;
    let assumption = format!("assumption_voter{d}.mdl");
    put(
        &assumption,
        serialize_assumption(&gen_voter_assumption(cfg.n, d)),
    )?;
    put("formula.satl", voting_formula_text(d) + "\n")?;
    let task = TaskSpec {
        system,
        formula: voting_formula_text(d),
        k: 1,
        premises: vec![PremiseSpec {
            agent: voter_name(d),
            assumption,
            guarantee: voting_guarantee_text(d),
            context: (1..=cfg.n).filter(|&k| k != d).map(voter_name).collect(),
        }],
    };
    put("task.agt", serialize_task(&task))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::validate_module;

    #[test]
    fn voter_shape() {
        let v = gen_voter(1);
        assert_eq!(v.states.len(), 15);
        assert_eq!(v.expanded_transition_count(), 54);
        assert!(validate_module(&v).is_valid());
    }

    #[test]
    fn coercer_shape() {
        let c = gen_coercer(2);
        assert_eq!(c.states.len(), 9);
        assert!(validate_module(&c).is_valid());
        let none = c.inputs[0].domain.index_of("none").unwrap();
        for t in &c.transitions {
            let moved: Vec<usize> = (0..2)
                .filter(|&k| c.states[t.source].label[k] != c.states[t.target].label[k])
                .collect();
            for k in moved {
                assert_eq!(t.guard.masks[k] & (1 << none), 0);
            }
        }
    }

    #[test]
    fn generated_files_load() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_voting(VotingConfig::new(2), dir.path()).unwrap();
        assert_eq!(files.len(), 6);
        for f in &files {
            let text = std::fs::read_to_string(f).unwrap();
            if f.extension().is_some_and(|e| e == "mdl") && !text.starts_with("assumption") {
                assert!(validate_module(&crate::mdl::parse_module(&text).unwrap()).is_valid());
            }
        }
        let task = AGTask::load(&dir.path().join("task.agt")).unwrap();
        assert_eq!(task.system, gen_system(2));
        assert_eq!(task.premises[0].context, vec![voter_name(2)]);
        let formula = std::fs::read_to_string(dir.path().join("formula.satl")).unwrap();
        assert!(crate::mdl::parse_formula_file(&formula).is_ok());
        assert!(write_voting(
            VotingConfig {
                n: 2,
                designated: 3
            },
            dir.path()
        )
        .is_err());
    }

    #[test]
    fn valid_up_to_eight() {
        for n in 1..=8 {
            for m in gen_system(n) {
                assert!(validate_module(&m).is_valid(), "{} n={n}", m.name);
            }
        }
    }

    #[test]
    fn assumption_is_valid() {
        for n in 1..4 {
            assert!(validate_module(&gen_voter_assumption_module(n, 1)).is_valid());
        }
    }
}
