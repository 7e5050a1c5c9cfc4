//! Text formats: modules and assumptions (`.mdl`), formulas (`.satl`) and
//! assume-guarantee tasks (`.agt`), with parsers and canonical serializers.
//!
//! ```text
//! module M {
//!   var s: {a, b};
//!   input sync i: {x, y};
//!   state q0 [s=a];
//!   state q1 [s=b];
//!   init q0;
//!   trans q0 -> q1 on [i=x];
//!   trans q0 -> q0 on [i!=x];
//!   trans q1 -> q1 on *;
//! }
//! ```
//!
//! Guards constrain inputs with `I=v`, `I!=v` or `I in {v, w}`; inputs not
//! mentioned range over their whole domain. `sync` marks an input that can
//! be read in the step that writes it. Assumptions use the keyword
//! `assumption` and add `accepting { q, ... };`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::assume::Assumption;
use crate::kernel::{Domain, Guard, Module, State, Transition, Val, Variable};
use crate::logic::{Atom, PathFormula, StateFormula};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub file: Option<String>,
    /// 1-based.
    pub line: usize,
    /// 1-based.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, " (expected {e})")?;
        }
        Ok(())
    }
}

/// All errors found in one input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl ParseErrors {
    pub fn with_file(mut self, file: &str) -> Self {
        for e in &mut self.0 {
            e.span.file = Some(file.to_string());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const SYMBOLS: [&str; 18] = [
    "->", "!=", "<<", ">>", "{", "}", "[", "]", "(", ")", ";", ":", ",", "=", "*", "!", "&", "|",
];

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, column, length| SourceSpan {
        file: None,
        line,
        column,
        length,
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let w: String = chars[start..i].iter().collect();
            out.push((Tok::Word(w), span(line, col, i - start)));
            col += i - start;
            continue;
        }
        if c == '"' {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(ParseError {
                    span: span(line, col, i - start),
                    message: "unterminated string".into(),
                    expected: Some("`\"`".into()),
                });
            }
            let s: String = chars[start + 1..i].iter().collect();
            i += 1;
            out.push((Tok::Str(s), span(line, col, i - start)));
            col += i - start;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push((Tok::Sym(s), span(line, col, s.len())));
                i += s.len();
                col += s.len();
            }
            None => {
                return Err(ParseError {
                    span: span(line, col, 1),
                    message: format!("unexpected character `{c}`"),
                    expected: None,
                })
            }
        }
    }
    out.push((Tok::Eof, span(line, col, 1)));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    errors: Vec<ParseError>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn new(text: &str) -> Result<Self, ParseErrors> {
        let toks = lex(text).map_err(|e| ParseErrors(vec![e]))?;
        Ok(Parser {
            toks,
            pos: 0,
            errors: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1.clone()
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&mut self, span: SourceSpan, message: impl Into<String>, expected: Option<&str>) {
        self.errors.push(ParseError {
            span,
            message: message.into(),
            expected: expected.map(str::to_string),
        });
    }

    fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        let span = self.span();
        let found = self.peek().to_string();
        self.error_at(span, format!("unexpected {found}"), Some(expected));
        Err(())
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_word(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Word(w) => {
                let (_, span) = self.bump();
                Ok((w, span))
            }
            _ => self.unexpected(what),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_word(kw) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    /// Skips past the next `;` (or up to a closing `}`).
    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Sym(";") => {
                    self.bump();
                    return;
                }
                Tok::Sym("}") => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn finish<T>(self, value: PResult<T>) -> Result<T, ParseErrors> {
        match value {
            Ok(v) if self.errors.is_empty() => Ok(v),
            _ => Err(ParseErrors(self.errors)),
        }
    }
}

struct RawModule {
    name: String,
    vars: Vec<Variable>,
    inputs: Vec<Variable>,
    sync: BTreeSet<String>,
    states: Vec<(String, Vec<(String, String, SourceSpan)>, SourceSpan)>,
    init: Vec<(String, SourceSpan)>,
    trans: Vec<RawTrans>,
    accepting: Option<(Vec<(String, SourceSpan)>, SourceSpan)>,
}

struct RawTrans {
    source: (String, SourceSpan),
    target: (String, SourceSpan),
    /// `None` for `*`.
    guard: Option<Vec<RawConstraint>>,
}

struct RawConstraint {
    input: String,
    negated: bool,
    values: Vec<String>,
    span: SourceSpan,
}

impl Parser {
    fn domain(&mut self) -> PResult<Domain> {
        let span = self.span();
        let values = self.value_set()?;
        match Domain::new(values) {
            Ok(d) => Ok(d),
            Err(e) => {
                self.error_at(span, e.to_string(), None);
                Err(())
            }
        }
    }

    fn value_set(&mut self) -> PResult<Vec<String>> {
        self.expect_sym("{")?;
        let mut values = Vec::new();
        if !self.is_sym("}") {
            loop {
                values.push(self.expect_word("a value")?.0);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(values)
    }

    fn module_block(&mut self, keyword: &str) -> PResult<RawModule> {
        self.expect_keyword(keyword)?;
        let (name, _) = self.expect_word("a module name")?;
        self.expect_sym("{")?;
        let mut m = RawModule {
            name,
            vars: Vec::new(),
            inputs: Vec::new(),
            sync: BTreeSet::new(),
            states: Vec::new(),
            init: Vec::new(),
            trans: Vec::new(),
            accepting: None,
        };
        while !self.is_sym("}") && *self.peek() != Tok::Eof {
            if self.item(&mut m, keyword == "assumption").is_err() {
                self.recover();
            }
        }
        self.expect_sym("}")?;
        if *self.peek() != Tok::Eof {
            return self.unexpected("end of input");
        }
        Ok(m)
    }

    fn item(&mut self, m: &mut RawModule, assumption: bool) -> PResult<()> {
        let span = self.span();
        let (kw, _) =
            self.expect_word("`var`, `input`, `state`, `init`, `trans` or `accepting`")?;
        match kw.as_str() {
            "var" | "input" => {
                let sync = kw == "input"
                    && self.is_word("sync")
                    && matches!(self.peek_at(1), Tok::Word(_));
                if sync {
                    self.bump();
                }
                let (name, nspan) = self.expect_word("a variable name")?;
                self.expect_sym(":")?;
                let domain = self.domain()?;
                self.expect_sym(";")?;
                let list = if kw == "var" {
                    &mut m.vars
                } else {
                    &mut m.inputs
                };
                if list.iter().any(|v| v.name == name) {
                    self.error_at(nspan, format!("duplicate {kw} `{name}`"), None);
                    return Ok(());
                }
                list.push(Variable::new(name.clone(), domain));
                if sync {
                    m.sync.insert(name);
                }
            }
            "state" => {
                let (name, nspan) = self.expect_word("a state name")?;
                self.expect_sym("[")?;
                let mut label = Vec::new();
                if !self.is_sym("]") {
                    loop {
                        let (var, vspan) = self.expect_word("a variable name")?;
                        self.expect_sym("=")?;
                        let (value, _) = self.expect_word("a value")?;
                        label.push((var, value, vspan));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                m.states.push((name, label, nspan));
            }
            "init" => {
                let s = self.expect_word("a state name")?;
                self.expect_sym(";")?;
                m.init.push(s);
            }
            "trans" => {
                let source = self.expect_word("a state name")?;
                self.expect_sym("->")?;
                let target = self.expect_word("a state name")?;
                let guard = if self.is_word("on") {
                    self.bump();
                    if self.eat_sym("*") {
                        None
                    } else {
                        Some(self.guard()?)
                    }
                } else {
                    None
                };
                self.expect_sym(";")?;
                m.trans.push(RawTrans {
                    source,
                    target,
                    guard,
                });
            }
            "accepting" if assumption => {
                let mut states = Vec::new();
                self.expect_sym("{")?;
                if !self.is_sym("}") {
                    loop {
                        states.push(self.expect_word("a state name")?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("}")?;
                self.eat_sym(";");
                m.accepting = Some((states, span));
            }
            other => {
                self.error_at(
                    span,
                    format!("unknown item `{other}`"),
                    Some("`var`, `input`, `state`, `init` or `trans`"),
                );
                return Err(());
            }
        }
        Ok(())
    }

    fn guard(&mut self) -> PResult<Vec<RawConstraint>> {
        self.expect_sym("[")?;
        let mut out = Vec::new();
        if !self.is_sym("]") {
            loop {
                let (input, span) = self.expect_word("an input name")?;
                let c = if self.eat_sym("=") {
                    RawConstraint {
                        input,
                        negated: false,
                        values: vec![self.expect_word("a value")?.0],
                        span,
                    }
                } else if self.eat_sym("!=") {
                    RawConstraint {
                        input,
                        negated: true,
                        values: vec![self.expect_word("a value")?.0],
                        span,
                    }
                } else if self.is_word("in") {
                    self.bump();
                    RawConstraint {
                        input,
                        negated: false,
                        values: self.value_set()?,
                        span,
                    }
                } else {
                    return self.unexpected("`=`, `!=` or `in`");
                };
                out.push(c);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("]")?;
        Ok(out)
    }
}

fn resolve(
    raw: RawModule,
    errors: &mut Vec<ParseError>,
) -> Option<(Module, Option<BTreeSet<usize>>)> {
    let before = errors.len();
    let err = |errors: &mut Vec<ParseError>, span: &SourceSpan, msg: String| {
        errors.push(ParseError {
            span: span.clone(),
            message: msg,
            expected: None,
        })
    };
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut states = Vec::new();
    for (name, label, span) in &raw.states {
        if index.contains_key(name) {
            err(errors, span, format!("duplicate state `{name}`"));
            continue;
        }
        let mut values: Vec<Option<Val>> = vec![None; raw.vars.len()];
        for (var, value, vspan) in label {
            let Some(k) = raw.vars.iter().position(|v| &v.name == var) else {
                err(errors, vspan, format!("undeclared variable `{var}`"));
                continue;
            };
            if values[k].is_some() {
                err(errors, vspan, format!("variable `{var}` assigned twice"));
                continue;
            }
            match raw.vars[k].domain.index_of(value) {
                Some(x) => values[k] = Some(x),
                None => err(
                    errors,
                    vspan,
                    format!("value `{value}` is not in the domain of `{var}`"),
                ),
            }
        }
        for (k, v) in values.iter().enumerate() {
            if v.is_none() && !label.iter().any(|(var, _, _)| var == &raw.vars[k].name) {
                err(
                    errors,
                    span,
                    format!("state `{name}` does not assign `{}`", raw.vars[k].name),
                );
            }
        }
        index.insert(name.clone(), states.len());
        states.push(State {
            name: name.clone(),
            label: values.into_iter().map(|v| v.unwrap_or(0)).collect(),
        });
    }
    let lookup = |errors: &mut Vec<ParseError>, (name, span): &(String, SourceSpan)| {
        let r = index.get(name).copied();
        if r.is_none() {
            err(errors, span, format!("undeclared state {name}"));
        }
        r
    };
    let init = match raw.init.as_slice() {
        [] => {
            errors.push(ParseError {
                span: SourceSpan::default(),
                message: format!("module `{}` has no init state", raw.name),
                expected: Some("`init`".into()),
            });
            None
        }
        [one] => lookup(errors, one),
        [_, second, ..] => {
            err(errors, &second.1, "init state declared twice".into());
            None
        }
    };
    let mut transitions = Vec::new();
    for t in &raw.trans {
        let s = lookup(errors, &t.source);
        let d = lookup(errors, &t.target);
        let mut guard = Guard::any(&raw.inputs);
        for c in t.guard.iter().flatten() {
            let Some(k) = raw.inputs.iter().position(|v| v.name == c.input) else {
                err(errors, &c.span, format!("undeclared input `{}`", c.input));
                continue;
            };
            let dom = &raw.inputs[k].domain;
            let mut mask = 0u64;
            for v in &c.values {
                match dom.index_of(v) {
                    Some(x) => mask |= 1u64 << x,
                    None => err(
                        errors,
                        &c.span,
                        format!("value `{v}` is not in the domain of `{}`", c.input),
                    ),
                }
            }
            if c.negated {
                mask = dom.full_mask() & !mask;
            }
            guard.masks[k] &= mask;
        }
        if let (Some(source), Some(target)) = (s, d) {
            transitions.push(Transition {
                source,
                guard,
                target,
            });
        }
    }
    let accepting = raw.accepting.as_ref().map(|(names, span)| {
        if names.is_empty() {
            err(errors, span, "accepting set must be non-empty".into());
        }
        names
            .iter()
            .filter_map(|n| lookup(errors, n))
            .collect::<BTreeSet<usize>>()
    });
    if errors.len() > before {
        return None;
    }
    Some((
        Module {
            name: raw.name,
            vars: raw.vars,
            inputs: raw.inputs,
            sync: raw.sync,
            states,
            init: init.expect("init resolved when no errors"),
            transitions,
        },
        accepting,
    ))
}

/// Parses a module. Structural validity is checked separately by
/// [`crate::kernel::validate_module`].
pub fn parse_module(text: &str) -> Result<Module, ParseErrors> {
    let mut p = Parser::new(text)?;
    let raw = p.module_block("module");
    let raw = match raw {
        Ok(r) if p.errors.is_empty() => r,
        _ => return Err(ParseErrors(p.errors)),
    };
    let mut errors = Vec::new();
    match resolve(raw, &mut errors) {
        Some((m, _)) => Ok(m),
        None => Err(ParseErrors(errors)),
    }
}

pub fn parse_assumption(text: &str) -> Result<Assumption, ParseErrors> {
    let mut p = Parser::new(text)?;
    let raw = p.module_block("assumption");
    let raw = match raw {
        Ok(r) if p.errors.is_empty() => r,
        _ => return Err(ParseErrors(p.errors)),
    };
    let end = p.span();
    let mut errors = Vec::new();
    let Some((module, accepting)) = resolve(raw, &mut errors) else {
        return Err(ParseErrors(errors));
    };
    let Some(accepting) = accepting else {
        return Err(ParseErrors(vec![ParseError {
            span: end,
            message: "assumption has no accepting set".into(),
            expected: Some("`accepting { ... }`".into()),
        }]));
    };
    Assumption::new(module, accepting).map_err(|e| {
        ParseErrors(vec![ParseError {
            span: end,
            message: e.to_string(),
            expected: None,
        }])
    })
}

fn write_values(out: &mut String, values: &[String]) {
    out.push('{');
    out.push_str(&values.join(", "));
    out.push('}');
}

fn write_module_body(out: &mut String, m: &Module) {
    for v in &m.vars {
        let _ = write!(out, "  var {}: ", v.name);
        write_values(out, v.domain.values());
        out.push_str(";\n");
    }
    for v in &m.inputs {
        let sync = if m.sync.contains(&v.name) {
            "sync "
        } else {
            ""
        };
        let _ = write!(out, "  input {sync}{}: ", v.name);
        write_values(out, v.domain.values());
        out.push_str(";\n");
    }
    for s in &m.states {
        let label: Vec<String> = m
            .vars
            .iter()
            .zip(&s.label)
            .map(|(v, &x)| format!("{}={}", v.name, v.domain.value(x)))
            .collect();
        let _ = writeln!(out, "  state {} [{}];", s.name, label.join(", "));
    }
    let _ = writeln!(out, "  init {};", m.states[m.init].name);
    for t in &m.transitions {
        let _ = writeln!(
            out,
            "  trans {} -> {} on {};",
            m.states[t.source].name,
            m.states[t.target].name,
            guard_text(m, &t.guard)
        );
    }
}

/// Canonical guard text: `*` or a bracketed list of constraints.
pub fn guard_text(m: &Module, g: &Guard) -> String {
    let mut parts = Vec::new();
    for (v, &mask) in m.inputs.iter().zip(&g.masks) {
        let full = v.domain.full_mask();
        if mask == full {
            continue;
        }
        let on: Vec<&str> = crate::kernel::BitIter(mask)
            .map(|x| v.domain.value(x))
            .collect();
        let off: Vec<&str> = crate::kernel::BitIter(full & !mask)
            .map(|x| v.domain.value(x))
            .collect();
        parts.push(match (on.as_slice(), off.as_slice()) {
            ([one], _) => format!("{}={one}", v.name),
            (_, [one]) => format!("{}!={one}", v.name),
            _ => format!("{} in {{{}}}", v.name, on.join(", ")),
        });
    }
    if parts.is_empty() {
        "*".into()
    } else {
        format!("[{}]", parts.join(", "))
    }
}

pub fn serialize_module(m: &Module) -> String {
    let mut out = format!("module {} {{\n", m.name);
    write_module_body(&mut out, m);
    out.push_str("}\n");
    out
}

pub fn serialize_assumption(a: &Assumption) -> String {
    let mut out = format!("assumption {} {{\n", a.module.name);
    write_module_body(&mut out, &a.module);
    let names: Vec<&str> = a
        .accepting
        .iter()
        .map(|&q| a.module.states[q].name.as_str())
        .collect();
    let _ = writeln!(out, "  accepting {{{}}};", names.join(", "));
    out.push_str("}\n");
    out
}

/// Formula syntax tree before the split into state and path levels.
#[derive(Debug, Clone)]
enum Ast {
    True,
    Atom(Atom),
    Not(Box<Ast>),
    And(Box<Ast>, Box<Ast>),
    Or(Box<Ast>, Box<Ast>),
    Until(Box<Ast>, Box<Ast>),
    Always(Box<Ast>),
    Eventually(Box<Ast>),
    Coalition(Vec<String>, Box<Ast>, SourceSpan),
}

impl Parser {
    fn f_or(&mut self) -> PResult<Ast> {
        let mut a = self.f_and()?;
        while self.eat_sym("|") {
            let b = self.f_and()?;
            a = Ast::Or(Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn f_and(&mut self) -> PResult<Ast> {
        let mut a = self.f_until()?;
        while self.eat_sym("&") {
            let b = self.f_until()?;
            a = Ast::And(Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn f_until(&mut self) -> PResult<Ast> {
        let a = self.f_unary()?;
        if self.is_word("U") && !matches!(self.peek_at(1), Tok::Sym("=") | Tok::Sym("!=")) {
            self.bump();
            let b = self.f_until()?;
            return Ok(Ast::Until(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn f_unary(&mut self) -> PResult<Ast> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Sym("!") => {
                self.bump();
                Ok(Ast::Not(Box::new(self.f_unary()?)))
            }
            Tok::Sym("(") => {
                self.bump();
                let a = self.f_or()?;
                self.expect_sym(")")?;
                Ok(a)
            }
            Tok::Sym("<<") => {
                self.bump();
                let mut agents = Vec::new();
                if !self.is_sym(">>") {
                    loop {
                        agents.push(self.expect_word("an agent name")?.0);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym(">>")?;
                let body = self.f_or()?;
                Ok(Ast::Coalition(agents, Box::new(body), span))
            }
            Tok::Sym("{") => {
                self.bump();
                let mut pairs = Vec::new();
                loop {
                    let (var, _) = self.expect_word("a variable name")?;
                    self.expect_sym("=")?;
                    let (value, _) = self.expect_word("a value")?;
                    pairs.push((var, value));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                match Atom::new(pairs) {
                    Ok(a) => Ok(Ast::Atom(a)),
                    Err(e) => {
                        self.error_at(span, e.to_string(), None);
                        Err(())
                    }
                }
            }
            Tok::Word(w) => {
                let next_is_eq = matches!(self.peek_at(1), Tok::Sym("=") | Tok::Sym("!="));
                if !next_is_eq {
                    match w.as_str() {
                        "true" => {
                            self.bump();
                            return Ok(Ast::True);
                        }
                        "false" => {
                            self.bump();
                            return Ok(Ast::Not(Box::new(Ast::True)));
                        }
                        "G" | "F" if self.starts_formula(1) => {
                            self.bump();
                            let body = Box::new(self.f_unary()?);
                            return Ok(if w == "G" {
                                Ast::Always(body)
                            } else {
                                Ast::Eventually(body)
                            });
                        }
                        "X" if self.starts_formula(1) => {
                            self.error_at(span, "next-step operator `X` is not supported", None);
                            return Err(());
                        }
                        _ => {}
                    }
                }
                self.bump();
                if self.eat_sym("=") {
                    let (value, _) = self.expect_word("a value")?;
                    Ok(Ast::Atom(Atom::eq(w, value)))
                } else if self.eat_sym("!=") {
                    let (value, _) = self.expect_word("a value")?;
                    Ok(Ast::Not(Box::new(Ast::Atom(Atom::eq(w, value)))))
                } else {
                    Ok(Ast::Atom(Atom::eq(w, "true")))
                }
            }
            _ => self.unexpected("a formula"),
        }
    }

    fn starts_formula(&self, k: usize) -> bool {
        matches!(
            self.peek_at(k),
            Tok::Word(_) | Tok::Sym("(") | Tok::Sym("!") | Tok::Sym("<<") | Tok::Sym("{")
        )
    }

    fn formula_text(&mut self) -> PResult<Ast> {
        let a = self.f_or()?;
        if *self.peek() != Tok::Eof {
            return self.unexpected("end of formula");
        }
        Ok(a)
    }
}

impl Parser {
    fn to_path(&mut self, a: Ast) -> PResult<PathFormula> {
        Ok(match a {
            Ast::True => PathFormula::True,
            Ast::Atom(x) => PathFormula::Atom(x),
            Ast::Not(x) => PathFormula::not(self.to_path(*x)?),
            Ast::And(x, y) => PathFormula::and(self.to_path(*x)?, self.to_path(*y)?),
            Ast::Or(x, y) => PathFormula::or(self.to_path(*x)?, self.to_path(*y)?),
            Ast::Until(x, y) => PathFormula::until(self.to_path(*x)?, self.to_path(*y)?),
            Ast::Always(x) => PathFormula::always(self.to_path(*x)?),
            Ast::Eventually(x) => PathFormula::eventually(self.to_path(*x)?),
            Ast::Coalition(_, _, span) => {
                self.error_at(span, "sATL* forbids nested coalition operators", None);
                return Err(());
            }
        })
    }

    fn to_state(&mut self, a: Ast, span: &SourceSpan) -> PResult<StateFormula> {
        Ok(match a {
            Ast::True => StateFormula::True,
            Ast::Atom(x) => StateFormula::Atom(x),
            Ast::Not(x) => StateFormula::not(self.to_state(*x, span)?),
            Ast::And(x, y) => StateFormula::and(self.to_state(*x, span)?, self.to_state(*y, span)?),
            Ast::Or(x, y) => StateFormula::or(self.to_state(*x, span)?, self.to_state(*y, span)?),
            Ast::Coalition(agents, body, _) => {
                StateFormula::coalition(agents, self.to_path(*body)?)
            }
            Ast::Until(..) | Ast::Always(_) | Ast::Eventually(_) => {
                self.error_at(
                    span.clone(),
                    "temporal operator outside a coalition modality",
                    Some("`<<...>>`"),
                );
                return Err(());
            }
        })
    }
}

/// Parses a state formula such as `<<Voter1>> G (!pstatus_1 | vote_1=one)`.
/// A bare variable `v` abbreviates `v=true`.
pub fn parse_formula(text: &str) -> Result<StateFormula, ParseErrors> {
    let mut p = Parser::new(text)?;
    let span = p.span();
    let r = p.formula_text().and_then(|a| p.to_state(a, &span));
    p.finish(r)
}

/// Parses a path formula (no coalition operators).
pub fn parse_path_formula(text: &str) -> Result<PathFormula, ParseErrors> {
    let mut p = Parser::new(text)?;
    let r = p.formula_text().and_then(|a| p.to_path(a));
    p.finish(r)
}

/// Formulas of a `.satl` file, one per non-empty, non-comment line.
pub fn parse_formula_file(text: &str) -> Result<Vec<StateFormula>, ParseErrors> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        match parse_formula(line) {
            Ok(f) => out.push(f),
            Err(ParseErrors(es)) => errors.extend(es.into_iter().map(|mut e| {
                e.span.line = i + 1;
                e
            })),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ParseErrors(errors))
    }
}

fn atom_text(a: &Atom) -> String {
    let pairs: Vec<String> = a.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if pairs.len() == 1 {
        pairs[0].clone()
    } else {
        format!("{{{}}}", pairs.join(", "))
    }
}

fn path_text(f: &PathFormula) -> String {
    let wrap = |g: &PathFormula| match g {
        PathFormula::True | PathFormula::Atom(_) | PathFormula::Not(_) => path_text(g),
        _ => format!("({})", path_text(g)),
    };
    match f {
        PathFormula::True => "true".into(),
        PathFormula::Atom(a) => atom_text(a),
        PathFormula::Not(g) => format!("!{}", wrap(g)),
        PathFormula::And(a, b) => format!("{} & {}", wrap(a), wrap(b)),
        PathFormula::Until(a, b) => format!("{} U {}", wrap(a), wrap(b)),
    }
}

fn state_text(f: &StateFormula) -> String {
    let wrap = |g: &StateFormula| match g {
        StateFormula::True | StateFormula::Atom(_) | StateFormula::Not(_) => state_text(g),
        _ => format!("({})", state_text(g)),
    };
    match f {
        StateFormula::True => "true".into(),
        StateFormula::Atom(a) => atom_text(a),
        StateFormula::Not(g) => format!("!{}", wrap(g)),
        StateFormula::And(a, b) => format!("{} & {}", wrap(a), wrap(b)),
        StateFormula::Coalition { agents, path } => {
            format!("<<{}>> {}", agents.join(", "), path_text(path))
        }
    }
}

/// Canonical text over the core connectives; parses back to an equal tree.
pub fn serialize_path_formula(f: &PathFormula) -> String {
    path_text(f)
}

pub fn serialize_formula(f: &StateFormula) -> String {
    state_text(f)
}

/// One premise entry of a task file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseSpec {
    pub agent: String,
    pub assumption: String,
    pub guarantee: String,
    /// Further modules composed with the agent and its assumption.
    pub context: Vec<String>,
}

/// Parsed `.agt` file. Paths are relative to the task file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSpec {
    pub system: Vec<String>,
    pub formula: String,
    pub k: usize,
    pub premises: Vec<PremiseSpec>,
}

/// Task syntax:
///
/// ```text
/// system "voter1.mdl" "voter2.mdl" "coercer.mdl";
/// formula "<<Voter1>> G (!pstatus_1 | vote_1=one)";
/// k 1;
/// premise Voter1 {
///   assumption "assumption_voter1.mdl";
///   guarantee "G (!pstatus_1 | vote_1=one)";
///   context Voter2;
/// }
/// ```
pub fn parse_task(text: &str) -> Result<TaskSpec, ParseErrors> {
    let mut p = Parser::new(text)?;
    let r = p.task();
    p.finish(r)
}

impl Parser {
    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn task(&mut self) -> PResult<TaskSpec> {
        let mut system = Vec::new();
        let mut formula = None;
        let mut k = 1;
        let mut premises = Vec::new();
        while *self.peek() != Tok::Eof {
            let span = self.span();
            let (kw, _) = self.expect_word("`system`, `formula`, `k` or `premise`")?;
            match kw.as_str() {
                "system" => {
                    while let Tok::Str(_) = self.peek() {
                        system.push(self.string("a file name")?);
                    }
                    self.expect_sym(";")?;
                }
                "formula" => {
                    formula = Some(self.string("a quoted formula")?);
                    self.expect_sym(";")?;
                }
                "k" => {
                    let (w, wspan) = self.expect_word("a radius")?;
                    match w.parse::<usize>() {
                        Ok(v) if v >= 1 => k = v,
                        _ => self.error_at(wspan, "radius must be a positive integer", None),
                    }
                    self.expect_sym(";")?;
                }
                "premise" => premises.push(self.premise()?),
                other => {
                    self.error_at(span, format!("unknown task item `{other}`"), None);
                    return Err(());
                }
            }
        }
        let Some(formula) = formula else {
            let span = self.span();
            self.error_at(span, "task has no formula", Some("`formula`"));
            return Err(());
        };
        Ok(TaskSpec {
            system,
            formula,
            k,
            premises,
        })
    }

    fn premise(&mut self) -> PResult<PremiseSpec> {
        let (agent, aspan) = self.expect_word("an agent name")?;
        self.expect_sym("{")?;
        let (mut assumption, mut guarantee, mut context) = (None, None, Vec::new());
        while !self.is_sym("}") {
            let span = self.span();
            let (kw, _) = self.expect_word("`assumption`, `guarantee` or `context`")?;
            match kw.as_str() {
                "assumption" => assumption = Some(self.string("a file name")?),
                "guarantee" => guarantee = Some(self.string("a quoted path formula")?),
                "context" => {
                    while let Tok::Word(_) = self.peek() {
                        context.push(self.expect_word("a module name")?.0);
                    }
                }
                other => {
                    self.error_at(span, format!("unknown premise item `{other}`"), None);
                    return Err(());
                }
            }
            self.expect_sym(";")?;
        }
        self.expect_sym("}")?;
        match (assumption, guarantee) {
            (Some(assumption), Some(guarantee)) => Ok(PremiseSpec {
                agent,
                assumption,
                guarantee,
                context,
            }),
            _ => {
                self.error_at(aspan, "premise needs an assumption and a guarantee", None);
                Err(())
            }
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

pub fn serialize_task(t: &TaskSpec) -> String {
    let mut out = String::new();
    let files: Vec<String> = t.system.iter().map(|s| quote(s)).collect();
    let _ = writeln!(out, "system {};", files.join(" "));
    let _ = writeln!(out, "formula {};", quote(&t.formula));
    let _ = writeln!(out, "k {};", t.k);
    for p in &t.premises {
        let _ = writeln!(out, "premise {} {{", p.agent);
        let _ = writeln!(out, "  assumption {};", quote(&p.assumption));
        let _ = writeln!(out, "  guarantee {};", quote(&p.guarantee));
        if !p.context.is_empty() {
            let _ = writeln!(out, "  context {};", p.context.join(" "));
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_coercer, gen_voter, gen_voter_assumption};
    use crate::kernel::validate_module;
    use proptest::prelude::*;

    const MINIMAL: &str = "module M { var s: {a,b}; input i: {x,y}; state q0 [s=a]; state q1 [s=b]; init q0; trans q0 -> q1 on *; trans q1 -> q1 on *; }";

    #[test]
    fn minimal_module() {
        let m = parse_module(MINIMAL).unwrap();
        assert_eq!(m.states.len(), 2);
        assert_eq!(m.expanded_transition_count(), 4);
        assert!(validate_module(&m).is_valid());
    }

    #[test]
    fn undeclared_init() {
        let text = MINIMAL.replace("init q0", "init q9");
        let errs = parse_module(&text).unwrap_err().0;
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].message, "undeclared state q9");
        let col = text.find("q9").unwrap() + 1;
        assert_eq!(
            (errs[0].span.line, errs[0].span.column, errs[0].span.length),
            (1, col, 2)
        );
    }

    #[test]
    fn reports_several_errors() {
        let text =
            "module M {\n var s: {a};\n state q [s=c];\n bogus;\n init q;\n trans q -> r on *;\n}";
        let errs = parse_module(text).unwrap_err().0;
        assert!(
            errs.iter().any(|e| e.message.contains("unknown item")),
            "{errs:?}"
        );
        let errs2 = parse_module(&text.replace(" bogus;\n", "")).unwrap_err().0;
        let msgs: Vec<&str> = errs2.iter().map(|e| e.message.as_str()).collect();
        assert!(msgs.contains(&"value `c` is not in the domain of `s`"));
        assert!(msgs.contains(&"undeclared state r"));
    }

    #[test]
    fn guard_forms() {
        let text = "module M { var s: {a}; input i: {x,y,z}; input j: {u,w}; state q [s=a]; init q;\n trans q -> q on [i!=x, j=u]; trans q -> q on [i in {y,z}]; trans q -> q on [i=x]; }";
        let m = parse_module(text).unwrap();
        let sizes: Vec<u128> = m.transitions.iter().map(|t| t.guard.size()).collect();
        assert_eq!(sizes, vec![2, 4, 2]);
        assert_eq!(m.expanded_transition_count(), 8);
        assert_eq!(parse_module(&serialize_module(&m)).unwrap(), m);
    }

    #[test]
    fn voter_round_trip() {
        let v = gen_voter(1);
        let text = serialize_module(&v);
        let back = parse_module(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(
            (back.states.len(), back.expanded_transition_count()),
            (15, 54)
        );
        assert!(text.contains("input sync pun_1"));
        let c = gen_coercer(3);
        assert_eq!(parse_module(&serialize_module(&c)).unwrap(), c);
    }

    #[test]
    fn assumptions() {
        let text = MINIMAL
            .replacen("module", "assumption", 1)
            .replace("; }", "; accepting { q0 }; }");
        let a = parse_assumption(&text).unwrap();
        assert_eq!(a.accepting, BTreeSet::from([0]));
        let empty = text.replace("accepting { q0 }", "accepting { }");
        let errs = parse_assumption(&empty).unwrap_err().0;
        assert_eq!(errs[0].message, "accepting set must be non-empty");
        let a = gen_voter_assumption(2, 1);
        let back = parse_assumption(&serialize_assumption(&a)).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.module.inputs.len(), 1);
        assert_eq!(back.module.inputs[0].name, "reported_1");
    }

    #[test]
    fn single_state_idempotent() {
        let text = "module S { var v: {z}; state only [v=z]; init only; trans only -> only on *; }";
        let once = serialize_module(&parse_module(text).unwrap());
        let twice = serialize_module(&parse_module(&once).unwrap());
        assert_eq!(once, twice);
    }

    fn voting_formula() -> StateFormula {
        let p = PathFormula::atom(Atom::eq("pstatus_1", "true"));
        let q = PathFormula::atom(Atom::eq("vote_1", "one"));
        StateFormula::coalition(
            vec!["Voter1".into()],
            PathFormula::always(PathFormula::or(PathFormula::not(p), q)),
        )
    }

    #[test]
    fn formulas() {
        let f = parse_formula("<<Voter1>> G (!(pstatus_1=true) | vote_1=one)").unwrap();
        assert_eq!(f, voting_formula());
        assert_eq!(
            parse_formula("<<Voter1>> G (!pstatus_1 | vote_1=one)").unwrap(),
            f
        );
        assert_eq!(parse_formula(&serialize_formula(&f)).unwrap(), f);
        let errs = parse_formula("<<A>> <<B>> F p=a").unwrap_err().0;
        assert_eq!(errs[0].message, "sATL* forbids nested coalition operators");
        let u = parse_path_formula("p=a U q=b").unwrap();
        assert_eq!(
            u,
            PathFormula::until(
                PathFormula::atom(Atom::eq("p", "a")),
                PathFormula::atom(Atom::eq("q", "b"))
            )
        );
        let x = parse_formula("<<A>> X p=a").unwrap_err().0;
        assert!(x[0].message.contains("next-step"));
        assert!(parse_formula("G p=a").is_err());
        let multi = parse_formula("<<A, B>> F {x=a, y=b}").unwrap();
        assert_eq!(parse_formula(&serialize_formula(&multi)).unwrap(), multi);
        assert_eq!(
            parse_formula("<<>> F G=a").unwrap(),
            StateFormula::coalition(
                vec![],
                PathFormula::eventually(PathFormula::atom(Atom::eq("G", "a")))
            )
        );
    }

    #[test]
    fn task_round_trip() {
        let text = "# task\nsystem \"voter1.mdl\" \"coercer.mdl\";\nformula \"<<Voter1>> G (!pstatus_1 | vote_1=one)\";\nk 1;\npremise Voter1 {\n  assumption \"assumption_voter1.mdl\";\n  guarantee \"G (!pstatus_1 | vote_1=one)\";\n  context Voter2 Voter3;\n}\n";
        let t = parse_task(text).unwrap();
        assert_eq!(t.system, vec!["voter1.mdl", "coercer.mdl"]);
        assert_eq!(t.premises[0].context, vec!["Voter2", "Voter3"]);
        assert_eq!(parse_task(&serialize_task(&t)).unwrap(), t);
        assert!(parse_task("k 0; formula \"true\";").is_err());
    }

    fn path_formula() -> impl Strategy<Value = PathFormula> {
        let leaf = prop_oneof![
            Just(PathFormula::True),
            (0..3usize, 0..2usize).prop_map(|(v, d)| PathFormula::atom(Atom::eq(
                ["x", "U", "G"][v],
                ["a", "true"][d]
            ))),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(PathFormula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| PathFormula::and(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| PathFormula::until(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn path_formula_round_trip(f in path_formula()) {
            prop_assert_eq!(parse_path_formula(&serialize_path_formula(&f)).unwrap(), f);
        }

        #[test]
        fn error_spans_inside_text(cut in 0usize..400, len in 1usize..6) {
            let text = serialize_module(&gen_voter(1));
            let cut = cut.min(text.len() - 1);
            let end = (cut + len).min(text.len());
            if !text.is_char_boundary(cut) || !text.is_char_boundary(end) {
                return Ok(());
            }
            let broken = format!("{}{}", &text[..cut], &text[end..]);
            if let Err(ParseErrors(errs)) = parse_module(&broken) {
                let lines: Vec<&str> = broken.split('\n').collect();
                for e in errs {
                    prop_assert!(!e.message.is_empty());
                    if e.span.line == 0 {
                        continue;
                    }
                    prop_assert!(e.span.line <= lines.len());
                    prop_assert!(e.span.column <= lines[e.span.line - 1].chars().count() + 1);
                }
            }
        }
    }
}
