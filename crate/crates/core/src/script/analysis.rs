//! Abstract interpretation of scripts over the mapping-set lattice.
//!
//! The abstract state maps variables to the data sources (with columns) that
//! may flow into them. The worklist only computes per-location states; a
//! final sweep over the stable states collects the model mapping `I`, read and
//! written symbols and diagnostics, so those never depend on visit order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::{Expr, StmtKind};
use super::cfg::{Action, Cfg, Loc};
use super::config::AnalyzerConfig;
use crate::diagnostics::{Diagnostic, DiagnosticCode};
use crate::error::ScriptError;
use crate::model::{normalize_symbol, ActivityAnalysis, ColumnSet, MappingSet};

/// Visits allowed per CFG location before the iteration is declared runaway.
pub const VISIT_CAP: usize = 10_000;

/// Variable → mapping set. Absent variables are bottom; empty sets are never
/// stored, so structural equality is lattice equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbstractState {
    env: BTreeMap<String, MappingSet>,
}

impl AbstractState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&MappingSet> {
        self.env.get(var)
    }

    pub fn value(&self, var: &str) -> MappingSet {
        self.env.get(var).cloned().unwrap_or_default()
    }

    /// Strong update.
    pub fn set(&mut self, var: &str, value: MappingSet) {
        if value.is_empty() {
            self.env.remove(var);
        } else {
            self.env.insert(var.to_string(), value);
        }
    }

    /// Weak update `σ[x ↦ σ(x) ⊔ value]`; returns whether the state grew.
    pub fn join_var(&mut self, var: &str, value: &MappingSet) -> bool {
        if value.is_empty() {
            return false;
        }
        match self.env.get_mut(var) {
            Some(m) => m.join_with(value),
            None => {
                self.env.insert(var.to_string(), value.clone());
                true
            }
        }
    }

    /// Variable-wise join; returns whether `self` grew.
    pub fn join_with(&mut self, other: &AbstractState) -> bool {
        let mut changed = false;
        for (v, m) in &other.env {
            changed |= self.join_var(v, m);
        }
        changed
    }

    pub fn join(&self, other: &AbstractState) -> AbstractState {
        let mut out = self.clone();
        out.join_with(other);
        out
    }

    pub fn leq(&self, other: &AbstractState) -> bool {
        self.env.iter().all(|(v, m)| other.env.get(v).is_some_and(|o| m.leq(o)))
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, &MappingSet)> {
        self.env.iter().map(|(v, m)| (v.as_str(), m))
    }
}

impl<'a> FromIterator<(&'a str, MappingSet)> for AbstractState {
    fn from_iter<T: IntoIterator<Item = (&'a str, MappingSet)>>(iter: T) -> Self {
        let mut s = AbstractState::new();
        for (v, m) in iter {
            s.join_var(v, &m);
        }
        s
    }
}

/// What a statement contributes besides the new state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Effects {
    pub mapping: MappingSet,
    pub reads: MappingSet,
    pub writes: BTreeMap<String, MappingSet>,
    pub has_sink: bool,
    pub diagnostics: BTreeSet<Diagnostic>,
}

impl Effects {
    fn absorb(&mut self, other: Effects) {
        self.mapping.join_with(&other.mapping);
        self.reads.join_with(&other.reads);
        for (s, m) in other.writes {
            self.writes.entry(s).or_default().join_with(&m);
        }
        self.has_sink |= other.has_sink;
        self.diagnostics.extend(other.diagnostics);
    }

    /// Whether every component is below the corresponding one in `other`.
    pub fn leq(&self, other: &Effects) -> bool {
        self.mapping.leq(&other.mapping)
            && self.reads.leq(&other.reads)
            && (!self.has_sink || other.has_sink)
            && self.writes.iter().all(|(s, m)| other.writes.get(s).is_some_and(|o| m.leq(o)))
    }
}

/// Evaluation context for one statement.
struct Eval<'a> {
    config: &'a AnalyzerConfig,
    activity: &'a str,
    line: usize,
    state: AbstractState,
    fx: Effects,
}

enum CallKind {
    Source,
    Sink,
    Output,
    External,
}

impl Eval<'_> {
    fn diag(&mut self, code: DiagnosticCode, message: String) {
        let d = Diagnostic::new(code, message).for_activity(self.activity);
        let d = if self.line > 0 { d.at_line(self.line) } else { d };
        self.fx.diagnostics.insert(d);
    }

    fn kind(&self, name: &str) -> CallKind {
        if self.config.is_source(name) {
            CallKind::Source
        } else if self.config.is_sink(name) {
            CallKind::Sink
        } else if self.config.is_output(name) {
            CallKind::Output
        } else {
            CallKind::External
        }
    }

    fn eval(&mut self, e: &Expr) -> MappingSet {
        match e {
            Expr::Var(v) => self.state.value(v),
            Expr::Str(_) | Expr::Num(_) | Expr::Const(_) => MappingSet::new(),
            Expr::List(items) | Expr::Tuple(items) => self.eval_all(items),
            Expr::Keyword { value, .. } => self.eval(value),
            Expr::Subscript { receiver, columns } => {
                let v = self.eval(receiver);
                self.project(v, columns)
            }
            Expr::Call { callee, args } => {
                let name = callee.last().map(String::as_str).unwrap_or_default();
                let recv_var = (callee.len() >= 2).then(|| callee[0].as_str());
                let recv_val = recv_var.map(|r| self.state.value(r)).unwrap_or_default();
                self.call(name, recv_var, recv_val, args)
            }
            Expr::MethodCall { receiver, method, args } => {
                let recv_val = self.eval(receiver);
                let recv_var = match receiver.as_ref() {
                    Expr::Var(v) => Some(v.as_str()),
                    _ => None,
                };
                self.call(method, recv_var, recv_val, args)
            }
        }
    }

    fn eval_all(&mut self, items: &[Expr]) -> MappingSet {
        let mut out = MappingSet::new();
        for i in items {
            let v = self.eval(i);
            out.join_with(&v);
        }
        out
    }

    fn project(&mut self, v: MappingSet, columns: &[String]) -> MappingSet {
        let cols: BTreeSet<String> = columns.iter().cloned().collect();
        match v.constrain(&cols) {
            Ok((projected, disjoint)) => {
                for s in disjoint {
                    let known = v.get(&s).map(ColumnSet::to_string).unwrap_or_default();
                    self.diag(
                        DiagnosticCode::DisjointProjection,
                        format!("projection {cols:?} shares no column with {s}^{known}"),
                    );
                }
                projected
            }
            // Unreachable for parser output; keep the flow rather than drop it.
            Err(_) => v,
        }
    }

    fn call(&mut self, name: &str, recv_var: Option<&str>, recv_val: MappingSet, args: &[Expr]) -> MappingSet {
        match self.kind(name) {
            CallKind::Source => {
                // Arguments may contain calls with effects of their own.
                self.eval_all(args);
                let sym = match args.iter().find_map(Expr::as_str_lit).map(normalize_symbol) {
                    Some(s) if !s.is_empty() => s,
                    _ => {
                        let s = format!("{}:unknown-in", self.activity);
                        self.diag(
                            DiagnosticCode::UnknownInput,
                            format!("{name}() reads a non-literal path; recorded as {s}"),
                        );
                        s
                    }
                };
                self.fx.reads.insert(&sym, ColumnSet::All);
                MappingSet::singleton(&sym, ColumnSet::All)
            }
            CallKind::Sink => {
                let v = self.eval_all(args);
                self.fx.mapping.join_with(&v);
                self.fx.has_sink = true;
                if let Some(r) = recv_var {
                    self.state.join_var(r, &v);
                }
                v
            }
            CallKind::Output => {
                let mut data = recv_val;
                let mut target = None;
                for a in args {
                    match a.as_str_lit() {
                        Some(lit) if target.is_none() => target = Some(normalize_symbol(lit)),
                        _ => {
                            let v = self.eval(a);
                            data.join_with(&v);
                        }
                    }
                }
                let sym = match target {
                    Some(s) if !s.is_empty() => s,
                    _ => {
                        let s = format!("{}:unknown-out", self.activity);
                        self.diag(
                            DiagnosticCode::UnknownOutput,
                            format!("{name}() writes a non-literal path; recorded as {s}"),
                        );
                        s
                    }
                };
                self.fx.writes.entry(sym).or_default().join_with(&data);
                data
            }
            CallKind::External => {
                let mut v = self.eval_all(args);
                v.join_with(&recv_val);
                v
            }
        }
    }

    fn stmt(&mut self, kind: &StmtKind) {
        match kind {
            StmtKind::Assign { targets, value } => match value {
                Expr::Subscript { .. } => {
                    let v = self.eval(value);
                    for t in targets {
                        self.state.set(t, v.clone());
                    }
                }
                Expr::Tuple(items) | Expr::List(items) if items.len() == targets.len() && targets.len() > 1 => {
                    let values: Vec<MappingSet> = items.iter().map(|i| self.eval(i)).collect();
                    for (t, v) in targets.iter().zip(values) {
                        self.state.join_var(t, &v);
                    }
                }
                _ => {
                    let v = self.eval(value);
                    for t in targets {
                        self.state.join_var(t, &v);
                    }
                }
            },
            StmtKind::Expr(e) | StmtKind::Return(Some(e)) => {
                self.eval(e);
            }
            StmtKind::Return(None)
            | StmtKind::Break
            | StmtKind::Continue
            | StmtKind::FuncDef { .. }
            | StmtKind::If { .. }
            | StmtKind::While { .. } => {}
        }
    }
}

/// Applies one statement to `state`.
pub fn transfer(
    stmt: &StmtKind,
    state: &AbstractState,
    config: &AnalyzerConfig,
    activity: &str,
) -> (AbstractState, Effects) {
    transfer_action(&Action::Stmt(stmt.clone()), 0, state, config, activity)
}

/// Applies one CFG edge action to `state`.
pub fn transfer_action(
    action: &Action,
    line: usize,
    state: &AbstractState,
    config: &AnalyzerConfig,
    activity: &str,
) -> (AbstractState, Effects) {
    let mut ev = Eval { config, activity, line, state: state.clone(), fx: Effects::default() };
    match action {
        Action::Stmt(kind) => ev.stmt(kind),
        Action::Cond(e) => {
            ev.eval(e);
        }
        Action::Skip => {}
    }
    (ev.state, ev.fx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorklistPolicy {
    Fifo,
    Lifo,
    /// Pops a uniformly random pending location, seeded.
    Random(u64),
}

/// States at the fixpoint plus iteration statistics.
#[derive(Clone, Debug)]
pub struct Fixpoint {
    pub states: Vec<Option<AbstractState>>,
    pub visits: Vec<usize>,
    pub analysis: ActivityAnalysis,
}

impl Fixpoint {
    pub fn exit_state(&self, cfg: &Cfg) -> AbstractState {
        self.states[cfg.exit].clone().unwrap_or_default()
    }

    /// Visit counts of the loop heads, in location order.
    pub fn loop_head_visits(&self, cfg: &Cfg) -> Vec<usize> {
        cfg.loop_heads.iter().map(|l| self.visits[*l]).collect()
    }

    pub fn total_visits(&self) -> usize {
        self.visits.iter().sum()
    }
}

/// Runs the worklist analysis of one script activity.
#[derive(Clone, Debug)]
pub struct ScriptAnalyzer<'a> {
    config: &'a AnalyzerConfig,
    activity: String,
    policy: WorklistPolicy,
    visit_cap: usize,
}

impl<'a> ScriptAnalyzer<'a> {
    pub fn new(config: &'a AnalyzerConfig, activity: impl Into<String>) -> Self {
        Self { config, activity: activity.into(), policy: WorklistPolicy::Fifo, visit_cap: VISIT_CAP }
    }

    pub fn with_policy(mut self, policy: WorklistPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_visit_cap(mut self, cap: usize) -> Self {
        self.visit_cap = cap;
        self
    }

    pub fn analyze(&self, cfg: &Cfg) -> Result<ActivityAnalysis, ScriptError> {
        Ok(self.fixpoint(cfg)?.analysis)
    }

    /// Least fixpoint from the empty state at the entry.
    pub fn fixpoint(&self, cfg: &Cfg) -> Result<Fixpoint, ScriptError> {
        let mut states = vec![None; cfg.locations];
        states[cfg.entry] = Some(AbstractState::new());
        self.iterate(cfg, states, vec![cfg.entry])
    }

    /// Resumes iteration from `states` with every location pending. At a
    /// fixpoint nothing changes and each location is visited once.
    pub fn reapply(&self, cfg: &Cfg, states: Vec<Option<AbstractState>>) -> Result<Fixpoint, ScriptError> {
        let pending = (0..cfg.locations).filter(|l| states[*l].is_some()).collect();
        self.iterate(cfg, states, pending)
    }

    fn iterate(
        &self,
        cfg: &Cfg,
        mut states: Vec<Option<AbstractState>>,
        initial: Vec<Loc>,
    ) -> Result<Fixpoint, ScriptError> {
        let adj = cfg.adjacency();
        let mut visits = vec![0usize; cfg.locations];
        let mut queued = vec![false; cfg.locations];
        let mut work: VecDeque<Loc> = VecDeque::new();
        for l in initial {
            if !queued[l] {
                queued[l] = true;
                work.push_back(l);
            }
        }
        let mut rng = match self.policy {
            WorklistPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        loop {
            let next = match self.policy {
                WorklistPolicy::Fifo => work.pop_front(),
                WorklistPolicy::Lifo => work.pop_back(),
                WorklistPolicy::Random(_) if work.is_empty() => None,
                WorklistPolicy::Random(_) => {
                    let i = rng.as_mut().expect("seeded for random policy").gen_range(0..work.len());
                    work.swap_remove_back(i)
                }
            };
            let Some(l) = next else { break };
            queued[l] = false;
            visits[l] += 1;
            if visits[l] > self.visit_cap {
                return Err(ScriptError::IterationLimit { location: l, limit: self.visit_cap });
            }
            let Some(state) = states[l].clone() else { continue };
            for &ei in &adj[l] {
                let e = &cfg.edges[ei];
                let (out, _) = transfer_action(&e.action, e.line, &state, self.config, &self.activity);
                let grew = match &mut states[e.to] {
                    Some(s) => s.join_with(&out),
                    slot @ None => {
                        *slot = Some(out);
                        true
                    }
                };
                if grew && !queued[e.to] {
                    queued[e.to] = true;
                    work.push_back(e.to);
                }
            }
        }
        let analysis = self.collect(cfg, &states);
        Ok(Fixpoint { states, visits, analysis })
    }

    fn collect(&self, cfg: &Cfg, states: &[Option<AbstractState>]) -> ActivityAnalysis {
        let mut fx = Effects::default();
        for e in &cfg.edges {
            if let Some(s) = &states[e.from] {
                let (_, f) = transfer_action(&e.action, e.line, s, self.config, &self.activity);
                fx.absorb(f);
            }
        }
        ActivityAnalysis {
            mapping: fx.mapping,
            reads: fx.reads,
            writes: fx.writes,
            has_sink: fx.has_sink,
            fallback: false,
            diagnostics: fx.diagnostics.into_iter().collect(),
        }
    }

    /// Whether every edge's transfer of its source state is below its target
    /// state.
    pub fn is_stable(&self, cfg: &Cfg, states: &[Option<AbstractState>]) -> bool {
        cfg.edges.iter().all(|e| match &states[e.from] {
            None => true,
            Some(s) => {
                let (out, _) = transfer_action(&e.action, e.line, s, self.config, &self.activity);
                states[e.to].as_ref().is_some_and(|t| out.leq(t))
            }
        })
    }
}

/// Analyzes `cfg` with a generic activity id.
pub fn analyze_script(cfg: &Cfg, config: &AnalyzerConfig) -> Result<ActivityAnalysis, ScriptError> {
    ScriptAnalyzer::new(config, "script").analyze(cfg)
}
