//! Control-flow graph over script statements.
//!
//! Locations are dense indices. Each simple statement sits on exactly one
//! edge; `if` and `while` contribute a condition edge followed by branch
//! structure. Unreachable locations (after `break` in both branches, say) are
//! pruned so every location is reachable from the entry.

use std::collections::BTreeSet;

use super::ast::{Expr, ScriptAst, Stmt, StmtKind};

pub type Loc = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    /// A simple statement: assignment, expression, return, def, break, continue.
    Stmt(StmtKind),
    /// Evaluation of an `if`/`while` condition.
    Cond(Expr),
    /// Pure control transfer.
    Skip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: Loc,
    pub to: Loc,
    pub action: Action,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Cfg {
    pub locations: usize,
    pub edges: Vec<Edge>,
    pub entry: Loc,
    pub exit: Loc,
    pub loop_heads: BTreeSet<Loc>,
}

impl Cfg {
    pub fn successors(&self, loc: Loc) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == loc)
    }

    /// Outgoing edge indices per location.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.locations];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.from].push(i);
        }
        adj
    }

    /// Whether the graph contains a loop.
    pub fn has_loop(&self) -> bool {
        !self.loop_heads.is_empty()
    }

    pub fn statement_edges(&self) -> usize {
        self.edges.iter().filter(|e| !matches!(e.action, Action::Skip)).count()
    }
}

struct LoopCtx {
    head: Loc,
    exit: Loc,
}

struct Builder {
    locations: usize,
    edges: Vec<Edge>,
    loop_heads: BTreeSet<Loc>,
    loops: Vec<LoopCtx>,
}

impl Builder {
    fn fresh(&mut self) -> Loc {
        self.locations += 1;
        self.locations - 1
    }

    fn edge(&mut self, from: Loc, to: Loc, action: Action, line: usize) {
        self.edges.push(Edge { from, to, action, line });
    }

    fn seq(&mut self, stmts: &[Stmt], from: Loc, to: Loc) {
        if stmts.is_empty() {
            self.edge(from, to, Action::Skip, 0);
            return;
        }
        let mut cur = from;
        for (i, s) in stmts.iter().enumerate() {
            let next = if i + 1 == stmts.len() { to } else { self.fresh() };
            self.stmt(s, cur, next);
            cur = next;
        }
    }

    fn stmt(&mut self, s: &Stmt, from: Loc, to: Loc) {
        match &s.kind {
            StmtKind::If { cond, then_block, else_block } => {
                let branch = self.fresh();
                self.edge(from, branch, Action::Cond(cond.clone()), s.line);
                self.seq(then_block, branch, to);
                self.seq(else_block, branch, to);
            }
            StmtKind::While { cond, body } => {
                let head = self.fresh();
                self.loop_heads.insert(head);
                self.edge(from, head, Action::Skip, s.line);
                let inside = self.fresh();
                self.edge(head, inside, Action::Cond(cond.clone()), s.line);
                self.edge(inside, to, Action::Skip, s.line);
                self.loops.push(LoopCtx { head, exit: to });
                self.seq(body, inside, head);
                self.loops.pop();
            }
            StmtKind::Break | StmtKind::Continue => {
                let target = match self.loops.last() {
                    Some(l) if s.kind == StmtKind::Break => l.exit,
                    Some(l) => l.head,
                    // Outside a loop Python rejects this; treat it as a no-op.
                    None => to,
                };
                self.edge(from, target, Action::Stmt(s.kind.clone()), s.line);
            }
            other => self.edge(from, to, Action::Stmt(other.clone()), s.line),
        }
    }
}

/// Builds the CFG. A top-level `return` flows to the exit.
pub fn build_cfg(ast: &ScriptAst) -> Cfg {
    let mut b = Builder { locations: 1, edges: Vec::new(), loop_heads: BTreeSet::new(), loops: Vec::new() };
    if ast.statements.is_empty() {
        return Cfg { locations: 1, edges: Vec::new(), entry: 0, exit: 0, loop_heads: BTreeSet::new() };
    }
    let exit = b.fresh();
    let stmts = &ast.statements;
    let mut cur = 0;
    for (i, s) in stmts.iter().enumerate() {
        let next = if i + 1 == stmts.len() { exit } else { b.fresh() };
        if matches!(s.kind, StmtKind::Return(_)) {
            b.edge(cur, exit, Action::Stmt(s.kind.clone()), s.line);
            break;
        }
        b.stmt(s, cur, next);
        cur = next;
    }
    prune(b, exit)
}

/// Drops unreachable locations and renumbers the rest in breadth-first order
/// from the entry, so a straight-line chain reads 0 → 1 → … → n.
fn prune(b: Builder, exit: Loc) -> Cfg {
    let mut adj = vec![Vec::new(); b.locations];
    for e in &b.edges {
        adj[e.from].push(e.to);
    }
    let mut remap = vec![usize::MAX; b.locations];
    remap[0] = 0;
    let mut n = 1;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(l) = queue.pop_front() {
        for &t in &adj[l] {
            if remap[t] == usize::MAX {
                remap[t] = n;
                n += 1;
                queue.push_back(t);
            }
        }
    }
    if remap[exit] == usize::MAX {
        remap[exit] = n;
        n += 1;
    }
    let edges = b
        .edges
        .into_iter()
        .filter(|e| remap[e.from] != usize::MAX)
        .map(|e| Edge { from: remap[e.from], to: remap[e.to], ..e })
        .collect();
    Cfg {
        locations: n,
        edges,
        entry: 0,
        exit: remap[exit],
        loop_heads: b.loop_heads.into_iter().filter(|l| remap[*l] != usize::MAX).map(|l| remap[l]).collect(),
    }
}
