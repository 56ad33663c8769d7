//! Inlining of calls to functions defined at the top level of the script.
//!
//! A call `f(a, b)` to a local `def f(x, y)` is hoisted out of its
//! expression: the parameters are bound to fresh variables, the body is
//! cloned with its locals renamed, every `return e` becomes a weak
//! assignment to a fresh result variable, and the call is replaced by that
//! variable. A parameter bound to a string literal and never reassigned is
//! replaced by the literal in the clone, so paths passed to helpers stay
//! visible to source and output calls. Cloned bodies are inlined again with
//! one less level; calls left over when the depth runs out keep external-call
//! semantics.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Expr, ScriptAst, Stmt, StmtKind, RETURN_CALL};

pub fn inline_functions(ast: &ScriptAst, depth: usize) -> ScriptAst {
    if depth == 0 {
        return ast.clone();
    }
    let mut defs = BTreeMap::new();
    for s in &ast.statements {
        if let StmtKind::FuncDef { name, params, body } = &s.kind {
            defs.insert(name.clone(), (params.clone(), body.clone()));
        }
    }
    if defs.is_empty() {
        return ast.clone();
    }
    let mut inl = Inliner { defs, counter: 0 };
    ScriptAst { statements: inl.block(&ast.statements, depth) }
}

struct Inliner {
    defs: BTreeMap<String, (Vec<String>, Vec<Stmt>)>,
    counter: usize,
}

impl Inliner {
    fn block(&mut self, stmts: &[Stmt], depth: usize) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            let line = s.line;
            let mut pre = Vec::new();
            let kind = match &s.kind {
                StmtKind::Assign { targets, value } => {
                    StmtKind::Assign { targets: targets.clone(), value: self.expr(value, depth, line, &mut pre) }
                }
                StmtKind::Expr(e) => StmtKind::Expr(self.expr(e, depth, line, &mut pre)),
                StmtKind::Return(Some(e)) => StmtKind::Return(Some(self.expr(e, depth, line, &mut pre))),
                StmtKind::If { cond, then_block, else_block } => StmtKind::If {
                    cond: self.expr(cond, depth, line, &mut pre),
                    then_block: self.block(then_block, depth),
                    else_block: self.block(else_block, depth),
                },
                StmtKind::While { cond, body } => {
                    let cond = self.expr(cond, depth, line, &mut pre);
                    let mut body = self.block(body, depth);
                    // The condition is re-evaluated before every iteration.
                    if !pre.is_empty() {
                        insert_before_continue(&mut body, &pre);
                        body.extend(pre.iter().cloned());
                    }
                    StmtKind::While { cond, body }
                }
                other => other.clone(),
            };
            out.extend(pre);
            out.push(Stmt::new(kind, line));
        }
        out
    }

    /// Rewrites `e`, hoisting inlined call bodies into `pre` in evaluation
    /// order (arguments before the call).
    fn expr(&mut self, e: &Expr, depth: usize, line: usize, pre: &mut Vec<Stmt>) -> Expr {
        match e {
            Expr::Var(_) | Expr::Str(_) | Expr::Num(_) | Expr::Const(_) => e.clone(),
            Expr::List(items) => Expr::List(items.iter().map(|i| self.expr(i, depth, line, pre)).collect()),
            Expr::Tuple(items) => Expr::Tuple(items.iter().map(|i| self.expr(i, depth, line, pre)).collect()),
            Expr::Keyword { name, value } => {
                Expr::Keyword { name: name.clone(), value: Box::new(self.expr(value, depth, line, pre)) }
            }
            Expr::Subscript { receiver, columns } => {
                Expr::Subscript { receiver: Box::new(self.expr(receiver, depth, line, pre)), columns: columns.clone() }
            }
            Expr::MethodCall { receiver, method, args } => Expr::MethodCall {
                receiver: Box::new(self.expr(receiver, depth, line, pre)),
                method: method.clone(),
                args: args.iter().map(|a| self.expr(a, depth, line, pre)).collect(),
            },
            Expr::Call { callee, args } => {
                let args: Vec<Expr> = args.iter().map(|a| self.expr(a, depth, line, pre)).collect();
                match callee.as_slice() {
                    [name] if self.defs.contains_key(name) => self.expand(name, args, depth, line, pre),
                    _ => Expr::Call { callee: callee.clone(), args },
                }
            }
        }
    }

    fn expand(&mut self, name: &str, args: Vec<Expr>, depth: usize, line: usize, pre: &mut Vec<Stmt>) -> Expr {
        let (params, body) = self.defs[name].clone();
        let prefix = format!("{name}${}", self.counter);
        self.counter += 1;
        let ret = format!("{prefix}.return");

        let mut reassigned = BTreeSet::new();
        assigned(&body, &mut reassigned);
        let mut locals: BTreeSet<String> = params.iter().cloned().collect();
        locals.extend(reassigned.iter().cloned());
        let rename = |v: &str| format!("{prefix}.{v}");

        // Positional arguments fill parameters in order, keywords by name;
        // anything left over goes to the last parameter (`*args`/`**kwargs`).
        let mut bound: BTreeMap<&str, Vec<Expr>> = BTreeMap::new();
        let mut next = 0;
        for a in args {
            let slot = match &a {
                Expr::Keyword { name, .. } => params.iter().position(|p| p == name),
                _ if next < params.len() => {
                    next += 1;
                    Some(next - 1)
                }
                _ => None,
            }
            .or_else(|| params.len().checked_sub(1));
            match slot {
                Some(i) => bound.entry(params[i].as_str()).or_default().push(a.value().clone()),
                None => pre.push(Stmt::new(StmtKind::Expr(a), line)),
            }
        }
        let mut literals = BTreeMap::new();
        for (p, mut vals) in bound {
            let value = if vals.len() == 1 { vals.pop().expect("one value") } else { Expr::Tuple(vals) };
            if matches!(value, Expr::Str(_)) && !reassigned.contains(p) {
                literals.insert(p.to_string(), value.clone());
            }
            pre.push(Stmt::new(StmtKind::Assign { targets: vec![rename(p)], value }, line));
        }

        let ren = Renamer { locals: &locals, literals: &literals, rename: &rename };
        let cloned = ren.block(&body, &ret);
        let expanded = if depth > 1 { self.block(&cloned, depth - 1) } else { cloned };
        pre.extend(expanded);
        Expr::Var(ret)
    }
}

fn insert_before_continue(stmts: &mut Vec<Stmt>, pre: &[Stmt]) {
    let mut i = 0;
    while i < stmts.len() {
        match &mut stmts[i].kind {
            StmtKind::Continue => {
                for (k, p) in pre.iter().enumerate() {
                    stmts.insert(i + k, p.clone());
                }
                i += pre.len();
            }
            StmtKind::If { then_block, else_block, .. } => {
                insert_before_continue(then_block, pre);
                insert_before_continue(else_block, pre);
            }
            _ => {}
        }
        i += 1;
    }
}

/// Names assigned anywhere in `stmts` (not descending into nested defs).
fn assigned(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { targets, .. } => out.extend(targets.iter().cloned()),
            StmtKind::If { then_block, else_block, .. } => {
                assigned(then_block, out);
                assigned(else_block, out);
            }
            StmtKind::While { body, .. } => assigned(body, out),
            StmtKind::FuncDef { name, .. } => {
                out.insert(name.clone());
            }
            _ => {}
        }
    }
}

struct Renamer<'a, F: Fn(&str) -> String> {
    locals: &'a BTreeSet<String>,
    literals: &'a BTreeMap<String, Expr>,
    rename: &'a F,
}

impl<F: Fn(&str) -> String> Renamer<'_, F> {
    fn var(&self, v: &String) -> String {
        if self.locals.contains(v) {
            (self.rename)(v)
        } else {
            v.clone()
        }
    }

    fn block(&self, stmts: &[Stmt], ret: &str) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            let kind = match &s.kind {
                StmtKind::Assign { targets, value } => {
                    StmtKind::Assign { targets: targets.iter().map(|t| self.var(t)).collect(), value: self.expr(value) }
                }
                StmtKind::Expr(e) => StmtKind::Expr(self.expr(e)),
                StmtKind::Return(Some(e)) => StmtKind::Assign {
                    targets: vec![ret.to_string()],
                    value: Expr::opaque(RETURN_CALL, vec![self.expr(e)]),
                },
                StmtKind::Return(None) => continue,
                StmtKind::If { cond, then_block, else_block } => StmtKind::If {
                    cond: self.expr(cond),
                    then_block: self.block(then_block, ret),
                    else_block: self.block(else_block, ret),
                },
                StmtKind::While { cond, body } => {
                    StmtKind::While { cond: self.expr(cond), body: self.block(body, ret) }
                }
                other => other.clone(),
            };
            out.push(Stmt::new(kind, s.line));
        }
        out
    }

    fn expr(&self, e: &Expr) -> Expr {
        let r = |x: &Expr| self.expr(x);
        match e {
            Expr::Var(v) => match self.literals.get(v) {
                Some(lit) => lit.clone(),
                None => Expr::Var(self.var(v)),
            },
            Expr::Str(_) | Expr::Num(_) | Expr::Const(_) => e.clone(),
            Expr::List(items) => Expr::List(items.iter().map(r).collect()),
            Expr::Tuple(items) => Expr::Tuple(items.iter().map(r).collect()),
            Expr::Keyword { name, value } => Expr::Keyword { name: name.clone(), value: Box::new(r(value)) },
            Expr::Subscript { receiver, columns } => {
                Expr::Subscript { receiver: Box::new(r(receiver)), columns: columns.clone() }
            }
            Expr::MethodCall { receiver, method, args } => Expr::MethodCall {
                receiver: Box::new(r(receiver)),
                method: method.clone(),
                args: args.iter().map(r).collect(),
            },
            Expr::Call { callee, args } => {
                let mut callee = callee.clone();
                // A dotted call's first segment is the receiver variable.
                if callee.len() >= 2 {
                    callee[0] = self.var(&callee[0]);
                }
                Expr::Call { callee, args: args.iter().map(r).collect() }
            }
        }
    }
}
