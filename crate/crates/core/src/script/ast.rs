//! Syntax tree for the analyzed script language.
//!
//! The tree only distinguishes forms the analysis gives meaning to. Every
//! other construct is lowered by the parser into an opaque call whose callee
//! is one of the `__x__` names below, so flows through it are still joined.

/// Binary/unary operators, boolean ops and comparisons.
pub const OP_CALL: &str = "__op__";
/// Attribute access that is not immediately called (`df.columns`).
pub const ATTR_CALL: &str = "__attr__";
/// Subscripts other than string-literal projections.
pub const INDEX_CALL: &str = "__index__";
/// Item or attribute assignment (`df["c"] = v` updates `df`).
pub const SETITEM_CALL: &str = "__setitem__";
/// Calling the result of an arbitrary expression.
pub const CALL_CALL: &str = "__call__";
/// Comprehensions, lambdas, dict/set literals, conditional expressions.
pub const COMPOUND_CALL: &str = "__expr__";
/// Loop iteration (`for x in xs`).
pub const ITER_CALL: &str = "__iter__";
/// Return value of an inlined function.
pub const RETURN_CALL: &str = "__return__";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScriptAst {
    pub statements: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    /// 1-based source line of the statement's first token.
    pub line: usize,
}

impl Stmt {
    pub fn new(kind: StmtKind, line: usize) -> Self {
        Self { kind, line }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign { targets: Vec<String>, value: Expr },
    Expr(Expr),
    If { cond: Expr, then_block: Vec<Stmt>, else_block: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    FuncDef { name: String, params: Vec<String>, body: Vec<Stmt> },
    Return(Option<Expr>),
    Break,
    Continue,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(String),
    Str(String),
    Num(String),
    /// `None`, `True`, `False`, `...`, interpolated strings.
    Const(String),
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
    /// Call through a dotted name of at most three segments (`pd.read_csv`).
    Call {
        callee: Vec<String>,
        args: Vec<Expr>,
    },
    /// Method call on an arbitrary receiver expression.
    MethodCall {
        receiver: Box<Expr>,
        method: String,
        args: Vec<Expr>,
    },
    /// String-literal projection `x[["a", "b"]]` or `x["a"]`.
    Subscript {
        receiver: Box<Expr>,
        columns: Vec<String>,
    },
    /// Keyword argument `name=value`.
    Keyword {
        name: String,
        value: Box<Expr>,
    },
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn str(s: impl Into<String>) -> Expr {
        Expr::Str(s.into())
    }

    pub fn call(callee: &[&str], args: Vec<Expr>) -> Expr {
        Expr::Call { callee: callee.iter().map(|s| s.to_string()).collect(), args }
    }

    pub fn opaque(kind: &str, args: Vec<Expr>) -> Expr {
        Expr::Call { callee: vec![kind.to_string()], args }
    }

    /// Strips a keyword wrapper.
    pub fn value(&self) -> &Expr {
        match self {
            Expr::Keyword { value, .. } => value.value(),
            e => e,
        }
    }

    pub fn as_str_lit(&self) -> Option<&str> {
        match self.value() {
            Expr::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Visits this expression and every sub-expression, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Var(_) | Expr::Str(_) | Expr::Num(_) | Expr::Const(_) => {}
            Expr::List(items) | Expr::Tuple(items) => items.iter().for_each(|e| e.walk(f)),
            Expr::Call { args, .. } => args.iter().for_each(|e| e.walk(f)),
            Expr::MethodCall { receiver, args, .. } => {
                receiver.walk(f);
                args.iter().for_each(|e| e.walk(f));
            }
            Expr::Subscript { receiver, .. } => receiver.walk(f),
            Expr::Keyword { value, .. } => value.walk(f),
        }
    }
}

impl ScriptAst {
    /// Number of statements including nested blocks (function bodies too).
    pub fn statement_count(&self) -> usize {
        fn count(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| {
                    1 + match &s.kind {
                        StmtKind::If { then_block, else_block, .. } => count(then_block) + count(else_block),
                        StmtKind::While { body, .. } | StmtKind::FuncDef { body, .. } => count(body),
                        _ => 0,
                    }
                })
                .sum()
        }
        count(&self.statements)
    }
}
