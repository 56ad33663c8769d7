//! Recursive-descent parser for the analyzed script language.
//!
//! The accepted surface is Python syntax. Assignments, calls, method calls,
//! string-list projections, tuple assignment, `if`/`while` and local function
//! definitions are kept as-is; `for`, `with`, `try`, comprehensions, lambdas,
//! operators and the like are lowered into those forms or into opaque calls.
//! Imports, decorators, classes and declarations become no-ops.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::SyntaxError;

pub fn parse_script(text: &str) -> Result<ScriptAst, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { toks: tokens, pos: 0 };
    let statements = p.block(|t| matches!(t, Tok::Eof))?;
    Ok(ScriptAst { statements })
}

const COMPARISON_WORDS: &[&str] = &["in", "not", "is"];
const EXPR_TERMINATORS: &[&str] = &[
    "if", "else", "for", "in", "and", "or", "as", "from", "lambda", "elif", "while", "def", "class", "return",
    "import", "with", "try", "except", "finally", "pass", "break", "continue", "raise", "global", "nonlocal", "assert",
    "del", "is", "not", "async", "await", "yield",
];

enum Cur {
    Chain(Vec<String>, usize),
    Expr(Expr),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let i = (self.pos + off).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        let t = &self.toks[self.pos];
        SyntaxError::new(t.line, t.column, msg)
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.next();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), SyntaxError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.err(format!("expected {op:?}, found {}", describe(self.peek()))))
        }
    }

    fn expect_name(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.next();
                Ok(n)
            }
            other => Err(self.err(format!("expected a name, found {}", describe(&other)))),
        }
    }

    /// Parses statements until `end` matches. Statements following a
    /// `return`, `break` or `continue` in the same block are dead and dropped.
    fn block(&mut self, end: impl Fn(&Tok) -> bool) -> Result<Vec<Stmt>, SyntaxError> {
        let mut out = Vec::new();
        let mut dead = false;
        while !end(self.peek()) {
            if matches!(self.peek(), Tok::Eof) {
                return Err(self.err("unexpected end of file"));
            }
            if matches!(self.peek(), Tok::Newline) {
                self.next();
                continue;
            }
            let stmts = self.statement()?;
            if !dead {
                for s in stmts {
                    let terminal = matches!(s.kind, StmtKind::Return(_) | StmtKind::Break | StmtKind::Continue);
                    out.push(s);
                    if terminal {
                        dead = true;
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `:` followed by an indented block or simple statements on the same line.
    fn suite(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect_op(":")?;
        if matches!(self.peek(), Tok::Newline) {
            self.next();
            if !matches!(self.peek(), Tok::Indent) {
                return Err(self.err("expected an indented block"));
            }
            self.next();
            let body = self.block(|t| matches!(t, Tok::Dedent))?;
            self.next();
            Ok(body)
        } else {
            self.simple_line()
        }
    }

    fn statement(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let line = self.line();
        let kw = match self.peek() {
            Tok::Name(n) => n.clone(),
            Tok::Op("@") => {
                self.skip_line();
                return Ok(Vec::new());
            }
            _ => return self.simple_line(),
        };
        match kw.as_str() {
            "async" if matches!(self.peek_at(1), Tok::Name(n) if n == "def" || n == "for" || n == "with") => {
                self.next();
                self.statement()
            }
            "def" => {
                self.next();
                let name = self.expect_name()?;
                let params = self.params(")")?;
                if self.eat_op("->") {
                    self.test()?;
                }
                let body = self.suite()?;
                Ok(vec![Stmt::new(StmtKind::FuncDef { name, params, body }, line)])
            }
            "class" => {
                self.next();
                self.expect_name()?;
                if self.eat_op("(") {
                    if !self.is_op(")") {
                        self.arglist(")")?;
                    }
                    self.expect_op(")")?;
                }
                self.suite()?;
                Ok(Vec::new())
            }
            "if" => {
                self.next();
                Ok(vec![self.if_rest(line)?])
            }
            "while" => {
                self.next();
                let cond = self.namedexpr()?;
                let body = self.suite()?;
                let mut out = vec![Stmt::new(StmtKind::While { cond, body }, line)];
                if self.eat_kw("else") {
                    out.extend(self.suite()?);
                }
                Ok(out)
            }
            "for" => {
                self.next();
                let target = self.target_list()?;
                if !self.eat_kw("in") {
                    return Err(self.err("expected 'in'"));
                }
                let iter = self.testlist()?;
                let mut body = self.suite()?;
                let targets = self.assign_targets(&target)?;
                body.insert(
                    0,
                    Stmt::new(StmtKind::Assign { targets, value: Expr::opaque(ITER_CALL, vec![iter.clone()]) }, line),
                );
                let mut out = vec![Stmt::new(StmtKind::While { cond: iter, body }, line)];
                if self.eat_kw("else") {
                    out.extend(self.suite()?);
                }
                Ok(out)
            }
            "try" => {
                self.next();
                let mut out = self.suite()?;
                let mut handlers: Vec<Vec<Stmt>> = Vec::new();
                while self.eat_kw("except") {
                    self.eat_op("*");
                    if !self.is_op(":") {
                        self.test()?;
                        if self.eat_kw("as") {
                            self.expect_name()?;
                        } else if self.eat_op(",") {
                            self.test()?;
                        }
                    }
                    handlers.push(self.suite()?);
                }
                let else_block = if self.eat_kw("else") { self.suite()? } else { Vec::new() };
                let finally = if self.eat_kw("finally") { self.suite()? } else { Vec::new() };
                if handlers.is_empty() && finally.is_empty() && else_block.is_empty() {
                    return Err(self.err("expected 'except' or 'finally'"));
                }
                // Either the try body completes and `else` runs, or one handler runs.
                let mut alt = Vec::new();
                for h in handlers.into_iter().rev() {
                    alt = if alt.is_empty() {
                        h
                    } else {
                        vec![Stmt::new(
                            StmtKind::If { cond: Expr::Const("except".into()), then_block: h, else_block: alt },
                            line,
                        )]
                    };
                }
                if !else_block.is_empty() || !alt.is_empty() {
                    out.push(Stmt::new(
                        StmtKind::If { cond: Expr::Const("except".into()), then_block: else_block, else_block: alt },
                        line,
                    ));
                }
                out.extend(finally);
                Ok(out)
            }
            "with" => {
                self.next();
                let mut out = Vec::new();
                loop {
                    let ctx = self.test()?;
                    if self.eat_kw("as") {
                        let target = self.target_list_single()?;
                        let targets = self.assign_targets(&target)?;
                        out.push(Stmt::new(StmtKind::Assign { targets, value: ctx }, line));
                    } else {
                        out.push(Stmt::new(StmtKind::Expr(ctx), line));
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                out.extend(self.suite()?);
                Ok(out)
            }
            _ => self.simple_line(),
        }
    }

    fn if_rest(&mut self, line: usize) -> Result<Stmt, SyntaxError> {
        let cond = self.namedexpr()?;
        let then_block = self.suite()?;
        let else_block = if self.is_kw("elif") {
            let l = self.line();
            self.next();
            vec![self.if_rest(l)?]
        } else if self.eat_kw("else") {
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt::new(StmtKind::If { cond, then_block, else_block }, line))
    }

    fn skip_line(&mut self) {
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            self.next();
        }
        self.next();
    }

    /// One or more `;`-separated simple statements ending the logical line.
    fn simple_line(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            if let Some(s) = self.simple_statement()? {
                out.push(s);
            }
            if !self.eat_op(";") {
                break;
            }
            if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                break;
            }
        }
        match self.peek() {
            Tok::Newline => {
                self.next();
            }
            Tok::Eof | Tok::Dedent => {}
            other => return Err(self.err(format!("unexpected {}", describe(other)))),
        }
        Ok(out)
    }

    fn simple_statement(&mut self) -> Result<Option<Stmt>, SyntaxError> {
        let line = self.line();
        if let Tok::Name(kw) = self.peek().clone() {
            match kw.as_str() {
                "pass" => {
                    self.next();
                    return Ok(None);
                }
                "break" => {
                    self.next();
                    return Ok(Some(Stmt::new(StmtKind::Break, line)));
                }
                "continue" => {
                    self.next();
                    return Ok(Some(Stmt::new(StmtKind::Continue, line)));
                }
                "return" => {
                    self.next();
                    let value = if self.at_statement_end() { None } else { Some(self.testlist()?) };
                    return Ok(Some(Stmt::new(StmtKind::Return(value), line)));
                }
                "import" | "from" | "global" | "nonlocal" => {
                    while !matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Op(";")) {
                        self.next();
                    }
                    return Ok(None);
                }
                "del" => {
                    self.next();
                    self.testlist()?;
                    return Ok(None);
                }
                "raise" => {
                    self.next();
                    if self.at_statement_end() {
                        return Ok(None);
                    }
                    let e = self.test()?;
                    if self.eat_kw("from") {
                        self.test()?;
                    }
                    return Ok(Some(Stmt::new(StmtKind::Expr(e), line)));
                }
                "assert" => {
                    self.next();
                    let mut args = vec![self.test()?];
                    if self.eat_op(",") {
                        args.push(self.test()?);
                    }
                    return Ok(Some(Stmt::new(StmtKind::Expr(Expr::opaque(COMPOUND_CALL, args)), line)));
                }
                _ => {}
            }
        }

        let first = self.testlist_star()?;
        if self.is_op("=") {
            let mut lhs = vec![first];
            let mut value = None;
            while self.eat_op("=") {
                let rhs = if self.is_kw("yield") { self.yield_expr()? } else { self.testlist_star()? };
                if self.is_op("=") {
                    lhs.push(rhs);
                } else {
                    value = Some(rhs);
                }
            }
            let value = value.expect("loop ends on a right-hand side");
            let mut targets = Vec::new();
            let mut indirect = false;
            for t in &lhs {
                indirect |= !is_plain_target(t);
                targets.extend(self.assign_targets(t)?);
            }
            // Chained `a = b = x, y` binds the whole tuple to each name.
            let value = match value {
                Expr::Tuple(_) | Expr::List(_) if lhs.len() > 1 => Expr::opaque(COMPOUND_CALL, vec![value]),
                v => v,
            };
            let value = if indirect { Expr::opaque(SETITEM_CALL, vec![value]) } else { value };
            return Ok(Some(Stmt::new(StmtKind::Assign { targets, value }, line)));
        }
        if self.eat_op(":") {
            // Annotated assignment.
            self.test()?;
            let targets = self.assign_targets(&first)?;
            if self.eat_op("=") {
                let value = self.testlist_star()?;
                let value = if is_plain_target(&first) { value } else { Expr::opaque(SETITEM_CALL, vec![value]) };
                return Ok(Some(Stmt::new(StmtKind::Assign { targets, value }, line)));
            }
            return Ok(None);
        }
        if let Tok::Op(op) = self.peek() {
            if op.len() >= 2 && op.ends_with('=') && !matches!(*op, "==" | "!=" | "<=" | ">=" | ":=") {
                self.next();
                let rhs = self.testlist()?;
                let targets = self.assign_targets(&first)?;
                let value = Expr::opaque(OP_CALL, vec![first, rhs]);
                return Ok(Some(Stmt::new(StmtKind::Assign { targets, value }, line)));
            }
        }
        Ok(Some(Stmt::new(StmtKind::Expr(first), line)))
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Dedent | Tok::Op(";"))
    }

    /// Variable names an assignment target binds. Item and attribute targets
    /// bind their root variable.
    fn assign_targets(&self, target: &Expr) -> Result<Vec<String>, SyntaxError> {
        let mut out = Vec::new();
        collect_targets(target, &mut out).map_err(|m| self.err(m))?;
        Ok(out)
    }

    fn params(&mut self, close: &str) -> Result<Vec<String>, SyntaxError> {
        let mut out = Vec::new();
        let parenthesized = close == ")";
        if parenthesized {
            self.expect_op("(")?;
        }
        while !self.is_op(close) {
            if self.eat_op("*") || self.eat_op("**") {
                if let Tok::Name(_) = self.peek() {
                    out.push(self.expect_name()?);
                }
            } else if self.eat_op("/") {
            } else {
                out.push(self.expect_name()?);
                if parenthesized && self.eat_op(":") {
                    self.test()?;
                }
                if self.eat_op("=") {
                    self.test()?;
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        if parenthesized {
            self.expect_op(")")?;
        }
        Ok(out)
    }

    fn target_list(&mut self) -> Result<Expr, SyntaxError> {
        let mut items = vec![self.target_atom()?];
        let mut trailing = false;
        while self.eat_op(",") {
            if self.is_kw("in") || self.is_op("=") {
                trailing = true;
                break;
            }
            items.push(self.target_atom()?);
        }
        Ok(if items.len() == 1 && !trailing { items.pop().expect("one item") } else { Expr::Tuple(items) })
    }

    fn target_list_single(&mut self) -> Result<Expr, SyntaxError> {
        self.target_atom()
    }

    fn target_atom(&mut self) -> Result<Expr, SyntaxError> {
        self.eat_op("*");
        self.bitor()
    }

    // ---- expressions ----

    fn testlist(&mut self) -> Result<Expr, SyntaxError> {
        self.exprlist(false)
    }

    fn testlist_star(&mut self) -> Result<Expr, SyntaxError> {
        self.exprlist(true)
    }

    fn exprlist(&mut self, star: bool) -> Result<Expr, SyntaxError> {
        let first = self.list_item(star)?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_expr_end() {
                break;
            }
            items.push(self.list_item(star)?);
        }
        Ok(Expr::Tuple(items))
    }

    fn list_item(&mut self, star: bool) -> Result<Expr, SyntaxError> {
        if star && self.eat_op("*") {
            return self.bitor();
        }
        self.test()
    }

    fn at_expr_end(&self) -> bool {
        match self.peek() {
            Tok::Newline | Tok::Eof | Tok::Dedent | Tok::Indent => true,
            Tok::Op(op) => {
                matches!(*op, "=" | ")" | "]" | "}" | ":" | ";")
                    || (op.len() >= 2 && op.ends_with('=') && !matches!(*op, "==" | "!=" | "<=" | ">="))
            }
            Tok::Name(n) => n == "in",
            _ => false,
        }
    }

    fn namedexpr(&mut self) -> Result<Expr, SyntaxError> {
        let e = self.test()?;
        if self.eat_op(":=") {
            let v = self.test()?;
            return Ok(Expr::opaque(COMPOUND_CALL, vec![e, v]));
        }
        Ok(e)
    }

    fn test(&mut self) -> Result<Expr, SyntaxError> {
        if self.is_kw("lambda") {
            self.next();
            self.params(":")?;
            self.expect_op(":")?;
            let body = self.test()?;
            return Ok(Expr::opaque(COMPOUND_CALL, vec![body]));
        }
        let e = self.or_test()?;
        if self.is_kw("if") {
            self.next();
            let cond = self.or_test()?;
            if !self.eat_kw("else") {
                return Err(self.err("expected 'else' in conditional expression"));
            }
            let alt = self.test()?;
            return Ok(Expr::opaque(COMPOUND_CALL, vec![e, cond, alt]));
        }
        Ok(e)
    }

    fn or_test(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.and_test()?;
        while self.eat_kw("or") {
            let r = self.and_test()?;
            e = Expr::opaque(OP_CALL, vec![e, r]);
        }
        Ok(e)
    }

    fn and_test(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.not_test()?;
        while self.eat_kw("and") {
            let r = self.not_test()?;
            e = Expr::opaque(OP_CALL, vec![e, r]);
        }
        Ok(e)
    }

    fn not_test(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_kw("not") {
            let e = self.not_test()?;
            return Ok(Expr::opaque(OP_CALL, vec![e]));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.bitor()?;
        loop {
            let is_cmp = match self.peek() {
                Tok::Op(op) => matches!(*op, "<" | ">" | "==" | ">=" | "<=" | "!="),
                Tok::Name(n) => {
                    COMPARISON_WORDS.contains(&n.as_str())
                        && !(n == "not" && !matches!(self.peek_at(1), Tok::Name(m) if m == "in"))
                }
                _ => false,
            };
            if !is_cmp {
                break;
            }
            match self.next() {
                Tok::Name(n) if n == "not" => {
                    self.next();
                }
                Tok::Name(n) if n == "is" => {
                    self.eat_kw("not");
                }
                _ => {}
            }
            let r = self.bitor()?;
            e = Expr::opaque(OP_CALL, vec![e, r]);
        }
        Ok(e)
    }

    fn bitor(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, SyntaxError> {
        const LEVELS: &[&[&str]] = &[&["|"], &["^"], &["&"], &["<<", ">>"], &["+", "-"], &["*", "/", "//", "%", "@"]];
        if level == LEVELS.len() {
            return self.factor();
        }
        let mut e = self.binary(level + 1)?;
        while matches!(self.peek(), Tok::Op(op) if LEVELS[level].contains(op)) {
            self.next();
            let r = self.binary(level + 1)?;
            e = Expr::opaque(OP_CALL, vec![e, r]);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_op("-") || self.eat_op("+") || self.eat_op("~") {
            let e = self.factor()?;
            return Ok(match e {
                Expr::Num(n) => Expr::Num(n),
                e => Expr::opaque(OP_CALL, vec![e]),
            });
        }
        let e = self.power()?;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let e = self.atom_expr()?;
        if self.eat_op("**") {
            let r = self.factor()?;
            return Ok(Expr::opaque(OP_CALL, vec![e, r]));
        }
        Ok(e)
    }

    fn atom_expr(&mut self) -> Result<Expr, SyntaxError> {
        self.eat_kw("await");
        let mut cur = match self.peek().clone() {
            Tok::Name(n) if !EXPR_TERMINATORS.contains(&n.as_str()) => {
                self.next();
                match n.as_str() {
                    "None" | "True" | "False" => Cur::Expr(Expr::Const(n)),
                    _ => Cur::Chain(vec![n], self.pos),
                }
            }
            _ => Cur::Expr(self.atom()?),
        };
        loop {
            if self.eat_op(".") {
                let name = self.expect_name()?;
                if self.is_op("(") {
                    self.next();
                    let args = self.arglist(")")?;
                    self.expect_op(")")?;
                    cur = Cur::Expr(match cur {
                        Cur::Chain(mut c, _) if c.len() < 3 => {
                            c.push(name);
                            Expr::Call { callee: c, args }
                        }
                        other => Expr::MethodCall { receiver: Box::new(materialize(other)), method: name, args },
                    });
                } else {
                    cur = match cur {
                        Cur::Chain(mut c, p) => {
                            c.push(name);
                            Cur::Chain(c, p)
                        }
                        Cur::Expr(e) => Cur::Expr(Expr::opaque(ATTR_CALL, vec![e])),
                    };
                }
            } else if self.eat_op("(") {
                let args = self.arglist(")")?;
                self.expect_op(")")?;
                cur = Cur::Expr(match cur {
                    Cur::Chain(c, _) if c.len() <= 3 => Expr::Call { callee: c, args },
                    other => {
                        let mut all = vec![materialize(other)];
                        all.extend(args);
                        Expr::opaque(CALL_CALL, all)
                    }
                });
            } else if self.eat_op("[") {
                let receiver = materialize(cur);
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                cur = Cur::Expr(match projection_columns(&index) {
                    Some(columns) => Expr::Subscript { receiver: Box::new(receiver), columns },
                    None => Expr::opaque(INDEX_CALL, vec![receiver, index]),
                });
            } else {
                break;
            }
        }
        Ok(materialize(cur))
    }

    fn subscript_list(&mut self) -> Result<Expr, SyntaxError> {
        let mut items = Vec::new();
        let mut tuple = false;
        loop {
            items.push(self.subscript()?);
            if !self.eat_op(",") {
                break;
            }
            tuple = true;
            if self.is_op("]") {
                break;
            }
        }
        Ok(if tuple { Expr::Tuple(items) } else { items.pop().expect("one item") })
    }

    fn subscript(&mut self) -> Result<Expr, SyntaxError> {
        let mut parts = Vec::new();
        let mut slice = false;
        if !self.is_op(":") {
            parts.push(self.test()?);
        }
        while self.eat_op(":") {
            slice = true;
            if !self.is_op(":") && !self.is_op("]") && !self.is_op(",") {
                parts.push(self.test()?);
            }
        }
        Ok(if slice { Expr::opaque(INDEX_CALL, parts) } else { parts.pop().expect("one part") })
    }

    fn arglist(&mut self, close: &str) -> Result<Vec<Expr>, SyntaxError> {
        let mut args = Vec::new();
        while !self.is_op(close) {
            if self.eat_op("*") || self.eat_op("**") {
                args.push(self.test()?);
            } else if matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_at(1), Tok::Op("=")) {
                let name = self.expect_name()?;
                self.next();
                let value = self.test()?;
                args.push(Expr::Keyword { name, value: Box::new(value) });
            } else {
                let e = self.namedexpr()?;
                if self.is_kw("for") || self.is_kw("async") {
                    args.push(self.comprehension(vec![e])?);
                } else {
                    args.push(e);
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(args)
    }

    fn comprehension(&mut self, mut parts: Vec<Expr>) -> Result<Expr, SyntaxError> {
        loop {
            self.eat_kw("async");
            if self.eat_kw("for") {
                self.target_list()?;
                if !self.eat_kw("in") {
                    return Err(self.err("expected 'in'"));
                }
                parts.push(self.or_test()?);
            } else if self.eat_kw("if") {
                parts.push(self.or_test()?);
            } else {
                break;
            }
        }
        Ok(Expr::opaque(COMPOUND_CALL, parts))
    }

    fn yield_expr(&mut self) -> Result<Expr, SyntaxError> {
        self.next();
        self.eat_kw("from");
        if self.at_expr_end() {
            return Ok(Expr::Const("None".into()));
        }
        let e = self.testlist()?;
        Ok(Expr::opaque(COMPOUND_CALL, vec![e]))
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.next();
                Ok(Expr::Num(n))
            }
            Tok::Str(_) | Tok::FStr => {
                let mut lit = Some(String::new());
                while let Tok::Str(_) | Tok::FStr = self.peek() {
                    match (self.next(), lit.as_mut()) {
                        (Tok::Str(s), Some(acc)) => acc.push_str(&s),
                        _ => lit = None,
                    }
                }
                Ok(lit.map(Expr::Str).unwrap_or_else(|| Expr::Const("fstring".into())))
            }
            Tok::Op("...") => {
                self.next();
                Ok(Expr::Const("...".into()))
            }
            Tok::Op("(") => {
                self.next();
                if self.eat_op(")") {
                    return Ok(Expr::Tuple(Vec::new()));
                }
                if self.is_kw("yield") {
                    let e = self.yield_expr()?;
                    self.expect_op(")")?;
                    return Ok(e);
                }
                let first = self.star_or_named()?;
                if self.is_kw("for") || self.is_kw("async") {
                    let e = self.comprehension(vec![first])?;
                    self.expect_op(")")?;
                    return Ok(e);
                }
                if self.eat_op(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.is_op(")") {
                        break;
                    }
                    items.push(self.star_or_named()?);
                }
                self.expect_op(")")?;
                Ok(Expr::Tuple(items))
            }
            Tok::Op("[") => {
                self.next();
                if self.eat_op("]") {
                    return Ok(Expr::List(Vec::new()));
                }
                let first = self.star_or_named()?;
                if self.is_kw("for") || self.is_kw("async") {
                    let e = self.comprehension(vec![first])?;
                    self.expect_op("]")?;
                    return Ok(e);
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.is_op("]") {
                        break;
                    }
                    items.push(self.star_or_named()?);
                }
                self.expect_op("]")?;
                Ok(Expr::List(items))
            }
            Tok::Op("{") => {
                self.next();
                let mut parts = Vec::new();
                while !self.is_op("}") {
                    if self.eat_op("**") {
                        parts.push(self.bitor()?);
                    } else {
                        parts.push(self.star_or_named()?);
                        if self.eat_op(":") {
                            parts.push(self.test()?);
                        }
                        if self.is_kw("for") || self.is_kw("async") {
                            let e = self.comprehension(std::mem::take(&mut parts))?;
                            parts.push(e);
                        }
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op("}")?;
                Ok(Expr::opaque(COMPOUND_CALL, parts))
            }
            other => Err(self.err(format!("unexpected {}", describe(&other)))),
        }
    }

    fn star_or_named(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_op("*") {
            return self.bitor();
        }
        self.namedexpr()
    }
}

fn materialize(cur: Cur) -> Expr {
    match cur {
        Cur::Chain(mut c, _) if c.len() == 1 => Expr::Var(c.pop().expect("one segment")),
        Cur::Chain(c, _) => Expr::opaque(ATTR_CALL, vec![Expr::Var(c[0].clone())]),
        Cur::Expr(e) => e,
    }
}

fn projection_columns(index: &Expr) -> Option<Vec<String>> {
    match index {
        Expr::Str(s) if !s.is_empty() => Some(vec![s.clone()]),
        Expr::List(items) if !items.is_empty() => items
            .iter()
            .map(|e| match e {
                Expr::Str(s) if !s.is_empty() => Some(s.clone()),
                _ => None,
            })
            .collect(),
        _ => None,
    }
}

fn is_plain_target(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Tuple(items) | Expr::List(items) => items.iter().all(is_plain_target),
        _ => false,
    }
}

fn collect_targets(e: &Expr, out: &mut Vec<String>) -> Result<(), String> {
    match e {
        Expr::Var(n) => {
            out.push(n.clone());
            Ok(())
        }
        Expr::Tuple(items) | Expr::List(items) => items.iter().try_for_each(|i| collect_targets(i, out)),
        Expr::Subscript { receiver, .. } => collect_targets(receiver, out),
        Expr::Call { callee, args } if callee.len() == 1 && matches!(callee[0].as_str(), ATTR_CALL | INDEX_CALL) => {
            match args.first() {
                Some(root) => collect_targets(root, out),
                None => Err("cannot assign to expression".into()),
            }
        }
        _ => Err("cannot assign to expression".into()),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("name {n:?}"),
        Tok::Str(_) | Tok::FStr => "string literal".into(),
        Tok::Num(n) => format!("number {n}"),
        Tok::Op(o) => format!("{o:?}"),
        Tok::Newline => "end of line".into(),
        Tok::Indent => "indent".into(),
        Tok::Dedent => "dedent".into(),
        Tok::Eof => "end of file".into(),
    }
}
