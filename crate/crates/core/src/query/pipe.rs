//! Pipe-style query subset: `Table | where … | project … | extend … |
//! summarize … by … | join [kind=…] (Table2 | …) on key | sort by … | take n`.
//!
//! A table that no downstream `project`, `project-keep`, `summarize`,
//! `distinct` or `count` narrows flows out with all of its columns.

use std::collections::BTreeSet;

use super::lexer::{tokenize, Flavor, QTok, QToken};
use super::{Dialect, QueryAst, ReadSet};
use crate::diagnostics::Diagnostic;
use crate::error::SyntaxError;
use crate::model::ColumnSet;

/// Infix string/set operators spelled as words.
const WORD_OPS: &[&str] = &[
    "has",
    "has_cs",
    "hasprefix",
    "hasprefix_cs",
    "hassuffix",
    "hassuffix_cs",
    "contains",
    "contains_cs",
    "startswith",
    "startswith_cs",
    "endswith",
    "endswith_cs",
    "has_any",
    "has_all",
    "like",
    "matches",
];

pub fn parse_pipe(text: &str) -> Result<QueryAst, SyntaxError> {
    let toks = tokenize(text, Flavor::Pipe)?;
    let mut p = PipeParser { toks, pos: 0, rs: ReadSet::default(), occurrences: Vec::new(), projection: None };
    if p.is_kw("let") {
        return Err(p.err("let statements are not supported"));
    }
    p.pipeline()?;
    p.eat_p(";");
    if !matches!(p.peek(), QTok::Eof) {
        return Err(p.unexpected());
    }
    for (table, narrowed) in &p.occurrences {
        if !narrowed {
            p.rs.all(table);
        }
    }
    let projection = match p.projection {
        Some(names) if p.occurrences.iter().all(|(_, n)| *n) => ColumnSet::explicit(names),
        _ => ColumnSet::All,
    };
    Ok(QueryAst {
        dialect: Dialect::Pipe,
        reads: p.rs.reads,
        tables: p.rs.tables,
        projection,
        output_symbol: None,
        diagnostics: Vec::<Diagnostic>::new(),
    })
}

#[derive(Default)]
struct Scope {
    /// Indices into `occurrences`.
    occs: Vec<usize>,
    /// Columns computed by `extend`/`project`/`summarize`; later references
    /// to them are not table reads.
    defined: BTreeSet<String>,
}

/// Which side of a join a `$left.`/`$right.` key names.
#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

struct PipeParser {
    toks: Vec<QToken>,
    pos: usize,
    rs: ReadSet,
    occurrences: Vec<(String, bool)>,
    projection: Option<Vec<String>>,
}

impl PipeParser {
    fn peek(&self) -> &QTok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &QTok {
        &self.toks[(self.pos + off).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> QTok {
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

    fn unexpected(&self) -> SyntaxError {
        let what = match self.peek() {
            QTok::Ident { text, .. } => format!("{text:?}"),
            QTok::Str(_) => "string literal".into(),
            QTok::Num(n) => n.clone(),
            QTok::Param => "parameter".into(),
            QTok::Punct(p) => format!("{p:?}"),
            QTok::Eof => "end of query".into(),
        };
        self.err(format!("unexpected {what}"))
    }

    fn kw_at(&self, off: usize, kw: &str) -> bool {
        matches!(self.peek_at(off), QTok::Ident { text, .. } if text == kw)
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.kw_at(0, kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_p(&self, p: &str) -> bool {
        matches!(self.peek(), QTok::Punct(q) if *q == p)
    }

    fn eat_p(&mut self, p: &str) -> bool {
        if self.is_p(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_p(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat_p(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected {p:?}")))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            QTok::Ident { text, .. } => {
                self.bump();
                Ok(text)
            }
            _ => Err(self.unexpected()),
        }
    }

    /// Operator names may be hyphenated (`project-away`, `mv-expand`).
    fn operator_name(&mut self) -> Result<String, SyntaxError> {
        let mut name = self.ident()?;
        while self.is_p("-")
            && matches!(self.peek_at(1), QTok::Ident { .. })
            && matches!(name.as_str(), "project" | "mv")
        {
            self.bump();
            name.push('-');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    fn narrow(&mut self, scope: &Scope) {
        for &o in &scope.occs {
            self.occurrences[o].1 = true;
        }
    }

    fn attribute(&mut self, scope: &Scope, column: &str) {
        if scope.defined.contains(column) {
            return;
        }
        for &o in &scope.occs {
            let table = self.occurrences[o].0.clone();
            self.rs.column(&table, column);
        }
    }

    fn table_source(&mut self) -> Result<Scope, SyntaxError> {
        if self.eat_p("(") {
            let scope = self.pipeline()?;
            self.expect_p(")")?;
            return Ok(scope);
        }
        let mut name = self.ident()?;
        while self.is_p(".") {
            self.bump();
            name.push('.');
            name.push_str(&self.ident()?);
        }
        self.rs.touch(&name);
        self.occurrences.push((name, false));
        Ok(Scope { occs: vec![self.occurrences.len() - 1], defined: BTreeSet::new() })
    }

    fn pipeline(&mut self) -> Result<Scope, SyntaxError> {
        let mut scope = self.table_source()?;
        while self.eat_p("|") {
            self.stage(&mut scope)?;
        }
        Ok(scope)
    }

    fn stage(&mut self, scope: &mut Scope) -> Result<(), SyntaxError> {
        let op = self.operator_name()?;
        match op.as_str() {
            "where" | "filter" => self.expr(scope),
            "project" | "extend" | "summarize" => {
                let narrows = op != "extend";
                let mut names = Vec::new();
                let mut new_defs = Vec::new();
                if !(op == "summarize" && self.is_kw("by")) {
                    self.assignments(scope, &mut names, &mut new_defs)?;
                }
                if op == "summarize" && self.eat_kw("by") {
                    self.assignments(scope, &mut names, &mut new_defs)?;
                }
                if narrows {
                    self.narrow(scope);
                    self.projection = Some(names);
                }
                scope.defined.extend(new_defs);
                Ok(())
            }
            "project-away" | "project-keep" | "project-reorder" => {
                let mut names = Vec::new();
                loop {
                    let c = self.ident()?;
                    self.attribute(scope, &c);
                    names.push(c);
                    // Wildcard patterns like `col*`.
                    self.eat_p("*");
                    let _ = self.eat_kw("asc") || self.eat_kw("desc");
                    if !self.eat_p(",") {
                        break;
                    }
                }
                if op == "project-keep" {
                    self.narrow(scope);
                    self.projection = Some(names);
                }
                Ok(())
            }
            "project-rename" => loop {
                let new = self.ident()?;
                self.expect_p("=")?;
                let old = self.ident()?;
                self.attribute(scope, &old);
                scope.defined.insert(new);
                if !self.eat_p(",") {
                    return Ok(());
                }
            },
            "sort" | "order" => {
                if !self.eat_kw("by") {
                    return Err(self.err("expected 'by'"));
                }
                self.sort_list(scope)
            }
            "top" => {
                self.expr(scope)?;
                if !self.eat_kw("by") {
                    return Err(self.err("expected 'by'"));
                }
                self.sort_list(scope)
            }
            "take" | "limit" | "sample" => self.expr(scope),
            "distinct" => {
                if self.eat_p("*") {
                    return Ok(());
                }
                let mut names = Vec::new();
                let mut defs = Vec::new();
                self.assignments(scope, &mut names, &mut defs)?;
                self.narrow(scope);
                self.projection = Some(names);
                scope.defined.extend(defs);
                Ok(())
            }
            "count" => {
                self.narrow(scope);
                self.projection = Some(vec!["Count".into()]);
                scope.defined.insert("Count".into());
                Ok(())
            }
            "join" | "lookup" => {
                self.parameters()?;
                let right = self.table_source()?;
                if !self.eat_kw("on") {
                    return Err(self.err("expected 'on'"));
                }
                let left = std::mem::take(scope);
                let both = Scope {
                    occs: left.occs.iter().chain(&right.occs).copied().collect(),
                    defined: left.defined.union(&right.defined).cloned().collect(),
                };
                loop {
                    self.join_key(&left, &right, &both)?;
                    if !self.eat_p(",") {
                        break;
                    }
                }
                *scope = both;
                Ok(())
            }
            "union" => {
                self.parameters()?;
                loop {
                    let other = self.table_source()?;
                    scope.occs.extend(other.occs);
                    scope.defined.extend(other.defined);
                    if !self.eat_p(",") {
                        return Ok(());
                    }
                }
            }
            "mv-expand" => {
                let mut names = Vec::new();
                let mut defs = Vec::new();
                self.assignments(scope, &mut names, &mut defs)?;
                if self.eat_kw("to") {
                    if !self.eat_kw("typeof") {
                        return Err(self.err("expected 'typeof'"));
                    }
                    self.expect_p("(")?;
                    self.ident()?;
                    self.expect_p(")")?;
                }
                scope.defined.extend(defs);
                Ok(())
            }
            "as" => self.ident().map(|_| ()),
            "render" => {
                while !matches!(self.peek(), QTok::Eof | QTok::Punct("|" | ";" | ")")) {
                    self.bump();
                }
                Ok(())
            }
            other => Err(self.err(format!("unsupported pipe operator {other:?}"))),
        }
    }

    /// `kind=inner`, `hint.strategy=broadcast`, `withsource=T` …
    fn parameters(&mut self) -> Result<(), SyntaxError> {
        loop {
            let mut off = 0;
            if !matches!(self.peek_at(off), QTok::Ident { .. }) {
                return Ok(());
            }
            off += 1;
            while matches!(self.peek_at(off), QTok::Punct(".")) && matches!(self.peek_at(off + 1), QTok::Ident { .. }) {
                off += 2;
            }
            if !matches!(self.peek_at(off), QTok::Punct("=")) {
                return Ok(());
            }
            for _ in 0..=off {
                self.bump();
            }
            match self.bump() {
                QTok::Ident { .. } | QTok::Str(_) | QTok::Num(_) => {}
                _ => return Err(self.err("expected a parameter value")),
            }
        }
    }

    fn join_key(&mut self, left: &Scope, right: &Scope, both: &Scope) -> Result<(), SyntaxError> {
        let first = self.key_side()?;
        match first {
            (None, col) if !self.is_p("==") => {
                self.attribute(both, &col);
                Ok(())
            }
            _ => {
                if !self.eat_p("==") {
                    return Err(self.err("expected \"==\""));
                }
                let second = self.key_side()?;
                for (side, col) in [first, second] {
                    match side {
                        Some(Side::Left) => self.attribute(left, &col),
                        Some(Side::Right) => self.attribute(right, &col),
                        _ => self.attribute(both, &col),
                    }
                }
                Ok(())
            }
        }
    }

    fn key_side(&mut self) -> Result<(Option<Side>, String), SyntaxError> {
        let name = self.ident()?;
        let side = match name.as_str() {
            "$left" => Some(Side::Left),
            "$right" => Some(Side::Right),
            _ => return Ok((None, name)),
        };
        self.expect_p(".")?;
        Ok((side, self.ident()?))
    }

    fn assignments(
        &mut self,
        scope: &Scope,
        names: &mut Vec<String>,
        defs: &mut Vec<String>,
    ) -> Result<(), SyntaxError> {
        loop {
            if matches!(self.peek(), QTok::Ident { .. }) && matches!(self.peek_at(1), QTok::Punct("=")) {
                let name = self.ident()?;
                self.bump();
                self.expr(scope)?;
                names.push(name.clone());
                defs.push(name);
            } else {
                let start = self.pos;
                self.expr(scope)?;
                if self.pos == start + 1 {
                    if let QTok::Ident { text, .. } = &self.toks[start].tok {
                        names.push(text.clone());
                    }
                }
            }
            if !self.eat_p(",") {
                return Ok(());
            }
        }
    }

    fn sort_list(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        loop {
            self.expr(scope)?;
            if !self.eat_kw("asc") {
                self.eat_kw("desc");
            }
            if self.eat_kw("nulls") && !self.eat_kw("first") && !self.eat_kw("last") {
                return Err(self.err("expected 'first' or 'last'"));
            }
            if !self.eat_p(",") {
                return Ok(());
            }
        }
    }

    // ---- expressions ----

    fn expr(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        self.and_expr(scope)?;
        while self.eat_kw("or") {
            self.and_expr(scope)?;
        }
        Ok(())
    }

    fn and_expr(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        self.comparison(scope)?;
        while self.eat_kw("and") {
            self.comparison(scope)?;
        }
        Ok(())
    }

    fn comparison(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        self.additive(scope)?;
        loop {
            if matches!(self.peek(), QTok::Punct("==" | "!=" | "<>" | "<" | ">" | "<=" | ">=" | "=~" | "!~")) {
                self.bump();
                self.additive(scope)?;
                continue;
            }
            let negated = self.is_p("!") && matches!(self.peek_at(1), QTok::Ident { .. });
            let off = usize::from(negated);
            let word = match self.peek_at(off) {
                QTok::Ident { text, .. } => text.clone(),
                _ => return Ok(()),
            };
            if word == "in" || word == "between" || WORD_OPS.contains(&word.as_str()) {
                for _ in 0..=off {
                    self.bump();
                }
            } else if negated {
                return Err(self.unexpected());
            } else {
                return Ok(());
            }
            match word.as_str() {
                "in" => {
                    self.eat_p("~");
                    self.expect_p("(")?;
                    loop {
                        self.expr(scope)?;
                        if !self.eat_p(",") {
                            break;
                        }
                    }
                    self.expect_p(")")?;
                }
                "between" => {
                    self.expect_p("(")?;
                    self.additive(scope)?;
                    self.expect_p("..")?;
                    self.additive(scope)?;
                    self.expect_p(")")?;
                }
                "matches" => {
                    if !self.eat_kw("regex") {
                        return Err(self.err("expected 'regex'"));
                    }
                    self.additive(scope)?;
                }
                _ => self.additive(scope)?,
            }
        }
    }

    fn additive(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        self.multiplicative(scope)?;
        while matches!(self.peek(), QTok::Punct("+" | "-")) {
            self.bump();
            self.multiplicative(scope)?;
        }
        Ok(())
    }

    fn multiplicative(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        self.unary(scope)?;
        while matches!(self.peek(), QTok::Punct("*" | "/" | "%")) {
            self.bump();
            self.unary(scope)?;
        }
        Ok(())
    }

    fn unary(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        if matches!(self.peek(), QTok::Punct("-" | "+" | "!")) {
            self.bump();
            return self.unary(scope);
        }
        self.primary(scope)?;
        loop {
            if self.is_p(".") && matches!(self.peek_at(1), QTok::Ident { .. }) {
                // Property access on a dynamic column.
                self.bump();
                self.bump();
            } else if self.eat_p("[") {
                self.expr(scope)?;
                self.expect_p("]")?;
            } else {
                return Ok(());
            }
        }
    }

    fn primary(&mut self, scope: &Scope) -> Result<(), SyntaxError> {
        match self.peek().clone() {
            QTok::Num(_) | QTok::Str(_) | QTok::Param => {
                self.bump();
                Ok(())
            }
            QTok::Punct("(") => {
                self.bump();
                loop {
                    self.expr(scope)?;
                    if !self.eat_p(",") {
                        break;
                    }
                }
                self.expect_p(")")
            }
            QTok::Punct("[") => {
                // Dynamic array literal.
                self.bump();
                while !self.is_p("]") {
                    self.expr(scope)?;
                    if !self.eat_p(",") {
                        break;
                    }
                }
                self.expect_p("]")
            }
            QTok::Ident { text, .. } => {
                self.bump();
                if self.eat_p("(") {
                    if self.eat_p("*") {
                        return self.expect_p(")");
                    }
                    while !self.is_p(")") {
                        self.expr(scope)?;
                        if !self.eat_p(",") {
                            break;
                        }
                    }
                    return self.expect_p(")");
                }
                match text.as_str() {
                    "true" | "false" | "null" => Ok(()),
                    "$left" | "$right" => {
                        self.expect_p(".")?;
                        let col = self.ident()?;
                        self.attribute(scope, &col);
                        Ok(())
                    }
                    _ if WORD_OPS.contains(&text.as_str()) || matches!(text.as_str(), "and" | "or" | "by" | "on") => {
                        self.pos -= 1;
                        Err(self.unexpected())
                    }
                    _ => {
                        self.attribute(scope, &text);
                        Ok(())
                    }
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}
