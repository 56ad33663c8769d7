//! SQL subset: `SELECT … FROM … [JOIN … ON …]* [WHERE …] [GROUP BY …]
//! [HAVING …] [ORDER BY …] [LIMIT …]`, `INTO`, `INSERT INTO … SELECT`,
//! `UNION`, and subqueries in `FROM` and in expressions.

use std::collections::BTreeSet;

use super::lexer::{tokenize, Flavor, QTok, QToken};
use super::{Dialect, QueryAst, ReadSet};
use crate::diagnostics::{Diagnostic, DiagnosticCode};
use crate::error::SyntaxError;
use crate::model::ColumnSet;

const KEYWORDS: &[&str] = &[
    "SELECT",
    "FROM",
    "WHERE",
    "GROUP",
    "BY",
    "HAVING",
    "ORDER",
    "LIMIT",
    "OFFSET",
    "JOIN",
    "INNER",
    "LEFT",
    "RIGHT",
    "FULL",
    "OUTER",
    "CROSS",
    "NATURAL",
    "ON",
    "USING",
    "AS",
    "AND",
    "OR",
    "NOT",
    "IN",
    "IS",
    "NULL",
    "LIKE",
    "ILIKE",
    "BETWEEN",
    "CASE",
    "WHEN",
    "THEN",
    "ELSE",
    "END",
    "DISTINCT",
    "ALL",
    "UNION",
    "INTO",
    "TOP",
    "ASC",
    "DESC",
    "EXISTS",
    "CAST",
    "TRUE",
    "FALSE",
    "INSERT",
    "WITH",
    "EXCEPT",
    "INTERSECT",
    "OVER",
    "PARTITION",
    "FETCH",
];

pub fn parse_sql(text: &str) -> Result<QueryAst, SyntaxError> {
    let toks = tokenize(text, Flavor::Sql)?;
    let mut p =
        SqlParser { toks, pos: 0, rs: ReadSet::default(), diags: Vec::new(), output: None, nested_reported: false };
    let projection = p.statement()?;
    Ok(QueryAst {
        dialect: Dialect::Sql,
        reads: p.rs.reads,
        tables: p.rs.tables,
        projection,
        output_symbol: p.output,
        diagnostics: p.diags,
    })
}

#[derive(Clone, Debug)]
struct ColRef {
    qual: Option<String>,
    name: String,
    /// Unqualified names in GROUP BY / HAVING / ORDER BY may be select aliases.
    alias_ok: bool,
    line: usize,
    column: usize,
}

struct Binding {
    names: Vec<String>,
    tables: Vec<String>,
}

struct SelectInfo {
    tables: Vec<String>,
    pending: Vec<ColRef>,
    projection: ColumnSet,
}

enum Item {
    Star,
    QualStar(String),
    Expr,
}

struct SqlParser {
    toks: Vec<QToken>,
    pos: usize,
    rs: ReadSet,
    diags: Vec<Diagnostic>,
    output: Option<String>,
    nested_reported: bool,
}

impl SqlParser {
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
        matches!(self.peek_at(off), QTok::Ident { text, quoted: false } if text.eq_ignore_ascii_case(kw))
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

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected {kw}")))
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

    /// A non-keyword identifier at the cursor.
    fn plain_ident(&self) -> Option<String> {
        match self.peek() {
            QTok::Ident { text, quoted: true } => Some(text.clone()),
            QTok::Ident { text, quoted: false } if !is_keyword(text) => Some(text.clone()),
            _ => None,
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.plain_ident() {
            Some(s) => {
                self.bump();
                Ok(s)
            }
            None => Err(self.unexpected()),
        }
    }

    /// `a.b.c` as segments.
    fn dotted(&mut self) -> Result<Vec<String>, SyntaxError> {
        let mut segs = vec![self.ident()?];
        while self.is_p(".") && !matches!(self.peek_at(1), QTok::Punct("*")) {
            self.bump();
            segs.push(self.ident()?);
        }
        Ok(segs)
    }

    fn statement(&mut self) -> Result<ColumnSet, SyntaxError> {
        if self.is_kw("WITH") {
            return Err(self.err("common table expressions are not supported"));
        }
        if self.eat_kw("INSERT") {
            self.expect_kw("INTO")?;
            self.output = Some(self.target_name()?);
            if self.eat_p("(") {
                loop {
                    self.ident()?;
                    if !self.eat_p(",") {
                        break;
                    }
                }
                self.expect_p(")")?;
            }
        }
        let info = self.compound(0)?;
        for r in &info.pending {
            self.diags.push(
                Diagnostic::new(
                    DiagnosticCode::UnresolvedQualifier,
                    format!("qualifier {:?} matches no table in scope", r.qual.as_deref().unwrap_or_default()),
                )
                .at(r.line, r.column),
            );
            for t in &info.tables {
                self.rs.column(t, &r.name);
            }
        }
        self.eat_p(";");
        if !matches!(self.peek(), QTok::Eof) {
            return Err(self.unexpected());
        }
        Ok(info.projection)
    }

    fn target_name(&mut self) -> Result<String, SyntaxError> {
        if let QTok::Str(s) = self.peek().clone() {
            self.bump();
            return Ok(s);
        }
        Ok(self.dotted()?.join("."))
    }

    fn compound(&mut self, level: usize) -> Result<SelectInfo, SyntaxError> {
        let mut info = self.select(level)?;
        while self.eat_kw("UNION") || self.eat_kw("EXCEPT") || self.eat_kw("INTERSECT") {
            if !self.eat_kw("ALL") {
                self.eat_kw("DISTINCT");
            }
            let next = self.select(level)?;
            for t in next.tables {
                if !info.tables.contains(&t) {
                    info.tables.push(t);
                }
            }
            info.pending.extend(next.pending);
        }
        Ok(info)
    }

    fn select(&mut self, level: usize) -> Result<SelectInfo, SyntaxError> {
        if self.eat_p("(") {
            let info = self.compound(level)?;
            self.expect_p(")")?;
            return Ok(info);
        }
        self.expect_kw("SELECT")?;
        if !self.eat_kw("DISTINCT") {
            self.eat_kw("ALL");
        }
        if self.eat_kw("TOP") {
            let mut refs = Vec::new();
            self.primary(&mut refs, level, false)?;
            self.eat_kw("PERCENT");
        }

        let mut items = Vec::new();
        let mut refs = Vec::new();
        let mut aliases = BTreeSet::new();
        let mut names = Vec::new();
        loop {
            if self.eat_p("*") {
                items.push(Item::Star);
            } else if self.is_qualified_star() {
                let mut q = vec![self.ident()?];
                while self.eat_p(".") && !self.is_p("*") {
                    q.push(self.ident()?);
                }
                self.expect_p("*")?;
                items.push(Item::QualStar(q.join(".")));
            } else {
                let start = self.pos;
                self.expr(&mut refs, level, false)?;
                let bare =
                    self.toks[start..self.pos].iter().all(|t| matches!(t.tok, QTok::Ident { .. } | QTok::Punct(".")));
                let alias = if self.eat_kw("AS") {
                    Some(match self.bump() {
                        QTok::Ident { text, .. } | QTok::Str(text) => text,
                        _ => return Err(self.err("expected alias")),
                    })
                } else {
                    self.plain_ident().inspect(|_| {
                        self.bump();
                    })
                };
                match alias {
                    Some(a) => {
                        aliases.insert(a.to_ascii_lowercase());
                        names.push(a);
                    }
                    None if bare => {
                        if let QTok::Ident { text, .. } = &self.toks[self.pos - 1].tok {
                            names.push(text.clone());
                        }
                    }
                    None => {}
                }
                items.push(Item::Expr);
            }
            if !self.eat_p(",") {
                break;
            }
        }
        if self.eat_kw("INTO") {
            self.into(level)?;
        }
        self.expect_kw("FROM")?;

        let mut scope: Vec<Binding> = Vec::new();
        let mut natural = false;
        self.parse_from_item(level, &mut scope, &mut refs)?;
        loop {
            if self.eat_p(",") {
                self.parse_from_item(level, &mut scope, &mut refs)?;
                continue;
            }
            let mut is_join = false;
            if self.eat_kw("NATURAL") {
                natural = true;
            }
            if self.eat_kw("INNER") || self.eat_kw("CROSS") {
                is_join = true;
            } else if self.eat_kw("LEFT") || self.eat_kw("RIGHT") || self.eat_kw("FULL") {
                self.eat_kw("OUTER");
                is_join = true;
            }
            if self.eat_kw("JOIN") {
                self.parse_from_item(level, &mut scope, &mut refs)?;
                if self.eat_kw("ON") {
                    self.expr(&mut refs, level, false)?;
                } else if self.eat_kw("USING") {
                    self.expect_p("(")?;
                    loop {
                        let (line, column) = self.here();
                        let name = self.ident()?;
                        refs.push(ColRef { qual: None, name, alias_ok: false, line, column });
                        if !self.eat_p(",") {
                            break;
                        }
                    }
                    self.expect_p(")")?;
                }
            } else if is_join || natural {
                return Err(self.err("expected JOIN"));
            } else {
                break;
            }
        }
        if self.eat_kw("WHERE") {
            self.expr(&mut refs, level, false)?;
        }
        if self.eat_kw("GROUP") {
            self.expect_kw("BY")?;
            loop {
                self.expr(&mut refs, level, true)?;
                if !self.eat_p(",") {
                    break;
                }
            }
        }
        if self.eat_kw("HAVING") {
            self.expr(&mut refs, level, true)?;
        }
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            self.order_list(&mut refs, level)?;
        }
        if self.eat_kw("LIMIT") {
            self.expr(&mut refs, level, false)?;
            if self.eat_p(",") || self.eat_kw("OFFSET") {
                self.expr(&mut refs, level, false)?;
            }
        } else if self.eat_kw("OFFSET") {
            self.expr(&mut refs, level, false)?;
            self.eat_kw("ROWS");
            if self.eat_kw("FETCH") {
                while !matches!(self.peek(), QTok::Eof | QTok::Punct(")" | ";")) {
                    self.bump();
                }
            }
        }
        if self.eat_kw("INTO") {
            self.into(level)?;
        }

        // Attribution.
        let tables: Vec<String> = {
            let mut v: Vec<String> = Vec::new();
            for b in &scope {
                for t in &b.tables {
                    if !v.contains(t) {
                        v.push(t.clone());
                    }
                }
            }
            v
        };
        let mut star = false;
        for item in &items {
            match item {
                Item::Star => {
                    star = true;
                    tables.iter().for_each(|t| self.rs.all(t));
                }
                Item::QualStar(q) => match lookup(&scope, q) {
                    Some(b) => b.tables.iter().for_each(|t| self.rs.all(t)),
                    None => {
                        let (line, column) = self.here();
                        self.diags.push(
                            Diagnostic::new(
                                DiagnosticCode::UnresolvedQualifier,
                                format!("qualifier {q:?} matches no table in scope"),
                            )
                            .at(line, column),
                        );
                        tables.iter().for_each(|t| self.rs.all(t));
                    }
                },
                Item::Expr => {}
            }
        }
        if natural {
            tables.iter().for_each(|t| self.rs.all(t));
        }
        let mut pending = Vec::new();
        for r in refs {
            match &r.qual {
                None if r.alias_ok && aliases.contains(&r.name.to_ascii_lowercase()) => {}
                None => tables.iter().for_each(|t| self.rs.column(t, &r.name)),
                Some(q) => match lookup(&scope, q) {
                    Some(b) => b.tables.iter().for_each(|t| self.rs.column(t, &r.name)),
                    None => pending.push(r),
                },
            }
        }
        if level >= 2 {
            tables.iter().for_each(|t| self.rs.all(t));
            if !self.nested_reported {
                self.nested_reported = true;
                self.diags.push(Diagnostic::new(
                    DiagnosticCode::NestedSubquery,
                    "subquery nested more than one level; its tables are read in full",
                ));
            }
        }
        let projection = if star || items.iter().any(|i| matches!(i, Item::QualStar(_))) {
            ColumnSet::All
        } else {
            ColumnSet::explicit(names)
        };
        Ok(SelectInfo { tables, pending, projection })
    }

    fn into(&mut self, level: usize) -> Result<(), SyntaxError> {
        if level > 0 {
            return Err(self.err("INTO is only allowed in the outermost query"));
        }
        let name = self.target_name()?;
        self.output = Some(name);
        Ok(())
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn is_qualified_star(&self) -> bool {
        let mut off = 0;
        loop {
            if !matches!(self.peek_at(off), QTok::Ident { .. }) || !matches!(self.peek_at(off + 1), QTok::Punct(".")) {
                return false;
            }
            if matches!(self.peek_at(off + 2), QTok::Punct("*")) {
                return true;
            }
            off += 2;
        }
    }

    fn parse_from_item(
        &mut self,
        level: usize,
        scope: &mut Vec<Binding>,
        refs: &mut Vec<ColRef>,
    ) -> Result<(), SyntaxError> {
        if self.is_p("(") && (self.kw_at(1, "SELECT") || matches!(self.peek_at(1), QTok::Punct("("))) {
            self.bump();
            let info = self.compound(level + 1)?;
            self.expect_p(")")?;
            self.eat_kw("AS");
            let alias = self.plain_ident().inspect(|_| {
                self.bump();
            });
            refs.extend(info.pending);
            scope.push(Binding { names: alias.into_iter().collect(), tables: info.tables });
            return Ok(());
        }
        let segs = self.dotted()?;
        let name = segs.join(".");
        self.rs.touch(&name);
        let mut names = vec![name.clone()];
        if segs.len() > 1 {
            names.push(segs.last().expect("non-empty").clone());
        }
        if self.eat_kw("AS") {
            names.push(self.ident()?);
        } else if let Some(a) = self.plain_ident() {
            self.bump();
            names.push(a);
        }
        scope.push(Binding { names, tables: vec![name] });
        Ok(())
    }

    fn order_list(&mut self, refs: &mut Vec<ColRef>, level: usize) -> Result<(), SyntaxError> {
        loop {
            self.expr(refs, level, true)?;
            if !self.eat_kw("ASC") {
                self.eat_kw("DESC");
            }
            if self.eat_kw("NULLS") && !self.eat_kw("FIRST") && !self.eat_kw("LAST") {
                return Err(self.err("expected FIRST or LAST"));
            }
            if !self.eat_p(",") {
                return Ok(());
            }
        }
    }

    // ---- expressions ----

    fn expr(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        self.and_expr(out, level, alias_ok)?;
        while self.eat_kw("OR") {
            self.and_expr(out, level, alias_ok)?;
        }
        Ok(())
    }

    fn and_expr(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        self.not_expr(out, level, alias_ok)?;
        while self.eat_kw("AND") {
            self.not_expr(out, level, alias_ok)?;
        }
        Ok(())
    }

    fn not_expr(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        if self.eat_kw("NOT") {
            return self.not_expr(out, level, alias_ok);
        }
        self.predicate(out, level, alias_ok)
    }

    fn predicate(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        self.additive(out, level, alias_ok)?;
        loop {
            if matches!(self.peek(), QTok::Punct("=" | "==" | "<>" | "!=" | "<" | ">" | "<=" | ">=")) {
                self.bump();
                self.additive(out, level, alias_ok)?;
                continue;
            }
            let negated = self.is_kw("NOT")
                && (self.kw_at(1, "LIKE") || self.kw_at(1, "ILIKE") || self.kw_at(1, "IN") || self.kw_at(1, "BETWEEN"));
            if negated {
                self.bump();
            }
            if self.eat_kw("LIKE") || self.eat_kw("ILIKE") {
                self.additive(out, level, alias_ok)?;
                if self.eat_kw("ESCAPE") {
                    self.additive(out, level, alias_ok)?;
                }
            } else if self.eat_kw("IN") {
                self.expect_p("(")?;
                if self.is_kw("SELECT") {
                    let info = self.compound(level + 1)?;
                    out.extend(info.pending);
                } else {
                    loop {
                        self.expr(out, level, alias_ok)?;
                        if !self.eat_p(",") {
                            break;
                        }
                    }
                }
                self.expect_p(")")?;
            } else if self.eat_kw("BETWEEN") {
                self.additive(out, level, alias_ok)?;
                self.expect_kw("AND")?;
                self.additive(out, level, alias_ok)?;
            } else if self.eat_kw("IS") {
                self.eat_kw("NOT");
                if self.eat_kw("DISTINCT") {
                    self.expect_kw("FROM")?;
                    self.additive(out, level, alias_ok)?;
                } else if !(self.eat_kw("NULL") || self.eat_kw("TRUE") || self.eat_kw("FALSE")) {
                    return Err(self.err("expected NULL, TRUE or FALSE"));
                }
            } else if negated {
                return Err(self.unexpected());
            } else {
                return Ok(());
            }
        }
    }

    fn additive(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        self.multiplicative(out, level, alias_ok)?;
        while matches!(self.peek(), QTok::Punct("+" | "-" | "||")) {
            self.bump();
            self.multiplicative(out, level, alias_ok)?;
        }
        Ok(())
    }

    fn multiplicative(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        self.unary(out, level, alias_ok)?;
        while matches!(self.peek(), QTok::Punct("*" | "/" | "%")) {
            self.bump();
            self.unary(out, level, alias_ok)?;
        }
        Ok(())
    }

    fn unary(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        if matches!(self.peek(), QTok::Punct("-" | "+" | "~")) {
            self.bump();
            return self.unary(out, level, alias_ok);
        }
        self.primary(out, level, alias_ok)?;
        // Postgres-style cast `x::type`.
        while self.is_p(":") && matches!(self.peek_at(1), QTok::Punct(":")) {
            self.bump();
            self.bump();
            self.type_name()?;
        }
        Ok(())
    }

    fn type_name(&mut self) -> Result<(), SyntaxError> {
        match self.bump() {
            QTok::Ident { .. } => {}
            _ => return Err(self.err("expected a type name")),
        }
        while matches!(self.peek(), QTok::Ident { quoted: false, .. }) && !is_keyword_tok(self.peek()) {
            self.bump();
        }
        if self.eat_p("(") {
            while !self.eat_p(")") {
                if matches!(self.peek(), QTok::Eof) {
                    return Err(self.err("expected \")\""));
                }
                self.bump();
            }
        }
        Ok(())
    }

    fn primary(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        let (line, column) = self.here();
        match self.peek().clone() {
            QTok::Num(_) | QTok::Str(_) | QTok::Param => {
                self.bump();
                Ok(())
            }
            QTok::Punct("(") => {
                self.bump();
                if self.is_kw("SELECT") {
                    let info = self.compound(level + 1)?;
                    out.extend(info.pending);
                } else {
                    loop {
                        self.expr(out, level, alias_ok)?;
                        if !self.eat_p(",") {
                            break;
                        }
                    }
                }
                self.expect_p(")")
            }
            QTok::Ident { text, quoted } => {
                let upper = text.to_ascii_uppercase();
                if !quoted {
                    match upper.as_str() {
                        "NULL" | "TRUE" | "FALSE" => {
                            self.bump();
                            return Ok(());
                        }
                        "CASE" => {
                            self.bump();
                            if !self.is_kw("WHEN") {
                                self.expr(out, level, alias_ok)?;
                            }
                            let mut arms = 0;
                            while self.eat_kw("WHEN") {
                                self.expr(out, level, alias_ok)?;
                                self.expect_kw("THEN")?;
                                self.expr(out, level, alias_ok)?;
                                arms += 1;
                            }
                            if arms == 0 {
                                return Err(self.err("expected WHEN"));
                            }
                            if self.eat_kw("ELSE") {
                                self.expr(out, level, alias_ok)?;
                            }
                            return self.expect_kw("END");
                        }
                        "CAST" => {
                            self.bump();
                            self.expect_p("(")?;
                            self.expr(out, level, alias_ok)?;
                            self.expect_kw("AS")?;
                            self.type_name()?;
                            return self.expect_p(")");
                        }
                        "EXISTS" => {
                            self.bump();
                            self.expect_p("(")?;
                            let info = self.compound(level + 1)?;
                            out.extend(info.pending);
                            return self.expect_p(")");
                        }
                        _ if is_keyword(&text) => return Err(self.unexpected()),
                        _ => {}
                    }
                }
                let segs = self.dotted()?;
                if self.eat_p("(") {
                    self.call_args(out, level, alias_ok)?;
                    if self.eat_kw("FILTER") {
                        self.expect_p("(")?;
                        self.expect_kw("WHERE")?;
                        self.expr(out, level, alias_ok)?;
                        self.expect_p(")")?;
                    }
                    if self.eat_kw("OVER") {
                        self.window(out, level)?;
                    }
                    return Ok(());
                }
                // Typed literal such as DATE '2020-01-01'.
                if segs.len() == 1 && matches!(self.peek(), QTok::Str(_)) {
                    self.bump();
                    return Ok(());
                }
                let mut segs = segs;
                let name = segs.pop().expect("non-empty");
                let qual = (!segs.is_empty()).then(|| segs.join("."));
                out.push(ColRef { qual, name, alias_ok, line, column });
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }

    fn call_args(&mut self, out: &mut Vec<ColRef>, level: usize, alias_ok: bool) -> Result<(), SyntaxError> {
        if self.eat_p(")") {
            return Ok(());
        }
        if !self.eat_kw("DISTINCT") {
            self.eat_kw("ALL");
        }
        if self.eat_p("*") {
            return self.expect_p(")");
        }
        loop {
            self.expr(out, level, alias_ok)?;
            // Function-specific keyword forms, e.g. EXTRACT(YEAR FROM d), TRIM(x FROM y).
            if self.eat_kw("FROM") || self.eat_kw("AS") {
                self.expr(out, level, alias_ok)?;
            }
            if !self.eat_p(",") {
                break;
            }
        }
        self.expect_p(")")
    }

    fn window(&mut self, out: &mut Vec<ColRef>, level: usize) -> Result<(), SyntaxError> {
        self.expect_p("(")?;
        if self.eat_kw("PARTITION") {
            self.expect_kw("BY")?;
            loop {
                self.expr(out, level, false)?;
                if !self.eat_p(",") {
                    break;
                }
            }
        }
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            self.order_list(out, level)?;
        }
        // Frame clauses carry no column references.
        let mut depth = 0;
        loop {
            match self.peek() {
                QTok::Eof => return Err(self.err("expected \")\"")),
                QTok::Punct("(") => depth += 1,
                QTok::Punct(")") if depth == 0 => break,
                QTok::Punct(")") => depth -= 1,
                _ => {}
            }
            self.bump();
        }
        self.expect_p(")")
    }
}

fn is_keyword(text: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(text))
}

fn is_keyword_tok(t: &QTok) -> bool {
    matches!(t, QTok::Ident { text, quoted: false } if is_keyword(text))
}

fn lookup<'a>(scope: &'a [Binding], qual: &str) -> Option<&'a Binding> {
    let last = qual.rsplit('.').next().unwrap_or(qual);
    scope
        .iter()
        .rev()
        .find(|b| b.names.iter().any(|n| n.eq_ignore_ascii_case(qual)))
        .or_else(|| scope.iter().rev().find(|b| b.names.iter().any(|n| n.eq_ignore_ascii_case(last))))
}
