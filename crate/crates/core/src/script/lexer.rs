//! Indentation-aware tokenizer for Python-style scripts.

use crate::error::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Name(String),
    Str(String),
    /// String with `{}` interpolation; its value is not a static literal.
    FStr,
    Num(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

// Longest operators first.
const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "@=", "**", "//", "<<", ">>", "+", "-", "*", "/", "%", "@", "&", "|", "^", "~", "<", ">", "(", ")", "[", "]",
    "{", "}", ",", ":", ".", ";", "=",
];

/// Operators after which a line break continues the logical line. Python
/// itself would reject a break after `=`, but scripts in the wild (and
/// listings copied from documents) contain it.
const CONTINUES_LINE: &[&str] =
    &["=", "+", "-", "/", "%", "**", "//", "==", "!=", "<", ">", "<=", ">=", "&", "|", "+=", "-=", "*=", "/="];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    Lexer::new(src).run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    depth: usize,
    indents: Vec<usize>,
    out: Vec<Token>,
    at_line_start: bool,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            depth: 0,
            indents: vec![0],
            out: Vec::new(),
            at_line_start: true,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, line: usize, column: usize) {
        self.out.push(Token { tok, line, column });
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.line, self.col, msg)
    }

    fn last_is_continuation(&self) -> bool {
        matches!(self.out.last(), Some(Token { tok: Tok::Op(op), .. }) if CONTINUES_LINE.contains(op))
    }

    fn last_is_newline(&self) -> bool {
        matches!(self.out.last(), None | Some(Token { tok: Tok::Newline | Tok::Indent | Tok::Dedent, .. }))
    }

    fn run(mut self) -> Result<Vec<Token>, SyntaxError> {
        loop {
            if self.at_line_start && self.depth == 0 {
                self.at_line_start = false;
                if !self.handle_indentation()? {
                    continue;
                }
            }
            let Some(c) = self.peek() else { break };
            let (line, col) = (self.line, self.col);
            match c {
                '\n' => {
                    self.bump();
                    if self.depth > 0 || self.last_is_continuation() {
                        continue;
                    }
                    if !self.last_is_newline() {
                        self.push(Tok::Newline, line, col);
                    }
                    self.at_line_start = true;
                }
                ' ' | '\t' | '\r' | '\x0c' => {
                    self.bump();
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '\\' if matches!(self.peek_at(1), Some('\n'))
                    || (self.peek_at(1) == Some('\r') && self.peek_at(2) == Some('\n')) =>
                {
                    self.bump();
                    if self.peek() == Some('\r') {
                        self.bump();
                    }
                    self.bump();
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                        name.push(c);
                        self.bump();
                    }
                    if matches!(self.peek(), Some('"' | '\'')) && is_string_prefix(&name) {
                        let interpolated = name.to_ascii_lowercase().contains('f');
                        let raw = name.to_ascii_lowercase().contains('r');
                        let s = self.string(raw)?;
                        let tok = if interpolated && s.contains('{') { Tok::FStr } else { Tok::Str(s) };
                        self.push(tok, line, col);
                    } else {
                        self.push(Tok::Name(name), line, col);
                    }
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) => {
                    let mut num = String::new();
                    while let Some(c) = self.peek() {
                        let exp_sign = (c == '+' || c == '-')
                            && matches!(num.chars().last(), Some('e' | 'E'))
                            && !num.starts_with("0x");
                        if c.is_ascii_alphanumeric() || c == '.' || c == '_' || exp_sign {
                            num.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.push(Tok::Num(num), line, col);
                }
                '"' | '\'' => {
                    let s = self.string(false)?;
                    self.push(Tok::Str(s), line, col);
                }
                _ => {
                    let Some(op) = OPERATORS.iter().copied().find(|op| self.starts_with(op)) else {
                        return Err(self.err(format!("unexpected character {c:?}")));
                    };
                    for _ in 0..op.chars().count() {
                        self.bump();
                    }
                    match op {
                        "(" | "[" | "{" => self.depth += 1,
                        ")" | "]" | "}" => {
                            if self.depth == 0 {
                                return Err(SyntaxError::new(line, col, format!("unmatched {op:?}")));
                            }
                            self.depth -= 1;
                        }
                        _ => {}
                    }
                    self.push(Tok::Op(op), line, col);
                }
            }
        }
        if self.depth > 0 {
            return Err(self.err("unexpected end of file inside brackets"));
        }
        if !self.last_is_newline() {
            self.push(Tok::Newline, self.line, self.col);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, self.line, self.col);
        }
        self.push(Tok::Eof, self.line, self.col);
        Ok(self.out)
    }

    fn starts_with(&self, op: &str) -> bool {
        op.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    /// Measures leading whitespace and emits INDENT/DEDENT. Returns false if
    /// the line is blank or a comment and should be skipped.
    fn handle_indentation(&mut self) -> Result<bool, SyntaxError> {
        let mut width = 0;
        while let Some(c) = self.peek() {
            match c {
                ' ' => width += 1,
                '\t' => width = (width / 8 + 1) * 8,
                '\x0c' | '\r' => {}
                _ => break,
            }
            self.bump();
        }
        match self.peek() {
            None => return Ok(true),
            Some('\n') => {
                self.bump();
                self.at_line_start = true;
                return Ok(false);
            }
            Some('#') => {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
                if self.peek().is_some() {
                    self.bump();
                }
                self.at_line_start = true;
                return Ok(false);
            }
            _ => {}
        }
        let current = *self.indents.last().expect("indent stack is never empty");
        if width > current {
            self.indents.push(width);
            self.push(Tok::Indent, self.line, 1);
        } else {
            while width < *self.indents.last().expect("indent stack is never empty") {
                self.indents.pop();
                self.push(Tok::Dedent, self.line, 1);
            }
            if width != *self.indents.last().expect("indent stack is never empty") {
                return Err(self.err("unindent does not match any outer indentation level"));
            }
        }
        Ok(true)
    }

    fn string(&mut self, raw: bool) -> Result<String, SyntaxError> {
        let (line, col) = (self.line, self.col);
        let quote = self.bump().expect("caller checked for a quote");
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        let mut out = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(SyntaxError::new(line, col, "unterminated string literal"));
            };
            if c == quote {
                if !triple {
                    return Ok(out);
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    self.bump();
                    self.bump();
                    return Ok(out);
                }
                out.push(c);
                continue;
            }
            if c == '\n' && !triple {
                return Err(SyntaxError::new(line, col, "unterminated string literal"));
            }
            if c == '\\' {
                let Some(next) = self.bump() else {
                    return Err(SyntaxError::new(line, col, "unterminated string literal"));
                };
                if raw {
                    out.push('\\');
                    out.push(next);
                    continue;
                }
                match next {
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    '0' => out.push('\0'),
                    '\n' => {}
                    '\\' | '\'' | '"' => out.push(next),
                    other => {
                        out.push('\\');
                        out.push(other);
                    }
                }
                continue;
            }
            out.push(c);
        }
    }
}

fn is_string_prefix(name: &str) -> bool {
    matches!(name.to_ascii_lowercase().as_str(), "r" | "b" | "u" | "f" | "rb" | "br" | "fr" | "rf")
}
