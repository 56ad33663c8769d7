//! Tokenizer shared by the SQL and pipe query dialects.

use crate::error::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum QTok {
    /// Identifier or keyword. `quoted` identifiers are never keywords.
    Ident {
        text: String,
        quoted: bool,
    },
    Str(String),
    Num(String),
    /// `@name` / `:name` / `?` parameter placeholders.
    Param,
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QToken {
    pub tok: QTok,
    pub line: usize,
    pub column: usize,
}

const PUNCT: &[&str] = &[
    "<>", "!=", "<=", ">=", "==", "=~", "!~", "||", "..", "|", "(", ")", ",", ".", "*", "=", "<", ">", "+", "-", "/",
    "%", ";", "[", "]", ":", "~", "!", "{", "}",
];

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Sql,
    Pipe,
}

pub fn tokenize(src: &str, flavor: Flavor) -> Result<Vec<QToken>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
        } else if (c == '-' && next == Some('-')) || (c == '/' && next == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
        } else if c == '/' && next == Some('*') {
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(SyntaxError::new(l0, c0, "unterminated comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
        } else if c.is_alphabetic() || c == '_' || (c == '$' && next.is_some_and(|n| n.is_alphabetic())) {
            let start = i;
            advance(&mut i, &mut line, &mut col, 1);
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            let text: String = chars[start..i].iter().collect();
            out.push(QToken { tok: QTok::Ident { text, quoted: false }, line: l0, column: c0 });
        } else if c.is_ascii_digit() || (c == '.' && next.is_some_and(|n| n.is_ascii_digit())) {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '+' || d == '-') && matches!(chars[i - 1], 'e' | 'E');
                let dot = d == '.' && chars.get(i + 1) != Some(&'.');
                if d.is_ascii_alphanumeric() || dot || d == '_' || exp_sign {
                    advance(&mut i, &mut line, &mut col, 1);
                } else {
                    break;
                }
            }
            out.push(QToken { tok: QTok::Num(chars[start..i].iter().collect()), line: l0, column: c0 });
        } else if c == '\''
            || (c == '"' && flavor == Flavor::Pipe)
            || (c == '@' && flavor == Flavor::Pipe && matches!(next, Some('"' | '\'')))
        {
            let verbatim = c == '@';
            if verbatim {
                advance(&mut i, &mut line, &mut col, 1);
            }
            let quote = chars[i];
            advance(&mut i, &mut line, &mut col, 1);
            let mut s = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(SyntaxError::new(l0, c0, "unterminated string literal"));
                };
                if d == quote {
                    // SQL doubles the quote to escape it.
                    if flavor == Flavor::Sql && chars.get(i + 1) == Some(&quote) {
                        s.push(quote);
                        advance(&mut i, &mut line, &mut col, 2);
                        continue;
                    }
                    advance(&mut i, &mut line, &mut col, 1);
                    break;
                }
                if d == '\\' && flavor == Flavor::Pipe && !verbatim {
                    if let Some(&e) = chars.get(i + 1) {
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        advance(&mut i, &mut line, &mut col, 2);
                        continue;
                    }
                }
                if d == '\n' && flavor == Flavor::Pipe {
                    return Err(SyntaxError::new(l0, c0, "unterminated string literal"));
                }
                s.push(d);
                advance(&mut i, &mut line, &mut col, 1);
            }
            out.push(QToken { tok: QTok::Str(s), line: l0, column: c0 });
        } else if (c == '"' || c == '`') && flavor == Flavor::Sql || (c == '[' && flavor == Flavor::Sql) {
            let close = if c == '[' { ']' } else { c };
            advance(&mut i, &mut line, &mut col, 1);
            let start = i;
            while i < chars.len() && chars[i] != close {
                if chars[i] == '\n' {
                    return Err(SyntaxError::new(l0, c0, "unterminated quoted identifier"));
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            if i >= chars.len() {
                return Err(SyntaxError::new(l0, c0, "unterminated quoted identifier"));
            }
            let text: String = chars[start..i].iter().collect();
            advance(&mut i, &mut line, &mut col, 1);
            if text.is_empty() {
                return Err(SyntaxError::new(l0, c0, "empty quoted identifier"));
            }
            out.push(QToken { tok: QTok::Ident { text, quoted: true }, line: l0, column: c0 });
        } else if c == '?'
            || ((c == '@' || c == ':') && next.is_some_and(|n| n.is_alphabetic() || n == '_') && flavor == Flavor::Sql)
        {
            advance(&mut i, &mut line, &mut col, 1);
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            out.push(QToken { tok: QTok::Param, line: l0, column: c0 });
        } else if let Some(p) =
            PUNCT.iter().copied().find(|p| p.chars().enumerate().all(|(k, pc)| chars.get(i + k) == Some(&pc)))
        {
            advance(&mut i, &mut line, &mut col, p.chars().count());
            out.push(QToken { tok: QTok::Punct(p), line: l0, column: c0 });
        } else {
            return Err(SyntaxError::new(l0, c0, format!("unexpected character {c:?}")));
        }
    }
    out.push(QToken { tok: QTok::Eof, line, column: col });
    Ok(out)
}
