use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(f64),
    Ident(String),
    Var,
    Min,
    SubjectTo,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Le,
    Ge,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var => "`var`".into(),
            Tok::Min => "`min`".into(),
            Tok::SubjectTo => "`s.t.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, ModelError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ModelError::Syntax { line, col, msg };
    while i < chars.len() {
        let ch = chars[i];
        let span = Span { line, col };
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| err(line, col, format!("malformed number `{text}`")))?;
            col += i - start;
            out.push((Tok::Num(v), span));
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            if chars[i..].starts_with(&['s', '.', 't', '.']) {
                i += 4;
                col += 4;
                out.push((Tok::SubjectTo, span));
                continue;
            }
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match text.as_str() {
                "var" => Tok::Var,
                "min" => Tok::Min,
                _ => Tok::Ident(text),
            };
            out.push((tok, span));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (ch, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('=', Some('=')) => (Tok::Eq, 2),
            ('≤', _) => (Tok::Le, 1),
            ('≥', _) => (Tok::Ge, 1),
            ('=', _) => (Tok::Eq, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('^', _) => (Tok::Caret, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            _ => return Err(err(line, col, format!("unexpected character `{ch}`"))),
        };
        i += len;
        col += len;
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            kinds("var x1=-2.5e1; # note\nmin x1^2;"),
            vec![
                Tok::Var,
                Tok::Ident("x1".into()),
                Tok::Eq,
                Tok::Minus,
                Tok::Num(25.0),
                Tok::Semi,
                Tok::Min,
                Tok::Ident("x1".into()),
                Tok::Caret,
                Tok::Num(2.0),
                Tok::Semi,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn relations_and_marker() {
        assert_eq!(
            kinds("s.t. a <= b ≥ c ≤ d >= e"),
            vec![
                Tok::SubjectTo,
                Tok::Ident("a".into()),
                Tok::Le,
                Tok::Ident("b".into()),
                Tok::Ge,
                Tok::Ident("c".into()),
                Tok::Le,
                Tok::Ident("d".into()),
                Tok::Ge,
                Tok::Ident("e".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions() {
        let toks = tokenize("var x;\n  min x;").unwrap();
        assert_eq!(toks[3].1, Span { line: 2, col: 3 });
    }

    #[test]
    fn bad_character() {
        assert_eq!(
            tokenize("min x $").unwrap_err(),
            ModelError::Syntax {
                line: 1,
                col: 7,
                msg: "unexpected character `$`".into()
            }
        );
    }
}
