use crate::diag::Diagnostic;
use crate::syntax::Pos;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Kw(k) => format!("keyword `{k}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const KEYWORDS: &[&str] = &[
    "operation", "exception", "signal", "let", "in", "fun", "funK", "return", "raise", "kill", "try",
    "with", "match", "using", "run", "finally", "kernel", "user", "getenv", "setenv", "if", "then",
    "else", "true", "false", "runner", "int", "bool", "str", "unit", "empty", "inl", "inr",
];

// Longest symbols first.
const SYMBOLS: &[&str] = &[
    "->", "=>", "~>", "!!", "(", ")", "{", "}", "[", "]", ",", ".", ";", ":", "@", "!", "*", "+", "-",
    "=", "<", "_",
];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1u32, 1u32);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let pos = Pos::new(line, col);
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let n = s
                .parse::<i64>()
                .map_err(|_| Diagnostic::new(pos, "Parse-Lex", format!("integer literal `{s}` out of range")))?;
            out.push(Token { tok: Tok::Int(n), pos });
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(Diagnostic::new(pos, "Parse-Lex", "unterminated string literal"));
                }
                let d = chars[i];
                if d == '"' {
                    bump!();
                    break;
                }
                if d == '\\' {
                    bump!();
                    if i >= chars.len() {
                        return Err(Diagnostic::new(pos, "Parse-Lex", "unterminated string literal"));
                    }
                    let e = chars[i];
                    s.push(match e {
                        'n' => '\n',
                        't' => '\t',
                        '"' => '"',
                        '\\' => '\\',
                        other => {
                            let p = Pos::new(line, col);
                            return Err(Diagnostic::new(p, "Parse-Lex", format!("unknown escape `\\{other}`")));
                        }
                    });
                    bump!();
                    continue;
                }
                s.push(d);
                bump!();
            }
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        if is_ident_start(c) && !(c == '_' && !chars.get(i + 1).is_some_and(|d| is_ident_char(*d))) {
            let mut s = String::new();
            while i < chars.len() && is_ident_char(chars[i]) {
                s.push(chars[i]);
                bump!();
            }
            let tok = match KEYWORDS.iter().find(|k| **k == s) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(s),
            };
            out.push(Token { tok, pos });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    bump!();
                }
                out.push(Token { tok: Tok::Sym(sym), pos });
            }
            None => {
                return Err(Diagnostic::new(pos, "Parse-Lex", format!("unexpected character `{c}`")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos::new(line, col) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_listing_fragment() {
        let toks = lex("using fileIO @ (open \"hello.txt\") run # comment\n  s' -> !!").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Kw("using"),
                Tok::Ident("fileIO".into()),
                Tok::Sym("@"),
                Tok::Sym("("),
                Tok::Ident("open".into()),
                Tok::Str("hello.txt".into()),
                Tok::Sym(")"),
                Tok::Kw("run"),
                Tok::Ident("s'".into()),
                Tok::Sym("->"),
                Tok::Sym("!!"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_are_tracked() {
        let toks = lex("a\n  b").unwrap();
        assert_eq!((toks[1].pos.line, toks[1].pos.col), (2, 3));
    }

    #[test]
    fn underscore_alone_is_a_symbol() {
        let toks = lex("_ _x").unwrap();
        assert_eq!(toks[0].tok, Tok::Sym("_"));
        assert_eq!(toks[1].tok, Tok::Ident("_x".into()));
    }

    #[test]
    fn bad_character() {
        let e = lex("a $").unwrap_err();
        assert_eq!(e.rule, "Parse-Lex");
        assert_eq!((e.pos.line, e.pos.col), (1, 3));
    }
}
