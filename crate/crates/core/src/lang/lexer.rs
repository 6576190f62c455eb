//! Tokenizer for the `.hsl` input language.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Colon,
    Eq,
    Neq,
    Lt,
    Leq,
    Arrow,     // ->
    Implies,   // ==>
    AndAnd,    // &&
    OrOr,      // ||
    Bar,       // |
    Bang,      // !
    Plus,
    EqPat, // leading '=' in patterns is the same token as Eq; kept for clarity
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Comma => write!(f, ","),
            Tok::Semi => write!(f, ";"),
            Tok::Dot => write!(f, "."),
            Tok::Colon => write!(f, ":"),
            Tok::Eq | Tok::EqPat => write!(f, "="),
            Tok::Neq => write!(f, "<>"),
            Tok::Lt => write!(f, "<"),
            Tok::Leq => write!(f, "<="),
            Tok::Arrow => write!(f, "->"),
            Tok::Implies => write!(f, "==>"),
            Tok::AndAnd => write!(f, "&&"),
            Tok::OrOr => write!(f, "||"),
            Tok::Bar => write!(f, "|"),
            Tok::Bang => write!(f, "!"),
            Tok::Plus => write!(f, "+"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! pos {
        () => {
            Pos { line, col }
        };
    }
    while i < bytes.len() {
        let c = bytes[i];
        let p = pos!();
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '(' if i + 1 < bytes.len() && bytes[i + 1] == '*' => {
                // comment, possibly nested
                let mut depth = 1;
                i += 2;
                col += 2;
                while i < bytes.len() && depth > 0 {
                    if bytes[i] == '(' && i + 1 < bytes.len() && bytes[i + 1] == '*' {
                        depth += 1;
                        i += 2;
                        col += 2;
                    } else if bytes[i] == '*' && i + 1 < bytes.len() && bytes[i + 1] == ')' {
                        depth -= 1;
                        i += 2;
                        col += 2;
                    } else if bytes[i] == '\n' {
                        i += 1;
                        line += 1;
                        col = 1;
                    } else {
                        i += 1;
                        col += 1;
                    }
                }
                if depth > 0 {
                    return Err(LexError {
                        pos: p,
                        msg: "unterminated comment".into(),
                    });
                }
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, pos: p });
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, pos: p });
                advance(1, &mut i, &mut col);
            }
            '[' => {
                out.push(Token { tok: Tok::LBracket, pos: p });
                advance(1, &mut i, &mut col);
            }
            ']' => {
                out.push(Token { tok: Tok::RBracket, pos: p });
                advance(1, &mut i, &mut col);
            }
            ',' => {
                out.push(Token { tok: Tok::Comma, pos: p });
                advance(1, &mut i, &mut col);
            }
            ';' => {
                out.push(Token { tok: Tok::Semi, pos: p });
                advance(1, &mut i, &mut col);
            }
            '.' => {
                out.push(Token { tok: Tok::Dot, pos: p });
                advance(1, &mut i, &mut col);
            }
            ':' => {
                out.push(Token { tok: Tok::Colon, pos: p });
                advance(1, &mut i, &mut col);
            }
            '+' => {
                out.push(Token { tok: Tok::Plus, pos: p });
                advance(1, &mut i, &mut col);
            }
            '!' => {
                out.push(Token { tok: Tok::Bang, pos: p });
                advance(1, &mut i, &mut col);
            }
            '=' => {
                if bytes.get(i + 1) == Some(&'=') && bytes.get(i + 2) == Some(&'>') {
                    out.push(Token { tok: Tok::Implies, pos: p });
                    advance(3, &mut i, &mut col);
                } else {
                    out.push(Token { tok: Tok::Eq, pos: p });
                    advance(1, &mut i, &mut col);
                }
            }
            '<' => match bytes.get(i + 1) {
                Some('>') => {
                    out.push(Token { tok: Tok::Neq, pos: p });
                    advance(2, &mut i, &mut col);
                }
                Some('=') => {
                    out.push(Token { tok: Tok::Leq, pos: p });
                    advance(2, &mut i, &mut col);
                }
                _ => {
                    out.push(Token { tok: Tok::Lt, pos: p });
                    advance(1, &mut i, &mut col);
                }
            },
            '-' if bytes.get(i + 1) == Some(&'>') => {
                out.push(Token { tok: Tok::Arrow, pos: p });
                advance(2, &mut i, &mut col);
            }
            '&' if bytes.get(i + 1) == Some(&'&') => {
                out.push(Token { tok: Tok::AndAnd, pos: p });
                advance(2, &mut i, &mut col);
            }
            '|' => {
                if bytes.get(i + 1) == Some(&'|') {
                    out.push(Token { tok: Tok::OrOr, pos: p });
                    advance(2, &mut i, &mut col);
                } else {
                    out.push(Token { tok: Tok::Bar, pos: p });
                    advance(1, &mut i, &mut col);
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let n = text.parse().map_err(|_| LexError {
                    pos: p,
                    msg: format!("integer literal out of range: {text}"),
                })?;
                out.push(Token { tok: Tok::Int(n), pos: p });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_alphanumeric() || bytes[i] == '_' || bytes[i] == '\'')
                {
                    i += 1;
                    col += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(text), pos: p });
            }
            other => {
                return Err(LexError {
                    pos: p,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(out)
}
