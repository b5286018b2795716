use super::{ParseError, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Amp,
    Plus,
    Otimes,
    DotDot,
    Slash,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Amp => "&",
            Tok::Plus => "+",
            Tok::Otimes => "⊗",
            Tok::DotDot => "..",
            Tok::Slash => "/",
            Tok::Star => "*",
            Tok::Ident(_) | Tok::Int(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits `text` into tokens. Unknown characters are reported and skipped.
pub fn lex(text: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let start = Span { line, column: col, length: 1 };
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
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let s: String = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').collect();
                let n = s.chars().count();
                tokens.push(Token { tok: Tok::Ident(s), span: Span { length: n as u32, ..start } });
                advance(n, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let neg = c == '-';
                let digits: String = chars[i + neg as usize..].iter().take_while(|c| c.is_ascii_digit()).collect();
                let n = digits.len() + neg as usize;
                match digits.parse::<i64>() {
                    Ok(v) => tokens.push(Token { tok: Tok::Int(if neg { -v } else { v }), span: Span { length: n as u32, ..start } }),
                    Err(_) => errors.push(ParseError::at(Span { length: n as u32, ..start }, "integer literal out of range")),
                }
                advance(n, &mut i, &mut col);
            }
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                let mut closed = false;
                while j < chars.len() && chars[j] != '\n' {
                    match chars[j] {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' if j + 1 < chars.len() => {
                            s.push(chars[j + 1]);
                            j += 2;
                        }
                        ch => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                let n = j + 1 - i;
                if closed {
                    tokens.push(Token { tok: Tok::Str(s), span: Span { length: n as u32, ..start } });
                } else {
                    errors.push(ParseError::at(Span { length: (j - i) as u32, ..start }, "unterminated string"));
                }
                advance(n.min(chars.len() - i), &mut i, &mut col);
            }
            _ => {
                let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let (tok, n) = match two.as_str() {
                    "<=" => (Some(Tok::Le), 2),
                    ">=" => (Some(Tok::Ge), 2),
                    ".." => (Some(Tok::DotDot), 2),
                    _ => (
                        match c {
                            '(' => Some(Tok::LParen),
                            ')' => Some(Tok::RParen),
                            '{' => Some(Tok::LBrace),
                            '}' => Some(Tok::RBrace),
                            '[' => Some(Tok::LBracket),
                            ']' => Some(Tok::RBracket),
                            ',' => Some(Tok::Comma),
                            ';' => Some(Tok::Semi),
                            ':' => Some(Tok::Colon),
                            '=' => Some(Tok::Eq),
                            '<' => Some(Tok::Lt),
                            '>' => Some(Tok::Gt),
                            '≤' => Some(Tok::Le),
                            '≥' => Some(Tok::Ge),
                            '&' | '∧' => Some(Tok::Amp),
                            '+' => Some(Tok::Plus),
                            '⊗' => Some(Tok::Otimes),
                            '/' => Some(Tok::Slash),
                            '*' => Some(Tok::Star),
                            _ => None,
                        },
                        1,
                    ),
                };
                match tok {
                    Some(tok) => tokens.push(Token { tok, span: Span { length: n as u32, ..start } }),
                    None => errors.push(ParseError::at(start, format!("unexpected character `{c}`"))),
                }
                advance(n, &mut i, &mut col);
            }
        }
    }
    tokens.push(Token { tok: Tok::Eof, span: Span { line, column: col, length: 0 } });
    (tokens, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_operators_and_comments() {
        let (toks, errs) = lex("a <= b ≥ -3 // trailing\n x..y ⊗ \"s\\\"q\"");
        assert!(errs.is_empty());
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("a".into()),
                Tok::Le,
                Tok::Ident("b".into()),
                Tok::Ge,
                Tok::Int(-3),
                Tok::Ident("x".into()),
                Tok::DotDot,
                Tok::Ident("y".into()),
                Tok::Otimes,
                Tok::Str("s\"q".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn reports_unknown_characters_with_position() {
        let (_, errs) = lex("a\n  $ b");
        assert_eq!(errs.len(), 1);
        assert_eq!((errs[0].span.line, errs[0].span.column), (2, 3));
    }
}
