use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Ident(String),
    /// One of `+ - * / ^`.
    Op(char),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                TokenKind::Op(c as char)
            }
            b'(' => {
                i += 1;
                TokenKind::LParen
            }
            b')' => {
                i += 1;
                TokenKind::RParen
            }
            b',' => {
                i += 1;
                TokenKind::Comma
            }
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let text = &source[start..i];
                match text.parse::<f64>() {
                    Ok(x) if x.is_finite() => TokenKind::Number(x),
                    _ => return Err(Error::Lex { offset: start, found: c as char }),
                }
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                TokenKind::Ident(source[start..i].to_string())
            }
            _ => {
                let found = source[start..].chars().next().unwrap_or('\0');
                return Err(Error::Lex { offset: start, found });
            }
        };
        out.push(Token { kind, lexeme: source[start..i].to_string(), offset: start });
    }
    Ok(out)
}

/// Longest prefix of the form `digits [. digits] [(e|E) [+|-] digits]`
/// (either digit run may be empty, but not both).
fn scan_number(b: &[u8], mut i: usize) -> usize {
    let digits = |b: &[u8], mut i: usize| {
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let start = i;
    i = digits(b, i);
    let mut mantissa = i > start;
    if i < b.len() && b[i] == b'.' {
        let j = digits(b, i + 1);
        mantissa |= j > i + 1;
        i = j;
    }
    if !mantissa {
        // lone '.', reported by the caller as unparseable
        return i;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let k = digits(b, j);
        if k > j {
            i = k;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexemes(s: &str) -> Vec<String> {
        tokenize(s).unwrap().into_iter().map(|t| t.lexeme).collect()
    }

    #[test]
    fn polynomial() {
        assert_eq!(lexemes("2*v^3 + u^2*v"), ["2", "*", "v", "^", "3", "+", "u", "^", "2", "*", "v"]);
    }

    #[test]
    fn call() {
        let t = tokenize("sin(k*u)").unwrap();
        assert_eq!(t[0].kind, TokenKind::Ident("sin".into()));
        assert_eq!(t[1].kind, TokenKind::LParen);
        assert_eq!(t[2].kind, TokenKind::Ident("k".into()));
        assert_eq!(t[5].kind, TokenKind::RParen);
    }

    #[test]
    fn illegal_character() {
        assert_eq!(tokenize("1e-3$"), Err(Error::Lex { offset: 4, found: '$' }));
        assert!(matches!(tokenize("u # v"), Err(Error::Lex { offset: 2, .. })));
        assert!(matches!(tokenize("1e999"), Err(Error::Lex { offset: 0, .. })));
        assert!(matches!(tokenize("."), Err(Error::Lex { offset: 0, .. })));
    }

    #[test]
    fn numbers() {
        let k: Vec<_> = tokenize("1.5e3 .25 7. 2E+2 3e").unwrap().into_iter().map(|t| t.kind).collect();
        assert_eq!(
            k,
            [
                TokenKind::Number(1500.0),
                TokenKind::Number(0.25),
                TokenKind::Number(7.0),
                TokenKind::Number(200.0),
                TokenKind::Number(3.0),
                TokenKind::Ident("e".into()),
            ]
        );
    }

    #[test]
    fn offsets_reconstruct_source() {
        let src = " 3*v^4 +\tu^2*v^2 - sin( k*u ) ";
        let toks = tokenize(src).unwrap();
        let mut rebuilt = String::new();
        let mut last = 0;
        for t in &toks {
            assert!(t.offset >= last);
            rebuilt.push_str(&src[last..t.offset]);
            assert!(src[last..t.offset].chars().all(char::is_whitespace));
            rebuilt.push_str(&t.lexeme);
            last = t.offset + t.lexeme.len();
        }
        rebuilt.push_str(&src[last..]);
        assert_eq!(rebuilt, src);
    }
}
