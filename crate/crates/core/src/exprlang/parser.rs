use super::ast::{BinOp, Coord, Expr, Func};
use super::lexer::{Token, TokenKind};
use crate::error::{Error, Result};

const PREFIX_MINUS_BP: u8 = 5;

fn infix_bp(op: char) -> Option<(BinOp, u8, u8)> {
    Some(match op {
        '+' => (BinOp::Add, 1, 2),
        '-' => (BinOp::Sub, 1, 2),
        '*' => (BinOp::Mul, 3, 4),
        '/' => (BinOp::Div, 3, 4),
        '^' => (BinOp::Pow, 8, 7),
        _ => return None,
    })
}

pub fn parse(tokens: &[Token]) -> Result<Expr> {
    let end = tokens.last().map_or(0, |t| t.offset + t.lexeme.len());
    let mut p = Parser { tokens, pos: 0, end };
    let e = p.expr(0)?;
    match p.peek() {
        None => Ok(e),
        Some(t) => Err(p.error(t.offset, format!("unexpected `{}` after expression", t.lexeme))),
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn error(&self, offset: usize, message: String) -> Error {
        Error::Parse { offset, message }
    }

    fn expect_rparen(&mut self, open: usize) -> Result<()> {
        match self.next() {
            Some(Token { kind: TokenKind::RParen, .. }) => Ok(()),
            Some(Token { kind: TokenKind::Comma, offset, .. }) => {
                Err(self.error(*offset, "functions take exactly one argument".into()))
            }
            Some(t) => Err(self.error(t.offset, format!("expected `)` to close `(` at {open}, found `{}`", t.lexeme))),
            None => Err(self.error(self.end, format!("expected `)` to close `(` at {open}"))),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr> {
        let mut lhs = self.prefix()?;
        while let Some(t) = self.peek() {
            let (op, l, r) = match &t.kind {
                TokenKind::Op(c) => infix_bp(*c).expect("lexer only emits known operators"),
                _ => break,
            };
            if l < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(r)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr> {
        let Some(t) = self.next() else {
            return Err(self.error(self.end, "expected an expression".into()));
        };
        match &t.kind {
            TokenKind::Number(x) => Ok(Expr::Num(*x)),
            TokenKind::Op('-') => Ok(Expr::Neg(Box::new(self.expr(PREFIX_MINUS_BP)?))),
            TokenKind::LParen => {
                let e = self.expr(0)?;
                self.expect_rparen(t.offset)?;
                Ok(e)
            }
            TokenKind::Ident(name) => {
                if let Some(Token { kind: TokenKind::LParen, offset, .. }) = self.peek() {
                    let Some(f) = Func::from_name(name) else {
                        return Err(self.error(t.offset, format!("unknown function `{name}`")));
                    };
                    let open = *offset;
                    self.pos += 1;
                    let arg = self.expr(0)?;
                    self.expect_rparen(open)?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if Func::from_name(name).is_some() {
                    return Err(self.error(t.offset, format!("function `{name}` needs an argument in parentheses")));
                }
                Ok(match name.as_str() {
                    "u" => Expr::Var(Coord::U),
                    "v" => Expr::Var(Coord::V),
                    _ => Expr::Param(name.clone()),
                })
            }
            _ => Err(self.error(t.offset, format!("expected an expression, found `{}`", t.lexeme))),
        }
    }
}
