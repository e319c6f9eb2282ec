//! Text grammar for polynomials and quadratic tuples.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary ("*" unary)*
//! unary := "-" unary | power
//! power := atom ("^" integer)?
//! atom  := integer ("/" integer)? | "x" index | "(" expr ")"
//! ```
//!
//! A tuple file starts with `d=<int>` and lists forms separated by `;`.
//! `#` starts a comment running to the end of the line.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{Poly, QuadTuple, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("variable x{index} at line {line}, column {col} exceeds d={d}")]
    VariableOutOfRange {
        index: usize,
        d: usize,
        line: usize,
        col: usize,
    },
    #[error("form {form} at line {line}, column {col} is not quadratic: {text}")]
    NonQuadratic {
        form: usize,
        line: usize,
        col: usize,
        text: String,
    },
    #[error("missing header `d=<int>`")]
    MissingHeader,
    #[error("tuple has no forms")]
    NoForms,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    D,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    Eq,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let single = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Num(s.parse().expect("digits parse")),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == 'x' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j == start {
                return Err(err(l0, c0, "expected variable index after `x`".into()));
            }
            let s: String = chars[start..j].iter().collect();
            let idx: usize = s
                .parse()
                .map_err(|_| err(l0, c0, format!("bad variable index `{s}`")))?;
            if idx == 0 {
                return Err(err(l0, c0, "variables are numbered from x1".into()));
            }
            col += j - i;
            i = j;
            out.push(Token {
                tok: Tok::Var(idx),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == 'd' {
            out.push(Token {
                tok: Tok::D,
                line: l0,
                col: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(err(l0, c0, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::End,
        line,
        col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    nvars: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let Tok::Num(e) = self.peek().tok.clone() else {
                return self.fail("expected a non-negative integer exponent");
            };
            let Some(e) = e.to_u32().filter(|&e| e <= 64) else {
                return self.fail("exponent too large");
            };
            self.bump();
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(n) => {
                self.bump();
                let mut q = Rational::from_integer(n);
                if self.peek().tok == Tok::Slash {
                    self.bump();
                    let Tok::Num(den) = self.peek().tok.clone() else {
                        return self.fail("expected an integer denominator");
                    };
                    if den.is_zero() {
                        return self.fail("zero denominator");
                    }
                    self.bump();
                    q /= Rational::from_integer(den);
                }
                self.no_implicit_product()?;
                Ok(Poly::constant(self.nvars, q))
            }
            Tok::Var(idx) => {
                if idx > self.nvars {
                    return Err(ParseError::VariableOutOfRange {
                        index: idx,
                        d: self.nvars,
                        line: t.line,
                        col: t.col,
                    });
                }
                self.bump();
                self.no_implicit_product()?;
                Ok(Poly::var(self.nvars, idx - 1))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return self.fail("expected `)`");
                }
                self.bump();
                self.no_implicit_product()?;
                Ok(inner)
            }
            Tok::End | Tok::Semi => self.fail("unexpected end of expression"),
            _ => self.fail("expected a number, variable or `(`"),
        }
    }

    fn no_implicit_product(&self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Num(_) | Tok::Var(_) | Tok::LParen => self.fail("implicit multiplication is not allowed; use `*`"),
            _ => Ok(()),
        }
    }
}

/// Parse a polynomial in `x1..x<nvars>`.
pub fn parse_poly(text: &str, nvars: usize) -> Result<Poly, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        nvars,
    };
    let poly = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(poly)
}

/// Parse a tuple file: `d=<int>; form; form; …`.
pub fn parse_tuple(text: &str) -> Result<QuadTuple, ParseError> {
    let toks = lex(text)?;
    if toks.len() < 3 || toks[0].tok != Tok::D || toks[1].tok != Tok::Eq {
        return Err(ParseError::MissingHeader);
    }
    let Tok::Num(d) = &toks[2].tok else {
        return Err(ParseError::Syntax {
            line: toks[2].line,
            col: toks[2].col,
            msg: "expected an integer after `d=`".into(),
        });
    };
    let d = d.to_usize().filter(|&d| d >= 1).ok_or(ParseError::Syntax {
        line: toks[2].line,
        col: toks[2].col,
        msg: "d must be a positive integer".into(),
    })?;
    let mut p = Parser {
        toks: &toks,
        pos: 3,
        nvars: d,
    };
    let mut forms = Vec::new();
    loop {
        match p.peek().tok {
            Tok::End => break,
            Tok::Semi => {
                p.bump();
                continue;
            }
            _ => {}
        }
        let start = p.peek().clone();
        let poly = p.expr()?;
        if !poly.is_homogeneous(2) {
            return Err(ParseError::NonQuadratic {
                form: forms.len() + 1,
                line: start.line,
                col: start.col,
                text: poly.to_string(),
            });
        }
        forms.push(poly);
        match p.peek().tok {
            Tok::Semi | Tok::End => {}
            _ => return p.fail("expected `;` between forms"),
        }
    }
    if forms.is_empty() {
        return Err(ParseError::NoForms);
    }
    Ok(QuadTuple::from_polys(d, &forms).expect("validated quadratic forms"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_literals_and_powers() {
        let p = parse_poly("1/2*x1^2 - (x1 + x2)^2 + 3", 2).unwrap();
        assert_eq!(p.to_string(), "-1/2*x1^2 - 2*x1*x2 - x2^2 + 3");
    }

    #[test]
    fn rejects_implicit_multiplication() {
        assert!(matches!(parse_poly("2x1", 2), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("x1 x2", 2), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn reports_position() {
        let e = parse_poly("x1 +\n  * x2", 2).unwrap_err();
        assert_eq!(
            e,
            ParseError::Syntax {
                line: 2,
                col: 3,
                msg: "expected a number, variable or `(`".into()
            }
        );
        let e = parse_poly("x1 + x3", 2).unwrap_err();
        assert!(matches!(e, ParseError::VariableOutOfRange { index: 3, col: 6, .. }));
    }

    #[test]
    fn tuples() {
        let t = parse_tuple("d=2; x1^2 + x2^2").unwrap();
        assert_eq!((t.d(), t.n()), (2, 1));
        let m = parse_tuple("d=2; x1^2; x1*x2; x2^2").unwrap();
        assert_eq!(m.n(), 3);
        assert!(matches!(
            parse_tuple("d=2; x1^3"),
            Err(ParseError::NonQuadratic { form: 1, .. })
        ));
        assert!(matches!(parse_tuple("x1^2"), Err(ParseError::MissingHeader)));
        let c = parse_tuple("# comment\nd=3;\n x1*x2 ;\n 0\n").unwrap();
        assert_eq!(c.n(), 2);
    }

    #[test]
    fn round_trip_canonical_text() {
        for s in ["x1^2 - 2/3*x1*x2 + 5*x3^2", "-x2", "0", "7/2", "x1*x2*x3 - x1 + 1"] {
            let p = parse_poly(s, 3).unwrap();
            let q = parse_poly(&p.to_string(), 3).unwrap();
            assert_eq!(p, q);
            assert_eq!(q.to_string(), p.to_string());
        }
    }
}
