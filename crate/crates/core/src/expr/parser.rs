use super::{Expr, Func, Node};
use crate::error::{Error, Result};

const NON_SMOOTH: &[&str] = &[
    "abs", "min", "max", "sign", "sgn", "floor", "ceil", "round", "heaviside",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            src,
            toks: Vec::new(),
        };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => i += 1,
                b'+' | b'-' | b'*' | b'/' | b'^' => {
                    lx.toks.push((Tok::Op(c as char), i));
                    i += 1;
                }
                b'(' => {
                    lx.toks.push((Tok::LParen, i));
                    i += 1;
                }
                b')' => {
                    lx.toks.push((Tok::RParen, i));
                    i += 1;
                }
                b',' => {
                    lx.toks.push((Tok::Comma, i));
                    i += 1;
                }
                b'0'..=b'9' | b'.' => i = lx.number(i)?,
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    lx.toks.push((Tok::Ident(src[start..i].to_string()), start));
                }
                _ => {
                    let ch = src[i..].chars().next().unwrap();
                    return Err(Error::Syntax {
                        offset: i,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            }
        }
        lx.toks.push((Tok::End, src.len()));
        Ok(lx.toks)
    }

    fn number(&mut self, start: usize) -> Result<usize> {
        let b = self.src.as_bytes();
        let mut i = start;
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
            i += 1;
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        self.toks.push((Tok::Num(v), start));
        Ok(i)
    }
}

struct Parser<'v> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'v [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> Error {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
        };
        Error::Syntax {
            offset: self.offset(),
            message: format!("expected {what}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.signed()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.signed()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.signed()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn signed(&mut self) -> Result<Node> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Node::Neg(Box::new(self.signed()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.signed()
            }
            _ => self.factor(),
        }
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.base()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let e = self.exponent()?;
        let value = e.constant_value().ok_or(Error::Syntax {
            offset: at,
            message: "exponent must be a constant".into(),
        })?;
        if value.fract() == 0.0 && value.abs() <= i32::MAX as f64 {
            Ok(Node::PowI(Box::new(base), value as i32))
        } else {
            Ok(Node::PowF(Box::new(base), value))
        }
    }

    fn exponent(&mut self) -> Result<Node> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Node::Neg(Box::new(self.exponent()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.exponent()
            }
            _ => self.base(),
        }
    }

    fn base(&mut self) -> Result<Node> {
        let save = self.pos;
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    if NON_SMOOTH.contains(&name.as_str()) {
                        return Err(Error::NonSmooth { name, offset: at });
                    }
                    let func = Func::from_name(&name).ok_or_else(|| Error::Syntax {
                        offset: at,
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.close_paren()?;
                    return Ok(Node::Func(func, Box::new(arg)));
                }
                if NON_SMOOTH.contains(&name.as_str()) {
                    return Err(Error::NonSmooth { name, offset: at });
                }
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                if name == "pi" {
                    return Ok(Node::Const(std::f64::consts::PI));
                }
                Err(Error::UndeclaredVariable { name, offset: at })
            }
            _ => {
                self.pos = save;
                Err(self.unexpected("a number, variable, function or `(`"))
            }
        }
    }

    fn close_paren(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

/// Parse `source` over the declared variables `vars`.
pub fn parse<S: AsRef<str>>(source: &str, vars: &[S]) -> Result<Expr> {
    let vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
    let toks = Lexer::run(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars: &vars,
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(Expr { vars, root })
}
