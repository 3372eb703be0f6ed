//! Scalar expressions: parsing, printing and Taylor-mode evaluation.
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := signed (('*'|'/') signed)*
//! signed   := ('-'|'+') signed | factor
//! factor   := base ('^' exponent)?
//! exponent := ('-'|'+')* base            (must be constant)
//! base     := number | ident | '(' expr ')' | func '(' expr ')'
//! func     := sqrt | exp | log | sin | cos | tan | atan
//! ```
//!
//! An integral exponent is an integer power (any base sign); any other
//! exponent is a real power and needs a positive base. `pi` is a constant
//! unless declared as a variable.

mod parser;

use std::fmt;
use std::sync::Arc;

pub use parser::parse;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace, MAX_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Atan,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
        }
    }

    pub const ALL: [Func; 7] = [
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Atan,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    /// Index into the declared variable list.
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    PowI(Box<Node>, i32),
    PowF(Box<Node>, f64),
    Func(Func, Box<Node>),
}

impl Node {
    /// Value of a variable-free subtree.
    pub fn constant_value(&self) -> Option<f64> {
        Some(match self {
            Node::Const(v) => *v,
            Node::Var(_) => return None,
            Node::Neg(a) => -a.constant_value()?,
            Node::Add(a, b) => a.constant_value()? + b.constant_value()?,
            Node::Sub(a, b) => a.constant_value()? - b.constant_value()?,
            Node::Mul(a, b) => a.constant_value()? * b.constant_value()?,
            Node::Div(a, b) => a.constant_value()? / b.constant_value()?,
            Node::PowI(a, n) => a.constant_value()?.powi(*n),
            Node::PowF(a, p) => a.constant_value()?.powf(*p),
            Node::Func(f, a) => apply_f64(*f, a.constant_value()?).ok()?,
        })
    }

    fn collect_vars(&self, used: &mut [bool]) {
        match self {
            Node::Const(_) => {}
            Node::Var(k) => used[*k] = true,
            Node::Neg(a) | Node::PowI(a, _) | Node::PowF(a, _) | Node::Func(_, a) => {
                a.collect_vars(used)
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(used);
                b.collect_vars(used);
            }
        }
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Node::Const(v) => *v,
            Node::Var(k) => x[*k],
            Node::Neg(a) => -a.eval(x)?,
            Node::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Node::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Node::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Node::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval(x)? / d
            }
            Node::PowI(a, n) => {
                let v = a.eval(x)?;
                if v == 0.0 && *n < 0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                v.powi(*n)
            }
            Node::PowF(a, p) => {
                let v = a.eval(x)?;
                if !(v > 0.0) {
                    return Err(Error::Domain(format!(
                        "real power {p} of non-positive value {v}"
                    )));
                }
                v.powf(*p)
            }
            Node::Func(f, a) => apply_f64(*f, a.eval(x)?)?,
        })
    }

    fn eval_jets(&self, x: &[Jet], space: &Arc<JetSpace>) -> Result<Jet> {
        Ok(match self {
            Node::Const(v) => Jet::constant(space, *v),
            Node::Var(k) => x[*k].clone(),
            Node::Neg(a) => -a.eval_jets(x, space)?,
            Node::Add(a, b) => {
                if let Some(c) = a.constant_value() {
                    b.eval_jets(x, space)?.add_scalar(c)
                } else if let Some(c) = b.constant_value() {
                    a.eval_jets(x, space)?.add_scalar(c)
                } else {
                    a.eval_jets(x, space)? + b.eval_jets(x, space)?
                }
            }
            Node::Sub(a, b) => {
                if let Some(c) = b.constant_value() {
                    a.eval_jets(x, space)?.add_scalar(-c)
                } else {
                    a.eval_jets(x, space)? - b.eval_jets(x, space)?
                }
            }
            Node::Mul(a, b) => {
                if let Some(c) = a.constant_value() {
                    b.eval_jets(x, space)?.scale(c)
                } else if let Some(c) = b.constant_value() {
                    a.eval_jets(x, space)?.scale(c)
                } else {
                    a.eval_jets(x, space)? * b.eval_jets(x, space)?
                }
            }
            Node::Div(a, b) => {
                if let Some(c) = b.constant_value() {
                    if c == 0.0 {
                        return Err(Error::Domain("division by zero".into()));
                    }
                    a.eval_jets(x, space)?.scale(1.0 / c)
                } else {
                    a.eval_jets(x, space)?.div(&b.eval_jets(x, space)?)?
                }
            }
            Node::PowI(a, n) => a.eval_jets(x, space)?.powi(*n)?,
            Node::PowF(a, p) => a.eval_jets(x, space)?.powf(*p)?,
            Node::Func(f, a) => {
                let u = a.eval_jets(x, space)?;
                match f {
                    Func::Sqrt => u.sqrt()?,
                    Func::Exp => u.exp(),
                    Func::Log => u.ln()?,
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.tan()?,
                    Func::Atan => u.atan(),
                }
            }
        })
    }
}

fn apply_f64(f: Func, v: f64) -> Result<f64> {
    Ok(match f {
        Func::Sqrt => {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("sqrt of non-positive value {v}")));
            }
            v.sqrt()
        }
        Func::Exp => v.exp(),
        Func::Log => {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("log of non-positive value {v}")));
            }
            v.ln()
        }
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Tan => {
            if v.cos() == 0.0 {
                return Err(Error::Domain(format!("tan at a pole ({v})")));
            }
            v.tan()
        }
        Func::Atan => v.atan(),
    })
}

/// A parsed expression with its declared variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    vars: Vec<String>,
    root: Node,
}

impl Expr {
    pub fn new(vars: Vec<String>, root: Node) -> Expr {
        Expr { vars, root }
    }

    pub fn constant(vars: &[String], value: f64) -> Expr {
        Expr {
            vars: vars.to_vec(),
            root: Node::Const(value),
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Indices of the declared variables that actually occur.
    pub fn free_vars(&self) -> Vec<usize> {
        let mut used = vec![false; self.vars.len()];
        self.root.collect_vars(&mut used);
        (0..used.len()).filter(|&k| used[k]).collect()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.free_vars().contains(&var)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        assert_eq!(point.len(), self.vars.len(), "point dimension");
        self.root.eval(point)
    }

    /// Evaluate with every declared variable replaced by a jet.
    ///
    /// This is composition: if variable `k` is given as a jet `w_k(z)`, the
    /// result is the jet of `f(w(z))` in `z`.
    pub fn eval_jets(&self, inputs: &[Jet]) -> Result<Jet> {
        assert_eq!(inputs.len(), self.vars.len(), "input count");
        assert!(!inputs.is_empty() || self.root.constant_value().is_some());
        let space = inputs[0].space().clone();
        let order = inputs.iter().map(Jet::order).min().unwrap();
        if let Some(out) = self.eval_compact(inputs, &space, order)? {
            return Ok(out);
        }
        Ok(self.root.eval_jets(inputs, &space)?.truncate(order))
    }

    /// Fast path when every used input is a constant or a plain coordinate:
    /// evaluate over only the coordinates that occur, then lift.
    fn eval_compact(
        &self,
        inputs: &[Jet],
        space: &Arc<JetSpace>,
        order: usize,
    ) -> Result<Option<Jet>> {
        let used = self.free_vars();
        let mut slots: Vec<Option<usize>> = vec![None; inputs.len()];
        let mut targets: Vec<usize> = Vec::new();
        for &k in &used {
            match inputs[k].as_coordinate() {
                None => return Ok(None),
                Some(None) => {}
                Some(Some(v)) => {
                    let pos = match targets.iter().position(|&t| t == v) {
                        Some(p) => p,
                        None => {
                            targets.push(v);
                            targets.len() - 1
                        }
                    };
                    slots[k] = Some(pos);
                }
            }
        }
        if targets.len() >= space.nvars() {
            return Ok(None);
        }
        if targets.is_empty() {
            let point: Vec<f64> = inputs.iter().map(Jet::value).collect();
            let v = self.root.eval(&point)?;
            return Ok(Some(Jet::constant(space, v).truncate(order)));
        }
        let small = JetSpace::get(targets.len(), order);
        let args: Vec<Jet> = inputs
            .iter()
            .zip(&slots)
            .map(|(j, s)| match s {
                Some(p) => Jet::variable(&small, *p, j.value()),
                None => Jet::constant(&small, j.value()),
            })
            .collect();
        let map: Vec<Option<usize>> = targets.iter().map(|&t| Some(t)).collect();
        let out = self.root.eval_jets(&args, &small)?;
        Ok(Some(out.reindex(space, &map).truncate(order)))
    }
}

/// All partial derivatives of `ast` up to total order `order` at `point`
/// (one jet variable per declared variable, in declaration order).
pub fn eval_jet(ast: &Expr, point: &[f64], order: usize) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh {
            requested: order,
            max: MAX_ORDER,
        });
    }
    assert_eq!(point.len(), ast.vars.len(), "point dimension");
    let space = JetSpace::get(ast.vars.len().max(1), order);
    if ast.vars.is_empty() {
        return Ok(Jet::constant(&space, ast.root.eval(&[])?));
    }
    let inputs: Vec<Jet> = point
        .iter()
        .enumerate()
        .map(|(k, &v)| Jet::variable(&space, k, v))
        .collect();
    ast.eval_jets(&inputs)
}

fn prec(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Const(v) if v.is_sign_negative() => 3,
        Node::PowI(..) | Node::PowF(..) => 4,
        _ => 5,
    }
}

struct Printer<'a> {
    vars: &'a [String],
    node: &'a Node,
}

impl Printer<'_> {
    fn child<'b>(&'b self, node: &'b Node) -> Printer<'b> {
        Printer {
            vars: self.vars,
            node,
        }
    }

    fn wrap(&self, f: &mut fmt::Formatter<'_>, node: &Node, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({})", self.child(node))
        } else {
            write!(f, "{}", self.child(node))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = prec(self.node);
        match self.node {
            Node::Const(v) => write!(f, "{v:?}"),
            Node::Var(k) => write!(f, "{}", self.vars[*k]),
            Node::Neg(a) => {
                write!(f, "-")?;
                self.wrap(f, a, prec(a) < p)
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let op = match self.node {
                    Node::Add(..) => " + ",
                    Node::Sub(..) => " - ",
                    Node::Mul(..) => "*",
                    _ => "/",
                };
                self.wrap(f, a, prec(a) < p)?;
                write!(f, "{op}")?;
                self.wrap(f, b, prec(b) <= p)
            }
            Node::PowI(a, n) => {
                self.wrap(f, a, prec(a) < 5)?;
                write!(f, "^{n}")
            }
            Node::PowF(a, e) => {
                self.wrap(f, a, prec(a) < 5)?;
                write!(f, "^{e:?}")
            }
            Node::Func(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            vars: &self.vars,
            node: &self.root,
        }
        .fmt(f)
    }
}

/// Declared variable names `prefix1..prefixn`.
pub fn indexed_vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_norm() {
        let e = parse("sqrt(y1^2+y2^2)", &vars(&["y1", "y2"])).unwrap();
        assert_eq!(e.free_vars(), vec![0, 1]);
        assert!((e.eval(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn trailing_operator_reports_offset() {
        let err = parse("y1 +", &vars(&["y1"])).unwrap_err();
        assert!(matches!(err, Error::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn rational_expression() {
        let e = parse("x1*y2^4/(y1^2+y2^2)", &vars(&["x1", "y1", "y2"])).unwrap();
        assert_eq!(e.free_vars().len(), 3);
    }

    #[test]
    fn rejects_undeclared_and_non_smooth() {
        assert!(matches!(
            parse("x1 + z", &vars(&["x1"])),
            Err(Error::UndeclaredVariable { ref name, offset: 5 }) if name == "z"
        ));
        assert!(matches!(
            parse("abs(x1)", &vars(&["x1"])),
            Err(Error::NonSmooth { offset: 0, .. })
        ));
        assert!(matches!(
            parse("max(x1, 0)", &vars(&["x1"])),
            Err(Error::NonSmooth { .. })
        ));
        assert!(matches!(
            parse("x1^x1", &vars(&["x1"])),
            Err(Error::Syntax { offset: 3, .. })
        ));
    }

    #[test]
    fn integer_vs_real_powers() {
        let v = vars(&["x1"]);
        let e = parse("x1^3", &v).unwrap();
        assert!(matches!(e.root(), Node::PowI(_, 3)));
        assert!((e.eval(&[-2.0]).unwrap() + 8.0).abs() < 1e-15);
        let r = parse("x1^1.5", &v).unwrap();
        assert!(matches!(r.eval(&[-2.0]), Err(Error::Domain(_))));
        let n = parse("x1^-2", &v).unwrap();
        assert!((n.eval(&[2.0]).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn printer_round_trips() {
        let v = vars(&["x1", "x2"]);
        for src in [
            "x1 - (x2 - 1)",
            "x1/(x2*x1)",
            "-(x1 + x2)^2",
            "(-x1)^3",
            "x1^-0.5 + sin(x2)/cos(x1 - x2)",
            "-x1*-x2",
            "2 - -3",
            "exp(-x1^2)*atan(x2)",
            "(x1^2)^3",
        ] {
            let e = parse(src, &v).unwrap();
            let printed = e.to_string();
            let again = parse(&printed, &v).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn jet_examples() {
        let e = parse("y1^2", &vars(&["y1"])).unwrap();
        assert_eq!(eval_jet(&e, &[3.0], 2).unwrap().coefficients(), &[9.0, 6.0, 2.0]);
        let s = parse("sin(x1)", &vars(&["x1"])).unwrap();
        let j = eval_jet(&s, &[0.0], 3).unwrap();
        let want = [0.0, 1.0, 0.0, -1.0];
        for (a, b) in j.coefficients().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(
            eval_jet(&s, &[0.0], 9),
            Err(Error::OrderTooHigh { requested: 9, max: 8 })
        ));
    }

    #[test]
    fn jet_domain_errors() {
        let e = parse("log(x1)", &vars(&["x1"])).unwrap();
        assert!(matches!(eval_jet(&e, &[0.0], 2), Err(Error::Domain(_))));
        let d = parse("1/(x1 - 1)", &vars(&["x1"])).unwrap();
        assert!(matches!(eval_jet(&d, &[1.0], 2), Err(Error::Domain(_))));
    }
}
