//! A small closed-form expression language for metric components.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' ('-')* power)?
//! atom  := number | x<i> | y<i> | pi | param | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus (`-x1^2 == -(x1^2)`) and is right
//! associative. Variables are 1-based in the text and 0-based in the AST.
//! The grammar has no conditionals, so every expression lifts unchanged to
//! [`Jet`] arithmetic. `abs` is not differentiable at zero; jet evaluation
//! there reports a domain error.

use std::collections::HashMap;
use std::fmt;

use crate::error::{DomainError, Error, Result};
use crate::jet::{Jet, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    X(usize),
    Y(usize),
    Param(String),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression over `x1..xn`, `y1..yn` and named parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Node,
    dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("malformed number `{lit}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let t = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(Error::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            };
            i += c.len_utf8();
            out.push((t, start));
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    params: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                pos: self.at(),
                msg: "expected `)`".into(),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.exponent()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn variable(&self, name: &str, pos: usize) -> Result<Option<Node>> {
        let (kind, rest) = name.split_at(1);
        if (kind != "x" && kind != "y") || rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit())
        {
            return Ok(None);
        }
        let i: usize = rest.parse().map_err(|_| Error::Syntax {
            pos,
            msg: format!("malformed variable `{name}`"),
        })?;
        if i == 0 || i > self.dim {
            return Err(Error::VariableOutOfRange {
                name: name.to_string(),
                dim: self.dim,
            });
        }
        Ok(Some(if kind == "x" {
            Node::X(i - 1)
        } else {
            Node::Y(i - 1)
        }))
    }

    fn atom(&mut self) -> Result<Node> {
        let pos = self.at();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let f = Func::from_name(&name).ok_or(Error::UnknownIdentifier {
                        name: name.clone(),
                        pos,
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                if let Some(v) = self.variable(&name, pos)? {
                    return Ok(v);
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                if self.params.contains(&name.as_str()) {
                    return Ok(Node::Param(name));
                }
                Err(Error::UnknownIdentifier { name, pos })
            }
            Tok::End => Err(Error::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            t => Err(Error::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }
}

/// Parses `text` over `dim` coordinates with no named parameters.
pub fn parse_expr(text: &str, dim: usize) -> Result<Expression> {
    parse_expr_with(text, dim, &[])
}

/// Parses `text`, accepting the identifiers in `params` as named parameters.
pub fn parse_expr_with(text: &str, dim: usize, params: &[&str]) -> Result<Expression> {
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        dim,
        params,
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax {
            pos: p.at(),
            msg: "trailing input".into(),
        });
    }
    Ok(Expression { root, dim })
}

fn domain(e: DomainError, node: &Node) -> Error {
    Error::Domain {
        op: e.op,
        arg: e.arg,
        context: node.to_string(),
    }
}

fn eval_node<T: Scalar>(
    node: &Node,
    x: &[T],
    y: &[T],
    params: &HashMap<String, f64>,
    unit: &T,
) -> Result<T> {
    Ok(match node {
        Node::Num(v) => unit.lift(*v),
        Node::X(i) => x[*i].clone(),
        Node::Y(i) => y[*i].clone(),
        Node::Param(p) => unit.lift(
            *params
                .get(p)
                .ok_or_else(|| Error::UnboundParameter(p.clone()))?,
        ),
        Node::Neg(a) => -eval_node(a, x, y, params, unit)?,
        Node::Bin(op, a, b) => {
            let l = eval_node(a, x, y, params, unit)?;
            let r = eval_node(b, x, y, params, unit)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => l * r.recip().map_err(|e| domain(e, node))?,
                BinOp::Pow => {
                    if r.is_constant() {
                        l.powf(r.value()).map_err(|e| domain(e, node))?
                    } else {
                        (l.ln().map_err(|e| domain(e, node))? * r).exp()
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let v = eval_node(a, x, y, params, unit)?;
            match f {
                Func::Exp => v.exp(),
                Func::Log => v.ln().map_err(|e| domain(e, node))?,
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Sqrt => v.sqrt().map_err(|e| domain(e, node))?,
                Func::Abs => v.abs().map_err(|e| domain(e, node))?,
            }
        }
    })
}

impl Expression {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Replaces every parameter found in `params` by its value.
    pub fn bind(&self, params: &HashMap<String, f64>) -> Expression {
        fn sub(n: &Node, p: &HashMap<String, f64>) -> Node {
            match n {
                Node::Param(name) => match p.get(name) {
                    Some(v) if *v < 0.0 => Node::Neg(Box::new(Node::Num(-v))),
                    Some(v) => Node::Num(*v),
                    None => n.clone(),
                },
                Node::Neg(a) => Node::Neg(Box::new(sub(a, p))),
                Node::Bin(op, a, b) => Node::Bin(*op, Box::new(sub(a, p)), Box::new(sub(b, p))),
                Node::Call(f, a) => Node::Call(*f, Box::new(sub(a, p))),
                _ => n.clone(),
            }
        }
        Expression {
            root: sub(&self.root, params),
            dim: self.dim,
        }
    }

    pub fn parameters(&self) -> Vec<String> {
        fn walk(n: &Node, out: &mut Vec<String>) {
            match n {
                Node::Param(p) if !out.contains(p) => out.push(p.clone()),
                Node::Neg(a) | Node::Call(_, a) => walk(a, out),
                Node::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// Whether the expression mentions any `y` variable.
    pub fn depends_on_y(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Y(_) => true,
                Node::Neg(a) | Node::Call(_, a) => walk(a),
                Node::Bin(_, a, b) => walk(a) || walk(b),
                _ => false,
            }
        }
        walk(&self.root)
    }

    /// Evaluates over any [`Scalar`]; `x` and `y` must both have length `dim`.
    pub fn eval_generic<T: Scalar>(
        &self,
        x: &[T],
        y: &[T],
        params: &HashMap<String, f64>,
    ) -> Result<T> {
        let unit = x
            .first()
            .or(y.first())
            .ok_or_else(|| Error::Invalid("expression evaluated with no coordinates".into()))?;
        eval_node(&self.root, x, y, params, unit)
    }

    pub fn eval(&self, x: &[f64], y: &[f64], params: &HashMap<String, f64>) -> Result<f64> {
        self.eval_generic(x, y, params)
    }

    pub fn eval_jet(&self, x: &[Jet], y: &[Jet], params: &HashMap<String, f64>) -> Result<Jet> {
        self.eval_generic(x, y, params)
    }
}

/// `eval_expr` with variables bound by name (`"x1"`, `"y2"`, ...); unbound variables are errors.
pub fn eval_expr(
    e: &Expression,
    bindings: &HashMap<String, f64>,
    params: &HashMap<String, f64>,
) -> Result<f64> {
    let get = |prefix: char, i: usize| {
        let name = format!("{prefix}{}", i + 1);
        bindings
            .get(&name)
            .copied()
            .ok_or(Error::UnboundParameter(name))
    };
    let mut x = Vec::with_capacity(e.dim);
    let mut y = Vec::with_capacity(e.dim);
    for i in 0..e.dim {
        x.push(if uses(&e.root, 'x', i) { get('x', i)? } else { 0.0 });
        y.push(if uses(&e.root, 'y', i) { get('y', i)? } else { 0.0 });
    }
    e.eval(&x, &y, params)
}

fn uses(n: &Node, kind: char, i: usize) -> bool {
    match n {
        Node::X(j) => kind == 'x' && *j == i,
        Node::Y(j) => kind == 'y' && *j == i,
        Node::Neg(a) | Node::Call(_, a) => uses(a, kind, i),
        Node::Bin(_, a, b) => uses(a, kind, i) || uses(b, kind, i),
        _ => false,
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::X(i) => write!(f, "x{}", i + 1),
            Node::Y(i) => write!(f, "y{}", i + 1),
            Node::Param(p) => write!(f, "{p}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
