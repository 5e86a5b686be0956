//! Arithmetic expressions over named variables: numbers, identifiers,
//! `+ - * / ^` (also `− × ÷`), parentheses and the functions `sin`, `cos`,
//! `exp`, `log`, `sqrt`. `pi` and `e` are predefined constants.

use std::fmt;
use std::sync::Arc;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

fn power(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::Pow(a, b) => power(a.eval(vars), b.eval(vars)),
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    fn uses(&self, i: usize) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(j) => *j == i,
            Node::Neg(a) | Node::Call(_, a) => a.uses(i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses(i) || b.uses(i)
            }
        }
    }
}

/// A compiled expression with its variable names.
#[derive(Clone)]
pub struct Expr {
    source: String,
    vars: Arc<[String]>,
    root: Arc<Node>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?} over {:?})", self.source, self.vars)
    }
}

impl Expr {
    /// Parses `source` with the given variable names, in evaluation order.
    pub fn compile(source: &str, vars: &[&str]) -> Result<Self, CliError> {
        let mut p = Parser {
            src: source,
            chars: source.char_indices().collect(),
            pos: 0,
            vars,
        };
        let root = p.expression()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected input"));
        }
        Ok(Self {
            source: source.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root: Arc::new(root),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        debug_assert_eq!(vars.len(), self.vars.len());
        self.root.eval(vars)
    }

    /// Whether the variable in position `i` occurs in the expression.
    pub fn uses(&self, i: usize) -> bool {
        self.root.uses(i)
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> CliError {
        CliError::Expression {
            expression: self.src.to_string(),
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn expression(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-' | '−') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some('*' | '×') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some('/' | '÷') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, CliError> {
        match self.peek() {
            Some('-' | '−') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, CliError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, CliError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expression()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node, CliError> {
        let start = self.pos;
        let mut end = self.pos;
        let n = self.chars.len();
        while end < n && (self.chars[end].1.is_ascii_digit() || self.chars[end].1 == '.') {
            end += 1;
        }
        if end < n && matches!(self.chars[end].1, 'e' | 'E') {
            let mut k = end + 1;
            if k < n && matches!(self.chars[k].1, '+' | '-') {
                k += 1;
            }
            if k < n && self.chars[k].1.is_ascii_digit() {
                end = k;
                while end < n && self.chars[end].1.is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text: String = self.chars[start..end].iter().map(|c| c.1).collect();
        let value = text
            .parse::<f64>()
            .map_err(|_| self.error(&format!("malformed number '{text}'")))?;
        self.pos = end;
        Ok(Node::Num(value))
    }

    fn identifier(&mut self) -> Result<Node, CliError> {
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].1.is_ascii_alphanumeric() || self.chars[self.pos].1 == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        if self.peek() == Some('(') {
            let Some(f) = Func::lookup(&name) else {
                return Err(CliError::UnknownIdentifier {
                    name,
                    expression: self.src.to_string(),
                });
            };
            self.pos += 1;
            let arg = self.expression()?;
            if self.peek() != Some(')') {
                return Err(self.error("expected ')' after function argument"));
            }
            self.pos += 1;
            return Ok(Node::Call(f, Box::new(arg)));
        }
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Node::Var(i));
        }
        match name.as_str() {
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => Err(CliError::UnknownIdentifier {
                name,
                expression: self.src.to_string(),
            }),
        }
    }
}
