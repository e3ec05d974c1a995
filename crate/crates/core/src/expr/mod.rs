//! A small expression language for metric and vielbein entries.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    := sum
//! sum     := product { ("+" | "-") product }      (* left-associative *)
//! product := unary { ("*" | "/") unary }          (* left-associative *)
//! unary   := "-" unary | power
//! power   := primary [ "^" unary ]                (* right-associative *)
//! primary := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! IDENT   := [a-zA-Z_][a-zA-Z0-9_]*
//! NUMBER  := digits ["." digits] [("e"|"E") ["+"|"-"] digits]
//! ```
//!
//! so `^` binds tighter than unary minus, which binds tighter than `*` `/`,
//! which bind tighter than `+` `-`. The unary functions are `sin`, `cos`,
//! `tan`, `exp`, `log` (natural), `sqrt`, `abs`, `sinh`, `cosh`, `tanh`.
//!
//! Expressions are immutable after parsing and evaluation is pure, so a
//! parsed [`Expression`] can be shared and evaluated from many threads.
//!
//! Semantics notes:
//!
//! * evaluation is IEEE-754 `f64`; NaN and infinity propagate, and the
//!   checked entry points additionally report a *domain flag* for `log` of a
//!   non-positive value and `sqrt` of a negative value;
//! * `abs` differentiates as `sign(v)` with `sign(0) = +1`, so results at
//!   the kink are one-sided;
//! * `a ^ b` uses exact integer powers whenever `b` is an integer literal
//!   (valid for any base, including negative); otherwise it evaluates as
//!   `exp(b log a)` and requires a positive base.

mod parse;

use crate::error::Error;
use crate::jet::Jet2;
use crate::real::Real;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// Unary operators and functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    /// Arithmetic negation.
    Neg,
    /// Sine.
    Sin,
    /// Cosine.
    Cos,
    /// Tangent.
    Tan,
    /// Exponential.
    Exp,
    /// Natural logarithm.
    Log,
    /// Square root.
    Sqrt,
    /// Absolute value.
    Abs,
    /// Hyperbolic sine.
    Sinh,
    /// Hyperbolic cosine.
    Cosh,
    /// Hyperbolic tangent.
    Tanh,
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    /// Addition.
    Add,
    /// Subtraction.
    Sub,
    /// Multiplication.
    Mul,
    /// Division.
    Div,
    /// Power.
    Pow,
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Numeric literal.
    Literal(f64),
    /// Index into the declared variable list.
    Variable(usize),
    /// Unary operator application.
    Unary(UnaryOp, Box<Node>),
    /// Binary operator application.
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

/// A parsed, immutable expression over a declared variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    pub(crate) root: Node,
    pub(crate) vars: Vec<String>,
}

impl Expression {
    /// Parse `text` against the ordered variable list `vars`.
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, Error> {
        parse::parse(text, vars)
    }

    /// Number of declared variables.
    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Declared variable names, in order.
    pub fn var_names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|s| s.as_str())
    }

    /// Evaluate at an assignment (one value per declared variable).
    ///
    /// NaN/infinity propagate silently; use [`Expression::eval_checked`] to
    /// also learn whether a domain error occurred.
    pub fn eval(&self, assignment: &[f64]) -> f64 {
        self.eval_checked(assignment).0
    }

    /// Evaluate, additionally reporting the domain-error flag.
    pub fn eval_checked(&self, assignment: &[f64]) -> (f64, bool) {
        self.eval_scalar_checked::<f64>(assignment)
    }

    /// Evaluate over any scalar type (plain values, jets, nested jets).
    pub fn eval_scalar<S: Real>(&self, assignment: &[S]) -> S {
        self.eval_scalar_checked(assignment).0
    }

    /// Generic evaluation with the domain-error flag.
    pub fn eval_scalar_checked<S: Real>(&self, assignment: &[S]) -> (S, bool) {
        assert_eq!(
            assignment.len(),
            self.vars.len(),
            "assignment length must match the declared variable count"
        );
        let mut domain = false;
        let v = eval_node(&self.root, assignment, &mut domain);
        (v, domain)
    }

    /// Evaluate with value, gradient and Hessian with respect to `seeds`.
    ///
    /// `seeds` selects which variables are differentiated, in the order the
    /// jet's gradient slots are laid out; every other variable enters as a
    /// constant. Domain errors surface exactly as in [`Expression::eval`].
    pub fn eval_jet2(&self, assignment: &[f64], seeds: &[usize]) -> Jet2 {
        self.eval_jet2_checked(assignment, seeds).0
    }

    /// Jet evaluation with the domain-error flag.
    pub fn eval_jet2_checked(&self, assignment: &[f64], seeds: &[usize]) -> (Jet2, bool) {
        let m = seeds.len();
        let inputs: Vec<Jet2> = assignment
            .iter()
            .enumerate()
            .map(|(i, &v)| match seeds.iter().position(|&s| s == i) {
                Some(slot) => Jet2::variable(v, m, slot),
                None => Jet2::constant(v, m),
            })
            .collect();
        self.eval_scalar_checked(&inputs)
    }
}

fn eval_node<S: Real>(node: &Node, vars: &[S], domain: &mut bool) -> S {
    match node {
        Node::Literal(v) => S::from_f64(*v),
        Node::Variable(i) => vars[*i].clone(),
        Node::Unary(op, arg) => {
            let u = eval_node(arg, vars, domain);
            match op {
                UnaryOp::Neg => -u,
                UnaryOp::Sin => u.sin(),
                UnaryOp::Cos => u.cos(),
                UnaryOp::Tan => u.tan(),
                UnaryOp::Exp => u.exp(),
                UnaryOp::Log => {
                    if u.value() <= 0.0 {
                        *domain = true;
                    }
                    u.ln()
                }
                UnaryOp::Sqrt => {
                    if u.value() < 0.0 {
                        *domain = true;
                    }
                    u.sqrt()
                }
                UnaryOp::Abs => u.abs(),
                UnaryOp::Sinh => u.sinh(),
                UnaryOp::Cosh => u.cosh(),
                UnaryOp::Tanh => u.tanh(),
            }
        }
        Node::Binary(op, l, r) => {
            let a = eval_node(l, vars, domain);
            match op {
                BinaryOp::Add => a + eval_node(r, vars, domain),
                BinaryOp::Sub => a - eval_node(r, vars, domain),
                BinaryOp::Mul => a * eval_node(r, vars, domain),
                BinaryOp::Div => a / eval_node(r, vars, domain),
                BinaryOp::Pow => {
                    // Integer-literal exponents stay exact (and defined for
                    // negative bases); anything else goes through exp/log.
                    if let Some(k) = int_exponent(r) {
                        return a.powi(k);
                    }
                    let b = eval_node(r, vars, domain);
                    if a.value() <= 0.0 {
                        *domain = true;
                    }
                    a.powf(&b)
                }
            }
        }
    }
}

/// Integer exponent of a literal (possibly negated) power, if exact.
fn int_exponent(node: &Node) -> Option<i32> {
    match node {
        Node::Literal(e) if crate::real::fp::fract(*e) == 0.0 && e.abs() < i32::MAX as f64 => Some(*e as i32),
        Node::Unary(UnaryOp::Neg, inner) => int_exponent(inner).map(|k| -k),
        _ => None,
    }
}

impl core::fmt::Display for Expression {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        fmt_node(&self.root, &self.vars, f)
    }
}

fn fmt_node(
    node: &Node,
    vars: &[String],
    f: &mut core::fmt::Formatter<'_>,
) -> core::fmt::Result {
    match node {
        Node::Literal(v) => write!(f, "{v}"),
        Node::Variable(i) => write!(f, "{}", vars[*i]),
        Node::Unary(UnaryOp::Neg, arg) => {
            write!(f, "(-")?;
            fmt_node(arg, vars, f)?;
            write!(f, ")")
        }
        Node::Unary(op, arg) => {
            let name = match op {
                UnaryOp::Sin => "sin",
                UnaryOp::Cos => "cos",
                UnaryOp::Tan => "tan",
                UnaryOp::Exp => "exp",
                UnaryOp::Log => "log",
                UnaryOp::Sqrt => "sqrt",
                UnaryOp::Abs => "abs",
                UnaryOp::Sinh => "sinh",
                UnaryOp::Cosh => "cosh",
                UnaryOp::Tanh => "tanh",
                UnaryOp::Neg => unreachable!(),
            };
            write!(f, "{name}(")?;
            fmt_node(arg, vars, f)?;
            write!(f, ")")
        }
        Node::Binary(op, l, r) => {
            let sym = match op {
                BinaryOp::Add => "+",
                BinaryOp::Sub => "-",
                BinaryOp::Mul => "*",
                BinaryOp::Div => "/",
                BinaryOp::Pow => "^",
            };
            write!(f, "(")?;
            fmt_node(l, vars, f)?;
            write!(f, " {sym} ")?;
            fmt_node(r, vars, f)?;
            write!(f, ")")
        }
    }
}
