//! Expression trees and their forward-mode evaluation.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::lexer::Span;
use crate::error::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: Kind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: Kind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn constant(v: f64, span: Span) -> Self {
        Self::new(Kind::Const(v), span)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &self.kind {
            Kind::Const(_) => None,
            Kind::Var(i) => Some(*i),
            Kind::Neg(a) | Kind::Pow(a, _) | Kind::Call(_, a) => a.max_var(),
            Kind::Add(a, b) | Kind::Sub(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.eval_generic(&|i| x[i])
    }

    /// Value and directional derivative along coordinate `seed`.
    pub fn eval_dual(&self, x: &[f64], seed: usize) -> Result<Dual, EvalError> {
        self.eval_generic(&|i| Dual {
            v: x[i],
            d: if i == seed { 1.0 } else { 0.0 },
        })
    }

    /// Value and full gradient, one dual pass per coordinate.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        (0..x.len()).map(|i| self.eval_dual(x, i).map(|d| d.d)).collect()
    }

    fn domain(&self, what: &str) -> EvalError {
        EvalError::Domain {
            what: what.to_string(),
            line: self.span.line,
            col: self.span.col,
        }
    }

    fn eval_generic<T: Scalar>(&self, leaf: &dyn Fn(usize) -> T) -> Result<T, EvalError> {
        Ok(match &self.kind {
            Kind::Const(v) => T::from_f64(*v),
            Kind::Var(i) => leaf(*i),
            Kind::Neg(a) => -a.eval_generic(leaf)?,
            Kind::Add(a, b) => a.eval_generic(leaf)? + b.eval_generic(leaf)?,
            Kind::Sub(a, b) => a.eval_generic(leaf)? - b.eval_generic(leaf)?,
            Kind::Mul(a, b) => a.eval_generic(leaf)? * b.eval_generic(leaf)?,
            Kind::Div(a, b) => {
                let num = a.eval_generic(leaf)?;
                let den = b.eval_generic(leaf)?;
                if den.value() == 0.0 {
                    return Err(self.domain("division by zero"));
                }
                num / den
            }
            Kind::Pow(a, k) => {
                let base = a.eval_generic(leaf)?;
                if *k < 0 && base.value() == 0.0 {
                    return Err(self.domain("negative power of zero"));
                }
                base.powi(*k)
            }
            Kind::Call(f, a) => {
                let arg = a.eval_generic(leaf)?;
                match f {
                    Func::Ln if arg.value() <= 0.0 => {
                        return Err(self.domain("ln of a non-positive argument"))
                    }
                    Func::Sqrt if arg.value() < 0.0 => {
                        return Err(self.domain("sqrt of a negative argument"))
                    }
                    Func::Sqrt if arg.value() == 0.0 && T::TRACKS_DERIVATIVE => {
                        return Err(self.domain("sqrt is not differentiable at zero"))
                    }
                    _ => {}
                }
                arg.apply(*f)
            }
        })
    }
}

/// A value paired with one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    const TRACKS_DERIVATIVE: bool;
    fn from_f64(v: f64) -> Self;
    fn value(self) -> f64;
    fn powi(self, k: i32) -> Self;
    fn apply(self, f: Func) -> Self;
}

impl Scalar for f64 {
    const TRACKS_DERIVATIVE: bool = false;
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn apply(self, f: Func) -> Self {
        match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
            Func::Ln => self.ln(),
            Func::Sqrt => self.sqrt(),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: self.d + o.d,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: self.d - o.d,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            v: self.v / o.v,
            d: (self.d * o.v - self.v * o.d) / (o.v * o.v),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            d: -self.d,
        }
    }
}

impl Scalar for Dual {
    const TRACKS_DERIVATIVE: bool = true;
    fn from_f64(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Dual { v: 1.0, d: 0.0 };
        }
        Dual {
            v: self.v.powi(k),
            d: k as f64 * self.v.powi(k - 1) * self.d,
        }
    }
    fn apply(self, f: Func) -> Self {
        let (v, dv) = match f {
            Func::Sin => (self.v.sin(), self.v.cos()),
            Func::Cos => (self.v.cos(), -self.v.sin()),
            Func::Exp => {
                let e = self.v.exp();
                (e, e)
            }
            Func::Ln => (self.v.ln(), 1.0 / self.v),
            Func::Sqrt => {
                let r = self.v.sqrt();
                (r, 0.5 / r)
            }
        };
        Dual { v, d: dv * self.d }
    }
}
