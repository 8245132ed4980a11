use std::collections::HashMap;

use super::expr::{Expr, Func, Kind};
use super::lexer::{tokenize, Span, Tok};
use super::{Constraint, ModelFile, Relation, VarDecl};
use crate::error::ModelError;

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    vars: Vec<VarDecl>,
    index: HashMap<String, usize>,
}

pub fn parse_model(src: &str) -> Result<ModelFile, ModelError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        vars: Vec::new(),
        index: HashMap::new(),
    };
    p.model()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ModelError {
        let s = self.span();
        ModelError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ModelError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn model(&mut self) -> Result<ModelFile, ModelError> {
        let mut objective = None;
        let mut constraints = Vec::new();
        let mut in_constraints = false;
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Semi => {
                    self.bump();
                }
                Tok::Var => {
                    self.bump();
                    self.declarations()?;
                    self.expect(Tok::Semi)?;
                }
                Tok::Min => {
                    if objective.is_some() {
                        return Err(self.error("second objective"));
                    }
                    self.bump();
                    objective = Some(self.expr()?);
                    self.expect(Tok::Semi)?;
                }
                Tok::SubjectTo => {
                    self.bump();
                    in_constraints = true;
                }
                _ if in_constraints => {
                    constraints.push(self.constraint()?);
                    self.expect(Tok::Semi)?;
                }
                other => {
                    return Err(self.error(format!(
                        "expected `var`, `min` or `s.t.`, found {}",
                        other.describe()
                    )))
                }
            }
        }
        Ok(ModelFile {
            vars: std::mem::take(&mut self.vars),
            objective: objective.ok_or(ModelError::MissingObjective)?,
            constraints,
        })
    }

    fn declarations(&mut self) -> Result<(), ModelError> {
        loop {
            let (tok, span) = self.bump();
            let Tok::Ident(name) = tok else {
                self.pos -= 1;
                return Err(self.error(format!("expected variable name, found {}", tok.describe())));
            };
            if Func::from_name(&name).is_some() {
                return Err(ModelError::Syntax {
                    line: span.line,
                    col: span.col,
                    msg: format!("`{name}` is a function name"),
                });
            }
            if self.index.contains_key(&name) {
                return Err(ModelError::DuplicateVariable {
                    name,
                    line: span.line,
                    col: span.col,
                });
            }
            let init = if *self.peek() == Tok::Eq {
                self.bump();
                Some(self.signed_number()?)
            } else {
                None
            };
            self.index.insert(name.clone(), self.vars.len());
            self.vars.push(VarDecl { name, init, span });
            if *self.peek() != Tok::Comma {
                return Ok(());
            }
            self.bump();
        }
    }

    fn signed_number(&mut self) -> Result<f64, ModelError> {
        let sign = match self.peek() {
            Tok::Minus => {
                self.bump();
                -1.0
            }
            Tok::Plus => {
                self.bump();
                1.0
            }
            _ => 1.0,
        };
        match self.bump() {
            (Tok::Num(v), _) => Ok(sign * v),
            (tok, _) => {
                self.pos -= 1;
                Err(self.error(format!("expected number, found {}", tok.describe())))
            }
        }
    }

    fn constraint(&mut self) -> Result<Constraint, ModelError> {
        let span = self.span();
        let lhs = self.expr()?;
        let relation = match self.peek() {
            Tok::Eq => Relation::Eq,
            Tok::Le => Relation::Le,
            Tok::Ge => Relation::Ge,
            other => {
                return Err(self.error(format!(
                    "expected `=`, `<=` or `>=`, found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Constraint {
            lhs,
            relation,
            rhs,
            span,
        })
    }

    fn expr(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.term()?;
        loop {
            let span = self.span();
            let ctor: fn(Box<Expr>, Box<Expr>) -> Kind = match self.peek() {
                Tok::Plus => Kind::Add,
                Tok::Minus => Kind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::new(ctor(Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.unary()?;
        loop {
            let span = self.span();
            let ctor: fn(Box<Expr>, Box<Expr>) -> Kind = match self.peek() {
                Tok::Star => Kind::Mul,
                Tok::Slash => Kind::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::new(ctor(Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> Result<Expr, ModelError> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().1;
            let inner = self.unary()?;
            return Ok(Expr::new(Kind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ModelError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            let span = self.bump().1;
            let exp = self.signed_number()?;
            if exp.fract() != 0.0 || exp.abs() > i32::MAX as f64 {
                return Err(ModelError::Syntax {
                    line: span.line,
                    col: span.col,
                    msg: "exponent must be an integer literal".into(),
                });
            }
            base = Expr::new(Kind::Pow(Box::new(base), exp as i32), span);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ModelError> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::constant(v, span)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    if let Some(f) = Func::from_name(&name) {
                        self.bump();
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        return Ok(Expr::new(Kind::Call(f, Box::new(arg)), span));
                    }
                }
                match self.index.get(&name) {
                    Some(&i) => Ok(Expr::new(Kind::Var(i), span)),
                    None => Err(ModelError::Undeclared {
                        name,
                        line: span.line,
                        col: span.col,
                    }),
                }
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!("expected an expression, found {}", other.describe())))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mf = parse_model("var x; min -x^2 + 2*3;").unwrap();
        assert_eq!(mf.objective.eval(&[3.0]).unwrap(), -3.0);
        let mf = parse_model("var x; min 8 / 2 / 2 - 1 - 1;").unwrap();
        assert_eq!(mf.objective.eval(&[0.0]).unwrap(), 0.0);
        let mf = parse_model("var x; min 2*-x^-1;").unwrap();
        assert_eq!(mf.objective.eval(&[4.0]).unwrap(), -0.5);
    }

    #[test]
    fn undeclared_identifier() {
        assert_eq!(
            parse_model("min x1; s.t. x1 = 1;").unwrap_err(),
            ModelError::Undeclared {
                name: "x1".into(),
                line: 1,
                col: 5
            }
        );
    }

    #[test]
    fn duplicate_variable() {
        assert!(matches!(
            parse_model("var a, a; min a;").unwrap_err(),
            ModelError::DuplicateVariable { col: 8, .. }
        ));
    }

    #[test]
    fn missing_objective() {
        assert_eq!(parse_model("var a;").unwrap_err(), ModelError::MissingObjective);
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_model("var x;\nmin (x + ;").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { line: 2, col: 10, .. }), "{err:?}");
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(parse_model("var x; min x^1.5;").is_err());
    }

    #[test]
    fn initial_values() {
        let mf = parse_model("var a = -2, b, c = +1e-1;\nmin a;").unwrap();
        let inits: Vec<_> = mf.vars.iter().map(|v| v.init).collect();
        assert_eq!(inits, vec![Some(-2.0), None, Some(0.1)]);
    }
}
