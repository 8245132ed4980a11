//! A small text format for problems.
//!
//! ```text
//! # comments run to the end of the line
//! var x1 = -2, x2 = -2;
//! min (x1 - 2)^2 + x2^2;
//! s.t.
//!   (1 - x1)^3 - x2 >= 0;
//!   x1 >= 0;
//! ```
//!
//! Statements end with `;`. Variables without an initial value start at 0.
//! Operators bind as `^` (integer literal exponent) > unary `-` > `* /` >
//! `+ -`; functions are `sin cos exp ln sqrt`. Relations are `=`, `<=`/`≤`
//! and `>=`/`≥`; every constraint is stored as `lhs - rhs = 0`,
//! `lhs - rhs <= 0` or `-(lhs - rhs) <= 0`.

mod expr;
mod lexer;
mod parser;

use std::fmt::Write as _;

pub use expr::{Dual, Expr, Func, Kind};
pub use lexer::Span;
pub use parser::parse_model;

use crate::error::EvalError;
use crate::model::{Matrix, Problem, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub init: Option<f64>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
    pub span: Span,
}

impl Constraint {
    /// The constraint function in `= 0` / `<= 0` form.
    pub fn normalized(&self) -> Expr {
        let diff = Expr::new(
            Kind::Sub(Box::new(self.lhs.clone()), Box::new(self.rhs.clone())),
            self.span,
        );
        match self.relation {
            Relation::Eq | Relation::Le => diff,
            Relation::Ge => Expr::new(Kind::Neg(Box::new(diff)), self.span),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub vars: Vec<VarDecl>,
    pub objective: Expr,
    pub constraints: Vec<Constraint>,
}

fn render_expr(e: &Expr, names: &[String], out: &mut String) {
    let bin = |op: &str, a: &Expr, b: &Expr, out: &mut String| {
        out.push('(');
        render_expr(a, names, out);
        let _ = write!(out, " {op} ");
        render_expr(b, names, out);
        out.push(')');
    };
    match &e.kind {
        Kind::Const(v) if *v < 0.0 => {
            let _ = write!(out, "(-{})", -v);
        }
        Kind::Const(v) => {
            let _ = write!(out, "{v}");
        }
        Kind::Var(i) => out.push_str(&names[*i]),
        Kind::Neg(a) => {
            out.push_str("(-");
            render_expr(a, names, out);
            out.push(')');
        }
        Kind::Add(a, b) => bin("+", a, b, out),
        Kind::Sub(a, b) => bin("-", a, b, out),
        Kind::Mul(a, b) => bin("*", a, b, out),
        Kind::Div(a, b) => bin("/", a, b, out),
        Kind::Pow(a, k) => {
            out.push('(');
            render_expr(a, names, out);
            let _ = write!(out, ")^{k}");
        }
        Kind::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            render_expr(a, names, out);
            out.push(')');
        }
    }
}

/// Fully parenthesized text that parses back to an equivalent model.
pub fn render(mf: &ModelFile) -> String {
    let names: Vec<String> = mf.vars.iter().map(|v| v.name.clone()).collect();
    let mut out = String::new();
    if !mf.vars.is_empty() {
        out.push_str("var ");
        for (i, v) in mf.vars.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&v.name);
            if let Some(init) = v.init {
                let _ = write!(out, " = {init}");
            }
        }
        out.push_str(";\n");
    }
    out.push_str("min ");
    render_expr(&mf.objective, &names, &mut out);
    out.push_str(";\n");
    if !mf.constraints.is_empty() {
        out.push_str("s.t.\n");
        for c in &mf.constraints {
            out.push_str("  ");
            render_expr(&c.lhs, &names, &mut out);
            out.push_str(match c.relation {
                Relation::Eq => " = ",
                Relation::Le => " <= ",
                Relation::Ge => " >= ",
            });
            render_expr(&c.rhs, &names, &mut out);
            out.push_str(";\n");
        }
    }
    out
}

/// A problem compiled from a [`ModelFile`].
#[derive(Debug, Clone)]
pub struct TextProblem {
    name: String,
    vars: Vec<String>,
    start: Vector,
    objective: Expr,
    eq: Vec<Expr>,
    ineq: Vec<Expr>,
}

impl TextProblem {
    pub fn variables(&self) -> &[String] {
        &self.vars
    }
}

pub fn compile_model(mf: &ModelFile, name: &str) -> TextProblem {
    let mut eq = Vec::new();
    let mut ineq = Vec::new();
    for c in &mf.constraints {
        match c.relation {
            Relation::Eq => eq.push(c.normalized()),
            Relation::Le | Relation::Ge => ineq.push(c.normalized()),
        }
    }
    TextProblem {
        name: name.to_string(),
        vars: mf.vars.iter().map(|v| v.name.clone()).collect(),
        start: Vector::from_iterator(mf.vars.len(), mf.vars.iter().map(|v| v.init.unwrap_or(0.0))),
        objective: mf.objective.clone(),
        eq,
        ineq,
    }
}

fn values(exprs: &[Expr], x: &Vector) -> Result<Vector, EvalError> {
    let vals = exprs
        .iter()
        .map(|e| e.eval(x.as_slice()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::from_vec(vals))
}

fn jacobian(exprs: &[Expr], x: &Vector) -> Result<Matrix, EvalError> {
    let mut j = Matrix::zeros(x.len(), exprs.len());
    for (k, e) in exprs.iter().enumerate() {
        j.set_column(k, &Vector::from_vec(e.gradient(x.as_slice())?));
    }
    Ok(j)
}

impl Problem for TextProblem {
    fn name(&self) -> &str {
        &self.name
    }
    fn num_vars(&self) -> usize {
        self.vars.len()
    }
    fn num_eq(&self) -> usize {
        self.eq.len()
    }
    fn num_ineq(&self) -> usize {
        self.ineq.len()
    }
    fn objective(&self, x: &Vector) -> Result<f64, EvalError> {
        self.objective.eval(x.as_slice())
    }
    fn eq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        values(&self.eq, x)
    }
    fn ineq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        values(&self.ineq, x)
    }
    fn objective_gradient(&self, x: &Vector) -> Result<Vector, EvalError> {
        Ok(Vector::from_vec(self.objective.gradient(x.as_slice())?))
    }
    fn eq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        jacobian(&self.eq, x)
    }
    fn ineq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        jacobian(&self.ineq, x)
    }
    fn standard_start(&self) -> Vector {
        self.start.clone()
    }
}

/// Parses and compiles in one step.
pub fn load_model(src: &str, name: &str) -> Result<TextProblem, crate::error::ModelError> {
    Ok(compile_model(&parse_model(src)?, name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::derivcheck::check_derivatives;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TP2: &str = "var x1=-2, x2=-2; min (x1-2)^2 + x2^2; s.t. (1-x1)^3 - x2 >= 0; x1 >= 0; x2 >= 0;";
    const TP1: &str = "var x1 = -4, x2 = 1, x3 = 1;\nmin x1;\ns.t.\n  x1^2 - x2 - 1 = 0;\n  x1 - x3 - 2 = 0;\n  x2 >= 0;\n  x3 >= 0;\n";

    #[test]
    fn tp2_text_values() {
        let p = load_model(TP2, "tp2").unwrap();
        assert_eq!((p.num_vars(), p.num_eq(), p.num_ineq()), (2, 0, 3));
        let x = p.standard_start();
        assert_eq!(p.objective(&x).unwrap(), 20.0);
        let c = p.ineq_constraints(&x).unwrap();
        assert_eq!(c.as_slice(), &[-29.0, 2.0, 2.0]);
        let builtin = catalog::tp2();
        assert_eq!(c, builtin.ineq_constraints(&x).unwrap());
    }

    #[test]
    fn tp1_text_matches_builtin() {
        let p = load_model(TP1, "tp1").unwrap();
        let b = catalog::tp1();
        let x = b.standard_start();
        assert_eq!(p.standard_start(), x);
        assert!((p.objective_gradient(&x).unwrap() - b.objective_gradient(&x).unwrap()).amax() <= 1e-12);
        assert!((p.eq_jacobian(&x).unwrap() - b.eq_jacobian(&x).unwrap()).amax() <= 1e-12);
        assert!((p.ineq_jacobian(&x).unwrap() - b.ineq_jacobian(&x).unwrap()).amax() <= 1e-12);
        assert_eq!(p.eq_constraints(&x).unwrap(), b.eq_constraints(&x).unwrap());
    }

    #[test]
    fn unconstrained_model() {
        let p = load_model("var x; min x^2;", "sq").unwrap();
        assert_eq!((p.num_eq(), p.num_ineq()), (0, 0));
        assert_eq!(p.objective_gradient(&Vector::from_vec(vec![3.0])).unwrap()[0], 6.0);
    }

    #[test]
    fn ge_normalization() {
        let mf = parse_model("var a, b; min a; s.t. a*b >= 3 - b;").unwrap();
        let c = mf.constraints[0].normalized();
        let x = [1.5, -2.0];
        let lhs = mf.constraints[0].lhs.eval(&x).unwrap();
        let rhs = mf.constraints[0].rhs.eval(&x).unwrap();
        assert_eq!(c.eval(&x).unwrap(), -(lhs - rhs));
    }

    #[test]
    fn domain_error_location() {
        let p = load_model("var x = -1;\nmin ln(x);", "log").unwrap();
        let err = p.objective(&p.standard_start()).unwrap_err();
        assert_eq!(
            err,
            EvalError::Domain {
                what: "ln of a non-positive argument".into(),
                line: 2,
                col: 5
            }
        );
    }

    #[test]
    fn render_round_trip_fixed() {
        let mf = parse_model(TP2).unwrap();
        let again = parse_model(&render(&mf)).unwrap();
        assert_eq!(render(&again), render(&mf));
    }

    const SMOOTH_MODELS: [&str; 3] = [
        "var a, b; min exp(a/3) * cos(b) + ln(1 + a^2); s.t. sqrt(2 + sin(a*b)) <= 3; a/(2 + b^2) = 0.5;",
        "var x1 = -2, x2 = -2; min (x1-2)^2 + x2^2; s.t. (1-x1)^3 - x2 >= 0; x1 >= 0; x2 >= 0;",
        "var u, v, w; min u*v*w + sin(u - w)^3 - 1/(2 + u^2); s.t. u^2 + v^2 + w^2 - 4 <= 0; -u*w >= exp(-v^2);",
    ];

    #[test]
    fn ad_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for src in SMOOTH_MODELS {
            let p = load_model(src, "m").unwrap();
            for _ in 0..100 {
                let x = Vector::from_fn(p.num_vars(), |_, _| rng.gen_range(-1.5..1.5));
                let rep = check_derivatives(&p, &x, 1e-6).unwrap();
                assert!(rep.passes(1e-5), "{src}: {rep:?} at {x:?}");
            }
        }
    }

    fn arb_expr(nvars: usize) -> impl Strategy<Value = Expr> {
        let at = Span { line: 1, col: 1 };
        let leaf = prop_oneof![
            (-5.0f64..5.0).prop_map(move |v| Expr::constant(v, at)),
            (0..nvars).prop_map(move |i| Expr::new(Kind::Var(i), at)),
        ];
        leaf.prop_recursive(4, 24, 2, move |inner| {
            let b = |e: Expr| Box::new(e);
            prop_oneof![
                inner.clone().prop_map(move |a| Expr::new(Kind::Neg(b(a)), at)),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::new(Kind::Add(b(x), b(y)), at)),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::new(Kind::Sub(b(x), b(y)), at)),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::new(Kind::Mul(b(x), b(y)), at)),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::new(Kind::Div(b(x), b(y)), at)),
                (inner.clone(), -3i32..4).prop_map(move |(x, k)| Expr::new(Kind::Pow(b(x), k), at)),
                (inner, 0usize..5).prop_map(move |(x, f)| {
                    let f = [Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt][f];
                    Expr::new(Kind::Call(f, b(x)), at)
                }),
            ]
        })
    }

    fn arb_model() -> impl Strategy<Value = ModelFile> {
        let at = Span { line: 1, col: 1 };
        (1usize..4).prop_flat_map(move |n| {
            let rel = prop_oneof![Just(Relation::Eq), Just(Relation::Le), Just(Relation::Ge)];
            let cons = prop::collection::vec((arb_expr(n), rel, arb_expr(n)), 0..3);
            let inits = prop::collection::vec(prop::option::of(-10.0f64..10.0), n);
            (arb_expr(n), cons, inits).prop_map(move |(obj, cons, inits)| ModelFile {
                vars: inits
                    .into_iter()
                    .enumerate()
                    .map(|(i, init)| VarDecl {
                        name: format!("v{i}"),
                        init,
                        span: at,
                    })
                    .collect(),
                objective: obj,
                constraints: cons
                    .into_iter()
                    .map(|(lhs, relation, rhs)| Constraint {
                        lhs,
                        relation,
                        rhs,
                        span: at,
                    })
                    .collect(),
            })
        })
    }

    fn same(a: Result<Vector, EvalError>, b: Result<Vector, EvalError>) -> bool {
        match (a, b) {
            (Ok(a), Ok(b)) => a.iter().zip(b.iter()).all(|(x, y)| x == y || (x.is_nan() && y.is_nan())),
            (Err(_), Err(_)) => true,
            _ => false,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn render_parse_round_trip(mf in arb_model(), seed in 0u64..1000) {
            let text = render(&mf);
            let back = parse_model(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            let p1 = compile_model(&mf, "a");
            let p2 = compile_model(&back, "b");
            prop_assert_eq!(p1.standard_start(), p2.standard_start());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..100 {
                let x = Vector::from_fn(p1.num_vars(), |_, _| rng.gen_range(-3.0..3.0));
                let f1 = p1.objective(&x).map(|v| Vector::from_vec(vec![v]));
                let f2 = p2.objective(&x).map(|v| Vector::from_vec(vec![v]));
                prop_assert!(same(f1, f2));
                prop_assert!(same(p1.eq_constraints(&x), p2.eq_constraints(&x)));
                prop_assert!(same(p1.ineq_constraints(&x), p2.ineq_constraints(&x)));
                prop_assert!(same(p1.objective_gradient(&x), p2.objective_gradient(&x)));
            }
        }
    }
}
