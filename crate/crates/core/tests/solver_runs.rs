use std::cell::Cell;

use relaxip::catalog;
use relaxip::relax::{eval_zy, BarrierParams};
use relaxip::solver::{solve, SolveStatus, SolverConfig};
use relaxip::{EvalError, Matrix, Problem, Vector};

/// Counts objective and gradient calls made by the solver.
struct Tally<P> {
    inner: P,
    nf: Cell<usize>,
    ng: Cell<usize>,
}

impl<P: Problem> Problem for Tally<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }
    fn num_eq(&self) -> usize {
        self.inner.num_eq()
    }
    fn num_ineq(&self) -> usize {
        self.inner.num_ineq()
    }
    fn objective(&self, x: &Vector) -> Result<f64, EvalError> {
        self.nf.set(self.nf.get() + 1);
        self.inner.objective(x)
    }
    fn eq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        self.inner.eq_constraints(x)
    }
    fn ineq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        self.inner.ineq_constraints(x)
    }
    fn objective_gradient(&self, x: &Vector) -> Result<Vector, EvalError> {
        self.ng.set(self.ng.get() + 1);
        self.inner.objective_gradient(x)
    }
    fn eq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        self.inner.eq_jacobian(x)
    }
    fn ineq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        self.inner.ineq_jacobian(x)
    }
    fn standard_start(&self) -> Vector {
        self.inner.standard_start()
    }
}

#[test]
fn counters_match_instrumented_calls() {
    for p in catalog::all() {
        let name = p.name;
        let tally = Tally {
            inner: p,
            nf: Cell::new(0),
            ng: Cell::new(0),
        };
        let r = solve(&tally, &SolverConfig::default()).unwrap();
        assert_eq!(r.counters.nf, tally.nf.get(), "{name}");
        assert_eq!(r.counters.ng, tally.ng.get(), "{name}");
        assert!(r.counters.iters >= 1, "{name}");
    }
}

#[test]
fn kkt_runs_have_consistent_duals() {
    for name in ["TP1", "HS10", "HS11", "HS14", "HS22", "HS43", "CB2", "CB3"] {
        let p = catalog::lookup_problem(name).unwrap();
        let r = solve(p.as_ref(), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::ApproxKkt, "{name}");
        let bp = BarrierParams::new(r.mu, r.tau);
        let t = Vector::from_column_slice(&r.t);
        let s = Vector::from_column_slice(&r.s);
        let (_, y) = eval_zy(&t, &s, bp);
        for j in 0..s.len() {
            let scale = 1f64.max(s[j].abs());
            let tol = 1e-6 * scale;
            assert!((r.multipliers.beta[j] - s[j]).abs() <= tol, "{name} beta[{j}]");
            assert!((r.multipliers.nu[j] - s[j]).abs() <= tol, "{name} nu[{j}]");
            assert!((y[j] / r.tau - s[j]).abs() <= tol, "{name} y/tau[{j}]");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for name in ["TP1", "TP3", "HS43"] {
        let p = catalog::lookup_problem(name).unwrap();
        let a = solve(p.as_ref(), &SolverConfig::default()).unwrap();
        let b = solve(p.as_ref(), &SolverConfig::default()).unwrap();
        assert_eq!(a.x, b.x, "{name}");
        assert_eq!(a.counters.iters, b.counters.iters, "{name}");
    }
}

#[test]
fn invalid_config_is_rejected() {
    let p = catalog::tp1();
    let cfg = SolverConfig {
        xi: 1.0,
        ..SolverConfig::default()
    };
    assert!(solve(&p, &cfg).is_err());
}

#[test]
fn iteration_budget_is_respected() {
    let p = catalog::tp2();
    let cfg = SolverConfig {
        max_total_iters: 50,
        ..SolverConfig::default()
    };
    let r = solve(&p, &cfg).unwrap();
    assert_eq!(r.status, SolveStatus::IterationLimit);
    assert!(r.counters.iters <= 50 + cfg.polish_iters);
}
