//! Central-difference verification of analytic derivatives.

use crate::error::EvalError;
use crate::model::{Problem, Vector};

/// Worst relative error per derivative block. The denominator is
/// `max(1, |analytic|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeReport {
    pub gradient: f64,
    pub eq_jacobian: f64,
    pub ineq_jacobian: f64,
}

impl DerivativeReport {
    pub fn worst(&self) -> f64 {
        self.gradient.max(self.eq_jacobian).max(self.ineq_jacobian)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

fn finite(v: f64, evaluator: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { evaluator })
    }
}

fn finite_vec(v: Vector, evaluator: &'static str) -> Result<Vector, EvalError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { evaluator })
    }
}

fn rel_err(fd: f64, analytic: f64) -> f64 {
    (fd - analytic).abs() / analytic.abs().max(1.0)
}

/// Compares analytic gradients and Jacobians against central differences
/// with step `h_step` in each coordinate.
pub fn check_derivatives<P: Problem + ?Sized>(
    p: &P,
    x: &Vector,
    h_step: f64,
) -> Result<DerivativeReport, EvalError> {
    assert!(h_step > 0.0, "finite-difference step must be positive");
    let n = p.num_vars();
    let grad = finite_vec(p.objective_gradient(x)?, "objective gradient")?;
    let jac_h = p.eq_jacobian(x)?;
    let jac_c = p.ineq_jacobian(x)?;
    if jac_h.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite { evaluator: "equality Jacobian" });
    }
    if jac_c.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite { evaluator: "inequality Jacobian" });
    }

    let mut report = DerivativeReport {
        gradient: 0.0,
        eq_jacobian: 0.0,
        ineq_jacobian: 0.0,
    };
    let mut probe = x.clone();
    for i in 0..n {
        probe[i] = x[i] + h_step;
        let f_plus = finite(p.objective(&probe)?, "objective")?;
        let h_plus = finite_vec(p.eq_constraints(&probe)?, "equality constraints")?;
        let c_plus = finite_vec(p.ineq_constraints(&probe)?, "inequality constraints")?;
        probe[i] = x[i] - h_step;
        let f_minus = finite(p.objective(&probe)?, "objective")?;
        let h_minus = finite_vec(p.eq_constraints(&probe)?, "equality constraints")?;
        let c_minus = finite_vec(p.ineq_constraints(&probe)?, "inequality constraints")?;
        probe[i] = x[i];

        let denom = 2.0 * h_step;
        report.gradient = report
            .gradient
            .max(rel_err((f_plus - f_minus) / denom, grad[i]));
        for k in 0..p.num_eq() {
            let fd = (h_plus[k] - h_minus[k]) / denom;
            report.eq_jacobian = report.eq_jacobian.max(rel_err(fd, jac_h[(i, k)]));
        }
        for k in 0..p.num_ineq() {
            let fd = (c_plus[k] - c_minus[k]) / denom;
            report.ineq_jacobian = report.ineq_jacobian.max(rel_err(fd, jac_c[(i, k)]));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::model::{no_constraints, no_jacobian, FnProblem};

    #[test]
    fn every_catalog_problem_passes_at_start() {
        for p in catalog::all() {
            let report = check_derivatives(&p, &p.standard_start(), 1e-6).unwrap();
            assert!(report.passes(1e-5), "{}: {report:?}", p.name);
        }
    }

    #[test]
    fn tp1_start_tight() {
        let p = catalog::tp1();
        let report = check_derivatives(&p, &p.standard_start(), 1e-6).unwrap();
        assert!(report.worst() <= 1e-6, "{report:?}");
    }

    #[test]
    fn tp2_cubic_term() {
        let p = catalog::tp2();
        let report = check_derivatives(&p, &p.standard_start(), 1e-6).unwrap();
        assert!(report.ineq_jacobian <= 1e-5, "{report:?}");
    }

    #[test]
    fn linear_objective_is_exact() {
        let p = FnProblem {
            name: "LIN",
            n: 2,
            n_eq: 0,
            n_ineq: 0,
            start: vec![0.3, -7.0],
            f: |x| x[0],
            grad_f: |_| vec![1.0, 0.0],
            h: no_constraints,
            jac_h: no_jacobian,
            c: no_constraints,
            jac_c: no_jacobian,
        };
        let report = check_derivatives(&p, &p.standard_start(), 1e-6).unwrap();
        assert!(report.gradient < 1e-9);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let p = FnProblem {
            name: "BAD",
            n: 1,
            n_eq: 0,
            n_ineq: 0,
            start: vec![1.0],
            f: |x| x[0] * x[0],
            grad_f: |x| vec![3.0 * x[0]],
            h: no_constraints,
            jac_h: no_jacobian,
            c: no_constraints,
            jac_c: no_jacobian,
        };
        let report = check_derivatives(&p, &p.standard_start(), 1e-6).unwrap();
        assert!(!report.passes(1e-5));
    }

    #[test]
    fn non_finite_probe_names_evaluator() {
        let p = FnProblem {
            name: "LOG",
            n: 1,
            n_eq: 0,
            n_ineq: 0,
            start: vec![0.0],
            f: |x| x[0].ln(),
            grad_f: |_| vec![1.0],
            h: no_constraints,
            jac_h: no_jacobian,
            c: no_constraints,
            jac_c: no_jacobian,
        };
        let err = check_derivatives(&p, &p.standard_start(), 1e-6).unwrap_err();
        assert_eq!(err, EvalError::NonFinite { evaluator: "objective" });
    }
}
