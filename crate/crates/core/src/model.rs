//! The smooth NLP interface consumed by the solver.

use nalgebra::{DMatrix, DVector};

use crate::error::EvalError;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A smooth nonlinear program
///
/// ```text
/// min f(x)  s.t.  h_i(x) = 0 (i < m_e),  c_j(x) <= 0 (j < m)
/// ```
///
/// Jacobians are returned with one *column* per constraint, i.e. the
/// `n x m_e` matrix `[∇h_1 ... ∇h_me]`. Evaluators must be deterministic and
/// free of shared mutable state, so that independent solver instances can
/// call the same model concurrently.
pub trait Problem {
    fn name(&self) -> &str;
    fn num_vars(&self) -> usize;
    fn num_eq(&self) -> usize;
    fn num_ineq(&self) -> usize;

    fn objective(&self, x: &Vector) -> Result<f64, EvalError>;
    fn eq_constraints(&self, x: &Vector) -> Result<Vector, EvalError>;
    fn ineq_constraints(&self, x: &Vector) -> Result<Vector, EvalError>;

    fn objective_gradient(&self, x: &Vector) -> Result<Vector, EvalError>;
    fn eq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError>;
    fn ineq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError>;

    fn standard_start(&self) -> Vector;
}

impl<P: Problem + ?Sized> Problem for &P {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn num_vars(&self) -> usize {
        (**self).num_vars()
    }
    fn num_eq(&self) -> usize {
        (**self).num_eq()
    }
    fn num_ineq(&self) -> usize {
        (**self).num_ineq()
    }
    fn objective(&self, x: &Vector) -> Result<f64, EvalError> {
        (**self).objective(x)
    }
    fn eq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        (**self).eq_constraints(x)
    }
    fn ineq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        (**self).ineq_constraints(x)
    }
    fn objective_gradient(&self, x: &Vector) -> Result<Vector, EvalError> {
        (**self).objective_gradient(x)
    }
    fn eq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        (**self).eq_jacobian(x)
    }
    fn ineq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        (**self).ineq_jacobian(x)
    }
    fn standard_start(&self) -> Vector {
        (**self).standard_start()
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn num_vars(&self) -> usize {
        (**self).num_vars()
    }
    fn num_eq(&self) -> usize {
        (**self).num_eq()
    }
    fn num_ineq(&self) -> usize {
        (**self).num_ineq()
    }
    fn objective(&self, x: &Vector) -> Result<f64, EvalError> {
        (**self).objective(x)
    }
    fn eq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        (**self).eq_constraints(x)
    }
    fn ineq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        (**self).ineq_constraints(x)
    }
    fn objective_gradient(&self, x: &Vector) -> Result<Vector, EvalError> {
        (**self).objective_gradient(x)
    }
    fn eq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        (**self).eq_jacobian(x)
    }
    fn ineq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        (**self).ineq_jacobian(x)
    }
    fn standard_start(&self) -> Vector {
        (**self).standard_start()
    }
}

/// Original-problem infeasibility `‖(h, max(0, c))‖` (Euclidean).
pub fn infeasibility(h: &Vector, c: &Vector) -> f64 {
    let sq: f64 = h.iter().map(|v| v * v).sum::<f64>()
        + c.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>();
    sq.sqrt()
}

/// Scalar-function signatures used by [`FnProblem`].
pub type ScalarFn = fn(&[f64]) -> f64;
pub type VectorFn = fn(&[f64]) -> Vec<f64>;
/// Returns one gradient per constraint.
pub type JacobianFn = fn(&[f64]) -> Vec<Vec<f64>>;

/// A problem assembled from plain function pointers. All built-in catalog
/// entries use this.
#[derive(Clone)]
pub struct FnProblem {
    pub name: &'static str,
    pub n: usize,
    pub n_eq: usize,
    pub n_ineq: usize,
    pub start: Vec<f64>,
    pub f: ScalarFn,
    pub grad_f: VectorFn,
    pub h: VectorFn,
    pub jac_h: JacobianFn,
    pub c: VectorFn,
    pub jac_c: JacobianFn,
}

impl std::fmt::Debug for FnProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnProblem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("n_eq", &self.n_eq)
            .field("n_ineq", &self.n_ineq)
            .finish()
    }
}

/// Evaluator for a problem without constraints of one kind.
pub fn no_constraints(_: &[f64]) -> Vec<f64> {
    Vec::new()
}

pub fn no_jacobian(_: &[f64]) -> Vec<Vec<f64>> {
    Vec::new()
}

fn columns(n: usize, rows: Vec<Vec<f64>>, expected: usize) -> Matrix {
    debug_assert_eq!(rows.len(), expected);
    Matrix::from_fn(n, expected, |i, j| rows[j][i])
}

impl Problem for FnProblem {
    fn name(&self) -> &str {
        self.name
    }
    fn num_vars(&self) -> usize {
        self.n
    }
    fn num_eq(&self) -> usize {
        self.n_eq
    }
    fn num_ineq(&self) -> usize {
        self.n_ineq
    }
    fn objective(&self, x: &Vector) -> Result<f64, EvalError> {
        Ok((self.f)(x.as_slice()))
    }
    fn eq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        Ok(Vector::from_vec((self.h)(x.as_slice())))
    }
    fn ineq_constraints(&self, x: &Vector) -> Result<Vector, EvalError> {
        Ok(Vector::from_vec((self.c)(x.as_slice())))
    }
    fn objective_gradient(&self, x: &Vector) -> Result<Vector, EvalError> {
        Ok(Vector::from_vec((self.grad_f)(x.as_slice())))
    }
    fn eq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        Ok(columns(self.n, (self.jac_h)(x.as_slice()), self.n_eq))
    }
    fn ineq_jacobian(&self, x: &Vector) -> Result<Matrix, EvalError> {
        Ok(columns(self.n, (self.jac_c)(x.as_slice()), self.n_ineq))
    }
    fn standard_start(&self) -> Vector {
        Vector::from_column_slice(&self.start)
    }
}
