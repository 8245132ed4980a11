//! The relaxation transform and the barrier relaxation problem built on it.
//!
//! For barrier parameter `μ > 0` and scaling parameter `τ > 0`, each pair
//! `(t_j, s_j)` maps to
//!
//! ```text
//! z_j = (sqrt((τ s_j - t_j)^2 + 4τμ) - (τ s_j - t_j)) / 2
//! y_j = (sqrt((τ s_j - t_j)^2 + 4τμ) + (τ s_j - t_j)) / 2
//! ```
//!
//! so that `z_j, y_j > 0`, `z_j y_j = τμ` and `z_j - y_j = t_j - τ s_j` hold
//! for *any* real `(t_j, s_j)`. `z_j = t_j` exactly when `t_j > 0`, `s_j > 0`
//! and `t_j s_j = μ`.
//!
//! The relaxation problem in `v = (x, t, s)` is
//!
//! ```text
//! min F(v) = f(x) - μ Σ ln z_j   s.t.   C(v) = (h(x), c(x) + t, z - t) = 0
//! ```

use serde::Serialize;

use crate::error::EvalError;
use crate::model::{Matrix, Problem, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierParams {
    pub mu: f64,
    pub tau: f64,
}

impl BarrierParams {
    pub fn new(mu: f64, tau: f64) -> Self {
        debug_assert!(mu > 0.0 && tau > 0.0);
        Self { mu, tau }
    }
}

/// `(z_j, y_j)` for a single pair. The larger root comes from the explicit
/// formula and the smaller one from `τμ / larger`, which keeps `z y = τμ`
/// to roundoff even when `|τs - t| >> sqrt(τμ)`.
#[inline]
pub fn relax_pair(t: f64, s: f64, bp: BarrierParams) -> (f64, f64) {
    let gap = bp.tau * s - t;
    let prod = bp.tau * bp.mu;
    let root = gap.hypot(2.0 * prod.sqrt());
    if gap >= 0.0 {
        let y = 0.5 * (root + gap);
        (prod / y, y)
    } else {
        let z = 0.5 * (root - gap);
        (z, prod / z)
    }
}

pub fn eval_zy(t: &Vector, s: &Vector, bp: BarrierParams) -> (Vector, Vector) {
    assert_eq!(t.len(), s.len());
    let mut z = Vector::zeros(t.len());
    let mut y = Vector::zeros(t.len());
    for j in 0..t.len() {
        let (zj, yj) = relax_pair(t[j], s[j], bp);
        z[j] = zj;
        y[j] = yj;
    }
    (z, y)
}

/// Diagonals of the four Jacobian blocks of `(z, y)` with respect to `(t, s)`.
/// All cross terms are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ZyDerivatives {
    pub dz_dt: Vector,
    pub dy_dt: Vector,
    pub dz_ds: Vector,
    pub dy_ds: Vector,
}

pub fn eval_zy_derivatives(z: &Vector, y: &Vector, bp: BarrierParams) -> ZyDerivatives {
    let sum = z + y;
    let dz_dt = z.component_div(&sum);
    let dy_dt = -y.component_div(&sum);
    let dz_ds = &dz_dt * -bp.tau;
    let dy_ds = &dy_dt * -bp.tau;
    ZyDerivatives {
        dz_dt,
        dy_dt,
        dz_ds,
        dy_ds,
    }
}

/// `dz_j/dμ = dy_j/dμ = τ / (z_j + y_j)`.
pub fn eval_zy_mu_derivative(z: &Vector, y: &Vector, bp: BarrierParams) -> Vector {
    (z + y).map(|v| bp.tau / v)
}

/// Multipliers `w = (λ, β, ν)` for the blocks `h = 0`, `c + t = 0`, `z - t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(n_eq: usize, n_ineq: usize) -> Self {
        Self {
            lambda: vec![0.0; n_eq],
            beta: vec![0.0; n_ineq],
            nu: vec![0.0; n_ineq],
        }
    }

    pub fn lambda(&self) -> Vector {
        Vector::from_column_slice(&self.lambda)
    }

    pub fn beta(&self) -> Vector {
        Vector::from_column_slice(&self.beta)
    }

    pub fn nu(&self) -> Vector {
        Vector::from_column_slice(&self.nu)
    }
}

/// First derivatives of the original problem at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDerivatives {
    pub grad_f: Vector,
    /// `n x m_e`, columns are `∇h_i`.
    pub jac_h: Matrix,
    /// `n x m`, columns are `∇c_j`.
    pub jac_c: Matrix,
}

impl PointDerivatives {
    pub fn evaluate<P: Problem + ?Sized>(p: &P, x: &Vector) -> Result<Self, EvalError> {
        let grad_f = p.objective_gradient(x)?;
        let jac_h = p.eq_jacobian(x)?;
        let jac_c = p.ineq_jacobian(x)?;
        if grad_f.iter().chain(jac_h.iter()).chain(jac_c.iter()).any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite { evaluator: "derivatives" });
        }
        Ok(Self {
            grad_f,
            jac_h,
            jac_c,
        })
    }
}

/// An extended iterate `v = (x, t, s)` with cached problem values and the
/// relaxation transform evaluated at the parameters it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxPoint {
    pub x: Vector,
    pub t: Vector,
    pub s: Vector,
    pub z: Vector,
    pub y: Vector,
    pub f: f64,
    pub h: Vector,
    pub c: Vector,
    derivs: Option<PointDerivatives>,
}

impl RelaxPoint {
    /// Evaluates `f, h, c` at `x` (no derivatives).
    pub fn evaluate<P: Problem + ?Sized>(
        p: &P,
        x: Vector,
        t: Vector,
        s: Vector,
        bp: BarrierParams,
    ) -> Result<Self, EvalError> {
        let f = p.objective(&x)?;
        if !f.is_finite() {
            return Err(EvalError::NonFinite { evaluator: "objective" });
        }
        let h = p.eq_constraints(&x)?;
        if h.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite {
                evaluator: "equality constraints",
            });
        }
        let c = p.ineq_constraints(&x)?;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite {
                evaluator: "inequality constraints",
            });
        }
        Ok(Self::from_parts(x, t, s, f, h, c, bp))
    }

    pub fn from_parts(
        x: Vector,
        t: Vector,
        s: Vector,
        f: f64,
        h: Vector,
        c: Vector,
        bp: BarrierParams,
    ) -> Self {
        assert_eq!(t.len(), c.len());
        assert_eq!(s.len(), c.len());
        let (z, y) = eval_zy(&t, &s, bp);
        Self {
            x,
            t,
            s,
            z,
            y,
            f,
            h,
            c,
            derivs: None,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn n_eq(&self) -> usize {
        self.h.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.c.len()
    }

    pub fn derivatives(&self) -> Option<&PointDerivatives> {
        self.derivs.as_ref()
    }

    pub fn set_derivatives(&mut self, d: PointDerivatives) {
        assert_eq!(d.grad_f.len(), self.n());
        assert_eq!(d.jac_h.shape(), (self.n(), self.n_eq()));
        assert_eq!(d.jac_c.shape(), (self.n(), self.n_ineq()));
        self.derivs = Some(d);
    }

    pub fn evaluate_derivatives<P: Problem + ?Sized>(&mut self, p: &P) -> Result<(), EvalError> {
        let d = PointDerivatives::evaluate(p, &self.x)?;
        self.set_derivatives(d);
        Ok(())
    }

    fn derivs(&self) -> &PointDerivatives {
        self.derivs
            .as_ref()
            .expect("derivatives requested at a point where they were not evaluated")
    }

    /// Recomputes `z, y` after a parameter change.
    pub fn refresh(&mut self, bp: BarrierParams) {
        let (z, y) = eval_zy(&self.t, &self.s, bp);
        self.z = z;
        self.y = y;
    }

    /// Replaces the dual block `s` and refreshes `z, y`.
    pub fn set_duals(&mut self, s: Vector, bp: BarrierParams) {
        assert_eq!(s.len(), self.n_ineq());
        self.s = s;
        self.refresh(bp);
    }

    /// Stacked `v = (x, t, s)`.
    pub fn stacked(&self) -> Vector {
        let (n, m) = (self.n(), self.n_ineq());
        let mut v = Vector::zeros(n + 2 * m);
        v.rows_mut(0, n).copy_from(&self.x);
        v.rows_mut(n, m).copy_from(&self.t);
        v.rows_mut(n + m, m).copy_from(&self.s);
        v
    }

    /// `F(v) = f(x) - μ Σ ln z_j`.
    pub fn barrier_objective(&self, bp: BarrierParams) -> f64 {
        self.f - bp.mu * self.z.iter().map(|z| z.ln()).sum::<f64>()
    }

    /// `C(v) = (h, c + t, z - t)` in that block order.
    pub fn relaxed_constraints(&self) -> Vector {
        let (me, m) = (self.n_eq(), self.n_ineq());
        let mut out = Vector::zeros(me + 2 * m);
        out.rows_mut(0, me).copy_from(&self.h);
        out.rows_mut(me, m).copy_from(&(&self.c + &self.t));
        out.rows_mut(me + m, m).copy_from(&(&self.z - &self.t));
        out
    }

    /// `∇F(v) = (∇f, -μ/(z+y), τμ/(z+y))`.
    pub fn barrier_gradient(&self, bp: BarrierParams) -> Vector {
        let d = self.derivs();
        let (n, m) = (self.n(), self.n_ineq());
        let mut g = Vector::zeros(n + 2 * m);
        g.rows_mut(0, n).copy_from(&d.grad_f);
        for j in 0..m {
            let w = bp.mu / (self.z[j] + self.y[j]);
            g[n + j] = -w;
            g[n + m + j] = bp.tau * w;
        }
        g
    }

    /// Dense `∇C(v)`, shape `(n+2m) x (m_e+2m)`:
    ///
    /// ```text
    /// [ ∇h  ∇c   0            ]
    /// [ 0   I   -(Z+Y)^-1 Y   ]
    /// [ 0   0   -τ (Z+Y)^-1 Z ]
    /// ```
    pub fn relaxed_jacobian(&self, bp: BarrierParams) -> Matrix {
        let d = self.derivs();
        let (n, me, m) = (self.n(), self.n_eq(), self.n_ineq());
        let mut j = Matrix::zeros(n + 2 * m, me + 2 * m);
        j.view_mut((0, 0), (n, me)).copy_from(&d.jac_h);
        j.view_mut((0, me), (n, m)).copy_from(&d.jac_c);
        for k in 0..m {
            let sum = self.z[k] + self.y[k];
            j[(n + k, me + k)] = 1.0;
            j[(n + k, me + m + k)] = -self.y[k] / sum;
            j[(n + m + k, me + m + k)] = -bp.tau * self.z[k] / sum;
        }
        j
    }
}

/// The diagonal scaling `R = diag(1, ..., 1, τ, ..., τ)` with `n + m` ones
/// followed by `m` copies of `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    unit: usize,
    m: usize,
    tau: f64,
}

impl Scaling {
    pub fn new(n: usize, m: usize, tau: f64) -> Self {
        Self { unit: n + m, m, tau }
    }

    pub fn dim(&self) -> usize {
        self.unit + self.m
    }

    fn scale_tail(&self, v: &Vector, factor: f64) -> Vector {
        assert_eq!(v.len(), self.dim());
        let mut out = v.clone();
        out.rows_mut(self.unit, self.m).scale_mut(factor);
        out
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        self.scale_tail(v, self.tau)
    }

    pub fn apply_inv(&self, v: &Vector) -> Vector {
        self.scale_tail(v, 1.0 / self.tau)
    }

    pub fn apply_inv_sq(&self, v: &Vector) -> Vector {
        self.scale_tail(v, 1.0 / (self.tau * self.tau))
    }
}

/// The model Hessian `Q` of the relaxation Lagrangian with the x-block
/// replaced by a positive definite `B`:
///
/// ```text
/// dᵀQd = d_xᵀ B d_x + Σ_j μ/(z_j+y_j)² (d_t,j - τ d_s,j)²
/// ```
///
/// Kept in factored form; the `(t, s)` block is a sum of rank-one terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelHessian {
    b: Matrix,
    weights: Vector,
    tau: f64,
}

/// Largest `n + 2m` for which [`ModelHessian::to_dense`] materializes.
pub const DENSE_LIMIT: usize = 200;

impl ModelHessian {
    pub fn new(b: Matrix, rp: &RelaxPoint, bp: BarrierParams) -> Self {
        assert_eq!(b.shape(), (rp.n(), rp.n()));
        let weights = (&rp.z + &rp.y).map(|v| bp.mu / (v * v));
        Self {
            b,
            weights,
            tau: bp.tau,
        }
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.n() + 2 * self.m()
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// `μ/(z_j+y_j)²`.
    pub fn weights(&self) -> &Vector {
        &self.weights
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, d: &Vector) -> Vector {
        let (n, m) = (self.n(), self.m());
        assert_eq!(d.len(), self.dim());
        let mut out = Vector::zeros(d.len());
        out.rows_mut(0, n).copy_from(&(&self.b * d.rows(0, n)));
        for j in 0..m {
            let w = self.weights[j] * (d[n + j] - self.tau * d[n + m + j]);
            out[n + j] = w;
            out[n + m + j] = -self.tau * w;
        }
        out
    }

    pub fn quad_form(&self, d: &Vector) -> f64 {
        let (n, m) = (self.n(), self.m());
        assert_eq!(d.len(), self.dim());
        let dx = d.rows(0, n);
        let mut q = dx.dot(&(&self.b * dx));
        for j in 0..m {
            let r = d[n + j] - self.tau * d[n + m + j];
            q += self.weights[j] * r * r;
        }
        q
    }

    /// `uᵀQv`.
    pub fn bilinear(&self, u: &Vector, v: &Vector) -> f64 {
        u.dot(&self.apply(v))
    }

    /// Dense copy, only for `n + 2m <= DENSE_LIMIT`.
    pub fn to_dense(&self) -> Option<Matrix> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return None;
        }
        let (n, m) = (self.n(), self.m());
        let mut q = Matrix::zeros(dim, dim);
        q.view_mut((0, 0), (n, n)).copy_from(&self.b);
        for j in 0..m {
            let (it, is) = (n + j, n + m + j);
            let w = self.weights[j];
            q[(it, it)] = w;
            q[(it, is)] = -self.tau * w;
            q[(is, it)] = -self.tau * w;
            q[(is, is)] = self.tau * self.tau * w;
        }
        Some(q)
    }
}
