//! Normal and tangential steps.
//!
//! The normal step `p` approximately minimizes
//!
//! ```text
//! q^N(d; ρ) = ½ρ dᵀQd + ‖C + ∇Cᵀd‖    s.t.  ‖Rd‖ <= ξ ‖R⁻¹∇C C‖
//! ```
//!
//! and the tangential step `d` solves the equality-constrained QP
//!
//! ```text
//! min ∇Fᵀd + ½ dᵀQd    s.t.  ∇Cᵀ(d - p) = 0
//! ```
//!
//! by eliminating the slack blocks, which leaves a small system in `d_x`.

use nalgebra::linalg::{Cholesky, SymmetricEigen};

use crate::error::StepError;
use crate::model::{Matrix, Vector};
use crate::relax::{BarrierParams, ModelHessian, Multipliers, RelaxPoint, Scaling};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalStepResult {
    pub p: Vector,
    /// `‖C‖ - q^N(p; ρ)`.
    pub model_reduction: f64,
    pub eta: f64,
    /// Guaranteed lower bound on `model_reduction` from the Cauchy point.
    pub cauchy_reduction: f64,
    /// `‖C‖`.
    pub c_norm: f64,
    /// `‖R⁻¹∇C C‖²`.
    pub scaled_grad_sq: f64,
    /// `gᵀQg` with `g = R⁻²∇C C`.
    pub cauchy_curvature: f64,
}

impl NormalStepResult {
    fn zero(dim: usize) -> Self {
        Self {
            p: Vector::zeros(dim),
            model_reduction: 0.0,
            eta: 0.0,
            cauchy_reduction: 0.0,
            c_norm: 0.0,
            scaled_grad_sq: 0.0,
            cauchy_curvature: 0.0,
        }
    }

    /// Right-hand side of the quarter bound, `¼ min(1,η) ‖R⁻¹∇C C‖² / ‖C‖`.
    pub fn quarter_bound(&self) -> f64 {
        if self.c_norm == 0.0 {
            0.0
        } else {
            0.25 * self.eta.min(1.0) * self.scaled_grad_sq / self.c_norm
        }
    }
}

/// `q^N(d; ρ) = ½ρ dᵀQd + ‖C + Jᵀd‖`.
pub fn normal_model(c: &Vector, jac: &Matrix, q: &ModelHessian, rho: f64, d: &Vector) -> f64 {
    0.5 * rho * q.quad_form(d) + (c + jac.tr_mul(d)).norm()
}

const GOLDEN_ITERS: usize = 90;

/// Minimizes a convex function on `[lo, hi]` by golden-section search and
/// returns `(argmin, value)`. Endpoints are always compared.
fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for e in [lo, hi] {
        let fe = f(e);
        if fe < best.1 {
            best = (e, fe);
        }
    }
    best
}

/// Minimum-norm Gauss-Newton point `-R⁻²J (JᵀR⁻²J)⁺ C` of the linearized
/// residual in the `R` metric.
fn gauss_newton_point(c: &Vector, jac: &Matrix, scaling: &Scaling) -> Option<Vector> {
    let mut scaled = jac.clone();
    for col in 0..scaled.ncols() {
        let v = scaling.apply_inv(&scaled.column(col).into_owned());
        scaled.set_column(col, &v);
    }
    let svd = scaled.transpose().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return None;
    }
    let tol = smax * 1e-12 * (scaled.nrows().max(scaled.ncols()) as f64);
    let w = svd.solve(&(-c), tol).ok()?;
    let p = scaling.apply_inv(&w);
    p.iter().all(|v| v.is_finite()).then_some(p)
}

/// Approximate solution of the normal subproblem. Returns the best of the
/// Cauchy point, the minimizer along the steepest-descent ray and the
/// minimizer along the dogleg segment from the Cauchy point toward the
/// Gauss-Newton point, all inside the trust region.
pub fn normal_step(
    c: &Vector,
    jac: &Matrix,
    scaling: &Scaling,
    q: &ModelHessian,
    rho: f64,
    xi: f64,
) -> Result<NormalStepResult, StepError> {
    let dim = jac.nrows();
    let c_norm = c.norm();
    if c_norm == 0.0 {
        return Ok(NormalStepResult::zero(dim));
    }
    let jc = jac * c;
    let u = scaling.apply_inv(&jc);
    let scaled_grad_sq = u.norm_squared();
    let g = scaling.apply_inv_sq(&jc);
    let w = jac.tr_mul(&g);
    let w_sq = w.norm_squared();
    if scaled_grad_sq == 0.0 || w_sq == 0.0 {
        return Err(StepError::DegenerateNormal);
    }
    let eta = scaled_grad_sq / w_sq;
    let cauchy_curvature = q.quad_form(&g);
    let radius = xi * scaled_grad_sq.sqrt();
    let model = |d: &Vector| normal_model(c, jac, q, rho, d);

    let step_len = eta.min(1.0);
    let cauchy = &g * -step_len;
    let mut best_val = model(&cauchy);
    let mut best = cauchy.clone();

    // Along -αg: ½ρα²gᵀQg + sqrt(‖C‖² - 2α‖u‖² + α²‖w‖²) for α in [0, ξ].
    let ray = |a: f64| {
        let lin = (c_norm * c_norm - 2.0 * a * scaled_grad_sq + a * a * w_sq).max(0.0);
        0.5 * rho * a * a * cauchy_curvature + lin.sqrt()
    };
    let (alpha, _) = golden_min(ray, 0.0, xi);
    let cand = &g * -alpha;
    let val = model(&cand);
    if val < best_val {
        best_val = val;
        best = cand;
    }

    if let Some(gn) = gauss_newton_point(c, jac, scaling) {
        let dir = &gn - &cauchy;
        let r_dir = scaling.apply(&dir);
        let r_cau = scaling.apply(&cauchy);
        let a2 = r_dir.norm_squared();
        if a2 > 0.0 {
            // Largest σ in [0,1] with ‖R(p^C + σ·dir)‖ <= radius.
            let b = r_cau.dot(&r_dir);
            let cc = r_cau.norm_squared() - radius * radius;
            let disc = (b * b - a2 * cc).max(0.0);
            let sigma_max = ((-b + disc.sqrt()) / a2).clamp(0.0, 1.0);
            let seg = |sig: f64| model(&(&cauchy + &dir * sig));
            let (sig, val) = golden_min(seg, 0.0, sigma_max);
            if val < best_val {
                best_val = val;
                best = &cauchy + &dir * sig;
            }
        }
    }

    let cauchy_reduction =
        0.5 * step_len * scaled_grad_sq / c_norm - 0.5 * rho * step_len * cauchy_curvature;
    Ok(NormalStepResult {
        p: best,
        model_reduction: c_norm - best_val,
        eta,
        cauchy_reduction,
        c_norm,
        scaled_grad_sq,
        cauchy_curvature,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentialStepResult {
    pub d: Vector,
    pub multipliers: Multipliers,
    /// `q(d) = ∇Fᵀd + ½dᵀQd`.
    pub q_value: f64,
    /// Diagonal shift added to the reduced Hessian (0 when none was needed).
    pub regularization: f64,
}

/// `∇Fᵀd + ½dᵀQd`.
pub fn qp_objective(grad: &Vector, q: &ModelHessian, d: &Vector) -> f64 {
    grad.dot(d) + 0.5 * q.quad_form(d)
}

const MAX_REG_DOUBLINGS: usize = 20;

fn factor_with_shift(h: &Matrix, b_norm: f64) -> Result<(Cholesky<f64, nalgebra::Dyn>, f64), StepError> {
    let n = h.nrows();
    let scale = h.diagonal().amax().max(f64::MIN_POSITIVE);
    // Pivots this small relative to the diagonal mean the factor is useless.
    let usable = |m: Matrix| {
        Cholesky::new(m).filter(|ch| {
            let l = ch.l_dirty();
            (0..n).all(|i| l[(i, i)] * l[(i, i)] > 1e-14 * scale)
        })
    };
    if let Some(ch) = usable(h.clone()) {
        return Ok((ch, 0.0));
    }
    let mut shift = 1e-8 * if b_norm > 0.0 { b_norm } else { 1.0 };
    for _ in 0..MAX_REG_DOUBLINGS {
        if let Some(ch) = usable(h + Matrix::identity(n, n) * shift) {
            return Ok((ch, shift));
        }
        shift *= 2.0;
    }
    Err(StepError::Factorization {
        attempts: MAX_REG_DOUBLINGS + 1,
    })
}

/// Solves `S x = rhs` for symmetric positive semidefinite `S` in the
/// least-squares, minimum-norm sense.
fn psd_pinv_solve(s: Matrix, rhs: &Vector) -> Vector {
    if s.nrows() == 0 {
        return Vector::zeros(0);
    }
    let eig = SymmetricEigen::new(s);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = lmax * 1e-12 * eig.eigenvalues.len() as f64;
    let proj = eig.eigenvectors.tr_mul(rhs);
    let scaled = Vector::from_fn(proj.len(), |i, _| {
        let l = eig.eigenvalues[i];
        if l > tol {
            proj[i] / l
        } else {
            0.0
        }
    });
    &eig.eigenvectors * scaled
}

/// Tangential step by elimination. With `a = d_x - p_x` and `G = ∇cᵀ`:
///
/// ```text
/// d_t = p_t - G a,   d_s = p_s + (Y/(τZ)) G a,   ∇hᵀa = 0
/// ```
///
/// The reduced Hessian is `B + Gᵀ diag(μ/z²) G`.
pub fn tangential_step(
    rp: &RelaxPoint,
    bp: BarrierParams,
    q: &ModelHessian,
    grad: &Vector,
    p: &Vector,
) -> Result<TangentialStepResult, StepError> {
    let derivs = rp
        .derivatives()
        .expect("tangential step needs derivatives at the current point");
    let (n, m) = (rp.n(), rp.n_ineq());
    let jac_c = &derivs.jac_c;
    let jac_h = &derivs.jac_h;

    // Reduced Hessian and gradient.
    let mut h = q.b().clone();
    for j in 0..m {
        let w = bp.mu / (rp.z[j] * rp.z[j]);
        let col = jac_c.column(j);
        h.ger(w, &col, &col, 1.0);
    }
    let full_grad = grad + q.apply(p);
    let ratio = Vector::from_fn(m, |j, _| rp.y[j] / (bp.tau * rp.z[j]));
    let gt = full_grad.rows(n, m).into_owned();
    let gs = full_grad.rows(n + m, m).into_owned();
    let red_grad = full_grad.rows(0, n).into_owned() - jac_c * (gt - ratio.component_mul(&gs));

    let b_norm = q.b().norm();
    let (chol, regularization) = factor_with_shift(&h, b_norm)?;

    // a = -H⁻¹(g + Aλ),  (AᵀH⁻¹A) λ = -AᵀH⁻¹g.
    let hinv_g = chol.solve(&red_grad);
    let lambda = if jac_h.ncols() > 0 {
        let hinv_a = chol.solve(jac_h);
        let s = jac_h.tr_mul(&hinv_a);
        let s = (&s + s.transpose()) * 0.5;
        psd_pinv_solve(s, &(-jac_h.tr_mul(&hinv_g)))
    } else {
        Vector::zeros(0)
    };
    let a = if lambda.is_empty() {
        -hinv_g
    } else {
        -chol.solve(&(&red_grad + jac_h * &lambda))
    };

    let ga = jac_c.tr_mul(&a);
    let mut d = p.clone();
    {
        let mut dx = d.rows_mut(0, n);
        dx += &a;
    }
    for j in 0..m {
        d[n + j] -= ga[j];
        d[n + m + j] += ratio[j] * ga[j];
    }

    let resid = grad + q.apply(&d);
    let mut nu = Vector::zeros(m);
    let mut beta = Vector::zeros(m);
    for j in 0..m {
        let sum = rp.z[j] + rp.y[j];
        nu[j] = resid[n + m + j] * sum / (bp.tau * rp.z[j]);
        beta[j] = rp.y[j] / sum * nu[j] - resid[n + j];
    }
    if d.iter().chain(lambda.iter()).chain(nu.iter()).any(|v| !v.is_finite()) {
        return Err(StepError::Factorization { attempts: 1 });
    }
    let q_value = qp_objective(grad, q, &d);
    Ok(TangentialStepResult {
        d,
        multipliers: Multipliers {
            lambda: lambda.as_slice().to_vec(),
            beta: beta.as_slice().to_vec(),
            nu: nu.as_slice().to_vec(),
        },
        q_value,
        regularization,
    })
}

/// Reference solver for the tangential QP: assembles and solves the dense
/// full-space system `[Q J; Jᵀ 0][d; u] = [-∇F; Jᵀp]` by LU. Returns `None`
/// when the system is singular or the dense Hessian is too large.
pub fn dense_tangential_step(
    q: &ModelHessian,
    jac: &Matrix,
    grad: &Vector,
    p: &Vector,
) -> Option<(Vector, Vector)> {
    let qd = q.to_dense()?;
    let (dim, nc) = jac.shape();
    let mut k = Matrix::zeros(dim + nc, dim + nc);
    k.view_mut((0, 0), (dim, dim)).copy_from(&qd);
    k.view_mut((0, dim), (dim, nc)).copy_from(jac);
    k.view_mut((dim, 0), (nc, dim)).copy_from(&jac.transpose());
    let mut rhs = Vector::zeros(dim + nc);
    rhs.rows_mut(0, dim).copy_from(&(-grad));
    rhs.rows_mut(dim, nc).copy_from(&jac.tr_mul(p));
    let sol = k.lu().solve(&rhs)?;
    sol.iter()
        .all(|v| v.is_finite())
        .then(|| (sol.rows(0, dim).into_owned(), sol.rows(dim, nc).into_owned()))
}
