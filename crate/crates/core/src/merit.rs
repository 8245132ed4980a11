//! Merit function, penalty update, backtracking and the dual safeguard.

use crate::error::StepError;
use crate::model::{Matrix, Vector};
use crate::relax::{BarrierParams, ModelHessian, RelaxPoint};
use crate::step::NormalStepResult;

/// `φ(v; ρ) = ρF(v) + ‖C(v)‖`.
pub fn merit(rp: &RelaxPoint, bp: BarrierParams, rho: f64) -> f64 {
    rho * rp.barrier_objective(bp) + rp.relaxed_constraints().norm()
}

/// Predicted slope of the merit function along `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeritSlope {
    /// `π = ρ∇Fᵀd + χ`.
    pub pi: f64,
    /// `χ = ‖C + ∇Cᵀd‖ - ‖C‖`.
    pub chi: f64,
}

pub fn merit_slope(grad: &Vector, c: &Vector, jac: &Matrix, rho: f64, d: &Vector) -> MeritSlope {
    let chi = (c + jac.tr_mul(d)).norm() - c.norm();
    MeritSlope {
        pi: rho * grad.dot(d) + chi,
        chi,
    }
}

/// Penalty values below this are treated as a breakdown.
pub const RHO_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyUpdate {
    pub rho: f64,
    pub halvings: u32,
    pub slope: MeritSlope,
}

/// Everything the penalty conditions need, evaluated once.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyInputs {
    pub c_norm: f64,
    /// `‖C + ∇Cᵀp‖`.
    pub lin_p: f64,
    pub p_qp: f64,
    pub d_qd: f64,
    pub grad_d: f64,
    pub chi: f64,
    pub scaled_grad_sq: f64,
    pub cauchy_curvature: f64,
}

impl PenaltyInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: &Vector,
        jac: &Matrix,
        grad: &Vector,
        q: &ModelHessian,
        normal: &NormalStepResult,
        d: &Vector,
    ) -> Self {
        let c_norm = c.norm();
        Self {
            c_norm,
            lin_p: (c + jac.tr_mul(&normal.p)).norm(),
            p_qp: q.quad_form(&normal.p),
            d_qd: q.quad_form(d),
            grad_d: grad.dot(d),
            chi: (c + jac.tr_mul(d)).norm() - c_norm,
            scaled_grad_sq: normal.scaled_grad_sq,
            cauchy_curvature: normal.cauchy_curvature,
        }
    }

    /// `2ρ‖C‖ gᵀQg / ‖R⁻¹∇C C‖² <= 1`, vacuous when either norm is zero.
    pub fn curvature_condition(&self, rho: f64) -> bool {
        if self.c_norm == 0.0 || self.scaled_grad_sq == 0.0 {
            return true;
        }
        2.0 * rho * self.c_norm * self.cauchy_curvature / self.scaled_grad_sq <= 1.0
    }

    pub fn pi(&self, rho: f64) -> f64 {
        rho * self.grad_d + self.chi
    }

    /// Right-hand side `(1-δ)(q^N(p;ρ) - ‖C‖) - ½ρ dᵀQd`.
    pub fn decrease_target(&self, rho: f64, delta: f64) -> f64 {
        let qn = 0.5 * rho * self.p_qp + self.lin_p;
        (1.0 - delta) * (qn - self.c_norm) - 0.5 * rho * self.d_qd
    }

    /// Slack for roundoff in `χ`, which is a difference of two nearly equal
    /// norms once the linearized residual is tiny.
    fn roundoff(&self, rho: f64) -> f64 {
        4.0 * f64::EPSILON * (self.c_norm + self.lin_p + rho * (self.grad_d.abs() + self.d_qd + self.p_qp))
    }

    pub fn decrease_condition(&self, rho: f64, delta: f64) -> bool {
        self.pi(rho) <= self.decrease_target(rho, delta) + self.roundoff(rho)
    }
}

/// Keeps `prev_rho` if both penalty conditions hold and otherwise halves it
/// until they do.
pub fn update_penalty(prev_rho: f64, inputs: &PenaltyInputs, delta: f64) -> Result<PenaltyUpdate, StepError> {
    let mut rho = prev_rho;
    let mut halvings = 0;
    loop {
        if inputs.curvature_condition(rho) && inputs.decrease_condition(rho, delta) {
            return Ok(PenaltyUpdate {
                rho,
                halvings,
                slope: MeritSlope {
                    pi: inputs.pi(rho),
                    chi: inputs.chi,
                },
            });
        }
        rho *= 0.5;
        halvings += 1;
        if rho < RHO_FLOOR {
            return Err(StepError::TinyPenalty { floor: RHO_FLOOR });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome<T> {
    pub alpha: f64,
    pub merit: f64,
    pub backtracks: usize,
    pub point: T,
}

/// Backtracking over `α ∈ {1, δ, δ², ...}` until
/// `φ(v + αd) - φ(v) <= σαπ`. `trial(α)` returns the merit value and the
/// trial point, or `None` if the point could not be evaluated (treated as a
/// rejection).
pub fn line_search<T>(
    phi0: f64,
    pi: f64,
    sigma: f64,
    delta: f64,
    max_backtracks: usize,
    mut trial: impl FnMut(f64) -> Option<(f64, T)>,
) -> Result<LineSearchOutcome<T>, StepError> {
    let mut alpha = 1.0;
    for backtracks in 0..=max_backtracks {
        if let Some((phi, point)) = trial(alpha) {
            if phi.is_finite() && phi - phi0 <= sigma * alpha * pi {
                return Ok(LineSearchOutcome {
                    alpha,
                    merit: phi,
                    backtracks,
                    point,
                });
            }
        }
        alpha *= delta;
    }
    Err(StepError::LineSearch {
        backtracks: max_backtracks,
        slope: pi,
    })
}

/// `s_j = ŝ_j` if `t_j <= 0`, else `min(ŝ_j, μ/t_j)`.
pub fn dual_safeguard(t: &Vector, s_hat: &Vector, mu: f64) -> Vector {
    assert_eq!(t.len(), s_hat.len());
    Vector::from_fn(t.len(), |j, _| {
        if t[j] <= 0.0 {
            s_hat[j]
        } else {
            s_hat[j].min(mu / t[j])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relax::{relax_pair, PointDerivatives, Scaling};
    use crate::step::{normal_step, tangential_step};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bp() -> BarrierParams {
        BarrierParams::new(1.0, 1.0)
    }

    #[test]
    fn merit_zero_when_everything_vanishes() {
        // t = s = 1, μ = τ = 1: z = 1, C = (c+t, z-t) = 0.
        let rp = RelaxPoint::from_parts(
            Vector::zeros(1),
            Vector::from_vec(vec![1.0]),
            Vector::from_vec(vec![1.0]),
            0.0,
            Vector::zeros(0),
            Vector::from_vec(vec![-1.0]),
            bp(),
        );
        assert!(merit(&rp, bp(), 3.0).abs() < 1e-15);
    }

    #[test]
    fn merit_arithmetic() {
        // m = 0, f = 2.5, h = (3): φ = 2.5 + 3.
        let rp = RelaxPoint::from_parts(
            Vector::zeros(1),
            Vector::zeros(0),
            Vector::zeros(0),
            2.5,
            Vector::from_vec(vec![3.0]),
            Vector::zeros(0),
            bp(),
        );
        assert_eq!(merit(&rp, bp(), 1.0), 5.5);
    }

    #[test]
    fn slope_of_zero_step() {
        let s = merit_slope(
            &Vector::from_vec(vec![1.0, 2.0]),
            &Vector::from_vec(vec![0.3]),
            &Matrix::from_column_slice(2, 1, &[1.0, -1.0]),
            2.0,
            &Vector::zeros(2),
        );
        assert_eq!((s.pi, s.chi), (0.0, 0.0));
    }

    #[test]
    fn safeguard_values() {
        let t = Vector::from_vec(vec![2.0, -1.0, 0.0]);
        let s = Vector::from_vec(vec![1.0, 7.0, -3.0]);
        let out = dual_safeguard(&t, &s, 0.1);
        assert_eq!(out.as_slice(), &[0.05, 7.0, -3.0]);
    }

    #[test]
    fn line_search_accepts_full_step_on_quadratic() {
        // φ(α) = (1-α)², slope -2 at 0.
        let out = line_search(1.0, -2.0, 1e-4, 0.5, 60, |a| Some(((1.0 - a).powi(2), a))).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.backtracks, 0);
    }

    #[test]
    fn line_search_halves_on_cubic_profile() {
        // φ(α) = 1 - α + 1.5α³: φ(1) = 1.5 rejected, φ(0.5) = 0.6875 accepted.
        let phi = |a: f64| 1.0 - a + 1.5 * a.powi(3);
        let out = line_search(1.0, -1.0, 1e-4, 0.5, 60, |a| Some((phi(a), ()))).unwrap();
        assert_eq!(out.alpha, 0.5);
        assert!(out.merit - 1.0 <= -(1e-4 * 0.5));
    }

    #[test]
    fn line_search_rejects_failed_evaluations() {
        let out = line_search(1.0, -1.0, 1e-4, 0.5, 60, |a| (a < 0.3).then_some((0.0, ()))).unwrap();
        assert_eq!(out.alpha, 0.25);
    }

    #[test]
    fn line_search_gives_up() {
        let err = line_search(0.0, -1.0, 1e-4, 0.5, 60, |_| Some((1.0, ()))).unwrap_err();
        assert!(matches!(err, StepError::LineSearch { backtracks: 60, .. }));
    }

    fn inputs(grad_d: f64, chi: f64) -> PenaltyInputs {
        PenaltyInputs {
            c_norm: 1.0,
            lin_p: 0.5,
            p_qp: 0.0,
            d_qd: 0.0,
            grad_d,
            chi,
            scaled_grad_sq: 1.0,
            cauchy_curvature: 0.0,
        }
    }

    #[test]
    fn penalty_kept_when_conditions_hold() {
        let up = update_penalty(1.0, &inputs(-1.0, -0.5), 0.5).unwrap();
        assert_eq!(up.rho, 1.0);
        assert_eq!(up.halvings, 0);
    }

    #[test]
    fn penalty_halved_once() {
        // Target = 0.5 (0.5 - 1) = -0.25, π(ρ) = 0.3ρ - 0.5:
        // ρ = 1 gives -0.2 (fails), ρ = 0.5 gives -0.35 (holds).
        let up = update_penalty(1.0, &inputs(0.3, -0.5), 0.5).unwrap();
        assert_eq!(up.rho, 0.5);
        assert!(up.slope.pi <= inputs(0.3, -0.5).decrease_target(0.5, 0.5));
    }

    #[test]
    fn penalty_curvature_condition() {
        let mut inp = inputs(-1.0, -0.5);
        inp.cauchy_curvature = 2.0;
        // 2ρ·1·2/1 <= 1 needs ρ <= 0.25.
        assert_eq!(update_penalty(1.0, &inp, 0.5).unwrap().rho, 0.25);
    }

    #[test]
    fn penalty_breakdown() {
        // χ > 0 with ‖C‖ > 0 can never satisfy the decrease condition.
        let err = update_penalty(1.0, &inputs(0.0, 1.0), 0.5).unwrap_err();
        assert_eq!(err, StepError::TinyPenalty { floor: RHO_FLOOR });
    }

    #[test]
    fn feasible_slope_bound() {
        // ‖C‖ = 0: π <= -½ρ dᵀQd for the tangential step.
        let b = BarrierParams::new(0.1, 1.0);
        let mut rp = RelaxPoint::from_parts(
            Vector::zeros(2),
            Vector::zeros(0),
            Vector::zeros(0),
            0.0,
            Vector::zeros(0),
            Vector::zeros(0),
            b,
        );
        rp.set_derivatives(PointDerivatives {
            grad_f: Vector::from_vec(vec![1.0, -2.0]),
            jac_h: Matrix::zeros(2, 0),
            jac_c: Matrix::zeros(2, 0),
        });
        let q = ModelHessian::new(Matrix::identity(2, 2) * 2.0, &rp, b);
        let g = rp.barrier_gradient(b);
        let ts = tangential_step(&rp, b, &q, &g, &Vector::zeros(2)).unwrap();
        let s = merit_slope(&g, &Vector::zeros(0), &rp.relaxed_jacobian(b), 3.0, &ts.d);
        assert!(s.pi <= -0.5 * 3.0 * q.quad_form(&ts.d) + 1e-12);
    }

    fn random_point(rng: &mut ChaCha8Rng, b: BarrierParams) -> (RelaxPoint, Vector) {
        // f = ½‖x‖² + x₀, h = x₀ x₁ - 1, c = x₀² - x₁.
        let x = Vector::from_fn(2, |_, _| rng.gen_range(-2.0..2.0));
        let t = Vector::from_fn(1, |_, _| rng.gen_range(-2.0..2.0));
        let s = Vector::from_fn(1, |_, _| rng.gen_range(-2.0..2.0));
        let d = Vector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
        (eval_point(&x, &t, &s, b), d)
    }

    fn eval_point(x: &Vector, t: &Vector, s: &Vector, b: BarrierParams) -> RelaxPoint {
        let f = 0.5 * x.norm_squared() + x[0];
        let h = Vector::from_vec(vec![x[0] * x[1] - 1.0]);
        let c = Vector::from_vec(vec![x[0] * x[0] - x[1]]);
        let mut rp = RelaxPoint::from_parts(x.clone(), t.clone(), s.clone(), f, h, c, b);
        rp.set_derivatives(PointDerivatives {
            grad_f: Vector::from_vec(vec![x[0] + 1.0, x[1]]),
            jac_h: Matrix::from_column_slice(2, 1, &[x[1], x[0]]),
            jac_c: Matrix::from_column_slice(2, 1, &[2.0 * x[0], -1.0]),
        });
        rp
    }

    fn shifted(rp: &RelaxPoint, d: &Vector, a: f64, b: BarrierParams) -> RelaxPoint {
        let x = &rp.x + d.rows(0, 2) * a;
        let t = &rp.t + d.rows(2, 1) * a;
        let s = &rp.s + d.rows(3, 1) * a;
        eval_point(&x, &t, &s, b)
    }

    #[test]
    fn slope_bounds_difference_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let b = BarrierParams::new(rng.gen_range(0.01..1.0), rng.gen_range(0.1..2.0));
            let rho = rng.gen_range(0.01..10.0);
            let (rp, d) = random_point(&mut rng, b);
            if rp.relaxed_constraints().norm() == 0.0 {
                continue;
            }
            let s = merit_slope(&rp.barrier_gradient(b), &rp.relaxed_constraints(), &rp.relaxed_jacobian(b), rho, &d);
            let phi0 = merit(&rp, b, rho);
            let a = 1e-6;
            let q = (merit(&shifted(&rp, &d, a, b), b, rho) - phi0) / a;
            assert!(q <= s.pi + 1e-3 * d.norm(), "{q} vs {}", s.pi);
        }
    }

    #[test]
    fn full_step_pipeline_decreases_merit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let b = BarrierParams::new(0.1, 1.0);
            let (rp, _) = random_point(&mut rng, b);
            let q = ModelHessian::new(Matrix::identity(2, 2), &rp, b);
            let (c, jac, g) = (rp.relaxed_constraints(), rp.relaxed_jacobian(b), rp.barrier_gradient(b));
            let ns = normal_step(&c, &jac, &Scaling::new(2, 1, b.tau), &q, 1.0, 2.0).unwrap();
            let ts = tangential_step(&rp, b, &q, &g, &ns.p).unwrap();
            let inp = PenaltyInputs::new(&c, &jac, &g, &q, &ns, &ts.d);
            let up = update_penalty(1.0, &inp, 0.5).unwrap();
            assert!(up.slope.pi < 0.0);
            let phi0 = merit(&rp, b, up.rho);
            let out = line_search(phi0, up.slope.pi, 1e-4, 0.5, 60, |a| {
                let p = shifted(&rp, &ts.d, a, b);
                Some((merit(&p, b, up.rho), p))
            })
            .unwrap();
            assert!(out.merit - phi0 <= 1e-4 * out.alpha * up.slope.pi);
        }
    }

    proptest! {
        #[test]
        fn safeguard_keeps_z_above_t(t in -10f64..10.0, s in -10f64..10.0, lmu in -8f64..0.0, ltau in -6f64..1.0) {
            let mu = 10f64.powf(lmu);
            let b = BarrierParams::new(mu, 10f64.powf(ltau));
            let sv = dual_safeguard(&Vector::from_vec(vec![t]), &Vector::from_vec(vec![s]), mu);
            let (z, _) = relax_pair(t, sv[0], b);
            prop_assert!(z - t >= -1e-12 * t.abs().max(1.0));
        }

        #[test]
        fn halving_discipline(grad_d in -2f64..2.0, chi in -1f64..0.0, lrho in -3f64..3.0) {
            let prev = 10f64.powf(lrho);
            if let Ok(up) = update_penalty(prev, &inputs(grad_d, chi), 0.5) {
                prop_assert_eq!(up.rho, prev * 0.5f64.powi(up.halvings as i32));
            }
        }
    }
}
