//! The outer/inner iteration: parameter updates, residual tests and the
//! final classification.

use std::cell::Cell;

use serde::Serialize;

use crate::bfgs::BfgsState;
use crate::error::{ConfigError, EvalError, StepError};
use crate::merit::{dual_safeguard, line_search, merit, update_penalty, PenaltyInputs};
use crate::model::{infeasibility, Matrix, Problem, Vector};
use crate::relax::{BarrierParams, ModelHessian, Multipliers, RelaxPoint, Scaling};
use crate::step::{normal_step, tangential_step, NormalStepResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub mu0: f64,
    pub tau0: f64,
    /// Backtracking factor, also used in the penalty decrease condition.
    pub delta: f64,
    /// Sufficient-decrease constant of the line search.
    pub sigma: f64,
    /// Outer loop stops once `μ <= eps` or `τ <= eps`.
    pub eps: f64,
    /// Trust-region factor of the normal subproblem.
    pub xi: f64,
    /// The r-test fires when `‖r‖∞ <= mu_accept_factor · μ`.
    pub mu_accept_factor: f64,
    pub mu_exponent: f64,
    pub mu_halve: f64,
    pub mu_floor: f64,
    pub tau_factor: f64,
    /// The g-test is skipped when `‖C‖` is below this.
    pub g_floor: f64,
    /// Budget on tangential QP solves over the whole run.
    pub max_total_iters: usize,
    pub max_backtracks: usize,
    /// Cap on the refinement run at the terminal parameters; it stops early
    /// once the r-test holds.
    pub polish_iters: usize,
    /// Record every globalization invariant check.
    pub monitor_invariants: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu0: 0.1,
            tau0: 1.0,
            delta: 0.5,
            sigma: 1e-4,
            eps: 1e-8,
            xi: 10.0,
            mu_accept_factor: 10.0,
            mu_exponent: 1.8,
            mu_halve: 0.5,
            mu_floor: 1e-9,
            tau_factor: 0.6,
            g_floor: 1e-14,
            max_total_iters: 1000,
            max_backtracks: 60,
            polish_iters: 30,
            monitor_invariants: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("mu0", self.mu0),
            ("tau0", self.tau0),
            ("eps", self.eps),
            ("mu_accept_factor", self.mu_accept_factor),
            ("mu_exponent", self.mu_exponent),
            ("mu_floor", self.mu_floor),
            ("g_floor", self.g_floor),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError {
                    field,
                    reason: "must be positive and finite",
                });
            }
        }
        let unit = [
            ("delta", self.delta),
            ("mu_halve", self.mu_halve),
            ("tau_factor", self.tau_factor),
        ];
        for (field, v) in unit {
            if !(v > 0.0 && v < 1.0) {
                return Err(ConfigError {
                    field,
                    reason: "must lie in (0, 1)",
                });
            }
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return Err(ConfigError {
                field: "sigma",
                reason: "must lie in (0, 1/2)",
            });
        }
        if !(self.xi > 1.0 && self.xi.is_finite()) {
            return Err(ConfigError {
                field: "xi",
                reason: "must be greater than 1",
            });
        }
        if self.max_total_iters == 0 {
            return Err(ConfigError {
                field: "max_total_iters",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    ApproxKkt,
    SingularStationary,
    InfeasibleStationary,
    IterationLimit,
    StepFailure,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::ApproxKkt => "ApproxKKT",
            SolveStatus::SingularStationary => "SingularStationary",
            SolveStatus::InfeasibleStationary => "InfeasibleStationary",
            SolveStatus::IterationLimit => "IterationLimit",
            SolveStatus::StepFailure => "StepFailure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One row of the outer-iteration trace. Row 0 describes the start point;
/// row `l >= 1` describes the point where inner run `l` stopped, with
/// residuals measured under that run's parameters and `mu`/`tau` holding
/// the updated values (`None` for the final row).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub l: usize,
    pub f: f64,
    pub infeasibility: f64,
    pub r_inf: f64,
    pub g_inf: Option<f64>,
    pub mu: Option<f64>,
    pub tau: Option<f64>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    /// Objective evaluations.
    pub nf: usize,
    /// Objective-gradient evaluations.
    pub ng: usize,
    /// Tangential QP solves.
    pub iters: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvariantLog {
    pub checks: usize,
    pub violations: Vec<String>,
}

impl InvariantLog {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(what());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub problem: String,
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    /// Multipliers from the last tangential QP (`λ` is also the equality
    /// multiplier estimate used in the residual).
    pub multipliers: Multipliers,
    pub f: f64,
    pub infeasibility: f64,
    pub r_inf: f64,
    pub g_inf: Option<f64>,
    /// `‖∇h h + ∇c max(0, c)‖∞` at the final point.
    pub stationarity: f64,
    pub mu: f64,
    pub tau: f64,
    pub rho: f64,
    pub records: Vec<IterationRecord>,
    pub counters: Counters,
    /// Inner runs ended because the step became numerically null.
    pub stalls: usize,
    pub diagnostics: Option<String>,
    pub invariants: Option<InvariantLog>,
}

/// Forwards to a problem while counting objective and gradient calls.
struct Counting<'a, P: ?Sized> {
    inner: &'a P,
    nf: Cell<usize>,
    ng: Cell<usize>,
}

impl<P: Problem + ?Sized> Problem for Counting<'_, P> {
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

/// Starting iterate: `t₀ = -c(x₀)`, `s₀ⱼ = min(1, 0.95μ₀/t₀ⱼ)` for positive
/// `t₀ⱼ` and 1 otherwise.
pub fn initial_point<P: Problem + ?Sized>(p: &P, x0: Vector, mu0: f64, tau0: f64) -> Result<RelaxPoint, EvalError> {
    let bp = BarrierParams::new(mu0, tau0);
    let c0 = p.ineq_constraints(&x0)?;
    let t0 = -&c0;
    let s0 = t0.map(|t| if t > 0.0 { (0.95 * mu0 / t).min(1.0) } else { 1.0 });
    let mut rp = RelaxPoint::evaluate(p, x0, t0, s0, bp)?;
    rp.evaluate_derivatives(p)?;
    Ok(rp)
}

/// `ρ₀ = min(100, max(1, ‖(max(0,c), h)‖ / |f|))`, and 100 when `f = 0`.
pub fn initial_penalty(f: f64, h: &Vector, c: &Vector) -> f64 {
    if f == 0.0 {
        return 100.0;
    }
    (infeasibility(h, c) / f.abs()).clamp(1.0, 100.0)
}

/// Dual feasibility block `∇f + ∇h λ + ∇c s`.
pub fn dual_residual(rp: &RelaxPoint, lambda: &Vector) -> Vector {
    let d = rp
        .derivatives()
        .expect("residual needs derivatives at the point");
    &d.grad_f + &d.jac_h * lambda + &d.jac_c * &rp.s
}

/// `r = (∇f + ∇hλ + ∇c s, C)`.
pub fn residual_r(rp: &RelaxPoint, lambda: &Vector) -> Vector {
    let r1 = dual_residual(rp, lambda);
    let c = rp.relaxed_constraints();
    let mut out = Vector::zeros(r1.len() + c.len());
    out.rows_mut(0, r1.len()).copy_from(&r1);
    out.rows_mut(r1.len(), c.len()).copy_from(&c);
    out
}

/// `g = (∇h h + ∇c(z-t), c+t-(z-t), Z(z-t)) / ‖C‖`, or `None` when
/// `‖C‖ < g_floor`.
pub fn residual_g(rp: &RelaxPoint, g_floor: f64) -> Option<Vector> {
    let c_norm = rp.relaxed_constraints().norm();
    if c_norm < g_floor {
        return None;
    }
    let d = rp
        .derivatives()
        .expect("residual needs derivatives at the point");
    let (n, m) = (rp.n(), rp.n_ineq());
    let gap = &rp.z - &rp.t;
    let mut out = Vector::zeros(n + 2 * m);
    out.rows_mut(0, n)
        .copy_from(&(&d.jac_h * &rp.h + &d.jac_c * &gap));
    out.rows_mut(n, m).copy_from(&(&rp.c + &rp.t - &gap));
    out.rows_mut(n + m, m).copy_from(&rp.z.component_mul(&gap));
    Some(out / c_norm)
}

/// `‖∇h h + ∇c max(0, c)‖∞`.
pub fn infeasible_stationarity(rp: &RelaxPoint) -> f64 {
    let d = rp
        .derivatives()
        .expect("certificate needs derivatives at the point");
    let viol = rp.c.map(|v| v.max(0.0));
    (&d.jac_h * &rp.h + &d.jac_c * viol).amax()
}

/// `μ⁺ = max(floor, min(halve·μ, ‖r₁‖∞^exponent))`.
pub fn next_mu(mu: f64, r1_inf: f64, cfg: &SolverConfig) -> f64 {
    (cfg.mu_halve * mu)
        .min(r1_inf.powf(cfg.mu_exponent))
        .max(cfg.mu_floor)
}

fn inf_norm(v: &Vector) -> f64 {
    v.amax()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerExit {
    RTest,
    GTest,
    Budget,
    /// Iteration cap of this inner run reached (polish phase only).
    Cap,
}

struct InnerOutcome {
    exit: InnerExit,
    k: usize,
}

struct Ctx<'a, P: ?Sized> {
    p: Counting<'a, P>,
    cfg: &'a SolverConfig,
    rp: RelaxPoint,
    rho: f64,
    bfgs: BfgsState,
    lambda: Vector,
    multipliers: Multipliers,
    iters: usize,
    stalls: usize,
    log: InvariantLog,
}

impl<P: Problem + ?Sized> Ctx<'_, P> {
    fn r_inf(&self) -> f64 {
        inf_norm(&residual_r(&self.rp, &self.lambda))
    }

    fn g_inf(&self) -> Option<f64> {
        residual_g(&self.rp, self.cfg.g_floor).map(|g| inf_norm(&g))
    }

    fn lagrangian_gradient(rp: &RelaxPoint, lambda: &Vector, beta: &Vector) -> Vector {
        let d = rp.derivatives().expect("derivatives evaluated");
        &d.grad_f + &d.jac_h * lambda + &d.jac_c * beta
    }

    /// Evaluates the trial point `v + αd` and its merit value.
    fn trial(&self, d: &Vector, alpha: f64, bp: BarrierParams, rho: f64) -> Option<(f64, RelaxPoint)> {
        let (n, m) = (self.rp.n(), self.rp.n_ineq());
        let x = &self.rp.x + d.rows(0, n) * alpha;
        let t = &self.rp.t + d.rows(n, m) * alpha;
        let s = &self.rp.s + d.rows(n + m, m) * alpha;
        let rp = RelaxPoint::evaluate(&self.p, x, t, s, bp).ok()?;
        let phi = merit(&rp, bp, rho);
        phi.is_finite().then_some((phi, rp))
    }

    /// Runs inner iterations at fixed `(μ, τ)`. With a `cap` the run is a
    /// polish: only the r-test ends it early.
    fn inner(&mut self, bp: BarrierParams, precheck: bool, cap: Option<usize>) -> Result<InnerOutcome, StepError> {
        let cfg = self.cfg;
        let (n, m) = (self.rp.n(), self.rp.n_ineq());
        let r_gate = cfg.mu_accept_factor * bp.mu;
        self.rp.refresh(bp);
        if precheck && self.r_inf() <= r_gate {
            return Ok(InnerOutcome {
                exit: InnerExit::RTest,
                k: 0,
            });
        }
        let mut k = 0;
        loop {
            if self.iters >= cfg.max_total_iters {
                return Ok(InnerOutcome {
                    exit: InnerExit::Budget,
                    k,
                });
            }
            if cap.is_some_and(|c| k >= c) {
                return Ok(InnerOutcome { exit: InnerExit::Cap, k });
            }
            let q = ModelHessian::new(self.bfgs.matrix().clone(), &self.rp, bp);
            let c = self.rp.relaxed_constraints();
            let jac = self.rp.relaxed_jacobian(bp);
            let grad = self.rp.barrier_gradient(bp);
            let scaling = Scaling::new(n, m, bp.tau);
            let normal = match normal_step(&c, &jac, &scaling, &q, self.rho, cfg.xi) {
                Ok(ns) => ns,
                Err(StepError::DegenerateNormal) => NormalStepResult {
                    p: Vector::zeros(n + 2 * m),
                    model_reduction: 0.0,
                    eta: 0.0,
                    cauchy_reduction: 0.0,
                    c_norm: c.norm(),
                    scaled_grad_sq: 0.0,
                    cauchy_curvature: 0.0,
                },
                Err(e) => return Err(e),
            };
            if cfg.monitor_invariants && normal.c_norm > 0.0 && normal.scaled_grad_sq > 0.0 {
                let radius = cfg.xi * normal.scaled_grad_sq.sqrt();
                let len = scaling.apply(&normal.p).norm();
                self.log.check(len <= radius * (1.0 + 1e-12) + 1e-10, || {
                    format!("iter {}: normal step outside trust region ({len:e} > {radius:e})", self.iters)
                });
                let (red, bound) = (normal.model_reduction, normal.cauchy_reduction);
                self.log.check(red >= bound - 1e-12 * normal.c_norm.max(1.0), || {
                    format!("iter {}: normal step reduction {red:e} below Cauchy bound {bound:e}", self.iters)
                });
            }
            let ts = tangential_step(&self.rp, bp, &q, &grad, &normal.p)?;
            self.iters += 1;
            k += 1;

            let inputs = PenaltyInputs::new(&c, &jac, &grad, &q, &normal, &ts.d);
            let up = update_penalty(self.rho, &inputs, cfg.delta)?;
            if cfg.monitor_invariants {
                let (old, new) = (self.rho, up.rho);
                self.log.check(new <= old, || {
                    format!("iter {}: penalty increased {old:e} -> {new:e}", self.iters)
                });
            }
            self.rho = up.rho;
            let pi = up.slope.pi;
            let phi0 = merit(&self.rp, bp, self.rho);

            if pi >= -100.0 * f64::EPSILON * phi0.abs().max(1.0) {
                // Predicted decrease is at roundoff level: nothing left
                // to gain at these parameters.
                self.stalls += 1;
                self.multipliers = ts.multipliers.clone();
                self.lambda = self.multipliers.lambda();
                let r_ratio = self.r_inf() / r_gate;
                let g_ratio = self.g_inf().map_or(f64::INFINITY, |g| g / bp.tau);
                let exit = if r_ratio <= g_ratio {
                    InnerExit::RTest
                } else {
                    InnerExit::GTest
                };
                return Ok(InnerOutcome { exit, k });
            }
            let ls = line_search(phi0, pi, cfg.sigma, cfg.delta, cfg.max_backtracks, |a| {
                self.trial(&ts.d, a, bp, self.rho)
            })?;

            let mut next = ls.point;
            let s_safe = dual_safeguard(&next.t, &next.s, bp.mu);
            next.set_duals(s_safe, bp);
            if cfg.monitor_invariants {
                let phi1 = merit(&next, bp, self.rho);
                let (alpha, trial) = (ls.alpha, ls.merit);
                self.log.check(phi1 - phi0 <= cfg.sigma * alpha * pi && phi1 < phi0, || {
                    format!(
                        "iter {}: sufficient decrease violated (Δφ = {:e}, σαπ = {:e})",
                        self.iters,
                        phi1 - phi0,
                        cfg.sigma * alpha * pi
                    )
                });
                self.log.check(phi1 <= trial + 1e-12 * trial.abs().max(1.0), || {
                    format!("iter {}: safeguard raised merit {trial:e} -> {phi1:e}", self.iters)
                });
                let worst = (&next.z - &next.t).min();
                self.log.check(m == 0 || worst >= -1e-12, || {
                    format!("iter {}: z - t = {worst:e} after safeguard", self.iters)
                });
            }
            next.evaluate_derivatives(&self.p)?;

            let mult = ts.multipliers;
            let lambda = mult.lambda();
            let beta = mult.beta();
            let prev = std::mem::replace(&mut self.rp, next);
            self.lambda = lambda;
            self.multipliers = mult;

            if self.r_inf() <= r_gate {
                return Ok(InnerOutcome {
                    exit: InnerExit::RTest,
                    k,
                });
            }
            if cap.is_none() && self.g_inf().is_some_and(|g| g <= bp.tau) {
                return Ok(InnerOutcome {
                    exit: InnerExit::GTest,
                    k,
                });
            }
            let step = &self.rp.x - &prev.x;
            let diff = Self::lagrangian_gradient(&self.rp, &self.lambda, &beta)
                - Self::lagrangian_gradient(&prev, &self.lambda, &beta);
            self.bfgs.update(&step, &diff);
        }
    }
}

/// Solves `p` from its standard starting point.
pub fn solve<P: Problem + ?Sized>(p: &P, cfg: &SolverConfig) -> Result<SolveReport, ConfigError> {
    solve_from(p, p.standard_start(), cfg)
}

/// Solves `p` from `x0`.
pub fn solve_from<P: Problem + ?Sized>(p: &P, x0: Vector, cfg: &SolverConfig) -> Result<SolveReport, ConfigError> {
    cfg.validate()?;
    assert_eq!(x0.len(), p.num_vars(), "start point has wrong dimension");
    let counting = Counting {
        inner: p,
        nf: Cell::new(0),
        ng: Cell::new(0),
    };
    let rp = match initial_point(&counting, x0.clone(), cfg.mu0, cfg.tau0) {
        Ok(rp) => rp,
        Err(e) => return Ok(failed_start(p, x0, cfg, &counting, e)),
    };
    let rho = initial_penalty(rp.f, &rp.h, &rp.c);
    let mut ctx = Ctx {
        bfgs: BfgsState::identity(p.num_vars()),
        lambda: Vector::zeros(p.num_eq()),
        multipliers: Multipliers::zeros(p.num_eq(), p.num_ineq()),
        p: counting,
        cfg,
        rp,
        rho,
        iters: 0,
        stalls: 0,
        log: InvariantLog::default(),
    };

    let (mut mu, mut tau) = (cfg.mu0, cfg.tau0);
    let mut records = vec![IterationRecord {
        l: 0,
        f: ctx.rp.f,
        infeasibility: infeasibility(&ctx.rp.h, &ctx.rp.c),
        r_inf: ctx.r_inf(),
        g_inf: ctx.g_inf(),
        mu: Some(mu),
        tau: Some(tau),
        k: None,
    }];
    let mut status = None;
    let mut diagnostics = None;
    let mut last_exit = None;

    while mu > cfg.eps && tau > cfg.eps {
        let bp = BarrierParams::new(mu, tau);
        let out = match ctx.inner(bp, true, None) {
            Ok(out) => out,
            Err(e) => {
                status = Some(SolveStatus::StepFailure);
                diagnostics = Some(format!("mu = {mu:e}, tau = {tau:e}, iteration {}: {e}", ctx.iters));
                break;
            }
        };
        let (r_inf, g_inf) = (ctx.r_inf(), ctx.g_inf());
        match out.exit {
            InnerExit::RTest => {
                let r1 = inf_norm(&dual_residual(&ctx.rp, &ctx.lambda));
                mu = next_mu(mu, r1, cfg);
            }
            InnerExit::GTest => tau *= cfg.tau_factor,
            InnerExit::Budget | InnerExit::Cap => {
                status = Some(SolveStatus::IterationLimit);
                diagnostics = Some(format!(
                    "iteration budget of {} exhausted at mu = {mu:e}, tau = {tau:e}",
                    cfg.max_total_iters
                ));
            }
        }
        records.push(IterationRecord {
            l: records.len(),
            f: ctx.rp.f,
            infeasibility: infeasibility(&ctx.rp.h, &ctx.rp.c),
            r_inf,
            g_inf,
            mu: Some(mu),
            tau: Some(tau),
            k: Some(out.k),
        });
        if status.is_some() {
            break;
        }
        last_exit = Some(out.exit);
    }

    if status.is_none() && cfg.polish_iters > 0 {
        let saved = (ctx.rp.clone(), ctx.lambda.clone(), ctx.multipliers.clone(), ctx.rho);
        let bp = BarrierParams::new(mu, tau);
        match ctx.inner(bp, false, Some(cfg.polish_iters)) {
            Ok(out) => records.push(IterationRecord {
                l: records.len(),
                f: ctx.rp.f,
                infeasibility: infeasibility(&ctx.rp.h, &ctx.rp.c),
                r_inf: ctx.r_inf(),
                g_inf: ctx.g_inf(),
                mu: None,
                tau: None,
                k: Some(out.k),
            }),
            Err(e) => {
                (ctx.rp, ctx.lambda, ctx.multipliers, ctx.rho) = saved;
                ctx.rp.refresh(bp);
                diagnostics = Some(format!("final refinement step skipped: {e}"));
            }
        }
    }

    let bp = BarrierParams::new(mu, tau);
    ctx.rp.refresh(bp);
    let inf = infeasibility(&ctx.rp.h, &ctx.rp.c);
    let status = status.unwrap_or_else(|| classify(last_exit, mu, tau, inf, cfg));
    let stationarity = infeasible_stationarity(&ctx.rp);
    if status == SolveStatus::InfeasibleStationary && diagnostics.is_none() {
        diagnostics = Some(format!(
            "infeasibility {inf:e}, stationarity certificate {stationarity:e}"
        ));
    }
    if status == SolveStatus::SingularStationary && diagnostics.is_none() {
        diagnostics = Some(format!("scaling parameter driven to {tau:e} at a feasible point"));
    }
    Ok(SolveReport {
        problem: p.name().to_string(),
        status,
        x: ctx.rp.x.as_slice().to_vec(),
        t: ctx.rp.t.as_slice().to_vec(),
        s: ctx.rp.s.as_slice().to_vec(),
        multipliers: ctx.multipliers.clone(),
        f: ctx.rp.f,
        infeasibility: inf,
        r_inf: ctx.r_inf(),
        g_inf: ctx.g_inf(),
        stationarity,
        mu,
        tau,
        rho: ctx.rho,
        records,
        counters: Counters {
            nf: ctx.p.nf.get(),
            ng: ctx.p.ng.get(),
            iters: ctx.iters,
        },
        stalls: ctx.stalls,
        diagnostics,
        invariants: cfg.monitor_invariants.then(|| ctx.log.clone()),
    })
}

fn failed_start<P: Problem + ?Sized>(
    p: &P,
    x0: Vector,
    cfg: &SolverConfig,
    counting: &Counting<'_, P>,
    e: EvalError,
) -> SolveReport {
    let m = p.num_ineq();
    SolveReport {
        problem: p.name().to_string(),
        status: SolveStatus::StepFailure,
        x: x0.as_slice().to_vec(),
        t: vec![f64::NAN; m],
        s: vec![f64::NAN; m],
        multipliers: Multipliers::zeros(p.num_eq(), m),
        f: f64::NAN,
        infeasibility: f64::NAN,
        r_inf: f64::NAN,
        g_inf: None,
        stationarity: f64::NAN,
        mu: cfg.mu0,
        tau: cfg.tau0,
        rho: f64::NAN,
        records: Vec::new(),
        counters: Counters {
            nf: counting.nf.get(),
            ng: counting.ng.get(),
            iters: 0,
        },
        stalls: 0,
        diagnostics: Some(format!("evaluation failed at the starting point: {e}")),
        invariants: cfg.monitor_invariants.then(InvariantLog::default),
    }
}

/// Outcome of a run whose outer loop ended on the parameter tests.
pub fn classify(last_exit: Option<InnerExit>, mu: f64, tau: f64, infeas: f64, cfg: &SolverConfig) -> SolveStatus {
    if last_exit == Some(InnerExit::RTest) && mu <= cfg.eps {
        SolveStatus::ApproxKkt
    } else if tau <= cfg.eps {
        if infeas <= cfg.eps.sqrt() {
            SolveStatus::SingularStationary
        } else {
            SolveStatus::InfeasibleStationary
        }
    } else {
        SolveStatus::ApproxKkt
    }
}
