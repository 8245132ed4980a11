//! Damped BFGS approximation of the x-block of the Lagrangian Hessian.

use nalgebra::linalg::Cholesky;

use crate::model::{Matrix, Vector};

/// Curvature fraction below which the update is damped.
pub const DAMPING_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Plain,
    Damped,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsState {
    b: Matrix,
}

impl BfgsState {
    pub fn identity(n: usize) -> Self {
        Self {
            b: Matrix::identity(n, n),
        }
    }

    pub fn from_matrix(b: Matrix) -> Self {
        assert!(b.is_square());
        Self { b }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }

    /// Powell-damped update with step `s` and gradient difference `q`.
    pub fn update(&mut self, s: &Vector, q: &Vector) -> UpdateOutcome {
        if s.norm() <= 1e-14 {
            return UpdateOutcome::Skipped;
        }
        let bs = &self.b * s;
        let sbs = s.dot(&bs);
        if sbs <= 1e-16 {
            return UpdateOutcome::Skipped;
        }
        let sq = s.dot(q);
        let (theta, outcome) = if sq >= DAMPING_THRESHOLD * sbs {
            (1.0, UpdateOutcome::Plain)
        } else {
            ((1.0 - DAMPING_THRESHOLD) * sbs / (sbs - sq), UpdateOutcome::Damped)
        };
        let r = q * theta + &bs * (1.0 - theta);
        let sr = s.dot(&r);
        if sr <= 0.0 || !sr.is_finite() {
            return UpdateOutcome::Skipped;
        }
        let mut next = self.b.clone();
        next.ger(-1.0 / sbs, &bs, &bs, 1.0);
        next.ger(1.0 / sr, &r, &r, 1.0);
        let next = (&next + next.transpose()) * 0.5;
        if Cholesky::new(next.clone()).is_none() {
            return UpdateOutcome::Skipped;
        }
        self.b = next;
        outcome
    }
}
