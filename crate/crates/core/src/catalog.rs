//! Built-in test problems.
//!
//! Bounds are written as general inequalities (`x2 >= 0` becomes `-x2 <= 0`)
//! so every problem goes through the same code path.

use crate::error::LookupError;
use crate::model::{no_constraints, no_jacobian, FnProblem, Problem};

type Constructor = fn() -> FnProblem;

const CATALOG: &[(&str, Constructor)] = &[
    ("TP1", tp1),
    ("TP2", tp2),
    ("TP3", tp3),
    ("HS10", hs10),
    ("HS11", hs11),
    ("HS14", hs14),
    ("HS22", hs22),
    ("HS43", hs43),
    ("CB2", cb2),
    ("CB3", cb3),
];

/// Names of every catalog entry, in listing order.
pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|(name, _)| *name).collect()
}

/// Finds a built-in problem by name (case-insensitive).
pub fn lookup_problem(name: &str) -> Result<Box<dyn Problem + Send + Sync>, LookupError> {
    CATALOG
        .iter()
        .find(|(entry, _)| entry.eq_ignore_ascii_case(name))
        .map(|(_, build)| Box::new(build()) as Box<dyn Problem + Send + Sync>)
        .ok_or_else(|| LookupError {
            name: name.to_string(),
            available: names().into_iter().map(String::from).collect(),
        })
}

/// Every catalog problem, constructed.
pub fn all() -> Vec<FnProblem> {
    CATALOG.iter().map(|(_, build)| build()).collect()
}

/// Wächter–Biegler example. Unique global minimizer (2, 3, 0).
pub fn tp1() -> FnProblem {
    FnProblem {
        name: "TP1",
        n: 3,
        n_eq: 2,
        n_ineq: 2,
        start: vec![-4.0, 1.0, 1.0],
        f: |x| x[0],
        grad_f: |_| vec![1.0, 0.0, 0.0],
        h: |x| vec![x[0] * x[0] - x[1] - 1.0, x[0] - x[2] - 2.0],
        jac_h: |x| vec![vec![2.0 * x[0], -1.0, 0.0], vec![1.0, 0.0, -1.0]],
        c: |x| vec![-x[1], -x[2]],
        jac_c: |_| vec![vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0]],
    }
}

/// Hock–Schittkowski problem 13. The minimizer (1, 0) is a Fritz-John point
/// where neither LICQ nor MFCQ holds.
pub fn tp2() -> FnProblem {
    FnProblem {
        name: "TP2",
        n: 2,
        n_eq: 0,
        n_ineq: 3,
        start: vec![-2.0, -2.0],
        f: |x| (x[0] - 2.0).powi(2) + x[1] * x[1],
        grad_f: |x| vec![2.0 * (x[0] - 2.0), 2.0 * x[1]],
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| vec![x[1] - (1.0 - x[0]).powi(3), -x[0], -x[1]],
        jac_c: |x| {
            vec![
                vec![3.0 * (1.0 - x[0]).powi(2), 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ]
        },
    }
}

/// The infeasible "isolated" problem. (0, 0) minimizes the Euclidean norm of
/// the constraint violation.
pub fn tp3() -> FnProblem {
    FnProblem {
        name: "TP3",
        n: 2,
        n_eq: 0,
        n_ineq: 4,
        start: vec![3.0, 2.0],
        f: |x| x[0] + x[1],
        grad_f: |_| vec![1.0, 1.0],
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| {
            vec![
                x[0] * x[0] - x[1] + 1.0,
                x[0] * x[0] + x[1] + 1.0,
                -x[0] + x[1] * x[1] + 1.0,
                x[0] + x[1] * x[1] + 1.0,
            ]
        },
        jac_c: |x| {
            vec![
                vec![2.0 * x[0], -1.0],
                vec![2.0 * x[0], 1.0],
                vec![-1.0, 2.0 * x[1]],
                vec![1.0, 2.0 * x[1]],
            ]
        },
    }
}

pub fn hs10() -> FnProblem {
    FnProblem {
        name: "HS10",
        n: 2,
        n_eq: 0,
        n_ineq: 1,
        start: vec![-10.0, 10.0],
        f: |x| x[0] - x[1],
        grad_f: |_| vec![1.0, -1.0],
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| vec![3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + x[1] * x[1] - 1.0],
        jac_c: |x| vec![vec![6.0 * x[0] - 2.0 * x[1], -2.0 * x[0] + 2.0 * x[1]]],
    }
}

pub fn hs11() -> FnProblem {
    FnProblem {
        name: "HS11",
        n: 2,
        n_eq: 0,
        n_ineq: 1,
        start: vec![4.9, 0.1],
        f: |x| (x[0] - 5.0).powi(2) + x[1] * x[1] - 25.0,
        grad_f: |x| vec![2.0 * (x[0] - 5.0), 2.0 * x[1]],
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| vec![x[0] * x[0] - x[1]],
        jac_c: |x| vec![vec![2.0 * x[0], -1.0]],
    }
}

pub fn hs14() -> FnProblem {
    FnProblem {
        name: "HS14",
        n: 2,
        n_eq: 1,
        n_ineq: 1,
        start: vec![2.0, 2.0],
        f: |x| (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2),
        grad_f: |x| vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)],
        h: |x| vec![x[0] - 2.0 * x[1] + 1.0],
        jac_h: |_| vec![vec![1.0, -2.0]],
        c: |x| vec![0.25 * x[0] * x[0] + x[1] * x[1] - 1.0],
        jac_c: |x| vec![vec![0.5 * x[0], 2.0 * x[1]]],
    }
}

pub fn hs22() -> FnProblem {
    FnProblem {
        name: "HS22",
        n: 2,
        n_eq: 0,
        n_ineq: 2,
        start: vec![2.0, 2.0],
        f: |x| (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2),
        grad_f: |x| vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)],
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| vec![x[0] + x[1] - 2.0, x[0] * x[0] - x[1]],
        jac_c: |x| vec![vec![1.0, 1.0], vec![2.0 * x[0], -1.0]],
    }
}

/// Rosen–Suzuki.
pub fn hs43() -> FnProblem {
    FnProblem {
        name: "HS43",
        n: 4,
        n_eq: 0,
        n_ineq: 3,
        start: vec![0.0; 4],
        f: |x| {
            x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2] + x[3] * x[3] - 5.0 * x[0] - 5.0 * x[1]
                - 21.0 * x[2]
                + 7.0 * x[3]
        },
        grad_f: |x| {
            vec![
                2.0 * x[0] - 5.0,
                2.0 * x[1] - 5.0,
                4.0 * x[2] - 21.0,
                2.0 * x[3] + 7.0,
            ]
        },
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| {
            let sq = |i: usize| x[i] * x[i];
            vec![
                sq(0) + sq(1) + sq(2) + sq(3) + x[0] - x[1] + x[2] - x[3] - 8.0,
                sq(0) + 2.0 * sq(1) + sq(2) + 2.0 * sq(3) - x[0] - x[3] - 10.0,
                2.0 * sq(0) + sq(1) + sq(2) + 2.0 * x[0] - x[1] - x[3] - 5.0,
            ]
        },
        jac_c: |x| {
            vec![
                vec![
                    2.0 * x[0] + 1.0,
                    2.0 * x[1] - 1.0,
                    2.0 * x[2] + 1.0,
                    2.0 * x[3] - 1.0,
                ],
                vec![2.0 * x[0] - 1.0, 4.0 * x[1], 2.0 * x[2], 4.0 * x[3] - 1.0],
                vec![4.0 * x[0] + 2.0, 2.0 * x[1] - 1.0, 2.0 * x[2], -1.0],
            ]
        },
    }
}

// Charalambous–Bandler minimax problems in epigraph form; variables (x1, x2, u).

fn cb_common_c(x: &[f64]) -> [f64; 2] {
    [
        (2.0 - x[0]).powi(2) + (2.0 - x[1]).powi(2) - x[2],
        2.0 * (x[1] - x[0]).exp() - x[2],
    ]
}

fn cb_common_jac(x: &[f64]) -> [Vec<f64>; 2] {
    let e = 2.0 * (x[1] - x[0]).exp();
    [
        vec![-2.0 * (2.0 - x[0]), -2.0 * (2.0 - x[1]), -1.0],
        vec![-e, e, -1.0],
    ]
}

pub fn cb2() -> FnProblem {
    FnProblem {
        name: "CB2",
        n: 3,
        n_eq: 0,
        n_ineq: 3,
        start: vec![2.0, 2.0, 1.0],
        f: |x| x[2],
        grad_f: |_| vec![0.0, 0.0, 1.0],
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| {
            let [c2, c3] = cb_common_c(x);
            vec![x[0] * x[0] + x[1].powi(4) - x[2], c2, c3]
        },
        jac_c: |x| {
            let [g2, g3] = cb_common_jac(x);
            vec![vec![2.0 * x[0], 4.0 * x[1].powi(3), -1.0], g2, g3]
        },
    }
}

pub fn cb3() -> FnProblem {
    FnProblem {
        name: "CB3",
        n: 3,
        n_eq: 0,
        n_ineq: 3,
        start: vec![2.0, 2.0, 1.0],
        f: |x| x[2],
        grad_f: |_| vec![0.0, 0.0, 1.0],
        h: no_constraints,
        jac_h: no_jacobian,
        c: |x| {
            let [c2, c3] = cb_common_c(x);
            vec![x[0].powi(4) + x[1] * x[1] - x[2], c2, c3]
        },
        jac_c: |x| {
            let [g2, g3] = cb_common_jac(x);
            vec![vec![4.0 * x[0].powi(3), 2.0 * x[1], -1.0], g2, g3]
        },
    }
}
