use thiserror::Error;

/// Failure while evaluating a problem function at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{what} at line {line}, column {col}")]
    Domain {
        what: String,
        line: usize,
        col: usize,
    },
    #[error("non-finite value returned by {evaluator}")]
    NonFinite { evaluator: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unknown problem `{name}` (available: {})", available.join(", "))]
pub struct LookupError {
    pub name: String,
    pub available: Vec<String>,
}

/// Errors from reading a text model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared identifier `{name}` at line {line}, column {col}")]
    Undeclared { name: String, line: usize, col: usize },
    #[error("duplicate variable `{name}` at line {line}, column {col}")]
    DuplicateVariable { name: String, line: usize, col: usize },
    #[error("model has no objective (`min` statement)")]
    MissingObjective,
}

/// Signals raised by the step computation and globalization machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("normal step is degenerate: constraint residual is nonzero but its scaled gradient vanishes")]
    DegenerateNormal,
    #[error("reduced KKT factorization failed after {attempts} regularization attempts")]
    Factorization { attempts: usize },
    #[error("penalty parameter fell below {floor:e}")]
    TinyPenalty { floor: f64 },
    #[error("line search failed after {backtracks} backtracks (slope {slope:e})")]
    LineSearch { backtracks: usize, slope: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A solver setting outside its admissible range.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid solver setting `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: &'static str,
}
