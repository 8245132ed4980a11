use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relaxip::solver::SolverConfig;
use relaxip_cli::{
    list_lines, resolve_target, run_check, run_solve, solve_all, write_report, OutputFormat, EXIT_USAGE,
};

#[derive(Parser)]
#[command(name = "relaxip", version, about = "Interior-point relaxation solver for smooth NLPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a built-in problem or a model file.
    Solve(SolveArgs),
    /// Compare analytic derivatives with central differences at the start point.
    Check {
        target: String,
        /// Finite-difference step.
        #[arg(long = "h", default_value_t = 1e-6)]
        h_step: f64,
    },
    /// List built-in problems.
    List {
        /// Only names containing this text.
        #[arg(long, default_value = "")]
        filter: String,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Built-in name or model file path. Omit with --all.
    #[arg(required_unless_present = "all")]
    target: Option<String>,
    /// Solve every built-in problem concurrently.
    #[arg(long, conflicts_with = "target")]
    all: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long = "tau-factor")]
    tau_factor: Option<f64>,
}

impl SolveArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(v) = self.mu0 {
            cfg.mu0 = v;
        }
        if let Some(v) = self.tau0 {
            cfg.tau0 = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_total_iters = v;
        }
        if let Some(v) = self.xi {
            cfg.xi = v;
        }
        if let Some(v) = self.tau_factor {
            cfg.tau_factor = v;
        }
        cfg
    }
}

fn fail(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn solve_cmd(args: &SolveArgs) -> i32 {
    let cfg = args.config();
    if let Err(e) = cfg.validate() {
        return fail(&e.to_string());
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if args.all {
        // Worst exit code wins.
        let mut code = 0;
        for (i, res) in solve_all(&cfg).into_iter().enumerate() {
            let rep = match res {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            if i > 0 && args.format == OutputFormat::Table {
                let _ = writeln!(out);
            }
            if let Err(e) = write_report(&mut out, &rep, args.format) {
                return fail(&e);
            }
            code = code.max(rep.exit_code());
        }
        return code;
    }
    let target = args.target.as_deref().unwrap_or_default();
    let problem = match resolve_target(target) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    match run_solve(problem.as_ref(), &cfg) {
        Ok(rep) => match write_report(&mut out, &rep, args.format) {
            Ok(()) => rep.exit_code(),
            Err(e) => fail(&e),
        },
        Err(e) => fail(&e),
    }
}

fn check_cmd(target: &str, h_step: f64) -> i32 {
    if !(h_step > 0.0 && h_step.is_finite()) {
        return fail("--h must be a positive number");
    }
    let problem = match resolve_target(target) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    match run_check(problem.as_ref(), h_step) {
        Ok((rep, code)) => {
            println!("gradient       {:.3e}", rep.gradient);
            println!("eq jacobian    {:.3e}", rep.eq_jacobian);
            println!("ineq jacobian  {:.3e}", rep.ineq_jacobian);
            println!("{}", if code == 0 { "ok" } else { "MISMATCH" });
            code
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(args) => solve_cmd(args),
        Command::Check { target, h_step } => check_cmd(target, *h_step),
        Command::List { filter } => {
            for line in list_lines(filter) {
                println!("{line}");
            }
            0
        }
    };
    ExitCode::from(code as u8)
}
