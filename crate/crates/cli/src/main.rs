//! `symkdv`: command-line front end for the cylindrical KdV toolkit.
//!
//! Exit codes: 0 on success, 1 on domain or validation errors, 2 when Newton
//! fails to converge (results are still written), 64 on usage errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use symkdv::field::{emit_plot_data, format_g15, linspace, plot_data_json, reconstruct_problem1, reconstruct_problem2};
use symkdv::lie::{
    adjoint_closed_form, commutator, flow, reduce_to_optimal, AlgebraElement, Generator, OptimalClass, Point,
};
use symkdv::reductions::{residual_table, solve_reduced, CollocationSolution, ReducedProblem, Variant};
use symkdv::solver::NewtonConfig;
use symkdv::spectral::{cgl_nodes, diff_matrix_power, diff_matrix_with, DiagonalRule};
use symkdv::verify::{self, Suite};
use symkdv::{field::DEFAULT_X_MIN, SpaceTimeField};

const EXIT_DOMAIN: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "symkdv",
    version,
    about = "Symmetry reductions and spectral collocation for the cylindrical KdV equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Diagonal {
    NegativeSum,
    ClosedForm,
}

impl From<Diagonal> for DiagonalRule {
    fn from(d: Diagonal) -> Self {
        match d {
            Diagonal::NegativeSum => DiagonalRule::NegativeSum,
            Diagonal::ClosedForm => DiagonalRule::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    PrintedDiscrete,
    PrintedContinuous,
    Derived,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::PrintedDiscrete => Variant::PrintedDiscrete,
            VariantArg::PrintedContinuous => Variant::PrintedContinuous,
            VariantArg::Derived => Variant::Derived,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Spectral,
    Lie,
    Reductions,
    Field,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Spectral => Suite::Spectral,
            SuiteArg::Lie => Suite::Lie,
            SuiteArg::Reductions => Suite::Reductions,
            SuiteArg::Field => Suite::Field,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chebyshev-Gauss-Lobatto nodes cos(jπ/N), j = 0..N.
    Nodes {
        #[arg(long)]
        n: usize,
    },
    /// Collocation differentiation matrix of order k on N + 1 nodes.
    Diffmat {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Diagonal::NegativeSum)]
        diagonal: Diagonal,
    },
    /// Solve a reduced problem and print node values.
    Solve(SolveArgs),
    /// Residual table |L(ζ_i)| for i = 1..N-1.
    Table(SolveArgs),
    /// Reconstruct u(x, t) from a reduced solution.
    Reconstruct {
        #[command(flatten)]
        solve: SolveArgs,
        /// Left end of the x grid.
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_X_MIN)]
        x_min: f64,
        /// Right end of the x grid.
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        x_max: f64,
        #[arg(long, default_value_t = 41)]
        samples: usize,
        /// Problem 1 only: reject |x| below this (u = g/x² is singular at 0).
        #[arg(long, default_value_t = DEFAULT_X_MIN)]
        x_guard: f64,
    },
    /// Lie algebra computations.
    #[command(subcommand)]
    Lie(LieCommand),
    /// Run a built-in self-check suite.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// 1: dilation reduction g(r); 2: X3 reduction f(x; t).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    problem: u8,
    #[arg(long, default_value_t = 25)]
    n: usize,
    /// Time parameter; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    t: Vec<f64>,
    #[arg(long, value_enum, env = "SYMKDV_VARIANT", default_value_t = VariantArg::PrintedDiscrete)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = Diagonal::NegativeSum)]
    diagonal: Diagonal,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    /// Residual max-norm at which Newton stops.
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Relative step size treated as the rounding floor.
    #[arg(long, default_value_t = 1e-12)]
    step_tol: f64,
    /// Largest residual accepted at the rounding floor.
    #[arg(long, default_value_t = 1e-6)]
    floor_tol: f64,
}

#[derive(Subcommand, Debug)]
enum LieCommand {
    /// [a, b] for coefficient triples a, b.
    Commutator {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        a: [f64; 3],
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        b: [f64; 3],
    },
    /// Matrix of Ad(exp(ε X_i)), or its action on --coeffs.
    Adjoint {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        generator: u8,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: f64,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        coeffs: Option<[f64; 3]>,
    },
    /// Bring a1 X1 + a2 X2 + a3 X3 to its optimal-system representative.
    Reduce {
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        coeffs: [f64; 3],
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Image of the point (x, t, u) under exp(ε X_i).
    Flow {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        generator: u8,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: f64,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        point: [f64; 3],
    },
}

/// A failure that maps to an exit code.
#[derive(Debug)]
enum Failure {
    Domain(String),
    /// Output was produced but Newton did not converge.
    NoConvergence(String),
}

impl From<symkdv::Error> for Failure {
    fn from(e: symkdv::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

struct Rendered {
    csv: String,
    json: Value,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        // a well-formed flag with a bad value is a validation error
        Err(e) if matches!(e.kind(), ErrorKind::ValueValidation | ErrorKind::InvalidValue) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("error: invalid value"));
            return ExitCode::from(EXIT_DOMAIN);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let (rendered, status) = match execute(&cli.command) {
        Ok(r) => (r, Ok(())),
        Err((Some(r), failure)) => (r, Err(failure)),
        Err((None, failure)) => return report(failure),
    };
    let text = match cli.out.format {
        Format::Csv => rendered.csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rendered.json).expect("JSON values serialize");
            s.push('\n');
            s
        }
    };
    let written = match &cli.out.output {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write stdout: {e}")),
    };
    if let Err(msg) = written {
        return report(Failure::Domain(msg));
    }
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    match f {
        Failure::Domain(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Failure::NoConvergence(msg) => {
            eprintln!("warning: {msg}");
            ExitCode::from(EXIT_NO_CONVERGENCE)
        }
    }
}

type Outcome = Result<Rendered, (Option<Rendered>, Failure)>;

fn fail(f: impl Into<Failure>) -> (Option<Rendered>, Failure) {
    (None, f.into())
}

fn execute(cmd: &Command) -> Outcome {
    match cmd {
        Command::Nodes { n } => nodes(*n).map_err(fail),
        Command::Diffmat { n, order, diagonal } => diffmat(*n, *order, *diagonal).map_err(fail),
        Command::Solve(args) => solve(args),
        Command::Table(args) => table(args),
        Command::Reconstruct {
            solve,
            x_min,
            x_max,
            samples,
            x_guard,
        } => reconstruct(solve, *x_min, *x_max, *samples, *x_guard),
        Command::Lie(l) => lie(l).map_err(fail),
        Command::Verify { suite, seed } => verify_suite((*suite).into(), *seed),
    }
}

fn csv_line(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(format_g15).collect::<Vec<_>>().join(",")
}

fn nodes(n: usize) -> Result<Rendered, Failure> {
    let grid = cgl_nodes::<f64>(n)?;
    Ok(Rendered {
        csv: format!("{}\n", csv_line(grid.nodes().iter().copied())),
        json: json!(grid.nodes()),
    })
}

fn diffmat(n: usize, order: usize, diagonal: Diagonal) -> Result<Rendered, Failure> {
    let grid = cgl_nodes::<f64>(n)?;
    let d = diff_matrix_power(&diff_matrix_with(&grid, diagonal.into()), order)?;
    let rows: Vec<Vec<f64>> = d.entries().row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut csv = String::new();
    for row in &rows {
        csv.push_str(&csv_line(row.iter().copied()));
        csv.push('\n');
    }
    Ok(Rendered { csv, json: json!(rows) })
}

fn newton_config(args: &SolveArgs) -> Result<NewtonConfig<f64>, Failure> {
    let cfg = NewtonConfig {
        max_iters: args.max_iters,
        abs_tol: args.abs_tol,
        step_tol: args.step_tol,
        floor_tol: args.floor_tol,
        ..NewtonConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One solution per requested `t`, in order; Problem 2 solves run in parallel.
fn solve_all(args: &SolveArgs) -> Result<Vec<(f64, CollocationSolution<f64>)>, Failure> {
    let cfg = newton_config(args)?;
    let variant: Variant = args.variant.into();
    let problems = args
        .t
        .iter()
        .map(|&t| {
            let p = match args.problem {
                1 => ReducedProblem::problem1(args.n, variant),
                _ => ReducedProblem::problem2(args.n, t, variant),
            };
            p.map(|p| (t, p.with_diagonal(args.diagonal.into())))
        })
        .collect::<symkdv::Result<Vec<_>>>()?;
    let results: Vec<symkdv::Result<CollocationSolution<f64>>> = if args.problem == 1 {
        // g does not depend on t: solve once
        let sol = solve_reduced(&problems[0].1, &cfg);
        problems.iter().map(|_| sol.clone()).collect()
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = problems
                .iter()
                .map(|(_, p)| s.spawn(move || solve_reduced(p, &cfg)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        })
    };
    problems
        .iter()
        .zip(results)
        .map(|((t, _), r)| r.map(|sol| (*t, sol)).map_err(Failure::from))
        .collect()
}

fn convergence_failure(sols: &[(f64, CollocationSolution<f64>)]) -> Option<Failure> {
    let bad: Vec<String> = sols
        .iter()
        .filter(|(_, s)| !s.converged())
        .map(|(t, s)| {
            format!(
                "t = {} ({:?} after {} iterations, residual {:e})",
                format_g15(*t),
                s.newton.termination,
                s.newton.iterations,
                s.newton.final_residual_norm
            )
        })
        .collect();
    (!bad.is_empty()).then(|| Failure::NoConvergence(format!("Newton did not converge for {}", bad.join("; "))))
}

fn finish(rendered: Rendered, sols: &[(f64, CollocationSolution<f64>)]) -> Outcome {
    match convergence_failure(sols) {
        None => Ok(rendered),
        Some(f) => Err((Some(rendered), f)),
    }
}

fn solution_json(t: f64, sol: &CollocationSolution<f64>) -> Value {
    json!({
        "problem": sol.problem.kind.number(),
        "variant": sol.problem.variant.as_str(),
        "n": sol.problem.n,
        "t": t,
        "converged": sol.converged(),
        "iterations": sol.newton.iterations,
        "termination": format!("{:?}", sol.newton.termination),
        "final_residual_norm": sol.newton.final_residual_norm,
        "boundary_derivative": sol.boundary_derivative,
        "nodes": sol.grid.nodes(),
        "values": sol.values,
        "residuals": sol.residuals,
    })
}

fn solve(args: &SolveArgs) -> Outcome {
    let sols = solve_all(args).map_err(|f| (None, f))?;
    let mut csv = String::from("t,i,node,value,converged\n");
    for (t, sol) in &sols {
        for (i, (&z, &v)) in sol.grid.nodes().iter().zip(&sol.values).enumerate() {
            csv.push_str(&format!(
                "{},{i},{},{},{}\n",
                format_g15(*t),
                format_g15(z),
                format_g15(v),
                sol.converged()
            ));
        }
    }
    let json = Value::Array(sols.iter().map(|(t, s)| solution_json(*t, s)).collect());
    finish(Rendered { csv, json }, &sols)
}

fn table(args: &SolveArgs) -> Outcome {
    if args.t.len() != 1 {
        return Err(fail(Failure::Domain(format!(
            "table takes a single --t, got {} values",
            args.t.len()
        ))));
    }
    let sols = solve_all(args).map_err(|f| (None, f))?;
    let (t, sol) = &sols[0];
    let table = residual_table(sol);
    let json = json!({
        "problem": sol.problem.kind.number(),
        "variant": sol.problem.variant.as_str(),
        "n": sol.problem.n,
        "t": t,
        "converged": sol.converged(),
        "rows": table.to_json(),
    });
    finish(
        Rendered {
            csv: table.to_csv(),
            json,
        },
        &sols,
    )
}

fn reconstruct(args: &SolveArgs, x_min: f64, x_max: f64, samples: usize, x_guard: f64) -> Outcome {
    if samples < 2 {
        return Err(fail(Failure::Domain(format!(
            "--samples must be at least 2, got {samples}"
        ))));
    }
    if !(x_min < x_max) {
        return Err(fail(Failure::Domain(format!(
            "--x-min must be below --x-max, got {x_min} >= {x_max}"
        ))));
    }
    if !(x_guard > 0.0) {
        return Err(fail(Failure::Domain(format!(
            "--x-guard must be positive, got {x_guard}"
        ))));
    }
    let sols = solve_all(args).map_err(|f| (None, f))?;
    let x_grid = linspace(x_min, x_max, samples);
    let fields = sols
        .iter()
        .map(|(t, sol)| match args.problem {
            1 => reconstruct_problem1(sol, &x_grid, *t, x_guard),
            _ => reconstruct_problem2(sol, &x_grid, *t),
        })
        .collect::<symkdv::Result<Vec<_>>>()
        .map_err(fail)?;
    let field = SpaceTimeField::stack_times(fields).map_err(fail)?;
    if !field.all_finite() {
        return Err(fail(Failure::Domain(
            "reconstructed field has non-finite values".into(),
        )));
    }
    let mut json = plot_data_json(&field);
    json["converged"] = json!(sols.iter().all(|(_, s)| s.converged()));
    finish(
        Rendered {
            csv: emit_plot_data(&field),
            json,
        },
        &sols,
    )
}

/// Parses `a,b,c` into three numbers.
fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated numbers, got {} in {s:?}",
            parts.len()
        ));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        let v: f64 = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
        if !v.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
        *slot = v;
    }
    Ok(out)
}

fn generator(i: u8) -> Result<Generator, Failure> {
    Ok(Generator::from_index(i as usize)?)
}

fn lie(cmd: &LieCommand) -> Result<Rendered, Failure> {
    match cmd {
        LieCommand::Commutator { a, b } => {
            let c = commutator(&AlgebraElement(*a), &AlgebraElement(*b));
            Ok(Rendered {
                csv: format!("{}\n", csv_line(c.0)),
                json: json!(c.0),
            })
        }
        LieCommand::Adjoint {
            generator: g,
            epsilon,
            coeffs,
        } => {
            let m = adjoint_closed_form(generator(*g)?, *epsilon);
            match coeffs {
                Some(c) => {
                    let y = m.apply(&AlgebraElement(*c));
                    Ok(Rendered {
                        csv: format!("{}\n", csv_line(y.0)),
                        json: json!(y.0),
                    })
                }
                None => {
                    let csv = m.entries.iter().map(|r| csv_line(r.iter().copied()) + "\n").collect();
                    Ok(Rendered {
                        csv,
                        json: json!(m.entries),
                    })
                }
            }
        }
        LieCommand::Reduce { coeffs, tol } => {
            if !(*tol >= 0.0) {
                return Err(Failure::Domain(format!("--tol must be non-negative, got {tol}")));
            }
            let r = reduce_to_optimal(&AlgebraElement(*coeffs), *tol)?;
            let chain: Vec<Value> = r.chain.iter().map(|(g, s)| json!([g.index(), s])).collect();
            let class = match r.class {
                OptimalClass::Dilation => "dilation",
                OptimalClass::Translation => "translation",
            };
            let mut csv = String::from("step,generator,epsilon\n");
            for (k, (g, s)) in r.chain.iter().enumerate() {
                csv.push_str(&format!("{},{},{}\n", k + 1, g.index(), format_g15(*s)));
            }
            csv.push_str(&format!("representative,{}\n", csv_line(r.representative.0)));
            csv.push_str(&format!("scale,{}\n", format_g15(r.scale)));
            Ok(Rendered {
                csv,
                json: json!({
                    "input": r.input.0,
                    "representative": r.representative.0,
                    "chain": chain,
                    "scale": r.scale,
                    "class": class,
                }),
            })
        }
        LieCommand::Flow {
            generator: g,
            epsilon,
            point,
        } => {
            let p = flow(generator(*g)?, *epsilon, Point::new(point[0], point[1], point[2]))?;
            Ok(Rendered {
                csv: format!("{}\n", csv_line([p.x, p.t, p.u])),
                json: json!([p.x, p.t, p.u]),
            })
        }
    }
}

fn verify_suite(suite: Suite, seed: u64) -> Outcome {
    let checks = verify::run(suite, seed);
    let mut csv = String::from("check,passed,detail\n");
    for c in &checks {
        csv.push_str(&format!(
            "\"{}\",{},\"{}\"\n",
            c.name,
            c.passed,
            c.detail.replace('"', "'")
        ));
    }
    let rendered = Rendered {
        csv,
        json: json!(checks),
    };
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(rendered)
    } else {
        Err((
            Some(rendered),
            Failure::Domain(format!("failed checks: {}", failed.join("; "))),
        ))
    }
}
