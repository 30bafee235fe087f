mod compute;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler_lab::catalog::{catalog_get, parse_params, CATALOG};
use finsler_lab::classify::{default_tolerance, run_predicate, PREDICATES};
use finsler_lab::grid::SampleGrid;
use finsler_lab::phi::{regularity_check, s_grid, solve_isotropic_ode, PhiKind};
use finsler_lab::report::{float, quote, reports_to_csv, reports_to_toml, ClassifierReport};
use finsler_lab::verify::{run_check, run_verify, VerifyOptions, VerifySummary, CHECK_TITLES};

use crate::compute::{run_compute, Point};
use crate::config::{grid_spec, parse_counts, parse_point, resolve_metric, RunConfig};
use crate::error::{CliError, EXIT_EVAL, EXIT_PASS, EXIT_PREDICATE, EXIT_USAGE};

/// Numerical laboratory for Finsler (alpha, beta)-metrics.
#[derive(Parser, Debug)]
#[command(name = "finsler-lab", version)]
struct Cli {
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// Catalog entry name (see `catalog`).
    #[arg(long)]
    metric: Option<String>,
    /// Catalog parameters as whitespace-separated key=value pairs.
    #[arg(long)]
    params: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

fn coords(s: &str) -> Result<Coords, String> {
    parse_point(s).map(Coords)
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one quantity at a point.
    Compute {
        #[command(flatten)]
        m: MetricArgs,
        /// Quantity: G, B, E, D, R, C, L, H, S, sigma, g, h, BetaInvariants, QTPD.
        #[arg(long)]
        what: String,
        /// Base point, comma separated.
        #[arg(long, value_parser = coords, allow_hyphen_values = true)]
        x: Coords,
        /// Direction, comma separated.
        #[arg(long, value_parser = coords, allow_hyphen_values = true)]
        y: Option<Coords>,
        /// QTPD only: s instead of beta(y)/alpha(y).
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        /// QTPD only: b instead of the alpha-norm of beta at x.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run predicates over a sample grid.
    Classify {
        #[command(flatten)]
        m: MetricArgs,
        /// Comma-separated predicate names.
        #[arg(long, value_delimiter = ',')]
        predicates: Vec<String>,
        /// Sample counts as NXxNY.
        #[arg(long, value_parser = parse_counts)]
        grid: Option<(usize, usize)>,
        /// Tolerance applied to every predicate.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// toml or csv (default: from the --out extension, else toml).
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the isotropic-S equation for phi and report its residual.
    OdePhi {
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        q0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        q0p: f64,
        /// Number of s samples.
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Bound on the normalized residual.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List catalog entries, or describe one.
    Catalog {
        name: Option<String>,
        #[arg(long)]
        params: Option<String>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Replace every upper-bound tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_counts, default_value = "16x32")]
        grid: (usize, usize),
        /// Run a single criterion.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        check: Option<u8>,
        /// Write the TOML summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_EVAL as u8);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Compute { m, what, x, y, s, b, out } => {
            let cfg = load_config(&m)?;
            let r = resolve_metric(m.metric.as_deref(), m.params.as_deref(), &cfg)?;
            let p = Point {
                x: &x.0,
                y: y.as_ref().map(|c| c.0.as_slice()),
                s,
                b,
            };
            let text = run_compute(&r.metric, &r.label, &what, &p)?;
            emit(out.or(cfg.out.map(PathBuf::from)), &text)?;
            Ok(EXIT_PASS)
        }
        Command::Classify {
            m,
            predicates,
            grid,
            tol,
            seed,
            format,
            out,
        } => {
            let cfg = load_config(&m)?;
            let r = resolve_metric(m.metric.as_deref(), m.params.as_deref(), &cfg)?;
            let spec = grid_spec(r.grid, &cfg, grid, seed);
            let predicates = if !predicates.is_empty() {
                predicates
            } else if !cfg.predicates.is_empty() {
                cfg.predicates.clone()
            } else {
                ["berwald", "douglas", "gdw"].map(String::from).to_vec()
            };
            for p in &predicates {
                if default_tolerance(p).is_none() {
                    let names: Vec<&str> = PREDICATES.iter().map(|(n, _)| *n).collect();
                    return Err(CliError::Usage(format!(
                        "unknown predicate `{p}` (known: {})",
                        names.join(", ")
                    )));
                }
            }
            if tol.is_some_and(|t| !(t > 0.0)) {
                return Err(CliError::Usage("--tol must be positive".into()));
            }
            let sample = SampleGrid::build(&r.metric, &spec).map_err(|e| match CliError::from_core(e) {
                CliError::Eval { source, .. } => CliError::eval("building the sample grid")(source),
                u => u,
            })?;
            let reports: Vec<ClassifierReport> = predicates
                .iter()
                .map(|p| {
                    let t = tol.or(cfg.tolerances.get(p).copied());
                    run_predicate(p, &r.metric, &sample, t).map_err(CliError::from_core)
                })
                .collect::<Result<_, _>>()?;
            let out = out.or(cfg.out.map(PathBuf::from));
            let format = format
                .or(cfg.format)
                .unwrap_or_else(|| match out.as_ref().and_then(|p| p.extension()) {
                    Some(e) if e == "csv" => "csv".into(),
                    _ => "toml".into(),
                });
            let text = match format.as_str() {
                "toml" => {
                    let head = format!(
                        "metric = {}\ngrid = [{}, {}]\nseed = {}\n\n",
                        quote(&r.label),
                        spec.nx,
                        spec.ny,
                        spec.seed
                    );
                    head + &reports_to_toml(&reports)
                }
                "csv" => reports_to_csv(&reports),
                f => return Err(CliError::Usage(format!("unknown format `{f}` (toml or csv)"))),
            };
            emit(out, &text)?;
            let all = reports.iter().all(ClassifierReport::passed);
            Ok(if all { EXIT_PASS } else { EXIT_PREDICATE })
        }
        Command::OdePhi {
            k,
            n,
            b,
            q0,
            q0p,
            points,
            tol,
            out,
        } => {
            if points < 2 || !(tol > 0.0) {
                return Err(CliError::Usage("--points must be >= 2 and --tol positive".into()));
            }
            let phi = solve_isotropic_ode(k, n, b, q0, q0p).map_err(CliError::from_core)?;
            let PhiKind::OdeNumeric(o) = &phi.kind else {
                unreachable!("the ODE solver returns a numeric phi")
            };
            let mut text = String::new();
            text.push_str(&format!("phi = {}\n", quote(&phi.to_string())));
            text.push_str(&format!("interval = [{}, {}]\n", float(o.lo), float(o.hi)));
            text.push_str(&format!("b0 = {}\n", float(phi.b0)));
            if let Some(w) = &o.warning {
                text.push_str(&format!("warning = {}\n", quote(w)));
            }
            let mut worst = 0.0_f64;
            let mut rows = String::new();
            for s in s_grid(0.9 * phi.b0, points) {
                let eval = CliError::eval(format!("phi at s = {s}"));
                let v = phi.value(s).map_err(eval)?;
                let t = phi.q_theta_psi(s, b).map_err(CliError::eval(format!("Q at s = {s}")))?;
                let res = o.p_residual(&phi, s).map_err(CliError::eval(format!("residual at s = {s}")))?;
                worst = worst.max(res);
                rows.push_str(&format!(
                    "\n[[sample]]\ns = {}\nphi = {}\nQ = {}\nresidual = {}\n",
                    float(s),
                    float(v),
                    float(t.q),
                    float(res)
                ));
            }
            let residual = ClassifierReport::new("ode_residual", worst, tol);
            let regular = regularity_check(&phi, phi.b0, &s_grid(phi.b0, points));
            text.push_str(&rows);
            text.push('\n');
            text.push_str(&reports_to_toml(&[residual.clone(), regular]));
            emit(out, &text)?;
            Ok(if residual.passed() { EXIT_PASS } else { EXIT_PREDICATE })
        }
        Command::Catalog { name, params } => {
            match name {
                None => {
                    for (n, d) in CATALOG {
                        println!("{n:<18} {d}");
                    }
                }
                Some(name) => {
                    let p = parse_params(params.as_deref().unwrap_or("")).map_err(CliError::from_core)?;
                    let e = catalog_get(&name, &p).map_err(CliError::from_core)?;
                    println!("name = {}", quote(&e.name));
                    println!("description = {}", quote(&e.description));
                    println!("dim = {}", e.dim());
                    println!("grid_lo = {}", finsler_lab::report::float_array(&e.grid.lo));
                    println!("grid_hi = {}", finsler_lab::report::float_array(&e.grid.hi));
                    for x in &e.expected {
                        println!("\n[[expected]]");
                        println!("predicate = {}", quote(x.predicate));
                        println!("holds = {}", x.holds);
                        println!("reason = {}", quote(x.reason));
                    }
                }
            }
            Ok(EXIT_PASS)
        }
        Command::Verify {
            tol,
            seed,
            grid,
            check,
            out,
        } => {
            if tol.is_some_and(|t| !(t > 0.0)) {
                return Err(CliError::Usage("--tol must be positive".into()));
            }
            let opts = VerifyOptions {
                seed,
                tol_override: tol,
                nx: grid.0,
                ny: grid.1,
            };
            let summary = match check {
                Some(id) => VerifySummary {
                    seed,
                    tol_override: tol,
                    checks: vec![run_check(id, &opts)],
                },
                None => run_verify(&opts),
            };
            for l in summary.lines() {
                eprintln!("{l}");
            }
            let n_pass = summary.checks.iter().filter(|c| c.passed()).count();
            let total = if check.is_some() { 1 } else { CHECK_TITLES.len() };
            eprintln!("{n_pass}/{total} criteria passed");
            emit(out, &summary.render())?;
            Ok(if summary.passed() { EXIT_PASS } else { EXIT_PREDICATE })
        }
    }
}

fn load_config(m: &MetricArgs) -> Result<RunConfig, CliError> {
    match &m.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// Single writer: the file if given, else stdout.
fn emit(out: Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(&p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compute::QUANTITIES;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_quantity_is_listed_in_the_help() {
        let help = Cli::command()
            .find_subcommand_mut("compute")
            .unwrap()
            .render_long_help()
            .to_string();
        for (q, _) in QUANTITIES {
            assert!(help.contains(q), "{q}");
        }
    }
}
