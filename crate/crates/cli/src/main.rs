use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mfwave::config::{ConfigFile, RunConfig};
use mfwave::io;
use mfwave::kpp::solve_kpp;
use mfwave::sweep::{check_trends, compare_kpp, run_sweep, Axis, Output, SweepSpec};
use mfwave::wave::{solve_coupled_with, SolveOptions};
use mfwave::{Error, Grid};

/// Traveling waves of the mean-field knowledge-diffusion system.
#[derive(Parser)]
#[command(name = "mfwave", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the coupled system.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Profile CSV (x, F, Q, Qtilde, R, s_star).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Diagnostics JSON.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        /// Hold s* = 1, which reduces the front to the KPP equation.
        #[arg(long)]
        freeze_policy: bool,
    },
    /// Solve the Fisher-KPP front with F(0) = 1/2.
    Kpp {
        #[command(flatten)]
        common: Common,
        /// Profile CSV (x, F).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: Option<Axis>,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated result columns (default: all but wall_time).
        #[arg(long, value_delimiter = ',')]
        outputs: Option<Vec<Output>>,
        /// Start each point from the previous solution (sequential).
        #[arg(long)]
        warm_start: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the expected trends along the axis; exit 1 if one fails.
        #[arg(long)]
        check_trends: bool,
    },
    /// Compare the coupled front with the pure KPP front.
    CompareKpp {
        #[command(flatten)]
        common: Common,
        /// Paired profiles (x, F_coupled, F_kpp).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Level-slope table.
        #[arg(long)]
        slopes: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML manifest; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Outer iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Damping of the front update, in (0, 1].
    #[arg(long)]
    relax: Option<f64>,
}

impl Common {
    fn resolve(&self, extra: ConfigFile) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            kappa: self.kappa,
            alpha: self.alpha,
            rho: self.rho,
            a: self.a,
            h: self.h,
            tol: self.tol,
            max_outer: self.max_iters,
            relaxation: self.relax,
            ..extra
        };
        Ok(file.merge(flags).resolve()?)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map(Error::exit_code).unwrap_or(3);
            ExitCode::from(code as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Solve {
            common,
            out,
            diagnostics,
            freeze_policy,
        } => {
            let rc = common.resolve(ConfigFile::default())?;
            let g = Grid::new(rc.a, rc.h)?;
            let opts = SolveOptions {
                freeze_policy,
                ..Default::default()
            };
            let sol = match solve_coupled_with(&g, &rc.params, &rc.solver, &opts) {
                Ok(s) => s,
                Err(Error::NonConvergence {
                    iterations,
                    residual,
                    last,
                    history,
                }) => {
                    if let (Some(path), Some(s)) = (&out, &last) {
                        io::write_profile_csv(path, &io::profile_rows(s))?;
                    }
                    return Err(Error::NonConvergence {
                        iterations,
                        residual,
                        history,
                        last,
                    }
                    .into());
                }
                Err(e) => return Err(e.into()),
            };
            for w in &sol.warnings {
                eprintln!("warning: {w}");
            }
            let d = &sol.diagnostics;
            println!("c = {:?}", sol.profile.c);
            match d.x0 {
                Some(x0) => println!("x0 = {x0:?}"),
                None => println!("x0 = none"),
            }
            println!("gamma = {:?}", d.gamma);
            println!("iterations = {}", sol.iterations);
            if let Some(path) = &out {
                io::write_profile_csv(path, &io::profile_rows(&sol))?;
            }
            match &diagnostics {
                Some(path) => io::write_diagnostics_json(path, d)?,
                None => println!("{}", io::diagnostics_json(d)),
            }
            Ok(0)
        }
        Cmd::Kpp { common, out } => {
            let rc = common.resolve(ConfigFile::default())?;
            let g = Grid::new(rc.a, rc.h)?;
            let w = solve_kpp(&g, &rc.params, &rc.solver)?;
            println!("c = {:?}", w.c);
            println!("c_linear = {:?}", rc.params.kpp_speed());
            if let Some(path) = &out {
                let rows: Vec<io::FrontRow> = (0..g.len())
                    .map(|i| io::FrontRow {
                        x: g.x(i),
                        f: w.f[i],
                    })
                    .collect();
                io::write_front_csv(path, &rows)?;
            }
            Ok(0)
        }
        Cmd::Sweep {
            common,
            axis,
            values,
            workers,
            outputs,
            warm_start,
            out,
            check_trends: check,
        } => {
            let extra = ConfigFile {
                axis,
                values,
                workers,
                warm_start: warm_start.then_some(true),
                ..Default::default()
            };
            let rc = common.resolve(extra)?;
            let axis = rc
                .axis
                .context("no sweep axis given (--axis or `axis` in the config)")?;
            let values = rc.values.clone().context("no sweep values given")?;
            let outputs = outputs.unwrap_or_else(|| Output::DEFAULT.to_vec());
            let spec = SweepSpec {
                base: rc.params,
                a: rc.a,
                h: rc.h,
                cfg: rc.solver.clone(),
                axis,
                values,
                outputs: outputs.clone(),
                warm_start: rc.warm_start,
            };
            let workers = rc.workers.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            });
            let records = run_sweep(&spec, workers)?;
            for r in &records {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
                println!(
                    "{} = {:<8} c = {:<10} x0 = {:<10} gamma = {:<10} {}",
                    axis,
                    spec.values[r.index],
                    fmt(r.c),
                    fmt(r.x0),
                    fmt(r.gamma),
                    r.status
                );
            }
            if let Some(path) = &out {
                io::write_sweep_csv(path, &records, &outputs)?;
            }
            if check {
                let checks = check_trends(axis, &records);
                for t in &checks {
                    println!(
                        "{} {}: {}",
                        if t.passed { "PASS" } else { "FAIL" },
                        t.name,
                        t.detail
                    );
                }
                if checks.iter().any(|t| !t.passed) {
                    return Ok(1);
                }
            }
            Ok(0)
        }
        Cmd::CompareKpp {
            common,
            out,
            slopes,
        } => {
            let rc = common.resolve(ConfigFile::default())?;
            let g = Grid::new(rc.a, rc.h)?;
            let cmp = compare_kpp(&rc.params, &g, &rc.solver, &SolveOptions::default())?;
            println!("c_coupled = {:?}", cmp.c_coupled);
            println!("c_kpp = {:?}", cmp.c_kpp);
            println!("{:>6} {:>12} {:>12}", "level", "coupled", "kpp");
            for s in &cmp.slopes {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
                println!("{:>6.2} {:>12} {:>12}", s.level, fmt(s.coupled), fmt(s.kpp));
            }
            if let Some(path) = &out {
                io::write_pair_csv(path, &cmp)?;
            }
            if let Some(path) = &slopes {
                io::write_slopes_csv(path, &cmp)?;
            }
            Ok(0)
        }
    }
}
