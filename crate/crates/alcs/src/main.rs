use std::path::PathBuf;
use std::process::ExitCode as ProcessExit;

use alcs::commands::{
    cmd_check, cmd_info, cmd_lp_norm, cmd_run, cmd_sweep, cmd_twin, format_table, CheckOptions,
    CliError, ExitCode, SweepAxis,
};
use alcs::config::{load_config, RunConfig};
use clap::{Parser, Subcommand};

/// Pseudo-spectral active nematic simulator.
#[derive(Parser)]
#[command(name = "alcs", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a simulation from a config file.
    Run { config: PathBuf },
    /// Run the invariant suite and print a pass/fail table.
    Check {
        /// Config supplying parameters, grid size and seed (defaults otherwise).
        config: Option<PathBuf>,
        /// Override the grid size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
    /// Run two configs from the same initial data and compare them.
    Twin { a: PathBuf, b: PathBuf },
    /// Run a batch varying one parameter.
    Sweep {
        config: PathBuf,
        /// kappa, n_trunc or eps.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
    },
    /// Littlewood-Paley and Fourier H^s norms of a snapshot.
    LpNorm {
        snapshot: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
    },
    /// Print a snapshot header.
    Info { snapshot: PathBuf },
}

fn exit(code: ExitCode) -> ProcessExit {
    ProcessExit::from(code as u8)
}

fn fail(e: CliError) -> ProcessExit {
    eprintln!("error: {e}");
    exit(e.exit_code())
}

fn main() -> ProcessExit {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e.into()),
            };
            match cmd_run(&cfg) {
                Ok(s) => {
                    println!(
                        "{} steps, {:?}, outputs in {}",
                        s.steps,
                        s.status,
                        s.out_dir.display()
                    );
                    print!("{}", format_table(&s.checks));
                    exit(s.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Check {
            config,
            n,
            inject_sign_flip,
        } => {
            let cfg = match config.map(|p| load_config(&p)).transpose() {
                Ok(c) => c.unwrap_or_default(),
                Err(e) => return fail(e.into()),
            };
            let mut opts = CheckOptions::from_config(&cfg);
            if let Some(n) = n {
                opts.n = n;
            }
            opts.inject_sign_flip = inject_sign_flip;
            match cmd_check(&opts) {
                Ok(lines) => {
                    print!("{}", format_table(&lines));
                    match lines.iter().find(|l| !l.pass) {
                        Some(l) => {
                            eprintln!("check failed: {}", l.name);
                            exit(ExitCode::CheckFailed)
                        }
                        None => exit(ExitCode::Ok),
                    }
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Twin { a, b } => {
            let (ca, cb) = match (load_config(&a), load_config(&b)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => return fail(e.into()),
            };
            match cmd_twin(&ca, &cb) {
                Ok(r) => {
                    let last = r.deltas.last().map(|d| d.total()).unwrap_or(0.0);
                    println!("{} samples, final delta {last:.6e}", r.deltas.len());
                    println!(
                        "Gronwall envelope {} (max Y/envelope {:.4e})",
                        if r.envelope_holds {
                            "holds"
                        } else {
                            "violated"
                        },
                        r.worst_ratio
                    );
                    exit(r.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Sweep {
            config,
            axis,
            values,
        } => {
            let Some(ax) = SweepAxis::parse(&axis) else {
                eprintln!("error: unknown sweep axis '{axis}' (kappa, n_trunc or eps)");
                return exit(ExitCode::Io);
            };
            let cfg: RunConfig = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e.into()),
            };
            match cmd_sweep(&cfg, ax, &values, &mut std::io::stdout()) {
                Ok(r) => {
                    for (v, e) in &r.errors {
                        eprintln!("{axis} = {v}: {e}");
                    }
                    exit(r.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Cmd::LpNorm { snapshot, s } => match cmd_lp_norm(&snapshot, s) {
            Ok(r) => {
                for f in &r.fields {
                    println!(
                        "{:<16} LP H^{s} {:.12e}  Fourier H^{s} {:.12e}",
                        f.name, f.lp, f.fourier
                    );
                }
                if let Some(phi) = r.phi {
                    println!("phi {phi:.12e}");
                }
                exit(ExitCode::Ok)
            }
            Err(e) => fail(e),
        },
        Cmd::Info { snapshot } => match cmd_info(&snapshot) {
            Ok(s) => {
                print!("{s}");
                exit(ExitCode::Ok)
            }
            Err(e) => fail(e),
        },
    }
}
