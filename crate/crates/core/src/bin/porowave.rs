use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use porowave::harness::{self, cases, output, SimulationConfig};
use porowave::limiter::StrengthRatio;
use porowave::Error;

#[derive(Parser)]
#[command(name = "porowave", version, about = "Poroelastic/fluid wave propagation on mapped grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ratio {
    Classical,
    EShear,
    EFull,
}

impl From<Ratio> for StrengthRatio {
    fn from(r: Ratio) -> Self {
        match r {
            Ratio::Classical => StrengthRatio::Classical,
            Ratio::EShear => StrengthRatio::EShear,
            Ratio::EFull => StrengthRatio::EFull,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML configuration.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one plane-wave case and print its errors.
    Case {
        id: usize,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Write the case configuration as TOML instead of running it.
        #[arg(long)]
        dump: bool,
    },
    /// Convergence study of plane-wave cases.
    Converge {
        /// Case ids; all cases when empty.
        ids: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
        resolutions: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare strength ratios on the tilted grid.
    LimiterStudy {
        #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
        resolutions: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        ratio: Option<Ratio>,
    },
    /// Acoustic pulse on the undulating sandstone bed.
    Demo {
        #[arg(long, default_value_t = 60)]
        nx: usize,
        #[arg(long, default_value_t = 60)]
        ny: usize,
        #[arg(long, default_value_t = 120)]
        nz: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the grid of a configuration and report volumes and closure.
    GeometryCheck { config: PathBuf },
}

fn run(cli: Cli) -> porowave::Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let c = SimulationConfig::load(&config)?;
            let prepared = harness::prepare(&c)?;
            println!("dt={:.6e} steps={}", prepared.dt, prepared.steps);
            let sim = prepared.run(c.viscous, out.as_deref())?;
            println!("t={:.6e} energy={:.6e}", sim.t, sim.total_energy());
            if let Some(exact) = prepared.exact {
                let e = harness::compute_errors(&sim, &exact);
                println!("l1={:.6e} max={:.6e}", e.l1, e.max);
            }
        }
        Command::Case { id, n, dump } => {
            let c = cases::build_case(id, n)?;
            if dump {
                print!("{}", c.to_toml()?);
                return Ok(());
            }
            let e = harness::run_and_measure(&c)?;
            println!("case {id} N={n}: l1={:.6e} max={:.6e}", e.l1, e.max);
        }
        Command::Converge { ids, resolutions, out } => {
            let ids = if ids.is_empty() {
                (0..cases::CASE_COUNT).collect()
            } else {
                ids
            };
            let mut reports = Vec::new();
            for id in ids {
                let r = harness::run_convergence(id, &resolutions)?;
                println!(
                    "case {id}: l1 {:?} rate {:?}, max {:?} rate {:?}",
                    r.l1, r.rate_l1, r.max, r.rate_max
                );
                reports.push(r);
            }
            if let Some(dir) = out {
                output::write_report(&reports, &output::report_path(&dir))?;
            }
        }
        Command::LimiterStudy { resolutions, out, ratio } => {
            let reports = match ratio {
                Some(r) => {
                    let norms = resolutions
                        .iter()
                        .map(|&n| cases::build_limiter_case(n, r.into()).and_then(|c| harness::run_and_measure(&c)))
                        .collect::<porowave::Result<Vec<_>>>()?;
                    let l1: Vec<f64> = norms.iter().map(|e| e.l1).collect();
                    let max: Vec<f64> = norms.iter().map(|e| e.max).collect();
                    println!("l1 {l1:?} rate {:?}", harness::fit_rate(&resolutions, &l1));
                    println!("max {max:?} rate {:?}", harness::fit_rate(&resolutions, &max));
                    Vec::new()
                }
                None => {
                    let cmp = harness::run_limiter_comparison(&resolutions)?;
                    for r in [&cmp.classical, &cmp.e_full] {
                        println!("{}: l1 {:?} rate {:?}, max {:?} rate {:?}", r.label, r.l1, r.rate_l1, r.max, r.rate_max);
                    }
                    vec![cmp.classical, cmp.e_full]
                }
            };
            if let Some(dir) = out {
                output::write_report(&reports, &output::report_path(&dir))?;
            }
        }
        Command::Demo { nx, ny, nz, out } => {
            let d = harness::run_demo([nx, ny, nz], out.as_deref())?;
            println!(
                "dt={:.6e} steps={} solvers={} limited_in_rock={}",
                d.dt, d.steps, d.solver_count, d.limited_in_rock
            );
            for (name, r) in [("inviscid", &d.inviscid), ("viscous", &d.viscous)] {
                println!(
                    "{name}: energy={:.6e} rock_energy={:.6e} symmetry={:.3e} slice_peak_p={:.6e}",
                    r.final_energy, r.rock_energy, r.symmetry_error, r.slice_peak_pressure
                );
            }
        }
        Command::GeometryCheck { config } => {
            let c = SimulationConfig::load(&config)?;
            let g = harness::geometry_check(&c)?;
            println!(
                "cells={} volume={:.6e} min={:.6e} max={:.6e} closure={:.3e}",
                g.cells, g.interior_volume, g.min_volume, g.max_volume, g.max_closure
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidCase(_) | Error::InvalidParameter(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
