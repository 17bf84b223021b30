use clap::{Parser, Subcommand};
use penal_dg::config::{run_many, run_with_options, with_sweep_value, RunConfig, SweepParam};
use penal_dg::diagnostics::write_csv;
use penal_dg::mea;
use penal_dg::presets::{run_preset, Preset};
use penal_dg::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Penalized DG advection-diffusion solver and modified-equation analyzer.
#[derive(Parser)]
#[command(name = "penal-dg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file and write its error report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a nodal snapshot every this many steps.
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// Run one configuration once per value of a swept parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of: eta1, eta2, eta3, delta.
        #[arg(long)]
        param: String,
        /// Comma-separated list of values, e.g. 1e-3,1e-4,1e-5.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Maximum concurrent runs (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Modified-equation analysis of a named solution family.
    Mea {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0.001)]
        nu: f64,
        #[arg(long, default_value_t = 0.05)]
        dx: f64,
        #[arg(long, default_value_t = 1e-3)]
        eta1: f64,
        /// Highest Taylor order analyzed.
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Override the family's trace-continuity assumption.
        #[arg(long)]
        continuous: Option<bool>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a bundled experiment (fig3..fig9, table2).
    Preset {
        name: String,
        /// Evaluate the preset's acceptance checks; nonzero exit on failure.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Diverged { .. } => 3,
        Error::CheckFailed(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn dispatch(cli: Cli) -> penal_dg::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            snapshot_every,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out"));
            let outcome = run_with_options(&cfg, Some(&out_dir), snapshot_every)?;
            write_csv(
                &out_dir.join(format!("{}.csv", cfg.case_id)),
                std::slice::from_ref(&outcome.record),
            )?;
            println!(
                "{}: steps = {}, error_fluid = {:e}, error_solid = {:e}",
                cfg.case_id, outcome.steps, outcome.record.error_fluid, outcome.record.error_solid
            );
            Ok(())
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
            jobs,
        } => {
            let base = RunConfig::from_file(&config)?;
            let param = SweepParam::parse(&param)?;
            let values: Vec<f64> = values
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad sweep value '{s}'")))
                })
                .collect::<penal_dg::Result<_>>()?;
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("sweep values must be finite".into()));
            }
            let configs: Vec<RunConfig> = values
                .iter()
                .map(|&v| with_sweep_value(&base, param, v))
                .collect();
            let outcomes = run_many(&configs, jobs.unwrap_or_else(default_jobs));

            // For eta2 sweeps, flag the row nearest the optimum -1/c.
            let nearest_optimal = (param == SweepParam::Eta2).then(|| {
                let target = -1.0 / base.c[0];
                values
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        (*a - target).abs().total_cmp(&(*b - target).abs())
                    })
                    .map(|(i, _)| i)
                    .unwrap()
            });

            let mut records = Vec::new();
            let mut first_error: Option<Error> = None;
            for (i, (cfg, outcome)) in configs.iter().zip(outcomes).enumerate() {
                let mut record = match outcome {
                    Ok(o) => o.record,
                    Err(e) => {
                        eprintln!("run {} failed: {e}", cfg.case_id);
                        let mut rec = cfg.skeleton_record();
                        rec.error_fluid = f64::NAN;
                        rec.error_solid = f64::NAN;
                        if first_error.is_none() {
                            first_error = Some(e);
                        }
                        rec
                    }
                };
                if nearest_optimal == Some(i) {
                    record.case_id.push_str("_nearest_optimal");
                }
                println!("{}", record.csv_row());
                records.push(record);
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out"));
            write_csv(
                &out_dir.join(format!("{}_sweep_{}.csv", base.case_id, param.name())),
                &records,
            )?;
            match first_error {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Mea {
            family,
            c,
            nu,
            dx,
            eta1,
            order,
            continuous,
            out,
        } => {
            let (input, suggested) = mea::family(&family, c, nu, dx, eta1, order)?;
            let continuity = match continuous {
                Some(true) => mea::TraceContinuity::Continuous,
                Some(false) => mea::TraceContinuity::Discontinuous,
                None => suggested,
            };
            let report = mea::build_report(&input, continuity)?;
            print!("{}", report.render_text());
            if family == "trivial" {
                let verdict = mea::verify_trivial_solution(c, nu, dx, eta1, order)?;
                println!(
                    "trivial-solution cancellation: {} (max ladder {:e}, max source {:e})",
                    if verdict.pass { "pass" } else { "FAIL" },
                    verdict.max_zhe,
                    verdict.max_dg_source
                );
                if !verdict.pass {
                    return Err(Error::CheckFailed(
                        "trivial solution left a nonzero coefficient".into(),
                    ));
                }
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join(format!("mea_{family}.csv")), report.csv())?;
            }
            Ok(())
        }
        Command::Preset {
            name,
            check,
            out,
            jobs,
        } => {
            let preset = Preset::parse(&name)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out"));
            let result = run_preset(preset, Some(&out_dir), jobs.unwrap_or_else(default_jobs))?;
            for rec in &result.records {
                println!("{}", rec.csv_row());
            }
            for msg in &result.messages {
                println!("{msg}");
            }
            if check && !result.passed {
                return Err(Error::CheckFailed(format!(
                    "preset {name} failed its checks"
                )));
            }
            Ok(())
        }
    }
}
