use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use optomech_cv::config::{load_params, to_json_value};
use optomech_cv::densecoding::{nbar_floor, rate_point, RatePoint};
use optomech_cv::figures::{figure_with, preset_params, PRESET_IDS};
use optomech_cv::params::{fixed_point, DetuningMode};
use optomech_cv::sweep::{resolve_workers, run_sweep, Axis, Observable, SweepSpec};
use optomech_cv::{conventions, derive, entanglement, evaluate, Error, PhysicalParams, Result};

#[derive(Parser)]
#[command(
    name = "optomech-cv",
    version,
    about = "Output-mode entanglement and dense-coding rates of a two-subcavity optomechanical system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Parameter file (flat TOML, SI units)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Derived couplings, occupancies and detunings
    Derive(Common),
    /// Drift matrix and Hurwitz test
    Stability(Common),
    /// Stationary covariance matrix of the filtered outputs
    Cm(Common),
    /// Log-negativity, Duan sum and symplectic eigenvalues
    Entangle(Common),
    /// Dense-coding rate and reference capacities over a photon-number grid
    Rate {
        #[command(flatten)]
        common: Common,
        /// Photon numbers to evaluate, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9,10")]
        nbar: Vec<f64>,
    },
    /// 1D or 2D parameter sweep
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Base parameters from a figure preset instead of --config
        #[arg(long)]
        preset: Option<String>,
        /// param:lo:hi:points[:omega_m]
        #[arg(long)]
        axis: Axis,
        /// Second axis, same syntax
        #[arg(long)]
        axis2: Option<Axis>,
        /// log_negativity | duan | margin | rate:<nbar>
        #[arg(long, default_value = "log_negativity")]
        observable: Observable,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Reproduce a figure preset
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_IDS))]
        preset: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn params_from(common: &Common, preset: Option<&str>) -> Result<PhysicalParams> {
    match (&common.config, preset) {
        (Some(path), _) => load_params(path),
        (None, Some(id)) => preset_params(id),
        (None, None) => Err(Error::Config("--config <file> is required".into())),
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn write_manifest(
    dir: &Path,
    command: &str,
    params: &PhysicalParams,
    extra: Value,
) -> Result<PathBuf> {
    let manifest = json!({
        "command": command,
        "version": optomech_cv::VERSION,
        "params": to_json_value(params),
        "conventions": conventions::current(),
        "extra": extra,
    });
    write_json(dir, "manifest.json", &manifest)
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match cli.command {
        Command::Derive(c) => {
            let p = params_from(&c, None)?;
            let d = derive(&p)?;
            let mut extra = json!({});
            if let DetuningMode::Bare { .. } = p.detuning_mode {
                let fp = fixed_point(&p)?;
                if let Some(w) = fp.warning() {
                    log::warn!("{w:?}");
                }
                extra = json!({ "static_roots": fp.roots, "selected_root": fp.selected });
            }
            println!(
                "G_r/Ω_m = {:.6}  G_l/Ω_m = {:.6}  n̄_mech = {:.3}",
                d.geff_r / p.omega_m,
                d.geff_l / p.omega_m,
                d.nbar_mech
            );
            written.push(write_json(&c.out, "derived.json", &d)?);
            written.push(write_manifest(&c.out, "derive", &p, extra)?);
        }
        Command::Stability(c) => {
            let p = params_from(&c, None)?;
            let e = evaluate_model_only(&p)?;
            println!(
                "{} (max Re λ = {:e} rad/s)",
                if e.1.stable { "stable" } else { "unstable" },
                e.1.margin
            );
            written.push(write_json(&c.out, "stability.json", &e.1)?);
            fs::write(c.out.join("model.txt"), e.0.dump())?;
            written.push(c.out.join("model.txt"));
            written.push(write_manifest(&c.out, "stability", &p, json!({}))?);
        }
        Command::Cm(c) => {
            let p = params_from(&c, None)?;
            let e = evaluate(&p)?;
            let (Some(cm), Some(block)) = (e.output, e.block) else {
                return Err(Error::Unstable {
                    margin: e.stability.margin,
                });
            };
            println!("{}", optomech_cv::dynamics::format_matrix(&cm.matrix));
            written.push(write_json(&c.out, "cm.json", &cm)?);
            written.push(write_json(&c.out, "block.json", &block)?);
            written.push(write_manifest(&c.out, "cm", &p, json!({}))?);
        }
        Command::Entangle(c) => {
            let p = params_from(&c, None)?;
            let e = evaluate(&p)?;
            let block = e.block.ok_or(Error::Unstable {
                margin: e.stability.margin,
            })?;
            let report = entanglement(&block)?;
            for w in &report.warnings {
                log::warn!("{w:?}");
            }
            println!(
                "E_N = {:.6}  duan = {:.6}  L = {:.6}  R = {:.6}  C = {:.6}",
                report.log_negativity, report.duan_sum, block.big_l, block.big_r, block.c
            );
            written.push(write_json(&c.out, "entanglement.json", &report)?);
            written.push(write_manifest(&c.out, "entangle", &p, json!({}))?);
        }
        Command::Rate { common, nbar } => {
            let p = params_from(&common, None)?;
            let e = evaluate(&p)?;
            let block = e.block.ok_or(Error::Unstable {
                margin: e.stability.margin,
            })?;
            let floor = nbar_floor(&block);
            let rows: Vec<RatePoint> = nbar
                .iter()
                .map(|&n| rate_point(&block, n))
                .collect::<Result<_>>()?;
            if rows.iter().any(|r| r.i_om.is_none()) {
                log::warn!("i_om left empty below the minimum usable n̄ = {floor}");
            }
            fs::create_dir_all(&common.out)?;
            let path = common.out.join("rates.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(RatePoint::CSV_HEADER)?;
            for r in &rows {
                w.write_record(r.csv_record())?;
            }
            w.flush()?;
            written.push(path);
            written.push(write_manifest(
                &common.out,
                "rate",
                &p,
                json!({ "nbar_floor": floor, "block": block }),
            )?);
        }
        Command::Sweep {
            common,
            preset,
            axis,
            axis2,
            observable,
            workers,
        } => {
            let p = params_from(&common, preset.as_deref())?;
            let spec = SweepSpec {
                axis1: axis,
                axis2,
                observable,
                preset,
            };
            let result = run_sweep(&spec, &p, resolve_workers(workers))?;
            fs::create_dir_all(&common.out)?;
            let path = common.out.join("sweep.csv");
            fs::write(&path, result.to_csv_string()?)?;
            written.push(path);
            written.push(write_manifest(
                &common.out,
                "sweep",
                &p,
                json!({ "sweep": spec }),
            )?);
        }
        Command::Figure {
            preset,
            common,
            workers,
        } => {
            let p = params_from(&common, Some(&preset))?;
            let out = figure_with(&preset, &p, resolve_workers(workers))?;
            written.extend(out.write(&common.out)?);
        }
    }
    Ok(written)
}

fn evaluate_model_only(
    p: &PhysicalParams,
) -> Result<(optomech_cv::LinearModel, optomech_cv::StabilityReport)> {
    let model = optomech_cv::build(&derive(p)?);
    let report = optomech_cv::stability(&model)?;
    Ok((model, report))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
