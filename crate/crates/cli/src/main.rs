//! `pilotcell`: Monte Carlo simulation and closed-form analysis of uplink
//! SINR under pilot contamination in multi-cell massive MIMO.
//!
//! Subcommands: `simulate` (Monte Carlo samples + empirical coverage),
//! `ccdf` (closed-form coverage), `min-delta` (smallest reuse factor meeting
//! a coverage target), `throughput` (cell throughput vs reuse factor), and
//! `figure fig2|fig3|fig4|fig5` (reproduction presets). Run with `--help`
//! for the flag reference; see the README for the config-file schema.

mod appconfig;
mod commands;
mod logger;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::parser::ValueSource;
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};

use pilotcell::montecarlo::{InterfererMode, SinrMode};
use pilotcell::DeploymentModel;

use appconfig::{
    default_grid_db, parse_interferers, parse_model, parse_sinr_mode, ExperimentSpec, FileConfig,
    Formats,
};
use commands::Fig;

fn main() -> ExitCode {
    let timer = Instant::now();
    let matches = command_tree().get_matches();
    logger::install(matches.get_count("verbose"));
    match run(&matches) {
        Ok(n_files) => {
            log::info!(
                "{n_files} output file(s) written in {:.2?}",
                timer.elapsed()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            log::error!("{err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(matches: &ArgMatches) -> Result<usize> {
    let (name, sub) = matches
        .subcommand()
        .expect("clap enforces subcommand_required");
    let file = match sub.get_one::<PathBuf>("config") {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let (spec, drops_override) = resolve_spec(name, sub, &file)?;
    spec.validate()?;
    let outputs = match name {
        "simulate" => commands::cmd_simulate(&spec)?,
        "ccdf" => commands::cmd_ccdf(&spec)?,
        "min-delta" => commands::cmd_min_delta(&spec)?,
        "throughput" => commands::cmd_throughput(&spec)?,
        "figure" => {
            let which = Fig::parse(sub.get_one::<String>("which").expect("required"))?;
            commands::cmd_figure(&spec, which, drops_override)?
        }
        other => unreachable!("unknown subcommand {other}"),
    };
    outputs.write_all(&spec.out_dir)?;
    Ok(outputs.len())
}

/// Whether the arg exists on this subcommand at all.
fn defined(m: &ArgMatches, id: &str) -> bool {
    m.try_contains_id(id).is_ok()
}

/// Whether the user passed the flag explicitly (as opposed to a clap
/// default). Explicit flags outrank config-file values, which outrank
/// defaults.
fn explicit(m: &ArgMatches, id: &str) -> bool {
    defined(m, id) && matches!(m.value_source(id), Some(ValueSource::CommandLine))
}

fn resolve_f64(m: &ArgMatches, id: &str, file_value: Option<f64>, fallback: f64) -> f64 {
    if explicit(m, id) {
        return *m.get_one::<f64>(id).expect("typed by clap");
    }
    if let Some(v) = file_value {
        return v;
    }
    if defined(m, id) {
        if let Some(v) = m.get_one::<f64>(id) {
            return *v;
        }
    }
    fallback
}

fn resolve_spec(
    name: &str,
    m: &ArgMatches,
    file: &FileConfig,
) -> Result<(ExperimentSpec, Option<u64>)> {
    let run = &file.run;
    let config = file.system_config();

    let seed = if explicit(m, "seed") {
        *m.get_one::<u64>("seed").expect("typed by clap")
    } else {
        run.seed.unwrap_or(7)
    };
    let out_dir = PathBuf::from(m.get_one::<String>("out").expect("has default"));
    let formats = Formats::from_names(
        m.get_many::<String>("format")
            .expect("has defaults")
            .map(String::as_str),
    )?;

    let model = if explicit(m, "model") {
        parse_model(m.get_one::<String>("model").expect("typed by clap"))?
    } else if let Some(s) = &run.model {
        parse_model(s)?
    } else {
        DeploymentModel::GuardRegion
    };
    let interferers = if explicit(m, "interferers") {
        parse_interferers(m.get_one::<String>("interferers").expect("typed by clap"))?
    } else if let Some(s) = &run.interferers {
        parse_interferers(s)?
    } else {
        InterfererMode::Voronoi
    };
    let sinr_mode = if explicit(m, "sinr-mode") {
        parse_sinr_mode(m.get_one::<String>("sinr-mode").expect("typed by clap"))?
    } else if let Some(s) = &run.sinr_mode {
        parse_sinr_mode(s)?
    } else {
        SinrMode::Instantaneous
    };

    // `figure` presets pick their own drop counts unless the user pins one
    // (flag or file); `simulate` falls back to 2000.
    let drops_override: Option<u64> = if explicit(m, "drops") {
        Some(*m.get_one::<u64>("drops").expect("typed by clap"))
    } else {
        run.drops
    };
    let n_drops = drops_override.unwrap_or(2000);

    let grid_db = run.thresholds_db.clone().unwrap_or_else(default_grid_db);
    let gamma = resolve_f64(m, "gamma", run.gamma, 0.9);
    let t_db = resolve_f64(m, "t-db", run.t_db, 10.0);
    let default_delta_max = if name == "throughput" { 8.0 } else { 16.0 };
    let delta_max = resolve_f64(m, "delta-max", run.delta_max, default_delta_max);

    Ok((
        ExperimentSpec {
            config,
            model,
            interferers,
            sinr_mode,
            grid_db,
            n_drops,
            seed,
            out_dir,
            formats,
            gamma,
            t_db,
            delta_max,
        },
        drops_override,
    ))
}

fn command_tree() -> Command {
    Command::new("pilotcell")
        .version(env!("CARGO_PKG_VERSION"))
        .about(
            "Uplink massive MIMO pilot contamination: stochastic-geometry Monte Carlo \
             simulation and closed-form SINR coverage analysis",
        )
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(config_arg())
        .arg(out_arg())
        .arg(format_arg())
        .arg(seed_arg())
        .arg(verbose_arg())
        .subcommand(
            Command::new("simulate")
                .about("Run Monte Carlo drops; emit SINR samples and the empirical coverage curve")
                .arg(drops_arg().default_value("2000"))
                .arg(model_arg())
                .arg(interferers_arg())
                .arg(sinr_mode_arg()),
        )
        .subcommand(
            Command::new("ccdf")
                .about("Evaluate the closed-form coverage probability over the threshold grid"),
        )
        .subcommand(
            Command::new("min-delta")
                .about("Solve for the smallest pilot reuse factor meeting a coverage target")
                .arg(gamma_arg())
                .arg(t_db_arg())
                .arg(delta_max_arg("16.0")),
        )
        .subcommand(
            Command::new("throughput")
                .about("Sweep cell throughput over integer reuse factors; report the optimum")
                .arg(delta_max_arg("8.0")),
        )
        .subcommand(
            Command::new("figure")
                .about(
                    "Reproduction presets (fig2..fig5); swept parameters are pinned by the preset",
                )
                .arg(
                    Arg::new("which")
                        .required(true)
                        .value_parser(["fig2", "fig3", "fig4", "fig5"])
                        .help("Which preset to run"),
                )
                .arg(drops_arg())
                .arg(gamma_arg())
                .arg(delta_max_arg("16.0")),
        )
}

fn config_arg() -> Arg {
    Arg::new("config")
        .long("config")
        .global(true)
        .value_parser(value_parser!(PathBuf))
        .help("TOML configuration file with [system] and [run] tables")
}

fn out_arg() -> Arg {
    Arg::new("out")
        .long("out")
        .global(true)
        .default_value("out")
        .help("Output directory (created if missing)")
}

fn format_arg() -> Arg {
    Arg::new("format")
        .long("format")
        .global(true)
        .value_delimiter(',')
        .value_parser(["csv", "json", "svg"])
        .default_values(["csv", "json"])
        .help("Output formats, comma separated")
}

fn seed_arg() -> Arg {
    Arg::new("seed")
        .long("seed")
        .global(true)
        .value_parser(value_parser!(u64))
        .default_value("7")
        .help("Base RNG seed (drop i uses stream (seed, i))")
}

fn verbose_arg() -> Arg {
    Arg::new("verbose")
        .short('v')
        .long("verbose")
        .global(true)
        .action(ArgAction::Count)
        .help("Increase log verbosity (-v info, -vv debug)")
}

fn drops_arg() -> Arg {
    Arg::new("drops")
        .long("drops")
        .value_parser(value_parser!(u64))
        .help("Number of Monte Carlo drops")
}

fn model_arg() -> Arg {
    Arg::new("model")
        .long("model")
        .value_parser(["random", "hex", "guard"])
        .default_value("guard")
        .help("BS deployment model")
}

fn interferers_arg() -> Arg {
    Arg::new("interferers")
        .long("interferers")
        .value_parser(["voronoi", "xball"])
        .default_value("voronoi")
        .help("Interferer population: full Voronoi cells or the exclusion-ball abstraction")
}

fn sinr_mode_arg() -> Arg {
    Arg::new("sinr-mode")
        .long("sinr-mode")
        .value_parser(["instantaneous", "effective"])
        .default_value("instantaneous")
        .help("SINR definition per drop")
}

fn gamma_arg() -> Arg {
    Arg::new("gamma")
        .long("gamma")
        .value_parser(value_parser!(f64))
        .default_value("0.9")
        .help("Coverage target probability in (0, 1)")
}

fn t_db_arg() -> Arg {
    Arg::new("t-db")
        .long("t-db")
        .value_parser(value_parser!(f64))
        .allow_negative_numbers(true)
        .default_value("10.0")
        .help("SINR threshold (dB) for the coverage target")
}

fn delta_max_arg(default: &'static str) -> Arg {
    Arg::new("delta-max")
        .long("delta-max")
        .value_parser(value_parser!(f64))
        .default_value(default)
        .help("Upper end of the reuse-factor search or sweep")
}
