use std::path::PathBuf;
use std::process::ExitCode;

use qnt_cli::commands;
use qnt_cli::config::ExperimentConfig;
use qnt_cli::CliError;

const USAGE: &str = "\
qnt - network tomography simulator and estimator harness

usage: qnt <command> [flags]

commands:
  simulate      sample one outcome record           -> record.csv
  estimate      simulate and run the estimator      -> report.txt, report.csv
  convergence   sweep the shot schedule             -> convergence.csv
  qfim          Fisher information and CRB          -> qfim.csv, qcrb.csv
  validate      run the engine invariant suites

flags:
  --config PATH     experiment config file (required except for validate)
  --seed INT        override the master seed
  --out DIR         override the output directory
  --scheme NAME     override the scheme preset (z_basis | ghz_x | ghz_y | ghz_z)
  --regime WHICH    override the noise regime (low | high)

exit codes: 0 success, 1 validation error, 2 estimation failure,
3 invariant-suite failure
";

struct Args {
    command: String,
    config_path: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    scheme: Option<String>,
    regime: Option<String>,
}

fn parse_args(argv: &[String]) -> Result<Args, CliError> {
    if argv.is_empty() {
        return Err(CliError::Validation(USAGE.into()));
    }
    let command = argv[0].clone();
    let mut args = Args {
        command,
        config_path: None,
        seed: None,
        out: None,
        scheme: None,
        regime: None,
    };
    let mut i = 1;
    while i < argv.len() {
        let flag = argv[i].as_str();
        let value = argv.get(i + 1).ok_or_else(|| {
            CliError::Validation(format!("flag {flag} needs a value\n\n{USAGE}"))
        })?;
        match flag {
            "--config" => args.config_path = Some(PathBuf::from(value)),
            "--seed" => {
                args.seed = Some(value.parse().map_err(|_| {
                    CliError::Validation(format!("--seed {value:?} is not an integer"))
                })?)
            }
            "--out" => args.out = Some(PathBuf::from(value)),
            "--scheme" => args.scheme = Some(value.clone()),
            "--regime" => args.regime = Some(value.clone()),
            other => {
                return Err(CliError::Validation(format!("unknown flag {other}\n\n{USAGE}")))
            }
        }
        i += 2;
    }
    Ok(args)
}

fn load_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let path = args.config_path.as_ref().ok_or_else(|| {
        CliError::Validation(format!("{} requires --config PATH", args.command))
    })?;
    let mut config =
        ExperimentConfig::load(path).map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(scheme) = &args.scheme {
        config.scheme = scheme
            .parse()
            .map_err(|e: qnt_core::Error| CliError::Validation(e.to_string()))?;
        // Re-check the axis contract the override may have broken.
        if let qnt_cli::config::ChannelSpec::SinglePauli { axis, .. } = &config.channels {
            if *axis != config.scheme.axis() {
                return Err(CliError::Validation(format!(
                    "unsupported model: scheme {} expects {} channels, config has {}",
                    config.scheme,
                    config.scheme.axis(),
                    axis
                )));
            }
        }
    }
    if let Some(regime) = &args.regime {
        config.regime = regime
            .parse()
            .map_err(|e: qnt_core::Error| CliError::Validation(e.to_string()))?;
    }
    Ok(config)
}

fn run() -> Result<String, CliError> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = parse_args(&argv)?;
    match args.command.as_str() {
        "simulate" => commands::cmd_simulate(&load_config(&args)?),
        "estimate" => commands::cmd_estimate(&load_config(&args)?),
        "convergence" => commands::cmd_convergence(&load_config(&args)?),
        "qfim" => commands::cmd_qfim(&load_config(&args)?),
        "validate" => {
            let config = if args.config_path.is_some() {
                Some(load_config(&args)?)
            } else {
                None
            };
            commands::cmd_validate(config.as_ref())
        }
        "help" | "--help" | "-h" => Ok(USAGE.to_string()),
        other => Err(CliError::Validation(format!("unknown command {other:?}\n\n{USAGE}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
