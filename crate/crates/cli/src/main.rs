use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command as ClapCommand};

use dfchannel_cli::config::KEYS;
use dfchannel_cli::{execute, parse_config, CliError, Command};

fn cli() -> ClapCommand {
    let mut key_args: Vec<Arg> = KEYS
        .iter()
        .filter(|(k, _)| *k != "command")
        .map(|(k, help)| {
            Arg::new(*k)
                .long(*k)
                .value_name("VALUE")
                .help(*help)
                .allow_hyphen_values(true)
                .action(ArgAction::Set)
        })
        .collect();
    key_args.push(
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .help("key = value configuration file"),
    );
    let mut app = ClapCommand::new("dfchannel")
        .about("Decoherence-free channel simulator")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for name in Command::NAMES {
        app = app.subcommand(ClapCommand::new(name).args(key_args.clone()));
    }
    app
}

fn run(name: &str, m: &ArgMatches) -> Result<(), CliError> {
    let text = match m.get_one::<String>("config") {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{path}: {e}")))?,
        None => String::new(),
    };
    let mut overrides = vec![("command".to_string(), name.to_string())];
    for (key, _) in KEYS.iter().filter(|(k, _)| *k != "command") {
        if let Some(v) = m.get_one::<String>(key) {
            overrides.push((key.to_string(), v.clone()));
        }
    }
    let cfg = parse_config(&text, &overrides)?;
    let body = execute(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::io(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with other invalid input; 2 is
    // reserved for numerical failures.
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    match run(name, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dfchannel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
