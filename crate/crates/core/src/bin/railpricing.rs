use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use railpricing::agents::QConfig;
use railpricing::env::ActionMode;
use railpricing::harness::{self, PolicySpec, RunConfig, RunMode, DEFAULT_EVAL_EPISODES, DEFAULT_TRAINING_EPISODES};
use railpricing::protocol::{self, Server};
use railpricing::scenario::{self, PRESET_NAMES};

#[derive(Parser)]
#[command(name = "railpricing", version, about = "Multi-agent railway pricing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded batches of episodes and write reports.
    Run(RunArgs),
    /// Serve environments over the line-delimited JSON protocol.
    Serve(ServeArgs),
    /// Inspect scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Args)]
struct ModeFlags {
    /// Eleven price levels per cell.
    #[arg(long, conflicts_with = "continuous")]
    discrete: bool,
    /// Price changes in [-1, 1] per cell (default).
    #[arg(long)]
    continuous: bool,
}

impl ModeFlags {
    fn mode(&self) -> ActionMode {
        if self.discrete {
            ActionMode::Discrete
        } else {
            ActionMode::Continuous
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Train,
    Eval,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or path to a scenario TOML file.
    #[arg(long, default_value = "business")]
    scenario: String,
    /// random | scripted:<file> | tabular-q
    #[arg(long, default_value = "random")]
    policy: String,
    /// Comma-separated base seeds.
    #[arg(long, value_delimiter = ',', default_value = "0,43,71")]
    seeds: Vec<u64>,
    /// Reported episodes per seed.
    #[arg(long, default_value_t = DEFAULT_EVAL_EPISODES)]
    episodes: u32,
    /// Environment instances per seed.
    #[arg(long, default_value_t = 1)]
    parallel: u32,
    #[arg(long, value_enum, default_value = "eval")]
    mode: ModeArg,
    #[arg(long, default_value = "runs/latest")]
    out_dir: PathBuf,
    #[command(flatten)]
    action_mode: ModeFlags,
    /// Training episodes per seed before evaluating a learner.
    #[arg(long, default_value_t = DEFAULT_TRAINING_EPISODES)]
    training_episodes: u32,
    /// Exploration rate of tabular learners.
    #[arg(long, default_value_t = QConfig::default().epsilon)]
    epsilon: f64,
    /// Q-learning step size.
    #[arg(long, default_value_t = QConfig::default().step_size)]
    step_size: f64,
    /// Q-learning discount.
    #[arg(long, default_value_t = QConfig::default().gamma)]
    gamma: f64,
    /// Initial action value.
    #[arg(long, default_value_t = QConfig::default().initial_value)]
    q_init: f64,
    /// Run instances one after another on a single thread.
    #[arg(long)]
    sequential: bool,
    /// Write full episode logs to trace.jsonl (always on for one episode).
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "business")]
    scenario: String,
    /// TCP port to listen on.
    #[arg(long, conflicts_with = "stdio", required_unless_present = "stdio")]
    port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Serve a single stream on standard input/output.
    #[arg(long)]
    stdio: bool,
    #[command(flatten)]
    action_mode: ModeFlags,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Print a preset (or a file, normalised) as TOML.
    Dump { name: String },
    /// Check a scenario and print its digest.
    Validate { name: String },
    /// List preset names.
    List,
}

fn run(args: RunArgs) -> Result<(), String> {
    let scenario = scenario::resolve(&args.scenario).map_err(|e| e.to_string())?;
    let mut policy = PolicySpec::parse(&args.policy).map_err(|e| e.to_string())?;
    if let PolicySpec::TabularQ { config } = &mut policy {
        *config = QConfig {
            epsilon: args.epsilon,
            step_size: args.step_size,
            gamma: args.gamma,
            initial_value: args.q_init,
        };
    }
    let config = RunConfig {
        episodes: args.episodes,
        instances: args.parallel,
        mode: match args.mode {
            ModeArg::Train => RunMode::Train,
            ModeArg::Eval => RunMode::Eval,
        },
        action_mode: args.action_mode.mode(),
        training_episodes: args.training_episodes,
        sequential: args.sequential,
        trace: args.trace || (args.episodes == 1 && args.seeds.len() == 1),
        ..RunConfig::new(policy, args.seeds)
    };
    let output = harness::run(&scenario, &config).map_err(|e| e.to_string())?;
    harness::write_outputs(&args.out_dir, &scenario, &config, &args.policy, &output).map_err(|e| e.to_string())?;
    print!("{}", harness::summary_table(&output.summary));
    eprintln!("wrote {}", args.out_dir.display());
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), String> {
    let scenario = scenario::resolve(&args.scenario).map_err(|e| e.to_string())?;
    let server = Server::new(scenario, args.action_mode.mode());
    if args.stdio {
        return protocol::serve_stdio(&server).map_err(|e| e.to_string());
    }
    let port = args.port.expect("clap enforces --port or --stdio");
    let listener = TcpListener::bind((args.host.as_str(), port)).map_err(|e| format!("bind {}:{port}: {e}", args.host))?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    eprintln!("listening on {addr} (protocol version {})", protocol::PROTOCOL_VERSION);
    protocol::serve_tcp(Arc::new(server), listener).map_err(|e| e.to_string())
}

fn scenario_command(cmd: ScenarioCommand) -> Result<(), String> {
    match cmd {
        ScenarioCommand::Dump { name } => {
            let s = scenario::resolve(&name).map_err(|e| e.to_string())?;
            print!("{}", s.to_toml_string());
        }
        ScenarioCommand::Validate { name } => {
            let s = scenario::resolve(&name).map_err(|e| e.to_string())?;
            println!("{} ok sha256:{}", s.name, s.digest());
        }
        ScenarioCommand::List => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Serve(args) => serve(args),
        Command::Scenario(cmd) => scenario_command(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
