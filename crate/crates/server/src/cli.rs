//! The `qmh` command line.
//!
//! Exit codes: 0 success, 1 a verification claim failed, 2 usage or input
//! error. Input errors are printed to stderr as `{"error": {"code",
//! "message"}}`.

use std::fs::OpenOptions;
use std::io::{BufRead, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmh::equilibrium::Player;
use qmh::play::{Match, MatchConfig};
use qmh::reproduction::{verify_all, VerifyOptions};
use qmh::{InitialStateRegime, PayoffMode, StateVector27};

use crate::error::ApiError;
use crate::service::{serve, ServiceConfig};
use crate::wire::{
    check_gamma, AlicePolicyWire, BestResponseRequest, MixtureWire, PayoffRequest, StrategySpecWire,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qmh", version, about = "Quantum Monty Hall engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bob's and Alice's expected payoffs for one profile.
    Payoff(PayoffArgs),
    /// Numerical best response to a fixed opponent.
    BestResponse(BestResponseArgs),
    /// Run the claim-by-claim verification suite.
    VerifyPaper(VerifyArgs),
    /// Play rounds as Bob against an Alice policy.
    Play(PlayArgs),
    /// Serve the JSON API (and optionally the web UI).
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Unentangled,
    Entangled,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Incoherent,
    Coherent,
}

impl From<ModeArg> for PayoffMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Incoherent => PayoffMode::Incoherent,
            ModeArg::Coherent => PayoffMode::CoherentNormalized,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlayerArg {
    Alice,
    Bob,
}

#[derive(Args, Debug, Clone)]
pub struct RegimeArgs {
    #[arg(long, value_enum, default_value = "entangled")]
    pub regime: RegimeArg,
    /// Initial state for `--regime custom`: JSON array of 27 `[re, im]`
    /// amplitudes indexed 9o + 3b + a.
    #[arg(long)]
    pub state: Option<String>,
}

impl RegimeArgs {
    fn regime(&self) -> Result<InitialStateRegime, ApiError> {
        match (self.regime, &self.state) {
            (RegimeArg::Unentangled, None) => Ok(InitialStateRegime::Unentangled),
            (RegimeArg::Entangled, None) => Ok(InitialStateRegime::Entangled),
            (RegimeArg::Custom, Some(json)) => {
                let s: StateVector27 = serde_json::from_str(json).map_err(|e| {
                    ApiError::bad_request("BadCustomState", format!("cannot parse --state: {e}"))
                })?;
                let regime = InitialStateRegime::Custom(Box::new(s));
                qmh::game::initial_state(&regime)?;
                Ok(regime)
            }
            (RegimeArg::Custom, None) => Err(ApiError::bad_request(
                "BadCustomState",
                "--regime custom needs --state",
            )),
            (_, Some(_)) => Err(ApiError::bad_request(
                "UsageError",
                "--state only applies to --regime custom",
            )),
        }
    }
}

/// Strategy arguments take a preset name (`identity`, `shuffle1`,
/// `shuffle2`, `fair-h`), a wrapped preset such as `conjugate:fair-h` or
/// `conjugate-shuffle1:identity`, or a JSON spec.
#[derive(Args, Debug)]
pub struct PayoffArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    /// Alice's strategy, or a mixture (`uniform-shuffles` or JSON).
    #[arg(long, default_value = "identity")]
    pub alice: String,
    /// Bob's strategy, or a mixture.
    #[arg(long, default_value = "identity")]
    pub bob: String,
    /// Switch parameter in radians: 0 switches, π/2 stays.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "incoherent")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputArg,
}

#[derive(Args, Debug)]
pub struct BestResponseArgs {
    #[arg(long, value_enum)]
    pub respond_as: PlayerArg,
    #[command(flatten)]
    pub regime: RegimeArgs,
    /// The fixed opponent strategy or mixture.
    #[arg(long)]
    pub against: String,
    /// Bob's switch parameter; only when responding as Alice.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "incoherent")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reduced sample counts and search starts.
    #[arg(long)]
    pub quick: bool,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    /// `identity`, `fair-h`, `shuffle1`, `shuffle2`, `uniform-shuffles`,
    /// `adaptive-counter`, or a JSON policy.
    #[arg(long, default_value = "uniform-shuffles")]
    pub alice_policy: String,
    /// Stop after this many rounds.
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "incoherent")]
    pub mode: ModeArg,
    /// JSON-lines transcript, appended one round per line.
    #[arg(long, default_value = "qmh-transcript.jsonl")]
    pub transcript: PathBuf,
    /// Do not show Alice's operator after each round.
    #[arg(long)]
    pub hide_alice: bool,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Directory with the built web UI.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Allowed CORS origins, comma separated; `*` for any.
    #[arg(long, value_delimiter = ',')]
    pub cors: Vec<String>,
    /// Write one JSON-lines transcript per session into this directory.
    #[arg(long)]
    pub transcript_dir: Option<PathBuf>,
}

/// Parses a strategy argument; see [`PayoffArgs`] for the accepted forms.
pub fn parse_spec(arg: &str) -> Result<StrategySpecWire, ApiError> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return Ok(serde_json::from_str(arg)?);
    }
    match arg.split_once(':') {
        Some((outer, inner)) => Ok(StrategySpecWire::Preset {
            preset: outer.into(),
            of: Some(Box::new(parse_spec(inner)?)),
        }),
        None => Ok(StrategySpecWire::preset(arg)),
    }
}

pub fn parse_mixture(arg: &str) -> Result<MixtureWire, ApiError> {
    let arg = arg.trim();
    if arg == "uniform-shuffles" {
        return Ok(MixtureWire::Named(arg.into()));
    }
    if arg.starts_with('{') && arg.contains("\"mixture\"") {
        return Ok(serde_json::from_str(arg)?);
    }
    Ok(MixtureWire::Pure(parse_spec(arg)?))
}

fn parse_policy(arg: &str) -> Result<AlicePolicyWire, ApiError> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        Ok(serde_json::from_str(arg)?)
    } else {
        Ok(AlicePolicyWire::Named(arg.into()))
    }
}

/// Runs the command line with explicit streams. Returns the exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand {
                    EXIT_INPUT
                } else {
                    EXIT_OK
                };
            }
            let api = ApiError::bad_request("UsageError", e.render().to_string().trim().to_string());
            let _ = writeln!(err, "{}", api.to_json());
            return EXIT_INPUT;
        }
    };
    let result = match cli.command {
        Command::Payoff(a) => cmd_payoff(&a, out),
        Command::BestResponse(a) => cmd_best_response(&a, out),
        Command::VerifyPaper(a) => cmd_verify(&a, out),
        Command::Play(a) => cmd_play(&a, input, out),
        Command::Serve(a) => cmd_serve(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            EXIT_INPUT
        }
    }
}

fn io_error(e: std::io::Error) -> ApiError {
    ApiError::new(crate::error::ErrorKind::Internal, "Io", e.to_string())
}

fn cmd_payoff(a: &PayoffArgs, out: &mut dyn Write) -> Result<i32, ApiError> {
    let req = PayoffRequest {
        regime: a.regime.regime()?,
        alice: parse_mixture(&a.alice)?,
        bob: parse_mixture(&a.bob)?,
        gamma: a.gamma,
        mode: a.mode.into(),
    };
    let r = req.evaluate()?;
    match a.output {
        OutputArg::Json => {
            writeln!(out, "{}", serde_json::to_string(&r)?).map_err(io_error)?;
        }
        OutputArg::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(&r)
                .map_err(|e| ApiError::new(crate::error::ErrorKind::Internal, "Csv", e.to_string()))?;
            let bytes = w
                .into_inner()
                .map_err(|e| ApiError::new(crate::error::ErrorKind::Internal, "Csv", e.to_string()))?;
            out.write_all(&bytes).map_err(io_error)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_best_response(a: &BestResponseArgs, out: &mut dyn Write) -> Result<i32, ApiError> {
    let req = BestResponseRequest {
        respond_as: match a.respond_as {
            PlayerArg::Alice => Player::Alice,
            PlayerArg::Bob => Player::Bob,
        },
        regime: a.regime.regime()?,
        opponent: parse_mixture(&a.against)?,
        gamma: a.gamma,
        mode: a.mode.into(),
        starts: Some(a.starts),
        seed: Some(a.seed),
    };
    let r = req.run()?;
    writeln!(out, "{}", serde_json::to_string(&r)?).map_err(io_error)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, ApiError> {
    let report = verify_all(&VerifyOptions {
        seed: a.seed,
        quick: a.quick,
        fair_h_override: None,
    });
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?).map_err(io_error)?;
    } else {
        writeln!(out, "{report}").map_err(io_error)?;
    }
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn cmd_serve(a: &ServeArgs) -> Result<i32, ApiError> {
    let cfg = ServiceConfig {
        static_dir: a.static_dir.clone(),
        cors: a.cors.clone(),
        transcript_dir: a.transcript_dir.clone(),
    };
    if let Some(dir) = &cfg.transcript_dir {
        std::fs::create_dir_all(dir).map_err(io_error)?;
    }
    let rt = tokio::runtime::Runtime::new().map_err(io_error)?;
    rt.block_on(serve(SocketAddr::new(a.host, a.port), cfg))
        .map_err(io_error)?;
    Ok(EXIT_OK)
}

const PLAY_HELP: &str = "\
Enter a move as `<strategy> <decision>`:
  strategy  identity | shuffle1 | shuffle2 | fair-h | conjugate:<strategy> |
            conjugate-shuffle1:<strategy> | conjugate-shuffle2:<strategy> | JSON spec
  decision  switch | stay | a number gamma in [0, 1.5708]
Other commands: score, help, quit";

/// A parsed line of interactive input.
enum PlayInput {
    Move(StrategySpecWire, f64),
    Score,
    Help,
    Quit,
}

fn parse_play_line(line: &str) -> Result<PlayInput, String> {
    let line = line.trim();
    match line {
        "quit" | "q" | "exit" => return Ok(PlayInput::Quit),
        "help" | "?" => return Ok(PlayInput::Help),
        "score" => return Ok(PlayInput::Score),
        _ => {}
    }
    let (spec, decision) = line
        .rsplit_once(char::is_whitespace)
        .ok_or_else(|| "expected `<strategy> <decision>`".to_string())?;
    let gamma = match decision {
        "switch" => 0.0,
        "stay" => std::f64::consts::FRAC_PI_2,
        g => g
            .parse::<f64>()
            .map_err(|_| format!("decision {g:?} is not switch, stay or a number"))?,
    };
    let spec = parse_spec(spec).map_err(|e| e.message)?;
    Ok(PlayInput::Move(spec, gamma))
}

fn cmd_play(a: &PlayArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, ApiError> {
    let policy = parse_policy(&a.alice_policy)?.to_policy()?;
    let config = MatchConfig {
        regime: a.regime.regime()?,
        mode: a.mode.into(),
    };
    let mut game = Match::new(config, policy, a.seed)?;
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&a.transcript)
        .map_err(io_error)?;
    let mut transcript = BufWriter::new(file);
    play_loop(a, &mut game, input, out, &mut transcript).map_err(io_error)?;
    transcript.flush().map_err(io_error)?;
    Ok(EXIT_OK)
}

fn play_loop(
    a: &PlayArgs,
    game: &mut Match,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    transcript: &mut dyn Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{} game, Alice plays {}, seed {}. Type help for the move syntax.",
        game.config().regime.label(),
        game.alice_policy().label(),
        game.seed()
    )?;
    let mut line = String::new();
    loop {
        if a.rounds.is_some_and(|n| game.next_round() > n) {
            break;
        }
        write!(out, "round {}> ", game.next_round())?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (spec, gamma) = match parse_play_line(&line) {
            Ok(PlayInput::Quit) => break,
            Ok(PlayInput::Help) => {
                writeln!(out, "{PLAY_HELP}")?;
                continue;
            }
            Ok(PlayInput::Score) => {
                let (bob, alice) = game.scores();
                writeln!(out, "score: you {bob}, Alice {alice}")?;
                continue;
            }
            Ok(PlayInput::Move(spec, gamma)) => (spec, gamma),
            Err(msg) => {
                writeln!(out, "could not read that move: {msg}")?;
                continue;
            }
        };
        let played = spec
            .to_strategy()
            .and_then(|s| Ok((s, check_gamma(gamma)?)))
            .and_then(|(s, g)| Ok(game.play_round_with(&s, g)?.clone()));
        let record = match played {
            Ok(r) => r,
            Err(e) => {
                writeln!(out, "move rejected ({}): {}", e.code, e.message)?;
                continue;
            }
        };
        writeln!(transcript, "{}", serde_json::to_string(&record).expect("records serialize"))?;
        transcript.flush()?;
        let o = &record.outcome;
        writeln!(
            out,
            "opened box {}, your box {}, prize in box {}: you {} (expected {:.4})",
            o.o,
            o.b,
            o.a,
            if o.bob_wins { "win" } else { "lose" },
            o.expected_bob
        )?;
        if !a.hide_alice {
            writeln!(out, "Alice played {}", record.alice_strategy)?;
        }
        let (bob, alice) = game.scores();
        writeln!(out, "score: you {bob}, Alice {alice}")?;
    }
    let (bob, alice) = game.scores();
    writeln!(
        out,
        "final score: you {bob}, Alice {alice}; {} rounds written to {}",
        game.rounds().len(),
        a.transcript.display()
    )?;
    Ok(())
}
