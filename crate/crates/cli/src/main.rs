use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use qfilter_cli::commands::{self, FilterInput, StateSpec};
use qfilter_cli::config::{RunConfig, Settings};
use qfilter_cli::{figures, CliError, CliResult, EXIT_INPUT, EXIT_OK};

/// Optimal unambiguous filtering and loss/depolarization sensing.
#[derive(Debug, Parser)]
#[command(name = "qfilter", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON file with default settings; flags override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Acceptance probability defining the minimum detectable loss
    #[arg(long = "pac", global = true)]
    p_ac: Option<f64>,
    /// Smallest mean photon number of the log grid
    #[arg(long = "nmin", global = true)]
    n_min: Option<f64>,
    /// Largest mean photon number of the log grid
    #[arg(long = "nmax", global = true)]
    n_max: Option<f64>,
    /// Number of grid points
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Fock truncation bound on the discarded probability mass
    #[arg(long = "trunc-bound", global = true)]
    trunc_bound: Option<f64>,
    /// Relative eigenvalue cutoff for numerical supports
    #[arg(long = "rel-tol", global = true)]
    rel_tol: Option<f64>,
    /// Seed for random states and outcome sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout if omitted)
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// R_M versus photon number for several squeezing fractions (CSV)
    Fig1,
    /// Optimized power split and its gain over squeezed vacuum (CSV)
    Fig2,
    /// R_M versus photon number for every probe family (CSV)
    Fig3,
    /// Compare closed forms against the numerical filtering pipeline
    Crosscheck,
    /// Optimal filter for states given as JSON matrices
    Filter(FilterArgs),
    /// Export a probe state as a JSON density matrix
    #[command(subcommand)]
    State(StateCommand),
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// State to detect
    #[arg(long, value_name = "FILE", conflicts_with = "channel")]
    rho0: Option<PathBuf>,
    /// State(s) that must never be reported (repeatable)
    #[arg(long, value_name = "FILE", required = true)]
    rho1: Vec<PathBuf>,
    /// Channel producing rho0 from rho1: inline JSON or a file
    #[arg(long, value_name = "SPEC")]
    channel: Option<String>,
    /// Sample this many measurement outcomes on rho0
    #[arg(long, value_name = "N")]
    simulate: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum StateCommand {
    /// Coherent state |α>
    Coherent {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        im: f64,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Displaced squeezed state D(α)S(r e^{iθ})|0>
    Squeezed {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        im: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Two-mode squeezed vacuum with mean photon number n per mode
    Tmsv {
        #[arg(long = "n-mean")]
        n_mean: f64,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Two-qudit state with the given Schmidt coefficients
    Schmidt {
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
    },
    /// Computational basis state |index>
    Basis {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        index: usize,
    },
    /// Maximally mixed state I/dim
    Mixed {
        #[arg(long)]
        dim: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Crosscheck => "crosscheck",
            Command::Filter(_) => "filter",
            Command::State(_) => "state",
        }
    }
}

fn settings(global: &GlobalArgs, channel: Option<&str>) -> CliResult<Settings> {
    let file = match &global.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let flags = Settings {
        command: None,
        p_ac: global.p_ac,
        n_min: global.n_min,
        n_max: global.n_max,
        points: global.points,
        trunc_bound: global.trunc_bound,
        rel_tol: global.rel_tol,
        seed: global.seed,
        out: global.out.clone(),
        channel: channel.map(commands::parse_channel).transpose()?,
    };
    Ok(file.overridden_by(flags))
}

fn emit(cfg: &RunConfig, text: &str) -> CliResult<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn json(value: &impl serde::Serialize) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn state_spec(cmd: StateCommand) -> (StateSpec, Option<usize>) {
    match cmd {
        StateCommand::Coherent { re, im, levels } => (
            StateSpec::Coherent {
                alpha: Complex64::new(re, im),
            },
            levels,
        ),
        StateCommand::Squeezed {
            re,
            im,
            r,
            theta,
            levels,
        } => (
            StateSpec::Squeezed {
                alpha: Complex64::new(re, im),
                zeta: Complex64::from_polar(r, theta),
            },
            levels,
        ),
        StateCommand::Tmsv { n_mean, levels } => (StateSpec::Tmsv { n_mean }, levels),
        StateCommand::Schmidt { lambdas } => (StateSpec::Schmidt { lambdas }, None),
        StateCommand::Basis { dim, index } => (StateSpec::Basis { dim, index }, None),
        StateCommand::Mixed { dim } => (StateSpec::MaximallyMixed { dim }, None),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let name = cli.command.name();
    let channel = match &cli.command {
        Command::Filter(args) => args.channel.as_deref(),
        _ => None,
    };
    let cfg = RunConfig::resolve(settings(&cli.global, channel)?, name)?;
    match cli.command {
        Command::Fig1 => emit(&cfg, &figures::fig1(&cfg)?.to_csv()?),
        Command::Fig2 => emit(&cfg, &figures::fig2(&cfg)?.to_csv()?),
        Command::Fig3 => emit(&cfg, &figures::fig3(&cfg)?.to_csv()?),
        Command::Crosscheck => {
            let report = commands::run_crosscheck(&cfg)?;
            emit(&cfg, &commands::render_crosscheck(&report))?;
            if report.passed() {
                Ok(())
            } else {
                let worst = report
                    .entries
                    .iter()
                    .filter(|d| !d.passed())
                    .map(|d| d.name)
                    .collect::<Vec<_>>()
                    .join(", ");
                Err(CliError::Tolerance(worst))
            }
        }
        Command::Filter(args) => {
            let input = FilterInput {
                rho0: args.rho0,
                rho1: args.rho1,
                simulate: args.simulate,
            };
            emit(&cfg, &json(&commands::run_filter(&cfg, &input)?)?)
        }
        Command::State(cmd) => {
            let (spec, levels) = state_spec(cmd);
            emit(&cfg, &json(&commands::export_state(&cfg, &spec, levels)?)?)
        }
    }
}

enum Exit {
    Done,
    /// `--help` / `--version` text.
    Info(clap::Error),
    Fail(i32, String),
}

fn execute<I, T>(args: I) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return Exit::Fail(EXIT_INPUT, e.render().to_string()),
        Err(e) => return Exit::Info(e),
    };
    match run(cli) {
        Ok(()) => Exit::Done,
        Err(e) => Exit::Fail(e.exit_code(), format!("qfilter: {e}")),
    }
}

fn main() -> ExitCode {
    match execute(std::env::args_os()) {
        Exit::Done => ExitCode::SUCCESS,
        Exit::Info(e) => {
            let _ = e.print();
            ExitCode::from(EXIT_OK as u8)
        }
        Exit::Fail(code, message) => {
            eprintln!("{}", message.trim_end());
            ExitCode::from(code as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qfilter::filtering::FilterReport;
    use qfilter_cli::{EXIT_RUNTIME, EXIT_TOLERANCE};
    use std::path::Path;

    fn code(args: &[&str]) -> i32 {
        let argv = std::iter::once("qfilter").chain(args.iter().copied());
        match execute(argv) {
            Exit::Done | Exit::Info(_) => EXIT_OK,
            Exit::Fail(code, _) => code,
        }
    }

    fn scratch(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("qfilter-main-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn s(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    #[test]
    fn degraded_truncation_fails_crosscheck() {
        let dir = scratch("crosscheck");
        let out = dir.join("report.txt");
        assert_eq!(
            code(&["crosscheck", "--trunc-bound", "1e-4", "--out", s(&out)]),
            EXIT_TOLERANCE
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("FAIL"));
        assert!(text
            .lines()
            .any(|l| l.starts_with("depolarizing ") && l.ends_with("ok")));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn input_errors_exit_with_code_three() {
        for args in [
            vec!["fig1", "--pac", "1.5"],
            vec!["fig2", "--nmin", "-1"],
            vec!["fig3", "--points", "0"],
            vec!["no-such-command"],
            vec![
                "filter",
                "--rho1",
                "/nonexistent/state.json",
                "--channel",
                r#"{"type":"loss","R":0.1}"#,
            ],
            vec![
                "filter",
                "--rho1",
                "x.json",
                "--channel",
                r#"{"type":"unknown"}"#,
            ],
            vec!["state", "tmsv", "--n-mean", "50"],
            vec!["fig1", "--config", "/nonexistent/config.json"],
        ] {
            assert_eq!(code(&args), EXIT_INPUT, "{args:?}");
        }
        assert_eq!(code(&["--help"]), EXIT_OK);
        assert_eq!(
            code(&["fig1", "--points", "2", "--out", "/nonexistent/dir/out.csv"]),
            EXIT_RUNTIME
        );
    }

    #[test]
    fn filter_on_depolarized_qubit() {
        let dir = scratch("filter");
        let zero = dir.join("zero.json");
        assert_eq!(
            code(&[
                "state",
                "basis",
                "--dim",
                "2",
                "--index",
                "0",
                "--out",
                s(&zero)
            ]),
            EXIT_OK
        );
        let out = dir.join("report.json");
        let channel = r#"{"type":"depolarizing","n":2,"p":0.5}"#;
        let args = [
            "filter",
            "--rho1",
            s(&zero),
            "--channel",
            channel,
            "--simulate",
            "20000",
            "--seed",
            "3",
            "--out",
            s(&out),
        ];
        assert_eq!(code(&args), EXIT_OK);
        let report: FilterReport =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!((report.p - 0.25).abs() < 1e-12);
        assert!(report.false_alarm.abs() < 1e-12);
        assert_eq!((report.n, report.m), (Some(2), Some(1)));
        let counts = report.outcome_counts.unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 20000);
        assert!((counts[0] as f64 / 20000.0 - 0.25).abs() < 0.015);

        let qutrit = dir.join("qutrit.json");
        assert_eq!(
            code(&["state", "mixed", "--dim", "3", "--out", s(&qutrit)]),
            EXIT_OK
        );
        assert_eq!(
            code(&["filter", "--rho0", s(&qutrit), "--rho1", s(&zero)]),
            EXIT_INPUT
        );
        assert_eq!(
            code(&[
                "filter",
                "--rho0",
                s(&qutrit),
                "--rho1",
                s(&zero),
                "--channel",
                channel
            ]),
            EXIT_INPUT
        );
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = scratch("config");
        let config = dir.join("run.json");
        std::fs::write(
            &config,
            r#"{"command": "fig3", "p_ac": 0.3, "n_min": 1, "n_max": 10, "points": 4}"#,
        )
        .unwrap();
        let (a, b, c) = (dir.join("a.csv"), dir.join("b.csv"), dir.join("c.csv"));
        assert_eq!(
            code(&["fig3", "--config", s(&config), "--out", s(&a)]),
            EXIT_OK
        );
        let flags = [
            "fig3",
            "--pac",
            "0.3",
            "--nmin",
            "1",
            "--nmax",
            "10",
            "--points",
            "4",
            "--out",
            s(&b),
        ];
        assert_eq!(code(&flags), EXIT_OK);
        let from_file = std::fs::read_to_string(&a).unwrap();
        assert_eq!(from_file, std::fs::read_to_string(&b).unwrap());
        assert_eq!(from_file.lines().count(), 5);

        assert_eq!(
            code(&[
                "fig3",
                "--config",
                s(&config),
                "--points",
                "2",
                "--out",
                s(&c)
            ]),
            EXIT_OK
        );
        assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 3);
        // the file names fig3; running another command with it is an input error
        assert_eq!(code(&["fig1", "--config", s(&config)]), EXIT_INPUT);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
