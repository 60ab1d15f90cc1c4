//! `chiral`: evaluate OPEs and run verification suites.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
//! or configuration errors.

use chiral::cdr::Patch;
use chiral::cli::config::{Group, SuiteConfig, SuiteName};
use chiral::cli::report::{render_grid, Format, Report};
use chiral::cli::{run_ope, suites};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chiral", about = "Exact OPE computations and verification suites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate each line of an expression file (queries allowed).
    Ope {
        file: PathBuf,
        /// Flat coordinates of the patch.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Angular coordinates of the patch.
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Take the patch from a config file instead.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the configured suites of one group.
    Verify {
        group: Group,
        config: PathBuf,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Print the computed and predicted character grids.
    Character { config: PathBuf },
    /// Run all configured suites (the built-in configuration by default).
    Report {
        #[arg(long, default_value = "text")]
        format: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// The built-in configuration used by `report` without `--config`.
const DEFAULT_CONFIG: &str = r#"
[patch]
n = 2

[twist]
F_A = ":c[1] c[2]:"
F_Ahat = "2*:c[1] c[2]:"
H3 = "0"

[run]
seed = 0
samples = 10
order = 4
"#;

enum Failure {
    Usage(String),
    Checks,
}

fn load(path: &PathBuf) -> Result<SuiteConfig, Failure> {
    SuiteConfig::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn format(s: &str) -> Result<Format, Failure> {
    s.parse().map_err(|e: chiral::cli::report::UnknownFormat| Failure::Usage(e.to_string()))
}

fn emit(r: &Report, f: Format) -> Result<(), Failure> {
    print!("{}", r.render(f));
    if r.all_pass() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Ope { file, n, m, config } => {
            let patch = match config {
                Some(c) => load(&c)?.patch,
                None => Patch::standard(n, m).map_err(|e| Failure::Usage(e.to_string()))?,
            };
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let mut bad = false;
            for l in run_ope(&patch, &text) {
                match l.output {
                    Ok(v) => println!("{} = {}", l.input, v),
                    Err(e) => {
                        bad = true;
                        eprintln!("{}:{}: {e}", file.display(), l.line);
                    }
                }
            }
            if bad {
                Err(Failure::Usage("expression errors".into()))
            } else {
                Ok(())
            }
        }
        Cmd::Verify { group, config, format: f } => {
            let f = format(&f)?;
            let cfg = load(&config)?;
            if cfg.suites_in(group).is_empty() {
                return Err(Failure::Usage("the config selects no suite of this group".into()));
            }
            emit(&suites::run(&cfg, Some(group)), f)
        }
        Cmd::Character { config } => {
            let mut cfg = load(&config)?;
            cfg.suites = vec![SuiteName::Characters];
            let r = suites::run(&cfg, None);
            for t in r.tables() {
                print!("{}", render_grid(&format!("{} (computed)", t.name), &t.computed));
                if let Some(p) = &t.predicted {
                    print!("{}", render_grid(&format!("{} (predicted)", t.name), p));
                }
            }
            println!("{}", r.summary_line());
            if r.all_pass() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Cmd::Report { format: f, config } => {
            let f = format(&f)?;
            let cfg = match config {
                Some(c) => load(&c)?,
                None => SuiteConfig::parse(DEFAULT_CONFIG).map_err(|e| Failure::Usage(e.to_string()))?,
            };
            emit(&suites::run(&cfg, None), f)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
