use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trotter_lab_cli::{load_config, run_experiment, write_outputs, ScenarioKind};

#[derive(Parser)]
#[command(name = "trotter-lab", version, about = "Run trotter-lab experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// experiment config (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// random-Hamiltonian symplectic flow suite
    Flow,
    /// Trotter kernels across n, with the free closed form when it applies
    Kernel,
    /// convergence to a fine-n reference
    Converge,
    /// phase-factored modulation norm across n
    Modbound,
    /// kernel blow-up near an exceptional time
    Exceptional,
    /// remainder of the rough/smooth potential split
    Perturb,
    /// path-integral time slicing for the free particle
    Freeslice,
    /// module oracles and their residuals
    Oracles,
}

impl Command {
    fn kind(self) -> ScenarioKind {
        match self {
            Command::Flow => ScenarioKind::Flow,
            Command::Kernel => ScenarioKind::Kernel,
            Command::Converge => ScenarioKind::Converge,
            Command::Modbound => ScenarioKind::Modbound,
            Command::Exceptional => ScenarioKind::Exceptional,
            Command::Perturb => ScenarioKind::Perturb,
            Command::Freeslice => ScenarioKind::Freeslice,
            Command::Oracles => ScenarioKind::Oracles,
        }
    }
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = &cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(EXIT_CONFIG);
    };
    let mut cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let kind = cli.command.kind();
    if cfg.kind != kind {
        eprintln!("config error: {} declares kind `{}`, not `{}`", path.display(), cfg.kind.as_str(), kind.as_str());
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }

    let outcome = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}: {e}", e.name());
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let (written, plot_notes) = match write_outputs(&cfg, &outcome, &cli.out) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("cannot write to {}: {e}", cli.out.display());
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    if !cli.quiet {
        for n in outcome.notes.iter().chain(&plot_notes) {
            println!("note: {n}");
        }
        for p in &written {
            println!("wrote {}", p.display());
        }
    }
    for c in &outcome.checks {
        if !cli.quiet || !c.passed {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
