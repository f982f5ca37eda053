use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vcnk_core::Rational;
use vcnk_lab::report::render;
use vcnk_lab::run::{parse_rational_list, run_text, AuditName, Command, LabError, ModeName, Options};

#[derive(Parser)]
#[command(name = "vcnk-lab", version, about = "Exact audits for learning over k-tuples")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Natarajan, VCN_k and partite VCN_k dimensions
    Dim(Common),
    /// Covers and packings of the class under each measure
    Pack(Common),
    /// Sample complexity of ERM over a grid of precisions and confidences
    PacEstimate(Common),
    /// Run the audits
    Audit(Common),
    /// Print the k-partite version of the instance
    Partize(Common),
}

#[derive(Args)]
struct Common {
    /// Instance file (JSON)
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    #[arg(long)]
    explosion_cap: Option<u128>,
    /// Comma-separated confidences, e.g. 1/8,1/4
    #[arg(long, value_parser = parse_rational_list)]
    delta_grid: Option<Vec<Rational>>,
    /// Comma-separated precisions overriding the instance's
    #[arg(long, value_parser = parse_rational_list)]
    epsilon: Option<Vec<Rational>>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeName,
    #[arg(long)]
    m_cap: Option<usize>,
    #[arg(long, value_enum)]
    only: Option<AuditName>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Dim(c) => (Command::Dim, c),
        Sub::Pack(c) => (Command::Pack, c),
        Sub::PacEstimate(c) => (Command::PacEstimate, c),
        Sub::Audit(c) => (Command::Audit, c),
        Sub::Partize(c) => (Command::Partize, c),
    };
    let code = match execute(command, &common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vcnk-lab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(command: Command, c: &Common) -> Result<i32, LabError> {
    let mut options = Options {
        seed: c.seed,
        trials: c.trials,
        mode: c.mode,
        only: c.only,
        ..Options::default()
    };
    if let Some(cap) = c.explosion_cap {
        options.explosion_cap = cap;
    }
    if let Some(grid) = &c.delta_grid {
        options.delta_grid = grid.clone();
    }
    if let Some(eps) = &c.epsilon {
        options.epsilons = eps.clone();
    }
    if let Some(m) = c.m_cap {
        options.m_cap = m;
    }
    let text = std::fs::read_to_string(&c.spec).map_err(|e| LabError::Io(format!("{}: {e}", c.spec.display())))?;
    let outcome = run_text(command, &text, &options)?;
    let rendered = render(&outcome.document);
    match &c.out {
        Some(path) => std::fs::write(path, rendered).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{rendered}"),
    }
    Ok(outcome.exit_code)
}
