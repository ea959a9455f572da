use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xcli::config::parse_shells;
use xcli::{tools, CliError, ExperimentConfig, ExperimentReport, Overrides};

/// Exact Diophantine approximation experiments over F_q((1/X)).
///
/// Exit status: 0 when every verdict passes, 2 on a failed verdict, 1 on error.
#[derive(Parser)]
#[command(name = "xcli", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Field order q.
    #[arg(long, global = true)]
    field: Option<u32>,
    /// TOML map file with `d`, `components` and optional `theta`.
    #[arg(long, global = true)]
    map: Option<PathBuf>,
    /// Approximating function, e.g. `q^(-3*t)` or `table:-1,-2`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    psi: Option<String>,
    /// Grid resolution N.
    #[arg(long, global = true)]
    grid: Option<i64>,
    /// Shell range `T0:T1`.
    #[arg(long, global = true)]
    shells: Option<String>,
    /// Directory for CSV tables and the JSON summary; stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest grid an experiment may visit.
    #[arg(long, global = true)]
    max_cells: Option<u64>,
    /// Largest coefficient enumeration per point.
    #[arg(long, global = true)]
    max_tuples: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Forms and witnesses at a single point.
    #[command(subcommand)]
    Approx(Approx),
    /// Sublevel measures and goodness checks.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Tail measures against Borel–Cantelli sums.
    Khintchine,
    /// δ-sweep of the big-gradient set.
    Biggrad,
    /// ε-sweep of the nondivergence set.
    Qn,
    /// Covering fractions, witness audit and divergence sums.
    Ubiquity,
    /// Lattice reduction and successive minima.
    #[command(subcommand)]
    Lattice(LatticeCmd),
}

#[derive(Subcommand)]
enum Approx {
    /// Evaluate the map at a point.
    Eval {
        /// One coordinate per flag, e.g. `--point "X^-1+2"`.
        #[arg(long, required = true, allow_hyphen_values = true)]
        point: Vec<String>,
        /// Coefficients a₁…aₙ of the linear form.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Vec<String>,
    },
    /// Search one shell for a Ψ-witness.
    Witness {
        #[arg(long, required = true, allow_hyphen_values = true)]
        point: Vec<String>,
        #[arg(long)]
        shell: i64,
    },
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Measure of `{|g| < q^e}` on the domain.
    Sublevel {
        #[arg(long)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        eps_exp: String,
    },
    /// Check the polynomial goodness bound at several thresholds.
    Good {
        #[arg(long)]
        g: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,-2,-3")]
        eps_exps: Vec<String>,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Reduced basis with pivot history.
    Reduce {
        /// JSON array of rows of Laurent strings.
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Successive minima and the Minkowski equality.
    Minima {
        #[arg(long)]
        matrix: PathBuf,
    },
}

fn config(g: &Global) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        field: g.field,
        map: g.map.clone(),
        psi: g.psi.clone(),
        grid: g.grid,
        shells: g.shells.as_deref().map(parse_shells).transpose()?,
        out: g.out.clone(),
        max_cells: g.max_cells,
        max_tuples: g.max_tuples,
    });
    cfg.resolve_map()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<ExperimentReport, CliError> {
    let cfg = config(&cli.global)?;
    match &cli.command {
        Command::Approx(Approx::Eval { point, coeffs }) => tools::approx_eval(&cfg, point, coeffs),
        Command::Approx(Approx::Witness { point, shell }) => tools::approx_witness(&cfg, point, *shell),
        Command::Measure(MeasureCmd::Sublevel { g, eps_exp }) => tools::measure_sublevel(&cfg, g, eps_exp),
        Command::Measure(MeasureCmd::Good { g, eps_exps }) => tools::measure_good(&cfg, g, eps_exps),
        Command::Khintchine => xcli::run_khintchine(&cfg),
        Command::Biggrad => xcli::run_biggrad(&cfg),
        Command::Qn => xcli::run_qn(&cfg),
        Command::Ubiquity => xcli::run_ubiquity(&cfg),
        Command::Lattice(LatticeCmd::Reduce { matrix }) => tools::lattice_reduce(&cfg, matrix),
        Command::Lattice(LatticeCmd::Minima { matrix }) => tools::lattice_minima(&cfg, matrix),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rep = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &rep.config.out {
        Some(dir) => rep.write_to(dir),
        None => rep.to_json().map(|s| print!("{s}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    for v in rep.verdicts.iter().filter(|v| !v.pass) {
        eprintln!("verdict failed: {} ({})", v.name, v.detail);
    }
    if rep.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
