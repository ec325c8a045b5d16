//! `chiralpump`: configuration-driven front end for single runs, steady
//! states, figure presets, and parameter sweeps.
//!
//! Exit codes: 0 success, 2 input/configuration error, 3 physics/solver
//! error, 4 degenerate steady state.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chiralpump::{
    build_liouvillian, collapse_operators, enantiomeric_excess, evolve, evolve_lab,
    evolve_to_steady, hamiltonian_effective, hamiltonian_interaction, hamiltonian_reduced,
    make_initial, run_figure, steady_state, sweep, Dataset, Error as CoreError, FigureId,
    Operator, SweepSpec, Trajectory,
};
use config::{parse_config, ConfigError, HamiltonianKind, RunConfig};

#[derive(Parser)]
#[command(
    name = "chiralpump",
    about = "Four-level chiral-molecule optical-pumping simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation over a time grid and write a CSV.
    Simulate {
        /// Configuration file (see configs/ for annotated examples).
        config: PathBuf,
        /// Output CSV path; overrides output.path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the steady state and write a single-row CSV.
    Steady {
        config: PathBuf,
        /// nullspace: Liouvillian kernel; integrate: converge in time.
        #[arg(long, default_value = "nullspace")]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a named figure preset (fig2a..fig6b): one CSV per curve
    /// plus a parameter manifest.
    Figure {
        /// One of fig2a, fig2b, fig3a, fig3b, fig4a, fig4b, fig5, fig6a, fig6b.
        id: String,
        /// Repeatable key=value override (declared knobs only).
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the sweep described by the config's sweep.* section.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// Bad input: exit 2.
    Input(String),
    /// Library failure: exit per the error kind.
    Core(CoreError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.0)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

fn core_exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidArgument(_) | CoreError::DimensionMismatch { .. } => 2,
        CoreError::DegenerateSteadyState { .. } => 4,
        CoreError::SweepPoint { source, .. } => core_exit_code(source),
        _ => 3,
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => m.clone(),
            CliError::Core(e) => {
                let mut msg = e.to_string();
                let mut src: Option<&dyn std::error::Error> = std::error::Error::source(e);
                while let Some(s) = src {
                    msg.push_str(&format!(": {s}"));
                    src = std::error::Error::source(s);
                }
                msg
            }
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = cap_threads_from_env() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.exit_code());
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

/// Honor CHIRALPUMP_THREADS as a cap on sweep/figure parallelism.
fn cap_threads_from_env() -> Result<()> {
    match std::env::var("CHIRALPUMP_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // A second initialization (tests, repeated calls) is harmless.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
                Ok(())
            }
            _ => Err(CliError::Input(format!(
                "CHIRALPUMP_THREADS: expected a positive integer, got '{v}'"
            ))),
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, out),
        Command::Steady {
            config,
            method,
            out,
        } => cmd_steady(&config, &method, out),
        Command::Figure {
            id,
            overrides,
            out_dir,
        } => cmd_figure(&id, &overrides, &out_dir),
        Command::Sweep { config, out } => cmd_sweep(&config, out),
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Input(format!("cannot read config '{}': {e}", path.display()))
    })?;
    Ok(parse_config(&text)?)
}

fn output_path(cfg: &RunConfig, out: Option<PathBuf>, context: &str) -> Result<PathBuf> {
    out.or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .ok_or_else(|| {
            CliError::Input(format!(
                "{context}: set output.path in the config or pass --out"
            ))
        })
}

/// Write via a temp file in the target directory plus an atomic rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Input(format!("invalid output path '{}'", path.display())))?;
    let tmp_name = format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id());
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => PathBuf::from(&tmp_name),
    };
    let io = |e: std::io::Error| {
        CliError::Input(format!("cannot write '{}': {e}", path.display()))
    };
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn build_hamiltonian(cfg: &RunConfig) -> Result<Operator> {
    let h = match cfg.hamiltonian {
        HamiltonianKind::Interaction => hamiltonian_interaction(&cfg.model)?,
        HamiltonianKind::Effective => hamiltonian_effective(&cfg.model)?,
        HamiltonianKind::Reduced => hamiltonian_reduced(&cfg.model)?,
        HamiltonianKind::Lab => {
            return Err(CliError::Input(
                "model.hamiltonian = lab is only valid for 'simulate' without rates".into(),
            ))
        }
    };
    Ok(h)
}

fn time_grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    let (stop, points) = cfg.times.ok_or_else(|| {
        CliError::Input("times.stop_us and times.points are required for this command".into())
    })?;
    Ok((0..points)
        .map(|k| stop * k as f64 / (points - 1) as f64)
        .collect())
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let rows = traj
        .times
        .iter()
        .zip(&traj.observables)
        .map(|(t, o)| vec![*t, o.p_l, o.p_r, o.p_s, o.p_a, o.epsilon])
        .collect();
    Dataset {
        columns: ["t_us", "P_L", "P_R", "P_S", "P_A", "epsilon"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows,
    }
    .to_csv()
}

fn cmd_simulate(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    let path = output_path(&cfg, out, "simulate")?;
    let times = time_grid(&cfg)?;
    let dim = cfg.hamiltonian.dim();
    let rho0 = make_initial(&cfg.initial, dim)?;

    let traj = if cfg.hamiltonian == HamiltonianKind::Lab {
        let has_rates = [
            cfg.rates.gamma_s,
            cfg.rates.gamma_a,
            cfg.rates.gamma_sa,
            cfg.rates.gamma_phi,
        ]
        .iter()
        .any(|&g| g > 0.0);
        if has_rates {
            return Err(CliError::Input(
                "lab-frame simulation is unitary: set all rates to zero".into(),
            ));
        }
        evolve_lab(&cfg.model, &rho0, &times, &cfg.solver)?
    } else {
        let h = build_hamiltonian(&cfg)?;
        let ops = collapse_operators(&cfg.rates, dim)?;
        evolve(&h, &ops, &rho0, &times, &cfg.solver)?
    };
    write_atomic(&path, &trajectory_csv(&traj))
}

fn cmd_steady(config: &Path, method: &str, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    let path = output_path(&cfg, out, "steady")?;
    let dim = cfg.hamiltonian.dim();
    let h = build_hamiltonian(&cfg)?;
    let ops = collapse_operators(&cfg.rates, dim)?;

    let (state, converged) = match method {
        "nullspace" => {
            let l = build_liouvillian(&h, &ops)?;
            (steady_state(&l)?, None)
        }
        "integrate" => {
            let rho0 = make_initial(&cfg.initial, dim)?;
            let (state, t) = evolve_to_steady(&h, &ops, &rho0, &cfg.solver)?;
            (state, Some(t))
        }
        other => {
            return Err(CliError::Input(format!(
                "--method: expected nullspace or integrate, got '{other}'"
            )))
        }
    };
    let eps = enantiomeric_excess(&state)?;
    let (p_s, p_a) = match dim {
        4 => (state.population(2), state.population(3)),
        _ => (0.0, state.population(2)),
    };
    let mut columns = vec![
        "P_L".to_string(),
        "P_R".to_string(),
        "P_S".to_string(),
        "P_A".to_string(),
        "epsilon".to_string(),
    ];
    let mut row = vec![state.population(0), state.population(1), p_s, p_a, eps];
    if let Some(t) = converged {
        columns.push("converged_time_us".to_string());
        row.push(t);
    }
    let ds = Dataset {
        columns,
        rows: vec![row],
    };
    write_atomic(&path, &ds.to_csv())
}

fn curve_file_name(figure: &str, label: &str) -> String {
    let slug: String = label
        .chars()
        .map(|c| match c {
            '=' => '_',
            c if c.is_ascii_alphanumeric() || c == '.' || c == '_' || c == '-' => {
                c.to_ascii_lowercase()
            }
            _ => '-',
        })
        .collect();
    format!("{figure}_{slug}.csv")
}

fn cmd_figure(id: &str, overrides: &[String], out_dir: &Path) -> Result<()> {
    let figure: FigureId = id.parse()?;
    let parsed: Vec<(String, f64)> = overrides
        .iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| {
                CliError::Input(format!("--override: expected KEY=VALUE, got '{s}'"))
            })?;
            let value = v.parse::<f64>().map_err(|_| {
                CliError::Input(format!("--override {k}: expected a number, got '{v}'"))
            })?;
            Ok((k.to_string(), value))
        })
        .collect::<Result<_>>()?;

    let run = run_figure(figure, &parsed)?;
    std::fs::create_dir_all(out_dir).map_err(|e| {
        CliError::Input(format!("cannot create '{}': {e}", out_dir.display()))
    })?;
    for curve in &run.curves {
        let path = out_dir.join(curve_file_name(figure.as_str(), &curve.label));
        write_atomic(&path, &curve.data.to_csv())?;
    }
    let manifest_path = out_dir.join(format!("{}_manifest.txt", figure.as_str()));
    write_atomic(&manifest_path, &run.manifest)
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    let path = output_path(&cfg, out, "sweep")?;
    let section = cfg.sweep.clone().ok_or_else(|| {
        CliError::Input("sweep: the config has no sweep.* section".into())
    })?;
    let spec = SweepSpec {
        parameter: section.parameter,
        grid: section.grid,
        base_model: cfg.model,
        base_rates: cfg.rates,
        base_initial: cfg.initial,
    };
    let ds = sweep(&spec)?;
    write_atomic(&path, &ds.to_csv())
}
