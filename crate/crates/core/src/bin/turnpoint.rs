use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use turnpoint::report::{self, Command, ConfigLayer, Format, ReportError, RunConfig, Table, DEFAULT_SAMPLES};

#[derive(Parser)]
#[command(name = "turnpoint", version, about = "Turning-point quantization for 1D wells, with a Numerov reference")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Ground state and excited levels as JSON.
    Solve(Shared),
    /// Normalized samples of one level, CSV by default.
    Wavefunction {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Reflection and transmission at a potential step.
    Scatter {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, allow_hyphen_values = true)]
        u0: Option<f64>,
        /// `a,b,c` or `lo..hi:count`.
        #[arg(long, allow_hyphen_values = true)]
        energies: Option<String>,
        /// Depth into the step where T(x) is evaluated.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
    },
    /// Levels beside Numerov eigenvalues; JSON on stdout, table on stderr.
    Compare(Shared),
}

#[derive(Args)]
struct Shared {
    /// e.g. `sho:omega=1`, `isw:L=1`, `expr:0.5*x^2;domain=-10..10`.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    hbar: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mass: Option<f64>,
    #[arg(long)]
    n_max: Option<u32>,
    /// symmetric, antisymmetric, general or all.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    tol_energy: Option<f64>,
    #[arg(long)]
    tol_quad: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Shared {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            potential: self.potential.clone(),
            hbar: self.hbar,
            mass: self.mass,
            n_max: self.n_max,
            variant: self.variant.clone(),
            tol_energy: self.tol_energy,
            tol_quad: self.tol_quad,
            out: self.out.clone(),
            format: self.format.clone(),
            ..Default::default()
        }
    }

    fn resolve(&self, extra: ConfigLayer) -> Result<ConfigLayer, ReportError> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.clone(), source })?;
                ConfigLayer::parse(&text)?
            }
            None => ConfigLayer::default(),
        };
        let flags = extra.over(self.layer());
        Ok(flags.over(file).over(ConfigLayer::from_env()?))
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), ReportError> {
    match &config.output_path {
        Some(path) => fs::write(path, text).map_err(|source| ReportError::Io { path: path.clone(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| ReportError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn run(cli: Cli) -> Result<(), ReportError> {
    match cli.command {
        Sub::Solve(shared) => {
            let config = RunConfig::from_layer(&shared.resolve(ConfigLayer::default())?, Command::Solve)?;
            emit(&config, &report::render_json(&report::run_solve(&config)?))
        }
        Sub::Wavefunction { shared, n, samples } => {
            let layer = shared.resolve(ConfigLayer { n, samples, ..Default::default() })?;
            let config = RunConfig::from_layer(&layer, Command::Wavefunction)?;
            let w = report::run_wavefunction(&config, layer.n.unwrap_or(1), layer.samples.unwrap_or(DEFAULT_SAMPLES))?;
            let text = match config.format {
                Format::Csv => w.to_csv(),
                Format::Json => report::render_json(&w.to_json()),
            };
            emit(&config, &text)
        }
        Sub::Scatter { shared, u0, energies, x } => {
            let layer = shared.resolve(ConfigLayer { u0, energies, x, ..Default::default() })?;
            let config = RunConfig::from_layer(&layer, Command::Scatter)?;
            let u0 = match (layer.u0, &config.potential) {
                (Some(u0), _) => u0,
                (None, Some(turnpoint::potential::PotentialSpec::Step { u0 })) => *u0,
                (None, Some(other)) => {
                    return Err(ReportError::Usage(format!("scatter needs a step potential, got {}", other.family())))
                }
                (None, None) => return Err(ReportError::Usage("scatter needs --u0 or --potential step:u0=..".into())),
            };
            let energies = report::parse_energies(
                layer.energies.as_deref().ok_or_else(|| ReportError::Usage("--energies is required".into()))?,
            )?;
            let doc = report::run_scatter(u0, &energies, layer.x.unwrap_or(0.0), &config.units)?;
            emit(&config, &report::render_json(&doc))
        }
        Sub::Compare(shared) => {
            let config = RunConfig::from_layer(&shared.resolve(ConfigLayer::default())?, Command::Compare)?;
            let cmp = report::run_compare(&config)?;
            eprint!("{}", Table(&cmp.rows));
            emit(&config, &report::render_json(&cmp.document))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
