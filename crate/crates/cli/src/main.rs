use clap::{Args, Parser, Subcommand};
use qeilab_cli::commands::{acceptance_matrix, load_torus_scenario, read_points_csv, run};
use qeilab_cli::config::{load_config, Command, MatrixSource, RunConfig, StateName, StateSpec, SweepParameter};
use qeilab_cli::error::CliError;
use qeilab_core::geometry::Padding;
use qeilab_core::scalar::EvalPath;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qeilab", version, about = "Quantum-inequality bounds, causal geometry and finite-dimensional model checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Top,
}

#[derive(Args)]
struct Global {
    /// Seed recorded in every artifact.
    #[arg(long, global = true, default_value_t = qeilab_cli::acceptance::DEFAULT_SEED)]
    seed: u64,
    /// Directory for report.json, CSV tables and plot scripts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    no_csv: bool,
    #[arg(long, global = true)]
    no_plot: bool,
    /// Tolerance override `ID=VALUE` or `ID.NAME=VALUE`.
    #[arg(long = "tolerance", global = true, value_parser = parse_override)]
    tolerances: Vec<(String, f64)>,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected KEY=VALUE")?;
    let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.to_string(), v))
}

#[derive(Subcommand)]
enum Top {
    /// Wick-square quantum-inequality bounds.
    #[command(subcommand)]
    Qei(Qei),
    /// Timelike diameters and torus lattice sums.
    #[command(subcommand)]
    Geom(Geom),
    /// Matrix-world scenarios.
    #[command(subcommand)]
    Toy(Toy),
    /// Absolute and difference bounds in the matrix model.
    #[command(subcommand)]
    Qi(Qi),
    /// Numerical range and spectrum of fields.
    #[command(subcommand)]
    Field(Field),
    /// Run the acceptance suite.
    Acceptance {
        /// Module name or criterion number; repeatable.
        #[arg(long)]
        only: Vec<String>,
        /// Print the full JSON report after the matrix.
        #[arg(long)]
        json: bool,
    },
    /// Run a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct StateArgs {
    #[arg(long, value_enum, default_value = "vacuum")]
    state: StateName,
    #[arg(long, default_value_t = 0.0)]
    mass: f64,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    length: Option<f64>,
    /// Sampling function `bump:W` or `cos2:W`, optionally `@CENTER`.
    #[arg(long, default_value = "bump:1")]
    g: String,
    /// `static` or `inertial:vx,vy,vz`.
    #[arg(long, default_value = "static")]
    worldline: String,
}

impl StateArgs {
    fn spec(&self) -> StateSpec {
        StateSpec { kind: self.state, mass: self.mass, temperature: self.temperature, length: self.length }
    }
}

#[derive(Subcommand)]
enum Qei {
    Bound {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_parser = parse_path)]
        path: Option<EvalPath>,
    },
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum)]
        parameter: SweepParameter,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

fn parse_path(s: &str) -> Result<EvalPath, String> {
    match s {
        "stationary" => Ok(EvalPath::Stationary),
        "general" => Ok(EvalPath::General),
        _ => Err("expected `stationary` or `general`".into()),
    }
}

#[derive(Subcommand)]
enum Geom {
    Ell {
        /// CSV of events `t,x,y,z`.
        #[arg(long)]
        points: PathBuf,
        /// Absolute proper-time margin.
        #[arg(long, conflicts_with = "fraction")]
        margin: Option<f64>,
        /// Margin as a fraction of the unpadded diameter.
        #[arg(long)]
        fraction: Option<f64>,
    },
    Kappa {
        #[arg(long)]
        mass: f64,
        #[arg(long = "lmin", alias = "Lmin")]
        lmin: f64,
        #[arg(long = "lmax", alias = "Lmax")]
        lmax: f64,
        #[arg(long)]
        steps: usize,
    },
    TorusCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        gap_tolerance: f64,
    },
}

#[derive(Subcommand)]
enum Toy {
    Lpe {
        /// Scenario file, or `demo`.
        #[arg(long, default_value = "demo")]
        scenario: String,
    },
    CheckProps {
        #[arg(long, default_value = "demo")]
        scenario: String,
    },
    /// Print the demo scenario file.
    Demo,
}

#[derive(Subcommand)]
enum Qi {
    Sharp {
        #[arg(long, default_value = "demo")]
        scenario: String,
    },
    Convert {
        #[arg(long, default_value = "demo")]
        scenario: String,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    Triviality {
        #[arg(long, default_value = "demo")]
        scenario: String,
        #[arg(long)]
        world: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
}

#[derive(Subcommand)]
enum Field {
    Numrange {
        /// Jordan block of this size.
        #[arg(long, conflicts_with_all = ["matrix", "scenario"])]
        jordan: Option<usize>,
        /// JSON file with rows of `[re, im]` pairs.
        #[arg(long, conflicts_with = "scenario")]
        matrix: Option<PathBuf>,
        #[arg(long, requires_all = ["world", "label"])]
        scenario: Option<String>,
        #[arg(long)]
        world: Option<String>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long, default_value_t = 720)]
        angles: usize,
    },
    Spectrum {
        #[arg(long, default_value = "demo")]
        scenario: String,
    },
    CheckCoSigmaNu {
        #[arg(long, default_value = "demo")]
        scenario: String,
    },
}

fn command_of(top: Top) -> Result<Command, CliError> {
    Ok(match top {
        Top::Qei(Qei::Bound { state, path }) => Command::QeiBound { state: state.spec(), g: state.g, worldline: state.worldline, path },
        Top::Qei(Qei::Sweep { state, parameter, values }) => {
            Command::QeiSweep { state: state.spec(), g: state.g, worldline: state.worldline, parameter, values }
        }
        Top::Geom(Geom::Ell { points, margin, fraction }) => {
            let padding = match (margin, fraction) {
                (Some(m), _) => Some(Padding::Absolute { margin: m }),
                (None, Some(f)) => Some(Padding::Relative { fraction: f }),
                (None, None) => None,
            };
            Command::GeomEll { points: read_points_csv(&points)?, padding }
        }
        Top::Geom(Geom::Kappa { mass, lmin, lmax, steps }) => Command::GeomKappa { mass, lmin, lmax, steps },
        Top::Geom(Geom::TorusCheck { scenario, gap_tolerance }) => Command::GeomTorusCheck { scenario: load_torus_scenario(&scenario)?, gap_tolerance },
        Top::Toy(Toy::Lpe { scenario }) => Command::ToyLpe { scenario },
        Top::Toy(Toy::CheckProps { scenario }) => Command::ToyCheckProps { scenario },
        Top::Toy(Toy::Demo) => unreachable!("handled before dispatch"),
        Top::Qi(Qi::Sharp { scenario }) => Command::QiSharp { scenario },
        Top::Qi(Qi::Convert { scenario, samples }) => Command::QiConvert { scenario, samples },
        Top::Qi(Qi::Triviality { scenario, world, scale, budget }) => Command::QiTriviality { scenario, world, scale, budget },
        Top::Field(Field::Numrange { jordan, matrix, scenario, world, label, angles }) => {
            let matrix = match (jordan, matrix, scenario) {
                (Some(size), _, _) => MatrixSource::Jordan { size },
                (_, Some(path), _) => MatrixSource::Inline { rows: qeilab_cli::config::read_json(&path)? },
                (_, _, Some(scenario)) => MatrixSource::Scenario { scenario, world: world.unwrap_or_default(), label: label.unwrap_or_default() },
                _ => return Err(CliError::Invalid("give --jordan, --matrix or --scenario with --world and --label".into())),
            };
            Command::FieldNumrange { matrix, angles }
        }
        Top::Field(Field::Spectrum { scenario }) => Command::FieldSpectrum { scenario },
        Top::Field(Field::CheckCoSigmaNu { scenario }) => Command::FieldCheckCoSigmaNu { scenario },
        Top::Acceptance { only, .. } => Command::Acceptance { only },
        Top::Run { .. } => unreachable!("handled before dispatch"),
    })
}

fn configure_threads() {
    if let Some(n) = std::env::var("QEILAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        // a second initialisation only fails when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    let g = cli.global;
    let mut json_matrix = false;
    let cfg = match cli.command {
        Top::Run { config } => load_config(&config)?,
        Top::Toy(Toy::Demo) => {
            let demo = serde_json::to_string_pretty(&qeilab_core::worlds::demo_scenario_json()).expect("demo serializes");
            match &g.out {
                Some(path) => std::fs::write(path, demo).map_err(|e| CliError::Io { path: path.clone(), source: e })?,
                None => println!("{demo}"),
            }
            return Ok(ExitCode::SUCCESS);
        }
        top => {
            if let Top::Acceptance { json, .. } = &top {
                json_matrix = *json;
            }
            let mut cfg = RunConfig::new(g.seed, command_of(top)?);
            cfg.output_dir = g.out.clone();
            cfg.formats.csv = !g.no_csv;
            cfg.formats.plot = !g.no_plot;
            cfg
        }
    };
    let mut cfg = cfg;
    cfg.tolerances.extend(g.tolerances);
    if g.out.is_some() {
        cfg.output_dir = g.out;
    }
    let envelope = run(&cfg)?;
    if matches!(cfg.command, Command::Acceptance { .. }) {
        for line in acceptance_matrix(&envelope) {
            println!("{line}");
        }
        let passed = envelope.checks.iter().filter(|c| c.pass).count();
        println!("acceptance: {passed}/{} criteria passed", envelope.checks.len());
        if json_matrix {
            println!("{}", serde_json::to_string_pretty(&envelope).expect("report serializes"));
        }
    } else {
        println!("{}", serde_json::to_string_pretty(&envelope).expect("report serializes"));
    }
    Ok(if envelope.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
