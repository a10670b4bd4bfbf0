//! Run configuration: TOML file values overlaid with command-line flags,
//! then validated before any rank starts.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use latticefarm::bench::{Format, Precision};
use latticefarm::comm::{Backend, CommConfig};
use latticefarm::gaugeaction::{ActionCoeffs, Preset};
use latticefarm::lattice::{Dims, Geometry};
use latticefarm::montecarlo::{SimulationConfig, Start, UpdateError, UpdateParams, DEFAULT_MAX_DRAW_ITERATIONS};
use latticefarm::par::Execution;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    BenchQcd,
    BenchComm,
    BenchFlops,
    Cost,
}

impl Mode {
    /// Modes that run in one context without a communicator.
    pub fn is_local(self) -> bool {
        matches!(self, Mode::BenchFlops | Mode::Cost)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub dims: Dims,
    pub rank_grid: Dims,
    /// Expected rank count; must equal the grid product when given.
    pub ranks: Option<usize>,

    pub beta: f64,
    pub preset: Preset,
    /// Only with `preset = "custom"`.
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub n_heatbath: u32,
    pub n_overrelax: u32,
    pub reunitarize_every: u64,
    pub modulus: Option<usize>,
    pub max_draw_iterations: u32,
    pub exec: Execution,

    pub start: Start,
    pub seed: u64,
    pub thermalization: u64,
    pub sweeps: u64,
    pub warmup: u64,
    pub load: Option<PathBuf>,
    pub save: Option<PathBuf>,

    pub backend: Backend,
    /// `host:port`; port 0 lets the launcher pick a free one.
    pub rendezvous: String,
    pub rendezvous_timeout_secs: f64,
    pub recv_timeout_secs: f64,
    pub max_message_mib: usize,

    pub format: Format,
    /// Trace or report destination; stdout when absent.
    pub output: Option<PathBuf>,
    /// Per-rank logs of socket workers.
    pub log_dir: Option<PathBuf>,
    pub machine: String,

    /// Ping-pong payload sizes in bytes, strictly increasing.
    pub sizes: Vec<usize>,
    pub reps: u32,

    /// Matrix order of the LU benchmark.
    pub n: usize,
    pub precision: Precision,

    pub total_cost: f64,
    pub mflops: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: None,
            dims: [4; 4],
            rank_grid: [1; 4],
            ranks: None,
            beta: 5.7,
            preset: Preset::Wilson,
            c0: None,
            c1: None,
            n_heatbath: 1,
            n_overrelax: 0,
            reunitarize_every: 10,
            modulus: None,
            max_draw_iterations: DEFAULT_MAX_DRAW_ITERATIONS,
            exec: Execution::default(),
            start: Start::Cold,
            seed: 1,
            thermalization: 0,
            sweeps: 10,
            warmup: 1,
            load: None,
            save: None,
            backend: Backend::InProcess,
            rendezvous: "127.0.0.1:0".into(),
            rendezvous_timeout_secs: 30.0,
            recv_timeout_secs: 300.0,
            max_message_mib: 64,
            format: Format::Text,
            output: None,
            log_dir: None,
            machine: "local".into(),
            sizes: vec![0, 1024, 65536, 1 << 20],
            reps: 20,
            n: 100,
            precision: Precision::Double,
            total_cost: 14000.0,
            mflops: 2000.0,
        }
    }
}

impl RunConfig {
    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(Mode::Simulate)
    }

    pub fn size(&self) -> usize {
        self.rank_grid.iter().product()
    }

    pub fn coeffs(&self) -> ActionCoeffs {
        match self.preset {
            Preset::Wilson => ActionCoeffs::wilson(self.beta),
            Preset::Symanzik => ActionCoeffs::symanzik(self.beta),
            Preset::Custom => ActionCoeffs::custom(self.beta, self.c0.unwrap_or(1.0), self.c1.unwrap_or(0.0)),
        }
    }

    pub fn update_params(&self) -> UpdateParams {
        UpdateParams {
            coeffs: self.coeffs(),
            n_heatbath: self.n_heatbath,
            n_overrelax: self.n_overrelax,
            reunitarize_every: self.reunitarize_every,
            modulus: self.modulus,
            exec: self.exec,
            max_draw_iterations: self.max_draw_iterations,
        }
    }

    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            dims: self.dims,
            rank_grid: self.rank_grid,
            update: self.update_params(),
            start: self.start,
            seed: self.seed,
            thermalization: self.thermalization,
            sweeps: self.sweeps,
            load: self.load.clone(),
            save: self.save.clone(),
        }
    }

    pub fn comm_config(&self) -> CommConfig {
        CommConfig {
            recv_timeout: Duration::from_secs_f64(self.recv_timeout_secs),
            rendezvous_timeout: Duration::from_secs_f64(self.rendezvous_timeout_secs),
            max_message_bytes: self.max_message_mib << 20,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Every constraint the modules impose, checked up front.
    pub fn validate(&self) -> Result<(), CliError> {
        let mode = self.mode();
        if mode == Mode::Cost {
            check(
                self.total_cost.is_finite() && self.total_cost >= 0.0,
                "total_cost",
                || format!("must be a non-negative amount, got {}", self.total_cost),
            )?;
            return check(self.mflops.is_finite() && self.mflops > 0.0, "mflops", || {
                format!("must be positive, got {}", self.mflops)
            });
        }
        if mode == Mode::BenchFlops {
            return check(self.n >= 2, "n", || {
                format!("matrix order must be at least 2, got {}", self.n)
            });
        }

        check(self.dims.iter().all(|&d| d >= 2), "dims", || {
            format!("every extent must be at least 2, got {:?}", self.dims)
        })?;
        check(self.rank_grid.iter().all(|&g| g >= 1), "rank_grid", || {
            format!("entries must be at least 1, got {:?}", self.rank_grid)
        })?;
        check(
            (0..4).all(|d| self.dims[d].is_multiple_of(self.rank_grid[d])),
            "rank_grid",
            || format!("{:?} does not divide the lattice {:?}", self.rank_grid, self.dims),
        )?;
        if let Some(n) = self.ranks {
            check(n == self.size(), "ranks", || {
                format!(
                    "rank grid {:?} holds {} ranks but {n} were requested",
                    self.rank_grid,
                    self.size()
                )
            })?;
        }

        check(self.beta.is_finite() && self.beta >= 0.0, "beta", || {
            format!("must be finite and non-negative, got {}", self.beta)
        })?;
        match self.preset {
            Preset::Custom => {
                check(self.c0.is_some() && self.c1.is_some(), "c0", || {
                    "preset custom needs both c0 and c1".into()
                })?;
                let (c0, c1) = (self.c0.unwrap(), self.c1.unwrap());
                check(c0.is_finite() && c1.is_finite(), "c0", || {
                    format!("must be finite, got c0={c0} c1={c1}")
                })?;
            }
            _ => check(self.c0.is_none() && self.c1.is_none(), "c0", || {
                format!(
                    "c0/c1 are fixed by preset {:?}; use preset custom to set them",
                    self.preset
                )
            })?,
        }
        check(self.n_heatbath + self.n_overrelax > 0, "n_heatbath", || {
            "the schedule needs at least one heatbath or overrelaxation hit".into()
        })?;
        let params = self.update_params();
        let m = params.effective_modulus();
        if let Some(mm) = self.modulus {
            let needed = if params.coeffs.has_rectangles() { 4 } else { 2 };
            check((mm == 2 || mm == 4) && mm >= needed, "modulus", || {
                format!("must be 2 or 4 and at least {needed} for this action, got {mm}")
            })?;
        }
        check(self.dims.iter().all(|d| d % m == 0), "dims", || {
            if params.coeffs.has_rectangles() {
                format!(
                    "every extent must be divisible by 4 with rectangle terms, got {:?}",
                    self.dims
                )
            } else {
                format!("every extent must be divisible by {m}, got {:?}", self.dims)
            }
        })?;
        check(self.max_draw_iterations > 0, "max_draw_iterations", || {
            "must be positive".into()
        })?;

        if matches!(mode, Mode::Simulate | Mode::BenchQcd) {
            let geom = Geometry::build(self.dims, self.rank_grid, self.size())
                .map_err(|e| CliError::validation("rank_grid", e.to_string()))?;
            params.validate(&geom).map_err(|e| match e {
                UpdateError::InvalidSchedule(msg) => CliError::validation("rank_grid", msg),
                other => CliError::validation("update", other.to_string()),
            })?;
        }
        if mode == Mode::BenchQcd {
            check(self.sweeps >= 1, "sweeps", || {
                "at least one timed sweep is required".into()
            })?;
        }
        if mode == Mode::BenchComm {
            check(self.size() >= 2, "rank_grid", || {
                format!(
                    "ping-pong needs at least 2 ranks, grid {:?} has {}",
                    self.rank_grid,
                    self.size()
                )
            })?;
            check(
                !self.sizes.is_empty() && self.sizes.windows(2).all(|w| w[0] < w[1]),
                "sizes",
                || format!("must be non-empty and strictly increasing, got {:?}", self.sizes),
            )?;
            check(
                self.sizes.last().is_some_and(|&s| s <= self.max_message_mib << 20),
                "sizes",
                || format!("largest payload exceeds the {} MiB message limit", self.max_message_mib),
            )?;
            check(self.reps >= 1, "reps", || "must be at least 1".into())?;
        }

        for (field, v) in [
            ("rendezvous_timeout_secs", self.rendezvous_timeout_secs),
            ("recv_timeout_secs", self.recv_timeout_secs),
        ] {
            check(v.is_finite() && v > 0.0, field, || {
                format!("must be a positive number of seconds, got {v}")
            })?;
        }
        check(self.max_message_mib >= 1, "max_message_mib", || {
            "must be at least 1".into()
        })?;
        if self.backend == Backend::Socket {
            check(self.rendezvous.parse::<SocketAddr>().is_ok(), "rendezvous", || {
                format!("expected host:port, got {:?}", self.rendezvous)
            })?;
        }
        Ok(())
    }
}

fn check(ok: bool, field: &str, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::validation(field, msg()))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "latticefarm",
    version,
    about = "SU(3) lattice gauge simulation and cluster benchmarks"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Heatbath/overrelaxation Monte Carlo with an observable trace.
    Simulate(Overrides),
    /// Time link updates (microseconds per link).
    BenchQcd(Overrides),
    /// Ping-pong latency and bandwidth between ranks 0 and 1.
    BenchComm(Overrides),
    /// Dense LU solve, Mflop/s.
    BenchFlops(Overrides),
    /// Cost per Mflop/s.
    Cost(Overrides),
}

/// Flags mirroring [`RunConfig`]; any flag given replaces the file value.
#[derive(Debug, Default, Args, Serialize)]
pub struct Overrides {
    /// Global lattice extents, e.g. 8,8,8,16.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    /// Ranks per dimension, e.g. 1,1,2,8.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_grid: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// wilson, symanzik or custom.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    /// Heatbath hits per link per sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_heatbath: Option<u32>,
    /// Overrelaxation hits per link per sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_overrelax: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reunitarize_every: Option<u64>,
    /// Update class modulus, 2 or 4.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_draw_iterations: Option<u32>,
    /// parallel or sequential.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec: Option<String>,
    /// hot or cold.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermalization: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<u64>,
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub load: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub save: Option<PathBuf>,
    /// inprocess or socket.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[arg(long, value_name = "HOST:PORT")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rendezvous: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rendezvous_timeout_secs: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recv_timeout_secs: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_message_mib: Option<usize>,
    /// text, csv or json.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[arg(long, short, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_dir: Option<PathBuf>,
    /// Label of the measured row in reports.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub machine: Option<String>,
    /// Ping-pong payload sizes in bytes, e.g. 0,1024,1048576.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u32>,
    /// LU matrix order.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// single or double.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<String>,
    /// Total hardware cost, for the cost mode.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_cost: Option<f64>,
    /// Aggregate sustained Mflop/s, for the cost mode.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mflops: Option<f64>,
}

impl Command {
    fn split(self) -> (Mode, Overrides) {
        match self {
            Command::Simulate(o) => (Mode::Simulate, o),
            Command::BenchQcd(o) => (Mode::BenchQcd, o),
            Command::BenchComm(o) => (Mode::BenchComm, o),
            Command::BenchFlops(o) => (Mode::BenchFlops, o),
            Command::Cost(o) => (Mode::Cost, o),
        }
    }
}

/// Layers `file_text` (TOML) and the parsed flags into a validated config.
pub fn resolve_config(cli: Cli, file_text: Option<&str>) -> Result<RunConfig, CliError> {
    let mut table: toml::Table = match file_text {
        Some(text) => text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?,
        None => toml::Table::new(),
    };
    if let Some(cmd) = cli.command {
        let (mode, overrides) = cmd.split();
        let flags = toml::Table::try_from(&overrides).map_err(|e| CliError::Config(e.to_string()))?;
        table.extend(flags);
        table.insert("mode".into(), toml::Value::try_from(mode).expect("mode serializes"));
    }
    if !table.contains_key("mode") {
        return Err(CliError::validation(
            "mode",
            "no subcommand given and the config file sets no mode".into(),
        ));
    }
    let text = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses command-line arguments, reading `--config` from disk if given.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let text = match &cli.config {
        Some(path) => Some(read_config_file(path)?),
        None => None,
    };
    resolve_config(cli, text.as_deref())
}

fn read_config_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}
