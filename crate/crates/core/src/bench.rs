//! Link-update, ping-pong and LU benchmarks and the report renderer.
//!
//! Units: times in seconds, per-link cost in microseconds, bandwidth in
//! MB/s with 1 MB = 10^6 bytes, rates in Mflop/s with 1 Mflop = 10^6 flops.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{Clock, MonotonicClock};
use crate::comm::{Backend, CommError, Communicator};
use crate::field::{FieldMeta, GaugeField};
use crate::gaugeaction::Preset;
use crate::lattice::{Dims, Geometry, NDIM};
use crate::linpack::{self, LuError, LuScalar};
use crate::montecarlo::{sweep, sweep_with_clock, Start, UpdateError, UpdateParams};

pub const MB_DEFINITION: &str = "1 MB = 10^6 bytes";

const TAG_PINGPONG: u32 = 0x5050;

/// A singular benchmark matrix is redrawn once with the next seed.
const LU_ATTEMPTS: u64 = 2;

/// Largest acceptable normalized residual of the benchmark solve.
pub const RESIDUAL_LIMIT: f64 = 10.0;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("the ping-pong benchmark needs at least 2 ranks, got {0}")]
    NotEnoughRanks(usize),
    #[error("throughput must be positive, got {0} Mflop/s")]
    NonPositiveThroughput(f64),
    #[error("invalid benchmark input: {0}")]
    InvalidInput(String),
    #[error("normalized residual {0} exceeds the limit, solve is inaccurate")]
    ResidualCheck(f64),
    #[error(transparent)]
    Lu(#[from] LuError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Comm(#[from] CommError),
}

/// Microseconds per link update.
pub fn us_per_link(seconds: f64, links: u64) -> f64 {
    seconds * 1e6 / links as f64
}

/// Ping-pong bandwidth: two transfers of `bytes` per round trip.
pub fn bandwidth_mb_s(bytes: usize, round_trip_seconds: f64) -> f64 {
    2.0 * bytes as f64 / (round_trip_seconds * 1e6)
}

pub fn mflops(flops: u64, seconds: f64) -> f64 {
    flops as f64 / (seconds * 1e6)
}

/// Cost per unit of sustained Mflop/s.
pub fn cost_per_mflop(total_cost: f64, mflops: f64) -> Result<f64, BenchError> {
    if !(mflops > 0.0) || !mflops.is_finite() {
        return Err(BenchError::NonPositiveThroughput(mflops));
    }
    if !(total_cost >= 0.0) || !total_cost.is_finite() {
        return Err(BenchError::InvalidInput(format!(
            "total cost must be non-negative, got {total_cost}"
        )));
    }
    Ok(total_cost / mflops)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkBenchConfig {
    pub dims: Dims,
    pub rank_grid: Dims,
    pub update: UpdateParams,
    pub start: Start,
    pub seed: u64,
    /// Untimed sweeps before measuring.
    pub warmup: u64,
    pub sweeps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkBenchReport {
    pub dims: Dims,
    pub rank_grid: Dims,
    pub ranks: usize,
    pub preset: Preset,
    pub n_heatbath: u32,
    pub sweeps: u64,
    /// `4 · volume · sweeps · n_heatbath`; overrelaxation is not counted.
    pub links_updated: u64,
    pub seconds_inclusive: f64,
    /// Wall time minus halo-exchange time, slowest rank.
    pub seconds_compute: f64,
    pub us_per_link_inclusive: f64,
    pub us_per_link_compute: f64,
    pub kp_rejection_rate: f64,
}

/// Times `cfg.sweeps` full sweeps after `cfg.warmup` untimed ones.
/// Collective; every rank returns the same report.
pub fn bench_link_update(
    cfg: &LinkBenchConfig,
    comm: &Communicator,
    clock: &dyn Clock,
) -> Result<LinkBenchReport, BenchError> {
    if cfg.sweeps == 0 {
        return Err(BenchError::InvalidInput("at least one timed sweep is required".into()));
    }
    let geom = Geometry::build(cfg.dims, cfg.rank_grid, comm.size()).map_err(UpdateError::from)?;
    cfg.update.validate(&geom)?;
    let meta = FieldMeta {
        beta: cfg.update.coeffs.beta,
        c0: cfg.update.coeffs.c0,
        c1: cfg.update.coeffs.c1,
        sweeps: 0,
        seed: cfg.seed,
    };
    let mut field = match cfg.start {
        Start::Cold => GaugeField::cold(geom.clone(), comm.rank(), meta),
        Start::Hot => GaugeField::hot(geom.clone(), comm.rank(), meta),
    };
    for i in 0..cfg.warmup {
        sweep(&mut field, comm, &cfg.update, i)?;
    }
    comm.barrier()?;

    let t0 = clock.now();
    let mut comm_seconds = 0.0;
    let mut rejection = 0.0;
    for i in 0..cfg.sweeps {
        let s = sweep_with_clock(&mut field, comm, &cfg.update, cfg.warmup + i, clock)?;
        comm_seconds += s.comm_seconds;
        rejection += s.kp_rejection_rate;
    }
    let local = clock.now() - t0;

    let inclusive = comm.allreduce_max(local)?;
    let compute = comm.allreduce_max(local - comm_seconds)?;
    let rejection = comm.allreduce_sum(rejection / cfg.sweeps as f64)? / comm.size() as f64;
    let links = (NDIM * geom.volume()) as u64 * cfg.sweeps * cfg.update.n_heatbath as u64;
    Ok(LinkBenchReport {
        dims: cfg.dims,
        rank_grid: cfg.rank_grid,
        ranks: comm.size(),
        preset: cfg.update.coeffs.preset,
        n_heatbath: cfg.update.n_heatbath,
        sweeps: cfg.sweeps,
        links_updated: links,
        seconds_inclusive: inclusive,
        seconds_compute: compute,
        us_per_link_inclusive: us_per_link(inclusive, links),
        us_per_link_compute: us_per_link(compute, links),
        kp_rejection_rate: rejection,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PingPongSample {
    pub bytes: usize,
    pub repetitions: u32,
    pub round_trip_seconds: f64,
    pub bandwidth_mb_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommBenchReport {
    pub backend: Backend,
    pub ranks: usize,
    pub samples: Vec<PingPongSample>,
    /// Half the zero-size round trip, extrapolated linearly from the two
    /// smallest sizes and clamped at zero.
    pub latency_us: f64,
    pub peak_bandwidth_mb_s: f64,
    pub mb_definition: String,
}

/// One-way latency in microseconds from ping-pong samples.
pub fn latency_us(samples: &[PingPongSample]) -> f64 {
    let t0 = match samples {
        [] => return 0.0,
        [only] => only.round_trip_seconds,
        [a, b, ..] => {
            let slope = (b.round_trip_seconds - a.round_trip_seconds) / (b.bytes - a.bytes) as f64;
            a.round_trip_seconds - slope * a.bytes as f64
        }
    };
    (t0 / 2.0 * 1e6).max(0.0)
}

/// Ping-pong between ranks 0 and 1 for each message size (strictly
/// increasing). Other ranks only join the barriers. Collective; every rank
/// returns rank 0's measurements.
pub fn bench_pingpong(
    comm: &Communicator,
    sizes: &[usize],
    repetitions: u32,
    clock: &dyn Clock,
) -> Result<CommBenchReport, BenchError> {
    if comm.size() < 2 {
        return Err(BenchError::NotEnoughRanks(comm.size()));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || repetitions == 0 {
        return Err(BenchError::InvalidInput(
            "message sizes must be non-empty and strictly increasing, repetitions positive".into(),
        ));
    }
    let mut samples = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let buf = vec![0xA5u8; n];
        comm.barrier()?;
        match comm.rank() {
            0 => {
                let t0 = clock.now();
                for _ in 0..repetitions {
                    comm.send(1, TAG_PINGPONG, &buf)?;
                    comm.recv(1, TAG_PINGPONG)?;
                }
                let rt = (clock.now() - t0) / repetitions as f64;
                samples.push(PingPongSample {
                    bytes: n,
                    repetitions,
                    round_trip_seconds: rt,
                    bandwidth_mb_s: bandwidth_mb_s(n, rt),
                });
            }
            1 => {
                for _ in 0..repetitions {
                    let msg = comm.recv(0, TAG_PINGPONG)?;
                    comm.send(0, TAG_PINGPONG, &msg)?;
                }
            }
            _ => {}
        }
    }
    let encoded = serde_json::to_vec(&samples).expect("samples serialize");
    let shared = comm.broadcast(encoded)?;
    let samples: Vec<PingPongSample> =
        serde_json::from_slice(&shared).map_err(|e| CommError::Protocol(format!("ping-pong results: {e}")))?;
    let peak = samples.iter().map(|s| s.bandwidth_mb_s).fold(0.0, f64::max);
    Ok(CommBenchReport {
        backend: comm.backend(),
        ranks: comm.size(),
        latency_us: latency_us(&samples),
        peak_bandwidth_mb_s: peak,
        samples,
        mb_definition: MB_DEFINITION.to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    Double,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlopsReport {
    pub n: usize,
    pub precision: Precision,
    pub flops: u64,
    pub seconds: f64,
    pub mflops: f64,
    pub normalized_residual: f64,
}

/// Times an LU factor-and-solve of a random `n × n` system whose exact
/// solution is all ones.
pub fn bench_flops(n: usize, precision: Precision, seed: u64, clock: &dyn Clock) -> Result<FlopsReport, BenchError> {
    if n < 2 {
        return Err(BenchError::InvalidInput(format!(
            "matrix order must be at least 2, got {n}"
        )));
    }
    let (seconds, residual) = match precision {
        Precision::Single => solve_timed::<f32>(n, seed, clock)?,
        Precision::Double => solve_timed::<f64>(n, seed, clock)?,
    };
    if !(residual < RESIDUAL_LIMIT) {
        return Err(BenchError::ResidualCheck(residual));
    }
    let flops = linpack::lu_flop_count(n as u64);
    Ok(FlopsReport {
        n,
        precision,
        flops,
        seconds,
        mflops: mflops(flops, seconds),
        normalized_residual: residual,
    })
}

fn solve_timed<T: LuScalar>(n: usize, seed: u64, clock: &dyn Clock) -> Result<(f64, f64), BenchError> {
    let mut last = LuError::Empty;
    for attempt in 0..LU_ATTEMPTS {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let a: Vec<T> = linpack::random_matrix(n, &mut rng);
        let b = linpack::mat_vec(&a, n, &vec![T::ONE; n]);
        let mut lu = a.clone();
        let mut piv = vec![0; n];
        let mut x = b.clone();
        let t0 = clock.now();
        match linpack::lu_factor(&mut lu, n, &mut piv) {
            Ok(()) => {
                linpack::lu_solve(&lu, n, &piv, &mut x);
                let seconds = clock.now() - t0;
                return Ok((seconds, linpack::normalized_residual(&a, n, &x, &b)));
            }
            Err(e) => {
                log::warn!("LU benchmark matrix {attempt} singular, redrawing");
                last = e;
            }
        }
    }
    Err(last.into())
}

/// Convenience wrapper using the monotonic clock.
pub fn bench_flops_now(n: usize, precision: Precision, seed: u64) -> Result<FlopsReport, BenchError> {
    bench_flops(n, precision, seed, &MonotonicClock::new())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub total_cost: f64,
    pub mflops: f64,
    pub cost_per_mflop: f64,
}

impl CostReport {
    pub fn new(total_cost: f64, mflops: f64) -> Result<Self, BenchError> {
        Ok(CostReport {
            total_cost,
            mflops,
            cost_per_mflop: cost_per_mflop(total_cost, mflops)?,
        })
    }
}

/// Everything measured on one machine.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub machine: String,
    pub link: Option<LinkBenchReport>,
    pub comm: Option<CommBenchReport>,
    pub flops: Option<FlopsReport>,
    pub cost: Option<CostReport>,
}

/// Published comparison rows: machine, µs/link, MB/s, as printed.
pub const REFERENCE_ROWS: [(&str, &str, &str); 4] = [
    ("SX-4", "4.50", "45"),
    ("SR2201", "31.4", "28"),
    ("Cenju-3", "57.42", "8.1"),
    ("Paragon", "149", "9.0"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// One decimal at or above 1, three significant digits below.
pub fn format_measured(x: f64) -> String {
    if !x.is_finite() {
        return "-".into();
    }
    if x.abs() >= 1.0 || x == 0.0 {
        format!("{x:.1}")
    } else {
        let decimals = (2 - x.abs().log10().floor() as i32).max(1) as usize;
        format!("{x:.decimals$}")
    }
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    mb_definition: String,
    reference: Vec<ReferenceRow>,
    measured: Vec<BenchReport>,
}

#[derive(Serialize, Deserialize)]
struct ReferenceRow {
    machine: String,
    usec_per_link: f64,
    mb_per_sec: f64,
}

pub const CSV_HEADER: &str = "machine,usec_per_link,mb_per_sec";

/// Renders the comparison table: the reference rows followed by one row per
/// measured machine.
pub fn render_report(reports: &[BenchReport], format: Format) -> String {
    let usec = |r: &BenchReport| r.link.as_ref().map(|l| l.us_per_link_inclusive);
    let mbs = |r: &BenchReport| r.comm.as_ref().map(|c| c.peak_bandwidth_mb_s);
    match format {
        Format::Text => {
            let mut out = format!("{:<28}{:>12}{:>10}\n", "Machine", "usec/link", "MB/sec");
            for (m, u, b) in REFERENCE_ROWS {
                out += &format!("{:<28}{u:>12}{b:>10}\n", format!("{m} (reference)"));
            }
            for r in reports {
                let show = |v: Option<f64>| v.map(format_measured).unwrap_or_else(|| "-".into());
                out += &format!(
                    "{:<28}{:>12}{:>10}\n",
                    format!("{} (measured)", r.machine),
                    show(usec(r)),
                    show(mbs(r))
                );
            }
            for r in reports {
                if let Some(l) = &r.link {
                    out += &format!(
                        "{}: {} us/link compute-only, {} links over {} sweeps on {} rank(s)\n",
                        r.machine,
                        format_measured(l.us_per_link_compute),
                        l.links_updated,
                        l.sweeps,
                        l.ranks
                    );
                }
                if let Some(c) = &r.comm {
                    out += &format!(
                        "{}: latency {} us ({})\n",
                        r.machine,
                        format_measured(c.latency_us),
                        c.mb_definition
                    );
                }
                if let Some(f) = &r.flops {
                    out += &format!(
                        "{}: {} Mflop/s, n = {}, {} flops, {:?} precision, residual {}\n",
                        r.machine,
                        format_measured(f.mflops),
                        f.n,
                        f.flops,
                        f.precision,
                        format_measured(f.normalized_residual)
                    );
                }
                if let Some(c) = &r.cost {
                    out += &format!("{}: {} per Mflop/s\n", r.machine, format_measured(c.cost_per_mflop));
                }
            }
            out
        }
        Format::Csv => {
            let mut out = format!("{CSV_HEADER}\n");
            for (m, u, b) in REFERENCE_ROWS {
                out += &format!("{m},{u},{b}\n");
            }
            for r in reports {
                let cell = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
                out += &format!("{},{},{}\n", csv_escape(&r.machine), cell(usec(r)), cell(mbs(r)));
            }
            out
        }
        Format::Json => {
            let doc = JsonReport {
                mb_definition: MB_DEFINITION.to_string(),
                reference: REFERENCE_ROWS
                    .iter()
                    .map(|(m, u, b)| ReferenceRow {
                        machine: m.to_string(),
                        usec_per_link: u.parse().expect("reference value"),
                        mb_per_sec: b.parse().expect("reference value"),
                    })
                    .collect(),
                measured: reports.to_vec(),
            };
            serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
        }
    }
}

/// Measured reports back from JSON produced by [`render_report`].
pub fn parse_json_report(text: &str) -> Result<Vec<BenchReport>, serde_json::Error> {
    serde_json::from_str::<JsonReport>(text).map(|d| d.measured)
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
