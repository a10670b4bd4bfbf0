//! What one rank does in each mode. Only rank 0 writes output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use log::info;

use latticefarm::bench::{
    bench_flops_now, bench_link_update, bench_pingpong, format_measured, render_report, BenchReport, CostReport,
    Format, LinkBenchConfig,
};
use latticefarm::clock::MonotonicClock;
use latticefarm::comm::Communicator;
use latticefarm::montecarlo::{run_simulation, CsvTraceSink, NullSink, TraceRecord, TraceSink};

use crate::config::{Mode, RunConfig};
use crate::CliError;

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(format!("cannot create {}", p.display()), e))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_output(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    let mut out = open_output(cfg.output.as_deref())?;
    let ctx = || "cannot write output".to_string();
    out.write_all(text.as_bytes()).map_err(|e| CliError::io(ctx(), e))?;
    out.flush().map_err(|e| CliError::io(ctx(), e))
}

/// Runs the communicator-based modes on one rank.
pub fn run_rank(cfg: &RunConfig, comm: &Communicator) -> Result<(), CliError> {
    let root = comm.rank() == 0;
    match cfg.mode() {
        Mode::Simulate => simulate(cfg, comm),
        Mode::BenchQcd => {
            let bench = LinkBenchConfig {
                dims: cfg.dims,
                rank_grid: cfg.rank_grid,
                update: cfg.update_params(),
                start: cfg.start,
                seed: cfg.seed,
                warmup: cfg.warmup,
                sweeps: cfg.sweeps,
            };
            let link = bench_link_update(&bench, comm, &MonotonicClock::new())?;
            if root {
                let report = BenchReport {
                    machine: cfg.machine.clone(),
                    link: Some(link),
                    ..Default::default()
                };
                write_output(cfg, &render_report(&[report], cfg.format))?;
            }
            Ok(())
        }
        Mode::BenchComm => {
            let pp = bench_pingpong(comm, &cfg.sizes, cfg.reps, &MonotonicClock::new())?;
            if root {
                let report = BenchReport {
                    machine: cfg.machine.clone(),
                    comm: Some(pp),
                    ..Default::default()
                };
                write_output(cfg, &render_report(&[report], cfg.format))?;
            }
            Ok(())
        }
        Mode::BenchFlops | Mode::Cost => {
            if root {
                run_local(cfg)?;
            }
            Ok(())
        }
    }
}

/// Modes that need no communicator.
pub fn run_local(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.mode() {
        Mode::BenchFlops => {
            let flops = bench_flops_now(cfg.n, cfg.precision, cfg.seed)?;
            let report = BenchReport {
                machine: cfg.machine.clone(),
                flops: Some(flops),
                ..Default::default()
            };
            write_output(cfg, &render_report(&[report], cfg.format))
        }
        Mode::Cost => {
            let c = CostReport::new(cfg.total_cost, cfg.mflops)?;
            let text = match cfg.format {
                Format::Text => format!("{}\n", format_measured(c.cost_per_mflop)),
                Format::Csv => format!(
                    "total_cost,mflops,cost_per_mflop\n{:?},{:?},{:?}\n",
                    c.total_cost, c.mflops, c.cost_per_mflop
                ),
                Format::Json => serde_json::to_string_pretty(&c).expect("cost report serializes") + "\n",
            };
            write_output(cfg, &text)
        }
        other => unreachable!("{other:?} needs a communicator"),
    }
}

/// Keeps the JSON trace in memory; written as one array at the end.
struct JsonTrace(Vec<TraceRecord>);

impl TraceSink for JsonTrace {
    fn record(&mut self, rec: &TraceRecord) -> io::Result<()> {
        self.0.push(*rec);
        Ok(())
    }
}

fn simulate(cfg: &RunConfig, comm: &Communicator) -> Result<(), CliError> {
    let sim = cfg.simulation();
    if comm.rank() != 0 {
        run_simulation(&sim, comm, &mut NullSink)?;
        return Ok(());
    }
    let outcome = if cfg.format == Format::Json {
        let mut sink = JsonTrace(Vec::new());
        let r = run_simulation(&sim, comm, &mut sink);
        let text = serde_json::to_string_pretty(&sink.0).expect("trace serializes") + "\n";
        write_output(cfg, &text)?;
        r?
    } else {
        let mut sink = CsvTraceSink::new(open_output(cfg.output.as_deref())?);
        run_simulation(&sim, comm, &mut sink)?
    };
    if let (Some(last), Some(path)) = (outcome.trace.last(), &cfg.output) {
        println!(
            "{} measurements written to {}; final avg_plaquette {:.6}, action {:.6}",
            outcome.trace.len(),
            path.display(),
            last.avg_plaquette,
            last.action
        );
    }
    if let Some(s) = &outcome.last_sweep {
        info!(
            "last sweep: {:.3} s wall, {:.3} s halo, KP rejection rate {:.4}",
            s.wall_seconds, s.comm_seconds, s.kp_rejection_rate
        );
    }
    Ok(())
}
