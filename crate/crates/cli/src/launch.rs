//! Rank launching. The in-process backend runs ranks as threads; the socket
//! backend re-executes this binary once per rank in a worker role marked by
//! environment variables.

use std::env;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::thread::sleep;
use std::time::{Duration, Instant};

use log::{debug, warn};

use latticefarm::comm::socket::free_local_addr;
use latticefarm::comm::{comm_init_socket, launch_inprocess, Backend};

use crate::config::RunConfig;
use crate::run::{run_local, run_rank};
use crate::CliError;

pub const ENV_ROLE: &str = "LATTICEFARM_ROLE";
pub const ENV_RANK: &str = "LATTICEFARM_RANK";
pub const ENV_SIZE: &str = "LATTICEFARM_SIZE";
pub const ENV_RENDEZVOUS: &str = "LATTICEFARM_RENDEZVOUS";
/// Binary to spawn for workers; defaults to the running executable.
pub const ENV_EXE: &str = "LATTICEFARM_EXE";

/// How long surviving workers may run on after another rank failed.
const FAILURE_GRACE: Duration = Duration::from_secs(10);

/// Identity of a socket worker process, from its environment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerEnv {
    pub rank: usize,
    pub size: usize,
    pub rendezvous: String,
}

impl WorkerEnv {
    /// `None` unless this process was started as a worker.
    pub fn from_env() -> Result<Option<WorkerEnv>, CliError> {
        match env::var(ENV_ROLE) {
            Ok(role) if role == "worker" => {}
            _ => return Ok(None),
        }
        let var = |name: &str| env::var(name).map_err(|_| CliError::Launch(format!("worker without {name}")));
        let num = |name: &str| -> Result<usize, CliError> {
            var(name)?
                .parse()
                .map_err(|_| CliError::Launch(format!("{name} is not a number")))
        };
        Ok(Some(WorkerEnv {
            rank: num(ENV_RANK)?,
            size: num(ENV_SIZE)?,
            rendezvous: var(ENV_RENDEZVOUS)?,
        }))
    }
}

/// Runs the configured mode on all ranks. Errors if any rank failed.
pub fn launch(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(w) = WorkerEnv::from_env()? {
        return run_worker(cfg, &w);
    }
    if cfg.mode().is_local() {
        return run_local(cfg);
    }
    match cfg.backend {
        Backend::InProcess => {
            let results = launch_inprocess(cfg.size(), &cfg.comm_config(), |comm| {
                let rank = comm.rank();
                run_rank(cfg, &comm).map_err(|e| (rank, e))
            })?;
            first_failure(results)
        }
        Backend::Socket => supervise(cfg),
    }
}

/// Reports every failed rank and returns rank 0's error if it failed,
/// else the lowest failed rank's.
fn first_failure(results: Vec<Result<(), (usize, CliError)>>) -> Result<(), CliError> {
    let mut failed: Vec<(usize, CliError)> = results.into_iter().filter_map(Result::err).collect();
    if failed.is_empty() {
        return Ok(());
    }
    for (rank, e) in failed.iter().skip(1) {
        eprintln!("latticefarm: rank {rank} failed: {e}");
    }
    let (rank, e) = failed.remove(0);
    Err(if rank == 0 {
        e
    } else {
        CliError::Rank {
            rank,
            message: e.to_string(),
        }
    })
}

fn run_worker(cfg: &RunConfig, w: &WorkerEnv) -> Result<(), CliError> {
    if w.size != cfg.size() {
        return Err(CliError::Launch(format!(
            "worker started for {} ranks but the rank grid {:?} needs {}",
            w.size,
            cfg.rank_grid,
            cfg.size()
        )));
    }
    debug!("rank {} of {} joining {}", w.rank, w.size, w.rendezvous);
    let comm = comm_init_socket(w.rank, w.size, &w.rendezvous, &cfg.comm_config())?;
    run_rank(cfg, &comm)
}

fn log_dir(cfg: &RunConfig) -> PathBuf {
    if let Some(d) = &cfg.log_dir {
        return d.clone();
    }
    match cfg.output.as_ref().and_then(|p| p.parent()) {
        Some(parent) if !parent.as_os_str().is_empty() => parent.join("latticefarm-logs"),
        _ => env::temp_dir().join(format!("latticefarm-{}", std::process::id())),
    }
}

fn resolve_rendezvous(addr: &str) -> Result<String, CliError> {
    if !addr.ends_with(":0") {
        return Ok(addr.to_string());
    }
    if addr.starts_with("127.0.0.1") || addr.starts_with("localhost") {
        return free_local_addr().map_err(|e| CliError::io("cannot pick a rendezvous port", e));
    }
    Err(CliError::Launch(format!(
        "rendezvous {addr} needs an explicit port off localhost"
    )))
}

fn worker_exe() -> Result<PathBuf, CliError> {
    match env::var_os(ENV_EXE) {
        Some(p) => Ok(PathBuf::from(p)),
        None => env::current_exe().map_err(|e| CliError::io("cannot locate the latticefarm binary", e)),
    }
}

/// Spawns one worker process per rank and waits for all of them. Rank 0
/// shares this process's console; the others log to files.
fn supervise(cfg: &RunConfig) -> Result<(), CliError> {
    let size = cfg.size();
    let dir = log_dir(cfg);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("cannot create {}", dir.display()), e))?;
    let config_path = dir.join("run.toml");
    fs::write(&config_path, cfg.to_toml())
        .map_err(|e| CliError::io(format!("cannot write {}", config_path.display()), e))?;
    let rendezvous = resolve_rendezvous(&cfg.rendezvous)?;
    let exe = worker_exe()?;

    let mut children: Vec<(usize, Child, Option<PathBuf>)> = Vec::with_capacity(size);
    for rank in 0..size {
        let mut cmd = Command::new(&exe);
        cmd.arg("--config")
            .arg(&config_path)
            .env(ENV_ROLE, "worker")
            .env(ENV_RANK, rank.to_string())
            .env(ENV_SIZE, size.to_string())
            .env(ENV_RENDEZVOUS, &rendezvous)
            .stdin(Stdio::null());
        let log = if rank == 0 {
            None
        } else {
            let path = dir.join(format!("rank-{rank}.log"));
            let f = File::create(&path).map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))?;
            let f2 = f
                .try_clone()
                .map_err(|e| CliError::io("cannot duplicate log handle", e))?;
            cmd.stdout(f).stderr(f2);
            Some(path)
        };
        match cmd.spawn() {
            Ok(child) => children.push((rank, child, log)),
            Err(e) => {
                for (_, c, _) in children.iter_mut() {
                    let _ = c.kill();
                }
                return Err(CliError::io(format!("cannot start worker {}", exe.display()), e));
            }
        }
    }
    wait_all(children)
}

fn wait_all(mut children: Vec<(usize, Child, Option<PathBuf>)>) -> Result<(), CliError> {
    let mut failed: Vec<String> = Vec::new();
    let mut first_failure: Option<Instant> = None;
    while !children.is_empty() {
        let mut i = 0;
        while i < children.len() {
            let (rank, child, log) = &mut children[i];
            match child.try_wait() {
                Ok(Some(status)) => {
                    if !status.success() {
                        failed.push(describe_failure(*rank, &status.to_string(), log.as_deref()));
                        first_failure.get_or_insert_with(Instant::now);
                    }
                    children.swap_remove(i);
                }
                Ok(None) => i += 1,
                Err(e) => {
                    failed.push(format!("rank {rank}: cannot wait: {e}"));
                    children.swap_remove(i);
                }
            }
        }
        if first_failure.is_some_and(|t| t.elapsed() > FAILURE_GRACE) {
            for (rank, child, _) in children.iter_mut() {
                warn!("killing rank {rank} after another rank failed");
                let _ = child.kill();
                let _ = child.wait();
                failed.push(format!("rank {rank}: killed"));
            }
            break;
        }
        sleep(Duration::from_millis(10));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Launch(failed.join("; ")))
    }
}

fn describe_failure(rank: usize, status: &str, log: Option<&Path>) -> String {
    let Some(path) = log else {
        return format!("rank {rank} {status}");
    };
    let tail = fs::read_to_string(path)
        .ok()
        .and_then(|t| t.lines().rev().find(|l| !l.trim().is_empty()).map(str::to_string))
        .unwrap_or_default();
    format!("rank {rank} {status} ({}): {tail}", path.display())
}
