//! Heatbath and overrelaxation updates over SU(2) subgroups, full sweeps,
//! and the simulation driver with its observable trace.
//!
//! A sweep visits direction by direction and, within a direction, update
//! class by class. Classes are sites whose global coordinates agree modulo
//! `m` in every dimension (`m = 2` for plaquette-only actions, `m = 4` once
//! rectangles enter). No staple of a class member touches another member's
//! link, so a class is updated from a read-only snapshot and the result does
//! not depend on visit order, thread count or rank layout. Every random draw
//! is keyed by `(seed, global site, direction, sweep, hit)`.

use std::io::Write;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{Clock, MonotonicClock};
use crate::comm::{halo_exchange, halo_exchange_filtered, CommError, Communicator};
use crate::field::{ClassFilter, DirSet, FieldMeta, GaugeField, OwnedSite};
use crate::gaugeaction::{avg_plaquette, avg_rectangle, open_staples, total_action, ActionCoeffs};
use crate::io::{load_field, save_field, FieldIoError};
use crate::lattice::{Dims, Geometry, GeometryError, NDIM};
use crate::par::Execution;
use crate::rng::{uniform_open0, RngKey};
use crate::su3::{Complex3x3, Su2Params, Su3Matrix, SUBGROUPS};

pub const DEFAULT_MAX_DRAW_ITERATIONS: u32 = 10_000;

/// Below this coupling the SU(2) block carries no usable direction.
pub const DEGENERATE_COUPLING: f64 = 1e-30;

/// Above this `α` the Kennedy–Pendleton sampler is used.
const KP_THRESHOLD: f64 = 2.0;

#[derive(Debug, Error)]
pub enum UpdateError {
    #[error("SU(2) heatbath draw did not converge after {iterations} iterations (alpha = {alpha})")]
    NonConvergence { alpha: f64, iterations: u32 },
    #[error("degenerate staple in SU(2) subgroup {subgroup}")]
    DegenerateStaple { subgroup: usize },
    #[error("invalid update schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Comm(#[from] CommError),
    #[error(transparent)]
    FieldIo(#[from] FieldIoError),
    #[error("trace output: {0}")]
    Trace(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateParams {
    pub coeffs: ActionCoeffs,
    pub n_heatbath: u32,
    pub n_overrelax: u32,
    /// Reunitarize owned links after every this many sweeps; 0 disables.
    pub reunitarize_every: u64,
    /// Class modulus; `None` picks 2 for plaquette-only actions and 4 otherwise.
    pub modulus: Option<usize>,
    pub exec: Execution,
    pub max_draw_iterations: u32,
}

impl UpdateParams {
    pub fn new(coeffs: ActionCoeffs) -> Self {
        UpdateParams {
            coeffs,
            n_heatbath: 1,
            n_overrelax: 0,
            reunitarize_every: 10,
            modulus: None,
            exec: Execution::default(),
            max_draw_iterations: DEFAULT_MAX_DRAW_ITERATIONS,
        }
    }

    pub fn effective_modulus(&self) -> usize {
        self.modulus.unwrap_or(if self.coeffs.has_rectangles() { 4 } else { 2 })
    }

    /// Checks that the schedule keeps same-class updates independent on
    /// this geometry.
    pub fn validate(&self, geom: &Geometry) -> Result<(), UpdateError> {
        let c = &self.coeffs;
        if !(c.beta.is_finite() && c.beta >= 0.0 && c.c0.is_finite() && c.c1.is_finite()) {
            return Err(UpdateError::InvalidSchedule(format!(
                "coefficients must be finite with beta >= 0, got beta={} c0={} c1={}",
                c.beta, c.c0, c.c1
            )));
        }
        if self.n_heatbath == 0 && self.n_overrelax == 0 {
            return Err(UpdateError::InvalidSchedule(
                "no heatbath or overrelaxation hits".into(),
            ));
        }
        let m = self.effective_modulus();
        let needed = if c.has_rectangles() { 4 } else { 2 };
        if m < needed || (m != 2 && m != 4) {
            return Err(UpdateError::InvalidSchedule(format!(
                "class modulus {m} cannot separate the staples of this action (needs {needed})"
            )));
        }
        for d in 0..NDIM {
            if !geom.global_dims[d].is_multiple_of(m) {
                return Err(UpdateError::InvalidSchedule(format!(
                    "extent {} in dimension {d} is not a multiple of the class modulus {m}",
                    geom.global_dims[d]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    /// Heatbath link updates over the whole lattice.
    pub links_updated: u64,
    pub wall_seconds: f64,
    /// Part of the wall time spent in halo exchanges on this rank.
    pub comm_seconds: f64,
    /// Fraction of SU(2) candidate draws rejected on this rank.
    pub kp_rejection_rate: f64,
}

/// Draws `a` in SU(2) with density `∝ exp(beta_eff · k · a0)` under Haar measure.
pub fn su2_heatbath_draw(k: f64, beta_eff: f64, key: &RngKey) -> Result<Su2Params, UpdateError> {
    su2_heatbath_draw_from(k * beta_eff, &mut key.stream(), DEFAULT_MAX_DRAW_ITERATIONS).map(|(a, _)| a)
}

/// Same draw with `alpha = beta_eff · k` from an explicit generator; also
/// returns the number of candidates tried.
pub fn su2_heatbath_draw_from<R: Rng + ?Sized>(
    alpha: f64,
    rng: &mut R,
    max_iterations: u32,
) -> Result<(Su2Params, u32), UpdateError> {
    for it in 1..=max_iterations {
        let a0 = if alpha < KP_THRESHOLD {
            // Haar marginal of a0 (semicircle) as the proposal.
            let a0 = rng.random::<f64>().sqrt() * (std::f64::consts::TAU * rng.random::<f64>()).cos();
            if rng.random::<f64>() < (alpha * (a0 - 1.0)).exp() {
                a0
            } else {
                continue;
            }
        } else {
            let r1 = uniform_open0(rng);
            let r2 = rng.random::<f64>();
            let r3 = uniform_open0(rng);
            let c = (std::f64::consts::TAU * r2).cos();
            let lambda2 = -(r1.ln() + c * c * r3.ln()) / (2.0 * alpha);
            let r4 = rng.random::<f64>();
            if r4 * r4 > 1.0 - lambda2 {
                continue;
            }
            1.0 - 2.0 * lambda2
        };
        return Ok((Su2Params::with_random_axis(a0, rng), it));
    }
    Err(UpdateError::NonConvergence {
        alpha,
        iterations: max_iterations,
    })
}

fn coupling(w: &Complex3x3, subgroup: usize) -> (Su2Params, f64) {
    let p = Su2Params::projection(w, subgroup);
    let k = p.norm_sqr().sqrt();
    (p, k)
}

/// Counts of SU(2) candidate draws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DrawCounts {
    pub accepted: u64,
    pub tried: u64,
}

/// One heatbath hit: each SU(2) subgroup in turn is resampled from its
/// conditional distribution given the staple sum.
pub fn heatbath_link(
    u: &Su3Matrix,
    staple: &Complex3x3,
    coeffs: &ActionCoeffs,
    key: &RngKey,
) -> Result<Su3Matrix, UpdateError> {
    heatbath_link_counted(u, staple, coeffs.beta / 3.0, key, DEFAULT_MAX_DRAW_ITERATIONS).map(|(v, _)| v)
}

fn heatbath_link_counted(
    u: &Su3Matrix,
    staple: &Complex3x3,
    beta_eff: f64,
    key: &RngKey,
    max_iterations: u32,
) -> Result<(Su3Matrix, DrawCounts), UpdateError> {
    let mut rng = key.stream();
    let mut m = u.into_matrix();
    let mut w = m.mul_adj(staple);
    let mut counts = DrawCounts::default();
    for sg in 0..SUBGROUPS.len() {
        let (p, k) = coupling(&w, sg);
        let r = if k > DEGENERATE_COUPLING {
            let (x, tried) = su2_heatbath_draw_from(beta_eff * k, &mut rng, max_iterations)?;
            counts.accepted += 1;
            counts.tried += tried as u64;
            x.mul(&p.scale(1.0 / k))
        } else {
            Su2Params::haar(&mut rng)
        };
        r.left_mul_into(sg, &mut m);
        r.left_mul_into(sg, &mut w);
    }
    Ok((Su3Matrix::new_unchecked(m), counts))
}

/// Reflection of one subgroup that leaves the local action unchanged.
pub fn overrelax_subgroup(u: &Su3Matrix, staple: &Complex3x3, subgroup: usize) -> Result<Su3Matrix, UpdateError> {
    let (p, k) = coupling(&u.mul_adj(staple), subgroup);
    if k <= DEGENERATE_COUPLING {
        return Err(UpdateError::DegenerateStaple { subgroup });
    }
    let v = p.scale(1.0 / k);
    let mut m = u.into_matrix();
    v.mul(&v).left_mul_into(subgroup, &mut m);
    Ok(Su3Matrix::new_unchecked(m))
}

/// Microcanonical update over all three subgroups. Subgroups with a
/// degenerate staple are left untouched.
pub fn overrelax_link(u: &Su3Matrix, staple: &Complex3x3) -> Su3Matrix {
    let mut cur = *u;
    for sg in 0..SUBGROUPS.len() {
        match overrelax_subgroup(&cur, staple, sg) {
            Ok(v) => cur = v,
            Err(_) => log::debug!("overrelaxation skipped subgroup {sg}: degenerate staple"),
        }
    }
    cur
}

fn update_link(
    field: &GaugeField,
    site: &OwnedSite,
    mu: usize,
    params: &UpdateParams,
    sweep_no: u64,
) -> Result<(Su3Matrix, DrawCounts), UpdateError> {
    let staple = open_staples(field, site.ext, mu, &params.coeffs).adjoint();
    let beta_eff = params.coeffs.beta / 3.0;
    let base = RngKey::new(field.meta.seed)
        .with_link(site.global_index as u64, mu)
        .with_sweep(sweep_no);
    let mut u = *field.link(site.ext, mu);
    let mut counts = DrawCounts::default();
    for hit in 0..params.n_heatbath {
        let (v, c) = heatbath_link_counted(&u, &staple, beta_eff, &base.with_draw(hit), params.max_draw_iterations)?;
        u = v;
        counts.accepted += c.accepted;
        counts.tried += c.tried;
    }
    for _ in 0..params.n_overrelax {
        u = overrelax_link(&u, &staple);
    }
    Ok((u, counts))
}

/// One full sweep, numbered `sweep_no` for the random keys. Collective.
pub fn sweep(
    field: &mut GaugeField,
    comm: &Communicator,
    params: &UpdateParams,
    sweep_no: u64,
) -> Result<SweepStats, UpdateError> {
    sweep_with_clock(field, comm, params, sweep_no, &MonotonicClock::new())
}

pub fn sweep_with_clock(
    field: &mut GaugeField,
    comm: &Communicator,
    params: &UpdateParams,
    sweep_no: u64,
    clock: &dyn Clock,
) -> Result<SweepStats, UpdateError> {
    params.validate(field.geometry())?;
    let m = params.effective_modulus();
    let n_classes = m.pow(NDIM as u32);
    let classes: Vec<Vec<OwnedSite>> = (0..n_classes)
        .map(|c| field.owned_sites_in_class(ClassFilter { modulus: m, class: c }))
        .collect();

    let start = clock.now();
    let mut comm_seconds = 0.0;
    let mut timed_exchange = |f: &mut GaugeField, dirs: DirSet, class: Option<ClassFilter>| {
        let t = clock.now();
        let r = match (dirs, class) {
            (DirSet::All, None) => halo_exchange(f, comm),
            _ => halo_exchange_filtered(f, comm, dirs, class),
        };
        comm_seconds += clock.now() - t;
        r
    };

    timed_exchange(field, DirSet::All, None)?;
    let mut counts = DrawCounts::default();
    for mu in 0..NDIM {
        for (c, sites) in classes.iter().enumerate() {
            let snapshot: &GaugeField = field;
            let updated = params
                .exec
                .try_map(sites, |s| update_link(snapshot, s, mu, params, sweep_no))?;
            for (s, (u, k)) in sites.iter().zip(updated) {
                field.set_link(s.ext, mu, u);
                counts.accepted += k.accepted;
                counts.tried += k.tried;
            }
            timed_exchange(field, DirSet::One(mu), Some(ClassFilter { modulus: m, class: c }))?;
        }
    }
    if params.reunitarize_every > 0 && (sweep_no + 1).is_multiple_of(params.reunitarize_every) {
        field.reunitarize_owned();
        timed_exchange(field, DirSet::All, None)?;
    }
    field.meta.sweeps += 1;

    let wall_seconds = clock.now() - start;
    let rejection = if counts.tried > 0 {
        (counts.tried - counts.accepted) as f64 / counts.tried as f64
    } else {
        0.0
    };
    Ok(SweepStats {
        links_updated: (NDIM * field.geometry().volume()) as u64 * params.n_heatbath as u64,
        wall_seconds,
        comm_seconds,
        kp_rejection_rate: rejection,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Cold,
    Hot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dims: Dims,
    pub rank_grid: Dims,
    pub update: UpdateParams,
    pub start: Start,
    pub seed: u64,
    pub thermalization: u64,
    pub sweeps: u64,
    /// Continue from a saved configuration instead of a fresh start.
    pub load: Option<PathBuf>,
    pub save: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub sweep: u64,
    pub avg_plaquette: f64,
    pub avg_rectangle: f64,
    pub action: f64,
}

/// Receives each measurement as soon as it is taken.
pub trait TraceSink {
    fn record(&mut self, rec: &TraceRecord) -> std::io::Result<()>;
}

/// Discards records; used on ranks other than 0.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _rec: &TraceRecord) -> std::io::Result<()> {
        Ok(())
    }
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, rec: &TraceRecord) -> std::io::Result<()> {
        self.push(*rec);
        Ok(())
    }
}

pub const TRACE_CSV_HEADER: &str = "sweep,avg_plaquette,avg_rectangle,action";

/// CSV trace, flushed after every row so a failed run leaves a usable prefix.
pub struct CsvTraceSink<W: Write> {
    out: W,
    wrote_header: bool,
}

impl<W: Write> CsvTraceSink<W> {
    pub fn new(out: W) -> Self {
        CsvTraceSink {
            out,
            wrote_header: false,
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TraceSink for CsvTraceSink<W> {
    fn record(&mut self, rec: &TraceRecord) -> std::io::Result<()> {
        if !self.wrote_header {
            writeln!(self.out, "{TRACE_CSV_HEADER}")?;
            self.wrote_header = true;
        }
        writeln!(
            self.out,
            "{},{:?},{:?},{:?}",
            rec.sweep, rec.avg_plaquette, rec.avg_rectangle, rec.action
        )?;
        self.out.flush()
    }
}

/// Forwards to several sinks.
pub struct TeeSink<'a>(pub Vec<&'a mut dyn TraceSink>);

impl TraceSink for TeeSink<'_> {
    fn record(&mut self, rec: &TraceRecord) -> std::io::Result<()> {
        for s in self.0.iter_mut() {
            s.record(rec)?;
        }
        Ok(())
    }
}

pub struct SimulationOutcome {
    pub field: GaugeField,
    pub trace: Vec<TraceRecord>,
    pub last_sweep: Option<SweepStats>,
}

pub fn measure(field: &GaugeField, comm: &Communicator, params: &UpdateParams) -> Result<TraceRecord, UpdateError> {
    Ok(TraceRecord {
        sweep: field.meta.sweeps,
        avg_plaquette: avg_plaquette(field, comm, params.exec)?,
        avg_rectangle: avg_rectangle(field, comm, params.exec)?,
        action: total_action(field, comm, &params.coeffs, params.exec)?,
    })
}

/// Builds or loads the field, runs thermalization and measured sweeps, and
/// saves the result if asked. Collective; every rank passes its own sink.
pub fn run_simulation(
    cfg: &SimulationConfig,
    comm: &Communicator,
    sink: &mut dyn TraceSink,
) -> Result<SimulationOutcome, UpdateError> {
    let geom = Geometry::build(cfg.dims, cfg.rank_grid, comm.size())?;
    cfg.update.validate(&geom)?;
    let meta = FieldMeta {
        beta: cfg.update.coeffs.beta,
        c0: cfg.update.coeffs.c0,
        c1: cfg.update.coeffs.c1,
        sweeps: 0,
        seed: cfg.seed,
    };
    let mut field = match &cfg.load {
        Some(path) => {
            let mut f = load_field(path, &geom, comm.rank())?;
            f.meta.beta = meta.beta;
            f.meta.c0 = meta.c0;
            f.meta.c1 = meta.c1;
            f.meta.seed = meta.seed;
            f
        }
        None => match cfg.start {
            Start::Cold => GaugeField::cold(geom, comm.rank(), meta),
            Start::Hot => GaugeField::hot(geom, comm.rank(), meta),
        },
    };

    let mut trace = Vec::new();
    let mut last = None;
    for i in 0..cfg.thermalization + cfg.sweeps {
        let n = field.meta.sweeps;
        last = Some(sweep(&mut field, comm, &cfg.update, n)?);
        if i >= cfg.thermalization {
            let rec = measure(&field, comm, &cfg.update)?;
            sink.record(&rec).map_err(|e| UpdateError::Trace(e.to_string()))?;
            trace.push(rec);
        }
    }
    if let Some(path) = &cfg.save {
        save_field(path, &field, comm)?;
    }
    Ok(SimulationOutcome {
        field,
        trace,
        last_sweep: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaugeaction::{local_action, staple_sum};
    use crate::su3::random_su3;
    use rand::SeedableRng;

    fn hot(dims: Dims, seed: u64) -> GaugeField {
        GaugeField::hot(
            Geometry::serial(dims).unwrap(),
            0,
            FieldMeta {
                seed,
                ..Default::default()
            },
        )
    }

    #[test]
    fn heatbath_output_is_special_unitary() {
        let f = hot([4; 4], 3);
        let c = ActionCoeffs::symanzik(6.0);
        let staple = staple_sum(&f, [1, 1, 1, 1], 2, &c).unwrap();
        let mut u = *f.link(f.index([1, 1, 1, 1]).unwrap(), 2);
        for i in 0..200 {
            u = heatbath_link(&u, &staple, &c, &RngKey::new(1).with_draw(i)).unwrap();
            assert!(u.su3_deviation() < 1e-12);
        }
    }

    #[test]
    fn overrelaxation_preserves_local_action() {
        let f = hot([4; 4], 4);
        let c = ActionCoeffs::wilson(5.7);
        let x = [0, 3, 1, 2];
        let staple = staple_sum(&f, x, 1, &c).unwrap();
        let u = *f.link(f.index(x).unwrap(), 1);
        let v = overrelax_link(&u, &staple);
        let before = local_action(u.matrix(), &staple, c.beta);
        let after = local_action(v.matrix(), &staple, c.beta);
        assert!((before - after).abs() < 1e-12 * before.abs().max(1.0));
        assert!((*v.matrix() - *u.matrix()).unitarity_deviation() > 1e-6);
        for sg in 0..3 {
            let once = overrelax_subgroup(&u, &staple, sg).unwrap();
            let twice = overrelax_subgroup(&once, &staple, sg).unwrap();
            let diff = *twice.matrix() - *u.matrix();
            assert!(diff.m.iter().flatten().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn overrelaxation_flags_degenerate_staple() {
        let u = random_su3(&RngKey::new(5));
        assert!(matches!(
            overrelax_subgroup(&u, &Complex3x3::ZERO, 1),
            Err(UpdateError::DegenerateStaple { subgroup: 1 })
        ));
        assert_eq!(overrelax_link(&u, &Complex3x3::ZERO), u);
    }

    #[test]
    fn zero_coupling_draw_is_haar() {
        // With alpha = 0 the a0 marginal is the semicircle: mean 0, E[a0^2] = 1/4.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 40_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let (a, _) = su2_heatbath_draw_from(0.0, &mut rng, 100).unwrap();
            assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
            s1 += a.a0;
            s2 += a.a0 * a.a0;
        }
        assert!((s1 / n as f64).abs() < 0.015);
        assert!((s2 / n as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn draw_iteration_cap() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        // One iteration with a strong coupling rejects often; some seed in a
        // short run must hit the cap.
        let failures = (0..200)
            .filter(|_| su2_heatbath_draw_from(1.0, &mut rng, 1).is_err())
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn sweep_is_identical_across_execution_policies() {
        let c = ActionCoeffs::symanzik(4.0);
        let mut p = UpdateParams::new(c);
        p.n_overrelax = 1;
        let mut a = hot([4; 4], 6);
        let mut b = a.clone();
        let comm = Communicator::solo();
        p.exec = Execution::Sequential;
        sweep(&mut a, &comm, &p, 0).unwrap();
        p.exec = Execution::Parallel;
        sweep(&mut b, &comm, &p, 0).unwrap();
        assert_eq!(a.raw_links(), b.raw_links());
    }

    #[test]
    fn schedule_validation() {
        let g = Geometry::serial([4, 4, 4, 6]).unwrap();
        assert!(UpdateParams::new(ActionCoeffs::wilson(5.0)).validate(&g).is_ok());
        assert!(matches!(
            UpdateParams::new(ActionCoeffs::symanzik(5.0)).validate(&g),
            Err(UpdateError::InvalidSchedule(_))
        ));
        let mut p = UpdateParams::new(ActionCoeffs::symanzik(5.0));
        p.modulus = Some(2);
        assert!(p.validate(&Geometry::serial([4; 4]).unwrap()).is_err());
        // Slabs as thin as the halo are fine.
        let thin = Geometry::build([8, 8, 8, 4], [1, 1, 1, 2], 2).unwrap();
        assert!(UpdateParams::new(ActionCoeffs::symanzik(5.0)).validate(&thin).is_ok());
        assert!(UpdateParams::new(ActionCoeffs::wilson(5.0)).validate(&thin).is_ok());
    }

    #[test]
    fn stats_count_heatbath_links() {
        let mut p = UpdateParams::new(ActionCoeffs::wilson(5.0));
        p.n_heatbath = 2;
        let mut f = hot([2, 2, 2, 4], 1);
        let clock = crate::clock::MockClock::new([0.0, 0.25, 0.5, 1.0]);
        let s = sweep_with_clock(&mut f, &Communicator::solo(), &p, 0, &clock).unwrap();
        assert_eq!(s.links_updated, 2 * 4 * 32);
        assert_eq!(s.wall_seconds, 1.0);
        assert_eq!(s.comm_seconds, 0.25);
        assert_eq!(f.meta.sweeps, 1);
    }

    #[test]
    fn csv_sink_writes_header_once() {
        let mut s = CsvTraceSink::new(Vec::new());
        let r = TraceRecord {
            sweep: 1,
            avg_plaquette: 0.5,
            avg_rectangle: 0.25,
            action: 3.0,
        };
        s.record(&r).unwrap();
        s.record(&TraceRecord { sweep: 2, ..r }).unwrap();
        let text = String::from_utf8(s.into_inner()).unwrap();
        assert_eq!(text, format!("{TRACE_CSV_HEADER}\n1,0.5,0.25,3.0\n2,0.5,0.25,3.0\n"));
    }
}
