use latticefarm::bench::{
    bandwidth_mb_s, bench_flops, bench_link_update, bench_pingpong, cost_per_mflop, render_report, BenchReport,
    CostReport, Format, LinkBenchConfig, Precision, REFERENCE_ROWS,
};
use latticefarm::clock::{MockClock, MonotonicClock};
use latticefarm::comm::{launch_inprocess, launch_socket_threads, CommConfig, Communicator};
use latticefarm::gaugeaction::ActionCoeffs;
use latticefarm::linpack::{lu_factor, lu_solve, normalized_residual};
use latticefarm::montecarlo::{Start, UpdateParams};

fn link_config(sweeps: u64) -> LinkBenchConfig {
    LinkBenchConfig {
        dims: [4; 4],
        rank_grid: [1; 4],
        update: UpdateParams::new(ActionCoeffs::wilson(5.7)),
        start: Start::Hot,
        seed: 4,
        warmup: 1,
        sweeps,
    }
}

#[test]
fn link_counts_are_exact() {
    let comm = Communicator::solo();
    let r10 = bench_link_update(&link_config(10), &comm, &MonotonicClock::new()).unwrap();
    assert_eq!(r10.links_updated, 10 * 4 * 256);
    let r20 = bench_link_update(&link_config(20), &comm, &MonotonicClock::new()).unwrap();
    assert_eq!(r20.links_updated, 2 * r10.links_updated);
    let ratio = r20.us_per_link_inclusive / r10.us_per_link_inclusive;
    assert!(ratio > 0.2 && ratio < 5.0, "{ratio}");
    let mut hits = link_config(3);
    hits.update.n_heatbath = 2;
    hits.update.n_overrelax = 4;
    assert_eq!(
        bench_link_update(&hits, &comm, &MonotonicClock::new())
            .unwrap()
            .links_updated,
        3 * 2 * 1024
    );
}

#[test]
fn multi_rank_link_bench_agrees_across_ranks() {
    let mut cfg = link_config(4);
    cfg.rank_grid = [1, 1, 1, 2];
    let out = launch_inprocess(2, &CommConfig::default(), |c| {
        bench_link_update(&cfg, &c, &MonotonicClock::new()).unwrap()
    })
    .unwrap();
    assert_eq!(out[0], out[1]);
    assert!(out[0].seconds_compute <= out[0].seconds_inclusive);
    assert!(out[0].us_per_link_inclusive > 0.0);
}

#[test]
fn link_report_is_backend_invariant_except_timings() {
    let mut cfg = link_config(2);
    cfg.rank_grid = [1, 1, 2, 1];
    let a = launch_inprocess(2, &CommConfig::default(), |c| {
        bench_link_update(&cfg, &c, &MonotonicClock::new()).unwrap()
    })
    .unwrap()
    .remove(0);
    let b = launch_socket_threads(2, &CommConfig::default(), |c| {
        bench_link_update(&cfg, &c, &MonotonicClock::new()).unwrap()
    })
    .unwrap()
    .remove(0);
    assert_eq!(
        (a.links_updated, a.ranks, a.preset),
        (b.links_updated, b.ranks, b.preset)
    );
    assert_eq!(a.kp_rejection_rate, b.kp_rejection_rate);
}

#[test]
fn pingpong_formulas_hold_on_both_backends() {
    let sizes = [0, 1024, 65536, 1 << 20];
    let cfg = CommConfig::default();
    let f = |c: Communicator| bench_pingpong(&c, &sizes, 5, &MonotonicClock::new()).unwrap();
    for reports in [
        launch_inprocess(2, &cfg, f).unwrap(),
        launch_socket_threads(3, &cfg, f).unwrap(),
    ] {
        let r = &reports[0];
        assert!(reports.iter().all(|x| x == r));
        assert_eq!(r.samples.len(), sizes.len());
        for s in &r.samples {
            assert!(s.round_trip_seconds > 0.0 && s.round_trip_seconds.is_finite());
            assert_eq!(s.bandwidth_mb_s, bandwidth_mb_s(s.bytes, s.round_trip_seconds));
        }
        assert!(r.peak_bandwidth_mb_s > 0.0 && r.peak_bandwidth_mb_s.is_finite());
        assert!(r.latency_us >= 0.0);
    }
}

#[test]
fn pingpong_mocked_latency_is_half_zero_size_round_trip() {
    let clock = MockClock::new([0.0, 20e-6, 100.0, 100.0 + 20e-6]);
    let out = launch_inprocess(2, &CommConfig::default(), |c| {
        bench_pingpong(&c, &[0, 64], 1, &clock).unwrap()
    })
    .unwrap();
    assert!((out[0].latency_us - 10.0).abs() < 1e-6);
}

#[test]
fn flops_residual_passes_across_sizes_and_seeds() {
    for n in [10, 50, 100, 200] {
        for seed in 0..20 {
            let r = bench_flops(n, Precision::Double, seed, &MonotonicClock::new()).unwrap();
            assert!(r.normalized_residual < 10.0, "n={n} seed={seed}");
        }
        let s = bench_flops(n, Precision::Single, 1, &MonotonicClock::new()).unwrap();
        assert!(s.normalized_residual < 10.0);
    }
}

#[test]
fn identity_system_solves_exactly() {
    let n = 5;
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
    }
    let orig = a.clone();
    let mut piv = vec![0; n];
    lu_factor(&mut a, n, &mut piv).unwrap();
    let mut b = vec![1.0, 0.0, 0.0, 0.0, 0.0];
    let e1 = b.clone();
    lu_solve(&a, n, &piv, &mut b);
    assert_eq!(b, e1);
    assert_eq!(normalized_residual(&orig, n, &b, &e1), 0.0);
}

#[test]
fn cost_with_zero_budget() {
    assert_eq!(cost_per_mflop(0.0, 1000.0).unwrap(), 0.0);
}

#[test]
fn csv_rows_are_reference_plus_measured() {
    let reports: Vec<BenchReport> = (0..3)
        .map(|i| BenchReport {
            machine: format!("node{i}"),
            cost: Some(CostReport::new(1.0, 2.0).unwrap()),
            ..Default::default()
        })
        .collect();
    let csv = render_report(&reports, Format::Csv);
    assert_eq!(csv.lines().count(), 1 + REFERENCE_ROWS.len() + 3);
    let text = render_report(&reports, Format::Text);
    assert!(text.contains("SX-4") && text.contains("(reference)") && text.contains("node2 (measured)"));
}
