//! End-to-end flows: files in, fits through, reports out.

mod common;

use std::fs;

use common::{noise_free, pion, simulated, table_params};
use telefit::{
    load_dataset, load_report, peel_sequence, phase3, save_report, sensitivity_sweep,
    write_dataset, McmcConfig, PeelOptions, PriorSpec, ScheduleRule, TelescopeSchedule,
};

fn temp_path(name: &str) -> std::path::PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("telefit-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn dataset_file_round_trip() {
    let ds = simulated(23);
    let path = temp_path("roundtrip.csv");
    write_dataset(&ds, &path).unwrap();
    let back = load_dataset(&path).unwrap();
    fs::remove_file(&path).ok();
    assert_eq!(ds, back);
}

#[test]
fn pion_file_parses_per_layout() {
    let ds = pion();
    assert_eq!(ds.points().len(), 12);
    assert_eq!(ds.times().first(), Some(&2));
    assert_eq!(ds.times().last(), Some(&13));
    let p8 = ds.point_at(8).unwrap();
    assert_eq!(p8.y, 4.358e-4);
    assert_eq!(p8.sigma, 6.73225e-6);
    // Ratio selection over t in {2..13} reproduces the halving pattern.
    let s = TelescopeSchedule::select(&ds.times(), 3, ScheduleRule::Ratio).unwrap();
    assert_eq!(s.times(), &[13, 7, 4]);
}

#[test]
fn report_file_round_trip_is_bit_exact() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(51);
    cfg.m = 60;
    cfg.c0 = 0.4;
    let report = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    let path = temp_path("report.txt");
    save_report(&report, &path).unwrap();
    let back = load_report(&path).unwrap();
    fs::remove_file(&path).ok();
    assert_eq!(report, back);
}

#[test]
fn truncating_a_report_anywhere_is_an_error_not_a_panic() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(71);
    cfg.m = 20;
    cfg.c0 = 0.4;
    let report = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    let text = telefit::render_report(&report);
    let lines: Vec<&str> = text.lines().collect();
    for cut in 0..lines.len() {
        let partial = lines[..cut].join("\n");
        assert!(
            telefit::parse_report(&partial, "cut").is_err(),
            "a report cut after line {cut} should not parse"
        );
    }
    assert!(telefit::parse_report(&text, "full").is_ok());
}

#[test]
fn sweep_is_deterministic_and_labels_cells() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(53);
    cfg.m = 40;
    cfg.c0 = 0.4;
    let grid = vec![
        PriorSpec::default(),
        PriorSpec { alpha: 2.0, beta: 2.0, ..PriorSpec::default() },
    ];
    let a = sensitivity_sweep(&ds, &sched, &grid, &cfg).unwrap();
    let b = sensitivity_sweep(&ds, &sched, &grid, &cfg).unwrap();
    assert_eq!(a.cells.len(), 2);
    assert!(!a.all_failed());
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!(x.label, y.label);
        assert_eq!(x.seed, y.seed);
        match (&x.outcome, &y.outcome) {
            (Ok(rx), Ok(ry)) => assert_eq!(rx, ry),
            (Err(ex), Err(ey)) => assert_eq!(ex, ey),
            _ => panic!("sweep outcomes diverged between identical runs"),
        }
    }
    assert_ne!(a.cells[0].seed, a.cells[1].seed);
}

#[test]
fn single_cell_sweep_matches_direct_fit() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(55);
    cfg.m = 40;
    cfg.c0 = 0.4;
    let table = sensitivity_sweep(&ds, &sched, &[PriorSpec::default()], &cfg).unwrap();
    let cell = &table.cells[0];
    let mut direct_cfg = cfg.clone();
    direct_cfg.seed = cell.seed;
    let direct = phase3(&ds, &sched, &PriorSpec::default(), &direct_cfg).unwrap();
    assert_eq!(cell.outcome.as_ref().unwrap(), &direct);
}

#[test]
fn sweep_records_cell_failures_without_aborting() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(57);
    cfg.m = 30;
    cfg.c0 = 0.4;
    // An absurd conditional-uniform width starves the spacing support, so
    // this cell aborts while the default cell succeeds.
    let starved = PriorSpec { omega: 1e-6, ..PriorSpec::default() };
    let table = sensitivity_sweep(&ds, &sched, &[PriorSpec::default(), starved], &cfg).unwrap();
    assert!(table.cells[0].outcome.is_ok());
    assert!(table.cells[1].outcome.is_err());
    assert!(!table.all_failed());
}

#[test]
fn peel_chain_reconstructs_and_stops_on_single_mode() {
    // Depth-1 peel on rich data: level estimates recorded, reconstruction
    // exact, and the level-1 report references the re-selected schedule.
    let ds = noise_free(&table_params(), 12, 0.001);
    let mut cfg = McmcConfig::new(59);
    cfg.m = 120;
    cfg.c0 = 0.4;
    cfg.cycle_intermediate = true;
    let chain = peel_sequence(&ds, 1, &PriorSpec::default(), &cfg, &PeelOptions::default()).unwrap();
    assert_eq!(chain.outcomes.len(), 2);
    assert!(chain.stopped.is_none());
    let level1 = &chain.outcomes[1];
    assert_eq!(level1.data.depth, 1);
    let (a0, e0) = chain.outcomes[0].data.subtracted_mode.map_or((0.0, 0.0), |m| m);
    assert_eq!((a0, e0), (0.0, 0.0), "level 0 has nothing subtracted");
    let (a_hat, e_hat) = level1.data.subtracted_mode.unwrap();
    for (orig, peeled) in ds.points().iter().zip(level1.data.dataset.points()) {
        let rebuilt = peeled.y + a_hat * (-e_hat * f64::from(orig.t)).exp();
        assert!((rebuilt - orig.y).abs() <= 1e-14 * orig.y.abs().max(1.0));
        assert!(peeled.sigma > orig.sigma);
    }

    // A pure single-mode series leaves nothing to peel: early stop.
    let single = telefit::ExpSumParams::new(vec![0.8], 0.9, 0.5).unwrap();
    let ds1 = noise_free(&single, 12, 0.001);
    let chain =
        peel_sequence(&ds1, 1, &PriorSpec::default(), &cfg, &PeelOptions::default()).unwrap();
    assert_eq!(chain.outcomes.len(), 1, "the base fit still runs");
    let stop = chain.stopped.expect("single-mode data must stop early");
    assert_eq!(stop.level, 1);
    assert!(stop.message.contains("noise floor"));
}

#[test]
fn converged_modes_nearly_cancel_the_largest_time() {
    // Subtracting the fitted leading mode leaves the largest-time point
    // within its own noise band: the leading term dominates there.
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(63);
    cfg.c0 = 0.4;
    cfg.cycle_intermediate = true;
    let report = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    let level = telefit::subtract_mode(
        &telefit::PeelLevel::original(ds.clone()),
        report.summaries.a1.mode,
        report.summaries.e1.mode,
        1.0,
    )
    .unwrap();
    let p12 = level.dataset.point_at(12).unwrap();
    let sigma12 = ds.point_at(12).unwrap().sigma;
    assert!(
        p12.y.abs() < 3.0 * sigma12,
        "largest-time residual {} exceeds 3 sigma {}",
        p12.y,
        3.0 * sigma12
    );
}

#[test]
fn hopeless_proposal_scales_are_reported() {
    // Proposals so wide that nothing near a tight ridge is ever accepted
    // trip the acceptance-rate guard instead of silently stalling.
    let y1 = telefit::CorrelatorPoint::new(12, 0.8 * (-0.9f64 * 12.0).exp(), 1e-12).unwrap();
    let mut cfg = McmcConfig::new(67);
    cfg.iters_phase1 = 10_000;
    cfg.iters_phase2 = 10_000;
    cfg.proposal_scales.a1 = 1e3;
    cfg.proposal_scales.e1 = 1e3;
    match telefit::phase1(&y1, &PriorSpec::default(), &cfg, &[]) {
        Err(telefit::Error::AcceptanceTooLow { rate }) => assert!(rate < 0.01),
        other => panic!("expected the acceptance guard, got {other:?}"),
    }
}

#[test]
fn peel_mean_option_changes_the_subtraction() {
    let ds = noise_free(&table_params(), 12, 0.001);
    let mut cfg = McmcConfig::new(61);
    cfg.m = 60;
    cfg.c0 = 0.4;
    let by_mode =
        peel_sequence(&ds, 1, &PriorSpec::default(), &cfg, &PeelOptions::default()).unwrap();
    let by_mean = peel_sequence(
        &ds,
        1,
        &PriorSpec::default(),
        &cfg,
        &PeelOptions { estimate: telefit::PointEstimate::Mean, ..PeelOptions::default() },
    )
    .unwrap();
    let m0 = by_mode.outcomes[1].data.subtracted_mode.unwrap();
    let m1 = by_mean.outcomes[1].data.subtracted_mode.unwrap();
    assert_ne!(m0, m1);
    assert_eq!(by_mode.outcomes[0].report.posterior, by_mean.outcomes[0].report.posterior);
}
