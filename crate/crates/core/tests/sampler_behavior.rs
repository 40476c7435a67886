//! Behavioral contracts of the three sampling phases.

mod common;

use common::{ks_two_sample_rejects, noise_free, simulated};
use telefit::{
    phase1, phase2, phase3, CorrelatorPoint, Error, McmcConfig, ObservationPair, ParticleCloud,
    PriorSpec, ScheduleRule, TelescopeSchedule,
};

fn fast_cfg(seed: u64) -> McmcConfig {
    let mut cfg = McmcConfig::new(seed);
    cfg.m = 80;
    cfg
}

#[test]
fn phase1_concentrates_on_the_product_ridge() {
    // One observation identifies only a1 * e^(-e1 * t1); with near-zero noise
    // every retained draw must pin that product.
    let y1 = CorrelatorPoint::new(12, 0.8 * (-0.9f64 * 12.0).exp(), 1e-9).unwrap();
    let mut cfg = McmcConfig::new(7);
    // A razor-thin ridge takes a while to hit to full precision.
    cfg.iters_phase1 = 4000;
    cfg.iters_phase2 = 4000;
    cfg.burn_in = 3000;
    let cloud = phase1(&y1, &PriorSpec::default(), &cfg, &[]).unwrap();
    for (a, e) in cloud.a1().iter().zip(cloud.e1()) {
        let product = a * (-e * 12.0).exp();
        assert!(
            (product - y1.y).abs() <= 3.0 * 1e-9,
            "off-ridge draw: product {product:e} vs y1 {:e}",
            y1.y
        );
    }
}

#[test]
fn phase1_with_flat_likelihood_returns_the_prior() {
    // sigma so large the data says nothing; the chain must sample the prior.
    let y1 = CorrelatorPoint::new(12, 1.6e-5, 1e12).unwrap();
    let mut cfg = McmcConfig::new(9);
    cfg.iters_phase1 = 60_000;
    cfg.iters_phase2 = 2000;
    cfg.burn_in = 1000;
    let cloud = phase1(&y1, &PriorSpec::default(), &cfg, &[]).unwrap();
    // Thin to tame autocorrelation; the comparison is distributional.
    let thin = |xs: &[f64]| -> Vec<f64> { xs.iter().step_by(100).copied().collect() };
    let mut rng = telefit::rng::seeded(10);
    let spec = PriorSpec::default();
    let prior_a: Vec<f64> = (0..590).map(|_| spec.sample_amplitude(&mut rng)).collect();
    let prior_e: Vec<f64> = (0..590).map(|_| spec.sample_energy(&mut rng)).collect();
    assert!(!ks_two_sample_rejects(&thin(cloud.a1()), &prior_a), "amplitude cloud != prior");
    assert!(!ks_two_sample_rejects(&thin(cloud.e1()), &prior_e), "energy cloud != prior");
}

#[test]
fn phase1_is_seed_deterministic() {
    let y1 = CorrelatorPoint::new(12, 1.6e-5, 2e-7).unwrap();
    let cfg = McmcConfig::new(11);
    let a = phase1(&y1, &PriorSpec::default(), &cfg, &[]).unwrap();
    let b = phase1(&y1, &PriorSpec::default(), &cfg, &[]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn phase1_cycles_shrink_toward_consistent_mass() {
    // Extra observations between t2 and t1 filter the cloud; the cycled
    // cloud must still sit on the t1 ridge and be deterministic.
    let ds = simulated(23);
    let p12 = *ds.point_at(12).unwrap();
    let extra: Vec<CorrelatorPoint> =
        ds.points().iter().filter(|p| p.t > 6 && p.t < 12).copied().collect();
    let cfg = McmcConfig::new(13);
    let plain = phase1(&p12, &PriorSpec::default(), &cfg, &[]).unwrap();
    let cycled = phase1(&p12, &PriorSpec::default(), &cfg, &extra).unwrap();
    assert_eq!(plain.len(), cycled.len());
    let spread = |xs: &[f64]| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    assert!(
        spread(cycled.e1()) < spread(plain.e1()),
        "intermediates should sharpen the energy cloud"
    );
    let again = phase1(&p12, &PriorSpec::default(), &cfg, &extra).unwrap();
    assert_eq!(cycled, again);
}

#[test]
fn phase2_flat_likelihood_preserves_the_particle_prior() {
    // With an uninformative second observation the (A1, E1) marginal of the
    // phase-II output must be indistinguishable from the incoming cloud.
    let ds = simulated(23);
    let p12 = *ds.point_at(12).unwrap();
    let cfg = McmcConfig::new(17);
    let cloud1 = phase1(&p12, &PriorSpec::default(), &cfg, &[]).unwrap();
    let obs = ObservationPair::new(p12.y, 3.7e-3, p12.sigma, 1e12, 0.0, 12, 6).unwrap();
    let out = phase2(&obs, &cloud1, &PriorSpec::default(), &cfg).unwrap();
    assert!(!ks_two_sample_rejects(out.cloud.a1(), cloud1.a1()));
    assert!(!ks_two_sample_rejects(out.cloud.e1(), cloud1.e1()));
}

#[test]
fn phase2_discard_dominated_run_aborts() {
    // A floor far above the conditional support discards roughly half of all
    // spacing proposals; a tight limit must abort with the documented error.
    let ds = simulated(23);
    let p12 = *ds.point_at(12).unwrap();
    let p6 = *ds.point_at(6).unwrap();
    let cfg = McmcConfig::new(19);
    let cloud1 = phase1(&p12, &PriorSpec::default(), &cfg, &[]).unwrap();
    let obs = ObservationPair::new(p12.y, p6.y, p12.sigma, p6.sigma, 0.0, 12, 6).unwrap();
    let mut bad = cfg.clone();
    bad.c0 = 50.0;
    bad.discard_limit = 0.01;
    match phase2(&obs, &cloud1, &PriorSpec::default(), &bad) {
        Err(Error::DiscardLimit { discarded, proposed, .. }) => {
            assert!(discarded > 0 && proposed >= discarded);
        }
        other => panic!("expected a discard abort, got {other:?}"),
    }
}

#[test]
fn phase3_reports_spacing_floor_and_support() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = fast_cfg(21);
    cfg.c0 = 0.4;
    let report = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    let cloud = &report.posterior;
    for i in 0..cloud.len() {
        assert!(cloud.c()[i] >= cfg.c0, "spacing below the floor");
        assert!(cloud.a1()[i] > 0.0 && cloud.a1()[i] < 1.0);
        assert!(cloud.a2()[i] > 0.0 && cloud.a2()[i] < 1.0);
        assert!(cloud.e1()[i] > 0.0);
    }
    assert!((0.0..=1.0).contains(&report.discard_fraction));
    assert!(report.discard_count > 0, "a floor at 0.4 should see some discards");
}

#[test]
fn phase3_single_repetition_summaries_equal_the_particle() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(29);
    cfg.m = 1;
    cfg.c0 = 0.4;
    let report = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    assert_eq!(report.posterior.len(), 1);
    assert_eq!(report.summaries.a1.mode, report.posterior.a1()[0]);
    assert_eq!(report.summaries.e1.mean, report.posterior.e1()[0]);
    assert_eq!(report.summaries.c.ci_low, report.posterior.c()[0]);
    assert_eq!(report.summaries.c.ci_high, report.posterior.c()[0]);
}

#[test]
fn phase3_is_bit_reproducible() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = fast_cfg(31);
    cfg.c0 = 0.4;
    let a = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    let b = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn phase3_requires_two_rows() {
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 3, ScheduleRule::Ratio).unwrap();
    assert!(phase3(&ds, &sched, &PriorSpec::default(), &fast_cfg(1)).is_err());
}

#[test]
fn phase3_noise_free_recovery_is_near_truth() {
    // End-to-end sanity on noise-free two-term data: the fitted modes land
    // near the generating values (the telescoped pair pins them through the
    // feasibility boundary).
    let p = telefit::ExpSumParams::new(vec![0.8, 0.6], 0.9, 0.5).unwrap();
    let ds = noise_free(&p, 12, 0.001);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(37);
    cfg.c0 = 0.4;
    cfg.cycle_intermediate = true;
    let report = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    assert!((report.summaries.e1.mode - 0.9).abs() < 0.05, "e1 {}", report.summaries.e1.mode);
    assert!((report.summaries.a1.mode - 0.8).abs() < 0.10, "a1 {}", report.summaries.a1.mode);
}

#[test]
#[ignore = "two telescoped observations do not identify the full quadruple: as the \
            noise vanishes the posterior concentrates on the two-dimensional solution \
            manifold of two equations in four unknowns, and its marginal modes sit at \
            the feasibility cut rather than the generating point, so a one-bin \
            tolerance cannot hold for any correct sampler of this target"]
fn posterior_consistency_as_noise_vanishes() {
    let p = telefit::ExpSumParams::new(vec![0.8, 0.6], 0.9, 0.5).unwrap();
    let ds = noise_free(&p, 12, 1e-6);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(41);
    cfg.c0 = 0.4;
    let report = phase3(&ds, &sched, &PriorSpec::default(), &cfg).unwrap();
    for (summary, truth) in [
        (&report.summaries.a1, 0.8),
        (&report.summaries.e1, 0.9),
        (&report.summaries.a2, 0.6),
        (&report.summaries.c, 0.5),
    ] {
        assert!((summary.mode - truth).abs() <= summary.bin_width.max(1e-12));
    }
}

#[test]
fn failed_repetitions_are_counted_not_fatal_below_threshold() {
    // A moderately aggressive floor makes some repetitions abort; the run
    // carries on and reports them.
    let ds = simulated(23);
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let mut cfg = McmcConfig::new(43);
    cfg.m = 200;
    cfg.c0 = 0.45;
    match phase3(&ds, &sched, &PriorSpec::default(), &cfg) {
        Ok(report) => {
            assert_eq!(report.posterior.len() + report.failed_repetitions, cfg.m);
            assert_eq!(report.failure_messages.len(), report.failed_repetitions);
        }
        Err(Error::TooManyFailures { failed, total, .. }) => {
            assert!(failed * 5 > total);
        }
        Err(other) => panic!("unexpected error {other}"),
    }
}

#[test]
fn degenerate_phase1_cloud_pins_phase2_output() {
    let cloud = ParticleCloud::new_pair(vec![0.7; 16], vec![1.1; 16], 3).unwrap();
    let obs = ObservationPair::new(2.0e-5, 3.0e-3, 1e-6, 1e-4, 0.0, 12, 6).unwrap();
    let out = phase2(&obs, &cloud, &PriorSpec::default(), &McmcConfig::new(47)).unwrap();
    assert!(out.cloud.a1().iter().all(|&a| a == 0.7));
    assert!(out.cloud.e1().iter().all(|&e| e == 1.1));
}
