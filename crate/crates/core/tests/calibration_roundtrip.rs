//! Simulate with known parameters, calibrate from the event log, compare.

use lobsim_core::calibration::{estimate_params, read_events, write_events, CalibrationOptions};
use lobsim_core::simulator::MIN_RESTING;
use lobsim_core::stochproc::EmpiricalCdf;
use lobsim_core::{run_simulation, ModelParams, SimConfig};

#[test]
fn calibration_recovers_simulated_parameters() {
    let params = ModelParams {
        steps_per_day: 50_000,
        seed: 11,
        ..ModelParams::default()
    };
    let mut cfg = SimConfig::new(params.clone(), 4, 0.1, -0.1);
    // A price of many ticks keeps tick rounding from distorting the
    // recovered relative prices.
    cfg.initial_price = 100_000;
    cfg.record_events = true;
    let res = run_simulation(&cfg).unwrap();

    let mut buf = Vec::new();
    write_events(&res.events, &mut buf).unwrap();
    let events = read_events(buf.as_slice()).unwrap();
    assert_eq!(events, res.events);

    let mut opts = CalibrationOptions::new(0.1, -0.1, params.steps_per_day as u64);
    opts.min_resting = MIN_RESTING;
    opts.initial_close = Some(cfg.initial_price);
    let cal = estimate_params(&events, &opts).unwrap();
    let got = &cal.params;

    assert!(
        (got.h_s - params.h_s).abs() <= 0.05,
        "h_s {} vs {}",
        got.h_s,
        params.h_s
    );
    assert!(
        (got.h_x - params.h_x).abs() <= 0.05,
        "h_x {} vs {}",
        got.h_x,
        params.h_x
    );
    assert!(
        (got.cancel_prob - params.cancel_prob).abs() <= 0.01,
        "cancel rate {} vs {}",
        got.cancel_prob,
        params.cancel_prob
    );
    assert!((got.cancel_side_bias - 0.5).abs() <= 0.02);
    let ks = got.price_cdf.ks_distance(&params.price_cdf);
    assert!(ks <= 0.02, "relative-price KS distance {ks}");
    assert_eq!(got.steps_per_day, params.steps_per_day);
    assert_eq!(cal.placements as u64, res.placements + res.reseeded_orders);
    assert_eq!(cal.cancellations as u64, res.cancellations);
}

#[test]
fn relative_prices_of_a_sample_round_trip_through_the_cdf() {
    let cdf = ModelParams::default().price_cdf;
    let samples: Vec<f64> = (0..20_000)
        .map(|i| cdf.sample((i as f64 + 0.5) / 20_000.0))
        .collect();
    let fitted = EmpiricalCdf::from_samples(&samples, 2000).unwrap();
    assert!(fitted.ks_distance(&cdf) <= 0.005);
}
