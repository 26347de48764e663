use kite_core::codesign::{KiteDesign, NestedSolver, Problem};
use kite_core::config::SuiteConfig;
use kite_core::dynsim::{simulate_laps, Flight};
use kite_core::ilc::{optimize_path, IlcConfig};
use kite_core::proxy::{kite_properties, FlightLaps};

fn intermediate() -> (SuiteConfig, Problem, KiteDesign) {
    let cfg = SuiteConfig::default();
    let p = cfg.problem().unwrap();
    let design = NestedSolver::new(&p, cfg.codesign.grid).unwrap().fully_nested(525e3).unwrap().design;
    (cfg, p, design)
}

#[test]
fn series_agrees_with_lap_metrics() {
    let (cfg, p, design) = intermediate();
    let props = kite_properties(&p, &design).unwrap();
    let out = simulate_laps(&props, &cfg.ilc.b0, 1, &p.flow, &cfg.sim).unwrap();
    let lap = &out.laps[0];
    let window: Vec<_> = out.series.iter().filter(|s| s.t >= lap.t_start && s.t <= lap.t_end).collect();
    assert!(window.len() > 100);

    // Decimated trapezoid of P_gen = T·v_spl over the scored lap.
    let area: f64 = window.windows(2).map(|w| 0.5 * (w[0].p_gen + w[1].p_gen) * (w[1].t - w[0].t)).sum();
    let p_avg = area / (window.last().unwrap().t - window[0].t);
    assert!((p_avg / lap.p_avg - 1.0).abs() < 0.05, "{p_avg} vs {}", lap.p_avg);
    for s in &window {
        assert!((s.p_gen - s.tension * s.v_spl).abs() <= 1e-9 * s.p_gen.abs().max(1.0));
        assert!(s.gamma_c < cfg.sim.abort_angle);
        assert!(s.tension >= 0.0);
    }
    // Reel-out generates, reel-in consumes.
    assert!(window.iter().any(|s| s.v_spl < 0.0 && s.p_gen < 0.0));
    assert!(window.iter().any(|s| s.v_spl > 0.0 && s.p_gen > 0.0));
}

#[test]
fn continuing_flight_matches_a_fresh_multi_lap_run() {
    let (cfg, p, design) = intermediate();
    let props = kite_properties(&p, &design).unwrap();
    let batch = simulate_laps(&props, &cfg.ilc.b0, 2, &p.flow, &cfg.sim).unwrap();
    let mut flight = Flight::new(&props, &cfg.ilc.b0, &p.flow, &cfg.sim).unwrap();
    for _ in 0..cfg.sim.settle_laps {
        flight.fly_lap(&cfg.ilc.b0, None).unwrap();
    }
    for want in &batch.laps {
        let got = flight.fly_lap(&cfg.ilc.b0, None).unwrap();
        assert_eq!(got.p_avg, want.p_avg);
        assert_eq!(got.t_end, want.t_end);
    }
}

#[test]
fn short_learning_run_never_loses_its_best_lap() {
    let (cfg, p, design) = intermediate();
    let props = kite_properties(&p, &design).unwrap();
    let ilc = IlcConfig { max_iter: 8, warmup: 4, ..cfg.ilc.clone() };
    let mut laps = FlightLaps::new(&props, p.flow, &cfg.sim, ilc.k_w);
    let r = optimize_path(&mut laps, &ilc).unwrap();
    assert_eq!(r.history.len(), 8);
    assert_eq!(laps.laps.len() + laps.lost_laps, 8);
    let best = r.history.iter().map(|h| h.j).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best, r.best_j);
    assert!(r.history.iter().all(|h| ilc.bounds.contains(&h.b)));
    assert!(r.p_avg > 0.0);
}
