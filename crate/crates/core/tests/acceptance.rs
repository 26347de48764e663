//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Tolerances are pinned below; runs in a few minutes with the
//! optimized test profile.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use kite_core::airfoil::AirfoilSection;
use kite_core::codesign::hull::height_above_hull;
use kite_core::codesign::{pareto_sweep, DualSolver, GaConfig, GridConfig, NestedSolver, Problem, Strategy, Surrogate};
use kite_core::config::SuiteConfig;
use kite_core::dynsim::kite::mass_and_coriolis;
use kite_core::dynsim::sim::StepInputs;
use kite_core::dynsim::tether::link_tension;
use kite_core::dynsim::{simulate_laps, KiteProperties, SimState, Simulator, TetherProperties};
use kite_core::fuse_struct::{sfdt_optimize, FuselageLoads};
use kite_core::hydro::{max_glide_cubed, DEFAULT_ALPHA_RANGE};
use kite_core::ilc::{optimize_path, BasisParams, IlcConfig, LapEvaluator, LapOutcome, PerturbationSchedule};
use kite_core::proxy::{kite_properties, learn_path};
use kite_core::wing_struct::{SectionModel, WingStructureDesign};
use kite_core::{FlowEnv, FoilCoeffs, WingPlanform};
use nalgebra::{Matrix3, UnitQuaternion, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Pinned tolerances.
const HYDRO_EXACT: f64 = 1e-12;
/// Oracle maximum of C_L³/C_D² at AR 4.7 over [0°, 20°], 1e-5 rad scan.
const GLIDE_CUBED_AR47: f64 = 139.11600;
const GLIDE_FROZEN_TOL: f64 = 1e-5;
const GLIDE_TOL: f64 = 0.01;
const SECTION_TOL: f64 = 5e-3;
const SWDT_ANCHOR_KG: f64 = 628.7;
const SWDT_BAND: f64 = 0.25;
const INERTIA_ACTIVE_BAND: f64 = 0.02;
const SFDT_TOL: f64 = 1e-9;
const CORIOLIS_TOL: f64 = 1e-9;
const RK4_MIN_RATIO: f64 = 15.0;
const ILC_TOL: f64 = 1e-2;
const ILC_MAX_ITER: usize = 200;
const HULL_TOL: f64 = 1e-3;
const MIN_IMPROVEMENT: f64 = 2.0;
const INTERMEDIATE_P_REQ: f64 = 525e3;

fn suite() -> SuiteConfig {
    SuiteConfig::default()
}

fn problem() -> Problem {
    suite().problem().expect("default problem")
}

fn hydro_exactness() -> Outcome {
    let foil = FoilCoeffs::default();
    let mut worst: f64 = 0.0;
    for ar in [4.0, 4.7, 6.0, 12.0] {
        worst = worst.max((foil.lift_coeff(ar, 0.0) - 0.16).abs());
        worst = worst.max((foil.drag_coeff(ar, 0.02) - 0.0065).abs());
    }
    check(worst <= HYDRO_EXACT, format!("max deviation {worst:.1e} over AR in {{4, 4.7, 6, 12}}"))
}

fn glide_cubed_oracle() -> Outcome {
    let foil = FoilCoeffs::default();
    let (lo, hi) = DEFAULT_ALPHA_RANGE;
    let (_, oracle) = common::glide_cubed_scan(&foil, 4.7, lo, hi, 1e-5);
    let got = max_glide_cubed(&foil, 4.7, DEFAULT_ALPHA_RANGE).map_err(|e| e.to_string())?.value;
    let frozen = (oracle / GLIDE_CUBED_AR47 - 1.0).abs();
    let rel = (got / oracle - 1.0).abs();
    check(
        frozen <= GLIDE_FROZEN_TOL && rel <= GLIDE_TOL,
        format!("library {got:.4}, oracle {oracle:.4} (frozen {GLIDE_CUBED_AR47}), deviation {rel:.1e}"),
    )
}

fn section_oracle() -> Outcome {
    let model = SectionModel::new(&AirfoilSection::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let design = WingStructureDesign {
            n_sp: rng.random_range(1..=3),
            t_sp: rng.random_range(0.01..0.20),
            t_sw: rng.random_range(0.01..0.10),
        };
        let chord: f64 = rng.random_range(0.5..2.5);
        let got = model.properties(chord, &design).map_err(|e| e.to_string())?;
        let (a, i) = common::section_by_columns((0.02, 0.4, 0.12), design.n_sp, design.t_sp, design.t_sw, 10_000);
        worst = worst.max((got.area / (a * chord * chord) - 1.0).abs());
        worst = worst.max((got.inertia / (i * chord.powi(4)) - 1.0).abs());
    }
    check(worst <= SECTION_TOL, format!("worst relative error {worst:.2e} on 20 designs"))
}

fn swdt_anchor() -> Outcome {
    let p = problem();
    let planform = WingPlanform::new(8.51, 6.0).map_err(|e| e.to_string())?;
    match p.wing_structure(&planform) {
        Ok((wing, _)) => {
            let band = (wing.m_wing / SWDT_ANCHOR_KG - 1.0).abs();
            let ratio = wing.inertia_ratio();
            check(
                band <= SWDT_BAND && (1.0..=1.0 + INERTIA_ACTIVE_BAND).contains(&ratio),
                format!("m_wing {:.1} kg ({:+.1}% of {SWDT_ANCHOR_KG}), I/I_req {ratio:.4}", wing.m_wing, 100.0 * band),
            )
        }
        Err(e) => {
            let i_req = p.rated_loads(&planform).map(|r| r.i_req).unwrap_or(f64::NAN);
            Err(format!("{e} (I_req {i_req:.3e} m^4 under the default load case)"))
        }
    }
}

fn sfdt_closed_form() -> Outcome {
    let p = problem();
    let (m, b) = (p.material, p.bounds);
    let sigma_05 = (0.005 * m.youngs_modulus).min(m.sigma_yield);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst, mut checked, mut infeasible) = (0.0f64, 0, 0);
    for _ in 0..100 {
        let d = rng.random_range(b.d[0]..=b.d[1]);
        let l = rng.random_range(b.l[0]..=b.l[1]);
        let loads = FuselageLoads {
            f_z_sum: rng.random_range(0.0..2e6),
            p_diff: rng.random_range(0.0..5e4),
            m_max: rng.random_range(0.0..5e5),
            zeta: rng.random_range(0.2..=1.0),
        };
        let z = loads.zeta;
        let t_shear = loads.f_z_sum / (z * m.sigma_yield * l);
        let t_hoop = loads.p_diff * d / (2.0 * z * sigma_05);
        let t_buckle = loads.m_max / (z * m.sigma_yield * PI * d * d / 4.0);
        let t_star = t_shear.max(t_hoop).max(t_buckle).max(b.t_sf[0] * d);
        match sfdt_optimize(d, l, &loads, &m, &b) {
            Ok(r) => {
                worst = worst.max((r.design.t_sf * d / t_star - 1.0).abs());
                checked += 1;
            }
            Err(e) if e.is_infeasible() && t_star > b.t_sf[1] * d => infeasible += 1,
            Err(e) => return Err(format!("unexpected failure: {e}")),
        }
    }
    check(
        worst <= SFDT_TOL && checked >= 50,
        format!("worst relative error {worst:.1e} on {checked} cases; {infeasible} correctly infeasible"),
    )
}

fn point_kite(mass: f64, volume: f64) -> KiteProperties {
    KiteProperties {
        mass,
        volume,
        inertia: Matrix3::from_diagonal(&Vector3::new(50.0, 80.0, 120.0)),
        r_cg: Vector3::zeros(),
        r_cb: Vector3::zeros(),
        r_ta: Vector3::zeros(),
        added_mass: [0.0; 6],
        surfaces: vec![],
        body: None,
        s_ref: 1.0,
        span: 1.0,
        chord: 1.0,
    }
}

fn still() -> FlowEnv {
    FlowEnv { v: 0.0, ..FlowEnv::default() }
}

/// Spinning buoyant point mass on one taut, practically lossless link.
fn spinning_oscillator(dt: f64, t_end: f64) -> Result<SimState, String> {
    let len = 10.0;
    let tether = TetherProperties {
        n_links: 1,
        density: 1000.0,
        damping_ratio: 1e-12,
        drag_coeff: 1e-12,
        length: len,
        ..Default::default()
    };
    let k = tether.link_stiffness(len);
    let sim = Simulator::new(point_kite(1000.0, 1.5), tether, still()).map_err(|e| e.to_string())?;
    let stretch = 500.0 * 9.81 / k;
    let mut s =
        sim.initial_state(Vector3::new(0.0, 0.0, len + stretch + 1e-3), UnitQuaternion::identity(), Vector3::zeros());
    s.l_t = len;
    s.v_r[3] = 0.4;
    s.v_r[4] = 0.3;
    s.v_r[5] = -0.2;
    while s.t < t_end - 0.5 * dt {
        sim.step(&mut s, &StepInputs::default(), dt, 1e7).map_err(|e| e.to_string())?;
    }
    Ok(s)
}

fn dynamics_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut p = point_kite(rng.random_range(1.0..5e3), 1.0);
        p.r_cg = Vector3::from_fn(|_, _| rng.random_range(-2.0..2.0));
        p.inertia = Matrix3::from_diagonal(&Vector3::from_fn(|_, _| rng.random_range(10.0..1e4)))
            - p.r_cg.cross_matrix() * p.r_cg.cross_matrix() * p.mass;
        p.added_mass = std::array::from_fn(|_| rng.random_range(0.0..1e4));
        let nu = Vector6::from_fn(|_, _| rng.random_range(-10.0..10.0));
        let (m, c) = mass_and_coriolis(&p, &nu).map_err(|e| e.to_string())?;
        worst = worst.max(nu.dot(&(c * nu)).abs() / (nu.norm_squared() * m.norm()));
    }

    // Slack tether: kite 50 m out on 125 m of line, and a compressed link.
    let tether = TetherProperties { density: 1000.0, ..Default::default() };
    let sim = Simulator::new(point_kite(1000.0, 1.0), tether, still()).map_err(|e| e.to_string())?;
    let mut s = sim.initial_state(Vector3::new(30.0, 0.0, 40.0), UnitQuaternion::identity(), Vector3::zeros());
    s.l_t = 125.0;
    let slack = sim.tether_forces(&s).tensions.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let compressed = link_tension(&Vector3::new(3.0, 0.0, 4.0), &Vector3::new(-9.0, 2.0, 1.0), 10.0, 1e6, 1e4);

    let err = |a: &SimState, b: &SimState| {
        (a.position - b.position).norm() + 1e-2 * (a.v_r - b.v_r).norm() + a.attitude.angle_to(&b.attitude)
    };
    let (s1, s2, s3) =
        (spinning_oscillator(4e-3, 0.4)?, spinning_oscillator(2e-3, 0.4)?, spinning_oscillator(1e-3, 0.4)?);
    let ratio = err(&s1, &s2) / err(&s2, &s3);
    check(
        worst <= CORIOLIS_TOL && slack == 0.0 && compressed == 0.0 && ratio >= RK4_MIN_RATIO,
        format!("|v'Cv| {worst:.1e} (scaled, 1000 draws), slack tension {slack}, RK4 halving ratio {ratio:.2}"),
    )
}

struct Bowl {
    target: [f64; 4],
}

impl LapEvaluator for Bowl {
    fn run_lap(&mut self, b: &BasisParams) -> kite_core::Result<LapOutcome> {
        let d2: f64 = [b.b1, b.b2, b.b3, b.b4].iter().zip(&self.target).map(|(x, t)| (x - t).powi(2)).sum();
        Ok(LapOutcome { j: 10.0 - d2, p_avg: 10.0 - d2, p_peak: 20.0 - 2.0 * d2 })
    }
}

fn bowl_config() -> IlcConfig {
    let g = 0.2;
    IlcConfig {
        gain: [[g, 0.0, 0.0, 0.0], [0.0, g, 0.0, 0.0], [0.0, 0.0, g, 0.0], [0.0, 0.0, 0.0, g]],
        perturbation: PerturbationSchedule { amplitude: [0.05; 4], decay_tau: 10.0, seed: 4 },
        max_iter: ILC_MAX_ITER,
        tol: 0.0,
        ..Default::default()
    }
}

fn ilc_oracle() -> Outcome {
    let target = [0.55, 0.3, -0.1, 0.45];
    let cfg = bowl_config();
    let r = optimize_path(&mut Bowl { target }, &cfg).map_err(|e| e.to_string())?;
    let b = r.best_b;
    let err = [b.b1, b.b2, b.b3, b.b4].iter().zip(&target).map(|(x, t)| (x - t).powi(2)).sum::<f64>().sqrt();
    let mut best = f64::NEG_INFINITY;
    let mut monotone = true;
    for h in &r.history {
        let next = best.max(h.j);
        monotone &= h.k < cfg.warmup || next >= best;
        best = next;
    }
    check(
        err <= ILC_TOL && r.history.len() <= ILC_MAX_ITER && monotone && best == r.best_j,
        format!("distance to maximizer {err:.2e} after {} iterations", r.history.len()),
    )
}

fn intermediate(p: &Problem) -> Result<kite_core::codesign::KiteDesign, String> {
    let solver = NestedSolver::new(p, suite().codesign.grid).map_err(|e| e.to_string())?;
    solver.fully_nested(INTERMEDIATE_P_REQ).map(|pt| pt.design).map_err(|e| e.to_string())
}

fn closed_loop() -> Outcome {
    let cfg = suite();
    let p = problem();
    let design = intermediate(&p)?;
    let props = kite_properties(&p, &design).map_err(|e| e.to_string())?;
    let out = simulate_laps(&props, &cfg.ilc.b0, 3, &p.flow, &cfg.sim).map_err(|e| e.to_string())?;
    let ok = out.laps.len() >= 3
        && out.laps.iter().all(|l| l.p_avg > 0.0 && l.gamma_c_max < cfg.sim.abort_angle && l.spool_in_dips == 2);
    let laps: Vec<String> = out
        .laps
        .iter()
        .map(|l| format!("{:.1} kW/{} dips/gamma {:.2}", l.p_avg / 1e3, l.spool_in_dips, l.gamma_c_max))
        .collect();
    check(
        ok,
        format!(
            "s {:.2}, AR {:.2}, m_kite {:.0} kg; laps: {}",
            design.u.s,
            design.u.ar,
            design.m_kite,
            laps.join(", ")
        ),
    )
}

fn coarse_grid() -> GridConfig {
    GridConfig { s_step: 0.1, d_step: 0.05, l_step: 0.5, ar_scan: 64 }
}

fn codesign_dominance() -> Outcome {
    let p = problem();
    let solver = NestedSolver::new(&p, coarse_grid()).map_err(|e| e.to_string())?;
    let p_reqs = [400e3, 450e3, 500e3, 550e3, 600e3];
    let mut prev = 0.0;
    let mut notes = Vec::new();
    let mut ok = true;
    for &p_req in &p_reqs {
        let full = solver.fully_nested(p_req).map_err(|e| e.to_string())?.m_wing;
        ok &= full >= prev;
        prev = full;
        for sur in [Surrogate::Span, Surrogate::WingVolume] {
            match solver.nested_sequential(p_req, sur) {
                Ok(seq) => ok &= full <= seq.m_wing,
                Err(e) if e.is_infeasible() => notes.push(format!("{sur:?} infeasible at {:.0} kW", p_req / 1e3)),
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    check(
        ok,
        format!("fully nested front monotone and dominant over 400-600 kW; {}", notes.len())
            + " sequential points infeasible",
    )
}

fn hull_tracing() -> Outcome {
    let cfg = suite();
    let p = problem();
    let nested = NestedSolver::new(&p, cfg.codesign.grid).map_err(|e| e.to_string())?;
    let solver = DualSolver::new(&nested, cfg.codesign.ga, cfg.codesign.audit_tol).map_err(|e| e.to_string())?;
    let mut points = Vec::new();
    for w in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let d = solver.simultaneous_ga(w, cfg.codesign.p_min).map_err(|e| format!("w = {w}: {e}"))?;
        points.push((w, d.design.p_gen, d.design.m_wing));
    }
    let mut p_cloud = cfg.codesign.pareto_sweep.clone();
    p_cloud.extend(points.iter().map(|pt| pt.1));
    let cloud: Vec<(f64, f64)> = pareto_sweep(&nested, &p_cloud, Strategy::FullyNested)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter_map(|e| e.point.map(|pt| (pt.p_req.ln(), pt.m_wing.ln())))
        .collect();
    let mut ok = true;
    let mut notes = Vec::new();
    for (w, p_gen, m) in points {
        match height_above_hull(&cloud, (p_gen.ln(), m.ln())) {
            Some(h) => {
                ok &= h <= HULL_TOL;
                notes.push(format!("w {w}: {:.0} kW {m:.0} kg h {h:+.1e}", p_gen / 1e3));
            }
            None => {
                ok = false;
                notes.push(format!("w {w}: {:.0} kW outside the cloud", p_gen / 1e3));
            }
        }
    }
    check(ok, notes.join("; "))
}

fn determinism() -> Outcome {
    let cfg = suite();
    let p = problem();
    let json = |v: &dyn erased::Json| v.to_json();
    let nested = NestedSolver::new(&p, coarse_grid()).map_err(|e| e.to_string())?;
    let ga = GaConfig { population: 40, elite: 4, generations: 8, ..GaConfig::default() };
    let dual = DualSolver::new(&nested, ga, cfg.codesign.audit_tol).map_err(|e| e.to_string())?;
    let run_ga = || dual.simultaneous_ga(1.0, cfg.codesign.p_min).map_err(|e| e.to_string());
    let run_sweep = || pareto_sweep(&nested, &[400e3, 500e3, 2e6], Strategy::FullyNested).map_err(|e| e.to_string());
    let run_stub =
        || optimize_path(&mut Bowl { target: [0.5, 0.3, 0.0, 0.4] }, &bowl_config()).map_err(|e| e.to_string());
    let design = intermediate(&p)?;
    let props = kite_properties(&p, &design).map_err(|e| e.to_string())?;
    let run_sim = || {
        simulate_laps(&props, &cfg.ilc.b0, 1, &p.flow, &cfg.sim).map(|o| (o.laps, o.series)).map_err(|e| e.to_string())
    };
    let short = IlcConfig { max_iter: 3, ..cfg.ilc.clone() };
    let run_learn = || learn_path(&props, &p.flow, &cfg.sim, &short).map_err(|e| e.to_string());
    let pairs = [
        ("GA", json(&run_ga()?), json(&run_ga()?)),
        ("sweep", json(&run_sweep()?), json(&run_sweep()?)),
        ("ILC", json(&run_stub()?), json(&run_stub()?)),
        ("simulation", json(&run_sim()?), json(&run_sim()?)),
        ("ILC on flight", json(&run_learn()?), json(&run_learn()?)),
    ];
    let differing: Vec<&str> = pairs.iter().filter(|(_, a, b)| a != b).map(|(n, _, _)| *n).collect();
    check(
        differing.is_empty(),
        if differing.is_empty() {
            "GA, sweep, ILC, simulation and ILC-on-flight bodies identical across two runs".into()
        } else {
            format!("differs: {}", differing.join(", "))
        },
    )
}

/// Object-safe serialization for the determinism table.
mod erased {
    pub trait Json {
        fn to_json(&self) -> String;
    }

    impl<T: serde::Serialize> Json for T {
        fn to_json(&self) -> String {
            serde_json::to_string(self).expect("serializable")
        }
    }
}

fn improvement() -> Outcome {
    let cfg = suite();
    let p = problem();
    let per_kg = |design: &kite_core::codesign::KiteDesign| -> Result<f64, String> {
        let props = kite_properties(&p, design).map_err(|e| e.to_string())?;
        let out = simulate_laps(&props, &cfg.ilc.b0, 3, &p.flow, &cfg.sim).map_err(|e| e.to_string())?;
        Ok(out.mean_power() / design.m_kite)
    };
    let optimized = intermediate(&p)?;
    let baseline = cfg.baseline.design(&p).map_err(|e| e.to_string())?;
    let (a, b) = (per_kg(&optimized)?, per_kg(&baseline)?);
    let ratio = a / b;
    check(ratio >= MIN_IMPROVEMENT, format!("{a:.2} W/kg optimized vs {b:.2} W/kg baseline, ratio {ratio:.2}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("hydro exactness", hydro_exactness),
        ("glide-cubed oracle", glide_cubed_oracle),
        ("section-property oracle", section_oracle),
        ("SWDT anchor", swdt_anchor),
        ("SFDT closed form", sfdt_closed_form),
        ("dynamics invariants", dynamics_invariants),
        ("ILC oracle", ilc_oracle),
        ("closed-loop smoke", closed_loop),
        ("co-design dominance", codesign_dominance),
        ("convex-hull tracing", hull_tracing),
        ("determinism", determinism),
        ("improvement over baseline", improvement),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {name}: {tag} ({secs:.1} s) {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
