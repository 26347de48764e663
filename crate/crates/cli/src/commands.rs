//! One function per subcommand. Each writes its files under the output
//! directory, echoes the JSON document, and reports ok or infeasible.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kite_core::codesign::hull::{height_above_hull, lower_hull};
use kite_core::codesign::{
    sfot as select_sfot, DesignVars, DualSolver, ErrorRecord, KiteDesign, NestedSolver, ParetoPoint, PowerRequirement,
    Strategy, Surrogate, SweepEntry,
};
use kite_core::config::SuiteConfig;
use kite_core::dynsim::{simulate_traced, write_series, LapMetrics};
use kite_core::effmap::{fit_surface, generate_samples, read_samples, write_samples, EffSurface};
use kite_core::fuse_struct::sfdt_optimize;
use kite_core::ilc::write_history;
use kite_core::proxy::{kite_properties, learn_path, SimulatedPeakPower};
use kite_core::{Error, Result, WingPlanform};
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{csv_err, json_err, Clock, OutputDir};
use crate::Status;

/// Where `simulate` takes its design from.
pub enum Source {
    Record(PathBuf),
    Baseline,
    Pareto(f64),
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {x}")))
    }
}

#[derive(Serialize)]
struct PlanformInfo {
    s: f64,
    ar: f64,
    chord: f64,
    area: f64,
}

fn planform(s: f64, ar: f64) -> Result<(WingPlanform, PlanformInfo)> {
    let p = WingPlanform::new(s, ar)?;
    let info = PlanformInfo { s, ar, chord: p.chord(), area: p.area() };
    Ok((p, info))
}

pub fn swdt(cfg: &SuiteConfig, out: &OutputDir, s: f64, ar: f64) -> Result<Status> {
    let clock = Clock::start();
    let problem = cfg.problem()?;
    let (p, info) = planform(s, ar)?;
    let (wing, rated) = problem.wing_structure(&p)?;
    let result = json!({ "planform": info, "rated": rated, "wing": wing });
    out.document("swdt.json", "swdt", &clock, json!({}), &result)?;
    Ok(Status::Ok)
}

pub fn sfdt(cfg: &SuiteConfig, out: &OutputDir, s: f64, ar: f64, d: f64, l: f64) -> Result<Status> {
    let clock = Clock::start();
    let problem = cfg.problem()?;
    let (p, info) = planform(s, ar)?;
    let rated = problem.rated_loads(&p)?;
    let loads = problem.fuselage_loads(&p, &rated, l);
    let fuse = sfdt_optimize(d, l, &loads, &problem.material, &problem.bounds)?;
    let result = json!({ "planform": info, "loads": loads, "fuselage": fuse });
    out.document("sfdt.json", "sfdt", &clock, json!({}), &result)?;
    Ok(Status::Ok)
}

pub fn sfot(cfg: &SuiteConfig, out: &OutputDir, p_req: f64, surrogate: Surrogate) -> Result<Status> {
    positive("P_req", p_req)?;
    let clock = Clock::start();
    let problem = cfg.problem()?;
    let solver = NestedSolver::new(&problem, cfg.codesign.grid)?;
    let points = solver.enumerate(p_req)?;
    let mut csv = out.csv("sfot.csv")?;
    for g in &points {
        csv.serialize(g).map_err(csv_err)?;
    }
    csv.flush()?;
    let selected = select_sfot(&points, surrogate)?;
    let result = json!({ "p_req": p_req, "surrogate": surrogate, "selected": selected, "points": points });
    out.document("sfot.json", "sfot", &clock, json!({}), &result)?;
    Ok(Status::Ok)
}

pub fn effmap(cfg: &SuiteConfig, out: &OutputDir, from_samples: Option<&Path>) -> Result<Status> {
    let clock = Clock::start();
    let (samples, skipped) = match from_samples {
        Some(path) => (read_samples(File::open(path)?)?, Vec::new()),
        None => {
            let problem = cfg.problem_with(EffSurface::reference())?;
            let solver = NestedSolver::new(&problem, cfg.codesign.grid)?;
            let source = SimulatedPeakPower {
                problem: &problem,
                dl_grid: solver.dl_grid().to_vec(),
                sim: cfg.sim.clone(),
                ilc: cfg.ilc.clone(),
            };
            let run = generate_samples(&cfg.effmap_grid.points(), &source);
            write_samples(&run.samples, out.create("samples.csv")?)?;
            let skipped: Vec<Value> = run
                .skipped
                .iter()
                .map(|((s, ar), e)| json!({ "s": s, "ar": ar, "error": ErrorRecord::from(e) }))
                .collect();
            (run.samples, skipped)
        }
    };
    let surface = fit_surface(&samples, &cfg.effmap)?;
    surface.save(&out.path("eta_surface.toml")?)?;
    let result = json!({ "surface": surface, "samples": samples, "skipped": skipped });
    out.document("effmap.json", "effmap", &clock, json!({}), &result)?;
    Ok(Status::Ok)
}

const DESIGN_COLUMNS: [&str; 15] = [
    "status", "p_gen", "eta", "m_wing", "m_fuse", "m_kite", "s", "ar", "n_sp", "t_sp", "t_sw", "d", "l", "t_sf",
    "error",
];

fn header(keys: &[&'static str]) -> Vec<&'static str> {
    keys.iter().chain(DESIGN_COLUMNS.iter()).copied().collect()
}

/// Flat design columns shared by the sweep tables.
#[derive(Serialize, Default)]
struct DesignRow {
    status: &'static str,
    p_gen: Option<f64>,
    eta: Option<f64>,
    m_wing: Option<f64>,
    m_fuse: Option<f64>,
    m_kite: Option<f64>,
    s: Option<f64>,
    ar: Option<f64>,
    n_sp: Option<u8>,
    t_sp: Option<f64>,
    t_sw: Option<f64>,
    d: Option<f64>,
    l: Option<f64>,
    t_sf: Option<f64>,
    error: Option<String>,
}

impl DesignRow {
    fn new(design: Option<&KiteDesign>, error: Option<&ErrorRecord>) -> Self {
        match design {
            Some(k) => Self {
                status: "ok",
                p_gen: Some(k.p_gen),
                eta: Some(k.eta),
                m_wing: Some(k.m_wing),
                m_fuse: Some(k.m_fuse),
                m_kite: Some(k.m_kite),
                s: Some(k.u.s),
                ar: Some(k.u.ar),
                n_sp: Some(k.u.n_sp),
                t_sp: Some(k.u.t_sp),
                t_sw: Some(k.u.t_sw),
                d: Some(k.u.d),
                l: Some(k.u.l),
                t_sf: Some(k.u.t_sf),
                error: None,
            },
            None => Self { status: "failed", error: error.map(|e| e.kind.clone()), ..Self::default() },
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> (Result<T>, f64) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed().as_secs_f64())
}

fn hull_coords(m_wing: f64, p_gen: f64) -> (f64, f64) {
    (p_gen.ln(), m_wing.ln())
}

pub fn pareto(cfg: &SuiteConfig, out: &OutputDir, p_reqs: &[f64], strategies: &[Strategy]) -> Result<Status> {
    for &p in p_reqs {
        positive("P_req", p)?;
    }
    let clock = Clock::start();
    let problem = cfg.problem()?;
    let solver = NestedSolver::new(&problem, cfg.codesign.grid)?;
    let mut results = Vec::new();
    let mut timings = Vec::new();
    let mut any_ok = false;
    let mut csv = out.table("pareto.csv", &header(&["strategy", "p_req"]))?;
    for &strategy in strategies {
        let runs: Vec<(SweepEntry<ParetoPoint>, f64)> = p_reqs
            .par_iter()
            .map(|&p| {
                let (r, secs) = timed(|| solver.solve(p, strategy));
                (SweepEntry::from_result(p, r), secs)
            })
            .collect();
        let mut entries = Vec::with_capacity(runs.len());
        for (entry, secs) in runs {
            info!("{strategy:?} at {:.0} W: {secs:.2} s", entry.input);
            timings.push(json!({ "strategy": strategy, "p_req": entry.input, "seconds": secs }));
            any_ok |= entry.point.is_some();
            let row = DesignRow::new(entry.point.as_ref().map(|p| &p.design), entry.error.as_ref());
            csv.serialize((strategy_name(strategy), entry.input, row)).map_err(csv_err)?;
            entries.push(entry);
        }
        results.push(json!({ "strategy": strategy, "entries": entries }));
    }
    csv.flush()?;

    // Lower hull of the fully nested front, when it was run.
    let front: Vec<(f64, f64)> = results
        .iter()
        .zip(strategies)
        .filter(|(_, s)| **s == Strategy::FullyNested)
        .flat_map(|(r, _)| r["entries"].as_array().cloned().unwrap_or_default())
        .filter_map(|e| {
            let d = &e["point"]["design"];
            Some(hull_coords(d["m_wing"].as_f64()?, e["input"].as_f64()?))
        })
        .collect();
    let hull = lower_hull(&front);
    if !front.is_empty() {
        let mut csv = out.table("pareto_hull.csv", &["ln_p", "ln_m_wing", "on_hull"])?;
        for (x, y) in &front {
            let on = hull.iter().any(|h| h == &(*x, *y));
            csv.serialize((x, y, on)).map_err(csv_err)?;
        }
        csv.flush()?;
    }
    let result = json!({ "sweeps": results, "hull": hull });
    out.document("pareto.json", "pareto", &clock, json!({ "timings": timings }), &result)?;
    Ok(if any_ok { Status::Ok } else { Status::Infeasible })
}

fn strategy_name(s: Strategy) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

pub fn dual(cfg: &SuiteConfig, out: &OutputDir, weights: &[f64], p_min: f64, hull: bool) -> Result<Status> {
    positive("P_min", p_min)?;
    let clock = Clock::start();
    let problem = cfg.problem()?;
    let nested = NestedSolver::new(&problem, cfg.codesign.grid)?;
    let solver = DualSolver::new(&nested, cfg.codesign.ga, cfg.codesign.audit_tol)?;
    let mut entries = Vec::with_capacity(weights.len());
    let mut timings = Vec::new();
    for &w in weights {
        let (r, secs) = timed(|| solver.simultaneous_ga(w, p_min));
        info!("w = {w}: {secs:.2} s");
        timings.push(json!({ "w": w, "seconds": secs }));
        entries.push(SweepEntry::from_result(w, r));
    }

    // Height of each dual point above the fully nested hull, in ln m_wing.
    // The front is indexed by P_req so each point has a cloud member at its
    // own abscissa.
    let heights: Option<Vec<Option<f64>>> = hull.then(|| {
        let mut p_cloud: Vec<f64> = cfg.codesign.pareto_sweep.clone();
        p_cloud.extend(entries.iter().filter_map(|e| e.point.map(|p| p.design.p_gen)));
        let cloud: Vec<(f64, f64)> = p_cloud
            .par_iter()
            .filter_map(|&p| nested.fully_nested(p).ok())
            .map(|pt| hull_coords(pt.m_wing, pt.p_req))
            .collect();
        entries
            .iter()
            .map(|e| e.point.and_then(|p| height_above_hull(&cloud, hull_coords(p.design.m_wing, p.design.p_gen))))
            .collect()
    });

    let mut csv = out.table("dual.csv", &header(&["w", "p_min", "objective", "hull_height"]))?;
    for (i, e) in entries.iter().enumerate() {
        let row = DesignRow::new(e.point.as_ref().map(|p| &p.design), e.error.as_ref());
        let h = heights.as_ref().and_then(|h| h[i]);
        csv.serialize((e.input, p_min, e.point.map(|p| p.objective), h, row)).map_err(csv_err)?;
    }
    csv.flush()?;
    let any_ok = entries.iter().any(|e| e.point.is_some());
    let result = json!({ "p_min": p_min, "entries": entries, "hull_height": heights });
    out.document("dual.json", "dual", &clock, json!({ "timings": timings }), &result)?;
    Ok(if any_ok { Status::Ok } else { Status::Infeasible })
}

/// Reads a decision vector from a JSON record: a bare vector, a full design
/// (`u`), or anything holding one under `design` or `result`.
pub fn read_design(path: &Path) -> Result<DesignVars> {
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path)?).map_err(json_err)?;
    fn find(v: &Value) -> Option<DesignVars> {
        serde_json::from_value(v.clone())
            .ok()
            .or_else(|| ["u", "design", "point", "result"].iter().find_map(|k| v.get(k).and_then(find)))
    }
    find(&value).ok_or_else(|| Error::Parse {
        what: path.display().to_string(),
        msg: "no design vector (s, ar, n_sp, t_sp, t_sw, d, l, t_sf) found".into(),
    })
}

pub fn simulate(cfg: &SuiteConfig, out: &OutputDir, source: &Source, laps: usize, learn: bool) -> Result<Status> {
    let clock = Clock::start();
    let problem = cfg.problem()?;
    let design = match source {
        Source::Record(path) => problem.evaluate(&read_design(path)?)?,
        Source::Baseline => cfg.baseline.design(&problem)?,
        Source::Pareto(p) => {
            positive("P_req", *p)?;
            NestedSolver::new(&problem, cfg.codesign.grid)?.fully_nested(*p)?.design
        }
    };
    let props = kite_properties(&problem, &design)?;
    let learned = if learn {
        let r = learn_path(&props, &problem.flow, &cfg.sim, &cfg.ilc)?;
        write_history(&r.history, out.create("ilc.csv")?)?;
        Some(r)
    } else {
        None
    };
    let b = learned.as_ref().map_or(cfg.ilc.b0, |r| r.best_b);
    let mut series = Vec::new();
    let flown = simulate_traced(&props, &b, laps, &problem.flow, &cfg.sim, &mut series);
    // The trace is kept even when the flight fails.
    write_series(out.create("series.csv")?, &series)?;
    let flown: Vec<LapMetrics> = flown?;
    let mut csv = out.csv("laps.csv")?;
    for lap in &flown {
        csv.serialize(lap).map_err(csv_err)?;
    }
    csv.flush()?;
    let p_avg = flown.iter().map(|l| l.p_avg).sum::<f64>() / flown.len() as f64;
    let p_peak = flown.iter().map(|l| l.p_peak).fold(f64::NEG_INFINITY, f64::max);
    let result = json!({
        "design": design,
        "path": b,
        "laps": flown,
        "p_avg": p_avg,
        "p_peak": p_peak,
        "power_per_mass": p_avg / design.m_kite,
        "learning": learned.map(|r| json!({ "best_b": r.best_b, "best_j": r.best_j, "converged": r.converged, "iterations": r.history.len() })),
    });
    out.document("simulate.json", "simulate", &clock, json!({}), &result)?;
    Ok(Status::Ok)
}

pub fn check(
    cfg: &SuiteConfig,
    out: &OutputDir,
    path: &Path,
    p_req: Option<f64>,
    p_min: Option<f64>,
) -> Result<Status> {
    let clock = Clock::start();
    let problem = cfg.problem()?;
    let u = read_design(path)?;
    let requirement = match (p_req, p_min) {
        (Some(p), _) => {
            positive("P_req", p)?;
            PowerRequirement::Equal { p_req: p, tol: cfg.codesign.power_tol }
        }
        (None, Some(p)) => {
            positive("P_min", p)?;
            PowerRequirement::AtLeast(p)
        }
        (None, None) => PowerRequirement::None,
    };
    let (design, margins) = problem.audit(&u, requirement)?;
    let feasible = margins.feasible(cfg.codesign.audit_tol);
    let result = json!({ "design": design, "margins": margins, "min_margin": margins.min(), "feasible": feasible });
    out.document("check.json", "check", &clock, json!({}), &result)?;
    Ok(if feasible { Status::Ok } else { Status::Infeasible })
}
