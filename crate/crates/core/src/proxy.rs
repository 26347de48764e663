//! Closed-loop flight of sized designs: simulation models, lap evaluation
//! under path learning, and the simulated peak-power source behind the
//! efficiency map.

use serde::{Deserialize, Serialize};

use crate::codesign::{DesignVars, KiteDesign, Problem};
use crate::dynsim::{build_kite, Flight, KiteGeometry, KiteProperties, LapMetrics, SimConfig};
use crate::effmap::PeakPowerSource;
use crate::error::{Error, Result};
use crate::fuse_struct::sfdt_optimize;
use crate::hydro::{loyd_power, FlowEnv, WingPlanform};
use crate::ilc::{optimize_path, BasisParams, IlcConfig, IlcResult, LapEvaluator, LapOutcome};

pub fn geometry_of(design: &KiteDesign) -> KiteGeometry {
    KiteGeometry {
        span: design.u.s,
        aspect_ratio: design.u.ar,
        fuse_diameter: design.u.d,
        fuse_length: design.u.l,
        m_wing: design.m_wing,
        m_fuse: design.m_fuse,
    }
}

pub fn kite_properties(problem: &Problem, design: &KiteDesign) -> Result<KiteProperties> {
    build_kite(&geometry_of(design), &problem.foil, problem.flow.rho_w, &problem.airframe)
}

/// One continuing flight seen lap by lap. The first call starts on the given
/// path and flies the settle laps; later calls may change the path. A lap
/// that loses the path scores as zero power held at the abort angle, and the
/// next call starts a fresh flight.
pub struct FlightLaps<'a> {
    props: &'a KiteProperties,
    flow: FlowEnv,
    cfg: SimConfig,
    flight: Option<Flight>,
    pub laps: Vec<LapMetrics>,
    pub lost_laps: usize,
}

impl<'a> FlightLaps<'a> {
    /// The lap objective uses the learning weight `k_w`.
    pub fn new(props: &'a KiteProperties, flow: FlowEnv, sim: &SimConfig, k_w: f64) -> Self {
        Self {
            props,
            flow,
            cfg: SimConfig { penalty_weight: k_w, ..sim.clone() },
            flight: None,
            laps: Vec::new(),
            lost_laps: 0,
        }
    }

    fn lap(&mut self, b: &BasisParams) -> Result<LapMetrics> {
        let flight = match &mut self.flight {
            Some(f) => f,
            None => {
                let mut f = Flight::new(self.props, b, &self.flow, &self.cfg)?;
                for _ in 0..self.cfg.settle_laps {
                    f.fly_lap(b, None)?;
                }
                self.flight.insert(f)
            }
        };
        flight.fly_lap(b, None)
    }
}

impl LapEvaluator for FlightLaps<'_> {
    fn run_lap(&mut self, b: &BasisParams) -> Result<LapOutcome> {
        match self.lap(b) {
            Ok(lap) => {
                let out = LapOutcome { j: lap.j, p_avg: lap.p_avg, p_peak: lap.p_peak };
                self.laps.push(lap);
                Ok(out)
            }
            Err(Error::PathLost { .. }) => {
                self.flight = None;
                self.lost_laps += 1;
                Ok(LapOutcome { j: -self.cfg.penalty_weight * self.cfg.abort_angle, p_avg: 0.0, p_peak: 0.0 })
            }
            Err(e) => Err(e),
        }
    }
}

/// Path learning on one flight of `props`.
pub fn learn_path(props: &KiteProperties, flow: &FlowEnv, sim: &SimConfig, ilc: &IlcConfig) -> Result<IlcResult> {
    optimize_path(&mut FlightLaps::new(props, *flow, sim, ilc.k_w), ilc)
}

/// Structure used to fly a geometry: the SWDT wing with the lightest grid
/// fuselage when admissible, otherwise the bound-maximal wing on the
/// largest fuselage so that every geometry can still be flown.
pub fn flight_design(problem: &Problem, dl_grid: &[(f64, f64)], s: f64, ar: f64) -> Result<KiteDesign> {
    let planform = WingPlanform::new(s, ar)?;
    let sized = problem.wing_structure(&planform).and_then(|(wing, rated)| {
        let fuse = problem.lightest_fuselage(&planform, &rated, wing.m_wing, dl_grid)?;
        Ok(DesignVars {
            s,
            ar,
            n_sp: wing.design.n_sp,
            t_sp: wing.design.t_sp,
            t_sw: wing.design.t_sw,
            d: fuse.design.d,
            l: fuse.design.l,
            t_sf: fuse.design.t_sf,
        })
    });
    let u = match sized {
        Ok(u) => u,
        Err(e) if e.is_infeasible() => structural_ceiling(problem, s, ar)?,
        Err(e) => return Err(e),
    };
    problem.evaluate(&u)
}

/// Bound-maximal wing on the largest fuselage, with the SFDT shell when one
/// exists and the thickest admissible shell otherwise.
pub fn structural_ceiling(problem: &Problem, s: f64, ar: f64) -> Result<DesignVars> {
    let b = &problem.bounds;
    let planform = WingPlanform::new(s, ar)?;
    let rated = problem.rated_loads(&planform)?;
    let (d, l) = (b.d[1], b.l[1]);
    let t_sf = match sfdt_optimize(d, l, &problem.fuselage_loads(&planform, &rated, l), &problem.material, b) {
        Ok(r) => r.design.t_sf,
        Err(e) if e.is_infeasible() => b.t_sf[1],
        Err(e) => return Err(e),
    };
    Ok(DesignVars { s, ar, n_sp: b.n_sp[1], t_sp: b.t_sp[1], t_sw: b.t_sw[1], d, l, t_sf })
}

/// Reference kite against which optimized designs are judged: full span at
/// AR 6 with a conventional, unoptimized structure. Neither its wing nor its
/// fuselage is admissible under the rated loads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineKite {
    pub u: DesignVars,
}

impl Default for BaselineKite {
    fn default() -> Self {
        Self { u: DesignVars { s: 10.0, ar: 6.0, n_sp: 2, t_sp: 0.05, t_sw: 0.05, d: 0.8, l: 10.0, t_sf: 0.02 } }
    }
}

impl BaselineKite {
    pub fn design(&self, problem: &Problem) -> Result<KiteDesign> {
        problem.evaluate(&self.u)
    }
}

/// Converged peak power from path learning on the simulated design.
pub struct SimulatedPeakPower<'a> {
    pub problem: &'a Problem,
    pub dl_grid: Vec<(f64, f64)>,
    pub sim: SimConfig,
    pub ilc: IlcConfig,
}

impl PeakPowerSource for SimulatedPeakPower<'_> {
    fn peak_power(&self, s: f64, ar: f64) -> Result<f64> {
        let design = flight_design(self.problem, &self.dl_grid, s, ar)?;
        let props = kite_properties(self.problem, &design)?;
        let learned = learn_path(&props, &self.problem.flow, &self.sim, &self.ilc)?;
        if learned.p_peak > 0.0 {
            Ok(learned.p_peak)
        } else {
            Err(Error::Infeasible(format!("no positive peak power at s = {s}, AR = {ar}")))
        }
    }

    fn ideal_power(&self, s: f64, ar: f64) -> Result<f64> {
        let p = self.problem;
        loyd_power(&WingPlanform::new(s, ar)?, &p.flow, 1.0, &p.foil, p.power_form, p.alpha_range)
    }
}
