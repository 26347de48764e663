//! Pareto formulation: minimum wing mass at a fixed power, solved by the
//! nested-sequential and fully nested strategies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::{grid_1d, KiteDesign, Problem};
use super::sft::{sfot, sft_enumerate, GeometryPoint, Surrogate};
use crate::error::{ensure, Error, Result};
use crate::fuse_struct::SfdtResult;
use crate::hydro::WingPlanform;
use crate::wing_struct::SwdtResult;

/// Resolution of the outer grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Span step (m).
    pub s_step: f64,
    /// Fuselage diameter step (m).
    pub d_step: f64,
    /// Fuselage length step (m).
    pub l_step: f64,
    /// Sign-scan intervals over the AR range.
    pub ar_scan: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { s_step: 0.05, d_step: 0.02, l_step: 0.2, ar_scan: 64 }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.s_step > 0.0 && self.d_step > 0.0 && self.l_step > 0.0, || "grid steps must be positive".into())?;
        ensure(self.ar_scan >= 1, || "ar_scan must be at least 1".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    SequentialSpan,
    SequentialWingVolume,
    FullyNested,
    Simultaneous,
}

impl Strategy {
    pub fn sequential(surrogate: Surrogate) -> Self {
        match surrogate {
            Surrogate::Span => Strategy::SequentialSpan,
            Surrogate::WingVolume => Strategy::SequentialWingVolume,
        }
    }
}

/// Counters describing one solve; deterministic for fixed inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    /// (s, AR) points meeting the power requirement.
    pub geometries: usize,
    /// Of those, points with an admissible wing structure.
    pub wing_feasible: usize,
    /// Of those, points with an admissible fuselage cell.
    pub feasible: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub p_req: f64,
    pub m_wing: f64,
    pub design: KiteDesign,
    pub strategy: Strategy,
    pub stats: SolveStats,
}

/// Outer-grid state shared by the strategies.
pub struct NestedSolver<'a> {
    pub problem: &'a Problem,
    pub grid: GridConfig,
    s_grid: Vec<f64>,
    dl_grid: Vec<(f64, f64)>,
}

struct Candidate {
    geometry: GeometryPoint,
    wing: SwdtResult,
    fuse: SfdtResult,
}

impl<'a> NestedSolver<'a> {
    pub fn new(problem: &'a Problem, grid: GridConfig) -> Result<Self> {
        grid.validate()?;
        let b = &problem.bounds;
        let s_grid = grid_1d(b.s[0], b.s[1], grid.s_step);
        let dl_grid = grid_1d(b.d[0], b.d[1], grid.d_step)
            .into_iter()
            .flat_map(|d| grid_1d(b.l[0], b.l[1], grid.l_step).into_iter().map(move |l| (d, l)))
            .collect();
        Ok(Self { problem, grid, s_grid, dl_grid })
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn dl_grid(&self) -> &[(f64, f64)] {
        &self.dl_grid
    }

    /// Steady-flight tool: every grid (s, AR) with P(s, AR) = P_req.
    pub fn enumerate(&self, p_req: f64) -> Result<Vec<GeometryPoint>> {
        sft_enumerate(p_req, |s, ar| self.problem.power(s, ar), &self.s_grid, self.problem.bounds.ar, self.grid.ar_scan)
    }

    /// Sizes wing then fuselage; the flag tells whether the wing alone was
    /// admissible.
    fn wing_and_fuselage(&self, g: &GeometryPoint) -> (bool, Result<Candidate>) {
        let sized = WingPlanform::new(g.s, g.ar).and_then(|p| Ok((p, self.problem.wing_structure(&p)?)));
        match sized {
            Err(e) => (false, Err(e)),
            Ok((planform, (wing, rated))) => {
                (
                    true,
                    self.problem
                        .lightest_fuselage(&planform, &rated, wing.m_wing, &self.dl_grid)
                        .map(|fuse| Candidate { geometry: *g, wing, fuse }),
                )
            }
        }
    }

    fn finish(&self, p_req: f64, c: &Candidate, strategy: Strategy, stats: SolveStats) -> Result<ParetoPoint> {
        let design = self.problem.evaluate(&super::problem::DesignVars {
            s: c.geometry.s,
            ar: c.geometry.ar,
            n_sp: c.wing.design.n_sp,
            t_sp: c.wing.design.t_sp,
            t_sw: c.wing.design.t_sw,
            d: c.fuse.design.d,
            l: c.fuse.design.l,
            t_sf: c.fuse.design.t_sf,
        })?;
        Ok(ParetoPoint { p_req, m_wing: design.m_wing, design, strategy, stats })
    }

    /// Sequential strategy: the surrogate picks the geometry, then the wing
    /// and fuselage are sized for it. The outer (D, L) loop does not feed
    /// back into the geometry, so the minimum-m_wing cell is the lightest
    /// admissible fuselage for that one geometry.
    pub fn nested_sequential(&self, p_req: f64, surrogate: Surrogate) -> Result<ParetoPoint> {
        let points = self.enumerate(p_req)?;
        let g = sfot(&points, surrogate)?;
        let planform = WingPlanform::new(g.s, g.ar)?;
        let (wing, rated) = self.problem.wing_structure(&planform).map_err(|e| match e {
            Error::Infeasible(msg) => Error::Infeasible(format!("sequential ({surrogate:?}) geometry: {msg}")),
            other => other,
        })?;
        let fuse = self.problem.lightest_fuselage(&planform, &rated, wing.m_wing, &self.dl_grid)?;
        let stats = SolveStats { geometries: points.len(), wing_feasible: 1, feasible: 1 };
        self.finish(p_req, &Candidate { geometry: g, wing, fuse }, Strategy::sequential(surrogate), stats)
    }

    /// Fully nested strategy: wing and fuselage sizing for every steady-flight
    /// geometry; global minimum m_wing at grid resolution, ties to the lighter
    /// fuselage.
    pub fn fully_nested(&self, p_req: f64) -> Result<ParetoPoint> {
        let points = self.enumerate(p_req)?;
        let sized: Vec<(bool, Result<Candidate>)> = points.par_iter().map(|g| self.wing_and_fuselage(g)).collect();
        let mut stats = SolveStats { geometries: points.len(), ..Default::default() };
        let mut best: Option<Candidate> = None;
        for (wing_ok, r) in sized {
            stats.wing_feasible += usize::from(wing_ok);
            match r {
                Ok(c) => {
                    stats.feasible += 1;
                    let better = best.as_ref().is_none_or(|b| {
                        c.wing.m_wing.total_cmp(&b.wing.m_wing).then(c.fuse.m_fuse.total_cmp(&b.fuse.m_fuse)).is_lt()
                    });
                    if better {
                        best = Some(c);
                    }
                }
                Err(e) if e.is_infeasible() => {}
                Err(e) => return Err(e),
            }
        }
        let best = best.ok_or_else(|| {
            Error::Infeasible(format!("no steady-flight geometry at P_req = {p_req:.1} W has a feasible structure"))
        })?;
        self.finish(p_req, &best, Strategy::FullyNested, stats)
    }

    pub fn solve(&self, p_req: f64, strategy: Strategy) -> Result<ParetoPoint> {
        match strategy {
            Strategy::SequentialSpan => self.nested_sequential(p_req, Surrogate::Span),
            Strategy::SequentialWingVolume => self.nested_sequential(p_req, Surrogate::WingVolume),
            Strategy::FullyNested => self.fully_nested(p_req),
            Strategy::Simultaneous => {
                Err(Error::InvalidInput("the simultaneous strategy solves the dual problem, not a Pareto point".into()))
            }
        }
    }
}

/// Machine-readable failure of one sweep point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind().into(), message: e.to_string() }
    }
}

/// One sweep entry: the input, and either a point or the failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry<T> {
    pub input: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

impl<T> SweepEntry<T> {
    pub fn from_result(input: f64, r: Result<T>) -> Self {
        match r {
            Ok(p) => Self { input, point: Some(p), error: None },
            Err(e) => Self { input, point: None, error: Some(ErrorRecord::from(&e)) },
        }
    }
}

/// Runs a strategy at every P_req; failures are recorded and the sweep
/// continues.
pub fn pareto_sweep(solver: &NestedSolver, p_reqs: &[f64], strategy: Strategy) -> Result<Vec<SweepEntry<ParetoPoint>>> {
    ensure(!p_reqs.is_empty(), || "P_req list is empty".into())?;
    Ok(p_reqs.par_iter().map(|&p| SweepEntry::from_result(p, solver.solve(p, strategy))).collect())
}
