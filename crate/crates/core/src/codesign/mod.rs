//! Co-design formulations over the full decision vector.
//!
//! The Pareto formulation minimizes m_wing at a fixed power with either the
//! nested-sequential strategy (a surrogate picks the geometry before the
//! structure is sized) or the fully nested strategy (structure sized for
//! every geometry meeting the power requirement). The dual formulation
//! maximizes w·ln(P_gen) − ln(m_wing) with a genetic algorithm.

mod ga;
pub mod hull;
mod nested;
mod problem;
mod sft;

use serde::{Deserialize, Serialize};

pub use ga::{dual_fitness, dual_sweep, DualPoint, DualSolver, GaConfig};
pub use nested::{pareto_sweep, ErrorRecord, GridConfig, NestedSolver, ParetoPoint, SolveStats, Strategy, SweepEntry};
pub use problem::{grid_1d, power_of, DesignVars, KiteDesign, Margins, PowerRequirement, Problem, RatedLoads};
pub use sft::{sfot, sft_enumerate, GeometryPoint, Surrogate};

use crate::error::{ensure, Result};

/// Settings of the co-design searches and their published sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodesignConfig {
    pub grid: GridConfig,
    /// Relative tolerance of the power equality.
    pub power_tol: f64,
    /// Margin below zero tolerated by the feasibility audit.
    pub audit_tol: f64,
    pub ga: GaConfig,
    /// P_req values of the Pareto sweep (W).
    pub pareto_sweep: Vec<f64>,
    /// Weights w of the dual sweep.
    pub dual_weights: Vec<f64>,
    /// Power floor of the dual formulation (W).
    pub p_min: f64,
}

impl Default for CodesignConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            power_tol: 1e-3,
            audit_tol: 1e-6,
            ga: GaConfig::default(),
            pareto_sweep: (0..=14).map(|i| 350e3 + 25e3 * i as f64).collect(),
            dual_weights: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            p_min: 350e3,
        }
    }
}

impl CodesignConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.ga.validate()?;
        ensure(self.power_tol > 0.0 && self.audit_tol >= 0.0, || "tolerances must be positive".into())?;
        ensure(self.pareto_sweep.iter().all(|p| *p > 0.0), || "sweep powers must be positive".into())?;
        ensure(self.dual_weights.iter().all(|w| *w > 0.0), || "dual weights must be positive".into())?;
        ensure(self.p_min > 0.0, || "p_min must be positive".into())
    }
}
