//! Closed-loop flight simulator: a six-degree-of-freedom rigid kite with
//! added mass, a lumped-mass tether, the hierarchical flight controller, the
//! winch controller and the figure-8 target path.
//!
//! Frames: the inertial frame has x downstream (along the flow), z up and
//! the winch at the origin. The body frame is forward-left-up with its
//! origin at the wing leading edge.

pub mod control;
pub mod forces;
pub mod kite;
pub mod path;
pub mod sim;
pub mod tether;

pub use control::{winch_controller, ControllerConfig, FlightController, WinchCommand};
pub use forces::net_force_moment;
pub use kite::{build_kite, mass_and_coriolis, AirframeConfig, KiteGeometry, KiteProperties, ScalingRule, SurfaceDef};
pub use path::path_eval;
pub use sim::{
    simulate_laps, simulate_traced, write_series, Flight, LapMetrics, SeriesSample, SimConfig, SimOutput, SimState,
    Simulator,
};
pub use tether::{tether_node_forces, TetherProperties};
