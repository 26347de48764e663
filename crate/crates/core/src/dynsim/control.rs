//! Hierarchical flight controller (velocity angle → tangent roll → moment →
//! surface deflections) and the phase-scheduled winch controller.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::kite::{ControlChannel, Deflections, KiteProperties};
use super::path::{local_frame, path_point, velocity_angle, wrap_angle};
use crate::error::{Error, Result};
use crate::hydro::FlowEnv;
use crate::ilc::BasisParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// Carrot lead along the path parameter (rad).
    pub lookahead: f64,
    /// Velocity-angle loop: tangent roll per radian of heading error.
    pub heading_kp: f64,
    pub heading_ki: f64,
    /// Integrator clamp (rad·s).
    pub heading_int_limit: f64,
    /// Tangent roll command limit (rad).
    pub max_roll: f64,
    /// Roll loop natural frequency (rad/s) and damping ratio.
    pub roll_wn: f64,
    pub roll_zeta: f64,
    /// Yaw loop: sideslip stiffness (1/s²) and yaw-rate damping (1/s).
    pub yaw_beta_gain: f64,
    pub yaw_rate_gain: f64,
    /// Deflection limits (rad).
    pub max_aileron: f64,
    pub max_rudder: f64,
    /// Dynamic-pressure floor used by the allocator (Pa).
    pub min_dynamic_pressure: f64,
    pub elevator_out: f64,
    pub elevator_in: f64,
    /// Spool-out speed as a fraction of flow speed.
    pub spool_ratio: f64,
    /// Spool-in speed as a fraction of flow speed.
    pub spool_in_ratio: f64,
    /// Spool-in windows [lo, hi) in path position; the rest spools out.
    pub spool_in_windows: Vec<[f64; 2]>,
    /// Extra reel-in speed per metre of length drift (1/s).
    pub length_drift_gain: f64,
    /// Winch acceleration limit (m/s²); the commanded speed is slewed.
    pub spool_accel_limit: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let w = 0.8;
        Self {
            lookahead: 0.3,
            heading_kp: 0.88,
            heading_ki: 0.05,
            heading_int_limit: 3.0,
            max_roll: 0.74,
            roll_wn: 2.26,
            roll_zeta: 1.0,
            yaw_beta_gain: 1.57,
            yaw_rate_gain: 2.59,
            max_aileron: 0.5,
            max_rudder: 0.5,
            min_dynamic_pressure: 500.0,
            elevator_out: -0.045,
            elevator_in: 0.41,
            spool_ratio: 1.0 / 3.0,
            spool_in_ratio: 0.59,
            spool_in_windows: vec![[FRAC_PI_2 - w, FRAC_PI_2 + w], [3.0 * FRAC_PI_2 - w, 3.0 * FRAC_PI_2 + w]],
            length_drift_gain: 0.01,
            spool_accel_limit: 0.18,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.spool_ratio > 0.0 && self.spool_ratio < 1.0) {
            return Err(Error::Config(format!("spool ratio {} outside (0, 1)", self.spool_ratio)));
        }
        if !(self.spool_in_ratio >= 0.0) {
            return Err(Error::Config("spool-in ratio must be non-negative".into()));
        }
        let mut prev = 0.0;
        for w in &self.spool_in_windows {
            if !(w[0] >= prev && w[1] > w[0] && w[1] <= TAU) {
                return Err(Error::Config(format!(
                    "spool-in windows must be ordered, disjoint and inside [0, 2π): {:?}",
                    self.spool_in_windows
                )));
            }
            prev = w[1];
        }
        let pos = [
            self.lookahead,
            self.max_roll,
            self.roll_wn,
            self.roll_zeta,
            self.max_aileron,
            self.max_rudder,
            self.min_dynamic_pressure,
            self.spool_accel_limit,
        ];
        if pos.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::Config("controller gains and limits must be positive".into()));
        }
        Ok(())
    }

    pub fn spooling_in(&self, p: f64) -> bool {
        let p = p.rem_euclid(TAU);
        self.spool_in_windows.iter().any(|w| p >= w[0] && p < w[1])
    }
}

/// Winch command: spooling speed (positive pays out) and elevator setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinchCommand {
    pub v_spl: f64,
    pub elevator: f64,
    pub spool_in: bool,
}

/// Nominal phase-scheduled winch command at path position `p`.
pub fn winch_controller(p: f64, cfg: &ControllerConfig, flow: &FlowEnv) -> WinchCommand {
    if cfg.spooling_in(p) {
        WinchCommand { v_spl: -cfg.spool_in_ratio * flow.v, elevator: cfg.elevator_in, spool_in: true }
    } else {
        WinchCommand { v_spl: cfg.spool_ratio * flow.v, elevator: cfg.elevator_out, spool_in: false }
    }
}

/// Winch command with the reel-in speed raised to hold the mean length.
pub fn winch_with_drift(p: f64, l_t: f64, l_t0: f64, cfg: &ControllerConfig, flow: &FlowEnv) -> WinchCommand {
    let mut cmd = winch_controller(p, cfg, flow);
    if cmd.spool_in {
        cmd.v_spl = (cmd.v_spl - cfg.length_drift_gain * (l_t - l_t0)).min(0.0);
    }
    cmd
}

/// Measured quantities the flight controller acts on.
#[derive(Debug, Clone, Copy)]
pub struct FlightInputs {
    pub position: Vector3<f64>,
    /// Inertial velocity.
    pub velocity: Vector3<f64>,
    pub attitude: UnitQuaternion<f64>,
    /// Body angular rate.
    pub omega: Vector3<f64>,
    /// Body-frame velocity relative to water.
    pub v_rel: Vector3<f64>,
    /// Current path position (unwrapped).
    pub p: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlightCommand {
    pub aileron: f64,
    pub rudder: f64,
    pub gamma_des: f64,
    pub gamma: f64,
    pub roll_des: f64,
    pub roll: f64,
    pub moment: [f64; 2],
}

/// Tangent roll: angle of the body y axis out of the tangent plane,
/// positive when the kite banks into a counter-clockwise turn.
pub fn tangent_roll(position: &Vector3<f64>, attitude: &UnitQuaternion<f64>) -> f64 {
    let er = position.normalize();
    let y_k = attitude * Vector3::y();
    -(y_k.dot(&er).clamp(-1.0, 1.0)).asin()
}

/// Maps desired roll and yaw moments to aileron and rudder deflections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    /// Roll moment per unit aileron per pascal of dynamic pressure.
    pub roll_per_aileron: f64,
    /// Yaw moment per unit rudder per pascal of dynamic pressure.
    pub yaw_per_rudder: f64,
}

impl Allocation {
    /// Derived from surface placement and control gains.
    pub fn from_props(props: &KiteProperties) -> Self {
        let mut roll = 0.0;
        let mut yaw = 0.0;
        for s in &props.surfaces {
            if let Some((ch, gain)) = s.control {
                let area = props.s_ref * s.area_frac;
                let lift_dir = s.normal;
                let m = s.r_a.cross(&(lift_dir * (gain * area)));
                match ch {
                    ControlChannel::Aileron => roll += m.x,
                    ControlChannel::Rudder => yaw += m.z,
                    ControlChannel::Elevator => {}
                }
            }
        }
        Self { roll_per_aileron: roll, yaw_per_rudder: yaw }
    }
}

/// Stateful flight controller; the heading loop integrates between calls.
#[derive(Debug, Clone)]
pub struct FlightController {
    pub cfg: ControllerConfig,
    pub alloc: Allocation,
    /// Effective roll and yaw inertia (kg·m²).
    pub inertia: [f64; 2],
    integral: f64,
}

impl FlightController {
    pub fn new(cfg: ControllerConfig, props: &KiteProperties) -> Self {
        let m = props.mass_matrix();
        Self { cfg, alloc: Allocation::from_props(props), inertia: [m[(3, 3)], m[(5, 5)]], integral: 0.0 }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }

    /// Desired velocity angle toward the carrot point `lookahead` ahead of `p`.
    pub fn desired_heading(&self, b: &BasisParams, position: &Vector3<f64>, p: f64) -> f64 {
        let target = path_point(b, p + self.cfg.lookahead, 1.0);
        let (north, _, er) = local_frame(position);
        let d = target - er * er.dot(&target);
        er.dot(&north.cross(&d)).atan2(north.dot(&d))
    }

    pub fn command(&mut self, b: &BasisParams, inp: &FlightInputs, rho_w: f64, dt: f64) -> FlightCommand {
        let cfg = &self.cfg;
        let gamma_des = self.desired_heading(b, &inp.position, inp.p);
        let gamma = velocity_angle(&inp.position, &inp.velocity);
        let err = wrap_angle(gamma_des - gamma);
        self.integral = (self.integral + err * dt).clamp(-cfg.heading_int_limit, cfg.heading_int_limit);
        let roll_des = (cfg.heading_kp * err + cfg.heading_ki * self.integral).clamp(-cfg.max_roll, cfg.max_roll);
        let roll = tangent_roll(&inp.position, &inp.attitude);

        let wn = cfg.roll_wn;
        let m_x = self.inertia[0] * (-wn * wn * (roll_des - roll) - 2.0 * cfg.roll_zeta * wn * inp.omega.x);
        let speed = inp.v_rel.norm();
        let beta = if speed > 0.0 { inp.v_rel.y.atan2(inp.v_rel.x) } else { 0.0 };
        let m_z = self.inertia[1] * (cfg.yaw_beta_gain * beta - cfg.yaw_rate_gain * inp.omega.z);

        let q = (0.5 * rho_w * speed * speed).max(cfg.min_dynamic_pressure);
        let aileron = if self.alloc.roll_per_aileron != 0.0 {
            (m_x / (q * self.alloc.roll_per_aileron)).clamp(-cfg.max_aileron, cfg.max_aileron)
        } else {
            0.0
        };
        let rudder = if self.alloc.yaw_per_rudder != 0.0 {
            (m_z / (q * self.alloc.yaw_per_rudder)).clamp(-cfg.max_rudder, cfg.max_rudder)
        } else {
            0.0
        };
        FlightCommand { aileron, rudder, gamma_des, gamma, roll_des, roll, moment: [m_x, m_z] }
    }
}

/// Deflection set from flight and winch commands.
pub fn deflections(flight: &FlightCommand, winch: &WinchCommand) -> Deflections {
    Deflections { aileron: flight.aileron, elevator: winch.elevator, rudder: flight.rudder }
}
