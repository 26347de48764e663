//! Closed-loop time integration and lap bookkeeping.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{Matrix6, Quaternion, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::control::{
    deflections, winch_with_drift, ControllerConfig, FlightCommand, FlightController, FlightInputs, WinchCommand,
};
use super::forces::net_force_moment;
use super::kite::{coriolis, Deflections, KiteProperties};
use super::path::{closest_param, path_point};
use super::tether::{tether_node_forces, TetherForces, TetherProperties};
use crate::error::{Error, Result};
use crate::hydro::FlowEnv;
use crate::ilc::{lap_objective, BasisParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Controller update period in integration steps.
    pub control_every: usize,
    /// Laps flown before metrics are kept.
    pub settle_laps: usize,
    /// Interior angle to the path that aborts the run (rad).
    pub abort_angle: f64,
    /// Any state entry above this magnitude counts as a blow-up.
    pub blowup_bound: f64,
    /// A lap taking longer than this (s) aborts the run.
    pub max_lap_time: f64,
    /// Time-series decimation; 0 records nothing.
    pub record_every: usize,
    /// Initial crosswind speed along the path (m/s).
    pub initial_speed: f64,
    /// Path-deviation weight in the lap objective (W/rad).
    pub penalty_weight: f64,
    pub tether: TetherProperties,
    pub controller: ControllerConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 2e-3,
            control_every: 5,
            settle_laps: 1,
            abort_angle: 0.6,
            blowup_bound: 1e7,
            max_lap_time: 900.0,
            record_every: 50,
            initial_speed: 2.5,
            penalty_weight: 1.5e5,
            tether: TetherProperties::default(),
            controller: ControllerConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.control_every >= 1 && self.abort_angle > 0.0 && self.max_lap_time > 0.0) {
            return Err(Error::Config("dt, control period, abort angle and lap time limit must be positive".into()));
        }
        if !(self.blowup_bound > 0.0 && self.initial_speed >= 0.0 && self.penalty_weight >= 0.0) {
            return Err(Error::Config("blow-up bound must be positive; speed and penalty non-negative".into()));
        }
        self.tether.validate()?;
        self.controller.validate()
    }
}

/// Full simulator state. Tether nodes exclude the fixed winch node and the
/// kite attachment point, which follows the kite.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub position: Vector3<f64>,
    pub attitude: UnitQuaternion<f64>,
    /// Body-frame (linear, angular) velocity relative to water.
    pub v_r: Vector6<f64>,
    pub node_pos: Vec<Vector3<f64>>,
    pub node_vel: Vec<Vector3<f64>>,
    /// Un-spooled tether length (m).
    pub l_t: f64,
    /// Unwrapped path position.
    pub p: f64,
}

impl SimState {
    fn pack(&self, y: &mut Vec<f64>) {
        y.clear();
        y.extend_from_slice(self.position.as_slice());
        let q = self.attitude.quaternion();
        y.extend_from_slice(&[q.w, q.i, q.j, q.k]);
        y.extend_from_slice(self.v_r.as_slice());
        for (p, v) in self.node_pos.iter().zip(&self.node_vel) {
            y.extend_from_slice(p.as_slice());
            y.extend_from_slice(v.as_slice());
        }
        y.push(self.l_t);
    }

    fn unpack(&mut self, y: &[f64]) {
        self.position = Vector3::from_column_slice(&y[0..3]);
        self.attitude = UnitQuaternion::from_quaternion(Quaternion::new(y[3], y[4], y[5], y[6]));
        self.v_r = Vector6::from_column_slice(&y[7..13]);
        for (i, (p, v)) in self.node_pos.iter_mut().zip(self.node_vel.iter_mut()).enumerate() {
            let o = 13 + 6 * i;
            *p = Vector3::from_column_slice(&y[o..o + 3]);
            *v = Vector3::from_column_slice(&y[o + 3..o + 6]);
        }
        self.l_t = y[y.len() - 1];
    }

    /// Inertial kite velocity.
    pub fn velocity(&self, flow: &FlowEnv) -> Vector3<f64> {
        self.attitude * Vector3::new(self.v_r[0], self.v_r[1], self.v_r[2]) + Vector3::new(flow.v, 0.0, 0.0)
    }
}

/// Inputs held constant over one integration step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepInputs {
    pub deflections: Deflections,
    pub v_spl: f64,
}

/// Kite, tether and environment, with the constant mass matrix factored.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub props: KiteProperties,
    pub tether: TetherProperties,
    pub flow: FlowEnv,
    mass: Matrix6<f64>,
    mass_inv: Matrix6<f64>,
}

impl Simulator {
    pub fn new(props: KiteProperties, tether: TetherProperties, flow: FlowEnv) -> Result<Self> {
        props.validate()?;
        tether.validate()?;
        // Still water is a valid simulation environment.
        if !(flow.v >= 0.0 && flow.v.is_finite() && flow.rho_w > 0.0 && flow.g >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid flow environment {flow:?}")));
        }
        let mass = props.mass_matrix();
        let mass_inv = mass
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("kite mass matrix has no Cholesky factor".into()))?
            .inverse();
        Ok(Self { props, tether, flow, mass, mass_inv })
    }

    fn flow_vec(&self) -> Vector3<f64> {
        Vector3::new(self.flow.v, 0.0, 0.0)
    }

    /// Straight tether from the winch to the kite attachment, at rest
    /// relative to a kite moving with inertial velocity `velocity`.
    pub fn initial_state(
        &self,
        position: Vector3<f64>,
        attitude: UnitQuaternion<f64>,
        velocity: Vector3<f64>,
    ) -> SimState {
        let v_lin = attitude.inverse() * (velocity - self.flow_vec());
        let attach = position + attitude * self.props.r_ta;
        let n = self.tether.n_links;
        let node_pos = (1..n).map(|i| attach * (i as f64 / n as f64)).collect();
        let node_vel = (1..n).map(|i| velocity * (i as f64 / n as f64)).collect();
        SimState {
            t: 0.0,
            position,
            attitude,
            v_r: Vector6::new(v_lin.x, v_lin.y, v_lin.z, 0.0, 0.0, 0.0),
            node_pos,
            node_vel,
            l_t: attach.norm(),
            p: 0.0,
        }
    }

    fn tether_forces_packed(&self, y: &[f64], r: &nalgebra::Rotation3<f64>) -> TetherForces {
        let n = self.tether.n_links;
        let pos = Vector3::from_column_slice(&y[0..3]);
        let v = Vector3::new(y[7], y[8], y[9]);
        let w = Vector3::new(y[10], y[11], y[12]);
        let mut p = Vec::with_capacity(n + 1);
        let mut vel = Vec::with_capacity(n + 1);
        p.push(Vector3::zeros());
        vel.push(Vector3::zeros());
        for i in 0..n - 1 {
            let o = 13 + 6 * i;
            p.push(Vector3::from_column_slice(&y[o..o + 3]));
            vel.push(Vector3::from_column_slice(&y[o + 3..o + 6]));
        }
        p.push(pos + r * self.props.r_ta);
        vel.push(r * (v + w.cross(&self.props.r_ta)) + self.flow_vec());
        tether_node_forces(&p, &vel, y[y.len() - 1], &self.tether, &self.flow)
    }

    /// Tether loads at a state.
    pub fn tether_forces(&self, s: &SimState) -> TetherForces {
        let mut y = Vec::new();
        s.pack(&mut y);
        self.tether_forces_packed(&y, &s.attitude.to_rotation_matrix())
    }

    fn derivative(&self, y: &[f64], u: &StepInputs, dy: &mut [f64]) {
        let q = UnitQuaternion::from_quaternion(Quaternion::new(y[3], y[4], y[5], y[6]));
        let r = q.to_rotation_matrix();
        let nu = Vector6::from_column_slice(&y[7..13]);
        let v = Vector3::new(nu[0], nu[1], nu[2]);
        let w = Vector3::new(nu[3], nu[4], nu[5]);
        let tf = self.tether_forces_packed(y, &r);

        let x_dot = r * v + self.flow_vec();
        dy[0..3].copy_from_slice(x_dot.as_slice());
        let qd = q.quaternion() * Quaternion::new(0.0, w.x, w.y, w.z) * 0.5;
        dy[3..7].copy_from_slice(&[qd.w, qd.i, qd.j, qd.k]);
        let tau = net_force_moment(&q, &nu, &self.props, &self.flow, &u.deflections, &tf.on_kite());
        let nu_dot = self.mass_inv * (tau - coriolis(&self.mass, &nu) * nu);
        dy[7..13].copy_from_slice(nu_dot.as_slice());

        let m_node = self.tether.link_mass(y[y.len() - 1]);
        for i in 0..self.tether.n_links - 1 {
            let o = 13 + 6 * i;
            dy[o..o + 3].copy_from_slice(&y[o + 3..o + 6]);
            let a = tf.nodes[i + 1] / m_node;
            dy[o + 3..o + 6].copy_from_slice(a.as_slice());
        }
        let last = dy.len() - 1;
        dy[last] = u.v_spl;
    }

    /// One classical RK4 step; the quaternion is renormalized afterwards.
    pub fn step(&self, s: &mut SimState, u: &StepInputs, dt: f64, bound: f64) -> Result<()> {
        let mut y = Vec::new();
        s.pack(&mut y);
        let n = y.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.derivative(&y, u, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        self.derivative(&tmp, u, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        self.derivative(&tmp, u, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + dt * k3[i];
        }
        self.derivative(&tmp, u, &mut k4);
        for i in 0..n {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = s.t + dt;
        if let Some(i) = y.iter().position(|v| !v.is_finite() || v.abs() > bound) {
            return Err(Error::NumericBlowup { time: t, what: format!("state entry {i} = {:e}", y[i]) });
        }
        if !(y[n - 1] > 0.0) {
            return Err(Error::NumericBlowup { time: t, what: "tether fully reeled in".into() });
        }
        s.unpack(&y);
        s.t = t;
        Ok(())
    }
}

/// Per-lap performance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapMetrics {
    pub lap: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub p_avg: f64,
    pub p_peak: f64,
    /// Lap objective: mean of P_gen − k_w·γ_c.
    pub j: f64,
    pub gamma_c_mean: f64,
    pub gamma_c_max: f64,
    pub tension_mean: f64,
    pub tension_peak: f64,
    /// Spool-in runs whose mean power sits below the lap mean.
    pub spool_in_dips: usize,
}

/// Decimated time-series sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub tension: f64,
    pub v_spl: f64,
    pub p_gen: f64,
    pub gamma_c: f64,
    pub p: f64,
    pub l_t: f64,
    /// Speed through the water (m/s).
    pub speed: f64,
    /// Body angle of attack (rad).
    pub alpha: f64,
    pub aileron: f64,
    pub rudder: f64,
    pub elevator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub laps: Vec<LapMetrics>,
    #[serde(skip)]
    pub series: Vec<SeriesSample>,
}

impl SimOutput {
    /// Mean of the per-lap averages.
    pub fn mean_power(&self) -> f64 {
        self.laps.iter().map(|l| l.p_avg).sum::<f64>() / self.laps.len() as f64
    }

    pub fn peak_power(&self) -> f64 {
        self.laps.iter().map(|l| l.p_peak).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn write_series<W: Write>(w: W, series: &[SeriesSample]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for s in series {
        wr.serialize(s).map_err(|e| Error::Parse { what: "time series".into(), msg: e.to_string() })?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Default)]
struct LapBuffer {
    t: Vec<f64>,
    p_gen: Vec<f64>,
    gamma_c: Vec<f64>,
    tension: Vec<f64>,
    spool_in: Vec<bool>,
}

impl LapBuffer {
    fn push(&mut self, t: f64, p_gen: f64, gamma_c: f64, tension: f64, spool_in: bool) {
        self.t.push(t);
        self.p_gen.push(p_gen);
        self.gamma_c.push(gamma_c);
        self.tension.push(tension);
        self.spool_in.push(spool_in);
    }

    fn metrics(&self, lap: usize, k_w: f64) -> Result<LapMetrics> {
        let n = self.t.len();
        let j = lap_objective(&self.t, &self.p_gen, &self.gamma_c, k_w)?;
        let dur = self.t[n - 1] - self.t[0];
        let trapz =
            |f: &[f64]| (1..n).map(|i| 0.5 * (f[i] + f[i - 1]) * (self.t[i] - self.t[i - 1])).sum::<f64>() / dur;
        let p_avg = trapz(&self.p_gen);
        let mut dips = 0;
        let mut i = 0;
        while i < n {
            if self.spool_in[i] {
                let start = i;
                while i < n && self.spool_in[i] {
                    i += 1;
                }
                let mean = self.p_gen[start..i].iter().sum::<f64>() / (i - start) as f64;
                if mean < p_avg {
                    dips += 1;
                }
            } else {
                i += 1;
            }
        }
        Ok(LapMetrics {
            lap,
            t_start: self.t[0],
            t_end: self.t[n - 1],
            p_avg,
            p_peak: self.p_gen.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            j,
            gamma_c_mean: trapz(&self.gamma_c),
            gamma_c_max: self.gamma_c.iter().copied().fold(0.0, f64::max),
            tension_mean: trapz(&self.tension),
            tension_peak: self.tension.iter().copied().fold(0.0, f64::max),
            spool_in_dips: dips,
        })
    }
}

/// Places the kite on the path at p = 0, nose along the path tangent, wing
/// normal radially outward, tether straight and unstretched.
pub fn start_on_path(sim: &Simulator, b: &BasisParams, radius: f64, speed: f64) -> SimState {
    let x = path_point(b, 0.0, radius);
    let er = x.normalize();
    let tangent = path_point(b, 1e-4, radius) - path_point(b, -1e-4, radius);
    let x_k = (tangent - er * er.dot(&tangent)).normalize();
    let y_k = er.cross(&x_k);
    let rot = nalgebra::Rotation3::from_basis_unchecked(&[x_k, y_k, er]);
    sim.initial_state(x, UnitQuaternion::from_rotation_matrix(&rot), x_k * speed)
}

/// Flies `settle_laps + n_laps` figure-8 laps along path `b` and returns
/// metrics for the last `n_laps`.
pub fn simulate_laps(
    props: &KiteProperties,
    b: &BasisParams,
    n_laps: usize,
    flow: &FlowEnv,
    cfg: &SimConfig,
) -> Result<SimOutput> {
    let mut series = Vec::new();
    let laps = simulate_traced(props, b, n_laps, flow, cfg, &mut series)?;
    Ok(SimOutput { laps, series })
}

/// As [`simulate_laps`], but the time series survives a failed run.
pub fn simulate_traced(
    props: &KiteProperties,
    b: &BasisParams,
    n_laps: usize,
    flow: &FlowEnv,
    cfg: &SimConfig,
    series: &mut Vec<SeriesSample>,
) -> Result<Vec<LapMetrics>> {
    if n_laps == 0 {
        return Err(Error::InvalidInput("at least one lap is required".into()));
    }
    let mut flight = Flight::new(props, b, flow, cfg)?;
    for _ in 0..cfg.settle_laps {
        flight.fly_lap(b, Some(series))?;
    }
    (0..n_laps)
        .map(|k| {
            let mut lap = flight.fly_lap(b, Some(series))?;
            lap.lap = k;
            Ok(lap)
        })
        .collect()
}

/// A continuing closed-loop flight; the path may change between laps.
pub struct Flight {
    sim: Simulator,
    cfg: SimConfig,
    flow: FlowEnv,
    state: SimState,
    l_t0: f64,
    fc: FlightController,
    flight: FlightCommand,
    winch: WinchCommand,
    gamma_c: f64,
    step_no: usize,
    /// Step index at which the controllers last ran.
    controlled_at: Option<usize>,
    recorded_at: Option<usize>,
    laps_done: usize,
}

impl Flight {
    /// Starts on path `b` at p = 0 with the configured initial speed.
    pub fn new(props: &KiteProperties, b: &BasisParams, flow: &FlowEnv, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        b.validate()?;
        let sim = Simulator::new(props.clone(), cfg.tether, *flow)?;
        let state = start_on_path(&sim, b, cfg.tether.length, cfg.initial_speed);
        Ok(Self {
            l_t0: state.l_t,
            fc: FlightController::new(cfg.controller.clone(), props),
            sim,
            cfg: cfg.clone(),
            flow: *flow,
            state,
            flight: FlightCommand::default(),
            winch: WinchCommand { v_spl: 0.0, elevator: 0.0, spool_in: false },
            gamma_c: 0.0,
            step_no: 0,
            controlled_at: None,
            recorded_at: None,
            laps_done: 0,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn laps_done(&self) -> usize {
        self.laps_done
    }

    fn control(&mut self, b: &BasisParams) -> Result<()> {
        let (cfg, flow, state) = (&self.cfg, &self.flow, &mut self.state);
        let (p, dist) = closest_param(b, &state.position, state.p, 0.15, 0.45);
        state.p = p.max(state.p);
        self.gamma_c = dist;
        if dist > cfg.abort_angle {
            return Err(Error::PathLost { time: state.t, angle: dist });
        }
        let dt_c = cfg.dt * cfg.control_every as f64;
        let inputs = FlightInputs {
            position: state.position,
            velocity: state.velocity(flow),
            attitude: state.attitude,
            omega: Vector3::new(state.v_r[3], state.v_r[4], state.v_r[5]),
            v_rel: Vector3::new(state.v_r[0], state.v_r[1], state.v_r[2]),
            p: state.p,
        };
        self.flight = self.fc.command(b, &inputs, flow.rho_w, dt_c);
        let target = winch_with_drift(state.p, state.l_t, self.l_t0, &cfg.controller, flow);
        let max_dv = cfg.controller.spool_accel_limit * dt_c;
        let v_spl = self.winch.v_spl + (target.v_spl - self.winch.v_spl).clamp(-max_dv, max_dv);
        self.winch = WinchCommand { v_spl, ..target };
        self.controlled_at = Some(self.step_no);
        Ok(())
    }

    /// Flies until the path position completes the next lap. The boundary
    /// sample closes this lap and opens the next one.
    pub fn fly_lap(&mut self, b: &BasisParams, mut series: Option<&mut Vec<SeriesSample>>) -> Result<LapMetrics> {
        b.validate()?;
        let mut buf = LapBuffer::default();
        let lap_start = self.state.t;
        let lap_end = TAU * (self.laps_done + 1) as f64;
        loop {
            if self.step_no % self.cfg.control_every == 0 && self.controlled_at != Some(self.step_no) {
                self.control(b)?;
            }
            let state = &self.state;
            let tension = self.sim.tether_forces(state).winch_tension();
            let p_gen = tension * self.winch.v_spl;
            buf.push(state.t, p_gen, self.gamma_c, tension, self.winch.spool_in);
            if let Some(series) = series.as_deref_mut() {
                let due = self.cfg.record_every > 0 && self.step_no % self.cfg.record_every == 0;
                if due && self.recorded_at != Some(self.step_no) {
                    self.recorded_at = Some(self.step_no);
                    series.push(SeriesSample {
                        t: state.t,
                        x: state.position.x,
                        y: state.position.y,
                        z: state.position.z,
                        tension,
                        v_spl: self.winch.v_spl,
                        p_gen,
                        gamma_c: self.gamma_c,
                        p: state.p,
                        l_t: state.l_t,
                        speed: state.v_r.fixed_rows::<3>(0).norm(),
                        alpha: (-state.v_r[2]).atan2(state.v_r[0]),
                        aileron: self.flight.aileron,
                        rudder: self.flight.rudder,
                        elevator: self.winch.elevator,
                    });
                }
            }
            if state.p >= lap_end {
                let lap = buf.metrics(self.laps_done, self.cfg.penalty_weight)?;
                self.laps_done += 1;
                return Ok(lap);
            }
            if state.t - lap_start > self.cfg.max_lap_time {
                return Err(Error::PathLost { time: state.t, angle: self.gamma_c });
            }
            let u = StepInputs { deflections: deflections(&self.flight, &self.winch), v_spl: self.winch.v_spl };
            self.sim.step(&mut self.state, &u, self.cfg.dt, self.cfg.blowup_bound)?;
            self.step_no += 1;
        }
    }
}
