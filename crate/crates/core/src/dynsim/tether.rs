//! Lumped-mass tether: links are spring-dampers that carry no compression,
//! with drag and net weight lumped half to each end node.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydro::FlowEnv;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TetherProperties {
    /// Number of links.
    pub n_links: usize,
    pub radius: f64,
    pub density: f64,
    pub youngs_modulus: f64,
    pub damping_ratio: f64,
    pub drag_coeff: f64,
    /// Initial un-spooled length (m).
    pub length: f64,
}

impl Default for TetherProperties {
    fn default() -> Self {
        Self {
            n_links: 5,
            radius: 0.05,
            density: 1300.0,
            youngs_modulus: 3.8e9,
            damping_ratio: 0.05,
            drag_coeff: 1.0,
            length: 125.0,
        }
    }
}

impl TetherProperties {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_links >= 1
            && self.radius > 0.0
            && self.density > 0.0
            && self.youngs_modulus > 0.0
            && self.damping_ratio > 0.0
            && self.drag_coeff > 0.0
            && self.length > 0.0;
        if !ok {
            return Err(Error::InvalidInput("tether properties must be positive with at least one link".into()));
        }
        Ok(())
    }

    pub fn cross_section(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    /// Mass of one link at total length `l_t`.
    pub fn link_mass(&self, l_t: f64) -> f64 {
        self.density * self.cross_section() * l_t / self.n_links as f64
    }

    /// Axial stiffness of one link at total length `l_t`.
    pub fn link_stiffness(&self, l_t: f64) -> f64 {
        self.youngs_modulus * self.cross_section() * self.n_links as f64 / l_t
    }

    pub fn link_damping(&self, l_t: f64) -> f64 {
        2.0 * self.damping_ratio * (self.link_stiffness(l_t) * self.link_mass(l_t)).sqrt()
    }
}

/// Forces from the tether on its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TetherForces {
    /// One entry per node, winch (index 0) to kite attachment (last).
    pub nodes: Vec<Vector3<f64>>,
    /// Tension magnitude per link, winch link first.
    pub tensions: Vec<f64>,
}

impl TetherForces {
    pub fn winch_tension(&self) -> f64 {
        self.tensions[0]
    }

    pub fn on_kite(&self) -> Vector3<f64> {
        self.nodes[self.nodes.len() - 1]
    }
}

/// Tension along a link from node a to node b, positive when stretched.
/// Zero for slack links whatever the rate.
pub fn link_tension(rel: &Vector3<f64>, rel_vel: &Vector3<f64>, rest: f64, k: f64, c: f64) -> f64 {
    let len = rel.norm();
    if len < rest || len == 0.0 {
        return 0.0;
    }
    let rate = rel.dot(rel_vel) / len;
    (k * (len - rest) + c * rate).max(0.0)
}

/// Node forces for positions `pos` and velocities `vel` (both including
/// the winch and attachment ends) at total un-spooled length `l_t`.
pub fn tether_node_forces(
    pos: &[Vector3<f64>],
    vel: &[Vector3<f64>],
    l_t: f64,
    tether: &TetherProperties,
    flow: &FlowEnv,
) -> TetherForces {
    let n = tether.n_links;
    debug_assert_eq!(pos.len(), n + 1);
    debug_assert_eq!(vel.len(), n + 1);
    let rest = l_t / n as f64;
    let k = tether.link_stiffness(l_t);
    let c = tether.link_damping(l_t);
    let area = tether.cross_section();
    let u_f = Vector3::new(flow.v, 0.0, 0.0);
    let half_net_weight = 0.5 * (flow.rho_w - tether.density) * area * rest * flow.g;

    let mut nodes = vec![Vector3::zeros(); n + 1];
    let mut tensions = Vec::with_capacity(n);
    for i in 0..n {
        let rel = pos[i + 1] - pos[i];
        let rel_vel = vel[i + 1] - vel[i];
        let t = link_tension(&rel, &rel_vel, rest, k, c);
        tensions.push(t);
        let len = rel.norm();
        if t > 0.0 {
            let f = rel * (t / len);
            nodes[i] += f;
            nodes[i + 1] -= f;
        }

        let app = u_f - 0.5 * (vel[i] + vel[i + 1]);
        let speed = app.norm();
        if speed > 0.0 && len > 0.0 {
            let sin_t = rel.cross(&app).norm() / (len * speed);
            let projected = 2.0 * tether.radius * len * sin_t;
            let drag = app * (0.5 * flow.rho_w * tether.drag_coeff * projected * speed);
            nodes[i] += drag * 0.5;
            nodes[i + 1] += drag * 0.5;
        }
        let w = Vector3::new(0.0, 0.0, half_net_weight);
        nodes[i] += w;
        nodes[i + 1] += w;
    }
    TetherForces { nodes, tensions }
}
