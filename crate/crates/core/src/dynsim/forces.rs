//! Generalized hydrodynamic, hydrostatic and tether loads on the kite,
//! expressed in the body frame about the body origin.

use nalgebra::{UnitQuaternion, Vector3, Vector6};

use super::kite::{BodyDrag, Deflections, KiteProperties, SurfaceDef};
use crate::hydro::FlowEnv;

/// Lift and drag of one surface moving at `w` (body frame, relative to
/// water). Returns the force in the body frame.
pub fn surface_force(s: &SurfaceDef, w: &Vector3<f64>, s_ref: f64, rho_w: f64, defl: &Deflections) -> Vector3<f64> {
    let speed2 = w.norm_squared();
    if speed2 == 0.0 {
        return Vector3::zeros();
    }
    let w_hat = w / speed2.sqrt();
    let alpha = (-w.dot(&s.normal)).atan2(w.dot(&s.chord_dir)) + s.incidence;
    let mut c_l = s.foil.lift_coeff(s.aspect_ratio, alpha);
    if let Some((ch, gain)) = s.control {
        c_l += gain * defl.get(ch);
    }
    let c_d = s.foil.drag_coeff(s.aspect_ratio, c_l);
    let lift_dir = w_hat.cross(&s.span_dir());
    let n = lift_dir.norm();
    // Flow along the span produces no lift direction.
    let lift_dir = if n > 1e-12 { lift_dir / n } else { Vector3::zeros() };
    (lift_dir * c_l - w_hat * c_d) * (0.5 * rho_w * s_ref * s.area_frac * speed2)
}

fn body_drag(b: &BodyDrag, w: &Vector3<f64>, rho_w: f64) -> Vector3<f64> {
    let wa = w.dot(&b.axis);
    let wc = w - b.axis * wa;
    -(b.axis * (b.axial_cd * b.axial_area * wa.abs() * wa) + wc * (b.cross_cd * b.cross_area * wc.norm()))
        * (0.5 * rho_w)
}

fn wrench(r: &Vector3<f64>, f: &Vector3<f64>) -> Vector6<f64> {
    let m = r.cross(f);
    Vector6::new(f.x, f.y, f.z, m.x, m.y, m.z)
}

/// Hydrodynamic loads from the surfaces and hull at body-frame relative
/// velocity `v_r` = (linear, angular).
pub fn hydro_loads(props: &KiteProperties, v_r: &Vector6<f64>, rho_w: f64, defl: &Deflections) -> Vector6<f64> {
    let v = Vector3::new(v_r[0], v_r[1], v_r[2]);
    let w = Vector3::new(v_r[3], v_r[4], v_r[5]);
    let mut tau = Vector6::zeros();
    for s in &props.surfaces {
        let ws = v + w.cross(&s.r_a);
        tau += wrench(&s.r_a, &surface_force(s, &ws, props.s_ref, rho_w, defl));
    }
    if let Some(b) = &props.body {
        let wb = v + w.cross(&b.r_a);
        tau += wrench(&b.r_a, &body_drag(b, &wb, rho_w));
    }
    tau
}

/// Net generalized force τ in the body frame. `f_tether` is the inertial
/// tether force applied at the attachment point.
pub fn net_force_moment(
    attitude: &UnitQuaternion<f64>,
    v_r: &Vector6<f64>,
    props: &KiteProperties,
    flow: &FlowEnv,
    defl: &Deflections,
    f_tether: &Vector3<f64>,
) -> Vector6<f64> {
    let to_body = attitude.inverse();
    let up = to_body * Vector3::z();
    let buoyancy = up * (flow.rho_w * props.volume * flow.g);
    let weight = -up * (props.mass * flow.g);
    hydro_loads(props, v_r, flow.rho_w, defl)
        + wrench(&props.r_ta, &(to_body * f_tether))
        + wrench(&props.r_cb, &buoyancy)
        + wrench(&props.r_cg, &weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsim::kite::ControlChannel;
    use crate::hydro::FoilCoeffs;
    use approx::assert_relative_eq;
    use nalgebra::Matrix3;

    fn wing_only(control: Option<(ControlChannel, f64)>) -> KiteProperties {
        KiteProperties {
            mass: 10.0,
            volume: 0.01,
            inertia: Matrix3::identity(),
            r_cg: Vector3::zeros(),
            r_cb: Vector3::zeros(),
            r_ta: Vector3::zeros(),
            added_mass: [0.0; 6],
            surfaces: vec![SurfaceDef {
                name: "wing".into(),
                r_a: Vector3::new(-0.5, 0.0, 0.0),
                chord_dir: Vector3::x(),
                normal: Vector3::z(),
                foil: FoilCoeffs::default(),
                aspect_ratio: 6.0,
                area_frac: 1.0,
                incidence: 0.0,
                control,
            }],
            body: None,
            s_ref: 2.0,
            span: 3.0,
            chord: 0.5,
        }
    }

    #[test]
    fn neutral_and_still_is_force_free() {
        let p = KiteProperties { volume: 0.01, mass: 10.0, ..wing_only(None) };
        let tau = net_force_moment(
            &UnitQuaternion::from_euler_angles(0.3, -0.2, 1.0),
            &Vector6::zeros(),
            &p,
            &FlowEnv::default(),
            &Deflections::default(),
            &Vector3::zeros(),
        );
        assert!(tau.norm() < 1e-12, "{tau}");
    }

    #[test]
    fn axial_flow_hand_value() {
        let p = wing_only(None);
        let v = 3.0;
        let tau = hydro_loads(&p, &Vector6::new(v, 0.0, 0.0, 0.0, 0.0, 0.0), 1000.0, &Deflections::default());
        let q = 0.5 * 1000.0 * 2.0 * v * v;
        let f = FoilCoeffs::default();
        let cd = f.drag_coeff(6.0, 0.16);
        assert_relative_eq!(tau[0], -q * cd, max_relative = 1e-12);
        assert_relative_eq!(tau[2], q * 0.16, max_relative = 1e-12);
        assert_eq!(tau[1], 0.0);
    }

    #[test]
    fn elevator_changes_only_pitch_plane() {
        let p = wing_only(Some((ControlChannel::Elevator, 2.0)));
        let nu = Vector6::new(3.0, 0.0, -0.2, 0.0, 0.0, 0.0);
        let a = hydro_loads(&p, &nu, 1000.0, &Deflections::default());
        let b = hydro_loads(&p, &nu, 1000.0, &Deflections { elevator: 0.1, ..Default::default() });
        let d = b - a;
        assert!(d[0].abs() > 0.0 && d[2].abs() > 0.0 && d[4].abs() > 0.0);
        for i in [1, 3, 5] {
            assert_eq!(d[i], 0.0);
        }
    }

    #[test]
    fn positive_alpha_raises_lift() {
        let p = wing_only(None);
        // Kite sinking relative to water: flow from below.
        let lo = hydro_loads(&p, &Vector6::new(3.0, 0.0, 0.0, 0.0, 0.0, 0.0), 1000.0, &Deflections::default());
        let hi = hydro_loads(&p, &Vector6::new(3.0, 0.0, -0.3, 0.0, 0.0, 0.0), 1000.0, &Deflections::default());
        assert!(hi[2] > lo[2]);
    }
}
