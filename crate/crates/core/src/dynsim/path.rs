//! Figure-8 target path on the sphere (lemniscate of Booth in azimuth and
//! elevation).

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::ilc::BasisParams;

/// Azimuth Φ and elevation Θ of the path at position `p`.
pub fn path_eval(b: &BasisParams, p: f64) -> (f64, f64) {
    let r = b.b1 / b.b2;
    let (s, c) = p.sin_cos();
    let den = 1.0 + r * r * c * c;
    (r * r * s * c / den + b.b3, b.b1 * s / den + b.b4)
}

/// Unit direction for azimuth/elevation; x downstream, z up.
pub fn direction(azimuth: f64, elevation: f64) -> Vector3<f64> {
    let (sa, ca) = azimuth.sin_cos();
    let (se, ce) = elevation.sin_cos();
    Vector3::new(ce * ca, ce * sa, se)
}

/// Path point at radius `radius`.
pub fn path_point(b: &BasisParams, p: f64, radius: f64) -> Vector3<f64> {
    let (az, el) = path_eval(b, p);
    direction(az, el) * radius
}

/// Local tangent-plane basis at a direction: (north, east-like, radial)
/// with north along increasing elevation and east along increasing azimuth.
pub fn local_frame(x: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let er = x.normalize();
    let az = er.y.atan2(er.x);
    let el = er.z.clamp(-1.0, 1.0).asin();
    let e_az = Vector3::new(-az.sin(), az.cos(), 0.0);
    let e_el = Vector3::new(-el.sin() * az.cos(), -el.sin() * az.sin(), el.cos());
    (e_el, e_az, er)
}

/// Angle of a tangent vector, counter-clockwise about the outward radial from
/// local north.
pub fn velocity_angle(x: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    let (north, _, er) = local_frame(x);
    er.dot(&north.cross(v)).atan2(north.dot(v))
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Angle between two directions.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Path position closest (in angle) to direction `x`, searched forward from
/// `p_prev` over [p_prev − back, p_prev + ahead]. Returned unwrapped.
pub fn closest_param(b: &BasisParams, x: &Vector3<f64>, p_prev: f64, back: f64, ahead: f64) -> (f64, f64) {
    let xr = x.normalize();
    let dist = |p: f64| angle_between(&xr, &path_point(b, p, 1.0));
    let n = 48;
    let step = (back + ahead) / n as f64;
    let (mut best_p, mut best_d) = (p_prev, dist(p_prev));
    for i in 0..=n {
        let p = p_prev - back + step * i as f64;
        let d = dist(p);
        if d < best_d {
            best_d = d;
            best_p = p;
        }
    }
    // Golden-section polish inside the winning cell.
    let (mut lo, mut hi) = (best_p - step, best_p + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    for _ in 0..30 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dist(x2);
        }
    }
    let p = 0.5 * (lo + hi);
    let d = dist(p);
    if d < best_d {
        (p, d)
    } else {
        (best_p, best_d)
    }
}
