//! Rigid-body and added-mass properties of the kite, and the hydrodynamic
//! surface layout.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydro::FoilCoeffs;

/// Control input driving a surface's lift increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlChannel {
    Aileron,
    Elevator,
    Rudder,
}

/// Control deflections (rad).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Deflections {
    pub aileron: f64,
    pub elevator: f64,
    pub rudder: f64,
}

impl Deflections {
    pub fn get(&self, ch: ControlChannel) -> f64 {
        match ch {
            ControlChannel::Aileron => self.aileron,
            ControlChannel::Elevator => self.elevator,
            ControlChannel::Rudder => self.rudder,
        }
    }
}

/// Lifting surface. Lift is resolved perpendicular to the local relative
/// velocity in the plane spanned by `chord_dir` and `normal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDef {
    pub name: String,
    /// Hydrodynamic center, body frame (m).
    pub r_a: Vector3<f64>,
    /// Unit chord direction pointing forward.
    pub chord_dir: Vector3<f64>,
    /// Unit normal; positive α turns the flow toward it.
    pub normal: Vector3<f64>,
    pub foil: FoilCoeffs,
    pub aspect_ratio: f64,
    /// Area as a fraction of the reference area.
    pub area_frac: f64,
    pub incidence: f64,
    /// Control channel, and ΔC_L per radian of deflection.
    pub control: Option<(ControlChannel, f64)>,
}

impl SurfaceDef {
    pub fn span_dir(&self) -> Vector3<f64> {
        self.normal.cross(&self.chord_dir)
    }
}

/// Drag-only slender body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyDrag {
    pub r_a: Vector3<f64>,
    /// Unit axis.
    pub axis: Vector3<f64>,
    pub axial_area: f64,
    pub axial_cd: f64,
    /// Planform area seen by cross-flow (m²).
    pub cross_area: f64,
    pub cross_cd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KiteProperties {
    /// Total mass including ballast (kg).
    pub mass: f64,
    /// Displaced volume (m³).
    pub volume: f64,
    /// Rigid-body inertia about the body origin (kg·m²).
    pub inertia: Matrix3<f64>,
    pub r_cg: Vector3<f64>,
    pub r_cb: Vector3<f64>,
    pub r_ta: Vector3<f64>,
    /// Added-mass diagonal (surge, sway, heave, roll, pitch, yaw).
    pub added_mass: [f64; 6],
    pub surfaces: Vec<SurfaceDef>,
    pub body: Option<BodyDrag>,
    /// Wing planform reference area (m²).
    pub s_ref: f64,
    pub span: f64,
    pub chord: f64,
}

pub(crate) fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

impl KiteProperties {
    /// Rigid-body mass matrix about the body origin plus added mass.
    pub fn mass_matrix(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        let ms = skew(&self.r_cg) * self.mass;
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() * self.mass));
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-ms));
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&ms);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.inertia);
        for i in 0..6 {
            m[(i, i)] += self.added_mass[i];
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volume > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("kite volume {} is not positive", self.volume)));
        }
        let m = self.mass_matrix();
        let sym = (m + m.transpose()) * 0.5;
        let min = sym.symmetric_eigenvalues().min();
        if !(min > 0.0) || (m - m.transpose()).amax() > 1e-9 * m.amax() {
            return Err(Error::NotPositiveDefinite(format!("kite mass matrix has eigenvalue {min:e}")));
        }
        for s in &self.surfaces {
            let ortho = s.chord_dir.dot(&s.normal).abs();
            if (s.chord_dir.norm() - 1.0).abs() > 1e-9 || (s.normal.norm() - 1.0).abs() > 1e-9 || ortho > 1e-9 {
                return Err(Error::InvalidInput(format!("surface {} axes are not orthonormal", s.name)));
            }
        }
        Ok(())
    }
}

/// Coriolis–centripetal matrix of a symmetric mass matrix, built so that
/// νᵀC(ν)ν = 0 for every ν.
pub fn coriolis(m: &Matrix6<f64>, nu: &Vector6<f64>) -> Matrix6<f64> {
    let n1 = nu.fixed_rows::<3>(0);
    let n2 = nu.fixed_rows::<3>(3);
    let a = m.fixed_view::<3, 3>(0, 0) * n1 + m.fixed_view::<3, 3>(0, 3) * n2;
    let b = m.fixed_view::<3, 3>(3, 0) * n1 + m.fixed_view::<3, 3>(3, 3) * n2;
    let sa = -skew(&a);
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&sa);
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&sa);
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-skew(&b)));
    c
}

/// (M_k, C(ν)) pair.
pub fn mass_and_coriolis(props: &KiteProperties, nu: &Vector6<f64>) -> Result<(Matrix6<f64>, Matrix6<f64>)> {
    props.validate()?;
    let m = props.mass_matrix();
    Ok((m, coriolis(&m, nu)))
}

/// Scaling of the tail and fuselage with the wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingRule {
    /// Horizontal stabilizer area / wing area.
    pub hstab_area: f64,
    /// Vertical stabilizer area / wing area.
    pub vstab_area: f64,
    pub hstab_ar: f64,
    pub vstab_ar: f64,
    /// Fuselage length / span, used when no fuselage is given.
    pub fuse_length: f64,
    /// Fuselage diameter / span, used when no fuselage is given.
    pub fuse_diameter: f64,
}

impl Default for ScalingRule {
    fn default() -> Self {
        Self {
            hstab_area: 0.25,
            vstab_area: 0.15,
            hstab_ar: 4.0,
            vstab_ar: 2.0,
            fuse_length: 0.75,
            fuse_diameter: 0.07,
        }
    }
}

/// Layout constants of the simulated airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirframeConfig {
    pub scaling: ScalingRule,
    /// Wing leading edge, fraction of fuselage length from the nose.
    pub wing_le_frac: f64,
    /// Tail surfaces, fraction of fuselage length from the nose.
    pub tail_frac: f64,
    /// Tether attachment depth below the wing quarter chord, in chords.
    pub attach_depth: f64,
    /// Tether attachment ahead of the wing quarter chord, in chords.
    pub attach_ahead: f64,
    pub aileron_gain: f64,
    pub elevator_gain: f64,
    pub rudder_gain: f64,
    pub hstab_incidence: f64,
    pub fuse_axial_cd: f64,
    pub fuse_cross_cd: f64,
    /// Wing section area / chord², for the displaced volume.
    pub wing_section_area: f64,
}

impl Default for AirframeConfig {
    fn default() -> Self {
        Self {
            scaling: ScalingRule::default(),
            wing_le_frac: 0.25,
            tail_frac: 0.95,
            attach_depth: 0.22,
            attach_ahead: 0.3,
            aileron_gain: 2.0,
            elevator_gain: 2.0,
            rudder_gain: 2.0,
            hstab_incidence: -0.26,
            fuse_axial_cd: 0.1,
            fuse_cross_cd: 0.6,
            wing_section_area: 0.0822,
        }
    }
}

/// Geometry and structural masses needed to assemble a simulation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KiteGeometry {
    pub span: f64,
    pub aspect_ratio: f64,
    pub fuse_diameter: f64,
    pub fuse_length: f64,
    pub m_wing: f64,
    pub m_fuse: f64,
}

impl KiteGeometry {
    /// Fuselage from the scaling rule.
    pub fn scaled(span: f64, aspect_ratio: f64, m_wing: f64, m_fuse: f64, rule: &ScalingRule) -> Self {
        Self {
            span,
            aspect_ratio,
            fuse_diameter: rule.fuse_diameter * span,
            fuse_length: rule.fuse_length * span,
            m_wing,
            m_fuse,
        }
    }
}

/// Displaced volumes of wing, h-stab, v-stab and hull with their centroids
/// (body frame).
fn volume_parts(geom: &KiteGeometry, cfg: &AirframeConfig) -> [(f64, Vector3<f64>); 4] {
    let (s, ar, d, l) = (geom.span, geom.aspect_ratio, geom.fuse_diameter, geom.fuse_length);
    let c = s / ar;
    let area = s * s / ar;
    let rule = &cfg.scaling;
    let b_h = (rule.hstab_area * area * rule.hstab_ar).sqrt();
    let c_h = rule.hstab_area * area / b_h;
    let b_v = (rule.vstab_area * area * rule.vstab_ar).sqrt();
    let c_v = rule.vstab_area * area / b_v;
    let x_tail = cfg.wing_le_frac * l - cfg.tail_frac * l;
    let x_fuse = cfg.wing_le_frac * l - 0.5 * l;
    [
        (cfg.wing_section_area * c * c * s, Vector3::new(-0.4 * c, 0.0, 0.0)),
        (cfg.wing_section_area * c_h * c_h * b_h, Vector3::new(x_tail - 0.15 * c_h, 0.0, 0.0)),
        (cfg.wing_section_area * c_v * c_v * b_v, Vector3::new(x_tail - 0.15 * c_v, 0.0, 0.5 * b_v)),
        (std::f64::consts::PI * (d / 2.0).powi(2) * l, Vector3::new(x_fuse, 0.0, 0.0)),
    ]
}

impl KiteGeometry {
    /// Total displaced volume V_kite (m³).
    pub fn displaced_volume(&self, cfg: &AirframeConfig) -> f64 {
        volume_parts(self, cfg).iter().map(|p| p.0).sum()
    }
}

struct Part {
    mass: f64,
    pos: Vector3<f64>,
    /// Central inertia.
    inertia: Matrix3<f64>,
}

fn symmetric_foil() -> FoilCoeffs {
    FoilCoeffs { c_l0: 0.0, c_lx: 0.0, ..FoilCoeffs::default() }
}

/// Assembles simulation properties. Ballast fills the gap to neutral
/// buoyancy at the center of buoyancy.
pub fn build_kite(geom: &KiteGeometry, foil: &FoilCoeffs, rho_w: f64, cfg: &AirframeConfig) -> Result<KiteProperties> {
    let (s, ar) = (geom.span, geom.aspect_ratio);
    let (d, l) = (geom.fuse_diameter, geom.fuse_length);
    if !(s > 0.0 && ar > 0.0 && d > 0.0 && l > 0.0) {
        return Err(Error::InvalidInput("kite geometry must be positive".into()));
    }
    let c = s / ar;
    let area = s * s / ar;
    let rule = &cfg.scaling;
    let s_h = rule.hstab_area * area;
    let b_h = (s_h * rule.hstab_ar).sqrt();
    let c_h = s_h / b_h;
    let s_v = rule.vstab_area * area;
    let b_v = (s_v * rule.vstab_ar).sqrt();
    let c_v = s_v / b_v;

    let x_nose = cfg.wing_le_frac * l;
    let x_tail = x_nose - cfg.tail_frac * l;
    let x_fuse = x_nose - 0.5 * l;
    let x_wing = -0.25 * c;

    let vol_parts = volume_parts(geom, cfg);
    let volume: f64 = vol_parts.iter().map(|p| p.0).sum();
    let r_cb = vol_parts.iter().fold(Vector3::zeros(), |acc, p| acc + p.1 * p.0) / volume;

    let structural = geom.m_wing + geom.m_fuse;
    let ballast = (rho_w * volume - structural).max(0.0);
    let parts = [
        Part {
            mass: geom.m_wing,
            pos: Vector3::new(-0.4 * c, 0.0, 0.0),
            inertia: Matrix3::from_diagonal(&Vector3::new(s * s / 12.0, c * c / 12.0, (s * s + c * c) / 12.0))
                * geom.m_wing,
        },
        Part {
            mass: geom.m_fuse,
            pos: Vector3::new(x_fuse, 0.0, 0.0),
            inertia: Matrix3::from_diagonal(&Vector3::new(
                d * d / 4.0,
                d * d / 8.0 + l * l / 12.0,
                d * d / 8.0 + l * l / 12.0,
            )) * geom.m_fuse,
        },
        Part { mass: ballast, pos: r_cb, inertia: Matrix3::zeros() },
    ];
    let mass: f64 = parts.iter().map(|p| p.mass).sum();
    if !(mass > 0.0) {
        return Err(Error::NotPositiveDefinite("kite has no mass".into()));
    }
    let r_cg = parts.iter().fold(Vector3::zeros(), |acc, p| acc + p.pos * p.mass) / mass;
    let inertia = parts.iter().fold(Matrix3::zeros(), |acc, p| {
        acc + p.inertia + (Matrix3::identity() * p.pos.norm_squared() - p.pos * p.pos.transpose()) * p.mass
    });

    // Strip-theory added mass of the plate-like surfaces and the hull.
    let pi = std::f64::consts::PI;
    let plate = |chord: f64, span: f64| rho_w * pi * (chord / 2.0).powi(2) * span;
    let hull = rho_w * pi * (d / 2.0).powi(2) * l;
    let wing_heave = plate(c, s);
    let h_heave = plate(c_h, b_h);
    let v_sway = plate(c_v, b_v);
    let x_h = x_tail - 0.25 * c_h;
    let added_mass = [
        0.05 * rho_w * volume,
        hull + v_sway,
        wing_heave + h_heave + hull,
        rho_w * pi * c * c / 4.0 * s.powi(3) / 12.0 + v_sway * (0.5 * b_v).powi(2),
        wing_heave * x_wing * x_wing + h_heave * x_h * x_h + hull * (l * l / 12.0 + x_fuse * x_fuse),
        v_sway * x_h * x_h + hull * (l * l / 12.0 + x_fuse * x_fuse),
    ];

    let fwd = Vector3::x();
    let up = Vector3::z();
    let surfaces = vec![
        SurfaceDef {
            name: "port_wing".into(),
            r_a: Vector3::new(x_wing, 0.25 * s, 0.0),
            chord_dir: fwd,
            normal: up,
            foil: *foil,
            aspect_ratio: ar,
            area_frac: 0.5,
            incidence: 0.0,
            control: Some((ControlChannel::Aileron, cfg.aileron_gain)),
        },
        SurfaceDef {
            name: "starboard_wing".into(),
            r_a: Vector3::new(x_wing, -0.25 * s, 0.0),
            chord_dir: fwd,
            normal: up,
            foil: *foil,
            aspect_ratio: ar,
            area_frac: 0.5,
            incidence: 0.0,
            control: Some((ControlChannel::Aileron, -cfg.aileron_gain)),
        },
        SurfaceDef {
            name: "horizontal_stabilizer".into(),
            r_a: Vector3::new(x_h, 0.0, 0.0),
            chord_dir: fwd,
            normal: up,
            foil: symmetric_foil(),
            aspect_ratio: rule.hstab_ar,
            area_frac: rule.hstab_area,
            incidence: cfg.hstab_incidence,
            control: Some((ControlChannel::Elevator, cfg.elevator_gain)),
        },
        SurfaceDef {
            name: "vertical_stabilizer".into(),
            r_a: Vector3::new(x_tail - 0.25 * c_v, 0.0, 0.5 * b_v),
            chord_dir: fwd,
            normal: Vector3::y(),
            foil: symmetric_foil(),
            aspect_ratio: rule.vstab_ar,
            area_frac: rule.vstab_area,
            incidence: 0.0,
            control: Some((ControlChannel::Rudder, cfg.rudder_gain)),
        },
    ];
    let body = BodyDrag {
        r_a: Vector3::new(x_fuse, 0.0, 0.0),
        axis: fwd,
        axial_area: pi * (d / 2.0).powi(2),
        axial_cd: cfg.fuse_axial_cd,
        cross_area: d * l,
        cross_cd: cfg.fuse_cross_cd,
    };
    let props = KiteProperties {
        mass,
        volume,
        inertia,
        r_cg,
        r_cb,
        r_ta: Vector3::new(x_wing + cfg.attach_ahead * c, 0.0, -cfg.attach_depth * c),
        added_mass,
        surfaces,
        body: Some(body),
        s_ref: area,
        span: s,
        chord: c,
    };
    props.validate()?;
    Ok(props)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point_mass() -> KiteProperties {
        KiteProperties {
            mass: 10.0,
            volume: 0.01,
            inertia: Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            r_cg: Vector3::zeros(),
            r_cb: Vector3::zeros(),
            r_ta: Vector3::zeros(),
            added_mass: [0.0; 6],
            surfaces: vec![],
            body: None,
            s_ref: 1.0,
            span: 1.0,
            chord: 1.0,
        }
    }

    #[test]
    fn point_mass_matrix_is_block_diagonal() {
        let m = point_mass().mass_matrix();
        for i in 0..3 {
            assert_eq!(m[(i, i)], 10.0);
            for j in 3..6 {
                assert_eq!(m[(i, j)], 0.0);
                assert_eq!(m[(j, i)], 0.0);
            }
        }
        assert_eq!(m[(4, 4)], 2.0);
    }

    #[test]
    fn coriolis_is_energy_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let mut p = point_mass();
            p.mass = rng.random_range(1.0..5e3);
            p.r_cg =
                Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            // Parallel-axis shift of the central inertia to the body origin.
            p.inertia -= skew(&p.r_cg) * skew(&p.r_cg) * p.mass;
            p.added_mass = std::array::from_fn(|_| rng.random_range(0.0..1e4));
            let nu = Vector6::from_fn(|_, _| rng.random_range(-10.0..10.0));
            let (m, c) = mass_and_coriolis(&p, &nu).unwrap();
            let e = nu.dot(&(c * nu)).abs();
            assert!(e <= 1e-9 * nu.norm_squared() * m.norm(), "{e}");
        }
    }

    #[test]
    fn degenerate_mass_is_rejected() {
        let mut p = point_mass();
        p.mass = 0.0;
        assert!(matches!(p.validate(), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn built_kite_is_neutrally_ballasted() {
        let geom = KiteGeometry::scaled(8.5, 6.0, 600.0, 380.0, &ScalingRule::default());
        let k = build_kite(&geom, &FoilCoeffs::default(), 1000.0, &AirframeConfig::default()).unwrap();
        assert_relative_eq!(k.mass, 1000.0 * k.volume, max_relative = 1e-12);
        assert_eq!(k.surfaces.len(), 4);
        assert!(k.body.is_some());
        assert!(k.r_cg.x < 0.0);
    }
}
