//! Minimum-mass sizing of a thin cylindrical fuselage shell against shear,
//! hoop and bending-buckling stress limits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::DesignBounds;
use crate::error::{ensure, Error, Result};
use crate::wing_struct::Material;

/// Margin reported for an unloaded constraint.
pub const UNLOADED_MARGIN: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuselageDesign {
    /// Diameter (m).
    pub d: f64,
    /// Length (m).
    pub l: f64,
    /// Shell thickness, fraction of diameter.
    pub t_sf: f64,
}

impl FuselageDesign {
    pub fn thickness(&self) -> f64 {
        self.t_sf * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuselageLoads {
    /// Net transverse load at the attachment points (N).
    pub f_z_sum: f64,
    /// Pressure difference across the shell (Pa).
    pub p_diff: f64,
    /// Peak bending moment about the tether attachment (N·m).
    pub m_max: f64,
    /// Allowable fraction of the reference stresses.
    pub zeta: f64,
}

impl FuselageLoads {
    pub fn validate(&self) -> Result<()> {
        ensure(self.f_z_sum >= 0.0 && self.p_diff >= 0.0 && self.m_max >= 0.0, || {
            "fuselage loads must be non-negative".into()
        })?;
        ensure(self.zeta > 0.0 && self.zeta <= 1.0, || format!("zeta must lie in (0, 1], got {}", self.zeta))
    }
}

/// Thin-wall bending section modulus π·(D/2)²·t.
pub fn section_modulus(d: f64, t: f64) -> Result<f64> {
    if t > d / 10.0 {
        return Err(Error::ThinWallViolation { t, limit: d / 10.0 });
    }
    Ok(PI * (d / 2.0).powi(2) * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMargins {
    pub shear: f64,
    pub hoop: f64,
    pub buckling: f64,
}

impl ConstraintMargins {
    pub fn feasible(&self) -> bool {
        self.min() >= 0.0
    }

    pub fn min(&self) -> f64 {
        self.shear.min(self.hoop).min(self.buckling)
    }
}

fn margin(allowable: f64, actual: f64) -> f64 {
    if actual == 0.0 {
        UNLOADED_MARGIN
    } else {
        allowable / actual - 1.0
    }
}

/// Allowable-over-actual minus one for each stress constraint.
pub fn constraint_margins(
    design: &FuselageDesign,
    loads: &FuselageLoads,
    material: &Material,
) -> Result<ConstraintMargins> {
    let t = design.thickness();
    ensure(t > 0.0, || "fuselage shell thickness must be positive".into())?;
    let s = section_modulus(design.d, t)?;
    let shear = loads.f_z_sum / (t * design.l);
    let hoop = loads.p_diff * design.d / (2.0 * t);
    let buckling = loads.m_max.abs() / s;
    Ok(ConstraintMargins {
        shear: margin(loads.zeta * material.sigma_yield, shear),
        hoop: margin(loads.zeta * material.sigma_05(), hoop),
        buckling: margin(loads.zeta * material.sigma_yield, buckling),
    })
}

/// Shell mass from the exact annulus area.
pub fn fuse_mass(design: &FuselageDesign, material: &Material) -> f64 {
    let t = design.thickness();
    let inner = design.d - 2.0 * t;
    material.rho_m * PI / 4.0 * (design.d * design.d - inner * inner) * design.l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveConstraint {
    Shear,
    Hoop,
    Buckling,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfdtResult {
    pub design: FuselageDesign,
    pub m_fuse: f64,
    pub active: ActiveConstraint,
    pub margins: ConstraintMargins,
}

/// Minimum thickness (m) meeting each constraint, in (shear, hoop, buckling)
/// order.
pub fn min_thicknesses(d: f64, l: f64, loads: &FuselageLoads, material: &Material) -> [f64; 3] {
    let z = loads.zeta;
    [
        loads.f_z_sum / (l * z * material.sigma_yield),
        loads.p_diff * d / (2.0 * z * material.sigma_05()),
        loads.m_max.abs() / (PI * (d / 2.0).powi(2) * z * material.sigma_yield),
    ]
}

/// Thinnest admissible shell for a fixed hull; mass is increasing in
/// thickness, so this is the mass optimum.
pub fn sfdt_optimize(
    d: f64,
    l: f64,
    loads: &FuselageLoads,
    material: &Material,
    bounds: &DesignBounds,
) -> Result<SfdtResult> {
    ensure(d > 0.0 && l > 0.0, || format!("hull dimensions must be positive, got D = {d}, L = {l}"))?;
    loads.validate()?;
    let mins = min_thicknesses(d, l, loads, material);
    let floor = bounds.t_sf[0] * d;
    let (mut active, mut t) = (ActiveConstraint::LowerBound, floor);
    for (kind, tk) in
        [ActiveConstraint::Shear, ActiveConstraint::Hoop, ActiveConstraint::Buckling].into_iter().zip(mins)
    {
        if tk > t {
            t = tk;
            active = kind;
        }
    }
    let ceiling = bounds.t_sf[1] * d;
    if t > ceiling {
        return Err(Error::Infeasible(format!(
            "fuselage needs {:.3}% of D ({active:?}), above the {:.3}% bound",
            100.0 * t / d,
            100.0 * bounds.t_sf[1]
        )));
    }
    let design = FuselageDesign { d, l, t_sf: t / d };
    Ok(SfdtResult {
        design,
        m_fuse: fuse_mass(&design, material),
        active,
        margins: constraint_margins(&design, loads, material)?,
    })
}

/// Assumptions that turn kite-level forces into fuselage loads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuselageLoadCase {
    /// Pressure difference (Pa).
    pub p_diff: f64,
    pub zeta: f64,
    /// Tail position as a fraction of fuselage length from the nose.
    pub tail_frac: f64,
    /// Wing leading edge position as a fraction of fuselage length.
    pub wing_le_frac: f64,
    /// Fixed transverse load (N), overriding the rated-lift rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_z_sum: Option<f64>,
    /// Fixed bending moment (N·m), overriding the stabilizer-lift rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<f64>,
}

impl Default for FuselageLoadCase {
    fn default() -> Self {
        Self { p_diff: 2500.0, zeta: 0.5, tail_frac: 0.95, wing_le_frac: 0.25, f_z_sum: None, m_max: None }
    }
}

impl FuselageLoadCase {
    pub fn validate(&self) -> Result<()> {
        ensure(self.p_diff >= 0.0, || "p_diff must be non-negative".into())?;
        ensure(self.zeta > 0.0 && self.zeta <= 1.0, || format!("zeta must lie in (0, 1], got {}", self.zeta))?;
        ensure((0.0..=1.0).contains(&self.tail_frac) && (0.0..=1.0).contains(&self.wing_le_frac), || {
            "fuselage station fractions must lie in [0, 1]".into()
        })
    }

    /// Loads from the rated wing lift and horizontal-stabilizer lift. The
    /// moment arm runs from the attachment under the wing quarter-chord to the
    /// tail.
    pub fn loads(&self, wing_lift: f64, hstab_lift: f64, fuse_length: f64, chord: f64) -> FuselageLoads {
        let attach = self.wing_le_frac * fuse_length + 0.25 * chord;
        let arm = (self.tail_frac * fuse_length - attach).abs();
        FuselageLoads {
            f_z_sum: self.f_z_sum.unwrap_or(wing_lift + hstab_lift),
            p_diff: self.p_diff,
            m_max: self.m_max.unwrap_or(hstab_lift.abs() * arm),
            zeta: self.zeta,
        }
    }
}
