//! Spar-and-shell wing sections and minimum-mass structural sizing under a
//! tip-deflection limit.
//!
//! The section is the foil outline minus an inward offset by the shell
//! thickness, with the offset region restored inside each vertical spar web.
//! All integrals are exact for the discretized outline.

use serde::{Deserialize, Serialize};

use crate::airfoil::AirfoilSection;
use crate::bounds::{contains, DesignBounds};
use crate::error::{ensure, Error, Result};
use crate::geometry::{clip_strip, miter_offset, moments, trim_apex_loop, Moments, Pt};
use crate::hydro::WingPlanform;

/// Isotropic structural material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    /// Density (kg/m³).
    pub rho_m: f64,
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    /// Yield stress (Pa).
    pub sigma_yield: f64,
    /// Stress at 0.5% elongation (Pa). Derived as min(0.005·E, σ_yield) when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_05: Option<f64>,
}

impl Default for Material {
    /// Al 6061.
    fn default() -> Self {
        Self { rho_m: 2700.0, youngs_modulus: 6.89e10, sigma_yield: 2.7e8, sigma_05: None }
    }
}

impl Material {
    pub fn sigma_05(&self) -> f64 {
        self.sigma_05.unwrap_or_else(|| (0.005 * self.youngs_modulus).min(self.sigma_yield))
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.rho_m > 0.0 && self.youngs_modulus > 0.0 && self.sigma_yield > 0.0, || {
            "material properties must be positive".into()
        })?;
        let s05 = self.sigma_05();
        ensure(s05 > 0.0 && s05 <= self.sigma_yield, || format!("sigma_05 = {s05} must lie in (0, sigma_yield]"))
    }
}

/// Chordwise spar stations (fraction of chord from the leading edge).
pub fn spar_stations(n_sp: u8) -> Result<&'static [f64]> {
    match n_sp {
        1 => Ok(&[0.25]),
        2 => Ok(&[0.10, 0.40]),
        3 => Ok(&[0.15, 0.30, 0.60]),
        n => Err(Error::InvalidInput(format!("spar count must be 1..=3, got {n}"))),
    }
}

/// Structural decision variables of the wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WingStructureDesign {
    pub n_sp: u8,
    /// Spar web width, fraction of chord.
    pub t_sp: f64,
    /// Shell thickness, fraction of max section thickness.
    pub t_sw: f64,
}

impl WingStructureDesign {
    pub fn within(&self, b: &DesignBounds) -> bool {
        (b.n_sp[0]..=b.n_sp[1]).contains(&self.n_sp) && contains(b.t_sp, self.t_sp) && contains(b.t_sw, self.t_sw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionProperties {
    /// Structural cross-section area (m²).
    pub area: f64,
    /// Second moment of area about the horizontal neutral axis (m⁴).
    pub inertia: f64,
    /// Height of the structural centroid above the chord line (m).
    pub centroid_y: f64,
}

/// Unit-chord outline with cached integrals, reused across many section
/// evaluations.
#[derive(Debug, Clone)]
pub struct SectionModel {
    outline: Vec<Pt>,
    outer: Moments,
    thickness: f64,
    le_radius: f64,
}

impl SectionModel {
    pub fn new(airfoil: &AirfoilSection) -> Result<Self> {
        let outline = airfoil.outline()?;
        let profile = airfoil.profile()?;
        let outer = moments(&outline);
        Ok(Self { outline, outer, thickness: profile.thickness, le_radius: profile.le_radius() })
    }

    /// Outline area of the unit-chord foil.
    pub fn outline_area(&self) -> f64 {
        self.outer.area
    }

    /// Inner boundary of a unit-chord shell of thickness `t_sw` (fraction of
    /// max thickness).
    fn inner_ring(&self, t_sw: f64) -> Result<Vec<Pt>> {
        let d = t_sw * self.thickness;
        if d == 0.0 {
            return Ok(self.outline.clone());
        }
        if d >= self.le_radius {
            return Err(Error::Geometry(format!(
                "shell thickness {d:.5}c reaches the leading-edge radius {:.5}c",
                self.le_radius
            )));
        }
        let inner = trim_apex_loop(&miter_offset(&self.outline, d), 0);
        if moments(&inner).area <= 0.0 {
            return Err(Error::Geometry(format!("shell thickness {d:.5}c leaves no interior")));
        }
        Ok(inner)
    }

    fn material(&self, inner: &[Pt], n_sp: u8, t_sp: f64) -> Result<Moments> {
        // Merge overlapping spar slabs, then remove the interior in each gap.
        let half = 0.5 * t_sp;
        let mut slabs: Vec<[f64; 2]> = Vec::with_capacity(3);
        if t_sp > 0.0 {
            for &x in spar_stations(n_sp)? {
                match slabs.last_mut() {
                    Some(last) if x - half <= last[1] => last[1] = x + half,
                    _ => slabs.push([x - half, x + half]),
                }
            }
        } else {
            spar_stations(n_sp)?;
        }
        let mut lo = f64::NEG_INFINITY;
        let mut out = self.outer;
        for slab in slabs.iter().copied().chain(std::iter::once([f64::INFINITY, f64::INFINITY])) {
            let gap = clip_strip(inner, lo, slab[0]);
            out = out - moments(&gap);
            lo = slab[1];
        }
        Ok(out)
    }

    fn scaled(m: Moments, chord: f64) -> SectionProperties {
        let area = m.area.max(0.0) * chord * chord;
        if area == 0.0 {
            return SectionProperties { area: 0.0, inertia: 0.0, centroid_y: 0.0 };
        }
        let ybar = m.first / m.area;
        let inertia = (m.second - m.area * ybar * ybar).max(0.0) * chord.powi(4);
        SectionProperties { area, inertia, centroid_y: ybar * chord }
    }

    pub fn properties(&self, chord: f64, design: &WingStructureDesign) -> Result<SectionProperties> {
        ensure(chord > 0.0 && chord.is_finite(), || format!("chord must be positive, got {chord}"))?;
        ensure(design.t_sp >= 0.0 && design.t_sw >= 0.0, || "thicknesses must be non-negative".into())?;
        let inner = self.inner_ring(design.t_sw)?;
        Ok(Self::scaled(self.material(&inner, design.n_sp, design.t_sp)?, chord))
    }
}

/// Section properties of a spar-and-shell wing at chord `chord`.
pub fn section_properties(
    airfoil: &AirfoilSection,
    chord: f64,
    design: &WingStructureDesign,
) -> Result<SectionProperties> {
    SectionModel::new(airfoil)?.properties(chord, design)
}

/// Structural mass ρ_m·s·A of a prismatic wing.
pub fn wing_mass(
    chord: f64,
    span: f64,
    design: &WingStructureDesign,
    model: &SectionModel,
    material: &Material,
) -> Result<f64> {
    Ok(material.rho_m * span * model.properties(chord, design)?.area)
}

/// Second moment needed to keep the tip deflection of each half-wing, loaded
/// by `f_wing` at a = s/4, below `delta_max`.
pub fn required_inertia(f_wing: f64, span: f64, delta_max: f64, youngs_modulus: f64) -> f64 {
    let a = span / 4.0;
    f_wing * (1.5 * span - a) * a * a / (6.0 * youngs_modulus * delta_max)
}

/// Length that the relative deflection limit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeflectionRef {
    #[default]
    HalfSpan,
    Span,
}

/// Bending load case of the wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WingLoadCase {
    /// Allowed tip deflection relative to the reference length.
    pub delta_max: f64,
    pub deflection_ref: DeflectionRef,
    /// Multiplier on the rated lift.
    pub load_factor: f64,
    /// Fixed per-wing load (N), overriding the rated-lift rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_wing: Option<f64>,
}

impl Default for WingLoadCase {
    fn default() -> Self {
        Self { delta_max: 0.05, deflection_ref: DeflectionRef::HalfSpan, load_factor: 1.0, f_wing: None }
    }
}

impl WingLoadCase {
    pub fn validate(&self) -> Result<()> {
        ensure(self.delta_max > 0.0, || format!("delta_max must be positive, got {}", self.delta_max))?;
        ensure(self.load_factor >= 0.0, || format!("load_factor must be non-negative, got {}", self.load_factor))?;
        ensure(self.f_wing.is_none_or(|f| f >= 0.0), || "f_wing must be non-negative".into())
    }

    pub fn deflection_limit(&self, span: f64) -> f64 {
        match self.deflection_ref {
            DeflectionRef::HalfSpan => self.delta_max * span / 2.0,
            DeflectionRef::Span => self.delta_max * span,
        }
    }

    /// Per-wing bending load: half of the (scaled) total rated lift.
    pub fn wing_force(&self, rated_lift: f64) -> f64 {
        self.f_wing.unwrap_or(0.5 * self.load_factor * rated_lift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwdtResult {
    pub design: WingStructureDesign,
    pub m_wing: f64,
    pub section: SectionProperties,
    pub i_req: f64,
}

impl SwdtResult {
    pub fn inertia_ratio(&self) -> f64 {
        if self.i_req > 0.0 {
            self.section.inertia / self.i_req
        } else {
            f64::INFINITY
        }
    }
}

const SHELL_GRID: usize = 64;
const THICKNESS_TOL: f64 = 1e-7;

struct Candidate {
    t_sp: f64,
    t_sw: f64,
    mass: f64,
    section: SectionProperties,
}

/// Lightest spar width at fixed shell thickness that meets `i_req`, or `None`
/// if even the widest spar does not.
fn min_spar_for_shell(
    model: &SectionModel,
    chord: f64,
    n_sp: u8,
    t_sw: f64,
    i_req: f64,
    t_sp_bounds: [f64; 2],
) -> Result<Option<(f64, SectionProperties)>> {
    let inner = model.inner_ring(t_sw)?;
    let eval = |t_sp: f64| -> Result<SectionProperties> {
        Ok(SectionModel::scaled(model.material(&inner, n_sp, t_sp)?, chord))
    };
    let lo_props = eval(t_sp_bounds[0])?;
    if lo_props.inertia >= i_req {
        return Ok(Some((t_sp_bounds[0], lo_props)));
    }
    let hi_props = eval(t_sp_bounds[1])?;
    if hi_props.inertia < i_req {
        return Ok(None);
    }
    let (mut lo, mut hi, mut best) = (t_sp_bounds[0], t_sp_bounds[1], hi_props);
    while hi - lo > THICKNESS_TOL {
        let mid = 0.5 * (lo + hi);
        let p = eval(mid)?;
        if p.inertia >= i_req {
            hi = mid;
            best = p;
        } else {
            lo = mid;
        }
    }
    Ok(Some((hi, best)))
}

fn shell_candidate(
    model: &SectionModel,
    planform: &WingPlanform,
    material: &Material,
    n_sp: u8,
    t_sw: f64,
    i_req: f64,
    bounds: &DesignBounds,
) -> Result<Option<Candidate>> {
    let chord = planform.chord();
    Ok(min_spar_for_shell(model, chord, n_sp, t_sw, i_req, bounds.t_sp)?.map(|(t_sp, section)| Candidate {
        t_sp,
        t_sw,
        mass: material.rho_m * planform.span * section.area,
        section,
    }))
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.mass < b.mass * (1.0 - 1e-12) || (a.mass <= b.mass * (1.0 + 1e-12) && a.t_sp < b.t_sp)
}

/// Best design for one spar count: scan the shell thickness, taking the
/// thinnest admissible spar at each value, then golden-section refine around
/// the lightest grid point.
fn optimize_spar_count(
    model: &SectionModel,
    planform: &WingPlanform,
    material: &Material,
    n_sp: u8,
    i_req: f64,
    bounds: &DesignBounds,
) -> Result<Option<Candidate>> {
    let [lo, hi] = bounds.t_sw;
    let hi = hi.min(model.le_radius / model.thickness * (1.0 - 1e-9));
    if hi < lo {
        return Err(Error::Geometry("shell bounds exceed the leading-edge radius".into()));
    }
    let step = (hi - lo) / SHELL_GRID as f64;
    let mut best: Option<(usize, Candidate)> = None;
    for k in 0..=SHELL_GRID {
        let t_sw = lo + step * k as f64;
        if let Some(c) = shell_candidate(model, planform, material, n_sp, t_sw, i_req, bounds)? {
            if best.as_ref().is_none_or(|(_, b)| better(&c, b)) {
                best = Some((k, c));
            }
        }
    }
    let Some((k, mut incumbent)) = best else { return Ok(None) };
    if step == 0.0 {
        return Ok(Some(incumbent));
    }

    // Infeasible shells behave as infinitely heavy.
    let mass_at = |t_sw: f64| -> Result<Option<Candidate>> {
        shell_candidate(model, planform, material, n_sp, t_sw, i_req, bounds)
    };
    let key = |c: &Option<Candidate>| c.as_ref().map_or(f64::INFINITY, |c| c.mass);
    let (mut a, mut b) = (lo + step * k.saturating_sub(1) as f64, (lo + step * (k + 1) as f64).min(hi));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut c1 = mass_at(x1)?;
    let mut c2 = mass_at(x2)?;
    while b - a > THICKNESS_TOL {
        if key(&c1) <= key(&c2) {
            b = x2;
            x2 = x1;
            c2 = c1;
            x1 = b - r * (b - a);
            c1 = mass_at(x1)?;
        } else {
            a = x1;
            x1 = x2;
            c1 = c2;
            x2 = a + r * (b - a);
            c2 = mass_at(x2)?;
        }
    }
    for c in [c1, c2].into_iter().flatten() {
        if better(&c, &incumbent) {
            incumbent = c;
        }
    }
    Ok(Some(incumbent))
}

/// Minimum-mass spar/shell design meeting the required bending inertia.
pub fn swdt_optimize(
    planform: &WingPlanform,
    i_req: f64,
    model: &SectionModel,
    material: &Material,
    bounds: &DesignBounds,
) -> Result<SwdtResult> {
    ensure(i_req >= 0.0 && i_req.is_finite(), || format!("required inertia must be non-negative, got {i_req}"))?;
    let mut best: Option<(u8, Candidate)> = None;
    for n_sp in bounds.spar_counts() {
        if let Some(c) = optimize_spar_count(model, planform, material, n_sp, i_req, bounds)? {
            // Strict improvement only, so ties keep the smaller spar count.
            let wins = match &best {
                None => true,
                Some((_, b)) => c.mass < b.mass * (1.0 - 1e-9),
            };
            if wins {
                best = Some((n_sp, c));
            }
        }
    }
    let (n_sp, c) = best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no wing structure within bounds reaches I_req = {i_req:.4e} m^4 (s = {}, AR = {})",
            planform.span, planform.aspect_ratio
        ))
    })?;
    Ok(SwdtResult {
        design: WingStructureDesign { n_sp, t_sp: c.t_sp, t_sw: c.t_sw },
        m_wing: c.mass,
        section: c.section,
        i_req,
    })
}

/// Required inertia for a planform under a load case, given the total rated
/// lift of the kite's main wing.
pub fn required_inertia_for(planform: &WingPlanform, load: &WingLoadCase, rated_lift: f64, material: &Material) -> f64 {
    required_inertia(
        load.wing_force(rated_lift),
        planform.span,
        load.deflection_limit(planform.span),
        material.youngs_modulus,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> SectionModel {
        SectionModel::new(&AirfoilSection::default()).unwrap()
    }

    #[test]
    fn zero_thickness_has_no_section() {
        let p = model().properties(1.3, &WingStructureDesign { n_sp: 2, t_sp: 0.0, t_sw: 0.0 }).unwrap();
        assert_eq!((p.area, p.inertia), (0.0, 0.0));
    }

    #[test]
    fn chord_scaling() {
        let m = model();
        let d = WingStructureDesign { n_sp: 1, t_sp: 0.10, t_sw: 0.01 };
        let one = m.properties(1.0, &d).unwrap();
        let two = m.properties(2.0, &d).unwrap();
        assert_relative_eq!(two.area, 4.0 * one.area, max_relative = 1e-12);
        assert_relative_eq!(two.inertia, 16.0 * one.inertia, max_relative = 1e-12);
    }

    #[test]
    fn reference_section_near_column_estimate() {
        // Column-integration estimate of this section: A = 0.014039, I = 1.7788e-5.
        let p = model().properties(1.0, &WingStructureDesign { n_sp: 1, t_sp: 0.10, t_sw: 0.01 }).unwrap();
        assert_relative_eq!(p.area, 0.014039, max_relative = 2e-3);
        assert_relative_eq!(p.inertia, 1.7788e-5, max_relative = 2e-3);
    }

    #[test]
    fn full_spars_recover_the_solid_outline() {
        let m = model();
        // A single web wider than twice the chord covers everything.
        let p = m.properties(1.0, &WingStructureDesign { n_sp: 1, t_sp: 2.0, t_sw: 0.05 }).unwrap();
        assert_relative_eq!(p.area, m.outline_area(), max_relative = 1e-12);
    }

    #[test]
    fn shell_at_le_radius_is_rejected() {
        let err = model().properties(1.0, &WingStructureDesign { n_sp: 1, t_sp: 0.1, t_sw: 0.2 }).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn required_inertia_hand_value() {
        // a = 2, (1.5·8 − 2)·4 = 40.
        let expected = 50e3 * 40.0 / (6.0 * 6.89e10 * 0.2);
        assert_relative_eq!(required_inertia(50e3, 8.0, 0.2, 6.89e10), expected, max_relative = 1e-15);
        assert_relative_eq!(
            required_inertia(50e3, 8.0, 0.1, 6.89e10),
            2.0 * required_inertia(50e3, 8.0, 0.2, 6.89e10),
            max_relative = 1e-15
        );
        assert_eq!(required_inertia(0.0, 8.0, 0.2, 6.89e10), 0.0);
    }

    #[test]
    fn sigma_05_rule() {
        assert_eq!(Material::default().sigma_05(), 2.7e8);
        let soft = Material { youngs_modulus: 1e10, ..Default::default() };
        assert_eq!(soft.sigma_05(), 5e7);
    }

    #[test]
    fn mass_is_linear_in_density() {
        let m = model();
        let d = WingStructureDesign { n_sp: 2, t_sp: 0.05, t_sw: 0.03 };
        let base = Material::default();
        let heavy = Material { rho_m: 2.0 * base.rho_m, ..base };
        assert_relative_eq!(
            wing_mass(1.4, 8.5, &d, &m, &heavy).unwrap(),
            2.0 * wing_mass(1.4, 8.5, &d, &m, &base).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn tiny_load_sits_at_the_box_corner() {
        let p = WingPlanform::new(8.0, 8.0).unwrap();
        let r = swdt_optimize(&p, 1e-14, &model(), &Material::default(), &DesignBounds::default()).unwrap();
        assert_eq!(r.design.n_sp, 1);
        assert!(r.design.t_sp < 1e-4 && r.design.t_sw < 1e-4, "{r:?}");
        let zero = swdt_optimize(&p, 0.0, &model(), &Material::default(), &DesignBounds::default()).unwrap();
        assert_eq!(zero.m_wing, 0.0);
    }

    #[test]
    fn impossible_load_is_infeasible() {
        let p = WingPlanform::new(8.0, 12.0).unwrap();
        let err = swdt_optimize(&p, 1.0, &model(), &Material::default(), &DesignBounds::default()).unwrap_err();
        assert!(err.is_infeasible());
    }

    #[test]
    fn optimum_is_active_and_in_bounds() {
        let p = WingPlanform::new(8.0, 5.0).unwrap();
        let b = DesignBounds::default();
        let r = swdt_optimize(&p, 5e-5, &model(), &Material::default(), &b).unwrap();
        assert!(r.design.within(&b));
        let ratio = r.inertia_ratio();
        assert!((1.0..=1.02).contains(&ratio), "ratio {ratio}");
    }
}
