//! Design vector, derived kite quantities and the independent constraint
//! audit shared by every co-design strategy.

use serde::{Deserialize, Serialize};

use crate::airfoil::AirfoilSection;
use crate::bounds::{contains, DesignBounds};
use crate::dynsim::{AirframeConfig, KiteGeometry};
use crate::effmap::EffSurface;
use crate::error::{ensure, Error, Result};
use crate::fuse_struct::{
    constraint_margins, fuse_mass, sfdt_optimize, FuselageDesign, FuselageLoadCase, FuselageLoads, SfdtResult,
};
use crate::hydro::{loyd_power, max_glide_cubed, FlowEnv, FoilCoeffs, PowerForm, WingPlanform};
use crate::wing_struct::{
    required_inertia_for, swdt_optimize, Material, SectionModel, SwdtResult, WingLoadCase, WingStructureDesign,
};

/// Full decision vector u = (s, AR, N_sp, t_sp, t_sw, D, L, t_sf).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignVars {
    pub s: f64,
    pub ar: f64,
    pub n_sp: u8,
    pub t_sp: f64,
    pub t_sw: f64,
    pub d: f64,
    pub l: f64,
    pub t_sf: f64,
}

impl DesignVars {
    pub fn within(&self, b: &DesignBounds) -> bool {
        contains(b.s, self.s)
            && contains(b.ar, self.ar)
            && self.wing().within(b)
            && contains(b.d, self.d)
            && contains(b.l, self.l)
            && contains(b.t_sf, self.t_sf)
    }

    pub fn wing(&self) -> WingStructureDesign {
        WingStructureDesign { n_sp: self.n_sp, t_sp: self.t_sp, t_sw: self.t_sw }
    }

    pub fn fuselage(&self) -> FuselageDesign {
        FuselageDesign { d: self.d, l: self.l, t_sf: self.t_sf }
    }

    pub fn planform(&self) -> Result<WingPlanform> {
        WingPlanform::new(self.s, self.ar)
    }
}

/// A design with every derived quantity; m_kite = m_wing + m_fuse exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KiteDesign {
    pub u: DesignVars,
    pub chord: f64,
    pub s_plan: f64,
    pub eta: f64,
    pub p_gen: f64,
    pub m_wing: f64,
    pub m_fuse: f64,
    pub m_kite: f64,
    pub v_kite: f64,
    /// m_kite ≤ ρ_w·V_kite.
    pub buoyant: bool,
}

/// Constraint margins of a design; all must be ≥ 0 for feasibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// I_wing / I_req − 1.
    pub wing_inertia: f64,
    pub fuse_shear: f64,
    pub fuse_hoop: f64,
    pub fuse_buckling: f64,
    /// (ρ_w·V_kite − m_kite) / (ρ_w·V_kite).
    pub buoyancy: f64,
    /// Relative power slack against the power requirement, when one is set.
    pub power: Option<f64>,
    pub within_bounds: bool,
}

impl Margins {
    pub fn min(&self) -> f64 {
        [
            self.wing_inertia,
            self.fuse_shear,
            self.fuse_hoop,
            self.fuse_buckling,
            self.buoyancy,
            self.power.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    pub fn feasible(&self, tol: f64) -> bool {
        self.within_bounds && self.min() >= -tol
    }
}

/// How the power requirement enters the audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerRequirement {
    None,
    /// |P_gen − P_req| / P_req ≤ tol, reported as tol − |rel. error|.
    Equal {
        p_req: f64,
        tol: f64,
    },
    /// P_gen ≥ P_min, reported as P_gen / P_min − 1.
    AtLeast(f64),
}

/// Everything the co-design strategies evaluate against. Pure after
/// construction; shared read-only between sweep workers.
#[derive(Debug, Clone)]
pub struct Problem {
    pub flow: FlowEnv,
    pub foil: FoilCoeffs,
    pub power_form: PowerForm,
    pub alpha_range: (f64, f64),
    pub material: Material,
    pub bounds: DesignBounds,
    pub wing_load: WingLoadCase,
    pub fuse_load: FuselageLoadCase,
    pub airframe: AirframeConfig,
    pub eta: EffSurface,
    section: SectionModel,
}

/// Loads sized from the rated operating point of a planform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatedLoads {
    pub wing_lift: f64,
    pub hstab_lift: f64,
    pub i_req: f64,
}

impl Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        flow: FlowEnv,
        foil: FoilCoeffs,
        power_form: PowerForm,
        alpha_range: (f64, f64),
        material: Material,
        airfoil: &AirfoilSection,
        bounds: DesignBounds,
        wing_load: WingLoadCase,
        fuse_load: FuselageLoadCase,
        airframe: AirframeConfig,
        eta: EffSurface,
    ) -> Result<Self> {
        flow.validate()?;
        foil.validate()?;
        material.validate()?;
        bounds.validate()?;
        wing_load.validate()?;
        fuse_load.validate()?;
        eta.validate()?;
        Ok(Self {
            flow,
            foil,
            power_form,
            alpha_range,
            material,
            bounds,
            wing_load,
            fuse_load,
            airframe,
            eta,
            section: SectionModel::new(airfoil)?,
        })
    }

    pub fn section(&self) -> &SectionModel {
        &self.section
    }

    /// Design-level power: Loyd power scaled by the efficiency surface.
    pub fn power(&self, s: f64, ar: f64) -> Result<f64> {
        power_of(s, ar, &self.eta, &self.flow, &self.foil, self.power_form, self.alpha_range)
    }

    /// Rated wing and h-stab lift (at η = 1) and the required wing inertia.
    pub fn rated_loads(&self, planform: &WingPlanform) -> Result<RatedLoads> {
        let glide = max_glide_cubed(&self.foil, planform.aspect_ratio, self.alpha_range)?;
        let v_a = 2.0 / 3.0 * self.flow.v * glide.lift_to_drag();
        let q = 0.5 * self.flow.rho_w * v_a * v_a;
        let wing_lift = q * planform.area() * glide.c_l;
        let hstab_lift = q * self.airframe.scaling.hstab_area * planform.area() * glide.c_l;
        Ok(RatedLoads {
            wing_lift,
            hstab_lift,
            i_req: required_inertia_for(planform, &self.wing_load, wing_lift, &self.material),
        })
    }

    pub fn fuselage_loads(&self, planform: &WingPlanform, rated: &RatedLoads, l: f64) -> FuselageLoads {
        self.fuse_load.loads(rated.wing_lift, rated.hstab_lift, l, planform.chord())
    }

    /// Minimum-mass wing structure for a planform.
    pub fn wing_structure(&self, planform: &WingPlanform) -> Result<(SwdtResult, RatedLoads)> {
        let rated = self.rated_loads(planform)?;
        Ok((swdt_optimize(planform, rated.i_req, &self.section, &self.material, &self.bounds)?, rated))
    }

    /// Lightest fuselage on the (D, L) grid that passes SFDT and keeps the
    /// kite buoyant with the given wing mass. Ties go to the earlier cell.
    pub fn lightest_fuselage(
        &self,
        planform: &WingPlanform,
        rated: &RatedLoads,
        m_wing: f64,
        grid: &[(f64, f64)],
    ) -> Result<SfdtResult> {
        let mut best: Option<SfdtResult> = None;
        for &(d, l) in grid {
            let Ok(fuse) = sfdt_optimize(d, l, &self.fuselage_loads(planform, rated, l), &self.material, &self.bounds)
            else {
                continue;
            };
            if self.volume(planform, d, l) * self.flow.rho_w < m_wing + fuse.m_fuse {
                continue;
            }
            if best.as_ref().is_none_or(|b| fuse.m_fuse < b.m_fuse) {
                best = Some(fuse);
            }
        }
        best.ok_or_else(|| {
            Error::Infeasible(format!(
                "no fuselage on the (D, L) grid is admissible for s = {}, AR = {}",
                planform.span, planform.aspect_ratio
            ))
        })
    }

    pub fn volume(&self, planform: &WingPlanform, d: f64, l: f64) -> f64 {
        KiteGeometry {
            span: planform.span,
            aspect_ratio: planform.aspect_ratio,
            fuse_diameter: d,
            fuse_length: l,
            m_wing: 0.0,
            m_fuse: 0.0,
        }
        .displaced_volume(&self.airframe)
    }

    /// Derived quantities of an arbitrary design vector.
    pub fn evaluate(&self, u: &DesignVars) -> Result<KiteDesign> {
        let planform = u.planform()?;
        let m_wing = self.material.rho_m * u.s * self.section.properties(planform.chord(), &u.wing())?.area;
        let m_fuse = fuse_mass(&u.fuselage(), &self.material);
        let v_kite = self.volume(&planform, u.d, u.l);
        let eta = self.eta.eta(u.s, u.ar);
        let m_kite = m_wing + m_fuse;
        Ok(KiteDesign {
            u: *u,
            chord: planform.chord(),
            s_plan: planform.area(),
            eta,
            p_gen: self.power(u.s, u.ar)?,
            m_wing,
            m_fuse,
            m_kite,
            v_kite,
            buoyant: m_kite <= self.flow.rho_w * v_kite,
        })
    }

    /// Recomputes every constraint of a design from its decision vector
    /// alone, independently of how the design was found.
    pub fn audit(&self, u: &DesignVars, power: PowerRequirement) -> Result<(KiteDesign, Margins)> {
        let design = self.evaluate(u)?;
        let planform = u.planform()?;
        let rated = self.rated_loads(&planform)?;
        let section = self.section.properties(planform.chord(), &u.wing())?;
        let wing_inertia = if rated.i_req > 0.0 { section.inertia / rated.i_req - 1.0 } else { f64::INFINITY };
        let fuse = constraint_margins(&u.fuselage(), &self.fuselage_loads(&planform, &rated, u.l), &self.material)?;
        let displaced = self.flow.rho_w * design.v_kite;
        let power = match power {
            PowerRequirement::None => None,
            PowerRequirement::Equal { p_req, tol } => Some(tol - ((design.p_gen - p_req) / p_req).abs()),
            PowerRequirement::AtLeast(p_min) => Some(design.p_gen / p_min - 1.0),
        };
        let thin_wall = u.t_sf <= 0.1;
        Ok((
            design,
            Margins {
                wing_inertia,
                fuse_shear: fuse.shear,
                fuse_hoop: fuse.hoop,
                fuse_buckling: fuse.buckling,
                buoyancy: (displaced - design.m_kite) / displaced,
                power,
                within_bounds: u.within(&self.bounds) && thin_wall,
            },
        ))
    }
}

/// Loyd power × η(s, AR): the single source of design-level power.
pub fn power_of(
    s: f64,
    ar: f64,
    eta: &EffSurface,
    flow: &FlowEnv,
    foil: &FoilCoeffs,
    form: PowerForm,
    alpha_range: (f64, f64),
) -> Result<f64> {
    ensure(s.is_finite() && ar.is_finite(), || format!("non-finite geometry s = {s}, AR = {ar}"))?;
    loyd_power(&WingPlanform::new(s, ar)?, flow, eta.eta(s, ar), foil, form, alpha_range)
}

/// Cells of a regular grid over [lo, hi] with the given step; the upper end
/// is always included.
pub fn grid_1d(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || hi <= lo {
        return vec![lo];
    }
    let n = ((hi - lo) / step - 1e-9).ceil() as usize;
    (0..=n).map(|i| if i == n { hi } else { lo + step * i as f64 }).collect()
}
