//! Parametric lift/drag model and the idealized steady cross-current
//! (Loyd) power estimate used by every design-level power calculation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Fit constants of the parametric lift and drag curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoilCoeffs {
    /// Lift-curve multiplier.
    pub gamma: f64,
    /// Oswald lift efficiency.
    pub e_l: f64,
    /// Oswald drag efficiency.
    pub e_d: f64,
    /// Viscous drag factor.
    pub k_visc: f64,
    /// Lift coefficient at zero angle of attack.
    pub c_l0: f64,
    /// Lift coefficient at minimum drag.
    pub c_lx: f64,
    /// Drag coefficient at zero lift.
    pub c_d0: f64,
}

impl Default for FoilCoeffs {
    fn default() -> Self {
        Self { gamma: 0.96, e_l: 0.76, e_d: 0.92, k_visc: 0.03, c_l0: 0.16, c_lx: 0.02, c_d0: 0.0065 }
    }
}

impl FoilCoeffs {
    pub fn validate(&self) -> Result<()> {
        ensure(self.e_l > 0.0, || format!("e_l must be positive, got {}", self.e_l))?;
        ensure(self.e_d > 0.0, || format!("e_d must be positive, got {}", self.e_d))?;
        ensure(self.k_visc >= 0.0, || format!("k_visc must be non-negative, got {}", self.k_visc))?;
        ensure(self.c_d0 > 0.0, || format!("c_d0 must be positive, got {}", self.c_d0))?;
        ensure(self.gamma.is_finite() && self.c_l0.is_finite() && self.c_lx.is_finite(), || {
            "foil coefficients must be finite".into()
        })
    }

    /// dC_L/dα for a finite wing of the given aspect ratio.
    pub fn lift_slope(&self, aspect_ratio: f64) -> f64 {
        2.0 * PI * self.gamma / (1.0 + 2.0 * self.gamma / (self.e_l * aspect_ratio))
    }

    pub fn lift_coeff(&self, aspect_ratio: f64, alpha: f64) -> f64 {
        self.lift_slope(aspect_ratio) * alpha + self.c_l0
    }

    pub fn drag_coeff(&self, aspect_ratio: f64, c_l: f64) -> f64 {
        let dl = c_l - self.c_lx;
        (1.0 / (PI * self.e_d * aspect_ratio) + self.k_visc) * dl * dl + self.c_d0
    }
}

/// Free-function form of [`FoilCoeffs::lift_coeff`].
pub fn lift_coeff(foil: &FoilCoeffs, aspect_ratio: f64, alpha: f64) -> f64 {
    foil.lift_coeff(aspect_ratio, alpha)
}

/// Free-function form of [`FoilCoeffs::drag_coeff`].
pub fn drag_coeff(foil: &FoilCoeffs, aspect_ratio: f64, c_l: f64) -> f64 {
    foil.drag_coeff(aspect_ratio, c_l)
}

/// Uniform ambient flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowEnv {
    /// Rated flow speed (m/s).
    pub v: f64,
    /// Water density (kg/m³).
    pub rho_w: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

impl Default for FlowEnv {
    fn default() -> Self {
        Self { v: 1.5, rho_w: 1000.0, g: 9.81 }
    }
}

impl FlowEnv {
    pub fn validate(&self) -> Result<()> {
        ensure(self.v > 0.0, || format!("flow speed must be positive, got {}", self.v))?;
        ensure(self.rho_w > 0.0, || format!("water density must be positive, got {}", self.rho_w))?;
        ensure(self.g >= 0.0, || format!("gravity must be non-negative, got {}", self.g))
    }
}

/// Rectangular wing planform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingPlanform {
    pub span: f64,
    pub aspect_ratio: f64,
}

impl WingPlanform {
    pub fn new(span: f64, aspect_ratio: f64) -> Result<Self> {
        ensure(span > 0.0 && span.is_finite(), || format!("span must be positive, got {span}"))?;
        ensure(aspect_ratio > 0.0 && aspect_ratio.is_finite(), || {
            format!("aspect ratio must be positive, got {aspect_ratio}")
        })?;
        Ok(Self { span, aspect_ratio })
    }

    pub fn chord(&self) -> f64 {
        self.span / self.aspect_ratio
    }

    pub fn area(&self) -> f64 {
        self.span * self.span / self.aspect_ratio
    }
}

/// Which geometric factor multiplies the Loyd expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerForm {
    /// Planform area s²/AR.
    #[default]
    StandardArea,
    /// s²/AR², the form with the aspect ratio squared.
    SquaredAspect,
}

/// Maximizer of C_L³/C_D² over an angle-of-attack interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlideOptimum {
    pub alpha: f64,
    pub value: f64,
    pub c_l: f64,
    pub c_d: f64,
}

impl GlideOptimum {
    pub fn lift_to_drag(&self) -> f64 {
        self.c_l / self.c_d
    }
}

/// Default α search interval, [0°, 20°].
pub const DEFAULT_ALPHA_RANGE: (f64, f64) = (0.0, 20.0 * PI / 180.0);

const GLIDE_GRID: usize = 256;
const GLIDE_TOL: f64 = 1e-6;

fn glide_cubed(foil: &FoilCoeffs, aspect_ratio: f64, alpha: f64) -> f64 {
    let cl = foil.lift_coeff(aspect_ratio, alpha);
    let cd = foil.drag_coeff(aspect_ratio, cl);
    cl * cl * cl / (cd * cd)
}

/// Maximize C_L³/C_D² over `alpha_range`: coarse grid, then golden-section
/// refinement of the best bracket to 1e-6 rad.
pub fn max_glide_cubed(foil: &FoilCoeffs, aspect_ratio: f64, alpha_range: (f64, f64)) -> Result<GlideOptimum> {
    let (lo, hi) = alpha_range;
    ensure(lo.is_finite() && hi.is_finite() && hi >= lo, || format!("alpha range [{lo}, {hi}] is empty"))?;
    let max_cl = foil.lift_coeff(aspect_ratio, lo).max(foil.lift_coeff(aspect_ratio, hi));
    if max_cl <= 0.0 {
        return Err(Error::DegenerateRange { lo, hi });
    }

    let step = (hi - lo) / GLIDE_GRID as f64;
    let (mut best_i, mut best_f) = (0usize, f64::NEG_INFINITY);
    for i in 0..=GLIDE_GRID {
        let f = glide_cubed(foil, aspect_ratio, lo + step * i as f64);
        if f > best_f {
            best_f = f;
            best_i = i;
        }
    }

    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = glide_cubed(foil, aspect_ratio, x1);
    let mut f2 = glide_cubed(foil, aspect_ratio, x2);
    while b - a > GLIDE_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = glide_cubed(foil, aspect_ratio, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = glide_cubed(foil, aspect_ratio, x1);
        }
    }

    // Keep the grid winner if the bracket refinement did not improve on it
    // (e.g. maximum on a range endpoint).
    let mid = 0.5 * (a + b);
    let alpha = if glide_cubed(foil, aspect_ratio, mid) >= best_f { mid } else { lo + step * best_i as f64 };
    let c_l = foil.lift_coeff(aspect_ratio, alpha);
    let c_d = foil.drag_coeff(aspect_ratio, c_l);
    Ok(GlideOptimum { alpha, value: c_l.powi(3) / (c_d * c_d), c_l, c_d })
}

/// Geometric factor of the Loyd expression for the selected form.
pub fn power_area(planform: &WingPlanform, form: PowerForm) -> f64 {
    match form {
        PowerForm::StandardArea => planform.area(),
        PowerForm::SquaredAspect => planform.area() / planform.aspect_ratio,
    }
}

/// Idealized cross-current power scaled by flight efficiency `eta`:
/// (2/27)·η·ρ_w·v³·A·max C_L³/C_D².
pub fn loyd_power(
    planform: &WingPlanform,
    flow: &FlowEnv,
    eta: f64,
    foil: &FoilCoeffs,
    form: PowerForm,
    alpha_range: (f64, f64),
) -> Result<f64> {
    ensure(eta > 0.0 && eta.is_finite(), || format!("eta must be positive, got {eta}"))?;
    let glide = max_glide_cubed(foil, planform.aspect_ratio, alpha_range)?;
    Ok(loyd_power_from_glide(planform, flow, eta, glide.value, form))
}

pub(crate) fn loyd_power_from_glide(
    planform: &WingPlanform,
    flow: &FlowEnv,
    eta: f64,
    glide_value: f64,
    form: PowerForm,
) -> f64 {
    2.0 / 27.0 * eta * flow.rho_w * flow.v.powi(3) * power_area(planform, form) * glide_value
}

/// Total wing lift at the power-maximizing operating point, with apparent
/// speed v_a = (2/3)·v·C_L/C_D.
pub fn rated_lift(planform: &WingPlanform, flow: &FlowEnv, foil: &FoilCoeffs, alpha_range: (f64, f64)) -> Result<f64> {
    let glide = max_glide_cubed(foil, planform.aspect_ratio, alpha_range)?;
    let v_a = 2.0 / 3.0 * flow.v * glide.lift_to_drag();
    Ok(0.5 * flow.rho_w * planform.area() * v_a * v_a * glide.c_l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lift_at_zero_alpha_is_c_l0() {
        let f = FoilCoeffs::default();
        assert_eq!(f.lift_coeff(8.0, 0.0), 0.16);
    }

    #[test]
    fn lift_slope_matches_hand_value() {
        let f = FoilCoeffs::default();
        let slope = 2.0 * PI * 0.96 / (1.0 + 2.0 * 0.96 / (0.76 * 8.0));
        assert_relative_eq!(f.lift_coeff(8.0, 0.1), 0.16 + 0.1 * slope, max_relative = 1e-14);
        assert_relative_eq!(f.lift_coeff(8.0, 0.1), 0.618_421_200_011_822_5, max_relative = 1e-12);
    }

    #[test]
    fn zero_multiplier_kills_slope() {
        let f = FoilCoeffs { gamma: 0.0, ..Default::default() };
        assert_eq!(f.lift_coeff(5.0, 0.3), f.c_l0);
    }

    #[test]
    fn drag_hand_values() {
        let f = FoilCoeffs::default();
        assert_eq!(f.drag_coeff(4.7, 0.02), 0.0065);
        let expected = (1.0 / (PI * 0.92 * 4.7) + 0.03) * 0.16 + 0.0065;
        assert_relative_eq!(f.drag_coeff(4.7, 0.42), expected, max_relative = 1e-14);
        assert!((f.drag_coeff(4.7, 0.42) - 0.0231).abs() < 1e-4);
    }

    #[test]
    fn drag_suppressed_terms_leave_c_d0() {
        let f = FoilCoeffs { k_visc: 0.0, e_d: 1e15, ..Default::default() };
        assert_relative_eq!(f.drag_coeff(6.0, 1.3), f.c_d0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_range_is_reported() {
        let f = FoilCoeffs { c_l0: -1.0, ..Default::default() };
        let err = max_glide_cubed(&f, 6.0, (0.0, 0.05)).unwrap_err();
        assert!(matches!(err, Error::DegenerateRange { .. }));
    }

    #[test]
    fn heavier_profile_drag_lowers_glide() {
        let f = FoilCoeffs::default();
        let g = FoilCoeffs { c_d0: 4.0 * f.c_d0, ..f };
        let a = max_glide_cubed(&f, 6.0, DEFAULT_ALPHA_RANGE).unwrap();
        let b = max_glide_cubed(&g, 6.0, DEFAULT_ALPHA_RANGE).unwrap();
        assert!(b.value < a.value);
    }

    #[test]
    fn planform_identities() {
        let p = WingPlanform::new(8.51, 6.0).unwrap();
        assert_relative_eq!(p.chord() * p.aspect_ratio, p.span, max_relative = 1e-15);
        assert_relative_eq!(p.area(), 8.51 * 8.51 / 6.0);
        assert!(WingPlanform::new(-1.0, 4.0).is_err());
    }

    #[test]
    fn power_is_linear_in_eta() {
        let p = WingPlanform::new(9.98, 4.7).unwrap();
        let flow = FlowEnv::default();
        let f = FoilCoeffs::default();
        let one = loyd_power(&p, &flow, 1.0, &f, PowerForm::StandardArea, DEFAULT_ALPHA_RANGE).unwrap();
        let tiny = loyd_power(&p, &flow, 1e-9, &f, PowerForm::StandardArea, DEFAULT_ALPHA_RANGE).unwrap();
        assert_relative_eq!(tiny, one * 1e-9, max_relative = 1e-12);
        assert!(loyd_power(&p, &flow, 0.0, &f, PowerForm::StandardArea, DEFAULT_ALPHA_RANGE).is_err());
    }

    #[test]
    fn literal_form_divides_by_aspect_ratio_once_more() {
        let p = WingPlanform::new(9.98, 4.7).unwrap();
        let flow = FlowEnv::default();
        let f = FoilCoeffs::default();
        let std = loyd_power(&p, &flow, 1.0, &f, PowerForm::StandardArea, DEFAULT_ALPHA_RANGE).unwrap();
        let lit = loyd_power(&p, &flow, 1.0, &f, PowerForm::SquaredAspect, DEFAULT_ALPHA_RANGE).unwrap();
        assert_relative_eq!(std / lit, 4.7, max_relative = 1e-12);
    }

    /// Exhaustive α scan used as an independent reference.
    fn scan(foil: &FoilCoeffs, ar: f64, hi: f64) -> f64 {
        (0..=(hi / 1e-5) as usize)
            .map(|i| {
                let cl = foil.lift_coeff(ar, i as f64 * 1e-5);
                cl.powi(3) / foil.drag_coeff(ar, cl).powi(2)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn glide_matches_scan_and_grows_with_aspect_ratio() {
        let f = FoilCoeffs::default();
        let g = max_glide_cubed(&f, 4.7, (0.0, 0.35)).unwrap();
        assert_relative_eq!(g.value, scan(&f, 4.7, 0.35), max_relative = 1e-6);
        assert_relative_eq!(g.value, 139.116, max_relative = 1e-4);
        assert!(max_glide_cubed(&f, 12.0, (0.0, 0.35)).unwrap().value > g.value);
    }

    #[test]
    fn loyd_reference_values() {
        let p = WingPlanform::new(9.98, 4.7).unwrap();
        let flow = FlowEnv::default();
        let f = FoilCoeffs::default();
        let std = loyd_power(&p, &flow, 1.0, &f, PowerForm::StandardArea, DEFAULT_ALPHA_RANGE).unwrap();
        let lit = loyd_power(&p, &flow, 1.0, &f, PowerForm::SquaredAspect, DEFAULT_ALPHA_RANGE).unwrap();
        assert_relative_eq!(std, 7.36e5, max_relative = 5e-3);
        assert_relative_eq!(lit, 1.57e5, max_relative = 5e-3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn foil() -> impl Strategy<Value = FoilCoeffs> {
            (0.5f64..1.2, 0.5f64..1.0, 0.5f64..1.0, 0.0f64..0.1, -0.1f64..0.4, -0.1f64..0.2, 0.002f64..0.03).prop_map(
                |(gamma, e_l, e_d, k_visc, c_l0, c_lx, c_d0)| FoilCoeffs { gamma, e_l, e_d, k_visc, c_l0, c_lx, c_d0 },
            )
        }

        proptest! {
            #[test]
            fn lift_is_affine(f in foil(), ar in 1.0f64..50.0, a in -0.3f64..0.3) {
                let h = 1e-3;
                let fd = (f.lift_coeff(ar, a + h) - f.lift_coeff(ar, a - h)) / (2.0 * h);
                prop_assert!((fd / f.lift_slope(ar) - 1.0).abs() < 1e-9);
            }

            #[test]
            fn drag_floor(f in foil(), ar in 1.0f64..50.0, cl in -2.0f64..2.0) {
                prop_assert!(f.drag_coeff(ar, cl) >= f.c_d0);
                prop_assert_eq!(f.drag_coeff(ar, f.c_lx), f.c_d0);
            }

            #[test]
            fn glide_agrees_with_scan(f in foil(), ar in 4.0f64..25.0) {
                let g = max_glide_cubed(&f, ar, DEFAULT_ALPHA_RANGE).unwrap();
                let s = scan(&f, ar, DEFAULT_ALPHA_RANGE.1);
                prop_assert!((g.value / s - 1.0).abs() < 1e-2);
            }

            #[test]
            fn power_monotone(v in 0.5f64..3.0, eta in 0.05f64..1.0, s in 5.0f64..12.0, ar in 4.0f64..12.0, k in 1.01f64..2.0) {
                let f = FoilCoeffs::default();
                let pw = |v: f64, eta: f64, s: f64| {
                    let flow = FlowEnv { v, ..Default::default() };
                    loyd_power(&WingPlanform::new(s, ar).unwrap(), &flow, eta, &f, PowerForm::StandardArea, DEFAULT_ALPHA_RANGE).unwrap()
                };
                let base = pw(v, eta, s);
                prop_assert!(pw(v * k, eta, s) > base);
                prop_assert!(pw(v, (eta * k).min(1.0), s) >= base);
                prop_assert!(pw(v, eta, s * k) > base);
            }
        }
    }
}
