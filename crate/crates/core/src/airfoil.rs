//! NACA four-digit section outlines.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geometry::Pt;

/// Thickness polynomial with the closed trailing-edge coefficient.
const THICKNESS: [f64; 5] = [0.2969, -0.1260, -0.3516, 0.2843, -0.1036];

/// Camber and thickness parameters of a NACA four-digit foil, as fractions of
/// chord.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NacaProfile {
    pub max_camber: f64,
    pub camber_pos: f64,
    pub thickness: f64,
}

impl NacaProfile {
    pub fn parse(code: &str) -> Result<Self> {
        let digits: Vec<u32> = code.trim().chars().filter_map(|c| c.to_digit(10)).collect();
        if digits.len() != 4 || code.trim().len() != 4 {
            return Err(Error::Parse { what: "NACA code".into(), msg: format!("expected 4 digits, got {code:?}") });
        }
        let profile = Self {
            max_camber: digits[0] as f64 / 100.0,
            camber_pos: digits[1] as f64 / 10.0,
            thickness: (digits[2] * 10 + digits[3]) as f64 / 100.0,
        };
        ensure(profile.thickness > 0.0, || format!("NACA {code} has zero thickness"))?;
        ensure(profile.max_camber == 0.0 || profile.camber_pos > 0.0, || {
            format!("NACA {code} is cambered with camber position 0")
        })?;
        Ok(profile)
    }

    /// Half thickness at chord fraction x.
    pub fn half_thickness(&self, x: f64) -> f64 {
        let [a0, a1, a2, a3, a4] = THICKNESS;
        5.0 * self.thickness * (a0 * x.sqrt() + x * (a1 + x * (a2 + x * (a3 + x * a4))))
    }

    /// Camber line height and slope at chord fraction x.
    pub fn camber(&self, x: f64) -> (f64, f64) {
        let (m, p) = (self.max_camber, self.camber_pos);
        if m == 0.0 {
            (0.0, 0.0)
        } else if x < p {
            (m / (p * p) * (2.0 * p * x - x * x), 2.0 * m / (p * p) * (p - x))
        } else {
            let q = (1.0 - p) * (1.0 - p);
            (m / q * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x), 2.0 * m / q * (p - x))
        }
    }

    /// Leading-edge radius as a fraction of chord.
    pub fn le_radius(&self) -> f64 {
        1.1019 * self.thickness * self.thickness
    }
}

/// Outline definition: designation plus discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirfoilSection {
    pub naca_code: String,
    /// Cosine-spaced stations per surface.
    pub samples: usize,
}

impl Default for AirfoilSection {
    fn default() -> Self {
        Self { naca_code: "2412".into(), samples: 400 }
    }
}

/// Upper and lower surfaces of a unit-chord foil, each ordered from leading
/// to trailing edge and sharing both end points.
#[derive(Debug, Clone)]
pub struct Surfaces {
    pub upper: Vec<Pt>,
    pub lower: Vec<Pt>,
}

impl AirfoilSection {
    pub fn profile(&self) -> Result<NacaProfile> {
        NacaProfile::parse(&self.naca_code)
    }

    pub fn validate(&self) -> Result<()> {
        self.profile()?;
        ensure(self.samples >= 10, || format!("airfoil needs at least 10 samples, got {}", self.samples))
    }

    /// Max thickness / chord, from the nominal designation.
    pub fn t_max_ratio(&self) -> Result<f64> {
        Ok(self.profile()?.thickness)
    }

    pub fn surfaces(&self) -> Result<Surfaces> {
        self.validate()?;
        let prof = self.profile()?;
        let n = self.samples;
        let mut upper = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        for i in 0..n {
            let beta = PI * i as f64 / (n - 1) as f64;
            let x = if i == n - 1 { 1.0 } else { 0.5 * (1.0 - beta.cos()) };
            let yt = if i == n - 1 { 0.0 } else { prof.half_thickness(x) };
            let (yc, slope) = prof.camber(x);
            let th = slope.atan();
            upper.push([x - yt * th.sin(), yc + yt * th.cos()]);
            lower.push([x + yt * th.sin(), yc - yt * th.cos()]);
        }
        Ok(Surfaces { upper, lower })
    }

    /// Closed counter-clockwise unit-chord outline starting at the trailing
    /// edge (index 0), running over the upper surface to the leading edge and
    /// back along the lower surface. End points are not repeated.
    pub fn outline(&self) -> Result<Vec<Pt>> {
        let s = self.surfaces()?;
        let n = s.upper.len();
        let mut ring = Vec::with_capacity(2 * n - 2);
        ring.extend(s.upper.iter().rev());
        ring.extend(s.lower.iter().skip(1).take(n - 2));
        Ok(ring)
    }

    /// Writes `x,y_upper,y_lower` rows for a unit chord, with both surfaces
    /// interpolated onto the cosine station set.
    pub fn write_outline<W: Write>(&self, out: W) -> Result<()> {
        let s = self.surfaces()?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y_upper", "y_lower"]).map_err(csv_err)?;
        for p in &s.upper {
            let x = p[0].clamp(0.0, 1.0);
            let row = [x, interp(&s.upper, x), interp(&s.lower, x)];
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse { what: "delimited output".into(), msg: e.to_string() }
}

/// Piecewise-linear y(x) along a polyline with non-decreasing x.
pub(crate) fn interp(curve: &[Pt], x: f64) -> f64 {
    let k = curve.partition_point(|p| p[0] < x);
    if k == 0 {
        return curve[0][1];
    }
    if k == curve.len() {
        return curve[k - 1][1];
    }
    let (a, b) = (curve[k - 1], curve[k]);
    if b[0] == a[0] {
        return b[1];
    }
    a[1] + (x - a[0]) / (b[0] - a[0]) * (b[1] - a[1])
}
