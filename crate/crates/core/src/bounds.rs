//! Box bounds of the full decision vector.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Closed interval [lo, hi].
pub type Interval = [f64; 2];

/// Box on every design variable. Thickness ratios are fractions, not percent:
/// spar thickness of chord, wing shell of max section thickness, fuselage
/// shell of diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBounds {
    pub s: Interval,
    pub ar: Interval,
    pub n_sp: [u8; 2],
    pub t_sp: Interval,
    pub t_sw: Interval,
    pub d: Interval,
    pub l: Interval,
    pub t_sf: Interval,
}

impl Default for DesignBounds {
    fn default() -> Self {
        Self {
            s: [7.0, 10.0],
            ar: [4.0, 12.0],
            n_sp: [1, 3],
            t_sp: [0.0, 0.20],
            t_sw: [0.0, 0.10],
            d: [0.4, 0.8],
            l: [6.0, 10.0],
            t_sf: [0.005, 0.10],
        }
    }
}

pub(crate) fn contains(iv: Interval, x: f64) -> bool {
    x >= iv[0] && x <= iv[1]
}

impl DesignBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, iv) in [
            ("s", self.s),
            ("ar", self.ar),
            ("t_sp", self.t_sp),
            ("t_sw", self.t_sw),
            ("d", self.d),
            ("l", self.l),
            ("t_sf", self.t_sf),
        ] {
            ensure(iv[0].is_finite() && iv[1].is_finite() && iv[0] <= iv[1], || {
                format!("bound {name} = {iv:?} is not an ordered finite interval")
            })?;
        }
        ensure(self.s[0] > 0.0 && self.ar[0] > 0.0 && self.d[0] > 0.0 && self.l[0] > 0.0, || {
            "geometric lower bounds must be positive".into()
        })?;
        ensure(self.t_sp[0] >= 0.0 && self.t_sw[0] >= 0.0 && self.t_sf[0] >= 0.0, || {
            "thickness bounds must be non-negative".into()
        })?;
        ensure(self.n_sp[0] >= 1 && self.n_sp[1] <= 3 && self.n_sp[0] <= self.n_sp[1], || {
            format!("spar count bounds {:?} must lie within [1, 3]", self.n_sp)
        })
    }

    pub fn spar_counts(&self) -> impl Iterator<Item = u8> {
        self.n_sp[0]..=self.n_sp[1]
    }
}
