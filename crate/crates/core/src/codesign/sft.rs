//! Steady-flight geometry: every (s, AR) meeting a power requirement, and
//! the most compact of them under a mass surrogate.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Relative AR tolerance of the root bisection.
const ROOT_TOL: f64 = 1e-6;

/// Mass surrogate minimized by the steady-flight optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surrogate {
    #[default]
    Span,
    /// s³/AR².
    WingVolume,
}

impl Surrogate {
    pub fn value(self, s: f64, ar: f64) -> f64 {
        match self {
            Surrogate::Span => s,
            Surrogate::WingVolume => s * s * s / (ar * ar),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryPoint {
    pub s: f64,
    pub ar: f64,
    pub p_gen: f64,
}

/// All AR roots of P(s, AR) = P_req for each s on the grid: sign scan over
/// `scan` intervals, then bisection to a relative AR tolerance of 1e-6.
pub fn sft_enumerate<F>(
    p_req: f64,
    power: F,
    s_grid: &[f64],
    ar_range: [f64; 2],
    scan: usize,
) -> Result<Vec<GeometryPoint>>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    ensure(p_req > 0.0 && p_req.is_finite(), || format!("P_req must be positive, got {p_req}"))?;
    ensure(scan >= 1 && ar_range[1] >= ar_range[0], || "AR scan needs an ordered range and >= 1 interval".into())?;
    let mut out = Vec::new();
    for &s in s_grid {
        let f = |ar: f64| power(s, ar).map(|p| p - p_req);
        let step = (ar_range[1] - ar_range[0]) / scan as f64;
        let mut a = ar_range[0];
        let mut fa = f(a)?;
        if fa == 0.0 {
            out.push(GeometryPoint { s, ar: a, p_gen: p_req });
        }
        for i in 1..=scan {
            let b = if i == scan { ar_range[1] } else { ar_range[0] + step * i as f64 };
            let fb = f(b)?;
            if fb == 0.0 {
                out.push(GeometryPoint { s, ar: b, p_gen: p_req });
            } else if fa != 0.0 && (fa < 0.0) != (fb < 0.0) {
                let ar = bisect(&f, a, b, fa)?;
                out.push(GeometryPoint { s, ar, p_gen: power(s, ar)? });
            }
            (a, fa) = (b, fb);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySet { p_req });
    }
    Ok(out)
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    while (b - a) > ROOT_TOL * a.abs().max(b.abs()) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            (a, fa) = (m, fm);
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Minimizer of the surrogate over an enumerated set; ties go to the larger
/// AR.
pub fn sfot(points: &[GeometryPoint], surrogate: Surrogate) -> Result<GeometryPoint> {
    points
        .iter()
        .copied()
        .min_by(|x, y| surrogate.value(x.s, x.ar).total_cmp(&surrogate.value(y.s, y.ar)).then(y.ar.total_cmp(&x.ar)))
        .ok_or_else(|| Error::InvalidInput("steady-flight set is empty".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bowl(s: f64, ar: f64) -> Result<f64> {
        Ok(s * s * (10.0 - (ar - 6.0).powi(2)))
    }

    #[test]
    fn constructed_root_is_recovered() {
        let p = bowl(8.0, 7.3).unwrap();
        let pts = sft_enumerate(p, bowl, &[8.0], [4.0, 12.0], 64).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().any(|g| (g.ar - 7.3).abs() < 1e-6 * 7.3));
        assert!(pts.iter().any(|g| (g.ar - 4.7).abs() < 1e-6 * 4.7));
        for g in &pts {
            assert_relative_eq!(g.p_gen, p, max_relative = 1e-5);
        }
    }

    #[test]
    fn unreachable_power_is_empty() {
        let err = sft_enumerate(1e9, bowl, &[7.0, 8.0], [4.0, 12.0], 32).unwrap_err();
        assert!(matches!(err, Error::EmptySet { .. }));
    }

    #[test]
    fn surrogates_pick_their_argmin() {
        let pts = [
            GeometryPoint { s: 8.0, ar: 5.0, p_gen: 1.0 },
            GeometryPoint { s: 7.5, ar: 4.0, p_gen: 1.0 },
            GeometryPoint { s: 9.0, ar: 9.0, p_gen: 1.0 },
        ];
        assert_eq!(sfot(&pts, Surrogate::Span).unwrap().s, 7.5);
        // 7.5³/16 = 26.4, 8³/25 = 20.5, 9³/81 = 9.
        assert_eq!(sfot(&pts, Surrogate::WingVolume).unwrap().s, 9.0);
        let single = [pts[0]];
        assert_eq!(sfot(&single, Surrogate::Span).unwrap(), sfot(&single, Surrogate::WingVolume).unwrap());
    }

    #[test]
    fn span_ties_prefer_larger_ar() {
        let pts = [GeometryPoint { s: 8.0, ar: 5.0, p_gen: 1.0 }, GeometryPoint { s: 8.0, ar: 6.0, p_gen: 1.0 }];
        assert_eq!(sfot(&pts, Surrogate::Span).unwrap().ar, 6.0);
    }
}
