//! Brute-force reference computations shared by the integration tests. They
//! deliberately share no code with the library beyond its public types.
#![allow(dead_code)]

use kite_core::hydro::FoilCoeffs;

/// max C_L³/C_D² by exhaustive scan at `step` rad.
pub fn glide_cubed_scan(foil: &FoilCoeffs, ar: f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let slope = 2.0 * std::f64::consts::PI * foil.gamma / (1.0 + 2.0 * foil.gamma / (foil.e_l * ar));
    let k = 1.0 / (std::f64::consts::PI * foil.e_d * ar) + foil.k_visc;
    let n = ((hi - lo) / step).floor() as usize;
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..=n {
        let a = lo + step * i as f64;
        let cl = slope * a + foil.c_l0;
        let cd = k * (cl - foil.c_lx).powi(2) + foil.c_d0;
        let v = cl.powi(3) / (cd * cd);
        if v > best.1 {
            best = (a, v);
        }
    }
    best
}

/// NACA four-digit surface points (closed trailing edge), upper then lower,
/// each from leading to trailing edge.
fn naca_surfaces(m: f64, p: f64, t: f64, n: usize) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let mut up = Vec::with_capacity(n);
    let mut lo = Vec::with_capacity(n);
    for i in 0..n {
        let beta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        let x = 0.5 * (1.0 - beta.cos());
        let yt = 5.0 * t * (0.2969 * x.sqrt() - 0.1260 * x - 0.3516 * x * x + 0.2843 * x.powi(3) - 0.1036 * x.powi(4));
        let (yc, dyc) = if x < p {
            (m / (p * p) * (2.0 * p * x - x * x), 2.0 * m / (p * p) * (p - x))
        } else {
            (
                m / ((1.0 - p) * (1.0 - p)) * (1.0 - 2.0 * p + 2.0 * p * x - x * x),
                2.0 * m / ((1.0 - p) * (1.0 - p)) * (p - x),
            )
        };
        let th = dyc.atan();
        up.push([x - yt * th.sin(), yc + yt * th.cos()]);
        lo.push([x + yt * th.sin(), yc - yt * th.cos()]);
    }
    (up, lo)
}

struct Segments {
    segs: Vec<([f64; 2], [f64; 2])>,
    max_len: f64,
}

impl Segments {
    fn new(mut segs: Vec<([f64; 2], [f64; 2])>) -> Self {
        for s in &mut segs {
            if s.0[0] > s.1[0] {
                std::mem::swap(&mut s.0, &mut s.1);
            }
        }
        segs.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
        let max_len = segs.iter().map(|s| s.1[0] - s.0[0]).fold(0.0, f64::max);
        Self { segs, max_len }
    }

    /// Segments whose x-extent meets [x0, x1].
    fn near(&self, x0: f64, x1: f64) -> impl Iterator<Item = &([f64; 2], [f64; 2])> {
        let start = self.segs.partition_point(|s| s.0[0] < x0 - self.max_len);
        let end = self.segs.partition_point(|s| s.0[0] <= x1);
        self.segs[start..end].iter().filter(move |s| s.1[0] >= x0)
    }

    fn distance(&self, q: [f64; 2], cutoff: f64) -> f64 {
        let mut best = f64::INFINITY;
        for (a, b) in self.near(q[0] - cutoff, q[0] + cutoff) {
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t =
                if len2 > 0.0 { (((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let px = a[0] + t * d[0] - q[0];
            let py = a[1] + t * d[1] - q[1];
            best = best.min(px.hypot(py));
        }
        best
    }

    /// Lowest and highest crossing of the vertical line at x.
    fn column(&self, x: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in self.near(x, x) {
            if b[0] == a[0] {
                continue;
            }
            let y = a[1] + (x - a[0]) / (b[0] - a[0]) * (b[1] - a[1]);
            lo = lo.min(y);
            hi = hi.max(y);
        }
        (hi > lo).then_some((lo, hi))
    }
}

/// Area and centroidal second moment of a unit-chord spar-and-shell section by
/// column integration. The shell's inner boundary in each column is located
/// by bisection on the distance to the outline.
pub fn section_by_columns(naca: (f64, f64, f64), n_sp: u8, t_sp: f64, t_sw: f64, columns: usize) -> (f64, f64) {
    let (m, p, t) = naca;
    let (up, lo) = naca_surfaces(m, p, t, 1200);
    let mut segs = Vec::new();
    for w in up.windows(2).chain(lo.windows(2)) {
        segs.push((w[0], w[1]));
    }
    let outline = Segments::new(segs);
    let d = t_sw * t;
    let stations: &[f64] = match n_sp {
        1 => &[0.25],
        2 => &[0.10, 0.40],
        _ => &[0.15, 0.30, 0.60],
    };
    let x_min = up.iter().chain(&lo).map(|q| q[0]).fold(f64::INFINITY, f64::min);
    let dx = (1.0 - x_min) / columns as f64;
    let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
    let mut add = |y0: f64, y1: f64| {
        a0 += (y1 - y0) * dx;
        a1 += (y1 * y1 - y0 * y0) / 2.0 * dx;
        a2 += (y1.powi(3) - y0.powi(3)) / 3.0 * dx;
    };
    for k in 0..columns {
        let x = x_min + (k as f64 + 0.5) * dx;
        let Some((yl, yu)) = outline.column(x) else { continue };
        let in_spar = t_sp > 0.0 && stations.iter().any(|s| (x - s).abs() <= t_sp / 2.0);
        let ym = 0.5 * (yl + yu);
        if in_spar {
            add(yl, yu);
            continue;
        }
        if d == 0.0 {
            continue;
        }
        if outline.distance([x, ym], d) <= d {
            add(yl, yu);
            continue;
        }
        let find = |mut inside: f64, mut edge: f64| {
            for _ in 0..40 {
                let mid = 0.5 * (inside + edge);
                if outline.distance([x, mid], d) >= d {
                    inside = mid;
                } else {
                    edge = mid;
                }
            }
            0.5 * (inside + edge)
        };
        let y_il = find(ym, yl);
        let y_iu = find(ym, yu);
        add(yl, y_il);
        add(y_iu, yu);
    }
    let ybar = a1 / a0;
    (a0, a2 - a0 * ybar * ybar)
}
