//! Exact area-moment integrals of simple polygons, vertical-strip clipping
//! and inward offsetting of closed outlines.

pub(crate) type Pt = [f64; 2];

/// Signed zeroth, first and second y-moments of a closed polygon
/// (counter-clockwise positive): ∫dA, ∫y dA, ∫y² dA.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub area: f64,
    pub first: f64,
    pub second: f64,
}

impl std::ops::Sub for Moments {
    type Output = Moments;
    fn sub(self, o: Moments) -> Moments {
        Moments { area: self.area - o.area, first: self.first - o.first, second: self.second - o.second }
    }
}

impl std::ops::AddAssign for Moments {
    fn add_assign(&mut self, o: Moments) {
        self.area += o.area;
        self.first += o.first;
        self.second += o.second;
    }
}

pub(crate) fn moments(poly: &[Pt]) -> Moments {
    let n = poly.len();
    if n < 3 {
        return Moments::default();
    }
    let mut m = Moments::default();
    for i in 0..n {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        m.area += cross;
        m.first += (y0 + y1) * cross;
        m.second += (y0 * y0 + y0 * y1 + y1 * y1) * cross;
    }
    m.area /= 2.0;
    m.first /= 6.0;
    m.second /= 12.0;
    m
}

/// Sutherland–Hodgman clip against the half-plane `keep(x)` bounded by the
/// vertical line at `x_cut`.
fn clip_half(poly: &[Pt], x_cut: f64, keep_left: bool) -> Vec<Pt> {
    let inside = |p: &Pt| if keep_left { p[0] <= x_cut } else { p[0] >= x_cut };
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 4);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let t = (x_cut - a[0]) / (b[0] - a[0]);
            out.push([x_cut, a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Part of `poly` within lo ≤ x ≤ hi; infinite bounds are not clipped.
pub(crate) fn clip_strip(poly: &[Pt], lo: f64, hi: f64) -> Vec<Pt> {
    let mut p = poly.to_vec();
    if lo.is_finite() {
        p = clip_half(&p, lo, false);
    }
    if hi.is_finite() && p.len() >= 3 {
        p = clip_half(&p, hi, true);
    }
    p
}

fn unit(v: Pt) -> Pt {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Inward normal of edge a→b for a counter-clockwise polygon.
fn inward_normal(a: Pt, b: Pt) -> Pt {
    let t = unit([b[0] - a[0], b[1] - a[1]]);
    [-t[1], t[0]]
}

/// Miter offset of every vertex of a counter-clockwise closed polygon by `d`
/// toward the interior.
pub(crate) fn miter_offset(poly: &[Pt], d: f64) -> Vec<Pt> {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let prev = poly[(i + n - 1) % n];
            let cur = poly[i];
            let next = poly[(i + 1) % n];
            let n1 = inward_normal(prev, cur);
            let n2 = inward_normal(cur, next);
            let k = d / (1.0 + n1[0] * n2[0] + n1[1] * n2[1]);
            [cur[0] + k * (n1[0] + n2[0]), cur[1] + k * (n1[1] + n2[1])]
        })
        .collect()
}

/// Intersection of segments p0p1 and q0q1, if any.
pub(crate) fn segment_intersection(p0: Pt, p1: Pt, q0: Pt, q1: Pt) -> Option<Pt> {
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [q1[0] - q0[0], q1[1] - q0[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return None;
    }
    let qp = [q0[0] - p0[0], q0[1] - p0[1]];
    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| [p0[0] + t * r[0], p0[1] + t * r[1]])
}

/// Removes the bow-tie loop that a miter offset forms at a sharp vertex.
///
/// `ring[apex]` is the sharp vertex; the chains leaving it in both directions
/// are walked outward in step with each other (ordered by decreasing x) until
/// the first crossing, which replaces the loop.
pub(crate) fn trim_apex_loop(ring: &[Pt], apex: usize) -> Vec<Pt> {
    let n = ring.len();
    let fwd = |k: usize| ring[(apex + k) % n];
    let bwd = |k: usize| ring[(apex + n - k) % n];
    let half = n / 2;
    // Edge indices start at 1 so edges touching the apex are skipped.
    let (mut i, mut j) = (1usize, 1usize);
    while i < half && j < half {
        let (a0, a1) = (fwd(i), fwd(i + 1));
        let (b0, b1) = (bwd(j), bwd(j + 1));
        if let Some(p) = segment_intersection(a0, a1, b0, b1) {
            let mut out = Vec::with_capacity(n);
            out.push(p);
            let start = (apex + i + 1) % n;
            let end = (apex + n - j - 1) % n;
            let mut k = start;
            loop {
                out.push(ring[k]);
                if k == end {
                    break;
                }
                k = (k + 1) % n;
            }
            return out;
        }
        // Advance the chain whose current edge reaches further from the apex
        // side first (larger trailing x).
        if a1[0].min(a0[0]) >= b1[0].min(b0[0]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    ring.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Pt> {
        vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    }

    #[test]
    fn rectangle_moments() {
        let m = moments(&rect(0.0, -1.0, 2.0, 3.0));
        assert_relative_eq!(m.area, 8.0);
        assert_relative_eq!(m.first / m.area, 1.0);
        // ∫y² over y∈[-1,3], width 2: 2·(27+1)/3.
        assert_relative_eq!(m.second, 2.0 * 28.0 / 3.0);
    }

    #[test]
    fn clipping_a_rectangle() {
        let r = rect(0.0, 0.0, 4.0, 1.0);
        assert_relative_eq!(moments(&clip_strip(&r, 1.0, 2.5)).area, 1.5);
        assert_relative_eq!(moments(&clip_strip(&r, f64::NEG_INFINITY, 1.0)).area, 1.0);
        assert_eq!(moments(&clip_strip(&r, 5.0, 6.0)).area, 0.0);
        assert_eq!(moments(&clip_strip(&r, f64::NEG_INFINITY, f64::INFINITY)), moments(&r));
    }

    #[test]
    fn offset_square_shrinks_exactly() {
        let inner = miter_offset(&rect(0.0, 0.0, 2.0, 2.0), 0.25);
        assert_relative_eq!(moments(&inner).area, 1.5 * 1.5, max_relative = 1e-12);
    }

    #[test]
    fn sharp_triangle_offset_matches_incircle_scaling() {
        // Apex at +x, edges subdivided so the miter loop spans many vertices.
        let mut ring = vec![[1.0, 0.0]];
        for k in 1..100 {
            let x = 1.0 - k as f64 / 100.0;
            ring.push([x, 0.1 * (1.0 - x)]);
        }
        ring.push([0.0, 0.1]);
        ring.push([0.0, -0.1]);
        for k in (1..100).rev() {
            let x = 1.0 - k as f64 / 100.0;
            ring.push([x, -0.1 * (1.0 - x)]);
        }
        let area = moments(&ring).area;
        let perimeter = 0.2 + 2.0 * 1.01f64.sqrt();
        let r = 2.0 * area / perimeter;
        let d = 0.01;
        let trimmed = trim_apex_loop(&miter_offset(&ring, d), 0);
        let expected = area * ((r - d) / r).powi(2);
        assert_relative_eq!(moments(&trimmed).area, expected, max_relative = 1e-9);
    }
}
