//! Lower convex hull of a front in (ln P, ln m_wing) coordinates.

/// Lower hull (monotone chain), sorted by x; duplicate x keep the lowest y.
pub fn lower_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|b, a| a.0 == b.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Hull ordinate at x by linear interpolation; None outside the hull's x
/// range.
pub fn hull_value(hull: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = hull.first()?;
    let last = hull.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    if hull.len() == 1 {
        return Some(first.1);
    }
    let i = hull.partition_point(|p| p.0 <= x).clamp(1, hull.len() - 1);
    let (a, b) = (hull[i - 1], hull[i]);
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

/// Vertical offset of `p` above the lower hull of `cloud` (negative when it
/// lies below); None when p.x is outside the cloud's x range.
pub fn height_above_hull(cloud: &[(f64, f64)], p: (f64, f64)) -> Option<f64> {
    hull_value(&lower_hull(cloud), p.0).map(|y| p.1 - y)
}
