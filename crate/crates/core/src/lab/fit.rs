use serde::{Deserialize, Serialize};

/// A local slope below this fraction of the first one marks the floor.
pub const FLOOR_SLOPE_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    /// Log-log slope over the pre-floor points; absent when fewer than
    /// three points precede the floor.
    pub order: Option<f64>,
    /// First eps judged to be floor-dominated.
    pub floor_eps: Option<f64>,
    /// Number of leading points used in the fit.
    pub pre_floor_points: usize,
    /// Slope over however many pre-floor points exist (at least two).
    pub raw_order: Option<f64>,
    pub status: String,
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, y) in points {
        num += (x.ln() - mx) * (y.ln() - my);
        den += (x.ln() - mx).powi(2);
    }
    num / den
}

/// Least-squares slope of `log err` against `log eps`. Points are taken in
/// order of decreasing eps while the error keeps decreasing and the local
/// slope stays above `FLOOR_SLOPE_RATIO` times the first one.
pub fn fit_convergence(points: &[(f64, f64)]) -> ConvergenceFit {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(e, r)| e > 0.0 && r.is_finite())
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut used = usize::from(pts.first().is_some_and(|p| p.1 > 0.0));
    let mut first_slope = None;
    while used > 0 && used < pts.len() {
        let (a, b) = (pts[used - 1], pts[used]);
        if !(b.1 > 0.0 && b.1 < a.1) {
            break;
        }
        let s = (a.1 / b.1).ln() / (a.0 / b.0).ln();
        let s0 = *first_slope.get_or_insert(s);
        if s < FLOOR_SLOPE_RATIO * s0 {
            break;
        }
        used += 1;
    }
    let floor_eps = pts.get(used).map(|p| p.0);
    let raw_order = (used >= 2).then(|| slope(&pts[..used]));
    let (order, status) = if used >= 3 {
        (raw_order, "ok".to_string())
    } else {
        (None, "floor-dominated".to_string())
    };
    ConvergenceFit {
        order,
        floor_eps,
        pre_floor_points: used,
        raw_order,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&e: &f64| (e, 3.0 * e.sqrt()))
            .collect();
        let f = fit_convergence(&pts);
        assert!((f.order.unwrap() - 0.5).abs() < 1e-6);
        assert_eq!(f.floor_eps, None);
        assert_eq!(f.pre_floor_points, 5);
    }

    #[test]
    fn floor_is_detected() {
        // the local slope halves once eps drops below about 0.7 times the floor
        let pts: Vec<(f64, f64)> = (0..16)
            .map(|i| {
                let e = 0.2 * 0.5f64.powi(i);
                (e, 2.0 * e + 1e-4)
            })
            .collect();
        let f = fit_convergence(&pts);
        assert!((f.order.unwrap() - 1.0).abs() < 0.1, "{f:?}");
        assert!(f.floor_eps.is_some());
        assert!(f.pre_floor_points >= 3 && f.pre_floor_points < 16);
    }

    #[test]
    fn too_few_points() {
        let f = fit_convergence(&[(0.2, 0.1), (0.1, 0.05), (0.05, 0.06)]);
        assert_eq!(f.order, None);
        assert_eq!(f.status, "floor-dominated");
        assert_eq!(f.floor_eps, Some(0.05));
        assert!((f.raw_order.unwrap() - 1.0).abs() < 1e-12);
    }
}
