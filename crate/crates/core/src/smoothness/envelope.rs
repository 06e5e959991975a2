//! Minimal two-parameter upper bounds `a * x_k + b >= v_k`.

/// Finds `(a, b) >= 0` minimizing `sum_k (a * x_k + b)` subject to
/// `a * x_k + b >= v_k` for every `k`, with all `x_k >= 0`.
///
/// The objective is convex and piecewise linear in `a` once `b` is set to
/// its least feasible value, so the optimum sits at `a = 0`, at a breakpoint
/// of the upper envelope of the lines `v_k - a * x_k`, or where that envelope
/// crosses zero. Ties prefer the smaller `a`.
pub(crate) fn fit_envelope(points: &[(f64, f64)]) -> (f64, f64) {
    assert!(!points.is_empty());
    let sum_x: f64 = points.iter().map(|p| p.0).sum();
    let k = points.len() as f64;
    let b_at = |a: f64| {
        points
            .iter()
            .map(|&(x, v)| v - a * x)
            .fold(0.0_f64, f64::max)
    };
    let cost = |a: f64| a * sum_x + k * b_at(a);

    // lines y = c + m a with slope m = -x, intercept c = v
    let mut lines: Vec<(f64, f64)> = points.iter().map(|&(x, v)| (-x, v)).collect();
    lines.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.total_cmp(&p.1)));
    lines.dedup_by(|cur, prev| cur.0 == prev.0);
    let cross = |l1: (f64, f64), l2: (f64, f64)| (l1.1 - l2.1) / (l2.0 - l1.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for l in lines {
        while hull.len() >= 2 {
            let n = hull.len();
            if cross(hull[n - 2], l) <= cross(hull[n - 2], hull[n - 1]) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }

    let mut candidates = vec![0.0];
    candidates.extend(
        hull.windows(2)
            .map(|w| cross(w[0], w[1]))
            .filter(|a| a.is_finite() && *a > 0.0),
    );
    if points.iter().all(|p| p.0 > 0.0) {
        let root = points.iter().map(|&(x, v)| v / x).fold(0.0_f64, f64::max);
        candidates.push(root);
    }

    let mut best = (0.0, cost(0.0));
    for a in candidates {
        let c = cost(a);
        if c < best.1 || (c == best.1 && a < best.0) {
            best = (a, c);
        }
    }
    (best.0, b_at(best.0))
}
