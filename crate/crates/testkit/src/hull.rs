//! Cubic-time convex hull: a pair (i, j) is a hull edge when every other
//! point lies strictly left of i→j or on the closed segment between them.

fn orient(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Hull vertex set sorted lexicographically, collinear boundary points
/// excluded. Empty when all points are collinear.
pub fn hull_vertices(points: &[[f64; 2]], eps: f64) -> Vec<[f64; 2]> {
    let mut uniq: Vec<[f64; 2]> = points.to_vec();
    uniq.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    uniq.dedup();
    let mut out = Vec::new();
    for i in 0..uniq.len() {
        for j in 0..uniq.len() {
            if i == j {
                continue;
            }
            let (a, b) = (uniq[i], uniq[j]);
            let mut has_left = false;
            let edge = uniq.iter().enumerate().all(|(m, &p)| {
                if m == i || m == j {
                    return true;
                }
                let o = orient(a, b, p);
                if o > eps {
                    has_left = true;
                    true
                } else {
                    o.abs() <= eps && on_segment(p, a, b)
                }
            });
            if edge && has_left {
                out.push(a);
                out.push(b);
            }
        }
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out.dedup();
    out
}

/// Whether `p` is strictly inside triangle `abc` of either orientation.
pub fn strictly_inside_triangle(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    (d1 > 0.0 && d2 > 0.0 && d3 > 0.0) || (d1 < 0.0 && d2 < 0.0 && d3 < 0.0)
}
