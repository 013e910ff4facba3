use serde::Serialize;

use crate::lagrangian::StructureState;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShapeMetrics {
    pub perimeter: f64,
    /// Enclosed polygon area (absolute).
    pub area: f64,
    /// `(p - p0) / p0`.
    pub delta_p: f64,
    /// `A / (p^2 / 4 pi)`.
    pub swelling: f64,
    pub self_intersecting: bool,
}

fn ring(x: &StructureState, body: usize) -> Vec<[f64; 2]> {
    x.bodies()[body].nodes().map(|k| x.node(k)).collect()
}

/// Shoelace area, positive for counter-clockwise ordering.
pub fn signed_area(x: &StructureState, body: usize) -> f64 {
    let p = ring(x, body);
    let n = p.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

pub fn perimeter(x: &StructureState, body: usize) -> f64 {
    let b = x.bodies()[body];
    (0..b.n_edges())
        .map(|e| {
            let (i, j) = b.edge(e);
            let (p, q) = (x.node(i), x.node(j));
            (q[0] - p[0]).hypot(q[1] - p[1])
        })
        .sum()
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// True if two non-adjacent edges of the closed polygon cross.
pub fn self_intersects(x: &StructureState, body: usize) -> bool {
    let p = ring(x, body);
    let n = p.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

pub fn shape_metrics(x: &StructureState, body: usize, p0: f64) -> ShapeMetrics {
    let p = perimeter(x, body);
    let area = signed_area(x, body).abs();
    ShapeMetrics {
        perimeter: p,
        area,
        delta_p: (p - p0) / p0,
        swelling: 4.0 * std::f64::consts::PI * area / (p * p),
        self_intersecting: self_intersects(x, body),
    }
}

/// Orientation of the major principal axis of the enclosed area, measured
/// from the +y axis towards +x, in `(-pi/2, pi/2]`.
pub fn principal_angle(x: &StructureState, body: usize) -> f64 {
    let p = ring(x, body);
    let n = p.len();
    let (mut a, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    // Shift to the first node to limit cancellation.
    let o = p[0];
    for i in 0..n {
        let (u, v) = (p[i], p[(i + 1) % n]);
        let (x0, y0, x1, y1) = (u[0] - o[0], u[1] - o[1], v[0] - o[0], v[1] - o[1]);
        let c = x0 * y1 - x1 * y0;
        a += c;
        sx += (x0 + x1) * c;
        sy += (y0 + y1) * c;
        sxx += (x0 * x0 + x0 * x1 + x1 * x1) * c;
        syy += (y0 * y0 + y0 * y1 + y1 * y1) * c;
        sxy += (x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * c;
    }
    a *= 0.5;
    let (cx, cy) = (sx / (6.0 * a), sy / (6.0 * a));
    let ixx = sxx / 12.0 - a * cx * cx;
    let iyy = syy / 12.0 - a * cy * cy;
    let ixy = sxy / 24.0 - a * cx * cy;
    let alpha = 0.5 * (2.0 * ixy).atan2(ixx - iyy);
    let theta = std::f64::consts::FRAC_PI_2 - alpha;
    // Fold into (-pi/2, pi/2].
    let pi = std::f64::consts::PI;
    let mut t = theta % pi;
    if t > 0.5 * pi {
        t -= pi;
    } else if t <= -0.5 * pi {
        t += pi;
    }
    t
}

/// Tracks an axis angle (defined modulo pi) on a continuous branch.
#[derive(Clone, Copy, Debug, Default)]
pub struct AngleTracker {
    last: Option<f64>,
}

impl AngleTracker {
    pub fn update(&mut self, raw: f64) -> f64 {
        let pi = std::f64::consts::PI;
        let v = match self.last {
            None => raw,
            Some(prev) => raw + ((prev - raw) / pi).round() * pi,
        };
        self.last = Some(v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn regular_polygon_metrics() {
        let s = StructureState::ellipse([0.3, -0.2], 1.0, 1.0, 256).unwrap();
        let m = shape_metrics(&s, 0, 2.0 * PI);
        assert!((m.perimeter - 2.0 * PI).abs() < 2e-4);
        assert!((m.swelling - 1.0).abs() < 1e-3);
        assert!(m.swelling <= 1.0 + 1e-9);
        assert!(!m.self_intersecting);
        assert!(m.delta_p < 0.0 && m.delta_p > -1e-4);
    }

    #[test]
    fn detects_figure_eight() {
        let pts = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        let s = StructureState::from_points(&pts, 1.0, true).unwrap();
        assert!(self_intersects(&s, 0));
    }

    #[test]
    fn principal_angle_of_rotated_ellipses() {
        for &rot in &[0.0, 0.3, -0.7, 1.2] {
            // Major axis along y rotated clockwise by `rot`.
            let s = StructureState::rotated_ellipse([1.0, 2.0], 0.2, 0.3, -rot, 200).unwrap();
            assert!((principal_angle(&s, 0) - rot).abs() < 1e-10, "{rot}");
        }
    }

    #[test]
    fn tracker_unwraps() {
        let mut t = AngleTracker::default();
        let seq = [1.4, 1.55, -1.5, -1.3];
        let out: Vec<f64> = seq.iter().map(|&v| t.update(v)).collect();
        assert!((out[2] - (PI - 1.5)).abs() < 1e-12);
        assert!((out[3] - (PI - 1.3)).abs() < 1e-12);
    }
}
