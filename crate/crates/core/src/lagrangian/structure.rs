//! Lagrangian node sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One curve inside a [`StructureState`]: nodes `offset..offset+len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub offset: usize,
    pub len: usize,
    /// Lagrangian parameter spacing.
    pub ds: f64,
    pub closed: bool,
}

impl Body {
    pub fn nodes(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }

    /// Number of edges (`len` when closed, `len - 1` when open).
    pub fn n_edges(&self) -> usize {
        if self.closed {
            self.len
        } else {
            self.len.saturating_sub(1)
        }
    }

    /// Global node indices of edge `e` (local numbering).
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.offset + e, self.offset + (e + 1) % self.len)
    }
}

/// Node positions of one or more curves, stored stacked as
/// `[x_0 .. x_{n-1}, y_0 .. y_{n-1}]`, which is the column order of the
/// spread matrix and of the reduced state.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureState {
    x: Vec<f64>,
    bodies: Vec<Body>,
}

impl StructureState {
    /// Single curve from explicit points.
    pub fn from_points(points: &[[f64; 2]], ds: f64, closed: bool) -> Result<Self> {
        if closed && points.len() < 3 {
            return Err(Error::Degenerate(format!(
                "closed curve needs at least 3 nodes, got {}",
                points.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::Degenerate("empty structure".into()));
        }
        if !(ds > 0.0) {
            return Err(Error::InvalidParameter(format!("ds must be positive, got {ds}")));
        }
        let mut x: Vec<f64> = points.iter().map(|p| p[0]).collect();
        x.extend(points.iter().map(|p| p[1]));
        Ok(StructureState {
            x,
            bodies: vec![Body {
                offset: 0,
                len: points.len(),
                ds,
                closed,
            }],
        })
    }

    /// Closed ellipse with semi-axes `a` (x) and `b` (y), node 0 on the
    /// positive-x apex, counter-clockwise, `ds = 2 pi / n`.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64, n: usize) -> Result<Self> {
        Self::rotated_ellipse(center, a, b, 0.0, n)
    }

    /// As [`StructureState::ellipse`] with the x semi-axis rotated by `angle`.
    pub fn rotated_ellipse(center: [f64; 2], a: f64, b: f64, angle: f64, n: usize) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let (px, py) = (a * t.cos(), b * t.sin());
                [center[0] + c * px - s * py, center[1] + s * px + c * py]
            })
            .collect();
        Self::from_points(&pts, 2.0 * std::f64::consts::PI / n as f64, true)
    }

    /// Ellipse with nodes equally spaced in arc length (up to polyline
    /// refinement error), node 0 on the apex of the rotated x semi-axis,
    /// counter-clockwise, and `ds` equal to the mean chord so the mean rest
    /// strain `|dX/ds|` is one.
    pub fn ellipse_equal_arc(center: [f64; 2], a: f64, b: f64, angle: f64, n: usize) -> Result<Self> {
        let m = 256 * n.max(1);
        let pt = |t: f64| (a * t.cos(), b * t.sin());
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        let mut prev = pt(0.0);
        for k in 1..=m {
            let q = pt(2.0 * std::f64::consts::PI * k as f64 / m as f64);
            let last = *cum.last().expect("non-empty");
            cum.push(last + (q.0 - prev.0).hypot(q.1 - prev.1));
            prev = q;
        }
        let total = cum[m];
        let (s, c) = angle.sin_cos();
        let mut pts = Vec::with_capacity(n);
        let mut seg = 0;
        for k in 0..n {
            let target = total * k as f64 / n as f64;
            while cum[seg + 1] < target {
                seg += 1;
            }
            let f = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
            let t = 2.0 * std::f64::consts::PI * (seg as f64 + f) / m as f64;
            let (px, py) = pt(t);
            pts.push([center[0] + c * px - s * py, center[1] + s * px + c * py]);
        }
        let chords: f64 = (0..n)
            .map(|k| {
                let (p, q) = (pts[k], pts[(k + 1) % n]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum();
        Self::from_points(&pts, chords / n as f64, true)
    }

    /// Concatenates several structures into one state, keeping bodies separate.
    pub fn concat(parts: &[StructureState]) -> Self {
        let n: usize = parts.iter().map(|p| p.n_nodes()).sum();
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut bodies = Vec::new();
        for p in parts {
            let off = xs.len();
            xs.extend_from_slice(p.xs());
            ys.extend_from_slice(p.ys());
            bodies.extend(p.bodies.iter().map(|b| Body {
                offset: b.offset + off,
                ..*b
            }));
        }
        xs.extend(ys);
        StructureState { x: xs, bodies }
    }

    pub fn n_nodes(&self) -> usize {
        self.x.len() / 2
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn node(&self, k: usize) -> [f64; 2] {
        [self.x[k], self.x[self.n_nodes() + k]]
    }

    pub fn set_node(&mut self, k: usize, p: [f64; 2]) {
        let n = self.n_nodes();
        self.x[k] = p[0];
        self.x[n + k] = p[1];
    }

    pub fn xs(&self) -> &[f64] {
        &self.x[..self.n_nodes()]
    }

    pub fn ys(&self) -> &[f64] {
        &self.x[self.n_nodes()..]
    }

    /// Stacked coordinates `[x.., y..]`.
    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn positions_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    /// Adds `scale * v` to the stacked coordinates.
    pub fn advance(&mut self, v: &[f64], scale: f64) {
        debug_assert_eq!(v.len(), self.x.len());
        self.x.iter_mut().zip(v).for_each(|(x, v)| *x += scale * v);
    }

    pub fn centroid(&self, body: usize) -> [f64; 2] {
        let b = &self.bodies[body];
        let n = b.len as f64;
        let (sx, sy) = b
            .nodes()
            .map(|k| self.node(k))
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    /// Axis-aligned bounding box `(min, max)` over all nodes.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for k in 0..self.n_nodes() {
            let p = self.node(k);
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Largest node-to-node distance.
    pub fn diameter(&self) -> f64 {
        let n = self.n_nodes();
        let mut d2 = 0.0f64;
        for i in 0..n {
            let p = self.node(i);
            for j in i + 1..n {
                let q = self.node(j);
                d2 = d2.max((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2));
            }
        }
        d2.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite())
    }

    /// Closest pair of distinct nodes, `(i, j, distance)`.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let n = self.n_nodes();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            let p = self.node(i);
            for j in i + 1..n {
                let q = self.node(j);
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                if best.map_or(true, |b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }
}
