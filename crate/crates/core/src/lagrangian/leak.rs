//! Node-spacing check that keeps the discrete membrane impermeable.

use super::structure::StructureState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeakStatus {
    Ok { max_gap: f64 },
    Violated { max_gap: f64 },
}

impl LeakStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, LeakStatus::Ok { .. })
    }

    pub fn max_gap(&self) -> f64 {
        match *self {
            LeakStatus::Ok { max_gap } | LeakStatus::Violated { max_gap } => max_gap,
        }
    }
}

/// Largest distance between consecutive nodes of any body (wrapping on closed ones).
pub fn max_node_gap(x: &StructureState) -> f64 {
    let mut gap = 0.0f64;
    for body in x.bodies() {
        for e in 0..body.n_edges() {
            let (i, j) = body.edge(e);
            let (p, q) = (x.node(i), x.node(j));
            gap = gap.max((q[0] - p[0]).hypot(q[1] - p[1]));
        }
    }
    gap
}

/// Requires every consecutive gap to be below `h/2`.
pub fn check_leak(x: &StructureState, h: f64) -> LeakStatus {
    let max_gap = max_node_gap(x);
    if max_gap < 0.5 * h {
        LeakStatus::Ok { max_gap }
    } else {
        LeakStatus::Violated { max_gap }
    }
}
