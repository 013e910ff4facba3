//! Structure force models. Every model is the exact negative gradient of a
//! discrete energy, so the nodal output is already the `F * ds` weighting used
//! by the spread step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::structure::StructureState;

/// One contribution to the structure force.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForceTerm {
    /// `W = sum_k (sigma/2) (|D_k|/ds - L)^2 ds` over the edges `D_k` of every body.
    ElasticFiber { sigma: f64, rest: f64 },
    /// `E_b = sigma_b sum_i (1 - cos(theta_i - theta0_i))` at every interior vertex.
    Bending { sigma_b: f64, reference: Vec<f64> },
    /// Binding/repulsion between the nodes of two bodies, see [`pair_magnitude`].
    Pair {
        a: f64,
        b: f64,
        s: f64,
        lambda: f64,
        cutoff: f64,
        bodies: (usize, usize),
    },
    /// Constant applied nodal force (stacked layout), `W = -F . X`.
    External { force: Vec<f64> },
}

/// Sum of [`ForceTerm`]s.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceModel {
    pub terms: Vec<ForceTerm>,
}

/// Signed pair force along the unit vector from the partner node:
/// repulsion `a d + b d^3` minus binding `s (d - lambda)`.
pub fn pair_magnitude(a: f64, b: f64, s: f64, lambda: f64, d: f64) -> f64 {
    a * d + b * d * d * d - s * (d - lambda)
}

fn pair_potential(a: f64, b: f64, s: f64, lambda: f64, d: f64) -> f64 {
    -(0.5 * a * d * d + 0.25 * b * d.powi(4) - s * (0.5 * d * d - lambda * d))
}

/// Turning angle at every vertex of `x` (zero at open-curve end points).
pub fn turning_angles(x: &StructureState) -> Vec<f64> {
    let mut out = vec![0.0; x.n_nodes()];
    for body in x.bodies() {
        for_each_vertex(x, body, |i, prev, next| {
            let (p, q, r) = (x.node(prev), x.node(i), x.node(next));
            let a = [q[0] - p[0], q[1] - p[1]];
            let b = [r[0] - q[0], r[1] - q[1]];
            out[i] = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        });
    }
    out
}

fn for_each_vertex(
    x: &StructureState,
    body: &super::structure::Body,
    mut f: impl FnMut(usize, usize, usize),
) {
    let _ = x;
    let n = body.len;
    if n < 3 {
        return;
    }
    let range = if body.closed { 0..n } else { 1..n - 1 };
    for l in range {
        let i = body.offset + l;
        let prev = body.offset + (l + n - 1) % n;
        let next = body.offset + (l + 1) % n;
        f(i, prev, next);
    }
}

impl ForceTerm {
    pub fn validate(&self, x: &StructureState) -> Result<()> {
        match self {
            ForceTerm::ElasticFiber { sigma, rest } => {
                if !(*sigma > 0.0) || !(*rest >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "elastic fiber needs sigma > 0 and L >= 0, got sigma = {sigma}, L = {rest}"
                    )));
                }
            }
            ForceTerm::Bending { sigma_b, reference } => {
                if !(*sigma_b > 0.0) {
                    return Err(Error::InvalidParameter(format!("bending needs sigma_b > 0, got {sigma_b}")));
                }
                if reference.len() != x.n_nodes() {
                    return Err(Error::Dimension {
                        context: "bending reference angles",
                        expected: x.n_nodes(),
                        got: reference.len(),
                    });
                }
            }
            ForceTerm::Pair { cutoff, bodies, .. } => {
                if !(*cutoff > 0.0) {
                    return Err(Error::InvalidParameter(format!("pair cutoff must be positive, got {cutoff}")));
                }
                let nb = x.bodies().len();
                if bodies.0 >= nb || bodies.1 >= nb || bodies.0 == bodies.1 {
                    return Err(Error::InvalidParameter(format!(
                        "pair interaction needs two distinct bodies out of {nb}, got {bodies:?}"
                    )));
                }
            }
            ForceTerm::External { force } => {
                if force.len() != 2 * x.n_nodes() {
                    return Err(Error::Dimension {
                        context: "external force",
                        expected: 2 * x.n_nodes(),
                        got: force.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Adds this term's nodal force into `out` (stacked layout).
    pub fn accumulate(&self, x: &StructureState, out: &mut [f64]) -> Result<()> {
        let n = x.n_nodes();
        match self {
            ForceTerm::ElasticFiber { sigma, rest } => {
                for body in x.bodies() {
                    for e in 0..body.n_edges() {
                        let (i, j) = body.edge(e);
                        let (p, q) = (x.node(i), x.node(j));
                        let d = [q[0] - p[0], q[1] - p[1]];
                        let len = d[0].hypot(d[1]);
                        if len == 0.0 {
                            return Err(Error::Degenerate(format!("zero-length edge between nodes {i} and {j}")));
                        }
                        // dW/dD = sigma (|D|/ds - L) D/|D|
                        let c = sigma * (len / body.ds - rest) / len;
                        for k in 0..2 {
                            out[k * n + i] += c * d[k];
                            out[k * n + j] -= c * d[k];
                        }
                    }
                }
            }
            ForceTerm::Bending { sigma_b, reference } => {
                for body in x.bodies() {
                    let mut err = None;
                    for_each_vertex(x, body, |i, prev, next| {
                        let (p, q, r) = (x.node(prev), x.node(i), x.node(next));
                        let a = [q[0] - p[0], q[1] - p[1]];
                        let b = [r[0] - q[0], r[1] - q[1]];
                        let (a2, b2) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1]);
                        if a2 == 0.0 || b2 == 0.0 {
                            err.get_or_insert(i);
                            return;
                        }
                        let theta = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
                        let de = sigma_b * (theta - reference[i]).sin();
                        let da = [a[1] / a2, -a[0] / a2];
                        let db = [-b[1] / b2, b[0] / b2];
                        for k in 0..2 {
                            out[k * n + prev] += de * da[k];
                            out[k * n + i] -= de * (da[k] - db[k]);
                            out[k * n + next] -= de * db[k];
                        }
                    });
                    if let Some(i) = err {
                        return Err(Error::Degenerate(format!("zero-length edge at bending vertex {i}")));
                    }
                }
            }
            ForceTerm::Pair {
                a,
                b,
                s,
                lambda,
                cutoff,
                bodies,
            } => {
                let (ba, bb) = (x.bodies()[bodies.0], x.bodies()[bodies.1]);
                for i in ba.nodes() {
                    let p = x.node(i);
                    for j in bb.nodes() {
                        let q = x.node(j);
                        let d = [p[0] - q[0], p[1] - q[1]];
                        let dist = d[0].hypot(d[1]);
                        if dist >= *cutoff {
                            continue;
                        }
                        if dist == 0.0 {
                            return Err(Error::Degenerate(format!("coincident nodes {i} and {j} in pair force")));
                        }
                        let f = pair_magnitude(*a, *b, *s, *lambda, dist) / dist;
                        for k in 0..2 {
                            out[k * n + i] += f * d[k];
                            out[k * n + j] -= f * d[k];
                        }
                    }
                }
            }
            ForceTerm::External { force } => {
                out.iter_mut().zip(force).for_each(|(o, f)| *o += f);
            }
        }
        Ok(())
    }

    pub fn energy(&self, x: &StructureState) -> f64 {
        match self {
            ForceTerm::ElasticFiber { sigma, rest } => x
                .bodies()
                .iter()
                .flat_map(|body| (0..body.n_edges()).map(move |e| (body, e)))
                .map(|(body, e)| {
                    let (i, j) = body.edge(e);
                    let (p, q) = (x.node(i), x.node(j));
                    let strain = (q[0] - p[0]).hypot(q[1] - p[1]) / body.ds - rest;
                    0.5 * sigma * strain * strain * body.ds
                })
                .sum(),
            ForceTerm::Bending { sigma_b, reference } => {
                let theta = turning_angles(x);
                let mut e = 0.0;
                for body in x.bodies() {
                    for_each_vertex(x, body, |i, _, _| e += sigma_b * (1.0 - (theta[i] - reference[i]).cos()));
                }
                e
            }
            ForceTerm::Pair {
                a,
                b,
                s,
                lambda,
                cutoff,
                bodies,
            } => {
                let shift = pair_potential(*a, *b, *s, *lambda, *cutoff);
                let (ba, bb) = (x.bodies()[bodies.0], x.bodies()[bodies.1]);
                let mut e = 0.0;
                for i in ba.nodes() {
                    let p = x.node(i);
                    for j in bb.nodes() {
                        let q = x.node(j);
                        let dist = (p[0] - q[0]).hypot(p[1] - q[1]);
                        if dist < *cutoff {
                            e += pair_potential(*a, *b, *s, *lambda, dist) - shift;
                        }
                    }
                }
                e
            }
            ForceTerm::External { force } => -force.iter().zip(x.positions()).map(|(f, p)| f * p).sum::<f64>(),
        }
    }
}

impl ForceModel {
    pub fn new(terms: Vec<ForceTerm>) -> Self {
        ForceModel { terms }
    }

    pub fn validate(&self, x: &StructureState) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.validate(x))
    }

    /// Nodal forces `-grad W(X)` in the stacked layout.
    pub fn evaluate(&self, x: &StructureState) -> Result<Vec<f64>> {
        let mut out = vec![0.0; 2 * x.n_nodes()];
        for t in &self.terms {
            t.accumulate(x, &mut out)?;
        }
        Ok(out)
    }

    /// Total potential energy `W(X)`.
    pub fn energy(&self, x: &StructureState) -> f64 {
        self.terms.iter().map(|t| t.energy(x)).sum()
    }
}

/// Free-function form of [`ForceModel::evaluate`].
pub fn evaluate_force_model(model: &ForceModel, x: &StructureState) -> Result<Vec<f64>> {
    model.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn fd_gradient(model: &ForceModel, x: &StructureState, step: f64) -> Vec<f64> {
        let mut g = vec![0.0; x.positions().len()];
        for k in 0..g.len() {
            let mut xp = x.clone();
            xp.positions_mut()[k] += step;
            let mut xm = x.clone();
            xm.positions_mut()[k] -= step;
            g[k] = -(model.energy(&xp) - model.energy(&xm)) / (2.0 * step);
        }
        g
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
    }

    fn perturbed_circle(n: usize, seed: &[f64]) -> StructureState {
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let r = 0.5 * (1.0 + 0.15 * seed[k % seed.len()]);
                [2.0 + r * t.cos(), 2.0 + r * t.sin()]
            })
            .collect();
        StructureState::from_points(&pts, 2.0 * PI / n as f64, true).unwrap()
    }

    #[test]
    fn elastic_equilibrium_circle() {
        let n = 40;
        let ds = 2.0 * PI / n as f64;
        let s = StructureState::ellipse([1.0, 1.0], 0.3, 0.3, n).unwrap();
        let edge = 2.0 * 0.3 * (PI / n as f64).sin();
        let model = ForceModel::new(vec![ForceTerm::ElasticFiber { sigma: 3.0, rest: edge / ds }]);
        let f = model.evaluate(&s).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn bending_vanishes_at_reference() {
        let s = perturbed_circle(24, &[0.3, -0.2, 0.5, 0.1, -0.4]);
        let model = ForceModel::new(vec![ForceTerm::Bending {
            sigma_b: 2.0,
            reference: turning_angles(&s),
        }]);
        assert!(model.evaluate(&s).unwrap().iter().all(|v| v.abs() < 1e-12));
        assert!(model.energy(&s).abs() < 1e-14);
    }

    #[test]
    fn binding_vanishes_at_rest_distance() {
        assert_eq!(pair_magnitude(0.0, 0.0, 3.0, 0.7, 0.7), 0.0);
    }

    #[test]
    fn pair_forces_are_antisymmetric() {
        let a = StructureState::ellipse([1.0, 1.0], 0.3, 0.2, 12).unwrap();
        let b = StructureState::ellipse([1.5, 1.1], 0.3, 0.2, 14).unwrap();
        let s = StructureState::concat(&[a, b]);
        let model = ForceModel::new(vec![ForceTerm::Pair {
            a: 0.5,
            b: 2.0,
            s: 3.0,
            lambda: 0.3,
            cutoff: 0.6,
            bodies: (0, 1),
        }]);
        let f = model.evaluate(&s).unwrap();
        let n = s.n_nodes();
        for k in 0..2 {
            let fa: f64 = f[k * n..k * n + 12].iter().sum();
            let fb: f64 = f[k * n + 12..(k + 1) * n].iter().sum();
            assert!((fa + fb).abs() < 1e-12);
            assert!(fa.abs() > 1e-6);
        }
    }

    #[test]
    fn degenerate_edge_is_an_error() {
        let s = StructureState::from_points(&[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], 1.0, true).unwrap();
        let model = ForceModel::new(vec![ForceTerm::ElasticFiber { sigma: 1.0, rest: 0.0 }]);
        assert!(matches!(model.evaluate(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn open_fiber_gradient() {
        let pts = [[0.0, 0.0], [0.3, 0.1], [0.55, -0.05], [0.9, 0.2]];
        let s = StructureState::from_points(&pts, 0.25, false).unwrap();
        let model = ForceModel::new(vec![
            ForceTerm::ElasticFiber { sigma: 2.0, rest: 0.8 },
            ForceTerm::Bending {
                sigma_b: 0.5,
                reference: vec![0.0, 0.1, -0.2, 0.0],
            },
        ]);
        let f = model.evaluate(&s).unwrap();
        assert!(rel_err(&f, &fd_gradient(&model, &s, 1e-6)) < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn forces_are_negative_energy_gradients(
            seed in proptest::collection::vec(-1.0f64..1.0, 5..9),
            sigma in 0.1f64..5.0,
            rest in 0.2f64..1.5,
            sigma_b in 0.1f64..2.0,
        ) {
            let s = perturbed_circle(16, &seed);
            let reference: Vec<f64> = (0..16).map(|k| 0.3 * (k as f64).sin()).collect();
            for model in [
                ForceModel::new(vec![ForceTerm::ElasticFiber { sigma, rest }]),
                ForceModel::new(vec![ForceTerm::Bending { sigma_b, reference: reference.clone() }]),
            ] {
                let f = model.evaluate(&s).unwrap();
                let fd = fd_gradient(&model, &s, 1e-6);
                prop_assert!(rel_err(&f, &fd) < 1e-5, "{}", rel_err(&f, &fd));
                for k in 0..2 {
                    let total: f64 = f[k * 16..(k + 1) * 16].iter().sum();
                    prop_assert!(total.abs() < 1e-10);
                }
            }
        }

        #[test]
        fn pair_force_is_gradient(dx in 0.25f64..0.45, dy in -0.1f64..0.1) {
            let a = StructureState::ellipse([1.0, 1.0], 0.2, 0.15, 8).unwrap();
            let b = StructureState::ellipse([1.0 + dx, 1.0 + dy], 0.2, 0.15, 8).unwrap();
            let s = StructureState::concat(&[a, b]);
            let model = ForceModel::new(vec![ForceTerm::Pair { a: 0.4, b: 1.5, s: 2.0, lambda: 0.2, cutoff: 1.0, bodies: (0, 1) }]);
            let f = model.evaluate(&s).unwrap();
            prop_assert!(rel_err(&f, &fd_gradient(&model, &s, 1e-6)) < 1e-5);
        }
    }
}
