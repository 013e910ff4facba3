//! Experiment configuration, read from TOML.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::{BoundaryKind, StaggeredGrid};
use crate::fom::{BackgroundKind, FluidParams};
use crate::lagrangian::{turning_angles, ForceModel, ForceTerm, StructureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Membrane,
    Jeffery,
    TwoCell,
    Capsule,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Membrane => "membrane",
            Experiment::Jeffery => "jeffery",
            Experiment::TwoCell => "two-cell",
            Experiment::Capsule => "capsule",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Fom,
    RomDirect,
    RomInterp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Fom => "fom",
            ModelKind::RomDirect => "rom-direct",
            ModelKind::RomInterp => "rom-interp",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fom" => Ok(ModelKind::Fom),
            "rom-direct" => Ok(ModelKind::RomDirect),
            "rom-interp" => Ok(ModelKind::RomInterp),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected fom, rom-direct or rom-interp)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub lx: f64,
    pub ly: f64,
    pub bc: BoundaryKind,
}

impl GridConfig {
    pub fn build(&self) -> Result<StaggeredGrid> {
        let cells = |l: f64, axis: &str| -> Result<usize> {
            let n = l / self.h;
            if !(n.is_finite() && (n - n.round()).abs() < 1e-6 * n.max(1.0)) {
                return Err(Error::Config(format!("{axis} length {l} is not a multiple of h = {}", self.h)));
            }
            Ok(n.round() as usize)
        };
        StaggeredGrid::new(cells(self.lx, "x")?, cells(self.ly, "y")?, self.h, self.bc)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSpacing {
    /// Equal steps of the ellipse parameter, `ds = 2 pi / n`.
    #[default]
    Parametric,
    /// Equal arc length, `ds` the mean chord.
    EqualArc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub center: [f64; 2],
    /// Semi-axes along x and y before rotation.
    pub semi_axes: [f64; 2],
    #[serde(default)]
    pub angle: f64,
    pub nodes: usize,
    #[serde(default)]
    pub spacing: NodeSpacing,
}

impl BodyConfig {
    pub fn build(&self) -> Result<StructureState> {
        let [a, b] = self.semi_axes;
        match self.spacing {
            NodeSpacing::Parametric => StructureState::rotated_ellipse(self.center, a, b, self.angle, self.nodes),
            NodeSpacing::EqualArc => StructureState::ellipse_equal_arc(self.center, a, b, self.angle, self.nodes),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub lambda: f64,
    pub cutoff: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceConfig {
    /// Fiber spring constant; omitted or zero disables the fiber term.
    #[serde(default)]
    pub sigma: f64,
    /// Rest strain `L`.
    #[serde(default)]
    pub rest: f64,
    /// Bending coefficient; the reference angles are those of the initial shape.
    #[serde(default)]
    pub sigma_b: f64,
    #[serde(default)]
    pub pair: Option<PairConfig>,
}

impl ForceConfig {
    pub fn build(&self, x: &StructureState) -> ForceModel {
        let mut terms = Vec::new();
        if self.sigma > 0.0 {
            terms.push(ForceTerm::ElasticFiber {
                sigma: self.sigma,
                rest: self.rest,
            });
        }
        if self.sigma_b > 0.0 {
            terms.push(ForceTerm::Bending {
                sigma_b: self.sigma_b,
                reference: turning_angles(x),
            });
        }
        if let Some(p) = self.pair {
            terms.push(ForceTerm::Pair {
                a: p.a,
                b: p.b,
                s: p.s,
                lambda: p.lambda,
                cutoff: p.cutoff,
                bodies: (0, 1),
            });
        }
        ForceModel::new(terms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Step size; defaults to the viscous guard `0.05 rho h^2 / mu`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    /// Sample spacing in units of `h`.
    #[serde(default = "default_table_spacing")]
    pub spacing: f64,
    /// Largest sampled displacement component; defaults to the structure
    /// diameter plus `4h`.
    #[serde(default)]
    pub extent: Option<f64>,
}

fn default_table_spacing() -> f64 {
    0.25
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            spacing: default_table_spacing(),
            extent: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomConfig {
    /// Diagonal shift of `M0` relative to its mean diagonal.
    #[serde(default = "default_shift")]
    pub shift: f64,
}

fn default_shift() -> f64 {
    1e-2
}

impl Default for RomConfig {
    fn default() -> Self {
        RomConfig { shift: default_shift() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Keep every n-th row of the time series (the last row is always kept).
    #[serde(default = "one")]
    pub record_every: usize,
    /// Write node coordinates every n steps; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every: usize,
    /// Evaluate `||M u||` every step (one extra projection per step for the ROM).
    #[serde(default)]
    pub divergence: bool,
}

fn one() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            record_every: 1,
            snapshot_every: 0,
            divergence: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    /// Reserved; the solvers are deterministic.
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    pub fluid: FluidParams,
    pub bodies: Vec<BodyConfig>,
    #[serde(default)]
    pub forces: ForceConfig,
    #[serde(default)]
    pub background: BackgroundKind,
    pub time: TimeConfig,
    #[serde(default)]
    pub table: TableConfig,
    #[serde(default)]
    pub rom: RomConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_model() -> ModelKind {
    ModelKind::Fom
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.fluid.validate()?;
        self.grid.build()?;
        if self.bodies.is_empty() {
            return Err(Error::Config("at least one body is required".into()));
        }
        if self.forces.pair.is_some() && self.bodies.len() < 2 {
            return Err(Error::Config("pair forces need two bodies".into()));
        }
        if self.time.steps == 0 {
            return Err(Error::Config("time.steps must be positive".into()));
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("time.dt must be positive, got {dt}")));
            }
        }
        if self.output.record_every == 0 {
            return Err(Error::Config("output.record_every must be positive".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.time.dt.unwrap_or_else(|| self.fluid.diffusive_dt_limit(self.grid.h))
    }

    pub fn structure(&self) -> Result<StructureState> {
        let parts = self.bodies.iter().map(BodyConfig::build).collect::<Result<Vec<_>>>()?;
        Ok(StructureState::concat(&parts))
    }

    /// Oscillating elliptical membrane: semi-axes 0.4 and 0.2 in a periodic
    /// 4 x 4 box, pure-tension fiber (`L = 0`), `n_s = 12/h`.
    pub fn membrane(h: f64) -> Self {
        ExperimentConfig {
            experiment: Experiment::Membrane,
            model: ModelKind::Fom,
            seed: 0,
            grid: GridConfig {
                h,
                lx: 4.0,
                ly: 4.0,
                bc: BoundaryKind::Periodic,
            },
            fluid: FluidParams { rho: 1.0, mu: 1.0 },
            bodies: vec![BodyConfig {
                center: [2.0, 2.0],
                semi_axes: [0.4, 0.2],
                angle: 0.0,
                nodes: (12.0 / h).round() as usize,
                spacing: NodeSpacing::Parametric,
            }],
            forces: ForceConfig {
                sigma: 1.0,
                rest: 0.0,
                ..ForceConfig::default()
            },
            background: BackgroundKind::None,
            time: TimeConfig {
                dt: None,
                steps: (1.0 / FluidParams { rho: 1.0, mu: 1.0 }.diffusive_dt_limit(h)).round() as usize,
            },
            table: TableConfig {
                extent: Some(1.0),
                ..TableConfig::default()
            },
            rom: RomConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Stiff ellipse with semi-axes 0.2 (x) and 0.3 (y) in unit shear at the
    /// center of a periodic 8 x 8 box, `Re = rho gamma S1 S2 / mu = 0.01`,
    /// `n_s = 3/h` and half a rotation.
    pub fn jeffery(h: f64) -> Self {
        let fluid = FluidParams { rho: 1.0, mu: 6.0 };
        let (s1, s2) = (0.2, 0.3);
        let half = 0.5 * crate::diagnostics::jeffery_period(s1, s2, 1.0);
        ExperimentConfig {
            experiment: Experiment::Jeffery,
            model: ModelKind::Fom,
            seed: 0,
            grid: GridConfig {
                h,
                lx: 8.0,
                ly: 8.0,
                bc: BoundaryKind::Periodic,
            },
            fluid,
            bodies: vec![BodyConfig {
                center: [4.0, 4.0],
                semi_axes: [s1, s2],
                angle: 0.0,
                nodes: (3.0 / h).round() as usize,
                spacing: NodeSpacing::EqualArc,
            }],
            forces: ForceConfig {
                sigma: 2000.0,
                rest: 1.0,
                sigma_b: 3.2 / h,
                pair: None,
            },
            background: BackgroundKind::Shear { gamma_dot: 1.0 },
            time: TimeConfig {
                dt: None,
                steps: (half / fluid.diffusive_dt_limit(h)).round() as usize,
            },
            table: TableConfig {
                spacing: 0.25,
                extent: Some(1.0),
            },
            rom: RomConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Two stiff ellipses (semi-axes 0.3 x 0.2) at `y = +-0.6` about the axis
    /// of a 15 x 6 channel carrying a Poiseuille flow, bound by pair forces.
    /// The local shear at the cell centers is one, `Re = rho gamma a b / mu`.
    pub fn two_cell(h: f64) -> Self {
        let fluid = FluidParams { rho: 1.0, mu: 6.0 };
        let (lx, ly, yc) = (15.0, 6.0, 0.6);
        let half_width = 0.5 * ly;
        let u0 = half_width * half_width / (2.0 * yc);
        let period = crate::diagnostics::jeffery_period(0.3, 0.2, 1.0);
        let body = |y: f64| BodyConfig {
            center: [0.5 * lx, 0.5 * ly + y],
            semi_axes: [0.3, 0.2],
            angle: 0.0,
            nodes: (3.0 / h).round() as usize,
            spacing: NodeSpacing::EqualArc,
        };
        ExperimentConfig {
            experiment: Experiment::TwoCell,
            model: ModelKind::Fom,
            seed: 0,
            grid: GridConfig {
                h,
                lx,
                ly,
                bc: BoundaryKind::Channel,
            },
            fluid,
            bodies: vec![body(yc), body(-yc)],
            forces: ForceConfig {
                sigma: 2000.0,
                rest: 1.0,
                sigma_b: 3.2 / h,
                pair: Some(PairConfig {
                    a: 0.01,
                    b: 0.01,
                    s: 0.1,
                    lambda: 0.5,
                    cutoff: 1.0,
                }),
            },
            background: BackgroundKind::Poiseuille { u0, half_width },
            time: TimeConfig {
                dt: None,
                steps: (period / fluid.diffusive_dt_limit(h)).round() as usize,
            },
            table: TableConfig {
                spacing: 0.5,
                extent: Some(2.5),
            },
            rom: RomConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Circular capsule of diameter 7 in a 45 x 15 channel, driven from rest
    /// towards a Poiseuille flow with `u_max = 10` and run to `t = 1`. `mu = 1e-5`
    /// and `sigma` are kept as given so the capillary number `mu u / sigma`
    /// spans 10 to 0.1 over the sigma sweep; `rho` is set for
    /// `Re = rho u_max d / mu = 0.01`.
    pub fn capsule(h: f64, sigma: f64) -> Self {
        let (d, u_max, mu) = (7.0, 10.0, 1e-5);
        let fluid = FluidParams {
            rho: 0.01 * mu / (u_max * d),
            mu,
        };
        let (lx, ly) = (45.0, 15.0);
        let perimeter = std::f64::consts::PI * d;
        ExperimentConfig {
            experiment: Experiment::Capsule,
            model: ModelKind::Fom,
            seed: 0,
            grid: GridConfig {
                h,
                lx,
                ly,
                bc: BoundaryKind::Channel,
            },
            fluid,
            bodies: vec![BodyConfig {
                center: [0.25 * lx, 0.5 * ly],
                semi_axes: [0.5 * d, 0.5 * d],
                angle: 0.0,
                nodes: (2.0 * perimeter / h).ceil() as usize,
                spacing: NodeSpacing::Parametric,
            }],
            forces: ForceConfig {
                sigma,
                rest: 0.5 * d,
                ..ForceConfig::default()
            },
            background: BackgroundKind::ChannelTransient {
                u0: u_max,
                half_width: 0.5 * ly,
            },
            time: TimeConfig {
                dt: None,
                steps: (1.0 / fluid.diffusive_dt_limit(h)).round() as usize,
            },
            table: TableConfig {
                spacing: 0.5,
                extent: Some(d + 2.0 * h),
            },
            // The interpolated M0 of this geometry is indefinite below ~0.1.
            rom: RomConfig { shift: 0.2 },
            output: OutputConfig::default(),
        }
    }

    pub fn preset(experiment: Experiment, h: f64) -> Self {
        match experiment {
            Experiment::Membrane => Self::membrane(h),
            Experiment::Jeffery => Self::jeffery(h),
            Experiment::TwoCell => Self::two_cell(h),
            Experiment::Capsule => Self::capsule(h, 1e-5),
        }
    }

    /// Reynolds number under this experiment's convention (see the README).
    pub fn reynolds(&self) -> Option<f64> {
        let rho_mu = self.fluid.rho / self.fluid.mu;
        let body = self.bodies.first()?;
        let [a, b] = body.semi_axes;
        match (self.experiment, &self.background) {
            (Experiment::Jeffery, BackgroundKind::Shear { gamma_dot }) => Some(rho_mu * gamma_dot * a * b),
            (Experiment::TwoCell, BackgroundKind::Poiseuille { u0, half_width }) => {
                let y = (body.center[1] - 0.5 * self.grid.ly).abs();
                Some(rho_mu * 2.0 * u0 * y / (half_width * half_width) * a * b)
            }
            (Experiment::Capsule, BackgroundKind::ChannelTransient { u0, .. }) => Some(rho_mu * u0 * 2.0 * a),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_toml() {
        for e in [Experiment::Membrane, Experiment::Jeffery, Experiment::TwoCell, Experiment::Capsule] {
            let c = ExperimentConfig::preset(e, 0.125);
            c.validate().unwrap();
            let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn reynolds_numbers_are_one_hundredth() {
        for e in [Experiment::Jeffery, Experiment::TwoCell, Experiment::Capsule] {
            let re = ExperimentConfig::preset(e, 0.125).reynolds().unwrap();
            assert!((re - 0.01).abs() < 1e-12, "{e:?}: {re}");
        }
    }

    #[test]
    fn membrane_full_order_counts_velocity_and_pressure() {
        let c = ExperimentConfig::membrane(0.125);
        let g = c.grid.build().unwrap();
        assert_eq!(g.n_u(), 2048);
        assert_eq!(g.n_u() + g.n_p(), 3072);
        assert_eq!(2 * c.bodies[0].nodes, 192);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let text = r#"
            experiment = "membrane"
            [grid]
            h = 0.25
            lx = 4.0
            ly = 4.0
            bc = "periodic"
            [fluid]
            rho = 1.0
            mu = 1.0
            [[bodies]]
            center = [2.0, 2.0]
            semi_axes = [0.4, 0.2]
            nodes = 32
            [forces]
            sigma = 1.0
            [time]
            steps = 10
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.model, ModelKind::Fom);
        assert_eq!(c.table.spacing, 0.25);
        assert_eq!(c.rom.shift, 1e-2);
        assert!((c.dt() - 0.05 * 0.0625).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lengths() {
        let mut c = ExperimentConfig::membrane(0.125);
        c.grid.lx = 4.01;
        assert!(c.validate().is_err());
        let text = ExperimentConfig::membrane(0.125).to_toml().unwrap() + "\nbogus = 1\n";
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
