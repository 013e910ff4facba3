//! One-step timing of the full and reduced models.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, ModelKind};
use super::record::median;
use super::run::run_model;

/// Steps discarded before timing.
pub const WARMUP: usize = 10;
/// Minimum number of timed steps.
pub const MIN_TIMED: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupRow {
    pub h: f64,
    pub full_order: usize,
    pub reduced_order: usize,
    pub fom_step_secs: f64,
    pub rom_step_secs: f64,
    /// Table construction time, zero when the table came from the cache.
    pub sampling_secs: f64,
}

impl SpeedupRow {
    pub fn factor(&self) -> f64 {
        self.fom_step_secs / self.rom_step_secs
    }

    /// Sampling cost in units of full-model steps.
    pub fn sampling_in_fom_steps(&self) -> f64 {
        self.sampling_secs / self.fom_step_secs
    }
}

fn median_step(cfg: &ExperimentConfig) -> Result<(f64, f64, usize, usize)> {
    let out = run_model(cfg, None, None)?;
    let t = median(&out.record.step_times(WARMUP))
        .ok_or_else(|| Error::Config("no timed steps".into()))?;
    Ok((
        t,
        out.summary.sampling_secs.unwrap_or(0.0),
        out.summary.full_order,
        out.summary.reduced_order,
    ))
}

/// Times `steps` (at least `WARMUP + MIN_TIMED`) steps of the full model and of
/// `rom` on `base`. The table is always sampled fresh so its cost is measured.
pub fn measure(base: &ExperimentConfig, rom: ModelKind, steps: usize) -> Result<SpeedupRow> {
    let mut cfg = base.clone();
    cfg.time.steps = steps.max(WARMUP + MIN_TIMED);
    cfg.output = Default::default();
    cfg.model = ModelKind::Fom;
    let (fom, _, full_order, reduced_order) = median_step(&cfg)?;
    cfg.model = rom;
    let (rom_t, sampling, _, _) = median_step(&cfg)?;
    Ok(SpeedupRow {
        h: cfg.grid.h,
        full_order,
        reduced_order,
        fom_step_secs: fom,
        rom_step_secs: rom_t,
        sampling_secs: sampling,
    })
}

/// Runs [`measure`] for each config.
pub fn sweep(configs: &[ExperimentConfig], rom: ModelKind, steps: usize) -> Result<Vec<SpeedupRow>> {
    configs.iter().map(|c| measure(c, rom, steps)).collect()
}

pub fn to_table(rows: &[SpeedupRow]) -> String {
    let mut s = String::from(
        "h,full_order,reduced_order,fom_step_secs,rom_step_secs,speedup,sampling_secs,sampling_fom_steps\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{:.4},{:e},{:.2}",
            r.h,
            r.full_order,
            r.reduced_order,
            r.fom_step_secs,
            r.rom_step_secs,
            r.factor(),
            r.sampling_secs,
            r.sampling_in_fom_steps()
        );
    }
    s
}

pub fn write_table(rows: &[SpeedupRow], path: &Path) -> Result<()> {
    std::fs::write(path, to_table(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_sampling_units() {
        let r = SpeedupRow {
            h: 0.125,
            full_order: 3072,
            reduced_order: 192,
            fom_step_secs: 0.03,
            rom_step_secs: 0.006,
            sampling_secs: 0.3,
        };
        assert!((r.factor() - 5.0).abs() < 1e-12);
        assert!((r.sampling_in_fom_steps() - 10.0).abs() < 1e-12);
        assert_eq!(to_table(&[r]).lines().count(), 2);
    }
}
