//! Per-step time series and their CSV form.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::lagrangian::StructureState;

/// One recorded step. Optional columns are written as empty fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub t: f64,
    pub step: usize,
    /// Node 0 of the first body.
    pub ref_x: f64,
    pub ref_y: f64,
    pub perimeter: f64,
    pub area: f64,
    pub delta_p: f64,
    pub swelling: f64,
    pub flux: f64,
    /// `V` for the full model, `V_r` for the reduced one.
    pub lyapunov: Option<f64>,
    pub divergence: Option<f64>,
    pub angle: Option<f64>,
    pub angle_exact: Option<f64>,
    /// Centroids of all bodies, `[x0, y0, x1, y1, ...]`.
    pub centers: Vec<f64>,
    pub assembly_secs: f64,
    pub solve_secs: f64,
    pub step_secs: f64,
    pub self_intersecting: bool,
}

/// A run's rows plus the labels needed to write them.
#[derive(Clone, Debug, Default)]
pub struct TimeSeriesRecord {
    pub model: String,
    pub assembly_mode: String,
    pub n_bodies: usize,
    pub rows: Vec<Row>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl TimeSeriesRecord {
    pub fn header(&self) -> String {
        let mut h = String::from(
            "t,step,ref_x,ref_y,perimeter,area,delta_p,swelling,flux,lyapunov,divergence,angle,angle_exact",
        );
        for b in 0..self.n_bodies {
            let _ = write!(h, ",center_x{b},center_y{b}");
        }
        h.push_str(",self_intersecting,assembly_secs,solve_secs,step_secs,model,assembly_mode");
        h
    }

    /// Full-precision CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{}",
                r.t,
                r.step,
                r.ref_x,
                r.ref_y,
                r.perimeter,
                r.area,
                r.delta_p,
                r.swelling,
                r.flux,
                opt(r.lyapunov),
                opt(r.divergence),
                opt(r.angle),
                opt(r.angle_exact)
            );
            for c in &r.centers {
                let _ = write!(out, ",{c:e}");
            }
            let _ = writeln!(
                out,
                ",{},{:e},{:e},{:e},{},{}",
                u8::from(r.self_intersecting),
                r.assembly_secs,
                r.solve_secs,
                r.step_secs,
                self.model,
                self.assembly_mode
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn last(&self) -> Option<&Row> {
        self.rows.last()
    }

    /// Step times (seconds) of all rows after `warmup` steps.
    pub fn step_times(&self, warmup: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.step > warmup).map(|r| r.step_secs).collect()
    }
}

/// Node coordinates, one `body,node,x,y` row per node.
pub fn write_snapshot(path: &Path, x: &StructureState) -> Result<()> {
    let mut s = String::from("body,node,x,y\n");
    for (bi, b) in x.bodies().iter().enumerate() {
        for (l, k) in b.nodes().enumerate() {
            let p = x.node(k);
            let _ = writeln!(s, "{bi},{l},{:e},{:e}", p[0], p[1]);
        }
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) })
}
