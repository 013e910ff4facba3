//! Binary persistence of kernel tables.
//!
//! Layout, all little-endian:
//!
//! | field        | type      |
//! |--------------|-----------|
//! | magic        | `b"IBKT"` |
//! | version      | u32       |
//! | h            | f64       |
//! | r            | f64       |
//! | bc code      | u32       |
//! | extent       | f64       |
//! | spacing      | f64       |
//! | family count | u32       |
//!
//! followed by `family count` arrays of `n_side * n_side` f64 values, each
//! row-major in the displacement (`ix + n_side*iy`), families in
//! [`Family::ALL`] order. `n_side = round(2 extent / spacing) + 1`.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eulerian::BoundaryKind;

use super::table::{samples_per_side, Family, KernelTable};

pub const MAGIC: [u8; 4] = *b"IBKT";
pub const VERSION: u32 = 2;
/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "IBROM_CACHE_DIR";

pub fn write_table<W: Write>(table: &KernelTable, mut w: W) -> Result<()> {
    let mut buf = Vec::with_capacity(48 + 8 * table.values.iter().map(Vec::len).sum::<usize>());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&table.h.to_le_bytes());
    buf.extend_from_slice(&table.r.to_le_bytes());
    buf.extend_from_slice(&table.bc.code().to_le_bytes());
    buf.extend_from_slice(&table.extent.to_le_bytes());
    buf.extend_from_slice(&table.spacing.to_le_bytes());
    buf.extend_from_slice(&(table.values.len() as u32).to_le_bytes());
    for v in table.values.iter().flatten() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.0.len() < N {
            return Err(Error::Cache("truncated file".into()));
        }
        let (a, b) = self.0.split_at(N);
        self.0 = b;
        Ok(a.try_into().expect("length checked"))
    }
    fn u32(&mut self) -> Result<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }
    fn f64(&mut self) -> Result<f64> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

pub fn read_table<R: Read>(mut r: R) -> Result<KernelTable> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut c = Cursor(&bytes);
    if c.take::<4>()? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let h = c.f64()?;
    let radius = c.f64()?;
    let code = c.u32()?;
    let bc = BoundaryKind::from_code(code).ok_or_else(|| Error::Cache(format!("unknown boundary code {code}")))?;
    let extent = c.f64()?;
    let spacing = c.f64()?;
    let families = c.u32()? as usize;
    if families != Family::ALL.len() {
        return Err(Error::Cache(format!("expected {} families, found {families}", Family::ALL.len())));
    }
    if !(extent > 0.0 && spacing > 0.0) {
        return Err(Error::Cache("nonpositive extent or spacing".into()));
    }
    let n_side = samples_per_side(extent, spacing);
    let mut values = Vec::with_capacity(families);
    for _ in 0..families {
        let v = (0..n_side * n_side).map(|_| c.f64()).collect::<Result<Vec<f64>>>()?;
        values.push(v);
    }
    if !c.0.is_empty() {
        return Err(Error::Cache(format!("{} trailing bytes", c.0.len())));
    }
    Ok(KernelTable {
        h,
        r: radius,
        bc,
        extent,
        spacing,
        n_side,
        values,
    })
}

/// File name encoding every field the table depends on.
pub fn cache_file_name(h: f64, r: f64, bc: BoundaryKind, extent: f64, spacing: f64) -> String {
    format!(
        "kernel_h{:016x}_r{:016x}_bc{}_e{:016x}_s{:016x}.bin",
        h.to_bits(),
        r.to_bits(),
        bc.code(),
        extent.to_bits(),
        spacing.to_bits()
    )
}

/// Cache directory from the environment, if set.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)
}

pub fn save(table: &KernelTable, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(cache_file_name(table.h, table.r, table.bc, table.extent, table.spacing));
    let tmp = path.with_extension("tmp");
    write_table(table, fs::File::create(&tmp)?)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Loads the cached table for the given key, `Ok(None)` if absent.
pub fn load(dir: &Path, h: f64, r: f64, bc: BoundaryKind, extent: f64, spacing: f64) -> Result<Option<KernelTable>> {
    let path = dir.join(cache_file_name(h, r, bc, extent, spacing));
    if !path.exists() {
        return Ok(None);
    }
    let t = read_table(fs::File::open(&path)?)?;
    if t.h != h || t.r != r || t.bc != bc || t.extent != extent || t.spacing != spacing {
        return Err(Error::TableMismatch(format!("{} does not match its key", path.display())));
    }
    Ok(Some(t))
}
