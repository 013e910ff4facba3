use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary treatment of the Eulerian box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Periodic in both directions.
    Periodic,
    /// Periodic in x, no-slip walls at y = 0 and y = ny*h.
    Channel,
}

impl BoundaryKind {
    /// Numeric code used in the kernel-table cache header.
    pub fn code(self) -> u32 {
        match self {
            BoundaryKind::Periodic => 0,
            BoundaryKind::Channel => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(BoundaryKind::Periodic),
            1 => Some(BoundaryKind::Channel),
            _ => None,
        }
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" | "periodic-all" => Ok(BoundaryKind::Periodic),
            "channel" => Ok(BoundaryKind::Channel),
            other => Err(Error::UnknownBoundary(other.to_string())),
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Periodic => "periodic",
            BoundaryKind::Channel => "channel",
        })
    }
}

/// Uniform MAC grid on `[0, nx*h] x [0, ny*h]`.
///
/// Layout of a velocity vector: all x-face unknowns first, then all y-face
/// unknowns, each block row-major (`i + nx*j`). x-faces sit at
/// `(i*h, (j+1/2)*h)`, y-faces at `((i+1/2)*h, j*h)`, pressure at cell
/// centers `((i+1/2)*h, (j+1/2)*h)`. Under the channel boundary the y-faces on
/// the two walls carry no unknown (no penetration) and the y-block holds rows
/// `j = 1..ny-1` only.
#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredGrid {
    nx: usize,
    ny: usize,
    h: f64,
    bc: BoundaryKind,
}

impl StaggeredGrid {
    pub fn new(nx: usize, ny: usize, h: f64, bc: BoundaryKind) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 cells per direction, got {nx}x{ny}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("grid spacing must be positive, got {h}")));
        }
        Ok(StaggeredGrid { nx, ny, h, bc })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn lx(&self) -> f64 {
        self.nx as f64 * self.h
    }

    pub fn ly(&self) -> f64 {
        self.ny as f64 * self.h
    }

    /// Number of x-face unknowns.
    pub fn n_ux(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of y-face unknowns.
    pub fn n_uy(&self) -> usize {
        match self.bc {
            BoundaryKind::Periodic => self.nx * self.ny,
            BoundaryKind::Channel => self.nx * (self.ny - 1),
        }
    }

    pub fn n_u(&self) -> usize {
        self.n_ux() + self.n_uy()
    }

    pub fn n_p(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    pub fn x_face(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    /// Index of the y-face `(i, j)`, or `None` for a wall face of the channel.
    pub fn y_face(&self, i: usize, j: usize) -> Option<usize> {
        match self.bc {
            BoundaryKind::Periodic => Some(self.n_ux() + i + self.nx * j),
            BoundaryKind::Channel => {
                if j == 0 || j >= self.ny {
                    None
                } else {
                    Some(self.n_ux() + i + self.nx * (j - 1))
                }
            }
        }
    }

    /// Wraps a periodic x index.
    pub fn wrap_x(&self, i: isize) -> usize {
        i.rem_euclid(self.nx as isize) as usize
    }

    /// Wraps a y index under periodic bc; `None` if outside the channel.
    pub fn wrap_y_cell(&self, j: isize) -> Option<usize> {
        match self.bc {
            BoundaryKind::Periodic => Some(j.rem_euclid(self.ny as isize) as usize),
            BoundaryKind::Channel => (0..self.ny as isize).contains(&j).then_some(j as usize),
        }
    }

    /// Physical location of velocity unknown `k`, with its component (0 = x, 1 = y).
    pub fn face_position(&self, k: usize) -> ([f64; 2], usize) {
        let h = self.h;
        if k < self.n_ux() {
            let (i, j) = (k % self.nx, k / self.nx);
            ([i as f64 * h, (j as f64 + 0.5) * h], 0)
        } else {
            let k = k - self.n_ux();
            let (i, mut j) = (k % self.nx, k / self.nx);
            if self.bc == BoundaryKind::Channel {
                j += 1;
            }
            ([(i as f64 + 0.5) * h, j as f64 * h], 1)
        }
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = (c % self.nx, c / self.nx);
        [(i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h]
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * self.lx(), 0.5 * self.ly()]
    }
}
