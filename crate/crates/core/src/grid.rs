//! Uniform time grids and on-grid partitions.
//!
//! Every time in the crate is an exact multiple of the grid step `h`;
//! internally times are carried as integer cell counts so that refinement,
//! factorization and partition arithmetic are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid on the half line with step `h` and horizon `n_max * h`.
/// Cell `k` (1-based) covers the interval `((k-1)h, kh]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    h: f64,
    n_max: usize,
}

impl TimeGrid {
    pub fn new(h: f64, n_max: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be positive, got {h}")));
        }
        if n_max < 2 {
            return Err(Error::InvalidGrid(format!("n_max must be >= 2, got {n_max}")));
        }
        Ok(TimeGrid { h, n_max })
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn horizon(&self) -> f64 {
        self.n_max as f64 * self.h
    }

    /// Time of the k-th grid point, `t_k = k * h`.
    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Midpoint of cell `k` (1-based), `(k - 1/2) h`.
    pub fn cell_midpoint(&self, k: usize) -> f64 {
        (k as f64 - 0.5) * self.h
    }

    /// Left endpoint of cell `k` (1-based), `(k - 1) h`.
    pub fn cell_left(&self, k: usize) -> f64 {
        (k as f64 - 1.0) * self.h
    }

    /// Converts a time to a cell count, rejecting off-grid values.
    pub fn steps_of(&self, t: f64) -> Result<usize> {
        let ratio = t / self.h;
        let k = ratio.round();
        if (ratio - k).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(Error::OffGrid { t, h: self.h });
        }
        if k < 0.0 {
            return Err(Error::OffGrid { t, h: self.h });
        }
        let k = k as usize;
        if k > self.n_max {
            return Err(Error::BeyondHorizon { t, horizon: self.horizon() });
        }
        Ok(k)
    }

    /// A grid with halved step and doubled cell count covering the same horizon.
    pub fn refine(&self) -> TimeGrid {
        TimeGrid { h: self.h * 0.5, n_max: self.n_max * 2 }
    }
}

/// An ordered set of cut points `0 = t_0 < t_1 < ... < t_n = t` of `(0, t]`,
/// all on the grid.  Stored as cell counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cuts: Vec<usize>,
}

impl Partition {
    /// Builds a partition from the full cut list (cell counts), which must
    /// start at zero and be strictly increasing.
    pub fn from_cuts(cuts: Vec<usize>) -> Result<Self> {
        if cuts.len() < 2 || cuts[0] != 0 {
            return Err(Error::InvalidArgument {
                op: "Partition::from_cuts",
                what: "need cuts 0 = t_0 < ... < t_n".into(),
            });
        }
        if !cuts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument {
                op: "Partition::from_cuts",
                what: "cut points must be strictly increasing".into(),
            });
        }
        Ok(Partition { cuts })
    }

    /// The partition of `(0, t]` into `n` equal intervals; `n` must divide
    /// the cell count of `t`.
    pub fn equal_cells(t_cells: usize, n: usize) -> Result<Self> {
        if n == 0 || t_cells % n != 0 {
            return Err(Error::InvalidArgument {
                op: "Partition::equal_cells",
                what: format!("{n} equal intervals do not fit {t_cells} cells"),
            });
        }
        let w = t_cells / n;
        Ok(Partition { cuts: (0..=n).map(|k| k * w).collect() })
    }

    /// The whole interval as a single block.
    pub fn trivial(t_cells: usize) -> Result<Self> {
        Partition::from_cuts(vec![0, t_cells])
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    pub fn t_cells(&self) -> usize {
        *self.cuts.last().unwrap()
    }

    pub fn num_intervals(&self) -> usize {
        self.cuts.len() - 1
    }

    /// Iterator over the intervals as `(a, b]` cell ranges.
    pub fn intervals(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cuts.windows(2).map(|w| (w[0], w[1]))
    }

    /// Largest interval length, in cells.
    pub fn mesh_cells(&self) -> usize {
        self.intervals().map(|(a, b)| b - a).max().unwrap_or(0)
    }

    pub fn mesh(&self, grid: &TimeGrid) -> f64 {
        self.mesh_cells() as f64 * grid.step()
    }

    /// Refinement order: `self <= other` iff every cut of `self` is a cut of
    /// `other`.
    pub fn refines_into(&self, other: &Partition) -> bool {
        self.t_cells() == other.t_cells() && self.cuts.iter().all(|c| other.cuts.binary_search(c).is_ok())
    }

    /// Halves every interval that spans at least two cells.
    pub fn dyadic_refine(&self) -> Partition {
        let mut cuts = Vec::with_capacity(2 * self.cuts.len());
        cuts.push(0);
        for (a, b) in self.intervals() {
            if b - a >= 2 {
                cuts.push(a + (b - a) / 2);
            }
            cuts.push(b);
        }
        Partition { cuts }
    }
}
