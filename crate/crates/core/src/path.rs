//! Discretized path-space fibers: step paths, concatenation, propagators and
//! left-coherent sections.
//!
//! A `StepPath` of `len` cells is an element of the fiber `P(len * h)`: one
//! complex d-vector per grid cell `((k-1)h, kh]`.  Concatenation appends
//! cells, so fiber additivity and unique factorization hold exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::numeric::C;

#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    grid: TimeGrid,
    dim: usize,
    // cell-major storage: cells[k*dim .. (k+1)*dim] is the value on cell k+1
    cells: Vec<C>,
}

impl StepPath {
    pub fn new(grid: TimeGrid, dim: usize, cells: Vec<C>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument { op: "StepPath::new", what: "dim must be positive".into() });
        }
        if cells.is_empty() || cells.len() % dim != 0 {
            return Err(Error::InvalidArgument {
                op: "StepPath::new",
                what: format!("cell data of length {} is not a positive multiple of dim {}", cells.len(), dim),
            });
        }
        let len = cells.len() / dim;
        if len > grid.n_max() {
            return Err(Error::BeyondHorizon { t: grid.time_of(len), horizon: grid.horizon() });
        }
        Ok(StepPath { grid, dim, cells })
    }

    /// Constant path: every cell equals `value`.
    pub fn constant(grid: TimeGrid, len: usize, value: &[C]) -> Result<Self> {
        let mut cells = Vec::with_capacity(len * value.len());
        for _ in 0..len {
            cells.extend_from_slice(value);
        }
        StepPath::new(grid, value.len(), cells)
    }

    /// Real scalar constant path.
    pub fn constant_real(grid: TimeGrid, len: usize, value: f64) -> Result<Self> {
        StepPath::constant(grid, len, &[C::new(value, 0.0)])
    }

    /// The ramp `lambda -> lambda`, represented by cell midpoint values
    /// `(k - 1/2) h`.
    pub fn ramp(grid: TimeGrid, len: usize) -> Result<Self> {
        let cells = (1..=len).map(|k| C::new(grid.cell_midpoint(k), 0.0)).collect();
        StepPath::new(grid, 1, cells)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Path length in cells.
    pub fn len_cells(&self) -> usize {
        self.cells.len() / self.dim
    }

    /// Path length as a time, `len_cells * h`.
    pub fn length(&self) -> f64 {
        self.grid.time_of(self.len_cells())
    }

    /// Value on cell `k` (1-based).
    pub fn cell(&self, k: usize) -> &[C] {
        &self.cells[(k - 1) * self.dim..k * self.dim]
    }

    pub fn cells(&self) -> &[C] {
        &self.cells
    }

    pub fn is_real_scalar(&self) -> bool {
        self.dim == 1 && self.cells.iter().all(|z| z.im == 0.0)
    }

    fn check_compatible(&self, other: &StepPath) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// Same fiber: same grid, dimension and length.
    pub fn check_same_fiber(&self, other: &StepPath) -> Result<()> {
        self.check_compatible(other)?;
        if self.len_cells() != other.len_cells() {
            return Err(Error::FiberMismatch { left: self.len_cells(), right: other.len_cells() });
        }
        Ok(())
    }

    /// L^2 grid inner product `h * sum_k <x_k, y_k>`, linear in `self`.
    pub fn l2_inner(&self, other: &StepPath) -> Result<C> {
        self.check_same_fiber(other)?;
        let mut acc = C::new(0.0, 0.0);
        for (a, b) in self.cells.iter().zip(&other.cells) {
            acc += a * b.conj();
        }
        Ok(acc * self.grid.step())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.step() * self.cells.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Cellwise difference within one fiber.
    pub fn sub(&self, other: &StepPath) -> Result<StepPath> {
        self.check_same_fiber(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| a - b).collect();
        StepPath::new(self.grid, self.dim, cells)
    }

    pub fn add(&self, other: &StepPath) -> Result<StepPath> {
        self.check_same_fiber(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| a + b).collect();
        StepPath::new(self.grid, self.dim, cells)
    }

    pub fn scale(&self, factor: C) -> StepPath {
        let cells = self.cells.iter().map(|z| z * factor).collect();
        StepPath { grid: self.grid, dim: self.dim, cells }
    }

    /// Largest cell deviation from another path in the same fiber.
    pub fn max_cell_deviation(&self, other: &StepPath) -> Result<f64> {
        self.check_same_fiber(other)?;
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm())))
    }

    /// The same step function on the refined grid (each cell split in two).
    pub fn refine(&self) -> StepPath {
        let grid = self.grid.refine();
        let mut cells = Vec::with_capacity(self.cells.len() * 2);
        for k in 1..=self.len_cells() {
            cells.extend_from_slice(self.cell(k));
            cells.extend_from_slice(self.cell(k));
        }
        StepPath { grid, dim: self.dim, cells }
    }
}

/// Concatenation `f boxplus g`: the cells of `f` followed by the cells of `g`.
pub fn concat_box(f: &StepPath, g: &StepPath) -> Result<StepPath> {
    f.check_compatible(g)?;
    let mut cells = Vec::with_capacity(f.cells.len() + g.cells.len());
    cells.extend_from_slice(&f.cells);
    cells.extend_from_slice(&g.cells);
    StepPath::new(f.grid, f.dim, cells)
}

/// The propagator `x(r, s)`: the cells of `x` over `(r, s]`, shifted to start
/// at zero.  Satisfies `x(r, t) = x(r, s) boxplus x(s, t)` exactly.
pub fn propagator(x: &StepPath, r: f64, s: f64) -> Result<StepPath> {
    let kr = x.grid.steps_of(r)?;
    let ks = x.grid.steps_of(s)?;
    propagator_cells(x, kr, ks)
}

/// `propagator` with cell-count arguments.
pub fn propagator_cells(x: &StepPath, r_cells: usize, s_cells: usize) -> Result<StepPath> {
    if r_cells >= s_cells || s_cells > x.len_cells() {
        return Err(Error::InvalidArgument {
            op: "propagator",
            what: format!(
                "need 0 <= r < s <= length, got r = {r_cells}, s = {s_cells} cells of {}",
                x.len_cells()
            ),
        });
    }
    let cells = x.cells[r_cells * x.dim..s_cells * x.dim].to_vec();
    StepPath::new(x.grid, x.dim, cells)
}

/// Prefix `x(0, s)` of a path.
pub fn prefix(x: &StepPath, s_cells: usize) -> Result<StepPath> {
    propagator_cells(x, 0, s_cells)
}

/// A left-coherent section `t -> e_t in P(t)`: every value is a prefix of a
/// fixed master path.  `section(t)` for `t` up to the master's length.
#[derive(Debug, Clone)]
pub struct PathSection {
    master: StepPath,
}

impl PathSection {
    /// Section of prefixes of `master`.
    pub fn from_master(master: StepPath) -> Self {
        PathSection { master }
    }

    /// Extends a seed periodically (the seed, then the seed again, ...) up to
    /// `horizon_cells`, then takes prefixes.  `section(len(seed))` is the
    /// seed itself.
    pub fn from_seed_periodic(seed: &StepPath, horizon_cells: usize) -> Result<Self> {
        let mut cells = Vec::with_capacity(horizon_cells * seed.dim);
        let mut k = 1;
        while cells.len() < horizon_cells * seed.dim {
            cells.extend_from_slice(seed.cell(k));
            k = if k == seed.len_cells() { 1 } else { k + 1 };
        }
        Ok(PathSection { master: StepPath::new(seed.grid, seed.dim, cells)? })
    }

    /// Constant section with cell value `value`.
    pub fn constant(grid: TimeGrid, value: &[C]) -> Result<Self> {
        Ok(PathSection { master: StepPath::constant(grid, grid.n_max(), value)? })
    }

    /// Ramp section `e_t(lambda) = lambda` over the whole grid.
    pub fn ramp(grid: TimeGrid) -> Result<Self> {
        Ok(PathSection { master: StepPath::ramp(grid, grid.n_max())? })
    }

    pub fn master(&self) -> &StepPath {
        &self.master
    }

    pub fn grid(&self) -> &TimeGrid {
        self.master.grid()
    }

    pub fn dim(&self) -> usize {
        self.master.dim()
    }

    pub fn horizon_cells(&self) -> usize {
        self.master.len_cells()
    }

    /// Section value `e_t` for `t = k * h`.
    pub fn value(&self, k_cells: usize) -> Result<StepPath> {
        prefix(&self.master, k_cells)
    }

    /// Interval propagator `e(r, s)`.
    pub fn interval(&self, r_cells: usize, s_cells: usize) -> Result<StepPath> {
        propagator_cells(&self.master, r_cells, s_cells)
    }
}

// --- serialization -------------------------------------------------------

/// Wire format: `{h, d, cells: [[re, im, ...]; len]}` with each cell a flat
/// list of `2 d` floats.
#[derive(Debug, Serialize, Deserialize)]
pub struct PathJson {
    pub h: f64,
    pub d: usize,
    pub cells: Vec<Vec<f64>>,
}

impl StepPath {
    pub fn to_json(&self) -> PathJson {
        let cells = (1..=self.len_cells())
            .map(|k| {
                self.cell(k)
                    .iter()
                    .flat_map(|z| [z.re, z.im])
                    .collect::<Vec<f64>>()
            })
            .collect();
        PathJson { h: self.grid.step(), d: self.dim, cells }
    }

    pub fn from_json(json: &PathJson, n_max: Option<usize>) -> Result<StepPath> {
        let len = json.cells.len();
        let grid = TimeGrid::new(json.h, n_max.unwrap_or(len.max(2)))?;
        let mut cells = Vec::with_capacity(len * json.d);
        for row in &json.cells {
            if row.len() != 2 * json.d {
                return Err(Error::Serialization(format!(
                    "cell row of length {} does not match dim {}",
                    row.len(),
                    json.d
                )));
            }
            for pair in row.chunks(2) {
                cells.push(Complex64::new(pair[0], pair[1]));
            }
        }
        StepPath::new(grid, json.d, cells)
    }

    /// One CSV row per cell: `re_1,im_1,...,re_d,im_d`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim)
            .flat_map(|j| [format!("re_{j}"), format!("im_{j}")])
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for k in 1..=self.len_cells() {
            let row: Vec<String> = self
                .cell(k)
                .iter()
                .flat_map(|z| [format!("{:?}", z.re), format!("{:?}", z.im)])
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
