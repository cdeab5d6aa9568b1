//! Additive cocycles on the grid and their trivializations: telescoping
//! primitives for 1-cocycles, the 2-cocycle of a coherent section with its
//! trivializing 1-cochain, the induced logarithm and gauge function, and the
//! unit-modulus multiplier solve.
//!
//! Grid functions are carried as `StepPath` values (one complex d-vector per
//! cell); the cell `k` of a cocycle value samples the half line at the left
//! cell edge `(k-1) h`.  Anchors (`f(first cell) = 0`, `u(h) = 1`) pin the
//! additive-constant and character gauges so outputs are comparable.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::forms::{AdditiveForm, PathForm};
use crate::grid::TimeGrid;
use crate::numeric::C;
use crate::path::{concat_box, PathSection, StepPath};

/// Which cocycle equation a family satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocycleConvention {
    /// `phi_{s+t}(x) = phi_s(x) + phi_t(x + s)`: forward translation of the
    /// argument.
    ForwardTranslate,
    /// `phi_{s+t} = phi_s + U_s phi_t` with `U_s` the right shift by `s`.
    Shift,
}

/// A family `t -> phi_t` of grid functions for `t = h, 2h, ..., t_max`.
#[derive(Debug, Clone)]
pub struct CocycleFamily {
    grid: TimeGrid,
    dim: usize,
    values: Vec<StepPath>,
    convention: CocycleConvention,
    support_normalized: bool,
}

impl CocycleFamily {
    pub fn new(
        grid: TimeGrid,
        dim: usize,
        values: Vec<StepPath>,
        convention: CocycleConvention,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument { op: "CocycleFamily::new", what: "empty family".into() });
        }
        for (idx, v) in values.iter().enumerate() {
            if v.grid() != &grid || v.dim() != dim {
                return Err(Error::InvalidArgument {
                    op: "CocycleFamily::new",
                    what: format!("value {} does not match the family grid/dim", idx + 1),
                });
            }
        }
        let support_normalized = convention == CocycleConvention::Shift
            && values.iter().enumerate().all(|(idx, v)| v.len_cells() == idx + 1);
        Ok(CocycleFamily { grid, dim, values, convention, support_normalized })
    }

    /// The family `phi_t(x) = f(x + t) - f(x)` generated by a primitive.
    pub fn coboundary_of(f: &StepPath, t_max_cells: usize) -> Result<Self> {
        let n = f.len_cells();
        if t_max_cells == 0 || t_max_cells >= n {
            return Err(Error::InvalidArgument {
                op: "CocycleFamily::coboundary_of",
                what: format!("need 0 < t_max < {n} cells"),
            });
        }
        let mut values = Vec::with_capacity(t_max_cells);
        for t in 1..=t_max_cells {
            let mut cells = Vec::with_capacity((n - t) * f.dim());
            for k in 1..=(n - t) {
                for j in 0..f.dim() {
                    cells.push(f.cell(k + t)[j] - f.cell(k)[j]);
                }
            }
            values.push(StepPath::new(*f.grid(), f.dim(), cells)?);
        }
        CocycleFamily::new(*f.grid(), f.dim(), values, CocycleConvention::ForwardTranslate)
    }

    /// The zero family in the shift convention, support-normalized.
    pub fn zero_shift(grid: TimeGrid, dim: usize, t_max_cells: usize) -> Result<Self> {
        let values = (1..=t_max_cells)
            .map(|t| StepPath::constant(grid, t, &vec![C::new(0.0, 0.0); dim]))
            .collect::<Result<_>>()?;
        CocycleFamily::new(grid, dim, values, CocycleConvention::Shift)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn convention(&self) -> CocycleConvention {
        self.convention
    }

    pub fn is_support_normalized(&self) -> bool {
        self.support_normalized
    }

    /// Largest `t`, in cells.
    pub fn t_max_cells(&self) -> usize {
        self.values.len()
    }

    /// `phi_t` for `t = k * h`.
    pub fn value(&self, t_cells: usize) -> Result<&StepPath> {
        self.values.get(t_cells - 1).ok_or(Error::InvalidArgument {
            op: "CocycleFamily::value",
            what: format!("t = {} cells beyond family horizon {}", t_cells, self.values.len()),
        })
    }

    fn cell_or_zero(v: &StepPath, k: usize, j: usize) -> C {
        if k >= 1 && k <= v.len_cells() {
            v.cell(k)[j]
        } else {
            C::new(0.0, 0.0)
        }
    }

    /// Serializes to a time-keyed JSON object.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (idx, v) in self.values.iter().enumerate() {
            let t = self.grid.time_of(idx + 1);
            map.insert(format!("{t}"), serde_json::to_value(v.to_json()).unwrap());
        }
        serde_json::json!({
            "h": self.grid.step(),
            "dim": self.dim,
            "convention": match self.convention {
                CocycleConvention::ForwardTranslate => "forward_translate",
                CocycleConvention::Shift => "shift",
            },
            "values": map,
        })
    }
}

/// Worst residual of the family's defining cocycle equation over all on-grid
/// `s, t` with `s + t` inside the family horizon.
pub fn cocycle1_residual(fam: &CocycleFamily) -> f64 {
    let t_max = fam.t_max_cells();
    let mut worst = 0.0_f64;
    for s in 1..t_max {
        for t in 1..=(t_max - s) {
            let whole = &fam.values[s + t - 1];
            let first = &fam.values[s - 1];
            let second = &fam.values[t - 1];
            let k_hi = match fam.convention {
                CocycleConvention::ForwardTranslate => whole
                    .len_cells()
                    .min(first.len_cells())
                    .min(second.len_cells().saturating_sub(s)),
                CocycleConvention::Shift => whole.len_cells(),
            };
            for k in 1..=k_hi {
                for j in 0..fam.dim {
                    let rhs = match fam.convention {
                        CocycleConvention::ForwardTranslate => {
                            CocycleFamily::cell_or_zero(first, k, j)
                                + CocycleFamily::cell_or_zero(second, k + s, j)
                        }
                        CocycleConvention::Shift => {
                            CocycleFamily::cell_or_zero(first, k, j)
                                + if k > s {
                                    CocycleFamily::cell_or_zero(second, k - s, j)
                                } else {
                                    C::new(0.0, 0.0)
                                }
                        }
                    };
                    worst = worst.max((whole.cell(k)[j] - rhs).norm());
                }
            }
        }
    }
    worst
}

/// Recovers the primitive of a forward-translate cocycle by telescoping,
/// anchored at `f(first cell) = 0`.  The primitive is unique up to an
/// additive constant.
pub fn solve_cocycle1(fam: &CocycleFamily, tol: f64) -> Result<StepPath> {
    if fam.convention != CocycleConvention::ForwardTranslate {
        return Err(Error::InvalidArgument {
            op: "solve_cocycle1",
            what: "primitive recovery applies to forward-translate families".into(),
        });
    }
    let residual = cocycle1_residual(fam);
    if residual > tol {
        return Err(Error::CocycleResidual { residual, tol });
    }
    let phi_h = &fam.values[0];
    let n = phi_h.len_cells() + 1;
    let dim = fam.dim;
    let mut cells = vec![C::new(0.0, 0.0); n * dim];
    for k in 1..n {
        for j in 0..dim {
            cells[k * dim + j] = cells[(k - 1) * dim + j] + phi_h.cell(k)[j];
        }
    }
    let f = StepPath::new(fam.grid, dim, cells)?;
    // validate against every member of the family
    let mut worst = 0.0_f64;
    for (idx, phi_t) in fam.values.iter().enumerate() {
        let t = idx + 1;
        let k_hi = phi_t.len_cells().min(n.saturating_sub(t));
        for k in 1..=k_hi {
            for j in 0..dim {
                let rebuilt = f.cell(k + t)[j] - f.cell(k)[j];
                worst = worst.max((phi_t.cell(k)[j] - rebuilt).norm());
            }
        }
    }
    if worst > 10.0 * tol {
        return Err(Error::CocycleResidual { residual: worst, tol: 10.0 * tol });
    }
    Ok(f)
}

/// The 2-cocycle `Gamma(s, t) = [e_s e_t] - [e_{s+t}]` of a left-coherent
/// section, in coordinates, for all on-grid `(s, t)` with `s + t` up to the
/// table horizon.
#[derive(Debug, Clone)]
pub struct GammaTable {
    grid: TimeGrid,
    dim: usize,
    m_max: usize,
    values: BTreeMap<(usize, usize), StepPath>,
}

impl GammaTable {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Table horizon: largest `s + t`, in cells.
    pub fn m_max_cells(&self) -> usize {
        self.m_max
    }

    /// `Gamma(s, t)` as an `(s+t)`-cell vector (implicit zeros beyond).
    pub fn value(&self, s_cells: usize, t_cells: usize) -> Result<&StepPath> {
        self.values.get(&(s_cells, t_cells)).ok_or(Error::InvalidArgument {
            op: "GammaTable::value",
            what: format!("({s_cells}, {t_cells}) cells outside the table"),
        })
    }

    fn cell(&self, s: usize, t: usize, k: usize, j: usize) -> C {
        let v = &self.values[&(s, t)];
        if k <= v.len_cells() {
            v.cell(k)[j]
        } else {
            C::new(0.0, 0.0)
        }
    }

    /// Builds a table from an arbitrary assignment (used to perturb tables
    /// in tests).
    pub fn from_values(
        grid: TimeGrid,
        dim: usize,
        m_max: usize,
        values: BTreeMap<(usize, usize), StepPath>,
    ) -> Result<Self> {
        for s in 1..m_max {
            for t in 1..=(m_max - s) {
                let v = values.get(&(s, t)).ok_or(Error::InvalidArgument {
                    op: "GammaTable::from_values",
                    what: format!("missing entry ({s}, {t})"),
                })?;
                if v.len_cells() != s + t {
                    return Err(Error::InvalidArgument {
                        op: "GammaTable::from_values",
                        what: format!("entry ({s}, {t}) must have {} cells", s + t),
                    });
                }
            }
        }
        Ok(GammaTable { grid, dim, m_max, values })
    }

    /// Worst violation of the support property: `Gamma(s, t)` must vanish on
    /// `(0, s]`.
    pub fn support_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (&(s, _), v) in &self.values {
            for k in 1..=s.min(v.len_cells()) {
                for j in 0..self.dim {
                    worst = worst.max(v.cell(k)[j].norm());
                }
            }
        }
        worst
    }

    /// Worst violation of the stabilization property: for `T < t1 < t2`,
    /// `Gamma(s, t1)` and `Gamma(s, t2)` agree on `(0, T]`.
    pub fn stabilization_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for s in 1..self.m_max {
            let t_hi = self.m_max - s;
            for t1 in 1..t_hi {
                let t2 = t_hi;
                // compare on (0, T] for the largest T < t1
                let cap = t1.saturating_sub(1);
                for k in 1..=cap {
                    for j in 0..self.dim {
                        worst = worst.max((self.cell(s, t1, k, j) - self.cell(s, t2, k, j)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Time-keyed JSON, `{"s,t": path}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (&(s, t), v) in &self.values {
            let key = format!("{},{}", self.grid.time_of(s), self.grid.time_of(t));
            map.insert(key, serde_json::to_value(v.to_json()).unwrap());
        }
        serde_json::json!({"h": self.grid.step(), "dim": self.dim, "values": map})
    }
}

/// Builds the Gamma table of a left-coherent section of box-paths:
/// `Gamma(s, t) = (e_s boxplus e_t) - e_{s+t}` cellwise.
pub fn gamma_of_section(section: &PathSection, m_max_cells: usize) -> Result<GammaTable> {
    if m_max_cells < 2 || m_max_cells > section.horizon_cells() {
        return Err(Error::InvalidArgument {
            op: "gamma_of_section",
            what: format!(
                "table horizon {m_max_cells} cells must lie in [2, {}]",
                section.horizon_cells()
            ),
        });
    }
    let mut values = BTreeMap::new();
    for s in 1..m_max_cells {
        let e_s = section.value(s)?;
        for t in 1..=(m_max_cells - s) {
            let e_t = section.value(t)?;
            let e_st = section.value(s + t)?;
            let gamma = concat_box(&e_s, &e_t)?.sub(&e_st)?;
            values.insert((s, t), gamma);
        }
    }
    GammaTable::from_values(*section.grid(), section.dim(), m_max_cells, values)
}

/// Worst residual of the 2-cocycle equation
/// `Gamma(r+s, t) - Gamma(r, s+t) - U_r Gamma(s, t) + Gamma(r, s)` over the
/// table.
pub fn cocycle2_residual(table: &GammaTable) -> f64 {
    let mut worst = 0.0_f64;
    let m = table.m_max;
    for r in 1..m {
        for s in 1..(m - r) {
            for t in 1..=(m - r - s) {
                let cells = r + s + t;
                for k in 1..=cells {
                    for j in 0..table.dim {
                        let shifted = if k > r {
                            table.cell(s, t, k - r, j)
                        } else {
                            C::new(0.0, 0.0)
                        };
                        let resid = table.cell(r + s, t, k, j) - table.cell(r, s + t, k, j) - shifted
                            + table.cell(r, s, k, j);
                        worst = worst.max(resid.norm());
                    }
                }
            }
        }
    }
    worst
}

/// The output of the Gamma trivialization pipeline.
#[derive(Debug, Clone)]
pub struct GammaTrivialization {
    /// `u_t(lambda) = -Gamma(t, T)(lambda)` for stabilized `T`, on cells up
    /// to `2 t_max`.
    pub u: Vec<StepPath>,
    /// The primitive recovered from `v_t(lambda) = u_t(lambda + t)`.
    pub w: StepPath,
    /// The support-normalized 1-cochain `phi_t = (u_t - w) 1_{(0, t]}`.
    pub phi: CocycleFamily,
    /// Worst residual of `Gamma(s,t) = phi_{s+t} - phi_s - U_s phi_t` over
    /// the requested horizon.
    pub residual: f64,
}

/// Trivializes a 2-cocycle table: produces `phi` with exact support
/// normalization and shift-cocycle residual within `10 * tol`.  Requires the
/// table horizon to be at least three times the requested `t_max`.
pub fn trivialize_gamma(table: &GammaTable, t_max_cells: usize, tol: f64) -> Result<GammaTrivialization> {
    if t_max_cells == 0 {
        return Err(Error::InvalidArgument { op: "trivialize_gamma", what: "t_max must be positive".into() });
    }
    if 3 * t_max_cells > table.m_max {
        return Err(Error::StabilizationFailed {
            t: table.grid.time_of(t_max_cells),
            horizon: table.grid.time_of(table.m_max),
        });
    }
    let c2 = cocycle2_residual(table);
    if c2 > tol {
        return Err(Error::CocycleResidual { residual: c2, tol });
    }
    let span = 2 * t_max_cells;
    let dim = table.dim;

    // u_t from the stabilized tail of Gamma(t, .)
    let mut u = Vec::with_capacity(t_max_cells);
    for t in 1..=t_max_cells {
        let big = table.m_max - t;
        // stabilization check on the cells we are about to use
        let mut stab = 0.0_f64;
        for k in 1..=span {
            for j in 0..dim {
                stab = stab.max((table.cell(t, big, k, j) - table.cell(t, big - 1, k, j)).norm());
            }
        }
        if stab > tol {
            return Err(Error::StabilizationFailed {
                t: table.grid.time_of(t),
                horizon: table.grid.time_of(table.m_max),
            });
        }
        let mut cells = Vec::with_capacity(span * dim);
        for k in 1..=span {
            for j in 0..dim {
                cells.push(-table.cell(t, big, k, j));
            }
        }
        u.push(StepPath::new(table.grid, dim, cells)?);
    }

    // v_t(lambda) = u_t(lambda + t): a forward-translate 1-cocycle
    let mut v_values = Vec::with_capacity(t_max_cells);
    for t in 1..=t_max_cells {
        let ut = &u[t - 1];
        let mut cells = Vec::with_capacity(t_max_cells * dim);
        for k in 1..=t_max_cells {
            for j in 0..dim {
                cells.push(ut.cell(k + t)[j]);
            }
        }
        v_values.push(StepPath::new(table.grid, dim, cells)?);
    }
    let v = CocycleFamily::new(table.grid, dim, v_values, CocycleConvention::ForwardTranslate)?;
    let w = solve_cocycle1(&v, 10.0 * tol)?;

    // phi_t = (u_t - w) restricted to (0, t]
    let mut phi_values = Vec::with_capacity(t_max_cells);
    for t in 1..=t_max_cells {
        let ut = &u[t - 1];
        let mut cells = Vec::with_capacity(t * dim);
        for k in 1..=t {
            for j in 0..dim {
                cells.push(ut.cell(k)[j] - w.cell(k)[j]);
            }
        }
        phi_values.push(StepPath::new(table.grid, dim, cells)?);
    }
    let phi = CocycleFamily::new(table.grid, dim, phi_values, CocycleConvention::Shift)?;

    // residual of (the shift equation) against the table
    let mut worst = 0.0_f64;
    for s in 1..t_max_cells {
        for t in 1..=(t_max_cells - s) {
            let whole = phi.value(s + t)?;
            let first = phi.value(s)?;
            let second = phi.value(t)?;
            for k in 1..=(s + t) {
                for j in 0..dim {
                    let lhs = whole.cell(k)[j]
                        - CocycleFamily::cell_or_zero(first, k, j)
                        - if k > s {
                            CocycleFamily::cell_or_zero(second, k - s, j)
                        } else {
                            C::new(0.0, 0.0)
                        };
                    worst = worst.max((lhs - table.cell(s, t, k, j)).norm());
                }
            }
        }
    }
    if worst > 10.0 * tol {
        return Err(Error::CocycleResidual { residual: worst, tol: 10.0 * tol });
    }
    Ok(GammaTrivialization { u, w, phi, residual: worst })
}

/// The fiber logarithm `log(z) = [z] - [e_t] - phi_t` in the coordinatized
/// path space: a grid vector supported in `(0, t]`.
pub fn build_log(
    form: &AdditiveForm,
    section: &PathSection,
    phi: &CocycleFamily,
    z: &StepPath,
) -> Result<StepPath> {
    if !matches!(form, AdditiveForm::Inner) {
        return Err(Error::NonCoordinatized);
    }
    if !phi.is_support_normalized() {
        return Err(Error::InvalidArgument {
            op: "build_log",
            what: "phi must be a support-normalized shift family".into(),
        });
    }
    let t = z.len_cells();
    let e_t = section.value(t)?;
    z.sub(&e_t)?.sub(phi.value(t)?)
}

/// The gauge function `rho(x) = <[x]-[e_t], phi_t> + g(x, e_t)
/// - (g(e_t, e_t) + |phi_t|^2) / 2` making the logarithm reproduce `g`.
pub fn rho_eval(
    form: &AdditiveForm,
    section: &PathSection,
    phi: &CocycleFamily,
    x: &StepPath,
) -> Result<C> {
    if !matches!(form, AdditiveForm::Inner) {
        return Err(Error::NonCoordinatized);
    }
    let t = x.len_cells();
    let e_t = section.value(t)?;
    let phi_t = phi.value(t)?;
    let centered = x.sub(&e_t)?;
    let ip = centered.l2_inner(phi_t)?;
    let g_xe = form.eval(x, &e_t)?;
    let g_ee = form.eval(&e_t, &e_t)?;
    let phi_norm_sq = phi_t.l2_norm_sq();
    Ok(ip + g_xe - (g_ee + phi_norm_sq) * 0.5)
}

/// The result of the multiplier solve.
#[derive(Debug, Clone)]
pub struct MultiplierTrivialization {
    /// `u(kh)` for `k = 1..=n`, with `u(h) = 1`.
    pub u: Vec<C>,
    /// Worst `|c0(s,t) - u(s) u(t) / u(s+t)|` over the grid.
    pub reconstruction_residual: f64,
}

/// Solves `c0(s, t) = u(s) u(t) / u(s + t)` for a unit-modulus multiplier on
/// the grid, anchored at `u(h) = 1`.  The solution is unique up to a
/// character `e^{i a t}`.
pub fn trivialize_multiplier(
    c0: &dyn Fn(usize, usize) -> C,
    n_cells: usize,
    tol: f64,
) -> Result<MultiplierTrivialization> {
    if n_cells < 2 {
        return Err(Error::InvalidArgument {
            op: "trivialize_multiplier",
            what: "need at least 2 grid cells".into(),
        });
    }
    // preconditions: unit modulus and the multiplier equation
    let mut worst_mod = 0.0_f64;
    for s in 1..n_cells {
        for t in 1..=(n_cells - s) {
            worst_mod = worst_mod.max((c0(s, t).norm() - 1.0).abs());
        }
    }
    if worst_mod > tol {
        return Err(Error::InvalidArgument {
            op: "trivialize_multiplier",
            what: format!("input is not unit-modulus: deviation {worst_mod:.3e}"),
        });
    }
    let mut worst_eq = 0.0_f64;
    for r in 1..n_cells {
        for s in 1..(n_cells - r) {
            for t in 1..=(n_cells - r - s) {
                let lhs = c0(r, s + t) * c0(s, t);
                let rhs = c0(r + s, t) * c0(r, s);
                worst_eq = worst_eq.max((lhs - rhs).norm());
            }
        }
    }
    if worst_eq > tol {
        return Err(Error::CocycleResidual { residual: worst_eq, tol });
    }

    let mut u = Vec::with_capacity(n_cells);
    u.push(C::new(1.0, 0.0));
    for k in 1..n_cells {
        let next = u[k - 1] * u[0] / c0(k, 1);
        u.push(next);
    }
    let mut worst = 0.0_f64;
    for s in 1..n_cells {
        for t in 1..=(n_cells - s) {
            let recon = u[s - 1] * u[t - 1] / u[s + t - 1];
            worst = worst.max((c0(s, t) - recon).norm());
        }
    }
    if worst > 10.0 * tol {
        return Err(Error::CocycleResidual { residual: worst, tol: 10.0 * tol });
    }
    Ok(MultiplierTrivialization { u, reconstruction_residual: worst })
}
