//! Decomposable vectors `lambda exp(f)`, left-coherent sections of them, and
//! the exact division calculus of the exponential model.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::numeric::C;
use crate::path::{concat_box, prefix, propagator_cells, StepPath};

/// A nonzero decomposable vector `lambda exp(f)` of the exponential model,
/// living in the fiber over `t = len(f)`.
#[derive(Debug, Clone)]
pub struct DecompVector {
    lambda: C,
    f: StepPath,
}

impl DecompVector {
    pub fn new(lambda: C, f: StepPath) -> Result<Self> {
        if lambda.norm() == 0.0 {
            return Err(Error::InvalidArgument {
                op: "DecompVector::new",
                what: "decomposable vectors are nonzero: lambda must not vanish".into(),
            });
        }
        Ok(DecompVector { lambda, f })
    }

    pub fn lambda(&self) -> C {
        self.lambda
    }

    pub fn exponent(&self) -> &StepPath {
        &self.f
    }

    pub fn t_cells(&self) -> usize {
        self.f.len_cells()
    }

    /// `<u, v> = lambda conj(mu) e^{<f, h>}`: never zero in this model.
    pub fn inner(&self, other: &DecompVector) -> Result<C> {
        Ok(self.lambda * other.lambda.conj() * self.f.l2_inner(&other.f)?.exp())
    }

    /// `|u| = |lambda| e^{|f|^2 / 2}`.
    pub fn norm(&self) -> f64 {
        self.lambda.norm() * (0.5 * self.f.l2_norm_sq()).exp()
    }

    /// Model product: scalars multiply, exponents concatenate.
    pub fn product(&self, other: &DecompVector) -> Result<DecompVector> {
        DecompVector::new(self.lambda * other.lambda, concat_box(&self.f, &other.f)?)
    }

    pub fn scale(&self, factor: C) -> Result<DecompVector> {
        DecompVector::new(self.lambda * factor, self.f.clone())
    }
}

/// Inner product of two decomposable vectors.
pub fn dv_inner(u: &DecompVector, v: &DecompVector) -> Result<C> {
    u.inner(v)
}

/// Extracts the left divisor `a` with `a b = x`, given the right factor `b`.
/// Division is exact on exponentials: the tail of `x`'s exponent must match
/// `b`'s, and the scalar is allocated so the reconstruction is exact.
pub fn left_divide(x: &DecompVector, b: &DecompVector) -> Result<DecompVector> {
    let t = x.t_cells();
    let tb = b.t_cells();
    if tb >= t {
        return Err(Error::InvalidArgument {
            op: "left_divide",
            what: format!("right factor spans {tb} of {t} cells; nothing to divide"),
        });
    }
    let s = t - tb;
    for k in 1..=tb {
        let dev: f64 = x
            .f
            .cell(s + k)
            .iter()
            .zip(b.f.cell(k))
            .map(|(a, c)| (a - c).norm())
            .fold(0.0, f64::max);
        if dev > 1e-12 {
            return Err(Error::NotADivisor { cell: s + k, deviation: dev });
        }
    }
    DecompVector::new(x.lambda / b.lambda, prefix(&x.f, s)?)
}

/// A left-coherent section of decomposables: prefixes of a master exponent
/// with a scalar for every grid time.  Interval propagators carry the scalar
/// ratio `lambda_s / lambda_r`, which keeps `x_s x(s, t) = x_t` exact.
#[derive(Debug, Clone)]
pub struct CoherentSection {
    master: StepPath,
    lambdas: Vec<C>,
}

impl CoherentSection {
    pub fn new(master: StepPath, lambdas: Vec<C>) -> Result<Self> {
        if lambdas.len() != master.len_cells() {
            return Err(Error::InvalidArgument {
                op: "CoherentSection::new",
                what: format!(
                    "need one scalar per grid time: {} scalars for {} cells",
                    lambdas.len(),
                    master.len_cells()
                ),
            });
        }
        if lambdas.iter().any(|l| l.norm() == 0.0) {
            return Err(Error::InvalidArgument {
                op: "CoherentSection::new",
                what: "section scalars must be nonzero".into(),
            });
        }
        Ok(CoherentSection { master, lambdas })
    }

    /// The prefix section through a single vector, with unit scalars at
    /// intermediate times.  Sufficient wherever only scalar-homogeneous
    /// quantities are consumed.
    pub fn through(x: &DecompVector) -> Result<Self> {
        let t = x.t_cells();
        let mut lambdas = vec![C::new(1.0, 0.0); t];
        lambdas[t - 1] = x.lambda();
        CoherentSection::new(x.exponent().clone(), lambdas)
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

    pub fn master(&self) -> &StepPath {
        &self.master
    }

    pub fn value(&self, k_cells: usize) -> Result<DecompVector> {
        if k_cells == 0 || k_cells > self.horizon_cells() {
            return Err(Error::InvalidArgument {
                op: "CoherentSection::value",
                what: format!("time {k_cells} cells outside (0, {}]", self.horizon_cells()),
            });
        }
        DecompVector::new(self.lambdas[k_cells - 1], prefix(&self.master, k_cells)?)
    }

    /// Interval propagator `x(r, s)` with scalar `lambda_s / lambda_r`.
    pub fn interval(&self, r_cells: usize, s_cells: usize) -> Result<DecompVector> {
        if r_cells == 0 {
            return self.value(s_cells);
        }
        let lambda = self.lambdas[s_cells - 1] / self.lambdas[r_cells - 1];
        DecompVector::new(lambda, propagator_cells(&self.master, r_cells, s_cells)?)
    }

    /// Rescales every value by `1 / <x_t, e_t>`, landing in the normalized
    /// class: afterwards `<x_t, e_t> = 1` for every grid time, exactly.
    pub fn de_normalize(&self, e: &ExpReference) -> Result<CoherentSection> {
        let mut lambdas = Vec::with_capacity(self.lambdas.len());
        for k in 1..=self.horizon_cells() {
            let x_k = self.value(k)?;
            let ip = x_k.inner(&e.value(k)?)?;
            // never zero in the model; guard against degenerate data anyway
            if ip.norm() == 0.0 {
                return Err(Error::InvalidArgument {
                    op: "de_normalize",
                    what: format!("<x_t, e_t> vanished at t = {k} cells"),
                });
            }
            lambdas.push(self.lambdas[k - 1] / ip);
        }
        CoherentSection::new(self.master.clone(), lambdas)
    }

    /// Rescales every value to unit norm.
    pub fn unit_normalize(&self) -> Result<CoherentSection> {
        let mut lambdas = Vec::with_capacity(self.lambdas.len());
        for k in 1..=self.horizon_cells() {
            let norm = self.value(k)?.norm();
            lambdas.push(self.lambdas[k - 1] / norm);
        }
        CoherentSection::new(self.master.clone(), lambdas)
    }

    /// Worst deviation of `<x_t, e_t>` from 1 over the section.
    pub fn de_residual(&self, e: &ExpReference) -> Result<f64> {
        let mut worst = 0.0_f64;
        for k in 1..=self.horizon_cells() {
            let ip = self.value(k)?.inner(&e.value(k)?)?;
            worst = worst.max((ip - C::new(1.0, 0.0)).norm());
        }
        Ok(worst)
    }

    /// The section on the refined grid (cells split in two, scalars
    /// interpolated by reusing the coarse value at both half-times is wrong;
    /// instead the de-normalized representative should be rebuilt, so this
    /// only refines the exponent and keeps the scalar at full cells).
    pub fn refine_exponent(&self) -> StepPath {
        self.master.refine()
    }

    /// Serializes to `{entries: [{t, lambda, path}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = (1..=self.horizon_cells())
            .map(|k| {
                let v = self.value(k).unwrap();
                serde_json::json!({
                    "t": self.grid().time_of(k),
                    "lambda": [v.lambda().re, v.lambda().im],
                    "path": serde_json::to_value(v.exponent().to_json()).unwrap(),
                })
            })
            .collect();
        serde_json::json!({"entries": entries})
    }
}

/// The unit-norm reference section `e_t = e^{-|eps|^2 t / 2} exp(eps 1)`.
/// Its interval propagators coincide with its values: the reference is
/// stationary.
#[derive(Debug, Clone)]
pub struct ExpReference {
    grid: TimeGrid,
    epsilon: Vec<C>,
    horizon_cells: usize,
}

impl ExpReference {
    pub fn new(grid: TimeGrid, epsilon: Vec<C>, horizon_cells: usize) -> Result<Self> {
        if epsilon.is_empty() {
            return Err(Error::InvalidArgument {
                op: "ExpReference::new",
                what: "epsilon must have positive dimension".into(),
            });
        }
        if horizon_cells == 0 || horizon_cells > grid.n_max() {
            return Err(Error::InvalidArgument {
                op: "ExpReference::new",
                what: format!("horizon {horizon_cells} cells outside (0, {}]", grid.n_max()),
            });
        }
        Ok(ExpReference { grid, epsilon, horizon_cells })
    }

    pub fn vacuum(grid: TimeGrid, dim: usize, horizon_cells: usize) -> Result<Self> {
        ExpReference::new(grid, vec![C::new(0.0, 0.0); dim], horizon_cells)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn epsilon(&self) -> &[C] {
        &self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.epsilon.len()
    }

    pub fn horizon_cells(&self) -> usize {
        self.horizon_cells
    }

    fn eps_norm_sq(&self) -> f64 {
        self.epsilon.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn value(&self, k_cells: usize) -> Result<DecompVector> {
        let t = self.grid.time_of(k_cells);
        let lambda = C::new((-0.5 * self.eps_norm_sq() * t).exp(), 0.0);
        DecompVector::new(lambda, StepPath::constant(self.grid, k_cells, &self.epsilon)?)
    }

    /// `e(r, s)`: equals `e_{s-r}` because the reference is stationary.
    pub fn interval(&self, r_cells: usize, s_cells: usize) -> Result<DecompVector> {
        if r_cells >= s_cells {
            return Err(Error::InvalidArgument {
                op: "ExpReference::interval",
                what: "need r < s".into(),
            });
        }
        self.value(s_cells - r_cells)
    }

    /// The reference as a plain coherent section.
    pub fn as_section(&self) -> Result<CoherentSection> {
        let master = StepPath::constant(self.grid, self.horizon_cells, &self.epsilon)?;
        let lambdas = (1..=self.horizon_cells)
            .map(|k| C::new((-0.5 * self.eps_norm_sq() * self.grid.time_of(k)).exp(), 0.0))
            .collect();
        CoherentSection::new(master, lambdas)
    }

    /// The same reference on the refined grid.
    pub fn refine(&self) -> Result<ExpReference> {
        ExpReference::new(self.grid.refine(), self.epsilon.clone(), self.horizon_cells * 2)
    }

    /// Model oracle for the e-logarithm: `<f - eps 1, h - eps 1>` over
    /// `(0, t]` for the exponents of two decomposables.
    pub fn oracle_log(&self, x: &DecompVector, y: &DecompVector) -> Result<C> {
        if x.t_cells() != y.t_cells() {
            return Err(Error::FiberMismatch { left: x.t_cells(), right: y.t_cells() });
        }
        let eps = StepPath::constant(self.grid, x.t_cells(), &self.epsilon)?;
        x.exponent().sub(&eps)?.l2_inner(&y.exponent().sub(&eps)?)
    }
}

/// Builds a random coherent section for tests and experiments.
pub fn random_section(
    rng: &mut impl rand::Rng,
    grid: TimeGrid,
    dim: usize,
    horizon_cells: usize,
    scale: f64,
) -> CoherentSection {
    let master = crate::sampling::random_paths(rng, grid, 1, dim, horizon_cells, scale).remove(0);
    let lambdas = (0..horizon_cells)
        .map(|_| {
            // keep scalars bounded away from zero
            let z = crate::sampling::random_complex(rng, 1.0);
            z + C::new(1.5_f64.copysign(z.re), 0.0)
        })
        .collect();
    CoherentSection::new(master, lambdas).expect("valid random section")
}
