//! Additive forms on path pairs: the kernels `g` of a metric path space,
//! with conditional positivity, infinite divisibility and defect-splitting
//! diagnostics.
//!
//! All four built-in kinds are cell sums, so they split over concatenation
//! with zero defect; the diagnostics exist to certify that and to extract
//! the defect of perturbed forms.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, C};
use crate::path::StepPath;

/// Relative scale used by PSD certificates: `min eig >= -1e-8 * max(1, |G|_max)`.
pub const PSD_RELATIVE_TOL: f64 = 1e-8;

/// Hermitian-symmetry tolerance for assembled Gram matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// An evaluable kernel on pairs of same-length paths.
pub trait PathForm: Sync {
    fn eval(&self, x: &StepPath, y: &StepPath) -> Result<C>;

    fn label(&self) -> String {
        "custom".into()
    }
}

/// A conditionally positive definite function of two reals, sampled on a
/// uniform node grid and evaluated by bilinear interpolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaGrid {
    min: f64,
    step: f64,
    n: usize,
    // row-major: values[i * n + j] = gamma(min + i step, min + j step)
    values_re: Vec<f64>,
    values_im: Vec<f64>,
}

impl GammaGrid {
    /// Samples `gamma` on `n x n` nodes starting at `min` with spacing `step`.
    pub fn sample(min: f64, step: f64, n: usize, gamma: impl Fn(f64, f64) -> C) -> Result<Self> {
        if n < 2 || !(step > 0.0) {
            return Err(Error::InvalidArgument {
                op: "GammaGrid::sample",
                what: "need n >= 2 nodes and a positive step".into(),
            });
        }
        let mut values_re = Vec::with_capacity(n * n);
        let mut values_im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = gamma(min + i as f64 * step, min + j as f64 * step);
                values_re.push(z.re);
                values_im.push(z.im);
            }
        }
        Ok(GammaGrid { min, step, n, values_re, values_im })
    }

    fn node(&self, i: usize, j: usize) -> C {
        C::new(self.values_re[i * self.n + j], self.values_im[i * self.n + j])
    }

    /// Bilinear interpolation; arguments must lie inside the table range.
    pub fn eval(&self, a: f64, b: f64) -> Result<C> {
        let max = self.min + (self.n - 1) as f64 * self.step;
        if a < self.min || a > max || b < self.min || b > max {
            return Err(Error::InvalidArgument {
                op: "GammaGrid::eval",
                what: format!("({a}, {b}) outside table range [{}, {max}]", self.min),
            });
        }
        let fi = ((a - self.min) / self.step).min((self.n - 2) as f64);
        let fj = ((b - self.min) / self.step).min((self.n - 2) as f64);
        let i = fi.floor() as usize;
        let j = fj.floor() as usize;
        let u = (a - self.min) / self.step - i as f64;
        let v = (b - self.min) / self.step - j as f64;
        Ok(self.node(i, j) * ((1.0 - u) * (1.0 - v))
            + self.node(i + 1, j) * (u * (1.0 - v))
            + self.node(i, j + 1) * ((1.0 - u) * v)
            + self.node(i + 1, j + 1) * (u * v))
    }
}

/// The built-in additive forms.
#[derive(Debug, Clone)]
pub enum AdditiveForm {
    /// `g(x, y) = h sum_k <x_k, y_k>`: the L^2 inner product.
    Inner,
    /// `g(x, y) = -c h sum_k (x_k - y_k)^2` on real scalar paths.
    Gaussian { c: f64 },
    /// `g(x, y) = c h sum_k (e^{i h0 (x_k - y_k)} - 1)` on real scalar paths.
    Poisson { c: f64, h0: f64 },
    /// `g(x, y) = h sum_k gamma(x_k, y_k)` for a sampled CPD kernel.
    GammaKernel(GammaGrid),
}

impl AdditiveForm {
    fn require_real_scalar(x: &StepPath, y: &StepPath) -> Result<()> {
        if !x.is_real_scalar() || !y.is_real_scalar() {
            return Err(Error::RealOnlyForm);
        }
        Ok(())
    }

    /// Serializes to the `{kind, params}` descriptor.
    pub fn to_descriptor(&self) -> serde_json::Value {
        match self {
            AdditiveForm::Inner => serde_json::json!({"kind": "inner", "params": {}}),
            AdditiveForm::Gaussian { c } => serde_json::json!({"kind": "gaussian", "params": {"c": c}}),
            AdditiveForm::Poisson { c, h0 } => {
                serde_json::json!({"kind": "poisson", "params": {"c": c, "h0": h0}})
            }
            AdditiveForm::GammaKernel(t) => serde_json::json!({
                "kind": "gamma_kernel",
                "params": {"min": t.min, "step": t.step, "n": t.n,
                           "values_re": t.values_re, "values_im": t.values_im}
            }),
        }
    }
}

impl PathForm for AdditiveForm {
    fn eval(&self, x: &StepPath, y: &StepPath) -> Result<C> {
        x.check_same_fiber(y)?;
        let h = x.grid().step();
        match self {
            AdditiveForm::Inner => {
                let mut acc = C::new(0.0, 0.0);
                for (a, b) in x.cells().iter().zip(y.cells()) {
                    acc += a * b.conj();
                }
                Ok(acc * h)
            }
            AdditiveForm::Gaussian { c } => {
                Self::require_real_scalar(x, y)?;
                let mut acc = 0.0;
                for (a, b) in x.cells().iter().zip(y.cells()) {
                    let d = a.re - b.re;
                    acc += d * d;
                }
                Ok(C::new(-c * h * acc, 0.0))
            }
            AdditiveForm::Poisson { c, h0 } => {
                Self::require_real_scalar(x, y)?;
                let mut acc = C::new(0.0, 0.0);
                for (a, b) in x.cells().iter().zip(y.cells()) {
                    let d = h0 * (a.re - b.re);
                    acc += C::new(d.cos() - 1.0, d.sin());
                }
                Ok(acc * (c * h))
            }
            AdditiveForm::GammaKernel(table) => {
                Self::require_real_scalar(x, y)?;
                let mut acc = C::new(0.0, 0.0);
                for (a, b) in x.cells().iter().zip(y.cells()) {
                    acc += table.eval(a.re, b.re)?;
                }
                Ok(acc * h)
            }
        }
    }

    fn label(&self) -> String {
        match self {
            AdditiveForm::Inner => "inner".into(),
            AdditiveForm::Gaussian { c } => format!("gaussian(c={c})"),
            AdditiveForm::Poisson { c, h0 } => format!("poisson(c={c},h0={h0})"),
            AdditiveForm::GammaKernel(_) => "gamma-kernel".into(),
        }
    }
}

/// Evaluates the form on one pair.
pub fn eval_form(form: &dyn PathForm, x: &StepPath, y: &StepPath) -> Result<C> {
    form.eval(x, y)
}

/// Assembles the Gram matrix `G_ij = g(x_i, x_j)`.  Rows are computed in
/// parallel; each entry is written to its own slot, so the result does not
/// depend on the thread count.
pub fn gram(form: &dyn PathForm, samples: &[StepPath]) -> Result<DMatrix<C>> {
    let n = samples.len();
    let rows: Vec<Result<Vec<C>>> = samples
        .par_iter()
        .map(|xi| samples.iter().map(|xj| form.eval(xi, xj)).collect())
        .collect();
    let mut g = DMatrix::<C>::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    Ok(g)
}

/// Gram matrix to CSV with a header row of sample labels.
pub fn gram_to_csv(g: &DMatrix<C>, labels: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&labels.join(","));
    out.push('\n');
    for i in 0..g.nrows() {
        let row: Vec<String> = (0..g.ncols())
            .map(|j| format!("{:?}{:+?}i", g[(i, j)].re, g[(i, j)].im))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Scale-relative PSD tolerance for a Gram matrix.
pub fn psd_tolerance(g: &DMatrix<C>) -> f64 {
    PSD_RELATIVE_TOL * numeric::max_abs(g).max(1.0)
}

/// Minimum eigenvalue of the Gram compressed to the sum-zero subspace.
/// Nonnegative (within tolerance) certifies conditional positive
/// definiteness on the sample.
pub fn cpd_check(form: &dyn PathForm, samples: &[StepPath]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument { op: "cpd_check", what: "need at least 2 samples".into() });
    }
    let g = gram(form, samples)?;
    let asym = numeric::hermitian_asymmetry(&g);
    let tol = HERMITIAN_TOL * numeric::max_abs(&g).max(1.0);
    if asym > tol {
        return Err(Error::NonHermitianGram { asym, tol });
    }
    Ok(numeric::projected_min_eigenvalue(&g))
}

/// Minimum over `roots` of the smallest eigenvalue of `[e^{G_ij / n}]`.
/// All nonnegative (within tolerance) certifies infinite divisibility of
/// `e^g` at sample scale.
pub fn pd_root_check(form: &dyn PathForm, samples: &[StepPath], roots: &[f64]) -> Result<f64> {
    let g = gram(form, samples)?;
    let mut worst = f64::INFINITY;
    for &n in roots {
        if n <= 0.0 {
            return Err(Error::InvalidArgument { op: "pd_root_check", what: "roots must be positive".into() });
        }
        let max_exp = numeric::max_abs(&g) / n;
        if max_exp > 700.0 {
            return Err(Error::Overflow { op: "pd_root_check", max: max_exp });
        }
        let rooted = g.map(|z| (z / n).exp());
        worst = worst.min(numeric::min_eigenvalue(&rooted));
    }
    Ok(worst)
}

/// The concatenation remainder `r(x1, y1; x2, y2) = g(x1 y1, x2 y2)
/// - g(x1, x2) - g(y1, y2)` on a sample of pairs, as a matrix over pair
/// indices.
fn remainder_matrix(form: &dyn PathForm, pairs: &[(StepPath, StepPath)]) -> Result<DMatrix<C>> {
    let concats: Vec<StepPath> = pairs
        .iter()
        .map(|(x, y)| crate::path::concat_box(x, y))
        .collect::<Result<_>>()?;
    let n = pairs.len();
    let mut r = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let whole = form.eval(&concats[i], &concats[j])?;
            let left = form.eval(&pairs[i].0, &pairs[j].0)?;
            let right = form.eval(&pairs[i].1, &pairs[j].1)?;
            r[(i, j)] = whole - left - right;
        }
    }
    Ok(r)
}

/// Largest alternation residual `|r(a,b;p,q) - r(a,b;u,v) - r(c,d;p,q)
/// + r(c,d;u,v)|` over the sample: zero iff the remainder splits as
/// `psi(x1,y1) + conj psi(x2,y2)` on the sample.
pub fn additivity_split_check(form: &dyn PathForm, pairs: &[(StepPath, StepPath)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument {
            op: "additivity_split_check",
            what: "need at least 2 sample pairs".into(),
        });
    }
    let r = remainder_matrix(form, pairs)?;
    let n = pairs.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let alt = r[(i, j)] - r[(i, l)] - r[(k, j)] + r[(k, l)];
                    worst = worst.max(alt.norm());
                }
            }
        }
    }
    Ok(worst)
}

/// The extracted defect of a form on a sample of pairs.
#[derive(Debug, Clone)]
pub struct DefectTable {
    pairs: Vec<(StepPath, StepPath)>,
    values: Vec<C>,
    anchor: usize,
    /// Worst deviation of `r(x,y;x2,y2)` from `psi(x,y) + conj psi(x2,y2)`
    /// over the sample.
    pub reconstruction_residual: f64,
}

impl DefectTable {
    pub fn values(&self) -> &[C] {
        &self.values
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// Defect value for a pair, looked up by exact path equality.
    pub fn lookup(&self, x: &StepPath, y: &StepPath) -> Result<C> {
        self.pairs
            .iter()
            .position(|(p, q)| p == x && q == y)
            .map(|i| self.values[i])
            .ok_or(Error::MissingDefectEntry)
    }

    /// A table with `psi = 0` on the given pairs (zero-defect forms).
    pub fn zero(pairs: Vec<(StepPath, StepPath)>) -> Self {
        let n = pairs.len();
        DefectTable { pairs, values: vec![C::new(0.0, 0.0); n], anchor: 0, reconstruction_residual: 0.0 }
    }

    /// Merges per-shape tables into one lookup.  The defect lives on the
    /// full cartesian product of fibers while each extraction samples one
    /// `(s, t)` shape, so covering several shapes means merging.
    pub fn merged(tables: Vec<DefectTable>) -> DefectTable {
        let mut pairs = Vec::new();
        let mut values = Vec::new();
        let mut worst = 0.0_f64;
        for t in tables {
            worst = worst.max(t.reconstruction_residual);
            pairs.extend(t.pairs);
            values.extend(t.values);
        }
        DefectTable { pairs, values, anchor: 0, reconstruction_residual: worst }
    }
}

/// Extracts the defect `psi` on the sample, anchored so that
/// `Im psi(x0, y0) = 0`:
/// `psi(x0,y0) = r(x0,y0;x0,y0)/2` and `psi(x,y) = r(x,y;x0,y0) - psi(x0,y0)`.
pub fn defect_extract(
    form: &dyn PathForm,
    pairs: &[(StepPath, StepPath)],
    anchor: usize,
    tol: f64,
) -> Result<DefectTable> {
    let split = additivity_split_check(form, pairs)?;
    if split > tol {
        return Err(Error::CocycleResidual { residual: split, tol });
    }
    let r = remainder_matrix(form, pairs)?;
    let n = pairs.len();
    if anchor >= n {
        return Err(Error::InvalidArgument { op: "defect_extract", what: "anchor index out of range".into() });
    }
    // r(x0,y0;x0,y0) = 2 Re psi(x0,y0): real up to float noise by
    // Hermitian symmetry of the form.
    let psi0 = C::new(r[(anchor, anchor)].re / 2.0, 0.0);
    let values: Vec<C> = (0..n).map(|i| r[(i, anchor)] - psi0).collect();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let recon = values[i] + values[j].conj();
            worst = worst.max((r[(i, j)] - recon).norm());
        }
    }
    Ok(DefectTable { pairs: pairs.to_vec(), values, anchor, reconstruction_residual: worst })
}
