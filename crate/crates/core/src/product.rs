//! The product structure generated by a metric path space: formal spans of
//! `F_t(x)` with Gram `e^{g(x,y)}`, the defect-corrected multiplication, and
//! the isomorphism onto the exponential model.

use nalgebra::DMatrix;

use crate::cocycles::{build_log, rho_eval, CocycleFamily};
use crate::error::{Error, Result};
use crate::fock::ExpSpanVector;
use crate::forms::{AdditiveForm, DefectTable, PathForm};
use crate::numeric::C;
use crate::path::{concat_box, PathSection, StepPath};

/// A formal span `sum_k lambda_k F_t(x_k)` over one fiber.
#[derive(Debug, Clone)]
pub struct ProductVector {
    t_cells: usize,
    terms: Vec<(C, StepPath)>,
}

impl ProductVector {
    pub fn new(terms: Vec<(C, StepPath)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument { op: "ProductVector::new", what: "empty span".into() });
        }
        let t_cells = terms[0].1.len_cells();
        for (_, p) in &terms[1..] {
            terms[0].1.check_same_fiber(p)?;
        }
        Ok(ProductVector { t_cells, terms })
    }

    pub fn single(lambda: C, x: StepPath) -> Self {
        ProductVector { t_cells: x.len_cells(), terms: vec![(lambda, x)] }
    }

    pub fn t_cells(&self) -> usize {
        self.t_cells
    }

    pub fn terms(&self) -> &[(C, StepPath)] {
        &self.terms
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(l, p)| {
                serde_json::json!({
                    "lambda": [l.re, l.im],
                    "path": serde_json::to_value(p.to_json()).unwrap(),
                })
            })
            .collect();
        let t = self.terms[0].1.grid().time_of(self.t_cells);
        serde_json::json!({"t": t, "terms": terms})
    }
}

/// `<u, v> = sum_kl lambda_k conj(mu_l) e^{g(x_k, y_l)}`, the exact double sum.
pub fn pvec_inner(form: &dyn PathForm, u: &ProductVector, v: &ProductVector) -> Result<C> {
    if u.t_cells != v.t_cells {
        return Err(Error::FiberMismatch { left: u.t_cells, right: v.t_cells });
    }
    let mut acc = C::new(0.0, 0.0);
    for (lk, xk) in &u.terms {
        for (ml, yl) in &v.terms {
            acc += lk * ml.conj() * form.eval(xk, yl)?.exp();
        }
    }
    Ok(acc)
}

/// Gram of a family of product vectors.
pub fn pvec_gram(form: &dyn PathForm, family: &[ProductVector]) -> Result<DMatrix<C>> {
    let n = family.len();
    let mut g = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = pvec_inner(form, &family[i], &family[j])?;
        }
    }
    Ok(g)
}

/// The defect-corrected product `F_s(x) . F_t(y) = e^{-psi(x,y)} F_{s+t}(xy)`
/// extended bilinearly.  Pass `None` for zero-defect forms.  Terms with
/// exactly equal paths are coalesced.
pub fn multiply(
    u: &ProductVector,
    v: &ProductVector,
    psi: Option<&DefectTable>,
) -> Result<ProductVector> {
    let mut terms: Vec<(C, StepPath)> = Vec::with_capacity(u.terms.len() * v.terms.len());
    for (lk, xk) in &u.terms {
        for (ml, yl) in &v.terms {
            let correction = match psi {
                None => C::new(1.0, 0.0),
                Some(table) => (-table.lookup(xk, yl)?).exp(),
            };
            let path = concat_box(xk, yl)?;
            let coeff = lk * ml * correction;
            if let Some(slot) = terms.iter_mut().find(|(_, p)| *p == path) {
                slot.0 += coeff;
            } else {
                terms.push((coeff, path));
            }
        }
    }
    ProductVector::new(terms)
}

/// The standard isomorphism onto the exponential model:
/// `F_t(x) = e^{rho(x)} G_t(x)` and `G_t(x) -> exp(log x)`, extended
/// linearly.  Requires the coordinatized (Inner) form.
pub fn standard_iso(
    form: &AdditiveForm,
    section: &PathSection,
    phi: &CocycleFamily,
    u: &ProductVector,
) -> Result<ExpSpanVector<StepPath>> {
    if !matches!(form, AdditiveForm::Inner) {
        return Err(Error::NonCoordinatized);
    }
    let mut terms = Vec::with_capacity(u.terms.len());
    for (lambda, x) in &u.terms {
        let rho = rho_eval(form, section, phi, x)?;
        let log_x = build_log(form, section, phi, x)?;
        terms.push((lambda * rho.exp(), log_x));
    }
    ExpSpanVector::new(terms)
}
