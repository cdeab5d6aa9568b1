//! The centered-Gram Hilbert space scaffolding: formal differences
//! `[x] - [y]`, embedding isometries, the left-shift action and the purity
//! decomposition.  Everything is checked on finite sample spans; the
//! inductive limit itself is never materialized.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::PathForm;
use crate::numeric::{self, C};
use crate::path::{concat_box, prefix, propagator_cells, StepPath};

/// Pseudo-inverse cutoff for span-residual projections.
pub const PINV_CUTOFF: f64 = 1e-10;

/// The formal difference `[plus] - [minus]` of two same-length paths.
#[derive(Debug, Clone)]
pub struct CenteredVector {
    pub plus: StepPath,
    pub minus: StepPath,
}

impl CenteredVector {
    pub fn new(plus: StepPath, minus: StepPath) -> Result<Self> {
        plus.check_same_fiber(&minus)?;
        Ok(CenteredVector { plus, minus })
    }

    pub fn len_cells(&self) -> usize {
        self.plus.len_cells()
    }

    /// Right-extends both components by the same filler.
    pub fn extend(&self, filler: &StepPath) -> Result<CenteredVector> {
        CenteredVector::new(concat_box(&self.plus, filler)?, concat_box(&self.minus, filler)?)
    }
}

/// A finite combination `sum c_i [p_i]` with `sum c_i = 0`, all paths in one
/// fiber.  Used internally to expand identities like the purity
/// decomposition into Gram arithmetic.
#[derive(Debug, Clone)]
pub struct CenteredCombo {
    terms: Vec<(C, StepPath)>,
}

impl CenteredCombo {
    pub fn new(terms: Vec<(C, StepPath)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument { op: "CenteredCombo::new", what: "empty combination".into() });
        }
        for (_, p) in &terms[1..] {
            terms[0].1.check_same_fiber(p)?;
        }
        let total: C = terms.iter().map(|(c, _)| *c).sum();
        if total.norm() > 1e-12 {
            return Err(Error::InvalidArgument {
                op: "CenteredCombo::new",
                what: format!("coefficients must sum to zero, got {total}"),
            });
        }
        Ok(CenteredCombo { terms })
    }

    pub fn from_vector(v: &CenteredVector) -> Self {
        CenteredCombo {
            terms: vec![(C::new(1.0, 0.0), v.plus.clone()), (C::new(-1.0, 0.0), v.minus.clone())],
        }
    }

    pub fn len_cells(&self) -> usize {
        self.terms[0].1.len_cells()
    }

    pub fn extend(&self, filler: &StepPath) -> Result<CenteredCombo> {
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| Ok((*c, concat_box(p, filler)?)))
            .collect::<Result<_>>()?;
        Ok(CenteredCombo { terms })
    }

    pub fn scaled(&self, factor: C) -> CenteredCombo {
        CenteredCombo { terms: self.terms.iter().map(|(c, p)| (c * factor, p.clone())).collect() }
    }

    pub fn plus(&self, other: &CenteredCombo) -> Result<CenteredCombo> {
        self.terms[0].1.check_same_fiber(&other.terms[0].1)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(CenteredCombo { terms })
    }

    /// `<self, other> = sum_ij c_i conj(d_j) g(p_i, q_j)`.
    pub fn inner(&self, form: &dyn PathForm, other: &CenteredCombo) -> Result<C> {
        let mut acc = C::new(0.0, 0.0);
        for (ci, pi) in &self.terms {
            for (dj, qj) in &other.terms {
                acc += ci * dj.conj() * form.eval(pi, qj)?;
            }
        }
        Ok(acc)
    }

    pub fn norm(&self, form: &dyn PathForm) -> Result<f64> {
        Ok(self.inner(form, self)?.re.max(0.0).sqrt())
    }
}

/// Extends the shorter of two centered vectors by the filler so both live in
/// one fiber, then evaluates the inner product (4-term Gram expansion).
/// The result does not depend on the filler.
pub fn diff_inner(
    form: &dyn PathForm,
    v1: &CenteredVector,
    v2: &CenteredVector,
    filler: Option<&StepPath>,
) -> Result<C> {
    let (a, b) = match v1.len_cells().cmp(&v2.len_cells()) {
        std::cmp::Ordering::Equal => (v1.clone(), v2.clone()),
        std::cmp::Ordering::Less => {
            let e = filler.ok_or(Error::InvalidArgument {
                op: "diff_inner",
                what: "fiber lengths differ and no filler element was supplied".into(),
            })?;
            (v1.extend(e)?, v2.clone())
        }
        std::cmp::Ordering::Greater => {
            let e = filler.ok_or(Error::InvalidArgument {
                op: "diff_inner",
                what: "fiber lengths differ and no filler element was supplied".into(),
            })?;
            (v1.clone(), v2.extend(e)?)
        }
    };
    let g11 = form.eval(&a.plus, &b.plus)?;
    let g12 = form.eval(&a.plus, &b.minus)?;
    let g21 = form.eval(&a.minus, &b.plus)?;
    let g22 = form.eval(&a.minus, &b.minus)?;
    Ok(g11 - g12 - g21 + g22)
}

/// Left multiplication `[x1] - [x2] -> [u x1] - [u x2]`: the isometric shift.
pub fn shift_apply(u: &StepPath, v: &CenteredVector) -> Result<CenteredVector> {
    CenteredVector::new(concat_box(u, &v.plus)?, concat_box(u, &v.minus)?)
}

/// Checks the embedding isometry: for `x_i, y_i` in `P(s)`, `z_i` and the
/// filler `e` in `P(t-s)`, returns the worst deviation of
/// `<[x1 e] - [x2 e], [y1 z1] - [y2 z2]>_t` from `<[x1]-[x2], [y1]-[y2]>_s`.
pub fn embed_check_45(
    form: &dyn PathForm,
    x_pairs: &[(StepPath, StepPath)],
    y_pairs: &[(StepPath, StepPath)],
    z_pairs: &[(StepPath, StepPath)],
    filler: &StepPath,
) -> Result<f64> {
    if y_pairs.len() != z_pairs.len() {
        return Err(Error::InvalidArgument {
            op: "embed_check_45",
            what: "need one z-pair per y-pair".into(),
        });
    }
    let mut worst = 0.0_f64;
    for (x1, x2) in x_pairs {
        let lifted = CenteredVector::new(x1.clone(), x2.clone())?.extend(filler)?;
        let short = CenteredVector::new(x1.clone(), x2.clone())?;
        for ((y1, y2), (z1, z2)) in y_pairs.iter().zip(z_pairs) {
            let long = CenteredVector::new(concat_box(y1, z1)?, concat_box(y2, z2)?)?;
            let lhs = diff_inner(form, &lifted, &long, None)?;
            let rhs = diff_inner(form, &short, &CenteredVector::new(y1.clone(), y2.clone())?, None)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// Fillers used by the purity check; supplying them explicitly keeps the
/// cancellations nontrivial (nothing is allowed to coincide by construction).
pub struct PurityFillers {
    /// Element of `P(r)` used to right-extend the `N_t` witnesses.
    pub right: StepPath,
    /// Element of `P(t)` used to realize the left shift `U_t`.
    pub left: StepPath,
    /// Element of `P(r - t)` used to right-extend fiber-`t` pieces in the
    /// span test.
    pub pad: StepPath,
}

/// Outcome of the purity decomposition check.
#[derive(Debug, Clone, Copy)]
pub struct PurityReport {
    /// Worst `|<[x1]-[x2], U_t([y1]-[y2])>|` over the sample.
    pub orthogonality_residual: f64,
    /// Worst squared-norm defect of `[x1]-[x2] = ([a1]-[a2]) + U_t([b1]-[b2])`
    /// over fiber-`r` pairs with `a = x(0,t)`, `b = x(t,r)`.  The squared
    /// form is the quantity Gram arithmetic resolves to machine precision;
    /// taking a square root would only surface rounding noise.
    pub span_residual: f64,
}

/// Verifies the direct-sum decomposition on a finite sample: orthogonality
/// of the `N_t` span against shifted vectors, and exactness of the
/// factorization-based decomposition for fiber-`r` pairs, `r > t`.
pub fn purity_check_413(
    form: &dyn PathForm,
    t_cells: usize,
    x_pairs: &[(StepPath, StepPath)],
    r_cells: usize,
    y_pairs: &[(StepPath, StepPath)],
    fillers: &PurityFillers,
) -> Result<PurityReport> {
    if r_cells <= t_cells {
        return Err(Error::InvalidArgument {
            op: "purity_check_413",
            what: format!("span part needs r > t, got r = {r_cells}, t = {t_cells} cells"),
        });
    }

    // orthogonality: extend [x1]-[x2] (fiber t) and [f y1]-[f y2] (fiber t+r)
    // to the common fiber t+r.
    let mut ortho = 0.0_f64;
    for (x1, x2) in x_pairs {
        let lifted = CenteredVector::new(x1.clone(), x2.clone())?.extend(&fillers.right)?;
        for (y1, y2) in y_pairs {
            let shifted = shift_apply(&fillers.left, &CenteredVector::new(y1.clone(), y2.clone())?)?;
            // pad the shorter to the common fiber if lengths differ
            let ip = if lifted.len_cells() == shifted.len_cells() {
                diff_inner(form, &lifted, &shifted, None)?
            } else {
                diff_inner(form, &lifted, &shifted, Some(&fillers.pad))?
            };
            ortho = ortho.max(ip.norm());
        }
    }

    // span: for fiber-r pairs, the decomposition through prefixes and tails.
    let mut span = 0.0_f64;
    let one = C::new(1.0, 0.0);
    for (w1, w2) in y_pairs.iter().map(|(a, b)| (a, b)) {
        if w1.len_cells() != r_cells {
            return Err(Error::InvalidArgument {
                op: "purity_check_413",
                what: "span pairs must live in the fiber over r".into(),
            });
        }
        let a1 = prefix(w1, t_cells)?;
        let a2 = prefix(w2, t_cells)?;
        let b1 = propagator_cells(w1, t_cells, r_cells)?;
        let b2 = propagator_cells(w2, t_cells, r_cells)?;
        // delta = ([w1]-[w2]) - ([a1 pad]-[a2 pad]) - ([left b1]-[left b2]),
        // everything in the fiber over r.
        let combo = CenteredCombo::new(vec![
            (one, w1.clone()),
            (-one, w2.clone()),
            (-one, concat_box(&a1, &fillers.pad)?),
            (one, concat_box(&a2, &fillers.pad)?),
            (-one, concat_box(&fillers.left, &b1)?),
            (one, concat_box(&fillers.left, &b2)?),
        ])?;
        span = span.max(combo.inner(form, &combo)?.norm());
    }

    Ok(PurityReport { orthogonality_residual: ortho, span_residual: span })
}

/// Gram of a family of centered vectors in one fiber.
pub fn centered_gram(form: &dyn PathForm, vectors: &[CenteredVector]) -> Result<DMatrix<C>> {
    let n = vectors.len();
    let mut g = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = diff_inner(form, &vectors[i], &vectors[j], None)?;
        }
    }
    Ok(g)
}

/// Monotonicity of the range projections of left multiplication: for grid
/// times `s1 < s2` the projection of `target` onto the `s2`-shifted span
/// cannot exceed the projection onto the `s1`-shifted span, provided the
/// `s1` probe family contains the `s2` family (which this function arranges
/// through the section).  Returns `(norm_sq_s1, norm_sq_s2)`.
pub fn projection_monotonicity_check(
    form: &dyn PathForm,
    section: &crate::path::PathSection,
    s1_cells: usize,
    s2_cells: usize,
    tail_pairs: &[(StepPath, StepPath)],
    target: &CenteredCombo,
) -> Result<(f64, f64)> {
    if s1_cells == 0 || s1_cells >= s2_cells {
        return Err(Error::InvalidArgument {
            op: "projection_monotonicity_check",
            what: "need 0 < s1 < s2".into(),
        });
    }
    let big = target.len_cells();
    let e1 = section.value(s1_cells)?;
    let e2 = section.value(s2_cells)?;
    let mid = section.interval(s1_cells, s2_cells)?;

    let mut fam2: Vec<CenteredCombo> = Vec::new();
    let mut fam1: Vec<CenteredCombo> = Vec::new();
    for (q1, q2) in tail_pairs {
        if s2_cells + q1.len_cells() != big {
            return Err(Error::InvalidArgument {
                op: "projection_monotonicity_check",
                what: "tail pairs must fill the target fiber from s2".into(),
            });
        }
        // e_{s2} q in the s2 family; the same vectors rewritten through
        // e_{s1} (e(s1,s2) q) generate part of the s1 family.
        fam2.push(CenteredCombo::from_vector(&CenteredVector::new(
            concat_box(&e2, q1)?,
            concat_box(&e2, q2)?,
        )?));
        fam1.push(CenteredCombo::from_vector(&CenteredVector::new(
            concat_box(&e1, &concat_box(&mid, q1)?)?,
            concat_box(&e1, &concat_box(&mid, q2)?)?,
        )?));
    }
    // enrich the s1 family so the containment is strict
    for (q1, q2) in tail_pairs {
        let padded1 = concat_box(q1, &section.interval(0, s2_cells - s1_cells)?)?;
        let padded2 = concat_box(q2, &section.interval(0, s2_cells - s1_cells)?)?;
        fam1.push(CenteredCombo::from_vector(&CenteredVector::new(
            concat_box(&e1, &padded1)?,
            concat_box(&e1, &padded2)?,
        )?));
    }

    let proj = |family: &[CenteredCombo]| -> Result<f64> {
        let n = family.len();
        let mut a = DMatrix::<C>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = family[i].inner(form, &family[j])?;
            }
        }
        let mut b = DVector::<C>::zeros(n);
        for i in 0..n {
            b[i] = target.inner(form, &family[i])?;
        }
        Ok(numeric::projection_norm_sq(&a, &b, PINV_CUTOFF))
    };
    Ok((proj(&fam1)?, proj(&fam2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::AdditiveForm;
    use crate::grid::TimeGrid;
    use crate::path::PathSection;
    use crate::sampling;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.25, 64).unwrap()
    }

    fn forms() -> Vec<AdditiveForm> {
        vec![
            AdditiveForm::Inner,
            AdditiveForm::Gaussian { c: 1.0 },
            AdditiveForm::Poisson { c: 0.5, h0: 1.3 },
        ]
    }

    fn real_pairs(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<(StepPath, StepPath)> {
        (0..n)
            .map(|_| {
                let mut v = sampling::random_real_paths(rng, grid(), 2, len, 1.0);
                (v.remove(0), v.remove(0))
            })
            .collect()
    }

    #[test]
    fn inner_form_constant_difference_example() {
        // [a]-[b] vs [c]-[d] with a = c = 1, b = d = 0 on (0,1]:
        // (a-b)(c-d) t = 1 in the L2 coordinatization.
        let a = StepPath::constant_real(grid(), 4, 1.0).unwrap();
        let b = StepPath::constant_real(grid(), 4, 0.0).unwrap();
        let v1 = CenteredVector::new(a.clone(), b.clone()).unwrap();
        let v2 = CenteredVector::new(a, b).unwrap();
        let ip = diff_inner(&AdditiveForm::Inner, &v1, &v2, None).unwrap();
        assert_abs_diff_eq!(ip.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_difference_is_zero() {
        let x = StepPath::constant_real(grid(), 3, 0.8).unwrap();
        let v = CenteredVector::new(x.clone(), x).unwrap();
        let ip = diff_inner(&AdditiveForm::Inner, &v, &v, None).unwrap();
        assert!(ip.norm() <= 1e-15);
    }

    #[test]
    fn filler_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for form in forms() {
            let short = real_pairs(&mut rng, 1, 3).remove(0);
            let long = real_pairs(&mut rng, 1, 5).remove(0);
            let v1 = CenteredVector::new(short.0, short.1).unwrap();
            let v2 = CenteredVector::new(long.0, long.1).unwrap();
            let e = sampling::random_real_paths(&mut rng, grid(), 1, 2, 1.0).remove(0);
            let f = sampling::random_real_paths(&mut rng, grid(), 1, 2, 1.0).remove(0);
            let with_e = diff_inner(&form, &v1, &v2, Some(&e)).unwrap();
            let with_f = diff_inner(&form, &v1, &v2, Some(&f)).unwrap();
            assert!(
                (with_e - with_f).norm() <= 1e-12,
                "{}: filler dependence {}",
                form.label(),
                (with_e - with_f).norm()
            );
        }
    }

    #[test]
    fn missing_filler_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let short = real_pairs(&mut rng, 1, 3).remove(0);
        let long = real_pairs(&mut rng, 1, 5).remove(0);
        let v1 = CenteredVector::new(short.0, short.1).unwrap();
        let v2 = CenteredVector::new(long.0, long.1).unwrap();
        assert!(diff_inner(&AdditiveForm::Inner, &v1, &v2, None).is_err());
    }

    #[test]
    fn embedding_isometry_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for form in forms() {
            let x_pairs = real_pairs(&mut rng, 3, 4);
            let y_pairs = real_pairs(&mut rng, 3, 4);
            let z_pairs = real_pairs(&mut rng, 3, 2);
            let filler = sampling::random_real_paths(&mut rng, grid(), 1, 2, 1.0).remove(0);
            let res = embed_check_45(&form, &x_pairs, &y_pairs, &z_pairs, &filler).unwrap();
            assert!(res <= 1e-12, "{}: embedding residual {res}", form.label());
        }
    }

    #[test]
    fn embedding_specializes_when_z_equals_filler() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let filler = sampling::random_real_paths(&mut rng, grid(), 1, 2, 1.0).remove(0);
        let x_pairs = real_pairs(&mut rng, 2, 4);
        let y_pairs = real_pairs(&mut rng, 2, 4);
        let z_pairs: Vec<_> = (0..2).map(|_| (filler.clone(), filler.clone())).collect();
        let res = embed_check_45(&AdditiveForm::Gaussian { c: 1.0 }, &x_pairs, &y_pairs, &z_pairs, &filler)
            .unwrap();
        assert!(res <= 1e-12);
    }

    #[test]
    fn embedding_zero_vector_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let x = sampling::random_real_paths(&mut rng, grid(), 1, 4, 1.0).remove(0);
        let x_pairs = vec![(x.clone(), x)];
        let y_pairs = real_pairs(&mut rng, 2, 4);
        let z_pairs = real_pairs(&mut rng, 2, 2);
        let filler = sampling::random_real_paths(&mut rng, grid(), 1, 2, 1.0).remove(0);
        let res = embed_check_45(&AdditiveForm::Inner, &x_pairs, &y_pairs, &z_pairs, &filler).unwrap();
        assert!(res <= 1e-13);
    }

    #[test]
    fn shift_preserves_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for form in forms() {
            let p = real_pairs(&mut rng, 2, 4);
            let v1 = CenteredVector::new(p[0].0.clone(), p[0].1.clone()).unwrap();
            let v2 = CenteredVector::new(p[1].0.clone(), p[1].1.clone()).unwrap();
            let u = sampling::random_real_paths(&mut rng, grid(), 1, 3, 1.0).remove(0);
            let base = diff_inner(&form, &v1, &v2, None).unwrap();
            let shifted = diff_inner(
                &form,
                &shift_apply(&u, &v1).unwrap(),
                &shift_apply(&u, &v2).unwrap(),
                None,
            )
            .unwrap();
            assert!((base - shifted).norm() <= 1e-12, "{}", form.label());
        }
    }

    #[test]
    fn shift_is_independent_of_the_representative() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for form in forms() {
            let p = real_pairs(&mut rng, 2, 4);
            let v = CenteredVector::new(p[0].0.clone(), p[0].1.clone()).unwrap();
            let probe = CenteredVector::new(p[1].0.clone(), p[1].1.clone()).unwrap();
            let u1 = sampling::random_real_paths(&mut rng, grid(), 1, 3, 1.0).remove(0);
            let u2 = sampling::random_real_paths(&mut rng, grid(), 1, 3, 1.0).remove(0);
            let probe_l = shift_apply(&u1, &probe).unwrap();
            let a = diff_inner(&form, &shift_apply(&u1, &v).unwrap(), &probe_l, None).unwrap();
            let b = diff_inner(&form, &shift_apply(&u2, &v).unwrap(), &probe_l, None).unwrap();
            assert!((a - b).norm() <= 1e-12, "{}: (4.9) residual {}", form.label(), (a - b).norm());
        }
    }

    #[test]
    fn purity_orthogonality_and_exact_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let t = 3usize;
        let r = 5usize;
        for form in forms() {
            let x_pairs = real_pairs(&mut rng, 3, t);
            let y_pairs = real_pairs(&mut rng, 3, r);
            let fillers = PurityFillers {
                right: sampling::random_real_paths(&mut rng, grid(), 1, r, 1.0).remove(0),
                left: sampling::random_real_paths(&mut rng, grid(), 1, t, 1.0).remove(0),
                pad: sampling::random_real_paths(&mut rng, grid(), 1, r - t, 1.0).remove(0),
            };
            let report = purity_check_413(&form, t, &x_pairs, r, &y_pairs, &fillers).unwrap();
            assert!(
                report.orthogonality_residual <= 1e-12,
                "{}: orthogonality {}",
                form.label(),
                report.orthogonality_residual
            );
            assert!(
                report.span_residual <= 1e-12,
                "{}: span {}",
                form.label(),
                report.span_residual
            );
        }
    }

    #[test]
    fn inner_form_coordinatization_matches_l2() {
        // [x]-[y] -> x - y reproduces diff_inner exactly for the Inner form.
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let pairs: Vec<(StepPath, StepPath)> = (0..3)
            .map(|_| {
                let mut v = sampling::random_paths(&mut rng, grid(), 2, 2, 4, 1.0);
                (v.remove(0), v.remove(0))
            })
            .collect();
        for (a, b) in &pairs {
            for (c, d) in &pairs {
                let v1 = CenteredVector::new(a.clone(), b.clone()).unwrap();
                let v2 = CenteredVector::new(c.clone(), d.clone()).unwrap();
                let lhs = diff_inner(&AdditiveForm::Inner, &v1, &v2, None).unwrap();
                let rhs = a.sub(b).unwrap().l2_inner(&c.sub(d).unwrap()).unwrap();
                assert!((lhs - rhs).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn centered_gram_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for form in forms() {
            let pairs = real_pairs(&mut rng, 5, 4);
            let vectors: Vec<CenteredVector> = pairs
                .into_iter()
                .map(|(a, b)| CenteredVector::new(a, b).unwrap())
                .collect();
            let g = centered_gram(&form, &vectors).unwrap();
            let scale = numeric::max_abs(&g).max(1.0);
            let min = numeric::min_eigenvalue(&g);
            assert!(min >= -1e-8 * scale, "{}: min eig {min}", form.label());
        }
    }

    #[test]
    fn projections_decrease_as_s_grows() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let section = PathSection::constant(grid(), &[C::new(0.6, 0.0)]).unwrap();
        let s1 = 1usize;
        let s2 = 2usize;
        let big = 6usize;
        let tails = real_pairs(&mut rng, 3, big - s2);
        let w_pair = real_pairs(&mut rng, 1, big).remove(0);
        let target = CenteredCombo::from_vector(&CenteredVector::new(w_pair.0, w_pair.1).unwrap());
        let (p1, p2) = projection_monotonicity_check(
            &AdditiveForm::Gaussian { c: 1.0 },
            &section,
            s1,
            s2,
            &tails,
            &target,
        )
        .unwrap();
        assert!(p1 >= p2 - 1e-8, "P_s1 = {p1} < P_s2 = {p2}");
    }
}
