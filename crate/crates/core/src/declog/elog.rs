//! Partition sums of normalized interval inner products, their dyadic
//! limits, and the branch-tracked logarithm they converge to.
//!
//! Two independent routes compute the same logarithm: `b_partition` /
//! `b_limit` sum interval defects over refining partitions, `le_branch`
//! tracks a continuous branch of `log F` along the section from the origin.
//! Both are checked against the closed-form model oracle.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Partition;
use crate::numeric::{self, C};

use super::vectors::{CoherentSection, DecompVector, ExpReference};

/// Number of extra dyadic refinement levels the branch tracker may insert
/// inside one grid cell before giving up.
pub const BRANCH_EXTRA_LEVELS: usize = 4;

/// The normalized interval defect `<x_I, y_I> / (<x_I, e_I><e_I, y_I>) - 1`.
fn interval_defect(
    x: &CoherentSection,
    y: &CoherentSection,
    e: &ExpReference,
    a: usize,
    b: usize,
) -> Result<C> {
    let x_i = x.interval(a, b)?;
    let y_i = y.interval(a, b)?;
    let e_i = e.interval(a, b)?;
    let num = x_i.inner(&y_i)?;
    let den = x_i.inner(&e_i)? * e_i.inner(&y_i)?;
    Ok(num / den - C::new(1.0, 0.0))
}

/// The partition sum `B_P(t; x, y) = sum_I (<x_I, y_I> - 1)` with every
/// interval propagator normalized against the reference.  Terms are summed
/// in partition order.
pub fn b_partition(
    x: &CoherentSection,
    y: &CoherentSection,
    e: &ExpReference,
    partition: &Partition,
) -> Result<C> {
    let mut acc = C::new(0.0, 0.0);
    for (a, b) in partition.intervals() {
        acc += interval_defect(x, y, e, a, b)?;
    }
    Ok(acc)
}

/// One level of the dyadic limit table.
#[derive(Debug, Clone)]
pub struct BLimitRow {
    pub level: usize,
    pub intervals: usize,
    pub mesh: f64,
    pub value: C,
    pub oracle_gap: f64,
}

/// The dyadic-limit run: per-level values and the closed-form oracle.
#[derive(Debug, Clone)]
pub struct BLimitTable {
    pub rows: Vec<BLimitRow>,
    pub estimate: C,
    pub oracle: C,
}

impl BLimitTable {
    /// CSV rows `level,mesh,B_re,B_im,oracle_gap`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,intervals,mesh,b_re,b_im,oracle_gap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:?},{:?},{:?},{:?}\n",
                r.level, r.intervals, r.mesh, r.value.re, r.value.im, r.oracle_gap
            ));
        }
        out
    }
}

/// Runs the partition sums along the dyadic schedule `2^0, 2^1, ...,
/// 2^max_level` equal intervals of `(0, t]` and reports convergence against
/// the model oracle.
pub fn b_limit(
    x: &CoherentSection,
    y: &CoherentSection,
    e: &ExpReference,
    t_cells: usize,
    max_level: usize,
) -> Result<BLimitTable> {
    let oracle = e.oracle_log(&x.value(t_cells)?, &y.value(t_cells)?)?;
    let mut rows = Vec::with_capacity(max_level + 1);
    for level in 0..=max_level {
        let n = 1usize << level;
        if t_cells % n != 0 {
            return Err(Error::InvalidArgument {
                op: "b_limit",
                what: format!("grid exhausted: {n} intervals do not fit {t_cells} cells"),
            });
        }
        let partition = Partition::equal_cells(t_cells, n)?;
        let value = b_partition(x, y, e, &partition)?;
        rows.push(BLimitRow {
            level,
            intervals: n,
            mesh: partition.mesh(x.grid()),
            value,
            oracle_gap: (value - oracle).norm(),
        });
    }
    let estimate = rows.last().unwrap().value;
    Ok(BLimitTable { rows, estimate, oracle })
}

/// Normalized inner product `F(s) = <x_s, y_s> / (<x_s, e_s><e_s, y_s>)` at
/// a grid time.
fn normalized_ip(
    x: &CoherentSection,
    y: &CoherentSection,
    e: &ExpReference,
    k_cells: usize,
) -> Result<C> {
    let x_k = x.value(k_cells)?;
    let y_k = y.value(k_cells)?;
    let e_k = e.value(k_cells)?;
    Ok(x_k.inner(&y_k)? / (x_k.inner(&e_k)? * e_k.inner(&y_k)?))
}

/// `F` at a fractional time inside cell `full + 1`: the scalar-free
/// representative is used (the normalized product is homogeneous), and the
/// partial cell contributes linearly to each pairing exponent.
fn normalized_ip_partial(
    x: &CoherentSection,
    y: &CoherentSection,
    e: &ExpReference,
    full_cells: usize,
    frac: f64,
) -> Result<C> {
    let h = x.grid().step();
    let eps = e.epsilon();
    let cell = full_cells + 1;
    let fx = x.master();
    let fy = y.master();
    let add = |xc: &[C], yc: &[C], weight: f64, acc: &mut [C; 4]| {
        for j in 0..xc.len() {
            acc[0] += xc[j] * yc[j].conj() * weight;
            acc[1] += xc[j] * eps[j].conj() * weight;
            acc[2] += eps[j] * yc[j].conj() * weight;
            acc[3] += eps[j] * eps[j].conj() * weight;
        }
    };
    let mut acc = [C::new(0.0, 0.0); 4];
    for k in 1..=full_cells {
        add(fx.cell(k), fy.cell(k), h, &mut acc);
    }
    if frac > 0.0 {
        add(fx.cell(cell), fy.cell(cell), frac * h, &mut acc);
    }
    let [e_ff, e_fe, e_ef, e_ee] = acc;
    // F = e^{<f,h>} e^{<eps,eps>} / (e^{<f,eps>} e^{<eps,h>}), as values
    Ok((e_ff.exp() * e_ee.exp()) / (e_fe.exp() * e_ef.exp()))
}

fn principal_log(z: C) -> C {
    C::new(z.norm().ln(), z.arg())
}

/// Branch-tracks `log F` along `(0, t]`, returning the curve at every grid
/// time.  When a step ratio leaves the guard disc `|ratio - 1| < 1`, the
/// offending cell is subdivided dyadically up to `BRANCH_EXTRA_LEVELS`
/// times.
pub fn le_branch_curve(
    x: &CoherentSection,
    y: &CoherentSection,
    e: &ExpReference,
    t_cells: usize,
) -> Result<Vec<C>> {
    let mut curve = Vec::with_capacity(t_cells);
    let mut log_acc = C::new(0.0, 0.0);
    let mut prev = C::new(1.0, 0.0); // F(0+) = 1
    for k in 1..=t_cells {
        let current = normalized_ip(x, y, e, k)?;
        let ratio = current / prev;
        if (ratio - C::new(1.0, 0.0)).norm() < 1.0 {
            log_acc += principal_log(ratio);
        } else {
            // subdivide cell k until every sub-ratio sits inside the guard
            let mut done = false;
            'levels: for level in 1..=BRANCH_EXTRA_LEVELS {
                let steps = 1usize << level;
                let mut sub_prev = prev;
                let mut sub_acc = C::new(0.0, 0.0);
                for j in 1..=steps {
                    let frac = j as f64 / steps as f64;
                    let sub = if j == steps {
                        current
                    } else {
                        normalized_ip_partial(x, y, e, k - 1, frac)?
                    };
                    let sub_ratio = sub / sub_prev;
                    if (sub_ratio - C::new(1.0, 0.0)).norm() >= 1.0 {
                        continue 'levels;
                    }
                    sub_acc += principal_log(sub_ratio);
                    sub_prev = sub;
                }
                log_acc += sub_acc;
                done = true;
                break;
            }
            if !done {
                return Err(Error::BranchGuard {
                    s: x.grid().time_of(k),
                    excess: (ratio - C::new(1.0, 0.0)).norm(),
                    levels: BRANCH_EXTRA_LEVELS,
                });
            }
        }
        prev = current;
        curve.push(log_acc);
    }
    Ok(curve)
}

/// The branch-tracked logarithm at time `t`: the unique continuous branch of
/// `log F` vanishing at the origin, satisfying `e^L = F(t)` to rounding.
pub fn le_branch(
    x: &CoherentSection,
    y: &CoherentSection,
    e: &ExpReference,
    t_cells: usize,
) -> Result<C> {
    Ok(*le_branch_curve(x, y, e, t_cells)?.last().ok_or(Error::InvalidArgument {
        op: "le_branch",
        what: "t must be positive".into(),
    })?)
}

/// Positivity report for the logarithm Gram.
#[derive(Debug, Clone)]
pub struct LePdReport {
    /// Smallest eigenvalue of `[L^e(t; x_i, x_j)]` from the branch route.
    pub min_eig_branch: f64,
    /// Smallest eigenvalue of the direct Gram of `{f_i - eps 1}`.
    pub min_eig_direct: f64,
    /// Largest entrywise deviation between the two Grams.
    pub max_entry_gap: f64,
    /// Scale `max(1, trace)` both eigenvalues are compared against.
    pub trace_scale: f64,
}

/// Builds the `L^e` Gram of a family of decomposables (through their prefix
/// sections) and compares its positivity verdict against the direct Gram of
/// the centered exponents.
pub fn le_pd_gram(samples: &[DecompVector], e: &ExpReference) -> Result<LePdReport> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidArgument { op: "le_pd_gram", what: "empty sample".into() });
    }
    let t = samples[0].t_cells();
    let sections: Vec<CoherentSection> =
        samples.iter().map(CoherentSection::through).collect::<Result<_>>()?;
    let mut branch = DMatrix::<C>::zeros(n, n);
    let mut direct = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        if samples[i].t_cells() != t {
            return Err(Error::FiberMismatch { left: samples[i].t_cells(), right: t });
        }
        for j in 0..n {
            branch[(i, j)] = le_branch(&sections[i], &sections[j], e, t)?;
            direct[(i, j)] = e.oracle_log(&samples[i], &samples[j])?;
        }
    }
    let mut gap = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            gap = gap.max((branch[(i, j)] - direct[(i, j)]).norm());
        }
    }
    let trace: f64 = (0..n).map(|i| direct[(i, i)].re).sum();
    Ok(LePdReport {
        min_eig_branch: numeric::min_eigenvalue(&branch),
        min_eig_direct: numeric::min_eigenvalue(&direct),
        max_entry_gap: gap,
        trace_scale: trace.max(1.0),
    })
}

/// Gauge change between two references: the difference of logarithms must
/// split as `phi(t; x) + conj phi(t; y)`.  Returns the worst alternation
/// residual over sample pairs.
pub fn rebase_check(
    e1: &ExpReference,
    e2: &ExpReference,
    samples: &[DecompVector],
    t_cells: usize,
) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidArgument { op: "rebase_check", what: "need at least 2 samples".into() });
    }
    let sections: Vec<CoherentSection> =
        samples.iter().map(CoherentSection::through).collect::<Result<_>>()?;
    let mut delta = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let l1 = le_branch(&sections[i], &sections[j], e1, t_cells)?;
            let l2 = le_branch(&sections[i], &sections[j], e2, t_cells)?;
            delta[(i, j)] = l2 - l1;
        }
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let alt = delta[(i, j)] - delta[(i, l)] - delta[(k, j)] + delta[(k, l)];
                    worst = worst.max(alt.norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Branch-tracks the interval defect function
/// `psi_s(t; y)`: the continuous origin-vanishing log of
/// `|<e(s,s+t'), e_t'>| <y_t', e_t'> / (<y_t', e(s,s+t')><e(s,s+t'), e_t'>)`
/// along the section through `y`.
fn psi_s_track(y: &CoherentSection, e: &ExpReference, s_cells: usize, t_cells: usize) -> Result<C> {
    let mut log_acc = C::new(0.0, 0.0);
    let mut prev = C::new(1.0, 0.0);
    for k in 1..=t_cells {
        let y_k = y.value(k)?;
        let e_k = e.value(k)?;
        let e_int = e.interval(s_cells, s_cells + k)?;
        let g = C::new(e_int.inner(&e_k)?.norm(), 0.0) * y_k.inner(&e_k)?
            / (y_k.inner(&e_int)? * e_int.inner(&e_k)?);
        let ratio = g / prev;
        if (ratio - C::new(1.0, 0.0)).norm() >= 1.0 {
            return Err(Error::BranchGuard {
                s: y.grid().time_of(k),
                excess: (ratio - C::new(1.0, 0.0)).norm(),
                levels: 0,
            });
        }
        log_acc += principal_log(ratio);
        prev = g;
    }
    Ok(log_acc)
}

/// Residual of the interval-splitting identity for the logarithm:
/// `L(s+t; x1 y1, x2 y2) - L(s; x1, x2) - L(t; y1, y2)
///  = psi_s(t; y1) + conj psi_s(t; y2)`.
pub fn psi_s_check(
    e: &ExpReference,
    s_cells: usize,
    t_cells: usize,
    x_pairs: &[(DecompVector, DecompVector)],
    y_pairs: &[(DecompVector, DecompVector)],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (x1, x2) in x_pairs {
        let sx1 = CoherentSection::through(x1)?;
        let sx2 = CoherentSection::through(x2)?;
        let l_s = le_branch(&sx1, &sx2, e, s_cells)?;
        for (y1, y2) in y_pairs {
            let sy1 = CoherentSection::through(y1)?;
            let sy2 = CoherentSection::through(y2)?;
            let l_t = le_branch(&sy1, &sy2, e, t_cells)?;
            let p1 = CoherentSection::through(&x1.product(y1)?)?;
            let p2 = CoherentSection::through(&x2.product(y2)?)?;
            let l_st = le_branch(&p1, &p2, e, s_cells + t_cells)?;
            let psi1 = psi_s_track(&sy1, e, s_cells, t_cells)?;
            let psi2 = psi_s_track(&sy2, e, s_cells, t_cells)?;
            let residual = (l_st - l_s - l_t) - (psi1 + psi2.conj());
            worst = worst.max(residual.norm());
        }
    }
    Ok(worst)
}

/// One sequence of the infinite-product lemma.
#[derive(Debug, Clone)]
pub struct Lemma911Row {
    pub l2_norm: f64,
    pub sum: C,
    pub product: C,
    /// `|product - e^zeta|`.
    pub gap: f64,
    /// The proof bound `e^{Re zeta} (e^{|z|_2^2 + |sum - zeta|} - 1)`,
    /// valid when `|z|_2 <= 1/2`; `None` outside that regime.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Lemma911Report {
    pub rows: Vec<Lemma911Row>,
    /// Worst `gap - bound` over rows with a valid bound (<= 0 means every
    /// product obeyed the proof estimate).
    pub worst_excess: f64,
}

/// Evaluates `prod_k (1 + z(k))` for each sequence of a net and checks the
/// convergence estimate `|prod (1 + z_k) - e^zeta|` against the proof bound.
pub fn lemma911(net: &[Vec<C>], zeta: C) -> Lemma911Report {
    let mut rows = Vec::with_capacity(net.len());
    let mut worst = f64::NEG_INFINITY;
    for z in net {
        let l2_norm = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        let sum: C = z.iter().sum();
        let mut product = C::new(1.0, 0.0);
        for w in z {
            product *= C::new(1.0, 0.0) + w;
        }
        let gap = (product - zeta.exp()).norm();
        let bound = if l2_norm <= 0.5 {
            let drift = l2_norm * l2_norm + (sum - zeta).norm();
            Some(zeta.re.exp() * (drift.exp() - 1.0) + 1e-12)
        } else {
            None
        };
        if let Some(b) = bound {
            worst = worst.max(gap - b);
        }
        rows.push(Lemma911Row { l2_norm, sum, product, gap, bound });
    }
    Lemma911Report { rows, worst_excess: if worst.is_finite() { worst } else { 0.0 } }
}

#[cfg(test)]
mod tests {
    use super::super::vectors::random_section;
    use super::*;
    use crate::grid::TimeGrid;
    use crate::path::StepPath;
    use crate::sampling;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0 / 64.0, 64).unwrap()
    }

    fn ones_section(g: TimeGrid, n: usize) -> CoherentSection {
        let master = StepPath::constant_real(g, n, 1.0).unwrap();
        CoherentSection::new(master, vec![C::new(1.0, 0.0); n]).unwrap()
    }

    #[test]
    fn b_partition_closed_form_for_unit_paths() {
        // f = h = 1, eps = 0, t = 1 over n equal cells: B = n (e^{1/n} - 1).
        let g = grid();
        let e = ExpReference::vacuum(g, 1, 64).unwrap();
        let x = ones_section(g, 64);
        for n in [1usize, 2, 4, 8, 16, 32, 64] {
            let p = Partition::equal_cells(64, n).unwrap();
            let b = b_partition(&x, &x, &e, &p).unwrap();
            let expect = n as f64 * ((1.0 / n as f64).exp() - 1.0);
            assert_abs_diff_eq!(b.re, expect, epsilon = 1e-12);
            assert!(b.im.abs() <= 1e-13);
        }
        // n = 2 literal value
        let b2 = b_partition(&x, &x, &e, &Partition::equal_cells(64, 2).unwrap()).unwrap();
        assert_abs_diff_eq!(b2.re, 1.2974425414002564, epsilon = 1e-12);
    }

    #[test]
    fn b_partition_vanishes_against_the_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(337);
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.5, 0.2)], 64).unwrap();
        let y = random_section(&mut rng, g, 1, 64, 1.0).de_normalize(&e).unwrap();
        let p = Partition::equal_cells(64, 8).unwrap();
        let b = b_partition(&e.as_section().unwrap(), &y, &e, &p).unwrap();
        assert!(b.norm() <= 1e-12, "B against reference {b}");
    }

    #[test]
    fn refinement_differences_form_a_psd_kernel() {
        // B_P - B_Q for P <= Q is a PD kernel on samples.
        let mut rng = ChaCha8Rng::seed_from_u64(347);
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.3, 0.0)], 64).unwrap();
        let sections: Vec<CoherentSection> = (0..6)
            .map(|_| random_section(&mut rng, g, 1, 64, 1.0).de_normalize(&e).unwrap())
            .collect();
        let coarse = Partition::equal_cells(64, 4).unwrap();
        let fine = coarse.dyadic_refine();
        assert!(coarse.refines_into(&fine));
        let n = sections.len();
        let mut diff = DMatrix::<C>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let b_coarse = b_partition(&sections[i], &sections[j], &e, &coarse).unwrap();
                let b_fine = b_partition(&sections[i], &sections[j], &e, &fine).unwrap();
                diff[(i, j)] = b_coarse - b_fine;
            }
        }
        let min = numeric::min_eigenvalue(&diff);
        assert!(min >= -1e-10, "refinement difference min eig {min}");
    }

    #[test]
    fn b_limit_descends_to_the_oracle() {
        let g = grid();
        let e = ExpReference::vacuum(g, 1, 64).unwrap();
        let x = ones_section(g, 64);
        let table = b_limit(&x, &x, &e, 64, 6).unwrap();
        assert_abs_diff_eq!(table.oracle.re, 1.0, epsilon = 1e-12);
        // n(e^{1/n} - 1) decreases toward 1 with the documented rate
        for row in &table.rows {
            let n = row.intervals as f64;
            if row.intervals >= 4 {
                assert!(
                    (row.value.re - 1.0 - 1.0 / (2.0 * n)).abs() <= 1.0 / (n * n),
                    "level {} value {}",
                    row.level,
                    row.value.re
                );
            }
        }
        let gaps: Vec<f64> = table.rows.iter().map(|r| r.oracle_gap).collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn b_limit_rejects_depths_beyond_the_grid() {
        let g = grid();
        let e = ExpReference::vacuum(g, 1, 64).unwrap();
        let x = ones_section(g, 64);
        assert!(b_limit(&x, &x, &e, 64, 7).is_err());
    }

    fn oracle_of(e: &ExpReference, x: &CoherentSection, y: &CoherentSection, t: usize) -> C {
        e.oracle_log(&x.value(t).unwrap(), &y.value(t).unwrap()).unwrap()
    }

    #[test]
    fn branch_log_matches_oracle_and_exponentiates() {
        let mut rng = ChaCha8Rng::seed_from_u64(349);
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.4, -0.3)], 64).unwrap();
        for _ in 0..10 {
            let x = random_section(&mut rng, g, 1, 64, 1.0);
            let y = random_section(&mut rng, g, 1, 64, 1.0);
            let l = le_branch(&x, &y, &e, 48).unwrap();
            let oracle = oracle_of(&e, &x, &y, 48);
            assert!((l - oracle).norm() <= 1e-10, "branch vs oracle {}", (l - oracle).norm());
            let f = normalized_ip(&x, &y, &e, 48).unwrap();
            assert!((l.exp() - f).norm() <= 1e-12 * f.norm().max(1.0));
        }
    }

    #[test]
    fn branch_log_of_reference_vs_itself_is_zero() {
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.7, 0.1)], 64).unwrap();
        let sec = e.as_section().unwrap();
        let l = le_branch(&sec, &sec, &e, 32).unwrap();
        assert!(l.norm() <= 1e-12);
    }

    #[test]
    fn branch_log_is_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(353);
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.2, 0.4)], 64).unwrap();
        let x = random_section(&mut rng, g, 1, 64, 1.0);
        let y = random_section(&mut rng, g, 1, 64, 1.0);
        let lxy = le_branch(&x, &y, &e, 40).unwrap();
        let lyx = le_branch(&y, &x, &e, 40).unwrap();
        assert!((lxy.conj() - lyx).norm() <= 1e-11);
    }

    #[test]
    fn branch_log_crosses_the_cut_correctly() {
        // exponents with a large imaginary pairing: |Im L| > pi, so the
        // principal log of F(t) alone would be wrong, yet e^L = F holds and
        // L matches the oracle including the winding.
        let g = grid();
        let e = ExpReference::vacuum(g, 1, 64).unwrap();
        let master_x = StepPath::constant(g, 64, &[C::new(2.0, 0.0)]).unwrap();
        let master_y = StepPath::constant(g, 64, &[C::new(2.0, 3.9)]).unwrap();
        let x = CoherentSection::new(master_x, vec![C::new(1.0, 0.0); 64]).unwrap();
        let y = CoherentSection::new(master_y, vec![C::new(1.0, 0.0); 64]).unwrap();
        let l = le_branch(&x, &y, &e, 64).unwrap();
        let oracle = oracle_of(&e, &x, &y, 64);
        assert!(oracle.im.abs() > std::f64::consts::PI, "test needs |Im| > pi, got {}", oracle.im);
        assert!((l - oracle).norm() <= 1e-10);
        let f = normalized_ip(&x, &y, &e, 64).unwrap();
        assert!((l.exp() - f).norm() <= 1e-10 * f.norm().max(1.0));
        // the principal value alone disagrees (differs by 2 pi winding)
        assert!((principal_log(f) - oracle).norm() > 1.0);
    }

    #[test]
    fn three_way_agreement_branch_blimit_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(359);
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.3, 0.2), C::new(-0.1, 0.0)], 64).unwrap();
        for _ in 0..10 {
            let x = random_section(&mut rng, g, 2, 64, 1.0);
            let y = random_section(&mut rng, g, 2, 64, 1.0);
            let t = 64usize;
            let l = le_branch(&x, &y, &e, t).unwrap();
            let table = b_limit(&x, &y, &e, t, 6).unwrap();
            let oracle = oracle_of(&e, &x, &y, t);
            let mesh = table.rows.last().unwrap().mesh;
            let scale = x.value(t).unwrap().exponent().l2_norm_sq().sqrt()
                * y.value(t).unwrap().exponent().l2_norm_sq().sqrt();
            let tol = (2.0 * mesh * scale.max(1.0)).max(1e-10);
            assert!((l - oracle).norm() <= tol);
            assert!((table.estimate - oracle).norm() <= tol);
            assert!((table.estimate - l).norm() <= 2.0 * tol);
        }
    }

    #[test]
    fn le_gram_positivity_both_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(367);
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.25, -0.1)], 64).unwrap();
        let samples: Vec<DecompVector> = (0..8)
            .map(|_| {
                DecompVector::new(
                    sampling::random_complex(&mut rng, 1.0) + C::new(2.0, 0.0),
                    sampling::random_paths(&mut rng, g, 1, 1, 32, 1.0).remove(0),
                )
                .unwrap()
            })
            .collect();
        let report = le_pd_gram(&samples, &e).unwrap();
        assert!(report.min_eig_branch >= -1e-8 * report.trace_scale);
        assert!(report.min_eig_direct >= -1e-10 * report.trace_scale);
        assert!(report.max_entry_gap <= 1e-10);
    }

    #[test]
    fn le_gram_of_reference_samples_is_zero_matrix() {
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.5, 0.0)], 64).unwrap();
        let samples: Vec<DecompVector> = (0..4).map(|_| e.value(16).unwrap()).collect();
        let report = le_pd_gram(&samples, &e).unwrap();
        assert!(report.min_eig_branch.abs() <= 1e-10);
        assert!(report.min_eig_direct.abs() <= 1e-12);
    }

    #[test]
    fn rebase_between_references_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(373);
        let g = grid();
        let e1 = ExpReference::new(g, vec![C::new(0.3, 0.1)], 64).unwrap();
        let e2 = ExpReference::new(g, vec![C::new(-0.2, 0.25)], 64).unwrap();
        let samples: Vec<DecompVector> = (0..4)
            .map(|_| {
                DecompVector::new(
                    C::new(1.0, 0.0),
                    sampling::random_paths(&mut rng, g, 1, 1, 24, 1.0).remove(0),
                )
                .unwrap()
            })
            .collect();
        let residual = rebase_check(&e1, &e2, &samples, 24).unwrap();
        assert!(residual <= 1e-10, "rebase split residual {residual}");
        // same reference: the difference vanishes identically
        let zero = rebase_check(&e1, &e1, &samples, 24).unwrap();
        assert!(zero <= 1e-12);
    }

    #[test]
    fn rebase_matches_the_model_closed_form() {
        // Delta = <f1 - e2', f2 - e2'> - <f1 - e1', f2 - e1'> expands to
        // phi(x1) + conj phi(x2); verify Delta itself against the oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(379);
        let g = grid();
        let e1 = ExpReference::new(g, vec![C::new(0.3, 0.1)], 64).unwrap();
        let e2 = ExpReference::new(g, vec![C::new(-0.2, 0.25)], 64).unwrap();
        let t = 24usize;
        let f1 = sampling::random_paths(&mut rng, g, 1, 1, t, 1.0).remove(0);
        let f2 = sampling::random_paths(&mut rng, g, 1, 1, t, 1.0).remove(0);
        let x1 = DecompVector::new(C::new(1.0, 0.0), f1).unwrap();
        let x2 = DecompVector::new(C::new(1.0, 0.0), f2).unwrap();
        let s1 = CoherentSection::through(&x1).unwrap();
        let s2 = CoherentSection::through(&x2).unwrap();
        let delta = le_branch(&s1, &s2, &e2, t).unwrap() - le_branch(&s1, &s2, &e1, t).unwrap();
        let expect = e2.oracle_log(&x1, &x2).unwrap() - e1.oracle_log(&x1, &x2).unwrap();
        assert!((delta - expect).norm() <= 1e-10);
    }

    #[test]
    fn psi_s_residual_vanishes_for_the_stationary_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(383);
        let g = grid();
        for eps in [vec![C::new(0.0, 0.0)], vec![C::new(0.4, -0.2)]] {
            let e = ExpReference::new(g, eps, 64).unwrap();
            let s = 8usize;
            let t = 12usize;
            let x_pairs: Vec<(DecompVector, DecompVector)> = (0..2)
                .map(|_| {
                    let mk = |rng: &mut ChaCha8Rng| {
                        DecompVector::new(
                            C::new(1.0, 0.0),
                            sampling::random_paths(rng, g, 1, 1, s, 1.0).remove(0),
                        )
                        .unwrap()
                    };
                    (mk(&mut rng), mk(&mut rng))
                })
                .collect();
            let y_pairs: Vec<(DecompVector, DecompVector)> = (0..2)
                .map(|_| {
                    let mk = |rng: &mut ChaCha8Rng| {
                        DecompVector::new(
                            C::new(1.0, 0.0),
                            sampling::random_paths(rng, g, 1, 1, t, 1.0).remove(0),
                        )
                        .unwrap()
                    };
                    (mk(&mut rng), mk(&mut rng))
                })
                .collect();
            let residual = psi_s_check(&e, s, t, &x_pairs, &y_pairs).unwrap();
            assert!(residual <= 1e-10, "psi_s residual {residual}");
        }
    }

    #[test]
    fn psi_s_with_reference_tail_is_consistent() {
        let g = grid();
        let e = ExpReference::new(g, vec![C::new(0.3, 0.3)], 64).unwrap();
        let s = 6usize;
        let t = 10usize;
        let tail = e.interval(s, s + t).unwrap();
        let y = CoherentSection::through(&tail).unwrap();
        let psi = psi_s_track(&y, &e, s, t).unwrap();
        assert!(psi.norm() <= 1e-11, "psi_s at the reference tail {psi}");
    }

    #[test]
    fn lemma911_familiar_formula() {
        // z_n = (zeta/n, ..., zeta/n): the compound-interest limit.
        let zeta = C::new(1.0, 0.0);
        let net: Vec<Vec<C>> = [10usize, 100, 1000]
            .iter()
            .map(|&n| vec![zeta / n as f64; n])
            .collect();
        let report = lemma911(&net, zeta);
        // n = 100: (1.01)^100 = 2.704813829..., gap to e about 0.0135
        assert_abs_diff_eq!(report.rows[1].product.re, 2.7048138294215285, epsilon = 1e-10);
        assert_abs_diff_eq!(report.rows[1].gap, std::f64::consts::E - 2.7048138294215285, epsilon = 1e-10);
        // gaps shrink like 1/n
        assert!(report.rows[1].gap < report.rows[0].gap / 5.0);
        assert!(report.rows[2].gap < report.rows[1].gap / 5.0);
        assert!(report.worst_excess <= 0.0);
    }

    #[test]
    fn lemma911_zero_sequence() {
        let report = lemma911(&[vec![]], C::new(0.0, 0.0));
        assert!((report.rows[0].product - C::new(1.0, 0.0)).norm() == 0.0);
        assert_eq!(report.rows[0].gap, 0.0);
    }

    #[test]
    fn lemma911_random_nets_obey_the_proof_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(389);
        for _ in 0..20 {
            let n = rng.random_range(20..200);
            let scale = 0.4 / (n as f64).sqrt();
            let z: Vec<C> = (0..n).map(|_| sampling::random_complex(&mut rng, scale)).collect();
            let zeta: C = z.iter().sum();
            let report = lemma911(&[z], zeta);
            assert!(report.rows[0].bound.is_some());
            assert!(report.worst_excess <= 0.0, "excess {}", report.worst_excess);
        }
    }
}
