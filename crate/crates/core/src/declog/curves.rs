//! Continuity, monotonicity and inequality checks for coherent sections.

use crate::error::{Error, Result};
use crate::numeric::C;

use super::vectors::{CoherentSection, ExpReference};

/// The sampled modulus curve `t -> |<x_t, y_t>|` of two unit-normalized
/// sections, with its monotonicity and range diagnostics.
#[derive(Debug, Clone)]
pub struct ModulusCurve {
    /// `|<x_t, y_t>|` at `t = h, 2h, ...`.
    pub values: Vec<f64>,
    /// Largest increase between consecutive samples (0 when the curve is
    /// nonincreasing, as it must be).
    pub monotonicity_violation: f64,
    /// Largest excess of a sample above 1.
    pub max_value_excess: f64,
    /// Smallest sample (the curve must stay positive).
    pub min_value: f64,
}

/// Samples the modulus of the inner product along two unit-normalized
/// sections.  Values lie in `(0, 1]` and decrease in `t`; the first sample
/// tends to 1 under grid refinement.
pub fn modulus_curve(x: &CoherentSection, y: &CoherentSection, t_cells: usize) -> Result<ModulusCurve> {
    if t_cells > x.horizon_cells() || t_cells > y.horizon_cells() {
        return Err(Error::InvalidArgument {
            op: "modulus_curve",
            what: "sections end before the requested time".into(),
        });
    }
    for k in 1..=t_cells {
        let nx = x.value(k)?.norm();
        let ny = y.value(k)?.norm();
        if (nx - 1.0).abs() > 1e-9 || (ny - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument {
                op: "modulus_curve",
                what: format!("sections must be unit-normalized (|x_t| = {nx}, |y_t| = {ny} at {k} cells)"),
            });
        }
    }
    let mut values = Vec::with_capacity(t_cells);
    for k in 1..=t_cells {
        values.push(x.value(k)?.inner(&y.value(k)?)?.norm());
    }
    let mut violation = 0.0_f64;
    for w in values.windows(2) {
        violation = violation.max(w[1] - w[0]);
    }
    let max_excess = values.iter().fold(0.0_f64, |m, &v| m.max(v - 1.0));
    let min_value = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    Ok(ModulusCurve { values, monotonicity_violation: violation, max_value_excess: max_excess, min_value })
}

/// Norm behavior of a section in the normalized class `D^e`.
#[derive(Debug, Clone)]
pub struct NormMonotoneReport {
    pub norms: Vec<f64>,
    /// Largest decrease between consecutive norms (must be 0: norms are
    /// nondecreasing).
    pub max_decrease: f64,
    /// `| |x_h| - 1 |`: the gap of the first sample from the limit value 1.
    pub limit_gap: f64,
    /// Largest deficit of a norm below 1.
    pub below_one: f64,
}

/// Checks that `t -> |x_t|` is nondecreasing with limit 1 at the origin for
/// a section in `D^e`.  The membership `<x_t, e_t> = 1` is validated first.
pub fn norm_monotone_check(
    x: &CoherentSection,
    e: &ExpReference,
    t_cells: usize,
) -> Result<NormMonotoneReport> {
    let mut worst_membership = 0.0_f64;
    for k in 1..=t_cells {
        let ip = x.value(k)?.inner(&e.value(k)?)?;
        worst_membership = worst_membership.max((ip - C::new(1.0, 0.0)).norm());
    }
    if worst_membership > 1e-9 {
        return Err(Error::InvalidArgument {
            op: "norm_monotone_check",
            what: format!("section is not in D^e: worst <x_t, e_t> deviation {worst_membership:.3e}"),
        });
    }
    let norms: Vec<f64> = (1..=t_cells).map(|k| x.value(k).unwrap().norm()).collect();
    let mut max_decrease = 0.0_f64;
    for w in norms.windows(2) {
        max_decrease = max_decrease.max(w[0] - w[1]);
    }
    let limit_gap = (norms[0] - 1.0).abs();
    let below_one = norms.iter().fold(0.0_f64, |m, &v| m.max(1.0 - v));
    Ok(NormMonotoneReport { norms, max_decrease, limit_gap, below_one })
}

/// Slack of the two-time inequality
/// `|<x_s, y_s> - <x_t, y_t>| <= |x_T| |y_T|
///  sqrt((|x_t|^2 - |x_s|^2)(|y_t|^2 - |y_s|^2))`
/// for sections in `D^e`; nonnegative slack verifies it.
pub fn ineq_76_check(
    x: &CoherentSection,
    y: &CoherentSection,
    s_cells: usize,
    t_cells: usize,
    cap_cells: usize,
) -> Result<f64> {
    if !(s_cells < t_cells && t_cells <= cap_cells) {
        return Err(Error::InvalidArgument { op: "ineq_76_check", what: "need s < t <= T".into() });
    }
    let ip_s = x.value(s_cells)?.inner(&y.value(s_cells)?)?;
    let ip_t = x.value(t_cells)?.inner(&y.value(t_cells)?)?;
    let lhs = (ip_s - ip_t).norm();
    let xs = x.value(s_cells)?.norm();
    let xt = x.value(t_cells)?.norm();
    let ys = y.value(s_cells)?.norm();
    let yt = y.value(t_cells)?.norm();
    let growth = ((xt * xt - xs * xs).max(0.0) * (yt * yt - ys * ys).max(0.0)).sqrt();
    let rhs = x.value(cap_cells)?.norm() * y.value(cap_cells)?.norm() * growth;
    Ok(rhs - lhs)
}

#[cfg(test)]
mod tests {
    use super::super::vectors::random_section;
    use super::*;
    use crate::grid::TimeGrid;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.125, 64).unwrap()
    }

    #[test]
    fn modulus_of_constant_against_vacuum_is_exponential_decay() {
        // x_t = e^{-t/2} exp(1), y = vacuum: |<x_t, y_t>| = e^{-t/2}.
        let e1 = ExpReference::new(grid(), vec![C::new(1.0, 0.0)], 32).unwrap();
        let x = e1.as_section().unwrap();
        let vac = ExpReference::vacuum(grid(), 1, 32).unwrap().as_section().unwrap();
        let curve = modulus_curve(&x, &vac, 32).unwrap();
        for (k, v) in curve.values.iter().enumerate() {
            let t = grid().time_of(k + 1);
            assert_abs_diff_eq!(*v, (-t / 2.0).exp(), epsilon = 1e-12);
        }
        assert_eq!(curve.monotonicity_violation, 0.0);
        assert!(curve.max_value_excess <= 1e-12);
        assert!(curve.min_value > 0.0);
    }

    #[test]
    fn modulus_of_a_section_with_itself_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(281);
        let x = random_section(&mut rng, grid(), 1, 16, 1.0).unit_normalize().unwrap();
        let curve = modulus_curve(&x, &x, 16).unwrap();
        for v in &curve.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_unit_sections_are_monotone_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(283);
        for _ in 0..10 {
            let x = random_section(&mut rng, grid(), 2, 24, 1.0).unit_normalize().unwrap();
            let y = random_section(&mut rng, grid(), 2, 24, 1.0).unit_normalize().unwrap();
            let curve = modulus_curve(&x, &y, 24).unwrap();
            assert!(curve.monotonicity_violation <= 1e-12, "violation {}", curve.monotonicity_violation);
            assert!(curve.max_value_excess <= 1e-12);
            assert!(curve.min_value > 0.0);
        }
    }

    #[test]
    fn first_sample_approaches_one_under_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(293);
        let x0 = random_section(&mut rng, grid(), 1, 8, 1.0);
        let y0 = random_section(&mut rng, grid(), 1, 8, 1.0);
        let mut gaps = Vec::new();
        let mut mx = x0.master().clone();
        let mut my = y0.master().clone();
        for _ in 0..3 {
            let lambdas_x = vec![C::new(1.0, 0.0); mx.len_cells()];
            let lambdas_y = vec![C::new(1.0, 0.0); my.len_cells()];
            let x = CoherentSection::new(mx.clone(), lambdas_x).unwrap().unit_normalize().unwrap();
            let y = CoherentSection::new(my.clone(), lambdas_y).unwrap().unit_normalize().unwrap();
            let curve = modulus_curve(&x, &y, 4).unwrap();
            gaps.push(1.0 - curve.values[0]);
            mx = mx.refine();
            my = my.refine();
        }
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "gaps {gaps:?}");
    }

    #[test]
    fn non_normalized_sections_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(307);
        let x = random_section(&mut rng, grid(), 1, 8, 1.0);
        assert!(modulus_curve(&x, &x, 8).is_err());
    }

    #[test]
    fn norms_nondecreasing_with_limit_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(311);
        let e = ExpReference::new(grid(), vec![C::new(0.5, -0.1)], 32).unwrap();
        for _ in 0..10 {
            let x = random_section(&mut rng, grid(), 1, 32, 1.0).de_normalize(&e).unwrap();
            let report = norm_monotone_check(&x, &e, 32).unwrap();
            assert!(report.max_decrease <= 1e-12, "decrease {}", report.max_decrease);
            assert!(report.below_one <= 1e-12);
        }
    }

    #[test]
    fn reference_section_has_constant_unit_norm() {
        let e = ExpReference::new(grid(), vec![C::new(0.7, 0.2)], 16).unwrap();
        let report = norm_monotone_check(&e.as_section().unwrap(), &e, 16).unwrap();
        assert!(report.max_decrease <= 1e-13);
        assert!(report.limit_gap <= 1e-13);
        for n in &report.norms {
            assert_abs_diff_eq!(*n, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn norm_limit_gap_shrinks_under_refinement() {
        // |x_h| = e^{|f_1 - eps|^2 h / 2}: the gap from 1 halves with h.
        let mut rng = ChaCha8Rng::seed_from_u64(313);
        let e0 = ExpReference::new(grid(), vec![C::new(0.3, 0.0)], 8).unwrap();
        let x0 = random_section(&mut rng, grid(), 1, 8, 1.0);
        let mut master = x0.master().clone();
        let mut e = e0;
        let mut gaps = Vec::new();
        for _ in 0..3 {
            let section = CoherentSection::new(master.clone(), vec![C::new(1.0, 0.0); master.len_cells()])
                .unwrap()
                .de_normalize(&e)
                .unwrap();
            let report = norm_monotone_check(&section, &e, 4).unwrap();
            gaps.push(report.limit_gap);
            master = master.refine();
            e = e.refine().unwrap();
        }
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "gaps {gaps:?}");
    }

    #[test]
    fn inequality_slack_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(317);
        let e = ExpReference::new(grid(), vec![C::new(0.4, 0.1)], 32).unwrap();
        for _ in 0..50 {
            let x = random_section(&mut rng, grid(), 1, 32, 1.0).de_normalize(&e).unwrap();
            let y = random_section(&mut rng, grid(), 1, 32, 1.0).de_normalize(&e).unwrap();
            let s = rng.random_range(1..16);
            let t = rng.random_range((s + 1)..=24);
            let slack = ineq_76_check(&x, &y, s, t, 32).unwrap();
            assert!(slack >= -1e-12, "slack {slack}");
        }
    }

    #[test]
    fn inequality_with_the_reference_has_zero_lhs() {
        // <e_t, y_t> = 1 for y in D^e, so the left side vanishes and the
        // slack equals the right side.
        let mut rng = ChaCha8Rng::seed_from_u64(331);
        let e = ExpReference::new(grid(), vec![C::new(0.4, 0.1)], 32).unwrap();
        let y = random_section(&mut rng, grid(), 1, 32, 1.0).de_normalize(&e).unwrap();
        let slack = ineq_76_check(&e.as_section().unwrap(), &y, 4, 9, 32).unwrap();
        assert!(slack >= 0.0);
        // by self-adjointness the inner products <e, y> are exactly 1
        let ip_s = e.as_section().unwrap().value(4).unwrap().inner(&y.value(4).unwrap()).unwrap();
        assert!((ip_s - C::new(1.0, 0.0)).norm() <= 1e-12);
    }
}
