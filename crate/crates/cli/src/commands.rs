//! One driver per subcommand: build the configured pipeline, run it, record
//! residuals, emit the report.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pathspace_core::cocycles::{
    cocycle2_residual, gamma_of_section, solve_cocycle1, trivialize_gamma, trivialize_multiplier,
    CocycleFamily,
};
use pathspace_core::declog::{
    b_limit, ineq_76_check, modulus_curve, norm_monotone_check, random_section, CoherentSection,
    ExpReference,
};
use pathspace_core::fock::{
    diagonal_counterexample_zeta, diagonal_sample_set, pair_entire, strong_span_witness,
};
use pathspace_core::forms::{cpd_check, pd_root_check, AdditiveForm, PathForm};
use pathspace_core::path::PathSection;
use pathspace_core::planar::{concat_potential, integrate, PlanarPath, Potential};
use pathspace_core::product::{multiply, pvec_inner, standard_iso, ProductVector};
use pathspace_core::sampling;
use pathspace_core::{Error, StepPath, TimeGrid};

use crate::report::{Report, ResolvedConfig};
use crate::Opts;

#[derive(Debug)]
pub enum CmdError {
    BadInput(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::OffGrid { .. }
            | Error::BeyondHorizon { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidArgument { .. } => CmdError::BadInput(e.to_string()),
            other => CmdError::BadInput(other.to_string()),
        }
    }
}

type CmdResult = Result<i32, CmdError>;

/// Builds the grid from the options: an explicit step wins, otherwise the
/// step is derived so that `t` spans `2^levels` cells.
fn make_grid(opts: &Opts, default_cells: usize) -> Result<(TimeGrid, usize), CmdError> {
    let t = opts.t;
    if !(t > 0.0) {
        return Err(CmdError::BadInput(format!("t must be positive, got {t}")));
    }
    let (h, cells) = match opts.grid_step {
        Some(h) => {
            let cells = t / h;
            let rounded = cells.round();
            if (cells - rounded).abs() > 1e-9 * cells.abs().max(1.0) {
                return Err(CmdError::BadInput(format!("t = {t} is not a multiple of the grid step {h}")));
            }
            (h, rounded as usize)
        }
        None => (t / default_cells as f64, default_cells),
    };
    let n_max = opts.grid_max.unwrap_or(cells.max(2));
    if n_max < cells {
        return Err(CmdError::BadInput(format!("grid_max = {n_max} is below the {cells} cells t spans")));
    }
    Ok((TimeGrid::new(h, n_max)?, cells))
}

fn config_entry(opts: &Opts, grid: &TimeGrid, samples: usize) -> ResolvedConfig {
    ResolvedConfig {
        grid_step: grid.step(),
        grid_max: grid.n_max(),
        t: opts.t,
        dim: opts.dim,
        seed: opts.seed,
        tol: opts.tol,
        levels: opts.levels,
        samples,
    }
}

/// converge-log: partition sums along the dyadic schedule for the
/// unit-path pair, with the closed-form oracle.
pub fn converge_log(opts: &Opts) -> CmdResult {
    let cells = 1usize << opts.levels;
    let (grid, t_cells) = make_grid(opts, cells)?;
    if t_cells & (t_cells - 1) != 0 {
        return Err(CmdError::BadInput(format!(
            "converge-log needs a power-of-two cell count, got {t_cells}"
        )));
    }
    let levels = t_cells.trailing_zeros() as usize;
    let e = ExpReference::vacuum(grid, 1, t_cells)?;
    let master = StepPath::constant_real(grid, t_cells, 1.0)?;
    let x = CoherentSection::new(master, vec![C::new(1.0, 0.0); t_cells])?;
    let table = b_limit(&x, &x, &e, t_cells, levels)?;

    let mut report = Report::new("converge-log", config_entry(opts, &grid, 0));
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|r| vec![r.intervals as f64, r.mesh, r.value.re, r.value.im, r.oracle_gap])
        .collect();
    report.set_table(vec!["n", "mesh", "b_re", "b_im", "oracle_gap"], rows);
    report.check("final_oracle_gap", table.rows.last().unwrap().oracle_gap, 1e-3);
    // O(1/n) decay: each halving of the mesh must at least halve the gap
    // up to a 25% slack
    let mut worst_decay = 0.0_f64;
    for w in table.rows.windows(2) {
        if w[0].oracle_gap > 1e-14 {
            worst_decay = worst_decay.max(w[1].oracle_gap / w[0].oracle_gap);
        }
    }
    report.metric("dyadic_decay_ratio", worst_decay, 0.0, 0.625);
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// cocycle: recovery of synthesized 1-cocycles, or the ramp trivialization
/// demo.
pub fn cocycle(opts: &Opts, demo: Option<&str>) -> CmdResult {
    match demo {
        None => {
            let (grid, t_cells) = make_grid(opts, 16)?;
            let horizon = grid.n_max().max(3 * t_cells);
            let grid = TimeGrid::new(grid.step(), horizon)?;
            let samples = opts.samples.unwrap_or(100);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut worst = 0.0_f64;
            for _ in 0..samples {
                let f = sampling::random_paths(&mut rng, grid, 1, opts.dim, horizon, 1.0).remove(0);
                let fam = CocycleFamily::coboundary_of(&f, t_cells)?;
                let rec = solve_cocycle1(&fam, opts.tol)?;
                for k in 1..=rec.len_cells().min(f.len_cells()) {
                    for j in 0..opts.dim {
                        let expected = f.cell(k)[j] - f.cell(1)[j];
                        worst = worst.max((rec.cell(k)[j] - expected).norm());
                    }
                }
            }
            let mut report = Report::new("cocycle", config_entry(opts, &grid, samples));
            report.check("recovery_residual", worst, opts.tol);
            report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
        }
        Some("ramp") => {
            let (grid, t_cells) = make_grid(opts, 16)?;
            let horizon = grid.n_max().max(3 * t_cells);
            let grid = TimeGrid::new(grid.step(), horizon)?;
            let section = PathSection::ramp(grid)?;
            let table = gamma_of_section(&section, horizon)?;
            let triv = trivialize_gamma(&table, t_cells, opts.tol.min(1e-12))?;
            let mut closed_form = 0.0_f64;
            for t in 1..=t_cells {
                let u_t = &triv.u[t - 1];
                for k in 1..=u_t.len_cells() {
                    let expect = if k > t { grid.time_of(t) } else { 0.0 };
                    closed_form = closed_form.max((u_t.cell(k)[0] - C::new(expect, 0.0)).norm());
                }
                let phi_t = triv.phi.value(t)?;
                for k in 1..=t {
                    closed_form =
                        closed_form.max((phi_t.cell(k)[0] + C::new(grid.cell_left(k), 0.0)).norm());
                }
            }
            let mut report = Report::new("cocycle", config_entry(opts, &grid, 0));
            report.check("ramp_closed_form", closed_form, 1e-12);
            report.check("shift_equation_residual", triv.residual, 1e-12);
            report.check("two_cocycle_residual", cocycle2_residual(&table), 1e-12);
            report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
        }
        Some(other) => Err(CmdError::BadInput(format!("unknown demo '{other}' (expected ramp)"))),
    }
}

/// gamma: the 2-cocycle table of a chosen section and its trivialization.
pub fn gamma(opts: &Opts, section_kind: &str) -> CmdResult {
    let (grid, t_cells) = make_grid(opts, 16)?;
    let horizon = grid.n_max().max(3 * t_cells);
    let grid = TimeGrid::new(grid.step(), horizon)?;
    let section = match section_kind {
        "ramp" => PathSection::ramp(grid)?,
        "constant" => PathSection::constant(grid, &vec![C::new(1.0, 0.0); opts.dim])?,
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            PathSection::from_master(
                sampling::random_paths(&mut rng, grid, 1, opts.dim, horizon, 1.0).remove(0),
            )
        }
        other => {
            return Err(CmdError::BadInput(format!(
                "unknown section '{other}' (expected ramp, constant or random)"
            )))
        }
    };
    let table = gamma_of_section(&section, horizon)?;
    let triv = trivialize_gamma(&table, t_cells, opts.tol)?;
    let mut report = Report::new("gamma", config_entry(opts, &grid, 0));
    report.check("support_residual", table.support_residual(), 1e-14);
    report.check("stabilization_residual", table.stabilization_residual(), opts.tol);
    report.check("two_cocycle_residual", cocycle2_residual(&table), opts.tol);
    report.check("shift_equation_residual", triv.residual, 10.0 * opts.tol);
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// multiplier: synthesized coboundaries and the quadratic-phase example.
pub fn multiplier(opts: &Opts) -> CmdResult {
    let (grid, t_cells) = make_grid(opts, 32)?;
    let n = t_cells.max(4);
    let samples = opts.samples.unwrap_or(10);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let v: Vec<C> = (0..=n).map(|_| sampling::random_phase(&mut rng)).collect();
        let c0 = move |s: usize, t: usize| v[s] * v[t] / v[s + t];
        let sol = trivialize_multiplier(&c0, n, opts.tol)?;
        worst = worst.max(sol.reconstruction_residual);
    }
    let h = grid.step();
    let c0 = move |s: usize, t: usize| -> C {
        let st = (s as f64 * h) * (t as f64 * h);
        C::new(st.cos(), st.sin())
    };
    let sol = trivialize_multiplier(&c0, n, opts.tol)?;
    let reference = |k: usize| -> C {
        let t = k as f64 * h;
        C::new((t * t / 2.0).cos(), -(t * t / 2.0).sin())
    };
    let ratio: Vec<C> = (1..=n).map(|k| sol.u[k - 1] / reference(k)).collect();
    let mut character_dev = 0.0_f64;
    for k in 1..n {
        character_dev = character_dev.max((ratio[k] / ratio[k - 1] - ratio[0]).norm());
    }
    let mut report = Report::new("multiplier", config_entry(opts, &grid, samples));
    report.check("coboundary_reconstruction", worst, (opts.tol / 100.0).max(1e-12));
    report.check("quadratic_phase_reconstruction", sol.reconstruction_residual, (opts.tol / 100.0).max(1e-12));
    report.check("character_deviation", character_dev, (opts.tol / 100.0).max(1e-12));
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// cpd: projected Gram eigenvalues of the built-in kernels.
pub fn cpd(opts: &Opts) -> CmdResult {
    let (grid, t_cells) = make_grid(opts, 8)?;
    let samples = opts.samples.unwrap_or(40);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let paths = sampling::random_real_paths(&mut rng, grid, samples, t_cells, 1.0);
    let mut report = Report::new("cpd", config_entry(opts, &grid, samples));
    for form in [
        AdditiveForm::Inner,
        AdditiveForm::Gaussian { c: 1.0 },
        AdditiveForm::Poisson { c: 1.0, h0: 1.5 },
    ] {
        let min = cpd_check(&form, &paths)?;
        report.check_at_least(&format!("projected_min_eig[{}]", form.label()), min, -1e-8);
    }
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// pd-root: rooted kernels e^{g/n} stay positive definite.
pub fn pd_root(opts: &Opts) -> CmdResult {
    let (grid, t_cells) = make_grid(opts, 8)?;
    let samples = opts.samples.unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let paths = sampling::random_real_paths(&mut rng, grid, samples, t_cells, 1.0);
    let roots = [1.0, 2.0, 4.0, 8.0];
    let mut report = Report::new("pd-root", config_entry(opts, &grid, samples));
    for form in [AdditiveForm::Gaussian { c: 1.0 }, AdditiveForm::Poisson { c: 1.0, h0: 1.5 }] {
        let min = pd_root_check(&form, &paths, &roots)?;
        report.check_at_least(&format!("rooted_min_eig[{}]", form.label()), min, -1e-8);
    }
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// span: strong-spanning witnesses; with --counterexample, the diagonal set
/// that spans C^2 but is not strongly spanning.
pub fn span(opts: &Opts, counterexample: bool) -> CmdResult {
    let samples = opts.samples.unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let zeta = diagonal_counterexample_zeta();
    let grid = TimeGrid::new(opts.grid_step.unwrap_or(1.0), opts.grid_max.unwrap_or(2))
        .map_err(CmdError::from)?;
    let mut report = Report::new("span", config_entry(opts, &grid, samples));
    if counterexample {
        let scales: Vec<C> = (0..samples).map(|_| sampling::random_complex(&mut rng, 1.5)).collect();
        let set = diagonal_sample_set(&scales);
        let witness = strong_span_witness(&set, &zeta).map_err(CmdError::from)?;
        report.check("counterexample_witness", witness, 1e-12);
        let control = pair_entire(&zeta, &[C::new(1.0, 0.0), C::new(0.0, 0.0)]).map_err(CmdError::from)?;
        report.check(
            "generic_control_pairing",
            (control - C::new(1.0 / 2.0_f64.sqrt(), 0.0)).norm(),
            1e-12,
        );
    } else {
        let set: Vec<Vec<C>> = (0..samples.max(30))
            .map(|_| sampling::random_vector(&mut rng, 2, 1.0))
            .collect();
        let witness = strong_span_witness(&set, &zeta).map_err(CmdError::from)?;
        report.check_at_least("dense_sample_witness", witness, 1e-6);
    }
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// iso: isometry and multiplicativity of the standard isomorphism for the
/// vacuum, constant and ramp references.
pub fn iso(opts: &Opts) -> CmdResult {
    let (grid, t_cells) = make_grid(opts, 4)?;
    let horizon = grid.n_max().max(3 * (2 * t_cells).max(8));
    let grid = TimeGrid::new(grid.step(), horizon)?;
    let phi_horizon = (2 * t_cells).max(8);
    let form = AdditiveForm::Inner;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples = opts.samples.unwrap_or(5);

    let ramp_section = PathSection::ramp(grid)?;
    let ramp_phi = trivialize_gamma(&gamma_of_section(&ramp_section, horizon)?, phi_horizon, 1e-12)?.phi;
    let references: Vec<(&str, PathSection, CocycleFamily)> = vec![
        (
            "vacuum",
            PathSection::constant(grid, &[C::new(0.0, 0.0)])?,
            CocycleFamily::zero_shift(grid, 1, phi_horizon)?,
        ),
        (
            "constant",
            PathSection::constant(grid, &[C::new(0.5, 0.3)])?,
            CocycleFamily::zero_shift(grid, 1, phi_horizon)?,
        ),
        ("ramp", ramp_section, ramp_phi),
    ];
    let mut report = Report::new("iso", config_entry(opts, &grid, samples));
    for (name, section, phi) in &references {
        let mk = |rng: &mut ChaCha8Rng, len: usize| {
            let paths = sampling::random_paths(rng, grid, 2, 1, len, 0.8);
            ProductVector::new(vec![
                (sampling::random_complex(rng, 1.0), paths[0].clone()),
                (sampling::random_complex(rng, 1.0), paths[1].clone()),
            ])
            .unwrap()
        };
        let mut iso_res = 0.0_f64;
        let mut mult_res = 0.0_f64;
        for _ in 0..samples {
            let u = mk(&mut rng, t_cells);
            let v = mk(&mut rng, t_cells);
            let wu = standard_iso(&form, section, phi, &u)?;
            let wv = standard_iso(&form, section, phi, &v)?;
            iso_res = iso_res.max((wu.inner(&wv)? - pvec_inner(&form, &u, &v)?).norm());
            let s = mk(&mut rng, t_cells.max(2) - 1);
            let uv = multiply(&u, &s, None)?;
            let w_uv = standard_iso(&form, section, phi, &uv)?;
            let w_u_w_s = wu.product(&standard_iso(&form, section, phi, &s)?)?;
            let probe = standard_iso(&form, section, phi, &mk(&mut rng, uv.t_cells()))?;
            mult_res = mult_res.max((w_uv.inner(&probe)? - w_u_w_s.inner(&probe)?).norm());
        }
        report.check(&format!("isometry[{name}]"), iso_res, 1e-12);
        report.check(&format!("multiplicativity[{name}]"), mult_res, 1e-12);
    }
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// ineq: norm monotonicity and the two-time inequality over random
/// normalized sections.
pub fn ineq(opts: &Opts) -> CmdResult {
    let (grid, t_cells) = make_grid(opts, 32)?;
    let samples = opts.samples.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let e = ExpReference::new(grid, sampling::random_vector(&mut rng, opts.dim, 0.3), t_cells)
        .map_err(CmdError::from)?;
    let mut worst_decrease = 0.0_f64;
    let mut worst_below_one = 0.0_f64;
    let mut min_slack = f64::INFINITY;
    for _ in 0..samples {
        let x = random_section(&mut rng, grid, opts.dim, t_cells, 1.0).de_normalize(&e)?;
        let y = random_section(&mut rng, grid, opts.dim, t_cells, 1.0).de_normalize(&e)?;
        let report = norm_monotone_check(&x, &e, t_cells)?;
        worst_decrease = worst_decrease.max(report.max_decrease);
        worst_below_one = worst_below_one.max(report.below_one);
        if t_cells >= 3 {
            let s = rng.random_range(1..(t_cells - 1));
            let t = rng.random_range((s + 1)..t_cells);
            min_slack = min_slack.min(ineq_76_check(&x, &y, s, t, t_cells)?);
        }
    }
    let mut report = Report::new("ineq", config_entry(opts, &grid, samples));
    report.check("norm_monotonicity_violation", worst_decrease, 1e-12);
    report.check("norm_below_one", worst_below_one, 1e-12);
    report.check_at_least("two_time_inequality_slack", min_slack, -1e-12);
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// modulus: modulus curves of unit sections plus a two-level refinement
/// study of the first sample.
pub fn modulus(opts: &Opts) -> CmdResult {
    let (grid, t_cells) = make_grid(opts, 16)?;
    let samples = opts.samples.unwrap_or(10);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst_violation = 0.0_f64;
    let mut worst_excess = 0.0_f64;
    let mut min_value = f64::INFINITY;
    let mut curve_rows: Vec<Vec<f64>> = Vec::new();
    for run in 0..samples {
        let x = random_section(&mut rng, grid, opts.dim, t_cells, 1.0).unit_normalize()?;
        let y = random_section(&mut rng, grid, opts.dim, t_cells, 1.0).unit_normalize()?;
        let curve = modulus_curve(&x, &y, t_cells)?;
        worst_violation = worst_violation.max(curve.monotonicity_violation);
        worst_excess = worst_excess.max(curve.max_value_excess);
        min_value = min_value.min(curve.min_value);
        if run == 0 {
            for (k, v) in curve.values.iter().enumerate() {
                curve_rows.push(vec![grid.time_of(k + 1), *v]);
            }
        }
    }
    // refinement study of the first sample
    let x0 = random_section(&mut rng, grid, opts.dim, t_cells, 1.0);
    let y0 = random_section(&mut rng, grid, opts.dim, t_cells, 1.0);
    let mut mx = x0.master().clone();
    let mut my = y0.master().clone();
    let mut gaps = Vec::new();
    for _ in 0..3 {
        let x = CoherentSection::new(mx.clone(), vec![C::new(1.0, 0.0); mx.len_cells()])?
            .unit_normalize()?;
        let y = CoherentSection::new(my.clone(), vec![C::new(1.0, 0.0); my.len_cells()])?
            .unit_normalize()?;
        let curve = modulus_curve(&x, &y, mx.len_cells())?;
        gaps.push(1.0 - curve.values[0]);
        mx = mx.refine();
        my = my.refine();
    }
    let mut report = Report::new("modulus", config_entry(opts, &grid, samples));
    report.set_table(vec!["t", "modulus"], curve_rows);
    report.check("monotonicity_violation", worst_violation, 1e-12);
    report.check("value_excess_above_one", worst_excess, 1e-12);
    report.check_at_least("min_value_positive", min_value, f64::MIN_POSITIVE);
    report.check_at_least("first_sample_gap_shrinks", (gaps[0] - gaps[1]).min(gaps[1] - gaps[2]), 0.0);
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}

/// demo-obstacle: concatenation around a disk obstacle with step-halving
/// fidelity.
pub fn demo_obstacle(opts: &Opts) -> CmdResult {
    let steps = opts.samples.unwrap_or(20).max(4);
    let h = opts.grid_step.unwrap_or(opts.t / steps as f64);
    let v = Potential::Disk { center: [3.0, 0.0], radius: 1.0, strength: 1.0 };
    let drive_f = |t: f64| [t.sin(), t.cos() - 1.0];
    let drive_g = |_t: f64| [0.3, 0.1];
    let run = |h: f64, steps: usize| -> Result<PlanarPath, CmdError> {
        let phi_f: Vec<[f64; 2]> = (0..steps).map(|k| drive_f(k as f64 * h)).collect();
        let phi_g: Vec<[f64; 2]> = (0..steps).map(|k| drive_g(k as f64 * h)).collect();
        let f = integrate(&phi_f, &v, h)?;
        let g = integrate(&phi_g, &v, h)?;
        Ok(concat_potential(&f, &g, &v)?)
    };
    let coarse = run(h, steps)?;
    let fine = run(h / 2.0, steps * 2)?;
    let finest = run(h / 4.0, steps * 4)?;
    let dev = |a: &PlanarPath, b: &PlanarPath| -> f64 {
        a.points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let q = b.points[2 * k];
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    };
    let d1 = dev(&coarse, &fine);
    let d2 = dev(&fine, &finest);
    let ratio = if d2 > 0.0 { d1 / d2 } else { 2.0 };
    let grid = TimeGrid::new(h, (2 * steps).max(2)).map_err(CmdError::from)?;
    let mut report = Report::new("demo-obstacle", config_entry(opts, &grid, steps));
    report.set_table(
        vec!["h", "deviation_to_half_step"],
        vec![vec![h, d1], vec![h / 2.0, d2]],
    );
    // explicit Euler: deviation between successive refinements shrinks
    // first order, so the ratio sits near 2
    report.metric("step_halving_ratio", ratio, 1.4, 4.0);
    report.emit(opts.format, opts.out.as_deref()).map_err(CmdError::Io)
}
