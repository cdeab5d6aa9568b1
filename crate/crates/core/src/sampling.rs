//! Seeded sample generators used by tests and the experiment harness.

use rand::Rng;

use crate::grid::TimeGrid;
use crate::numeric::C;
use crate::path::StepPath;

/// Complex d-dimensional step paths with entries uniform in `[-scale, scale]`.
pub fn random_paths(
    rng: &mut impl Rng,
    grid: TimeGrid,
    count: usize,
    dim: usize,
    len_cells: usize,
    scale: f64,
) -> Vec<StepPath> {
    (0..count)
        .map(|_| {
            let cells = (0..len_cells * dim)
                .map(|_| {
                    C::new(
                        rng.random_range(-scale..scale),
                        rng.random_range(-scale..scale),
                    )
                })
                .collect();
            StepPath::new(grid, dim, cells).expect("valid random path")
        })
        .collect()
}

/// Real scalar step paths (d = 1, zero imaginary part).
pub fn random_real_paths(
    rng: &mut impl Rng,
    grid: TimeGrid,
    count: usize,
    len_cells: usize,
    scale: f64,
) -> Vec<StepPath> {
    (0..count)
        .map(|_| {
            let cells = (0..len_cells)
                .map(|_| C::new(rng.random_range(-scale..scale), 0.0))
                .collect();
            StepPath::new(grid, 1, cells).expect("valid random path")
        })
        .collect()
}

/// A random complex scalar, uniform on a box.
pub fn random_complex(rng: &mut impl Rng, scale: f64) -> C {
    C::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

/// A random complex vector of the given dimension.
pub fn random_vector(rng: &mut impl Rng, dim: usize, scale: f64) -> Vec<C> {
    (0..dim).map(|_| random_complex(rng, scale)).collect()
}

/// A random unit-modulus complex scalar.
pub fn random_phase(rng: &mut impl Rng) -> C {
    let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    C::new(theta.cos(), theta.sin())
}
