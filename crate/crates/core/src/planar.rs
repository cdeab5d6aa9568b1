//! Offset concatenation of sampled real paths, and concatenation of planar
//! paths around an obstacle through a repulsive potential flow.

use crate::error::{Error, Result};

/// A real scalar path sampled at grid points `0, h, 2h, ...` with `f(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub h: f64,
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn new(h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {h}")));
        }
        if values.is_empty() || values[0] != 0.0 {
            return Err(Error::InvalidArgument {
                op: "SampledPath::new",
                what: "paths start at zero: values[0] must be 0".into(),
            });
        }
        Ok(SampledPath { h, values })
    }

    pub fn len_steps(&self) -> usize {
        self.values.len() - 1
    }
}

/// Offset concatenation: the result runs `f` first, then `g` translated to
/// start at `f`'s endpoint.
pub fn concat_offset(f: &SampledPath, g: &SampledPath) -> Result<SampledPath> {
    if f.h != g.h {
        return Err(Error::GridMismatch);
    }
    let mut values = f.values.clone();
    let offset = *f.values.last().unwrap();
    values.extend(g.values[1..].iter().map(|v| offset + v));
    SampledPath::new(f.h, values)
}

/// A planar path sampled at grid points, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPath {
    pub h: f64,
    pub points: Vec<[f64; 2]>,
}

impl PlanarPath {
    pub fn new(h: f64, points: Vec<[f64; 2]>) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {h}")));
        }
        if points.is_empty() || points[0] != [0.0, 0.0] {
            return Err(Error::InvalidArgument {
                op: "PlanarPath::new",
                what: "planar paths start at the origin".into(),
            });
        }
        Ok(PlanarPath { h, points })
    }

    pub fn len_steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// A repulsive obstacle potential `V(x) = strength / dist(x, K)` for a disk
/// `K`, normalized so the gradient vanishes at the origin.  An empty
/// obstacle gives `V = 0`.
#[derive(Debug, Clone, Copy)]
pub enum Potential {
    Zero,
    Disk { center: [f64; 2], radius: f64, strength: f64 },
}

impl Potential {
    /// Distance to the obstacle; `None` for the empty obstacle.
    pub fn distance(&self, p: [f64; 2]) -> Option<f64> {
        match self {
            Potential::Zero => None,
            Potential::Disk { center, radius, .. } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                Some((dx * dx + dy * dy).sqrt() - radius)
            }
        }
    }

    /// Raw gradient of `V` (before the normalization shift).
    fn raw_grad(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            Potential::Zero => [0.0, 0.0],
            Potential::Disk { center, radius, strength } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let r = (dx * dx + dy * dy).sqrt();
                let d = r - radius;
                // V = strength / d; grad V = -strength / d^2 * (x - c) / r
                let factor = -strength / (d * d * r);
                [factor * dx, factor * dy]
            }
        }
    }

    /// Gradient of the normalized potential `V(x) - <grad V(0), x>`, which
    /// vanishes at the origin.
    pub fn grad(&self, p: [f64; 2]) -> [f64; 2] {
        let g = self.raw_grad(p);
        let g0 = self.raw_grad([0.0, 0.0]);
        [g[0] - g0[0], g[1] - g0[1]]
    }
}

/// Recovers the discrete driving function of a path under the explicit-Euler
/// bijection: `phi(k h) = (f_{k+1} - f_k) / h + grad V(f_k)`.
pub fn driving_function(f: &PlanarPath, v: &Potential) -> Vec<[f64; 2]> {
    (0..f.len_steps())
        .map(|k| {
            let grad = v.grad(f.points[k]);
            [
                (f.points[k + 1][0] - f.points[k][0]) / f.h + grad[0],
                (f.points[k + 1][1] - f.points[k][1]) / f.h + grad[1],
            ]
        })
        .collect()
}

/// Integrates `x' = phi - grad V(x)`, `x(0) = 0` by explicit Euler, failing
/// with the offending time if a step lands inside the obstacle.
pub fn integrate(phi: &[[f64; 2]], v: &Potential, h: f64) -> Result<PlanarPath> {
    let mut points = Vec::with_capacity(phi.len() + 1);
    points.push([0.0, 0.0]);
    for (k, drive) in phi.iter().enumerate() {
        let p = points[k];
        let grad = v.grad(p);
        let next = [p[0] + h * (drive[0] - grad[0]), p[1] + h * (drive[1] - grad[1])];
        if let Some(d) = v.distance(next) {
            if d <= 0.0 {
                return Err(Error::ObstacleHit { x: next[0], y: next[1], t: (k + 1) as f64 * h });
            }
        }
        points.push(next);
    }
    PlanarPath::new(h, points)
}

/// Concatenates two planar paths through the potential flow: the composite
/// driving function runs `f`'s drive, then the offset sum of both paths'
/// drives, and the result is re-integrated through the flow.
pub fn concat_potential(f: &PlanarPath, g: &PlanarPath, v: &Potential) -> Result<PlanarPath> {
    if f.h != g.h {
        return Err(Error::GridMismatch);
    }
    for p in f.points.iter().chain(&g.points) {
        if let Some(d) = v.distance(*p) {
            if d <= 0.0 {
                return Err(Error::ObstacleHit { x: p[0], y: p[1], t: 0.0 });
            }
        }
    }
    let phi_f = driving_function(f, v);
    let phi_g = driving_function(g, v);
    let s_end = phi_f.len();
    // composite drive: phi_f on [0, s); phi_f(s) + phi_g(l - s) after,
    // with the endpoint drive of f frozen (the offset rule applied to
    // driving functions).
    let f_end_drive = if s_end > 0 {
        phi_f[s_end - 1]
    } else {
        [0.0, 0.0]
    };
    let mut phi = phi_f.clone();
    for d in &phi_g {
        phi.push([f_end_drive[0] + d[0], f_end_drive[1] + d[1]]);
    }
    integrate(&phi, v, f.h)
}
